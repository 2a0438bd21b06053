//! Time-domain simulation of the flux-modulated two-transmon system.
//!
//! The tunable transmon's frequency follows the applied flux
//! `Φ(t) = Φ_dc + Φ_ac u(t) cos(ω_p t + φ_p)` through its Fourier series
//! `f01(φ) = Σ_n ν_n cos(n φ)`. Under modulation the frequency splits into
//! harmonics weighted by Bessel functions, a sideband `n0` of the resulting
//! interaction is tuned to the fixed transmon, and the realized two-qubit
//! gate is XY(β, θ) with `g_eff = g |ε_{n0}|` and `β = n0 φ_p + α (+π)`.
//!
//! Everything here works in the interaction picture of the bare qubit
//! frequencies, on the single-excitation subspace spanned by (|01>, |10>)
//! with |FT> ordering (site 0 = fixed, site 1 = tunable).

use crate::error::XyError;
use crate::linalg::CMatrix;
use crate::qcore::{QuditSpace, Unitary};
use crate::special::bessel_j_all;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::sync::OnceLock;

/// σ of the error-function edge, 1/sqrt(32 ln 2).
pub fn envelope_sigma() -> f64 {
    1.0 / (32.0 * (2.0f64).ln()).sqrt()
}

/// Flux-tunable transmon characterized by the Fourier coefficients of its
/// frequency-vs-flux curve.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TunableTransmon {
    /// ν_n in Hz: f01(φ) = Σ_n ν_n cos(n φ), φ = 2π Φ/Φ0.
    pub nu_hz: Vec<f64>,
    /// DC flux bias angle 2π Φ_dc/Φ0.
    pub phi_dc: f64,
    /// Reserved for the qutrit extension; unused by the 01/10 simulation.
    pub anharmonicity_hz: f64,
}

impl TunableTransmon {
    pub fn new(nu_hz: Vec<f64>, phi_dc: f64) -> Result<Self, XyError> {
        if nu_hz.len() < 2 {
            return Err(XyError::InvalidParameter("need at least 2 Fourier coefficients".into()));
        }
        if nu_hz.iter().any(|v| !v.is_finite()) {
            return Err(XyError::InvalidParameter("non-finite Fourier coefficient".into()));
        }
        Ok(Self { nu_hz, phi_dc, anharmonicity_hz: 0.0 })
    }

    /// Standard asymmetric-SQUID transmon curve
    /// `f01(φ) = f_max [cos²(φ/2) + d² sin²(φ/2)]^{1/4}` with the asymmetry
    /// chosen to match the given tunability, Fourier-expanded and truncated
    /// where |ν_n| < 1 kHz.
    pub fn from_flux_curve(f_max_hz: f64, tunability_hz: f64) -> Result<Self, XyError> {
        if !(f_max_hz > 0.0) || !(tunability_hz > 0.0) || tunability_hz >= f_max_hz {
            return Err(XyError::InvalidParameter("bad flux-curve parameters".into()));
        }
        let d = ((f_max_hz - tunability_hz) / f_max_hz).powi(2);
        let f01 = |phi: f64| {
            f_max_hz
                * ((phi / 2.0).cos().powi(2) + d * d * (phi / 2.0).sin().powi(2)).powf(0.25)
        };
        // trapezoid rule on a periodic smooth function converges spectrally
        let m = 4096usize;
        let mut nu = Vec::new();
        for n in 0..64 {
            let mut acc = 0.0;
            for k in 0..m {
                let phi = TAU * k as f64 / m as f64;
                acc += f01(phi) * (n as f64 * phi).cos();
            }
            let coeff = if n == 0 { acc / m as f64 } else { 2.0 * acc / m as f64 };
            if n >= 2 && coeff.abs() < 1e3 {
                break;
            }
            nu.push(coeff);
        }
        Self::new(nu, 0.0)
    }

    /// Unmodulated frequency at flux angle `phi` (Hz).
    pub fn frequency_hz(&self, phi: f64) -> f64 {
        self.nu_hz.iter().enumerate().map(|(n, v)| v * (n as f64 * phi).cos()).sum()
    }

    /// True when |ν_n| is non-increasing beyond n = 1 (a sanity signal; the
    /// constructors accept violating lists).
    pub fn coefficients_decay(&self) -> bool {
        self.nu_hz.windows(2).skip(1).all(|w| w[1].abs() <= w[0].abs() + 1e-9)
    }
}

/// Flux modulation pulse with an erf-edged envelope.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FluxPulse {
    /// AC amplitude angle 2π Φ_ac/Φ0.
    pub phi_ac: f64,
    /// Modulation angular frequency (rad/s).
    pub omega_p: f64,
    /// Modulation phase (radians).
    pub phi_p: f64,
    pub t_rise_s: f64,
    /// Interaction (flat-top) time.
    pub tau_s: f64,
}

impl FluxPulse {
    pub fn new(
        phi_ac: f64,
        omega_p: f64,
        phi_p: f64,
        t_rise_s: f64,
        tau_s: f64,
    ) -> Result<Self, XyError> {
        if !(t_rise_s > 0.0) {
            return Err(XyError::InvalidParameter("t_rise must be positive".into()));
        }
        if tau_s < 0.0 {
            return Err(XyError::InvalidParameter("tau must be non-negative".into()));
        }
        Ok(Self { phi_ac, omega_p, phi_p, t_rise_s, tau_s })
    }

    pub fn t1_env(&self) -> f64 {
        self.t_rise_s / 2.0
    }

    pub fn t2_env(&self) -> f64 {
        self.tau_s + 1.5 * self.t_rise_s
    }

    /// Total footprint τ + 2 t_rise (fall mirrors the rise).
    pub fn total_duration_s(&self) -> f64 {
        self.tau_s + 2.0 * self.t_rise_s
    }

    /// `u(t) = { erf[(t−t1)/(σ t_rise)] − erf[(t−t2)/(σ t_rise)] } / 2`.
    pub fn envelope(&self, t: f64) -> f64 {
        let s = envelope_sigma() * self.t_rise_s;
        0.5 * (libm::erf((t - self.t1_env()) / s) - libm::erf((t - self.t2_env()) / s))
    }

    pub fn with_phase(mut self, phi_p: f64) -> Self {
        self.phi_p = phi_p;
        self
    }

    pub fn with_tau(mut self, tau_s: f64) -> Self {
        self.tau_s = tau_s;
        self
    }
}

/// Capacitively coupled fixed + tunable transmon pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoupledPair {
    /// Static coupling (Hz).
    pub g_hz: f64,
    /// Fixed transmon frequency (Hz).
    pub f_fixed_hz: f64,
    pub transmon: TunableTransmon,
    /// Resonant sideband index (usually −2 with the fixed transmon below
    /// the tunability band).
    pub sideband_n0: i32,
}

impl CoupledPair {
    pub fn new(
        g_hz: f64,
        f_fixed_hz: f64,
        transmon: TunableTransmon,
        sideband_n0: i32,
    ) -> Result<Self, XyError> {
        if !(g_hz > 0.0) {
            return Err(XyError::InvalidParameter("coupling g must be positive".into()));
        }
        if sideband_n0 == 0 {
            return Err(XyError::InvalidParameter("sideband n0 must be nonzero".into()));
        }
        Ok(Self { g_hz, f_fixed_hz, transmon, sideband_n0 })
    }

    /// Harmonic amplitudes ω_k (rad/s) of the modulated transmon frequency
    /// at instantaneous envelope value `u`:
    /// `ω_k = 2π Σ_n ν_n cos(n φ_dc + k π/2) J_k(n φ_ac u)`.
    pub fn harmonics(&self, phi_ac: f64, u: f64) -> Vec<f64> {
        let nmax = self.transmon.nu_hz.len() - 1;
        let x_max = nmax as f64 * phi_ac.abs() * u.abs();
        let kmax = (x_max.ceil() as usize + 22).max(8);
        let mut w = vec![0.0f64; kmax + 1];
        for (n, &nu) in self.transmon.nu_hz.iter().enumerate() {
            if nu == 0.0 {
                continue;
            }
            let js = bessel_j_all(kmax, n as f64 * phi_ac * u);
            for k in 0..=kmax {
                let c = (n as f64 * self.transmon.phi_dc + k as f64 * std::f64::consts::FRAC_PI_2)
                    .cos();
                w[k] += TAU * nu * c * js[k];
            }
        }
        // trim negligible high harmonics
        while w.len() > 3 && w.last().map_or(false, |v| v.abs() < 1e-3) {
            w.pop();
        }
        w
    }

    /// Instantaneous modulated transmon frequency (rad/s):
    /// `ω_T(t) = ω_0(t) + 2 Σ_{k≥1} ω_k(t) cos[k(ω_p t + φ_p)]`.
    ///
    /// The transient model follows the closed-form phase analysis: harmonic
    /// amplitudes switch on with the envelope, `ω_k(t) = u(t) ω_k` for k ≥ 1
    /// and `ω_0(t) = ω_T01 + u(t) (ω_0 − ω_T01)`.
    pub fn omega_t(&self, pulse: &FluxPulse, t: f64) -> f64 {
        let w = self.harmonics(pulse.phi_ac, 1.0);
        self.omega_t_with_harmonics(&w, pulse, t)
    }

    /// Same as [`Self::omega_t`] with precomputed full-amplitude harmonics
    /// (the integrator's hot path).
    pub fn omega_t_with_harmonics(&self, w_full: &[f64], pulse: &FluxPulse, t: f64) -> f64 {
        let u = pulse.envelope(t);
        let psi = pulse.omega_p * t + pulse.phi_p;
        let osc = omega_from_harmonics(w_full, psi) - w_full[0];
        let w0_t = self.omega_t01() + u * (w_full[0] - self.omega_t01());
        w0_t + u * osc
    }

    /// Mean modulated frequency ω_0 at full amplitude (rad/s).
    pub fn omega_zero(&self, phi_ac: f64) -> f64 {
        self.harmonics(phi_ac, 1.0)[0]
    }

    /// Unmodulated transmon frequency at the DC bias (rad/s).
    pub fn omega_t01(&self) -> f64 {
        TAU * self.transmon.frequency_hz(self.transmon.phi_dc)
    }

    pub fn omega_fixed(&self) -> f64 {
        TAU * self.f_fixed_hz
    }

    /// Modulation frequency placing sideband `n0` on resonance:
    /// `ω_0 + n0 ω_p = ω_F01`.
    pub fn resonant_omega_p(&self, phi_ac: f64) -> f64 {
        (self.omega_zero(phi_ac) - self.omega_fixed()) / (-self.sideband_n0 as f64)
    }
}

/// Chebyshev-style evaluation of `w0 + 2 Σ_{k≥1} w_k cos(k ψ)`.
fn omega_from_harmonics(w: &[f64], psi: f64) -> f64 {
    let c1 = psi.cos();
    let mut ck_prev = 1.0; // cos(0ψ)
    let mut ck = c1; // cos(1ψ)
    let mut acc = w[0];
    for &wk in &w[1..] {
        acc += 2.0 * wk * ck;
        let next = 2.0 * c1 * ck - ck_prev;
        ck_prev = ck;
        ck = next;
    }
    acc
}

// --- dynamical phase ---------------------------------------------------------

/// Δ(t) = ∫_0^t (ω_T − ω_F01) dt' by adaptive Simpson quadrature.
pub fn dynamical_phase_numeric(
    pair: &CoupledPair,
    pulse: &FluxPulse,
    t: f64,
    abs_tol: f64,
) -> Result<f64, XyError> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| pair.omega_t(pulse, x) - pair.omega_fixed();
    // split at envelope corners to help the adaptive scheme
    let mut knots = vec![0.0, pulse.t_rise_s, pulse.t_rise_s + pulse.tau_s, t];
    knots.retain(|&k| k >= 0.0 && k <= t);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
    let mut total = 0.0;
    for wdw in knots.windows(2) {
        total += adaptive_simpson(&f, wdw[0], wdw[1], abs_tol / knots.len() as f64, 60)?;
    }
    Ok(total)
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, XyError> {
    // seed with enough panels to resolve the modulation before adapting
    let n0 = 64usize;
    let h = (b - a) / n0 as f64;
    let mut total = 0.0;
    for i in 0..n0 {
        let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        let xm = 0.5 * (x0 + x1);
        let whole = (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
        total += simpson_rec(f, x0, x1, f(x0), f(xm), f(x1), whole, tol / n0 as f64, depth)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, XyError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || (b - a) < 1e-16 {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(XyError::IntegrationFailure("quadrature did not converge".into()));
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// Closed-form Δ(t) valid during the interaction window, including the
/// rise-time phase α:
/// `Δ(t) = (ω_0 − ω_F01) t + Σ_k (2ω_k / kω_p) sin[k(ω_p t + φ_p)] + α`.
pub fn dynamical_phase_analytic(pair: &CoupledPair, pulse: &FluxPulse, t: f64) -> f64 {
    let w = pair.harmonics(pulse.phi_ac, 1.0);
    let psi = pulse.omega_p * t + pulse.phi_p;
    let mut delta = (w[0] - pair.omega_fixed()) * t;
    for (k, &wk) in w.iter().enumerate().skip(1) {
        delta += 2.0 * wk / (k as f64 * pulse.omega_p) * (k as f64 * psi).sin();
    }
    delta + alpha_phase(pair, pulse)
}

/// The rise-time contribution α to the dynamical phase.
pub fn alpha_phase(pair: &CoupledPair, pulse: &FluxPulse) -> f64 {
    let w = pair.harmonics(pulse.phi_ac, 1.0);
    let mut alpha = 0.5 * (pair.omega_t01() - w[0]) * pulse.t_rise_s;
    let sigma = envelope_sigma();
    for (k, &wk) in w.iter().enumerate().skip(1) {
        let kf = k as f64;
        let suppress = (-(0.5 * sigma * kf * pulse.omega_p * pulse.t_rise_s).powi(2)).exp();
        let arg = kf * (0.5 * pulse.omega_p * pulse.t_rise_s + pulse.phi_p);
        alpha -= suppress * 2.0 * wk / (kf * pulse.omega_p) * arg.sin();
    }
    alpha
}

// --- sideband weights ---------------------------------------------------------

/// Sideband weights ε_n from the Fourier decomposition of the steady-state
/// interaction phase over one modulation period. The weights come out real;
/// the imaginary parts are returned for the caller to inspect.
pub fn sideband_weights(pair: &CoupledPair, pulse: &FluxPulse, n_max: usize) -> Vec<(i32, C64)> {
    let w = pair.harmonics(pulse.phi_ac, 1.0);
    let m = 4096usize;
    // osc(ψ) = Σ_k (2 ω_k / k ω_p) sin(k ψ); ε_n = <e^{i osc} e^{-i n ψ}>
    let mut eps = vec![C64::new(0.0, 0.0); 2 * n_max + 1];
    for j in 0..m {
        let psi = TAU * j as f64 / m as f64;
        let mut osc = 0.0;
        for (k, &wk) in w.iter().enumerate().skip(1) {
            osc += 2.0 * wk / (k as f64 * pulse.omega_p) * (k as f64 * psi).sin();
        }
        let e = C64::from_polar(1.0, osc);
        for (idx, slot) in eps.iter_mut().enumerate() {
            let n = idx as i32 - n_max as i32;
            *slot += e * C64::from_polar(1.0, -(n as f64) * psi);
        }
    }
    eps.iter()
        .enumerate()
        .map(|(idx, &e)| (idx as i32 - n_max as i32, e / m as f64))
        .collect()
}

/// Effective coupling g_eff = g |ε_{n0}| (Hz).
pub fn g_eff_hz(pair: &CoupledPair, pulse: &FluxPulse) -> f64 {
    let n0 = pair.sideband_n0;
    let eps = sideband_weights(pair, pulse, n0.unsigned_abs() as usize + 4);
    let e = eps
        .iter()
        .find(|(n, _)| *n == n0)
        .map(|(_, e)| e.norm())
        .unwrap_or(0.0);
    pair.g_hz * e
}

/// Signed sideband weight ε_{n0} (real part; imaginary part is ~0).
pub fn sideband_weight_n0(pair: &CoupledPair, pulse: &FluxPulse) -> f64 {
    let n0 = pair.sideband_n0;
    let eps = sideband_weights(pair, pulse, n0.unsigned_abs() as usize + 4);
    eps.iter().find(|(n, _)| *n == n0).map(|(_, e)| e.re).unwrap_or(0.0)
}

// --- time-domain evolution -----------------------------------------------------

/// Realized gate parameters extracted from the propagator.
#[derive(Debug, Clone)]
pub struct GateExtraction {
    /// Rotation angle in [0, 2π), mapped onto the XY(β, θ) convention.
    pub theta: f64,
    /// Interaction phase per the XY(β, θ) convention.
    pub beta: f64,
    /// Population outside the 01/10 manifold (identically zero in this
    /// two-level model).
    pub leakage_proxy: f64,
    /// The realized 2x2 subblock lifted to the two-qubit space.
    pub unitary: Unitary,
    /// Max unitarity defect accumulated during integration.
    pub unitarity_drift: f64,
}

#[derive(Clone, Copy)]
struct OdeState {
    u: [C64; 4], // row-major 2x2 propagator in basis (|01>, |10>)
    delta: f64,
}

impl OdeState {
    fn axpy(&self, h: f64, k: &OdeDeriv) -> OdeState {
        let mut u = self.u;
        for i in 0..4 {
            u[i] += k.du[i] * h;
        }
        OdeState { u, delta: self.delta + h * k.ddelta }
    }
}

#[derive(Clone, Copy)]
struct OdeDeriv {
    du: [C64; 4],
    ddelta: f64,
}

impl OdeDeriv {
    fn zero() -> Self {
        OdeDeriv { du: [C64::new(0.0, 0.0); 4], ddelta: 0.0 }
    }

    fn add_scaled(&mut self, w: f64, k: &OdeDeriv) {
        for i in 0..4 {
            self.du[i] += k.du[i] * w;
        }
        self.ddelta += w * k.ddelta;
    }
}

struct Kernel<'a> {
    pair: &'a CoupledPair,
    pulse: &'a FluxPulse,
    w_full: Vec<f64>,
    g_rad: f64,
}

impl<'a> Kernel<'a> {
    fn new(pair: &'a CoupledPair, pulse: &'a FluxPulse) -> Self {
        Self {
            pair,
            pulse,
            w_full: pair.harmonics(pulse.phi_ac, 1.0),
            g_rad: TAU * pair.g_hz,
        }
    }

    fn rhs(&self, t: f64, y: &OdeState) -> OdeDeriv {
        let detuning =
            self.pair.omega_t_with_harmonics(&self.w_full, self.pulse, t) - self.pair.omega_fixed();
        let h01 = C64::from_polar(self.g_rad, y.delta); // <01|H|10>
        // dU = -i H U with H = [[0, h01], [conj h01, 0]]
        let du = [
            C64::new(0.0, -1.0) * h01 * y.u[2],
            C64::new(0.0, -1.0) * h01 * y.u[3],
            C64::new(0.0, -1.0) * h01.conj() * y.u[0],
            C64::new(0.0, -1.0) * h01.conj() * y.u[1],
        ];
        OdeDeriv { du, ddelta: detuning }
    }
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) over [t_start, t_final] from `start`.
fn integrate_span(
    kernel: &Kernel,
    start: OdeState,
    t_start: f64,
    t_final: f64,
    tol: f64,
) -> Result<(OdeState, f64), XyError> {
    let mut y = start;
    if t_final <= t_start {
        return Ok((y, 0.0));
    }
    // step scale: the phase Δ rotates at the detuning plus harmonics
    let freq_scale = (kernel.pair.omega_t01() - kernel.pair.omega_fixed()).abs()
        + 4.0 * kernel.pulse.omega_p.abs()
        + 1.0;
    let mut h = (0.5 / freq_scale).min((t_final - t_start) / 16.0);
    let mut t = t_start;
    let mut drift_max = 0.0f64;
    let mut steps = 0usize;
    let max_steps = 80_000_000usize;
    while t < t_final {
        if steps > max_steps {
            return Err(XyError::IntegrationFailure("step budget exhausted".into()));
        }
        steps += 1;
        if t + h > t_final {
            h = t_final - t;
        }
        let mut k: [OdeDeriv; 7] = [OdeDeriv::zero(); 7];
        k[0] = kernel.rhs(t, &y);
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                if DP_A[stage][j] != 0.0 {
                    ys = ys.axpy(h * DP_A[stage][j], kj);
                }
            }
            k[stage] = kernel.rhs(t + DP_C[stage] * h, &ys);
        }
        let mut inc5 = OdeDeriv::zero();
        let mut inc4 = OdeDeriv::zero();
        for j in 0..7 {
            if DP_B5[j] != 0.0 {
                inc5.add_scaled(DP_B5[j], &k[j]);
            }
            if DP_B4[j] != 0.0 {
                inc4.add_scaled(DP_B4[j], &k[j]);
            }
        }
        let y5 = y.axpy(h, &inc5);
        let y4 = y.axpy(h, &inc4);
        // error per component against atol + rtol scale
        let mut err = 0.0f64;
        for i in 0..4 {
            let e = (y5.u[i] - y4.u[i]).norm();
            err = err.max(e / (1e-12 + tol));
        }
        let ed = (y5.delta - y4.delta).abs();
        err = err.max(ed / (1e-9 + tol * y5.delta.abs().max(1.0)));
        if err <= 1.0 {
            t += h;
            y = y5;
            // unitarity monitor on the 2x2 block; renormalize small drift,
            // fail hard past the threshold
            let n0 = (y.u[0].norm_sqr() + y.u[2].norm_sqr() - 1.0).abs();
            let n1 = (y.u[1].norm_sqr() + y.u[3].norm_sqr() - 1.0).abs();
            let defect = n0.max(n1);
            drift_max = drift_max.max(defect);
            if defect > 1e-8 {
                return Err(XyError::IntegrationFailure(format!(
                    "unitarity drift {defect:.2e} exceeds 1e-8"
                )));
            }
            if defect > 1e-12 {
                let m = closest_unitary_2x2(&block_to_matrix(&y.u));
                y.u = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h < 1e-18 {
            return Err(XyError::IntegrationFailure("step size underflow".into()));
        }
    }
    Ok((y, drift_max))
}

fn initial_state() -> OdeState {
    OdeState {
        u: [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        delta: 0.0,
    }
}

fn block_to_matrix(u: &[C64; 4]) -> CMatrix {
    CMatrix::from_rows(&[vec![u[0], u[1]], vec![u[2], u[3]]])
}

/// Closest unitary to a 2x2 matrix via the polar decomposition.
fn closest_unitary_2x2(m: &CMatrix) -> CMatrix {
    // m (m† m)^{-1/2}
    let h = m.dagger().matmul(m);
    let (evals, vecs) = h.eigh();
    let mut inv_sqrt = CMatrix::zeros(2, 2);
    for i in 0..2 {
        inv_sqrt[(i, i)] = C64::new(1.0 / evals[i].max(1e-300).sqrt(), 0.0);
    }
    m.matmul(&vecs.matmul(&inv_sqrt).matmul(&vecs.dagger()))
}

/// Integrate through the pulse and extract the realized XY(β, θ).
///
/// `t_final` must cover the pulse for gate extraction; the propagator is
/// averaged over one period of the residual (off-resonant) rotation after
/// `t_final` to project out the co-rotating part, then snapped to the
/// closest unitary.
pub fn evolve(pair: &CoupledPair, pulse: &FluxPulse, t_final: f64) -> Result<GateExtraction, XyError> {
    let tol = 1e-10;
    let kernel = Kernel::new(pair, pulse);
    let t_gate = t_final.max(pulse.total_duration_s());
    let (state, drift) = integrate_span(&kernel, initial_state(), 0.0, t_gate, tol)?;

    // tail average over one period of the residual precession; uniform
    // exclusive sampling makes the periodic average exact for the
    // fundamental and its harmonics
    let resid = (pair.omega_t01() - pair.omega_fixed()).abs().max(1e6);
    let t_period = TAU / resid;
    let n_avg = 32usize;
    let mut acc = block_to_matrix(&state.u);
    let mut cur = state;
    let mut t_cur = t_gate;
    for i in 1..n_avg {
        let t_next = t_gate + t_period * i as f64 / n_avg as f64;
        let (next, _) = integrate_span(&kernel, cur, t_cur, t_next, tol)?;
        acc = acc.add(&block_to_matrix(&next.u));
        cur = next;
        t_cur = t_next;
    }
    let avg = acc.scale(C64::new(1.0 / n_avg as f64, 0.0));
    let m = closest_unitary_2x2(&avg);

    // map onto the XY convention: in basis (|01>, |10>),
    // M = cos(θ/2) I + i sin(θ/2) [e^{iβ}σ+ + e^{-iβ}σ-] up to det-1 sign
    let trace_half = (m[(0, 0)] + m[(1, 1)]).re / 2.0;
    let s = m[(0, 1)].norm();
    let theta = 2.0 * s.atan2(trace_half);
    let theta = theta.rem_euclid(2.0 * std::f64::consts::PI);
    let beta = if s > 1e-9 {
        (m[(0, 1)] / C64::i()).arg()
    } else {
        0.0
    };

    let mut lifted = CMatrix::identity(4);
    lifted[(1, 1)] = m[(0, 0)];
    lifted[(1, 2)] = m[(0, 1)];
    lifted[(2, 1)] = m[(1, 0)];
    lifted[(2, 2)] = m[(1, 1)];
    let unitary = Unitary::from_matrix(QuditSpace::qubits(2), lifted)?;

    Ok(GateExtraction { theta, beta, leakage_proxy: 0.0, unitary, unitarity_drift: drift })
}

/// Population transfer |10> → |01> after evolving for `duration`.
pub fn transfer_population(
    pair: &CoupledPair,
    pulse: &FluxPulse,
    duration: f64,
) -> Result<f64, XyError> {
    let kernel = Kernel::new(pair, pulse);
    let (state, _) = integrate_span(&kernel, initial_state(), 0.0, duration, 1e-9)?;
    // column |10> of the propagator, amplitude on |01>
    Ok(state.u[1].norm_sqr())
}

/// Tune a full-transfer iSWAP pulse the way the experiment does: sweep the
/// modulation frequency and duration around the nominal resonance and
/// maximize |10> → |01> transfer. Returns the tuned pulse and its transfer.
pub fn tune_iswap(
    pair: &CoupledPair,
    template: &FluxPulse,
) -> Result<(FluxPulse, f64), XyError> {
    let golden = |f: &dyn Fn(f64) -> Result<f64, XyError>,
                  mut lo: f64,
                  mut hi: f64|
     -> Result<f64, XyError> {
        let g = 0.618_033_988_749_894_8;
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = f(x1)?;
        let mut f2 = f(x2)?;
        for _ in 0..80 {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2)?;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    let mut pulse = *template;
    for _round in 0..3 {
        let base = pulse;
        let tau = golden(
            &|tau| transfer_population(pair, &base.with_tau(tau), tau + 2.0 * base.t_rise_s),
            0.5 * base.tau_s,
            1.5 * base.tau_s,
        )?;
        pulse = base.with_tau(tau);
        let base = pulse;
        let wp = golden(
            &|wp| {
                let mut p = base;
                p.omega_p = wp;
                transfer_population(pair, &p, p.total_duration_s())
            },
            base.omega_p - TAU * 4e6,
            base.omega_p + TAU * 4e6,
        )?;
        pulse.omega_p = wp;
    }
    let transfer = transfer_population(pair, &pulse, pulse.total_duration_s())?;
    Ok((pulse, transfer))
}

/// Chevron map: transfer population on a (f_p, duration) grid, starting
/// from |10>. Points are integrated independently, so parallel evaluation is
/// bit-identical to sequential.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChevronMap {
    pub f_p_hz: Vec<f64>,
    pub duration_s: Vec<f64>,
    /// Row-major: `transfer[i_fp][i_dur]`.
    pub transfer: Vec<Vec<f64>>,
}

pub fn chevron(
    pair: &CoupledPair,
    pulse_template: &FluxPulse,
    f_p_grid_hz: &[f64],
    duration_grid_s: &[f64],
) -> Result<ChevronMap, XyError> {
    if f_p_grid_hz.is_empty() || duration_grid_s.is_empty() {
        return Err(XyError::InvalidParameter("empty chevron grid".into()));
    }
    let transfer: Result<Vec<Vec<f64>>, XyError> = f_p_grid_hz
        .par_iter()
        .map(|&fp| {
            let mut pulse = *pulse_template;
            pulse.omega_p = TAU * fp;
            duration_grid_s
                .iter()
                .map(|&d| {
                    // duration means total footprint; tau adjusts around the edges
                    let tau = (d - 2.0 * pulse.t_rise_s).max(0.0);
                    let p = pulse.with_tau(tau);
                    transfer_population(pair, &p, d)
                })
                .collect()
        })
        .collect();
    Ok(ChevronMap {
        f_p_hz: f_p_grid_hz.to_vec(),
        duration_s: duration_grid_s.to_vec(),
        transfer: transfer?,
    })
}

// --- reference device ----------------------------------------------------------

/// Serializable device profile (the on-disk format).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeviceProfile {
    /// ν_n in Hz.
    pub nu: Vec<f64>,
    pub phi_dc: f64,
    pub g_hz: f64,
    pub omega_f01_hz: f64,
    pub sideband_n0: i32,
    /// Default modulation amplitude angle.
    pub phi_ac: f64,
    /// Default rise time.
    pub t_rise_s: f64,
}

impl DeviceProfile {
    pub fn to_pair(&self) -> Result<CoupledPair, XyError> {
        let transmon = TunableTransmon::new(self.nu.clone(), self.phi_dc)?;
        CoupledPair::new(self.g_hz, self.omega_f01_hz, transmon, self.sideband_n0)
    }

    pub fn default_pulse(&self, phi_p: f64, tau_s: f64) -> Result<FluxPulse, XyError> {
        let pair = self.to_pair()?;
        let omega_p = pair.resonant_omega_p(self.phi_ac);
        FluxPulse::new(self.phi_ac, omega_p, phi_p, self.t_rise_s, tau_s)
    }
}

/// Reference device: tunable transmon at 4.759 GHz with 0.767 GHz
/// tunability parked at its sweet spot, fixed transmon 937.76 MHz below,
/// n0 = −2 sideband, modulation amplitude φ_ac = 2.0 rad, 40 ns edges. The
/// coupling g is solved once so a resonant single-pulse iSWAP takes 240 ns
/// total.
pub fn reference_profile() -> &'static DeviceProfile {
    static PROFILE: OnceLock<DeviceProfile> = OnceLock::new();
    PROFILE.get_or_init(|| {
        let transmon = TunableTransmon::from_flux_curve(4.759e9, 0.767e9).expect("valid curve");
        let f_fixed = 4.759e9 - 937.76e6;
        let phi_ac = 2.0;
        let t_rise = 40e-9;
        // solve g for θ(240 ns) = π by bisection on the simulator
        let theta_at = |g: f64| -> f64 {
            let pair = CoupledPair::new(g, f_fixed, transmon.clone(), -2).expect("valid pair");
            let omega_p = pair.resonant_omega_p(phi_ac);
            let pulse = FluxPulse::new(phi_ac, omega_p, 0.0, t_rise, 240e-9 - 2.0 * t_rise)
                .expect("valid pulse");
            evolve(&pair, &pulse, pulse.total_duration_s()).expect("integrates").theta
        };
        let (mut lo, mut hi) = (2e6, 14e6);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if theta_at(mid) < std::f64::consts::PI {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let g = 0.5 * (lo + hi);
        DeviceProfile {
            nu: transmon.nu_hz.clone(),
            phi_dc: 0.0,
            g_hz: g,
            omega_f01_hz: f_fixed,
            sideband_n0: -2,
            phi_ac,
            t_rise_s: t_rise,
        }
    })
}
