//! Noise channels, two-qubit Clifford machinery, interleaved randomized
//! benchmarking, and coherence-limited gate fidelities.

mod clifford;
mod rb;

pub use clifford::{CliffordElement, CliffordTable, Entangler, Pauli2};
pub use rb::{
    run_irb, scaled_fidelity, scaled_fidelity_with_stderr, InterleavedUnit, IrbConfig, IrbResult,
    SurvivalRecord, ThetaChoice,
};

use crate::error::XyError;
use crate::linalg::CMatrix;
use crate::qcore::{embed, Gate, QuditSpace, Unitary};
use num_complex::Complex64 as C64;

/// Decoherence and readout model for a two-qubit pair.
///
/// `t1_s` / `t2_s` are the coherence times while flux modulation is applied
/// (the operating condition of every gate here). Durations are
/// idle-equivalent times charged per gate kind; `rz` is a frame update and
/// costs nothing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub t1_s: [f64; 2],
    pub t2_s: [f64; 2],
    pub duration_1q_s: f64,
    pub duration_iswap_s: f64,
    pub duration_xy_half_s: f64,
    pub duration_cz_s: f64,
    /// Per-qubit readout assignment errors (P(read 1 | 0), P(read 0 | 1)).
    pub readout_error: Option<[(f64, f64); 2]>,
    /// Depolarizing strength applied once per Clifford slot in benchmarking.
    pub depolarizing_per_clifford: f64,
}

impl NoiseModel {
    pub fn new(t1_s: [f64; 2], t2_s: [f64; 2]) -> Result<Self, XyError> {
        for q in 0..2 {
            if !(t1_s[q] > 0.0) || !(t2_s[q] > 0.0) {
                return Err(XyError::InvalidParameter("T1 and T2 must be positive".into()));
            }
            if t2_s[q] > 2.0 * t1_s[q] + 1e-18 {
                return Err(XyError::InvalidParameter(format!(
                    "T2 = {} exceeds 2*T1 = {} on qubit {q}",
                    t2_s[q],
                    2.0 * t1_s[q]
                )));
            }
        }
        Ok(Self {
            t1_s,
            t2_s,
            duration_1q_s: 40e-9,
            duration_iswap_s: 240e-9,
            duration_xy_half_s: 152e-9,
            duration_cz_s: 240e-9,
            readout_error: None,
            depolarizing_per_clifford: 0.0,
        })
    }

    /// No decoherence at all (infinite coherence times).
    pub fn noiseless() -> Self {
        Self::new([f64::INFINITY; 2], [f64::INFINITY; 2]).expect("valid")
    }

    /// Coherence times under modulation from the reference device
    /// (T1 = 24/26 µs, T2* = 13/14 µs).
    pub fn under_modulation_reference() -> Self {
        Self::new([24e-6, 26e-6], [13e-6, 14e-6]).expect("valid")
    }

    pub fn with_readout_error(mut self, per_qubit: [(f64, f64); 2]) -> Result<Self, XyError> {
        for (a, b) in per_qubit {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(XyError::InvalidParameter("readout error must be a probability".into()));
            }
        }
        self.readout_error = Some(per_qubit);
        Ok(self)
    }

    pub fn with_depolarizing_per_clifford(mut self, p: f64) -> Result<Self, XyError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(XyError::InvalidParameter("depolarizing strength must be in [0,1]".into()));
        }
        self.depolarizing_per_clifford = p;
        Ok(self)
    }

    /// Idle-equivalent duration charged for a native gate.
    pub fn gate_duration_s(&self, gate: &Gate) -> f64 {
        match gate {
            Gate::Rz(_) => 0.0,
            Gate::H | Gate::X | Gate::Rx(_) | Gate::Ry(_) | Gate::RxPhased(..) => self.duration_1q_s,
            Gate::Iswap => self.duration_iswap_s,
            Gate::Xy(..) => self.duration_xy_half_s,
            Gate::Cz | Gate::Cphase(_) | Gate::Cnot | Gate::Swap => self.duration_cz_s,
            Gate::Xy02(..) | Gate::Xy20(..) => self.duration_cz_s,
        }
    }

    fn is_noiseless(&self) -> bool {
        self.t1_s.iter().all(|t| t.is_infinite()) && self.t2_s.iter().all(|t| t.is_infinite())
    }
}

/// Density matrix with validity checks on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: QuditSpace,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: QuditSpace, m: CMatrix) -> Result<Self, XyError> {
        if m.rows() != space.total_dim() || m.cols() != space.total_dim() {
            return Err(XyError::DimMismatch("density matrix size".into()));
        }
        if !m.is_hermitian(1e-12) {
            return Err(XyError::InvalidParameter("density matrix must be Hermitian".into()));
        }
        if (m.trace().re - 1.0).abs() > 1e-12 || m.trace().im.abs() > 1e-12 {
            return Err(XyError::InvalidParameter("density matrix must have unit trace".into()));
        }
        let (evals, _) = m.eigh();
        if evals.iter().any(|&e| e < -1e-10) {
            return Err(XyError::InvalidParameter("density matrix must be positive semidefinite".into()));
        }
        Ok(Self { space, m })
    }

    pub fn pure_basis_state(space: &QuditSpace, digits: &[usize]) -> Self {
        let idx = space.index(digits);
        let mut m = CMatrix::zeros(space.total_dim(), space.total_dim());
        m[(idx, idx)] = C64::new(1.0, 0.0);
        Self { space: space.clone(), m }
    }

    pub fn from_state_vector(space: &QuditSpace, psi: &[C64]) -> Self {
        let d = space.total_dim();
        assert_eq!(psi.len(), d);
        let m = CMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj());
        Self { space: space.clone(), m }
    }

    pub fn space(&self) -> &QuditSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// U ρ U†.
    pub fn conjugated_by(&self, u: &Unitary) -> DensityMatrix {
        let m = u.matrix().matmul(&self.m).matmul(&u.matrix().dagger());
        DensityMatrix { space: self.space.clone(), m }
    }

    pub fn apply_kraus(&self, kraus: &[CMatrix]) -> DensityMatrix {
        let d = self.m.rows();
        let mut out = CMatrix::zeros(d, d);
        for k in kraus {
            out = out.add(&k.matmul(&self.m).matmul(&k.dagger()));
        }
        DensityMatrix { space: self.space.clone(), m: out }
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.m.rows()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

/// Amplitude-damping + pure-dephasing Kraus operators for one qubit over
/// time `t`: the composition AD(γ) ∘ PD(λ) with γ = 1 − e^{−t/T1} and the
/// dephasing chosen so total coherence decays as e^{−t/T2}.
pub fn decoherence_kraus_1q(t1: f64, t2: f64, t: f64) -> Vec<CMatrix> {
    let gamma = 1.0 - (-t / t1).exp();
    // 1/Tφ = 1/T2 − 1/(2 T1), clamped against rounding at T2 = 2 T1
    let inv_tphi = (1.0 / t2 - 1.0 / (2.0 * t1)).max(0.0);
    let lambda = 1.0 - (-2.0 * t * inv_tphi).exp();
    let z = C64::new(0.0, 0.0);
    let sq = |x: f64| C64::new(x.max(0.0).sqrt(), 0.0);
    let mut out = Vec::new();
    // A0 P0
    out.push(CMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), z],
        vec![z, sq((1.0 - gamma) * (1.0 - lambda))],
    ]));
    // A0 P1
    if lambda > 0.0 {
        out.push(CMatrix::from_rows(&[
            vec![z, z],
            vec![z, sq((1.0 - gamma) * lambda)],
        ]));
    }
    // A1 P0 and A1 P1 combine to |0><1| with weight sqrt(γ)
    if gamma > 0.0 {
        out.push(CMatrix::from_rows(&[vec![z, sq(gamma)], vec![z, z]]));
    }
    out
}

/// Apply per-qubit amplitude damping and dephasing for `duration`.
pub fn apply_decoherence(
    rho: &DensityMatrix,
    model: &NoiseModel,
    duration: f64,
) -> Result<DensityMatrix, XyError> {
    if duration < 0.0 {
        return Err(XyError::InvalidParameter("negative duration".into()));
    }
    if duration == 0.0 || model.is_noiseless() {
        return Ok(rho.clone());
    }
    if rho.space.sites() != 2 || rho.space.dims() != [2, 2] {
        return Err(XyError::DimMismatch("decoherence model is defined for two qubits".into()));
    }
    let mut out = rho.clone();
    for q in 0..2 {
        let kraus1 = decoherence_kraus_1q(model.t1_s[q], model.t2_s[q], duration);
        let embedded: Vec<CMatrix> = kraus1
            .iter()
            .map(|k| {
                if q == 0 {
                    k.kron(&CMatrix::identity(2))
                } else {
                    CMatrix::identity(2).kron(k)
                }
            })
            .collect();
        out = out.apply_kraus(&embedded);
    }
    debug_assert!((out.trace() - 1.0).abs() < 1e-12);
    Ok(out)
}

/// Full depolarizing channel on the listed sites: with probability `p` the
/// state of those sites is replaced by the maximally mixed state.
pub fn depolarize(rho: &DensityMatrix, sites: &[usize], p: f64) -> DensityMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let space = rho.space.clone();
    let paulis_1q = [
        CMatrix::identity(2),
        CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ]),
        CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ]),
        CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ]),
    ];
    // twirl: Σ_P P ρ P† / d² = tr_sites(ρ) ⊗ I/d on the sites
    let mut twirled = CMatrix::zeros(rho.m.rows(), rho.m.cols());
    let combos = 4usize.pow(sites.len() as u32);
    for combo in 0..combos {
        let mut rem = combo;
        let mut op: Option<Unitary> = None;
        for &s in sites {
            let p1 = &paulis_1q[rem % 4];
            rem /= 4;
            let u = Unitary::from_matrix(QuditSpace::qubits(1), p1.clone()).expect("pauli");
            let e = embed(&u, &[s], &space).expect("embed pauli");
            op = Some(match op {
                None => e,
                Some(prev) => e.then_after(&prev).expect("compose"),
            });
        }
        let u = op.expect("at least one site");
        twirled = twirled.add(&u.matrix().matmul(&rho.m).matmul(&u.matrix().dagger()));
    }
    let twirled = twirled.scale(C64::new(1.0 / combos as f64, 0.0));
    let m = rho.m.scale(C64::new(1.0 - p, 0.0)).add(&twirled.scale(C64::new(p, 0.0)));
    DensityMatrix { space, m }
}

/// Average gate fidelity of the identity-intent channel (pure decoherence)
/// over `duration` on the two-qubit pair: the coherence-limited fidelity of
/// any gate with that duration.
///
/// Uses F_avg = (d F_pro + 1)/(d + 1) with the process fidelity computed
/// exactly from the product Kraus decomposition, F_pro = Σ |tr K|² / d².
pub fn coherence_limited_fidelity(model: &NoiseModel, duration: f64) -> Result<f64, XyError> {
    if !(duration > 0.0) {
        return Err(XyError::InvalidParameter("duration must be positive".into()));
    }
    let mut per_qubit_tr2 = [0.0f64; 2];
    for q in 0..2 {
        let kraus = decoherence_kraus_1q(model.t1_s[q], model.t2_s[q], duration);
        per_qubit_tr2[q] = kraus.iter().map(|k| k.trace().norm_sqr()).sum();
    }
    let d = 4.0;
    let f_pro = per_qubit_tr2[0] * per_qubit_tr2[1] / (d * d);
    Ok((d * f_pro + 1.0) / (d + 1.0))
}

/// Measurement distribution over computational basis outcomes, including
/// per-qubit readout assignment errors if the model has them.
pub fn measurement_distribution(rho: &DensityMatrix, model: &NoiseModel) -> Vec<f64> {
    let probs = rho.populations();
    let Some(confusion) = model.readout_error else {
        return probs;
    };
    let space = rho.space();
    let n = space.sites();
    let d = space.total_dim();
    let mut out = vec![0.0; d];
    for (state, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let digits = space.digits(state);
        for meas in 0..d {
            let mdig = space.digits(meas);
            let mut w = p;
            for q in 0..n {
                let (e10, e01) = confusion[q.min(1)];
                w *= match (digits[q], mdig[q]) {
                    (0, 0) => 1.0 - e10,
                    (0, 1) => e10,
                    (1, 1) => 1.0 - e01,
                    (1, 0) => e01,
                    _ => 0.0,
                };
            }
            out[meas] += w;
        }
    }
    out
}
