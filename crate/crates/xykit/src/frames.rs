//! Abstract rotating-frame bookkeeping for the flux-activated XY gate.
//!
//! Each qubit has a local frame at its transition frequency; Z rotations are
//! frame-phase updates, never pulses. The flux pulse's interaction phase β is
//! defined against the "two-qubit frame" at the difference of the single-qubit
//! frame frequencies. In the doubly rotating picture used here, idling is the
//! identity and the entire time dependence of β for a pulse played at time
//! `t` with programmed phase `φ_p` is
//!
//! ```text
//! β(t) = s·(2 φ_p + Θ_qubits(t) − Θ_frame(t)) + β_offset
//! ```
//!
//! where `Θ_qubits` is the accumulated single-qubit frame-phase difference
//! (physical), `Θ_frame` the two-qubit frame phase the pulse generator tracks,
//! and `s = ∓1` follows the sign of the qubit detuning. With the two-qubit
//! frame at its default frequency |f1 − f0| the two terms cancel and the same
//! programmed pulse yields the same gate no matter when it is played. The
//! frame-tracking Ramsey experiment deliberately mistracks the frame to
//! expose the residual precession.
//!
//! Factor-of-two note: for the n0 = −2 sideband the pulse carrier runs near
//! half the qubit detuning, so a flux-pulse channel frame at `f_f`
//! corresponds to a two-qubit frame at `2 f_f`; β accumulates at twice the
//! channel-frame rate, which is the `|Δf01 − 2 f_f|` law of the frame-tracking
//! experiment.

use crate::bench::{apply_decoherence, DensityMatrix, NoiseModel};
use crate::error::XyError;
use crate::fit::{fit_sinusoid, SinusoidFit};
use crate::linalg::CMatrix;
use crate::qcore::{rz, xy_unitary, QuditSpace, Unitary};
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

/// One abstract rotating frame. Phase is stored unreduced; reduce mod 2π
/// only on readout.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Frame {
    pub frequency_hz: f64,
    pub phase: f64,
    pub epoch_s: f64,
}

impl Frame {
    pub fn new(frequency_hz: f64) -> Self {
        Self { frequency_hz, phase: 0.0, epoch_s: 0.0 }
    }
}

/// Frame phase at time `t`; negative `t − epoch` extrapolates linearly.
pub fn frame_phase_at(f: &Frame, t: f64) -> f64 {
    f.phase + TAU * f.frequency_hz * (t - f.epoch_s)
}

/// Per-qubit frames plus the two-qubit difference frame.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrameSet {
    qubit_frames: [Frame; 2],
    two_qubit_frame: Frame,
    /// +1 when frame 1 is above frame 0, −1 otherwise; orients the
    /// difference phase.
    diff_sign: f64,
    /// Sign of the 2φ_p term in β; fixed to −diff_sign so frame updates and
    /// the pulse-level β = −2φ_p + α law stay consistent.
    beta_sign: f64,
    /// Constant offset in β (pulse-level α plus any calibration constant).
    beta_offset: f64,
}

impl FrameSet {
    /// Frames at the two qubit frequencies; the two-qubit frame starts at
    /// |f1 − f0| with zero phase.
    pub fn new(f0_hz: f64, f1_hz: f64) -> Self {
        let diff_sign = if f1_hz >= f0_hz { 1.0 } else { -1.0 };
        Self {
            qubit_frames: [Frame::new(f0_hz), Frame::new(f1_hz)],
            two_qubit_frame: Frame::new((f1_hz - f0_hz).abs()),
            diff_sign,
            beta_sign: -diff_sign,
            beta_offset: 0.0,
        }
    }

    /// Override the two-qubit frame frequency (the frame-tracking experiment
    /// does this; everything else should leave the default).
    pub fn with_two_qubit_frequency(mut self, f_hz: f64) -> Self {
        self.two_qubit_frame.frequency_hz = f_hz;
        self
    }

    pub fn with_beta_offset(mut self, offset: f64) -> Self {
        self.beta_offset = offset;
        self
    }

    pub fn qubit_frames(&self) -> &[Frame; 2] {
        &self.qubit_frames
    }

    pub fn two_qubit_frame(&self) -> &Frame {
        &self.two_qubit_frame
    }

    pub fn beta_sign(&self) -> f64 {
        self.beta_sign
    }

    pub fn difference_frequency_hz(&self) -> f64 {
        (self.qubit_frames[1].frequency_hz - self.qubit_frames[0].frequency_hz).abs()
    }

    /// Z rotation as a frame update; returns the updated set.
    pub fn apply_rz_update(&self, qubit: usize, angle: f64) -> Result<FrameSet, XyError> {
        if qubit > 1 {
            return Err(XyError::SiteOutOfRange { site: qubit, sites: 2 });
        }
        let mut out = *self;
        out.qubit_frames[qubit].phase += angle;
        Ok(out)
    }

    /// `Θ_qubits(t) − Θ_frame(t)`, grouped so the frequency difference is
    /// formed before multiplying by `t`. With the two-qubit frame at its
    /// default |f1 − f0| the time term is exactly zero; the naive
    /// phase-by-phase evaluation would lose ~7 digits by cancellation at
    /// millisecond times.
    fn tracking_mismatch(&self, t: f64) -> f64 {
        let [q0, q1] = &self.qubit_frames;
        let tq = &self.two_qubit_frame;
        let phase_part = self.diff_sign * (q1.phase - q0.phase) - tq.phase;
        let rate = self.diff_sign * (q1.frequency_hz - q0.frequency_hz) - tq.frequency_hz;
        let epoch_part = self.diff_sign
            * (q1.frequency_hz * q1.epoch_s - q0.frequency_hz * q0.epoch_s)
            - tq.frequency_hz * tq.epoch_s;
        phase_part + TAU * (rate * t - epoch_part)
    }

    /// The β of the XY unitary realized by a flux pulse with programmed
    /// phase `phi_p` played at time `t`.
    pub fn effective_beta(&self, phi_p: f64, t: f64) -> f64 {
        self.beta_sign * (2.0 * phi_p + self.tracking_mismatch(t)) + self.beta_offset
    }

    /// Programmed pulse phase that realizes `beta` when the frames are fresh
    /// (zero accumulated phase). Combined with `effective_beta` this is how
    /// compiled programs bind their nominal phases to hardware phases.
    pub fn pulse_phase_for_beta(&self, beta: f64) -> f64 {
        (beta - self.beta_offset) / (2.0 * self.beta_sign)
    }
}

/// One step of a frame-tracked pulse schedule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum FrameInstruction {
    /// Z rotation applied as a frame update.
    RzUpdate { qubit: usize, angle: f64 },
    /// Idle for a duration (the frames absorb free evolution).
    Advance { duration_s: f64 },
    /// An XY(β, θ) flux pulse with programmed phase `phi_p`, played at the
    /// current schedule time; `theta` is the calibrated rotation angle.
    FluxEvent { phi_p: f64, theta: f64 },
}

/// Execute a schedule at matrix level starting at `start_time_s`.
///
/// Returns the unitary as seen in the frames at the *start* of the schedule:
/// accumulated rz updates are resolved into explicit final Z rotations, so
/// the result can be compared directly against an explicit-matrix circuit.
pub fn tracked_unitary(
    fs: &FrameSet,
    schedule: &[FrameInstruction],
    start_time_s: f64,
) -> Result<Unitary, XyError> {
    let mut fs = *fs;
    let mut t = start_time_s;
    let phase0 = [fs.qubit_frames[0].phase, fs.qubit_frames[1].phase];
    let space = QuditSpace::qubits(2);
    let mut acc = Unitary::from_matrix(space.clone(), CMatrix::identity(4))?;
    for step in schedule {
        match *step {
            FrameInstruction::RzUpdate { qubit, angle } => {
                fs = fs.apply_rz_update(qubit, angle)?;
            }
            FrameInstruction::Advance { duration_s } => {
                if duration_s < 0.0 {
                    return Err(XyError::InvalidParameter("negative advance duration".into()));
                }
                t += duration_s;
            }
            FrameInstruction::FluxEvent { phi_p, theta } => {
                let beta = fs.effective_beta(phi_p, t);
                acc = xy_unitary(beta, theta).then_after(&acc)?;
            }
        }
    }
    // resolve leftover frame updates as explicit rotations
    let d0 = fs.qubit_frames[0].phase - phase0[0];
    let d1 = fs.qubit_frames[1].phase - phase0[1];
    let dressing = Unitary::from_matrix(space, rz(d0).matrix().kron(rz(d1).matrix()))?;
    dressing.then_after(&acc)
}

/// Outcome of the frame-tracking Ramsey experiment.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RamseyResult {
    pub f_f_hz: f64,
    pub fitted_frequency_hz: f64,
    pub fit_stderr_hz: f64,
    /// (delay seconds, P(tunable qubit in |1>)) per point.
    pub points: Vec<(f64, f64)>,
}

/// Delays spanning `periods` oscillation periods of `expected_freq_hz` with
/// `n` points (uniform).
pub fn ramsey_delays(expected_freq_hz: f64, periods: f64, n: usize) -> Vec<f64> {
    let span = periods / expected_freq_hz.abs().max(1.0);
    (0..n).map(|i| span * i as f64 / (n - 1).max(1) as f64).collect()
}

fn ramsey_p1(fs: &FrameSet, delay: f64, model: Option<&NoiseModel>) -> f64 {
    // prepare |01> (tunable excited), XY(β0, π/2), idle, XY(β(τ), π/2)
    let beta1 = fs.effective_beta(0.0, 0.0);
    let beta2 = fs.effective_beta(0.0, delay);
    let space = QuditSpace::qubits(2);
    let u1 = xy_unitary(beta1, std::f64::consts::FRAC_PI_2);
    let u2 = xy_unitary(beta2, std::f64::consts::FRAC_PI_2);
    match model {
        None => {
            let mut psi = vec![C64::new(0.0, 0.0); 4];
            psi[space.index(&[0, 1])] = C64::new(1.0, 0.0);
            let psi = u2.apply(&u1.apply(&psi));
            let a01 = psi[space.index(&[0, 1])];
            let a11 = psi[space.index(&[1, 1])];
            a01.norm_sqr() + a11.norm_sqr()
        }
        Some(m) => {
            let mut rho = DensityMatrix::pure_basis_state(&space, &[0, 1]);
            rho = rho.conjugated_by(&u1);
            rho = apply_decoherence(&rho, m, delay).expect("valid rho");
            rho = rho.conjugated_by(&u2);
            let p = rho.populations();
            p[space.index(&[0, 1])] + p[space.index(&[1, 1])]
        }
    }
}

/// Simulate the frame-tracking Ramsey experiment: the flux-pulse channel
/// frame is set to `f_f_hz` (two-qubit frame at `2 f_f`), two XY(·, π/2)
/// pulses bracket a variable delay, and the tunable qubit's |1> population is
/// fit to a sinusoid. The fitted frequency follows |Δf01 − 2 f_f|.
pub fn simulate_frame_ramsey(
    fs: &FrameSet,
    f_f_hz: f64,
    delays: &[f64],
    model: Option<&NoiseModel>,
) -> Result<RamseyResult, XyError> {
    if delays.len() < 20 {
        return Err(XyError::InvalidParameter("need at least 20 delay points".into()));
    }
    let tracked = fs.with_two_qubit_frequency(2.0 * f_f_hz);
    let points: Vec<(f64, f64)> =
        delays.iter().map(|&d| (d, ramsey_p1(&tracked, d, model))).collect();

    let ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let spread = ys.iter().map(|y| (y - mean).abs()).fold(0.0, f64::max);
    if spread < 1e-9 {
        // perfectly tracked frame: no precession left
        return Ok(RamseyResult {
            f_f_hz,
            fitted_frequency_hz: 0.0,
            fit_stderr_hz: 0.0,
            points,
        });
    }
    let f_diff = fs.difference_frequency_hz();
    let f_max = 1.5 * (f_diff + 2.0 * f_f_hz.abs()) + 1e6;
    let fit: SinusoidFit = fit_sinusoid(&ts, &ys, 0.0, f_max)?;
    Ok(RamseyResult {
        f_f_hz,
        fitted_frequency_hz: fit.frequency,
        fit_stderr_hz: fit.frequency_stderr,
        points,
    })
}
