//! Small nonlinear and linear least-squares fits used by the benchmarking
//! and calibration routines.

use crate::error::XyError;
use crate::linalg::solve_real;

/// Result of fitting survival data to `B + A p^L`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub baseline: f64,
    pub rate: f64,
    pub amplitude_stderr: f64,
    pub baseline_stderr: f64,
    pub rate_stderr: f64,
    pub chi2_reduced: f64,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Fit `y ≈ B + A p^L` with `0 < p < 1` and `0 ≤ B ≤ 1` by damped
/// Gauss-Newton in a transformed parameter space. `weights` are 1/σ per
/// point; pass 1.0 for unweighted.
pub fn fit_decay(lengths: &[f64], means: &[f64], weights: &[f64]) -> Result<DecayFit, XyError> {
    let n = lengths.len();
    if n < 3 || means.len() != n || weights.len() != n {
        return Err(XyError::FitFailure("need at least 3 points".into()));
    }
    let distinct = {
        let mut ls = lengths.to_vec();
        ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ls.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        ls.len()
    };
    if distinct < 3 {
        return Err(XyError::FitFailure("need at least 3 distinct lengths".into()));
    }

    let spread = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - means.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-9 {
        return Err(XyError::FitFailure("constant data: decay rate unidentifiable".into()));
    }

    // initial guess: baseline from the longest sequence, rate from
    // log-linear regression on the baseline-subtracted means
    let i_long = (0..n)
        .max_by(|&i, &j| lengths[i].partial_cmp(&lengths[j]).unwrap())
        .unwrap();
    let b0 = means[i_long].clamp(1e-6, 1.0 - 1e-6);
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let shifted = means[i] - b0;
        if shifted > 1e-4 {
            let (x, y) = (lengths[i], shifted.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            cnt += 1.0;
        }
    }
    let (mut a_init, mut p_init) = (0.5, 0.9);
    if cnt >= 2.0 && (cnt * sxx - sx * sx).abs() > 1e-12 {
        let ln_p = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        let ln_a = (sy - ln_p * sx) / cnt;
        p_init = ln_p.exp().clamp(1e-4, 1.0 - 1e-4);
        a_init = ln_a.exp().clamp(1e-4, 2.0);
    }

    let chi2 = |a: f64, b: f64, p: f64| -> f64 {
        (0..n)
            .map(|i| {
                let r = weights[i] * (b + a * p.powf(lengths[i]) - means[i]);
                r * r
            })
            .sum()
    };

    // parameters: (A free, vb with B = sigmoid(vb), up with p = sigmoid(up))
    let restarts: [(f64, f64, f64); 5] = [
        (a_init, b0, p_init),
        (0.75, 0.25, 0.95),
        (0.5, 0.5, 0.8),
        (0.9, 0.1, 0.99),
        (0.25, 0.25, 0.5),
    ];
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &(a0, bb0, p0) in &restarts {
        let mut a = a0;
        let mut vb = logit(bb0.clamp(1e-6, 1.0 - 1e-6));
        let mut up = logit(p0.clamp(1e-6, 1.0 - 1e-6));
        let mut lambda = 1e-3;
        let mut cur = chi2(a, sigmoid(vb), sigmoid(up));
        for _iter in 0..200 {
            let b = sigmoid(vb);
            let p = sigmoid(up);
            // residuals and jacobian wrt (a, vb, up)
            let mut jtj = vec![vec![0.0; 3]; 3];
            let mut jtr = vec![0.0; 3];
            for i in 0..n {
                let pl = p.powf(lengths[i]);
                let r = weights[i] * (b + a * pl - means[i]);
                let da = weights[i] * pl;
                let db = weights[i] * b * (1.0 - b);
                let dp_dup = p * (1.0 - p);
                let dp = if lengths[i] == 0.0 {
                    0.0
                } else {
                    weights[i] * a * lengths[i] * p.powf(lengths[i] - 1.0) * dp_dup
                };
                let grad = [da, db, dp];
                for r_ in 0..3 {
                    jtr[r_] += grad[r_] * r;
                    for c_ in 0..3 {
                        jtj[r_][c_] += grad[r_] * grad[c_];
                    }
                }
            }
            let mut a_sys = jtj.clone();
            for d in 0..3 {
                a_sys[d][d] *= 1.0 + lambda;
            }
            let mut rhs = [-jtr[0], -jtr[1], -jtr[2]];
            let step = match solve_real(&mut a_sys, &mut rhs) {
                Some(s) => s,
                None => break,
            };
            let (na, nvb, nup) = (a + step[0], vb + step[1], up + step[2]);
            let trial = chi2(na, sigmoid(nvb), sigmoid(nup));
            if trial < cur {
                a = na;
                vb = nvb;
                up = nup;
                cur = trial;
                lambda = (lambda * 0.3).max(1e-12);
                if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-12 {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e10 {
                    break;
                }
            }
        }
        let cand = (cur, a, sigmoid(vb), sigmoid(up));
        if best.map_or(true, |(c, ..)| cur < c) {
            best = Some(cand);
        }
    }

    let (chi, a, b, p) = best.ok_or_else(|| XyError::FitFailure("no converged restart".into()))?;
    if !(p > 0.0 && p < 1.0) || !p.is_finite() || !a.is_finite() {
        return Err(XyError::FitFailure("fit left the valid domain".into()));
    }

    // standard errors from the covariance in the original (A, B, p) space
    let dof = (n as f64 - 3.0).max(1.0);
    let s2 = chi / dof;
    let mut jtj = vec![vec![0.0; 3]; 3];
    for i in 0..n {
        let pl = p.powf(lengths[i]);
        let grad = [
            weights[i] * pl,
            weights[i],
            if lengths[i] == 0.0 { 0.0 } else { weights[i] * a * lengths[i] * p.powf(lengths[i] - 1.0) },
        ];
        for r_ in 0..3 {
            for c_ in 0..3 {
                jtj[r_][c_] += grad[r_] * grad[c_];
            }
        }
    }
    let stderr = |k: usize| -> f64 {
        // k-th diagonal of inverse(JtJ) via solving JtJ x = e_k
        let mut m = jtj.clone();
        let mut e = vec![0.0; 3];
        e[k] = 1.0;
        match solve_real(&mut m, &mut e) {
            Some(x) if x[k] >= 0.0 => (s2 * x[k]).sqrt(),
            _ => f64::NAN,
        }
    };

    Ok(DecayFit {
        amplitude: a,
        baseline: b,
        rate: p,
        amplitude_stderr: stderr(0),
        baseline_stderr: stderr(1),
        rate_stderr: stderr(2),
        chi2_reduced: s2,
    })
}

/// Linear least squares for `y ≈ a cos(k x) + b sin(k x) + c` at fixed
/// angular scale `k`. Returns (a, b, c, rms residual).
pub fn fit_cosine_linear(xs: &[f64], ys: &[f64], k: f64) -> Result<(f64, f64, f64, f64), XyError> {
    let n = xs.len();
    if n < 4 {
        return Err(XyError::FitFailure("need at least 4 points".into()));
    }
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    for i in 0..n {
        let row = [(k * xs[i]).cos(), (k * xs[i]).sin(), 1.0];
        for r in 0..3 {
            atb[r] += row[r] * ys[i];
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let sol = solve_real(&mut ata, &mut atb).ok_or_else(|| XyError::FitFailure("degenerate cosine fit".into()))?;
    let mut ss = 0.0;
    for i in 0..n {
        let model = sol[0] * (k * xs[i]).cos() + sol[1] * (k * xs[i]).sin() + sol[2];
        ss += (ys[i] - model).powi(2);
    }
    Ok((sol[0], sol[1], sol[2], (ss / n as f64).sqrt()))
}

/// Fitted sinusoid `A cos(2π f t + φ) + C`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SinusoidFit {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub frequency_stderr: f64,
    pub rms_residual: f64,
}

/// Fit `y ≈ A cos(2π f t + φ) + C` by scanning f over `[f_lo, f_hi]`
/// (linear least squares at each trial frequency) and refining the best
/// candidate by golden-section search on the residual.
pub fn fit_sinusoid(
    ts: &[f64],
    ys: &[f64],
    f_lo: f64,
    f_hi: f64,
) -> Result<SinusoidFit, XyError> {
    let n = ts.len();
    if n < 8 {
        return Err(XyError::FitFailure("need at least 8 points".into()));
    }
    let span = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ts.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !(f_hi > f_lo) {
        return Err(XyError::FitFailure("degenerate time span or frequency window".into()));
    }

    let sse_at = |f: f64| -> f64 {
        match fit_cosine_linear(ts, ys, 2.0 * std::f64::consts::PI * f) {
            Ok((_, _, _, rms)) => rms * rms * n as f64,
            Err(_) => f64::INFINITY,
        }
    };

    // coarse scan fine enough to isolate the global minimum basin
    let steps = (8.0 * span * (f_hi - f_lo)).ceil().max(200.0) as usize;
    let mut best_f = f_lo;
    let mut best_sse = f64::INFINITY;
    for i in 0..=steps {
        let f = f_lo + (f_hi - f_lo) * i as f64 / steps as f64;
        let s = sse_at(f);
        if s < best_sse {
            best_sse = s;
            best_f = f;
        }
    }
    // golden-section refine inside adjacent scan cells
    let cell = (f_hi - f_lo) / steps as f64;
    let (mut lo, mut hi) = ((best_f - cell).max(f_lo), (best_f + cell).min(f_hi));
    let g = 0.618_033_988_749_894_8;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = sse_at(x1);
    let mut f2 = sse_at(x2);
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sse_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sse_at(x2);
        }
        if (hi - lo) < 1e-13 * (f_hi - f_lo).max(1.0) {
            break;
        }
    }
    let f_best = 0.5 * (lo + hi);
    let (a, b, c, rms) = fit_cosine_linear(ts, ys, 2.0 * std::f64::consts::PI * f_best)?;
    let amp = (a * a + b * b).sqrt();
    if amp < 1e-9 {
        return Err(XyError::FitFailure("no oscillation found in window".into()));
    }

    // frequency standard error from the curvature of the sse profile
    let h = (f_hi - f_lo) * 1e-7 + 1e-9;
    let curv = (sse_at(f_best + h) - 2.0 * sse_at(f_best) + sse_at(f_best - h)) / (h * h);
    let dof = (n as f64 - 4.0).max(1.0);
    let s2 = rms * rms * n as f64 / dof;
    let f_stderr = if curv > 0.0 { (2.0 * s2 / curv).sqrt() } else { f64::NAN };

    Ok(SinusoidFit {
        frequency: f_best,
        amplitude: amp,
        phase: b.atan2(a).rem_euclid(2.0 * std::f64::consts::PI) * -1.0 + 0.0,
        offset: c,
        frequency_stderr: f_stderr,
        rms_residual: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;
    use rand::Rng;

    #[test]
    fn decay_exact_recovery() {
        let lengths: Vec<f64> = vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let means: Vec<f64> = lengths.iter().map(|&l| 0.25 + 0.7 * 0.9f64.powf(l)).collect();
        let w = vec![1.0; 6];
        let fit = fit_decay(&lengths, &means, &w).unwrap();
        assert!((fit.rate - 0.9).abs() < 1e-9, "p = {}", fit.rate);
        assert!((fit.amplitude - 0.7).abs() < 1e-9);
        assert!((fit.baseline - 0.25).abs() < 1e-9);
    }

    #[test]
    fn decay_with_binomial_noise() {
        let streams = Streams::new(99);
        let mut rng = streams.stream(0);
        let shots = 500u64;
        let lengths: Vec<f64> = vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let mut means = Vec::new();
        let mut weights = Vec::new();
        for &l in &lengths {
            let p = 0.25 + 0.7 * 0.9f64.powf(l);
            // average of 32 binomial estimates, as in a benchmarking run
            let mut acc = 0.0;
            for _ in 0..32 {
                let k: u64 = (0..shots).filter(|_| rng.gen::<f64>() < p).count() as u64;
                acc += k as f64 / shots as f64;
            }
            means.push(acc / 32.0);
            let sigma = (p * (1.0 - p) / (shots as f64 * 32.0)).sqrt().max(1e-6);
            weights.push(1.0 / sigma);
        }
        let fit = fit_decay(&lengths, &means, &weights).unwrap();
        assert!(
            (fit.rate - 0.9).abs() < 3.0 * fit.rate_stderr.max(1e-4),
            "p = {} ± {}",
            fit.rate,
            fit.rate_stderr
        );
    }

    #[test]
    fn decay_rejects_constant_data() {
        let lengths = vec![2.0, 4.0, 8.0, 16.0];
        let means = vec![0.5; 4];
        let w = vec![1.0; 4];
        assert!(fit_decay(&lengths, &means, &w).is_err());
    }

    #[test]
    fn sinusoid_frequency_recovery() {
        let f_true = 857.76e6;
        let ts: Vec<f64> = (0..64).map(|i| i as f64 * 0.05e-9).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * f_true * t + 0.3).cos())
            .collect();
        let fit = fit_sinusoid(&ts, &ys, 1e6, 2e9).unwrap();
        assert!(
            (fit.frequency - f_true).abs() / f_true < 1e-6,
            "fitted {}",
            fit.frequency
        );
    }

    #[test]
    fn sinusoid_rejects_flat_data() {
        let ts: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let ys = vec![0.25; 32];
        assert!(fit_sinusoid(&ts, &ys, 0.001, 0.3).is_err());
    }
}
