//! Dense complex matrices sized for few-qudit problems (dimension ≤ 32).
//!
//! Row-major storage. Nothing here is tuned for large systems; the point is
//! predictable, convention-stable arithmetic for gate algebra and small
//! channel/fidelity computations.

use num_complex::Complex64 as C64;
use std::fmt;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from a nested slice of (re, im) pairs; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nr = rows.len();
        let nc = rows[0].len();
        let mut m = Self::zeros(nr, nc);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), nc, "ragged rows");
            for (c, &z) in row.iter().enumerate() {
                m[(r, c)] = z;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conjugate(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].conj())
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * s)
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + rhs[(r, c)])
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - rhs[(r, c)])
    }

    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self[(ar, ac)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for br in 0..rhs.rows {
                    for bc in 0..rhs.cols {
                        out[(ar * rhs.rows + br, ac * rhs.cols + bc)] = a * rhs[(br, bc)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |U†U − I|, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let p = self.dagger().matmul(self);
        p.max_abs_diff(&CMatrix::identity(self.rows))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.dagger()) < tol
    }

    /// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi
    /// rotations. Returns (eigenvalues ascending, column eigenvector matrix).
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);

        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    // Unitary 2x2 rotation zeroing the (p,q) element of a
                    // Hermitian matrix: a' = J† a J with
                    //   J[[p,p],[p,q],[q,p],[q,q]] = [c, s, -s*conj phase, c]-form.
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let abs = apq.norm();
                    let phase = apq / abs; // e^{i arg}
                    let tau = (aqq - app) / (2.0 * abs);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // columns p,q of a and v updated: J has entries
                    // J_pp = c, J_qp = -s*conj(phase), J_pq = s*phase, J_qq = c
                    for r in 0..n {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp * c - arq * s * phase.conj();
                        a[(r, q)] = arp * s * phase + arq * c;
                    }
                    for cidx in 0..n {
                        let apr = a[(p, cidx)];
                        let aqr = a[(q, cidx)];
                        a[(p, cidx)] = apr * c - aqr * s * phase;
                        a[(q, cidx)] = apr * s * phase.conj() + aqr * c;
                    }
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp * c - vrq * s * phase.conj();
                        v[(r, q)] = vrp * s * phase + vrq * c;
                    }
                }
            }
        }

        let mut idx: Vec<usize> = (0..n).collect();
        let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        idx.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
        let sorted: Vec<f64> = idx.iter().map(|&i| evals[i]).collect();
        let vecs = CMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
        (sorted, vecs)
    }

    /// exp(-i t H) for Hermitian H (checked loosely) via eigendecomposition.
    pub fn expm_neg_i_h(&self, t: f64) -> CMatrix {
        let (evals, vecs) = self.eigh();
        let n = self.rows;
        let mut d = CMatrix::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = C64::from_polar(1.0, -evals[i] * t);
        }
        vecs.matmul(&d).matmul(&vecs.dagger())
    }
}

/// Solve the n-n real linear system a x = b by Gaussian elimination with
/// partial pivoting. Used by small least-squares fits.
pub fn solve_real(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_identity() {
        let id = CMatrix::identity(4);
        let m = CMatrix::from_fn(4, 4, |r, c_| c((r * 4 + c_) as f64, 0.3));
        assert!(m.matmul(&id).max_abs_diff(&m) < 1e-15);
        assert!(id.matmul(&m).max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn kron_dims() {
        let a = CMatrix::identity(2);
        let b = CMatrix::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        assert!(k.max_abs_diff(&CMatrix::identity(6)) < 1e-15);
    }

    #[test]
    fn eigh_recovers_hermitian() {
        // H = V diag V† round trip on a fixed Hermitian matrix
        let h = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.3, 0.7), c(0.0, -0.2)],
            vec![c(0.3, -0.7), c(-1.0, 0.0), c(0.5, 0.1)],
            vec![c(0.0, 0.2), c(0.5, -0.1), c(0.4, 0.0)],
        ]);
        assert!(h.is_hermitian(1e-12));
        let (evals, vecs) = h.eigh();
        let mut d = CMatrix::zeros(3, 3);
        for i in 0..3 {
            d[(i, i)] = c(evals[i], 0.0);
        }
        let back = vecs.matmul(&d).matmul(&vecs.dagger());
        assert!(back.max_abs_diff(&h) < 1e-12);
        assert!(vecs.unitarity_defect() < 1e-12);
        assert!(evals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn expm_unitary() {
        let h = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.2, 0.5)],
            vec![c(0.2, -0.5), c(-0.7, 0.0)],
        ]);
        let u = h.expm_neg_i_h(0.83);
        assert!(u.unitarity_defect() < 1e-12);
        // d/dt at 0: exp(-iH t) ≈ I - iHt
        let u_small = h.expm_neg_i_h(1e-6);
        let approx = CMatrix::identity(2).sub(&h.scale(c(0.0, 1e-6)));
        assert!(u_small.max_abs_diff(&approx) < 1e-11);
    }

    #[test]
    fn linear_solve() {
        let mut a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let mut b = vec![5.0, 10.0];
        let x = solve_real(&mut a, &mut b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }
}
