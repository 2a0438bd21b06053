//! Gate zoo and dense unitary algebra over small qudit spaces.
//!
//! Conventions, fixed once for the whole crate:
//! - basis ordering is mixed-radix with site 0 as the most significant digit
//!   (two qubits: |00>, |01>, |10>, |11>);
//! - `rz(φ) = diag(e^{-iφ/2}, e^{+iφ/2})`;
//! - `XY(β, θ)` acts on span{|01>, |10>} with `cos(θ/2)` on the diagonal and
//!   `i sin(θ/2) e^{±iβ}` off-diagonal, `<01|XY|10> = i sin(θ/2) e^{iβ}`;
//! - matrices compose right-to-left; `Circuit` op lists are in application
//!   order (first listed acts on states first).

use crate::error::XyError;
use crate::linalg::CMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

pub const UNITARITY_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tensor-product space of qudits with per-site dimensions.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuditSpace {
    dims: Vec<usize>,
}

impl QuditSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self, XyError> {
        if dims.is_empty() {
            return Err(XyError::InvalidParameter("space needs at least one site".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(XyError::InvalidParameter("every site dimension must be >= 2".into()));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("n >= 1")
    }

    pub fn qutrits(n: usize) -> Self {
        Self::new(vec![3; n]).expect("n >= 1")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Mixed-radix digits of a basis index, site 0 first (most significant).
    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        let mut rem = index;
        for (i, &d) in self.dims.iter().enumerate().rev() {
            out[i] = rem % d;
            rem /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.dims.len());
        let mut idx = 0;
        for (i, &d) in self.dims.iter().enumerate() {
            debug_assert!(digits[i] < d);
            idx = idx * d + digits[i];
        }
        idx
    }
}

/// Unitary matrix over a qudit space, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    space: QuditSpace,
    m: CMatrix,
}

impl Unitary {
    pub fn from_matrix(space: QuditSpace, m: CMatrix) -> Result<Self, XyError> {
        if m.rows() != space.total_dim() || m.cols() != space.total_dim() {
            return Err(XyError::DimMismatch(format!(
                "matrix is {}x{}, space dimension is {}",
                m.rows(),
                m.cols(),
                space.total_dim()
            )));
        }
        let defect = m.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(XyError::NonUnitary { defect, tol: UNITARITY_TOL });
        }
        Ok(Self { space, m })
    }

    pub fn space(&self) -> &QuditSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Matrix product `self · rhs` (rhs acts first).
    pub fn then_after(&self, rhs: &Unitary) -> Result<Unitary, XyError> {
        if self.space != rhs.space {
            return Err(XyError::DimMismatch("composing unitaries over different spaces".into()));
        }
        Ok(Unitary { space: self.space.clone(), m: self.m.matmul(&rhs.m) })
    }

    pub fn dagger(&self) -> Unitary {
        Unitary { space: self.space.clone(), m: self.m.dagger() }
    }

    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        self.m.matvec(state)
    }
}

/// `sqrt(1 - |tr(U†V)|/d)`: zero iff U and V agree up to a global phase.
///
/// Evaluated as `‖U - e^{iφ*}V‖_F / sqrt(2d)` with `φ* = arg tr(U†V)`, which
/// is the same quantity without the catastrophic cancellation of
/// `1 - |tr|/d` near zero (the naive form bottoms out near 1e-8 in f64).
pub fn distance_global_phase(u: &Unitary, v: &Unitary) -> Result<f64, XyError> {
    if u.dim() != v.dim() {
        return Err(XyError::DimMismatch("distance between different dimensions".into()));
    }
    let tr = u.m.dagger().matmul(&v.m).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { c(1.0, 0.0) };
    let aligned = v.m.scale(phase.conj());
    let d = u.dim() as f64;
    Ok(u.m.sub(&aligned).frobenius_norm() / (2.0 * d).sqrt())
}

// --- single-qubit gates ----------------------------------------------------

fn one_qubit(m: CMatrix) -> Unitary {
    Unitary::from_matrix(QuditSpace::qubits(1), m).expect("exact constructor")
}

pub fn rz(phi: f64) -> Unitary {
    one_qubit(CMatrix::from_rows(&[
        vec![C64::from_polar(1.0, -phi / 2.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), C64::from_polar(1.0, phi / 2.0)],
    ]))
}

pub fn rx(phi: f64) -> Unitary {
    let (co, si) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    one_qubit(CMatrix::from_rows(&[
        vec![c(co, 0.0), c(0.0, -si)],
        vec![c(0.0, -si), c(co, 0.0)],
    ]))
}

pub fn ry(phi: f64) -> Unitary {
    let (co, si) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    one_qubit(CMatrix::from_rows(&[
        vec![c(co, 0.0), c(-si, 0.0)],
        vec![c(si, 0.0), c(co, 0.0)],
    ]))
}

/// Rotation by `phi` about the equatorial axis at azimuth `beta`:
/// `RX(β,θ) = RZ(-β) RX(θ) RZ(β)` in circuit order (leftmost first).
pub fn rx_phased(beta: f64, phi: f64) -> Unitary {
    let m = rz(beta)
        .matrix()
        .matmul(rx(phi).matrix())
        .matmul(rz(-beta).matrix());
    one_qubit(m)
}

pub fn hadamard() -> Unitary {
    let v = FRAC_1_SQRT_2;
    one_qubit(CMatrix::from_rows(&[
        vec![c(v, 0.0), c(v, 0.0)],
        vec![c(v, 0.0), c(-v, 0.0)],
    ]))
}

pub fn pauli_x() -> Unitary {
    one_qubit(CMatrix::from_rows(&[
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ]))
}

// --- two-qubit gates --------------------------------------------------------

fn two_qubit(m: CMatrix) -> Unitary {
    Unitary::from_matrix(QuditSpace::qubits(2), m).expect("exact constructor")
}

/// The XY-family unitary: rotation by θ in span{|01>, |10>} about the
/// equatorial axis set by β.
pub fn xy_unitary(beta: f64, theta: f64) -> Unitary {
    let co = c((theta / 2.0).cos(), 0.0);
    let si = (theta / 2.0).sin();
    let up = c(0.0, si) * C64::from_polar(1.0, beta);
    let dn = c(0.0, si) * C64::from_polar(1.0, -beta);
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    two_qubit(CMatrix::from_rows(&[
        vec![one, z, z, z],
        vec![z, co, up, z],
        vec![z, dn, co, z],
        vec![z, z, z, one],
    ]))
}

pub fn iswap() -> Unitary {
    xy_unitary(0.0, std::f64::consts::PI)
}

pub fn sqrt_iswap() -> Unitary {
    xy_unitary(0.0, std::f64::consts::FRAC_PI_2)
}

pub fn cphase(theta: f64) -> Unitary {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    two_qubit(CMatrix::from_rows(&[
        vec![one, z, z, z],
        vec![z, one, z, z],
        vec![z, z, one, z],
        vec![z, z, z, C64::from_polar(1.0, theta)],
    ]))
}

pub fn cz() -> Unitary {
    cphase(std::f64::consts::PI)
}

pub fn cnot() -> Unitary {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    two_qubit(CMatrix::from_rows(&[
        vec![one, z, z, z],
        vec![z, one, z, z],
        vec![z, z, z, one],
        vec![z, z, one, z],
    ]))
}

pub fn swap() -> Unitary {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    two_qubit(CMatrix::from_rows(&[
        vec![one, z, z, z],
        vec![z, z, one, z],
        vec![z, one, z, z],
        vec![z, z, z, one],
    ]))
}

// --- two-qutrit gates --------------------------------------------------------

fn two_qutrit_exchange(a: (usize, usize), b: (usize, usize), beta: f64, theta: f64) -> Unitary {
    let space = QuditSpace::qutrits(2);
    let ia = space.index(&[a.0, a.1]);
    let ib = space.index(&[b.0, b.1]);
    let mut m = CMatrix::identity(9);
    // exp[-i(θ/2)(e^{iβ}|a><b| + h.c.)] on the {a, b} block
    let co = c((theta / 2.0).cos(), 0.0);
    let si = (theta / 2.0).sin();
    m[(ia, ia)] = co;
    m[(ib, ib)] = co;
    m[(ia, ib)] = c(0.0, -si) * C64::from_polar(1.0, beta);
    m[(ib, ia)] = c(0.0, -si) * C64::from_polar(1.0, -beta);
    Unitary::from_matrix(space, m).expect("exact constructor")
}

/// Exchange between |11> and |02> of a transmon pair:
/// `exp[-i(θ/2)(e^{iβ}|11><02| + h.c.)]`, identity elsewhere.
pub fn xy02_unitary(beta: f64, theta: f64) -> Unitary {
    two_qutrit_exchange((1, 1), (0, 2), beta, theta)
}

/// Exchange between |11> and |20>.
pub fn xy20_unitary(beta: f64, theta: f64) -> Unitary {
    two_qutrit_exchange((1, 1), (2, 0), beta, theta)
}

// --- embedding & circuits ----------------------------------------------------

/// Embed `gate` so it acts on the listed sites (in the given order, which may
/// be permuted and non-adjacent) and as identity elsewhere.
pub fn embed(gate: &Unitary, sites: &[usize], space: &QuditSpace) -> Result<Unitary, XyError> {
    let n = space.sites();
    for &s in sites {
        if s >= n {
            return Err(XyError::SiteOutOfRange { site: s, sites: n });
        }
    }
    let mut seen = vec![false; n];
    for &s in sites {
        if seen[s] {
            return Err(XyError::DuplicateSite(s));
        }
        seen[s] = true;
    }
    let sel_dims: Vec<usize> = sites.iter().map(|&s| space.dims()[s]).collect();
    let sel_total: usize = sel_dims.iter().product();
    if gate.dim() != sel_total {
        return Err(XyError::DimMismatch(format!(
            "gate dimension {} does not match selected sites' dimension {}",
            gate.dim(),
            sel_total
        )));
    }
    if sites.len() != gate.space().sites() || gate.space().dims() != sel_dims.as_slice() {
        return Err(XyError::DimMismatch("gate site structure does not match targets".into()));
    }

    let d = space.total_dim();
    let mut out = CMatrix::zeros(d, d);
    let gm = gate.matrix();
    for col in 0..d {
        let col_digits = space.digits(col);
        let gcol_digits: Vec<usize> = sites.iter().map(|&s| col_digits[s]).collect();
        let gcol = {
            let mut idx = 0;
            for (k, &dg) in gcol_digits.iter().enumerate() {
                idx = idx * sel_dims[k] + dg;
            }
            idx
        };
        for grow in 0..sel_total {
            let v = gm[(grow, gcol)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            // row digits: copy col digits, overwrite selected sites
            let mut row_digits = col_digits.clone();
            let mut rem = grow;
            for k in (0..sites.len()).rev() {
                row_digits[sites[k]] = rem % sel_dims[k];
                rem /= sel_dims[k];
            }
            out[(space.index(&row_digits), col)] = v;
        }
    }
    Unitary::from_matrix(space.clone(), out)
}

/// Gate labels resolvable to constructors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Gate {
    H,
    X,
    Rz(f64),
    Rx(f64),
    Ry(f64),
    RxPhased(f64, f64),
    Cz,
    Cphase(f64),
    Cnot,
    Swap,
    Iswap,
    /// XY(β, θ)
    Xy(f64, f64),
    Xy02(f64, f64),
    Xy20(f64, f64),
}

impl Gate {
    pub fn unitary(&self) -> Unitary {
        match *self {
            Gate::H => hadamard(),
            Gate::X => pauli_x(),
            Gate::Rz(p) => rz(p),
            Gate::Rx(p) => rx(p),
            Gate::Ry(p) => ry(p),
            Gate::RxPhased(b, p) => rx_phased(b, p),
            Gate::Cz => cz(),
            Gate::Cphase(t) => cphase(t),
            Gate::Cnot => cnot(),
            Gate::Swap => swap(),
            Gate::Iswap => iswap(),
            Gate::Xy(b, t) => xy_unitary(b, t),
            Gate::Xy02(b, t) => xy02_unitary(b, t),
            Gate::Xy20(b, t) => xy20_unitary(b, t),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::H | Gate::X | Gate::Rz(_) | Gate::Rx(_) | Gate::Ry(_) | Gate::RxPhased(..) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Op {
    pub gate: Gate,
    pub sites: Vec<usize>,
}

/// Ordered gate list; list order is application order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Circuit {
    space: QuditSpace,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(space: QuditSpace) -> Self {
        Self { space, ops: Vec::new() }
    }

    pub fn space(&self) -> &QuditSpace {
        &self.space
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, gate: Gate, sites: &[usize]) -> &mut Self {
        debug_assert_eq!(gate.arity(), sites.len());
        self.ops.push(Op { gate, sites: sites.to_vec() });
        self
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Ordered product; the first listed gate is applied to states first.
    pub fn unitary(&self) -> Result<Unitary, XyError> {
        let mut acc = Unitary::from_matrix(
            self.space.clone(),
            CMatrix::identity(self.space.total_dim()),
        )?;
        for op in &self.ops {
            let g = embed(&op.gate.unitary(), &op.sites, &self.space)?;
            acc = g.then_after(&acc)?;
        }
        Ok(acc)
    }
}

/// Per-site excitation-number operator diag entries (total excitation of each
/// basis state), used by excitation-preservation checks.
pub fn excitation_numbers(space: &QuditSpace) -> Vec<usize> {
    (0..space.total_dim())
        .map(|i| space.digits(i).iter().sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn dist(u: &Unitary, v: &Unitary) -> f64 {
        distance_global_phase(u, v).unwrap()
    }

    #[test]
    fn xy_special_points() {
        // θ = 0 → identity
        let id = Unitary::from_matrix(QuditSpace::qubits(2), CMatrix::identity(4)).unwrap();
        assert!(xy_unitary(0.0, 0.0).matrix().max_abs_diff(id.matrix()) < 1e-15);
        // θ = π → iSWAP: off-diagonal +i, diagonal 0 in the 01/10 block
        let u = xy_unitary(0.0, PI);
        assert!((u.matrix()[(1, 2)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((u.matrix()[(2, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(u.matrix()[(1, 1)].norm() < 1e-15);
        // θ = π/2 → √iSWAP block
        let v = xy_unitary(0.0, FRAC_PI_2);
        let r = FRAC_1_SQRT_2;
        assert!((v.matrix()[(1, 1)] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((v.matrix()[(1, 2)] - C64::new(0.0, r)).norm() < 1e-15);
    }

    #[test]
    fn rz_and_rx_phased() {
        assert!(rz(0.0).matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        // β = 0 collapses the sandwich
        for k in 0..100 {
            let phi = -3.0 + 0.06 * k as f64;
            assert!(dist(&rx_phased(0.0, phi), &rx(phi)) < 1e-12);
        }
    }

    #[test]
    fn single_qubit_euler_identity() {
        // RX(θ) = RX(-π/2, π/2) RX(π/2-θ, π/2) RZ(θ), circuit order
        for k in 0..50 {
            let theta = -6.0 + 0.24 * k as f64;
            let m = rz(theta)
                .matrix()
                .matmul(rx_phased(FRAC_PI_2 - theta, FRAC_PI_2).matrix())
                .matmul(rx_phased(-FRAC_PI_2, FRAC_PI_2).matrix());
            let got = Unitary::from_matrix(QuditSpace::qubits(1), m).unwrap();
            assert!(dist(&got, &rx(theta)) < 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn cphase_cz_cnot() {
        assert!(dist(&cphase(PI), &cz()) < 1e-15);
        // CNOT = (I ⊗ H) CZ (I ⊗ H)
        let h1 = embed(&hadamard(), &[1], &QuditSpace::qubits(2)).unwrap();
        let m = h1.matrix().matmul(cz().matrix()).matmul(h1.matrix());
        assert!(m.max_abs_diff(cnot().matrix()) < 1e-14);
        // cphase family composes additively
        let a = cphase(0.7).then_after(&cphase(1.9)).unwrap();
        assert!(dist(&a, &cphase(2.6)) < 1e-14);
    }

    #[test]
    fn swap_from_cz_and_iswap_clifford_search() {
        // SWAP = (L0 ⊗ L1) · iSWAP · CZ for some single-qubit Cliffords L0, L1
        let s_gates: Vec<CMatrix> = {
            // all 24 single-qubit Cliffords from H and S words
            let h = hadamard();
            let s = rz(FRAC_PI_2);
            let mut set: Vec<CMatrix> = vec![CMatrix::identity(2)];
            loop {
                let mut grew = false;
                let cur = set.clone();
                for m in &cur {
                    for g in [&h, &s] {
                        let cand = g.matrix().matmul(m);
                        let is_new = set.iter().all(|u| {
                            let t = u.dagger().matmul(&cand).trace().norm();
                            (1.0 - t / 2.0).abs() > 1e-9
                        });
                        if is_new {
                            set.push(cand);
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            assert_eq!(set.len(), 24);
            set
        };
        let space = QuditSpace::qubits(2);
        let base = iswap().matrix().matmul(cz().matrix());
        let target = swap();
        let mut found = false;
        'outer: for l0 in &s_gates {
            for l1 in &s_gates {
                let loc = Unitary::from_matrix(space.clone(), l0.kron(l1)).unwrap();
                let m = loc.matrix().matmul(&base);
                let u = Unitary::from_matrix(space.clone(), m).unwrap();
                if dist(&u, &target) < 1e-10 {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found, "SWAP should decompose into one CZ + one iSWAP + local Cliffords");
    }

    #[test]
    fn xy02_points() {
        let id9 = CMatrix::identity(9);
        assert!(xy02_unitary(0.0, 0.0).matrix().max_abs_diff(&id9) < 1e-15);
        // 2π rotation in the 11/02 subspace: -1 on |11> and |02>, +1 elsewhere
        let u = xy02_unitary(0.0, 2.0 * PI);
        let space = QuditSpace::qutrits(2);
        let (i11, i02) = (space.index(&[1, 1]), space.index(&[0, 2]));
        for k in 0..9 {
            let want = if k == i11 || k == i02 { -1.0 } else { 1.0 };
            assert!((u.matrix()[(k, k)] - C64::new(want, 0.0)).norm() < 1e-14);
        }
        // column check against the 2x2 matrix-exponential oracle
        let beta = 0.9;
        let u = xy02_unitary(beta, PI);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = C64::from_polar(1.0, beta);
        h[(1, 0)] = C64::from_polar(1.0, -beta);
        let block = h.expm_neg_i_h(PI / 2.0); // basis (|11>, |02>)
        assert!((u.matrix()[(i02, i11)] - block[(1, 0)]).norm() < 1e-13);
        assert!((block[(1, 0)] - C64::new(0.0, -1.0) * C64::from_polar(1.0, -beta)).norm() < 1e-13);
    }

    #[test]
    fn xy20_maps_11_to_20() {
        let space = QuditSpace::qutrits(2);
        let (i11, i20) = (space.index(&[1, 1]), space.index(&[2, 0]));
        let u = xy20_unitary(0.3, PI);
        assert!(u.matrix()[(i11, i11)].norm() < 1e-15);
        assert!((u.matrix()[(i20, i11)].norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn embed_cases() {
        let space3 = QuditSpace::qubits(3);
        // identity anywhere stays identity
        let one = Unitary::from_matrix(QuditSpace::qubits(1), CMatrix::identity(2)).unwrap();
        let e = embed(&one, &[1], &space3).unwrap();
        assert!(e.matrix().max_abs_diff(&CMatrix::identity(8)) < 1e-15);
        // CZ is symmetric under site order
        let space2 = QuditSpace::qubits(2);
        let a = embed(&cz(), &[0, 1], &space2).unwrap();
        let b = embed(&cz(), &[1, 0], &space2).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
        // XY(0,π) on sites (0,2): |100> -> i|001>
        let e = embed(&xy_unitary(0.0, PI), &[0, 2], &space3).unwrap();
        let (i100, i001) = (space3.index(&[1, 0, 0]), space3.index(&[0, 0, 1]));
        assert!((e.matrix()[(i001, i100)] - C64::new(0.0, 1.0)).norm() < 1e-14);
        // oracle: explicit 8x8 construction
        let mut oracle = CMatrix::zeros(8, 8);
        for col in 0..8 {
            let d = space3.digits(col);
            let pair = (d[0], d[2]);
            match pair {
                (0, 1) | (1, 0) => {
                    let flipped = space3.index(&[d[2], d[1], d[0]]);
                    oracle[(flipped, col)] = C64::new(0.0, 1.0);
                }
                _ => {
                    oracle[(col, col)] = C64::new(1.0, 0.0);
                }
            }
        }
        assert!(e.matrix().max_abs_diff(&oracle) < 1e-14);
        // error paths
        assert!(embed(&cz(), &[0, 7], &space3).is_err());
        assert!(embed(&cz(), &[1, 1], &space3).is_err());
        assert!(embed(&cz(), &[0], &space3).is_err());
    }

    #[test]
    fn circuit_composition() {
        let mut c0 = Circuit::new(QuditSpace::qubits(1));
        assert!(c0.unitary().unwrap().matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        c0.push(Gate::Rz(0.4), &[0]).push(Gate::Rz(1.1), &[0]);
        assert!(dist(&c0.unitary().unwrap(), &rz(1.5)) < 1e-14);
    }

    #[test]
    fn distance_examples() {
        let u = xy_unitary(1.0, 0.7);
        assert!(dist(&u, &u) < 1e-15);
        let phased = Unitary::from_matrix(
            QuditSpace::qubits(2),
            u.matrix().scale(C64::from_polar(1.0, 2.13)),
        )
        .unwrap();
        assert!(dist(&u, &phased) < 1e-12);
        let id2 = Unitary::from_matrix(QuditSpace::qubits(1), CMatrix::identity(2)).unwrap();
        assert!((dist(&id2, &rz(PI)) - 1.0).abs() < 1e-12);
        // symmetry
        let v = xy_unitary(0.3, 2.2);
        assert!((dist(&u, &v) - dist(&v, &u)).abs() < 1e-14);
    }

    #[test]
    fn excitation_preservation() {
        let n_op = excitation_numbers(&QuditSpace::qubits(2));
        let u = xy_unitary(0.77, 1.3);
        for r in 0..4 {
            for col in 0..4 {
                if n_op[r] != n_op[col] {
                    assert!(u.matrix()[(r, col)].norm() < 1e-15);
                }
            }
        }
        let n3 = excitation_numbers(&QuditSpace::qutrits(2));
        let u = xy02_unitary(0.2, 1.1);
        for r in 0..9 {
            for col in 0..9 {
                if n3[r] != n3[col] {
                    assert!(u.matrix()[(r, col)].norm() < 1e-15);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn prop_axis_composition(beta in -6.3f64..6.3, t1 in -6.3f64..6.3, t2 in -6.3f64..6.3) {
            let lhs = xy_unitary(beta, t1).then_after(&xy_unitary(beta, t2)).unwrap();
            let rhs = xy_unitary(beta, t1 + t2);
            prop_assert!(dist(&lhs, &rhs) < 1e-12);
        }

        #[test]
        fn prop_phase_conjugation(beta in -6.3f64..6.3, theta in -6.3f64..6.3) {
            // XY(β,θ) = A · XY(0,θ) · A† with A = rz(-β/2) ⊗ rz(β/2)
            let a = rz(-beta / 2.0).matrix().kron(rz(beta / 2.0).matrix());
            let m = a.matmul(xy_unitary(0.0, theta).matrix()).matmul(&a.dagger());
            let got = Unitary::from_matrix(QuditSpace::qubits(2), m).unwrap();
            prop_assert!(dist(&got, &xy_unitary(beta, theta)) < 1e-12);
        }

        #[test]
        fn prop_unitarity(beta in -10.0f64..10.0, theta in -10.0f64..10.0) {
            prop_assert!(xy_unitary(beta, theta).matrix().unitarity_defect() < UNITARITY_TOL);
            prop_assert!(xy02_unitary(beta, theta).matrix().unitarity_defect() < UNITARITY_TOL);
        }
    }
}
