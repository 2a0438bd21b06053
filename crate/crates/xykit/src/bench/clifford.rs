//! Two-qubit Clifford group: symplectic tableau representation, uniform
//! sampling, and synthesis into the native gate set {rz, rx(π/2), iswap|cz}.
//!
//! The table is built once by breadth-first closure from the native
//! generators, which simultaneously enumerates the group (11520 elements),
//! provides uniform sampling by index, and records a shortest native circuit
//! for every element.

use crate::error::XyError;
use crate::qcore::{Circuit, Gate, QuditSpace, Unitary};
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

/// Two-qubit Pauli operator `i^phase · (X^x0 Z^z0) ⊗ (X^x1 Z^z1)` with
/// x, z bit-packed as (bit0 = qubit 0, bit1 = qubit 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pauli2 {
    pub x: u8,
    pub z: u8,
    pub phase: u8, // exponent of i, mod 4
}

impl Pauli2 {
    pub fn identity() -> Self {
        Self { x: 0, z: 0, phase: 0 }
    }

    /// Product `self · rhs` with phase tracking.
    pub fn mul(&self, rhs: &Pauli2) -> Pauli2 {
        // per qubit: Z^b X^c = (-1)^{bc} X^c Z^b
        let mut phase = (self.phase + rhs.phase) % 4;
        for q in 0..2u8 {
            let b = (self.z >> q) & 1;
            let c_ = (rhs.x >> q) & 1;
            phase = (phase + 2 * (b & c_)) % 4;
        }
        Pauli2 { x: self.x ^ rhs.x, z: self.z ^ rhs.z, phase }
    }

    /// Hermitian Paulis have phase ≡ (number of Y factors) mod 2 in this
    /// encoding; signs live in the phase's multiple of 2.
    pub fn is_hermitian(&self) -> bool {
        let ys = ((self.x & self.z) & 1) + ((self.x & self.z) >> 1);
        self.phase % 2 == ys % 2
    }

    /// Dense 4x4 matrix (site 0 most significant).
    pub fn matrix(&self) -> crate::linalg::CMatrix {
        let single = |x: u8, z: u8| -> crate::linalg::CMatrix {
            let zero = C64::new(0.0, 0.0);
            let one = C64::new(1.0, 0.0);
            match (x, z) {
                (0, 0) => crate::linalg::CMatrix::identity(2),
                (1, 0) => crate::linalg::CMatrix::from_rows(&[vec![zero, one], vec![one, zero]]),
                (0, 1) => crate::linalg::CMatrix::from_rows(&[vec![one, zero], vec![zero, -one]]),
                _ => {
                    // XZ = -iY
                    crate::linalg::CMatrix::from_rows(&[vec![zero, -one], vec![one, zero]])
                }
            }
        };
        let m0 = single(self.x & 1, self.z & 1);
        let m1 = single((self.x >> 1) & 1, (self.z >> 1) & 1);
        let ph = C64::i().powu(self.phase as u32);
        m0.kron(&m1).scale(ph)
    }
}

/// Clifford element as the images of the generators (X0, Z0, X1, Z1) under
/// conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    pub images: [Pauli2; 4],
}

const GEN_PAULIS: [Pauli2; 4] = [
    Pauli2 { x: 0b01, z: 0b00, phase: 0 }, // X0
    Pauli2 { x: 0b00, z: 0b01, phase: 0 }, // Z0
    Pauli2 { x: 0b10, z: 0b00, phase: 0 }, // X1
    Pauli2 { x: 0b00, z: 0b10, phase: 0 }, // Z1
];

impl CliffordElement {
    pub fn identity() -> Self {
        Self { images: GEN_PAULIS }
    }

    /// Compact 28-bit key: (x, z, sign) per image.
    pub fn key(&self) -> u32 {
        let mut k = 0u32;
        for im in &self.images {
            debug_assert!(im.is_hermitian());
            let ys = ((im.x & im.z) & 1) + ((im.x & im.z) >> 1);
            let sign = ((im.phase + 4 - (ys % 2)) / 2) % 2; // 0 => +, 1 => −
            k = (k << 7) | ((im.x as u32) << 5) | ((im.z as u32) << 3) | (sign as u32);
        }
        k
    }

    /// Image of an arbitrary Pauli under this element's conjugation map.
    pub fn image_of(&self, p: &Pauli2) -> Pauli2 {
        let mut out = Pauli2 { x: 0, z: 0, phase: p.phase };
        // canonical order X0^x0 Z0^z0 X1^x1 Z1^z1
        let factors = [
            (p.x & 1 != 0, 0usize),
            (p.z & 1 != 0, 1usize),
            (p.x & 2 != 0, 2usize),
            (p.z & 2 != 0, 3usize),
        ];
        for (present, gen) in factors {
            if present {
                out = out.mul(&self.images[gen]);
            }
        }
        out
    }

    /// `self` applied first, then `other`.
    pub fn compose(&self, other: &CliffordElement) -> CliffordElement {
        let images = [
            other.image_of(&self.images[0]),
            other.image_of(&self.images[1]),
            other.image_of(&self.images[2]),
            other.image_of(&self.images[3]),
        ];
        CliffordElement { images }
    }

    /// Group inverse: symplectic part by F2 Gaussian elimination, sign bits
    /// by a 16-way search (exact).
    pub fn invert(&self) -> CliffordElement {
        // symplectic matrix columns = image bit-vectors (x0, z0, x1, z1)
        let col = |p: &Pauli2| -> [u8; 4] {
            [p.x & 1, p.z & 1, (p.x >> 1) & 1, (p.z >> 1) & 1]
        };
        let mut m = [[0u8; 8]; 4]; // [M | I] augmented
        for (j, im) in self.images.iter().enumerate() {
            let c_ = col(im);
            for i in 0..4 {
                m[i][j] = c_[i];
            }
        }
        for i in 0..4 {
            m[i][4 + i] = 1;
        }
        // gaussian elimination over F2
        let mut row = 0;
        for colidx in 0..4 {
            let piv = (row..4).find(|&r| m[r][colidx] == 1);
            let Some(piv) = piv else { continue };
            m.swap(row, piv);
            for r in 0..4 {
                if r != row && m[r][colidx] == 1 {
                    for k in 0..8 {
                        m[r][k] ^= m[row][k];
                    }
                }
            }
            row += 1;
        }
        debug_assert_eq!(row, 4, "tableau must be invertible");
        // inverse columns from the augmented part
        let mut base = [Pauli2::identity(); 4];
        for j in 0..4 {
            let v: Vec<u8> = (0..4).map(|i| m[i][4 + j]).collect();
            let x = v[0] | (v[2] << 1);
            let z = v[1] | (v[3] << 1);
            let ys = ((x & z) & 1) + ((x & z) >> 1);
            base[j] = Pauli2 { x, z, phase: ys % 2 };
        }
        for signs in 0..16u8 {
            let mut cand = CliffordElement { images: base };
            for (j, im) in cand.images.iter_mut().enumerate() {
                if (signs >> j) & 1 == 1 {
                    im.phase = (im.phase + 2) % 4;
                }
            }
            if self.compose(&cand) == CliffordElement::identity() {
                return cand;
            }
        }
        unreachable!("one of the 16 sign assignments must invert the tableau")
    }

    /// Extract the tableau of a two-qubit unitary, if it is Clifford.
    pub fn from_unitary(u: &Unitary) -> Option<CliffordElement> {
        if u.dim() != 4 {
            return None;
        }
        let mut images = [Pauli2::identity(); 4];
        for (j, gen) in GEN_PAULIS.iter().enumerate() {
            let m = u.matrix().matmul(&gen.matrix()).matmul(&u.matrix().dagger());
            let mut found = None;
            'search: for x in 0..4u8 {
                for z in 0..4u8 {
                    let ys = ((x & z) & 1) + ((x & z) >> 1);
                    for sign in 0..2u8 {
                        let cand = Pauli2 { x, z, phase: (ys % 2 + 2 * sign) % 4 };
                        if m.max_abs_diff(&cand.matrix()) < 1e-9 {
                            found = Some(cand);
                            break 'search;
                        }
                    }
                }
            }
            images[j] = found?;
        }
        Some(CliffordElement { images })
    }
}

/// Entangling gate available to the synthesizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Entangler {
    Iswap,
    Cz,
}

impl Entangler {
    fn gate(&self) -> Gate {
        match self {
            Entangler::Iswap => Gate::Iswap,
            Entangler::Cz => Gate::Cz,
        }
    }
}

/// Native generator set used for synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NativeGen {
    S(usize),
    Sx(usize),
    Ent,
}

impl NativeGen {
    fn op(&self, ent: Entangler) -> (Gate, Vec<usize>) {
        match *self {
            NativeGen::S(q) => (Gate::Rz(FRAC_PI_2), vec![q]),
            NativeGen::Sx(q) => (Gate::Rx(FRAC_PI_2), vec![q]),
            NativeGen::Ent => (ent.gate(), vec![0, 1]),
        }
    }
}

/// Enumerated two-qubit Clifford group with native circuits.
pub struct CliffordTable {
    entangler: Entangler,
    /// key -> index into `elements`
    index: HashMap<u32, usize>,
    elements: Vec<CliffordElement>,
    /// shortest generator word per element, in application order
    words: Vec<Vec<NativeGen>>,
}

static TABLE_ISWAP: OnceLock<CliffordTable> = OnceLock::new();
static TABLE_CZ: OnceLock<CliffordTable> = OnceLock::new();

impl CliffordTable {
    /// The shared table for a native entangler (built on first use).
    pub fn get(entangler: Entangler) -> &'static CliffordTable {
        match entangler {
            Entangler::Iswap => TABLE_ISWAP.get_or_init(|| CliffordTable::build(entangler)),
            Entangler::Cz => TABLE_CZ.get_or_init(|| CliffordTable::build(entangler)),
        }
    }

    fn build(entangler: Entangler) -> CliffordTable {
        let space = QuditSpace::qubits(2);
        let gens = [
            NativeGen::S(0),
            NativeGen::S(1),
            NativeGen::Sx(0),
            NativeGen::Sx(1),
            NativeGen::Ent,
        ];
        let gen_elems: Vec<CliffordElement> = gens
            .iter()
            .map(|g| {
                let (gate, sites) = g.op(entangler);
                let mut c = Circuit::new(space.clone());
                c.push(gate, &sites);
                CliffordElement::from_unitary(&c.unitary().expect("native gate"))
                    .expect("native generators are Clifford")
            })
            .collect();

        let mut elements = vec![CliffordElement::identity()];
        let mut words: Vec<Vec<NativeGen>> = vec![Vec::new()];
        let mut index = HashMap::new();
        index.insert(CliffordElement::identity().key(), 0usize);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &ei in &frontier {
                let base = elements[ei];
                let word = words[ei].clone();
                for (gi, g) in gen_elems.iter().enumerate() {
                    let prod = base.compose(g);
                    let key = prod.key();
                    if !index.contains_key(&key) {
                        let mut w = word.clone();
                        w.push(gens[gi]);
                        index.insert(key, elements.len());
                        next.push(elements.len());
                        elements.push(prod);
                        words.push(w);
                    }
                }
            }
            frontier = next;
        }
        CliffordTable { entangler, index, elements, words }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    pub fn element(&self, idx: usize) -> &CliffordElement {
        &self.elements[idx]
    }

    /// Uniform sample.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> CliffordElement {
        self.elements[rng.gen_range(0..self.elements.len())]
    }

    /// Native circuit for an element (errors if it is not in the group).
    pub fn to_circuit(&self, elem: &CliffordElement) -> Result<Circuit, XyError> {
        let idx = self
            .index
            .get(&elem.key())
            .ok_or(XyError::NotClifford)?;
        let mut c = Circuit::new(QuditSpace::qubits(2));
        for g in &self.words[*idx] {
            let (gate, sites) = g.op(self.entangler);
            c.push(gate, &sites);
        }
        Ok(c)
    }

    /// Number of entangling gates in the synthesized circuit.
    pub fn entangler_count(&self, elem: &CliffordElement) -> usize {
        self.index
            .get(&elem.key())
            .map(|&i| self.words[i].iter().filter(|g| matches!(g, NativeGen::Ent)).count())
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::distance_global_phase;
    use rand::Rng;

    #[test]
    fn group_order_is_11520() {
        assert_eq!(CliffordTable::get(Entangler::Iswap).len(), 11520);
        assert_eq!(CliffordTable::get(Entangler::Cz).len(), 11520);
    }

    #[test]
    fn identity_synthesizes_to_empty_circuit() {
        let t = CliffordTable::get(Entangler::Iswap);
        let c = t.to_circuit(&CliffordElement::identity()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn compose_invert_roundtrip() {
        let t = CliffordTable::get(Entangler::Iswap);
        let mut rng = crate::rng::Streams::new(5).stream(0);
        for _ in 0..1000 {
            let a = t.sample(&mut rng);
            let inv = a.invert();
            assert_eq!(a.compose(&inv), CliffordElement::identity());
            assert_eq!(inv.compose(&a), CliffordElement::identity());
        }
    }

    #[test]
    fn tableau_matches_circuit_unitary() {
        // the synthesized circuit's unitary must conjugate Paulis exactly as
        // the tableau says (up to global phase, which conjugation cancels)
        let t = CliffordTable::get(Entangler::Iswap);
        let mut rng = crate::rng::Streams::new(6).stream(0);
        for _ in 0..50 {
            let a = t.sample(&mut rng);
            let c = t.to_circuit(&a).unwrap();
            let u = c.unitary().unwrap();
            let from_u = CliffordElement::from_unitary(&u).expect("circuit is Clifford");
            assert_eq!(from_u, a);
        }
    }

    #[test]
    fn compose_matches_matrix_product() {
        let t = CliffordTable::get(Entangler::Cz);
        let mut rng = crate::rng::Streams::new(8).stream(0);
        for _ in 0..25 {
            let a = t.sample(&mut rng);
            let b = t.sample(&mut rng);
            let ua = t.to_circuit(&a).unwrap().unitary().unwrap();
            let ub = t.to_circuit(&b).unwrap().unitary().unwrap();
            let uab = ub.then_after(&ua).unwrap(); // a first
            let ab = a.compose(&b);
            let uc = t.to_circuit(&ab).unwrap().unitary().unwrap();
            assert!(distance_global_phase(&uab, &uc).unwrap() < 1e-10);
        }
    }

    #[test]
    fn uniform_sampling_covers_group() {
        let t = CliffordTable::get(Entangler::Iswap);
        let mut rng = crate::rng::Streams::new(9).stream(0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..4000 {
            seen.insert(t.sample(&mut rng).key());
        }
        // With 4000 draws from 11520 elements, expect ~2900 distinct
        assert!(seen.len() > 2500, "{}", seen.len());
        let _ = rng.gen::<u32>();
    }

    #[test]
    fn from_unitary_rejects_non_clifford() {
        let u = crate::qcore::xy_unitary(0.0, 1.0); // XY(1 rad) is not Clifford
        assert!(CliffordElement::from_unitary(&u).is_none());
        let u = crate::qcore::xy_unitary(0.0, std::f64::consts::PI); // iSWAP is
        assert!(CliffordElement::from_unitary(&u).is_some());
    }
}
