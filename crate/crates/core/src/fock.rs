//! Few-mode fermionic Fock space with a Jordan–Wigner representation.
//!
//! Mode 0 is the most significant bit of the occupation index and the
//! leftmost factor of the string, so `c_m = Z ⊗ … ⊗ Z ⊗ a ⊗ I ⊗ … ⊗ I`.

use crate::linalg::{cr, CMatrix};

#[derive(Clone, Debug)]
pub struct FockSpace {
    modes: usize,
    annihilators: Vec<CMatrix>,
}

impl FockSpace {
    pub fn new(modes: usize) -> Self {
        assert!((1..=8).contains(&modes), "Fock space supports 1..=8 modes");
        let z = CMatrix::from_real_diag(&[1.0, -1.0]);
        let i2 = CMatrix::identity(2);
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = cr(1.0);
        let annihilators = (0..modes)
            .map(|m| {
                let mut op = CMatrix::identity(1);
                for k in 0..modes {
                    let f = match k.cmp(&m) {
                        std::cmp::Ordering::Less => &z,
                        std::cmp::Ordering::Equal => &a,
                        std::cmp::Ordering::Greater => &i2,
                    };
                    op = op.kron(f);
                }
                op
            })
            .collect();
        Self { modes, annihilators }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn annihilate(&self, mode: usize) -> &CMatrix {
        &self.annihilators[mode]
    }

    pub fn create(&self, mode: usize) -> CMatrix {
        self.annihilators[mode].adjoint()
    }

    pub fn number(&self, mode: usize) -> CMatrix {
        &self.create(mode) * self.annihilate(mode)
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim())
    }

    /// Occupation-index vector of `c†_{m0} c†_{m1} … |0⟩` (creators applied right to left).
    pub fn state(&self, created: &[usize]) -> Vec<num_complex::Complex64> {
        let mut v = vec![cr(0.0); self.dim()];
        v[0] = cr(1.0);
        for &m in created.iter().rev() {
            v = self.create(m).matvec(&v);
        }
        v
    }

    /// Fermion parity (−1)^(total occupation), diagonal.
    pub fn parity(&self) -> CMatrix {
        let d: Vec<f64> = (0..self.dim())
            .map(|i: usize| if i.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect();
        CMatrix::from_real_diag(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_anticommutators() {
        let f = FockSpace::new(3);
        for i in 0..3 {
            for j in 0..3 {
                let ci = f.annihilate(i);
                let cdj = f.create(j);
                let anti = &(ci * &cdj) + &(&cdj * ci);
                let want = if i == j { f.identity() } else { CMatrix::zeros(8, 8) };
                assert!(anti.max_abs_diff(&want) < 1e-15);
                let cc = &(ci * f.annihilate(j)) + &(f.annihilate(j) * ci);
                assert!(cc.max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn states_are_normalized_with_signs() {
        let f = FockSpace::new(2);
        let v01 = f.state(&[0, 1]);
        let v10 = f.state(&[1, 0]);
        assert_eq!(v01[3], cr(1.0));
        assert_eq!(v10[3], cr(-1.0));
    }
}
