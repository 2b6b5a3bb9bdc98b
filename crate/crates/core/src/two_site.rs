//! Even–odd two-qubit density matrix: assembly from an observable set,
//! validation and the local-unitary fermionic image.
//!
//! Basis |e⟩⊗|o⟩ in the order {00, 01, 10, 11}, the even qubit first.

use crate::linalg::{cr, hermitian_eig, pauli, CMatrix};
use crate::observables::ObservableSet;
use crate::Error;

/// Eigenvalues in [−POSITIVITY_TOL, 0) are clipped; lower ones are an error.
pub const POSITIVITY_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-10;

/// Origin of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Ces,
    Tes,
    Ed,
}

#[derive(Clone, Debug)]
pub struct TwoSiteState {
    pub rho: CMatrix,
    pub source: Source,
}

fn pauli_pair(a: char, b: char) -> CMatrix {
    pauli(a).kron(&pauli(b))
}

impl TwoSiteState {
    /// Validates a 4×4 matrix, symmetrizing tiny Hermiticity defects and
    /// clipping tiny negative eigenvalues.
    pub fn new(rho: CMatrix, source: Source) -> Result<Self, Error> {
        if rho.rows() != 4 || rho.cols() != 4 {
            return Err(Error::InvalidState("two-site state must be 4x4".into()));
        }
        if rho.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if rho.hermiticity_defect() > TRACE_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {:.3e}", rho.hermiticity_defect())));
        }
        let mut rho = rho.hermitian_part();
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let eig = hermitian_eig(&rho)?;
        let min = eig.values[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            rho = eig.map_values(&clipped.iter().map(|&v| cr(v / total)).collect::<Vec<_>>()).hermitian_part();
        } else if tr != 1.0 {
            rho = rho.scale_real(1.0 / tr);
        }
        Ok(TwoSiteState { rho, source })
    }

    /// Expectation value of σᵃ⊗σᵇ (with 'i' for the identity).
    pub fn pauli_expectation(&self, a: char, b: char) -> f64 {
        self.rho.trace_product(&pauli_pair(a, b)).re
    }

    /// Reads the observable set back from the state; c_zz is taken directly.
    pub fn observables(&self) -> ObservableSet {
        ObservableSet {
            m_e: self.pauli_expectation('z', 'i'),
            m_o: self.pauli_expectation('i', 'z'),
            c_xx: self.pauli_expectation('x', 'x'),
            c_yy: self.pauli_expectation('y', 'y'),
            c_zz: self.pauli_expectation('z', 'z'),
            c_xy: self.pauli_expectation('x', 'y'),
            c_yx: self.pauli_expectation('y', 'x'),
        }
    }

    /// Largest modulus among the entries coupling {00, 11} to {01, 10}.
    pub fn x_state_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in [0, 3] {
            for b in [1, 2] {
                m = m.max(self.rho[(a, b)].norm()).max(self.rho[(b, a)].norm());
            }
        }
        m
    }

    /// Same state with the two qubits exchanged.
    pub fn swapped(&self) -> Self {
        let s = [0, 2, 1, 3];
        TwoSiteState { rho: CMatrix::from_fn(4, 4, |a, b| self.rho[(s[a], s[b])]), source: self.source }
    }
}

/// ρ = ¼[I + m_e σᶻ⊗I + m_o I⊗σᶻ + Σ c_αα σᵅ⊗σᵅ + c_xy σˣ⊗σʸ + c_yx σʸ⊗σˣ].
pub fn assemble_rho(obs: &ObservableSet, source: Source) -> Result<TwoSiteState, Error> {
    obs.validate()?;
    TwoSiteState::new(assemble_unchecked(obs), source)
}

/// Linear assembly without validation.
pub fn assemble_unchecked(obs: &ObservableSet) -> CMatrix {
    let terms = [
        (1.0, 'i', 'i'),
        (obs.m_e, 'z', 'i'),
        (obs.m_o, 'i', 'z'),
        (obs.c_xx, 'x', 'x'),
        (obs.c_yy, 'y', 'y'),
        (obs.c_zz, 'z', 'z'),
        (obs.c_xy, 'x', 'y'),
        (obs.c_yx, 'y', 'x'),
    ];
    let mut rho = CMatrix::zeros(4, 4);
    for (w, a, b) in terms {
        if w != 0.0 {
            rho = &rho + &pauli_pair(a, b).scale_real(0.25 * w);
        }
    }
    rho
}

/// (σˣ⊗σˣ) ρ (σˣ⊗σˣ).
pub fn fermionic_image(state: &TwoSiteState) -> TwoSiteState {
    let u = pauli_pair('x', 'x');
    TwoSiteState { rho: &(&u * &state.rho) * &u, source: state.source }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(a: [f64; 7]) -> ObservableSet {
        ObservableSet::from_array(a)
    }

    #[test]
    fn zero_observables_give_maximally_mixed() {
        let s = assemble_rho(&ObservableSet::ZERO, Source::Ces).unwrap();
        assert!(s.rho.max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn polarized_product() {
        let s = assemble_rho(&obs([-1.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), Source::Ces).unwrap();
        assert!(s.rho.max_abs_diff(&CMatrix::from_real_diag(&[0.0, 0.0, 0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn round_trip() {
        let o = obs([0.1, -0.2, 0.15, -0.05, 0.02, 0.03, -0.04]);
        let back = assemble_rho(&o, Source::Tes).unwrap().observables();
        assert!(back.max_abs_diff(&o) < 1e-12);
    }

    #[test]
    fn equilibrium_is_x_state() {
        let o = obs([0.1, -0.2, 0.15, -0.05, 0.02, 0.0, 0.0]);
        assert!(assemble_rho(&o, Source::Ces).unwrap().x_state_defect() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_correlators() {
        assert!(assemble_rho(&obs([1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]), Source::Ces).is_err());
    }

    #[test]
    fn clips_tiny_negative_eigenvalue() {
        let rho = CMatrix::from_real_diag(&[0.5 + 1e-10, 0.5, 0.0, -1e-10]);
        let s = TwoSiteState::new(rho, Source::Ed).unwrap();
        assert!(s.rho[(3, 3)].re >= 0.0 && (s.rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fermionic_image_is_involution() {
        let o = obs([0.1, -0.2, 0.15, -0.05, 0.02, 0.03, -0.04]);
        let s = assemble_rho(&o, Source::Tes).unwrap();
        let twice = fermionic_image(&fermionic_image(&s));
        assert!(twice.rho.max_abs_diff(&s.rho) < 1e-12);
        let mixed = assemble_rho(&ObservableSet::ZERO, Source::Ces).unwrap();
        assert!(fermionic_image(&mixed).rho.max_abs_diff(&mixed.rho) < 1e-15);
    }
}
