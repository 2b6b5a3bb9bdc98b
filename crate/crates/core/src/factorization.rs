//! Separable Néel-type product ansatz, the bond Hamiltonian and the
//! factorization line λ₁² = λ₂² + (1 − γ²).

use std::f64::consts::PI;

use crate::linalg::{cr, hermitian_eig, pauli, CMatrix};
use crate::measures::nelder_mead;
use crate::params::SystemParams;
use crate::two_site::{Source, TwoSiteState};
use crate::Error;

/// Tolerance for analytic membership of the factorization line.
pub const LOCUS_TOL: f64 = 1e-9;
/// Tolerance for classifying sweep grid points.
pub const GRID_LOCUS_TOL: f64 = 1e-6;
const SEPARABLE_GRID: usize = 256;
const PATH_DISAGREEMENT: f64 = 1e-6;

/// One bond of the chain with each site field shared between its two bonds:
/// J[(1+γ)/4 σˣσˣ + (1−γ)/4 σʸσʸ] + h₊/4 σᶻ⊗I + h₋/4 I⊗σᶻ, even site first.
/// Its expectation in a translation-invariant product state is the energy
/// per site, and the chain energy per site is bounded below by its ground
/// energy.
pub fn pair_hamiltonian(params: &SystemParams) -> CMatrix {
    let (j, g) = (params.j, params.gamma);
    let xx = pauli('x').kron(&pauli('x')).scale_real(j * (1.0 + g) / 4.0);
    let yy = pauli('y').kron(&pauli('y')).scale_real(j * (1.0 - g) / 4.0);
    let ze = pauli('z').kron(&pauli('i')).scale_real(params.h_plus() / 4.0);
    let zo = pauli('i').kron(&pauli('z')).scale_real(params.h_minus() / 4.0);
    &(&(&xx + &yy) + &ze) + &zo
}

/// Ground energy of the bond Hamiltonian in closed form:
/// −½·max(√(J² + h₂²), √(γ²J² + h₁²)).
pub fn pair_ground_energy(params: &SystemParams) -> f64 {
    let odd = (params.j.powi(2) + params.h2().powi(2)).sqrt();
    let even = ((params.gamma * params.j).powi(2) + params.h1().powi(2)).sqrt();
    -0.5 * odd.max(even)
}

/// Minimized product-state energy per site and its angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparableAnsatz {
    pub theta_e: f64,
    pub theta_o: f64,
    /// Minimum separable energy per site.
    pub epsilon: f64,
    /// Bond ground energy (lower bound for ε).
    pub epsilon0: f64,
    /// Minimum from the closed-form stationary angles.
    pub epsilon_closed_form: f64,
    /// Minimum from the grid plus simplex search.
    pub epsilon_numeric: f64,
}

/// Effective transverse coupling after optimizing the azimuthal angles:
/// J·max(|1+γ|, |1−γ|).
fn coupling(params: &SystemParams) -> f64 {
    params.j * (1.0 + params.gamma).abs().max((1.0 - params.gamma).abs())
}

/// Product-state energy per site for real polar angles in [−π, π] (negative
/// angles stand for azimuth π).
pub fn product_energy(params: &SystemParams, theta_e: f64, theta_o: f64) -> f64 {
    0.25 * (coupling(params) * theta_e.sin() * theta_o.sin()
        + params.h_plus() * theta_e.cos()
        + params.h_minus() * theta_o.cos())
}

fn closed_form_candidates(params: &SystemParams) -> Vec<(f64, f64)> {
    let k = coupling(params);
    let (hp, hm) = (params.h_plus(), params.h_minus());
    let mut out = vec![(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)];
    let num = k.powi(4) - hp * hp * hm * hm;
    if num > 0.0 && k > 0.0 {
        // stationarity: tan θ_e = K sin θ_o / h₊, tan θ_o = K sin θ_e / h₋
        let re = (num / (k * k + hm * hm)).sqrt();
        let ro = (num / (k * k + hp * hp)).sqrt();
        let a = re.atan2(hp);
        let b = ro.atan2(hm);
        for te in [a, -a, PI - a, a - PI] {
            for to in [b, -b, PI - b, b - PI] {
                out.push((te, to));
            }
        }
    }
    out
}

/// ε by both the closed-form stationary points and a 256² grid followed by
/// simplex refinement; errors if the two disagree by more than 1e-6.
pub fn separable_energy(params: &SystemParams) -> Result<SeparableAnsatz, Error> {
    params.validate()?;
    let f = |te: f64, to: f64| product_energy(params, te, to);
    let (ce, co, cv) = closed_form_candidates(params)
        .into_iter()
        .map(|(a, b)| (a, b, f(a, b)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .unwrap();
    let n = SEPARABLE_GRID;
    let at = |i: usize| -PI + 2.0 * PI * i as f64 / n as f64;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..n {
        for j in 0..n {
            let v = f(at(i), at(j));
            if v < best.2 {
                best = (at(i), at(j), v);
            }
        }
    }
    let (p, nv, _) = nelder_mead(|x| f(x[0], x[1]), [best.0, best.1], 2.0 * PI / n as f64, 1e-15, 4000);
    if (nv - cv).abs() > PATH_DISAGREEMENT {
        return Err(Error::Analysis(format!("separable minimum disagrees: closed form {cv}, numeric {nv}")));
    }
    let (theta_e, theta_o, epsilon) = if cv <= nv { (ce, co, cv) } else { (p[0], p[1], nv) };
    Ok(SeparableAnsatz {
        theta_e,
        theta_o,
        epsilon,
        epsilon0: pair_ground_energy(params),
        epsilon_closed_form: cv,
        epsilon_numeric: nv,
    })
}

/// λ₁² − λ₂² − (1 − γ²).
pub fn locus_residual(gamma: f64, lambda1: f64, lambda2: f64) -> f64 {
    lambda1 * lambda1 - lambda2 * lambda2 - (1.0 - gamma * gamma)
}

pub fn on_factorization_line(gamma: f64, lambda1: f64, lambda2: f64, tol: f64) -> bool {
    locus_residual(gamma, lambda1, lambda2).abs() < tol
}

/// Points (λ₁, λ₂) of the line at the given λ₂ values; both signs of λ₁ are
/// returned where the line is real.
pub fn factorization_locus(gamma: f64, lambda2: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &l2 in lambda2 {
        let sq = l2 * l2 + 1.0 - gamma * gamma;
        if sq > 0.0 {
            out.push((sq.sqrt(), l2));
            out.push((-sq.sqrt(), l2));
        } else if sq == 0.0 {
            out.push((0.0, l2));
        }
    }
    out
}

/// Single-qubit states of the Néel-type product ground state.
#[derive(Clone, Debug)]
pub struct NeelState {
    pub theta_e: f64,
    pub theta_o: f64,
    /// Energy per site of the product state.
    pub energy_per_site: f64,
}

impl NeelState {
    fn qubit(theta: f64) -> CMatrix {
        // negative θ encodes azimuth π
        let v = [cr((theta / 2.0).cos()), cr((theta / 2.0).sin())];
        CMatrix::from_fn(2, 2, |a, b| v[a] * v[b].conj())
    }

    pub fn two_site(&self) -> Result<TwoSiteState, Error> {
        TwoSiteState::new(Self::qubit(self.theta_e).kron(&Self::qubit(self.theta_o)), Source::Ces)
    }
}

/// The product ground state on the factorization line.
pub fn neel_product_state(params: &SystemParams) -> Result<NeelState, Error> {
    if !on_factorization_line(params.gamma, params.lambda1, params.lambda2, LOCUS_TOL) {
        return Err(Error::InvalidParams("parameters are off the factorization line".into()));
    }
    let s = separable_energy(params)?;
    Ok(NeelState { theta_e: s.theta_e, theta_o: s.theta_o, energy_per_site: s.epsilon })
}

/// Spectrum of the bond Hamiltonian, for degeneracy diagnostics.
pub fn pair_spectrum(params: &SystemParams) -> Result<Vec<f64>, Error> {
    Ok(hermitian_eig(&pair_hamiltonian(params))?.values)
}
