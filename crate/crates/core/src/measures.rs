//! Two-qubit correlation measures: negativity, logarithmic negativity, mutual
//! information, classical correlation and quantum discord.

use std::f64::consts::PI;

use crate::linalg::{hermitian_eig, partial_transpose, qubit_entropy, von_neumann_entropy, CMatrix, Party};
use crate::two_site::TwoSiteState;
use crate::Error;

/// Coarse grid size per angle for the discord search.
pub const DISCORD_GRID: usize = 48;
/// Seeds within this much of the best grid value are all refined.
pub const MULTISTART_WINDOW: f64 = 1e-3;
const MAX_SEEDS: usize = 16;
const SIMPLEX_TOL: f64 = 1e-10;
const SIMPLEX_MAX_ITER: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Ln,
    Qd,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::Ln => "ln",
            Measure::Qd => "qd",
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ln" => Some(Measure::Ln),
            "qd" => Some(Measure::Qd),
            _ => None,
        }
    }
}

/// Outcome of the measurement-axis optimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerReport {
    pub theta: f64,
    pub phi: f64,
    /// Minimized post-measurement conditional entropy (bits).
    pub objective: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureResult {
    pub ln: f64,
    pub negativity: f64,
    pub discord: f64,
    pub mutual_info: f64,
    pub classical_corr: f64,
    pub optimizer: OptimizerReport,
}

/// Rank-one projective measurement along the Bloch axis (θ, φ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    pub theta: f64,
    pub phi: f64,
}

impl ProjectiveMeasurement {
    pub fn axis(&self) -> [f64; 3] {
        [self.theta.sin() * self.phi.cos(), self.theta.sin() * self.phi.sin(), self.theta.cos()]
    }

    /// P₊ and P₋ = ½(I ± n̂·σ).
    pub fn projectors(&self) -> [CMatrix; 2] {
        let [x, y, z] = self.axis();
        let ns = &(&crate::linalg::pauli('x').scale_real(x) + &crate::linalg::pauli('y').scale_real(y))
            + &crate::linalg::pauli('z').scale_real(z);
        let id = CMatrix::identity(2);
        [(&id + &ns).scale_real(0.5), (&id - &ns).scale_real(0.5)]
    }
}

/// Sum of the moduli of the negative eigenvalues of the partial transpose on
/// the even qubit; values below 1e-14 are reported as 0.
pub fn negativity(state: &TwoSiteState) -> Result<f64, Error> {
    let pt = partial_transpose(&state.rho, Party::Even)?;
    let neg: f64 = hermitian_eig(&pt)?.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    Ok(if neg < 1e-14 { 0.0 } else { neg })
}

/// log₂(2N + 1) in ebits.
pub fn log_negativity(state: &TwoSiteState) -> Result<f64, Error> {
    Ok((2.0 * negativity(state)? + 1.0).log2())
}

/// Single-qubit marginal as (ρ₀₀, ρ₁₁, ρ₀₁).
fn marginal(rho: &CMatrix, party: Party) -> (f64, f64, num_complex::Complex64) {
    match party {
        Party::Even => (
            (rho[(0, 0)] + rho[(1, 1)]).re,
            (rho[(2, 2)] + rho[(3, 3)]).re,
            rho[(0, 2)] + rho[(1, 3)],
        ),
        Party::Odd => (
            (rho[(0, 0)] + rho[(2, 2)]).re,
            (rho[(1, 1)] + rho[(3, 3)]).re,
            rho[(0, 1)] + rho[(2, 3)],
        ),
    }
}

fn marginal_entropy(rho: &CMatrix, party: Party) -> f64 {
    let (a, d, b) = marginal(rho, party);
    qubit_entropy(a, d, b)
}

/// S(ρ_e) + S(ρ_o) − S(ρ) in bits.
pub fn mutual_information(state: &TwoSiteState) -> Result<f64, Error> {
    let s_ab = von_neumann_entropy(&state.rho)?;
    Ok(marginal_entropy(&state.rho, Party::Even) + marginal_entropy(&state.rho, Party::Odd) - s_ab)
}

/// Partial traces over the measured qubit of (σᵃ ⊗ I)ρ for a ∈ {I, x, y, z},
/// with the measured qubit moved to the first factor.
struct ConditionalKernel {
    blocks: [[num_complex::Complex64; 4]; 4],
}

impl ConditionalKernel {
    fn new(state: &TwoSiteState, measured: Party) -> Self {
        let rho = match measured {
            Party::Even => state.rho.clone(),
            Party::Odd => state.swapped().rho,
        };
        // ρ as 2×2 blocks R_{ab} acting on the unmeasured qubit
        let blk = |a: usize, b: usize| -> [num_complex::Complex64; 4] {
            [rho[(2 * a, 2 * b)], rho[(2 * a, 2 * b + 1)], rho[(2 * a + 1, 2 * b)], rho[(2 * a + 1, 2 * b + 1)]]
        };
        let (r00, r01, r10, r11) = (blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1));
        let i = num_complex::Complex64::i();
        let mut blocks = [[num_complex::Complex64::new(0.0, 0.0); 4]; 4];
        for k in 0..4 {
            blocks[0][k] = r00[k] + r11[k];
            blocks[1][k] = r01[k] + r10[k];
            // Tr_A[(σʸ⊗I)ρ] = i R_{01} − i R_{10}
            blocks[2][k] = i * r01[k] - i * r10[k];
            blocks[3][k] = r00[k] - r11[k];
        }
        ConditionalKernel { blocks }
    }

    /// Σ_± p_± S(ρ_B|±) for the axis (θ, φ).
    fn conditional_entropy(&self, theta: f64, phi: f64) -> f64 {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let mut m = [num_complex::Complex64::new(0.0, 0.0); 4];
            for (k, mk) in m.iter_mut().enumerate() {
                *mk = 0.5 * (self.blocks[0][k] + sign * (n[0] * self.blocks[1][k] + n[1] * self.blocks[2][k] + n[2] * self.blocks[3][k]));
            }
            let p = (m[0] + m[3]).re;
            if p > 1e-14 {
                total += p * qubit_entropy(m[0].re, m[3].re, m[1]);
            }
        }
        total
    }
}

/// Post-measurement conditional entropy for a measurement on `measured`.
pub fn conditional_entropy(state: &TwoSiteState, measured: Party, m: ProjectiveMeasurement) -> f64 {
    ConditionalKernel::new(state, measured).conditional_entropy(m.theta, m.phi)
}

/// Two-dimensional Nelder–Mead; returns (point, value, converged).
pub fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64, tol: f64, max_iter: usize) -> ([f64; 2], f64, bool) {
    let mut pts = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = pts.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.map(|k| pts[k]);
        vals = order.map(|k| vals[k]);
        let size = (0..2).map(|d| (pts[1][d] - pts[0][d]).abs().max((pts[2][d] - pts[0][d]).abs())).fold(0.0, f64::max);
        if vals[2] - vals[0] < tol && size < 1e-7 {
            return (pts[0], vals[0], true);
        }
        let centroid = lerp(pts[0], pts[1], 0.5);
        let refl = lerp(pts[2], centroid, 2.0);
        let fr = f(refl);
        if fr < vals[0] {
            let exp = lerp(pts[2], centroid, 3.0);
            let fe = f(exp);
            if fe < fr {
                (pts[2], vals[2]) = (exp, fe);
            } else {
                (pts[2], vals[2]) = (refl, fr);
            }
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (refl, fr);
        } else {
            let (cp, cf) = if fr < vals[2] {
                let p = lerp(centroid, refl, 0.5);
                (p, f(p))
            } else {
                let p = lerp(centroid, pts[2], 0.5);
                (p, f(p))
            };
            if cf < vals[2].min(fr) {
                (pts[2], vals[2]) = (cp, cf);
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best], vals[best], false)
}

/// Minimizes the conditional entropy over measurement axes: coarse grid,
/// then simplex refinement from every grid local minimum near the best.
pub fn optimize_measurement(state: &TwoSiteState, measured: Party) -> OptimizerReport {
    let kernel = ConditionalKernel::new(state, measured);
    let g = DISCORD_GRID;
    let theta_at = |i: usize| PI * i as f64 / (g - 1) as f64;
    let phi_at = |j: usize| PI * j as f64 / g as f64;
    let mut grid = vec![0.0; g * g];
    for i in 0..g {
        for j in 0..g {
            grid[i * g + j] = kernel.conditional_entropy(theta_at(i), phi_at(j));
        }
    }
    let best_grid = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut seeds: Vec<(usize, usize)> = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let v = grid[i * g + j];
            if v > best_grid + MULTISTART_WINDOW {
                continue;
            }
            // φ is periodic with period π up to the axis flip θ → π − θ
            let is_min = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().all(|&(di, dj)| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || ni >= g as i64 {
                    return true;
                }
                let (ni, nj) = if nj < 0 {
                    (g as i64 - 1 - ni, g as i64 - 1)
                } else if nj >= g as i64 {
                    (g as i64 - 1 - ni, 0)
                } else {
                    (ni, nj)
                };
                v <= grid[ni as usize * g + nj as usize]
            });
            if is_min {
                seeds.push((i, j));
            }
        }
    }
    seeds.sort_by(|a, b| grid[a.0 * g + a.1].total_cmp(&grid[b.0 * g + b.1]).then(a.cmp(b)));
    seeds.dedup();
    if seeds.is_empty() {
        let k = (0..g * g).min_by(|&a, &b| grid[a].total_cmp(&grid[b]).then(a.cmp(&b))).unwrap();
        seeds.push((k / g, k % g));
    }
    seeds.truncate(MAX_SEEDS);
    let step = PI / g as f64;
    let mut best = OptimizerReport { theta: f64::NAN, phi: f64::NAN, objective: f64::INFINITY, converged: false };
    for (i, j) in seeds {
        let (p, v, ok) = nelder_mead(
            |x| kernel.conditional_entropy(x[0], x[1]),
            [theta_at(i), phi_at(j)],
            step,
            SIMPLEX_TOL,
            SIMPLEX_MAX_ITER,
        );
        if v < best.objective {
            best = OptimizerReport { theta: p[0], phi: p[1], objective: v, converged: ok };
        }
    }
    // fold the optimum back into θ ∈ [0, π], φ ∈ [0, π)
    let axis = ProjectiveMeasurement { theta: best.theta, phi: best.phi }.axis();
    let mut theta = axis[2].clamp(-1.0, 1.0).acos();
    let mut phi = axis[1].atan2(axis[0]);
    if phi < 0.0 {
        phi += PI;
        theta = PI - theta;
    }
    if phi >= PI {
        phi -= PI;
        theta = PI - theta;
    }
    best.theta = theta;
    best.phi = phi;
    best
}

/// All measures, with discord measured on `measured`.
pub fn quantum_discord(state: &TwoSiteState, measured: Party) -> Result<MeasureResult, Error> {
    let negativity = negativity(state)?;
    let mutual_info = mutual_information(state)?.max(0.0);
    let optimizer = optimize_measurement(state, measured);
    let unmeasured = match measured {
        Party::Even => Party::Odd,
        Party::Odd => Party::Even,
    };
    let classical_corr = (marginal_entropy(&state.rho, unmeasured) - optimizer.objective).max(0.0);
    let mut discord = mutual_info - classical_corr;
    if discord < 0.0 {
        if discord < -1e-8 {
            return Err(Error::Analysis(format!("discord {discord:.3e} below tolerance")));
        }
        discord = 0.0;
    }
    Ok(MeasureResult {
        ln: (2.0 * negativity + 1.0).log2(),
        negativity,
        discord,
        mutual_info,
        classical_corr,
        optimizer,
    })
}

/// Discord in bits with the even qubit measured.
pub fn discord(state: &TwoSiteState) -> Result<f64, Error> {
    Ok(quantum_discord(state, Party::Even)?.discord)
}

/// LN or QD of a state (QD measured on the even qubit).
pub fn evaluate(measure: Measure, state: &TwoSiteState) -> Result<f64, Error> {
    match measure {
        Measure::Ln => log_negativity(state),
        Measure::Qd => discord(state),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cr;
    use crate::two_site::{fermionic_image, Source};

    fn bell() -> TwoSiteState {
        let mut r = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            r[(i, j)] = cr(0.5);
        }
        TwoSiteState::new(r, Source::Ed).unwrap()
    }

    fn werner(p: f64) -> TwoSiteState {
        let mixed = CMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        TwoSiteState::new(&bell().rho.scale_real(p) + &mixed, Source::Ed).unwrap()
    }

    fn product() -> TwoSiteState {
        let a = CMatrix::from_real_diag(&[0.7, 0.3]);
        let b = CMatrix::from_rows(&[vec![cr(0.6), crate::linalg::c(0.1, 0.2)], vec![crate::linalg::c(0.1, -0.2), cr(0.4)]]);
        TwoSiteState::new(a.kron(&b), Source::Ed).unwrap()
    }

    #[test]
    fn bell_values() {
        let r = quantum_discord(&bell(), Party::Even).unwrap();
        assert!((r.negativity - 0.5).abs() < 1e-12);
        assert!((r.ln - 1.0).abs() < 1e-12);
        assert!((r.mutual_info - 2.0).abs() < 1e-10);
        assert!((r.discord - 1.0).abs() < 1e-8);
    }

    #[test]
    fn product_values() {
        let r = quantum_discord(&product(), Party::Even).unwrap();
        assert_eq!(r.ln, 0.0);
        assert!(r.mutual_info.abs() < 1e-10 && r.discord.abs() < 1e-8);
    }

    #[test]
    fn werner_two_thirds() {
        let w = werner(2.0 / 3.0);
        assert!((negativity(&w).unwrap() - 0.25).abs() < 1e-12);
        assert!((log_negativity(&w).unwrap() - 1.5f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_has_nothing() {
        let s = TwoSiteState::new(CMatrix::identity(4).scale_real(0.25), Source::Ed).unwrap();
        let r = quantum_discord(&s, Party::Odd).unwrap();
        assert!(r.mutual_info.abs() < 1e-12 && r.discord.abs() < 1e-12 && r.ln == 0.0);
    }

    #[test]
    fn result_identities() {
        let r = quantum_discord(&werner(0.4), Party::Even).unwrap();
        assert!((r.ln - (2.0 * r.negativity + 1.0).log2()).abs() < 1e-12);
        assert!((r.discord - (r.mutual_info - r.classical_corr)).abs() < 1e-10);
        assert!(r.optimizer.converged);
    }

    #[test]
    fn projectors_resolve_identity() {
        let [p, m] = ProjectiveMeasurement { theta: 0.7, phi: 2.1 }.projectors();
        assert!((&p + &m).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        assert!((&p * &p).max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn kernel_matches_explicit_projection() {
        let s = werner(0.5);
        let s = TwoSiteState::new(&s.rho.scale_real(0.5) + &product().rho.scale_real(0.5), Source::Ed).unwrap();
        let m = ProjectiveMeasurement { theta: 1.1, phi: 0.4 };
        let mut want = 0.0;
        for proj in m.projectors() {
            let full = proj.kron(&CMatrix::identity(2));
            let post = &(&full * &s.rho) * &full;
            let p = post.trace().re;
            let reduced = crate::linalg::partial_trace(&post.scale_real(1.0 / p), 2, &[1]).unwrap();
            want += p * von_neumann_entropy(&reduced).unwrap();
        }
        assert!((conditional_entropy(&s, Party::Even, m) - want).abs() < 1e-12);
    }

    #[test]
    fn fermionic_image_preserves_measures() {
        let s = TwoSiteState::new(&werner(0.6).rho.scale_real(0.7) + &product().rho.scale_real(0.3), Source::Ed).unwrap();
        let a = quantum_discord(&s, Party::Even).unwrap();
        let b = quantum_discord(&fermionic_image(&s), Party::Even).unwrap();
        assert!((a.ln - b.ln).abs() < 1e-9 && (a.discord - b.discord).abs() < 1e-9);
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let (p, v, ok) = nelder_mead(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2), [0.0, 0.0], 0.1, 1e-14, 5000);
        assert!(ok && (p[0] - 1.0).abs() < 1e-6 && (p[1] + 0.5).abs() < 1e-6 && v < 1e-12);
    }
}
