//! The 16-dimensional Hamiltonian of one momentum pair (p, −p), its
//! block structure, closed-form quasiparticle energies and ground energy.
//!
//! Modes of a pair are ordered `(a_p, a_−p, b_p, b_−p)`; `a` lives on odd
//! sites and `b` on even sites. The block basis is
//!
//! * block 1: `a†_p b†_p|0⟩`, `a†_−p b†_−p|0⟩`
//! * block 2: `a†_p`, `b†_p`, `a†_p a†_−p b†_p`, `a†_p b†_p b†_−p`
//! * block 3: block 2 with p ↔ −p
//! * block 4: `|0⟩`, `a†_p b†_−p`, `a†_−p b†_p`, `a†_p a†_−p`, `b†_p b†_−p`, full

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::fock::FockSpace;
use crate::linalg::{c, cr, hermitian_eig, CMatrix};
use crate::params::SystemParams;
use crate::quadrature::{golden_min, integrate, Doubling};
use crate::Error;

pub const BLOCK_DIMS: [usize; 4] = [2, 4, 4, 6];

/// One momentum pair, either a lattice index or a continuous angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumMode {
    pub p: Option<usize>,
    pub phi: f64,
}

impl MomentumMode {
    pub fn continuous(phi: f64) -> Self {
        Self { p: None, phi }
    }

    /// φ = 2πp/N.
    pub fn lattice(p: usize, n: usize) -> Self {
        Self { p: Some(p), phi: 2.0 * PI * p as f64 / n as f64 }
    }
}

/// Operator that is block diagonal in a momentum sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorOp {
    pub blocks: Vec<CMatrix>,
}

impl SectorOp {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(CMatrix::rows).sum()
    }

    pub fn full(&self) -> CMatrix {
        CMatrix::block_diag(&self.blocks)
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(CMatrix::trace).sum()
    }

    /// Tr(self · other), blockwise.
    pub fn trace_product(&self, other: &SectorOp) -> C64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.trace_product(b)).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, Error> {
        let mut all = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            all.extend(hermitian_eig(b)?.values);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }
}

/// The four blocks of one momentum-pair Hamiltonian.
#[derive(Clone, Debug)]
pub struct BlockHamiltonian {
    pub phi: f64,
    pub h1: f64,
    pub h2: f64,
    pub blocks: [CMatrix; 4],
}

impl BlockHamiltonian {
    pub fn full(&self) -> CMatrix {
        CMatrix::block_diag(&self.blocks)
    }

    pub fn sector(&self) -> SectorOp {
        SectorOp { blocks: self.blocks.to_vec() }
    }
}

/// Builds the blocks for a momentum angle with the fields carried by `params`.
pub fn build_blocks(params: &SystemParams, phi: f64) -> BlockHamiltonian {
    let (h1, h2) = (params.h1(), params.h2());
    let co = cr(params.j * phi.cos());
    let si = params.j * params.gamma * phi.sin();
    let is = c(0.0, si);
    let z = cr(0.0);
    let b2 = CMatrix::from_rows(&[
        vec![cr(-h1 - h2), co, -is, z],
        vec![co, cr(-h1 + h2), z, -is],
        vec![is, z, cr(h1 - h2), -co],
        vec![z, is, -co, cr(h1 + h2)],
    ]);
    let b4 = CMatrix::from_rows(&[
        vec![cr(-2.0 * h1), is, -is, z, z, z],
        vec![-is, z, z, co, co, -is],
        vec![is, z, z, -co, -co, is],
        vec![z, co, -co, cr(-2.0 * h2), z, z],
        vec![z, co, -co, z, cr(2.0 * h2), z],
        vec![z, is, -is, z, z, cr(2.0 * h1)],
    ]);
    BlockHamiltonian { phi, h1, h2, blocks: [CMatrix::zeros(2, 2), b2.clone(), b2, b4] }
}

/// Fock space of a momentum pair and the change of basis into block order.
pub struct PairBasis {
    pub fock: FockSpace,
    /// Columns are block-basis vectors in the occupation representation.
    pub vectors: CMatrix,
}

pub const A_P: usize = 0;
pub const A_M: usize = 1;
pub const B_P: usize = 2;
pub const B_M: usize = 3;

impl PairBasis {
    pub fn get() -> &'static PairBasis {
        static BASIS: OnceLock<PairBasis> = OnceLock::new();
        BASIS.get_or_init(|| {
            let fock = FockSpace::new(4);
            let states: [&[usize]; 16] = [
                &[A_P, B_P],
                &[A_M, B_M],
                &[A_P],
                &[B_P],
                &[A_P, A_M, B_P],
                &[A_P, B_P, B_M],
                &[A_M],
                &[B_M],
                &[A_P, A_M, B_M],
                &[A_M, B_P, B_M],
                &[],
                &[A_P, B_M],
                &[A_M, B_P],
                &[A_P, A_M],
                &[B_P, B_M],
                &[A_P, A_M, B_P, B_M],
            ];
            let cols: Vec<Vec<C64>> = states.iter().map(|s| fock.state(s)).collect();
            let vectors = CMatrix::from_fn(16, 16, |i, j| cols[j][i]);
            PairBasis { fock, vectors }
        })
    }

    /// Rewrites a Fock-space operator in block order and splits it into blocks.
    pub fn to_sector(&self, op: &CMatrix) -> SectorOp {
        let m = &(&self.vectors.adjoint() * op) * &self.vectors;
        split_blocks(&m, &BLOCK_DIMS)
    }

    /// Operator weight that leaks between blocks (zero for block-diagonal operators).
    pub fn leakage(&self, op: &CMatrix) -> f64 {
        let m = &(&self.vectors.adjoint() * op) * &self.vectors;
        let back = CMatrix::block_diag(&split_blocks(&m, &BLOCK_DIMS).blocks);
        (&m - &back).max_abs()
    }
}

pub fn split_blocks(m: &CMatrix, dims: &[usize]) -> SectorOp {
    let mut off = 0;
    let mut blocks = Vec::with_capacity(dims.len());
    for &d in dims {
        blocks.push(m.sub_block(off, d));
        off += d;
    }
    SectorOp { blocks }
}

/// The pair Hamiltonian assembled from second-quantized operators; used to
/// cross-check the printed blocks.
pub fn fock_hamiltonian(params: &SystemParams, phi: f64) -> CMatrix {
    let basis = PairBasis::get();
    let f = &basis.fock;
    let cd = |m| f.create(m);
    let a = |m| f.annihilate(m).clone();
    let hop = &(&(&(&cd(A_P) * &a(B_P)) + &(&cd(A_M) * &a(B_M))) + &(&cd(B_P) * &a(A_P))) + &(&cd(B_M) * &a(A_M));
    let pair = &(&cd(A_P) * &cd(B_M)) - &(&cd(A_M) * &cd(B_P));
    let pairing = &pair - &pair.adjoint();
    let nb = &f.number(B_P) + &f.number(B_M);
    let na = &f.number(A_P) + &f.number(A_M);
    let mut h = hop.scale_real(params.j * phi.cos());
    h = &h + &pairing.scale(c(0.0, -params.j * params.gamma * phi.sin()));
    h = &h + &nb.scale_real(params.h_plus());
    h = &h + &na.scale_real(params.h_minus());
    &h - &f.identity().scale_real(2.0 * params.h1())
}

/// Closed-form quasiparticle energies of a momentum pair (units of J).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormEnergies {
    pub x: f64,
    pub y: f64,
    pub omega2_plus: f64,
    pub omega2_minus: f64,
    pub omega4_plus: f64,
    pub omega4_minus: f64,
}

pub fn closed_form_energies(params: &SystemParams, phi: f64) -> ClosedFormEnergies {
    let (l1, l2, g) = (params.lambda1, params.lambda2, params.gamma);
    let (co2, si2) = (phi.cos().powi(2), phi.sin().powi(2));
    let x = l1 * l1 + l2 * l2 + co2 + g * g * si2;
    let y = l1 * l1 * (l2 * l2 + co2) + g * g * l2 * l2 * si2;
    let sy = y.max(0.0).sqrt();
    let disc = (x * x - 4.0 * y).max(0.0).sqrt();
    let j = params.j;
    ClosedFormEnergies {
        x,
        y,
        omega2_plus: j * (x + 2.0 * sy).max(0.0).sqrt(),
        omega2_minus: j * (x - 2.0 * sy).max(0.0).sqrt(),
        omega4_plus: j * (2.0 * (x + disc)).max(0.0).sqrt(),
        omega4_minus: j * (2.0 * (x - disc)).max(0.0).sqrt(),
    }
}

/// All 16 eigenvalues of the pair Hamiltonian, ascending.
pub fn spectrum(params: &SystemParams, phi: f64) -> Result<Vec<f64>, Error> {
    build_blocks(params, phi).sector().eigenvalues()
}

/// Lowest eigenvalue of the pair Hamiltonian (always from block 4).
pub fn lowest_eigenvalue(params: &SystemParams, phi: f64) -> Result<f64, Error> {
    Ok(hermitian_eig(&build_blocks(params, phi).blocks[3])?.values[0])
}

/// Gap between the two lowest pair levels, computed numerically.
pub fn pair_gap(params: &SystemParams, phi: f64) -> Result<f64, Error> {
    let s = spectrum(params, phi)?;
    Ok(s[1] - s[0])
}

/// Momentum angle in [0, π/2] where the closed-form gap ω₂⁻ is smallest,
/// together with that gap. Cheap; used to place quadrature breakpoints.
pub fn soft_mode(params: &SystemParams) -> (f64, f64) {
    let g = |phi: f64| closed_form_energies(params, phi).omega2_minus;
    let n = 512;
    let (mut best, mut bv) = (0.0, f64::INFINITY);
    for k in 0..=n {
        let phi = FRAC_PI_2 * k as f64 / n as f64;
        let v = g(phi);
        if v < bv {
            bv = v;
            best = phi;
        }
    }
    let h = FRAC_PI_2 / n as f64;
    let (phi, v) = golden_min(g, (best - h).max(0.0), (best + h).min(FRAC_PI_2), 1e-12);
    if v <= bv { (phi, v) } else { (best, bv) }
}

/// Breakpoints for φ-integrals: the soft mode when the gap nearly closes.
pub fn critical_breakpoints(params: &SystemParams) -> Vec<f64> {
    let (phi, gap) = soft_mode(params);
    if gap < 1e-6 * params.j && phi > 0.0 && phi < FRAC_PI_2 { vec![phi] } else { Vec::new() }
}

/// E₀ = −(1/2π)∫₀^{π/2} ω₄⁺ dφ, with ω₄⁺ from numeric diagonalization.
pub fn ground_energy_per_site(params: &SystemParams) -> Result<f64, Error> {
    let f = |phi: f64| Ok(vec![lowest_eigenvalue(params, phi)? / (2.0 * PI)]);
    let r = integrate(f, 1, 0.0, FRAC_PI_2, &critical_breakpoints(params), Doubling::default())?;
    Ok(r.value[0])
}

/// Momentum grid used for a finite chain of N sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grid {
    /// φ = 2πp/N, p = 1..N/4.
    Periodic,
    /// φ = 2π(p − ½)/N, p = 1..N/4: the even-parity sector of the periodic
    /// spin chain; converges spectrally to the integral.
    Antiperiodic,
    /// Parity-projected sum over both sectors; reproduces the periodic spin
    /// chain exactly.
    Exact,
}

/// Finite chain or thermodynamic limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Size {
    Thermodynamic,
    Finite { n: usize, grid: Grid },
}

impl Size {
    pub fn finite(n: usize, grid: Grid) -> Result<Self, Error> {
        if n < 4 || !n.is_multiple_of(4) {
            return Err(Error::InvalidParams(format!("N = {n} must be a positive multiple of 4")));
        }
        Ok(Size::Finite { n, grid })
    }
}

/// Angles of the paired momenta of an N-site chain (Periodic or Antiperiodic).
pub fn grid_angles(n: usize, grid: Grid) -> Vec<f64> {
    let off = match grid {
        Grid::Antiperiodic => 0.5,
        _ => 0.0,
    };
    (1..=n / 4).map(|p| 2.0 * PI * (p as f64 - off) / n as f64).collect()
}

/// E₀ per site from the lattice sum (1/N)Σ_p (−ω₄⁺) over a paired grid.
pub fn ground_energy_lattice_sum(params: &SystemParams, n: usize, grid: Grid) -> Result<f64, Error> {
    Size::finite(n, grid)?;
    if grid == Grid::Exact {
        return Err(Error::Unsupported("use the finite-chain module for the exact ground energy".into()));
    }
    let mut terms = Vec::with_capacity(n / 4);
    for phi in grid_angles(n, grid) {
        terms.push(lowest_eigenvalue(params, phi)? / n as f64);
    }
    Ok(crate::quadrature::pairwise_sum(&terms))
}

/// Smallest gap between the two lowest pair levels and where it occurs.
#[derive(Clone, Copy, Debug)]
pub struct GapProfile {
    pub min_gap: f64,
    pub argmin_phi: f64,
}

/// Minimizes the numeric pair gap over a 2048-point grid, then refines by
/// golden section to 1e-6 in φ.
pub fn gap_profile(params: &SystemParams) -> Result<GapProfile, Error> {
    let n = 2048;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..=n {
        let phi = FRAC_PI_2 * k as f64 / n as f64;
        let g = pair_gap(params, phi)?;
        if g < best.1 {
            best = (phi, g);
        }
    }
    let h = FRAC_PI_2 / n as f64;
    let f = |phi: f64| pair_gap(params, phi).unwrap_or(f64::INFINITY);
    let (phi, g) = golden_min(f, (best.0 - h).max(0.0), (best.0 + h).min(FRAC_PI_2), 1e-6);
    let (argmin_phi, min_gap) = if g < best.1 { (phi, g) } else { best };
    Ok(GapProfile { min_gap, argmin_phi })
}

/// Exploration hook for the stated duality (h₁ ↔ h₂ with J ↔ −γ): returns
/// both sorted spectra at the same angle. Nothing is asserted about them.
pub fn duality_spectra(params: &SystemParams, phi: f64) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let dual = SystemParams {
        j: params.j * params.gamma.abs(),
        gamma: 1.0 / params.gamma,
        lambda1: params.lambda2 / params.gamma.abs(),
        lambda2: params.lambda1 / params.gamma.abs(),
    };
    Ok((spectrum(params, phi)?, spectrum(&dual, phi)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, l1: f64, l2: f64) -> SystemParams {
        SystemParams::unit(g, l1, l2).unwrap()
    }

    #[test]
    fn printed_blocks_match_second_quantized_form() {
        let params = SystemParams::new(1.3, 0.7, 0.37, -0.61).unwrap();
        for &phi in &[0.0, 0.4, 1.1, FRAC_PI_2] {
            let fock = fock_hamiltonian(&params, phi);
            assert!(PairBasis::get().leakage(&fock) < 1e-14);
            let derived = PairBasis::get().to_sector(&fock);
            let printed = build_blocks(&params, phi).sector();
            for (d, q) in derived.blocks.iter().zip(&printed.blocks) {
                assert!(d.max_abs_diff(q) < 1e-14);
            }
        }
    }

    #[test]
    fn block_invariants() {
        let b = build_blocks(&p(0.8, 0.3, 0.9), 0.7);
        assert_eq!(b.blocks[0].max_abs(), 0.0);
        assert_eq!(b.blocks[1], b.blocks[2]);
        assert!(b.blocks.iter().all(|m| m.is_hermitian(1e-12)));
        assert!(b.full().trace().norm() < 1e-12);
    }

    #[test]
    fn zero_field_isotropic_block2() {
        let b = build_blocks(&p(1.0, 0.0, 0.0), 0.0);
        let m = &b.blocks[1];
        assert_eq!(m[(0, 1)], cr(1.0));
        assert_eq!(m[(2, 3)], cr(-1.0));
        assert!((0..4).all(|i| m[(i, i)] == cr(0.0)));
        let b4 = &build_blocks(&p(0.8, 0.4, 0.2), 0.0).blocks[3];
        assert!(b4[(0, 1)].norm() == 0.0 && b4[(5, 1)].norm() == 0.0);
    }

    #[test]
    fn block2_matches_closed_form() {
        let params = p(0.8, 1.0, 0.0);
        for &phi in &[0.3, std::f64::consts::FRAC_PI_4] {
            let e = hermitian_eig(&build_blocks(&params, phi).blocks[1]).unwrap().values;
            let cf = closed_form_energies(&params, phi);
            let want = [-cf.omega2_plus, -cf.omega2_minus, cf.omega2_minus, cf.omega2_plus];
            for (a, b) in e.iter().zip(want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let cf = closed_form_energies(&p(1.0, 0.0, 0.0), 0.9);
        assert!((cf.x - 1.0).abs() < 1e-15 && cf.y.abs() < 1e-15);
        assert!((cf.omega4_plus - 2.0).abs() < 1e-14);
        for k in 0..50 {
            let cf = closed_form_energies(&p(0.8, 0.6, 0.0), k as f64 * 0.03);
            assert!((cf.omega4_plus - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_contains_null_block() {
        let s = spectrum(&p(0.5, 1.2, -0.3), 0.2).unwrap();
        assert!(s.iter().filter(|x| x.abs() < 1e-12).count() >= 2);
    }

    #[test]
    fn ground_energies() {
        assert!((ground_energy_per_site(&p(1.0, 0.0, 0.0)).unwrap() + 0.5).abs() < 1e-9);
        assert!((ground_energy_per_site(&p(0.8, 0.6, 0.0)).unwrap() + 0.5).abs() < 1e-9);
        let e = ground_energy_per_site(&p(0.8, 0.3, 0.4)).unwrap();
        let s = ground_energy_lattice_sum(&p(0.8, 0.3, 0.4), 4096, Grid::Antiperiodic).unwrap();
        assert!((e - s).abs() < 1e-9);
        // The one-sided grid carries an O(1/N) endpoint error.
        let s = ground_energy_lattice_sum(&p(0.8, 0.3, 0.4), 4096, Grid::Periodic).unwrap();
        assert!((e - s).abs() < 1e-4);
    }

    #[test]
    fn gap_closure_loci() {
        let g = gap_profile(&p(0.8, 1.0, 0.0)).unwrap();
        assert!(g.argmin_phi.abs() < 1e-3 && g.min_gap < 1e-8);
        let g = gap_profile(&p(0.8, 0.0, 0.8)).unwrap();
        assert!((g.argmin_phi - FRAC_PI_2).abs() < 1e-3 && g.min_gap < 1e-8);
        assert!(gap_profile(&p(0.8, 5.0, 0.0)).unwrap().min_gap > 0.1);
    }
}
