//! Full-Hilbert-space reference for the spin chain: matrix-free Hamiltonian,
//! Lanczos ground states, thermal reduced states and dense time evolution.
//!
//! Site i is tensor factor i (site 0 most significant), bit value 0 is the
//! σᶻ = +1 state.

use num_complex::Complex64 as C64;

use crate::linalg::{cr, hermitian_eig, real_symmetric_eig, CMatrix, HermitianEigen};
use crate::params::SystemParams;
use crate::two_site::{Source, TwoSiteState};
use crate::Error;

pub const MAX_SITES: usize = 22;
/// Largest chain for which full density matrices are formed.
pub const MAX_DENSE_SITES: usize = 10;
/// Largest chain for thermal reduced states by sector diagonalization.
pub const MAX_THERMAL_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

/// Matrix-free spin Hamiltonian on N sites.
#[derive(Clone, Debug)]
pub struct SpinChain {
    pub n: usize,
    pub boundary: Boundary,
    pub params: SystemParams,
    bonds: Vec<(usize, usize)>,
    field: Vec<f64>,
}

pub fn build_spin_hamiltonian(params: &SystemParams, n: usize, boundary: Boundary) -> Result<SpinChain, Error> {
    if n < 2 || !n.is_multiple_of(2) || n > MAX_SITES {
        return Err(Error::InvalidParams(format!("N = {n} must be even and in 2..={MAX_SITES}")));
    }
    params.validate()?;
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && n > 2 {
        bonds.push((n - 1, 0));
    } else if boundary == Boundary::Periodic {
        // two sites on a ring share the bond twice
        bonds.push((1, 0));
    }
    let field = (0..n).map(|i| if i % 2 == 0 { params.h_plus() } else { params.h_minus() }).collect();
    Ok(SpinChain { n, boundary, params: *params, bonds, field })
}

impl SpinChain {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn bit(&self, site: usize) -> usize {
        self.n - 1 - site
    }

    pub fn diagonal(&self, s: usize) -> f64 {
        (0..self.n)
            .map(|i| {
                let up = (s >> self.bit(i)) & 1 == 0;
                0.5 * self.field[i] * if up { 1.0 } else { -1.0 }
            })
            .sum()
    }

    /// Off-diagonal moves of basis state `s`: (target, amplitude).
    pub fn moves(&self, s: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let j = self.params.j;
        for &(a, b) in &self.bonds {
            let (ba, bb) = (self.bit(a), self.bit(b));
            let same = ((s >> ba) & 1) == ((s >> bb) & 1);
            let amp = if same { 0.5 * j * self.params.gamma } else { 0.5 * j };
            if amp != 0.0 {
                out.push((s ^ (1 << ba) ^ (1 << bb), amp));
            }
        }
    }

    /// y = H x on real vectors.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut mv = Vec::with_capacity(self.bonds.len());
        for s in 0..self.dim() {
            let mut acc = self.diagonal(s) * x[s];
            self.moves(s, &mut mv);
            for &(t, a) in &mv {
                acc += a * x[t];
            }
            y[s] = acc;
        }
    }

    /// y = H x on complex vectors.
    pub fn apply_complex(&self, x: &[C64], y: &mut [C64]) {
        let mut mv = Vec::with_capacity(self.bonds.len());
        for s in 0..self.dim() {
            let mut acc = x[s] * self.diagonal(s);
            self.moves(s, &mut mv);
            for &(t, a) in &mv {
                acc += x[t] * a;
            }
            y[s] = acc;
        }
    }

    pub fn parity(s: usize) -> f64 {
        if s.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 }
    }

    /// Dense matrix (N ≤ MAX_DENSE_SITES).
    pub fn dense(&self) -> Result<CMatrix, Error> {
        if self.n > MAX_DENSE_SITES {
            return Err(Error::InvalidParams(format!("dense matrices need N <= {MAX_DENSE_SITES}")));
        }
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut mv = Vec::new();
        for s in 0..d {
            m[(s, s)] += cr(self.diagonal(s));
            self.moves(s, &mut mv);
            for &(t, a) in &mv {
                m[(t, s)] += cr(a);
            }
        }
        Ok(m)
    }

    /// Symmetry sectors: parity, and for periodic chains translation by two sites.
    fn sectors(&self) -> Vec<SymmetrySector> {
        let d = self.dim();
        let translate = self.boundary == Boundary::Periodic && self.n >= 4;
        let l = if translate { self.n / 2 } else { 1 };
        let rot = |s: usize| -> usize {
            if !translate {
                return s;
            }
            // site i -> site i+2: bits move two places towards less significance
            let mask = d - 1;
            ((s >> 2) | (s << (self.n - 2))) & mask
        };
        let mut rep = vec![usize::MAX; d];
        let mut shift = vec![0usize; d];
        let mut period = vec![0usize; d];
        for s in 0..d {
            if rep[s] != usize::MAX {
                continue;
            }
            let mut orbit = vec![s];
            let mut t = rot(s);
            while t != s {
                orbit.push(t);
                t = rot(t);
            }
            let (ri, &r) = orbit.iter().enumerate().min_by_key(|(_, &v)| v).unwrap();
            let per = orbit.len();
            for (k, &t) in orbit.iter().enumerate() {
                rep[t] = r;
                // t = T^{(k - ri) mod per} r
                shift[t] = (k + per - ri) % per;
                period[t] = per;
            }
        }
        let mut out = Vec::new();
        for par in [1.0, -1.0] {
            for m in 0..l {
                let reps: Vec<usize> = (0..d)
                    .filter(|&s| rep[s] == s && Self::parity(s) == par && (m * period[s]).is_multiple_of(l))
                    .collect();
                if reps.is_empty() {
                    continue;
                }
                out.push(SymmetrySector { m, l, reps, rep: rep.clone(), shift: shift.clone(), period: period.clone() });
            }
        }
        out
    }

    /// Hamiltonian restricted to a symmetry sector.
    fn sector_matrix(&self, sec: &SymmetrySector) -> CMatrix {
        let idx: std::collections::HashMap<usize, usize> = sec.reps.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let k = 2.0 * std::f64::consts::PI * sec.m as f64 / sec.l as f64;
        let n = sec.reps.len();
        let mut m = CMatrix::zeros(n, n);
        let mut mv = Vec::new();
        for (col, &s) in sec.reps.iter().enumerate() {
            m[(col, col)] += cr(self.diagonal(s));
            self.moves(s, &mut mv);
            for &(t, a) in &mv {
                let u = sec.rep[t];
                if let Some(&row) = idx.get(&u) {
                    let ratio = (sec.period[s] as f64 / sec.period[u] as f64).sqrt();
                    m[(row, col)] += C64::from_polar(a * ratio, k * sec.shift[t] as f64);
                }
            }
        }
        m.hermitian_part()
    }

    /// Full-space vector of a sector eigenvector.
    fn expand(&self, sec: &SymmetrySector, coeffs: &[C64]) -> Vec<C64> {
        let mut v = vec![cr(0.0); self.dim()];
        let k = 2.0 * std::f64::consts::PI * sec.m as f64 / sec.l as f64;
        for (s, &state_rep) in sec.rep.iter().enumerate() {
            if let Ok(i) = sec.reps.binary_search(&state_rep) {
                let norm = (sec.period[state_rep] as f64).sqrt();
                v[s] = coeffs[i] * C64::from_polar(1.0 / norm, -k * sec.shift[s] as f64);
            }
        }
        v
    }

    /// All eigenpairs, sector by sector (N ≤ MAX_THERMAL_SITES).
    pub fn eigensystem(&self) -> Result<Vec<(f64, Vec<C64>)>, Error> {
        if self.n > MAX_THERMAL_SITES {
            return Err(Error::InvalidParams(format!("full spectra need N <= {MAX_THERMAL_SITES}")));
        }
        let mut out = Vec::with_capacity(self.dim());
        for sec in self.sectors() {
            let m = self.sector_matrix(&sec);
            let eig: HermitianEigen = hermitian_eig(&m)?;
            for (j, &e) in eig.values.iter().enumerate() {
                out.push((e, self.expand(&sec, &eig.vectors.column(j))));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out)
    }
}

struct SymmetrySector {
    m: usize,
    l: usize,
    reps: Vec<usize>,
    rep: Vec<usize>,
    shift: Vec<usize>,
    period: Vec<usize>,
}

/// Lanczos result.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub degenerate: bool,
    pub gap_to_next: f64,
}

const KRYLOV: usize = 60;
const MAX_ITER: usize = 2000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Restarted Lanczos with full reorthogonalization, orthogonal to `deflate`.
fn lanczos_lowest(h: &SpinChain, deflate: &[Vec<f64>], seed: u64) -> Result<(f64, Vec<f64>), Error> {
    let d = h.dim();
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut start: Vec<f64> = (0..d)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    project_out(&mut start, deflate);
    normalize(&mut start);
    let scale = h.field.iter().map(|x| x.abs()).sum::<f64>() + h.params.j * h.bonds.len() as f64;
    let tol = 1e-10 * scale.max(1.0);
    let mut w = vec![0.0; d];
    let mut iterations = 0;
    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for step in 0..KRYLOV.min(d - deflate.len()) {
            h.apply(&basis[step], &mut w);
            iterations += 1;
            let a = dot(&w, &basis[step]);
            alpha.push(a);
            project_out(&mut w, &basis);
            project_out(&mut w, &basis);
            project_out(&mut w, deflate);
            let b = normalize(&mut w);
            if b < 1e-12 * scale.max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
        let m = alpha.len();
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            t[i * m + i] = alpha[i];
            if i + 1 < m {
                t[i * m + i + 1] = beta[i];
                t[(i + 1) * m + i] = beta[i];
            }
        }
        let (vals, vecs) = real_symmetric_eig(m, &t)?;
        let y = &vecs[0..m];
        let mut psi = vec![0.0; d];
        for (k, b) in basis.iter().take(m).enumerate() {
            psi.iter_mut().zip(b).for_each(|(p, x)| *p += y[k] * x);
        }
        project_out(&mut psi, deflate);
        normalize(&mut psi);
        h.apply(&psi, &mut w);
        let e = dot(&psi, &w);
        let res: f64 = w.iter().zip(&psi).map(|(hx, x)| (hx - e * x).powi(2)).sum::<f64>().sqrt();
        let _ = vals;
        if res < tol || m < KRYLOV.min(d - deflate.len()) {
            return Ok((e, psi));
        }
        if iterations >= MAX_ITER {
            return Err(Error::Lanczos(iterations));
        }
        start = psi;
    }
}

/// Ground state by Lanczos; a second run deflated against the first probes
/// degeneracy (gap below 1e-8 flags it).
pub fn lanczos_ground_state(h: &SpinChain) -> Result<GroundState, Error> {
    let (e0, v0) = lanczos_lowest(h, &[], 1)?;
    if h.dim() == 1 {
        return Ok(GroundState { energy: e0, vector: v0, degenerate: false, gap_to_next: f64::INFINITY });
    }
    let (e1, _) = lanczos_lowest(h, std::slice::from_ref(&v0), 2)?;
    let gap = e1 - e0;
    Ok(GroundState { energy: e0, vector: v0, degenerate: gap < 1e-8, gap_to_next: gap })
}

/// Accumulates |ψ⟩⟨ψ| reduced to sites (i, j) into `acc` with weight `w`.
fn accumulate_pair(n: usize, psi: &[C64], i: usize, j: usize, w: f64, acc: &mut CMatrix) {
    let (bi, bj) = (n - 1 - i, n - 1 - j);
    let mask = (1usize << bi) | (1usize << bj);
    let idx = |s: usize| (((s >> bi) & 1) << 1) | ((s >> bj) & 1);
    for s in 0..psi.len() {
        if s & mask != 0 {
            continue;
        }
        let amps = [psi[s], psi[s | (1 << bj)], psi[s | (1 << bi)], psi[s | mask]];
        let _ = idx;
        for a in 0..4 {
            if amps[a] == cr(0.0) {
                continue;
            }
            for b in 0..4 {
                acc[(a, b)] += amps[a] * amps[b].conj() * w;
            }
        }
    }
}

/// Two-site reduced state of a pure state on sites (i, j), i first.
pub fn reduce_two_site(n: usize, psi: &[C64], i: usize, j: usize) -> Result<TwoSiteState, Error> {
    if psi.len() != 1 << n || i >= n || j >= n || i == j {
        return Err(Error::InvalidParams("bad vector length or site pair".into()));
    }
    let mut acc = CMatrix::zeros(4, 4);
    accumulate_pair(n, psi, i, j, 1.0, &mut acc);
    TwoSiteState::new(acc, Source::Ed)
}

/// Two-site reduced state of a full density matrix on sites (i, j).
pub fn reduce_density(n: usize, rho: &CMatrix, i: usize, j: usize) -> Result<TwoSiteState, Error> {
    let r = crate::linalg::partial_trace(rho, n, &[i, j])?;
    TwoSiteState::new(r, Source::Ed)
}

fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Spectrum with every eigenstate already reduced to the requested bonds, so
/// that thermal states at many temperatures cost one diagonalization.
#[derive(Clone, Debug)]
pub struct ThermalReference {
    pub energies: Vec<f64>,
    pub bonds: Vec<(usize, usize)>,
    /// reduced[k][b]: eigenstate k on bond b.
    reduced: Vec<Vec<CMatrix>>,
}

impl ThermalReference {
    pub fn new(h: &SpinChain, bonds: &[(usize, usize)]) -> Result<Self, Error> {
        let eig = h.eigensystem()?;
        let mut energies = Vec::with_capacity(eig.len());
        let mut reduced = Vec::with_capacity(eig.len());
        for (e, v) in eig {
            energies.push(e);
            reduced.push(
                bonds
                    .iter()
                    .map(|&(i, j)| {
                        let mut acc = CMatrix::zeros(4, 4);
                        accumulate_pair(h.n, &v, i, j, 1.0, &mut acc);
                        acc
                    })
                    .collect(),
            );
        }
        Ok(ThermalReference { energies, bonds: bonds.to_vec(), reduced })
    }

    /// Thermal reduced states at inverse temperature β, one per bond.
    pub fn at(&self, beta: f64) -> Result<Vec<TwoSiteState>, Error> {
        let p = boltzmann(&self.energies, beta);
        let mut accs = vec![CMatrix::zeros(4, 4); self.bonds.len()];
        for (r, &w) in self.reduced.iter().zip(&p) {
            if w < 1e-300 {
                continue;
            }
            for (acc, m) in accs.iter_mut().zip(r) {
                *acc = &*acc + &m.scale_real(w);
            }
        }
        accs.into_iter().map(|a| TwoSiteState::new(a, Source::Ed)).collect()
    }
}

/// Thermal reduced states on the given bonds (N ≤ MAX_THERMAL_SITES).
pub fn thermal_two_site(h: &SpinChain, beta: f64, bonds: &[(usize, usize)]) -> Result<Vec<TwoSiteState>, Error> {
    ThermalReference::new(h, bonds)?.at(beta)
}

/// Full thermal density matrix (N ≤ MAX_DENSE_SITES).
pub fn dense_thermal_state(h: &SpinChain, beta: f64) -> Result<CMatrix, Error> {
    if h.n > MAX_DENSE_SITES {
        return Err(Error::InvalidParams(format!("dense states need N <= {MAX_DENSE_SITES}")));
    }
    let eig = h.eigensystem()?;
    let energies: Vec<f64> = eig.iter().map(|e| e.0).collect();
    let p = boltzmann(&energies, beta);
    let d = h.dim();
    let mut rho = CMatrix::zeros(d, d);
    for ((_, v), &w) in eig.iter().zip(&p) {
        if w < 1e-300 {
            continue;
        }
        for a in 0..d {
            let va = v[a] * w;
            if va == cr(0.0) {
                continue;
            }
            for b in 0..d {
                rho[(a, b)] += va * v[b].conj();
            }
        }
    }
    Ok(rho)
}

/// Thermal state of `pre` evolved for time t under `post`, reduced to bonds
/// (N ≤ MAX_DENSE_SITES).
pub fn quenched_two_site(
    pre: &SpinChain,
    post: &SpinChain,
    beta: f64,
    t: f64,
    bonds: &[(usize, usize)],
) -> Result<Vec<TwoSiteState>, Error> {
    if pre.n != post.n || pre.n > MAX_DENSE_SITES {
        return Err(Error::InvalidParams("quench needs matching N <= MAX_DENSE_SITES".into()));
    }
    let eig = pre.eigensystem()?;
    let energies: Vec<f64> = eig.iter().map(|e| e.0).collect();
    let p = boltzmann(&energies, beta);
    let u = hermitian_eig(&post.dense()?)?.map(|x| C64::from_polar(1.0, -x * t));
    let mut accs = vec![CMatrix::zeros(4, 4); bonds.len()];
    for ((_, v), &w) in eig.iter().zip(&p) {
        if w < 1e-300 {
            continue;
        }
        let vt = u.matvec(v);
        for (acc, &(i, j)) in accs.iter_mut().zip(bonds) {
            accumulate_pair(pre.n, &vt, i, j, w, acc);
        }
    }
    accs.into_iter().map(|a| TwoSiteState::new(a, Source::Ed)).collect()
}

/// Ground-state reduced states on all nearest-neighbour bonds.
pub fn ground_two_site(h: &SpinChain, gs: &GroundState, bonds: &[(usize, usize)]) -> Result<Vec<TwoSiteState>, Error> {
    let psi: Vec<C64> = gs.vector.iter().map(|&x| cr(x)).collect();
    bonds.iter().map(|&(i, j)| reduce_two_site(h.n, &psi, i, j)).collect()
}

/// Nearest-neighbour bonds of the chain in site order.
pub fn bonds(n: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic {
        b.push((n - 1, 0));
    }
    b
}
