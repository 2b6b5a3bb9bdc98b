//! Exact observables of the periodic N-site spin chain from momentum blocks.
//!
//! The Jordan–Wigner image of a periodic chain is a fermion chain whose
//! boundary condition depends on the total fermion parity: even parity sees
//! half-integer momenta (every mode paired), odd parity sees integer momenta,
//! including the unpaired modes k = 0 and k = π/2 (per two-site cell). The
//! spin state is therefore a signed combination of four Gaussian ensembles,
//!
//! ρ ∝ ½(1 + P)·e^{−βH_A} + ½(1 − P)·e^{−βH_P},
//!
//! each of which factorizes over momentum sectors and obeys Wick's theorem.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::linalg::{cr, HermitianEigen, hermitian_eig};
use crate::momentum::SectorOp;
use crate::observables::{evolve_blocks, ground_tolerance, sector_hamiltonian, two_point, Protocol, Sector, TWO_POINT};
use crate::params::{SystemParams, Temperature};
use crate::Error;

/// Relative size of a parity-weighted trace below which the division in the
/// normalized expectation is no longer trustworthy.
const PARITY_TRACE_FLOOR: f64 = 1e-13;

fn block_parities(sector: Sector) -> &'static [f64] {
    match sector {
        Sector::Pair(_) => &[1.0, -1.0, -1.0, 1.0],
        Sector::Zero | Sector::HalfPi => &[1.0, -1.0],
    }
}

/// Sectors of the even-parity (half-integer) and odd-parity (integer) ensembles.
pub fn sectors(n: usize, even_parity: bool) -> Vec<Sector> {
    let nf = n as f64;
    if even_parity {
        (1..=n / 4).map(|p| Sector::Pair(2.0 * PI * (p as f64 - 0.5) / nf)).collect()
    } else {
        let mut v: Vec<Sector> = (1..n / 4).map(|p| Sector::Pair(2.0 * PI * p as f64 / nf)).collect();
        v.push(Sector::Zero);
        v.push(Sector::HalfPi);
        v
    }
}

struct SectorSpectrum {
    sector: Sector,
    eig: Vec<HermitianEigen>,
    post: Option<SectorOp>,
}

fn spectra(params: &SystemParams, protocol: &Protocol, n: usize, even: bool) -> Result<Vec<SectorSpectrum>, Error> {
    sectors(n, even)
        .into_iter()
        .map(|sector| {
            let h = sector_hamiltonian(params, sector);
            let eig = h.blocks.iter().map(hermitian_eig).collect::<Result<Vec<_>, _>>()?;
            let post = protocol.quench.map(|q| sector_hamiltonian(&q.post, sector));
            Ok(SectorSpectrum { sector, eig, post })
        })
        .collect()
}

/// Signed Gaussian ensemble: product of per-sector weights.
struct Ensemble {
    ln_abs_z: f64,
    sign: f64,
    /// Normalized two-point values with the closure applied: 7 entries.
    values: [f64; 7],
}

fn close(v: [f64; TWO_POINT]) -> [f64; 7] {
    let [me, mo, xx, yy, xy, yx] = v;
    [me, mo, xx, yy, me * mo - xx * yy + xy * yx, xy, yx]
}

/// Accumulates one ensemble from per-sector unnormalized block weights.
fn ensemble(
    data: &[SectorSpectrum],
    n: usize,
    t: Option<f64>,
    weights: impl Fn(usize, usize, &HermitianEigen) -> (Vec<f64>, f64),
) -> Result<Ensemble, Error> {
    let mut acc = [0.0; TWO_POINT];
    let mut ln_abs_z = 0.0;
    let mut sign = 1.0;
    let scale = 2.0 / n as f64;
    for (si, s) in data.iter().enumerate() {
        let mut blocks = Vec::with_capacity(s.eig.len());
        let mut abs_total = 0.0;
        let mut log_shift = 0.0;
        for (bi, e) in s.eig.iter().enumerate() {
            let (w, ln_factor) = weights(si, bi, e);
            log_shift = ln_factor;
            abs_total += w.iter().map(|x| x.abs()).sum::<f64>();
            blocks.push(e.map_values(&w.iter().map(|&x| cr(x)).collect::<Vec<C64>>()));
        }
        let mut rho = SectorOp { blocks };
        if let (Some(t), Some(post)) = (t, &s.post) {
            rho = evolve_blocks(&rho, post, t)?;
        }
        let z = rho.trace().re;
        if abs_total == 0.0 || z.abs() < PARITY_TRACE_FLOOR * abs_total {
            if z == 0.0 && abs_total == 0.0 {
                return Err(Error::Unsupported("empty sector weight".into()));
            }
            return Err(Error::Unsupported(format!(
                "parity-weighted trace {z:.3e} too small relative to {abs_total:.3e} (near-gapless mode)"
            )));
        }
        let v = two_point(s.sector, &rho);
        for k in 0..TWO_POINT {
            acc[k] += scale * v[k] / z;
        }
        ln_abs_z += z.abs().ln() + log_shift;
        sign *= z.signum();
    }
    Ok(Ensemble { ln_abs_z, sign, values: close(acc) })
}

fn combine(parts: &[(f64, Ensemble)]) -> [f64; 7] {
    let lmax = parts.iter().map(|(_, e)| e.ln_abs_z).fold(f64::NEG_INFINITY, f64::max);
    let mut num = [0.0; 7];
    let mut den = 0.0;
    for (c, e) in parts {
        let w = c * e.sign * (e.ln_abs_z - lmax).exp();
        den += w;
        for k in 0..7 {
            num[k] += w * e.values[k];
        }
    }
    num.map(|x| x / den)
}

/// Exact `[m_e, m_o, c_xx, c_yy, c_xy, c_yx]` of the periodic N-site chain.
pub fn exact_two_point(params: &SystemParams, protocol: &Protocol, n: usize) -> Result<[f64; TWO_POINT], Error> {
    let full = exact_observables(params, protocol, n)?;
    Ok([full[0], full[1], full[2], full[3], full[5], full[6]])
}

/// Exact `[m_e, m_o, c_xx, c_yy, c_zz, c_xy, c_yx]` of the periodic N-site chain.
/// c_zz is the ensemble-weighted Wick value, not a closure of averages.
pub fn exact_observables(params: &SystemParams, protocol: &Protocol, n: usize) -> Result<[f64; 7], Error> {
    if n < 4 || !n.is_multiple_of(4) {
        return Err(Error::InvalidParams(format!("N = {n} must be a positive multiple of 4")));
    }
    let t = protocol.quench.map(|q| q.t);
    let even = spectra(params, protocol, n, true)?;
    let odd = spectra(params, protocol, n, false)?;
    match protocol.temp {
        Temperature::Beta(b) if b == 0.0 => Ok([0.0; 7]),
        Temperature::Beta(beta) => {
            let mut parts = Vec::with_capacity(4);
            for (data, bc_sign) in [(&even, 1.0), (&odd, -1.0)] {
                for with_parity in [false, true] {
                    let w = |si: usize, bi: usize, e: &HermitianEigen| {
                        let shift = data[si].eig.iter().map(|x| x.values[0]).fold(f64::INFINITY, f64::min);
                        let par = if with_parity { block_parities(data[si].sector)[bi] } else { 1.0 };
                        let w = e.values.iter().map(|&x| par * (-beta * (x - shift)).exp()).collect();
                        (w, -beta * shift)
                    };
                    let ens = ensemble(data, n, t, w)?;
                    let c = if with_parity { 0.5 * bc_sign } else { 0.5 };
                    parts.push((c, ens));
                }
            }
            Ok(combine(&parts))
        }
        Temperature::Zero => zero_temperature(&even, &odd, n, t),
    }
}

/// Lowest energy of one parity within a sector and how many levels share it.
fn parity_ground(s: &SectorSpectrum, parity: f64, tol: f64) -> (f64, usize) {
    let pars = block_parities(s.sector);
    let mut e0 = f64::INFINITY;
    for (bi, e) in s.eig.iter().enumerate() {
        if pars[bi] == parity {
            e0 = e0.min(e.values[0]);
        }
    }
    let deg = s
        .eig
        .iter()
        .enumerate()
        .filter(|(bi, _)| pars[*bi] == parity)
        .map(|(_, e)| e.values.iter().filter(|&&x| x - e0 <= tol).count())
        .sum();
    (e0, deg)
}

/// Minimal energy of a parity-constrained product of sector ground states:
/// returns (energy, chosen parity per sector) or an error when the choice is
/// not unique.
fn constrained_ground(data: &[SectorSpectrum], target: f64, tol: f64) -> Result<(f64, Vec<f64>), Error> {
    let mut choice = Vec::with_capacity(data.len());
    let mut total = 0.0;
    let mut parity = 1.0;
    let mut costs = Vec::with_capacity(data.len());
    for s in data {
        let (ep, _) = parity_ground(s, 1.0, tol);
        let (em, _) = parity_ground(s, -1.0, tol);
        if (ep - em).abs() <= tol {
            return Err(Error::Unsupported("parity-degenerate sector in the zero-temperature finite chain".into()));
        }
        let pick = if ep < em { 1.0 } else { -1.0 };
        total += ep.min(em);
        parity *= pick;
        choice.push(pick);
        costs.push((ep - em).abs());
    }
    if parity != target {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        if order.len() > 1 && (costs[order[1]] - costs[order[0]]).abs() <= tol {
            return Err(Error::Unsupported("ambiguous parity flip in the zero-temperature finite chain".into()));
        }
        let k = order[0];
        choice[k] = -choice[k];
        total += costs[k];
    }
    Ok((total, choice))
}

fn zero_temperature(even: &[SectorSpectrum], odd: &[SectorSpectrum], n: usize, t: Option<f64>) -> Result<[f64; 7], Error> {
    let scale = even
        .iter()
        .chain(odd)
        .flat_map(|s| s.eig.iter().flat_map(|e| e.values.iter()))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = ground_tolerance(scale);
    let (ea, ca) = constrained_ground(even, 1.0, tol)?;
    let (ep, cp) = constrained_ground(odd, -1.0, tol)?;
    let component = |data: &[SectorSpectrum], choice: &[f64]| -> Result<(Ensemble, usize), Error> {
        let mut degeneracy = 1usize;
        for (s, &par) in data.iter().zip(choice) {
            degeneracy *= parity_ground(s, par, tol).1;
        }
        let w = |si: usize, bi: usize, e: &HermitianEigen| {
            let par = choice[si];
            let (e0, _) = parity_ground(&data[si], par, tol);
            let on = block_parities(data[si].sector)[bi] == par;
            let w = e.values.iter().map(|&x| if on && x - e0 <= tol { 1.0 } else { 0.0 }).collect();
            (w, 0.0)
        };
        Ok((ensemble(data, n, t, w)?, degeneracy))
    };
    let mut parts = Vec::new();
    if ea <= ep + tol {
        let (e, d) = component(even, &ca)?;
        parts.push((d as f64, Ensemble { ln_abs_z: 0.0, sign: 1.0, ..e }));
    }
    if ep <= ea + tol {
        let (e, d) = component(odd, &cp)?;
        parts.push((d as f64, Ensemble { ln_abs_z: 0.0, sign: 1.0, ..e }));
    }
    Ok(combine(&parts))
}

/// Ground energy of the periodic N-site chain: the lower of the even-parity
/// half-integer sector and the odd-parity integer sector.
pub fn exact_ground_energy(params: &SystemParams, n: usize) -> Result<f64, Error> {
    let protocol = Protocol::equilibrium(Temperature::Zero);
    let even = spectra(params, &protocol, n, true)?;
    let odd = spectra(params, &protocol, n, false)?;
    let tol = 1e-10;
    let lowest = |data: &[SectorSpectrum], target: f64| -> f64 {
        let mut total = 0.0;
        let mut parity = 1.0;
        let mut best_flip = f64::INFINITY;
        for s in data {
            let (ep, _) = parity_ground(s, 1.0, tol);
            let (em, _) = parity_ground(s, -1.0, tol);
            total += ep.min(em);
            if em < ep {
                parity = -parity;
            }
            best_flip = best_flip.min((ep - em).abs());
        }
        if parity != target { total + best_flip } else { total }
    };
    Ok(lowest(&even, 1.0).min(lowest(&odd, -1.0)))
}
