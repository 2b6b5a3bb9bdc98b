//! Property checks shared by the property suite and the acceptance target.
//! Each returns the largest observed deviation or a description of the
//! violation.

#![allow(dead_code)]

use std::fs;
use std::path::Path;

use altxy::factorization::{locus_residual, on_factorization_line, separable_energy};
use altxy::linalg::hermitian_eig;
use altxy::momentum::{build_blocks, closed_form_energies};
use altxy::observables::{ces_block_state, evolve_blocks};
use altxy::sweep::{parse_config, run};
use altxy::{SystemParams, Temperature};

pub type Check = Result<f64, String>;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_pair_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Every block spectrum is symmetric about zero.
pub fn spectral_symmetry(p: &SystemParams, phi: f64) -> Check {
    let mut worst: f64 = 0.0;
    for b in &build_blocks(p, phi).blocks {
        let v = hermitian_eig(b).map_err(|e| e.to_string())?.values;
        let mirrored = sorted(v.iter().map(|x| -x).collect());
        worst = worst.max(max_pair_diff(&v, &mirrored));
    }
    if worst < 1e-9 { Ok(worst) } else { Err(format!("{p:?} phi={phi}: asymmetry {worst:e}")) }
}

/// Numeric block eigenvalues equal the closed-form quasiparticle energies,
/// and the four-particle energies are sums and differences of the two-particle ones.
pub fn closed_forms(p: &SystemParams, phi: f64) -> Check {
    let blocks = build_blocks(p, phi).blocks;
    let w = closed_form_energies(p, phi);
    let two = sorted(vec![-w.omega2_plus, -w.omega2_minus, w.omega2_minus, w.omega2_plus]);
    let four = sorted(vec![-w.omega4_plus, -w.omega4_minus, 0.0, 0.0, w.omega4_minus, w.omega4_plus]);
    let eig = |k: usize| hermitian_eig(&blocks[k]).map(|e| e.values).map_err(|e| e.to_string());
    let d = max_pair_diff(&eig(1)?, &two)
        .max(max_pair_diff(&eig(2)?, &two))
        .max(max_pair_diff(&eig(3)?, &four))
        .max((w.omega4_plus - (w.omega2_plus + w.omega2_minus)).abs())
        .max((w.omega4_minus - (w.omega2_plus - w.omega2_minus).abs()).abs());
    if d < 1e-9 { Ok(d) } else { Err(format!("{p:?} phi={phi}: closed-form deviation {d:e}")) }
}

/// Evolution with the fields switched off preserves the block spectrum of
/// the state and the post-quench energy of the pair.
pub fn unitary_dynamics(p: &SystemParams, beta: f64, phi: f64, t: f64) -> Check {
    let err = |e: altxy::Error| e.to_string();
    let rho = ces_block_state(p, Temperature::Beta(beta), phi).map_err(err)?;
    let h = build_blocks(&p.fields_off(), phi).sector();
    let evolved = evolve_blocks(&rho, &h, t).map_err(err)?;
    let spectrum = max_pair_diff(&rho.eigenvalues().map_err(err)?, &evolved.eigenvalues().map_err(err)?);
    let energy = (rho.trace_product(&h) - evolved.trace_product(&h)).norm();
    let trace = (evolved.trace().re - 1.0).abs();
    let d = spectrum.max(energy).max(trace);
    if d < 1e-10 { Ok(d) } else { Err(format!("{p:?} beta={beta} phi={phi} t={t}: drift {d:e}")) }
}

/// ε ≥ ε₀ everywhere, with equality on the factorization line and a strict
/// gap well away from it.
pub fn separable_bound(p: &SystemParams) -> Check {
    let s = separable_energy(p).map_err(|e| e.to_string())?;
    let excess = s.epsilon - s.epsilon0;
    if excess < -1e-12 {
        return Err(format!("{p:?}: epsilon below the bond bound by {:e}", -excess));
    }
    let r = locus_residual(p.gamma, p.lambda1, p.lambda2);
    if on_factorization_line(p.gamma, p.lambda1, p.lambda2, 1e-9) && excess > 1e-9 {
        return Err(format!("{p:?}: excess {excess:e} on the line"));
    }
    if r.abs() > 0.1 && excess < 1e-9 {
        return Err(format!("{p:?}: no excess ({excess:e}) at residual {r}"));
    }
    Ok(excess)
}

/// Point on the factorization line for a given γ, λ₂ and sign of λ₁.
pub fn line_point(gamma: f64, lambda2: f64, positive: bool) -> SystemParams {
    let l1 = (lambda2 * lambda2 + 1.0 - gamma * gamma).sqrt();
    SystemParams::unit(gamma, if positive { l1 } else { -l1 }, lambda2).unwrap()
}

fn body(path: &Path) -> Result<String, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text.lines().filter(|l| !l.starts_with("# timestamp=")).map(|l| format!("{l}\n")).collect())
}

/// Runs the same sweep with each worker count and compares the files byte
/// for byte, excluding the timestamp line.
pub fn sweep_determinism(dir: &Path, config: &str, workers: &[usize]) -> Result<usize, String> {
    let mut reference: Option<Vec<String>> = None;
    for &w in workers {
        let out = dir.join(format!("w{w}.csv"));
        let text = format!("{config}\n[run]\nout = \"{}\"\nworkers = {w}\n", out.display());
        let cfg = parse_config(&text).map_err(|e| e.to_string())?;
        let summary = run(&cfg).map_err(|e| e.to_string())?;
        let bodies = summary.files.iter().map(|f| body(f)).collect::<Result<Vec<_>, _>>()?;
        match &reference {
            None => reference = Some(bodies),
            Some(r) if *r != bodies => return Err(format!("{w} workers changed the output")),
            Some(_) => {}
        }
    }
    Ok(reference.map_or(0, |r| r.iter().map(|b| b.lines().count()).sum()))
}
