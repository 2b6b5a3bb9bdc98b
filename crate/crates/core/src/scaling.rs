//! Finite-size scaling: pseudo-critical points from derivative extrema of a
//! measure, power-law drift fits and jump-decay fits.

use crate::ed::{build_spin_hamiltonian, ground_two_site, lanczos_ground_state, Boundary};
use crate::measures::{evaluate, Measure};
use crate::momentum::{Grid, Size};
use crate::observables::{protocol_observables, Protocol};
use crate::params::{SystemParams, Temperature};
use crate::quadrature::golden_min;
use crate::two_site::{assemble_rho, Source};
use crate::Error;

pub const DEFAULT_STEP: f64 = 1e-3;
/// The derivative step never exceeds this many lattice spacings 1/N, so the
/// step stays inside the finite-size crossover region.
pub const STEP_PER_SITE: f64 = 0.25;
pub const SCAN_POINTS: usize = 200;
pub const LOCATE_TOL: f64 = 1e-6;
/// Offset from the critical point at which a jump is measured.
pub const JUMP_OFFSET: f64 = 1e-4;
pub const MOMENTUM_SIZES: [usize; 6] = [64, 128, 256, 512, 1024, 2048];
pub const ED_SIZES: [usize; 7] = [8, 10, 12, 14, 16, 18, 20];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Lambda1,
    Lambda2,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Lambda1 => "lambda1",
            Axis::Lambda2 => "lambda2",
        }
    }

    pub fn set(self, base: &SystemParams, value: f64) -> SystemParams {
        match self {
            Axis::Lambda1 => base.with_fields(value, base.lambda2),
            Axis::Lambda2 => base.with_fields(base.lambda1, value),
        }
    }
}

/// Central difference, optionally Richardson-extrapolated from steps h and h/2.
pub fn derivative(f: impl Fn(f64) -> Result<f64, Error>, x: f64, step: f64, richardson: bool) -> Result<f64, Error> {
    let d = |h: f64| -> Result<f64, Error> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let dh = d(step)?;
    if !richardson {
        return Ok(dh);
    }
    Ok((4.0 * d(0.5 * step)? - dh) / 3.0)
}

/// Position of the largest value of g in the bracket: coarse scan then golden
/// section. Errors when the maximum sits on the bracket edge.
pub fn locate_maximum(g: impl Fn(f64) -> Result<f64, Error>, lo: f64, hi: f64, points: usize) -> Result<f64, Error> {
    let points = points.max(3);
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let vals = xs.iter().map(|&x| g(x)).collect::<Result<Vec<_>, _>>()?;
    let k = (0..points).max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a))).unwrap();
    if k == 0 || k == points - 1 {
        return Err(Error::Analysis(format!("no interior extremum in [{lo}, {hi}]")));
    }
    let (x, _) = golden_min(|x| g(x).map(|v| -v).unwrap_or(f64::INFINITY), xs[k - 1], xs[k + 1], LOCATE_TOL);
    Ok(x)
}

/// Strongest interior local extremum of a signed curve f: among the scan
/// points that are local maxima or minima, the one with the largest |f|,
/// refined by golden section. Bracket-edge values never qualify.
pub fn locate_extremum(f: impl Fn(f64) -> Result<f64, Error>, lo: f64, hi: f64, points: usize) -> Result<f64, Error> {
    let points = points.max(3);
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<(usize, f64)> = None;
    for k in 1..points - 1 {
        let (a, v, b) = (vals[k - 1], vals[k], vals[k + 1]);
        let sign = if v >= a && v >= b {
            1.0
        } else if v <= a && v <= b {
            -1.0
        } else {
            continue;
        };
        if best.is_none_or(|(j, _)| v.abs() > vals[j].abs()) {
            best = Some((k, sign));
        }
    }
    let (k, sign) = best.ok_or_else(|| Error::Analysis(format!("no interior extremum in [{lo}, {hi}]")))?;
    let (x, _) = golden_min(|x| f(x).map(|v| -sign * v).unwrap_or(f64::INFINITY), xs[k - 1], xs[k + 1], LOCATE_TOL);
    Ok(x)
}

/// Source of the measure curve along an axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveSource {
    /// Momentum-space state on a finite lattice.
    Momentum { size: Size, temp: Temperature },
    /// Lanczos ground state of the spin chain (bond 0–1).
    Ed { n: usize, boundary: Boundary },
}

/// Measure value at one parameter point.
pub fn measure_at(params: &SystemParams, measure: Measure, source: CurveSource) -> Result<f64, Error> {
    let state = match source {
        CurveSource::Momentum { size, temp } => {
            let obs = protocol_observables(params, &Protocol::equilibrium(temp), size)?;
            assemble_rho(&obs, Source::Ces)?
        }
        CurveSource::Ed { n, boundary } => {
            let h = build_spin_hamiltonian(params, n, boundary)?;
            let gs = lanczos_ground_state(&h)?;
            ground_two_site(&h, &gs, &[(0, 1)])?.remove(0)
        }
    };
    evaluate(measure, &state)
}

/// Pseudo-critical point: the strongest local extremum of dQ/dλ along the axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoCritical {
    pub location: f64,
    pub peak_slope: f64,
}

pub fn locate_pseudocritical(
    base: &SystemParams,
    axis: Axis,
    measure: Measure,
    source: CurveSource,
    bracket: (f64, f64),
    scan_points: usize,
) -> Result<PseudoCritical, Error> {
    let q = |x: f64| measure_at(&axis.set(base, x), measure, source);
    let step = match source {
        CurveSource::Momentum { size: Size::Finite { n, .. }, .. } => DEFAULT_STEP.min(STEP_PER_SITE / n as f64),
        _ => DEFAULT_STEP,
    };
    let slope = |x: f64| derivative(q, x, step, true);
    let location = locate_extremum(slope, bracket.0, bracket.1, scan_points)?;
    Ok(PseudoCritical { location, peak_slope: slope(location)?.abs() })
}

/// Result of a log–log regression ln y = ln α − ν ln N.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub exponent_err: f64,
    pub ln_amplitude: f64,
    pub ln_amplitude_err: f64,
    pub residuals: Vec<f64>,
    pub sizes: Vec<f64>,
    /// Points dropped because |λc(N) − λc(∞)| was not positive.
    pub dropped: Vec<f64>,
}

fn loglog_fit(points: &[(f64, f64)]) -> Result<ScalingFit, Error> {
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    for &(n, y) in points {
        if y > 0.0 && n > 0.0 && y.is_finite() {
            used.push((n.ln(), y.ln(), n));
        } else {
            dropped.push(n);
        }
    }
    if used.len() < 3 {
        return Err(Error::Analysis(format!("{} usable points; need at least 3", used.len())));
    }
    let m = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / m;
    let my = used.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = used.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (m - 2.0);
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (1.0 / m + mx * mx / sxx)).sqrt();
    Ok(ScalingFit {
        exponent: -slope,
        exponent_err: slope_err,
        ln_amplitude: intercept,
        ln_amplitude_err: intercept_err,
        residuals,
        sizes: used.iter().map(|p| p.2).collect(),
        dropped,
    })
}

/// Fits λc(N) = λc(∞) + α N^{−ν} on |λc(N) − λc(∞)|.
pub fn fit_power_law(points: &[(f64, f64)], lambda_c_infinity: f64) -> Result<ScalingFit, Error> {
    let shifted: Vec<(f64, f64)> = points.iter().map(|&(n, l)| (n, (l - lambda_c_infinity).abs())).collect();
    loglog_fit(&shifted)
}

/// Fits |Δ(N)| = α̃ N^{−ν̃}.
pub fn fit_jump_decay(points: &[(f64, f64)]) -> Result<ScalingFit, Error> {
    let abs: Vec<(f64, f64)> = points.iter().map(|&(n, d)| (n, d.abs())).collect();
    loglog_fit(&abs)
}

/// λ₁ on the AFM–PM boundary λ₁² = λ₂² + 1.
pub fn afm_pm_boundary(lambda2: f64) -> f64 {
    (lambda2 * lambda2 + 1.0).sqrt()
}

/// λ₂ on the AFM–DM boundary λ₂² = λ₁² + γ².
pub fn afm_dm_boundary(gamma: f64, lambda1: f64) -> f64 {
    (lambda1 * lambda1 + gamma * gamma).sqrt()
}

/// Measure jump across a critical point on a finite lattice at zero
/// temperature: Q(λc + δ) − Q(λc − δ).
pub fn jump_magnitude(
    base: &SystemParams,
    axis: Axis,
    lambda_c: f64,
    measure: Measure,
    n: usize,
    grid: Grid,
) -> Result<f64, Error> {
    let source = CurveSource::Momentum { size: Size::finite(n, grid)?, temp: Temperature::Zero };
    let up = measure_at(&axis.set(base, lambda_c + JUMP_OFFSET), measure, source)?;
    let down = measure_at(&axis.set(base, lambda_c - JUMP_OFFSET), measure, source)?;
    Ok(up - down)
}

/// Pseudo-critical points for a list of momentum-lattice sizes at zero
/// temperature.
pub fn momentum_pseudocritical_series(
    base: &SystemParams,
    axis: Axis,
    measure: Measure,
    sizes: &[usize],
    grid: Grid,
    bracket: (f64, f64),
) -> Result<Vec<(f64, PseudoCritical)>, Error> {
    sizes
        .iter()
        .map(|&n| {
            let source = CurveSource::Momentum { size: Size::finite(n, grid)?, temp: Temperature::Zero };
            Ok((n as f64, locate_pseudocritical(base, axis, measure, source, bracket, SCAN_POINTS)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_linear_and_quadratic() {
        let d = derivative(|x| Ok(3.0 * x + 1.0), 0.4, 1e-3, false).unwrap();
        assert!((d - 3.0).abs() < 1e-9);
        let d = derivative(|x| Ok((x - 0.4).powi(2)), 0.4, 1e-3, true).unwrap();
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn lorentzian_peak() {
        let c = 0.3711;
        let x = locate_maximum(|x| Ok(1.0 / (1.0 + ((x - c) / 0.01).powi(2))), 0.0, 1.0, 200).unwrap();
        assert!((x - c).abs() < 1e-6);
        assert!(locate_maximum(Ok, 0.0, 1.0, 50).is_err());
        // a shallow interior dip wins over a larger edge value
        let f = |x: f64| Ok(-0.5 * x - 0.2 * (-((x - 0.4) / 0.05).powi(2)).exp());
        let x = locate_extremum(f, 0.0, 1.0, 200).unwrap();
        assert!((x - 0.4).abs() < 1e-2);
        assert!(locate_extremum(|x| Ok(x * x), 0.5, 1.0, 20).is_err());
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0].iter().map(|&n: &f64| (n, 1.0 + (2.0f64).exp() * n.powf(-1.5))).collect();
        let fit = fit_power_law(&pts, 1.0).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-10 && (fit.ln_amplitude - 2.0).abs() < 1e-10);
        let jumps: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&n: &f64| (n, -0.5 * n.powf(-0.9))).collect();
        assert!((fit_jump_decay(&jumps).unwrap().exponent - 0.9).abs() < 1e-10);
    }

    #[test]
    fn drops_nonpositive_offsets() {
        let pts = [(8.0, 1.0), (16.0, 1.5), (32.0, 1.25), (64.0, 1.125), (128.0, 1.0625)];
        let fit = fit_power_law(&pts, 1.0).unwrap();
        assert_eq!(fit.dropped, vec![8.0]);
        assert!((fit.exponent - 1.0).abs() < 1e-10);
    }

    #[test]
    fn boundaries() {
        assert!((afm_pm_boundary(1.5) - 3.25f64.sqrt()).abs() < 1e-15);
        assert!((afm_dm_boundary(0.8, 1.5) - 2.89f64.sqrt()).abs() < 1e-15);
    }
}
