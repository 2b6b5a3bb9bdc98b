//! Sudden quench of the fields: time-evolved observables and measures,
//! large-time averages, ergodicity scores and temperature non-monotonicity.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

use crate::linalg::{hermitian_eig, CMatrix};
use crate::measures::{evaluate, Measure};
use crate::momentum::{critical_breakpoints, grid_angles, Grid, Size};
use crate::observables::{
    block_state, protocol_observables, sector_hamiltonian, sector_operators, ObservableSet, ThermalCurve, Protocol, Quench,
    Sector, TWO_POINT,
};
use crate::params::{SystemParams, Temperature};
use crate::quadrature::{composite_rule, golden_min, PANEL_ORDER};
use crate::two_site::{assemble_rho, Source};
use crate::Error;

/// Fluctuation threshold separating the large-time behaviours.
pub const FLUCTUATION_THRESHOLD: f64 = 1e-3;
/// Below this the measure is considered constant in time.
pub const SATURATION_TOL: f64 = 1e-10;
/// Rise needed for a temperature non-monotonicity.
pub const NG_THRESHOLD: f64 = 1e-4;
/// Quadrature nodes used at Jt = 100π; the count scales linearly with Jt.
pub const NODES_AT_REFERENCE_TIME: usize = 4096;
const MIN_SERIES_NODES: usize = 1024;

/// Fields `pre` before t = 0 and `post` after, starting from the
/// equilibrium state of `pre` at `temp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuenchSpec {
    pub pre: SystemParams,
    pub post: SystemParams,
    pub temp: Temperature,
}

impl QuenchSpec {
    /// Both fields switched off at t = 0.
    pub fn fields_off(pre: SystemParams, temp: Temperature) -> Self {
        QuenchSpec { pre, post: pre.fields_off(), temp }
    }

    fn protocol(&self, t: f64) -> Protocol {
        Protocol { temp: self.temp, quench: Some(Quench { post: self.post, t }) }
    }
}

/// Observables of the evolved state at time t. At t = 0 this is exactly the
/// equilibrium set.
pub fn evolve_observables(spec: &QuenchSpec, t: f64, size: Size) -> Result<ObservableSet, Error> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("time {t} must be finite and non-negative")));
    }
    if t == 0.0 {
        return protocol_observables(&spec.pre, &Protocol::equilibrium(spec.temp), size);
    }
    protocol_observables(&spec.pre, &spec.protocol(t), size)
}

/// Spectral form of the evolved two-point functions:
/// f_k(t) = c_k + Σ_terms 2 Re(a_k e^{−iωt}), built once per quench.
#[derive(Clone, Debug)]
pub struct SpectralSeries {
    constant: [f64; TWO_POINT],
    freqs: Vec<f64>,
    amps: Vec<[C64; TWO_POINT]>,
    pub nodes: usize,
}

impl SpectralSeries {
    /// Thermodynamic limit with a fixed composite rule of about `nodes` points.
    pub fn thermodynamic(spec: &QuenchSpec, nodes: usize) -> Result<Self, Error> {
        let rule = composite_rule(0.0, FRAC_PI_2, nodes, &critical_breakpoints(&spec.pre));
        let sectors: Vec<(Sector, f64)> = rule.iter().map(|&(phi, w)| (Sector::Pair(phi), w / PI)).collect();
        Self::from_sectors(spec, &sectors)
    }

    /// Node count for times up to `t_max`: proportional to Jt with
    /// NODES_AT_REFERENCE_TIME at Jt = 100π.
    pub fn nodes_for(t_max: f64) -> usize {
        let n = (NODES_AT_REFERENCE_TIME as f64 * t_max / (100.0 * PI)).ceil() as usize;
        n.max(MIN_SERIES_NODES).div_ceil(PANEL_ORDER) * PANEL_ORDER
    }

    /// Chooses the representation for a size; the exact finite-chain
    /// ensemble has no single spectral form and is rejected.
    pub fn for_size(spec: &QuenchSpec, size: Size, t_max: f64) -> Result<Self, Error> {
        match size {
            Size::Thermodynamic => Self::thermodynamic(spec, Self::nodes_for(t_max)),
            Size::Finite { grid: Grid::Exact, .. } => {
                Err(Error::Unsupported("time series use the periodic or antiperiodic grids".into()))
            }
            Size::Finite { n, grid } => {
                Size::finite(n, grid)?;
                let w = 2.0 / n as f64;
                let sectors: Vec<(Sector, f64)> = grid_angles(n, grid).into_iter().map(|p| (Sector::Pair(p), w)).collect();
                Self::from_sectors(spec, &sectors)
            }
        }
    }

    fn from_sectors(spec: &QuenchSpec, sectors: &[(Sector, f64)]) -> Result<Self, Error> {
        let mut constant = [0.0; TWO_POINT];
        let mut freqs = Vec::new();
        let mut amps = Vec::new();
        if spec.temp == Temperature::Beta(0.0) {
            return Ok(SpectralSeries { constant, freqs, amps, nodes: sectors.len() });
        }
        for &(sector, weight) in sectors {
            let rho = block_state(&sector_hamiltonian(&spec.pre, sector), spec.temp)?;
            let post = sector_hamiltonian(&spec.post, sector);
            let ops = sector_operators(sector);
            for (b, (hb, rb)) in post.blocks.iter().zip(&rho.blocks).enumerate() {
                let eig = hermitian_eig(hb)?;
                let r = eig.to_eigenbasis(rb);
                let a: Vec<CMatrix> = ops.iter().map(|o| eig.to_eigenbasis(&o.blocks[b])).collect();
                let d = eig.dim();
                for i in 0..d {
                    for j in i..d {
                        let omega = eig.values[i] - eig.values[j];
                        let m: [C64; TWO_POINT] = std::array::from_fn(|k| a[k][(j, i)] * r[(i, j)] * weight);
                        if i == j {
                            for k in 0..TWO_POINT {
                                constant[k] += m[k].re;
                            }
                        } else if omega.abs() < 1e-13 {
                            for k in 0..TWO_POINT {
                                constant[k] += 2.0 * m[k].re;
                            }
                        } else if m.iter().any(|z| z.norm() > 1e-300) {
                            freqs.push(omega);
                            amps.push(m);
                        }
                    }
                }
            }
        }
        Ok(SpectralSeries { constant, freqs, amps, nodes: sectors.len() })
    }

    pub fn two_point_at(&self, t: f64) -> [f64; TWO_POINT] {
        let mut out = self.constant;
        for (w, a) in self.freqs.iter().zip(&self.amps) {
            let z = C64::from_polar(2.0, -w * t);
            for k in 0..TWO_POINT {
                out[k] += (a[k] * z).re;
            }
        }
        out
    }

    /// Values on t0 + i·dt, i < count, by phase recurrence (resynchronized
    /// every 64 steps).
    pub fn two_point_uniform(&self, t0: f64, dt: f64, count: usize) -> Vec<[f64; TWO_POINT]> {
        let mut out = vec![self.constant; count];
        for (w, a) in self.freqs.iter().zip(&self.amps) {
            let step = C64::from_polar(1.0, -w * dt);
            let mut z = C64::from_polar(2.0, -w * t0);
            for (i, row) in out.iter_mut().enumerate() {
                if i % 64 == 0 {
                    z = C64::from_polar(2.0, -w * (t0 + i as f64 * dt));
                }
                for k in 0..TWO_POINT {
                    row[k] += a[k].re * z.re - a[k].im * z.im;
                }
                z *= step;
            }
        }
        out
    }
}

/// Measure values along a time grid together with the observables.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub observables: Vec<ObservableSet>,
}

fn measure_of(obs: &ObservableSet, measure: Measure) -> Result<f64, Error> {
    evaluate(measure, &assemble_rho(obs, Source::Tes)?)
}

fn series_from(two_point: Vec<[f64; TWO_POINT]>, times: Vec<f64>, measure: Measure) -> Result<TimeSeries, Error> {
    let observables: Vec<ObservableSet> = two_point.into_iter().map(ObservableSet::from_two_point).collect();
    let values = observables.iter().map(|o| measure_of(o, measure)).collect::<Result<Vec<_>, _>>()?;
    Ok(TimeSeries { times, values, observables })
}

/// Measure along a sorted time grid.
pub fn time_series(spec: &QuenchSpec, measure: Measure, times: &[f64], size: Size) -> Result<TimeSeries, Error> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParams("times must be non-negative and strictly increasing".into()));
    }
    let t_max = times.last().copied().unwrap_or(0.0);
    let series = SpectralSeries::for_size(spec, size, t_max)?;
    let tp: Vec<[f64; TWO_POINT]> = times.iter().map(|&t| series.two_point_at(t)).collect();
    series_from(tp, times.to_vec(), measure)
}

/// Large-time behaviour of a measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Behaviour {
    /// Constant in time.
    Saturated,
    /// Oscillates with amplitude at most the threshold.
    BoundedOscillation,
    /// Oscillates with a finite amplitude above the threshold.
    PersistentOscillation,
}

impl Behaviour {
    pub fn label(self) -> &'static str {
        match self {
            Behaviour::Saturated => "saturated",
            Behaviour::BoundedOscillation => "bounded-oscillation",
            Behaviour::PersistentOscillation => "persistent-oscillation",
        }
    }
}

/// Averaging window in units of 1/J.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window { start: 100.0 * PI, end: 120.0 * PI, samples: 4000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongTimeAverage {
    pub average: f64,
    /// max − min over the window.
    pub fluctuation: f64,
    pub behaviour: Behaviour,
}

pub fn classify(fluctuation: f64) -> Behaviour {
    if fluctuation < SATURATION_TOL {
        Behaviour::Saturated
    } else if fluctuation <= FLUCTUATION_THRESHOLD {
        Behaviour::BoundedOscillation
    } else {
        Behaviour::PersistentOscillation
    }
}

/// Average of the measure over the window at uniformly spaced samples
/// (both ends included).
pub fn long_time_average(spec: &QuenchSpec, measure: Measure, window: Window) -> Result<LongTimeAverage, Error> {
    Ok(long_time_averages(spec, &[measure], window)?[0])
}

/// Several measures from one evolution.
pub fn long_time_averages(spec: &QuenchSpec, measures: &[Measure], window: Window) -> Result<Vec<LongTimeAverage>, Error> {
    if window.samples < 2 || !(window.end > window.start) || window.start < 0.0 {
        return Err(Error::InvalidParams("window needs start >= 0, end > start and at least 2 samples".into()));
    }
    let series = SpectralSeries::for_size(spec, Size::Thermodynamic, window.end)?;
    let dt = (window.end - window.start) / (window.samples - 1) as f64;
    let tp = series.two_point_uniform(window.start, dt, window.samples);
    let observables: Vec<ObservableSet> = tp.into_iter().map(ObservableSet::from_two_point).collect();
    let states = observables
        .iter()
        .map(|o| assemble_rho(o, Source::Tes))
        .collect::<Result<Vec<_>, _>>()?;
    measures
        .iter()
        .map(|&m| {
            let v = states.iter().map(|s| evaluate(m, s)).collect::<Result<Vec<_>, _>>()?;
            let average = crate::quadrature::pairwise_sum(&v) / v.len() as f64;
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            Ok(LongTimeAverage { average, fluctuation: hi - lo, behaviour: classify(hi - lo) })
        })
        .collect()
}

/// Equilibrium measure in the thermodynamic limit.
pub fn equilibrium_measure(params: &SystemParams, temp: Temperature, measure: Measure) -> Result<f64, Error> {
    let obs = crate::observables::ces_observables(params, temp, Size::Thermodynamic)?;
    evaluate(measure, &assemble_rho(&obs, Source::Ces)?)
}

/// Temperature range and resolution for the equilibrium maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperatureScan {
    /// T′ spans [T/decade, T·decade].
    pub decade: f64,
    pub points: usize,
}

impl Default for TemperatureScan {
    fn default() -> Self {
        TemperatureScan { decade: 10.0, points: 200 }
    }
}

/// Maximum of the equilibrium measure over T′ on a logarithmic grid around
/// T, refined by golden section to 1e-6 relative. Returns (max, argmax T′).
/// A zero reference temperature has only the ground state to compare with.
pub fn equilibrium_max_over_t(
    measure: Measure,
    post: &SystemParams,
    temp: Temperature,
    scan: TemperatureScan,
) -> Result<(f64, f64), Error> {
    let t_ref = match temp {
        Temperature::Zero => return Ok((equilibrium_measure(post, Temperature::Zero, measure)?, 0.0)),
        Temperature::Beta(b) if b == 0.0 => {
            return Ok((equilibrium_measure(post, temp, measure)?, f64::INFINITY));
        }
        Temperature::Beta(b) => 1.0 / b,
    };
    let curve = ThermalCurve::new(post)?;
    let q = |t: f64| evaluate(measure, &assemble_rho(&curve.observables(Temperature::Beta(1.0 / t))?, Source::Ces)?);
    max_over_log_grid(q, t_ref / scan.decade, t_ref * scan.decade, scan.points)
}

/// Grid maximum of f on [lo, hi] (log spacing) with golden refinement in ln T.
pub fn max_over_log_grid(
    f: impl Fn(f64) -> Result<f64, Error>,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(f64, f64), Error> {
    let points = points.max(2);
    let (la, lb) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..points).map(|i| la + (lb - la) * i as f64 / (points - 1) as f64).collect();
    let vals = xs.iter().map(|&x| f(x.exp())).collect::<Result<Vec<_>, _>>()?;
    let k = (0..points).max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a))).unwrap();
    let (a, b) = (xs[k.saturating_sub(1)], xs[(k + 1).min(points - 1)]);
    let mut best = (vals[k], xs[k].exp());
    if b > a {
        let (x, negv) = golden_min(|x| f(x.exp()).map(|v| -v).unwrap_or(f64::INFINITY), a, b, 1e-6);
        if -negv > best.0 {
            best = (-negv, x.exp());
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicityReport {
    pub q_time_avg: f64,
    pub q_eq_max: f64,
    pub argmax_temperature: f64,
    pub eta: f64,
    pub behaviour: Behaviour,
    pub fluctuation: f64,
    /// η is below the accuracy threshold yet not exactly zero.
    pub inconclusive: bool,
}

impl ErgodicityReport {
    pub fn ergodic(&self) -> bool {
        self.eta < FLUCTUATION_THRESHOLD
    }
}

/// η = max(0, large-time average − max over T′ of the equilibrium measure at
/// the post-quench parameters).
pub fn ergodicity_score(
    spec: &QuenchSpec,
    measure: Measure,
    window: Window,
    scan: TemperatureScan,
) -> Result<ErgodicityReport, Error> {
    let avg = long_time_average(spec, measure, window)?;
    let (q_eq_max, argmax_temperature) = equilibrium_max_over_t(measure, &spec.post, spec.temp, scan)?;
    Ok(report(avg, q_eq_max, argmax_temperature))
}

pub fn report(avg: LongTimeAverage, q_eq_max: f64, argmax_temperature: f64) -> ErgodicityReport {
    let raw = avg.average - q_eq_max;
    let eta = raw.max(0.0);
    ErgodicityReport {
        q_time_avg: avg.average,
        q_eq_max,
        argmax_temperature,
        eta,
        behaviour: avg.behaviour,
        fluctuation: avg.fluctuation,
        inconclusive: eta > 0.0 && eta < FLUCTUATION_THRESHOLD,
    }
}

/// Evidence of a non-monotonic temperature dependence.
#[derive(Clone, Debug, PartialEq)]
pub struct NgReport {
    pub ng: bool,
    /// (T_a, T_b) with T_a < T_b and Q(T_b) > Q(T_a) + threshold.
    pub witness: Option<(f64, f64)>,
    pub temperatures: Vec<f64>,
    pub values: Vec<f64>,
}

/// Uniform temperature grid on (0, t_max].
pub fn default_temperatures(points: usize, t_max: f64) -> Vec<f64> {
    (1..=points).map(|k| t_max * k as f64 / points as f64).collect()
}

/// Finds T_a < T_b with Q(T_b) > Q(T_a) + threshold, that is a rise of the
/// measure with temperature.
pub fn find_rise(temperatures: &[f64], values: &[f64], threshold: f64) -> Option<(f64, f64)> {
    let mut min_idx = 0;
    for b in 1..values.len() {
        if values[b] > values[min_idx] + threshold {
            return Some((temperatures[min_idx], temperatures[b]));
        }
        if values[b] < values[min_idx] {
            min_idx = b;
        }
    }
    None
}

/// Non-monotonicity of an equilibrium measure with temperature.
pub fn nonmonotonicity_detect(params: &SystemParams, measure: Measure, temperatures: &[f64]) -> Result<NgReport, Error> {
    if temperatures.windows(2).any(|w| w[1] <= w[0]) || temperatures.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParams("temperatures must be positive and increasing".into()));
    }
    let curve = ThermalCurve::new(params)?;
    let values = temperatures
        .iter()
        .map(|&t| evaluate(measure, &assemble_rho(&curve.observables(Temperature::Beta(1.0 / t))?, Source::Ces)?))
        .collect::<Result<Vec<_>, _>>()?;
    let witness = find_rise(temperatures, &values, NG_THRESHOLD);
    Ok(NgReport { ng: witness.is_some(), witness, temperatures: temperatures.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l1: f64, l2: f64, beta: f64) -> QuenchSpec {
        QuenchSpec::fields_off(SystemParams::unit(0.8, l1, l2).unwrap(), Temperature::Beta(beta))
    }

    #[test]
    fn zero_time_is_equilibrium() {
        let s = spec(0.5, 0.3, 2.0);
        let a = evolve_observables(&s, 0.0, Size::Thermodynamic).unwrap();
        let b = crate::observables::ces_observables(&s.pre, s.temp, Size::Thermodynamic).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.c_xy, a.c_yx), (0.0, 0.0));
    }

    #[test]
    fn spectral_series_matches_direct_evolution() {
        let s = spec(0.5, 0.3, 2.0);
        let size = Size::finite(16, Grid::Antiperiodic).unwrap();
        let series = SpectralSeries::for_size(&s, size, 5.0).unwrap();
        for t in [0.0, 0.7, 3.3] {
            let direct = protocol_observables(&s.pre, &s.protocol(t), size).unwrap();
            let fast = ObservableSet::from_two_point(series.two_point_at(t));
            assert!(direct.max_abs_diff(&fast) < 1e-12);
        }
        let uni = series.two_point_uniform(1.0, 0.01, 300);
        let direct = series.two_point_at(1.0 + 299.0 * 0.01);
        assert!(uni[299].iter().zip(direct).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn trivial_quench_is_stationary() {
        let s = spec(0.0, 0.0, 3.0);
        let ts = time_series(&s, Measure::Ln, &[0.5, 1.0, 2.0, 4.0], Size::Thermodynamic).unwrap();
        assert!(ts.values.iter().all(|v| (v - ts.values[0]).abs() < 1e-10));
    }

    #[test]
    fn rise_detection() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(find_rise(&t, &[0.5, 0.4, 0.3, 0.35, 0.1], 1e-4), Some((3.0, 4.0)));
        assert_eq!(find_rise(&t, &[0.5, 0.4, 0.3, 0.3, 0.1], 1e-4), None);
        assert_eq!(find_rise(&t, &[0.0, 0.2, 0.1, 0.0, 0.0], 1e-4), Some((1.0, 2.0)));
    }

    #[test]
    fn boundary_maximum() {
        let (v, t) = max_over_log_grid(|t| Ok(-t), 0.1, 10.0, 50).unwrap();
        assert!((t - 0.1).abs() < 1e-6 && (v + 0.1).abs() < 1e-6);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(0.0), Behaviour::Saturated);
        assert_eq!(classify(5e-4), Behaviour::BoundedOscillation);
        assert_eq!(classify(2e-3), Behaviour::PersistentOscillation);
    }
}
