//! Composite Gauss–Legendre quadrature with node doubling, breakpoints and
//! deterministic pairwise reduction.

use std::sync::OnceLock;

use crate::Error;

/// Points per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 16;
pub const DEFAULT_START_NODES: usize = 256;
pub const DEFAULT_NODE_CAP: usize = 65536;

/// Nodes and weights of the order-n rule on [−1, 1] by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite rule on [a, b] with about `nodes` points; every breakpoint
/// strictly inside (a, b) becomes a panel edge.
pub fn composite_rule(a: f64, b: f64, nodes: usize, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let panels_total = (nodes / PANEL_ORDER).max(edges.len() - 1);
    let (gx, gw) = panel_rule();
    let mut out = Vec::with_capacity(panels_total * PANEL_ORDER + PANEL_ORDER);
    for seg in edges.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let share = ((hi - lo) / (b - a) * panels_total as f64).round().max(1.0) as usize;
        let h = (hi - lo) / share as f64;
        for k in 0..share {
            let left = lo + k as f64 * h;
            for (xi, wi) in gx.iter().zip(gw) {
                out.push((left + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
            }
        }
    }
    out
}

/// Pairwise (cascade) summation; fixed reduction order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Weighted sum of vector-valued samples, component by component.
pub fn weighted_pairwise(samples: &[Vec<f64>], weights: &[f64], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|c| {
            let terms: Vec<f64> = samples.iter().zip(weights).map(|(s, w)| s[c] * w).collect();
            pairwise_sum(&terms)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Integral {
    pub value: Vec<f64>,
    pub nodes: usize,
    /// |difference| between the last two doubling stages (max over components).
    pub error_estimate: f64,
}

/// Integration settings for adaptive doubling.
#[derive(Clone, Copy, Debug)]
pub struct Doubling {
    pub tol: f64,
    pub start: usize,
    pub cap: usize,
}

impl Default for Doubling {
    fn default() -> Self {
        Self { tol: 1e-10, start: DEFAULT_START_NODES, cap: DEFAULT_NODE_CAP }
    }
}

/// ∫_a^b f with node doubling until successive estimates agree within `tol`.
pub fn integrate<F>(f: F, dim: usize, a: f64, b: f64, breakpoints: &[f64], cfg: Doubling) -> Result<Integral, Error>
where
    F: Fn(f64) -> Result<Vec<f64>, Error>,
{
    let eval = |nodes: usize| -> Result<Vec<f64>, Error> {
        let rule = composite_rule(a, b, nodes, breakpoints);
        let mut samples = Vec::with_capacity(rule.len());
        for &(x, _) in &rule {
            samples.push(f(x)?);
        }
        let w: Vec<f64> = rule.iter().map(|r| r.1).collect();
        Ok(weighted_pairwise(&samples, &w, dim))
    };
    let mut nodes = cfg.start.max(PANEL_ORDER);
    let mut prev = eval(nodes)?;
    loop {
        let next_nodes = nodes * 2;
        let cur = eval(next_nodes)?;
        let err = prev.iter().zip(&cur).map(|(p, c)| (p - c).abs()).fold(0.0, f64::max);
        if err < cfg.tol {
            return Ok(Integral { value: cur, nodes: next_nodes, error_estimate: err });
        }
        if next_nodes >= cfg.cap {
            return Err(Error::Quadrature { estimate: cur.first().copied().unwrap_or(f64::NAN), bound: err, nodes: next_nodes });
        }
        prev = cur;
        nodes = next_nodes;
    }
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)].into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integral_with_kink() {
        let f = |x: f64| Ok(vec![(x - 0.3).abs(), x.cos()]);
        let r = integrate(f, 2, 0.0, 1.0, &[0.3], Doubling::default()).unwrap();
        assert!((r.value[0] - (0.045 + 0.245)).abs() < 1e-12);
        assert!((r.value[1] - 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn golden_section_finds_vertex() {
        let (x, _) = golden_min(|x| (x - 0.7).powi(2), 0.0, 2.0, 1e-9);
        assert!((x - 0.7).abs() < 1e-8);
    }

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }
}
