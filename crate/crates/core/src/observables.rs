//! Magnetization and nearest-neighbour correlator operators in the momentum
//! blocks, block states, and their aggregation over momenta.
//!
//! The operators are built from second-quantized bilinears so that the sign
//! conventions follow from the Fock representation rather than a table.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::finite_chain;
use crate::fock::FockSpace;
use crate::linalg::{c, cr, hermitian_eig, CMatrix};
use crate::momentum::{
    build_blocks, critical_breakpoints, grid_angles, split_blocks, Grid, PairBasis, SectorOp, Size, A_M, A_P,
    B_M, B_P,
};
use crate::params::{SystemParams, Temperature};
use crate::quadrature::{composite_rule, integrate, pairwise_sum, weighted_pairwise, Doubling, PANEL_ORDER};
use crate::Error;

/// Number of independently computed two-point quantities:
/// `[m_e, m_o, c_xx, c_yy, c_xy, c_yx]`.
pub const TWO_POINT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorrelatorKind {
    XX,
    YY,
    XY,
    YX,
}

impl CorrelatorKind {
    pub const ALL: [CorrelatorKind; 4] = [Self::XX, Self::YY, Self::XY, Self::YX];

    fn slot(self) -> usize {
        match self {
            Self::XX => 2,
            Self::YY => 3,
            Self::XY => 4,
            Self::YX => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sublattice {
    Even,
    Odd,
}

/// Any single observable of the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Magnetization(Sublattice),
    Correlator(CorrelatorKind),
}

impl Observable {
    fn slot(self) -> usize {
        match self {
            Self::Magnetization(Sublattice::Even) => 0,
            Self::Magnetization(Sublattice::Odd) => 1,
            Self::Correlator(k) => k.slot(),
        }
    }
}

/// Single-site magnetizations and nearest-neighbour correlators of an
/// even–odd pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableSet {
    pub m_e: f64,
    pub m_o: f64,
    pub c_xx: f64,
    pub c_yy: f64,
    pub c_zz: f64,
    pub c_xy: f64,
    pub c_yx: f64,
}

impl ObservableSet {
    pub const ZERO: ObservableSet =
        ObservableSet { m_e: 0.0, m_o: 0.0, c_xx: 0.0, c_yy: 0.0, c_zz: 0.0, c_xy: 0.0, c_yx: 0.0 };

    /// Completes the set with c_zz = m_e·m_o − c_xx·c_yy + c_xy·c_yx.
    pub fn from_two_point(v: [f64; TWO_POINT]) -> Self {
        let [m_e, m_o, c_xx, c_yy, c_xy, c_yx] = v;
        ObservableSet { m_e, m_o, c_xx, c_yy, c_zz: m_e * m_o - c_xx * c_yy + c_xy * c_yx, c_xy, c_yx }
    }

    /// Equilibrium form: off-diagonal correlators vanish by symmetry and are
    /// set to exactly zero.
    pub fn equilibrium(v: [f64; TWO_POINT]) -> Self {
        Self::from_two_point([v[0], v[1], v[2], v[3], 0.0, 0.0])
    }

    /// `[m_e, m_o, c_xx, c_yy, c_zz, c_xy, c_yx]`.
    pub fn to_array(&self) -> [f64; 7] {
        [self.m_e, self.m_o, self.c_xx, self.c_yy, self.c_zz, self.c_xy, self.c_yx]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        ObservableSet { m_e: a[0], m_o: a[1], c_xx: a[2], c_yy: a[3], c_zz: a[4], c_xy: a[5], c_yx: a[6] }
    }

    pub fn max_abs_diff(&self, other: &ObservableSet) -> f64 {
        self.to_array().iter().zip(other.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some(v) = self.to_array().iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-9) {
            return Err(Error::InvalidState(format!("observable {v} outside [-1, 1]")));
        }
        Ok(())
    }
}

/// A momentum sector: a (p, −p) pair or one of the unpaired modes φ = 0, π/2
/// that exist for the periodic-sector finite chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sector {
    Pair(f64),
    Zero,
    HalfPi,
}

/// O(φ) = e^{iφ}·plus + e^{−iφ}·minus.
#[derive(Clone, Debug)]
struct PhasedOp {
    plus: SectorOp,
    minus: SectorOp,
}

struct OperatorTable {
    pair_mag: [SectorOp; 2],
    pair_corr: [PhasedOp; 4],
    unpaired: [[SectorOp; TWO_POINT]; 2],
}

/// Combines the four bond bilinears (c†_e c†_o, c†_e c_o, c†_o c_e, c_o c_e)
/// into the four spin correlators.
fn combine<T: Clone>(
    bil: &[T; 4],
    lin: impl Fn(&[(C64, &T)]) -> T,
) -> [T; 4] {
    let [ed_od, ed_o, od_e, o_e] = bil;
    let (one, mone, mi, i) = (cr(1.0), cr(-1.0), c(0.0, -1.0), c(0.0, 1.0));
    [
        lin(&[(one, ed_od), (one, ed_o), (one, od_e), (one, o_e)]),
        lin(&[(mone, ed_od), (one, ed_o), (one, od_e), (mone, o_e)]),
        lin(&[(mi, ed_od), (i, ed_o), (mi, od_e), (i, o_e)]),
        lin(&[(mi, ed_od), (mi, ed_o), (i, od_e), (i, o_e)]),
    ]
}

fn lin_matrix(terms: &[(C64, &CMatrix)]) -> CMatrix {
    let mut acc = CMatrix::zeros(terms[0].1.rows(), terms[0].1.cols());
    for (s, m) in terms {
        acc = &acc + &m.scale(*s);
    }
    acc
}

/// Basis of an unpaired mode: even block {|0⟩, a†b†|0⟩}, odd block {a†|0⟩, b†|0⟩}.
fn unpaired_basis(f: &FockSpace) -> CMatrix {
    let cols = [f.state(&[]), f.state(&[0, 1]), f.state(&[0]), f.state(&[1])];
    CMatrix::from_fn(4, 4, |i, j| cols[j][i])
}

fn unpaired_sector(f: &FockSpace, op: &CMatrix) -> SectorOp {
    let u = unpaired_basis(f);
    split_blocks(&(&(&u.adjoint() * op) * &u), &[2, 2])
}

fn table() -> &'static OperatorTable {
    static TABLE: OnceLock<OperatorTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let basis = PairBasis::get();
        let f = &basis.fock;
        let cd = |m| f.create(m);
        let a = |m: usize| f.annihilate(m).clone();
        let id = f.identity();
        let mag = |x: usize, y: usize| {
            basis.to_sector(&(&(&f.number(x) + &f.number(y)) - &id).scale_real(2.0))
        };
        // (e^{iφ} part, e^{−iφ} part) of each bilinear summed over k = ±φ.
        let bil: [(CMatrix, CMatrix); 4] = [
            (&cd(B_M) * &cd(A_P), &cd(B_P) * &cd(A_M)),
            (&cd(B_M) * &a(A_M), &cd(B_P) * &a(A_P)),
            (&cd(A_P) * &a(B_P), &cd(A_M) * &a(B_M)),
            (&a(A_M) * &a(B_P), &a(A_P) * &a(B_M)),
        ];
        let plus: [CMatrix; 4] = bil.clone().map(|b| b.0);
        let minus: [CMatrix; 4] = bil.map(|b| b.1);
        let cp = combine(&plus, lin_matrix);
        let cm = combine(&minus, lin_matrix);
        let pair_corr = [0, 1, 2, 3].map(|k| PhasedOp { plus: basis.to_sector(&cp[k]), minus: basis.to_sector(&cm[k]) });

        let f2 = FockSpace::new(2);
        let (ua, ub) = (f2.annihilate(0).clone(), f2.annihilate(1).clone());
        let (uad, ubd) = (f2.create(0), f2.create(1));
        let id2 = f2.identity();
        let unpaired_ops = |phase: C64, sign: f64| -> [SectorOp; TWO_POINT] {
            let amk = ua.scale_real(sign);
            let amk_d = uad.scale_real(sign);
            let bil = [
                (&ubd * &amk_d).scale(phase),
                (&ubd * &ua).scale(phase),
                (&uad * &ub).scale(phase.conj()),
                (&amk * &ub).scale(phase.conj()),
            ];
            let corr = combine(&bil, lin_matrix);
            let me = (&f2.number(1).scale_real(2.0)) - &id2;
            let mo = (&f2.number(0).scale_real(2.0)) - &id2;
            [me, mo, corr[0].clone(), corr[1].clone(), corr[2].clone(), corr[3].clone()]
                .map(|m| unpaired_sector(&f2, &m))
        };
        OperatorTable {
            pair_mag: [mag(B_P, B_M), mag(A_P, A_M)],
            pair_corr,
            unpaired: [unpaired_ops(cr(1.0), 1.0), unpaired_ops(c(0.0, -1.0), -1.0)],
        }
    })
}

fn phased(op: &PhasedOp, phi: f64) -> SectorOp {
    let (ep, em) = (C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi));
    SectorOp {
        blocks: op
            .plus
            .blocks
            .iter()
            .zip(&op.minus.blocks)
            .map(|(p, m)| &p.scale(ep) + &m.scale(em))
            .collect(),
    }
}

/// 2(n_{b,p} + n_{b,−p} − 1) (even) or the same with `a` (odd), in block form.
pub fn magnetization_operator(sublattice: Sublattice) -> SectorOp {
    let t = table();
    match sublattice {
        Sublattice::Even => t.pair_mag[0].clone(),
        Sublattice::Odd => t.pair_mag[1].clone(),
    }
}

/// Pair correlator operator at angle φ, in block form.
pub fn correlator_operator(kind: CorrelatorKind, phi: f64) -> SectorOp {
    phased(&table().pair_corr[kind.slot() - 2], phi)
}

/// All six two-point operators of a sector.
pub fn sector_operators(sector: Sector) -> [SectorOp; TWO_POINT] {
    let t = table();
    match sector {
        Sector::Pair(phi) => [
            t.pair_mag[0].clone(),
            t.pair_mag[1].clone(),
            phased(&t.pair_corr[0], phi),
            phased(&t.pair_corr[1], phi),
            phased(&t.pair_corr[2], phi),
            phased(&t.pair_corr[3], phi),
        ],
        Sector::Zero => t.unpaired[0].clone(),
        Sector::HalfPi => t.unpaired[1].clone(),
    }
}

/// Tr[O ρ] for the six operators; `rho` need not be normalized.
pub fn two_point(sector: Sector, rho: &SectorOp) -> [f64; TWO_POINT] {
    let t = table();
    match sector {
        Sector::Pair(phi) => {
            let (ep, em) = (C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi));
            let mut out = [0.0; TWO_POINT];
            out[0] = t.pair_mag[0].trace_product(rho).re;
            out[1] = t.pair_mag[1].trace_product(rho).re;
            for k in 0..4 {
                let op = &t.pair_corr[k];
                out[k + 2] = (ep * op.plus.trace_product(rho) + em * op.minus.trace_product(rho)).re;
            }
            out
        }
        Sector::Zero | Sector::HalfPi => {
            let ops = &t.unpaired[usize::from(sector == Sector::HalfPi)];
            std::array::from_fn(|k| ops[k].trace_product(rho).re)
        }
    }
}

/// Hamiltonian of a sector in block form.
pub fn sector_hamiltonian(params: &SystemParams, sector: Sector) -> SectorOp {
    match sector {
        Sector::Pair(phi) => build_blocks(params, phi).sector(),
        Sector::Zero | Sector::HalfPi => {
            let f = FockSpace::new(2);
            let (a, b) = (f.annihilate(0), f.annihilate(1));
            let (ad, bd) = (f.create(0), f.create(1));
            let j = params.j;
            let kinetic = if sector == Sector::Zero {
                (&(&ad * b) + &(&bd * a)).scale_real(j)
            } else {
                let t = (&ad * &bd).scale(c(0.0, -j * params.gamma));
                &t + &t.adjoint()
            };
            let mut h = &kinetic + &f.number(0).scale_real(params.h_minus());
            h = &h + &f.number(1).scale_real(params.h_plus());
            h = &h - &f.identity().scale_real(params.h1());
            unpaired_sector(&f, &h)
        }
    }
}

/// Degeneracy window for the zero-temperature ground manifold.
pub fn ground_tolerance(scale: f64) -> f64 {
    1e-10 * scale.max(1.0)
}

/// Normalized equilibrium state of a block-diagonal Hamiltonian: shifted
/// Boltzmann weights, or the equal-weight projector onto the ground manifold.
pub fn block_state(h: &SectorOp, temp: Temperature) -> Result<SectorOp, Error> {
    let eigs = h.blocks.iter().map(hermitian_eig).collect::<Result<Vec<_>, _>>()?;
    let emin = eigs.iter().map(|e| e.values[0]).fold(f64::INFINITY, f64::min);
    let scale = eigs.iter().flat_map(|e| e.values.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let weight = |e: f64| match temp {
        Temperature::Zero => {
            if e - emin <= ground_tolerance(scale) {
                1.0
            } else {
                0.0
            }
        }
        Temperature::Beta(b) => (-b * (e - emin)).exp(),
    };
    let z: f64 = eigs.iter().flat_map(|e| e.values.iter()).map(|&e| weight(e)).sum();
    Ok(SectorOp { blocks: eigs.iter().map(|e| e.map(|x| cr(weight(x) / z))).collect() })
}

/// Equilibrium block state of a momentum pair.
pub fn ces_block_state(params: &SystemParams, temp: Temperature, phi: f64) -> Result<SectorOp, Error> {
    block_state(&build_blocks(params, phi).sector(), temp)
}

/// Conjugates each block by exp(−i H t).
pub fn evolve_blocks(rho: &SectorOp, h: &SectorOp, t: f64) -> Result<SectorOp, Error> {
    let mut blocks = Vec::with_capacity(rho.blocks.len());
    for (r, hb) in rho.blocks.iter().zip(&h.blocks) {
        let u = hermitian_eig(hb)?.map(|x| C64::from_polar(1.0, -x * t));
        blocks.push(&(&u * r) * &u.adjoint());
    }
    Ok(SectorOp { blocks })
}

/// Post-quench evolution: fields switched to those of `post` at t = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quench {
    pub post: SystemParams,
    pub t: f64,
}

/// How the state of every sector is prepared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Protocol {
    pub temp: Temperature,
    pub quench: Option<Quench>,
}

impl Protocol {
    pub fn equilibrium(temp: Temperature) -> Self {
        Self { temp, quench: None }
    }
}

/// Normalized state of one sector under a protocol.
pub fn sector_state(params: &SystemParams, protocol: &Protocol, sector: Sector) -> Result<SectorOp, Error> {
    let rho = block_state(&sector_hamiltonian(params, sector), protocol.temp)?;
    match protocol.quench {
        None => Ok(rho),
        Some(q) => evolve_blocks(&rho, &sector_hamiltonian(&q.post, sector), q.t),
    }
}

fn infinite_temperature(protocol: &Protocol) -> bool {
    protocol.temp == Temperature::Beta(0.0)
}

/// Momentum-averaged two-point quantities for any size and protocol.
pub fn aggregate_two_point(params: &SystemParams, protocol: &Protocol, size: Size) -> Result<[f64; TWO_POINT], Error> {
    if infinite_temperature(protocol) {
        return Ok([0.0; TWO_POINT]);
    }
    match size {
        Size::Thermodynamic => {
            let f = |phi: f64| -> Result<Vec<f64>, Error> {
                let rho = sector_state(params, protocol, Sector::Pair(phi))?;
                Ok(two_point(Sector::Pair(phi), &rho).iter().map(|v| v / PI).collect())
            };
            let r = integrate(f, TWO_POINT, 0.0, FRAC_PI_2, &critical_breakpoints(params), Doubling::default())?;
            Ok(std::array::from_fn(|k| r.value[k]))
        }
        Size::Finite { n, grid: Grid::Exact } => finite_chain::exact_two_point(params, protocol, n),
        Size::Finite { n, grid } => {
            Size::finite(n, grid)?;
            let w = 2.0 / n as f64;
            let mut samples = Vec::with_capacity(n / 4);
            for phi in grid_angles(n, grid) {
                let rho = sector_state(params, protocol, Sector::Pair(phi))?;
                samples.push(two_point(Sector::Pair(phi), &rho));
            }
            Ok(std::array::from_fn(|k| {
                let col: Vec<f64> = samples.iter().map(|s| s[k] * w).collect();
                pairwise_sum(&col)
            }))
        }
    }
}

/// Equilibrium expectation of one observable.
pub fn thermal_expectation(obs: Observable, params: &SystemParams, temp: Temperature, size: Size) -> Result<f64, Error> {
    Ok(aggregate_two_point(params, &Protocol::equilibrium(temp), size)?[obs.slot()])
}

/// Equilibrium observable set; c_zz from the Wick closure except on the
/// exact finite-chain ensemble, which is not Gaussian and carries its own.
pub fn ces_observables(params: &SystemParams, temp: Temperature, size: Size) -> Result<ObservableSet, Error> {
    protocol_observables(params, &Protocol::equilibrium(temp), size)
}

/// Observable set under a general protocol (equilibrium or post-quench).
pub fn protocol_observables(params: &SystemParams, protocol: &Protocol, size: Size) -> Result<ObservableSet, Error> {
    if let Size::Finite { n, grid: Grid::Exact } = size {
        if !infinite_temperature(protocol) {
            let obs = ObservableSet::from_array(finite_chain::exact_observables(params, protocol, n)?);
            obs.validate()?;
            return Ok(obs);
        }
    }
    let v = aggregate_two_point(params, protocol, size)?;
    let obs = match protocol.quench {
        None => ObservableSet::equilibrium(v),
        Some(_) => ObservableSet::from_two_point(v),
    };
    obs.validate()?;
    Ok(obs)
}

/// Energy and two-point contribution of one eigenstate of a pair sector.
type Level = (f64, [f64; TWO_POINT]);

/// Equilibrium two-point functions of the thermodynamic limit at many
/// temperatures. Block eigensystems on the quadrature nodes are computed once;
/// only the Boltzmann weights depend on β. The rules match the first two
/// doubling stages of the adaptive integral, which is used instead whenever
/// they disagree.
pub struct ThermalCurve {
    params: SystemParams,
    rules: [Vec<(f64, Vec<Level>)>; 2],
}

impl ThermalCurve {
    pub fn new(params: &SystemParams) -> Result<Self, Error> {
        params.validate()?;
        let breakpoints = critical_breakpoints(params);
        let build = |nodes: usize| -> Result<Vec<(f64, Vec<Level>)>, Error> {
            composite_rule(0.0, FRAC_PI_2, nodes, &breakpoints)
                .into_iter()
                .map(|(phi, w)| {
                    let h = sector_hamiltonian(params, Sector::Pair(phi));
                    let mut levels = Vec::with_capacity(h.dim());
                    for (b, block) in h.blocks.iter().enumerate() {
                        let e = hermitian_eig(block)?;
                        for k in 0..e.dim() {
                            let mut fv = vec![cr(0.0); e.dim()];
                            fv[k] = cr(1.0);
                            let mut blocks: Vec<CMatrix> =
                                h.blocks.iter().map(|m| CMatrix::zeros(m.rows(), m.cols())).collect();
                            blocks[b] = e.map_values(&fv);
                            levels.push((e.values[k], two_point(Sector::Pair(phi), &SectorOp { blocks })));
                        }
                    }
                    Ok((w, levels))
                })
                .collect()
        };
        let start = Doubling::default().start.max(PANEL_ORDER);
        Ok(ThermalCurve { params: *params, rules: [build(start)?, build(2 * start)?] })
    }

    fn integrate_rule(rule: &[(f64, Vec<Level>)], beta: f64) -> Vec<f64> {
        let samples: Vec<Vec<f64>> = rule
            .iter()
            .map(|(_, levels)| {
                let emin = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
                let w: Vec<f64> = levels.iter().map(|l| (-beta * (l.0 - emin)).exp()).collect();
                let z: f64 = w.iter().sum();
                (0..TWO_POINT)
                    .map(|c| levels.iter().zip(&w).map(|(l, wk)| wk * l.1[c]).sum::<f64>() / z / PI)
                    .collect()
            })
            .collect();
        let weights: Vec<f64> = rule.iter().map(|r| r.0).collect();
        weighted_pairwise(&samples, &weights, TWO_POINT)
    }

    pub fn two_point(&self, temp: Temperature) -> Result<[f64; TWO_POINT], Error> {
        if let Temperature::Beta(beta) = temp {
            if beta > 0.0 && beta.is_finite() {
                let coarse = Self::integrate_rule(&self.rules[0], beta);
                let fine = Self::integrate_rule(&self.rules[1], beta);
                let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if err < Doubling::default().tol {
                    return Ok(std::array::from_fn(|k| fine[k]));
                }
            }
        }
        aggregate_two_point(&self.params, &Protocol::equilibrium(temp), Size::Thermodynamic)
    }

    pub fn observables(&self, temp: Temperature) -> Result<ObservableSet, Error> {
        let obs = ObservableSet::equilibrium(self.two_point(temp)?);
        obs.validate()?;
        Ok(obs)
    }
}

/// Correlator blocks as tabulated in the closed-form literature, for the
/// self-check against the derived operators. Blocks 2–4 only; block 1 is null.
pub fn tabulated_correlator_blocks(kind: CorrelatorKind, phi: f64) -> SectorOp {
    let e = C64::from_polar(1.0, phi);
    let ei = e.conj();
    let z = cr(0.0);
    let mi = c(0.0, -1.0);
    let rows = |r: Vec<Vec<C64>>, s: C64| CMatrix::from_rows(&r).scale(s);
    let one = cr(1.0);
    let (b2, b3, b4) = match kind {
        CorrelatorKind::XX => (
            rows(vec![vec![z, e, -e, z], vec![ei, z, z, ei], vec![-ei, z, z, -ei], vec![z, e, -e, z]], one),
            rows(vec![vec![z, ei, ei, z], vec![e, z, z, -e], vec![e, z, z, -e], vec![z, -ei, -ei, z]], one),
            rows(
                vec![
                    vec![z, -ei, -e, z, z, z],
                    vec![-e, z, z, e, e, -e],
                    vec![-ei, z, z, -ei, -ei, -ei],
                    vec![z, ei, -e, z, z, z],
                    vec![z, ei, -e, z, z, z],
                    vec![z, -ei, -e, z, z, z],
                ],
                one,
            ),
        ),
        CorrelatorKind::YY => (
            rows(vec![vec![z, e, e, z], vec![ei, z, z, -ei], vec![ei, z, z, -ei], vec![z, -e, -e, z]], one),
            rows(vec![vec![z, ei, -ei, z], vec![e, z, z, e], vec![-e, z, z, -e], vec![z, ei, -ei, z]], one),
            rows(
                vec![
                    vec![z, ei, e, z, z, z],
                    vec![e, z, z, e, e, -e],
                    vec![ei, z, z, -ei, -ei, ei],
                    vec![z, ei, -e, z, z, z],
                    vec![z, ei, -e, z, z, z],
                    vec![z, ei, e, z, z, z],
                ],
                one,
            ),
        ),
        CorrelatorKind::XY => (
            rows(vec![vec![z, ei, -ei, z], vec![-e, z, z, e], vec![e, z, z, -e], vec![z, -ei, ei, z]], mi),
            rows(vec![vec![z, ei, -ei, z], vec![e, z, z, e], vec![-e, z, z, -e], vec![z, ei, -ei, z]], mi),
            rows(
                vec![
                    vec![z, ei, e, z, z, z],
                    vec![-e, z, z, -e, e, e],
                    vec![-ei, z, z, ei, -ei, ei],
                    vec![z, ei, -e, z, z, z],
                    vec![z, -ei, e, z, z, z],
                    vec![z, -ei, -e, z, z, z],
                ],
                mi,
            ),
        ),
        CorrelatorKind::YX => (
            rows(vec![vec![z, -ei, -ei, z], vec![e, z, z, e], vec![e, z, z, e], vec![z, -ei, -ei, z]], mi),
            rows(vec![vec![z, -e, e, z], vec![ei, z, z, -ei], vec![-ei, z, z, ei], vec![z, e, -e, z]], mi),
            rows(
                vec![
                    vec![z, ei, e, z, z, z],
                    vec![-e, z, z, e, -e, e],
                    vec![-ei, z, z, -ei, ei, ei],
                    vec![z, -ei, e, z, z, z],
                    vec![z, ei, -e, z, z, z],
                    vec![z, -ei, -e, z, z, z],
                ],
                mi,
            ),
        ),
    };
    SectorOp { blocks: vec![CMatrix::zeros(2, 2), b2, b3, b4] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, l1: f64, l2: f64) -> SystemParams {
        SystemParams::unit(g, l1, l2).unwrap()
    }

    #[test]
    fn thermal_curve_matches_adaptive_integral() {
        for q in [p(0.8, 0.3, -0.6), p(0.5, 1.0, 0.0), p(1.0, -0.2, 1.4)] {
            let curve = ThermalCurve::new(&q).unwrap();
            for temp in [Temperature::Beta(0.3), Temperature::Beta(5.0), Temperature::Beta(200.0), Temperature::Zero] {
                let a = curve.observables(temp).unwrap();
                let b = ces_observables(&q, temp, Size::Thermodynamic).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-13, "{q:?} {temp:?}");
            }
        }
    }

    #[test]
    fn exact_lattice_keeps_its_own_zz() {
        let q = p(0.8, 0.5, 0.3);
        let size = Size::finite(8, Grid::Exact).unwrap();
        let obs = ces_observables(&q, Temperature::Beta(2.0), size).unwrap();
        let direct = finite_chain::exact_observables(&q, &Protocol::equilibrium(Temperature::Beta(2.0)), 8).unwrap();
        assert_eq!(obs.to_array(), direct);
    }

    #[test]
    fn magnetization_on_basis_states() {
        let me = magnetization_operator(Sublattice::Even).full();
        let mo = magnetization_operator(Sublattice::Odd).full();
        // vacuum is the first state of block 4 (index 10), full occupation the last
        assert_eq!(me[(10, 10)], cr(-2.0));
        assert_eq!(me[(15, 15)], cr(2.0));
        assert_eq!(mo[(15, 15)], cr(2.0));
        // a†_p|0⟩ is the first state of block 2 (index 2)
        assert_eq!(mo[(2, 2)], cr(0.0));
        let diag_only = (0..16).all(|i| (0..16).all(|j| i == j || me[(i, j)].norm() == 0.0));
        assert!(diag_only);
    }

    #[test]
    fn correlators_hermitian_and_null_first_block() {
        for kind in CorrelatorKind::ALL {
            let op = correlator_operator(kind, 0.83);
            assert!(op.blocks[0].max_abs() == 0.0);
            assert!(op.full().is_hermitian(1e-12));
        }
        let xx = correlator_operator(CorrelatorKind::XX, 0.0);
        assert!(xx.blocks[1].data().iter().all(|v| v.im == 0.0 && (v.re.abs() == 1.0 || v.re == 0.0)));
    }

    #[test]
    fn xx_matches_tabulated_blocks() {
        let phi = 0.37;
        let derived = correlator_operator(CorrelatorKind::XX, phi);
        let tab = tabulated_correlator_blocks(CorrelatorKind::XX, phi);
        for k in 1..4 {
            assert!(derived.blocks[k].max_abs_diff(&tab.blocks[k]) < 1e-14, "block {k}");
        }
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let rho = ces_block_state(&p(0.8, 0.4, 0.2), Temperature::Beta(0.0), 0.5).unwrap();
        assert!(rho.full().max_abs_diff(&CMatrix::identity(16).scale_real(1.0 / 16.0)) < 1e-15);
        let o = ces_observables(&p(0.8, 0.4, 0.2), Temperature::Beta(0.0), Size::Thermodynamic).unwrap();
        assert_eq!(o, ObservableSet::ZERO);
    }

    #[test]
    fn deep_field_aligns_against_field() {
        let o = ces_observables(&p(0.8, 50.0, 0.0), Temperature::Beta(100.0), Size::Thermodynamic).unwrap();
        assert!((o.m_e + 1.0).abs() < 1e-3 && (o.m_o + 1.0).abs() < 1e-3);
    }

    #[test]
    fn expectations_are_real() {
        let params = p(0.6, -0.3, 0.7);
        let rho = ces_block_state(&params, Temperature::Beta(1.3), 0.9).unwrap();
        for kind in CorrelatorKind::ALL {
            let v = correlator_operator(kind, 0.9).trace_product(&rho);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn large_beta_approaches_ground_projector() {
        let params = p(0.8, 1.4, 0.3);
        let a = ces_block_state(&params, Temperature::Zero, 0.6).unwrap().full();
        let b = ces_block_state(&params, Temperature::Beta(1e6), 0.6).unwrap().full();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }
}
