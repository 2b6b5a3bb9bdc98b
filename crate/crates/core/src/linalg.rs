//! Dense complex linear algebra for the small Hermitian matrices that carry
//! every operator and state in this crate.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Eigenvalues below this magnitude are treated as exact zeros when they
/// enter entropies and negativities.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Default Hermiticity tolerance for inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest dimension handled by the in-house Jacobi sweep.
const JACOBI_MAX_DIM: usize = 16;
const JACOBI_MAX_SWEEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("function undefined at eigenvalue {0}")]
    Undefined(f64),
    #[error("negative eigenvalue {0:.3e} in a density matrix")]
    NegativeEigenvalue(f64),
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square matrix from nested rows; panics on ragged input (test and table helper).
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self { rows: n, cols: m, data: rows.concat() }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn kron(&self, other: &CMatrix) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation |M_ij − conj(M_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Copy of the principal sub-block starting at `offset` with size `n`.
    pub fn sub_block(&self, offset: usize, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| self[(offset + i, offset + j)])
    }

    /// Block-diagonal matrix from square blocks.
    pub fn block_diag(blocks: &[CMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Hermitian part ½(M + M†); used to wash out rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigendecomposition M = V·diag(values)·V† with ascending values.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V·diag(f(values))·V†.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        self.map_values(&fv)
    }

    /// V·diag(fv)·V† for precomputed per-eigenvalue weights.
    pub fn map_values(&self, fv: &[C64]) -> CMatrix {
        let n = self.dim();
        assert_eq!(fv.len(), n);
        let v = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * fv[k];
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| C64::new(x, 0.0))
    }

    /// V† O V: an operator written in the eigenbasis.
    pub fn to_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        &(&self.vectors.adjoint() * op) * &self.vectors
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Cyclic complex Jacobi up to dimension 16; Householder tridiagonalization
/// with implicit shifted QR (nalgebra) above that.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Dimension(format!("{}x{} is not square", m.rows, m.cols)));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(LinalgError::NotHermitian(defect));
    }
    let n = m.rows;
    let (values, vectors) =
        if n <= JACOBI_MAX_DIM { jacobi(m)? } else { tridiagonal_qr(m)? };
    Ok(sorted(values, vectors))
}

fn sorted(values: Vec<f64>, vectors: CMatrix) -> HermitianEigen {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = idx.iter().map(|&k| values[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| vectors[(i, idx[j])]);
    HermitianEigen { values: vals, vectors: vecs }
}

fn jacobi(m: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm();
    if total == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * total {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r < 1e-19 * total {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence(JACOBI_MAX_SWEEPS))
}

fn tridiagonal_qr(m: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    let n = m.rows;
    let dm = DMatrix::from_row_slice(n, n, &m.hermitian_part().data);
    let eig = nalgebra::SymmetricEigen::try_new(dm, f64::EPSILON, 0)
        .ok_or(LinalgError::NoConvergence(0))?;
    let values = eig.eigenvalues.iter().copied().collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, j)]);
    Ok((values, vectors))
}

/// Eigendecomposition of a real symmetric matrix given row-major.
pub fn real_symmetric_eig(n: usize, data: &[f64]) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    if data.len() != n * n {
        return Err(LinalgError::Dimension(format!("{} entries for {n}x{n}", data.len())));
    }
    let dm = DMatrix::from_row_slice(n, n, data);
    let eig = nalgebra::SymmetricEigen::try_new(dm, f64::EPSILON, 0)
        .ok_or(LinalgError::NoConvergence(0))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    // column-major output: vector k occupies [k*n, (k+1)*n)
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &idx {
        vectors.extend((0..n).map(|i| eig.eigenvectors[(i, k)]));
    }
    Ok((values, vectors))
}

/// V·diag(f(values))·V† for a Hermitian matrix.
pub fn hermitian_matrix_function(
    m: &CMatrix,
    f: impl Fn(f64) -> Option<C64>,
) -> Result<CMatrix, LinalgError> {
    let eig = hermitian_eig(m)?;
    let mut fv = Vec::with_capacity(eig.dim());
    for &x in &eig.values {
        fv.push(f(x).ok_or(LinalgError::Undefined(x))?);
    }
    Ok(eig.map_values(&fv))
}

/// exp(−β(M − λ_min)) together with the shift λ_min; never overflows.
pub fn shifted_exponential(m: &CMatrix, beta: f64) -> Result<(CMatrix, f64), LinalgError> {
    let eig = hermitian_eig(m)?;
    let shift = eig.values[0];
    Ok((eig.map(|x| C64::new((-beta * (x - shift)).exp(), 0.0)), shift))
}

/// exp(−i M t).
pub fn unitary_evolution(m: &CMatrix, t: f64) -> Result<CMatrix, LinalgError> {
    let eig = hermitian_eig(m)?;
    Ok(eig.map(|x| C64::from_polar(1.0, -x * t)))
}

/// Which qubit of an even–odd pair; the even qubit is the first tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    Even,
    Odd,
}

fn check_two_qubit(rho: &CMatrix) -> Result<(), LinalgError> {
    if rho.rows != 4 || rho.cols != 4 {
        return Err(LinalgError::Dimension(format!("expected 4x4, got {}x{}", rho.rows, rho.cols)));
    }
    Ok(())
}

/// Partial transpose of a two-qubit operator on the given party.
pub fn partial_transpose(rho: &CMatrix, party: Party) -> Result<CMatrix, LinalgError> {
    check_two_qubit(rho)?;
    Ok(CMatrix::from_fn(4, 4, |i, j| {
        let (a, b) = (i >> 1, i & 1);
        let (c, d) = (j >> 1, j & 1);
        match party {
            Party::Even => rho[((c << 1) | b, (a << 1) | d)],
            Party::Odd => rho[((a << 1) | d, (c << 1) | b)],
        }
    }))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &CMatrix) -> Result<f64, LinalgError> {
    Ok(hermitian_eig(m)?.values.iter().map(|x| x.abs()).sum())
}

/// Reduced density matrix on `keep` (site 0 is the most significant tensor
/// factor; the output orders kept sites as listed).
pub fn partial_trace(rho: &CMatrix, n_sites: usize, keep: &[usize]) -> Result<CMatrix, LinalgError> {
    if n_sites > 22 {
        return Err(LinalgError::Dimension(format!("{n_sites} sites exceeds 22")));
    }
    let dim = 1usize << n_sites;
    if rho.rows != dim || rho.cols != dim {
        return Err(LinalgError::Dimension(format!("{}x{} is not 2^{n_sites}", rho.rows, rho.cols)));
    }
    let mut seen = vec![false; n_sites];
    for &s in keep {
        if s >= n_sites || seen[s] {
            return Err(LinalgError::Dimension(format!("bad kept site {s}")));
        }
        seen[s] = true;
    }
    let traced: Vec<usize> = (0..n_sites).filter(|s| !seen[*s]).collect();
    let bit = |s: usize| n_sites - 1 - s;
    let compose = |kept_idx: usize, env_idx: usize| -> usize {
        let mut full = 0usize;
        for (k, &s) in keep.iter().enumerate() {
            if (kept_idx >> (keep.len() - 1 - k)) & 1 == 1 {
                full |= 1 << bit(s);
            }
        }
        for (k, &s) in traced.iter().enumerate() {
            if (env_idx >> k) & 1 == 1 {
                full |= 1 << bit(s);
            }
        }
        full
    };
    let dk = 1usize << keep.len();
    let de = 1usize << traced.len();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..de {
                acc += rho[(compose(i, e), compose(j, e))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Shannon entropy in bits of a probability list, ignoring entries below the floor.
pub fn shannon_bits(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > EIGEN_FLOOR).map(|x| -x * x.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64, LinalgError> {
    let eig = hermitian_eig(rho)?;
    if let Some(&neg) = eig.values.iter().find(|&&x| x < -1e-8) {
        return Err(LinalgError::NegativeEigenvalue(neg));
    }
    Ok(shannon_bits(eig.values.iter().copied()))
}

/// Closed-form entropy of a 2×2 Hermitian unit-trace matrix (fast path for
/// the discord optimizer).
pub fn qubit_entropy(a: f64, d: f64, b: C64) -> f64 {
    let tr = a + d;
    if tr <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * tr;
    let r = ((0.5 * (a - d)).powi(2) + b.norm_sqr()).sqrt();
    shannon_bits([(half + r) / tr, (half - r) / tr])
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Pauli matrices in the {|0⟩, |1⟩} basis with σᶻ|0⟩ = +|0⟩.
pub fn pauli(which: char) -> CMatrix {
    let z = cr(0.0);
    let o = cr(1.0);
    match which {
        'i' => CMatrix::identity(2),
        'x' => CMatrix::from_rows(&[vec![z, o], vec![o, z]]),
        'y' => CMatrix::from_rows(&[vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]]),
        'z' => CMatrix::from_rows(&[vec![o, z], vec![z, -o]]),
        _ => panic!("unknown Pauli label {which}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> CMatrix {
        let mut r = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            r[(i, j)] = cr(0.5);
        }
        r
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }

    #[test]
    fn diagonal_sorted() {
        let e = hermitian_eig(&CMatrix::from_real_diag(&[3.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 3.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(0.0), cr(0.0)]]);
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = CMatrix::from_rows(&[vec![cr(1.0), c(0.0, 1.0)], vec![c(0.0, -1.0), cr(1.0)]]);
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0]).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn ground_projector_limit() {
        let m = CMatrix::from_real_diag(&[0.0, 1.0]);
        let (w, shift) = shifted_exponential(&m, 1e6).unwrap();
        assert_eq!(shift, 0.0);
        let z = w.trace().re;
        assert!((w[(0, 0)].re / z - 1.0).abs() < 1e-15 && w[(1, 1)].re == 0.0);
    }

    #[test]
    fn identity_function_round_trip() {
        let m = CMatrix::from_rows(&[
            vec![cr(2.0), c(0.3, 0.1), cr(0.0)],
            vec![c(0.3, -0.1), cr(-1.0), c(0.0, 0.5)],
            vec![cr(0.0), c(0.0, -0.5), cr(0.5)],
        ]);
        let f = hermitian_matrix_function(&m, |x| Some(cr(x))).unwrap();
        assert!(f.max_abs_diff(&m) < 1e-12);
        let log = hermitian_matrix_function(&m, |x| (x > 0.0).then(|| cr(x.ln())));
        assert!(matches!(log, Err(LinalgError::Undefined(_))));
    }

    #[test]
    fn bell_partial_transpose() {
        let pt = partial_transpose(&bell(), Party::Even).unwrap();
        let e = hermitian_eig(&pt).unwrap();
        assert!((e.values[0] + 0.5).abs() < 1e-14);
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-14);
        let twice = partial_transpose(&pt, Party::Even).unwrap();
        assert!(twice.max_abs_diff(&bell()) < 1e-15);
    }

    #[test]
    fn trace_norm_basics() {
        assert!((trace_norm(&CMatrix::from_real_diag(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-15);
        let mixed = CMatrix::identity(4).scale_real(0.25);
        assert!((trace_norm(&mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(partial_transpose(&mixed, Party::Odd).unwrap().max_abs_diff(&mixed) < 1e-16);
    }

    #[test]
    fn ghz_partial_trace() {
        let mut psi = [cr(0.0); 8];
        psi[0] = cr(0.5f64.sqrt());
        psi[7] = cr(0.5f64.sqrt());
        let rho = CMatrix::from_fn(8, 8, |i, j| psi[i] * psi[j].conj());
        let r = partial_trace(&rho, 3, &[0, 1]).unwrap();
        let want = CMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(r.max_abs_diff(&want) < 1e-15);
        assert!(partial_trace(&rho, 3, &[0, 1, 2]).unwrap().max_abs_diff(&rho) < 1e-16);
    }

    #[test]
    fn product_partial_trace() {
        let a = CMatrix::from_real_diag(&[0.7, 0.3]);
        let b = CMatrix::from_rows(&[vec![cr(0.5), c(0.1, 0.2)], vec![c(0.1, -0.2), cr(0.5)]]);
        let r = partial_trace(&a.kron(&b), 2, &[1]).unwrap();
        assert!(r.max_abs_diff(&b) < 1e-15);
        let r = partial_trace(&a.kron(&b), 2, &[0]).unwrap();
        assert!(r.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn entropies() {
        assert!(von_neumann_entropy(&bell()).unwrap().abs() < 1e-12);
        let s = von_neumann_entropy(&CMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
        let s = von_neumann_entropy(&CMatrix::from_real_diag(&[0.75, 0.25])).unwrap();
        assert!((s - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!((qubit_entropy(0.75, 0.25, cr(0.0)) - s).abs() < 1e-14);
        assert!(von_neumann_entropy(&CMatrix::from_real_diag(&[1.1, -0.1])).is_err());
    }

    #[test]
    fn large_path_matches_jacobi() {
        // 20x20 tridiagonal with known spectrum 2 - 2cos(kπ/21)
        let n = 20;
        let m = CMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => cr(2.0),
            1 => c(0.0, if i < j { -1.0 } else { 1.0 }),
            _ => cr(0.0),
        });
        let e = hermitian_eig(&m).unwrap();
        for (k, v) in e.values.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 21.0).cos();
            assert!((v - want).abs() < 1e-12);
        }
    }
}
