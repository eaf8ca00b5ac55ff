//! Dense complex linear algebra used throughout the crate.
//!
//! [`CMat`] is a thin wrapper over a dynamically sized `nalgebra` matrix of
//! `Complex64`. The factorizations (Schur form, SVD, LU) come from `nalgebra`;
//! this module adds the eigenvector extraction, the ordering and
//! normalization conventions, and the residual checks the rest of the crate
//! relies on.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default scale-relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMat(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMat(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[C64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat(DMatrix::from_row_slice(rows, cols, data)))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let data: Vec<C64> = data.iter().map(|&x| re(x)).collect();
        Self::from_row_slice(rows, cols, &data)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(nrows, ncols, &flat)
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        CMat::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn column(values: &[C64]) -> Self {
        CMat::from_fn(values.len(), 1, |i, _| values[i])
    }

    pub fn row(values: &[C64]) -> Self {
        CMat::from_fn(1, values.len(), |_, j| values[j])
    }

    /// Matrix unit `E_{ij}` (zero-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = CMat::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        CMat(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)]).collect())
            .collect()
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        self.to_rows().into_iter().flatten().collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols())).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> CMat {
        CMat(self.0.adjoint())
    }

    pub fn transpose(&self) -> CMat {
        CMat(self.0.transpose())
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat(self.0.map(|z| z * s))
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat {
        CMat(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &CMat) {
        self.0
            .view_mut((r0, c0), src.shape())
            .copy_from(&src.0);
    }

    pub fn col_vec(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self[(i, j)]).collect()
    }

    pub fn row_vec(&self, i: usize) -> Vec<C64> {
        (0..self.cols()).map(|j| self[(i, j)]).collect()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_exactly_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows())
                .all(|i| (0..self.cols()).all(|j| i == j || self[(i, j)] == ZERO))
    }

    /// Frobenius distance `‖self − other‖`.
    pub fn dist(&self, other: &CMat) -> f64 {
        (self - other).norm_fro()
    }

    pub fn pow(&self, k: usize) -> CMat {
        let mut out = CMat::identity(self.rows());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn inverse(&self) -> Result<CMat> {
        solve(self, &CMat::identity(self.rows()), DEFAULT_TOL)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows() == 0 || self.cols() == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.0.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        s
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl<'a> Add<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat(&self.0 + &rhs.0)
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        CMat(self.0 + rhs.0)
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat(&self.0 - &rhs.0)
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        CMat(self.0 - rhs.0)
    }
}

impl<'a> Mul<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        CMat(&self.0 * &rhs.0)
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        CMat(self.0 * rhs.0)
    }
}

impl Mul<C64> for &CMat {
    type Output = CMat;
    fn mul(self, rhs: C64) -> CMat {
        self.scale(rhs)
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat(-&self.0)
    }
}

fn check_square(m: &CMat, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{what} must be square, got {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}

/// Commutator `AB − BA`.
pub fn comm(a: &CMat, b: &CMat) -> Result<CMat> {
    check_square(a, "commutator operand")?;
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "commutator of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(&(a * b) - &(b * a))
}

/// Trace of the product of `mats[word[0]] · mats[word[1]] · …`.
///
/// An empty word evaluates to the trace of the identity.
pub fn trace_word(mats: &[&CMat], word: &[usize]) -> Result<C64> {
    let n = match mats.first() {
        Some(m) => m.rows(),
        None => return Err(Error::ShapeMismatch("no matrices".into())),
    };
    if mats.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::ShapeMismatch("trace word letters differ in shape".into()));
    }
    let Some((&first, rest)) = word.split_first() else {
        return Ok(re(n as f64));
    };
    let letter = |i: usize| {
        mats.get(i)
            .copied()
            .ok_or_else(|| Error::ShapeMismatch(format!("letter {i} out of range")))
    };
    let mut acc = letter(first)?.clone();
    for &i in rest {
        acc = &acc * letter(i)?;
    }
    Ok(acc.trace())
}

/// Number of singular values above `tol · σ_max`.
pub fn numeric_rank(m: &CMat, tol: f64) -> usize {
    let s = m.singular_values();
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Solves `M X = rhs` by LU with partial pivoting.
pub fn solve(m: &CMat, rhs: &CMat, tol: f64) -> Result<CMat> {
    check_square(m, "system matrix")?;
    if rhs.rows() != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "rhs has {} rows, system has {}",
            rhs.rows(),
            m.rows()
        )));
    }
    let s = m.singular_values();
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 && lo > tol * hi => {}
        (None, None) => return Ok(rhs.clone()),
        _ => return Err(Error::Singular),
    }
    let lu = m.0.clone().lu();
    lu.solve(&rhs.0).map(CMat).ok_or(Error::Singular)
}

/// Minimal-norm least-squares solution of `M x ≈ rhs` together with the
/// residual norm `‖M x − rhs‖`.
pub fn least_squares(m: &CMat, rhs: &CMat, tol: f64) -> Result<(CMat, f64)> {
    if rhs.rows() != m.rows() {
        return Err(Error::ShapeMismatch("least-squares rhs rows".into()));
    }
    let svd = m.0.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&rhs.0, tol * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::NonConvergent(e.to_string()))?;
    let x = CMat(x);
    let resid = (&(m * &x) - rhs).norm_fro();
    Ok((x, resid))
}

/// Orders complex numbers by real part, then imaginary part. Real parts
/// within `tie` of each other count as equal so that rounding noise cannot
/// reorder values that differ only in their imaginary parts.
pub fn sort_permutation(values: &[C64], tie: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .re
            .partial_cmp(&values[b].re)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let anchor = values[idx[start]].re;
        let mut end = start + 1;
        while end < idx.len() && (values[idx[end]].re - anchor).abs() <= tie {
            end += 1;
        }
        let mut cluster = idx[start..end].to_vec();
        cluster.sort_by(|&a, &b| {
            values[a]
                .im
                .partial_cmp(&values[b].im)
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        out.extend(cluster);
        start = end;
    }
    out
}

/// Smallest pairwise distance between the given values (infinite for fewer
/// than two values).
pub fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Eigen-decomposition `g · M · g⁻¹ = diag(values)`.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues sorted by `(Re, Im)`.
    pub values: Vec<C64>,
    /// Left diagonalizer: rows are left eigenvectors.
    pub g: CMat,
    /// `g⁻¹`: columns are unit right eigenvectors.
    pub g_inv: CMat,
    /// 2-norm condition number of `g`.
    pub cond: f64,
    /// `‖g M g⁻¹ − diag(values)‖_F`.
    pub residual: f64,
}

/// Scales `v` to unit 2-norm and rotates its phase so that the first entry
/// of non-negligible size is real and positive.
pub fn normalize_eigvec(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-8 * big)
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
}

/// Diagonalizes a matrix with simple spectrum.
///
/// The eigenvalues are sorted by [`sort_permutation`]; each column of `g⁻¹`
/// is a unit eigenvector normalized by [`normalize_eigvec`].
pub fn eig(m: &CMat, tol: f64) -> Result<Eigen> {
    check_square(m, "eigenproblem")?;
    let n = m.rows();
    if n == 0 {
        return Err(Error::ShapeMismatch("empty matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonConvergent("non-finite input".into()));
    }
    let scale = m.norm_fro();
    let (values, vectors) = if m.is_exactly_diagonal() {
        (m.diagonal(), CMat::identity(n))
    } else {
        schur_eigenpairs(m)?
    };

    let threshold = tol * scale.max(f64::MIN_POSITIVE);
    let gap = min_gap(&values);
    if n > 1 && gap <= threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }

    let perm = sort_permutation(&values, 1e-12 * scale.max(1.0));
    let sorted: Vec<C64> = perm.iter().map(|&i| values[i]).collect();
    let mut g_inv = CMat::zeros(n, n);
    for (col, &src) in perm.iter().enumerate() {
        let mut v = vectors.col_vec(src);
        normalize_eigvec(&mut v);
        for (i, z) in v.into_iter().enumerate() {
            g_inv[(i, col)] = z;
        }
    }
    let g = g_inv.inverse().map_err(|_| Error::NonConvergent("eigenvector matrix is singular".into()))?;
    let residual = (&(&(&g * m) * &g_inv) - &CMat::diag(&sorted)).norm_fro();
    if residual > 1e2 * tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NonConvergent(format!("diagonalization residual {residual:e}")));
    }
    let sv = g.singular_values();
    let cond = sv[0] / sv[n - 1];
    Ok(Eigen {
        values: sorted,
        g,
        g_inv,
        cond,
        residual,
    })
}

/// Eigenvalues sorted by [`sort_permutation`], without the simple-spectrum
/// requirement of [`eig`].
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    check_square(m, "eigenproblem")?;
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    if !m.is_finite() {
        return Err(Error::NonConvergent("non-finite input".into()));
    }
    let values = if m.is_exactly_diagonal() {
        m.diagonal()
    } else {
        let schur = nalgebra::linalg::Schur::try_new(m.0.clone(), f64::EPSILON, 10_000 * m.rows())
            .ok_or_else(|| Error::NonConvergent("Schur iteration stalled".into()))?;
        let t = schur.unpack().1;
        (0..m.rows()).map(|i| t[(i, i)]).collect()
    };
    let perm = sort_permutation(&values, 1e-12 * m.norm_fro().max(1.0));
    Ok(perm.into_iter().map(|i| values[i]).collect())
}

/// Matches every `target` value to a distinct nearest entry of `values`.
///
/// Returns `perm` with `values[perm[j]]` closest to `target[j]`. Fails when
/// two targets pick the same value or a match is not clearly nearest (its
/// distance exceeds half the separation of `values`).
pub fn match_nearest(target: &[C64], values: &[C64]) -> Result<Vec<usize>> {
    if target.len() != values.len() {
        return Err(Error::ShapeMismatch("matching lists of different length".into()));
    }
    let gap = min_gap(values);
    let mut used = vec![false; values.len()];
    let mut perm = Vec::with_capacity(target.len());
    for t in target {
        let (best, dist) = values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - t).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if best == usize::MAX || used[best] || !(dist < 0.5 * gap || values.len() == 1) {
            return Err(Error::BranchAmbiguity);
        }
        used[best] = true;
        perm.push(best);
    }
    Ok(perm)
}

impl Eigen {
    /// Reorders the decomposition so that `values[j]` is the eigenvalue
    /// nearest to `target[j]`.
    pub fn reordered(&self, target: &[C64]) -> Result<Eigen> {
        let perm = match_nearest(target, &self.values)?;
        let n = self.values.len();
        let values = perm.iter().map(|&i| self.values[i]).collect();
        let g = CMat::from_fn(n, n, |i, j| self.g[(perm[i], j)]);
        let g_inv = CMat::from_fn(n, n, |i, j| self.g_inv[(i, perm[j])]);
        Ok(Eigen { values, g, g_inv, cond: self.cond, residual: self.residual })
    }
}

/// Eigenvalues (unsorted) and eigenvectors (columns) from a complex Schur form.
fn schur_eigenpairs(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = m.rows();
    let schur = nalgebra::linalg::Schur::try_new(m.0.clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| Error::NonConvergent("Schur iteration stalled".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * m.norm_fro().max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in j + 1..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = re(small);
            }
            y[(j, k)] = -acc / denom;
        }
    }
    Ok((values, CMat(q * y)))
}

impl serde::Serialize for CMat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.to_rows())
    }
}

impl<'de> serde::Deserialize<'de> for CMat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(deserializer)?;
        let m = CMat::from_rows(&rows).map_err(serde::de::Error::custom)?;
        if !m.is_finite() {
            return Err(serde::de::Error::custom("matrix entries must be finite"));
        }
        Ok(m)
    }
}

/// Relative scale used by residual contracts: `max(1, ‖a‖_F · ‖b‖_F)`.
pub fn product_scale(a: &CMat, b: &CMat) -> f64 {
    (a.norm_fro() * b.norm_fro()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn eig_of_diagonal_is_trivial() {
        let m = CMat::diag(&[re(2.0), re(5.0)]);
        let e = eig(&m, DEFAULT_TOL).unwrap();
        assert_eq!(e.values, vec![re(2.0), re(5.0)]);
        assert_eq!(e.g, CMat::identity(2));
    }

    #[test]
    fn eig_of_swap_matrix() {
        let m = CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig(&m, DEFAULT_TOL).unwrap();
        assert!((e.values[0] - re(-1.0)).norm() < 1e-14);
        assert!((e.values[1] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn eig_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_mat(4, &mut rng);
        let e = eig(&m, DEFAULT_TOL).unwrap();
        let d = CMat::diag(&e.values);
        assert!((&(&(&e.g * &m) * &e.g_inv) - &d).norm_fro() < 1e-9 * m.norm_fro());
    }

    #[test]
    fn eig_reassembles_for_sizes_two_to_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=8 {
            for _ in 0..10 {
                let m = random_mat(n, &mut rng);
                let e = eig(&m, DEFAULT_TOL).unwrap();
                let back = &(&e.g_inv * &CMat::diag(&e.values)) * &e.g;
                assert!(back.dist(&m) <= 1e-8 * m.norm_fro(), "n={n}");
                for j in 0..n {
                    let col = e.g_inv.col_vec(j);
                    let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_mat(5, &mut rng);
        let a = eig(&m, DEFAULT_TOL).unwrap();
        let b = eig(&m, DEFAULT_TOL).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.g, b.g);
    }

    #[test]
    fn eig_rejects_repeated_eigenvalue() {
        let m = CMat::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig(&m, DEFAULT_TOL), Err(Error::DegenerateSpectrum { .. })));
        let id = CMat::identity(3);
        assert!(matches!(eig(&id, DEFAULT_TOL), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn sorting_breaks_real_ties_by_imaginary_part() {
        let vals = [c(0.0, 1.0), c(1e-17, -1.0), c(-2.0, 0.0)];
        assert_eq!(sort_permutation(&vals, 1e-12), vec![2, 1, 0]);
    }

    #[test]
    fn solve_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = CMat::from_fn(3, 2, |_, _| c(rng.gen(), rng.gen()));
        let x = solve(&CMat::identity(3), &r, DEFAULT_TOL).unwrap();
        assert!(x.dist(&r) < 1e-15);
    }

    #[test]
    fn solve_rejects_rank_deficient() {
        let v = CMat::column(&[re(1.0), re(2.0)]);
        let w = CMat::row(&[re(3.0), c(0.0, 1.0)]);
        assert_eq!(solve(&(&v * &w), &CMat::identity(2), DEFAULT_TOL), Err(Error::Singular));
    }

    #[test]
    fn ranks() {
        assert_eq!(numeric_rank(&CMat::zeros(3, 3), DEFAULT_TOL), 0);
        let v = CMat::column(&[re(1.0), c(0.5, 2.0), re(-3.0)]);
        let w = CMat::row(&[c(0.0, 1.0), re(2.0), re(1.0)]);
        assert_eq!(numeric_rank(&(&v * &w), DEFAULT_TOL), 1);
        assert_eq!(numeric_rank(&CMat::identity(4), DEFAULT_TOL), 4);
    }

    #[test]
    fn commutators() {
        let d = CMat::diag(&[re(1.0), c(2.0, 1.0), re(-4.0)]);
        assert_eq!(comm(&d, &d).unwrap(), CMat::zeros(3, 3));
        let e12 = CMat::unit(2, 2, 0, 1);
        let e21 = CMat::unit(2, 2, 1, 0);
        assert_eq!(comm(&e12, &e21).unwrap(), CMat::diag(&[re(1.0), re(-1.0)]));
        assert!(comm(&CMat::zeros(2, 3), &CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn trace_words() {
        let a = CMat::diag(&[re(1.0), re(2.0), re(3.0)]);
        assert_eq!(trace_word(&[&a], &[0]).unwrap(), re(6.0));
        assert_eq!(trace_word(&[&a], &[0, 0]).unwrap(), re(14.0));
        assert_eq!(trace_word(&[&a], &[]).unwrap(), re(3.0));
        assert!(trace_word(&[&a], &[1]).is_err());
    }

    #[test]
    fn least_squares_consistent_system() {
        let m = CMat::from_real(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let rhs = CMat::column(&[re(1.0), re(2.0), re(3.0)]);
        let (x, r) = least_squares(&m, &rhs, 1e-12).unwrap();
        assert!(r < 1e-12);
        assert!((x[(0, 0)] - re(1.0)).norm() < 1e-12);
        assert!((x[(1, 0)] - re(2.0)).norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mat(n: usize) -> impl Strategy<Value = CMat> {
            proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n * n)
                .prop_map(move |v| CMat::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1)))
        }

        proptest! {
            #[test]
            fn commutator_is_traceless((a, b) in (1usize..7).prop_flat_map(|n| (mat(n), mat(n)))) {
                let t = comm(&a, &b).unwrap().trace();
                prop_assert!(t.norm() <= 1e-12 * (a.norm_fro() * b.norm_fro()).max(1.0));
            }
        }
    }
}
