//! The splitting `B̂ = B₁ + B₂` and the local coordinates
//! `(λ_i, λ̂_j, μ_i, μ̂_j)` on the strongly semisimple locus.
//!
//! For `Â` in arrow form, `B₁ = diag(μ, 0)` commutes with `A` and carries the
//! last row of `[Â, B̂]`; the remainder `B₂` satisfies `[Â, B₂] ∈ τ̂ + m⁺`.
//! In the eigenbasis of `Â`, `g·B₂·g⁻¹ = D_μ̂ + S` where `S` depends only on
//! `(τ, λ, λ̂)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::{in_g0hat, is_normal_form, is_regular_semisimple, normalize};
use crate::error::{Error, Result};
use crate::linalg::{
    eig, eigenvalues, least_squares, match_nearest, min_gap, normalize_eigvec, numeric_rank, CMat, Eigen, C64, ONE,
    ZERO,
};
use crate::variety::{tau_hat_residual, require_nonzero_tau, tau_hat, AugmentedPair};

/// `m⁺` part: last column above the corner.
pub fn project_mplus(m: &CMat) -> CMat {
    let n = m.rows() - 1;
    let mut out = CMat::zeros(n + 1, n + 1);
    out.set_block(0, n, &m.block(0, n, n, 1));
    out
}

/// `m⁻` part: last row left of the corner.
pub fn project_mminus(m: &CMat) -> CMat {
    let n = m.rows() - 1;
    let mut out = CMat::zeros(n + 1, n + 1);
    out.set_block(n, 0, &m.block(n, 0, 1, n));
    out
}

/// `(m⁺ part, m⁻ part, rest)`; the three parts sum to `m`.
pub fn split_m(m: &CMat) -> Result<(CMat, CMat, CMat)> {
    if !m.is_square() || m.rows() < 2 {
        return Err(Error::ShapeMismatch(format!("split_m needs a square matrix of size >= 2, got {:?}", m.shape())));
    }
    let plus = project_mplus(m);
    let minus = project_mminus(m);
    let rest = &(m - &plus) - &minus;
    Ok((plus, minus, rest))
}

/// The matrix of `m⁺` with last column `(m₁, …, m_n, 0)`.
pub fn mplus_from(m: &[C64]) -> CMat {
    let n = m.len();
    let mut out = CMat::zeros(n + 1, n + 1);
    for (i, &z) in m.iter().enumerate() {
        out[(i, n)] = z;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    #[serde(rename = "B1")]
    pub b1: CMat,
    #[serde(rename = "B2")]
    pub b2: CMat,
    pub mu: Vec<C64>,
    /// Last column of `[Â, B₂] − τ̂`.
    pub m: Vec<C64>,
    pub lambdahat: Vec<C64>,
    /// Diagonalizer of `Â`: `g·Â·g⁻¹ = diag(λ̂)`.
    pub g: CMat,
    pub g_inv: CMat,
    pub d_muhat: Vec<C64>,
    #[serde(rename = "S")]
    pub s: CMat,
}

impl Decomposition {
    /// `‖[Â, B₂] − (τ̂ + m⁺(m))‖`.
    pub fn b2_residual(&self, p: &AugmentedPair) -> f64 {
        let n = p.n();
        let c = &(&p.a_hat * &self.b2) - &(&self.b2 * &p.a_hat);
        c.dist(&(&tau_hat(n, p.tau) + &mplus_from(&self.m)))
    }
}

fn check_decomposable(p: &AugmentedPair, tol: f64) -> Result<()> {
    p.validate()?;
    require_nonzero_tau(p.tau)?;
    if !is_normal_form(&p.a_hat, tol) {
        return Err(Error::NotNormalized);
    }
    let a = p.upper_left_a();
    if !is_regular_semisimple(&a, tol) || !is_regular_semisimple(&p.a_hat, tol) || !in_g0hat(&p.a_hat, tol)? {
        return Err(Error::NotStronglySemisimple);
    }
    let r = tau_hat_residual(p, p.tau);
    if r > tol * p.scale() {
        return Err(Error::TauHatViolated(r));
    }
    Ok(())
}

/// Splits `B̂` for a normalized, strongly semisimple pair with `λ̂` sorted.
pub fn decompose(p: &AugmentedPair, tol: f64) -> Result<Decomposition> {
    decompose_with(p, None, tol)
}

/// As [`decompose`], with `λ̂` (and hence `μ̂`, `S`) listed in the order of
/// `lambdahat` instead of the sorted order.
pub fn decompose_ordered(p: &AugmentedPair, lambdahat: &[C64], tol: f64) -> Result<Decomposition> {
    decompose_with(p, Some(lambdahat), tol)
}

fn decompose_with(p: &AugmentedPair, order: Option<&[C64]>, tol: f64) -> Result<Decomposition> {
    check_decomposable(p, tol)?;
    let n = p.n();
    let cm = p.commutator();
    let mu: Vec<C64> = (0..n).map(|i| cm[(n, i)]).collect();
    let mut diag_mu = mu.clone();
    diag_mu.push(ZERO);
    let b1 = CMat::diag(&diag_mu);
    let b2 = &p.b_hat - &b1;
    let c2 = &(&p.a_hat * &b2) - &(&b2 * &p.a_hat);
    let m: Vec<C64> = (0..n).map(|i| c2[(i, n)]).collect();

    let mut seeds = eigenvalues(&p.a_hat)?;
    if let Some(target) = order {
        if target.len() != n + 1 {
            return Err(Error::ShapeMismatch(format!("expected {} eigenvalues, got {}", n + 1, target.len())));
        }
        seeds = match_nearest(target, &seeds)?.into_iter().map(|i| seeds[i]).collect();
    }
    let e = arrow_eig(&p.a_hat, &seeds, tol)?;
    let x = &(&e.g * &b2) * &e.g_inv;
    let d_muhat = x.diagonal();
    let mut s = x.clone();
    for j in 0..=n {
        s[(j, j)] = ZERO;
    }
    Ok(Decomposition { b1, b2, mu, m, lambdahat: e.values, g: e.g, g_inv: e.g_inv, d_muhat, s })
}

/// Local coordinates on the strongly semisimple locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub lambda: Vec<C64>,
    pub lambdahat: Vec<C64>,
    pub mu: Vec<C64>,
    pub muhat: Vec<C64>,
    pub tau: C64,
}

impl ChartPoint {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n();
        if n == 0 || self.mu.len() != n || self.lambdahat.len() != n + 1 || self.muhat.len() != n + 1 {
            return Err(Error::ShapeMismatch(format!(
                "chart point lengths (lambda {}, lambdahat {}, mu {}, muhat {})",
                n,
                self.lambdahat.len(),
                self.mu.len(),
                self.muhat.len()
            )));
        }
        require_nonzero_tau(self.tau)?;
        if self.coordinates().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite chart coordinate".into()));
        }
        for values in [&self.lambda, &self.lambdahat] {
            let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let gap = min_gap(values);
            if gap <= tol * scale {
                return Err(Error::DegenerateSpectrum { gap, threshold: tol * scale });
            }
        }
        Ok(())
    }

    /// `(λ, λ̂, μ, μ̂)` flattened, `4n + 2` entries.
    pub fn coordinates(&self) -> Vec<C64> {
        let mut out = self.lambda.clone();
        out.extend(&self.lambdahat);
        out.extend(&self.mu);
        out.extend(&self.muhat);
        out
    }

    pub fn from_coordinates(n: usize, tau: C64, x: &[C64]) -> Result<ChartPoint> {
        if x.len() != 4 * n + 2 {
            return Err(Error::ShapeMismatch(format!("expected {} coordinates, got {}", 4 * n + 2, x.len())));
        }
        Ok(ChartPoint {
            lambda: x[..n].to_vec(),
            lambdahat: x[n..2 * n + 1].to_vec(),
            mu: x[2 * n + 1..3 * n + 1].to_vec(),
            muhat: x[3 * n + 1..].to_vec(),
            tau,
        })
    }

    /// Largest coordinate difference (τ included).
    pub fn dist(&self, other: &ChartPoint) -> f64 {
        if self.n() != other.n() {
            return f64::INFINITY;
        }
        self.coordinates()
            .iter()
            .zip(other.coordinates())
            .map(|(a, b)| (a - b).norm())
            .fold((self.tau - other.tau).norm(), f64::max)
    }

    /// Permutes `(λ, μ)` and `(λ̂, μ̂)` jointly so that every eigenvalue sits
    /// at the index of the nearest eigenvalue of `reference`.
    pub fn align_to(&self, reference: &ChartPoint) -> Result<ChartPoint> {
        if self.n() != reference.n() {
            return Err(Error::ShapeMismatch("chart points of different size".into()));
        }
        let p = match_nearest(&reference.lambda, &self.lambda)?;
        let q = match_nearest(&reference.lambdahat, &self.lambdahat)?;
        Ok(ChartPoint {
            lambda: p.iter().map(|&i| self.lambda[i]).collect(),
            mu: p.iter().map(|&i| self.mu[i]).collect(),
            lambdahat: q.iter().map(|&i| self.lambdahat[i]).collect(),
            muhat: q.iter().map(|&i| self.muhat[i]).collect(),
            tau: self.tau,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart point serializes")
    }

    pub fn from_json(s: &str) -> Result<ChartPoint> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("chart point JSON: {e}")))
    }
}

/// A chart point with every coordinate drawn from a box; `λ` and `λ̂` are
/// redrawn until their minimal gap exceeds 0.4.
pub fn random_chart_with_rng<R: Rng + ?Sized>(n: usize, tau: C64, rng: &mut R) -> ChartPoint {
    let mut draw = |count: usize, spread: f64, gapped: bool| -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..count)
                .map(|_| C64::new(rng.gen_range(-spread..spread), rng.gen_range(-1.0..1.0)))
                .collect();
            if !gapped || min_gap(&v) > 0.4 {
                return v;
            }
        }
    };
    let lambda = draw(n, n as f64 + 1.0, true);
    let lambdahat = draw(n + 1, n as f64 + 1.5, true);
    let mu = draw(n, 1.0, false);
    let muhat = draw(n + 1, 1.0, false);
    ChartPoint { lambda, lambdahat, mu, muhat, tau }
}

/// Chart coordinates of a strongly semisimple pair in the level set
/// (normalized first when necessary).
pub fn to_chart(p: &AugmentedPair, tol: f64) -> Result<ChartPoint> {
    to_chart_with(p, None, tol)
}

/// As [`to_chart`], with `λ̂` listed in the order of `lambdahat`.
pub fn to_chart_ordered(p: &AugmentedPair, lambdahat: &[C64], tol: f64) -> Result<ChartPoint> {
    to_chart_with(p, Some(lambdahat), tol)
}

fn to_chart_with(p: &AugmentedPair, order: Option<&[C64]>, tol: f64) -> Result<ChartPoint> {
    p.validate()?;
    let normalized;
    let q = if is_normal_form(&p.a_hat, tol) {
        p
    } else {
        normalized = normalize(p, tol)?.0;
        &normalized
    };
    let d = decompose_with(q, order, tol)?;
    Ok(ChartPoint {
        lambda: q.upper_left_a().diagonal(),
        lambdahat: d.lambdahat,
        mu: d.mu,
        muhat: d.d_muhat,
        tau: q.tau,
    })
}

/// Diagonalizes `Â = [[diag(λ), x], [r, d]]` (off-diagonal entries of the
/// upper-left block are ignored) with eigenvalues listed in the order of
/// `seeds`.
///
/// The eigenvalues are the roots of the secular function
/// `f(z) = z − d − Σ r_i x_i / (z − λ_i)`; each seed is polished by Newton
/// steps while `|f|` decreases. Eigenvectors are then explicit:
/// right `(x_i / (z − λ_i), 1)`, left `(r_i / (z − λ_i), 1)`. This keeps
/// full accuracy when the eigenbasis is badly conditioned, where a Schur
/// back-substitution loses digits. When some `x_i = 0` puts `λ_i` in the
/// spectrum the general [`eig`] is used instead.
pub fn arrow_eig(a_hat: &CMat, seeds: &[C64], tol: f64) -> Result<Eigen> {
    let n1 = a_hat.rows();
    if n1 == 0 || a_hat.cols() != n1 || seeds.len() != n1 {
        return Err(Error::ShapeMismatch(format!("arrow eigenproblem of size {n1} with {} seeds", seeds.len())));
    }
    if !a_hat.is_finite() {
        return Err(Error::NonConvergent("non-finite input".into()));
    }
    let n = n1 - 1;
    let lambda = a_hat.diagonal();
    let d = a_hat[(n, n)];
    let x: Vec<C64> = (0..n).map(|i| a_hat[(i, n)]).collect();
    let r: Vec<C64> = (0..n).map(|i| a_hat[(n, i)]).collect();
    let secular = |z: C64| -> (C64, C64) {
        let (mut f, mut df) = (z - d, ONE);
        for i in 0..n {
            let q = r[i] * x[i] / (z - lambda[i]);
            f -= q;
            df += q / (z - lambda[i]);
        }
        (f, df)
    };

    let scale = a_hat.norm_fro().max(f64::MIN_POSITIVE);
    let mut values = seeds.to_vec();
    for (j, z) in values.iter_mut().enumerate() {
        // polishing must not wander to another root
        let reach = 0.25
            * (0..n1)
                .filter(|&k| k != j)
                .map(|k| (seeds[k] - seeds[j]).norm())
                .fold(f64::INFINITY, f64::min);
        let (mut f, mut df) = secular(*z);
        for _ in 0..8 {
            if !f.norm().is_finite() || f.norm() == 0.0 || df.norm() == 0.0 {
                break;
            }
            let next = *z - f / df;
            let (f1, df1) = secular(next);
            if (next - seeds[j]).norm() > reach || f1.norm().is_nan() || f1.norm() >= f.norm() {
                break;
            }
            (*z, f, df) = (next, f1, df1);
        }
    }
    let threshold = tol * scale;
    let gap = min_gap(&values);
    if n1 > 1 && gap <= threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }
    if values.iter().any(|&z| lambda[..n].iter().any(|&l| (z - l).norm() <= threshold)) {
        // x_i = 0 puts λ_i in the spectrum and the explicit vectors break down
        return eig(a_hat, tol)?.reordered(seeds);
    }

    let mut g_inv = CMat::zeros(n1, n1);
    let mut g = CMat::zeros(n1, n1);
    for (j, &z) in values.iter().enumerate() {
        let mut v: Vec<C64> = (0..n).map(|i| x[i] / (z - lambda[i])).collect();
        v.push(ONE);
        normalize_eigvec(&mut v);
        let mut u: Vec<C64> = (0..n).map(|i| r[i] / (z - lambda[i])).collect();
        u.push(ONE);
        let pairing: C64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        if pairing.norm() == 0.0 || !pairing.norm().is_finite() {
            return Err(Error::NonConvergent("arrow eigenvector pairing vanished".into()));
        }
        for i in 0..n1 {
            g_inv[(i, j)] = v[i];
            g[(j, i)] = u[i] / pairing;
        }
    }
    let residual = (&(&(&g * a_hat) * &g_inv) - &CMat::diag(&values)).norm_fro();
    if !residual.is_finite() || residual > 1e2 * tol * scale {
        return Err(Error::NonConvergent(format!("diagonalization residual {residual:e}")));
    }
    let sv = g.singular_values();
    let cond = sv[0] / sv[n1 - 1];
    Ok(Eigen { values, g, g_inv, cond, residual })
}

/// `Â` in arrow form with the given spectra of `A` and `Â`:
/// `Λ = Σλ̂ − Σλ` and `x_i = −∏_j(λ_i − λ̂_j) / ∏_{k≠i}(λ_i − λ_k)`.
pub fn arrow_matrix(lambda: &[C64], lambdahat: &[C64]) -> CMat {
    let n = lambda.len();
    let mut a_hat = CMat::zeros(n + 1, n + 1);
    for i in 0..n {
        let num: C64 = lambdahat.iter().map(|&l| lambda[i] - l).product();
        let den: C64 = (0..n).filter(|&k| k != i).map(|k| lambda[i] - lambda[k]).product();
        a_hat[(i, i)] = lambda[i];
        a_hat[(i, n)] = -num / den;
        a_hat[(n, i)] = ONE;
    }
    a_hat[(n, n)] = lambdahat.iter().sum::<C64>() - lambda.iter().sum::<C64>();
    a_hat
}

/// The `μ`-independent part of the inverse chart: `Â`, its eigenbasis in the
/// requested `λ̂` order, the `m⁺` component and `S`.
#[derive(Debug, Clone)]
pub struct ChartFrame {
    pub tau: C64,
    pub a_hat: CMat,
    pub eigen: Eigen,
    pub m: Vec<C64>,
    pub s: CMat,
}

impl ChartFrame {
    pub fn new(lambda: &[C64], lambdahat: &[C64], tau: C64, tol: f64) -> Result<ChartFrame> {
        let n = lambda.len();
        let a_hat = arrow_matrix(lambda, lambdahat);
        if !a_hat.is_finite() {
            return Err(Error::DegenerateSpectrum { gap: min_gap(lambda), threshold: 0.0 });
        }
        let scale = a_hat.norm_fro().max(1.0);
        let eigen = arrow_eig(&a_hat, lambdahat, tol)?;
        let mismatch = eigen
            .values
            .iter()
            .zip(lambdahat)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if mismatch > tol * scale {
            return Err(Error::EigenMismatch(mismatch));
        }

        // diag(g (τ̂ + m⁺(m)) g⁻¹) = 0 in the n unknowns m_i.
        let (g, gi) = (&eigen.g, &eigen.g_inv);
        let t = &(g * &tau_hat(n, tau)) * gi;
        let sys = CMat::from_fn(n + 1, n, |j, i| g[(j, i)] * gi[(n, j)]);
        let rhs = CMat::from_fn(n + 1, 1, |j, _| -t[(j, j)]);
        if numeric_rank(&sys, 1e-10) < n {
            return Err(Error::MSystemSingular);
        }
        let (sol, resid) = least_squares(&sys, &rhs, 1e-12).map_err(|_| Error::MSystemSingular)?;
        let rhs_scale = rhs.norm_fro().max(tau.norm()).max(1e-300);
        if resid > tol.max(1e-9) * rhs_scale * eigen.cond {
            return Err(Error::NonConvergent(format!("m-system residual {resid:e}")));
        }
        let m = sol.col_vec(0);

        let c = &(g * &(&tau_hat(n, tau) + &mplus_from(&m))) * gi;
        let s = CMat::from_fn(n + 1, n + 1, |j, k| {
            if j == k {
                ZERO
            } else {
                c[(j, k)] / (eigen.values[j] - eigen.values[k])
            }
        });
        Ok(ChartFrame { tau, a_hat, eigen, m, s })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// `B₂ = g⁻¹(D_μ̂ + S)g`.
    pub fn b2(&self, muhat: &[C64]) -> CMat {
        let mut x = self.s.clone();
        for (j, &z) in muhat.iter().enumerate() {
            x[(j, j)] = z;
        }
        &(&self.eigen.g_inv * &x) * &self.eigen.g
    }

    pub fn b_hat(&self, mu: &[C64], muhat: &[C64]) -> CMat {
        let mut b = self.b2(muhat);
        for (i, &z) in mu.iter().enumerate() {
            b[(i, i)] += z;
        }
        b
    }

    /// `corner(B̂) = coef · μ̂ + base`; the coefficients sum to one.
    pub fn corner_affine(&self) -> (Vec<C64>, C64) {
        let n = self.n();
        let (g, gi) = (&self.eigen.g, &self.eigen.g_inv);
        let coef = (0..=n).map(|j| gi[(n, j)] * g[(j, n)]).collect();
        let base = self.b2(&vec![ZERO; n + 1])[(n, n)];
        (coef, base)
    }
}

/// Inverse chart: builds `Â` in arrow form and `B̂ = diag(μ, 0) + B₂` with
/// `λ̂` kept in the given order.
pub fn from_chart(c: &ChartPoint, tol: f64) -> Result<AugmentedPair> {
    c.validate(tol)?;
    let frame = ChartFrame::new(&c.lambda, &c.lambdahat, c.tau, tol)?;
    let p = AugmentedPair::new(c.tau, frame.a_hat.clone(), frame.b_hat(&c.mu, &c.muhat))?;
    if !in_g0hat(&p.a_hat, tol).map_err(|_| Error::NotStronglySemisimple)? {
        return Err(Error::NotStronglySemisimple);
    }
    let r = tau_hat_residual(&p, c.tau);
    if r > tol * p.scale() * frame.eigen.cond.max(1.0) {
        return Err(Error::TauHatViolated(r));
    }
    Ok(p)
}

/// `(tr Â − tr A, corner of B̂)`.
pub fn slice_residual(p: &AugmentedPair) -> (C64, C64) {
    (p.a_hat.trace() - p.upper_left_a().trace(), p.corner_b())
}

/// Moves `μ̂` along the affine constraint `corner(B̂) = 0`, by the
/// least-norm correction, keeping `λ`, `λ̂` and `μ` fixed.
pub fn solve_slice_muhat(c: &ChartPoint, tol: f64) -> Result<ChartPoint> {
    c.validate(tol)?;
    let frame = ChartFrame::new(&c.lambda, &c.lambdahat, c.tau, tol)?;
    let (coef, base) = frame.corner_affine();
    let norm2: f64 = coef.iter().map(|z| z.norm_sqr()).sum();
    if norm2.sqrt() <= tol {
        return Err(Error::DegenerateConstraint);
    }
    let value: C64 = coef.iter().zip(&c.muhat).map(|(a, b)| a * b).sum::<C64>() + base;
    let muhat = coef.iter().zip(&c.muhat).map(|(a, m)| m - a.conj() * value / norm2).collect();
    Ok(ChartPoint { muhat, ..c.clone() })
}

/// Complex Jacobian of `c ↦ (entries of Â, entries of B̂)` from
/// [`from_chart`], by central differences along every coordinate.
pub fn chart_jacobian(c: &ChartPoint, step: f64, tol: f64) -> Result<CMat> {
    let n = c.n();
    let x0 = c.coordinates();
    let rows = 2 * (n + 1) * (n + 1);
    let mut jac = CMat::zeros(rows, x0.len());
    let eval = |x: &[C64]| -> Result<Vec<C64>> {
        let p = from_chart(&ChartPoint::from_coordinates(n, c.tau, x)?, tol)?;
        let mut v = p.a_hat.entries();
        v.extend(p.b_hat.entries());
        Ok(v)
    };
    for k in 0..x0.len() {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[k] += step;
        xm[k] -= step;
        let (fp, fm) = (eval(&xp)?, eval(&xm)?);
        for r in 0..rows {
            jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Relative singular-value cutoff used by [`chart_rank`].
pub const CHART_RANK_CUTOFF: f64 = 1e-6;

/// Numeric rank of [`chart_jacobian`] with step `1e-5`.
pub fn chart_rank(c: &ChartPoint, tol: f64) -> Result<usize> {
    Ok(numeric_rank(&chart_jacobian(c, 1e-5, tol)?, CHART_RANK_CUTOFF))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::normalize;
    use crate::linalg::{c, re, DEFAULT_TOL};
    use crate::variety::{augment, tau_hat_predicate, pair_fingerprint, random_gauge, random_point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = DEFAULT_TOL;

    fn worked_pair(mu1: C64) -> AugmentedPair {
        let a = CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let mut b = CMat::from_real(2, 2, &[0.0, -0.5, 0.5, 0.0]).unwrap();
        b[(0, 0)] = mu1;
        AugmentedPair::new(ONE, a, b).unwrap()
    }

    fn random_chart(n: usize, rng: &mut ChaCha8Rng) -> ChartPoint {
        let mut draw = |count: usize, spread: f64| -> Vec<C64> {
            loop {
                let v: Vec<C64> = (0..count)
                    .map(|_| c(rng.gen_range(-spread..spread), rng.gen_range(-1.0..1.0)))
                    .collect();
                if min_gap(&v) > 0.4 {
                    return v;
                }
            }
        };
        let lambda = draw(n, n as f64 + 1.0);
        let lambdahat = draw(n + 1, n as f64 + 1.5);
        let mu = draw(n, 1.0);
        let muhat = draw(n + 1, 1.0);
        ChartPoint { lambda, lambdahat, mu, muhat, tau: c(1.0, 0.5) }
    }

    #[test]
    fn arrow_eig_matches_schur() {
        let lambda = [re(-1.0), c(0.5, 1.0), re(2.0)];
        let lambdahat = [re(-2.0), re(0.0), c(1.0, -0.5), re(3.0)];
        let a_hat = arrow_matrix(&lambda, &lambdahat);
        let e = arrow_eig(&a_hat, &lambdahat, DEFAULT_TOL).unwrap();
        let reference = eig(&a_hat, DEFAULT_TOL).unwrap().reordered(&lambdahat).unwrap();
        for (z, l) in e.values.iter().zip(&lambdahat) {
            assert!((z - l).norm() < 1e-12);
        }
        assert!(e.g_inv.dist(&reference.g_inv) < 1e-10);
        assert!(e.residual < 1e-12);
        assert!(matches!(arrow_eig(&a_hat, &lambdahat[..3], DEFAULT_TOL), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn shared_eigenvalue_chart_points_round_trip() {
        let c = ChartPoint {
            lambda: vec![re(0.0), re(1.0)],
            lambdahat: vec![re(-1.0), re(1.0), re(2.5)],
            mu: vec![re(0.3), re(-0.2)],
            muhat: vec![re(0.1), re(0.4), re(-0.7)],
            tau: ONE,
        };
        let p = from_chart(&c, DEFAULT_TOL).unwrap();
        assert_eq!(p.a_hat[(1, 2)], ZERO);
        let back = to_chart(&p, DEFAULT_TOL).unwrap().align_to(&c).unwrap();
        assert!(back.dist(&c) < 1e-10);
    }

    #[test]
    fn arrow_eig_polishes_rough_seeds() {
        let lambda = [re(0.0), re(1.0)];
        let lambdahat = [re(-1.0), re(0.5), re(2.5)];
        let a_hat = arrow_matrix(&lambda, &lambdahat);
        let rough: Vec<C64> = lambdahat.iter().map(|z| z + c(1e-3, -1e-3)).collect();
        let e = arrow_eig(&a_hat, &rough, DEFAULT_TOL).unwrap();
        for (z, l) in e.values.iter().zip(&lambdahat) {
            assert!((z - l).norm() < 1e-13);
        }
    }

    #[test]
    fn m_projections() {
        let n = 3;
        let e = CMat::unit(n + 1, n + 1, 0, n);
        assert_eq!(project_mplus(&e), e);
        assert_eq!(project_mminus(&e), CMat::zeros(n + 1, n + 1));
        let corner = CMat::unit(n + 1, n + 1, n, n);
        let (p, m, rest) = split_m(&corner).unwrap();
        assert_eq!(p, CMat::zeros(n + 1, n + 1));
        assert_eq!(m, CMat::zeros(n + 1, n + 1));
        assert_eq!(rest, corner);

        let full = CMat::from_fn(4, 4, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let (p, m, rest) = split_m(&full).unwrap();
        assert_eq!(&(&p + &m) + &rest, full);
        assert_eq!(project_mplus(&p), p);
        assert_eq!(project_mminus(&m), m);
        assert_eq!(project_mplus(&rest), CMat::zeros(4, 4));
    }

    #[test]
    fn decompose_worked_pair() {
        let mu1 = c(0.7, -0.2);
        let p = worked_pair(mu1);
        let d = decompose(&p, TOL).unwrap();
        assert_eq!(d.b1, CMat::diag(&[mu1, ZERO]));
        assert!(d.b2.dist(&CMat::from_real(2, 2, &[0.0, -0.5, 0.5, 0.0]).unwrap()) < 1e-15);
        assert_eq!(d.m, vec![ZERO]);
        assert!((d.lambdahat[0] + 1.0).norm() < 1e-15 && (d.lambdahat[1] - 1.0).norm() < 1e-15);
        assert!(d.d_muhat.iter().all(|z| z.norm() < 1e-15));
        // sorted eigenvalues (−1, 1)
        assert!(d.s.dist(&CMat::from_real(2, 2, &[0.0, -0.5, 0.5, 0.0]).unwrap()) < 1e-14);
        // eigenvalues listed as (1, −1)
        let d = decompose_ordered(&p, &[re(1.0), re(-1.0)], TOL).unwrap();
        assert!(d.s.dist(&CMat::from_real(2, 2, &[0.0, 0.5, -0.5, 0.0]).unwrap()) < 1e-14);
        assert!(d.b2_residual(&p) < 1e-14);
    }

    #[test]
    fn decompose_trivial_split() {
        let p = worked_pair(ZERO);
        let d = decompose(&p, TOL).unwrap();
        assert_eq!(d.b1, CMat::zeros(2, 2));
        assert_eq!(d.b2, p.b_hat);
    }

    #[test]
    fn decompose_error_paths() {
        let mut p = worked_pair(ONE);
        p.a_hat[(1, 0)] = re(2.0);
        assert_eq!(decompose(&p, TOL).unwrap_err(), Error::NotNormalized);
        let mut p = worked_pair(ONE);
        p.b_hat[(0, 1)] = re(3.0);
        assert!(matches!(decompose(&p, TOL).unwrap_err(), Error::TauHatViolated(_)));
        let mut p = worked_pair(ONE);
        p.a_hat[(0, 1)] = ZERO;
        assert_eq!(decompose(&p, TOL).unwrap_err(), Error::NotStronglySemisimple);
    }

    #[test]
    fn to_chart_worked_pair() {
        let mu1 = c(0.3, 0.4);
        let cp = to_chart(&worked_pair(mu1), TOL).unwrap();
        assert_eq!(cp.lambda, vec![ZERO]);
        assert!((cp.lambdahat[0] + 1.0).norm() < 1e-15 && (cp.lambdahat[1] - 1.0).norm() < 1e-15);
        assert!((cp.mu[0] - mu1).norm() < 1e-15);
        assert!(cp.muhat.iter().all(|z| z.norm() < 1e-15));
        assert_eq!(cp.tau, ONE);
    }

    #[test]
    fn from_chart_worked_point() {
        let mu1 = c(-1.25, 0.5);
        for lambdahat in [vec![re(1.0), re(-1.0)], vec![re(-1.0), re(1.0)]] {
            let cp = ChartPoint { lambda: vec![ZERO], lambdahat, mu: vec![mu1], muhat: vec![ZERO, ZERO], tau: ONE };
            let p = from_chart(&cp, TOL).unwrap();
            assert_eq!(p.a_hat, CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap());
            assert!(p.b_hat.dist(&worked_pair(mu1).b_hat) < 1e-14);
        }
        let frame = ChartFrame::new(&[ZERO], &[re(1.0), re(-1.0)], ONE, TOL).unwrap();
        assert!(frame.m[0].norm() < 1e-15);
        assert!((frame.s[(0, 1)] - 0.5).norm() < 1e-14);
        assert!((frame.s[(1, 0)] + 0.5).norm() < 1e-14);
    }

    #[test]
    fn arrow_matrix_reproduces_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            let r = random_point(n, 2, ONE, rng.gen()).unwrap();
            let (p, _) = normalize(&augment(&r).unwrap(), TOL).unwrap();
            let lambda = p.upper_left_a().diagonal();
            let lambdahat = eig(&p.a_hat, TOL).unwrap().values;
            let rebuilt = arrow_matrix(&lambda, &lambdahat);
            assert!(rebuilt.dist(&p.a_hat) < 1e-9 * p.a_hat.norm_fro(), "n={n}");
        }
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..4 {
                let cp = random_chart(n, &mut rng);
                let p = from_chart(&cp, TOL).unwrap();
                assert!(tau_hat_predicate(&p, cp.tau, 1e-9));
                let back = to_chart(&p, TOL).unwrap().align_to(&cp).unwrap();
                assert!(back.dist(&cp) < 1e-8, "n={n}: {:e}", back.dist(&cp));
                let ordered = to_chart_ordered(&p, &cp.lambdahat, TOL).unwrap();
                assert!(ordered.dist(&back) < 1e-12);
            }
        }
    }

    #[test]
    fn decompose_recovers_coordinates_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let cp = random_chart(3, &mut rng);
            let p = from_chart(&cp, TOL).unwrap();
            let d = decompose_ordered(&p, &cp.lambdahat, TOL).unwrap();
            for (a, b) in d.mu.iter().zip(&cp.mu).chain(d.d_muhat.iter().zip(&cp.muhat)) {
                assert!((a - b).norm() < 1e-8);
            }
            assert!(d.b2_residual(&p) < 1e-9 * p.scale());
            assert!((&d.b1 + &d.b2).dist(&p.b_hat) < 1e-10 * p.scale());
            assert_eq!(d.b1[(3, 3)], ZERO);
        }
    }

    #[test]
    fn chart_is_gauge_invariant_and_inverse_is_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=4 {
            let r = random_point(n, 2, c(0.5, 1.0), rng.gen()).unwrap();
            let p = augment(&r).unwrap();
            let q = p.conjugate(&random_gauge(n, &mut rng)).unwrap();
            let cp = to_chart(&p, TOL).unwrap();
            let cq = to_chart(&q, TOL).unwrap();
            assert!(cp.dist(&cq) < 1e-8, "n={n}: {:e}", cp.dist(&cq));

            let rebuilt = from_chart(&cp, TOL).unwrap();
            let d = pair_fingerprint(&rebuilt, None).distance(&pair_fingerprint(&p, None));
            assert!(d < 1e-8, "n={n}: {d:e}");
        }
    }

    #[test]
    fn s_is_independent_of_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let base = random_chart(3, &mut rng);
        let reference = decompose_ordered(&from_chart(&base, TOL).unwrap(), &base.lambdahat, TOL).unwrap();
        for _ in 0..20 {
            let mut cp = random_chart(3, &mut rng);
            cp.lambda = base.lambda.clone();
            cp.lambdahat = base.lambdahat.clone();
            let d = decompose_ordered(&from_chart(&cp, TOL).unwrap(), &cp.lambdahat, TOL).unwrap();
            assert!(d.s.dist(&reference.s) < 1e-10);
        }
    }

    #[test]
    fn decomposition_is_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let cp = random_chart(3, &mut rng);
        let p = from_chart(&cp, TOL).unwrap();
        let d = decompose(&p, TOL).unwrap();
        let a = p.a_hat.clone();
        let violation = |eps: f64| {
            let mut b2 = d.b2.clone();
            b2[(1, 1)] -= eps;
            let c2 = &(&a * &b2) - &(&b2 * &a);
            project_mminus(&c2).norm_fro()
        };
        assert!(violation(0.0) < 1e-9);
        for eps in [1e-3, 1e-2, 1e-1] {
            assert!((violation(eps) / eps - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn slice_residuals() {
        let r = random_point(3, 2, ONE, 1).unwrap();
        let p = augment(&r).unwrap();
        assert_eq!(slice_residual(&p), (ZERO, ZERO));

        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut cp = random_chart(3, &mut rng);
        let shift = (cp.lambdahat.iter().sum::<C64>() - cp.lambda.iter().sum::<C64>()) / 3.0;
        for l in &mut cp.lambda {
            *l += shift;
        }
        let p = from_chart(&cp, TOL).unwrap();
        assert!(slice_residual(&p).0.norm() < 1e-12);

        let solved = solve_slice_muhat(&cp, TOL).unwrap();
        assert_eq!(solved.lambda, cp.lambda);
        assert_eq!(solved.mu, cp.mu);
        let q = from_chart(&solved, TOL).unwrap();
        assert!(slice_residual(&q).1.norm() < 1e-10 * q.scale());
    }

    #[test]
    fn corner_is_affine_in_muhat() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cp = random_chart(3, &mut rng);
        let frame = ChartFrame::new(&cp.lambda, &cp.lambdahat, cp.tau, TOL).unwrap();
        let (coef, _) = frame.corner_affine();
        assert!((coef.iter().sum::<C64>() - ONE).norm() < 1e-12);
        let dir: Vec<C64> = (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let at = |t: f64| {
            let mh: Vec<C64> = cp.muhat.iter().zip(&dir).map(|(m, d)| m + d * t).collect();
            frame.b_hat(&cp.mu, &mh)[(3, 3)]
        };
        let second = at(1.0) - 2.0 * at(0.0) + at(-1.0);
        assert!(second.norm() < 1e-9);
    }

    #[test]
    fn chart_has_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 1..=4 {
            let cp = random_chart(n, &mut rng);
            assert_eq!(chart_rank(&cp, TOL).unwrap(), 4 * n + 2);
        }
    }

    #[test]
    fn chart_point_json_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let cp = random_chart(2, &mut rng);
        assert_eq!(ChartPoint::from_json(&cp.to_json()).unwrap(), cp);
        let mut bad = cp.clone();
        bad.lambdahat[1] = bad.lambdahat[0];
        assert!(matches!(from_chart(&bad, TOL), Err(Error::DegenerateSpectrum { .. })));
        let mut bad = cp.clone();
        bad.tau = ZERO;
        assert!(from_chart(&bad, TOL).is_err());
        let mut bad = cp;
        bad.mu.pop();
        assert!(matches!(from_chart(&bad, TOL), Err(Error::ShapeMismatch(_))));
    }
}
