//! Representations `(A, B, v, w)` on the level set `[A, B] − vw = τ·I`, the
//! gauge action of `GL_n`, and the augmentation into `(n+1)×(n+1)` pairs.

mod fingerprint;
mod quiver;
mod random;

use serde::{Deserialize, Serialize};

pub use fingerprint::{fingerprint, pair_fingerprint, trace_word_set, Fingerprint};
pub use quiver::{dictionary_calibrate, quiver_nu, DictionaryCalibration, DictionaryVariant};
pub use random::{random_gauge, random_point, random_point_with_rng};

use crate::error::{Error, Result};
use crate::linalg::{comm, product_scale, CMat, C64, ZERO};

/// A quadruple `(A, B, v, w)` together with the level-set parameters.
///
/// `v` is `n×k` with columns `v₁, v₂`; `w` is `k×n` with rows `w₁, w₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub n: usize,
    pub k: usize,
    pub tau: C64,
    #[serde(rename = "A")]
    pub a: CMat,
    #[serde(rename = "B")]
    pub b: CMat,
    pub v: CMat,
    pub w: CMat,
}

impl Representation {
    pub fn new(tau: C64, a: CMat, b: CMat, v: CMat, w: CMat) -> Result<Self> {
        let n = a.rows();
        let k = v.cols();
        let r = Representation { n, k, tau, a, b, v, w };
        r.validate()?;
        Ok(r)
    }

    /// Checks shapes and finiteness, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(1..=2).contains(&k) {
            return Err(Error::InvalidParameter(format!("k must be 1 or 2, got {k}")));
        }
        let shapes = [
            ("A", self.a.shape(), (n, n)),
            ("B", self.b.shape(), (n, n)),
            ("v", self.v.shape(), (n, k)),
            ("w", self.w.shape(), (k, n)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::ShapeMismatch(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        let finite = [&self.a, &self.b, &self.v, &self.w].iter().all(|m| m.is_finite())
            && self.tau.re.is_finite()
            && self.tau.im.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("non-finite entries".into()));
        }
        Ok(())
    }

    pub fn v_col(&self, i: usize) -> CMat {
        self.v.block(0, i, self.n, 1)
    }

    pub fn w_row(&self, i: usize) -> CMat {
        self.w.block(i, 0, 1, self.n)
    }

    /// `max(1, ‖A‖‖B‖, ‖v‖‖w‖)`.
    pub fn scale(&self) -> f64 {
        product_scale(&self.a, &self.b).max(self.v.norm_fro() * self.w.norm_fro())
    }

    /// `‖[A,B] − vw − τ·I‖_F`.
    pub fn residual(&self) -> f64 {
        let mu = moment_map(self).expect("validated shapes");
        (&mu - &CMat::identity(self.n).scale(self.tau)).norm_fro()
    }

    pub fn is_on_shell(&self, tol: f64) -> bool {
        self.residual() <= tol * self.scale()
    }

    /// Writes the JSON representation schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite matrices serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Representation =
            serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }
}

/// `μ(A, B, v, w) = [A, B] − vw`.
pub fn moment_map(r: &Representation) -> Result<CMat> {
    r.validate()?;
    Ok(&comm(&r.a, &r.b)? - &(&r.v * &r.w))
}

/// `[A, A†] + [B, B†] − vv† + w†w`.
pub fn moment_real(r: &Representation) -> Result<CMat> {
    r.validate()?;
    let mut out = comm(&r.a, &r.a.adjoint())?;
    out += &comm(&r.b, &r.b.adjoint())?;
    out = &out - &(&r.v * &r.v.adjoint());
    out += &(&r.w.adjoint() * &r.w);
    Ok(out)
}

/// An element `g ∈ GL_n`, acting on representations and, embedded as
/// `diag(g, 1)`, on augmented pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement {
    g: CMat,
    g_inv: CMat,
}

impl GaugeElement {
    pub fn new(g: CMat) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::ShapeMismatch("gauge element must be square".into()));
        }
        let det = g.as_nalgebra().determinant();
        if det.norm() <= crate::linalg::DEFAULT_TOL * g.norm_fro().max(1.0).powi(g.rows() as i32) {
            return Err(Error::Singular);
        }
        let g_inv = g.inverse()?;
        Ok(GaugeElement { g, g_inv })
    }

    pub fn identity(n: usize) -> Self {
        GaugeElement { g: CMat::identity(n), g_inv: CMat::identity(n) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.g
    }

    pub fn inverse_matrix(&self) -> &CMat {
        &self.g_inv
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    /// `diag(g, 1) ∈ GL_{n+1}`.
    pub fn embedded(&self) -> CMat {
        embed(&self.g)
    }

    pub fn embedded_inverse(&self) -> CMat {
        embed(&self.g_inv)
    }

    pub fn compose(&self, other: &GaugeElement) -> GaugeElement {
        GaugeElement { g: &self.g * &other.g, g_inv: &other.g_inv * &self.g_inv }
    }
}

fn embed(g: &CMat) -> CMat {
    let n = g.rows();
    let mut out = CMat::identity(n + 1);
    out.set_block(0, 0, g);
    out
}

/// `g · (A, B, v, w) = (gAg⁻¹, gBg⁻¹, gv, wg⁻¹)`.
pub fn gauge_act(g: &GaugeElement, r: &Representation) -> Result<Representation> {
    if g.n() != r.n {
        return Err(Error::ShapeMismatch(format!("gauge of size {} on n = {}", g.n(), r.n)));
    }
    let (gm, gi) = (&g.g, &g.g_inv);
    Ok(Representation {
        n: r.n,
        k: r.k,
        tau: r.tau,
        a: &(gm * &r.a) * gi,
        b: &(gm * &r.b) * gi,
        v: gm * &r.v,
        w: &r.w * gi,
    })
}

/// A pair `(Â, B̂)` of `(n+1)×(n+1)` matrices at level `τ`.
///
/// Block reading: `Â = (A x; y Λ)`. Pairs produced by [`augment`] have zero
/// corners; general pairs (points of `N × ℂ²`) may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedPair {
    pub tau: C64,
    #[serde(rename = "Ahat")]
    pub a_hat: CMat,
    #[serde(rename = "Bhat")]
    pub b_hat: CMat,
}

impl AugmentedPair {
    pub fn new(tau: C64, a_hat: CMat, b_hat: CMat) -> Result<Self> {
        let p = AugmentedPair { tau, a_hat, b_hat };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.a_hat.rows();
        if m < 2 || !self.a_hat.is_square() || self.b_hat.shape() != (m, m) {
            return Err(Error::ShapeMismatch(format!(
                "augmented pair must be two square matrices of size >= 2, got {:?} and {:?}",
                self.a_hat.shape(),
                self.b_hat.shape()
            )));
        }
        if !self.a_hat.is_finite() || !self.b_hat.is_finite() {
            return Err(Error::InvalidParameter("non-finite entries".into()));
        }
        Ok(())
    }

    /// Particle count `n` (matrices are `(n+1)×(n+1)`).
    pub fn n(&self) -> usize {
        self.a_hat.rows() - 1
    }

    pub fn upper_left_a(&self) -> CMat {
        let n = self.n();
        self.a_hat.block(0, 0, n, n)
    }

    pub fn upper_left_b(&self) -> CMat {
        let n = self.n();
        self.b_hat.block(0, 0, n, n)
    }

    pub fn corner_a(&self) -> C64 {
        let n = self.n();
        self.a_hat[(n, n)]
    }

    pub fn corner_b(&self) -> C64 {
        let n = self.n();
        self.b_hat[(n, n)]
    }

    /// `max(1, ‖Â‖‖B̂‖)`.
    pub fn scale(&self) -> f64 {
        product_scale(&self.a_hat, &self.b_hat)
    }

    /// Simultaneous conjugation by `diag(g, 1)`.
    pub fn conjugate(&self, g: &GaugeElement) -> Result<AugmentedPair> {
        if g.n() != self.n() {
            return Err(Error::ShapeMismatch("gauge size".into()));
        }
        let (e, ei) = (g.embedded(), g.embedded_inverse());
        Ok(AugmentedPair {
            tau: self.tau,
            a_hat: &(&e * &self.a_hat) * &ei,
            b_hat: &(&e * &self.b_hat) * &ei,
        })
    }

    pub fn commutator(&self) -> CMat {
        comm(&self.a_hat, &self.b_hat).expect("validated square pair")
    }

    /// Frobenius distance between two pairs.
    pub fn dist(&self, other: &AugmentedPair) -> f64 {
        (self.a_hat.dist(&other.a_hat).powi(2) + self.b_hat.dist(&other.b_hat).powi(2)).sqrt()
    }
}

/// `Â = (A v₁; w₂ 0)`, `B̂ = (B v₂; −w₁ 0)`.
pub fn augment(r: &Representation) -> Result<AugmentedPair> {
    r.validate()?;
    if r.k != 2 {
        return Err(Error::InvalidParameter(format!("augment needs k = 2, got {}", r.k)));
    }
    let n = r.n;
    let mut a_hat = CMat::zeros(n + 1, n + 1);
    let mut b_hat = CMat::zeros(n + 1, n + 1);
    a_hat.set_block(0, 0, &r.a);
    a_hat.set_block(0, n, &r.v_col(0));
    a_hat.set_block(n, 0, &r.w_row(1));
    b_hat.set_block(0, 0, &r.b);
    b_hat.set_block(0, n, &r.v_col(1));
    b_hat.set_block(n, 0, &(-&r.w_row(0)));
    Ok(AugmentedPair { tau: r.tau, a_hat, b_hat })
}

/// Inverse of [`augment`]; both corners must vanish to `tol·max(1, ‖·‖)`.
pub fn project(p: &AugmentedPair, tol: f64) -> Result<Representation> {
    p.validate()?;
    for (corner, m) in [(p.corner_a(), &p.a_hat), (p.corner_b(), &p.b_hat)] {
        if corner.norm() > tol * m.norm_fro().max(1.0) {
            return Err(Error::NonzeroCorner(corner.norm()));
        }
    }
    let n = p.n();
    let mut v = CMat::zeros(n, 2);
    v.set_block(0, 0, &p.a_hat.block(0, n, n, 1));
    v.set_block(0, 1, &p.b_hat.block(0, n, n, 1));
    let mut w = CMat::zeros(2, n);
    w.set_block(0, 0, &(-&p.b_hat.block(n, 0, 1, n)));
    w.set_block(1, 0, &p.a_hat.block(n, 0, 1, n));
    Ok(Representation { n, k: 2, tau: p.tau, a: p.upper_left_a(), b: p.upper_left_b(), v, w })
}

/// Largest deviation between the blocks of `[Â, B̂]` and the closed forms
/// `[A,B] − vw`, `Av₂ − Bv₁` and `w₂B + w₁A`, for a pair built by
/// [`augment`] (corners are ignored).
pub fn block_commutator_check(p: &AugmentedPair) -> Result<f64> {
    p.validate()?;
    let n = p.n();
    let a = p.upper_left_a();
    let b = p.upper_left_b();
    let v1 = p.a_hat.block(0, n, n, 1);
    let v2 = p.b_hat.block(0, n, n, 1);
    let w1 = -&p.b_hat.block(n, 0, 1, n);
    let w2 = p.a_hat.block(n, 0, 1, n);
    let cm = p.commutator();
    let ul = &(&comm(&a, &b)? - &(&v1 * &w1)) - &(&v2 * &w2);
    let ur = &(&a * &v2) - &(&b * &v1);
    let ll = &(&w2 * &b) + &(&w1 * &a);
    let r_ul = cm.block(0, 0, n, n).dist(&ul);
    let r_ur = cm.block(0, n, n, 1).dist(&ur);
    let r_ll = cm.block(n, 0, 1, n).dist(&ll);
    Ok(r_ul.max(r_ur).max(r_ll))
}

/// Upper-left `n×n` block of `[Â, B̂]`.
pub fn moment_g(p: &AugmentedPair) -> CMat {
    let n = p.n();
    p.commutator().block(0, 0, n, n)
}

/// `τ̂ = diag(τ, …, τ, −nτ)`.
pub fn tau_hat(n: usize, tau: C64) -> CMat {
    let mut d = vec![tau; n + 1];
    d[n] = -tau * n as f64;
    CMat::diag(&d)
}

/// Distance of `[Â, B̂]` from `τ̂ + m`: the Frobenius norm of the upper-left
/// block of `[Â, B̂] − τ̂` together with its corner.
pub fn tau_hat_residual(p: &AugmentedPair, tau: C64) -> f64 {
    let n = p.n();
    let d = &p.commutator() - &tau_hat(n, tau);
    let ul = d.block(0, 0, n, n).norm_fro();
    (ul * ul + d[(n, n)].norm_sqr()).sqrt()
}

/// Whether `[Â, B̂] ∈ τ̂ + m` up to `tol · scale`.
pub fn tau_hat_predicate(p: &AugmentedPair, tau: C64, tol: f64) -> bool {
    tau_hat_residual(p, tau) <= tol * p.scale()
}

/// Convenience: `tau` as a complex scalar check.
pub(crate) fn require_nonzero_tau(tau: C64) -> Result<()> {
    if tau == ZERO || !tau.re.is_finite() || !tau.im.is_finite() {
        return Err(Error::InvalidParameter("tau must be finite and nonzero".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
