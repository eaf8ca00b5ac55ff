//! Regularity predicates for augmented matrices and the conjugation by
//! `diag(L, 1)` to the arrow form
//!
//! ```text
//! ( λ₁        x₁ )
//! (    ⋱      ⋮  )
//! (       λₙ  xₙ )
//! ( 1  ⋯  1   Λ  )
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig, eigenvalues, min_gap, numeric_rank, CMat, ONE, ZERO};
use crate::variety::{AugmentedPair, GaugeElement};

/// `min_gap(eigenvalues of M) > tol · max(1, ‖M‖)`.
pub fn is_regular_semisimple(m: &CMat, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    match eigenvalues(m) {
        Ok(values) => values.len() < 2 || min_gap(&values) > tol * m.norm_fro().max(1.0),
        Err(_) => false,
    }
}

/// Rank of the infinitesimal action `ξ ↦ [diag(ξ, 0), Â]` of `gl_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDimension {
    pub rank: usize,
    /// `rank == n²`, i.e. the stabilizer in `G` is trivial.
    pub g_regular: bool,
}

pub fn orbit_dimension(a_hat: &CMat, tol: f64) -> OrbitDimension {
    let size = a_hat.rows();
    let n = size - 1;
    let mut map = CMat::zeros(size * size, n * n);
    for i in 0..n {
        for j in 0..n {
            let xi = CMat::unit(size, size, i, j);
            let image = &(&xi * a_hat) - &(a_hat * &xi);
            for (r, z) in image.entries().into_iter().enumerate() {
                map[(r, i * n + j)] = z;
            }
        }
    }
    let rank = numeric_rank(&map, tol);
    OrbitDimension { rank, g_regular: rank == n * n }
}

/// Membership in `ĝ⁰`: `G`-regular, and no eigenvector `z` of `A` makes
/// `(z; 0)` an eigenvector of `Â`.
///
/// Only defined when `A` is regular semisimple.
pub fn in_g0hat(a_hat: &CMat, tol: f64) -> Result<bool> {
    let n = a_hat.rows() - 1;
    let a = a_hat.block(0, 0, n, n);
    if !is_regular_semisimple(&a, tol) {
        return Err(Error::DegenerateA);
    }
    if !orbit_dimension(a_hat, tol).g_regular {
        return Ok(false);
    }
    let e = eig(&a, tol)?;
    let scale = a_hat.norm_fro().max(1.0);
    for (j, &lambda) in e.values.iter().enumerate() {
        let z = e.g_inv.block(0, j, n, 1);
        let mut lifted = CMat::zeros(n + 1, 1);
        lifted.set_block(0, 0, &z);
        let defect = (&(a_hat * &lifted) - &lifted.scale(lambda)).norm_fro();
        if defect <= tol * scale * z.norm_fro() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub is_regular_semisimple_a: bool,
    pub is_regular_semisimple_ahat: bool,
    pub in_g0hat: bool,
    pub orbit_dim: usize,
    pub min_gap: f64,
}

impl RegularityReport {
    pub fn is_strongly_semisimple(&self) -> bool {
        self.in_g0hat && self.is_regular_semisimple_a && self.is_regular_semisimple_ahat
    }
}

pub fn regularity_report(a_hat: &CMat, tol: f64) -> RegularityReport {
    let n = a_hat.rows() - 1;
    let a = a_hat.block(0, 0, n, n);
    let gap_a = eigenvalues(&a).map(|v| min_gap(&v)).unwrap_or(0.0);
    let gap_hat = eigenvalues(a_hat).map(|v| min_gap(&v)).unwrap_or(0.0);
    RegularityReport {
        is_regular_semisimple_a: is_regular_semisimple(&a, tol),
        is_regular_semisimple_ahat: is_regular_semisimple(a_hat, tol),
        in_g0hat: in_g0hat(a_hat, tol).unwrap_or(false),
        orbit_dim: orbit_dimension(a_hat, tol).rank,
        min_gap: gap_a.min(gap_hat),
    }
}

pub fn is_strongly_semisimple(a_hat: &CMat, tol: f64) -> bool {
    regularity_report(a_hat, tol).is_strongly_semisimple()
}

/// Whether `Â` already has diagonal upper-left block and an all-ones last row.
pub fn is_normal_form(a_hat: &CMat, tol: f64) -> bool {
    let n = a_hat.rows() - 1;
    let scale = a_hat.norm_fro().max(1.0);
    let off_diag = (0..n).all(|i| (0..n).all(|j| i == j || a_hat[(i, j)].norm() <= tol * scale));
    let ones = (0..n).all(|j| (a_hat[(n, j)] - ONE).norm() <= tol * scale);
    off_diag && ones
}

/// Conjugates the pair by `diag(g₀, 1)` so that `Â` takes the arrow form
/// with sorted eigenvalues of `A` on the diagonal and ones in the last row.
///
/// `g₀ = diag(y) · g₁`, where `g₁` diagonalizes `A` and `y` is the last row
/// of `Â` after that first conjugation.
pub fn normalize(p: &AugmentedPair, tol: f64) -> Result<(AugmentedPair, GaugeElement)> {
    p.validate()?;
    let n = p.n();
    let a = p.upper_left_a();
    if !is_regular_semisimple(&a, tol) {
        return Err(Error::DegenerateA);
    }
    let e = eig(&a, tol)?;
    let y = &p.a_hat.block(n, 0, 1, n) * &e.g_inv;
    let scale = p.a_hat.norm_fro().max(1.0);
    if let Some(index) = (0..n).find(|&i| y[(0, i)].norm() <= tol * scale) {
        return Err(Error::ZeroLastRowEntry { index });
    }
    let d = CMat::diag(&y.row_vec(0));
    let gauge = GaugeElement::new(&d * &e.g)?;
    let mut out = p.conjugate(&gauge)?;

    // Snap the parts of the form that hold by construction.
    for i in 0..n {
        for j in 0..n {
            out.a_hat[(i, j)] = if i == j { e.values[i] } else { ZERO };
        }
        out.a_hat[(n, i)] = ONE;
    }
    out.a_hat[(n, n)] = p.corner_a();
    out.b_hat[(n, n)] = p.corner_b();

    let direct = p.conjugate(&gauge)?;
    let resid = out.a_hat.dist(&direct.a_hat);
    if resid > 1e-10 * scale {
        return Err(Error::NonConvergent(format!("normalization residual {resid:e}")));
    }
    Ok((out, gauge))
}
