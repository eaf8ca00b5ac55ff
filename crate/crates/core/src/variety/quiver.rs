//! The moment map of the doubled two-vertex quiver and the dictionary
//! relating its arrows to `(v, w)`.

use serde::{Deserialize, Serialize};

use super::Representation;
use crate::error::{Error, Result};
use crate::linalg::{comm, CMat, C64};

/// `ν = ([A, B] + X₁Y₂ − X₂Y₁, Y₁X₂ − Y₂X₁)`.
pub fn quiver_nu(
    a: &CMat,
    b: &CMat,
    x1: &CMat,
    x2: &CMat,
    y1: &CMat,
    y2: &CMat,
) -> Result<(CMat, C64)> {
    let n = a.rows();
    for (name, m, want) in [
        ("X1", x1, (n, 1)),
        ("X2", x2, (n, 1)),
        ("Y1", y1, (1, n)),
        ("Y2", y2, (1, n)),
    ] {
        if m.shape() != want {
            return Err(Error::ShapeMismatch(format!("{name} is {:?}, expected {want:?}", m.shape())));
        }
    }
    let nu1 = &(&comm(a, b)? + &(x1 * y2)) - &(x2 * y1);
    let nu2 = (&(y1 * x2) - &(y2 * x1))[(0, 0)];
    Ok((nu1, nu2))
}

/// One way of reading `(X₁, X₂, Y₁, Y₂)` off `(v, w)`:
/// `X₁ = s₁·v_{p(1)}`, `X₂ = s₂·v_{p(2)}`, `Y₁ = w_{q(1)}`, `Y₂ = w_{q(2)}`,
/// where `p`/`q` are the identity or the swap of the two indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DictionaryVariant {
    pub x1_negated: bool,
    pub x2_negated: bool,
    pub swap_v: bool,
    pub swap_w: bool,
}

impl DictionaryVariant {
    /// `X₁ ↦ −v₁, X₂ ↦ v₂, Y₁ ↦ w₁, Y₂ ↦ w₂` read literally.
    pub const LITERAL: DictionaryVariant =
        DictionaryVariant { x1_negated: true, x2_negated: false, swap_v: false, swap_w: false };

    pub fn all() -> Vec<DictionaryVariant> {
        (0..16u8)
            .map(|bits| DictionaryVariant {
                x1_negated: bits & 1 != 0,
                x2_negated: bits & 2 != 0,
                swap_v: bits & 4 != 0,
                swap_w: bits & 8 != 0,
            })
            .collect()
    }

    pub fn arrows(&self, r: &Representation) -> (CMat, CMat, CMat, CMat) {
        let (p1, p2) = if self.swap_v { (1, 0) } else { (0, 1) };
        let (q1, q2) = if self.swap_w { (1, 0) } else { (0, 1) };
        let sign = |neg: bool| if neg { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) };
        (
            r.v_col(p1).scale(sign(self.x1_negated)),
            r.v_col(p2).scale(sign(self.x2_negated)),
            r.w_row(q1),
            r.w_row(q2),
        )
    }

    pub fn describe(&self) -> String {
        let (p1, p2) = if self.swap_v { (2, 1) } else { (1, 2) };
        let (q1, q2) = if self.swap_w { (2, 1) } else { (1, 2) };
        let s = |neg: bool| if neg { "-" } else { "" };
        format!(
            "X1 -> {}v{p1}, X2 -> {}v{p2}, Y1 -> w{q1}, Y2 -> w{q2}",
            s(self.x1_negated),
            s(self.x2_negated)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryCalibration {
    pub admissible: Vec<DictionaryVariant>,
    pub literal_admissible: bool,
    /// Residual `‖ν₁ − τI‖ + |ν₂ + nτ|` for every variant, in [`DictionaryVariant::all`] order.
    pub residuals: Vec<f64>,
}

/// Tries all sixteen sign/index variants of the dictionary and keeps those
/// that send the on-shell point `r` to `ν = (τ·I_n, −nτ)`.
pub fn dictionary_calibrate(r: &Representation, tol: f64) -> Result<DictionaryCalibration> {
    r.validate()?;
    if r.k != 2 {
        return Err(Error::InvalidParameter("quiver dictionary needs k = 2".into()));
    }
    let target = CMat::identity(r.n).scale(r.tau);
    let target2 = -r.tau * r.n as f64;
    let scale = r.scale();
    let mut admissible = Vec::new();
    let mut residuals = Vec::new();
    for variant in DictionaryVariant::all() {
        let (x1, x2, y1, y2) = variant.arrows(r);
        let (nu1, nu2) = quiver_nu(&r.a, &r.b, &x1, &x2, &y1, &y2)?;
        let res = nu1.dist(&target) + (nu2 - target2).norm();
        if res <= tol * scale {
            admissible.push(variant);
        }
        residuals.push(res);
    }
    if admissible.is_empty() {
        return Err(Error::NoConventionFound);
    }
    let literal_admissible = admissible.contains(&DictionaryVariant::LITERAL);
    Ok(DictionaryCalibration { admissible, literal_admissible, residuals })
}
