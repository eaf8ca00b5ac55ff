use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require_nonzero_tau, GaugeElement, Representation};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};

const MAX_ROW_DRAWS: usize = 64;
const MIN_ROW_NORM: f64 = 0.1;
const MIN_EIGEN_GAP: f64 = 0.5;

fn unit_square<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Seeded on-shell representation; see [`random_point_with_rng`].
pub fn random_point(n: usize, k: usize, tau: C64, seed: u64) -> Result<Representation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_point_with_rng(n, k, tau, &mut rng)
}

/// Draws a point of `[A, B] − vw = τ·I` with `A` diagonal.
///
/// The diagonal of `A` has pairwise gaps of at least 0.5. Each column of `w`
/// is fixed by the diagonal constraint `(vw)_ii = −τ` (least-norm solution
/// plus a random kernel component when `k = 2`), and then the off-diagonal
/// equations determine `B_ij = (vw)_ij / (λ_i − λ_j)`.
pub fn random_point_with_rng<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    tau: C64,
    rng: &mut R,
) -> Result<Representation> {
    require_nonzero_tau(tau)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidParameter(format!("k must be 1 or 2, got {k}")));
    }

    let radius = n as f64 + 1.0;
    let mut lambda: Vec<C64> = Vec::with_capacity(n);
    while lambda.len() < n {
        let z = c(rng.gen_range(-radius..radius), rng.gen_range(-1.0..1.0));
        if lambda.iter().all(|l| (l - z).norm() >= MIN_EIGEN_GAP) {
            lambda.push(z);
        }
    }

    let mut v = CMat::zeros(n, k);
    for i in 0..n {
        let mut draws = 0;
        loop {
            let row: Vec<C64> = (0..k).map(|_| unit_square(rng)).collect();
            if row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() >= MIN_ROW_NORM {
                for (j, z) in row.into_iter().enumerate() {
                    v[(i, j)] = z;
                }
                break;
            }
            draws += 1;
            if draws >= MAX_ROW_DRAWS {
                return Err(Error::InfeasibleRow(draws));
            }
        }
    }

    let mut w = CMat::zeros(k, n);
    for i in 0..n {
        let row = v.row_vec(i);
        let norm2: f64 = row.iter().map(|z| z.norm_sqr()).sum();
        for (l, z) in row.iter().enumerate() {
            w[(l, i)] = -tau * z.conj() / norm2;
        }
        if k == 2 {
            let kappa = unit_square(rng);
            w[(0, i)] += kappa * row[1];
            w[(1, i)] -= kappa * row[0];
        }
    }

    let vw = &v * &w;
    let mut b = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = if i == j { unit_square(rng) } else { vw[(i, j)] / (lambda[i] - lambda[j]) };
        }
    }
    Representation::new(tau, CMat::diag(&lambda), b, v, w)
}

/// A random well-conditioned element of `GL_n`: identity plus a uniform
/// perturbation of size 1/2 per entry, redrawn until its condition number is
/// below 50.
pub fn random_gauge<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GaugeElement {
    loop {
        let g = CMat::from_fn(n, n, |i, j| {
            let base = if i == j { c(1.0, 0.0) } else { ZERO };
            base + unit_square(rng) * 0.5
        });
        let s = g.singular_values();
        if s[n - 1] > 0.0 && s[0] / s[n - 1] < 50.0 {
            if let Ok(ge) = GaugeElement::new(g) {
                return ge;
            }
        }
    }
}
