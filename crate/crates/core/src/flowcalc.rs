//! Composition of flows: Trotter products for the flow of a sum, group
//! commutators for the flow of a bracket, polynomial-degree detection for
//! unipotent flows, and the witness function `h = tr B̂` for the pair of
//! fields induced by `h₁` and `h₂`.

use serde::{Deserialize, Serialize};

use crate::chart::{from_chart, to_chart, ChartPoint};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, trace_word, CMat, C64, ONE};
use crate::sl2flows::{act_pair, GeneratorKind, SL2Generator, Sl2Algebra};
use crate::variety::{pair_fingerprint, AugmentedPair};

/// Sign relating the bracket of induced vector fields to the matrix bracket:
/// `[V_X, V_Y] = FIELD_BRACKET_SIGN · V_{[X,Y]}`.
///
/// The action is a left action, so `X ↦ V_X` reverses brackets. With the
/// group-commutator step of [`bracket_flow`], the composite flow for `(E, F)`
/// approaches `exp(tH)`, not `exp(−tH)`; [`detect_bracket_sign`] recovers
/// this value at any base point.
pub const FIELD_BRACKET_SIGN: f64 = -1.0;

/// A one-parameter flow of an `sl₂` element applied for a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub generator: Sl2Algebra,
    pub time: C64,
}

impl FlowSpec {
    pub fn new(generator: SL2Generator, time: C64) -> Self {
        FlowSpec { generator: generator.algebra(), time }
    }

    pub fn apply(&self, p: &AugmentedPair) -> AugmentedPair {
        flow_exact(&self.generator, self.time, p)
    }

    /// Flow of a chart point; the result is in sorted chart order.
    pub fn apply_chart(&self, c: &ChartPoint, tol: f64) -> Result<ChartPoint> {
        to_chart(&self.apply(&from_chart(c, tol)?), tol)
    }
}

/// `act_pair(exp(t·X), p)`.
pub fn flow_exact(x: &Sl2Algebra, t: C64, p: &AugmentedPair) -> AugmentedPair {
    act_pair(&x.scale(t).exp(), p)
}

/// `(φ_{t/n} ∘ ψ_{t/n})ⁿ(p)` with `φ`, `ψ` the flows of `theta`, `xi`.
pub fn trotter_flow(theta: &Sl2Algebra, xi: &Sl2Algebra, t: C64, n_steps: usize, p: &AugmentedPair) -> AugmentedPair {
    let h = t / n_steps.max(1) as f64;
    let (phi, psi) = (theta.scale(h).exp(), xi.scale(h).exp());
    let mut q = p.clone();
    for _ in 0..n_steps {
        q = act_pair(&phi, &act_pair(&psi, &q));
    }
    q
}

/// `(ψ_{−s} ∘ φ_{−s} ∘ ψ_s ∘ φ_s)ⁿ(p)` with `s = √(t/n)`.
pub fn bracket_flow(theta: &Sl2Algebra, xi: &Sl2Algebra, t: f64, n_steps: usize, p: &AugmentedPair) -> Result<AugmentedPair> {
    if t.is_nan() || t <= 0.0 || n_steps == 0 {
        return Err(Error::InvalidParameter("bracket flow needs t > 0 and n >= 1".into()));
    }
    let s = C64::new((t / n_steps as f64).sqrt(), 0.0);
    let step = [theta.scale(s).exp(), xi.scale(s).exp(), theta.scale(-s).exp(), xi.scale(-s).exp()];
    let mut q = p.clone();
    for _ in 0..n_steps {
        for g in &step {
            q = act_pair(g, &q);
        }
    }
    Ok(q)
}

/// The `sl₂` element whose flow [`bracket_flow`] approximates.
pub fn bracket_target(theta: &Sl2Algebra, xi: &Sl2Algebra) -> Sl2Algebra {
    theta.bracket(xi).scale(C64::new(FIELD_BRACKET_SIGN, 0.0))
}

/// Distance between two pairs measured on their trace-word fingerprints.
pub fn pair_distance(a: &AugmentedPair, b: &AugmentedPair) -> f64 {
    pair_fingerprint(a, None).distance(&pair_fingerprint(b, None))
}

/// Which of `±[Θ, Ξ]` the bracket flow at `p` tracks; returns `+1.0` or `−1.0`.
pub fn detect_bracket_sign(theta: &Sl2Algebra, xi: &Sl2Algebra, t: f64, n_steps: usize, p: &AugmentedPair) -> Result<f64> {
    let q = bracket_flow(theta, xi, t, n_steps, p)?;
    let b = theta.bracket(xi);
    let plus = pair_distance(&q, &flow_exact(&b, C64::new(t, 0.0), p));
    let minus = pair_distance(&q, &flow_exact(&b, C64::new(-t, 0.0), p));
    if plus == minus {
        return Err(Error::BranchAmbiguity);
    }
    Ok(if plus < minus { 1.0 } else { -1.0 })
}

/// Fingerprint errors of [`trotter_flow`] against the exact flow of `Θ + Ξ`.
pub fn trotter_errors(theta: &Sl2Algebra, xi: &Sl2Algebra, t: C64, steps: &[usize], p: &AugmentedPair) -> Vec<f64> {
    let exact = flow_exact(&theta.add(xi), t, p);
    steps.iter().map(|&n| pair_distance(&trotter_flow(theta, xi, t, n, p), &exact)).collect()
}

/// Fingerprint errors of [`bracket_flow`] against the flow of [`bracket_target`].
pub fn bracket_errors(theta: &Sl2Algebra, xi: &Sl2Algebra, t: f64, steps: &[usize], p: &AugmentedPair) -> Result<Vec<f64>> {
    let exact = flow_exact(&bracket_target(theta, xi), C64::new(t, 0.0), p);
    steps.iter().map(|&n| Ok(pair_distance(&bracket_flow(theta, xi, t, n, p)?, &exact))).collect()
}

/// Least-squares slope of `log err` against `log n`, negated so that an
/// error decaying like `n^{-k}` gives `k`.
pub fn loglog_slope(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

pub fn is_monotone_nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

/// A trace word in `(Â, B̂)`: letter 0 is `Â`, letter 1 is `B̂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFunction {
    pub word: Vec<usize>,
}

impl TraceFunction {
    pub fn new(word: Vec<usize>) -> Result<Self> {
        if word.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter("trace words use letters 0 (A-hat) and 1 (B-hat)".into()));
        }
        Ok(TraceFunction { word })
    }

    pub fn tr_a_hat() -> Self {
        TraceFunction { word: vec![0] }
    }

    pub fn tr_b_hat() -> Self {
        TraceFunction { word: vec![1] }
    }

    pub fn degree(&self) -> usize {
        self.word.len()
    }

    pub fn eval(&self, p: &AugmentedPair) -> C64 {
        trace_word(&[&p.a_hat, &p.b_hat], &self.word).expect("letters checked on construction")
    }

    /// `max(1, ∏ ‖letter‖_F)`.
    pub fn scale(&self, p: &AugmentedPair) -> f64 {
        let norms = [p.a_hat.norm_fro(), p.b_hat.norm_fro()];
        self.word.iter().map(|&l| norms[l]).product::<f64>().max(1.0)
    }
}

/// Threshold on the monomial Vandermonde condition number in [`lnd_degree`].
pub const LND_MAX_COND: f64 = 1e10;

/// Least `d` such that `t ↦ f(exp(t·gen)·p)` is a polynomial of degree `d`
/// on `[−1, 1]`, judged from `d_max + 2` Chebyshev samples: the fit residual
/// must be below `1e-8` times the largest sampled `|f|` (at least 1).
pub fn lnd_degree(gen: &SL2Generator, f: &TraceFunction, p: &AugmentedPair, d_max: usize) -> Result<usize> {
    if gen.kind == GeneratorKind::H {
        return Err(Error::InvalidParameter("degree detection needs a unipotent generator (E or F)".into()));
    }
    let count = d_max + 2;
    let nodes: Vec<f64> = (0..count)
        .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut scale: f64 = 1.0;
    for &t in &nodes {
        let q = act_pair(&gen.exp(C64::new(t, 0.0)), p);
        let v = f.eval(&q);
        scale = scale.max(v.norm());
        values.push(v);
    }
    let rhs = CMat::column(&values);
    for d in 0..=d_max {
        let vander = CMat::from_fn(count, d + 1, |i, j| C64::new(nodes[i].powi(j as i32), 0.0));
        let sv = vander.singular_values();
        if sv[0] / sv[d] > LND_MAX_COND {
            return Err(Error::IllConditionedFit(d));
        }
        let (_, resid) = least_squares(&vander, &rhs, 1e-14)?;
        if resid <= 1e-8 * scale {
            return Ok(d);
        }
    }
    Err(Error::NotNilpotent(d_max))
}

/// The values certifying that `h = tr B̂` is a witness for the pair
/// `(Θ, Ξ)` of fields induced by `h₁` and `h₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `Ξ(h)`.
    pub xi_h: C64,
    /// `Θ(h)`.
    pub theta_h: C64,
    /// `Θ²(h)`.
    pub theta2_h: C64,
    pub tr_a_hat: C64,
    /// Polynomial degree of `h` along the `Θ`-orbit.
    pub theta_degree: usize,
    /// Polynomial degree of `h` along the `Ξ`-orbit.
    pub xi_degree: usize,
    /// Largest of `|Ξ(h)|`, `|Θ(h) − tr Â|`, `|Θ²(h)|`.
    pub residual: f64,
    pub scale: f64,
}

/// Evaluates `Ξ(h)`, `Θ(h)`, `Θ²(h)` for `h = tr B̂`.
///
/// Along both orbits `h` is a polynomial of degree at most one (checked by
/// [`lnd_degree`]), so unit-step central differences are exact.
pub fn compatible_witness(p: &AugmentedPair, tol: f64) -> Result<WitnessReport> {
    p.validate()?;
    let h = TraceFunction::tr_b_hat();
    let (theta, xi) = (SL2Generator::e(), SL2Generator::f());
    let theta_degree = lnd_degree(&theta, &h, p, 4)?;
    let xi_degree = lnd_degree(&xi, &h, p, 4)?;
    let along = |g: &SL2Generator, t: f64| h.eval(&act_pair(&g.exp(C64::new(t, 0.0)), p));
    let (tp, t0, tm) = (along(&theta, 1.0), h.eval(p), along(&theta, -1.0));
    let theta_h = (tp - tm) / 2.0;
    let theta2_h = tp - 2.0 * t0 + tm;
    let xi_h = (along(&xi, 1.0) - along(&xi, -1.0)) / 2.0;
    let tr_a_hat = p.a_hat.trace();
    let residual = xi_h.norm().max((theta_h - tr_a_hat).norm()).max(theta2_h.norm());
    let scale = p.a_hat.norm_fro().max(p.b_hat.norm_fro()).max(1.0);
    if tr_a_hat.norm() <= tol * scale {
        return Err(Error::WitnessFailsNonvanishing(tr_a_hat.norm()));
    }
    Ok(WitnessReport { xi_h, theta_h, theta2_h, tr_a_hat, theta_degree, xi_degree, residual, scale })
}

/// The generator `kind` with unit coefficient, as an algebra element.
pub fn unit(kind: GeneratorKind) -> Sl2Algebra {
    SL2Generator { kind, coeff: ONE }.algebra()
}
