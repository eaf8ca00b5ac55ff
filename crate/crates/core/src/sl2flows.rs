//! The `SL₂(ℂ)` action `(Â, B̂) ↦ (aÂ + bB̂, cÂ + dB̂)`, its component form on
//! `(A, B, v, w)`, trace coordinates, and the vector fields induced on the
//! chart.

use std::ops::Mul;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{from_chart, slice_residual, solve_slice_muhat, to_chart, ChartPoint};
use crate::error::{Error, Result};
use crate::linalg::{c, eigenvalues, min_gap, CMat, C64, ONE, ZERO};
use crate::variety::{augment, fingerprint, moment_map, require_nonzero_tau, AugmentedPair, Fingerprint, Representation};

/// Tolerance on `|ad − bc − 1|`.
pub const DET_TOL: f64 = 1e-12;

/// A 2×2 matrix `(a b; c d)`, normally of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SL2Element {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl SL2Element {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let g = SL2Element { a, b, c, d };
        let defect = (g.det() - ONE).norm();
        if defect > DET_TOL {
            return Err(Error::InvalidParameter(format!("ad - bc - 1 = {defect:e}")));
        }
        Ok(g)
    }

    /// No determinant check; for negative controls.
    pub fn new_unchecked(a: C64, b: C64, c: C64, d: C64) -> Self {
        SL2Element { a, b, c, d }
    }

    pub fn identity() -> Self {
        SL2Element { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    /// `h₁(t) = (1 0; t 1)`.
    pub fn h1(t: C64) -> Self {
        SL2Element { a: ONE, b: ZERO, c: t, d: ONE }
    }

    /// `h₂(t) = (1 t; 0 1)`.
    pub fn h2(t: C64) -> Self {
        SL2Element { a: ONE, b: t, c: ZERO, d: ONE }
    }

    /// `h(t) = diag(eᵗ, e⁻ᵗ)`.
    pub fn h(t: C64) -> Self {
        SL2Element { a: t.exp(), b: ZERO, c: ZERO, d: (-t).exp() }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        SL2Element { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    pub fn dist(&self, other: &SL2Element) -> f64 {
        [(self.a - other.a), (self.b - other.b), (self.c - other.c), (self.d - other.d)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `(a b; c (1 + bc)/a)` with `a`, `b`, `c` drawn from a box and
    /// `|a| > 0.3`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let a = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let cc = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if a.norm() > 0.3 {
                return SL2Element { a, b, c: cc, d: (ONE + b * cc) / a };
            }
        }
    }
}

impl Mul for SL2Element {
    type Output = SL2Element;
    fn mul(self, o: SL2Element) -> SL2Element {
        SL2Element {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// `(0 0; 1 0)`, exponentiating to `h₁`.
    E,
    /// `(0 1; 0 0)`, exponentiating to `h₂`.
    F,
    /// `diag(1, −1)`, exponentiating to `h`.
    H,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e" => Ok(GeneratorKind::E),
            "f" => Ok(GeneratorKind::F),
            "h" => Ok(GeneratorKind::H),
            other => Err(Error::InvalidParameter(format!("unknown generator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SL2Generator {
    pub kind: GeneratorKind,
    pub coeff: C64,
}

impl SL2Generator {
    pub fn e() -> Self {
        SL2Generator { kind: GeneratorKind::E, coeff: ONE }
    }

    pub fn f() -> Self {
        SL2Generator { kind: GeneratorKind::F, coeff: ONE }
    }

    pub fn h() -> Self {
        SL2Generator { kind: GeneratorKind::H, coeff: ONE }
    }

    pub fn new(kind: GeneratorKind) -> Self {
        SL2Generator { kind, coeff: ONE }
    }

    pub fn scaled(self, s: C64) -> Self {
        SL2Generator { coeff: self.coeff * s, ..self }
    }

    pub fn algebra(&self) -> Sl2Algebra {
        let k = self.coeff;
        match self.kind {
            GeneratorKind::E => Sl2Algebra { diag: ZERO, upper: ZERO, lower: k },
            GeneratorKind::F => Sl2Algebra { diag: ZERO, upper: k, lower: ZERO },
            GeneratorKind::H => Sl2Algebra { diag: k, upper: ZERO, lower: ZERO },
        }
    }

    /// `exp(t·X)` in closed form.
    pub fn exp(&self, t: C64) -> SL2Element {
        let s = self.coeff * t;
        match self.kind {
            GeneratorKind::E => SL2Element::h1(s),
            GeneratorKind::F => SL2Element::h2(s),
            GeneratorKind::H => SL2Element::h(s),
        }
    }
}

/// Traceless 2×2 matrix `(diag upper; lower −diag)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sl2Algebra {
    pub diag: C64,
    pub upper: C64,
    pub lower: C64,
}

impl Sl2Algebra {
    pub fn scale(&self, s: C64) -> Self {
        Sl2Algebra { diag: self.diag * s, upper: self.upper * s, lower: self.lower * s }
    }

    pub fn add(&self, o: &Sl2Algebra) -> Self {
        Sl2Algebra { diag: self.diag + o.diag, upper: self.upper + o.upper, lower: self.lower + o.lower }
    }

    /// `XY − YX`.
    pub fn bracket(&self, o: &Sl2Algebra) -> Self {
        Sl2Algebra {
            diag: self.upper * o.lower - self.lower * o.upper,
            upper: 2.0 * (self.diag * o.upper - self.upper * o.diag),
            lower: 2.0 * (self.lower * o.diag - self.diag * o.lower),
        }
    }

    /// `exp(X) = cosh δ·I + (sinh δ/δ)·X` with `δ² = diag² + upper·lower`.
    pub fn exp(&self) -> SL2Element {
        if self.upper == ZERO && self.lower == ZERO {
            return SL2Element::h(self.diag);
        }
        if self.diag == ZERO && (self.upper == ZERO || self.lower == ZERO) {
            return SL2Element { a: ONE, b: self.upper, c: self.lower, d: ONE };
        }
        let d2 = self.diag * self.diag + self.upper * self.lower;
        let (ch, sc) = if d2.norm() < 1e-6 {
            (
                ONE + d2 / 2.0 + d2 * d2 / 24.0 + d2 * d2 * d2 / 720.0,
                ONE + d2 / 6.0 + d2 * d2 / 120.0 + d2 * d2 * d2 / 5040.0,
            )
        } else {
            let d = d2.sqrt();
            (d.cosh(), d.sinh() / d)
        };
        SL2Element { a: ch + sc * self.diag, b: sc * self.upper, c: sc * self.lower, d: ch - sc * self.diag }
    }

    pub fn norm(&self) -> f64 {
        (2.0 * self.diag.norm_sqr() + self.upper.norm_sqr() + self.lower.norm_sqr()).sqrt()
    }
}

/// `(aÂ + bB̂, cÂ + dB̂)`.
pub fn act_pair(g: &SL2Element, p: &AugmentedPair) -> AugmentedPair {
    AugmentedPair {
        tau: p.tau,
        a_hat: &p.a_hat.scale(g.a) + &p.b_hat.scale(g.b),
        b_hat: &p.a_hat.scale(g.c) + &p.b_hat.scale(g.d),
    }
}

/// `(aA + bB, cA + dB, (av₁ + bv₂, cv₁ + dv₂), (dw₁ − cw₂; aw₂ − bw₁))`.
pub fn act_components(g: &SL2Element, r: &Representation) -> Result<Representation> {
    r.validate()?;
    if r.k != 2 {
        return Err(Error::ShapeMismatch(format!("the SL2 action needs k = 2, got {}", r.k)));
    }
    let (v1, v2) = (r.v_col(0), r.v_col(1));
    let (w1, w2) = (r.w_row(0), r.w_row(1));
    let mut v = CMat::zeros(r.n, 2);
    v.set_block(0, 0, &(&v1.scale(g.a) + &v2.scale(g.b)));
    v.set_block(0, 1, &(&v1.scale(g.c) + &v2.scale(g.d)));
    let mut w = CMat::zeros(2, r.n);
    w.set_block(0, 0, &(&w1.scale(g.d) - &w2.scale(g.c)));
    w.set_block(1, 0, &(&w2.scale(g.a) - &w1.scale(g.b)));
    Ok(Representation {
        n: r.n,
        k: 2,
        tau: r.tau,
        a: &r.a.scale(g.a) + &r.b.scale(g.b),
        b: &r.a.scale(g.c) + &r.b.scale(g.d),
        v,
        w,
    })
}

/// `‖μ(g·r) − τI‖_F`.
pub fn check_moment_preserved(g: &SL2Element, r: &Representation) -> Result<f64> {
    let moved = act_components(g, r)?;
    Ok(moment_map(&moved)?.dist(&CMat::identity(r.n).scale(r.tau)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointProbe {
    pub before: Fingerprint,
    pub after: Fingerprint,
    pub separation: f64,
}

/// Compares the fingerprints of `r` and `h(t)·r`.
pub fn fixed_point_probe(r: &Representation, t: C64) -> Result<FixedPointProbe> {
    if r.a.max_abs() == 0.0 && r.b.max_abs() == 0.0 {
        return Err(Error::ZeroPair);
    }
    if t == ZERO {
        return Err(Error::InvalidParameter("probe time must be nonzero".into()));
    }
    let moved = act_components(&SL2Element::h(t), r)?;
    let before = fingerprint(r, None);
    let after = fingerprint(&moved, None);
    let separation = before.max_abs_diff(&after);
    Ok(FixedPointProbe { before, after, separation })
}

/// Power sums `s_k = tr Âᵏ`, `k = 1, …, n+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCoords {
    pub s: Vec<C64>,
}

pub fn trace_coords(a_hat: &CMat) -> TraceCoords {
    let mut s = Vec::with_capacity(a_hat.rows());
    let mut power = a_hat.clone();
    for _ in 0..a_hat.rows() {
        s.push(power.trace());
        power = &power * a_hat;
    }
    TraceCoords { s }
}

pub fn lambdahat_to_s(lambdahat: &[C64]) -> TraceCoords {
    let s = (1..=lambdahat.len())
        .map(|k| lambdahat.iter().map(|l| l.powu(k as u32)).sum())
        .collect();
    TraceCoords { s }
}

/// Recovers the eigenvalues from `(s₁, …, s_m)` by Newton's identities and
/// the companion matrix, polished by Newton steps on the polynomial.
pub fn s_to_lambdahat(s: &TraceCoords) -> Result<Vec<C64>> {
    let m = s.s.len();
    if m == 0 {
        return Err(Error::RootFindingFailure);
    }
    // elementary symmetric polynomials: k e_k = Σ_{i=1..k} (−1)^{i−1} e_{k−i} s_i
    let mut e = vec![ONE];
    for k in 1..=m {
        let mut acc = ZERO;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * s.s[i - 1] * sign;
        }
        e.push(acc / k as f64);
    }
    // xᵐ + c_{m−1}x^{m−1} + … + c_0 with c_{m−k} = (−1)^k e_k
    let coef: Vec<C64> = (0..m)
        .map(|j| {
            let k = m - j;
            e[k] * if k.is_multiple_of(2) { 1.0 } else { -1.0 }
        })
        .collect();
    let companion = CMat::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -coef[i]
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let mut roots = eigenvalues(&companion).map_err(|_| Error::RootFindingFailure)?;
    let poly = |x: C64| -> (C64, C64) {
        let (mut p, mut dp) = (ONE, ZERO);
        for j in (0..m).rev() {
            dp = dp * x + p;
            p = p * x + coef[j];
        }
        (p, dp)
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = poly(*r);
            if dp.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
    }
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || min_gap(&roots) <= 1e-8 * scale {
        return Err(Error::RootFindingFailure);
    }
    let back = lambdahat_to_s(&roots);
    let err = back.s.iter().zip(&s.s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let s_scale = s.s.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if err > 1e-8 * s_scale {
        return Err(Error::RootFindingFailure);
    }
    let perm = crate::linalg::sort_permutation(&roots, 1e-12 * scale);
    Ok(perm.into_iter().map(|i| roots[i]).collect())
}

/// `∂s_k/∂λ̂_j = k·λ̂_jᵏ⁻¹`.
pub fn newton_jacobian(lambdahat: &[C64]) -> CMat {
    let m = lambdahat.len();
    CMat::from_fn(m, m, |k, j| lambdahat[j].powu(k as u32) * (k + 1) as f64)
}

/// A tangent vector at a chart point. `None` marks a component that is not
/// determined (analytic fields only state some components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartTangent {
    pub base: ChartPoint,
    pub lambda: Vec<Option<C64>>,
    pub lambdahat: Vec<Option<C64>>,
    pub mu: Vec<Option<C64>>,
    pub muhat: Vec<Option<C64>>,
    /// Components along `∂/∂s_k`, `k = 1, …, n+1`.
    pub trace: Vec<Option<C64>>,
}

impl ChartTangent {
    fn unspecified(base: &ChartPoint) -> ChartTangent {
        let n = base.n();
        ChartTangent {
            base: base.clone(),
            lambda: vec![None; n],
            lambdahat: vec![None; n + 1],
            mu: vec![None; n],
            muhat: vec![None; n + 1],
            trace: vec![None; n + 1],
        }
    }

    /// Builds a fully specified tangent from `4n+2` coordinate derivatives;
    /// the trace components follow from `λ̂` by the Newton Jacobian.
    pub fn from_coordinates(base: &ChartPoint, d: &[C64]) -> Result<ChartTangent> {
        let n = base.n();
        let split = ChartPoint::from_coordinates(n, base.tau, d)?;
        let ds = &newton_jacobian(&base.lambdahat) * &CMat::column(&split.lambdahat);
        let wrap = |v: Vec<C64>| v.into_iter().map(Some).collect();
        Ok(ChartTangent {
            base: base.clone(),
            lambda: wrap(split.lambda),
            lambdahat: wrap(split.lambdahat),
            mu: wrap(split.mu),
            muhat: wrap(split.muhat),
            trace: wrap(ds.col_vec(0)),
        })
    }

    /// Chart components in `(λ, λ̂, μ, μ̂)` order, if all are specified.
    pub fn coordinates(&self) -> Option<Vec<C64>> {
        self.lambda
            .iter()
            .chain(&self.lambdahat)
            .chain(&self.mu)
            .chain(&self.muhat)
            .copied()
            .collect()
    }

    /// `λ̂` components recovered from the trace components (when all are set).
    pub fn lambdahat_from_trace(&self) -> Result<Option<Vec<C64>>> {
        let ds: Option<Vec<C64>> = self.trace.iter().copied().collect();
        let Some(ds) = ds else { return Ok(None) };
        let jac = newton_jacobian(&self.base.lambdahat);
        let sol = crate::linalg::solve(&jac, &CMat::column(&ds), 1e-14)?;
        Ok(Some(sol.col_vec(0)))
    }

    /// Largest difference over components specified in both tangents.
    pub fn max_specified_diff(&self, other: &ChartTangent) -> f64 {
        let pairs = |a: &Vec<Option<C64>>, b: &Vec<Option<C64>>| -> f64 {
            a.iter()
                .zip(b)
                .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).norm()))
                .fold(0.0, f64::max)
        };
        [
            pairs(&self.lambda, &other.lambda),
            pairs(&self.lambdahat, &other.lambdahat),
            pairs(&self.mu, &other.mu),
            pairs(&self.muhat, &other.muhat),
            pairs(&self.trace, &other.trace),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn specified_count(&self) -> usize {
        [&self.lambda, &self.lambdahat, &self.mu, &self.muhat, &self.trace]
            .iter()
            .map(|v| v.iter().filter(|z| z.is_some()).count())
            .sum()
    }
}

/// Finite-difference settings for [`induced_field_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldOptions {
    pub step: f64,
    pub richardson: bool,
    pub tol: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions { step: 1e-5, richardson: false, tol: crate::linalg::DEFAULT_TOL }
    }
}

/// Chart coordinates along the orbit `t ↦ exp(t·gen)·p`, with eigenvalues
/// matched to `c` by proximity.
pub fn orbit_chart(gen: &SL2Generator, p: &AugmentedPair, c: &ChartPoint, t: C64, tol: f64) -> Result<ChartPoint> {
    let moved = act_pair(&gen.exp(t), p);
    to_chart(&moved, tol)?.align_to(c)
}

/// Central-difference derivative of the chart coordinates along the flow of
/// `gen` at `c`.
pub fn induced_field_numeric(gen: &SL2Generator, c: &ChartPoint, opts: FieldOptions) -> Result<ChartTangent> {
    let p = from_chart(c, opts.tol)?;
    let central = |h: f64| -> Result<Vec<C64>> {
        let plus = orbit_chart(gen, &p, c, C64::new(h, 0.0), opts.tol)?.coordinates();
        let minus = orbit_chart(gen, &p, c, C64::new(-h, 0.0), opts.tol)?.coordinates();
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let coarse = central(opts.step)?;
    let d = if opts.richardson {
        let fine = central(opts.step / 2.0)?;
        fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
    } else {
        coarse
    };
    ChartTangent::from_coordinates(c, &d)
}

/// The components of the induced fields that follow in closed form:
///
/// * `E`: `λ, λ̂, μ` fixed and `μ̂_k ↦ μ̂_k + tλ̂_k`;
/// * `H`: `(∂s₁, ∂s₂)` components `(s₁, 2s₂)`;
/// * `F`: at `μ = 0`, `(∂s₁, ∂s₂)` components `(tr D_μ̂, 2 tr D_λ̂D_μ̂)`.
///
/// Everything else is left unspecified.
pub fn analytic_field(gen: &SL2Generator, c: &ChartPoint, tol: f64) -> Result<ChartTangent> {
    let p = from_chart(c, tol)?;
    let n = c.n();
    let k = gen.coeff;
    let mut out = ChartTangent::unspecified(c);
    match gen.kind {
        GeneratorKind::E => {
            out.lambda = vec![Some(ZERO); n];
            out.lambdahat = vec![Some(ZERO); n + 1];
            out.mu = vec![Some(ZERO); n];
            out.muhat = c.lambdahat.iter().map(|&l| Some(k * l)).collect();
            out.trace = vec![Some(ZERO); n + 1];
        }
        GeneratorKind::H => {
            let s = trace_coords(&p.a_hat).s;
            out.trace[0] = Some(k * s[0]);
            if n >= 1 {
                out.trace[1] = Some(k * 2.0 * s[1]);
            }
        }
        GeneratorKind::F => {
            let mu_scale = c.mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if mu_scale <= tol * p.scale() {
                let tr_mu: C64 = c.muhat.iter().sum();
                let tr_lm: C64 = c.lambdahat.iter().zip(&c.muhat).map(|(l, m)| l * m).sum();
                out.trace[0] = Some(k * tr_mu);
                out.trace[1] = Some(k * 2.0 * tr_lm);
            }
        }
    }
    Ok(out)
}

/// `(tr D_μ̂)s₂ − (tr D_λ̂D_μ̂)s₁`.
pub fn independence_determinant(c: &ChartPoint) -> C64 {
    let s = lambdahat_to_s(&c.lambdahat).s;
    let tr_mu: C64 = c.muhat.iter().sum();
    let tr_lm: C64 = c.lambdahat.iter().zip(&c.muhat).map(|(l, m)| l * m).sum();
    tr_mu * s[1] - tr_lm * s[0]
}

pub const INDEPENDENCE_MAX_TRIES: usize = 200;
/// Threshold on `|independence_determinant|`.
pub const INDEPENDENCE_MARGIN: f64 = 0.1;

/// A chart point on the slice `μ = 0`, `Σλ = Σλ̂`, `corner(B̂) = 0` at which
/// the trace components of the `F`- and `H`-fields are independent.
pub fn find_independence_point(n: usize, tau: C64, seed: u64, tol: f64) -> Result<ChartPoint> {
    require_nonzero_tau(tau)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = n as f64 + 1.0;
    let distinct = |rng: &mut ChaCha8Rng, count: usize| -> Vec<C64> {
        let mut out: Vec<C64> = Vec::with_capacity(count);
        while out.len() < count {
            let z = c(rng.gen_range(-radius..radius), rng.gen_range(-1.0..1.0));
            if out.iter().all(|l| (l - z).norm() >= 0.5) {
                out.push(z);
            }
        }
        out
    };
    for _ in 0..INDEPENDENCE_MAX_TRIES {
        let lambda = distinct(&mut rng, n);
        let mut lambdahat = distinct(&mut rng, n + 1);
        let shift = (lambda.iter().sum::<C64>() - lambdahat.iter().sum::<C64>()) / (n + 1) as f64;
        for l in &mut lambdahat {
            *l += shift;
        }
        let crossing = lambda.iter().flat_map(|a| lambdahat.iter().map(move |b| (a - b).norm())).fold(f64::INFINITY, f64::min);
        if crossing < 0.25 {
            continue;
        }
        let muhat = (0..=n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let candidate = ChartPoint { lambda, lambdahat, mu: vec![ZERO; n], muhat, tau };
        let Ok(candidate) = solve_slice_muhat(&candidate, tol) else { continue };
        if independence_determinant(&candidate).norm() <= INDEPENDENCE_MARGIN {
            continue;
        }
        let Ok(p) = from_chart(&candidate, tol) else { continue };
        let (r1, r2) = slice_residual(&p);
        if r1.norm() > 1e-9 * p.scale() || r2.norm() > 1e-9 * p.scale() {
            continue;
        }
        return Ok(candidate);
    }
    Err(Error::SearchExhausted(INDEPENDENCE_MAX_TRIES))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub rank: usize,
    /// `σ₃/σ₁` of the stacked fields.
    pub ratio: f64,
    pub singular_values: Vec<f64>,
}

/// Stacks the numeric `E`, `F`, `H` fields at `c` into a `3 × (4n+2)` matrix.
pub fn independence_rank(c: &ChartPoint, opts: FieldOptions) -> Result<IndependenceCertificate> {
    let rows: Vec<Vec<C64>> = [SL2Generator::e(), SL2Generator::f(), SL2Generator::h()]
        .iter()
        .map(|g| {
            induced_field_numeric(g, c, opts).map(|t| t.coordinates().expect("numeric fields are fully specified"))
        })
        .collect::<Result<_>>()?;
    let m = CMat::from_rows(&rows)?;
    let sv = m.singular_values();
    let rank = sv.iter().filter(|&&s| s > 1e-6 * sv[0]).count();
    let ratio = if sv[0] > 0.0 { sv[2] / sv[0] } else { 0.0 };
    Ok(IndependenceCertificate { rank, ratio, singular_values: sv })
}

/// Derivative of the two slice residuals along the flow of `gen` at `c`.
pub fn slice_tangency(gen: &SL2Generator, c: &ChartPoint, opts: FieldOptions) -> Result<(C64, C64)> {
    let p = from_chart(c, opts.tol)?;
    let h = opts.step;
    let (pa, pb) = slice_residual(&act_pair(&gen.exp(C64::new(h, 0.0)), &p));
    let (ma, mb) = slice_residual(&act_pair(&gen.exp(C64::new(-h, 0.0)), &p));
    Ok(((pa - ma) / (2.0 * h), (pb - mb) / (2.0 * h)))
}

/// Convenience: `augment(act_components(g, r))`.
pub fn act_augmented(g: &SL2Element, r: &Representation) -> Result<AugmentedPair> {
    augment(&act_components(g, r)?)
}
