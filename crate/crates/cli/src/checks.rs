//! The verification checks behind `verify`.
//!
//! Every check draws its own random stream from the run seed and its name, so
//! records do not depend on which other checks run or in what order. Checks
//! of a "must exceed" kind (negative controls, separation bounds) report the
//! ratio `bound / measured` against a threshold of 1, keeping
//! `pass ⇔ residual ≤ threshold` uniform across the report.

use std::thread;

use cmspace::canonical::{in_g0hat, is_normal_form, normalize};
use cmspace::chart::{
    chart_jacobian, decompose, decompose_ordered, from_chart, CHART_RANK_CUTOFF, random_chart_with_rng, slice_residual, solve_slice_muhat, to_chart,
};
use cmspace::flowcalc::{
    bracket_errors, compatible_witness, detect_bracket_sign, is_monotone_nonincreasing, lnd_degree, loglog_slope,
    trotter_errors, unit, TraceFunction, FIELD_BRACKET_SIGN,
};
use cmspace::linalg::{eigenvalues, match_nearest, numeric_rank, ONE, ZERO};
use cmspace::sl2flows::{
    act_augmented, act_components, act_pair, analytic_field, check_moment_preserved, find_independence_point,
    fixed_point_probe, independence_rank, induced_field_numeric, lambdahat_to_s, s_to_lambdahat, slice_tangency,
    trace_coords, FieldOptions,
};
use cmspace::variety::{
    augment, block_commutator_check, dictionary_calibrate, fingerprint, gauge_act, pair_fingerprint, project, random_gauge,
    random_point_with_rng, trace_word_set,
};
use cmspace::{AugmentedPair, CMat, ChartPoint, GeneratorKind, Representation, Result, SL2Element, SL2Generator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::{Measurement, Record};

pub const SUITES: [&str; 5] = ["variety", "canonical", "chart", "sl2flows", "flowcalc"];

/// Inputs shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckParams {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub tau: C64,
}

impl CheckParams {
    pub fn from_config(cfg: &RunConfig) -> Self {
        CheckParams { ns: cfg.n.values(), trials: cfg.trials, seed: cfg.seed, tol: cfg.tol, tau: cfg.tau }
    }

    /// Random stream for the check `name`.
    pub fn rng(&self, name: &str) -> ChaCha8Rng {
        // FNV-1a keeps the mixing stable across platforms and releases
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    /// Particle counts no larger than `cap` (the smallest one if none are).
    fn ns_up_to(&self, cap: usize) -> Vec<usize> {
        let v: Vec<usize> = self.ns.iter().copied().filter(|&n| n <= cap).collect();
        if v.is_empty() {
            self.ns.iter().copied().min().into_iter().collect()
        } else {
            v
        }
    }
}

type Body = fn(&CheckParams) -> Result<Measurement>;

/// A named property with its statement and pass threshold.
#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub anchor: &'static str,
    pub threshold: f64,
    body: Body,
}

impl Check {
    pub fn suite(&self) -> &'static str {
        self.name.split('.').next().unwrap_or("")
    }

    pub fn run(&self, params: &CheckParams) -> Record {
        Record::run(self.name, self.anchor, self.threshold, || (self.body)(params))
    }
}

pub fn all_checks() -> Vec<Check> {
    macro_rules! check {
        ($name:literal, $thr:expr, $body:expr, $anchor:literal) => {
            Check { name: $name, anchor: $anchor, threshold: $thr, body: $body }
        };
    }
    vec![
        check!("variety.level_set", 1e-12, level_set, "[A,B] - vw = tau*I for seeded points, k in {1,2}"),
        check!("variety.block_identity", 1e-12, block_identity, "blocks of [Ahat,Bhat] are [A,B]-vw, Av2-Bv1, w2B+w1A"),
        check!("variety.augment_roundtrip", 1e-15, augment_roundtrip, "projecting the augmented pair recovers (A,B,v,w)"),
        check!("variety.gauge_invariance", 1e-8, gauge_invariance, "trace words are invariant under the GL_n action"),
        check!("variety.quiver_calibration", 0.0, quiver_calibration, "quiver dictionary maps the level set to nu = (tau*I, -n*tau), point-independently"),
        check!("canonical.normal_form", 1e-9, normal_form, "strongly semisimple Ahat is conjugate to an arrow matrix with unit last row"),
        check!("canonical.g0hat_invariance", 0.0, g0hat_invariance, "membership of Ahat in g0hat is gauge invariant"),
        check!("chart.decomposition", 1e-9, decomposition, "Bhat = B1 + B2 with B1 = diag(mu,0), [Ahat,B2] in tau_hat + m+, g B2 g^-1 = D_muhat + S"),
        check!("chart.hand_case", 1e-12, hand_case, "Ahat = ((0,1),(1,0)), tau = 1: m = 0, S12 = 1/2, S21 = -1/2 for eigenvalues (1,-1)"),
        check!("chart.s_invariance", 1e-10, s_invariance, "S depends only on (tau, lambda, lambdahat)"),
        check!("chart.round_trip", 1e-8, chart_round_trip, "to_chart(from_chart(c)) = c"),
        check!("chart.gauge_equivalence", 1e-8, gauge_equivalence, "from_chart(to_chart(p)) lies in the gauge orbit of p"),
        check!("chart.jacobian_rank", 0.0, jacobian_rank, "chart map has rank 4n+2"),
        check!("chart.slice_solve", 1e-9, slice_solve, "the slice sum(lambda) = sum(lambdahat), corner(Bhat) = 0 is solved in muhat"),
        check!("sl2flows.equivariance", 1e-12, equivariance, "the component action on (A,B,v,w) matches (aAhat+bBhat, cAhat+dBhat)"),
        check!("sl2flows.group_law", 1e-11, group_law, "g1.(g2.p) = (g1 g2).p"),
        check!("sl2flows.moment_preserved", 1e-10, moment_preserved, "SL2 preserves [A,B] - vw = tau*I"),
        check!("sl2flows.non_sl2_control", 1.0, non_sl2_control, "a determinant-2 element leaves the level set (residual above 1e-3*scale)"),
        check!("sl2flows.fixed_point_probe", 1.0, probe_separation, "h(1) moves points with tr A^2 != 0 (separation above 1e-6*scale)"),
        check!("sl2flows.trace_coords", 1e-9, trace_coords_roundtrip, "power sums s_1..s_{n+1} determine the spectrum of Ahat"),
        check!("sl2flows.orbit_rank", 0.0, orbit_rank, "the E, F, H fields are independent at the constructed point"),
        check!("sl2flows.orbit_ratio", 1.0, orbit_ratio, "sigma_3/sigma_1 of the stacked fields exceeds 1e-6"),
        check!("sl2flows.e_field", 1e-6, e_field, "the h1 field is d/dmuhat_k with coefficient lambdahat_k"),
        check!("sl2flows.trace_fields", 1e-6, trace_fields, "H and F fields act on (s1, s2) by (s1, 2 s2) and (tr D_muhat, 2 tr D_lambdahat D_muhat)"),
        check!("sl2flows.slice_tangency", 1e-7, slice_tangency_check, "E, F, H flows are tangent to the slice"),
        check!("flowcalc.trotter_slope", 0.3, trotter_slope, "Trotter products converge at first order (log-log slope in [0.7, 1.3])"),
        check!("flowcalc.bracket_monotone", 0.0, bracket_monotone, "group-commutator flow error is nonincreasing in the step count"),
        check!("flowcalc.bracket_final", 1e-3, bracket_final, "group-commutator flow reaches the bracket flow within 1e-3 at 1024 steps"),
        check!("flowcalc.bracket_sign", 0.0, bracket_sign, "the commutator flow of (E,F) follows the sign FIELD_BRACKET_SIGN * [E,F]"),
        check!("flowcalc.lnd_degree", 0.0, lnd_degrees, "h1 and h2 flows pull trace words back to polynomials of degree at most the word length"),
        check!("flowcalc.witness", 1e-10, witness, "h = tr Bhat: Xi(h) = 0, Theta(h) = tr Ahat, Theta^2(h) = 0"),
    ]
}

/// Checks of the named suites (`all` selects everything), in catalogue order.
pub fn select(suites: &[String]) -> std::result::Result<Vec<Check>, String> {
    for s in suites {
        if s != "all" && !SUITES.contains(&s.as_str()) {
            return Err(format!("unknown suite {s:?}; expected one of all, {}", SUITES.join(", ")));
        }
    }
    let all = suites.iter().any(|s| s == "all");
    Ok(all_checks().into_iter().filter(|c| all || suites.iter().any(|s| s == c.suite())).collect())
}

/// Runs the checks on scoped worker threads, one per check.
pub fn run_checks(checks: &[Check], params: &CheckParams) -> Vec<Record> {
    thread::scope(|scope| {
        let handles: Vec<_> = checks.iter().map(|c| scope.spawn(move || c.run(params))).collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    })
}

fn on_shell(n: usize, p: &CheckParams, rng: &mut ChaCha8Rng) -> Result<Representation> {
    random_point_with_rng(n, 2, p.tau, rng)
}

fn rep_dist(a: &Representation, b: &Representation) -> f64 {
    [a.a.dist(&b.a), a.b.dist(&b.b), a.v.dist(&b.v), a.w.dist(&b.w)].into_iter().fold(0.0, f64::max)
}

fn uniform(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

// ---- variety ----

fn level_set(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("variety.level_set");
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &n in &p.ns {
        for k in 1..=2 {
            for _ in 0..p.trials {
                let r = random_point_with_rng(n, k, p.tau, &mut rng)?;
                worst = worst.max(r.residual() / r.scale());
                count += 1;
            }
        }
    }
    Ok(Measurement::with_detail(worst, format!("{count} points")))
}

fn block_identity(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("variety.block_identity");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            // off-shell on purpose: the identity is algebraic
            let r = Representation::new(
                p.tau,
                CMat::from_fn(n, n, |_, _| uniform(&mut rng)),
                CMat::from_fn(n, n, |_, _| uniform(&mut rng)),
                CMat::from_fn(n, 2, |_, _| uniform(&mut rng)),
                CMat::from_fn(2, n, |_, _| uniform(&mut rng)),
            )?;
            let q = augment(&r)?;
            worst = worst.max(block_commutator_check(&q)? / q.scale());
        }
    }
    Ok(Measurement::new(worst))
}

fn augment_roundtrip(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("variety.augment_roundtrip");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            let back = project(&augment(&r)?, p.tol)?;
            worst = worst.max(rep_dist(&r, &back) / r.scale());
        }
    }
    Ok(Measurement::new(worst))
}

fn gauge_invariance(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("variety.gauge_invariance");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            let moved = gauge_act(&random_gauge(n, &mut rng), &r)?;
            worst = worst.max(fingerprint(&r, None).distance(&fingerprint(&moved, None)));
        }
    }
    Ok(Measurement::new(worst))
}

fn quiver_calibration(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("variety.quiver_calibration");
    let mut reference = None;
    let mut inconsistent = 0usize;
    let mut points = 0usize;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = gauge_act(&random_gauge(n, &mut rng), &on_shell(n, p, &mut rng)?)?;
            let cal = dictionary_calibrate(&r, 1e-10)?;
            points += 1;
            match &reference {
                None => reference = Some(cal),
                Some(first) => {
                    if first.admissible != cal.admissible {
                        inconsistent += 1;
                    }
                }
            }
        }
    }
    let first = reference.expect("at least one point");
    let names: Vec<String> = first.admissible.iter().map(|v| v.describe()).collect();
    Ok(Measurement::with_detail(
        inconsistent as f64,
        format!(
            "{points} points; admissible: [{}]; literal dictionary admissible: {}",
            names.join("; "),
            first.literal_admissible
        ),
    ))
}

// ---- canonical ----

fn normal_form(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("canonical.normal_form");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = gauge_act(&random_gauge(n, &mut rng), &on_shell(n, p, &mut rng)?)?;
            let q = augment(&r)?;
            let (out, g) = normalize(&q, p.tol)?;
            if !is_normal_form(&out.a_hat, 1e-15) {
                return Ok(Measurement::with_detail(f64::INFINITY, "output is not in arrow form"));
            }
            let direct = q.conjugate(&g)?;
            worst = worst
                .max(out.dist(&direct) / q.scale())
                .max(pair_fingerprint(&out, None).distance(&pair_fingerprint(&q, None)));
        }
    }
    Ok(Measurement::new(worst))
}

fn g0hat_invariance(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("canonical.g0hat_invariance");
    let (mut mismatches, mut outside) = (0usize, 0usize);
    for &n in &p.ns {
        for i in 0..p.trials {
            let mut q = augment(&on_shell(n, p, &mut rng)?)?;
            if i % 5 == 0 {
                // zero a last-row entry in the eigenbasis: outside g0hat
                q = normalize(&q, p.tol)?.0;
                q.a_hat[(n, 0)] = ZERO;
            }
            let moved = q.conjugate(&random_gauge(n, &mut rng))?;
            let before = in_g0hat(&q.a_hat, p.tol)?;
            if !before {
                outside += 1;
            }
            if before != in_g0hat(&moved.a_hat, p.tol)? {
                mismatches += 1;
            }
        }
    }
    Ok(Measurement::with_detail(mismatches as f64, format!("{outside} samples outside g0hat")))
}

// ---- chart ----

fn decomposition(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.decomposition");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let q = normalize(&augment(&on_shell(n, p, &mut rng)?)?, p.tol)?.0;
            let d = decompose(&q, p.tol)?;
            let scale = q.scale();
            let sum = (&d.b1 + &d.b2).dist(&q.b_hat);
            let diag = (&(&d.g * &d.b2) * &d.g_inv).dist(&(&CMat::diag(&d.d_muhat) + &d.s));
            let corner = d.b1[(n, n)].norm();
            worst = worst.max(d.b2_residual(&q).max(sum).max(diag).max(corner) / scale);
        }
    }
    Ok(Measurement::new(worst))
}

/// `Â = ((0,1),(1,0))`, `B̂ = ((μ₁,−½),(½,0))`, `τ = 1`.
fn hand_case(p: &CheckParams) -> Result<Measurement> {
    let a = CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?;
    let mut b = CMat::from_real(2, 2, &[0.0, -0.5, 0.5, 0.0])?;
    b[(0, 0)] = C64::new(0.7, -0.2);
    let q = AugmentedPair::new(ONE, a, b)?;
    let d = decompose_ordered(&q, &[ONE, -ONE], p.tol)?;
    let r = d.m[0]
        .norm()
        .max((d.s[(0, 1)] - 0.5).norm())
        .max((d.s[(1, 0)] + 0.5).norm())
        .max(d.b2_residual(&q));
    Ok(Measurement::with_detail(r, "eigenvalues of Ahat listed as (1, -1); the sorted order (-1, 1) flips the sign of S"))
}

fn s_invariance(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.s_invariance");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        let base = random_chart_with_rng(n, p.tau, &mut rng);
        let reference = decompose_ordered(&from_chart(&base, p.tol)?, &base.lambdahat, p.tol)?.s;
        let scale = reference.max_abs().max(1.0);
        for _ in 0..p.trials {
            let mut c = random_chart_with_rng(n, p.tau, &mut rng);
            c.lambda = base.lambda.clone();
            c.lambdahat = base.lambdahat.clone();
            let s = decompose_ordered(&from_chart(&c, p.tol)?, &c.lambdahat, p.tol)?.s;
            worst = worst.max(s.dist(&reference) / scale);
        }
    }
    Ok(Measurement::new(worst))
}

/// Chart points of seeded level-set points, as for [`jacobian_rank`]. Boxed
/// chart coordinates reach eigenbasis conditions of 1e7 at `n = 5`, and
/// `μ̂` then loses about `ε·cond²` in the round trip whatever the solver.
fn chart_round_trip(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.round_trip");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let c = to_chart(&augment(&on_shell(n, p, &mut rng)?)?, p.tol)?;
            let back = to_chart(&from_chart(&c, p.tol)?, p.tol)?.align_to(&c)?;
            worst = worst.max(back.dist(&c));
        }
    }
    Ok(Measurement::new(worst))
}

fn gauge_equivalence(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.gauge_equivalence");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let q = augment(&on_shell(n, p, &mut rng)?)?.conjugate(&random_gauge(n, &mut rng))?;
            let rebuilt = from_chart(&to_chart(&q, p.tol)?, p.tol)?;
            worst = worst.max(pair_fingerprint(&rebuilt, None).distance(&pair_fingerprint(&q, None)));
        }
    }
    Ok(Measurement::new(worst))
}

/// Chart points of seeded level-set points; on boxed chart coordinates the
/// finite-difference rank is not decidable once the eigenbasis condition
/// passes 1e5.
fn jacobian_rank(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.jacobian_rank");
    let (mut deficient, mut count, mut least) = (0usize, 0usize, f64::INFINITY);
    for &n in &p.ns {
        for _ in 0..p.trials {
            let c = to_chart(&augment(&on_shell(n, p, &mut rng)?)?, p.tol)?;
            let jac = chart_jacobian(&c, 1e-5, p.tol)?;
            if numeric_rank(&jac, CHART_RANK_CUTOFF) != 4 * n + 2 {
                deficient += 1;
            }
            let sv = jac.singular_values();
            least = least.min(sv[4 * n + 1] / sv[0]);
            count += 1;
        }
    }
    Ok(Measurement::with_detail(
        deficient as f64,
        format!("{count} points, {deficient} rank deficient; smallest sigma_min/sigma_max {least:.2e} (rank cutoff {CHART_RANK_CUTOFF:e})"),
    ))
}

fn slice_solve(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("chart.slice_solve");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let mut c = random_chart_with_rng(n, p.tau, &mut rng);
            let shift = (c.lambdahat.iter().sum::<C64>() - c.lambda.iter().sum::<C64>()) / n as f64;
            for l in &mut c.lambda {
                *l += shift;
            }
            let q = from_chart(&solve_slice_muhat(&c, p.tol)?, p.tol)?;
            let (r1, r2) = slice_residual(&q);
            worst = worst.max(r1.norm().max(r2.norm()) / q.scale());
        }
    }
    Ok(Measurement::new(worst))
}

// ---- sl2flows ----

fn equivariance(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.equivariance");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            let g = SL2Element::random(&mut rng);
            let lhs = act_augmented(&g, &r)?;
            let rhs = act_pair(&g, &augment(&r)?);
            worst = worst.max(lhs.dist(&rhs) / rhs.scale());
        }
    }
    Ok(Measurement::new(worst))
}

fn group_law(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.group_law");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let q = augment(&on_shell(n, p, &mut rng)?)?;
            let (g1, g2) = (SL2Element::random(&mut rng), SL2Element::random(&mut rng));
            let lhs = act_pair(&g1, &act_pair(&g2, &q));
            let rhs = act_pair(&(g1 * g2), &q);
            worst = worst.max(lhs.dist(&rhs) / q.scale().max(rhs.scale()));
        }
    }
    Ok(Measurement::new(worst))
}

fn moment_preserved(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.moment_preserved");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            let g = SL2Element::random(&mut rng);
            let scale = act_components(&g, &r)?.scale();
            worst = worst.max(check_moment_preserved(&g, &r)? / scale);
        }
    }
    Ok(Measurement::new(worst))
}

fn non_sl2_control(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.non_sl2_control");
    let mut least = f64::INFINITY;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            let g = SL2Element::random(&mut rng);
            // scaling the first row doubles the determinant
            let g = SL2Element::new_unchecked(g.a * 2.0, g.b * 2.0, g.c, g.d);
            let scale = act_components(&g, &r)?.scale();
            least = least.min(check_moment_preserved(&g, &r)? / scale);
        }
    }
    Ok(Measurement::with_detail(1e-3 / least, format!("smallest relative moment residual {least:.3e} (must exceed 1e-3)")))
}

fn probe_separation(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.fixed_point_probe");
    let (mut least, mut used, mut skipped) = (f64::INFINITY, 0usize, 0usize);
    for &n in &p.ns {
        for _ in 0..p.trials {
            let r = on_shell(n, p, &mut rng)?;
            if (&r.a * &r.a).trace().norm() <= p.tol * r.scale() {
                skipped += 1;
                continue;
            }
            let probe = fixed_point_probe(&r, ONE)?;
            least = least.min(probe.separation / r.scale());
            used += 1;
        }
    }
    Ok(Measurement::with_detail(
        1e-6 / least,
        format!("{used} points ({skipped} with tr A^2 = 0 skipped); smallest relative separation {least:.3e} (must exceed 1e-6)"),
    ))
}

fn trace_coords_roundtrip(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("sl2flows.trace_coords");
    let mut worst: f64 = 0.0;
    for &n in &p.ns {
        for _ in 0..p.trials {
            let q = augment(&on_shell(n, p, &mut rng)?)?;
            let eig = eigenvalues(&q.a_hat)?;
            let s = trace_coords(&q.a_hat);
            let direct = lambdahat_to_s(&eig);
            let back = s_to_lambdahat(&s)?;
            let order = match_nearest(&eig, &back)?;
            let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let spectral = order.iter().zip(&eig).map(|(&i, e)| (back[i] - e).norm()).fold(0.0, f64::max) / scale;
            let sums = s
                .s
                .iter()
                .zip(&direct.s)
                .map(|(a, b)| (a - b).norm() / a.norm().max(1.0))
                .fold(0.0, f64::max);
            worst = worst.max(spectral).max(sums);
        }
    }
    Ok(Measurement::new(worst))
}

/// Independence points: a few per particle count.
fn field_points(p: &CheckParams, name: &str) -> Result<Vec<(ChartPoint, f64)>> {
    let mut rng = p.rng(name);
    let mut out = Vec::new();
    for &n in &p.ns {
        for _ in 0..p.trials.min(2) {
            let c = find_independence_point(n, p.tau, rng.gen(), p.tol)?;
            let scale = from_chart(&c, p.tol)?.scale();
            out.push((c, scale));
        }
    }
    Ok(out)
}

fn orbit_rank(p: &CheckParams) -> Result<Measurement> {
    let mut deficient = 0usize;
    let points = field_points(p, "sl2flows.orbit_rank")?;
    for (c, _) in &points {
        if independence_rank(c, FieldOptions { tol: p.tol, ..Default::default() })?.rank != 3 {
            deficient += 1;
        }
    }
    Ok(Measurement::with_detail(deficient as f64, format!("{} points", points.len())))
}

fn orbit_ratio(p: &CheckParams) -> Result<Measurement> {
    let mut least = f64::INFINITY;
    for (c, _) in field_points(p, "sl2flows.orbit_ratio")? {
        least = least.min(independence_rank(&c, FieldOptions { tol: p.tol, ..Default::default() })?.ratio);
    }
    Ok(Measurement::with_detail(1e-6 / least, format!("smallest sigma_3/sigma_1 {least:.3e} (must exceed 1e-6)")))
}

fn e_field(p: &CheckParams) -> Result<Measurement> {
    let mut worst: f64 = 0.0;
    let gen = SL2Generator::e();
    for (c, scale) in field_points(p, "sl2flows.e_field")? {
        let num = induced_field_numeric(&gen, &c, FieldOptions { tol: p.tol, ..Default::default() })?;
        let ana = analytic_field(&gen, &c, p.tol)?;
        worst = worst.max(num.max_specified_diff(&ana) / scale);
    }
    Ok(Measurement::new(worst))
}

fn trace_fields(p: &CheckParams) -> Result<Measurement> {
    let mut worst: f64 = 0.0;
    let opts = FieldOptions { tol: p.tol, richardson: true, ..Default::default() };
    for (c, scale) in field_points(p, "sl2flows.trace_fields")? {
        for gen in [SL2Generator::h(), SL2Generator::f()] {
            let num = induced_field_numeric(&gen, &c, opts)?;
            let ana = analytic_field(&gen, &c, p.tol)?;
            worst = worst.max(num.max_specified_diff(&ana) / scale);
        }
    }
    Ok(Measurement::with_detail(worst, "central differences with one Richardson step"))
}

fn slice_tangency_check(p: &CheckParams) -> Result<Measurement> {
    let mut worst: f64 = 0.0;
    let opts = FieldOptions { tol: p.tol, ..Default::default() };
    for (c, scale) in field_points(p, "sl2flows.slice_tangency")? {
        for gen in [SL2Generator::e(), SL2Generator::f(), SL2Generator::h()] {
            let (a, b) = slice_tangency(&gen, &c, opts)?;
            worst = worst.max(a.norm().max(b.norm()) / scale);
        }
    }
    Ok(Measurement::new(worst))
}

// ---- flowcalc ----

const TROTTER_STEPS: [usize; 3] = [16, 64, 256];
const BRACKET_STEPS: [usize; 3] = [64, 256, 1024];
const BRACKET_TIME: f64 = 0.25;

/// Five seeded base points for each particle count up to 3.
fn flow_bases(p: &CheckParams, name: &str) -> Result<Vec<AugmentedPair>> {
    let mut rng = p.rng(name);
    let mut out = Vec::new();
    for n in p.ns_up_to(3) {
        for _ in 0..p.trials.min(5) {
            out.push(augment(&on_shell(n, p, &mut rng)?)?);
        }
    }
    Ok(out)
}

fn trotter_slope(p: &CheckParams) -> Result<Measurement> {
    let (e, f) = (unit(GeneratorKind::E), unit(GeneratorKind::F));
    let mut worst: f64 = 0.0;
    let mut slopes = Vec::new();
    for q in flow_bases(p, "flowcalc.trotter_slope")? {
        let errs = trotter_errors(&e, &f, C64::new(0.5, 0.0), &TROTTER_STEPS, &q);
        let slope = loglog_slope(&TROTTER_STEPS, &errs);
        worst = worst.max((slope - 1.0).abs());
        slopes.push(slope);
    }
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    Ok(Measurement::with_detail(worst, format!("slopes in [{lo:.3}, {hi:.3}] over n_steps {TROTTER_STEPS:?}; residual is |slope - 1|")))
}

fn bracket_runs(p: &CheckParams, name: &str) -> Result<Vec<Vec<f64>>> {
    let (e, f) = (unit(GeneratorKind::E), unit(GeneratorKind::F));
    flow_bases(p, name)?.iter().map(|q| bracket_errors(&e, &f, BRACKET_TIME, &BRACKET_STEPS, q)).collect()
}

fn bracket_monotone(p: &CheckParams) -> Result<Measurement> {
    let runs = bracket_runs(p, "flowcalc.bracket")?;
    let bad = runs.iter().filter(|errs| !is_monotone_nonincreasing(errs)).count();
    Ok(Measurement::with_detail(bad as f64, format!("{} base points, {bad} non-monotone over n_steps {BRACKET_STEPS:?}", runs.len())))
}

fn bracket_final(p: &CheckParams) -> Result<Measurement> {
    let runs = bracket_runs(p, "flowcalc.bracket")?;
    let last = BRACKET_STEPS.len() - 1;
    let worst = runs.iter().map(|errs| errs[last]).fold(0.0, f64::max);
    let slope = runs.iter().map(|errs| loglog_slope(&BRACKET_STEPS, errs)).sum::<f64>() / runs.len() as f64;
    // steps at which the worst run would reach 1e-3 at the fitted rate
    let needed = BRACKET_STEPS[last] as f64 * (worst / 1e-3).powf(1.0 / slope);
    Ok(Measurement::with_detail(
        worst,
        format!("mean decay exponent {slope:.3}; at this rate 1e-3 needs about {needed:.0} steps"),
    ))
}

fn bracket_sign(p: &CheckParams) -> Result<Measurement> {
    let (e, f) = (unit(GeneratorKind::E), unit(GeneratorKind::F));
    let mut wrong = 0usize;
    let bases = flow_bases(p, "flowcalc.bracket_sign")?;
    for q in &bases {
        if detect_bracket_sign(&e, &f, BRACKET_TIME, 256, q)? != FIELD_BRACKET_SIGN {
            wrong += 1;
        }
    }
    Ok(Measurement::with_detail(wrong as f64, format!("{} base points; expected sign {FIELD_BRACKET_SIGN}", bases.len())))
}

fn lnd_degrees(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("flowcalc.lnd_degree");
    let mut violations = 0usize;
    let words = trace_word_set(2, 4);
    for &n in &p.ns_up_to(3) {
        let q = augment(&on_shell(n, p, &mut rng)?)?;
        let e = SL2Generator::e();
        if lnd_degree(&e, &TraceFunction::tr_a_hat(), &q, 4)? != 0 {
            violations += 1;
        }
        if lnd_degree(&e, &TraceFunction::tr_b_hat(), &q, 4)? != 1 {
            violations += 1;
        }
        for w in &words {
            let tf = TraceFunction::new(w.clone())?;
            for g in [SL2Generator::e(), SL2Generator::f()] {
                if lnd_degree(&g, &tf, &q, 6)? > tf.degree() {
                    violations += 1;
                }
            }
        }
    }
    Ok(Measurement::with_detail(violations as f64, format!("{} words of length <= 4", words.len())))
}

fn witness(p: &CheckParams) -> Result<Measurement> {
    let mut rng = p.rng("flowcalc.witness");
    let mut worst: f64 = 0.0;
    let (mut used, mut drawn) = (0usize, 0usize);
    let ns = &p.ns;
    while used < p.trials && drawn < 20 * p.trials {
        let n = ns[drawn % ns.len()];
        drawn += 1;
        let q = augment(&on_shell(n, p, &mut rng)?)?;
        if q.a_hat.trace().norm() <= 0.1 {
            continue;
        }
        let w = compatible_witness(&q, p.tol)?;
        worst = worst.max(w.residual / w.scale);
        used += 1;
    }
    if used < p.trials {
        return Ok(Measurement::with_detail(f64::INFINITY, format!("only {used} of {drawn} draws had |tr Ahat| > 0.1")));
    }
    Ok(Measurement::with_detail(worst, format!("{used} points with |tr Ahat| > 0.1")))
}
