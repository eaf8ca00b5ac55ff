use std::io::Read;
use std::path::Path;

use cmspace::canonical::{normalize, regularity_report};
use cmspace::chart::{from_chart, to_chart};
use cmspace::sl2flows::{act_pair, SL2Generator};
use cmspace::variety::{augment, tau_hat_residual, project, random_point};
use cmspace::{AugmentedPair, ChartPoint, GeneratorKind, Representation, C64};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::checks::{run_checks, select, CheckParams};
use crate::config::{NRange, RunConfig};
use crate::report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Input(String),
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: cmspace::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// Tags a numerical failure with the operation that produced it.
trait Op<T> {
    fn op(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> Op<T> for cmspace::Result<T> {
    fn op(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { op, source })
    }
}

/// What a subcommand produces: JSON for stdout, a summary for stderr and an
/// exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: String,
    pub summary: String,
    pub code: i32,
}

impl Output {
    fn ok(value: &impl Serialize, summary: impl Into<String>) -> Output {
        Output { json: to_json(value), summary: summary.into(), code: 0 }
    }
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

/// Reads a file, or stdin when `path` is `None` or `-`.
pub fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

/// The three input schemas, told apart by their keys.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Representation(Representation),
    Pair(AugmentedPair),
    Chart(ChartPoint),
}

impl Input {
    pub fn parse(text: &str) -> Result<Input, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| CliError::Input("expected a JSON object".into()))?;
        let bad = |e: serde_json::Error| CliError::Input(e.to_string());
        if obj.contains_key("Ahat") {
            let p: AugmentedPair = serde_json::from_value(value).map_err(bad)?;
            p.validate().map_err(|e| CliError::Input(e.to_string()))?;
            Ok(Input::Pair(p))
        } else if obj.contains_key("A") {
            let r = Representation::from_json(text).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(Input::Representation(r))
        } else if obj.contains_key("lambda") {
            let c: ChartPoint = serde_json::from_value(value).map_err(bad)?;
            Ok(Input::Chart(c))
        } else {
            Err(CliError::Input("unrecognized schema: expected keys A, Ahat or lambda".into()))
        }
    }

    /// The augmented pair of any input (charts are mapped back first).
    pub fn into_pair(self, tol: f64) -> Result<AugmentedPair, CliError> {
        match self {
            Input::Representation(r) => augment(&r).op("augment"),
            Input::Pair(p) => Ok(p),
            Input::Chart(c) => {
                c.validate(tol).map_err(|e| CliError::Input(e.to_string()))?;
                from_chart(&c, tol).op("from_chart")
            }
        }
    }
}

pub fn cmd_gen(n: usize, k: usize, tau: C64, seed: u64) -> Result<Output, CliError> {
    let r = random_point(n, k, tau, seed).map_err(|e| CliError::Input(e.to_string()))?;
    let summary = format!("n = {n}, k = {k}: residual {:.3e}", r.residual());
    Ok(Output { json: r.to_json(), summary, code: 0 })
}

pub fn cmd_normalize(input: &str, tol: f64) -> Result<Output, CliError> {
    let p = Input::parse(input)?.into_pair(tol)?;
    let (out, gauge) = normalize(&p, tol).op("normalize")?;
    let report = regularity_report(&out.a_hat, tol);
    let value = json!({ "pair": out, "gauge": gauge.matrix(), "regularity": report });
    let summary = format!("normalized n = {}; strongly semisimple: {}", out.n(), report.is_strongly_semisimple());
    Ok(Output::ok(&value, summary))
}

pub fn cmd_chart(input: &str, invert: bool, tol: f64) -> Result<Output, CliError> {
    let parsed = Input::parse(input)?;
    if invert {
        let Input::Chart(c) = parsed else {
            return Err(CliError::Input("--invert expects a chart point (keys lambda, lambdahat, mu, muhat, tau)".into()));
        };
        let p = Input::Chart(c).into_pair(tol)?;
        let summary = format!("pair of size {}; tau-hat residual {:.3e}", p.n() + 1, tau_hat_residual(&p, p.tau));
        return Ok(Output::ok(&p, summary));
    }
    if matches!(parsed, Input::Chart(_)) {
        return Err(CliError::Input("input is already a chart point; use --invert".into()));
    }
    let p = parsed.into_pair(tol)?;
    let c = to_chart(&p, tol).op("to_chart")?;
    Ok(Output::ok(&c, format!("chart point with n = {}", c.n())))
}

/// Flows a seeded point (or `input`) by `exp(t·gen)`.
pub fn cmd_flow(gen: GeneratorKind, t: C64, n: usize, tau: C64, seed: u64, input: Option<&str>, tol: f64) -> Result<Output, CliError> {
    let p = match input {
        Some(text) => Input::parse(text)?.into_pair(tol)?,
        None => augment(&random_point(n, 2, tau, seed).map_err(|e| CliError::Input(e.to_string()))?).op("augment")?,
    };
    let before = to_chart(&p, tol).op("to_chart")?;
    let moved = act_pair(&SL2Generator::new(gen).exp(t), &p);
    let after = to_chart(&moved, tol).op("to_chart")?;
    let rebuilt = to_chart(&from_chart(&after, tol).op("from_chart")?, tol).op("to_chart")?;
    let moment = project(&moved, tol).map(|r| r.residual() / r.scale()).ok();
    let value = json!({
        "generator": gen,
        "t": t,
        "before": before,
        "after": after,
        "residuals": {
            "tau_hat": tau_hat_residual(&moved, moved.tau) / moved.scale(),
            "moment": moment,
            "chart_round_trip": rebuilt.dist(&after),
        }
    });
    Ok(Output::ok(&value, format!("flowed along {gen:?} for t = {t}")))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.validate().map_err(CliError::Input)?;
    let checks = select(&cfg.suites).map_err(CliError::Input)?;
    let records = run_checks(&checks, &CheckParams::from_config(cfg));
    let report = Report::new(cfg.clone(), records);
    Ok(Output { json: to_json(&report), summary: report.human_summary(), code: report.exit_code() })
}

/// Requires a single particle count.
pub fn single_n(n: NRange) -> Result<usize, CliError> {
    if n.is_single() {
        Ok(n.lo)
    } else {
        Err(CliError::Input(format!("expected a single particle count, got {n}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmspace::linalg::ONE;

    #[test]
    fn gen_is_deterministic() {
        let a = cmd_gen(3, 2, ONE, 7).unwrap();
        assert_eq!(a, cmd_gen(3, 2, ONE, 7).unwrap());
        assert_ne!(a.json, cmd_gen(3, 2, ONE, 8).unwrap().json);
        assert_eq!(cmd_gen(3, 2, C64::new(0.0, 0.0), 7).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn schema_detection() {
        let r = cmd_gen(2, 2, ONE, 1).unwrap().json;
        assert!(matches!(Input::parse(&r).unwrap(), Input::Representation(_)));
        let chart = cmd_chart(&r, false, 1e-9).unwrap().json;
        assert!(matches!(Input::parse(&chart).unwrap(), Input::Chart(_)));
        let pair = cmd_chart(&chart, true, 1e-9).unwrap().json;
        assert!(matches!(Input::parse(&pair).unwrap(), Input::Pair(_)));
        assert_eq!(Input::parse("{\"x\": 1}").unwrap_err().exit_code(), 2);
        assert_eq!(Input::parse("[").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn chart_inversion_round_trips() {
        let r = cmd_gen(3, 2, ONE, 4).unwrap().json;
        let chart = cmd_chart(&r, false, 1e-9).unwrap().json;
        let pair = cmd_chart(&chart, true, 1e-9).unwrap().json;
        let again = cmd_chart(&pair, false, 1e-9).unwrap().json;
        let (c0, c1) = (ChartPoint::from_json(&chart).unwrap(), ChartPoint::from_json(&again).unwrap());
        assert!(c0.dist(&c1) < 1e-8);
    }

    #[test]
    fn k1_points_cannot_be_augmented() {
        let r = cmd_gen(2, 1, ONE, 1).unwrap().json;
        assert_eq!(cmd_normalize(&r, 1e-9).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn flow_reports_residuals() {
        let out = cmd_flow(GeneratorKind::E, C64::new(0.3, 0.0), 2, ONE, 5, None, 1e-9).unwrap();
        let v: Value = serde_json::from_str(&out.json).unwrap();
        assert!(v["residuals"]["tau_hat"].as_f64().unwrap() < 1e-12);
        assert!(v["residuals"]["moment"].as_f64().unwrap() < 1e-12);
        assert!(v["residuals"]["chart_round_trip"].as_f64().unwrap() < 1e-8);
    }
}
