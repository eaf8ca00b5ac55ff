use std::fmt;
use std::str::FromStr;

use cmspace::{C64, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

/// Inclusive range of particle counts, written `3` or `1..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn single(n: usize) -> Self {
        NRange { lo: n, hi: n }
    }

    pub fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }

    pub fn is_single(&self) -> bool {
        self.lo == self.hi
    }
}

impl FromStr for NRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad particle count {t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if lo == 0 || hi < lo {
            return Err(format!("particle range {s:?} must satisfy 1 <= lo <= hi"));
        }
        Ok(NRange { lo, hi })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// Parses `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    let z = match s.split_once(',') {
        Some((a, b)) => C64::new(parse(a)?, parse(b)?),
        None => C64::new(parse(s)?, 0.0),
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(z)
}

/// Parameters shared by every subcommand and echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: NRange,
    pub k: usize,
    /// `[re, im]`.
    pub tau: C64,
    pub seed: u64,
    pub tol: f64,
    pub trials: usize,
    pub suites: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: NRange { lo: 1, hi: 4 },
            k: 2,
            tau: C64::new(1.0, 0.0),
            seed: 1,
            tol: DEFAULT_TOL,
            trials: 50,
            suites: vec!["all".into()],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tolerance must be positive, got {}", self.tol));
        }
        if !(1..=2).contains(&self.k) {
            return Err(format!("k must be 1 or 2, got {}", self.k));
        }
        if self.tau == C64::new(0.0, 0.0) {
            return Err("tau must be nonzero".into());
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("1..4".parse::<NRange>().unwrap().values(), vec![1, 2, 3, 4]);
        assert_eq!("1..=4".parse::<NRange>().unwrap(), NRange { lo: 1, hi: 4 });
        assert_eq!("3".parse::<NRange>().unwrap(), NRange::single(3));
        assert!("0..2".parse::<NRange>().is_err());
        assert!("4..2".parse::<NRange>().is_err());
        assert!("x".parse::<NRange>().is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("1,0").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("-0.5, 2").unwrap(), C64::new(-0.5, 2.0));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert!(parse_complex("1,a").is_err());
        assert!(parse_complex("inf").is_err());
    }
}
