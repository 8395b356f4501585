//! JSON report envelope shared by every command.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Mode;

/// Exact non-negative rational, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "RatioRepr", try_from = "RatioRepr")]
pub struct Ratio {
    numerator: u64,
    denominator: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    /// Panics on a zero denominator.
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator != 0, "zero denominator");
        let g = gcd(numerator, denominator).max(1);
        Ratio {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Six-decimal rendering, rounded half up.
    pub fn decimal(&self) -> String {
        let scaled = (self.numerator as u128 * 1_000_000 * 2 + self.denominator as u128)
            / (2 * self.denominator as u128);
        format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numerator as u128 * other.denominator as u128;
        let rhs = other.numerator as u128 * self.denominator as u128;
        lhs.cmp(&rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct RatioRepr {
    numerator: u64,
    denominator: u64,
    #[serde(default)]
    decimal: String,
}

impl From<Ratio> for RatioRepr {
    fn from(r: Ratio) -> Self {
        RatioRepr {
            numerator: r.numerator,
            denominator: r.denominator,
            decimal: r.decimal(),
        }
    }
}

impl TryFrom<RatioRepr> for Ratio {
    type Error = String;

    fn try_from(r: RatioRepr) -> Result<Self, String> {
        if r.denominator == 0 {
            return Err("zero denominator".into());
        }
        Ok(Ratio::new(r.numerator, r.denominator))
    }
}

/// Parameters echoed into every report; fields a command does not use are null.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: Option<u32>,
    pub k: Option<u32>,
    #[serde(rename = "Z")]
    pub delay: Option<u32>,
    pub mode: Option<Mode>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub version: String,
    pub params: ReportParams,
    pub results: serde_json::Value,
}

impl ReportEnvelope {
    pub fn new(command: &str, params: ReportParams, results: serde_json::Value) -> Self {
        ReportEnvelope {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            results,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
