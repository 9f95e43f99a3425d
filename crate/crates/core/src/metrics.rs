//! Histogram distances and binary classification scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit sum required by [`dist_hutchinson`].
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "L1")]
    L1,
    #[serde(rename = "L2")]
    L2,
    #[serde(rename = "COSINE")]
    Cosine,
    #[serde(rename = "HUTCHINSON")]
    Hutchinson,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::L1, Metric::L2, Metric::Cosine, Metric::Hutchinson];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L1 => "L1",
            Metric::L2 => "L2",
            Metric::Cosine => "COSINE",
            Metric::Hutchinson => "HUTCHINSON",
        }
    }

    /// Column heading used in reports.
    pub fn title(self) -> &'static str {
        match self {
            Metric::L1 => "L1",
            Metric::L2 => "L2",
            Metric::Cosine => "Cosine",
            Metric::Hutchinson => "Hutchinson",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::L1 => dist_l1(a, b),
            Metric::L2 => dist_l2(a, b),
            Metric::Cosine => dist_cosine(a, b),
            Metric::Hutchinson => dist_hutchinson(a, b),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(Metric::L1),
            "L2" => Ok(Metric::L2),
            "COSINE" | "COS" => Ok(Metric::Cosine),
            "HUTCHINSON" | "EMD" | "MK" => Ok(Metric::Hutchinson),
            _ => Err(Error::Config(format!("unknown metric '{s}'"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub fn dist_l1(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn dist_l2(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// `1 - cos(a, b)`; in `[0, 1]` for non-negative inputs.
pub fn dist_cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::invalid("cosine distance of a zero vector"));
    }
    Ok((1.0 - ab / (aa.sqrt() * bb.sqrt())).max(0.0))
}

/// Hutchinson (Monge-Kantorovich) distance between two normalized histograms
/// on a line of unit-spaced bins: the sum of absolute cumulative differences.
pub fn dist_hutchinson(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    for h in [a, b] {
        let s: f64 = h.iter().sum();
        if (s - 1.0).abs() >= NORMALIZATION_TOL {
            return Err(Error::NotNormalized(s));
        }
    }
    let mut carried = 0.0;
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        carried += x - y;
        total += carried.abs();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    /// Adds one prediction; label 1 is the positive class.
    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (0, 0) => self.tn += 1,
            _ => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }

    /// Counts with the class roles exchanged.
    pub fn complement(self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub f1: f64,
    pub bac: f64,
    /// A zero denominator forced F1 to 0.
    pub f1_degenerate: bool,
    /// A zero denominator forced sensitivity or specificity to 0.
    pub bac_degenerate: bool,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// F1 and balanced accuracy. Undefined ratios count as 0 and are flagged.
pub fn scores(c: &ConfusionCounts) -> Scores {
    let sen = ratio(c.tp, c.tp + c.fn_);
    let spc = ratio(c.tn, c.tn + c.fp);
    let pr = ratio(c.tp, c.tp + c.fp);
    let bac = (sen.unwrap_or(0.0) + spc.unwrap_or(0.0)) / 2.0;
    let (f1, f1_degenerate) = match (pr, sen) {
        (Some(p), Some(r)) if p + r > 0.0 => (2.0 * p * r / (p + r), false),
        _ => (0.0, true),
    };
    Scores {
        f1,
        bac,
        f1_degenerate,
        bac_degenerate: sen.is_none() || spc.is_none(),
    }
}
