//! Preference families and the loss-comparison sweep.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::Serialize;

use crate::baselines::{random_order, simultaneous_renormalization, uniform_random};
use crate::error::{Error, Result};
use crate::matrix::loss;
use crate::minloss::optimal_satisfaction_matrix;
use crate::profile::{validate_instance, ProblemInstance};

/// Largest `N` for which the integer weights fit in 128 bits.
pub const FAMILY_MAX_N: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    /// `A = B = (1, 2, ..., N) / (N(N + 1)/2)`.
    #[serde(rename = "i")]
    Arithmetic,
    /// `A = B = (1, 1, 2, ..., 2^(N-2)) / 2^(N-1)`.
    #[serde(rename = "ii")]
    Doubling,
    /// `A` as in `Doubling`, `B` reversed.
    #[serde(rename = "iii")]
    DoublingReversed,
    /// `A = B = (1, 3, ..., 3^(N-1)) / ((3^N - 1)/2)`; the last arm is
    /// always over-popular.
    #[serde(rename = "iv")]
    Tripling,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Arithmetic, Family::Doubling, Family::DoublingReversed, Family::Tripling];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Arithmetic => "i",
            Family::Doubling => "ii",
            Family::DoublingReversed => "iii",
            Family::Tripling => "iv",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Family::Arithmetic),
            "ii" | "2" => Ok(Family::Doubling),
            "iii" | "3" => Ok(Family::DoublingReversed),
            "iv" | "4" => Ok(Family::Tripling),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Uniform,
    Renorm,
    Order,
    Optimal,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Uniform, Method::Renorm, Method::Order, Method::Optimal];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Uniform => "uniform",
            Method::Renorm => "renorm",
            Method::Order => "order",
            Method::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Method::Uniform),
            "renorm" => Ok(Method::Renorm),
            "order" => Ok(Method::Order),
            "optimal" => Ok(Method::Optimal),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

fn family_weights(family: Family, n: usize) -> (Vec<u128>, Vec<u128>, u128) {
    let doubling = || -> Vec<u128> { (0..n).map(|i| if i == 0 { 1 } else { 1u128 << (i - 1) }).collect() };
    match family {
        Family::Arithmetic => {
            let w: Vec<u128> = (1..=n as u128).collect();
            let c = (n as u128 + 1) * n as u128 / 2;
            (w.clone(), w, c)
        }
        Family::Doubling => {
            let w = doubling();
            (w.clone(), w, 1u128 << (n - 1))
        }
        Family::DoublingReversed => {
            let w = doubling();
            let rev = w.iter().rev().copied().collect();
            (w, rev, 1u128 << (n - 1))
        }
        Family::Tripling => {
            let w: Vec<u128> = (0..n as u32).map(|i| 3u128.pow(i)).collect();
            (w.clone(), w, (3u128.pow(n as u32) - 1) / 2)
        }
    }
}

/// Builds the benchmark instance. Normalizers are exact integers; each
/// weight is divided once at the end.
pub fn preference_family(family: Family, n: usize) -> Result<ProblemInstance> {
    if n < 3 {
        return Err(Error::TooFewArms { min: 3, got: n });
    }
    if n > FAMILY_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: FAMILY_MAX_N });
    }
    let (a, b, c) = family_weights(family, n);
    let c = c as f64;
    let a: Vec<f64> = a.iter().map(|&w| w as f64 / c).collect();
    let b: Vec<f64> = b.iter().map(|&w| w as f64 / c).collect();
    validate_instance(&a, &b, 1.0)
}

/// Loss achieved by `method` on `inst`.
pub fn method_loss(method: Method, inst: &ProblemInstance) -> Result<f64> {
    let m = match method {
        Method::Uniform => uniform_random(inst.n())?,
        Method::Renorm => simultaneous_renormalization(inst)?,
        Method::Order => random_order(inst)?.matrix,
        Method::Optimal => return Ok(optimal_satisfaction_matrix(inst)?.loss),
    };
    loss(&m, inst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: Method,
    pub loss: Option<f64>,
    /// Error kind when the cell failed; the sweep continues regardless.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Evaluates every (family, N, method) cell. Failed cells are recorded with
/// their error kind. Output is sorted by family, then N, then method.
pub fn run_benchmark(families: &[Family], ns: RangeInclusive<usize>, methods: &[Method]) -> Vec<BenchmarkRecord> {
    let mut families = families.to_vec();
    families.sort();
    families.dedup();
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();

    let mut out = Vec::with_capacity(families.len() * methods.len() * ns.clone().count());
    for &family in &families {
        for n in ns.clone() {
            let inst = preference_family(family, n);
            for &method in &methods {
                let result = inst.as_ref().map_err(Clone::clone).and_then(|i| method_loss(method, i));
                let (loss, error) = match result {
                    Ok(l) => (Some(l), None),
                    Err(e) => (None, Some(e.kind().to_string())),
                };
                out.push(BenchmarkRecord { family, n, method, loss, error });
            }
        }
    }
    out
}

/// `family,N,method,loss` with the loss at 17 significant digits; failed
/// cells carry `error:<kind>` in the loss column.
pub fn records_to_csv(records: &[BenchmarkRecord]) -> String {
    let mut s = String::from("family,N,method,loss\n");
    for r in records {
        let loss = match (&r.loss, &r.error) {
            (Some(l), _) => format!("{l:.16e}"),
            (None, Some(e)) => format!("error:{e}"),
            (None, None) => "error:unknown".into(),
        };
        s.push_str(&format!("{},{},{},{}\n", r.family, r.n, r.method, loss));
    }
    s
}

pub fn records_from_csv(text: &str) -> Result<Vec<BenchmarkRecord>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "family,N,method,loss" => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns in '{line}'")));
            }
            let n = cols[1].parse().map_err(|_| Error::Parse(format!("bad N in '{line}'")))?;
            let (loss, error) = match cols[3].strip_prefix("error:") {
                Some(kind) => (None, Some(kind.to_string())),
                None => (Some(cols[3].parse().map_err(|_| Error::Parse(format!("bad loss in '{line}'")))?), None),
            };
            Ok(BenchmarkRecord { family: cols[0].parse()?, n, method: cols[2].parse()?, loss, error })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSummary {
    pub family: Family,
    pub method: Method,
    pub min: f64,
    pub max: f64,
    pub errors: usize,
}

/// Min/max loss per (family, method).
pub fn summarize(records: &[BenchmarkRecord]) -> Vec<PanelSummary> {
    let mut out: Vec<PanelSummary> = Vec::new();
    for r in records {
        let pos = out.iter().position(|p| p.family == r.family && p.method == r.method);
        let p = match pos {
            Some(k) => &mut out[k],
            None => {
                out.push(PanelSummary {
                    family: r.family,
                    method: r.method,
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                    errors: 0,
                });
                out.last_mut().unwrap()
            }
        };
        match r.loss {
            Some(l) => {
                p.min = p.min.min(l);
                p.max = p.max.max(l);
            }
            None => p.errors += 1,
        }
    }
    out
}

pub fn format_summary(summary: &[PanelSummary]) -> String {
    let mut s = format!("{:<7} {:<8} {:>24} {:>24} {:>6}\n", "family", "method", "min loss", "max loss", "errors");
    for p in summary {
        s.push_str(&format!(
            "{:<7} {:<8} {:>24.16e} {:>24.16e} {:>6}\n",
            p.family.as_str(),
            p.method.as_str(),
            p.min,
            p.max,
            p.errors
        ));
    }
    s
}
