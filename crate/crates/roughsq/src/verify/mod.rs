//! Experiments that turn the checkable statements about S_α into pass/fail
//! reports.
//!
//! Every experiment returns an [`ExperimentReport`]: the parameters it ran
//! with, named numeric outputs with attached error estimates, verdicts that
//! carry their thresholds, optional columnar tables, and the wall-clock time.
//! Reports are deterministic given the parameters and the seed; the
//! wall-clock is the only field excluded from serialization.
//!
//! "Diverges" and "limsup" conditions are replaced by refinement-stability
//! predicates (relative change within [`VerifyConfig::blowup_tol`] over two
//! doublings); growth laws are least-squares fits in log coordinates with
//! the slack recorded in the verdict.

mod criteria;
mod identities;
mod multiplier;
mod necessity;
mod pointwise;
mod ratio;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::sqfun::BLOWUP_TOL;

pub use criteria::{criterion, criterion_ids, find_criterion, CriterionInfo, CRITERIA};
pub use identities::{majorization_check, menger_check, mixing_check, sym_identity, MENGER_FUNCTIONS, SYM_FUNCTIONS};
pub use multiplier::{
    cell_bound, cell_integral, cell_sup, cell_sweep, converse_multiplier_gap, multiplier_cell_bound, rho, scaling_check,
    sigma_tau_check, sweep_cells, CellIndex, CellKind, CellSup, CellTerm, MultiplierProbe, Rect,
};
pub use necessity::{blowup_scan, hardy_counterexample_scan, weaktype_growth, Scan};
pub use pointwise::{
    classify_point, differentiability_classify, weighted_modulus, marcinkiewicz_integral, q_equivalence, stein_zygmund_test,
    zygmund_check, ClosedSet, PointClass, Refined, SteinZygmund, Q_FUNCTIONS, Q_POINTS, ZYGMUND_FUNCTIONS,
};
pub use ratio::{
    open_problem_scan, plancherel_constant, plancherel_constant_with, plancherel_report, riesz_norm, s_alpha_untruncated,
    s_norm, sobolev_band, sobolev_ratio, weak_type_consistency, PlancherelConstant, SNorm, Untruncated, RATIO_FUNCTIONS,
};

/// Resolution tier: quick ≤ 10 s, standard ≤ 2 min, thorough ≤ 30 min per
/// experiment (single core, optimized build).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Quick,
    #[default]
    Standard,
    Thorough,
}

impl Tier {
    /// 0, 1, 2 for quick, standard, thorough.
    pub fn rank(self) -> u32 {
        match self {
            Tier::Quick => 0,
            Tier::Standard => 1,
            Tier::Thorough => 2,
        }
    }

    /// Pick one of three tier-dependent settings.
    pub fn pick<T: Copy>(self, quick: T, standard: T, thorough: T) -> T {
        match self {
            Tier::Quick => quick,
            Tier::Standard => standard,
            Tier::Thorough => thorough,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Quick => "quick",
            Tier::Standard => "standard",
            Tier::Thorough => "thorough",
        })
    }
}

impl std::str::FromStr for Tier {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "quick" => Ok(Tier::Quick),
            "standard" => Ok(Tier::Standard),
            "thorough" => Ok(Tier::Thorough),
            other => Err(crate::Error::Param(format!("unknown tier `{other}` (quick | standard | thorough)"))),
        }
    }
}

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Settings shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub tier: Tier,
    pub seed: u64,
    /// Relative change allowed over two refinement doublings.
    pub blowup_tol: f64,
    /// Cap on the second-difference quotient for the boundedness tests.
    pub second_difference_cap: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tier: Tier::Standard, seed: DEFAULT_SEED, blowup_tol: BLOWUP_TOL, second_difference_cap: 1e3 }
    }
}

impl VerifyConfig {
    pub fn with_tier(mut self, tier: Tier) -> Self {
        self.tier = tier;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn record(&self, r: &mut ExperimentReport) {
        r.param("tier", self.tier.to_string());
        r.param("seed", self.seed as f64);
        r.param("blowup_tol", self.blowup_tol);
        r.param("second_difference_cap", self.second_difference_cap);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The measurement could not decide (e.g. a fit with too large residual).
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Le => value <= threshold,
            Comparison::Ge => value >= threshold,
            Comparison::Lt => value < threshold,
            Comparison::Gt => value > threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Gt => ">",
        }
    }
}

/// One pass/fail decision: `value` compared against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    /// Pass iff `value cmp threshold`; non-finite values fail.
    pub fn check(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let ok = value.is_finite() && comparison.holds(value, threshold);
        Verdict {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            comparison,
            threshold,
            note: None,
        }
    }

    /// A boolean condition recorded as 1/0 against the threshold 1.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Verdict::check(name, if ok { 1.0 } else { 0.0 }, Comparison::Ge, 1.0)
    }

    pub fn inconclusive(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64, why: &str) -> Self {
        Verdict {
            name: name.into(),
            status: Status::Inconclusive,
            value,
            comparison,
            threshold,
            note: Some(why.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        write!(f, "{tag} {}: {:.6e} {} {:.6e}", self.name, self.value, self.comparison.symbol(), self.threshold)?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

/// Parameter value in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Text(String),
    List(Vec<f64>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::List(v)
    }
}

impl From<&[f64]> for Value {
    fn from(v: &[f64]) -> Self {
        Value::List(v.to_vec())
    }
}

/// Columnar data with a header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub params: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, f64>,
    /// Error estimates attached to entries of `outputs` (same keys).
    pub errors: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tables: Vec<Table>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    /// Seconds; kept out of the serialized record so that reports are
    /// byte-reproducible.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>) -> Self {
        ExperimentReport {
            id: id.into(),
            params: BTreeMap::new(),
            outputs: BTreeMap::new(),
            errors: BTreeMap::new(),
            verdicts: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            wall_clock: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    pub fn output(&mut self, key: &str, v: f64) {
        self.outputs.insert(key.to_string(), v);
    }

    pub fn output_with_error(&mut self, key: &str, v: f64, err: f64) {
        self.outputs.insert(key.to_string(), v);
        self.errors.insert(key.to_string(), err);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    /// True iff every verdict passes (vacuously for exploratory reports).
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed())
    }

    /// Fold another report in, prefixing its keys.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        let key = |k: &str| format!("{prefix}.{k}");
        for (k, v) in other.params {
            self.params.insert(key(&k), v);
        }
        for (k, v) in other.outputs {
            self.outputs.insert(key(&k), v);
        }
        for (k, v) in other.errors {
            self.errors.insert(key(&k), v);
        }
        for mut v in other.verdicts {
            v.name = key(&v.name);
            self.verdicts.push(v);
        }
        for mut t in other.tables {
            t.name = key(&t.name);
            self.tables.push(t);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
    }

    /// Human-readable rendering.
    pub fn render(&self) -> String {
        let mut s = format!("experiment {}\n", self.id);
        if !self.params.is_empty() {
            s.push_str("parameters:\n");
            for (k, v) in &self.params {
                let shown = match v {
                    Value::Num(x) => format!("{x}"),
                    Value::Text(t) => t.clone(),
                    Value::List(xs) => format!("{xs:?}"),
                };
                s.push_str(&format!("  {k} = {shown}\n"));
            }
        }
        if !self.outputs.is_empty() {
            s.push_str("outputs:\n");
            for (k, v) in &self.outputs {
                match self.errors.get(k) {
                    Some(e) => s.push_str(&format!("  {k} = {v:.8e} ± {e:.2e}\n")),
                    None => s.push_str(&format!("  {k} = {v:.8e}\n")),
                }
            }
        }
        s.push_str("verdicts:\n");
        for v in &self.verdicts {
            s.push_str(&format!("  {v}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s.push_str(&format!("overall: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        s
    }
}

/// Run `body` and stamp the report with its wall-clock time.
pub(crate) fn timed(body: impl FnOnce() -> crate::Result<ExperimentReport>) -> crate::Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut r = body()?;
    r.wall_clock = t0.elapsed().as_secs_f64();
    Ok(r)
}

/// Relative spread max/min of positive values (∞ if any is ≤ 0).
pub(crate) fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests;
