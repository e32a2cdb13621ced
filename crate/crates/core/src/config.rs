//! CLI-facing configuration records.
//!
//! Each subcommand consumes one strictly typed JSON record. Validation
//! happens in two layers: the serde parse rejects unknown fields and
//! type mismatches (the structural half of the published schemas), and
//! [`Validate::validate`] enforces the numeric invariants. The schema
//! documents returned by [`schema`] are published verbatim by the CLI's
//! `--schema` flag so configs can be checked externally as well.

use serde::{Deserialize, Serialize};

use crate::dynamics::SimConfig;
use crate::index_sets::TangentialSet;
use crate::spectral_core::Mode;
use crate::{Error, Result};

pub trait Validate {
    fn validate(&self) -> Result<()>;
}

/// Parse one JSON config record strictly (unknown fields rejected) and
/// run its invariant checks.
pub fn from_json<T: for<'de> Deserialize<'de> + Validate>(text: &str) -> Result<T> {
    let value: T = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("config does not match the schema: {e}")))?;
    value.validate()?;
    Ok(value)
}

fn default_j_max_factor() -> usize {
    5
}

/// `divisors`: exhaustive small-divisor survey of one order's admissible
/// strata plus the analytic tail certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorsConfig {
    pub order: usize,
    pub n1: Mode,
    pub n2: Mode,
    pub j_max: usize,
    /// Candidate ceiling guard for the enumeration (default 10⁹).
    #[serde(default)]
    pub ceiling: Option<u64>,
}

impl Validate for DivisorsConfig {
    fn validate(&self) -> Result<()> {
        if !(self.order == 6 || self.order == 10 || self.order == 14) {
            return Err(Error::Config(format!(
                "order must be 6, 10 or 14, got {}",
                self.order
            )));
        }
        TangentialSet::new(self.n1, self.n2)?;
        if self.j_max == 0 {
            return Err(Error::Config("j_max must be positive".into()));
        }
        Ok(())
    }
}

/// `normalform`: order-6 decomposition, generating function, homological
/// residual status, and the order-10/14 ladders.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormConfig {
    pub n1: Mode,
    pub n2: Mode,
    /// Non-S band limit; defaults to 5·n₂.
    #[serde(default)]
    pub j_max: Option<usize>,
    #[serde(default)]
    pub ceiling: Option<u64>,
}

impl NormalFormConfig {
    pub fn effective_j_max(&self) -> usize {
        self.j_max
            .unwrap_or(default_j_max_factor() * self.n2.unsigned_abs() as usize)
    }
}

impl Validate for NormalFormConfig {
    fn validate(&self) -> Result<()> {
        let s = TangentialSet::new(self.n1, self.n2)?;
        if self.effective_j_max() < s.n2() as usize {
            return Err(Error::Config(format!(
                "j_max = {} cannot resolve the tangential set (need ≥ {})",
                self.effective_j_max(),
                s.n2()
            )));
        }
        Ok(())
    }
}

/// `freqmap`: frequency maps, Jacobian tables, and the nondegeneracy
/// assumption suite over O* = [√ε, 4√ε]².
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqMapConfig {
    pub n1: Mode,
    pub n2: Mode,
    pub epsilon: f64,
    /// Band limit for the normal-form inputs; defaults to 5·n₂.
    #[serde(default)]
    pub j_max: Option<usize>,
    /// Normal modes entering the Assumption B bounds; defaults to 3·n₂.
    #[serde(default)]
    pub j_max_check: Option<usize>,
}

impl FreqMapConfig {
    pub fn effective_j_max(&self) -> usize {
        self.j_max
            .unwrap_or(default_j_max_factor() * self.n2.unsigned_abs() as usize)
    }

    pub fn effective_j_max_check(&self) -> usize {
        self.j_max_check.unwrap_or(3 * self.n2.unsigned_abs() as usize)
    }
}

impl Validate for FreqMapConfig {
    fn validate(&self) -> Result<()> {
        let s = TangentialSet::new(self.n1, self.n2)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.effective_j_max() < s.n2() as usize {
            return Err(Error::Config(format!(
                "j_max = {} cannot resolve the tangential set",
                self.effective_j_max()
            )));
        }
        Ok(())
    }
}

impl Validate for SimConfig {
    fn validate(&self) -> Result<()> {
        SimConfig::validate(self)
    }
}

/// `analyze`: frequency extraction from a trajectory CSV, with optional
/// normal-form predictions when the tangential set and ξ are supplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// Tones to extract per tangential series.
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub n1: Option<Mode>,
    #[serde(default)]
    pub n2: Option<Mode>,
    #[serde(default)]
    pub xi: Option<[f64; 2]>,
    /// Band limit for the prediction model; defaults to 5·n₂.
    #[serde(default)]
    pub j_max: Option<usize>,
}

fn default_count() -> usize {
    1
}

impl AnalyzeConfig {
    /// The prediction inputs, if fully specified.
    pub fn prediction_request(&self) -> Result<Option<(TangentialSet, [f64; 2], usize)>> {
        match (self.n1, self.n2, self.xi) {
            (None, None, None) => Ok(None),
            (Some(n1), Some(n2), Some(xi)) => {
                let s = TangentialSet::new(n1, n2)?;
                let j_max = self
                    .j_max
                    .unwrap_or(default_j_max_factor() * n2.unsigned_abs() as usize);
                Ok(Some((s, xi, j_max)))
            }
            _ => Err(Error::Config(
                "predictions need all of n1, n2 and xi (or none of them)".into(),
            )),
        }
    }
}

impl Validate for AnalyzeConfig {
    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if let Some((_, xi, _)) = self.prediction_request()? {
            if xi.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Config(format!("xi must be positive, got {xi:?}")));
            }
        }
        Ok(())
    }
}

/// `verify-all`: acceptance-suite selection (all criteria by default).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifyAllConfig {
    /// Criterion ids to run, 1–10; empty or absent selects all.
    #[serde(default)]
    pub criteria: Vec<u8>,
}

impl Validate for VerifyAllConfig {
    fn validate(&self) -> Result<()> {
        if self.criteria.iter().any(|&c| c == 0 || c > 10) {
            return Err(Error::Config(format!(
                "criteria must be in 1..=10, got {:?}",
                self.criteria
            )));
        }
        Ok(())
    }
}

/// Published JSON Schema documents, one per subcommand record.
pub fn schema(command: &str) -> Result<&'static str> {
    match command {
        "divisors" => Ok(DIVISORS_SCHEMA),
        "normalform" => Ok(NORMALFORM_SCHEMA),
        "freqmap" => Ok(FREQMAP_SCHEMA),
        "simulate" => Ok(SIMULATE_SCHEMA),
        "analyze" => Ok(ANALYZE_SCHEMA),
        "verify-all" => Ok(VERIFY_ALL_SCHEMA),
        other => Err(Error::Config(format!("no schema for subcommand '{other}'"))),
    }
}

pub const DIVISORS_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "divisors",
  "type": "object",
  "required": ["order", "n1", "n2", "j_max"],
  "additionalProperties": false,
  "properties": {
    "order": {"enum": [6, 10, 14]},
    "n1": {"type": "integer", "minimum": 1},
    "n2": {"type": "integer", "exclusiveMinimum": 1},
    "j_max": {"type": "integer", "minimum": 1},
    "ceiling": {"type": ["integer", "null"], "minimum": 1}
  }
}"#;

pub const NORMALFORM_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "normalform",
  "type": "object",
  "required": ["n1", "n2"],
  "additionalProperties": false,
  "properties": {
    "n1": {"type": "integer", "minimum": 1},
    "n2": {"type": "integer", "exclusiveMinimum": 1},
    "j_max": {"type": ["integer", "null"], "minimum": 1},
    "ceiling": {"type": ["integer", "null"], "minimum": 1}
  }
}"#;

pub const FREQMAP_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "freqmap",
  "type": "object",
  "required": ["n1", "n2", "epsilon"],
  "additionalProperties": false,
  "properties": {
    "n1": {"type": "integer", "minimum": 1},
    "n2": {"type": "integer", "exclusiveMinimum": 1},
    "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "j_max": {"type": ["integer", "null"], "minimum": 1},
    "j_max_check": {"type": ["integer", "null"], "minimum": 1}
  }
}"#;

pub const SIMULATE_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "simulate",
  "type": "object",
  "required": ["n1", "n2", "xi", "j_max", "m", "dt", "horizon", "sample_stride", "integrator"],
  "additionalProperties": false,
  "properties": {
    "n1": {"type": "integer", "minimum": 1},
    "n2": {"type": "integer", "exclusiveMinimum": 1},
    "xi": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2},
    "phases": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    "j_max": {"type": "integer", "minimum": 1},
    "m": {"type": "integer", "minimum": 4},
    "dt": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.2},
    "horizon": {"type": "number", "exclusiveMinimum": 0},
    "sample_stride": {"type": "integer", "minimum": 1},
    "integrator": {"enum": ["implicit-midpoint", "splitting"]},
    "include_nonlinearity": {"type": "boolean"},
    "drift_tol": {"type": "number", "exclusiveMinimum": 0}
  }
}"#;

pub const ANALYZE_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "analyze",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "count": {"type": "integer", "minimum": 1},
    "n1": {"type": ["integer", "null"], "minimum": 1},
    "n2": {"type": ["integer", "null"], "exclusiveMinimum": 1},
    "xi": {"type": ["array", "null"], "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2},
    "j_max": {"type": ["integer", "null"], "minimum": 1}
  }
}"#;

pub const VERIFY_ALL_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "verify-all",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "criteria": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 10}}
  }
}"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors_config_roundtrip_and_validation() {
        let cfg: DivisorsConfig =
            from_json(r#"{"order": 6, "n1": 50, "n2": 2500, "j_max": 12500}"#).unwrap();
        assert_eq!(cfg.order, 6);
        assert_eq!(cfg.ceiling, None);
        assert!(from_json::<DivisorsConfig>(r#"{"order": 7, "n1": 5, "n2": 13, "j_max": 65}"#)
            .is_err());
        assert!(from_json::<DivisorsConfig>(r#"{"order": 6, "n1": 13, "n2": 5, "j_max": 65}"#)
            .is_err());
        // unknown fields are schema violations
        assert!(from_json::<DivisorsConfig>(
            r#"{"order": 6, "n1": 5, "n2": 13, "j_max": 65, "extra": 1}"#
        )
        .is_err());
    }

    #[test]
    fn normalform_defaults_to_five_n2() {
        let cfg: NormalFormConfig = from_json(r#"{"n1": 3, "n2": 7}"#).unwrap();
        assert_eq!(cfg.effective_j_max(), 35);
        let cfg: NormalFormConfig = from_json(r#"{"n1": 3, "n2": 7, "j_max": 20}"#).unwrap();
        assert_eq!(cfg.effective_j_max(), 20);
        assert!(from_json::<NormalFormConfig>(r#"{"n1": 3, "n2": 7, "j_max": 5}"#).is_err());
    }

    #[test]
    fn freqmap_epsilon_bounds() {
        assert!(from_json::<FreqMapConfig>(r#"{"n1": 3, "n2": 7, "epsilon": 1e-6}"#).is_ok());
        assert!(from_json::<FreqMapConfig>(r#"{"n1": 3, "n2": 7, "epsilon": 0.0}"#).is_err());
        assert!(from_json::<FreqMapConfig>(r#"{"n1": 3, "n2": 7, "epsilon": 2.0}"#).is_err());
    }

    #[test]
    fn simulate_config_parses_with_defaults() {
        let text = r#"{
            "n1": 5, "n2": 13, "xi": [0.05, 0.05], "j_max": 65, "m": 512,
            "dt": 0.05, "horizon": 100.0, "sample_stride": 10,
            "integrator": "implicit-midpoint"
        }"#;
        let cfg: SimConfig = from_json(text).unwrap();
        assert!(cfg.include_nonlinearity);
        assert_eq!(cfg.phases, [0.0, 0.0]);
        // dt·λ₁ > 0.1 fails the invariant even though it parses
        let bad = text.replace("0.05,", "0.25,");
        assert!(from_json::<SimConfig>(&bad).is_err());
    }

    #[test]
    fn analyze_prediction_needs_all_or_nothing() {
        let cfg: AnalyzeConfig = from_json(r#"{}"#).unwrap();
        assert!(cfg.prediction_request().unwrap().is_none());
        let cfg: AnalyzeConfig =
            from_json(r#"{"n1": 5, "n2": 13, "xi": [0.05, 0.05]}"#).unwrap();
        let (s, _, j) = cfg.prediction_request().unwrap().unwrap();
        assert_eq!((s.n1(), s.n2()), (5, 13));
        assert_eq!(j, 65);
        assert!(from_json::<AnalyzeConfig>(r#"{"n1": 5}"#).is_err());
    }

    #[test]
    fn verify_all_criteria_range() {
        let cfg: VerifyAllConfig = from_json(r#"{"criteria": [1, 4, 10]}"#).unwrap();
        assert_eq!(cfg.criteria, vec![1, 4, 10]);
        assert!(from_json::<VerifyAllConfig>(r#"{"criteria": [0]}"#).is_err());
        assert!(from_json::<VerifyAllConfig>(r#"{"criteria": [11]}"#).is_err());
    }

    #[test]
    fn schemas_are_valid_json_and_cover_all_subcommands() {
        for cmd in ["divisors", "normalform", "freqmap", "simulate", "analyze", "verify-all"] {
            let s = schema(cmd).unwrap();
            let v: serde_json::Value = serde_json::from_str(s).unwrap();
            assert_eq!(v["title"], cmd);
        }
        assert!(schema("plot").is_err());
    }
}
