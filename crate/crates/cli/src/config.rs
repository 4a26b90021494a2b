//! Experiment configuration: a single JSON document with all fields
//! optional, mirrored by command-line flags that override file values.

use serde::{Deserialize, Serialize};
use splitsim::error::{Result, SplitError};
use splitsim::models::{MemoryClosure, TransportConfig};
use splitsim::quadrature::QuadratureRule;
use splitsim::schemes::{IterativeMode, SchemeKind};

/// Configuration shared by every experiment subcommand.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Schemes for the scalar-example table.
    pub schemes: Vec<String>,
    /// Iterative modes to sweep.
    pub modes: Vec<String>,
    /// Step sizes for the scalar example (a halving chain by default).
    pub dts: Vec<f64>,
    /// Iteration cap for iterative tables.
    pub iters: usize,
    /// Final time of the scalar example.
    pub t_end: f64,
    /// Seed for random test operators and polynomials.
    pub seed: u64,
    pub transport: TransportSection,
}

/// Transport-experiment parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TransportSection {
    pub velocity: f64,
    pub diffusion: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n_points: usize,
    pub domain_length: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Memory closure: "case1" (moment) or "case2" (history quadrature).
    pub closure: String,
    /// History quadrature for the case2 closure.
    pub history_degree: usize,
    pub history_panels: usize,
    /// Fine-scale refinement of the reference solver.
    pub refinement: usize,
    /// Iteration counts reported: 1..=iterations.
    pub iterations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: vec![
                "lie".into(),
                "swss".into(),
                "strang".into(),
                "iterative".into(),
            ],
            modes: vec![
                "one_sided_a".into(),
                "one_sided_b".into(),
                "alternating".into(),
            ],
            dts: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
            iters: 8,
            t_end: 1.0,
            seed: 42,
            transport: TransportSection::default(),
        }
    }
}

impl Default for TransportSection {
    fn default() -> Self {
        let t = TransportConfig::default_parameters();
        Self {
            velocity: t.velocity,
            diffusion: t.diffusion,
            lambda1: t.lambda1,
            lambda2: t.lambda2,
            n_points: t.n_points,
            domain_length: t.domain_length,
            t_end: 1.0,
            dt: 0.05,
            closure: "case1".into(),
            history_degree: 2,
            history_panels: 8,
            refinement: 16,
            iterations: 6,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| SplitError::Domain(format!("invalid config JSON: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(SplitError::Domain("scheme list must be nonempty".into()));
        }
        if self.modes.is_empty() {
            return Err(SplitError::Domain("mode list must be nonempty".into()));
        }
        if self.dts.is_empty() {
            return Err(SplitError::Domain("dt list must be nonempty".into()));
        }
        if !self.dts.iter().all(|&dt| dt.is_finite() && dt > 0.0) {
            return Err(SplitError::Domain("all dts must be positive".into()));
        }
        if self.iters == 0 {
            return Err(SplitError::Domain("iters must be at least 1".into()));
        }
        self.scheme_kinds()?;
        self.iterative_modes()?;
        self.transport.closure_kind()?;
        self.transport.to_transport_config().validate()?;
        Ok(())
    }

    pub fn scheme_kinds(&self) -> Result<Vec<SchemeKind>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn iterative_modes(&self) -> Result<Vec<IterativeMode>> {
        self.modes.iter().map(|s| s.parse()).collect()
    }

    /// FNV-1a hash of the canonical JSON serialization; pins a result table
    /// to the exact configuration that produced it.
    pub fn hash(&self) -> u64 {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.as_bytes() {
            h ^= u64::from(*byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

impl TransportSection {
    pub fn to_transport_config(&self) -> TransportConfig {
        TransportConfig {
            velocity: self.velocity,
            diffusion: self.diffusion,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            n_points: self.n_points,
            domain_length: self.domain_length,
        }
    }

    pub fn closure_kind(&self) -> Result<MemoryClosure> {
        match self.closure.as_str() {
            "case1" => Ok(MemoryClosure::Case1Moment),
            "case2" => Ok(MemoryClosure::Case2History {
                quad: splitsim::quadrature::rule_coefficients(self.history_degree)?,
                panels: self.history_panels,
            }),
            other => Err(SplitError::Domain(format!(
                "unknown closure '{other}', expected case1|case2"
            ))),
        }
    }

    pub fn history_rule(&self) -> Result<QuadratureRule> {
        splitsim::quadrature::rule_coefficients(self.history_degree)
    }
}
