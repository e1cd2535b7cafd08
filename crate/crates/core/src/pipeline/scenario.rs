use crate::cx::{from_cx, Cx, C64};
use crate::diagnostics::KGrid;
use crate::error::{Result, SpectreError};
use crate::operator_lab::OperatorSpec;
use crate::wave_engine::EvolveConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Initial datum `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorSpec {
    Explicit { values: Vec<Cx> },
    AllOnes,
    /// Entries uniform in `[-1, 1]` (real and imaginary parts).
    SeededRandom { seed: u64 },
}

impl VectorSpec {
    pub fn realize(&self, n: usize) -> Result<Vec<C64>> {
        match self {
            VectorSpec::Explicit { values } => {
                if values.len() != n {
                    return Err(SpectreError::config(
                        "f.values",
                        format!("has length {}, operator has n = {n}", values.len()),
                    ));
                }
                if let Some(i) = values.iter().position(|c| !(c.0.is_finite() && c.1.is_finite())) {
                    return Err(SpectreError::config(format!("f.values[{i}]"), "non-finite value"));
                }
                Ok(from_cx(values))
            }
            VectorSpec::AllOnes => Ok(vec![C64::new(1.0, 0.0); n]),
            VectorSpec::SeededRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Unstable,
    Embedded,
    Amplitude,
    Absorption,
    Decompose,
    Bromwich,
    Abelian,
    Plancherel,
    IntegrationRule,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Unstable,
        Check::Embedded,
        Check::Amplitude,
        Check::Absorption,
        Check::Decompose,
        Check::Bromwich,
        Check::Abelian,
        Check::Plancherel,
        Check::IntegrationRule,
    ];

    /// Checks that must run first.
    pub fn requires(self) -> &'static [Check] {
        match self {
            Check::Embedded | Check::Amplitude => &[Check::Unstable],
            Check::Bromwich => &[Check::Decompose],
            _ => &[],
        }
    }
}

fn default_schema() -> u32 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub operator: OperatorSpec,
    pub f: VectorSpec,
    pub evolve: EvolveConfig,
    pub k_grid: KGrid,
    /// Forcing frequencies for the amplitude and absorption checks.
    #[serde(default)]
    pub amplitude_k: Vec<f64>,
    #[serde(default)]
    pub checks: BTreeSet<Check>,
    /// Coordinate indices kept by the projection mask.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<usize>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            if inner.is_syntax() || inner.is_eof() {
                SpectreError::MalformedJson { line: inner.line(), column: inner.column(), message: inner.to_string() }
            } else {
                let path = e.path().to_string();
                SpectreError::config(if path == "." { "scenario".to_string() } else { path }, inner.to_string())
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpectreError::config(path.display().to_string(), format!("cannot read scenario: {e}")))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(SpectreError::config("schema", format!("unsupported schema version {}", self.schema)));
        }
        self.k_grid.validate()?;
        self.evolve.validate(None)?;
        let n = self.operator.dim();
        self.f.realize(n)?;
        if let Some(i) = self.amplitude_k.iter().position(|k| !k.is_finite()) {
            return Err(SpectreError::config(format!("amplitude_k[{i}]"), "non-finite value"));
        }
        if let Some(p) = &self.projection {
            if let Some(i) = p.iter().position(|&j| j >= n) {
                return Err(SpectreError::config(format!("projection[{i}]"), format!("index ≥ n = {n}")));
            }
            if p.is_empty() {
                return Err(SpectreError::config("projection", "empty index set"));
            }
        }
        Ok(())
    }

    /// Replaces every seed (operator and `f`) with `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let OperatorSpec::PerturbedRandom { seed: s, .. } = &mut self.operator {
            *s = seed;
        }
        if let VectorSpec::SeededRandom { seed: s } = &mut self.f {
            *s = seed;
        }
        self
    }

    /// Requested checks plus their prerequisites, in execution order.
    pub fn effective_checks(&self) -> Vec<Check> {
        let mut set = self.checks.clone();
        for c in &self.checks {
            set.extend(c.requires().iter().copied());
        }
        Check::ALL.iter().copied().filter(|c| set.contains(c)).collect()
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical JSON of the effective scenario.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
