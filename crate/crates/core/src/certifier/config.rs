use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::CStarAlgebra;
use crate::operators::OperatorGenerator;
use crate::sampling::SampleConfig;
use crate::uniformity::Coupling;
use crate::{Error, Result};

/// Thresholds used by the verdicts and by re-verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `κ_{D_L}` at or below this counts as decayed.
    pub kappa_compact: f64,
    /// `κ_{D_L}` at or above this counts as non-decaying.
    pub kappa_noncompact: f64,
    /// Non-decaying also needs `κ_{D_L} ≥ plateau_ratio · κ_{D_1}`.
    pub plateau_ratio: f64,
    /// Smallest row norm accepted as the witness δ.
    pub witness_floor: f64,
    /// Slack for net coverage and family separation checks.
    pub verify: f64,
    /// Slack for θ-reconstruction and split residuals.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kappa_compact: 1e-6,
            kappa_noncompact: 1e-3,
            plateau_ratio: 0.5,
            witness_floor: 1e-3,
            verify: 1e-9,
            residual: 1e-12,
        }
    }
}

fn default_ladder() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

fn default_epsilons() -> Vec<f64> {
    vec![0.5, 0.2, 0.1]
}

fn default_specs() -> usize {
    32
}

fn default_coordinate_nets() -> usize {
    3
}

/// One certification run: the operator, the ladders and every source of randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub algebra: CStarAlgebra,
    pub generator: OperatorGenerator,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_specs")]
    pub specs: usize,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default = "default_coordinate_nets")]
    pub coordinate_nets: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn new(
        name: impl Into<String>,
        algebra: CStarAlgebra,
        generator: OperatorGenerator,
    ) -> Self {
        Self {
            name: name.into(),
            algebra,
            generator,
            ladder: default_ladder(),
            epsilons: default_epsilons(),
            specs: default_specs(),
            sample: SampleConfig::default(),
            seed: 0,
            coupling: Coupling::Verbatim,
            coordinate_nets: default_coordinate_nets(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn top(&self) -> usize {
        *self.ladder.last().expect("validated ladder is non-empty")
    }

    /// Length of the operator the tail norms are read from.
    pub fn horizon(&self) -> usize {
        2 * self.top()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.ladder.len() < 2 {
            return bad("the truncation ladder needs at least two lengths");
        }
        if self.ladder[0] < 2 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad("the truncation ladder must be strictly increasing from at least 2");
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad("every ε must lie in (0, 1)");
        }
        for (i, a) in self.epsilons.iter().enumerate() {
            if self.epsilons[..i].contains(a) {
                return bad("ε values must be distinct");
            }
        }
        if self.specs < 2 {
            return bad("the spec battery needs the adversarial spec and at least one random spec");
        }
        if self.sample.support_window == 0 || self.sample.max_support == 0 {
            return bad("sample support must be positive");
        }
        let t = &self.tolerances;
        if [
            t.kappa_compact,
            t.kappa_noncompact,
            t.plateau_ratio,
            t.witness_floor,
            t.verify,
            t.residual,
        ]
        .iter()
        .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad("tolerances must be finite and non-negative");
        }
        if t.kappa_compact >= t.kappa_noncompact {
            return bad("the compact κ threshold must lie below the non-compact one");
        }
        self.generator
            .validate(&self.algebra)
            .map_err(|e| Error::Config(format!("generator: {e}")))
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ScalarSequence;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::new(
            "t",
            CStarAlgebra::new(vec![2, 1]).unwrap(),
            OperatorGenerator::diagonal(ScalarSequence::Pow2Decay),
        )
    }

    #[test]
    fn defaults_validate_and_hash_is_stable() {
        let c = cfg();
        c.validate().unwrap();
        assert_eq!(c.hash(), cfg().hash());
        let mut d = cfg();
        d.seed = 1;
        assert_ne!(c.hash(), d.hash());
        let back: ScenarioConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_ladders() {
        let mut c = cfg();
        c.ladder = vec![8, 4];
        assert!(c.validate().is_err());
        c.ladder = vec![8];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.epsilons = vec![0.5, 1.0];
        assert!(c.validate().is_err());
        c.epsilons = vec![0.5, 0.5];
        assert!(c.validate().is_err());
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let c: ScenarioConfig = serde_json::from_str(
            r#"{"name":"z","algebra":{"block_dims":[1]},"generator":{"rule":"diagonal","lambda":"zero"}}"#,
        )
        .unwrap();
        assert_eq!(c.ladder, vec![4, 8, 16, 32]);
        assert_eq!(c.specs, 32);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"name":"z","algebra":{"block_dims":[1]},"generator":{"rule":"diagonal","lambda":"zero"},"sed":1}"#).is_err());
    }
}
