use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::uniformity::{ProbeVerdict, RegularizedNet, TransferReport, WitnessOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CompactConsistent,
    NoncompactWitnessed,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CompactConsistent => "COMPACT_CONSISTENT",
            Verdict::NoncompactWitnessed => "NONCOMPACT_WITNESSED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reading of the tail norms alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Compact,
    Noncompact,
    Undetermined,
}

/// Reading of the nets and the witness alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundednessVerdict {
    TotallyBounded,
    NotTotallyBounded,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailNorm {
    pub d: usize,
    pub kappa: f64,
}

/// `Σ_{i<D} θ_{e_i, F*(e_i)}` against `Q_D F` and `F` at the horizon length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaResidual {
    pub d: usize,
    pub terms: usize,
    /// First legs were taken inside the constrained target submodule.
    pub relative: bool,
    /// `‖Q_D F − Σθ‖`.
    pub reconstruction: f64,
    /// `‖F − Σθ‖`, which equals `κ_D`.
    pub approximation: f64,
}

/// `F = Q_D F + (1 − Q_D) F` at the top of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub d: usize,
    /// `‖p₁F + p₂F − F‖`.
    pub sum_residual: f64,
    /// `|‖p₂F‖ − κ_D|`.
    pub tail_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactnessSide {
    pub horizon: usize,
    pub tail_norms: Vec<TailNorm>,
    /// Slope of `−ln κ_D` against `D` by least squares over positive `κ_D`.
    pub decay_rate: Option<f64>,
    pub consistency: f64,
    pub residuals: Vec<ThetaResidual>,
    pub split: SplitCheck,
    pub verdict: TailVerdict,
}

/// Battery probes at one truncation length; one verdict per ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelProbe {
    pub d: usize,
    pub points: usize,
    pub budget: usize,
    pub probes: Vec<ProbeVerdict>,
}

impl LevelProbe {
    /// Net size per (ε index, spec index); `None` where a probe returned a family.
    pub fn net_sizes(&self) -> Vec<Option<Vec<usize>>> {
        self.probes
            .iter()
            .map(|p| match p {
                ProbeVerdict::NetFound { nets } => Some(nets.iter().map(|n| n.size()).collect()),
                ProbeVerdict::SeparatedFamily { .. } => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessProbe {
    pub d: usize,
    pub outcome: WitnessOutcome,
    /// Probes on the witness points under the witness spec, one per ε.
    pub probes: Vec<ProbeVerdict>,
}

impl WitnessProbe {
    /// Largest separated family over the ε ladder.
    pub fn largest_family(&self) -> Option<usize> {
        self.probes
            .iter()
            .filter_map(|p| match p {
                ProbeVerdict::SeparatedFamily { family, .. } => Some(family.size()),
                ProbeVerdict::NetFound { .. } => None,
            })
            .max()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateNet {
    pub coordinate: usize,
    pub spec_id: usize,
    pub result: RegularizedNet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessSide {
    pub levels: Vec<LevelProbe>,
    pub witnesses: Vec<WitnessProbe>,
    pub coordinate_nets: Vec<CoordinateNet>,
    pub transfers: Vec<TransferReport>,
    pub verdict: BoundednessVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub compactness: CompactnessSide,
    pub boundedness: BoundednessSide,
    pub diagnostics: Vec<String>,
    pub config: ScenarioConfig,
}
