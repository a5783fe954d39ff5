//! End-to-end check that the tail norms of an operator and the nets on the image of the
//! unit ball tell the same story, with every certificate embedded for replay.

mod config;
mod csv;
mod pipeline;
mod replay;
mod report;

pub use config::{ScenarioConfig, Tolerances};
pub use csv::{nets_csv, report_tables, tail_norms_csv};
pub use pipeline::certify;
pub use replay::{replay, ReplayOutcome};
pub use report::{
    BoundednessSide, BoundednessVerdict, CertificationReport, CompactnessSide, CoordinateNet,
    LevelProbe, SplitCheck, TailNorm, TailVerdict, ThetaResidual, Verdict, WitnessProbe,
};

/// Replays a report against the config embedded in it.
pub fn replay_embedded(report: &CertificationReport) -> crate::Result<ReplayOutcome> {
    replay(report, &report.config)
}
