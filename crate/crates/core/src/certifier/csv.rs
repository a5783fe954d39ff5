//! Plot-ready tables. Columns are fixed: `D,kappa_D` and `eps,spec_id,net_size,covered`.

use serde::Serialize;

use super::report::{CertificationReport, LevelProbe};
use crate::uniformity::ProbeVerdict;

#[derive(Serialize)]
struct TailRow {
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "kappa_D")]
    kappa: f64,
}

#[derive(Serialize)]
struct NetRow {
    eps: f64,
    spec_id: usize,
    net_size: usize,
    covered: bool,
}

fn table<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

pub fn tail_norms_csv(report: &CertificationReport) -> String {
    let rows = report.compactness.tail_norms.iter().map(|t| TailRow {
        d: t.d,
        kappa: t.kappa,
    });
    with_header(table(rows), "D,kappa_D")
}

/// One row per (ε, spec); a separated family is listed under its spec with `covered = false`.
pub fn nets_csv(level: &LevelProbe) -> String {
    let rows = level.probes.iter().flat_map(|probe| match probe {
        ProbeVerdict::NetFound { nets } => nets
            .iter()
            .map(|n| NetRow {
                eps: n.epsilon,
                spec_id: n.spec_id,
                net_size: n.size(),
                covered: n.covered,
            })
            .collect(),
        ProbeVerdict::SeparatedFamily { family, .. } => vec![NetRow {
            eps: family.epsilon,
            spec_id: family.spec_id,
            net_size: family.size(),
            covered: false,
        }],
    });
    with_header(table(rows), "eps,spec_id,net_size,covered")
}

/// The writer only emits a header once a row exists.
fn with_header(body: String, header: &str) -> String {
    if body.is_empty() {
        format!("{header}\n")
    } else {
        body
    }
}

/// File name and contents of every table for a report.
pub fn report_tables(report: &CertificationReport) -> Vec<(String, String)> {
    let mut tables = vec![("tail_norms.csv".to_string(), tail_norms_csv(report))];
    if let Some(top) = report.boundedness.levels.last() {
        tables.push(("nets.csv".into(), nets_csv(top)));
    }
    for level in &report.boundedness.levels {
        tables.push((format!("nets_D{}.csv", level.d), nets_csv(level)));
    }
    tables
}
