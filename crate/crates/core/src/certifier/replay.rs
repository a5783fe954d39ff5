use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::pipeline::{
    battery_features, boundedness_verdict, combine, compactness_side, coordinate_spec, level_data,
    transfer_projections, transfer_split, witness_budget, witness_outcome, LevelData,
};
use super::report::{CertificationReport, TailVerdict};
use crate::hilbert::ModuleElement;
use crate::operators::ModuleOperator;
use crate::uniformity::{
    min_pairwise_distance, project_spec, radius_on_features, NetReport, PointFeatures,
    ProbeVerdict, PseudoMetricSpec,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub ok: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

struct Checker {
    checks: usize,
    failures: Vec<String>,
}

impl Checker {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, stored: f64, fresh: f64, tol: f64, what: impl FnOnce() -> String) {
        let ok = (stored - fresh).abs() <= tol * fresh.abs().max(1.0)
            || (stored.is_nan() && fresh.is_nan());
        self.check(ok, || {
            format!("{}: stored {stored:e}, recomputed {fresh:e}", what())
        });
    }
}

fn check_net(c: &mut Checker, pf: &PointFeatures, net: &NetReport, tol: f64, label: &str) {
    if net.centers.iter().any(|&i| i >= pf.len()) {
        c.check(false, || {
            format!("{label}: center index outside the point list")
        });
        return;
    }
    let radius = radius_on_features(pf, &net.centers);
    if net.covered {
        c.check(radius <= net.epsilon + tol, || {
            format!(
                "{label}: covering radius {radius:e} exceeds ε = {}",
                net.epsilon
            )
        });
    }
    c.close(net.max_uncovered_distance, radius, 1e-9, || {
        format!("{label}: radius")
    });
}

fn check_probe(
    c: &mut Checker,
    probe: &ProbeVerdict,
    features: &[PointFeatures],
    specs: &[PseudoMetricSpec],
    eps: f64,
    tol: f64,
    label: &str,
) {
    match probe {
        ProbeVerdict::NetFound { nets } => {
            c.check(nets.len() == specs.len(), || {
                format!("{label}: {} nets for {} specs", nets.len(), specs.len())
            });
            for (k, net) in nets.iter().enumerate().take(specs.len()) {
                c.check(net.spec_id == specs[k].id && net.epsilon == eps, || {
                    format!("{label}: net {k} carries the wrong spec or ε")
                });
                c.check(net.covered, || {
                    format!("{label}: net for spec {k} is not covering")
                });
                check_net(c, &features[k], net, tol, &format!("{label}, spec {k}"));
            }
        }
        ProbeVerdict::SeparatedFamily { family, budget } => {
            let Some(k) = specs.iter().position(|s| s.id == family.spec_id) else {
                c.check(false, || format!("{label}: family names an unknown spec"));
                return;
            };
            let pf = &features[k];
            let in_range = family.points.iter().all(|&i| i < pf.len());
            c.check(
                in_range && family.size() > *budget && family.size() >= 2,
                || {
                    format!(
                        "{label}: family of {} does not exceed budget {budget}",
                        family.size()
                    )
                },
            );
            if in_range {
                let mut min = f64::INFINITY;
                for (a, &i) in family.points.iter().enumerate() {
                    for &j in &family.points[a + 1..] {
                        min = min.min(pf.distance(i, j));
                    }
                }
                c.check(min >= family.epsilon - tol && family.epsilon == eps, || {
                    format!(
                        "{label}: family separation {min:e} below ε = {}",
                        family.epsilon
                    )
                });
            }
        }
    }
}

/// Re-verifies every certificate in `report` from data regenerated out of `config`.
pub fn replay(report: &CertificationReport, config: &ScenarioConfig) -> Result<ReplayOutcome> {
    let hash = config.hash();
    if report.config_hash != hash {
        return Err(Error::HashMismatch {
            report: report.config_hash.clone(),
            config: hash,
        });
    }
    config.validate()?;
    let tol = &config.tolerances;
    let mut c = Checker {
        checks: 0,
        failures: Vec::new(),
    };

    let fresh = compactness_side(config)?;
    let stored = &report.compactness;
    c.check(stored.tail_norms.len() == fresh.tail_norms.len(), || {
        "tail norm count".into()
    });
    for (s, f) in stored.tail_norms.iter().zip(&fresh.tail_norms) {
        c.check(s.d == f.d, || {
            format!("tail norm ladder {} vs {}", s.d, f.d)
        });
        c.close(s.kappa, f.kappa, tol.residual, || {
            format!("κ at D = {}", f.d)
        });
    }
    c.check(stored.residuals.len() == fresh.residuals.len(), || {
        "θ residual count".into()
    });
    for (s, f) in stored.residuals.iter().zip(&fresh.residuals) {
        c.check(
            s.d == f.d && s.terms == f.terms && s.relative == f.relative,
            || format!("θ descriptor at D = {}", f.d),
        );
        c.check(f.reconstruction <= tol.residual, || {
            format!("θ reconstruction at D = {}", f.d)
        });
        c.close(s.reconstruction, f.reconstruction, tol.residual, || {
            format!("θ reconstruction at D = {}", f.d)
        });
        c.close(s.approximation, f.approximation, tol.residual, || {
            format!("θ approximation at D = {}", f.d)
        });
    }
    for (r, t) in fresh.residuals.iter().zip(&fresh.tail_norms) {
        c.close(r.approximation, t.kappa, tol.residual, || {
            format!("θ approximation against κ at D = {}", t.d)
        });
    }
    c.close(
        stored.split.sum_residual,
        fresh.split.sum_residual,
        tol.residual,
        || "split residual".into(),
    );
    c.close(
        stored.split.tail_gap,
        fresh.split.tail_gap,
        tol.residual,
        || "split tail gap".into(),
    );
    c.check(stored.verdict == fresh.verdict, || "tail verdict".into());
    if stored.verdict == TailVerdict::Compact {
        let last = fresh
            .residuals
            .last()
            .map_or(f64::INFINITY, |r| r.approximation);
        c.check(last <= tol.kappa_compact, || {
            "θ-approximant misses the κ threshold".into()
        });
    }

    let side = &report.boundedness;
    c.check(
        side.levels.len() == config.ladder.len() && side.witnesses.len() == config.ladder.len(),
        || "level count".into(),
    );
    let mut top: Option<LevelData> = None;
    for ((&d, level), wit) in config.ladder.iter().zip(&side.levels).zip(&side.witnesses) {
        let data = level_data(config, d)?;
        let features = battery_features(&data)?;
        c.check(
            level.d == d && wit.d == d && level.points == data.points.len(),
            || format!("level {d} shape"),
        );
        c.check(level.probes.len() == config.epsilons.len(), || {
            format!("level {d} probe count")
        });
        for (probe, &eps) in level.probes.iter().zip(&config.epsilons) {
            check_probe(
                &mut c,
                probe,
                &features,
                &data.specs,
                eps,
                tol.verify,
                &format!("battery D = {d}, ε = {eps}"),
            );
        }

        let outcome = witness_outcome(&data.f, tol)?;
        match (outcome.witness(), wit.outcome.witness()) {
            (None, None) => c.check(wit.probes.is_empty(), || {
                format!("probes without a witness at D = {d}")
            }),
            (Some(f), Some(s)) => {
                let same_points = s.points.len() == f.points.len()
                    && s.points
                        .iter()
                        .zip(&f.points)
                        .all(|(a, b)| a.max_abs_diff(b) <= tol.residual);
                c.check(same_points && s.rows == f.rows && s.spec == f.spec, || {
                    format!("witness at D = {d} differs from the regenerated one")
                });
                c.close(
                    s.bound,
                    f.delta / (4.0 * f.operator_norm),
                    tol.residual,
                    || format!("witness bound at D = {d}"),
                );
                let all: Vec<usize> = (0..f.points.len()).collect();
                let min = min_pairwise_distance(&f.points, &f.spec, &all)?;
                c.check(min >= 2.0 * f.bound - tol.verify, || {
                    format!("witness points at D = {d} are not 2·bound apart")
                });
                let pf = PointFeatures::new(&f.spec, &f.points)?;
                c.check(wit.probes.len() == config.epsilons.len(), || {
                    format!("witness probe count at D = {d}")
                });
                for (probe, &eps) in wit.probes.iter().zip(&config.epsilons) {
                    if let ProbeVerdict::SeparatedFamily { budget, .. } = probe {
                        c.check(*budget == witness_budget(d), || {
                            format!("witness budget at D = {d}")
                        });
                    }
                    check_probe(
                        &mut c,
                        probe,
                        std::slice::from_ref(&pf),
                        std::slice::from_ref(&f.spec),
                        eps,
                        tol.verify,
                        &format!("witness D = {d}, ε = {eps}"),
                    );
                }
            }
            _ => c.check(false, || format!("witness status at D = {d} differs")),
        }
        top = Some(data);
    }
    let top = top.expect("ladder is non-empty");

    let random_spec = |id: usize| top.specs.iter().skip(1).find(|s| s.id == id);
    for net in &side.coordinate_nets {
        let label = format!(
            "coordinate net c = {}, ε = {}",
            net.coordinate, net.result.net.epsilon
        );
        let Some(spec) = random_spec(net.spec_id).filter(|_| net.coordinate < top.d) else {
            c.check(false, || format!("{label}: unknown coordinate or spec"));
            continue;
        };
        let g = top.f.row(net.coordinate)?;
        let points = top
            .sample
            .iter()
            .map(|t| g.apply(t))
            .collect::<Result<Vec<_>>>()?;
        let cspec = coordinate_spec(spec, net.coordinate)?;
        let pf = PointFeatures::new(&cspec, &points)?;
        check_net(&mut c, &pf, &net.result.net, tol.verify, &label);
        c.close(
            net.result.verified_radius,
            net.result.net.max_uncovered_distance,
            1e-12,
            || format!("{label}: verified radius"),
        );
    }

    let (p1, p2) = transfer_projections(&config.algebra, transfer_split(config, top.d), top.d)?;
    for t in &side.transfers {
        let label = format!("transfer at ε = {}", t.epsilon);
        let Some(spec) = random_spec(t.backward.net.spec_id) else {
            c.check(false, || format!("{label}: unknown spec"));
            continue;
        };
        for (k, p) in [&p1, &p2].into_iter().enumerate() {
            check_transfer_part(&mut c, &top.points, spec, p, t, k, tol.verify, &label)?;
        }
        let pf = PointFeatures::new(spec, &top.points)?;
        c.check(
            t.backward.net.epsilon == t.epsilon && t.backward.net.covered,
            || format!("{label}: backward net claim"),
        );
        check_net(
            &mut c,
            &pf,
            &t.backward.net,
            tol.verify,
            &format!("{label}, backward"),
        );
    }

    let mut diagnostics = Vec::new();
    let bounded = boundedness_verdict(&side.levels, &side.witnesses);
    c.check(bounded == side.verdict, || {
        "boundedness verdict does not follow from the probes".into()
    });
    let verdict = combine(stored.verdict, bounded, &mut diagnostics);
    let expected = if report.diagnostics.is_empty() {
        verdict
    } else {
        super::report::Verdict::Inconclusive
    };
    c.check(report.verdict == expected, || {
        format!(
            "verdict {} does not follow from the evidence",
            report.verdict
        )
    });

    Ok(ReplayOutcome {
        ok: c.failures.is_empty(),
        checks: c.checks,
        failures: c.failures,
    })
}

#[allow(clippy::too_many_arguments)]
fn check_transfer_part(
    c: &mut Checker,
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    p: &ModuleOperator,
    t: &crate::uniformity::TransferReport,
    k: usize,
    tol: f64,
    label: &str,
) -> Result<()> {
    let projected_spec = project_spec(spec, p)?;
    let projected = points
        .iter()
        .map(|y| p.apply(y))
        .collect::<Result<Vec<_>>>()?;
    let on_y = PointFeatures::new(&projected_spec, points)?;
    let on_py = PointFeatures::new(&projected_spec, &projected)?;
    let fw = &t.forward[k];
    check_net(
        c,
        &on_y,
        &fw.net,
        tol,
        &format!("{label}, forward {k} on Y"),
    );
    check_net(
        c,
        &on_py,
        &fw.projected,
        tol,
        &format!("{label}, forward {k} on PY"),
    );
    c.check(
        fw.net.centers == fw.projected.centers && fw.projected.covered,
        || format!("{label}: forward {k} changed the centers or lost coverage"),
    );
    let part = &t.backward.parts[k];
    c.check(part.epsilon == t.epsilon / 4.0, || {
        format!("{label}: part {k} not at ε/4")
    });
    check_net(c, &on_py, part, tol, &format!("{label}, part {k}"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CStarAlgebra;
    use crate::certifier::certify;
    use crate::operators::{OperatorGenerator, ScalarSequence};

    fn small(lambda: ScalarSequence) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(
            "t",
            CStarAlgebra::new(vec![2, 1]).unwrap(),
            OperatorGenerator::diagonal(lambda),
        );
        c.ladder = vec![4, 8];
        c.specs = 4;
        c.sample.random_points = 24;
        c.coordinate_nets = 1;
        c
    }

    #[test]
    fn fresh_report_replays_and_tampering_is_caught() {
        let cfg = small(ScalarSequence::One);
        let report = certify(&cfg).unwrap();
        let r = replay(&report, &cfg).unwrap();
        assert!(r.ok, "{:?}", r.failures);

        let mut bad = report.clone();
        if let ProbeVerdict::NetFound { nets } = &mut bad.boundedness.levels[1].probes[2] {
            let net = nets
                .iter_mut()
                .find(|n| n.size() > 1)
                .expect("a net with two centers");
            net.centers.pop();
        }
        assert!(!replay(&bad, &cfg).unwrap().ok);

        let mut other = cfg.clone();
        other.seed = 9;
        assert!(matches!(
            replay(&report, &other),
            Err(Error::HashMismatch { .. })
        ));
    }
}
