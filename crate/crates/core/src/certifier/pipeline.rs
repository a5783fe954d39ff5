use rayon::prelude::*;

use super::config::{ScenarioConfig, Tolerances};
use super::report::{
    BoundednessSide, BoundednessVerdict, CertificationReport, CompactnessSide, CoordinateNet,
    LevelProbe, SplitCheck, TailNorm, TailVerdict, ThetaResidual, Verdict, WitnessProbe,
};
use crate::algebra::CStarAlgebra;
use crate::hilbert::{AdmissibleSystem, ModuleElement};
use crate::operators::{
    split_by_projection, tail_norm, theta_decomposition, theta_decomposition_relative, truncation,
    truncation_pair, ModuleOperator, OperatorGenerator,
};
use crate::sampling::{ball_sample, spec_battery};
use crate::uniformity::{
    directsum_net_transfer, noncompactness_witness_for, probe_on_features,
    regularized_coordinate_net, row_norms, verify_family, PointFeatures, ProbeVerdict,
    PseudoMetricSpec, TransferReport, WitnessOutcome,
};
use crate::Result;

/// Everything regenerated from the config at one truncation length.
pub(crate) struct LevelData {
    pub d: usize,
    pub f: ModuleOperator,
    pub sample: Vec<ModuleElement>,
    pub points: Vec<ModuleElement>,
    pub specs: Vec<PseudoMetricSpec>,
}

pub(crate) fn level_data(config: &ScenarioConfig, d: usize) -> Result<LevelData> {
    let f = config.generator.build(&config.algebra, d)?;
    let sample = ball_sample(&config.algebra, d, config.seed, &config.sample)?;
    let points = sample
        .par_iter()
        .map(|x| f.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let specs = spec_battery(&f, config.specs, config.seed, config.sample.support_window)?
        .into_iter()
        .map(|s| s.with_coupling(config.coupling))
        .collect();
    Ok(LevelData {
        d,
        f,
        sample,
        points,
        specs,
    })
}

pub(crate) fn battery_features(level: &LevelData) -> Result<Vec<PointFeatures>> {
    level
        .specs
        .iter()
        .map(|s| PointFeatures::new(s, &level.points))
        .collect()
}

/// The witness scale: the smallest row norm in the upper half, if it clears the floor.
pub(crate) fn witness_delta(f: &ModuleOperator, floor: f64) -> std::result::Result<f64, String> {
    let d = f.target_len();
    let norms = row_norms(f);
    let delta = norms[d.div_ceil(2)..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if delta > floor {
        Ok(delta)
    } else {
        Err(format!(
            "upper-half rows of A^{d} fall to {delta:e}, below the floor {floor:e}"
        ))
    }
}

pub(crate) fn witness_outcome(f: &ModuleOperator, tol: &Tolerances) -> Result<WitnessOutcome> {
    match witness_delta(f, tol.witness_floor) {
        Ok(delta) => noncompactness_witness_for(f, delta),
        Err(reason) => Ok(WitnessOutcome::Inconclusive { reason }),
    }
}

pub(crate) fn witness_budget(d: usize) -> usize {
    (d / 2).max(1)
}

pub(crate) fn witness_probes(
    outcome: &WitnessOutcome,
    epsilons: &[f64],
    d: usize,
) -> Result<Vec<ProbeVerdict>> {
    match outcome.witness() {
        None => Ok(Vec::new()),
        Some(w) => {
            let pf = PointFeatures::new(&w.spec, &w.points)?;
            probe_on_features(
                &[pf],
                std::slice::from_ref(&w.spec),
                epsilons,
                witness_budget(d),
            )
        }
    }
}

pub(crate) fn tail_verdict(tail: &[TailNorm], tol: &Tolerances) -> TailVerdict {
    let first = tail.first().map_or(0.0, |t| t.kappa);
    let last = tail.last().map_or(0.0, |t| t.kappa);
    if last <= tol.kappa_compact {
        TailVerdict::Compact
    } else if last >= tol.kappa_noncompact && last >= tol.plateau_ratio * first {
        TailVerdict::Noncompact
    } else {
        TailVerdict::Undetermined
    }
}

/// Non-total-boundedness needs a top-level family above half the length that also grew
/// from the previous level; total boundedness needs no family at the top and battery net
/// sizes unchanged between the last two levels.
pub(crate) fn boundedness_verdict(
    levels: &[LevelProbe],
    witnesses: &[WitnessProbe],
) -> BoundednessVerdict {
    let n = witnesses.len();
    if n < 2 || levels.len() < 2 {
        return BoundednessVerdict::Undetermined;
    }
    let (prev, top) = (&witnesses[n - 2], &witnesses[n - 1]);
    if let Some(r) = top.largest_family() {
        if 2 * r > top.d && r > prev.largest_family().unwrap_or(0) {
            return BoundednessVerdict::NotTotallyBounded;
        }
        return BoundednessVerdict::Undetermined;
    }
    let a = levels[levels.len() - 2].net_sizes();
    let b = levels[levels.len() - 1].net_sizes();
    if a.iter().all(|s| s.is_some()) && a == b {
        BoundednessVerdict::TotallyBounded
    } else {
        BoundednessVerdict::Undetermined
    }
}

pub(crate) fn combine(
    tail: TailVerdict,
    bounded: BoundednessVerdict,
    diagnostics: &mut Vec<String>,
) -> Verdict {
    match (tail, bounded) {
        (TailVerdict::Compact, BoundednessVerdict::TotallyBounded) => Verdict::CompactConsistent,
        (TailVerdict::Noncompact, BoundednessVerdict::NotTotallyBounded) => {
            Verdict::NoncompactWitnessed
        }
        _ => {
            diagnostics.push(format!("tail norms read {tail:?}, nets read {bounded:?}"));
            Verdict::Inconclusive
        }
    }
}

pub(crate) fn decay_rate(tail: &[TailNorm]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|t| t.kappa > 0.0 && t.kappa.is_finite())
        .map(|t| (t.d as f64, t.kappa.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

pub(crate) fn theta_residual(
    generator: &OperatorGenerator,
    algebra: &CStarAlgebra,
    f: &ModuleOperator,
    d: usize,
) -> Result<ThetaResidual> {
    let relative = generator.projection.is_some();
    let sum = if relative {
        theta_decomposition_relative(f, d, &generator.target_module(algebra, f.target_len())?)?
    } else {
        theta_decomposition(f, d)?
    };
    let approx = sum.to_operator()?;
    let q = truncation(algebra, d, f.target_len())?;
    Ok(ThetaResidual {
        d,
        terms: sum.len(),
        relative,
        reconstruction: q.compose(f)?.sub(&approx)?.op_norm(),
        approximation: f.sub(&approx)?.op_norm(),
    })
}

pub(crate) fn split_check(f: &ModuleOperator, d: usize) -> Result<SplitCheck> {
    let (p1, p2) = truncation_pair(f, d)?;
    let (a, b) = split_by_projection(f, &p1, &p2)?;
    Ok(SplitCheck {
        d,
        sum_residual: a.add(&b)?.sub(f)?.op_norm(),
        tail_gap: (b.op_norm() - tail_norm(f, d)?).abs(),
    })
}

pub(crate) fn compactness_side(config: &ScenarioConfig) -> Result<CompactnessSide> {
    let algebra = &config.algebra;
    let horizon = config.horizon();
    let mut ladder = config.ladder.clone();
    ladder.push(horizon);
    let consistency = config.generator.check_consistency(algebra, &ladder)?;
    let f = config.generator.build(algebra, horizon)?;
    let tail_norms = config
        .ladder
        .iter()
        .map(|&d| {
            Ok(TailNorm {
                d,
                kappa: tail_norm(&f, d)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let residuals = config
        .ladder
        .par_iter()
        .map(|&d| theta_residual(&config.generator, algebra, &f, d))
        .collect::<Result<Vec<_>>>()?;
    let split = split_check(&f, config.top())?;
    Ok(CompactnessSide {
        horizon,
        decay_rate: decay_rate(&tail_norms),
        verdict: tail_verdict(&tail_norms, &config.tolerances),
        tail_norms,
        consistency,
        residuals,
        split,
    })
}

/// Battery spec `id` restricted to coordinate `c`: `x_i ↦ (x_i)_c` as elements of `A¹`.
pub(crate) fn coordinate_spec(spec: &PseudoMetricSpec, c: usize) -> Result<PseudoMetricSpec> {
    let elements = spec
        .system()
        .elements()
        .iter()
        .map(|x| ModuleElement::from_entries(vec![x.entry(c)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoMetricSpec::new(
        spec.id,
        AdmissibleSystem::new(elements)?,
        spec.states().to_vec(),
    )?
    .with_coupling(spec.coupling()))
}

fn support_mass(spec: &PseudoMetricSpec, coords: std::ops::Range<usize>) -> f64 {
    spec.system()
        .elements()
        .iter()
        .flat_map(|x| coords.clone().map(move |c| x.entry(c).norm()))
        .fold(0.0, f64::max)
}

/// First random battery spec touching coordinate `c`, else the first random spec.
pub(crate) fn coordinate_spec_index(specs: &[PseudoMetricSpec], c: usize) -> usize {
    (1..specs.len())
        .find(|&k| support_mass(&specs[k], c..c + 1) > 0.0)
        .unwrap_or(1)
}

pub(crate) fn coordinate_nets(
    config: &ScenarioConfig,
    top: &LevelData,
) -> Result<Vec<CoordinateNet>> {
    let target = config.generator.target_module(&config.algebra, 1)?;
    let jobs: Vec<(usize, f64)> = (0..config.coordinate_nets.min(top.d))
        .flat_map(|c| config.epsilons.iter().map(move |&e| (c, e)))
        .collect();
    jobs.par_iter()
        .map(|&(c, eps)| {
            let spec = &top.specs[coordinate_spec_index(&top.specs, c)];
            let g = top.f.row(c)?;
            let result = regularized_coordinate_net(
                &g,
                &target,
                &coordinate_spec(spec, c)?,
                eps,
                &top.sample,
            )?;
            Ok(CoordinateNet {
                coordinate: c,
                spec_id: spec.id,
                result,
            })
        })
        .collect()
}

/// Where `P₁ = Q_s` cuts: half the length, kept inside the sample's support window.
pub(crate) fn transfer_split(config: &ScenarioConfig, d: usize) -> usize {
    (d / 2).min(config.sample.support_window / 2).max(1)
}

pub(crate) fn transfer_projections(
    algebra: &CStarAlgebra,
    split: usize,
    d: usize,
) -> Result<(ModuleOperator, ModuleOperator)> {
    let p1 = truncation(algebra, split, d)?;
    let p2 = ModuleOperator::identity(algebra, d).sub(&p1)?;
    Ok((p1, p2))
}

/// First random battery spec with support on both sides of the split.
pub(crate) fn transfer_spec_index(specs: &[PseudoMetricSpec], split: usize, d: usize) -> usize {
    (1..specs.len())
        .find(|&k| {
            support_mass(&specs[k], 0..split) > 0.0 && support_mass(&specs[k], split..d) > 0.0
        })
        .unwrap_or(1)
}

pub(crate) fn transfer_epsilon(config: &ScenarioConfig) -> f64 {
    config
        .epsilons
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn transfers(config: &ScenarioConfig, top: &LevelData) -> Result<Vec<TransferReport>> {
    let split = transfer_split(config, top.d);
    let (p1, p2) = transfer_projections(&config.algebra, split, top.d)?;
    let spec = &top.specs[transfer_spec_index(&top.specs, split, top.d)];
    Ok(vec![directsum_net_transfer(
        &top.points,
        spec,
        &p1,
        &p2,
        transfer_epsilon(config),
    )?])
}

/// Runs both sides of the equivalence and cross-checks them.
pub fn certify(config: &ScenarioConfig) -> Result<CertificationReport> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut diagnostics = Vec::new();

    let compactness = compactness_side(config)?;
    for r in &compactness.residuals {
        if r.reconstruction > tol.residual {
            diagnostics.push(format!(
                "θ reconstruction at D = {} off by {:e}",
                r.d, r.reconstruction
            ));
        }
    }
    if compactness.split.sum_residual > tol.residual || compactness.split.tail_gap > tol.residual {
        diagnostics.push("split by Q_D does not reassemble F".into());
    }

    let mut levels = Vec::with_capacity(config.ladder.len());
    let mut witnesses = Vec::with_capacity(config.ladder.len());
    let mut top = None;
    for &d in &config.ladder {
        let data = level_data(config, d)?;
        let features = battery_features(&data)?;
        let budget = data.points.len();
        levels.push(LevelProbe {
            d,
            points: data.points.len(),
            budget,
            probes: probe_on_features(&features, &data.specs, &config.epsilons, budget)?,
        });
        let outcome = witness_outcome(&data.f, tol)?;
        let probes = witness_probes(&outcome, &config.epsilons, d)?;
        if let Some(w) = outcome.witness() {
            for p in &probes {
                if let ProbeVerdict::SeparatedFamily { family, .. } = p {
                    if !verify_family(&w.points, &w.spec, family, tol.verify)? {
                        diagnostics.push(format!(
                            "family at D = {d}, ε = {} fails re-verification",
                            family.epsilon
                        ));
                    }
                }
            }
        }
        witnesses.push(WitnessProbe { d, outcome, probes });
        top = Some(data);
    }
    let top = top.expect("ladder is non-empty");

    let coordinate_nets = coordinate_nets(config, &top)?;
    for c in &coordinate_nets {
        if !c.result.net.covered {
            diagnostics.push(format!(
                "coordinate net c = {} at ε = {} has radius {:e}",
                c.coordinate, c.result.net.epsilon, c.result.verified_radius
            ));
        }
    }
    let transfers = transfers(config, &top)?;
    for t in &transfers {
        if !t.backward.net.covered || t.forward.iter().any(|f| !f.projected.covered) {
            diagnostics.push(format!(
                "direct-sum transfer at ε = {} failed to cover",
                t.epsilon
            ));
        }
    }

    let bounded = boundedness_verdict(&levels, &witnesses);
    let mut verdict = combine(compactness.verdict, bounded, &mut diagnostics);
    if verdict != Verdict::Inconclusive && !diagnostics.is_empty() {
        verdict = Verdict::Inconclusive;
    }

    Ok(CertificationReport {
        name: config.name.clone(),
        config_hash: config.hash(),
        seed: config.seed,
        verdict,
        compactness,
        boundedness: BoundednessSide {
            levels,
            witnesses,
            coordinate_nets,
            transfers,
            verdict: bounded,
        },
        diagnostics,
        config: config.clone(),
    })
}
