//! Seeded property suite for the pseudo-metrics: the metric axioms, domination by the
//! module norm, separation, and the Cauchy–Schwarz inequality.

use serde::{Deserialize, Serialize};

use crate::algebra::{CStarAlgebra, State};
use crate::hilbert::{cauchy_schwarz_gap, AdmissibleSystem, HilbertModule, ModuleElement};
use crate::sampling::{random_ball_element, random_spec, rng_for, Purpose};
use crate::uniformity::{
    pseudo_metric, separation_witness, Coupling, PointFeatures, PseudoMetricSpec,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxiomsConfig {
    pub algebra: CStarAlgebra,
    pub module_len: usize,
    pub triples: usize,
    pub specs: usize,
    pub seed: u64,
    pub coupling: Coupling,
    pub tolerance: f64,
    /// Extra system checked alongside the random battery, paired with tracial states.
    pub forced_system: Option<AdmissibleSystem>,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        Self {
            algebra: CStarAlgebra::new(vec![2, 1]).expect("valid block sizes"),
            module_len: 4,
            triples: 1000,
            specs: 32,
            seed: 0,
            coupling: Coupling::Verbatim,
            tolerance: 1e-9,
            forced_system: None,
        }
    }
}

impl AxiomsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.module_len == 0 || self.triples == 0 || self.specs == 0 {
            return Err(Error::Config(
                "module length, triples and specs must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if let Some(s) = &self.forced_system {
            if s.module_len() != self.module_len
                || s.elements()[0].block_dims() != self.algebra.block_dims()
            {
                return Err(Error::Config(
                    "forced system does not live in the configured module".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Points and spec of the worst case seen for a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffendingCase {
    pub triple: usize,
    pub spec_id: Option<usize>,
    pub points: Vec<ModuleElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    /// Largest violation `lhs − rhs`; non-positive values mean slack.
    pub worst: f64,
    pub tolerance: f64,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending: Option<OffendingCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecAdmissibility {
    pub spec_id: usize,
    pub ok: bool,
    pub worst_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomsReport {
    pub admissibility: Vec<SpecAdmissibility>,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomsReport {
    pub fn admissible(&self) -> bool {
        self.admissibility.iter().all(|a| a.ok)
    }

    pub fn passed(&self) -> bool {
        self.admissible() && self.checks.iter().all(|c| c.passed)
    }

    /// `0` when everything holds, `2` for an inadmissible system, `1` for a failed property.
    pub fn exit_code(&self) -> i32 {
        if !self.admissible() {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    evaluations: usize,
    offending: Option<OffendingCase>,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: f64::NEG_INFINITY,
            evaluations: 0,
            offending: None,
        }
    }

    fn record(&mut self, violation: f64, case: impl FnOnce() -> OffendingCase) {
        self.evaluations += 1;
        if violation > self.worst || violation.is_nan() {
            self.worst = if violation.is_nan() {
                f64::INFINITY
            } else {
                violation
            };
            if self.worst > self.tolerance {
                self.offending = Some(case());
            }
        }
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            name: self.name.into(),
            passed: self.worst <= self.tolerance,
            worst: self.worst,
            tolerance: self.tolerance,
            evaluations: self.evaluations,
            offending: self.offending,
        }
    }
}

/// Points used per triple: `x, y, z, w, x+z, y+w`.
const PER_TRIPLE: usize = 6;

pub fn run_axiom_suite(config: &AxiomsConfig) -> Result<AxiomsReport> {
    config.validate()?;
    let algebra = &config.algebra;
    let n = config.module_len;
    let module = HilbertModule::new(algebra.clone(), n)?;

    let mut points = Vec::with_capacity(config.triples * PER_TRIPLE);
    for t in 0..config.triples {
        let rng = &mut rng_for(config.seed, Purpose::Triple, t as u64);
        let q: Vec<_> = (0..4)
            .map(|_| random_ball_element(algebra, n, 1.0, rng))
            .collect();
        let s1 = q[0].add(&q[2])?;
        let s2 = q[1].add(&q[3])?;
        points.extend(q);
        points.push(s1);
        points.push(s2);
    }

    let mut specs = (0..config.specs)
        .map(|id| {
            random_spec(algebra, n, id, config.seed, n, Purpose::AxiomSpec)
                .map(|s| s.with_coupling(config.coupling))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(system) = &config.forced_system {
        specs.push(
            PseudoMetricSpec::new(
                config.specs,
                system.clone(),
                vec![State::tracial(algebra); system.len()],
            )?
            .with_coupling(config.coupling),
        );
    }

    let mut probes: Vec<ModuleElement> = (0..n).map(|i| module.basis(i)).collect::<Result<_>>()?;
    probes.extend(points.iter().step_by(PER_TRIPLE).take(256).cloned());
    let mut admissibility = Vec::with_capacity(specs.len());
    for s in &specs {
        let r = s.check_admissible(&probes, config.tolerance)?;
        admissibility.push(SpecAdmissibility {
            spec_id: s.id,
            ok: r.ok,
            worst_violation: r.worst_violation,
        });
    }

    let tol = config.tolerance;
    let mut symmetry = Tracker::new("symmetry", 0.0);
    let mut identity = Tracker::new("identity", 1e-12);
    let mut triangle = Tracker::new("triangle", tol);
    let mut sum_form = Tracker::new("sum_form", tol);
    let mut domination = Tracker::new("domination", tol);
    let mut direct = Tracker::new("direct_evaluation", 1e-12);
    let mut half = Tracker::new("separation_half", 0.0);
    let mut spectral = Tracker::new("separation_spectral", 0.0);
    let mut cauchy = Tracker::new("cauchy_schwarz", tol);

    let base = |t: usize| t * PER_TRIPLE;
    let case = |t: usize, spec: Option<usize>| {
        let b = base(t);
        OffendingCase {
            triple: t,
            spec_id: spec,
            points: points[b..b + 4].to_vec(),
        }
    };

    let norm_diff: Vec<[f64; 3]> = (0..config.triples)
        .map(|t| {
            let p = &points[base(t)..];
            [
                p[0].sub(&p[1]).map(|z| z.norm()),
                p[0].sub(&p[2]).map(|z| z.norm()),
                p[1].sub(&p[2]).map(|z| z.norm()),
            ]
            .map(|r| r.unwrap_or(f64::NAN))
        })
        .collect();

    for (spec, adm) in specs.iter().zip(&admissibility) {
        if !adm.ok {
            continue;
        }
        let pf = PointFeatures::new(spec, &points)?;
        for t in 0..config.triples {
            let (x, y, z, w, xz, yw) = (
                base(t),
                base(t) + 1,
                base(t) + 2,
                base(t) + 3,
                base(t) + 4,
                base(t) + 5,
            );
            let sid = Some(spec.id);
            let dxy = pf.distance(x, y);
            let dyx = pf.distance(y, x);
            symmetry.record(if dxy == dyx { 0.0 } else { (dxy - dyx).abs() }, || {
                case(t, sid)
            });
            identity.record(pf.distance(x, x), || case(t, sid));
            let dxz = pf.distance(x, z);
            let dyz = pf.distance(y, z);
            triangle.record(dxz - dxy - dyz, || case(t, sid));
            sum_form.record(pf.distance(xz, yw) - dxy - pf.distance(z, w), || {
                case(t, sid)
            });
            let nd = norm_diff[t];
            domination.record((dxy - nd[0]).max(dxz - nd[1]).max(dyz - nd[2]), || {
                case(t, sid)
            });
            if t < 16 {
                let exact = pseudo_metric(spec, &points[x], &points[y])?;
                direct.record((exact - dxy).abs(), || case(t, sid));
            }
        }
    }

    for t in 0..config.triples {
        let (px, py) = (&points[base(t)], &points[base(t) + 1]);
        let nd = norm_diff[t][0];
        if nd > 1e-9 {
            let spec = separation_witness(px, py)?;
            let d = pseudo_metric(&spec, px, py)?;
            // Strict inequality: a tie counts as a violation.
            half.record(
                if d > 0.5 * nd {
                    0.5 * nd - d
                } else {
                    f64::INFINITY
                },
                || case(t, None),
            );
            spectral.record(0.999 * nd - d, || case(t, None));
        }
        let gap = cauchy_schwarz_gap(px, py)?;
        cauchy.record(-gap.min_eigenvalue(), || case(t, None));
    }

    Ok(AxiomsReport {
        admissibility,
        checks: [
            symmetry, identity, triangle, sum_form, domination, direct, half, spectral, cauchy,
        ]
        .into_iter()
        .map(Tracker::finish)
        .collect(),
    })
}
