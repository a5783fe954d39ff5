use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{witness_state, State};
use crate::hilbert::{AdmissibilityReport, AdmissibleSystem, ModuleElement};
use crate::{CMatrix, Error, Result, C64};

/// How the state index and the lower summation limit are tied together.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `d² = max_k Σ_{i≥k} |φ_k(⟨x−y, x_i⟩)|²`.
    #[default]
    Verbatim,
    /// `d² = max_k Σ_i |φ_k(⟨x−y, x_i⟩)|²`.
    Decoupled,
}

/// An admissible system `X = (x_1, …, x_m)` paired with states `Φ = (φ_1, …, φ_m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecPayload")]
pub struct PseudoMetricSpec {
    pub id: usize,
    system: AdmissibleSystem,
    states: Vec<State>,
    #[serde(default)]
    coupling: Coupling,
}

#[derive(Deserialize)]
struct SpecPayload {
    #[serde(default)]
    id: usize,
    system: AdmissibleSystem,
    states: Vec<State>,
    #[serde(default)]
    coupling: Coupling,
}

impl TryFrom<SpecPayload> for PseudoMetricSpec {
    type Error = Error;

    fn try_from(p: SpecPayload) -> Result<Self> {
        Ok(PseudoMetricSpec::new(p.id, p.system, p.states)?.with_coupling(p.coupling))
    }
}

impl PseudoMetricSpec {
    pub fn new(id: usize, system: AdmissibleSystem, states: Vec<State>) -> Result<Self> {
        if states.len() != system.len() {
            return Err(Error::invalid(format!(
                "{} states for a system of {} elements",
                states.len(),
                system.len()
            )));
        }
        let dims = system.elements()[0].block_dims();
        if states
            .iter()
            .any(|s| s.algebra().block_dims() != dims.as_slice())
        {
            return Err(Error::structural("states over another algebra"));
        }
        Ok(Self {
            id,
            system,
            states,
            coupling: Coupling::Verbatim,
        })
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn system(&self) -> &AdmissibleSystem {
        &self.system
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn module_len(&self) -> usize {
        self.system.module_len()
    }

    pub fn check_admissible(
        &self,
        probes: &[ModuleElement],
        tol: f64,
    ) -> Result<AdmissibilityReport> {
        self.system.check(probes, tol)
    }

    fn terms(&self, k: usize) -> std::ops::Range<usize> {
        match self.coupling {
            Coupling::Verbatim => k..self.len(),
            Coupling::Decoupled => 0..self.len(),
        }
    }

    fn ensure_fits(&self, x: &ModuleElement) -> Result<()> {
        self.system.elements()[0].ensure_same(x)
    }
}

/// `d_{X,Φ}(x, y)`, evaluated directly from inner products and states.
pub fn pseudo_metric(spec: &PseudoMetricSpec, x: &ModuleElement, y: &ModuleElement) -> Result<f64> {
    spec.ensure_fits(x)?;
    spec.ensure_fits(y)?;
    let z = x.sub(y)?;
    let inner: Vec<_> = spec
        .system
        .elements()
        .iter()
        .map(|xi| z.inner_unchecked(xi))
        .collect();
    let mut best = 0.0f64;
    for (k, phi) in spec.states.iter().enumerate() {
        let s: f64 = spec
            .terms(k)
            .map(|i| phi.eval_blocks(inner[i].blocks()).norm_sqr())
            .sum();
        best = best.max(s);
    }
    Ok(best.sqrt())
}

/// The map `p ↦ (φ_k(⟨p, x_i⟩))_{k, i}` whose grouped sup-of-sums norm computes `d_{X,Φ}`.
///
/// Each coordinate is `Σ_b Σ_{rc} conj(p_b[r,c]) · (w_{k,b} x_{i,b} ρ_{k,b})[r,c]`, so the
/// kernels are precomputed once per spec and distances reduce to sums over features.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    groups: Vec<std::ops::Range<usize>>,
    kernels: Vec<Vec<CMatrix>>,
    length: usize,
    block_dims: Vec<usize>,
}

impl FeatureMap {
    pub fn new(spec: &PseudoMetricSpec) -> Self {
        let mut groups = Vec::with_capacity(spec.len());
        let mut kernels = Vec::new();
        for (k, phi) in spec.states.iter().enumerate() {
            let start = kernels.len();
            for i in spec.terms(k) {
                let xi = &spec.system.elements()[i];
                kernels.push(
                    xi.blocks()
                        .iter()
                        .zip(phi.weights().iter().zip(phi.densities()))
                        .map(|(xb, (w, rho))| xb * rho * C64::new(*w, 0.0))
                        .collect(),
                );
            }
            groups.push(start..kernels.len());
        }
        Self {
            groups,
            kernels,
            length: spec.module_len(),
            block_dims: spec.system.elements()[0].block_dims(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.kernels.len()
    }

    pub fn features(&self, p: &ModuleElement) -> Result<Vec<C64>> {
        if p.len() != self.length || p.block_dims() != self.block_dims {
            return Err(Error::structural("point outside the spec's module"));
        }
        Ok(self
            .kernels
            .iter()
            .map(|kernel| {
                kernel
                    .iter()
                    .zip(p.blocks())
                    .map(|(m, pb)| pb.dotc(m))
                    .sum()
            })
            .collect())
    }

    pub fn distance(&self, f: &[C64], g: &[C64]) -> f64 {
        self.groups
            .iter()
            .map(|r| r.clone().map(|j| (f[j] - g[j]).norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

/// Feature vectors of a point set under one spec.
#[derive(Clone, Debug)]
pub struct PointFeatures {
    map: FeatureMap,
    rows: Vec<Vec<C64>>,
}

impl PointFeatures {
    pub fn new(spec: &PseudoMetricSpec, points: &[ModuleElement]) -> Result<Self> {
        let map = FeatureMap::new(spec);
        let rows = points
            .par_iter()
            .map(|p| map.features(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { map, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.map.distance(&self.rows[i], &self.rows[j])
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.rows[i]
    }
}

/// Full matrix of pairwise distances.
pub fn distance_matrix(spec: &PseudoMetricSpec, points: &[ModuleElement]) -> Result<Vec<Vec<f64>>> {
    let pf = PointFeatures::new(spec, points)?;
    Ok((0..pf.len())
        .into_par_iter()
        .map(|i| (0..pf.len()).map(|j| pf.distance(i, j)).collect())
        .collect())
}

/// The single-element spec `X = ((x−y)/‖x−y‖)` with a spectral state for `⟨x−y, x−y⟩`,
/// under which `d(x, y) = ‖x−y‖`.
pub fn separation_witness(x: &ModuleElement, y: &ModuleElement) -> Result<PseudoMetricSpec> {
    let z = x.sub(y)?;
    let norm = z.norm();
    if norm <= 1e-9 {
        return Err(Error::domain("points coincide; nothing to separate"));
    }
    let phi = witness_state(&z.inner_unchecked(&z))?;
    PseudoMetricSpec::new(
        0,
        AdmissibleSystem::new(vec![z.scale_real(1.0 / norm)])?,
        vec![phi],
    )
}
