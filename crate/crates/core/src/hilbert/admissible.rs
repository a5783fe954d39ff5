use serde::{Deserialize, Serialize};

use super::ModuleElement;
use crate::algebra::ProjectionChain;
use crate::{Error, Result};

/// A finite system `X = (x_1, …, x_m)` meant to be admissible: for every `x` in the
/// relevant submodule the partial sums `Σ_{i≤s} ⟨x,x_i⟩⟨x_i,x⟩` stay below `⟨x,x⟩`.
///
/// Construction only checks shapes; [`AdmissibleSystem::check`] does the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemPayload")]
pub struct AdmissibleSystem {
    elements: Vec<ModuleElement>,
}

#[derive(Deserialize)]
struct SystemPayload {
    elements: Vec<ModuleElement>,
}

impl TryFrom<SystemPayload> for AdmissibleSystem {
    type Error = Error;

    fn try_from(p: SystemPayload) -> Result<Self> {
        AdmissibleSystem::new(p.elements)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub ok: bool,
    /// Largest of `−λ_min(⟨x,x⟩ − Σ_{i≤s}⟨x,x_i⟩⟨x_i,x⟩)` over probes and prefixes,
    /// and of `‖x_i‖ − 1`; positive values are violations.
    pub worst_violation: f64,
    /// Probe index and prefix length at which the worst partial-sum violation occurred.
    pub worst_probe: Option<(usize, usize)>,
}

impl AdmissibleSystem {
    pub fn new(elements: Vec<ModuleElement>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::invalid("admissible system is empty"))?;
        if elements.iter().any(|x| !x.same_module(first)) {
            return Err(Error::structural(
                "system elements live in different modules",
            ));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ModuleElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Module length of the elements.
    pub fn module_len(&self) -> usize {
        self.elements[0].len()
    }

    pub fn check(&self, probes: &[ModuleElement], tol: f64) -> Result<AdmissibilityReport> {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_probe = None;
        for x in &self.elements {
            worst = worst.max(x.norm() - 1.0);
        }
        for (p, x) in probes.iter().enumerate() {
            self.elements[0].ensure_same(x)?;
            let gram = x.inner_unchecked(x);
            let mut partial = gram.algebra().zero();
            for (s, xi) in self.elements.iter().enumerate() {
                let c = x.inner_unchecked(xi);
                partial = partial.add(&c.mul(&c.adjoint())?)?;
                let violation = -gram.sub(&partial)?.min_eigenvalue();
                if violation > worst {
                    worst = violation;
                    worst_probe = Some((p, s + 1));
                }
            }
        }
        Ok(AdmissibilityReport {
            ok: worst <= tol,
            worst_violation: worst,
            worst_probe,
        })
    }

    /// Places a system of `A¹` elements into coordinate `coordinate` of `A^length`.
    pub fn embed_at(&self, coordinate: usize, length: usize) -> Result<Self> {
        if self.module_len() != 1 || coordinate >= length {
            return Err(Error::domain(
                "embedding needs A¹ elements and a coordinate inside the target",
            ));
        }
        let algebra = self.elements[0].algebra();
        let elements = self
            .elements
            .iter()
            .map(|x| {
                let mut entries = vec![algebra.zero(); length];
                entries[coordinate] = x.entry(0);
                ModuleElement::from_entries(entries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }
}

pub fn check_admissible(
    system: &AdmissibleSystem,
    probes: &[ModuleElement],
    tol: f64,
) -> Result<AdmissibilityReport> {
    system.check(probes, tol)
}

/// The system `x_j = ω_{i(j+1)} − ω_{i(j)}` as elements of `A¹ = A`.
pub fn chain_difference_system(
    chain: &ProjectionChain,
    indices: &[usize],
) -> Result<AdmissibleSystem> {
    let diffs = chain.differences(indices)?;
    if diffs.is_empty() {
        return Err(Error::domain("need at least two chain indices"));
    }
    AdmissibleSystem::new(
        diffs
            .into_iter()
            .map(|d| ModuleElement::from_entries(vec![d]))
            .collect::<Result<Vec<_>>>()?,
    )
}
