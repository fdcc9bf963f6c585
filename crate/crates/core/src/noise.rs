//! Shared-state families used throughout: the singlet diluted with the two
//! classical flip states, plus a general duration-weighted mixture builder that
//! the diluted family delegates to, so both construction paths are one path.

use crate::error::{Error, Result};
use crate::protocol::epr_psi_minus;
use crate::qmat::{CMatrix, DensityOperator, PureKet, TargetPhase};
use crate::witness::coherence_enhancement;

/// Slack on the p1 + p2 <= 1 boundary; grid arithmetic may land a few ulps
/// outside and those points are physically the boundary, not violations.
pub const ADMISSIBLE_SLACK: f64 = 1e-12;

/// Intensities of the two classical noise components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    p1: f64,
    p2: f64,
}

impl NoiseParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) || !p1.is_finite() {
            return Err(Error::ProbabilityRange(p1));
        }
        if !(0.0..=1.0).contains(&p2) || !p2.is_finite() {
            return Err(Error::ProbabilityRange(p2));
        }
        if p1 + p2 > 1.0 + ADMISSIBLE_SLACK {
            return Err(Error::NoiseWeights);
        }
        Ok(NoiseParams { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// Weight left for the singlet, clamped against boundary rounding.
    pub fn singlet_weight(&self) -> f64 {
        (1.0 - (self.p1 + self.p2)).max(0.0)
    }
}

/// Convex combination described by creation-duration weights; weights need not
/// be normalized on input.
#[derive(Clone, Debug)]
pub struct MixtureRecipe {
    components: Vec<(DensityOperator, f64)>,
}

impl MixtureRecipe {
    pub fn new(components: Vec<(DensityOperator, f64)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::BadMixture);
        };
        let dim = first.0.dim();
        let mut total = 0.0;
        for (rho, w) in &components {
            if rho.dim() != dim || !w.is_finite() || *w < 0.0 {
                return Err(Error::BadMixture);
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::BadMixture);
        }
        Ok(MixtureRecipe { components })
    }

    pub fn components(&self) -> &[(DensityOperator, f64)] {
        &self.components
    }
}

/// Weight-normalized convex combination, accumulated in component order.
pub fn mixture(recipe: &MixtureRecipe) -> Result<DensityOperator> {
    let total: f64 = recipe.components.iter().map(|(_, w)| w).sum();
    let dim = recipe.components[0].0.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (rho, w) in &recipe.components {
        m += rho.matrix().scale(w / total);
    }
    DensityOperator::new(m)
}

fn flip_state(idx: usize) -> DensityOperator {
    DensityOperator::from_pure(&PureKet::basis(4, idx).expect("basis index in range"))
}

/// The diluted singlet: singlet weight 1 - p1 - p2, plus p1 on |00> and p2 on
/// |11>. Built through [`mixture`] so the recipe path is bit-identical.
pub fn rho_p(params: NoiseParams) -> DensityOperator {
    let recipe = MixtureRecipe::new(vec![
        (epr_psi_minus(), params.singlet_weight()),
        (flip_state(0), params.p1),
        (flip_state(3), params.p2),
    ])
    .expect("diluted-singlet weights are admissible by construction");
    mixture(&recipe).expect("convex combination of valid states is valid")
}

/// One grid point of the enhancement surface. `delta_w` is absent when the
/// weights are inadmissible; `valid` mirrors the enhancement side condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub p1: f64,
    pub p2: f64,
    pub delta_w: Option<f64>,
    pub valid: bool,
}

impl SurfacePoint {
    pub fn admissible(&self) -> bool {
        self.delta_w.is_some()
    }
}

/// Enhancement of the diluted singlet over a rectangular weight grid at a fixed
/// target phase. Inadmissible pairs are marked, not skipped, so the output
/// stays rectangular; rows iterate p1 slowest.
pub fn payoff_surface(
    p1_grid: &[f64],
    p2_grid: &[f64],
    phi: TargetPhase,
) -> Result<Vec<SurfacePoint>> {
    if p1_grid.is_empty() || p2_grid.is_empty() {
        return Err(Error::TooFewPoints { needed: 1 });
    }
    for &p in p1_grid.iter().chain(p2_grid.iter()) {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::ProbabilityRange(p));
        }
    }
    let mut out = Vec::with_capacity(p1_grid.len() * p2_grid.len());
    for &p1 in p1_grid {
        for &p2 in p2_grid {
            if p1 + p2 > 1.0 + ADMISSIBLE_SLACK {
                out.push(SurfacePoint {
                    p1,
                    p2,
                    delta_w: None,
                    valid: false,
                });
                continue;
            }
            let params = NoiseParams::new(p1, p2)?;
            let e = coherence_enhancement(&rho_p(params), phi)?;
            out.push(SurfacePoint {
                p1,
                p2,
                delta_w: Some(e.value),
                valid: e.valid,
            });
        }
    }
    Ok(out)
}
