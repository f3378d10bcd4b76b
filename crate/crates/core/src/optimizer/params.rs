use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which perimeter the annealer minimizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Plain facet count times `h` (exact discrete energy, square anisotropy).
    FacetCount,
    /// Cauchy–Crofton line-count estimate of Euclidean length.
    #[default]
    Isotropic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealParams {
    pub seed: u64,
    /// Temperatures are in units of `h` (energy of one facet).
    pub t_initial: f64,
    pub t_final: f64,
    pub cooling: f64,
    /// Moves per temperature step, per film facet.
    pub moves_per_temperature: f64,
    pub restarts: usize,
    /// Soft volume penalty weight (per unit area of error, in units of 1/h),
    /// ramped geometrically from `penalty_initial` to `penalty_final`.
    pub penalty_initial: f64,
    pub penalty_final: f64,
    /// Switch to volume-preserving paired swaps for the last third.
    pub exact_swap: bool,
    pub objective: Objective,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            seed: 1,
            t_initial: 0.25,
            t_final: 0.02,
            cooling: 0.9,
            moves_per_temperature: 20.0,
            restarts: 1,
            penalty_initial: 0.05,
            penalty_final: 5.0,
            exact_swap: true,
            objective: Objective::Isotropic,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t_initial > 0.0
            && self.t_final > 0.0
            && self.t_final <= self.t_initial
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.moves_per_temperature >= 0.0
            && self.restarts >= 1
            && self.penalty_initial >= 0.0
            && self.penalty_final >= self.penalty_initial;
        if ok {
            Ok(())
        } else {
            Err(Error::BadScene("annealing parameters out of range".into()))
        }
    }

    /// The temperature ladder, `t_initial` down to `t_final`.
    pub fn temperatures(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.t_initial;
        while t > self.t_final {
            out.push(t);
            t *= self.cooling;
        }
        out.push(self.t_final);
        out
    }
}
