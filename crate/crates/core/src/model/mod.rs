//! Device parameters, the Hamiltonian family and the master-equation
//! generator.

mod builders;
mod hamiltonian;
mod lindblad;
mod params;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::hilbert::{HilbertError, HilbertLayout};

pub use builders::{
    build_h_eff, build_h_full, build_h_ideal, build_h_rotated, build_theta, EffectiveModel,
    FullModel, IdealModel, RotatedModel, UnwantedModel,
};
pub use hamiltonian::{Coefficient, CompiledOperator, Term, TimeDependentHamiltonian};
pub use lindblad::{
    collapse_operators, lindblad_rhs, CollapseOp, LindbladGenerator, LindbladWorkspace,
};
pub use params::{
    ghz, mhz, rate_from_us, validate_conditions, ConditionCheck, ConditionReport, DeviceParams,
    DeviceSettings, Lifetimes, NoiseParams, STRONG_DRIVING_MARGIN,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("model `{0}` needs three-level qutrits")]
    NeedsThreeLevels(&'static str),
    #[error("layout has no cavities")]
    NoCavities,
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
}

/// Picture the model's Hamiltonian is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// Interaction picture of the bare qutrits and cavities.
    Interaction,
    /// Additionally rotating with the drive, `exp(-iΩ Σ σ̃z t)`.
    Rotated,
}

pub trait HamiltonianModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn frame(&self) -> Frame;
    fn requires_three_levels(&self) -> bool {
        false
    }
    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError>;
}

/// Name-indexed collection of Hamiltonian models.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    models: BTreeMap<&'static str, Arc<dyn HamiltonianModel>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding `ideal`, `rotated`, `effective`, `unwanted` and
    /// `full`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(IdealModel));
        r.register(Arc::new(RotatedModel));
        r.register(Arc::new(EffectiveModel));
        r.register(Arc::new(UnwantedModel));
        r.register(Arc::new(FullModel));
        r
    }

    /// Adds `model`, replacing any model already registered under its name.
    pub fn register(&mut self, model: Arc<dyn HamiltonianModel>) {
        self.models.insert(model.name(), model);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn HamiltonianModel>, ModelError> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| ModelError::UnknownModel(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.models.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn HamiltonianModel>> {
        self.models.values()
    }
}

impl std::fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests;
