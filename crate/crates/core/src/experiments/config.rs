use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::model::{ghz, DeviceSettings, Lifetimes, NoiseParams};

/// Everything a run needs, read from TOML. Frequencies are `f/2π` in MHz
/// (GHz for the transition frequency), lifetimes are inverse rates in µs and
/// phases are multiples of π. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub plan: PlanSection,
    pub device: DeviceSection,
    pub noise: NoiseSection,
    pub initial: InitialSection,
    pub sweep: SweepSection,
    pub numerics: NumericsSection,
    pub gate_check: GateCheckSection,
    pub converge: ConvergeSection,
    pub rwa: RwaSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub theta_over_pi: Vec<f64>,
    pub m: Vec<u32>,
    #[serde(rename = "delta1_MHz")]
    pub delta1_mhz: f64,
    pub k: u32,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            theta_over_pi: vec![0.5, 0.5],
            m: vec![1, 2],
            delta1_mhz: -3.57,
            k: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    /// `g12 / g1` for single-point and lossy runs.
    pub g12_ratio: f64,
    #[serde(rename = "omega_eg_GHz")]
    pub omega_eg_ghz: f64,
    /// Fractional gap between the `g-e` and `e-f` transitions.
    pub anharmonicity: f64,
    /// `g~/g` and `Ω~/Ω`.
    pub transmon_ratio: f64,
}

impl Default for DeviceSection {
    fn default() -> Self {
        Self {
            g12_ratio: 0.1,
            omega_eg_ghz: 6.5,
            anharmonicity: 0.05,
            transmon_ratio: SQRT_2,
        }
    }
}

/// Lifetimes in µs. `inf` switches a channel off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub kappa_inv_us: f64,
    pub gamma_inv_us: f64,
    pub gamma_fe_inv_us: f64,
    pub gamma_fg_inv_us: f64,
    pub gamma_phi_e_inv_us: f64,
    pub gamma_phi_f_inv_us: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let l = Lifetimes::default();
        Self {
            kappa_inv_us: l.cavity,
            gamma_inv_us: l.relax_e,
            gamma_fe_inv_us: l.relax_fe,
            gamma_fg_inv_us: l.relax_fg,
            gamma_phi_e_inv_us: l.dephase_e,
            gamma_phi_f_inv_us: l.dephase_f,
        }
    }
}

impl NoiseSection {
    pub fn lifetimes(&self) -> Lifetimes {
        Lifetimes {
            cavity: self.kappa_inv_us,
            relax_e: self.gamma_inv_us,
            relax_fe: self.gamma_fe_inv_us,
            relax_fg: self.gamma_fg_inv_us,
            dephase_e: self.gamma_phi_e_inv_us,
            dephase_f: self.gamma_phi_f_inv_us,
        }
    }

    fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("noise.kappa_inv_us", self.kappa_inv_us),
            ("noise.gamma_inv_us", self.gamma_inv_us),
            ("noise.gamma_fe_inv_us", self.gamma_fe_inv_us),
            ("noise.gamma_fg_inv_us", self.gamma_fg_inv_us),
            ("noise.gamma_phi_e_inv_us", self.gamma_phi_e_inv_us),
            ("noise.gamma_phi_f_inv_us", self.gamma_phi_f_inv_us),
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Every qutrit in `(|+> + |->)/√2`, cavities in vacuum.
    #[default]
    Excited,
    /// One rotated basis state, big-endian over `(A, 1..n)` with bit 1 = `|->`.
    RotatedBasis,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    #[serde(rename = "delta1_min_MHz")]
    pub delta1_min_mhz: f64,
    #[serde(rename = "delta1_max_MHz")]
    pub delta1_max_mhz: f64,
    pub points: usize,
    pub g12_ratios: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            delta1_min_mhz: -6.0,
            delta1_max_mhz: -1.0,
            points: 21,
            g12_ratios: vec![0.0, 0.1, 0.2, 0.3],
        }
    }
}

impl SweepSection {
    /// Evenly spaced `δ1/2π` values, ascending.
    pub fn delta1_grid(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.delta1_min_mhz],
            n => {
                let span = self.delta1_max_mhz - self.delta1_min_mhz;
                (0..n)
                    .map(|i| self.delta1_min_mhz + span * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub cutoff: usize,
    /// Overrides the default RK4 step.
    pub step_ns: Option<f64>,
    pub workers: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            cutoff: 5,
            step_ns: None,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateCheckSection {
    pub cutoff: usize,
    pub min_fidelity: f64,
}

impl Default for GateCheckSection {
    fn default() -> Self {
        Self {
            cutoff: 10,
            min_fidelity: 0.999,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub cutoffs: Vec<usize>,
    /// Top-Fock population above which a cutoff is reported unconverged.
    pub occupancy_threshold: f64,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            cutoffs: vec![2, 4, 5, 6, 8],
            occupancy_threshold: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RwaSection {
    /// Drive multipliers; `2Ω/|δ_n| = k m_1 / (2 m_n)`.
    pub k_values: Vec<u32>,
    pub cutoff: usize,
}

impl Default for RwaSection {
    fn default() -> Self {
        Self {
            k_values: vec![12, 120],
            cutoff: 6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn n_targets(&self) -> usize {
        self.plan.theta_over_pi.len()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.plan.theta_over_pi.iter().map(|t| t * PI).collect()
    }

    pub fn device_settings(&self, g12_ratio: f64) -> DeviceSettings {
        DeviceSettings {
            omega_eg: ghz(self.device.omega_eg_ghz),
            anharmonicity: self.device.anharmonicity,
            transmon_ratio: self.device.transmon_ratio,
            g12_ratio,
        }
    }

    pub fn noise_params(&self) -> NoiseParams {
        NoiseParams::from_lifetimes(self.n_targets(), &self.noise.lifetimes())
    }

    /// Step override in seconds.
    pub fn step_override(&self) -> Option<f64> {
        self.numerics.step_ns.map(|ns| ns * 1e-9)
    }

    /// Checks every value the schema cannot express.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let p = &self.plan;
        let n = p.theta_over_pi.len();
        if n == 0 {
            return Err(config_err("plan.theta_over_pi must not be empty"));
        }
        if p.m.len() != n {
            return Err(config_err(format!(
                "plan.m has {} entries but plan.theta_over_pi has {n}",
                p.m.len()
            )));
        }
        if let Some(t) = p.theta_over_pi.iter().find(|t| !(**t > 0.0 && **t < 2.0)) {
            return Err(config_err(format!(
                "plan.theta_over_pi entries must lie in (0, 2), got {t}"
            )));
        }
        if p.m.contains(&0) {
            return Err(config_err("plan.m entries must be at least 1"));
        }
        if !(p.delta1_mhz < 0.0 && p.delta1_mhz.is_finite()) {
            return Err(config_err(format!(
                "plan.delta1_MHz must be negative, got {}",
                p.delta1_mhz
            )));
        }
        if p.k == 0 {
            return Err(config_err("plan.k must be at least 1"));
        }

        let d = &self.device;
        if !(d.g12_ratio >= 0.0 && d.g12_ratio.is_finite()) {
            return Err(config_err(format!(
                "device.g12_ratio must be non-negative, got {}",
                d.g12_ratio
            )));
        }
        if !(d.omega_eg_ghz > 0.0 && d.omega_eg_ghz.is_finite()) {
            return Err(config_err(format!(
                "device.omega_eg_GHz must be positive, got {}",
                d.omega_eg_ghz
            )));
        }
        if !(d.anharmonicity > 0.0 && d.anharmonicity < 1.0) {
            return Err(config_err(format!(
                "device.anharmonicity must lie in (0, 1), got {}",
                d.anharmonicity
            )));
        }
        if !(d.transmon_ratio >= 0.0 && d.transmon_ratio.is_finite()) {
            return Err(config_err(format!(
                "device.transmon_ratio must be non-negative, got {}",
                d.transmon_ratio
            )));
        }

        for (key, v) in self.noise.entries() {
            if !(v > 0.0) {
                return Err(config_err(format!(
                    "{key} must be positive (use inf to disable), got {v}"
                )));
            }
        }

        if self.initial.kind == InitialKind::RotatedBasis && self.initial.index >= 1 << (n + 1) {
            return Err(config_err(format!(
                "initial.index {} is out of range for {} qutrits",
                self.initial.index,
                n + 1
            )));
        }

        let s = &self.sweep;
        if s.points > 0 {
            if !(s.delta1_min_mhz.is_finite() && s.delta1_max_mhz.is_finite()) {
                return Err(config_err("sweep bounds must be finite"));
            }
            if s.delta1_min_mhz > s.delta1_max_mhz {
                return Err(config_err(
                    "sweep.delta1_min_MHz must not exceed sweep.delta1_max_MHz",
                ));
            }
            if s.delta1_max_mhz >= 0.0 {
                return Err(config_err("sweep detunings must be negative"));
            }
        }
        if let Some(r) = s.g12_ratios.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(config_err(format!(
                "sweep.g12_ratios entries must be non-negative, got {r}"
            )));
        }

        let num = &self.numerics;
        if num.cutoff == 0 {
            return Err(config_err("numerics.cutoff must be at least 1"));
        }
        if let Some(step) = num.step_ns {
            if !(step > 0.0 && step.is_finite()) {
                return Err(config_err(format!(
                    "numerics.step_ns must be positive, got {step}"
                )));
            }
        }
        if num.workers == 0 {
            return Err(config_err("numerics.workers must be at least 1"));
        }

        if self.gate_check.cutoff == 0 {
            return Err(config_err("gate_check.cutoff must be at least 1"));
        }
        if !(self.gate_check.min_fidelity > 0.0 && self.gate_check.min_fidelity <= 1.0) {
            return Err(config_err("gate_check.min_fidelity must lie in (0, 1]"));
        }
        if self.converge.cutoffs.contains(&0) {
            return Err(config_err("converge.cutoffs entries must be at least 1"));
        }
        if !(self.converge.occupancy_threshold > 0.0) {
            return Err(config_err("converge.occupancy_threshold must be positive"));
        }
        if self.rwa.k_values.contains(&0) {
            return Err(config_err("rwa.k_values entries must be at least 1"));
        }
        if self.rwa.cutoff == 0 {
            return Err(config_err("rwa.cutoff must be at least 1"));
        }
        Ok(())
    }
}
