use std::f64::consts::{PI, SQRT_2};

use super::ModelError;
use crate::hilbert::Levels;

/// `2π × MHz` in rad/s.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// `2π × GHz` in rad/s.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

/// Rate in 1/s from a lifetime in µs. A non-finite or zero lifetime maps to
/// a zero rate.
pub fn rate_from_us(lifetime_us: f64) -> f64 {
    if lifetime_us.is_finite() && lifetime_us > 0.0 {
        1e6 / lifetime_us
    } else {
        0.0
    }
}

/// All frequencies, couplings and detunings of the device in rad/s.
///
/// Per-qutrit vectors are indexed in layout order (`0` = coupler `A`, `j` =
/// target `j`); per-cavity vectors are indexed by `j - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    pub n_targets: usize,
    pub omega_eg: Vec<f64>,
    pub omega_fe: Vec<f64>,
    pub omega_c: Vec<f64>,
    /// Drive (pulse) frequency.
    pub omega_drive: f64,
    pub g: Vec<f64>,
    pub g_a: Vec<f64>,
    /// `|e> <-> |f>` coupling of target `j` to cavity `j`.
    pub gt: Vec<f64>,
    /// `|e> <-> |f>` coupling of the coupler to cavity `j`.
    pub gt_a: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_a: Vec<f64>,
    pub deltat: Vec<f64>,
    pub deltat_a: Vec<f64>,
    /// Rabi frequency of the `|g> <-> |e>` drive.
    pub rabi: f64,
    /// Rabi frequency of the off-resonant `|e> <-> |f>` drive.
    pub rabi_fe: f64,
    /// Direct cavity 1 - cavity 2 crosstalk.
    pub g12: f64,
    /// `omega_c2 - omega_c1`.
    pub cavity_detuning: f64,
    pub m: Vec<u32>,
    pub k: u32,
}

impl DeviceParams {
    pub fn check_shape(&self) -> Result<(), ModelError> {
        let n = self.n_targets;
        let per_qutrit = [("omega_eg", &self.omega_eg), ("omega_fe", &self.omega_fe)];
        let per_cavity = [
            ("omega_c", &self.omega_c),
            ("g", &self.g),
            ("g_a", &self.g_a),
            ("gt", &self.gt),
            ("gt_a", &self.gt_a),
            ("delta", &self.delta),
            ("delta_a", &self.delta_a),
            ("deltat", &self.deltat),
            ("deltat_a", &self.deltat_a),
        ];
        for (name, v) in per_qutrit {
            if v.len() != n + 1 {
                return Err(ModelError::ParamMismatch(format!(
                    "{name} has {} entries, need {}",
                    v.len(),
                    n + 1
                )));
            }
        }
        for (name, v) in per_cavity {
            if v.len() != n {
                return Err(ModelError::ParamMismatch(format!(
                    "{name} has {} entries, need {n}",
                    v.len()
                )));
            }
        }
        if self.m.len() != n {
            return Err(ModelError::ParamMismatch(format!(
                "m has {} entries, need {n}",
                self.m.len()
            )));
        }
        Ok(())
    }

    /// Fastest explicit oscillation the integrator has to resolve.
    pub fn fastest_frequency(&self, levels: Levels) -> f64 {
        let mut fast = 2.0 * self.rabi.abs();
        for j in 0..self.n_targets {
            fast = fast.max(self.delta[j].abs()).max(self.delta_a[j].abs());
            if levels == Levels::Three {
                fast = fast.max(self.deltat[j].abs()).max(self.deltat_a[j].abs());
            }
        }
        if levels == Levels::Three {
            fast = fast.max(self.cavity_detuning.abs());
            for l in 0..=self.n_targets {
                fast = fast.max((self.omega_fe[l] - self.omega_drive).abs());
            }
        }
        fast
    }

    /// Largest of the couplings and detunings the drive has to dominate.
    pub fn slow_scale(&self) -> f64 {
        (0..self.n_targets)
            .map(|j| {
                self.g[j]
                    .abs()
                    .max(self.delta[j].abs())
                    .max(self.g_a[j].abs())
                    .max(self.delta_a[j].abs())
            })
            .fold(0.0, f64::max)
    }

    /// `omega_c / kappa` per cavity.
    pub fn quality_factors(&self, noise: &NoiseParams) -> Vec<f64> {
        self.omega_c
            .iter()
            .zip(&noise.kappa)
            .map(|(w, k)| if *k > 0.0 { w / k } else { f64::INFINITY })
            .collect()
    }
}

/// Device-level choices that are not set by the phase plan.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSettings {
    /// `|g> <-> |e>` frequency shared by all qutrits (rad/s).
    pub omega_eg: f64,
    /// `omega_fe = (1 - anharmonicity) * omega_eg`.
    pub anharmonicity: f64,
    /// Ratio of `|e> <-> |f>` to `|g> <-> |e>` couplings and Rabi frequencies.
    pub transmon_ratio: f64,
    /// `g12 / g1`.
    pub g12_ratio: f64,
}

impl Default for DeviceSettings {
    fn default() -> Self {
        Self {
            omega_eg: ghz(6.5),
            anharmonicity: 0.05,
            transmon_ratio: SQRT_2,
            g12_ratio: 0.0,
        }
    }
}

impl DeviceSettings {
    /// Fills every derived parameter from the planned detunings, couplings
    /// and drive.
    pub fn device_params(
        &self,
        delta: &[f64],
        g: &[f64],
        rabi: f64,
        m: &[u32],
        k: u32,
    ) -> DeviceParams {
        let n = delta.len();
        let omega_eg = vec![self.omega_eg; n + 1];
        let omega_fe: Vec<f64> = omega_eg
            .iter()
            .map(|w| (1.0 - self.anharmonicity) * w)
            .collect();
        let omega_c: Vec<f64> = delta.iter().map(|d| self.omega_eg - d).collect();
        let delta_a: Vec<f64> = omega_c.iter().map(|wc| omega_eg[0] - wc).collect();
        let deltat: Vec<f64> = (0..n).map(|j| omega_fe[j + 1] - omega_c[j]).collect();
        let deltat_a: Vec<f64> = omega_c.iter().map(|wc| omega_fe[0] - wc).collect();
        let cavity_detuning = if n >= 2 { omega_c[1] - omega_c[0] } else { 0.0 };
        DeviceParams {
            n_targets: n,
            omega_eg,
            omega_fe,
            omega_c,
            omega_drive: self.omega_eg,
            g: g.to_vec(),
            g_a: g.to_vec(),
            gt: g.iter().map(|x| self.transmon_ratio * x).collect(),
            gt_a: g.iter().map(|x| self.transmon_ratio * x).collect(),
            delta: delta.to_vec(),
            delta_a,
            deltat,
            deltat_a,
            rabi,
            rabi_fe: self.transmon_ratio * rabi,
            g12: if n >= 2 { self.g12_ratio * g[0] } else { 0.0 },
            cavity_detuning,
            m: m.to_vec(),
            k,
        }
    }
}

/// Decay and dephasing rates in 1/s. Per-qutrit vectors use layout order.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParams {
    pub kappa: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_fe: Vec<f64>,
    pub gamma_fg: Vec<f64>,
    pub gamma_phi_e: Vec<f64>,
    pub gamma_phi_f: Vec<f64>,
}

/// Lifetimes in µs, uniform across qutrits and cavities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifetimes {
    pub cavity: f64,
    pub relax_e: f64,
    pub relax_fe: f64,
    pub relax_fg: f64,
    pub dephase_e: f64,
    pub dephase_f: f64,
}

impl Default for Lifetimes {
    fn default() -> Self {
        Self {
            cavity: 15.0,
            relax_e: 30.0,
            relax_fe: 11.5,
            relax_fg: 45.0,
            dephase_e: 10.0,
            dephase_f: 10.0,
        }
    }
}

impl NoiseParams {
    pub fn none(n_targets: usize) -> Self {
        Self::uniform(n_targets, [0.0; 6])
    }

    pub fn from_lifetimes(n_targets: usize, l: &Lifetimes) -> Self {
        Self::uniform(
            n_targets,
            [
                l.cavity,
                l.relax_e,
                l.relax_fe,
                l.relax_fg,
                l.dephase_e,
                l.dephase_f,
            ]
            .map(rate_from_us),
        )
    }

    fn uniform(n: usize, [kappa, gamma, fe, fg, phi_e, phi_f]: [f64; 6]) -> Self {
        Self {
            kappa: vec![kappa; n],
            gamma: vec![gamma; n + 1],
            gamma_fe: vec![fe; n + 1],
            gamma_fg: vec![fg; n + 1],
            gamma_phi_e: vec![phi_e; n + 1],
            gamma_phi_f: vec![phi_f; n + 1],
        }
    }

    /// Multiplies every rate by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| x * s).collect();
        Self {
            kappa: f(&self.kappa),
            gamma: f(&self.gamma),
            gamma_fe: f(&self.gamma_fe),
            gamma_fg: f(&self.gamma_fg),
            gamma_phi_e: f(&self.gamma_phi_e),
            gamma_phi_f: f(&self.gamma_phi_f),
        }
    }

    pub fn validate(&self, n_targets: usize) -> Result<(), ModelError> {
        let sets = [
            ("kappa", &self.kappa, n_targets),
            ("gamma", &self.gamma, n_targets + 1),
            ("gamma_fe", &self.gamma_fe, n_targets + 1),
            ("gamma_fg", &self.gamma_fg, n_targets + 1),
            ("gamma_phi_e", &self.gamma_phi_e, n_targets + 1),
            ("gamma_phi_f", &self.gamma_phi_f, n_targets + 1),
        ];
        for (name, v, len) in sets {
            if v.len() != len {
                return Err(ModelError::InvalidNoise(format!(
                    "{name} has {} entries, need {len}",
                    v.len()
                )));
            }
            if let Some(bad) = v.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
                return Err(ModelError::InvalidNoise(format!("{name} contains {bad}")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        [
            &self.kappa,
            &self.gamma,
            &self.gamma_fe,
            &self.gamma_fg,
            &self.gamma_phi_e,
            &self.gamma_phi_f,
        ]
        .iter()
        .all(|v| v.iter().all(|r| *r == 0.0))
    }
}

/// Minimum `2Ω / max(g, |δ|)` before the strong-driving condition warns.
pub const STRONG_DRIVING_MARGIN: f64 = 5.0;
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity (ratio or worst relative mismatch).
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<22} {:>12.6} {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn rel_mismatch(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Checks the operating conditions the gate construction relies on.
pub fn validate_conditions(p: &DeviceParams) -> ConditionReport {
    let n = p.n_targets;
    let mut checks = Vec::new();
    let mut push = |name, worst: f64, detail: String, passed: bool| {
        checks.push(ConditionCheck {
            name,
            passed,
            value: worst,
            detail,
        });
    };

    let worst = (0..n)
        .map(|j| rel_mismatch(p.g_a[j], p.g[j]))
        .fold(0.0, f64::max);
    push(
        "coupler_coupling_match",
        worst,
        "max rel |g_Aj - g_j|".into(),
        worst <= REL_TOL,
    );

    let worst = (0..n)
        .map(|j| rel_mismatch(p.delta_a[j], p.delta[j]))
        .fold(0.0, f64::max);
    push(
        "coupler_detuning_match",
        worst,
        "max rel |δ_Aj - δ_j|".into(),
        worst <= REL_TOL,
    );

    let ratios: Vec<f64> = (0..n).map(|j| p.m[j] as f64 / p.delta[j]).collect();
    let worst = ratios
        .iter()
        .map(|r| rel_mismatch(*r, ratios[0]))
        .fold(0.0, f64::max);
    push(
        "common_cycle_time",
        worst,
        "max rel spread of m_j/δ_j".into(),
        worst <= REL_TOL && ratios.iter().all(|r| r.is_finite()),
    );

    let margin = 2.0 * p.rabi.abs() / p.slow_scale();
    push(
        "strong_driving",
        margin,
        format!("2Ω/max(g, |δ|), need >= {STRONG_DRIVING_MARGIN}"),
        margin >= STRONG_DRIVING_MARGIN,
    );

    let worst = (0..n)
        .map(|j| rel_mismatch(2.0 * p.rabi, p.k as f64 * p.delta[j].abs() / p.m[j] as f64))
        .fold(0.0, f64::max);
    push(
        "drive_commensurate",
        worst,
        format!("2Ω vs k|δ_j|/m_j, k = {}", p.k),
        worst <= REL_TOL,
    );

    let mut worst: f64 = 0.0;
    for j in 0..n {
        worst = worst.max(rel_mismatch(p.delta[j], p.omega_eg[j + 1] - p.omega_c[j]));
        worst = worst.max(rel_mismatch(p.delta_a[j], p.omega_eg[0] - p.omega_c[j]));
    }
    if n >= 2 {
        worst = worst.max(rel_mismatch(p.cavity_detuning, p.omega_c[1] - p.omega_c[0]));
        worst = worst.max(rel_mismatch(p.cavity_detuning, p.delta[0] - p.delta[1]));
    }
    push(
        "frequency_bookkeeping",
        worst,
        "δ, δ_A, Δ vs frequencies".into(),
        worst <= REL_TOL,
    );

    ConditionReport { checks }
}
