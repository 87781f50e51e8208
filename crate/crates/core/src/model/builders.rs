//! The Hamiltonian family, one [`HamiltonianModel`] per level of
//! approximation.

use super::hamiltonian::{Coefficient, TimeDependentHamiltonian};
use super::params::{validate_conditions, DeviceParams};
use super::{Frame, HamiltonianModel, ModelError};
use crate::hilbert::{
    annihilation, embed, embed_product, qutrit_operator, CsrMatrix, HilbertLayout, Levels, Matrix,
    Qutrit, QutritOp, C64,
};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Shared operator factory for one layout.
struct Ops<'a> {
    layout: &'a HilbertLayout,
    a: Matrix,
    ad: Matrix,
}

impl<'a> Ops<'a> {
    fn new(layout: &'a HilbertLayout) -> Result<Self, ModelError> {
        let cutoff = layout.fock_cutoff().ok_or(ModelError::NoCavities)?;
        let a = annihilation(cutoff + 1)?;
        let ad = a.adjoint();
        Ok(Self { layout, a, ad })
    }

    fn q(&self, kind: QutritOp) -> Result<Matrix, ModelError> {
        Ok(qutrit_operator(kind, self.layout.levels())?)
    }

    /// `a_j^dag ⊗ op_l`
    fn creation_with(&self, j: usize, l: Qutrit, op: &Matrix) -> Result<CsrMatrix, ModelError> {
        Ok(embed_product(
            &[
                (self.layout.qutrit(l), op),
                (self.layout.cavity(j), &self.ad),
            ],
            self.layout,
        )?)
    }

    /// `a_j ⊗ op_l`
    fn annihilation_with(&self, j: usize, l: Qutrit, op: &Matrix) -> Result<CsrMatrix, ModelError> {
        Ok(embed_product(
            &[
                (self.layout.qutrit(l), op),
                (self.layout.cavity(j), &self.a),
            ],
            self.layout,
        )?)
    }

    fn on_qutrit(&self, l: Qutrit, op: &Matrix) -> Result<CsrMatrix, ModelError> {
        Ok(embed(op, self.layout.qutrit(l), self.layout)?)
    }
}

fn check(p: &DeviceParams, layout: &HilbertLayout) -> Result<(), ModelError> {
    p.check_shape()?;
    if p.n_targets != layout.n_targets() {
        return Err(ModelError::ParamMismatch(format!(
            "params describe {} targets, layout has {}",
            p.n_targets,
            layout.n_targets()
        )));
    }
    if !layout.has_cavities() {
        return Err(ModelError::NoCavities);
    }
    Ok(())
}

/// Qubit-cavity exchange plus resonant drive, in the bare interaction
/// picture.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdealModel;

impl HamiltonianModel for IdealModel {
    fn name(&self) -> &'static str {
        "ideal"
    }

    fn summary(&self) -> &'static str {
        "qubit-cavity exchange + resonant drive (interaction picture)"
    }

    fn frame(&self) -> Frame {
        Frame::Interaction
    }

    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError> {
        check(p, layout)?;
        let ops = Ops::new(layout)?;
        let mut h = TimeDependentHamiltonian::new(layout.total_dim());
        let sm = ops.q(QutritOp::SigmaMinus)?;
        let sx = ops.q(QutritOp::SigmaPlus)? + &sm;
        for j in 1..=p.n_targets {
            h.push_with_adjoint(
                &format!("g{j} a{j}^dag s{j}^-"),
                Coefficient::oscillating(real(p.g[j - 1]), -p.delta[j - 1]),
                ops.creation_with(j, Qutrit::Target(j), &sm)?,
            );
            h.push_with_adjoint(
                &format!("gA{j} a{j}^dag sA^-"),
                Coefficient::oscillating(real(p.g_a[j - 1]), -p.delta_a[j - 1]),
                ops.creation_with(j, Qutrit::Coupler, &sm)?,
            );
        }
        for l in layout.qutrits() {
            h.push(
                format!("Ω sx[{l:?}]"),
                Coefficient::constant(real(p.rabi)),
                ops.on_qutrit(l, &sx)?,
            );
        }
        Ok(h)
    }
}

/// The ideal model written in the frame rotating with the drive, fast
/// `exp(±2iΩt)` terms kept.
#[derive(Debug, Default, Clone, Copy)]
pub struct RotatedModel;

impl HamiltonianModel for RotatedModel {
    fn name(&self) -> &'static str {
        "rotated"
    }

    fn summary(&self) -> &'static str {
        "drive frame, counter-rotating exp(±2iΩt) terms kept"
    }

    fn frame(&self) -> Frame {
        Frame::Rotated
    }

    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError> {
        check(p, layout)?;
        let ops = Ops::new(layout)?;
        let mut h = TimeDependentHamiltonian::new(layout.total_dim());
        let sz = ops.q(QutritOp::SigmaZRot)?;
        let sp = ops.q(QutritOp::SigmaPlusRot)?;
        let sm = ops.q(QutritOp::SigmaMinusRot)?;
        let w2 = 2.0 * p.rabi;
        for j in 1..=p.n_targets {
            let pairs = [
                (Qutrit::Target(j), p.g[j - 1], p.delta[j - 1]),
                (Qutrit::Coupler, p.g_a[j - 1], p.delta_a[j - 1]),
            ];
            for (l, g, delta) in pairs {
                let half = 0.5 * g;
                h.push_with_adjoint(
                    &format!("a{j}^dag sz[{l:?}]"),
                    Coefficient::oscillating(real(half), -delta),
                    ops.creation_with(j, l, &sz)?,
                );
                h.push_with_adjoint(
                    &format!("a{j}^dag s+[{l:?}]"),
                    Coefficient::oscillating(real(half), w2 - delta),
                    ops.creation_with(j, l, &sp)?,
                );
                h.push_with_adjoint(
                    &format!("a{j}^dag s-[{l:?}]"),
                    Coefficient::oscillating(real(-half), -w2 - delta),
                    ops.creation_with(j, l, &sm)?,
                );
            }
        }
        Ok(h)
    }
}

/// Rotating-wave effective model: each cavity is displaced conditioned on
/// `σ̃z_j + σ̃z_A`.
#[derive(Debug, Default, Clone, Copy)]
pub struct EffectiveModel;

impl HamiltonianModel for EffectiveModel {
    fn name(&self) -> &'static str {
        "effective"
    }

    fn summary(&self) -> &'static str {
        "rotating-wave effective model, conditional displacements"
    }

    fn frame(&self) -> Frame {
        Frame::Rotated
    }

    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError> {
        check(p, layout)?;
        let report = validate_conditions(p);
        for name in ["coupler_coupling_match", "coupler_detuning_match"] {
            if let Some(c) = report.get(name).filter(|c| !c.passed) {
                log::warn!("effective model assumes {name}; mismatch {:.3e}", c.value);
            }
        }
        let ops = Ops::new(layout)?;
        let mut h = TimeDependentHamiltonian::new(layout.total_dim());
        let sz = ops.q(QutritOp::SigmaZRot)?;
        for j in 1..=p.n_targets {
            let coeff = Coefficient::oscillating(real(0.5 * p.g[j - 1]), -p.delta[j - 1]);
            for l in [Qutrit::Target(j), Qutrit::Coupler] {
                h.push_with_adjoint(
                    &format!("a{j}^dag sz[{l:?}]"),
                    coeff,
                    ops.creation_with(j, l, &sz)?,
                );
            }
        }
        Ok(h)
    }
}

/// Leakage to `|f>`, cavity crosstalk and the off-resonant `|e> <-> |f>`
/// drive.
#[derive(Debug, Default, Clone, Copy)]
pub struct UnwantedModel;

impl HamiltonianModel for UnwantedModel {
    fn name(&self) -> &'static str {
        "unwanted"
    }

    fn summary(&self) -> &'static str {
        "|e>-|f> leakage couplings, cavity crosstalk, |e>-|f> drive"
    }

    fn frame(&self) -> Frame {
        Frame::Interaction
    }

    fn requires_three_levels(&self) -> bool {
        true
    }

    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError> {
        check(p, layout)?;
        if layout.levels() != Levels::Three {
            return Err(ModelError::NeedsThreeLevels(self.name()));
        }
        let ops = Ops::new(layout)?;
        let mut h = TimeDependentHamiltonian::new(layout.total_dim());
        let sfe = ops.q(QutritOp::SigmaFePlus)?;
        for j in 1..=p.n_targets {
            h.push_with_adjoint(
                &format!("gt{j} a{j} sfe{j}^+"),
                Coefficient::oscillating(real(p.gt[j - 1]), p.deltat[j - 1]),
                ops.annihilation_with(j, Qutrit::Target(j), &sfe)?,
            );
            h.push_with_adjoint(
                &format!("gtA{j} a{j} sfeA^+"),
                Coefficient::oscillating(real(p.gt_a[j - 1]), p.deltat_a[j - 1]),
                ops.annihilation_with(j, Qutrit::Coupler, &sfe)?,
            );
        }
        if p.n_targets >= 2 && p.g12 != 0.0 {
            let op = embed_product(
                &[(layout.cavity(1), &ops.a), (layout.cavity(2), &ops.ad)],
                layout,
            )?;
            h.push_with_adjoint(
                "g12 a1 a2^dag",
                Coefficient::oscillating(real(p.g12), p.cavity_detuning),
                op,
            );
        }
        for (idx, l) in layout.qutrits().enumerate() {
            h.push_with_adjoint(
                &format!("Ωt sfe^+[{l:?}]"),
                Coefficient::oscillating(real(p.rabi_fe), p.omega_fe[idx] - p.omega_drive),
                ops.on_qutrit(l, &sfe)?,
            );
        }
        Ok(h)
    }
}

/// Ideal plus unwanted terms.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullModel;

impl HamiltonianModel for FullModel {
    fn name(&self) -> &'static str {
        "full"
    }

    fn summary(&self) -> &'static str {
        "ideal + unwanted terms (needs three levels)"
    }

    fn frame(&self) -> Frame {
        Frame::Interaction
    }

    fn requires_three_levels(&self) -> bool {
        true
    }

    fn build(
        &self,
        p: &DeviceParams,
        layout: &HilbertLayout,
    ) -> Result<TimeDependentHamiltonian, ModelError> {
        let mut h = IdealModel.build(p, layout)?;
        h.extend(UnwantedModel.build(p, layout)?);
        Ok(h)
    }
}

pub fn build_h_ideal(
    t: f64,
    p: &DeviceParams,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, ModelError> {
    Ok(IdealModel.build(p, layout)?.at(t))
}

pub fn build_h_rotated(
    t: f64,
    p: &DeviceParams,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, ModelError> {
    Ok(RotatedModel.build(p, layout)?.at(t))
}

pub fn build_h_eff(
    t: f64,
    p: &DeviceParams,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, ModelError> {
    Ok(EffectiveModel.build(p, layout)?.at(t))
}

pub fn build_theta(
    t: f64,
    p: &DeviceParams,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, ModelError> {
    Ok(UnwantedModel.build(p, layout)?.at(t))
}

pub fn build_h_full(
    t: f64,
    p: &DeviceParams,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, ModelError> {
    Ok(FullModel.build(p, layout)?.at(t))
}
