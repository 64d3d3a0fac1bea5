//! Independent oracles: finite differences, kinetic energy balance and the
//! generalized mass matrix assembled from inverse dynamics.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{inverse_dynamics_2, AppliedLoads2, DynamicsResult2, GravityMode};
use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics_4, BodyKinematics4, JointState4};
use crate::model::RobotModel;
use crate::screw::spatial_inertia_unchecked;

pub const DEFAULT_STEP: f64 = 1e-4;

/// Relative tolerance on the spacing of sampled times.
pub const SPACING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Central3,
    Central5,
}

impl Stencil {
    pub fn width(self) -> usize {
        match self {
            Stencil::Central3 => 3,
            Stencil::Central5 => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdScheme {
    pub stencil: Stencil,
    pub step: f64,
}

impl FdScheme {
    pub fn new(stencil: Stencil, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::FiniteDifference(format!("step must be positive, got {step}")));
        }
        Ok(Self { stencil, step })
    }

    pub fn central5(step: f64) -> Result<Self> {
        Self::new(Stencil::Central5, step)
    }

    pub fn central3(step: f64) -> Result<Self> {
        Self::new(Stencil::Central3, step)
    }
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            stencil: Stencil::Central5,
            step: DEFAULT_STEP,
        }
    }
}

fn stencil_apply<T>(stencil: Stencil, h: f64, at: impl Fn(isize) -> T) -> T
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    match stencil {
        Stencil::Central3 => (at(1) - at(-1)) * (0.5 / h),
        Stencil::Central5 => {
            ((at(1) - at(-1)) * 8.0 - (at(2) - at(-2))) * (1.0 / (12.0 * h))
        }
    }
}

/// Derivative estimates at the interior points of uniformly sampled data.
///
/// Returns one estimate for each sample index `k` with a full stencil around
/// it, i.e. `samples.len() − width + 1` values starting at index `width / 2`.
pub fn finite_difference<T>(samples: &[T], times: &[f64], scheme: &FdScheme) -> Result<Vec<T>>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let width = scheme.stencil.width();
    if samples.len() != times.len() {
        return Err(Error::LengthMismatch {
            what: "sample times",
            expected: samples.len(),
            got: times.len(),
        });
    }
    if samples.len() < width {
        return Err(Error::FiniteDifference(format!(
            "need at least {width} samples, got {}",
            samples.len()
        )));
    }
    let h = scheme.step;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if (dt - h).abs() > SPACING_TOLERANCE * h.max(w[1].abs()) {
            return Err(Error::FiniteDifference(format!(
                "non-uniform spacing: {dt} between t = {} and t = {}, expected {h}",
                w[0], w[1]
            )));
        }
    }
    let r = width / 2;
    Ok((r..samples.len() - r)
        .map(|k| stencil_apply(scheme.stencil, h, |o| samples[(k as isize + o) as usize].clone()))
        .collect())
}

/// Derivative of `f` at `t` by evaluating it on the stencil.
pub fn central_derivative<T, F>(f: F, t: f64, scheme: &FdScheme) -> T
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let h = scheme.step;
    stencil_apply(scheme.stencil, h, |o| f(t + o as f64 * h))
}

/// `T = ½ Σ Vᵢᵀ Mᵢˢ Vᵢ`.
pub fn kinetic_energy(model: &RobotModel, bk: &BodyKinematics4) -> f64 {
    model
        .bodies()
        .iter()
        .zip(&bk.bodies)
        .map(|(body, b)| {
            let ms = spatial_inertia_unchecked(body.mass_matrix(), &b.c);
            0.5 * b.v.dot(&(ms * b.v))
        })
        .sum()
}

/// `|Σ Qᵢ q̇ᵢ − Ṫ|` for dynamics computed without gravity or loads.
pub fn power_balance_residual(
    _model: &RobotModel,
    bk: &BodyKinematics4,
    dr: &DynamicsResult2,
    tdot: f64,
) -> f64 {
    (dr.q.dot(&bk.joints.qd) - tdot).abs()
}

/// Generalized mass matrix, column `k` being the joint forces for `q̈ = eₖ`
/// at rest without gravity.
pub fn mass_matrix_via_id(model: &RobotModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = model.dof();
    if q.len() != n {
        return Err(Error::LengthMismatch {
            what: "joint positions",
            expected: n,
            got: q.len(),
        });
    }
    let loads = AppliedLoads2::zeros(n);
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut js = JointState4::at_rest(q.clone());
        js.qdd[k] = 1.0;
        let bk = forward_kinematics_4(model, &js, false)?;
        let dr = inverse_dynamics_2(model, &bk, &loads, GravityMode::None)?;
        m.set_column(k, &dr.q);
    }
    Ok(m)
}

/// Largest absolute entry of `M − Mᵀ`.
pub fn matrix_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}
