//! Second-order inverse dynamics in spatial representation.
//!
//! The backward pass propagates spatial momentum co-screws and their time
//! derivatives from the terminal body to the ground without any frame
//! transformation of wrenches. Applied wrenches are spatial and enter the
//! interbody wrench additively.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kinematics::{BodyKinematics4, JointState4};
use crate::model::RobotModel;
use crate::screw::{
    ad_transpose_apply, screw_commutator, spatial_inertia_transform, spatial_inertia_unchecked,
    InertiaMatrix, ScrewVector, WrenchVector,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GravityMode {
    /// Gravity enters through the ground acceleration of the kinematics.
    #[default]
    Trick,
    /// Gravity wrenches and their derivatives are added per body.
    Explicit,
    None,
}

impl GravityMode {
    pub fn name(self) -> &'static str {
        match self {
            GravityMode::Trick => "trick",
            GravityMode::Explicit => "explicit",
            GravityMode::None => "none",
        }
    }

    /// Whether the kinematics feeding this mode must carry the gravity trick.
    pub fn needs_trick(self) -> bool {
        self == GravityMode::Trick
    }
}

impl fmt::Display for GravityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GravityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trick" => Ok(GravityMode::Trick),
            "explicit" => Ok(GravityMode::Explicit),
            "none" => Ok(GravityMode::None),
            other => Err(Error::Schema(format!(
                "unknown gravity mode `{other}` (expected trick, explicit or none)"
            ))),
        }
    }
}

/// Spatial wrenches applied to each body, with two time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct AppliedLoads2 {
    pub w: Vec<WrenchVector>,
    pub wd: Vec<WrenchVector>,
    pub wdd: Vec<WrenchVector>,
}

impl AppliedLoads2 {
    pub fn zeros(n: usize) -> Self {
        Self {
            w: vec![WrenchVector::zeros(); n],
            wd: vec![WrenchVector::zeros(); n],
            wdd: vec![WrenchVector::zeros(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Sets the load on `body` (zero based).
    pub fn set(&mut self, body: usize, w: WrenchVector, wd: WrenchVector, wdd: WrenchVector) {
        self.w[body] = w;
        self.wd[body] = wd;
        self.wdd[body] = wdd;
    }

    fn check(&self, n: usize) -> Result<()> {
        for (what, v) in [("loads", &self.w), ("load rates", &self.wd), ("load accelerations", &self.wdd)] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &AppliedLoads2 {
    type Output = AppliedLoads2;

    fn add(self, rhs: &AppliedLoads2) -> AppliedLoads2 {
        let sum = |a: &[WrenchVector], b: &[WrenchVector]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        AppliedLoads2 {
            w: sum(&self.w, &rhs.w),
            wd: sum(&self.wd, &rhs.wd),
            wdd: sum(&self.wdd, &rhs.wdd),
        }
    }
}

/// Spatial mass matrix and momentum co-screw of one body with three derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub ms: InertiaMatrix,
    pub pi: WrenchVector,
    pub pid: WrenchVector,
    pub pidd: WrenchVector,
    pub piddd: WrenchVector,
}

/// Momentum `Π = MˢV` and its derivatives for a body with spatial mass
/// matrix `ms` and twist derivatives `v..vddd`.
pub fn body_momentum(
    ms: &InertiaMatrix,
    v: &ScrewVector,
    vd: &ScrewVector,
    vdd: &ScrewVector,
    vddd: &ScrewVector,
) -> MomentumState {
    let adt = |x: &ScrewVector, w: &WrenchVector| ad_transpose_apply(x, w);

    let pi = ms * v;
    let pid = ms * vd - adt(v, &pi);

    // (ad_V̇ + ad_V²)ᵀ Π = ad_V̇ᵀ Π + ad_Vᵀ ad_Vᵀ Π
    let v_pi = adt(v, &pi);
    let vd_pi = adt(vd, &pi);
    let v_vd = screw_commutator(v, vd);
    let pidd = ms * (vdd - v_vd) - adt(v, &pid) * 2.0 - vd_pi - adt(v, &v_pi);

    let v_vdd = screw_commutator(v, vdd);
    let v_v_vd = screw_commutator(v, &v_vd);
    let v_v_pi = adt(v, &v_pi);
    let second = adt(vd, &pid) + adt(v, &adt(v, &pid));
    // (ad_V̈ + 2 ad_V̇ ad_V + ad_V ad_V̇ + ad_V³)ᵀ Π
    let third = adt(vdd, &pi) + adt(v, &vd_pi) * 2.0 + adt(vd, &v_pi) + adt(v, &v_v_pi);
    let piddd = ms * (vddd - v_vdd * 2.0 + v_v_vd) - adt(v, &pidd) * 3.0 - second * 3.0 - third;

    MomentumState {
        ms: *ms,
        pi,
        pid,
        pidd,
        piddd,
    }
}

/// Gravity wrench `MˢG` on a body and its first two time derivatives.
///
/// The second derivative is obtained by differentiating
/// `Ẇ = −(Mˢ ad_V + ad_Vᵀ Mˢ) G` once more with `Ṁˢ = −Mˢ ad_V − ad_Vᵀ Mˢ`.
pub fn gravity_wrench_derivatives(
    ms: &InertiaMatrix,
    v: &ScrewVector,
    vd: &ScrewVector,
    g: &ScrewVector,
) -> Result<(WrenchVector, WrenchVector, WrenchVector)> {
    let asym = crate::screw::asymmetry(ms);
    if asym > crate::screw::SYMMETRY_TOLERANCE {
        return Err(Error::NonSymmetricInertia { asymmetry: asym });
    }
    Ok(gravity_wrench_unchecked(ms, v, vd, g))
}

fn gravity_wrench_unchecked(
    ms: &InertiaMatrix,
    v: &ScrewVector,
    vd: &ScrewVector,
    g: &ScrewVector,
) -> (WrenchVector, WrenchVector, WrenchVector) {
    let w = ms * g;
    let ad_g = screw_commutator(v, g);
    let ad_ad_g = screw_commutator(v, &ad_g);
    let vd_g = screw_commutator(vd, g);
    let wd = -(ms * ad_g) - ad_transpose_apply(v, &w);
    // M ad² G + 2 adᵀ M ad G + adᵀ adᵀ M G − M ad_V̇ G − ad_V̇ᵀ M G
    let m_ad_g = ms * ad_g;
    let wdd = ms * ad_ad_g + ad_transpose_apply(v, &m_ad_g) * 2.0
        + ad_transpose_apply(v, &ad_transpose_apply(v, &w))
        - ms * vd_g
        - ad_transpose_apply(vd, &w);
    (w, wd, wdd)
}

/// Joint forces and interbody wrenches with two time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsResult2 {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub wbar: Vec<WrenchVector>,
    pub wbard: Vec<WrenchVector>,
    pub wbardd: Vec<WrenchVector>,
}

/// Backward pass from the terminal body to the ground.
///
/// `bk` must have been computed with the gravity trick exactly when `gravity`
/// is [`GravityMode::Trick`].
pub fn inverse_dynamics_2(
    model: &RobotModel,
    bk: &BodyKinematics4,
    loads: &AppliedLoads2,
    gravity: GravityMode,
) -> Result<DynamicsResult2> {
    let n = model.dof();
    if bk.dof() != n {
        return Err(Error::LengthMismatch {
            what: "body kinematics",
            expected: n,
            got: bk.dof(),
        });
    }
    loads.check(n)?;
    if bk.gravity_trick != gravity.needs_trick() {
        return Err(Error::GravityModeMismatch {
            mode: gravity.name(),
            trick: bk.gravity_trick,
        });
    }
    let g = model.ground_acceleration();

    let mut out = DynamicsResult2 {
        q: DVector::zeros(n),
        qd: DVector::zeros(n),
        qdd: DVector::zeros(n),
        wbar: vec![WrenchVector::zeros(); n],
        wbard: vec![WrenchVector::zeros(); n],
        wbardd: vec![WrenchVector::zeros(); n],
    };
    let mut wbar = WrenchVector::zeros();
    let mut wbard = WrenchVector::zeros();
    let mut wbardd = WrenchVector::zeros();

    for i in (0..n).rev() {
        let b = &bk.bodies[i];
        let ms = spatial_inertia_unchecked(model.bodies()[i].mass_matrix(), &b.c);
        let p = body_momentum(&ms, &b.v, &b.vd, &b.vdd, &b.vddd);

        wbar += p.pid + loads.w[i];
        wbard += p.pidd + loads.wd[i];
        // The ground acceleration enters S̈ as [V̇₀, S]; inertial-frame loads
        // compensate for it in their second derivative.
        wbardd += p.piddd + loads.wdd[i] - ad_transpose_apply(&bk.ground_acceleration, &loads.w[i]);
        if gravity == GravityMode::Explicit {
            let (w, wd, wdd) = gravity_wrench_unchecked(&ms, &b.v, &b.vd, &g);
            wbar += w;
            wbard += wd;
            wbardd += wdd;
        }

        out.q[i] = b.s.dot(&wbar);
        out.qd[i] = b.s.dot(&wbard) + b.sd.dot(&wbar);
        out.qdd[i] = b.s.dot(&wbardd) + b.sdd.dot(&wbar) + 2.0 * b.sd.dot(&wbard);
        out.wbar[i] = wbar;
        out.wbard[i] = wbard;
        out.wbardd[i] = wbardd;
    }
    Ok(out)
}

/// Per-body spatial momentum and derivatives, as used inside the backward pass.
pub fn momenta(model: &RobotModel, bk: &BodyKinematics4) -> Result<Vec<MomentumState>> {
    model
        .bodies()
        .iter()
        .zip(&bk.bodies)
        .map(|(body, b)| {
            let ms = spatial_inertia_transform(body.mass_matrix(), &b.c)?;
            Ok(body_momentum(&ms, &b.v, &b.vd, &b.vdd, &b.vddd))
        })
        .collect()
}

/// Lumped stiffness and reduced motor inertia of each elastic actuator.
#[derive(Clone, Debug, PartialEq)]
pub struct SeaParams {
    stiffness: DVector<f64>,
    motor_inertia: DVector<f64>,
}

impl SeaParams {
    pub fn new(stiffness: DVector<f64>, motor_inertia: DVector<f64>) -> Result<Self> {
        if stiffness.len() != motor_inertia.len() {
            return Err(Error::LengthMismatch {
                what: "motor inertias",
                expected: stiffness.len(),
                got: motor_inertia.len(),
            });
        }
        if stiffness.iter().chain(motor_inertia.iter()).any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidActuator(
                "stiffness and motor inertia must be positive".into(),
            ));
        }
        Ok(Self {
            stiffness,
            motor_inertia,
        })
    }

    pub fn uniform(n: usize, stiffness: f64, motor_inertia: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(n, stiffness),
            DVector::from_element(n, motor_inertia),
        )
    }

    pub fn stiffness(&self) -> &DVector<f64> {
        &self.stiffness
    }

    pub fn motor_inertia(&self) -> &DVector<f64> {
        &self.motor_inertia
    }

    pub fn dof(&self) -> usize {
        self.stiffness.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeaMotorState {
    pub theta: DVector<f64>,
    pub thetadd: DVector<f64>,
    pub tau: DVector<f64>,
}

/// Motor positions, accelerations and torques of series elastic actuators
/// that realise the joint forces `dr.q` along the joint motion `js`.
pub fn sea_motor_quantities(
    js: &JointState4,
    dr: &DynamicsResult2,
    p: &SeaParams,
) -> Result<SeaMotorState> {
    let n = p.dof();
    js.check(n)?;
    if dr.q.len() != n {
        return Err(Error::LengthMismatch {
            what: "joint forces",
            expected: n,
            got: dr.q.len(),
        });
    }
    let theta = &js.q + dr.q.component_div(&p.stiffness);
    let thetadd = &js.qdd + dr.qdd.component_div(&p.stiffness);
    let tau = p.motor_inertia.component_mul(&thetadd) + &dr.q;
    Ok(SeaMotorState {
        theta,
        thetadd,
        tau,
    })
}
