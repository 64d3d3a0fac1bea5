//! Body-fixed recursion for `Q` and `Q̇`.
//!
//! Twists are those of the body frames resolved in the same frames. Wrenches
//! are carried from body `i + 1` to body `i` by `Ad(C_{i+1,i})ᵀ`, where
//! `C_{i,i−1} = Cᵢ⁻¹C_{i−1}` is the pose of body `i − 1` relative to body `i`.

use nalgebra::DVector;

use crate::dynamics::AppliedLoads2;
use crate::error::{Error, Result};
use crate::kinematics::JointState4;
use crate::model::RobotModel;
use crate::screw::{
    ad_transpose_apply, adjoint_apply, adjoint_of, exp_screw, screw_commutator, Pose, ScrewVector,
    WrenchVector,
};

#[derive(Clone, Debug, PartialEq)]
pub struct BodyFixedBody {
    /// `C_{i,i−1}`, with the ground as body 0.
    pub c_rel: Pose,
    /// Absolute pose `Cᵢ`.
    pub c: Pose,
    /// Constant joint screw in body coordinates.
    pub x: ScrewVector,
    pub vb: ScrewVector,
    pub vbd: ScrewVector,
    pub vbdd: ScrewVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyFixedState2 {
    pub bodies: Vec<BodyFixedBody>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyFixedResult {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub wb: Vec<WrenchVector>,
    pub wbd: Vec<WrenchVector>,
}

/// Forward pass: body-fixed twists with two derivatives.
pub fn forward_kinematics_bodyfixed(
    model: &RobotModel,
    js: &JointState4,
    gravity: bool,
) -> Result<BodyFixedState2> {
    let n = model.dof();
    js.check(n)?;
    let mut prev_a = Pose::identity();
    let mut prev_c = Pose::identity();
    let mut v = ScrewVector::zeros();
    let mut vd = if gravity {
        model.ground_acceleration()
    } else {
        ScrewVector::zeros()
    };
    let mut vdd = ScrewVector::zeros();

    let mut bodies = Vec::with_capacity(n);
    for (i, body) in model.bodies().iter().enumerate() {
        let x = model.body_fixed_screws()[i];
        let a = body.reference_pose();
        let (q, qd, qdd, qddd) = (js.q[i], js.qd[i], js.qdd[i], js.qddd[i]);

        let c_rel = exp_screw(&(-x), q) * a.inverse() * prev_a;
        let vi = adjoint_apply(&c_rel, &v) + x * qd;
        let ad_vd_prev = adjoint_apply(&c_rel, &vd);
        let vdi = ad_vd_prev + screw_commutator(&vi, &x) * qd + x * qdd;
        let vddi = adjoint_apply(&c_rel, &vdd) - screw_commutator(&x, &ad_vd_prev) * qd
            + screw_commutator(&vi, &x) * qdd
            + screw_commutator(&vdi, &x) * qd
            + x * qddd;

        let c = prev_c * c_rel.inverse();
        bodies.push(BodyFixedBody {
            c_rel,
            c,
            x,
            vb: vi,
            vbd: vdi,
            vbdd: vddi,
        });
        prev_a = *a;
        prev_c = c;
        v = vi;
        vd = vdi;
        vdd = vddi;
    }
    Ok(BodyFixedState2 { bodies })
}

/// Joint forces and their first derivative from the body-fixed recursion.
///
/// `loads` are spatial wrenches (only `w` and `wd` are used). Gravity, when
/// requested, enters through the ground acceleration.
pub fn inverse_dynamics_bodyfixed_1(
    model: &RobotModel,
    js: &JointState4,
    loads: &AppliedLoads2,
    gravity: bool,
) -> Result<BodyFixedResult> {
    let n = model.dof();
    if loads.w.len() != n || loads.wd.len() != n {
        return Err(Error::LengthMismatch {
            what: "loads",
            expected: n,
            got: loads.w.len().min(loads.wd.len()),
        });
    }
    let st = forward_kinematics_bodyfixed(model, js, gravity)?;

    let mut out = BodyFixedResult {
        q: DVector::zeros(n),
        qd: DVector::zeros(n),
        wb: vec![WrenchVector::zeros(); n],
        wbd: vec![WrenchVector::zeros(); n],
    };
    let mut wbar = WrenchVector::zeros();
    let mut wbard = WrenchVector::zeros();

    for i in (0..n).rev() {
        let b = &st.bodies[i];
        if i + 1 < n {
            let next = &st.bodies[i + 1];
            let adt = adjoint_of(&next.c_rel).transpose();
            let carried_d = wbard - ad_transpose_apply(&next.x, &wbar) * js.qd[i + 1];
            wbar = adt * wbar;
            wbard = adt * carried_d;
        }
        let mb = model.bodies()[i].mass_matrix();
        let p = mb * b.vb;
        let pd = mb * b.vbd;
        wbar += pd - ad_transpose_apply(&b.vb, &p);
        wbard += mb * b.vbdd - ad_transpose_apply(&b.vb, &pd) - ad_transpose_apply(&b.vbd, &p);

        let adc_t = adjoint_of(&b.c).transpose();
        let w_app = adc_t * loads.w[i];
        wbar += w_app;
        wbard += adc_t * loads.wd[i] + ad_transpose_apply(&b.vb, &w_app);

        out.q[i] = b.x.dot(&wbar);
        out.qd[i] = b.x.dot(&wbard);
        out.wb[i] = wbar;
        out.wbd[i] = wbard;
    }
    Ok(out)
}
