//! Fourth-order forward kinematics of the mechanism and the combined
//! inverse/forward kinematics of a non-redundant manipulator, with all
//! twists in spatial representation.

use nalgebra::{DVector, Matrix6, Matrix6xX};

use crate::error::{Error, Result};
use crate::model::RobotModel;
use crate::screw::{adjoint_apply, exp_screw, screw_commutator, Pose, ScrewVector};

/// Below this reciprocal condition number the Jacobian counts as singular.
pub const SINGULARITY_RCOND: f64 = 1e-10;

/// Joint positions and their first four time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState4 {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub qddd: DVector<f64>,
    pub qdddd: DVector<f64>,
}

impl JointState4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            q: DVector::zeros(n),
            qd: DVector::zeros(n),
            qdd: DVector::zeros(n),
            qddd: DVector::zeros(n),
            qdddd: DVector::zeros(n),
        }
    }

    /// Joint state at rest in configuration `q`.
    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            ..Self::zeros(n)
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        for (what, v) in [
            ("q", &self.q),
            ("qd", &self.qd),
            ("qdd", &self.qdd),
            ("qddd", &self.qddd),
            ("qdddd", &self.qdddd),
        ] {
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

/// Configuration, joint screw and twist (with derivatives) of one body.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyState4 {
    /// POE partial product `f_i = exp(Y₁q₁)…exp(Y_i q_i)`.
    pub f: Pose,
    /// Body pose `C_i = f_i A_i`.
    pub c: Pose,
    pub s: ScrewVector,
    pub sd: ScrewVector,
    pub sdd: ScrewVector,
    pub sddd: ScrewVector,
    pub v: ScrewVector,
    pub vd: ScrewVector,
    pub vdd: ScrewVector,
    pub vddd: ScrewVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyKinematics4 {
    pub bodies: Vec<BodyState4>,
    pub joints: JointState4,
    /// Whether the ground acceleration carried gravity, `V̇₀ = (0, −g)`.
    pub gravity_trick: bool,
    pub ground_acceleration: ScrewVector,
}

impl BodyKinematics4 {
    pub fn dof(&self) -> usize {
        self.bodies.len()
    }

    pub fn terminal(&self) -> &BodyState4 {
        self.bodies.last().expect("kinematics of a non-empty chain")
    }

    /// State of the end-effector (terminal body).
    pub fn end_effector(&self) -> EndEffectorState4 {
        let b = self.terminal();
        EndEffectorState4 {
            v: b.v,
            vd: b.vd,
            vdd: b.vdd,
            vddd: b.vddd,
        }
    }
}

/// Prescribed spatial twist of the end-effector and three derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EndEffectorState4 {
    pub v: ScrewVector,
    pub vd: ScrewVector,
    pub vdd: ScrewVector,
    pub vddd: ScrewVector,
}

/// `[V, S]`, `[V̇, S] + [V, [V, S]]` and the third derivative of a joint screw
/// carried by a body moving with twist `v` and derivatives `vd`, `vdd`.
fn screw_derivative_1(v: &ScrewVector, s: &ScrewVector) -> ScrewVector {
    screw_commutator(v, s)
}

fn screw_derivative_2(v: &ScrewVector, vd: &ScrewVector, s: &ScrewVector, sd: &ScrewVector) -> ScrewVector {
    // (ad_V̇ + ad_V²) S, with ad_V S = Ṡ
    screw_commutator(vd, s) + screw_commutator(v, sd)
}

fn screw_derivative_3(
    v: &ScrewVector,
    vd: &ScrewVector,
    vdd: &ScrewVector,
    s: &ScrewVector,
    sd: &ScrewVector,
) -> ScrewVector {
    // (ad_V̈ + 2 ad_V̇ ad_V + ad_V ad_V̇ + ad_V³) S
    let vd_s = screw_commutator(vd, s);
    let v_sd = screw_commutator(v, sd);
    screw_commutator(vdd, s)
        + screw_commutator(vd, sd) * 2.0
        + screw_commutator(v, &vd_s)
        + screw_commutator(v, &v_sd)
}

/// Velocity, acceleration, jerk and jounce of every body for a given joint
/// state, by a single forward pass from the ground.
///
/// With `gravity_trick` set the ground acceleration is `(0, −g)`, so every
/// acceleration-level quantity includes gravity.
pub fn forward_kinematics_4(
    model: &RobotModel,
    js: &JointState4,
    gravity_trick: bool,
) -> Result<BodyKinematics4> {
    let n = model.dof();
    js.check(n)?;

    let ground_acceleration = if gravity_trick {
        model.ground_acceleration()
    } else {
        ScrewVector::zeros()
    };

    let mut bodies = Vec::with_capacity(n);
    let mut f = Pose::identity();
    let mut v_prev = ScrewVector::zeros();
    let mut vd_prev = ground_acceleration;
    let mut vdd_prev = ScrewVector::zeros();
    let mut vddd_prev = ScrewVector::zeros();

    for (i, (joint, body)) in model.joints().iter().zip(model.bodies()).enumerate() {
        let (q, qd, qdd, qddd, qdddd) = (js.q[i], js.qd[i], js.qdd[i], js.qddd[i], js.qdddd[i]);

        f = f.compose(&exp_screw(joint.screw(), q));
        let c = f.compose(body.reference_pose());
        let s = adjoint_apply(&f, joint.screw());

        let v = v_prev + s * qd;
        let sd = screw_derivative_1(&v, &s);
        let vd = vd_prev + s * qdd + sd * qd;
        let sdd = screw_derivative_2(&v, &vd, &s, &sd);
        let vdd = vdd_prev + s * qddd + sd * (2.0 * qdd) + sdd * qd;
        let sddd = screw_derivative_3(&v, &vd, &vdd, &s, &sd);
        let vddd = vddd_prev + s * qdddd + sd * (3.0 * qddd) + sdd * (3.0 * qdd) + sddd * qd;

        bodies.push(BodyState4 {
            f,
            c,
            s,
            sd,
            sdd,
            sddd,
            v,
            vd,
            vdd,
            vddd,
        });
        v_prev = v;
        vd_prev = vd;
        vdd_prev = vdd;
        vddd_prev = vddd;
    }

    Ok(BodyKinematics4 {
        bodies,
        joints: js.clone(),
        gravity_trick,
        ground_acceleration,
    })
}

/// Spatial Jacobian: column `j` is the instantaneous joint screw `S_j`.
pub fn spatial_jacobian(bk: &BodyKinematics4) -> Matrix6xX<f64> {
    Matrix6xX::from_columns(&bk.bodies.iter().map(|b| b.s).collect::<Vec<_>>())
}

/// Reciprocal condition number `σ_min / σ_max` of a square Jacobian.
pub fn reciprocal_condition(j: &Matrix6<f64>) -> f64 {
    let sv = j.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Mechanism quantities that become available stage by stage while solving
/// the inverse kinematics. Reading a derivative order that has not been
/// computed yet panics, which keeps the stage ordering honest.
struct StagedMechanism {
    screws: [Vec<ScrewVector>; 4],
    twists: [Vec<ScrewVector>; 4],
    screw_order: usize,
    twist_order: Option<usize>,
}

impl StagedMechanism {
    fn new(s: Vec<ScrewVector>) -> Self {
        let n = s.len();
        let z = vec![ScrewVector::zeros(); n];
        Self {
            screws: [s, z.clone(), z.clone(), z.clone()],
            twists: [z.clone(), z.clone(), z.clone(), z],
            screw_order: 0,
            twist_order: None,
        }
    }

    /// `k`-th time derivative of joint screw `i`.
    fn screw(&self, k: usize, i: usize) -> &ScrewVector {
        assert!(
            k <= self.screw_order,
            "joint screw derivative of order {k} read before it was computed (have {})",
            self.screw_order
        );
        &self.screws[k][i]
    }

    /// `k`-th time derivative of the twist of body `i`.
    fn twist(&self, k: usize, i: usize) -> &ScrewVector {
        assert!(
            self.twist_order.is_some_and(|o| k <= o),
            "twist derivative of order {k} read before it was computed (have {:?})",
            self.twist_order
        );
        &self.twists[k][i]
    }

    /// Stores twist derivative `k` of every body and the joint screw
    /// derivative `k + 1` that depends on it.
    fn advance(&mut self, twists: Vec<ScrewVector>, screws: Option<Vec<ScrewVector>>) {
        let k = self.twist_order.map_or(0, |o| o + 1);
        self.twists[k] = twists;
        self.twist_order = Some(k);
        if let Some(s) = screws {
            self.screws[k + 1] = s;
            self.screw_order = k + 1;
        }
    }
}

/// Joint rates up to jounce for a 6-joint chain whose end-effector twist and
/// its derivatives are prescribed, interleaved with the forward kinematics of
/// the mechanism. The Jacobian is factored once.
///
/// The terminal body's twist derivatives are the prescribed end-effector
/// values.
pub fn inverse_kinematics_4(
    model: &RobotModel,
    q: &DVector<f64>,
    ee: &EndEffectorState4,
) -> Result<(JointState4, BodyKinematics4)> {
    let n = model.dof();
    if n != 6 {
        return Err(Error::UnsupportedConfiguration { joints: n });
    }
    if q.len() != n {
        return Err(Error::LengthMismatch {
            what: "q",
            expected: n,
            got: q.len(),
        });
    }

    // 1) configurations and joint screws
    let mut fs = Vec::with_capacity(n);
    let mut cs = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut f = Pose::identity();
    for (i, (joint, body)) in model.joints().iter().zip(model.bodies()).enumerate() {
        f = f.compose(&exp_screw(joint.screw(), q[i]));
        cs.push(f.compose(body.reference_pose()));
        s.push(adjoint_apply(&f, joint.screw()));
        fs.push(f);
    }
    let jac = Matrix6::from_columns(&s);
    let rcond = reciprocal_condition(&jac);
    if rcond.is_nan() || rcond < SINGULARITY_RCOND {
        return Err(Error::Singular { rcond });
    }
    let lu = jac.lu();
    let solve = |rhs: ScrewVector| -> DVector<f64> {
        let x = lu.solve(&rhs).expect("Jacobian checked non-singular");
        DVector::from_column_slice(x.as_slice())
    };

    let mut mech = StagedMechanism::new(s);
    let last = n - 1;

    // 2.a) velocity
    let qd = solve(ee.v);
    // 2.b) body twists and first screw derivatives, terminal body from the EE
    {
        let mut v = Vec::with_capacity(n);
        let mut sd = Vec::with_capacity(n);
        let mut prev = ScrewVector::zeros();
        for i in 0..n {
            let vi = if i < last { prev + mech.screw(0, i) * qd[i] } else { ee.v };
            sd.push(screw_derivative_1(&vi, mech.screw(0, i)));
            v.push(vi);
            prev = vi;
        }
        mech.advance(v, Some(sd));
    }

    // 3.a) acceleration
    let bias: ScrewVector = (0..n).map(|i| mech.screw(1, i) * qd[i]).sum();
    let qdd = solve(ee.vd - bias);
    // 3.b)
    {
        let mut vd = Vec::with_capacity(n);
        let mut sdd = Vec::with_capacity(n);
        let mut prev = ScrewVector::zeros();
        for i in 0..n {
            let vdi = if i < last {
                prev + mech.screw(0, i) * qdd[i] + mech.screw(1, i) * qd[i]
            } else {
                ee.vd
            };
            sdd.push(screw_derivative_2(
                mech.twist(0, i),
                &vdi,
                mech.screw(0, i),
                mech.screw(1, i),
            ));
            vd.push(vdi);
            prev = vdi;
        }
        mech.advance(vd, Some(sdd));
    }

    // 4.a) jerk
    let bias: ScrewVector = (0..n)
        .map(|i| mech.screw(1, i) * (2.0 * qdd[i]) + mech.screw(2, i) * qd[i])
        .sum();
    let qddd = solve(ee.vdd - bias);
    // 4.b)
    {
        let mut vdd = Vec::with_capacity(n);
        let mut sddd = Vec::with_capacity(n);
        let mut prev = ScrewVector::zeros();
        for i in 0..n {
            let vddi = if i < last {
                prev + mech.screw(0, i) * qddd[i]
                    + mech.screw(1, i) * (2.0 * qdd[i])
                    + mech.screw(2, i) * qd[i]
            } else {
                ee.vdd
            };
            sddd.push(screw_derivative_3(
                mech.twist(0, i),
                mech.twist(1, i),
                &vddi,
                mech.screw(0, i),
                mech.screw(1, i),
            ));
            vdd.push(vddi);
            prev = vddi;
        }
        mech.advance(vdd, Some(sddd));
    }

    // 5.a) jounce
    let bias: ScrewVector = (0..n)
        .map(|i| {
            mech.screw(1, i) * (3.0 * qddd[i])
                + mech.screw(2, i) * (3.0 * qdd[i])
                + mech.screw(3, i) * qd[i]
        })
        .sum();
    let qdddd = solve(ee.vddd - bias);
    // 5.b)
    {
        let mut vddd = Vec::with_capacity(n);
        let mut prev = ScrewVector::zeros();
        for i in 0..n {
            let vdddi = if i < last {
                prev + mech.screw(0, i) * qdddd[i]
                    + mech.screw(1, i) * (3.0 * qddd[i])
                    + mech.screw(2, i) * (3.0 * qdd[i])
                    + mech.screw(3, i) * qd[i]
            } else {
                ee.vddd
            };
            vddd.push(vdddi);
            prev = vdddi;
        }
        mech.advance(vddd, None);
    }

    let js = JointState4 {
        q: q.clone(),
        qd,
        qdd,
        qddd,
        qdddd,
    };
    let bodies = (0..n)
        .map(|i| BodyState4 {
            f: fs[i],
            c: cs[i],
            s: mech.screws[0][i],
            sd: mech.screws[1][i],
            sdd: mech.screws[2][i],
            sddd: mech.screws[3][i],
            v: mech.twists[0][i],
            vd: mech.twists[1][i],
            vdd: mech.twists[2][i],
            vddd: mech.twists[3][i],
        })
        .collect();
    let bk = BodyKinematics4 {
        bodies,
        joints: js.clone(),
        gravity_trick: false,
        ground_acceleration: ScrewVector::zeros(),
    };
    Ok((js, bk))
}
