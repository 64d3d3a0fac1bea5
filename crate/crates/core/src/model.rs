//! Serial-chain robot models: joint screws, reference configurations and
//! body inertia data, plus the `*.model` JSON loader.
//!
//! A model file looks like
//!
//! ```json
//! {
//!   "gravity": [0, 0, -9.81],
//!   "joints": [ { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0.333] } ],
//!   "bodies": [ {
//!       "reference_pose": { "rotation": [1,0,0, 0,1,0, 0,0,1], "position": [0, 0, 0.333] },
//!       "mass": 1.0, "com": [0, 0, 0], "inertia": [0.01, 0.01, 0.01, 0, 0, 0]
//!   } ]
//! }
//! ```
//!
//! `inertia` lists `xx, yy, zz, xy, xz, yz` of the inertia tensor about the
//! body frame origin, resolved in the body frame. Instead of per-body
//! `reference_pose` entries a top-level `dh` list (`alpha, a, d, theta`) may
//! be given, which is chained from the identity. `gravity` defaults to
//! `(0, 0, -9.81)`.

use std::path::Path;

use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::screw::{
    adjoint_apply, screw, skew, InertiaMatrix, Pose, ScrewVector,
};

pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, 0.0, -9.81];

/// Tolerance on `‖e‖ − 1` for joint axes.
pub const AXIS_NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance on the orthonormality of rotation blocks read from files.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
    Helical,
}

/// Screw coordinates of a joint in the zero reference configuration.
///
/// Revolute `(e, y×e)`, helical `(e, y×e + h·e)`, prismatic `(0, e)`.
pub fn joint_screw(
    kind: JointKind,
    axis: &Vector3<f64>,
    point: &Vector3<f64>,
    pitch: f64,
) -> Result<ScrewVector> {
    check_axis(0, kind, axis)?;
    Ok(screw_unchecked(kind, axis, point, pitch))
}

fn check_axis(joint: usize, kind: JointKind, axis: &Vector3<f64>) -> Result<()> {
    let norm = axis.norm();
    let needs_unit = matches!(kind, JointKind::Revolute | JointKind::Helical);
    if !norm.is_finite() || (needs_unit && (norm - 1.0).abs() > AXIS_NORM_TOLERANCE) {
        return Err(Error::NonUnitAxis { joint, norm });
    }
    Ok(())
}

fn screw_unchecked(
    kind: JointKind,
    axis: &Vector3<f64>,
    point: &Vector3<f64>,
    pitch: f64,
) -> ScrewVector {
    match kind {
        JointKind::Revolute => screw(*axis, point.cross(axis)),
        JointKind::Helical => screw(*axis, point.cross(axis) + axis * pitch),
        JointKind::Prismatic => screw(Vector3::zeros(), *axis),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointModel {
    kind: JointKind,
    axis: Vector3<f64>,
    point: Vector3<f64>,
    pitch: f64,
    screw: ScrewVector,
}

impl JointModel {
    pub fn new(kind: JointKind, axis: Vector3<f64>, point: Vector3<f64>, pitch: f64) -> Result<Self> {
        Self::indexed(0, kind, axis, point, pitch)
    }

    fn indexed(
        joint: usize,
        kind: JointKind,
        axis: Vector3<f64>,
        point: Vector3<f64>,
        pitch: f64,
    ) -> Result<Self> {
        check_axis(joint, kind, &axis)?;
        if kind == JointKind::Prismatic && (axis.norm() - 1.0).abs() > AXIS_NORM_TOLERANCE {
            return Err(Error::NonUnitAxis {
                joint,
                norm: axis.norm(),
            });
        }
        if !pitch.is_finite() || point.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidJoint {
                joint,
                reason: "point and pitch must be finite".into(),
            });
        }
        let screw = screw_unchecked(kind, &axis, &point, pitch);
        Ok(Self {
            kind,
            axis,
            point,
            pitch,
            screw,
        })
    }

    pub fn revolute(axis: Vector3<f64>, point: Vector3<f64>) -> Result<Self> {
        Self::new(JointKind::Revolute, axis, point, 0.0)
    }

    pub fn prismatic(axis: Vector3<f64>) -> Result<Self> {
        Self::new(JointKind::Prismatic, axis, Vector3::zeros(), 0.0)
    }

    pub fn kind(&self) -> JointKind {
        self.kind
    }

    pub fn axis(&self) -> &Vector3<f64> {
        &self.axis
    }

    pub fn point(&self) -> &Vector3<f64> {
        &self.point
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Screw coordinates `Y` in the inertial frame at `q = 0`.
    pub fn screw(&self) -> &ScrewVector {
        &self.screw
    }
}

/// Assembles `Mᵇ = [[Θᵇ, m·d̃], [−m·d̃, m·I]]`.
pub fn body_mass_matrix(mass: f64, com: &Vector3<f64>, inertia: &Matrix3<f64>) -> InertiaMatrix {
    let md = skew(com) * mass;
    let mut mb = Matrix6::zeros();
    mb.fixed_view_mut::<3, 3>(0, 0).copy_from(inertia);
    mb.fixed_view_mut::<3, 3>(0, 3).copy_from(&md);
    mb.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-md));
    mb.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(Matrix3::identity() * mass));
    mb
}

/// Reads `(m, d, Θᵇ)` back from a body-fixed mass matrix.
pub fn split_mass_matrix(mb: &InertiaMatrix) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let mass = mb[(3, 3)];
    let md = mb.fixed_view::<3, 3>(0, 3);
    let com = Vector3::new(md[(2, 1)], md[(0, 2)], md[(1, 0)]) / mass;
    (mass, com, mb.fixed_view::<3, 3>(0, 0).into_owned())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyModel {
    reference_pose: Pose,
    mass: f64,
    com: Vector3<f64>,
    inertia: Matrix3<f64>,
    mass_matrix: InertiaMatrix,
    placeholder: bool,
}

impl BodyModel {
    /// `inertia` is taken about the body frame origin, resolved in the body frame.
    pub fn new(
        reference_pose: Pose,
        mass: f64,
        com: Vector3<f64>,
        inertia: Matrix3<f64>,
    ) -> Result<Self> {
        Self::indexed(0, reference_pose, mass, com, inertia, false)
    }

    fn indexed(
        body: usize,
        reference_pose: Pose,
        mass: f64,
        com: Vector3<f64>,
        inertia: Matrix3<f64>,
        placeholder: bool,
    ) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidBody {
            body,
            reason: reason.to_string(),
        };
        if !reference_pose.is_valid(ROTATION_TOLERANCE) {
            return Err(invalid("reference pose rotation is not orthonormal"));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass must be positive"));
        }
        if com.iter().any(|x| !x.is_finite()) {
            return Err(invalid("center of mass must be finite"));
        }
        let asym = (inertia - inertia.transpose()).abs().max();
        if asym > crate::screw::SYMMETRY_TOLERANCE {
            return Err(invalid("inertia tensor is not symmetric"));
        }
        if inertia.cholesky().is_none() {
            return Err(invalid("inertia tensor is not positive definite"));
        }
        Ok(Self {
            reference_pose,
            mass,
            com,
            inertia,
            mass_matrix: body_mass_matrix(mass, &com, &inertia),
            placeholder,
        })
    }

    /// Configuration of the body frame at `q = 0`.
    pub fn reference_pose(&self) -> &Pose {
        &self.reference_pose
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn com(&self) -> &Vector3<f64> {
        &self.com
    }

    pub fn inertia(&self) -> &Matrix3<f64> {
        &self.inertia
    }

    /// Constant body-fixed mass matrix `Mᵇ`.
    pub fn mass_matrix(&self) -> &InertiaMatrix {
        &self.mass_matrix
    }

    /// True when the inertial data are stand-in values rather than measured ones.
    pub fn is_placeholder(&self) -> bool {
        self.placeholder
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    joints: Vec<JointModel>,
    bodies: Vec<BodyModel>,
    gravity: Vector3<f64>,
    body_screws: Vec<ScrewVector>,
}

impl RobotModel {
    pub fn new(joints: Vec<JointModel>, bodies: Vec<BodyModel>, gravity: Vector3<f64>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Schema("model needs at least one joint".into()));
        }
        if joints.len() != bodies.len() {
            return Err(Error::LengthMismatch {
                what: "bodies",
                expected: joints.len(),
                got: bodies.len(),
            });
        }
        if gravity.iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema("gravity must be finite".into()));
        }
        let body_screws = joints
            .iter()
            .zip(&bodies)
            .map(|(j, b)| adjoint_apply(&b.reference_pose.inverse(), &j.screw))
            .collect();
        Ok(Self {
            joints,
            bodies,
            gravity,
            body_screws,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointModel] {
        &self.joints
    }

    pub fn bodies(&self) -> &[BodyModel] {
        &self.bodies
    }

    pub fn gravity(&self) -> &Vector3<f64> {
        &self.gravity
    }

    /// Ground acceleration `(0, −g)` used to inject gravity into the kinematics.
    pub fn ground_acceleration(&self) -> ScrewVector {
        screw(Vector3::zeros(), -self.gravity)
    }

    /// Constant joint screws in body-fixed frames, `ⁱXᵢ = Ad(Aᵢ)⁻¹ Yᵢ`.
    pub fn body_fixed_screws(&self) -> &[ScrewVector] {
        &self.body_screws
    }

    pub fn has_placeholder_inertia(&self) -> bool {
        self.bodies.iter().any(BodyModel::is_placeholder)
    }

    pub fn with_gravity(&self, gravity: Vector3<f64>) -> Self {
        Self {
            gravity,
            ..self.clone()
        }
    }

    /// First `m` joints and bodies of the chain.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.dof() {
            return Err(Error::LengthMismatch {
                what: "truncated chain",
                expected: self.dof(),
                got: m,
            });
        }
        Self::new(
            self.joints[..m].to_vec(),
            self.bodies[..m].to_vec(),
            self.gravity,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhParams {
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
    pub theta: f64,
}

/// `A_prev · Rot_z(θ) · Trans_z(d) · Trans_x(a) · Rot_x(α)`.
pub fn dh_reference_config(a_prev: &Pose, p: &DhParams) -> Pose {
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = p.alpha.sin_cos();
    let rot_z = Matrix3::new(ct, -st, 0.0, st, ct, 0.0, 0.0, 0.0, 1.0);
    let rot_x = Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca);
    let local = Pose::new(rot_z * rot_x, rot_z * Vector3::new(p.a, 0.0, p.d));
    a_prev.compose(&local)
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    gravity: Option<[f64; 3]>,
    joints: Vec<serde_json::Value>,
    bodies: Vec<serde_json::Value>,
    #[serde(default)]
    dh: Option<Vec<serde_json::Value>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    kind: JointKind,
    axis: [f64; 3],
    #[serde(default)]
    point: Option<[f64; 3]>,
    #[serde(default)]
    pitch: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PoseEntry {
    rotation: [f64; 9],
    position: [f64; 3],
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BodyEntry {
    #[serde(default)]
    reference_pose: Option<PoseEntry>,
    mass: f64,
    #[serde(default)]
    com: Option<[f64; 3]>,
    inertia: [f64; 6],
    #[serde(default)]
    placeholder: bool,
}

fn inertia_from_entries(v: &[f64; 6]) -> Matrix3<f64> {
    let [xx, yy, zz, xy, xz, yz] = *v;
    Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
}

fn pose_from_entry(p: &PoseEntry) -> Pose {
    Pose::new(
        Matrix3::from_row_slice(&p.rotation),
        Vector3::from(p.position),
    )
}

/// Parses a model from its JSON text.
pub fn parse_model(text: &str) -> Result<RobotModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    let joints = file
        .joints
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let e: JointEntry = serde_json::from_value(v).map_err(|err| Error::InvalidJoint {
                joint: i + 1,
                reason: err.to_string(),
            })?;
            if e.kind == JointKind::Helical && e.pitch.is_none() {
                return Err(Error::InvalidJoint {
                    joint: i + 1,
                    reason: "helical joint needs a pitch".into(),
                });
            }
            if e.kind != JointKind::Prismatic && e.point.is_none() {
                return Err(Error::InvalidJoint {
                    joint: i + 1,
                    reason: "missing field `point`".into(),
                });
            }
            JointModel::indexed(
                i + 1,
                e.kind,
                Vector3::from(e.axis),
                e.point.map(Vector3::from).unwrap_or_else(Vector3::zeros),
                e.pitch.unwrap_or(0.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let entries = file
        .bodies
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value::<BodyEntry>(v).map_err(|err| Error::InvalidBody {
                body: i + 1,
                reason: err.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let poses: Vec<Pose> = match file.dh {
        Some(dh) => {
            if let Some(i) = entries.iter().position(|b| b.reference_pose.is_some()) {
                return Err(Error::InvalidBody {
                    body: i + 1,
                    reason: "reference_pose given together with a top-level dh list".into(),
                });
            }
            if dh.len() != entries.len() {
                return Err(Error::LengthMismatch {
                    what: "dh entries",
                    expected: entries.len(),
                    got: dh.len(),
                });
            }
            let mut prev = Pose::identity();
            dh.into_iter()
                .enumerate()
                .map(|(i, v)| {
                    let p: DhParams = serde_json::from_value(v).map_err(|err| Error::InvalidBody {
                        body: i + 1,
                        reason: format!("dh: {err}"),
                    })?;
                    prev = dh_reference_config(&prev, &p);
                    Ok(prev)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => entries
            .iter()
            .map(|b| b.reference_pose.as_ref().map(pose_from_entry).unwrap_or_default())
            .collect(),
    };

    let bodies = entries
        .iter()
        .zip(poses)
        .enumerate()
        .map(|(i, (b, pose))| {
            BodyModel::indexed(
                i + 1,
                pose,
                b.mass,
                b.com.map(Vector3::from).unwrap_or_else(Vector3::zeros),
                inertia_from_entries(&b.inertia),
                b.placeholder,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let gravity = Vector3::from(file.gravity.unwrap_or(DEFAULT_GRAVITY));
    let _ = file.name;
    RobotModel::new(joints, bodies, gravity)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RobotModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

/// Serializes a model to the `*.model` JSON format with explicit reference poses.
pub fn model_to_json(model: &RobotModel) -> String {
    let joints = model
        .joints
        .iter()
        .map(|j| {
            serde_json::to_value(JointEntry {
                kind: j.kind,
                axis: j.axis.into(),
                point: (j.kind != JointKind::Prismatic).then(|| j.point.into()),
                pitch: (j.kind == JointKind::Helical).then_some(j.pitch),
            })
            .expect("joint entry serializes")
        })
        .collect();
    let bodies = model
        .bodies
        .iter()
        .map(|b| {
            let r = &b.reference_pose.rotation;
            let i = &b.inertia;
            serde_json::to_value(BodyEntry {
                reference_pose: Some(PoseEntry {
                    rotation: [
                        r[(0, 0)], r[(0, 1)], r[(0, 2)],
                        r[(1, 0)], r[(1, 1)], r[(1, 2)],
                        r[(2, 0)], r[(2, 1)], r[(2, 2)],
                    ],
                    position: b.reference_pose.position.into(),
                }),
                mass: b.mass,
                com: Some(b.com.into()),
                inertia: [i[(0, 0)], i[(1, 1)], i[(2, 2)], i[(0, 1)], i[(0, 2)], i[(1, 2)]],
                placeholder: b.placeholder,
            })
            .expect("body entry serializes")
        })
        .collect();
    let file = ModelFile {
        name: None,
        gravity: Some(model.gravity.into()),
        joints,
        bodies,
        dh: None,
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Panda arm geometry from the manufacturer data sheet (m).
pub mod panda {
    pub const D1: f64 = 0.333;
    pub const D3: f64 = 0.316;
    pub const D5: f64 = 0.384;
    pub const A4: f64 = 0.0825;
    pub const A7: f64 = 0.088;

    /// Shipped model file. Its inertial values are unit-scale placeholders.
    pub const MODEL_FILE: &str = include_str!("../data/panda.model");
}

/// 7-DOF Franka Emika Panda.
///
/// Geometry is built here from the data-sheet lengths; the inertial data come
/// from the shipped `panda.model`, whose values are placeholders (`m = 1 kg`,
/// `Θ = 0.01·I kg·m²`, COM at the frame origin).
pub fn builtin_panda() -> RobotModel {
    use panda::*;

    let z = Vector3::z();
    let y = Vector3::y();
    let h1 = D1;
    let h3 = D1 + D3;
    let h5 = D1 + D3 + D5;

    let axes = [z, y, z, -y, z, -y, -z];
    let points = [
        Vector3::new(0.0, 0.0, h1),
        Vector3::new(0.0, 0.0, h1),
        Vector3::new(0.0, 0.0, h3),
        Vector3::new(A4, 0.0, h3),
        Vector3::new(0.0, 0.0, h5),
        Vector3::new(0.0, 0.0, h5),
        Vector3::new(A7, 0.0, h5),
    ];

    let ident = Matrix3::identity();
    // x→x, y→−z, z→y: body z-axis along +y
    let to_plus_y = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0);
    // body z-axis along −y
    let to_minus_y = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
    let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
    let rotations = [ident, to_plus_y, ident, to_minus_y, ident, to_minus_y, flip];

    let joints = axes
        .iter()
        .zip(&points)
        .map(|(e, p)| JointModel::revolute(*e, *p).expect("panda axes are unit vectors"))
        .collect();

    let shipped = parse_model(MODEL_FILE).expect("shipped panda.model is valid");
    let bodies = rotations
        .iter()
        .zip(&points)
        .zip(shipped.bodies())
        .enumerate()
        .map(|(i, ((r, p), b))| {
            BodyModel::indexed(i + 1, Pose::new(*r, *p), b.mass, b.com, b.inertia, b.placeholder)
                .expect("panda body data is valid")
        })
        .collect();

    RobotModel::new(joints, bodies, *shipped.gravity()).expect("panda model is consistent")
}

/// Uniform planar-ish test chain of `n` revolute joints with alternating
/// z/y axes spaced `link` metres apart along z. Used for scaling sweeps.
pub fn uniform_chain(n: usize, link: f64) -> RobotModel {
    let mut joints = Vec::with_capacity(n);
    let mut bodies = Vec::with_capacity(n);
    for i in 0..n {
        let axis = if i % 2 == 0 { Vector3::z() } else { Vector3::y() };
        let point = Vector3::new(0.0, 0.0, link * i as f64);
        joints.push(JointModel::revolute(axis, point).expect("unit axis"));
        let com = Vector3::new(0.0, 0.0, 0.5 * link);
        let theta_c = Matrix3::from_diagonal(&Vector3::new(0.02, 0.02, 0.005));
        let inertia = theta_c + (Matrix3::identity() * com.norm_squared() - com * com.transpose());
        bodies.push(
            BodyModel::new(Pose::from_translation(point), 1.0, com, inertia)
                .expect("valid uniform body"),
        );
    }
    RobotModel::new(joints, bodies, Vector3::from(DEFAULT_GRAVITY)).expect("valid chain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screw::exp_screw;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn rev(axis: [f64; 3], point: [f64; 3]) -> ScrewVector {
        joint_screw(
            JointKind::Revolute,
            &Vector3::from(axis),
            &Vector3::from(point),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn revolute_screw_examples() {
        assert_eq!(
            rev([0.0, 1.0, 0.0], [0.0, 0.0, 0.333]),
            ScrewVector::new(0.0, 1.0, 0.0, -0.333, 0.0, 0.0)
        );
        let y4 = rev([0.0, -1.0, 0.0], [0.0825, 0.0, 0.649]);
        let expected = ScrewVector::new(0.0, -1.0, 0.0, 0.649, 0.0, -0.0825);
        assert!((y4 - expected).abs().max() < 1e-15);
        assert_eq!(
            rev([0.0, 0.0, 1.0], [0.0, 0.0, 0.0]),
            ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn helical_and_prismatic_screws() {
        let e = Vector3::new(0.0, 0.0, 1.0);
        let p = Vector3::new(1.0, 0.0, 0.0);
        let h = joint_screw(JointKind::Helical, &e, &p, 0.05).unwrap();
        assert_eq!(h, ScrewVector::new(0.0, 0.0, 1.0, 0.0, -1.0, 0.05));
        let s = joint_screw(JointKind::Prismatic, &e, &p, 0.0).unwrap();
        assert_eq!(s, ScrewVector::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn non_unit_axis_is_rejected() {
        let err = joint_screw(
            JointKind::Revolute,
            &Vector3::new(0.0, 0.0, 0.9),
            &Vector3::zeros(),
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonUnitAxis { .. }));
    }

    #[test]
    fn dh_zero_params_is_identity_step() {
        let a_prev = exp_screw(&ScrewVector::new(0.0, 0.6, 0.8, 0.1, 0.2, 0.3), 0.7);
        let zero = DhParams { alpha: 0.0, a: 0.0, d: 0.0, theta: 0.0 };
        let out = dh_reference_config(&a_prev, &zero);
        assert!((out.rotation - a_prev.rotation).abs().max() < 1e-15);
        assert!((out.position - a_prev.position).abs().max() < 1e-15);
    }

    #[test]
    fn dh_offset_along_own_z() {
        let a_prev = Pose::new(
            Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
            Vector3::new(0.1, 0.2, 0.3),
        );
        let p = DhParams { alpha: 0.0, a: 0.0, d: 0.333, theta: 0.0 };
        let out = dh_reference_config(&a_prev, &p);
        let own_z = a_prev.rotation.column(2).into_owned();
        assert!((out.position - (a_prev.position + own_z * 0.333)).abs().max() < 1e-15);
        assert_eq!(out.rotation, a_prev.rotation);
    }

    #[test]
    fn dh_matches_product_of_elementary_transforms() {
        // Oracle: literal 4×4 homogeneous matrices multiplied left to right.
        let (alpha, a, d, theta) = (FRAC_PI_2, 0.1, 0.2, FRAC_PI_3);
        let rz = nalgebra::Matrix4::new(
            theta.cos(), -theta.sin(), 0.0, 0.0,
            theta.sin(), theta.cos(), 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let tz = nalgebra::Matrix4::new(
            1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, d, 0.0, 0.0, 0.0, 1.0,
        );
        let tx = nalgebra::Matrix4::new(
            1.0, 0.0, 0.0, a, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        );
        let rx = nalgebra::Matrix4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, alpha.cos(), -alpha.sin(), 0.0,
            0.0, alpha.sin(), alpha.cos(), 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let expected = rz * tz * tx * rx;
        let out = dh_reference_config(&Pose::identity(), &DhParams { alpha, a, d, theta });
        assert!((out.to_homogeneous() - expected).abs().max() < 1e-15);
    }

    #[test]
    fn panda_screws_match_printed_values() {
        use panda::*;
        let m = builtin_panda();
        let printed = [
            ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            ScrewVector::new(0.0, 1.0, 0.0, -D1, 0.0, 0.0),
            ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            ScrewVector::new(0.0, -1.0, 0.0, D1 + D3, 0.0, -A4),
            ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            ScrewVector::new(0.0, -1.0, 0.0, D1 + D3 + D5, 0.0, 0.0),
            ScrewVector::new(0.0, 0.0, -1.0, 0.0, A7, 0.0),
        ];
        for (j, y) in m.joints().iter().zip(&printed) {
            assert!((j.screw() - y).abs().max() <= 1e-15, "{:?} vs {:?}", j.screw(), y);
        }
    }

    #[test]
    fn panda_reference_poses() {
        let m = builtin_panda();
        let a7 = m.bodies()[6].reference_pose();
        assert!((a7.position - Vector3::new(0.088, 0.0, 1.033)).abs().max() < 1e-15);
        assert_eq!(a7.rotation, Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)));
        let a2 = m.bodies()[1].reference_pose();
        assert_eq!(
            a2.rotation,
            Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0)
        );
        assert!((a2.position - Vector3::new(0.0, 0.0, 0.333)).abs().max() < 1e-15);
        let a4 = m.bodies()[3].reference_pose();
        assert!((a4.position - Vector3::new(0.0825, 0.0, 0.649)).abs().max() < 1e-15);
        assert!(m.has_placeholder_inertia());
    }

    #[test]
    fn body_z_axes_follow_joint_axes() {
        let m = builtin_panda();
        for (j, b) in m.joints().iter().zip(m.bodies()) {
            let z = b.reference_pose().rotation.column(2).into_owned();
            assert!((z - j.axis()).abs().max() < 1e-15);
        }
    }

    #[test]
    fn zero_configuration_leaves_reference_pose() {
        let m = builtin_panda();
        for (j, b) in m.joints().iter().zip(m.bodies()) {
            let c = exp_screw(j.screw(), 0.0).compose(b.reference_pose());
            assert_eq!(c, *b.reference_pose());
        }
    }

    #[test]
    fn mass_matrix_split_round_trip() {
        let com = Vector3::new(0.01, -0.2, 0.05);
        let inertia = Matrix3::new(0.3, 0.01, -0.02, 0.01, 0.25, 0.003, -0.02, 0.003, 0.1);
        let mb = body_mass_matrix(2.7, &com, &inertia);
        let (m, d, th) = split_mass_matrix(&mb);
        assert!((m - 2.7).abs() < 1e-15);
        assert!((d - com).abs().max() < 1e-15);
        assert_eq!(th, inertia);
    }

    #[test]
    fn minimal_single_revolute_file() {
        let text = r#"{
            "joints": [ { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0] } ],
            "bodies": [ { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] } ]
        }"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.dof(), 1);
        assert_eq!(*m.bodies()[0].reference_pose(), Pose::identity());
        assert_eq!(*m.gravity(), Vector3::new(0.0, 0.0, -9.81));
    }

    #[test]
    fn non_unit_axis_in_file_names_joint() {
        let text = r#"{
            "joints": [
                { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0] },
                { "kind": "revolute", "axis": [0, 0.9, 0], "point": [0, 0, 0] }
            ],
            "bodies": [
                { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] },
                { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] }
            ]
        }"#;
        match parse_model(text).unwrap_err() {
            Error::NonUnitAxis { joint, norm } => {
                assert_eq!(joint, 2);
                assert!((norm - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn schema_errors_name_the_offending_entry() {
        let bad_arity = r#"{
            "joints": [ { "kind": "revolute", "axis": [0, 1], "point": [0, 0, 0] } ],
            "bodies": [ { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] } ]
        }"#;
        assert!(matches!(
            parse_model(bad_arity).unwrap_err(),
            Error::InvalidJoint { joint: 1, .. }
        ));
        let missing_mass = r#"{
            "joints": [ { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0] } ],
            "bodies": [ { "inertia": [0.1, 0.1, 0.1, 0, 0, 0] } ]
        }"#;
        assert!(matches!(
            parse_model(missing_mass).unwrap_err(),
            Error::InvalidBody { body: 1, .. }
        ));
        let not_pd = r#"{
            "joints": [ { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0] } ],
            "bodies": [ { "mass": 1.0, "inertia": [0.1, -0.1, 0.1, 0, 0, 0] } ]
        }"#;
        match parse_model(not_pd).unwrap_err() {
            Error::InvalidBody { body: 1, reason } => assert!(reason.contains("positive definite")),
            other => panic!("unexpected error {other}"),
        }
        assert!(matches!(parse_model("{ not json").unwrap_err(), Error::Parse(_)));
    }

    #[test]
    fn dh_form_chains_from_identity() {
        let text = r#"{
            "joints": [
                { "kind": "revolute", "axis": [0, 0, 1], "point": [0, 0, 0] },
                { "kind": "prismatic", "axis": [0, 0, 1] }
            ],
            "bodies": [
                { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] },
                { "mass": 1.0, "inertia": [0.1, 0.1, 0.1, 0, 0, 0] }
            ],
            "dh": [
                { "alpha": 0.0, "a": 0.0, "d": 0.3, "theta": 0.0 },
                { "alpha": 1.5707963267948966, "a": 0.2, "d": 0.0, "theta": 0.0 }
            ]
        }"#;
        let m = parse_model(text).unwrap();
        let a1 = dh_reference_config(&Pose::identity(), &DhParams { alpha: 0.0, a: 0.0, d: 0.3, theta: 0.0 });
        let a2 = dh_reference_config(&a1, &DhParams { alpha: FRAC_PI_2, a: 0.2, d: 0.0, theta: 0.0 });
        assert_eq!(*m.bodies()[0].reference_pose(), a1);
        assert_eq!(*m.bodies()[1].reference_pose(), a2);
    }

    #[test]
    fn json_round_trip_preserves_model() {
        let m = builtin_panda();
        let back = parse_model(&model_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn body_fixed_screws_are_constant_reference_screws() {
        let m = builtin_panda();
        for ((x, j), b) in m.body_fixed_screws().iter().zip(m.joints()).zip(m.bodies()) {
            let back = crate::screw::adjoint_apply(b.reference_pose(), x);
            assert!((back - j.screw()).abs().max() < 1e-15);
        }
    }
}
