//! SE(3) and se(3) primitives in the (angular, linear) ordering.
//!
//! Twists are screw coordinate vectors in ray coordinates `(ω, v)`, wrenches
//! are co-screws in axis coordinates `(m, f)`. Both are stored as plain
//! `Vector6<f64>`; the type aliases only document intent. All 6×6 operators
//! are dense.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};

/// Screw coordinate vector `(angular, linear)`: twists and joint screws.
pub type ScrewVector = Vector6<f64>;

/// Co-screw coordinate vector `(moment, force)`: wrenches and momenta.
pub type WrenchVector = Vector6<f64>;

/// Adjoint transformation `[[R, 0], [r̃R, R]]`.
pub type AdjointMatrix = Matrix6<f64>;

/// Screw product matrix `[[ξ̃, 0], [η̃, ξ̃]]`.
pub type AdMatrix = Matrix6<f64>;

/// 6×6 rigid-body mass matrix, body-fixed or spatial.
pub type InertiaMatrix = Matrix6<f64>;

/// Below this rotation angle the exponential switches to series expansions.
const EXP_SERIES_THRESHOLD: f64 = 1e-8;

/// Maximum entry-wise asymmetry accepted for a mass matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub fn screw(angular: Vector3<f64>, linear: Vector3<f64>) -> ScrewVector {
    Vector6::new(
        angular.x, angular.y, angular.z, linear.x, linear.y, linear.z,
    )
}

pub fn angular(x: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

pub fn linear(x: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(x[3], x[4], x[5])
}

/// Cross-product matrix, `skew(a) * b == a × b`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rigid-body pose: an element of SE(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub position: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, position: Vector3<f64>) -> Self {
        Self { rotation, position }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            position: Vector3::zeros(),
        }
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            position,
        }
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Self {
        Self {
            rotation,
            position: Vector3::zeros(),
        }
    }

    /// Builds a pose from a homogeneous matrix; the bottom row is ignored.
    pub fn from_homogeneous(m: &Matrix4<f64>) -> Self {
        Self {
            rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
            position: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            position: -(rt * self.position),
        }
    }

    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            position: self.rotation * other.position + self.position,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.position
    }

    /// Largest entry of `|RᵀR − I|` and `|det R − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let gram_err = gram.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        gram_err.max((self.rotation.determinant() - 1.0).abs())
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.rotation.iter().all(|x| x.is_finite())
            && self.position.iter().all(|x| x.is_finite())
            && self.orthonormality_error() <= tol
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Exponential of the screw `Y` scaled by the joint variable `q`.
///
/// Rodrigues formula for the rotation and the usual left-Jacobian for the
/// translation. Handles arbitrary `Y`, including pure translations
/// (`angular = 0`).
pub fn exp_screw(y: &ScrewVector, q: f64) -> Pose {
    let phi = angular(y) * q;
    let rho = linear(y) * q;
    let theta = phi.norm();
    let k = skew(&phi);
    let k2 = k * k;

    let (a, b, c) = if theta < EXP_SERIES_THRESHOLD {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
    } else {
        let (s, co) = theta.sin_cos();
        let t2 = theta * theta;
        (s / theta, (1.0 - co) / t2, (theta - s) / (t2 * theta))
    };

    let rotation = Matrix3::identity() + k * a + k2 * b;
    let left_jacobian = Matrix3::identity() + k * b + k2 * c;
    Pose {
        rotation,
        position: left_jacobian * rho,
    }
}

pub fn adjoint_of(c: &Pose) -> AdjointMatrix {
    let r = &c.rotation;
    let mut ad = Matrix6::zeros();
    ad.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    ad.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    ad.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(skew(&c.position) * r));
    ad
}

/// `Ad(C)⁻¹ = Ad(C⁻¹)` without a 6×6 inversion.
pub fn adjoint_inverse_of(c: &Pose) -> AdjointMatrix {
    adjoint_of(&c.inverse())
}

/// Applies `Ad(C)` to a screw using 3×3 blocks only.
pub fn adjoint_apply(c: &Pose, x: &ScrewVector) -> ScrewVector {
    let w = c.rotation * angular(x);
    let v = c.rotation * linear(x) + c.position.cross(&w);
    screw(w, v)
}

/// Lie bracket `[X1, X2] = (ξ₁×ξ₂, η₁×ξ₂ + ξ₁×η₂)`.
pub fn screw_commutator(x1: &ScrewVector, x2: &ScrewVector) -> ScrewVector {
    let (xi1, eta1) = (angular(x1), linear(x1));
    let (xi2, eta2) = (angular(x2), linear(x2));
    screw(xi1.cross(&xi2), eta1.cross(&xi2) + xi1.cross(&eta2))
}

/// `ad(X)ᵀ W` for a screw `X = (ξ, η)` and a co-screw `W = (m, f)`.
pub fn ad_transpose_apply(x: &ScrewVector, w: &WrenchVector) -> WrenchVector {
    let (xi, eta) = (angular(x), linear(x));
    let (m, f) = (angular(w), linear(w));
    screw(m.cross(&xi) + f.cross(&eta), f.cross(&xi))
}

pub fn ad_matrix(x: &ScrewVector) -> AdMatrix {
    let xi = skew(&angular(x));
    let eta = skew(&linear(x));
    let mut ad = Matrix6::zeros();
    ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&xi);
    ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&xi);
    ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&eta);
    ad
}

/// Largest entry of `|M − Mᵀ|`.
pub fn asymmetry(m: &Matrix6<f64>) -> f64 {
    (m - m.transpose())
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `Mˢ = Ad(C)⁻ᵀ Mᵇ Ad(C)⁻¹`.
pub fn spatial_inertia_transform(mb: &InertiaMatrix, c: &Pose) -> Result<InertiaMatrix> {
    let asym = asymmetry(mb);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NonSymmetricInertia { asymmetry: asym });
    }
    Ok(spatial_inertia_unchecked(mb, c))
}

/// Same as [`spatial_inertia_transform`] for inertias already known to be
/// symmetric (model bodies are validated at load time).
pub(crate) fn spatial_inertia_unchecked(mb: &InertiaMatrix, c: &Pose) -> InertiaMatrix {
    let ad_inv = adjoint_inverse_of(c);
    let ms = ad_inv.transpose() * mb * ad_inv;
    // re-symmetrize against roundoff in the triple product
    (ms + ms.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn max_abs<const R: usize, const C: usize>(
        m: &nalgebra::SMatrix<f64, R, C>,
    ) -> f64 {
        m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    fn sample_pose(a: f64) -> Pose {
        let y = ScrewVector::new(0.3, -0.5, 0.81, 0.2, 0.7, -0.4);
        exp_screw(&y, a)
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let y = ScrewVector::new(0.2, 0.4, -0.1, 1.0, 2.0, 3.0);
        let p = exp_screw(&y, 0.0);
        assert_eq!(p, Pose::identity());
    }

    #[test]
    fn exp_of_z_rotation_quarter_turn() {
        let y = ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        let p = exp_screw(&y, FRAC_PI_2);
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(max_abs(&(p.rotation - expected)) < 1e-15);
        assert!(max_abs(&p.position) < 1e-15);
    }

    #[test]
    fn exp_of_prismatic_is_translation() {
        let y = ScrewVector::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let p = exp_screw(&y, 0.5);
        assert_eq!(p.rotation, Matrix3::identity());
        assert_eq!(p.position, Vector3::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn exp_of_revolute_keeps_axis_point_fixed() {
        let e = Vector3::new(0.0, 1.0, 0.0);
        let point = Vector3::new(0.3, -0.2, 0.9);
        let y = screw(e, point.cross(&e));
        let p = exp_screw(&y, 1.1);
        assert!(max_abs(&(p.transform_point(&point) - point)) < 1e-15);
    }

    #[test]
    fn exp_series_branch_matches_closed_form_near_threshold() {
        let y = ScrewVector::new(0.6, 0.0, 0.8, 0.1, -0.3, 0.2);
        for q in [0.99e-8, 1.01e-8] {
            let p = exp_screw(&y, q);
            let k = skew(&(angular(&y) * q));
            let rho = linear(&y) * q;
            let rot = Matrix3::identity() + k + k * k * 0.5;
            let pos = rho + k * rho * 0.5;
            assert!(max_abs(&(p.rotation - rot)) < 1e-15);
            assert!(max_abs(&(p.position - pos)) < 1e-15);
        }
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        assert_eq!(adjoint_of(&Pose::identity()), Matrix6::identity());
    }

    #[test]
    fn adjoint_of_pure_translation() {
        let r = Vector3::new(1.0, 2.0, 3.0);
        let ad = adjoint_of(&Pose::from_translation(r));
        let mut expected = Matrix6::identity();
        expected.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&r));
        assert_eq!(ad, expected);
    }

    #[test]
    fn adjoint_block_structure() {
        let ad = adjoint_of(&sample_pose(0.7));
        assert_eq!(ad.fixed_view::<3, 3>(0, 3).into_owned(), Matrix3::zeros());
        assert_eq!(
            ad.fixed_view::<3, 3>(0, 0).into_owned(),
            ad.fixed_view::<3, 3>(3, 3).into_owned()
        );
    }

    #[test]
    fn adjoint_apply_matches_matrix() {
        let c = sample_pose(1.3);
        let x = ScrewVector::new(0.1, -0.2, 0.3, 1.0, 0.5, -0.7);
        assert!(max_abs(&(adjoint_apply(&c, &x) - adjoint_of(&c) * x)) < 1e-15);
    }

    #[test]
    fn commutator_of_unit_axes() {
        let x = ScrewVector::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let y = ScrewVector::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            screw_commutator(&x, &y),
            ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let x = ScrewVector::new(0.4, -1.2, 0.3, 2.0, 0.1, -0.6);
        assert_eq!(screw_commutator(&x, &x), ScrewVector::zeros());
    }

    #[test]
    fn ad_matrix_of_zero_and_pure_rotation() {
        assert_eq!(ad_matrix(&ScrewVector::zeros()), Matrix6::zeros());
        let ad = ad_matrix(&ScrewVector::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        let kz = skew(&Vector3::z());
        assert_eq!(ad.fixed_view::<3, 3>(0, 0).into_owned(), kz);
        assert_eq!(ad.fixed_view::<3, 3>(3, 3).into_owned(), kz);
        assert_eq!(ad.fixed_view::<3, 3>(3, 0).into_owned(), Matrix3::zeros());
        assert_eq!(ad.fixed_view::<3, 3>(0, 3).into_owned(), Matrix3::zeros());
    }

    #[test]
    fn ad_transpose_apply_matches_matrix() {
        let x = ScrewVector::new(0.4, -1.2, 0.3, 2.0, 0.1, -0.6);
        let w = WrenchVector::new(1.0, 0.5, -0.25, 3.0, -2.0, 0.75);
        let dense = ad_matrix(&x).transpose() * w;
        assert!(max_abs(&(ad_transpose_apply(&x, &w) - dense)) < 1e-14);
    }

    #[test]
    fn spatial_inertia_identity_pose_is_noop() {
        let mut mb = Matrix6::identity() * 2.0;
        mb[(0, 1)] = 0.1;
        mb[(1, 0)] = 0.1;
        let ms = spatial_inertia_transform(&mb, &Pose::identity()).unwrap();
        assert!(max_abs(&(ms - mb)) < 1e-15);
    }

    #[test]
    fn spatial_inertia_round_trip() {
        let mut mb = Matrix6::zeros();
        mb.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&Matrix3::new(0.3, 0.01, 0.0, 0.01, 0.2, 0.02, 0.0, 0.02, 0.1));
        let d = Vector3::new(0.1, -0.05, 0.2);
        let m = 2.5;
        mb.fixed_view_mut::<3, 3>(0, 3).copy_from(&(skew(&d) * m));
        mb.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-skew(&d) * m));
        mb.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * m));
        let c = sample_pose(0.9);
        let ms = spatial_inertia_transform(&mb, &c).unwrap();
        let back = spatial_inertia_transform(&ms, &c.inverse()).unwrap();
        assert!(max_abs(&(back - mb)) < 1e-12);
        assert!(asymmetry(&ms) < 1e-12);
    }

    #[test]
    fn spatial_inertia_of_translated_point_mass() {
        // Oracle: expand the block product by hand for R = I, d = 0.
        let m = 3.0;
        let r = Vector3::new(0.4, -0.1, 0.25);
        let mut mb = Matrix6::zeros();
        mb.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(Matrix3::identity() * m));
        let ms = spatial_inertia_transform(&mb, &Pose::from_translation(r)).unwrap();
        let rt = skew(&r);
        let theta_s = (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * m;
        assert!(max_abs(&(ms.fixed_view::<3, 3>(0, 0).into_owned() - theta_s)) < 1e-15);
        assert!(max_abs(&(ms.fixed_view::<3, 3>(0, 3).into_owned() - rt * m)) < 1e-15);
        assert!(max_abs(&(ms.fixed_view::<3, 3>(3, 0).into_owned() + rt * m)) < 1e-15);
        assert!(
            max_abs(&(ms.fixed_view::<3, 3>(3, 3).into_owned() - Matrix3::identity() * m))
                < 1e-15
        );
    }

    #[test]
    fn spatial_inertia_rejects_asymmetric_input() {
        let mut mb = Matrix6::identity();
        mb[(0, 4)] = 1e-6;
        let err = spatial_inertia_transform(&mb, &Pose::identity()).unwrap_err();
        assert!(matches!(err, Error::NonSymmetricInertia { .. }));
    }

    #[test]
    fn homogeneous_round_trip() {
        let c = sample_pose(2.1);
        let back = Pose::from_homogeneous(&c.to_homogeneous());
        assert_eq!(back, c);
        assert_relative_eq!(c.orthonormality_error(), 0.0, epsilon = 1e-14);
    }
}
