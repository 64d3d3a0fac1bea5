//! Invariant suite: each check returns a residual that is compared against a
//! tolerance. Used by the command line `verify` and by the test suites.

use std::fmt;

use nalgebra::{DVector, Matrix6, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bodyfixed::inverse_dynamics_bodyfixed_1;
use crate::dynamics::{inverse_dynamics_2, AppliedLoads2, GravityMode};
use crate::error::Result;
use crate::kinematics::{forward_kinematics_4, JointState4};
use crate::model::RobotModel;
use crate::oracle::{
    central_derivative, kinetic_energy, mass_matrix_via_id, matrix_asymmetry, min_eigenvalue,
    FdScheme,
};
use crate::screw::{
    ad_matrix, adjoint_inverse_of, adjoint_of, exp_screw, screw, screw_commutator,
    spatial_inertia_unchecked, Pose, ScrewVector,
};
use crate::trajectory::SineTrajectory;

/// Running `max ‖a − b‖∞ / max ‖a‖∞` over a set of samples.
#[derive(Clone, Copy, Debug, Default)]
pub struct RelativeError {
    diff: f64,
    scale: f64,
}

impl RelativeError {
    pub fn add<const R: usize, const C: usize>(
        &mut self,
        analytic: &nalgebra::SMatrix<f64, R, C>,
        estimate: &nalgebra::SMatrix<f64, R, C>,
    ) {
        self.diff = self.diff.max((analytic - estimate).amax());
        self.scale = self.scale.max(analytic.amax());
    }

    pub fn add_dyn(&mut self, analytic: &DVector<f64>, estimate: &DVector<f64>) {
        self.diff = self.diff.max((analytic - estimate).amax());
        self.scale = self.scale.max(analytic.amax());
    }

    pub fn value(&self) -> f64 {
        if self.scale == 0.0 {
            self.diff
        } else {
            self.diff / self.scale
        }
    }

    pub fn merge(self, other: RelativeError) -> RelativeError {
        RelativeError {
            diff: self.diff.max(other.diff),
            scale: self.scale.max(other.scale),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Passes when the value is below the bound.
    Upper,
    /// Passes when the value is above the bound.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
}

impl CheckResult {
    /// A residual that must stay below `tolerance`.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: residual,
            bound: tolerance,
            kind: Bound::Upper,
        }
    }

    /// A quantity that must exceed `bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            kind: Bound::Lower,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_finite()
            && match self.kind {
                Bound::Upper => self.value < self.bound,
                Bound::Lower => self.value > self.bound,
            }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (label, rel) = match self.kind {
            Bound::Upper => ("residual", "<"),
            Bound::Lower => ("value   ", ">"),
        };
        write!(
            f,
            "{} {:<36} {label} {:.3e} (required {rel} {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.bound
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// A pseudo-random pose with rotation angle up to π and translation in a unit cube.
pub fn random_pose(rng: &mut impl Rng) -> Pose {
    let axis = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let axis = if axis.norm() < 1e-3 { Vector3::z() } else { axis.normalize() };
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let rot = exp_screw(&screw(axis, Vector3::zeros()), angle).rotation;
    let pos = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    Pose::new(rot, pos)
}

pub fn random_screw(rng: &mut impl Rng) -> ScrewVector {
    ScrewVector::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GroupLawResiduals {
    /// `Ad(C₁C₂) − Ad(C₁)Ad(C₂)`.
    pub homomorphism: f64,
    /// `Ad(C⁻¹) − Ad(C)⁻¹`, checked as `Ad(C⁻¹)Ad(C) − I`.
    pub inverse: f64,
    /// `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]`.
    pub jacobi: f64,
    /// `Ad(C) ad(X) Ad(C)⁻¹ − ad(Ad(C)X)`.
    pub adjoint_equivariance: f64,
}

impl GroupLawResiduals {
    pub fn max(&self) -> f64 {
        self.homomorphism
            .max(self.inverse)
            .max(self.jacobi)
            .max(self.adjoint_equivariance)
    }
}

pub fn group_law_residuals(pairs: usize, seed: u64) -> GroupLawResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = GroupLawResiduals::default();
    for _ in 0..pairs {
        let c1 = random_pose(&mut rng);
        let c2 = random_pose(&mut rng);
        let (x, y, z) = (random_screw(&mut rng), random_screw(&mut rng), random_screw(&mut rng));

        let hom = adjoint_of(&(c1 * c2)) - adjoint_of(&c1) * adjoint_of(&c2);
        r.homomorphism = r.homomorphism.max(hom.amax());
        let inv = adjoint_of(&c1.inverse()) * adjoint_of(&c1) - Matrix6::identity();
        r.inverse = r.inverse.max(inv.amax());
        let jac = screw_commutator(&x, &screw_commutator(&y, &z))
            + screw_commutator(&y, &screw_commutator(&z, &x))
            + screw_commutator(&z, &screw_commutator(&x, &y));
        r.jacobi = r.jacobi.max(jac.amax());
        let eq = adjoint_of(&c1) * ad_matrix(&x) * adjoint_inverse_of(&c1)
            - ad_matrix(&(adjoint_of(&c1) * x));
        r.adjoint_equivariance = r.adjoint_equivariance.max(eq.amax());
    }
    r
}

fn sample_times(samples: usize, duration: f64) -> impl Iterator<Item = f64> {
    let dt = if samples > 1 { duration / (samples - 1) as f64 } else { 0.0 };
    (0..samples).map(move |k| k as f64 * dt)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub samples: usize,
    pub duration: f64,
    pub scheme: FdScheme,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            samples: 200,
            duration: 2.0,
            scheme: FdScheme::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeIdentityResiduals {
    /// `d/dt Ad(C) = ad(V) Ad(C)`.
    pub adjoint: f64,
    /// `d/dt Ad(C⁻¹) = −Ad(C⁻¹) ad(V)`.
    pub adjoint_inverse: f64,
    /// `d/dt Mˢ = −ad(V)ᵀMˢ − Mˢ ad(V)`.
    pub spatial_inertia: f64,
}

impl DerivativeIdentityResiduals {
    pub fn max(&self) -> f64 {
        self.adjoint.max(self.adjoint_inverse).max(self.spatial_inertia)
    }
}

/// Analytic derivatives of `Ad(C)`, `Ad(C⁻¹)` and `Mˢ` for every body along a
/// trajectory against finite differences in time.
pub fn derivative_identity_residuals(
    model: &RobotModel,
    cfg: &TrajectoryConfig,
) -> Result<DerivativeIdentityResiduals> {
    let traj = SineTrajectory::seeded(model.dof(), cfg.seed);
    let (mut ad, mut adi, mut ms) = (RelativeError::default(), RelativeError::default(), RelativeError::default());
    let kin = |t: f64| forward_kinematics_4(model, &traj.state(t), false);
    for t in sample_times(cfg.samples, cfg.duration) {
        let bk = kin(t)?;
        for (i, b) in bk.bodies.iter().enumerate() {
            let mb = model.bodies()[i].mass_matrix();
            let pose_at = |t: f64| kin(t).map(|bk| bk.bodies[i].c).expect("valid state");
            let a = adjoint_of(&b.c);
            let ai = adjoint_inverse_of(&b.c);
            let m = spatial_inertia_unchecked(mb, &b.c);
            let adv = ad_matrix(&b.v);

            let fd_a: Matrix6<f64> = central_derivative(|t| adjoint_of(&pose_at(t)), t, &cfg.scheme);
            let fd_ai: Matrix6<f64> = central_derivative(|t| adjoint_inverse_of(&pose_at(t)), t, &cfg.scheme);
            let fd_m: Matrix6<f64> =
                central_derivative(|t| spatial_inertia_unchecked(mb, &pose_at(t)), t, &cfg.scheme);
            ad.add(&(adv * a), &fd_a);
            adi.add(&(-ai * adv), &fd_ai);
            ms.add(&(-adv.transpose() * m - m * adv), &fd_m);
        }
    }
    Ok(DerivativeIdentityResiduals {
        adjoint: ad.value(),
        adjoint_inverse: adi.value(),
        spatial_inertia: ms.value(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KinematicResiduals {
    pub sd: f64,
    pub sdd: f64,
    pub sddd: f64,
    pub vd: f64,
    pub vdd: f64,
    pub vddd: f64,
}

impl KinematicResiduals {
    pub fn max(&self) -> f64 {
        [self.sd, self.sdd, self.sddd, self.vd, self.vdd, self.vddd]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Screw and twist derivatives from the forward pass against finite
/// differences of the next lower order.
pub fn kinematic_residuals(model: &RobotModel, cfg: &TrajectoryConfig) -> Result<KinematicResiduals> {
    let traj = SineTrajectory::seeded(model.dof(), cfg.seed);
    let kin = |t: f64| forward_kinematics_4(model, &traj.state(t), false).expect("valid state");
    let mut e = [RelativeError::default(); 6];
    for t in sample_times(cfg.samples, cfg.duration) {
        let bk = forward_kinematics_4(model, &traj.state(t), false)?;
        let stencil: Vec<_> = [-2.0, -1.0, 1.0, 2.0]
            .iter()
            .map(|o| (o * cfg.scheme.step, kin(t + o * cfg.scheme.step)))
            .collect();
        let at = |dt: f64| {
            &stencil
                .iter()
                .find(|(o, _)| (*o - dt).abs() < 1e-3 * cfg.scheme.step)
                .expect("stencil point")
                .1
        };
        for (i, b) in bk.bodies.iter().enumerate() {
            let pick = |f: fn(&crate::kinematics::BodyState4) -> ScrewVector| {
                central_derivative(|tt| f(&at(tt - t).bodies[i]), t, &cfg.scheme)
            };
            e[0].add(&b.sd, &pick(|b| b.s));
            e[1].add(&b.sdd, &pick(|b| b.sd));
            e[2].add(&b.sddd, &pick(|b| b.sdd));
            e[3].add(&b.vd, &pick(|b| b.v));
            e[4].add(&b.vdd, &pick(|b| b.vd));
            e[5].add(&b.vddd, &pick(|b| b.vdd));
        }
    }
    Ok(KinematicResiduals {
        sd: e[0].value(),
        sdd: e[1].value(),
        sddd: e[2].value(),
        vd: e[3].value(),
        vdd: e[4].value(),
        vddd: e[5].value(),
    })
}

/// Joint force derivatives against finite differences of the next lower order.
pub fn joint_force_fd_residuals(
    model: &RobotModel,
    cfg: &TrajectoryConfig,
    gravity: GravityMode,
) -> Result<(f64, f64)> {
    let traj = SineTrajectory::seeded(model.dof(), cfg.seed);
    let loads = AppliedLoads2::zeros(model.dof());
    let id = |t: f64| {
        let bk = forward_kinematics_4(model, &traj.state(t), gravity.needs_trick()).expect("valid state");
        inverse_dynamics_2(model, &bk, &loads, gravity).expect("valid dynamics")
    };
    let (mut e1, mut e2) = (RelativeError::default(), RelativeError::default());
    for t in sample_times(cfg.samples, cfg.duration) {
        let dr = id(t);
        let fd_q: DVector<f64> = central_derivative(|t| id(t).q, t, &cfg.scheme);
        let fd_qd: DVector<f64> = central_derivative(|t| id(t).qd, t, &cfg.scheme);
        e1.add_dyn(&dr.qd, &fd_q);
        e2.add_dyn(&dr.qdd, &fd_qd);
    }
    Ok((e1.value(), e2.value()))
}

/// Largest absolute deviation of `Q`, `Q̇` between the spatial and the
/// body-fixed recursion over random states with gravity.
pub fn representation_residual(model: &RobotModel, states: usize, seed: u64) -> Result<f64> {
    let n = model.dof();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loads = AppliedLoads2::zeros(n);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let js = random_state(n, &mut rng);
        let bk = forward_kinematics_4(model, &js, true)?;
        let s = inverse_dynamics_2(model, &bk, &loads, GravityMode::Trick)?;
        let b = inverse_dynamics_bodyfixed_1(model, &js, &loads, true)?;
        worst = worst.max((s.q - b.q).amax()).max((s.qd - b.qd).amax());
    }
    Ok(worst)
}

/// Largest absolute deviation of `Q`, `Q̇`, `Q̈` between gravity through the
/// ground acceleration and explicit gravity wrenches.
pub fn gravity_mode_residual(model: &RobotModel, states: usize, seed: u64) -> Result<f64> {
    let n = model.dof();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loads = AppliedLoads2::zeros(n);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let js = random_state(n, &mut rng);
        let trick = inverse_dynamics_2(model, &forward_kinematics_4(model, &js, true)?, &loads, GravityMode::Trick)?;
        let expl = inverse_dynamics_2(
            model,
            &forward_kinematics_4(model, &js, false)?,
            &loads,
            GravityMode::Explicit,
        )?;
        worst = worst
            .max((trick.q - expl.q).amax())
            .max((trick.qd - expl.qd).amax())
            .max((trick.qdd - expl.qdd).amax());
    }
    Ok(worst)
}

/// Joint state with positions in [−π, π] and derivatives in [−2, 2].
pub fn random_state(n: usize, rng: &mut impl Rng) -> JointState4 {
    let mut v = |scale: f64| DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale));
    JointState4 {
        q: v(std::f64::consts::PI),
        qd: v(2.0),
        qdd: v(2.0),
        qddd: v(2.0),
        qdddd: v(2.0),
    }
}

/// Worst `|Σ Qq̇ − Ṫ| / max(1, |Ṫ|)` along a trajectory without gravity.
pub fn power_balance_worst(model: &RobotModel, cfg: &TrajectoryConfig) -> Result<f64> {
    let traj = SineTrajectory::seeded(model.dof(), cfg.seed);
    let loads = AppliedLoads2::zeros(model.dof());
    let energy = |t: f64| kinetic_energy(model, &forward_kinematics_4(model, &traj.state(t), false).expect("valid state"));
    let mut worst = 0.0f64;
    for t in sample_times(cfg.samples, cfg.duration) {
        let bk = forward_kinematics_4(model, &traj.state(t), false)?;
        let dr = inverse_dynamics_2(model, &bk, &loads, GravityMode::None)?;
        let tdot: f64 = central_derivative(energy, t, &cfg.scheme);
        let r = crate::oracle::power_balance_residual(model, &bk, &dr, tdot);
        worst = worst.max(r / tdot.abs().max(1.0));
    }
    Ok(worst)
}

/// Worst asymmetry and smallest eigenvalue of the mass matrix over random configurations.
pub fn mass_matrix_properties(model: &RobotModel, configs: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut asym = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for k in 0..configs {
        let q = if k == 0 {
            DVector::zeros(model.dof())
        } else {
            random_state(model.dof(), &mut rng).q
        };
        let m = mass_matrix_via_id(model, &q)?;
        asym = asym.max(matrix_asymmetry(&m));
        min_eig = min_eig.min(min_eigenvalue(&m));
    }
    Ok((asym, min_eig))
}

/// Runs the invariant suite on `model`.
pub fn run_suite(model: &RobotModel, cfg: &TrajectoryConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let g = group_law_residuals(1000, cfg.seed);
    checks.push(CheckResult::new("group: adjoint homomorphism", g.homomorphism, 1e-11));
    checks.push(CheckResult::new("group: adjoint inverse", g.inverse, 1e-11));
    checks.push(CheckResult::new("group: jacobi identity", g.jacobi, 1e-11));
    checks.push(CheckResult::new("group: adjoint equivariance", g.adjoint_equivariance, 1e-11));

    let d = derivative_identity_residuals(model, cfg)?;
    checks.push(CheckResult::new("fd: adjoint derivative", d.adjoint, 1e-6));
    checks.push(CheckResult::new("fd: inverse adjoint derivative", d.adjoint_inverse, 1e-6));
    checks.push(CheckResult::new("fd: spatial inertia derivative", d.spatial_inertia, 1e-6));

    let k = kinematic_residuals(model, cfg)?;
    for (name, r) in [
        ("fd: screw rate", k.sd),
        ("fd: screw acceleration", k.sdd),
        ("fd: screw jerk", k.sddd),
        ("fd: twist rate", k.vd),
        ("fd: twist acceleration", k.vdd),
        ("fd: twist jerk", k.vddd),
    ] {
        checks.push(CheckResult::new(name, r, 1e-5));
    }

    let (qd, qdd) = joint_force_fd_residuals(model, cfg, GravityMode::Trick)?;
    checks.push(CheckResult::new("fd: joint force rate", qd, 1e-5));
    checks.push(CheckResult::new("fd: joint force acceleration", qdd, 1e-5));

    checks.push(CheckResult::new(
        "spatial vs body-fixed Q, Q̇",
        representation_residual(model, cfg.samples, cfg.seed)?,
        1e-10,
    ));
    checks.push(CheckResult::new(
        "gravity trick vs explicit",
        gravity_mode_residual(model, cfg.samples, cfg.seed)?,
        1e-10,
    ));
    checks.push(CheckResult::new("power balance", power_balance_worst(model, cfg)?, 1e-6));

    let (asym, min_eig) = mass_matrix_properties(model, 20, cfg.seed)?;
    checks.push(CheckResult::new("mass matrix asymmetry", asym, 1e-10));
    checks.push(CheckResult::above("mass matrix smallest eigenvalue", min_eig, 0.0));
    Ok(VerifyReport { checks })
}
