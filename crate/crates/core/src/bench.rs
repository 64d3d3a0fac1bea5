//! Timing of the spatial and body-fixed recursions and of runtime growth with
//! chain length.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use crate::bodyfixed::inverse_dynamics_bodyfixed_1;
use crate::dynamics::{inverse_dynamics_2, AppliedLoads2, GravityMode};
use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics_4, JointState4};
use crate::model::{uniform_chain, RobotModel};
use crate::trajectory::SineTrajectory;

pub const SWEEP_SIZES: [usize; 6] = [2, 4, 8, 16, 32, 64];

const BATCHES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    /// Mean seconds per call over all batches.
    pub mean: f64,
    /// Smallest batch mean, seconds per call.
    pub min: f64,
}

impl Timing {
    fn measure(repeats: usize, mut call: impl FnMut()) -> Self {
        // warm-up
        for _ in 0..repeats.min(100) {
            call();
        }
        let mut total = 0.0;
        let mut min = f64::INFINITY;
        for _ in 0..BATCHES {
            let start = Instant::now();
            for _ in 0..repeats {
                call();
            }
            let per_call = start.elapsed().as_secs_f64() / repeats as f64;
            total += per_call;
            min = min.min(per_call);
        }
        Self {
            mean: total / BATCHES as f64,
            min,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub dof: usize,
    pub repeats: usize,
    /// Forward pass through jounce plus the second-order backward pass.
    pub spatial: Timing,
    /// Body-fixed recursion for `Q`, `Q̇`.
    pub bodyfixed: Timing,
}

impl BenchReport {
    /// Body-fixed over spatial time per call (minimum batch means).
    pub fn ratio(&self) -> f64 {
        self.bodyfixed.min / self.spatial.min
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, repeats = {} x {BATCHES} batches", self.dof, self.repeats)?;
        writeln!(
            f,
            "spatial   (Q, Q̇, Q̈): mean {:>10.3} µs  min {:>10.3} µs",
            self.spatial.mean * 1e6,
            self.spatial.min * 1e6
        )?;
        writeln!(
            f,
            "bodyfixed (Q, Q̇):    mean {:>10.3} µs  min {:>10.3} µs",
            self.bodyfixed.mean * 1e6,
            self.bodyfixed.min * 1e6
        )?;
        write!(f, "bodyfixed / spatial: {:.3}", self.ratio())
    }
}

fn check_repeats(repeats: usize) -> Result<()> {
    if repeats == 0 {
        return Err(Error::Schema("repeats must be at least 1".into()));
    }
    Ok(())
}

fn bench_state(n: usize) -> JointState4 {
    SineTrajectory::seeded(n, 7).state(0.3)
}

/// Times one spatial evaluation, with gravity through the ground acceleration.
pub fn time_spatial(model: &RobotModel, js: &JointState4, repeats: usize) -> Result<Timing> {
    check_repeats(repeats)?;
    let loads = AppliedLoads2::zeros(model.dof());
    // validate once so the timed loop can unwrap
    inverse_dynamics_2(model, &forward_kinematics_4(model, js, true)?, &loads, GravityMode::Trick)?;
    Ok(Timing::measure(repeats, || {
        let bk = forward_kinematics_4(black_box(model), black_box(js), true).unwrap();
        black_box(inverse_dynamics_2(model, &bk, &loads, GravityMode::Trick).unwrap());
    }))
}

pub fn time_bodyfixed(model: &RobotModel, js: &JointState4, repeats: usize) -> Result<Timing> {
    check_repeats(repeats)?;
    let loads = AppliedLoads2::zeros(model.dof());
    inverse_dynamics_bodyfixed_1(model, js, &loads, true)?;
    Ok(Timing::measure(repeats, || {
        black_box(inverse_dynamics_bodyfixed_1(black_box(model), black_box(js), &loads, true).unwrap());
    }))
}

/// Times both representations on the same model and state.
pub fn compare(model: &RobotModel, repeats: usize) -> Result<BenchReport> {
    check_repeats(repeats)?;
    let js = bench_state(model.dof());
    Ok(BenchReport {
        dof: model.dof(),
        repeats,
        spatial: time_spatial(model, &js, repeats)?,
        bodyfixed: time_bodyfixed(model, &js, repeats)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    /// `(n, seconds per call)` of the spatial pipeline.
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `ln t` against `ln n`.
    pub slope: f64,
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in &self.points {
            writeln!(f, "n = {n:>3}: {:>10.3} µs", t * 1e6)?;
        }
        write!(f, "log-log slope: {:.3}", self.slope)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Rounds of the scaling sweep; every round times every size once.
const SWEEP_ROUNDS: usize = 15;

/// Runtime of the spatial pipeline on uniform chains of the given sizes.
///
/// `budget` is the number of joint evaluations per batch; each size runs
/// `budget / n` calls so all sizes take comparable wall time. Sizes are
/// interleaved over several rounds and the fastest batch per size is kept,
/// so a burst of machine load cannot bias a single size.
pub fn scaling_sweep(sizes: &[usize], budget: usize) -> Result<ScalingReport> {
    check_repeats(budget)?;
    if sizes.len() < 2 {
        return Err(Error::Schema("scaling sweep needs at least two sizes".into()));
    }
    let cases: Vec<_> = sizes
        .iter()
        .map(|&n| {
            let model = uniform_chain(n, 0.3);
            let js = bench_state(n);
            let loads = AppliedLoads2::zeros(n);
            inverse_dynamics_2(&model, &forward_kinematics_4(&model, &js, true)?, &loads, GravityMode::Trick)?;
            Ok((n, model, js, loads))
        })
        .collect::<Result<_>>()?;
    let mut best = vec![f64::INFINITY; cases.len()];
    for _ in 0..SWEEP_ROUNDS {
        for (k, (n, model, js, loads)) in cases.iter().enumerate() {
            let calls = (budget / n).max(1);
            let start = Instant::now();
            for _ in 0..calls {
                let bk = forward_kinematics_4(black_box(model), black_box(js), true).unwrap();
                black_box(inverse_dynamics_2(model, &bk, loads, GravityMode::Trick).unwrap());
            }
            best[k] = best[k].min(start.elapsed().as_secs_f64() / calls as f64);
        }
    }
    let points: Vec<(usize, f64)> = sizes.iter().copied().zip(best).collect();
    let lx: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, t)| t.ln()).collect();
    Ok(ScalingReport {
        slope: fit_slope(&lx, &ly),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_panda;

    #[test]
    fn zero_repeats_is_rejected() {
        assert!(compare(&builtin_panda(), 0).is_err());
        assert!(scaling_sweep(&SWEEP_SIZES, 0).is_err());
    }

    #[test]
    fn report_has_both_timings() {
        let r = compare(&builtin_panda(), 3).unwrap();
        assert!(r.spatial.min > 0.0 && r.bodyfixed.min > 0.0);
        assert!(r.spatial.min <= r.spatial.mean);
        assert!(r.to_string().contains("bodyfixed / spatial"));
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [3.0f64, 12.0, 48.0].iter().map(|v| v.ln()).collect();
        assert!((fit_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
