//! Analytic joint trajectories `qᵢ(t) = aᵢ sin(ωᵢ t + φᵢ)`, smooth to all orders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kinematics::JointState4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineJoint {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SineTrajectory {
    joints: Vec<SineJoint>,
}

impl SineTrajectory {
    pub fn new(joints: Vec<SineJoint>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Schema("trajectory needs at least one joint".into()));
        }
        if joints
            .iter()
            .any(|j| !(j.amplitude.is_finite() && j.frequency.is_finite() && j.phase.is_finite()))
        {
            return Err(Error::Schema("trajectory parameters must be finite".into()));
        }
        Ok(Self { joints })
    }

    /// Fixed pseudo-random parameters: amplitudes in [0.3, 1.2] rad,
    /// frequencies in [0.5, 2.5] rad/s, phases in [0, 2π).
    pub fn seeded(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let joints = (0..n)
            .map(|_| SineJoint {
                amplitude: rng.gen_range(0.3..1.2),
                frequency: rng.gen_range(0.5..2.5),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        Self { joints }
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[SineJoint] {
        &self.joints
    }

    /// Position through jounce at time `t`.
    pub fn state(&self, t: f64) -> JointState4 {
        let n = self.joints.len();
        let mut js = JointState4::zeros(n);
        for (i, j) in self.joints.iter().enumerate() {
            let (s, c) = (j.frequency * t + j.phase).sin_cos();
            let (a, w) = (j.amplitude, j.frequency);
            js.q[i] = a * s;
            js.qd[i] = a * w * c;
            js.qdd[i] = -a * w * w * s;
            js.qddd[i] = -a * w * w * w * c;
            js.qdddd[i] = a * w * w * w * w * s;
        }
        js
    }
}
