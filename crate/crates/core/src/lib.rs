//! Recursive O(n) higher-order kinematics and second-order inverse dynamics
//! of serial manipulators using spatial twists.
//!
//! The pipeline is
//!
//! 1. [`kinematics::forward_kinematics_4`] (or
//!    [`kinematics::inverse_kinematics_4`] when the end-effector motion is
//!    prescribed) distributes `q, q̇, q̈, q⃛, q⁗` over the bodies,
//! 2. [`dynamics::inverse_dynamics_2`] runs the backward pass and returns the
//!    joint forces `Q` with their first and second time derivatives.
//!
//! [`bodyfixed`] contains an independent body-fixed recursion for `Q` and `Q̇`
//! used as a cross-check; [`oracle`] holds finite-difference and energy
//! based oracles.

pub mod bench;
pub mod bodyfixed;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod model;
pub mod oracle;
pub mod screw;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
