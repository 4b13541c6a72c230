//! Thermodynamics of open two-level quantum systems on the Bloch sphere.
//!
//! - [`smalg`]: 2×2 and 4×4 complex matrices, Hermitian eigensystems, partial traces.
//! - [`bloch`]: state functions of a qubit (entropy, energy, temperature, heat capacity).
//! - [`ledger`]: heat, work and entropy production accumulated along trajectories.
//! - [`dynamics`]: master-equation generators and an adaptive integrator.
//! - [`cli`]: the scenario runner behind the `bloch-thermo` binary.

pub mod bloch;
pub mod cli;
pub mod dynamics;
pub mod ledger;
pub mod smalg;

pub use bloch::{BlochVector, FieldVector, QubitThermoState, Temperature};
pub use dynamics::{integrate, IntegratorConfig, ModelSpec};
pub use ledger::{accumulate, EnvironmentSpec, Trajectory, TrajectoryPoint};
pub use smalg::ComplexMatrix;
