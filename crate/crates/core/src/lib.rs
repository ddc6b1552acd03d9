//! Entropy-regularized, state-dependent temperature control for Langevin
//! optimization.
//!
//! The crate solves a scalar HJB ODE whose solution induces an optimal
//! temperature *distribution* per state — a truncated exponential on the
//! admissible temperature interval, with rate `v''(x) / lambda` — and runs
//! the resulting Langevin sampler with state-dependent noise against
//! constant-temperature, power-law and replica-exchange baselines on
//! non-convex objectives.
//!
//! Modules:
//! - [`objective`]: 1-D benchmark objectives with gradients.
//! - [`truncexp`]: numerically stable truncated exponential distribution.
//! - [`hjb`]: the implicit-RK4 shooting solver for the HJB ODE.
//! - [`policy`]: temperature policies (schedules and HJB feedback laws).
//! - [`simulate`]: Euler-Maruyama steppers and the Monte Carlo harness.
//! - [`cli`]: configuration, subcommands, CSV and manifest output.

pub mod cli;
pub mod hjb;
pub mod objective;
pub mod policy;
pub mod simulate;
pub mod truncexp;

pub use hjb::{HjbParams, HjbSolution};
pub use objective::{double_well, Objective1D, ObjectiveRegistry};
pub use policy::Policy;
pub use simulate::{IterStats, PolicySpec, RunOutput, SimConfig};
pub use truncexp::{diffusion_coeff, TemperatureRange, TruncExpDist};
