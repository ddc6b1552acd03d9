//! Temperature policies.
//!
//! A policy maps `(iteration, state, uniform draw)` to a temperature. The
//! deterministic schedules ignore the state and the draw; the HJB-derived
//! policies ignore the iteration; only the sampled relaxed control consumes
//! the uniform draw. Replica exchange is an algorithm rather than a policy
//! and lives in [`crate::simulate`].

use thiserror::Error;

use crate::hjb::HjbSolution;
use crate::truncexp::TruncExpDist;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy `{0}` requires a solved HJB solution")]
    MissingSolution(&'static str),
    #[error("replica-exchange is an algorithm, not a temperature policy")]
    NotATemperaturePolicy,
    #[error("invalid policy parameter: {0}")]
    InvalidParameter(String),
}

/// A temperature policy, borrowing the HJB solution where one is needed.
#[derive(Debug, Clone)]
pub enum Policy<'a> {
    /// Fixed temperature `beta`.
    Constant { beta: f64 },
    /// `beta_k = (d / (1 + k))^b`, with the iteration index starting at 0,
    /// so the first step uses `d^b`.
    PowerLaw { d: f64, b: f64 },
    /// Classical switching policy: the highest temperature where `v'' < 0`,
    /// the lowest otherwise (ties resolve to the lowest).
    BangBang { sol: &'a HjbSolution },
    /// Effective temperature `h(x)^2 / 2` of the averaged-noise dynamics.
    StateDependent { sol: &'a HjbSolution },
    /// Literal relaxed control: draws the temperature from the truncated
    /// exponential law with rate `v''(x) / lambda`. Not part of the headline
    /// benchmark, which uses the averaged coefficient instead.
    SampledRelaxed { sol: &'a HjbSolution },
}

impl<'a> Policy<'a> {
    /// Temperature for step `k` (0-based) at state `x`; `u01` must lie in
    /// `[0, 1)` and is only consumed by [`Policy::SampledRelaxed`].
    pub fn temperature(&self, k: usize, x: f64, u01: f64) -> f64 {
        match self {
            Policy::Constant { beta } => *beta,
            Policy::PowerLaw { d, b } => (d / (1.0 + k as f64)).powf(*b),
            Policy::BangBang { sol } => {
                if sol.eval_vxx(x) < 0.0 {
                    sol.params.range.hi()
                } else {
                    sol.params.range.lo()
                }
            }
            Policy::StateDependent { sol } => sol.temperature(x),
            Policy::SampledRelaxed { sol } => {
                let rate = sol.eval_vxx(x) / sol.params.lambda;
                TruncExpDist::new(rate, sol.params.range).quantile(u01)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Constant { .. } => "constant",
            Policy::PowerLaw { .. } => "power-law",
            Policy::BangBang { .. } => "bang-bang",
            Policy::StateDependent { .. } => "state-dependent",
            Policy::SampledRelaxed { .. } => "sampled-relaxed",
        }
    }
}
