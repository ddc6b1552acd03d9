//! Euler-Maruyama steppers and the Monte Carlo benchmark harness.
//!
//! `run` estimates `E[f(X_k)]` by sample averages over independent
//! replications. Replication `r` draws its Gaussian noise from a
//! counter-based stream keyed by `(seed, r)`, so a replication's trajectory
//! does not depend on how many others run or on scheduling; the recorded
//! statistic at iteration k is `f` of the state *before* step k, so k = 1
//! always reports `f(x0)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::hjb::HjbSolution;
use crate::objective::Objective1D;
use crate::policy::Policy;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("policy `{0}` requires a solved HJB solution")]
    MissingSolution(&'static str),
    #[error("all {0} replications produced non-finite trajectories")]
    AllTrajectoriesExcluded(usize),
}

/// Serializable policy descriptor; the HJB solution itself is supplied
/// separately to [`run`] where one is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Constant { beta: f64 },
    PowerLaw { d: f64, b: f64 },
    BangBang,
    StateDependent,
    SampledRelaxed,
    ReplicaExchange,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Constant { .. } => "constant",
            PolicySpec::PowerLaw { .. } => "power-law",
            PolicySpec::BangBang => "bang-bang",
            PolicySpec::StateDependent => "state-dependent",
            PolicySpec::SampledRelaxed => "sampled-relaxed",
            PolicySpec::ReplicaExchange => "replica-exchange",
        }
    }

    pub fn needs_solution(&self) -> bool {
        matches!(
            self,
            PolicySpec::BangBang | PolicySpec::StateDependent | PolicySpec::SampledRelaxed
        )
    }
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub eta: f64,
    pub n_steps: usize,
    pub n_reps: usize,
    pub x0: f64,
    pub seed: u64,
    pub objective: String,
    pub policy: PolicySpec,
    /// Temperature of the Langevin copy; required for replica exchange only.
    pub replica_gamma: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.n_steps < 1 {
            return bad("n_steps must be at least 1".to_string());
        }
        if self.n_reps < 1 {
            return bad("n_reps must be at least 1".to_string());
        }
        if !self.x0.is_finite() {
            return bad(format!("x0 must be finite, got {}", self.x0));
        }
        match self.policy {
            PolicySpec::Constant { beta } => {
                if !(beta.is_finite() && beta >= 0.0) {
                    return bad(format!("constant temperature must be >= 0, got {beta}"));
                }
            }
            PolicySpec::PowerLaw { d, b } => {
                if !(d.is_finite() && d > 0.0) {
                    return bad(format!("power-law scale d must be positive, got {d}"));
                }
                if !(0.5..=1.0).contains(&b) {
                    return bad(format!("power-law exponent b must lie in [0.5, 1], got {b}"));
                }
            }
            PolicySpec::ReplicaExchange => match self.replica_gamma {
                Some(g) if g.is_finite() && g > 0.0 => {}
                other => {
                    return bad(format!(
                        "replica exchange requires a positive replica_gamma, got {other:?}"
                    ))
                }
            },
            _ => {}
        }
        Ok(())
    }
}

/// Aggregate statistics of `f(X_k)` across replications at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStats {
    pub k: usize,
    pub mean_f: f64,
    pub std_err: f64,
    pub min_f: f64,
    pub max_f: f64,
}

/// Result of a Monte Carlo run: per-iteration statistics plus the number of
/// replications excluded for producing non-finite values.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: Vec<IterStats>,
    pub excluded: usize,
}

/// One Langevin iterate with state-dependent noise scale `h`:
/// `x - eta * grad + sqrt(eta) * h * xi`.
#[inline]
pub fn state_dependent_step(x: f64, grad: f64, eta: f64, h: f64, xi: f64) -> f64 {
    x - eta * grad + eta.sqrt() * h * xi
}

/// One constant-temperature Langevin iterate:
/// `x - eta * grad + sqrt(2 eta beta) * xi`.
///
/// Shares the arithmetic of [`state_dependent_step`] with `h = sqrt(2 beta)`,
/// so the two produce bitwise-identical iterates under that substitution.
#[inline]
pub fn langevin_step(x: f64, grad: f64, eta: f64, beta: f64, xi: f64) -> f64 {
    state_dependent_step(x, grad, eta, (2.0 * beta).sqrt(), xi)
}

/// One replica-exchange iterate: a gradient-descent copy `xg` and a Langevin
/// copy `yl` at temperature `gamma` both step, then swap positions whenever
/// the stepped Langevin copy attains the strictly lower objective value. The
/// first element of the returned pair is the reported optimizer trajectory.
#[inline]
pub fn replica_step(
    xg: f64,
    yl: f64,
    obj: &Objective1D,
    eta: f64,
    gamma: f64,
    xi: f64,
) -> (f64, f64) {
    let xg_next = xg - eta * obj.gradient(xg);
    let yl_next = langevin_step(yl, obj.gradient(yl), eta, gamma, xi);
    if obj.value(xg_next) > obj.value(yl_next) {
        (yl_next, xg_next)
    } else {
        (xg_next, yl_next)
    }
}

fn noise_stream(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * rep);
    rng
}

fn aux_stream(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * rep + 1);
    rng
}

/// The recorded `f` values of replication `rep`, or `None` when the
/// trajectory went non-finite (such replications are excluded from the
/// aggregates and counted in [`RunOutput::excluded`]).
///
/// Exposed so callers can inspect individual replications; [`run`]
/// aggregates exactly these values.
pub fn replication_values(
    config: &SimConfig,
    obj: &Objective1D,
    sol: Option<&HjbSolution>,
    rep: u64,
) -> Option<Vec<f64>> {
    let mut noise = noise_stream(config.seed, rep);
    let n = config.n_steps;
    let eta = config.eta;
    let mut vals = Vec::with_capacity(n);

    match config.policy {
        PolicySpec::ReplicaExchange => {
            let gamma = config.replica_gamma.expect("validated");
            let (mut xg, mut yl) = (config.x0, config.x0);
            for k in 1..=n {
                if !(xg.is_finite() && yl.is_finite()) {
                    return None;
                }
                let f = obj.value(xg);
                if !f.is_finite() {
                    return None;
                }
                vals.push(f);
                if k == n {
                    break;
                }
                let xi: f64 = StandardNormal.sample(&mut noise);
                (xg, yl) = replica_step(xg, yl, obj, eta, gamma, xi);
            }
        }
        _ => {
            let policy = match config.policy {
                PolicySpec::Constant { beta } => Policy::Constant { beta },
                PolicySpec::PowerLaw { d, b } => Policy::PowerLaw { d, b },
                PolicySpec::BangBang => Policy::BangBang { sol: sol? },
                PolicySpec::StateDependent => Policy::StateDependent { sol: sol? },
                PolicySpec::SampledRelaxed => Policy::SampledRelaxed { sol: sol? },
                PolicySpec::ReplicaExchange => unreachable!(),
            };
            let mut aux = matches!(config.policy, PolicySpec::SampledRelaxed)
                .then(|| aux_stream(config.seed, rep));
            let mut x = config.x0;
            for k in 1..=n {
                if !x.is_finite() {
                    return None;
                }
                let f = obj.value(x);
                if !f.is_finite() {
                    return None;
                }
                vals.push(f);
                if k == n {
                    break;
                }
                let xi: f64 = StandardNormal.sample(&mut noise);
                let grad = obj.gradient(x);
                x = match &policy {
                    Policy::StateDependent { sol } => {
                        state_dependent_step(x, grad, eta, sol.eval_h(x), xi)
                    }
                    p => {
                        let u01 = aux.as_mut().map_or(0.0, |rng| rng.gen::<f64>());
                        langevin_step(x, grad, eta, p.temperature(k - 1, x, u01), xi)
                    }
                };
            }
        }
    }
    Some(vals)
}

/// Runs `n_reps` independent replications and aggregates `f(X_k)` per
/// iteration. Deterministic in `(config, sol)`: streams are keyed by
/// `(seed, replication index)` and aggregation follows replication order.
pub fn run(
    config: &SimConfig,
    obj: &Objective1D,
    sol: Option<&HjbSolution>,
) -> Result<RunOutput, SimError> {
    config.validate()?;
    if config.policy.needs_solution() && sol.is_none() {
        return Err(SimError::MissingSolution(config.policy.name()));
    }

    let trajectories: Vec<Option<Vec<f64>>> = (0..config.n_reps as u64)
        .into_par_iter()
        .map(|rep| replication_values(config, obj, sol, rep))
        .collect();

    let included: Vec<&Vec<f64>> = trajectories.iter().flatten().collect();
    let excluded = config.n_reps - included.len();
    if included.is_empty() {
        return Err(SimError::AllTrajectoriesExcluded(config.n_reps));
    }

    let n = included.len() as f64;
    let stats = (0..config.n_steps)
        .map(|j| {
            let mut sum = 0.0;
            let mut min_f = f64::INFINITY;
            let mut max_f = f64::NEG_INFINITY;
            for t in &included {
                let v = t[j];
                sum += v;
                min_f = min_f.min(v);
                max_f = max_f.max(v);
            }
            let mean = sum / n;
            let std_err = if included.len() > 1 {
                let ss: f64 = included.iter().map(|t| (t[j] - mean).powi(2)).sum();
                (ss / (n - 1.0)).sqrt() / n.sqrt()
            } else {
                0.0
            };
            IterStats {
                k: j + 1,
                mean_f: mean,
                std_err,
                min_f,
                max_f,
            }
        })
        .collect();

    Ok(RunOutput { stats, excluded })
}
