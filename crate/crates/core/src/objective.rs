//! 1-D objective functions with gradients and breakpoint metadata.
//!
//! Objectives are immutable after construction and cheap to share across
//! threads. The built-in `double-well` benchmark is an asymmetric piecewise
//! function with a suboptimal local minimum at x = -3 and the global minimum
//! at x = 4.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("objective input must be finite, got {0}")]
    NonFiniteInput(f64),
    #[error("unknown objective `{0}`")]
    Unknown(String),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar objective together with its gradient.
///
/// `grad_bound` is a uniform bound on |f'| (may be infinite for user
/// functions); it is metadata only and is not enforced at runtime.
/// `breakpoints` lists the points where the second derivative may jump;
/// the function and gradient themselves are continuous there.
#[derive(Clone)]
pub struct Objective1D {
    name: String,
    eval: ScalarFn,
    grad: ScalarFn,
    grad_bound: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for Objective1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective1D")
            .field("name", &self.name)
            .field("grad_bound", &self.grad_bound)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Objective1D {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64) -> f64 + Send + Sync + 'static,
        grad_bound: f64,
        mut breakpoints: Vec<f64>,
    ) -> Self {
        breakpoints.sort_by(f64::total_cmp);
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            grad_bound,
            breakpoints,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Objective value; callers must pass finite `x`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Gradient value; callers must pass finite `x`.
    #[inline]
    pub fn gradient(&self, x: f64) -> f64 {
        (self.grad)(x)
    }

    /// Checked objective evaluation; rejects non-finite input.
    pub fn eval(&self, x: f64) -> Result<f64, ObjectiveError> {
        if !x.is_finite() {
            return Err(ObjectiveError::NonFiniteInput(x));
        }
        Ok(self.value(x))
    }

    /// Checked gradient evaluation; rejects non-finite input.
    pub fn grad(&self, x: f64) -> Result<f64, ObjectiveError> {
        if !x.is_finite() {
            return Err(ObjectiveError::NonFiniteInput(x));
        }
        Ok(self.gradient(x))
    }
}

/// The asymmetric double-well benchmark:
///
/// ```text
/// f(x) = 4x - 20          for x > 6
///        (x - 4)^2        for 2 < x <= 6
///        8 - x^2          for -2 < x <= 2
///        2(x + 3)^2 + 2   for -6 < x <= -2
///        -12x - 52        for x <= -6
/// ```
///
/// C^1 with local minimum f(-3) = 2 and global minimum f(4) = 0; the second
/// derivative jumps at {-6, -2, 2, 6}; |f'| <= 12 everywhere.
pub fn double_well() -> Objective1D {
    Objective1D::new(
        "double-well",
        |x| {
            if x > 6.0 {
                4.0 * x - 20.0
            } else if x > 2.0 {
                (x - 4.0) * (x - 4.0)
            } else if x > -2.0 {
                8.0 - x * x
            } else if x > -6.0 {
                2.0 * (x + 3.0) * (x + 3.0) + 2.0
            } else {
                -12.0 * x - 52.0
            }
        },
        |x| {
            if x > 6.0 {
                4.0
            } else if x > 2.0 {
                2.0 * (x - 4.0)
            } else if x > -2.0 {
                -2.0 * x
            } else if x > -6.0 {
                4.0 * (x + 3.0)
            } else {
                -12.0
            }
        },
        12.0,
        vec![-6.0, -2.0, 2.0, 6.0],
    )
}

/// Maps objective names to constructors so callers (in particular the CLI)
/// can select objectives by string. Extend with [`ObjectiveRegistry::register`].
pub struct ObjectiveRegistry {
    ctors: BTreeMap<String, fn() -> Objective1D>,
}

impl ObjectiveRegistry {
    pub fn empty() -> Self {
        Self {
            ctors: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("double-well", double_well);
        reg
    }

    pub fn register(&mut self, name: &str, ctor: fn() -> Objective1D) {
        self.ctors.insert(name.to_string(), ctor);
    }

    pub fn build(&self, name: &str) -> Result<Objective1D, ObjectiveError> {
        self.ctors
            .get(name)
            .map(|ctor| ctor())
            .ok_or_else(|| ObjectiveError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ctors.keys().map(String::as_str)
    }
}

impl Default for ObjectiveRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_key_values() {
        let f = double_well();
        assert_eq!(f.value(4.0), 0.0);
        assert_eq!(f.value(-3.0), 2.0);
        // breakpoint values from the two adjacent pieces, by hand:
        // f(-2) = 8 - 4 = 2*1 + 2 = 4, f(2) = 4, f(6) = 4, f(-6) = 20
        assert_eq!(f.value(-2.0), 4.0);
        assert_eq!(f.value(2.0), 4.0);
        assert_eq!(f.value(6.0), 4.0);
        assert_eq!(f.value(-6.0), 20.0);
        assert_eq!(f.value(-2.0 + 1e-12), 8.0 - (2.0f64 - 1e-12).powi(2));
    }

    #[test]
    fn double_well_gradients() {
        let f = double_well();
        assert_eq!(f.gradient(7.0), 4.0);
        assert_eq!(f.gradient(-7.0), -12.0);
        assert_eq!(f.gradient(0.0), 0.0);
        assert_eq!(f.gradient(-3.0), 0.0);
        assert_eq!(f.gradient(4.0), 0.0);
        assert_eq!(f.grad_bound(), 12.0);
        assert_eq!(f.breakpoints(), &[-6.0, -2.0, 2.0, 6.0]);
    }

    #[test]
    fn continuity_at_breakpoints() {
        let f = double_well();
        let eps = 1e-8;
        for &b in f.breakpoints() {
            assert!(
                (f.value(b - eps) - f.value(b + eps)).abs() < 1e-6,
                "f jumps at {b}"
            );
            assert!(
                (f.gradient(b - eps) - f.gradient(b + eps)).abs() < 1e-6,
                "f' jumps at {b}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = double_well();
        // deterministic pseudo-random points in [-10, 10], away from breakpoints
        let mut x = 0.37_f64;
        let mut checked = 0;
        while checked < 1000 {
            x = (x * 9301.0 + 0.2113).fract();
            let p = -10.0 + 20.0 * x;
            if f.breakpoints().iter().any(|b| (p - b).abs() < 1e-3) {
                continue;
            }
            let h = 1e-6;
            let fd = (f.value(p + h) - f.value(p - h)) / (2.0 * h);
            let g = f.gradient(p);
            let scale = g.abs().max(1.0);
            assert!(
                (fd - g).abs() / scale < 1e-6,
                "finite difference mismatch at {p}: fd={fd} grad={g}"
            );
            checked += 1;
        }
    }

    #[test]
    fn grid_minimum_at_global_min() {
        let f = double_well();
        let mut best = (f64::INFINITY, f64::NAN);
        let n = 16000;
        for i in 0..=n {
            let x = -8.0 + 16.0 * (i as f64) / (n as f64);
            let v = f.value(x);
            if v < best.0 {
                best = (v, x);
            }
        }
        assert_eq!(best.0, 0.0);
        assert_eq!(best.1, 4.0);
    }

    #[test]
    fn checked_eval_rejects_non_finite() {
        let f = double_well();
        assert!(f.eval(f64::NAN).is_err());
        assert!(f.eval(f64::INFINITY).is_err());
        assert!(f.grad(f64::NEG_INFINITY).is_err());
        assert!(f.eval(1.5).is_ok());
    }

    #[test]
    fn registry_lookup() {
        let reg = ObjectiveRegistry::with_builtins();
        assert!(reg.build("double-well").is_ok());
        assert!(matches!(
            reg.build("nope"),
            Err(ObjectiveError::Unknown(_))
        ));
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["double-well"]);
    }

    #[test]
    fn registry_accepts_new_objectives() {
        fn quadratic() -> Objective1D {
            Objective1D::new("quadratic", |x| x * x, |x| 2.0 * x, f64::INFINITY, vec![])
        }
        let mut reg = ObjectiveRegistry::with_builtins();
        reg.register("quadratic", quadratic);
        let q = reg.build("quadratic").unwrap();
        assert_eq!(q.value(3.0), 9.0);
        assert_eq!(q.gradient(3.0), 6.0);
    }
}
