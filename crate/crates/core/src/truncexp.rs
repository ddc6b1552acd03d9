//! Truncated exponential distributions on a bounded temperature interval.
//!
//! The density is proportional to `exp(-rate * u)` on `[lo, hi]`, with the
//! rate allowed to take any sign. Everything here is computed relative to the
//! dominant endpoint of the support so that no intermediate overflows even
//! when `|rate| * hi` is far beyond 700, and a short series takes over when
//! `|rate| * (hi - lo)` is small enough that the direct formulas cancel
//! catastrophically.

use thiserror::Error;

/// Below `|rate| * (hi - lo) < SERIES_THRESHOLD` the partition function,
/// mean, CDF and quantile switch to series expansions around the uniform
/// distribution; the truncation error there is below 1e-16 relative.
pub const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("temperature range requires 0 < lo < hi, got [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("entropy weight must be a positive finite number, got {0}")]
    InvalidLambda(f64),
    #[error("uniform draw must lie in [0, 1), got {0}")]
    UniformOutOfRange(f64),
    #[error("point {u} outside the support [{lo}, {hi}]")]
    OutsideSupport { u: f64, lo: f64, hi: f64 },
}

/// The admissible temperature interval `[lo, hi]`, `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureRange {
    lo: f64,
    hi: f64,
}

impl TemperatureRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DistError> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(DistError::InvalidRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, u: f64) -> bool {
        self.lo <= u && u <= self.hi
    }
}

/// Truncated exponential distribution with density
/// `exp(-rate * u) / Z` on `range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncExpDist {
    rate: f64,
    range: TemperatureRange,
}

impl TruncExpDist {
    /// `rate` may take any sign; it must be finite.
    pub fn new(rate: f64, range: TemperatureRange) -> Self {
        assert!(rate.is_finite(), "truncated exponential rate must be finite");
        Self { rate, range }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn range(&self) -> TemperatureRange {
        self.range
    }

    /// `ln Z` with `Z = integral of exp(-rate * u) over [lo, hi]`.
    pub fn log_partition(&self) -> f64 {
        log_partition_impl(self.rate, self.range)
    }

    /// `E[u]`, strictly inside `(lo, hi)` for finite rates.
    pub fn mean(&self) -> f64 {
        mean_impl(self.rate, self.range)
    }

    /// Differential entropy; maximal (`ln(hi - lo)`) exactly at rate 0.
    pub fn entropy(&self) -> f64 {
        self.log_partition() + self.rate * self.mean()
    }

    /// Density at `u` in the support.
    pub fn pdf(&self, u: f64) -> Result<f64, DistError> {
        if !self.range.contains(u) {
            return Err(DistError::OutsideSupport {
                u,
                lo: self.range.lo,
                hi: self.range.hi,
            });
        }
        Ok((-self.rate * u - self.log_partition()).exp())
    }

    /// Cumulative distribution function at `u` in the support.
    pub fn cdf(&self, u: f64) -> Result<f64, DistError> {
        if !self.range.contains(u) {
            return Err(DistError::OutsideSupport {
                u,
                lo: self.range.lo,
                hi: self.range.hi,
            });
        }
        Ok(cdf_impl(self.rate, self.range, u))
    }

    /// Inverse CDF for `p` in `[0, 1)`; monotone increasing in `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p));
        quantile_impl(self.rate, self.range, p)
    }

    /// Inverse-CDF sampling from a caller-supplied uniform draw in `[0, 1)`.
    pub fn sample(&self, u01: f64) -> Result<f64, DistError> {
        if !(0.0..1.0).contains(&u01) {
            return Err(DistError::UniformOutOfRange(u01));
        }
        Ok(self.quantile(u01))
    }
}

/// `exp(-s) - 1 + s` without cancellation, for `s >= 0`.
fn em2(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s >= 0.5 {
        return (-s).exp() - 1.0 + s;
    }
    // sum_{k>=2} (-s)^k / k!
    let mut term = s * s / 2.0;
    let mut acc = term;
    let mut k = 2.0_f64;
    while term.abs() > acc.abs() * f64::EPSILON {
        k += 1.0;
        term *= -s / k;
        acc += term;
    }
    acc
}

fn log_partition_impl(rate: f64, range: TemperatureRange) -> f64 {
    let (a, c, w) = (range.lo, range.hi, range.width());
    let s = rate * w;
    if s.abs() < SERIES_THRESHOLD {
        return w.ln() - rate * (a + c) / 2.0 + s * s / 24.0;
    }
    if rate > 0.0 {
        // Z = exp(-rate*a) * (1 - exp(-s)) / rate
        -rate * a + (-(-s).exp_m1()).ln() - rate.ln()
    } else {
        // Z = exp(-rate*c) * (exp(s) - 1) / rate, both factors negative
        -rate * c + (-s.exp_m1()).ln() - (-rate).ln()
    }
}

fn mean_impl(rate: f64, range: TemperatureRange) -> f64 {
    let (a, c, w) = (range.lo, range.hi, range.width());
    let s = rate * w;
    if s.abs() < SERIES_THRESHOLD {
        return (a + c) / 2.0 - rate * w * w / 12.0;
    }
    if rate < 0.0 {
        // reflection u -> lo + hi - u maps rate to -rate
        return a + c - mean_impl(-rate, range);
    }
    // E[u] = c - (exp(-s) - 1 + s) / (rate * (1 - exp(-s)))
    c - em2(s) / (rate * -(-s).exp_m1())
}

fn cdf_impl(rate: f64, range: TemperatureRange, u: f64) -> f64 {
    let (a, c, w) = (range.lo, range.hi, range.width());
    let s = rate * w;
    if s.abs() < SERIES_THRESHOLD {
        return (u - a) / w;
    }
    if rate < 0.0 {
        return 1.0 - cdf_impl(-rate, range, a + c - u);
    }
    (-(-rate * (u - a)).exp_m1()) / (-(-s).exp_m1())
}

fn quantile_impl(rate: f64, range: TemperatureRange, p: f64) -> f64 {
    let (a, c, w) = (range.lo, range.hi, range.width());
    if p <= 0.0 {
        return a;
    }
    let s = rate * w;
    let u = if s.abs() < SERIES_THRESHOLD {
        a + p * w
    } else if rate > 0.0 {
        let d = -(-s).exp_m1();
        a - (-p * d).ln_1p() / rate
    } else {
        a + c - quantile_impl(-rate, range, 1.0 - p)
    };
    u.clamp(a, c)
}

/// Noise scale of the optimally-heated Langevin dynamics:
/// `h = sqrt(2 * E[u])` under the truncated exponential with rate
/// `vxx / lambda`. Strictly inside `(sqrt(2 lo), sqrt(2 hi))` for finite
/// rates.
pub fn diffusion_coeff(vxx: f64, lambda: f64, range: TemperatureRange) -> Result<f64, DistError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(DistError::InvalidLambda(lambda));
    }
    Ok(diffusion_coeff_from_rate(vxx / lambda, range))
}

/// Same as [`diffusion_coeff`] with the rate `vxx / lambda` precomputed.
pub fn diffusion_coeff_from_rate(rate: f64, range: TemperatureRange) -> f64 {
    (2.0 * mean_impl(rate, range)).sqrt()
}
