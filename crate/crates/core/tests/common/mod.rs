//! Shared test oracles, independent of the library's closed forms.
//!
//! Quadrature is adaptive Gauss-Kronrod (G7/K15). The distribution oracles
//! integrate the *scaled* density `exp(-rate (u - u0))` with `u0` the
//! dominant endpoint of the support, so they stay finite at rates far beyond
//! where the naive integrands overflow or underflow.

#![allow(dead_code)]

// G7/K15 abscissae and weights on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel: returns the Kronrod estimate and |K15 - G7| as the
/// error indicator.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);
    let mut kronrod = WGK[7] * f_mid;
    let mut gauss = WG[3] * f_mid;
    for j in 0..7 {
        let x = half * XGK[j];
        let pair = f(mid - x) + f(mid + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (half * kronrod, half * (kronrod - gauss).abs())
}

fn gk_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if depth == 0 || err <= tol {
        return k;
    }
    let m = 0.5 * (a + b);
    gk_adaptive(f, a, m, 0.5 * tol, depth - 1) + gk_adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`.
pub fn quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    gk_adaptive(f, a, b, tol, 48)
}

/// `quad` with the tolerance scaled off a coarse composite-Simpson estimate
/// (which samples the endpoints, so boundary spikes cannot be missed),
/// giving roughly `rel_tol` relative accuracy.
pub fn quad_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let n = 512;
    let h = (b - a) / n as f64;
    let mut coarse = 0.0;
    for i in 0..n {
        let x0 = a + i as f64 * h;
        coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    quad(f, a, b, rel_tol * coarse.abs().max(f64::MIN_POSITIVE))
}

fn dominant_endpoint(rate: f64, lo: f64, hi: f64) -> f64 {
    if rate >= 0.0 {
        lo
    } else {
        hi
    }
}

/// Scaled partition integral `S = integral exp(-rate (u - u0)) du` over
/// `[lo, hi]`; `ln Z = -rate * u0 + ln S`.
fn scaled_partition(rate: f64, lo: f64, hi: f64) -> f64 {
    let u0 = dominant_endpoint(rate, lo, hi);
    quad_rel(&|u: f64| (-(rate * (u - u0))).exp(), lo, hi, 1e-13)
}

pub fn oracle_log_partition(rate: f64, lo: f64, hi: f64) -> f64 {
    let u0 = dominant_endpoint(rate, lo, hi);
    -rate * u0 + scaled_partition(rate, lo, hi).ln()
}

pub fn oracle_mean(rate: f64, lo: f64, hi: f64) -> f64 {
    let u0 = dominant_endpoint(rate, lo, hi);
    let num = quad_rel(&|u: f64| u * (-(rate * (u - u0))).exp(), lo, hi, 1e-13);
    num / scaled_partition(rate, lo, hi)
}

/// Differential entropy by direct quadrature of `-pi ln pi`, with the scaled
/// density `pi(u) = exp(-rate (u - u0)) / S`.
pub fn oracle_entropy(rate: f64, lo: f64, hi: f64) -> f64 {
    let u0 = dominant_endpoint(rate, lo, hi);
    let s = scaled_partition(rate, lo, hi);
    let ln_s = s.ln();
    quad_rel(
        &|u: f64| {
            let e = -(rate * (u - u0));
            let pi = e.exp() / s;
            // -pi ln pi with ln pi = e - ln S, exact for this integrand
            -pi * (e - ln_s)
        },
        lo,
        hi,
        1e-13,
    )
}

/// Normalization check: integral of the library pdf over the support,
/// evaluated in scaled form so extreme rates do not overflow.
pub fn oracle_pdf_mass(dist: &thermolang::TruncExpDist) -> f64 {
    let (lo, hi) = (dist.range().lo(), dist.range().hi());
    let rate = dist.rate();
    let u0 = dominant_endpoint(rate, lo, hi);
    let log_peak = -rate * u0 - dist.log_partition();
    quad_rel(
        &|u: f64| (-(rate * (u - u0)) + log_peak).exp(),
        lo,
        hi,
        1e-13,
    )
}

#[cfg(test)]
mod oracle_validation {
    use super::*;

    #[test]
    fn quad_reproduces_known_integrals() {
        assert!((quad_rel(&|x: f64| x * x, 0.0, 1.0, 1e-13) - 1.0 / 3.0).abs() < 1e-13);
        assert!(
            (quad_rel(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13) - 2.0).abs() < 1e-12
        );
        assert!(
            (quad_rel(&|x: f64| x.exp(), 0.0, 1.0, 1e-13) - (std::f64::consts::E - 1.0)).abs()
                < 1e-13
        );
    }

    #[test]
    fn quad_resolves_boundary_spikes() {
        // integral of exp(-1e4 u) on [0, 500] = 1e-4 to machine accuracy;
        // the mass sits in a 1e-4-wide sliver of a 500-wide interval
        let v = quad_rel(&|u: f64| (-1e4 * u).exp(), 0.0, 500.0, 1e-13);
        assert!(
            (v - 1e-4).abs() / 1e-4 < 1e-11,
            "spike quadrature off: {v}"
        );
    }

    #[test]
    fn oracle_matches_hand_computed_toy_values() {
        // ln(exp(-1/2) - exp(-1)) for rate 1 on [1/2, 1]
        assert!((oracle_log_partition(1.0, 0.5, 1.0) - (-1.4327521295671886)).abs() < 1e-12);
        // uniform mean
        assert!((oracle_mean(0.0, 0.5, 1.0) - 0.75).abs() < 1e-13);
        // uniform entropy = ln(width)
        assert!((oracle_entropy(0.0, 0.5, 1.0) - 0.5_f64.ln()).abs() < 1e-12);
    }
}
