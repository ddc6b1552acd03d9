//! Closed forms of the truncated exponential checked against adaptive
//! quadrature across the full rate span the solver exercises.

mod common;

use common::{oracle_entropy, oracle_log_partition, oracle_mean, oracle_pdf_mass};
use thermolang::truncexp::{diffusion_coeff, TemperatureRange, TruncExpDist};

const RATES: [f64; 9] = [-1e4, -1e2, -1.0, -1e-10, 0.0, 1e-10, 1.0, 1e2, 1e4];

fn paper_range() -> TemperatureRange {
    TemperatureRange::new(1e-4, 500.0).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

#[test]
fn log_partition_matches_quadrature() {
    let range = paper_range();
    for &rate in &RATES {
        let d = TruncExpDist::new(rate, range);
        let want = oracle_log_partition(rate, range.lo(), range.hi());
        assert!(
            rel_err(d.log_partition(), want) < 1e-8,
            "rate {rate}: closed {} vs quadrature {want}",
            d.log_partition()
        );
    }
}

#[test]
fn mean_matches_quadrature() {
    let range = paper_range();
    for &rate in &RATES {
        let d = TruncExpDist::new(rate, range);
        let want = oracle_mean(rate, range.lo(), range.hi());
        assert!(
            rel_err(d.mean(), want) < 1e-8,
            "rate {rate}: closed {} vs quadrature {want}",
            d.mean()
        );
    }
}

#[test]
fn entropy_matches_quadrature() {
    let range = paper_range();
    for &rate in &RATES {
        let d = TruncExpDist::new(rate, range);
        let want = oracle_entropy(rate, range.lo(), range.hi());
        assert!(
            rel_err(d.entropy(), want) < 1e-8,
            "rate {rate}: closed {} vs quadrature {want}",
            d.entropy()
        );
    }
}

#[test]
fn mean_matches_quadrature_on_small_rates() {
    // the advertised quadrature anchor for the near-uniform regime
    let range = paper_range();
    let d = TruncExpDist::new(0.01, range);
    let want = oracle_mean(0.01, range.lo(), range.hi());
    assert!(rel_err(d.mean(), want) < 1e-8);
}

#[test]
fn pdf_normalizes_to_one() {
    let range = paper_range();
    for &rate in &RATES {
        let d = TruncExpDist::new(rate, range);
        let mass = oracle_pdf_mass(&d);
        assert!(
            (mass - 1.0).abs() < 1e-10,
            "rate {rate}: pdf mass {mass}"
        );
    }
}

#[test]
fn diffusion_coeff_matches_quadrature_mean() {
    let range = paper_range();
    // rate 1 arises from vxx = lambda at the tuned entropy weight
    let h = diffusion_coeff(0.3125, 0.3125, range).unwrap();
    let want = (2.0 * oracle_mean(1.0, range.lo(), range.hi())).sqrt();
    assert!(rel_err(h, want) < 1e-8, "h {h} vs quadrature {want}");
}

#[test]
fn reflection_identity_against_quadrature() {
    // Z(-1 on [a, c]) equals Z(1 on [-c, -a]) by the change of variables
    // u -> -u; the quadrature evaluates the reflected integral directly
    let range = TemperatureRange::new(0.5, 1.0).unwrap();
    let neg = TruncExpDist::new(-1.0, range).log_partition();
    let reflected = oracle_log_partition(1.0, -1.0, -0.5);
    assert!(rel_err(neg, reflected) < 1e-10);
}
