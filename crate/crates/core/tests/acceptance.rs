//! Full verification suite as an integration gate: one test per check, one
//! printed pass/fail line per check. Run with `--nocapture` to see the lines
//! for passing checks too.

use bell_shadows_core::verify::{run_check, Level};

const SUITE_SEED: u64 = 20_240_811;

fn assert_check(id: &str) {
    let result = run_check(id, Level::Full, SUITE_SEED).expect("check must run");
    println!("{}", result.summary_line());
    assert!(result.passed, "{} failed: {}", result.id, result.detail);
}

#[test]
fn ac1_outcome_law_vs_brute_force_circuit() {
    assert_check("AC-1");
}

#[test]
fn ac2_haar_second_moment_identity() {
    assert_check("AC-2");
}

#[test]
fn ac3_exact_unbiasedness_via_channel_inversion() {
    assert_check("AC-3");
}

#[test]
fn ac4_variance_dominance_exact_design() {
    assert_check("AC-4");
}

#[test]
fn ac5_additive_guarantee_end_to_end() {
    assert_check("AC-5");
}

#[test]
fn ac6_relative_guarantee_end_to_end() {
    assert_check("AC-6");
}

#[test]
fn ac7_design_distance_conversions() {
    assert_check("AC-7");
}

#[test]
fn ac8_distinguisher_oracle_equivalence() {
    assert_check("AC-8");
}

#[test]
fn ac9_real_amplitude_negative_control() {
    assert_check("AC-9");
}

#[test]
fn ac10_median_of_means_calibration() {
    assert_check("AC-10");
}
