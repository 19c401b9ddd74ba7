use num_complex::Complex64 as C;
use sli::kernels::{mollified_oracle_fit, KernelId};
use std::f64::consts::PI;

const POINTS: [(f64, f64); 6] = [(0.3, 1.0), (0.5, 1.5), (1.8, 1.0), (-2.2, 1.2), (-0.4, 0.9), (2.5, 0.8)];

// Inside the cones the transform of ε(t)δ(ξ²)/t³ is −2π²|ω| + const, a
// harmonic cone-supported term that the tabulated base drops.
const OUTSIDE: [(f64, f64); 6] = [(0.3, 1.0), (0.5, 1.5), (-0.2, 0.9), (1.1, 1.6), (-0.6, 2.0), (0.0, 0.7)];

fn check(id: KernelId, points: &[(f64, f64)], expected_ratio: C) {
    let fit = mollified_oracle_fit(id, points, 0.1, 60.0).unwrap();
    println!("{id:?}: ratio {} residual {:.2e}", fit.ratio, fit.max_rel_residual);
    assert!(fit.max_rel_residual < 0.01, "{fit:?}");
    assert!((fit.ratio - expected_ratio).norm() < 0.01 * expected_ratio.norm(), "{fit:?}");
}

#[test]
fn causal_kernel_over_t() {
    check(KernelId::IK0OverT, &POINTS, C::new(2.0 * PI * PI, 0.0));
}

#[test]
fn causal_kernel_over_t2() {
    check(KernelId::IK0OverT2, &POINTS, C::new(2.0 * PI * PI, 0.0));
}

#[test]
fn delta_over_t() {
    check(KernelId::DeltaOverT, &POINTS, C::new(-2.0 * PI, 0.0));
}

#[test]
fn delta_over_t2() {
    check(KernelId::DeltaOverT2, &POINTS, C::new(2.0 * PI, 0.0));
}

#[test]
fn causal_kernel_over_t3_base() {
    check(KernelId::XiK0OverT3, &OUTSIDE, C::new(0.0, 2.0 * PI * PI));
}
