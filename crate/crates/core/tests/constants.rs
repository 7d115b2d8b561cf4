//! Re-derives the frozen population-mean constants from the reference design
//! values and fails if either drifts.

use approx::assert_relative_eq;
use pulsedose_core::constants::{C50_DEFAULT, POP_MEAN_ALPHA, POP_MEAN_GAMMA};
use pulsedose_core::cycle::Linearization;
use pulsedose_core::{CycleTarget, PlantParams};

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0, "no bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn alpha_from_first_fixed_point_component() {
    let (t, lambda) = (20.0, 200.0);
    let alpha = bisect(1e-4, 0.1, |a| lambda / (a * t).exp_m1() - 179.7316);
    assert_relative_eq!(alpha, POP_MEAN_ALPHA, max_relative = 1e-12);
    // the two other components are reproduced as cross-validation
    let p = PlantParams::new(alpha, 2.0, C50_DEFAULT).unwrap();
    let x = Linearization::new(&p, &CycleTarget::new(t, lambda).unwrap())
        .fixed_point()
        .x;
    assert!((x.x2 - 56.3880).abs() < 1e-4);
    assert!((x.x3 - 9.0833).abs() < 1e-4);
}

#[test]
fn gamma_from_affine_amplitude_law() {
    let (k3, k4, lambda) = (192.7539, 1.2036, 200.0);
    let phi0 = (lambda - k3) / k4;
    let p = PlantParams::new(POP_MEAN_ALPHA, 2.0, C50_DEFAULT).unwrap();
    let ybar0 = Linearization::new(&p, &CycleTarget::new(20.0, lambda).unwrap())
        .fixed_point()
        .ybar0;
    let hill = |g: f64| 100.0 * C50_DEFAULT.powf(g) / (C50_DEFAULT.powf(g) + ybar0.powf(g));
    let gamma = bisect(0.5, 10.0, |g| hill(g) - phi0);
    assert_relative_eq!(gamma, POP_MEAN_GAMMA, max_relative = 1e-12);
    let slope = PlantParams::new(POP_MEAN_ALPHA, gamma, C50_DEFAULT)
        .unwrap()
        .hill_slope(ybar0)
        .unwrap();
    assert!((slope - -1.6616).abs() < 1e-4);
}
