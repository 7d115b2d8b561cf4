//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::Matrix3;
use pulsedose_core::{CycleTarget, Mat3, PlantParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mean_plant() -> PlantParams {
    PlantParams::population_mean()
}

pub fn reference_target() -> CycleTarget {
    CycleTarget::new(20.0, 200.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A plant drawn uniformly from the identification-cohort parameter box.
pub fn dataset_plant(rng: &mut impl Rng) -> PlantParams {
    let alpha = rng.random_range(0.0270..=0.0524);
    let gamma = rng.random_range(1.4030..=5.5619);
    PlantParams::new(alpha, gamma, 3.2425).unwrap()
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// `e^{At}` by scaling and squaring of the shifted matrix `(A + a₃I)t`,
/// whose entries are all nonnegative: every Taylor term and every squaring
/// is then a sum of nonnegative numbers, so the result is entrywise accurate
/// to a few ulps per squaring. The shift is undone by the scalar `e^{−a₃t}`.
pub fn expm_oracle(plant: &PlantParams, t: f64) -> Mat3 {
    let a = plant.a_matrix();
    let a3 = plant.poles()[2];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[(i, j)] * t + if i == j { a3 * t } else { 0.0 };
        }
    }
    let norm = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5_f64.powi(s);
    m.iter_mut().flatten().for_each(|v| *v *= scale);
    let mut sum = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut term = sum;
    for k in 1..40 {
        term = mat_mul(&term, &m);
        term.iter_mut().flatten().for_each(|v| *v /= k as f64);
        sum.iter_mut()
            .flatten()
            .zip(term.iter().flatten())
            .for_each(|(s, t)| *s += t);
    }
    for _ in 0..s {
        sum = mat_mul(&sum, &sum);
    }
    let shift = (-a3 * t).exp();
    sum.iter_mut().flatten().for_each(|v| *v *= shift);
    Mat3(sum)
}

/// Spectral radius from a general-purpose eigen-solver.
pub fn rho_oracle(m: &Mat3) -> f64 {
    let n = Matrix3::from_fn(|i, j| m[(i, j)]);
    n.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Monic characteristic polynomial evaluated by the definition
/// `det(sI − M)`.
pub fn char_poly_at(m: &Mat3, s: f64) -> f64 {
    (Mat3::IDENTITY.scale(s) - *m).det()
}
