//! Frozen model constants.
//!
//! The population-mean patient is only characterised indirectly by reference
//! design values, so its `(α, γ)` pair is back-derived once and pinned here.
//! `tests/constants.rs` re-runs both derivations and fails if either value
//! drifts.

/// Pole ratios `v₁, v₂, v₃` of the pharmacokinetic chain.
pub const POLE_RATIOS: [f64; 3] = [1.0, 4.0, 10.0];

/// Upper bound on the PK scale `α` (1/min).
pub const ALPHA_MAX: f64 = 0.1;
/// Upper bound on the Hill exponent `γ`.
pub const GAMMA_MAX: f64 = 10.0;

/// Half-effect concentration `C₅₀` (μg/ml).
pub const C50_DEFAULT: f64 = 3.2425;

/// Population-mean PK scale `α*` (1/min).
///
/// Root of `λ / (e^{α v₁ T} − 1) = 179.7316` for `T = 20 min`, `λ = 200 μg/kg`
/// (first component of the reference steady-state fixed point), by bisection
/// on `[1e-4, 0.1]`. The remaining reference components 56.3880 and 9.0833
/// are reproduced to better than 1e-4.
pub const POP_MEAN_ALPHA: f64 = 0.037_400_003_020_294_48;

/// Population-mean Hill exponent `γ*`.
///
/// From the reference affine amplitude law `k₄·φ(ȳ₀) + k₃ = λ` with
/// `k₄ = 1.2036`, `k₃ = 192.7539`, `λ = 200`, one gets `φ(ȳ₀) = 6.02036 %`;
/// `γ*` is the root of `φ(ȳ₀) = 100 C₅₀^γ / (C₅₀^γ + ȳ₀^γ)` at the fixed-point
/// output `ȳ₀ = C·X(α*)`, by bisection on `[0.5, 10]`. Cross-check: the
/// resulting slope `φ′(ȳ₀) = −1.66166` matches the reference `−1.6616`.
pub const POP_MEAN_GAMMA: f64 = 2.667_656_308_134_824_4;

/// Clinical effect bounds (%): underdosing above `Y_MAX`, overdosing below
/// `Y_MIN`.
pub const Y_MIN: f64 = 2.0;
pub const Y_MAX: f64 = 10.0;

/// Observed parameter ranges of the identification cohort. Records outside
/// them are flagged but accepted.
pub const DATASET_ALPHA_RANGE: (f64, f64) = (0.0270, 0.0524);
pub const DATASET_GAMMA_RANGE: (f64, f64) = (1.4030, 5.5619);
