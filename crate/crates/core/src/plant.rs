//! Wiener PK/PD patient model: a three-compartment linear chain followed by a
//! static Hill nonlinearity.
//!
//! ```text
//!      ⎡ −a₁   0    0  ⎤       ⎡1⎤
//! A =  ⎢  g₁  −a₂   0  ⎥,  B = ⎢0⎥,  C = [0 0 1],   y = φ(Cx)
//!      ⎣  0    g₂  −a₃ ⎦       ⎣0⎦
//! ```
//!
//! with `aᵢ = vᵢα`, `g₁ = v₁α`, `g₂ = v₂v₃α²`, so that `W(s)` has unit static
//! gain and relative degree three (two for the impulse response used by the
//! controller, since `CB = CAB = 0`).

use serde::{Deserialize, Serialize};

use crate::constants::{ALPHA_MAX, C50_DEFAULT, GAMMA_MAX, POLE_RATIOS, POP_MEAN_ALPHA, POP_MEAN_GAMMA};
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Input vector `B`.
pub const B: Vec3 = [1.0, 0.0, 0.0];
/// Output row `C`.
pub const C: Vec3 = [0.0, 0.0, 1.0];

/// Patient-specific plant parameters. Derived chain coefficients are computed
/// at construction and never change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlant", into = "RawPlant")]
pub struct PlantParams {
    alpha: f64,
    gamma: f64,
    c50: f64,
    a: [f64; 3],
    g: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct RawPlant {
    alpha: f64,
    gamma: f64,
    #[serde(default = "default_c50")]
    c50: f64,
}

fn default_c50() -> f64 {
    C50_DEFAULT
}

impl TryFrom<RawPlant> for PlantParams {
    type Error = Error;
    fn try_from(r: RawPlant) -> Result<Self> {
        PlantParams::new(r.alpha, r.gamma, r.c50)
    }
}

impl From<PlantParams> for RawPlant {
    fn from(p: PlantParams) -> Self {
        RawPlant {
            alpha: p.alpha,
            gamma: p.gamma,
            c50: p.c50,
        }
    }
}

impl PlantParams {
    /// Validates `0 < α ≤ 0.1`, `0 < γ ≤ 10`, `C₅₀ > 0` and derives the chain
    /// coefficients.
    pub fn new(alpha: f64, gamma: f64, c50: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= ALPHA_MAX) {
            return Err(Error::out_of_range("alpha", alpha, "0 < alpha <= 0.1"));
        }
        if !(gamma > 0.0 && gamma <= GAMMA_MAX) {
            return Err(Error::out_of_range("gamma", gamma, "0 < gamma <= 10"));
        }
        if !(c50 > 0.0 && c50.is_finite()) {
            return Err(Error::out_of_range("c50", c50, "c50 > 0"));
        }
        let [v1, v2, v3] = POLE_RATIOS;
        Ok(PlantParams {
            alpha,
            gamma,
            c50,
            a: [v1 * alpha, v2 * alpha, v3 * alpha],
            g: [v1 * alpha, v2 * v3 * alpha * alpha],
        })
    }

    /// The population-mean patient with the default `C₅₀`.
    pub fn population_mean() -> Self {
        PlantParams::new(POP_MEAN_ALPHA, POP_MEAN_GAMMA, C50_DEFAULT).expect("population-mean constants are in range")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c50(&self) -> f64 {
        self.c50
    }

    /// Pole magnitudes `(a₁, a₂, a₃)`, strictly increasing.
    pub fn poles(&self) -> [f64; 3] {
        self.a
    }

    /// Chain gains `(g₁, g₂)`.
    pub fn chain_gains(&self) -> [f64; 2] {
        self.g
    }

    pub fn pole_sum(&self) -> f64 {
        self.a.iter().sum()
    }

    /// The state matrix `A`.
    pub fn a_matrix(&self) -> Mat3 {
        let [a1, a2, a3] = self.a;
        let [g1, g2] = self.g;
        Mat3([[-a1, 0.0, 0.0], [g1, -a2, 0.0], [0.0, g2, -a3]])
    }

    /// Hill effect `φ(z) = 100 C₅₀^γ / (C₅₀^γ + z^γ)` in percent.
    pub fn hill(&self, z: f64) -> Result<f64> {
        if z < 0.0 || z.is_nan() {
            return Err(Error::NegativeConcentration(z));
        }
        Ok(self.hill_unchecked(z))
    }

    /// `φ′(z)`, in % per μg/ml.
    pub fn hill_slope(&self, z: f64) -> Result<f64> {
        if z < 0.0 || z.is_nan() {
            return Err(Error::NegativeConcentration(z));
        }
        if z == 0.0 {
            // z^{γ−1} vanishes for γ > 1, is 1 for γ = 1 and diverges below
            return Ok(match self.gamma.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => -100.0 / self.c50,
                _ => f64::NEG_INFINITY,
            });
        }
        // written in the ratio r = (z/C₅₀)^γ to stay finite for large z
        let r = (z / self.c50).powf(self.gamma);
        Ok(-100.0 * self.gamma * r / (z * (1.0 + r) * (1.0 + r)))
    }

    /// Hill function for states known to be nonnegative; tiny negative
    /// round-off is clamped to zero.
    pub(crate) fn hill_unchecked(&self, z: f64) -> f64 {
        let r = (z.max(0.0) / self.c50).powf(self.gamma);
        100.0 / (1.0 + r)
    }
}

/// Nonnegative compartment state `(x₁, x₂, x₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVec {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl StateVec {
    pub const ZERO: StateVec = StateVec {
        x1: 0.0,
        x2: 0.0,
        x3: 0.0,
    };

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        StateVec { x1, x2, x3 }
    }

    pub fn as_array(&self) -> Vec3 {
        [self.x1, self.x2, self.x3]
    }

    /// Linear output `ȳ = Cx`.
    pub fn output(&self) -> f64 {
        self.x3
    }

    pub fn is_nonnegative(&self) -> bool {
        self.x1 >= 0.0 && self.x2 >= 0.0 && self.x3 >= 0.0
    }
}

impl From<Vec3> for StateVec {
    fn from(v: Vec3) -> Self {
        StateVec::new(v[0], v[1], v[2])
    }
}

impl From<StateVec> for Vec3 {
    fn from(s: StateVec) -> Self {
        s.as_array()
    }
}
