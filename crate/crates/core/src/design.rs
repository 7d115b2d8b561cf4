//! Controller design: from the target 1-cycle `(T, λ)` and stabilising
//! composed slopes `(ξ, η)` to saturated piecewise-affine modulation
//! functions of the measured effect `y`:
//!
//! ```text
//! next interval  Φ̄(y) = clamp(k₂y + k₁, Φ₁, Φ₂)
//! next weight    F̄(y) = clamp(k₄y + k₃, F₁, F₂)
//! ```
//!
//! The measured-space slopes follow from the chain rule through the Hill
//! function, `ξ = k₄·φ′(ȳ₀)` and `η = k₂·φ′(ȳ₀)`; the intercepts pin the
//! 1-cycle, `F̄(φ(ȳ₀)) = λ` and `Φ̄(φ(ȳ₀)) = T`.

use serde::{Deserialize, Serialize};

use crate::cycle::{CycleTarget, Linearization, SlopePair};
use crate::error::{Error, Result};
use crate::plant::PlantParams;
use crate::sim::PulseModulator;

/// Saturation bounds `[Φ₁, Φ₂]` (min) and `[F₁, F₂]` (μg/kg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct SaturationBounds {
    phi_lo: f64,
    phi_hi: f64,
    f_lo: f64,
    f_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    phi_lo: f64,
    phi_hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl TryFrom<RawBounds> for SaturationBounds {
    type Error = Error;
    fn try_from(r: RawBounds) -> Result<Self> {
        SaturationBounds::new(r.phi_lo, r.phi_hi, r.f_lo, r.f_hi)
    }
}

impl From<SaturationBounds> for RawBounds {
    fn from(b: SaturationBounds) -> Self {
        RawBounds {
            phi_lo: b.phi_lo,
            phi_hi: b.phi_hi,
            f_lo: b.f_lo,
            f_hi: b.f_hi,
        }
    }
}

impl Default for SaturationBounds {
    /// Intervals 11–30 min, doses 80–400 μg/kg. The lower interval bound
    /// sits just above the 10 min end of the clinical 10–20 min maintenance
    /// range, which is what reproduces the reference closed-loop transients.
    fn default() -> Self {
        SaturationBounds {
            phi_lo: 11.0,
            phi_hi: 30.0,
            f_lo: 80.0,
            f_hi: 400.0,
        }
    }
}

impl SaturationBounds {
    pub fn new(phi_lo: f64, phi_hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(phi_lo > 0.0 && phi_lo.is_finite()) {
            return Err(Error::out_of_range("phi_lo", phi_lo, "phi_lo > 0"));
        }
        if !(phi_hi >= phi_lo && phi_hi.is_finite()) {
            return Err(Error::out_of_range("phi_hi", phi_hi, "phi_hi >= phi_lo"));
        }
        if !(f_lo > 0.0 && f_lo.is_finite()) {
            return Err(Error::out_of_range("f_lo", f_lo, "f_lo > 0"));
        }
        if !(f_hi >= f_lo && f_hi.is_finite()) {
            return Err(Error::out_of_range("f_hi", f_hi, "f_hi >= f_lo"));
        }
        Ok(SaturationBounds {
            phi_lo,
            phi_hi,
            f_lo,
            f_hi,
        })
    }

    pub fn phi(&self) -> (f64, f64) {
        (self.phi_lo, self.phi_hi)
    }

    pub fn f(&self) -> (f64, f64) {
        (self.f_lo, self.f_hi)
    }
}

/// Piecewise-affine modulation functions. Serialises as the flat document
/// `{k1, k2, k3, k4, phi_lo, phi_hi, f_lo, f_hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ModulationConfig {
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
    bounds: SaturationBounds,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
    phi_lo: f64,
    phi_hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl TryFrom<RawConfig> for ModulationConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        let bounds = SaturationBounds::new(r.phi_lo, r.phi_hi, r.f_lo, r.f_hi)?;
        ModulationConfig::new(r.k1, r.k2, r.k3, r.k4, bounds)
    }
}

impl From<ModulationConfig> for RawConfig {
    fn from(c: ModulationConfig) -> Self {
        RawConfig {
            k1: c.k1,
            k2: c.k2,
            k3: c.k3,
            k4: c.k4,
            phi_lo: c.bounds.phi_lo,
            phi_hi: c.bounds.phi_hi,
            f_lo: c.bounds.f_lo,
            f_hi: c.bounds.f_hi,
        }
    }
}

impl ModulationConfig {
    /// `k2 ≤ 0` and `k4 ≥ 0` so that, composed with the decreasing Hill
    /// function, the weight is non-increasing and the interval non-decreasing
    /// in the concentration.
    pub fn new(k1: f64, k2: f64, k3: f64, k4: f64, bounds: SaturationBounds) -> Result<Self> {
        for (name, v) in [("k1", k1), ("k3", k3)] {
            if !v.is_finite() {
                return Err(Error::out_of_range(name, v, "finite"));
            }
        }
        if !(k2 <= 0.0 && k2.is_finite()) {
            return Err(Error::out_of_range("k2", k2, "k2 <= 0"));
        }
        if !(k4 >= 0.0 && k4.is_finite()) {
            return Err(Error::out_of_range("k4", k4, "k4 >= 0"));
        }
        Ok(ModulationConfig { k1, k2, k3, k4, bounds })
    }

    /// Constant modulation `(T, λ)`: the open-loop pulse train.
    pub fn constant(target: &CycleTarget, bounds: SaturationBounds) -> Result<Self> {
        ModulationConfig::new(target.period(), 0.0, target.weight(), 0.0, bounds)
    }

    pub fn k(&self) -> [f64; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    pub fn bounds(&self) -> &SaturationBounds {
        &self.bounds
    }

    /// `(interval, weight)` for a measurement already known to be in range.
    pub(crate) fn eval_unchecked(&self, y: f64) -> (f64, f64) {
        let b = &self.bounds;
        let interval = (self.k2 * y + self.k1).clamp(b.phi_lo, b.phi_hi);
        let weight = (self.k4 * y + self.k3).clamp(b.f_lo, b.f_hi);
        (interval, weight)
    }
}

/// Next inter-dose interval (min) and next dose (μg/kg) for the measured
/// effect `y_measured` in percent.
pub fn eval_modulation(config: &ModulationConfig, y_measured: f64) -> Result<(f64, f64)> {
    if !(0.0..=100.0).contains(&y_measured) {
        return Err(Error::OutOfRangeMeasurement(y_measured));
    }
    Ok(config.eval_unchecked(y_measured))
}

/// A designed controller together with the non-fatal findings of the design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub config: ModulationConfig,
    /// Measured output at the design point, `φ(ȳ₀)` (%).
    pub y0: f64,
    /// Hill slope at the design point, `φ′(ȳ₀)`.
    pub hill_slope: f64,
    pub warnings: Vec<String>,
}

/// Runs the design algorithm: verify the slopes stabilise the 1-cycle of the
/// nominal plant, convert them to measured-output slopes through the Hill
/// derivative, and solve for the intercepts.
pub fn design_modulation(
    nominal_plant: &PlantParams,
    target: &CycleTarget,
    slopes: &SlopePair,
    bounds: &SaturationBounds,
) -> Result<Design> {
    let lin = Linearization::new(nominal_plant, target);
    if !lin.stability_report(slopes).stable {
        return Err(Error::UnstableSlopes {
            xi: slopes.xi(),
            eta: slopes.eta(),
        });
    }
    let (t, lambda) = (target.period(), target.weight());
    let (phi_lo, phi_hi) = bounds.phi();
    let (f_lo, f_hi) = bounds.f();
    if !(phi_lo..=phi_hi).contains(&t) {
        return Err(Error::InfeasibleBounds(format!(
            "period {t} min lies outside [{phi_lo}, {phi_hi}]"
        )));
    }
    if !(f_lo..=f_hi).contains(&lambda) {
        return Err(Error::InfeasibleBounds(format!(
            "weight {lambda} lies outside [{f_lo}, {f_hi}]"
        )));
    }

    let ybar0 = lin.fixed_point().ybar0;
    let y0 = nominal_plant.hill(ybar0)?;
    let dphi = nominal_plant.hill_slope(ybar0)?;
    // + 0.0 turns the −0 of a zero slope into +0
    let k4 = slopes.xi() / dphi + 0.0;
    let k2 = slopes.eta() / dphi + 0.0;
    let k3 = lambda - k4 * y0;
    let k1 = t - k2 * y0;
    let config = ModulationConfig::new(k1, k2, k3, k4, *bounds)?;

    let mut warnings = Vec::new();
    let checks = [
        (phi_lo <= k1, "phi_lo <= k1"),
        (100.0 * k2 + k1 <= phi_hi, "100*k2 + k1 <= phi_hi"),
        (f_lo <= k3, "f_lo <= k3"),
        (100.0 * k4 + k3 <= f_hi, "100*k4 + k3 <= f_hi"),
    ];
    for (ok, what) in checks {
        if !ok {
            warnings.push(format!("bound feasibility condition {what} is violated"));
        }
    }
    let on_edge = |v: f64, lo: f64, hi: f64, slope: f64| slope != 0.0 && (v == lo || v == hi);
    if on_edge(t, phi_lo, phi_hi, k2) || on_edge(lambda, f_lo, f_hi, k4) {
        warnings.push("design point sits on a saturation bound; the one-sided slope applies".into());
    }
    Ok(Design {
        config,
        y0,
        hill_slope: dphi,
        warnings,
    })
}

/// How the first dose at `t = 0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstPulse {
    /// The first dose follows the modulation law like every other.
    #[default]
    Feedback,
    /// The first weight is forced to the given bolus (μg/kg); the first
    /// interval still follows the modulation law.
    Bolus(f64),
}

/// A modulation law plus its start-up protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controller {
    pub config: ModulationConfig,
    #[serde(default)]
    pub first_pulse: FirstPulse,
}

impl Controller {
    pub fn new(config: ModulationConfig, first_pulse: FirstPulse) -> Result<Self> {
        if let FirstPulse::Bolus(w) = first_pulse {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::out_of_range("bolus", w, "bolus > 0"));
            }
        }
        Ok(Controller { config, first_pulse })
    }

    pub fn feedback(config: ModulationConfig) -> Self {
        Controller {
            config,
            first_pulse: FirstPulse::Feedback,
        }
    }
}

impl PulseModulator for ModulationConfig {
    fn modulate(&self, y_measured: f64) -> (f64, f64) {
        self.eval_unchecked(y_measured.clamp(0.0, 100.0))
    }
}

impl PulseModulator for Controller {
    fn modulate(&self, y_measured: f64) -> (f64, f64) {
        self.config.modulate(y_measured)
    }

    fn first(&self, y_measured: f64) -> (f64, f64) {
        let (interval, weight) = self.config.modulate(y_measured);
        match self.first_pulse {
            FirstPulse::Feedback => (interval, weight),
            FirstPulse::Bolus(bolus) => (interval, bolus),
        }
    }
}
