//! The periodic 1-cycle of the impulsive closed loop: its fixed point, the
//! Jacobian of the impulse-to-impulse map, the complete analytic Schur
//! stability test and convergence-rate optimisation over the feedback slopes.
//!
//! Notation: `E = e^{AT}`, `X` the pre-firing fixed point, `D = AX`,
//! `J = EB`, and the Jacobian `Q(ξ, η) = E + (ξJ + ηD)C` with `ξ = F′(ȳ₀) ≤ 0`
//! the composed amplitude slope and `η = Φ′(ȳ₀) ≥ 0` the composed frequency
//! slope, both taken with respect to the linear output `ȳ = Cx`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Mat3, Vec3};
use crate::matfun3::{cubic_eigenvalues, expm, matrix_function, spectral_radius, Spectrum3};
use crate::plant::{PlantParams, StateVec, B, C};

/// Relative threshold on `|c₀(η)|` below which the critical branch of the
/// stability test is used; relative to `c₀(0) = e^{−(a₁+a₂+a₃)T}`.
pub const CRITICAL_C0_TOL: f64 = 1e-12;
/// Relative distance to a pole below which `ψ` is refused.
pub const POLE_PROXIMITY_TOL: f64 = 1e-9;
/// Number of uniform scan points used to bracket a discriminant sign change.
pub const HOPF_SCAN_POINTS: usize = 256;
/// Slope resolution of the bisection that follows the scan.
pub const HOPF_SLOPE_TOL: f64 = 1e-10;

/// Desired 1-cycle: one firing of weight `λ` every `T` minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTarget", into = "RawTarget")]
pub struct CycleTarget {
    period: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct RawTarget {
    #[serde(rename = "T")]
    period: f64,
    lambda: f64,
}

impl TryFrom<RawTarget> for CycleTarget {
    type Error = Error;
    fn try_from(r: RawTarget) -> Result<Self> {
        CycleTarget::new(r.period, r.lambda)
    }
}

impl From<CycleTarget> for RawTarget {
    fn from(t: CycleTarget) -> Self {
        RawTarget {
            period: t.period,
            lambda: t.weight,
        }
    }
}

impl CycleTarget {
    /// `period` in minutes and `weight` in μg/kg, both strictly positive.
    pub fn new(period: f64, weight: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::out_of_range("T", period, "T > 0"));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::out_of_range("lambda", weight, "lambda > 0"));
        }
        Ok(CycleTarget { period, weight })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Composed feedback slopes at the fixed-point output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSlopes", into = "RawSlopes")]
pub struct SlopePair {
    xi: f64,
    eta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSlopes {
    xi: f64,
    eta: f64,
}

impl TryFrom<RawSlopes> for SlopePair {
    type Error = Error;
    fn try_from(r: RawSlopes) -> Result<Self> {
        SlopePair::new(r.xi, r.eta)
    }
}

impl From<SlopePair> for RawSlopes {
    fn from(s: SlopePair) -> Self {
        RawSlopes { xi: s.xi, eta: s.eta }
    }
}

impl SlopePair {
    pub const ZERO: SlopePair = SlopePair { xi: 0.0, eta: 0.0 };

    /// `xi ≤ 0` (non-increasing amplitude) and `eta ≥ 0` (non-decreasing
    /// interval).
    pub fn new(xi: f64, eta: f64) -> Result<Self> {
        if !(xi <= 0.0 && xi.is_finite()) {
            return Err(Error::out_of_range("xi", xi, "xi <= 0"));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::out_of_range("eta", eta, "eta >= 0"));
        }
        Ok(SlopePair { xi, eta })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Pre-firing state of the 1-cycle and its linear output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x: StateVec,
    pub ybar0: f64,
}

/// Every quantity entering the analytic stability test, plus the spectrum
/// for reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub psi_at_zero: f64,
    pub psi_at_minus_one: f64,
    pub c0: f64,
    pub c0_times_psi_c0: f64,
    pub critical_branch_used: bool,
    /// `|C e^{−2AT}(ξJ + ηD)|`; only meaningful in the critical branch.
    pub critical_lhs: Option<f64>,
    pub spectrum: Spectrum3,
    pub rho: f64,
    pub stable: bool,
}

/// Which single slope a one-dimensional search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeMode {
    /// Amplitude modulation only: vary `ξ`.
    Amplitude,
    /// Frequency modulation only: vary `η`.
    Frequency,
}

/// Search space of [`min_spectral_radius`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Amplitude,
    Frequency,
    Joint,
}

/// Rectangular slope box `[xi_lo, xi_hi] × [eta_lo, eta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeBox {
    pub xi: (f64, f64),
    pub eta: (f64, f64),
}

impl Default for SlopeBox {
    fn default() -> Self {
        SlopeBox {
            xi: (-30.0, 0.0),
            eta: (0.0, 3.0),
        }
    }
}

impl SlopeBox {
    fn validate(&self) -> Result<()> {
        let (xl, xh) = self.xi;
        let (el, eh) = self.eta;
        if !(xl <= xh && xh <= 0.0 && xl.is_finite()) {
            return Err(Error::out_of_range("xi box", xl, "xi_lo <= xi_hi <= 0"));
        }
        if !(0.0 <= el && el <= eh && eh.is_finite()) {
            return Err(Error::out_of_range("eta box", eh, "0 <= eta_lo <= eta_hi"));
        }
        Ok(())
    }
}

/// Outcome of a spectral-radius minimisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOptimum {
    pub slopes: SlopePair,
    pub rho: f64,
}

/// The cycle-dependent quantities shared by every slope-dependent test,
/// computed once per `(plant, target)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    plant: PlantParams,
    target: CycleTarget,
    e: Mat3,
    x: Vec3,
    d: Vec3,
    j: Vec3,
    /// `C A (I − E)⁻¹ B`, negative for every valid plant.
    kappa: f64,
    /// `e^{−(a₁+a₂+a₃)T} = det E`.
    det_e: f64,
}

/// `μ(x) = 1 / (e^{−x} − 1)`.
fn mu(x: f64) -> f64 {
    1.0 / (-x).exp_m1()
}

impl Linearization {
    pub fn new(plant: &PlantParams, target: &CycleTarget) -> Self {
        let t = target.period();
        let lambda = target.weight();
        let e = expm(plant, t);
        let j = e.column(0);
        let i_minus_e = Mat3::IDENTITY - e;
        // X = λ μ(TA) B: first column of μ(TA). Only for vanishing αT do the
        // nodes −aᵢT merge below the separation tolerance; the resolvent form
        // (I − E) X = λ E B serves that corner.
        let x = match matrix_function(plant, t, &mu) {
            Ok(mu_ta) => mu_ta.column(0).map(|v| lambda * v),
            Err(_) => i_minus_e
                .solve_lower(j.map(|v| lambda * v))
                .expect("I - E has positive diagonal"),
        };
        let a = plant.a_matrix();
        let d = a.mul_vec(x);
        let z = i_minus_e.solve_lower(B).expect("I - E has positive diagonal");
        let kappa = dot(C, a.mul_vec(z));
        let det_e = (-plant.pole_sum() * t).exp();
        Linearization {
            plant: *plant,
            target: *target,
            e,
            x,
            d,
            j,
            kappa,
            det_e,
        }
    }

    pub fn plant(&self) -> &PlantParams {
        &self.plant
    }

    pub fn target(&self) -> &CycleTarget {
        &self.target
    }

    /// `E = e^{AT}`.
    pub fn transition(&self) -> &Mat3 {
        &self.e
    }

    pub fn fixed_point(&self) -> FixedPoint {
        FixedPoint {
            x: StateVec::from(self.x),
            ybar0: self.x[2],
        }
    }

    /// `(D, J)`.
    pub fn impulse_vectors(&self) -> (Vec3, Vec3) {
        (self.d, self.j)
    }

    /// `C A (I − e^{AT})⁻¹ B`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The three diagonal entries `e^{−aᵢT}` of `E`, which are the poles of `ψ`.
    pub fn poles(&self) -> [f64; 3] {
        [self.e[(0, 0)], self.e[(1, 1)], self.e[(2, 2)]]
    }

    fn feedback_vector(&self, slopes: &SlopePair) -> Vec3 {
        axpy(slopes.xi, self.j, self.d.map(|v| v * slopes.eta))
    }

    pub fn jacobian(&self, slopes: &SlopePair) -> Mat3 {
        self.e + Mat3::outer(self.feedback_vector(slopes), C)
    }

    /// `ψ(s) = 1 − C(sI − E)⁻¹(ξJ + ηD)`.
    pub fn psi(&self, slopes: &SlopePair, s: f64) -> Result<f64> {
        for pole in self.poles() {
            if (s - pole).abs() < POLE_PROXIMITY_TOL * (1.0 + pole.abs()) {
                return Err(Error::PoleProximity { s, pole });
            }
        }
        Ok(self.psi_unchecked(slopes, s))
    }

    fn psi_unchecked(&self, slopes: &SlopePair, s: f64) -> f64 {
        let m = Mat3::IDENTITY.scale(s) - self.e;
        match m.solve_lower(self.feedback_vector(slopes)) {
            Some(z) => 1.0 - z[2],
            None => f64::NAN,
        }
    }

    /// `χ(s) = det(sI − Q(ξ, η))`, the pole-free form of `ψ`.
    pub fn chi(&self, slopes: &SlopePair, s: f64) -> f64 {
        let [b, c, d] = self.jacobian(slopes).char_poly();
        ((s + b) * s + c) * s + d
    }

    /// `c₀(η) = e^{−(a₁+a₂+a₃)T}(1 + ηλ·CA(I − E)⁻¹B) = det Q(ξ, η)`.
    pub fn c0(&self, eta: f64) -> f64 {
        self.det_e * (1.0 + eta * self.target.weight() * self.kappa)
    }

    /// The unique `η*` with `c₀(η*) = 0`.
    pub fn eta_star(&self) -> f64 {
        -1.0 / (self.target.weight() * self.kappa)
    }

    pub fn stability_report(&self, slopes: &SlopePair) -> StabilityReport {
        let c0 = self.c0(slopes.eta);
        let psi_at_zero = 1.0 + slopes.eta * self.target.weight() * self.kappa;
        // −1 is never a pole: all poles are positive
        let psi_at_minus_one = self.psi_unchecked(slopes, -1.0);
        let spectrum = cubic_eigenvalues(&self.jacobian(slopes));
        let rho = spectral_radius(&spectrum);
        let critical = c0.abs() <= CRITICAL_C0_TOL * self.det_e;
        let sigma_t = self.plant.pole_sum() * self.target.period();

        let (c0_times_psi_c0, critical_lhs, stable) = if critical {
            let lhs = self.critical_lhs(slopes);
            let stable = psi_at_minus_one > 0.0 && lhs < sigma_t.exp();
            (0.0, Some(lhs), stable)
        } else {
            // c₀ lies strictly below the smallest pole e^{−a₃T}
            let third = c0 * self.psi_unchecked(slopes, c0);
            let stable = c0 > -1.0 && psi_at_minus_one > 0.0 && third > 0.0;
            (third, None, stable)
        };

        StabilityReport {
            psi_at_zero,
            psi_at_minus_one,
            c0,
            c0_times_psi_c0,
            critical_branch_used: critical,
            critical_lhs,
            spectrum,
            rho,
            stable,
        }
    }

    /// `|C e^{−2AT}(ξJ + ηD)| = |ψ′(0)|`.
    fn critical_lhs(&self, slopes: &SlopePair) -> f64 {
        let w = self.feedback_vector(slopes);
        let once = self.e.solve_lower(w).unwrap_or([f64::NAN; 3]);
        let twice = self.e.solve_lower(once).unwrap_or([f64::NAN; 3]);
        twice[2].abs()
    }

    /// Coefficients `(γ₁, γ₂, γ₃)` of `det(sI − Q(ξ, 0)) = s³ − γ₁s² − γ₂s − γ₃`.
    pub fn amplitude_char_poly(&self, xi: f64) -> [f64; 3] {
        let e = &self.e;
        let (e1, e2, e3) = (e[(0, 0)], e[(1, 1)], e[(2, 2)]);
        let (p, q, r) = (e[(1, 0)], e[(2, 1)], e[(2, 0)]);
        let g1 = e1 + e2 + e3 + xi * r;
        let g2 = xi * (p * q - e2 * r) - e1 * (e2 + e3) - e2 * e3;
        let g3 = e1 * e2 * e3;
        [g1, g2, g3]
    }

    /// Eigenvector of `Q(ξ, 0)` for the real eigenvalue `s`, normalised to a
    /// unit third component.
    pub fn amplitude_eigenvector(&self, xi: f64, s: f64) -> Result<Vec3> {
        let e = &self.e;
        let (e1, e2, p) = (e[(0, 0)], e[(1, 1)], e[(1, 0)]);
        for pole in [e1, e2] {
            if (s - pole).abs() <= POLE_PROXIMITY_TOL * (1.0 + pole.abs()) {
                return Err(Error::DegenerateEigenvalue { eigenvalue: s, pole });
            }
        }
        let u1 = -xi * e1 / (e1 - s);
        let u2 = xi * s * p / ((e1 - s) * (e2 - s));
        Ok([u1, u2, 1.0])
    }

    /// Admissible range of the varied slope (with the other slope of `base`
    /// held fixed): from the base value up to the border `ψ(−1) = 0`, further
    /// limited by `c₀ > −1` in frequency mode.
    pub fn admissible_range(&self, base: &SlopePair, mode: SlopeMode) -> (f64, f64) {
        let m = Mat3::IDENTITY + self.e;
        let cj = m.solve_lower(self.j).expect("I + E is invertible")[2];
        let cd = m.solve_lower(self.d).expect("I + E is invertible")[2];
        match mode {
            // 1 + ξ·cJ + η·cD > 0 with cJ > 0
            SlopeMode::Amplitude => (-(1.0 + base.eta * cd) / cj, base.xi),
            // cD < 0
            SlopeMode::Frequency => {
                let border = -(1.0 + base.xi * cj) / cd;
                let c0_border = (1.0 + 1.0 / self.det_e) / (-self.target.weight() * self.kappa);
                (base.eta, border.min(c0_border))
            }
        }
    }

    fn discriminant_along(&self, base: &SlopePair, mode: SlopeMode, v: f64) -> f64 {
        let slopes = with_varied(base, mode, v);
        let [b, c, d] = self.jacobian(&slopes).char_poly();
        cubic_discriminant(b, c, d)
    }

    /// Slope at which two real multipliers merge into a complex pair when
    /// the `mode` slope is varied away from `base`.
    pub fn hopf_along(&self, base: &SlopePair, mode: SlopeMode) -> Result<f64> {
        let (lo, hi) = self.admissible_range(base, mode);
        // scan from the base slope outwards
        let (start, end) = match mode {
            SlopeMode::Amplitude => (hi, lo),
            SlopeMode::Frequency => (lo, hi),
        };
        // also rejects NaN bounds
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::NoBifurcationInRange { lo, hi });
        }
        let f = |v: f64| self.discriminant_along(base, mode, v);
        let mut prev = start;
        let mut prev_pos = f(start) > 0.0;
        let mut bracket = None;
        for i in 1..=HOPF_SCAN_POINTS {
            let v = start + (end - start) * i as f64 / HOPF_SCAN_POINTS as f64;
            let pos = f(v) > 0.0;
            if pos != prev_pos {
                bracket = Some((prev, v));
                break;
            }
            prev = v;
            prev_pos = pos;
        }
        let (mut a, mut b) = bracket.ok_or(Error::NoBifurcationInRange { lo, hi })?;
        let a_pos = f(a) > 0.0;
        while (b - a).abs() > HOPF_SLOPE_TOL {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == a_pos {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    pub fn spectral_radius_at(&self, slopes: &SlopePair) -> f64 {
        spectral_radius(&cubic_eigenvalues(&self.jacobian(slopes)))
    }
}

fn with_varied(base: &SlopePair, mode: SlopeMode, v: f64) -> SlopePair {
    match mode {
        SlopeMode::Amplitude => SlopePair { xi: v, eta: base.eta },
        SlopeMode::Frequency => SlopePair { xi: base.xi, eta: v },
    }
}

/// Discriminant of the monic cubic `s³ + bs² + cs + d`: positive for three
/// distinct real roots, negative for a complex-conjugate pair.
pub fn cubic_discriminant(b: f64, c: f64, d: f64) -> f64 {
    18.0 * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * c.powi(3) - 27.0 * d * d
}

pub fn fixed_point(plant: &PlantParams, target: &CycleTarget) -> FixedPoint {
    Linearization::new(plant, target).fixed_point()
}

/// `(D, J)` with `D = AX < 0` and `J = e^{AT}B > 0`.
pub fn impulse_vectors(plant: &PlantParams, target: &CycleTarget) -> (Vec3, Vec3) {
    Linearization::new(plant, target).impulse_vectors()
}

pub fn jacobian(plant: &PlantParams, target: &CycleTarget, slopes: &SlopePair) -> Mat3 {
    Linearization::new(plant, target).jacobian(slopes)
}

pub fn psi(plant: &PlantParams, target: &CycleTarget, slopes: &SlopePair, s: f64) -> Result<f64> {
    Linearization::new(plant, target).psi(slopes, s)
}

pub fn c0(plant: &PlantParams, target: &CycleTarget, eta: f64) -> f64 {
    Linearization::new(plant, target).c0(eta)
}

pub fn eta_star(plant: &PlantParams, target: &CycleTarget) -> f64 {
    Linearization::new(plant, target).eta_star()
}

pub fn stability_report(plant: &PlantParams, target: &CycleTarget, slopes: &SlopePair) -> StabilityReport {
    Linearization::new(plant, target).stability_report(slopes)
}

pub fn amplitude_char_poly(plant: &PlantParams, target: &CycleTarget, xi: f64) -> [f64; 3] {
    Linearization::new(plant, target).amplitude_char_poly(xi)
}

pub fn amplitude_eigenvector(plant: &PlantParams, target: &CycleTarget, xi: f64, eigenvalue: f64) -> Result<Vec3> {
    Linearization::new(plant, target).amplitude_eigenvector(xi, eigenvalue)
}

/// Single-slope bifurcation point starting from open loop.
pub fn hopf_slope(plant: &PlantParams, target: &CycleTarget, mode: SlopeMode) -> Result<f64> {
    Linearization::new(plant, target).hopf_along(&SlopePair::ZERO, mode)
}

/// Grid points per axis in the one-dimensional searches.
const LINE_GRID: usize = 2001;
/// Grid points per axis in the joint search and its refinement pass.
const JOINT_GRID: usize = 201;

/// Minimises `ρ(Q(ξ, η))` over `bounds` by grid search with local refinement.
/// In single-slope modes the other slope is held at zero (which must lie in
/// the box).
pub fn min_spectral_radius(
    plant: &PlantParams,
    target: &CycleTarget,
    mode: SearchMode,
    bounds: &SlopeBox,
) -> Result<RateOptimum> {
    bounds.validate()?;
    let lin = Linearization::new(plant, target);
    match mode {
        SearchMode::Amplitude => Ok(line_search(&lin, SlopeMode::Amplitude, bounds.xi)),
        SearchMode::Frequency => Ok(line_search(&lin, SlopeMode::Frequency, bounds.eta)),
        SearchMode::Joint => Ok(joint_search(&lin, bounds)),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn line_search(lin: &Linearization, mode: SlopeMode, (lo, hi): (f64, f64)) -> RateOptimum {
    let rho = |v: f64| lin.spectral_radius_at(&with_varied(&SlopePair::ZERO, mode, v));
    let grid: Vec<f64> = linspace(lo, hi, LINE_GRID).collect();
    let values: Vec<f64> = grid.par_iter().map(|&v| rho(v)).collect();
    let best = argmin(&values);
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (v, r) = golden_section(rho, a, b, 1e-12);
    let (v, r) = if r <= values[best] {
        (v, r)
    } else {
        (grid[best], values[best])
    };
    RateOptimum {
        slopes: with_varied(&SlopePair::ZERO, mode, v),
        rho: r,
    }
}

fn joint_search(lin: &Linearization, bounds: &SlopeBox) -> RateOptimum {
    let best = grid_min(lin, bounds.xi, bounds.eta);
    // refine on the cell neighbourhood of the coarse optimum
    let step_xi = (bounds.xi.1 - bounds.xi.0) / (JOINT_GRID - 1) as f64;
    let step_eta = (bounds.eta.1 - bounds.eta.0) / (JOINT_GRID - 1) as f64;
    let xi_box = (
        (best.slopes.xi - step_xi).max(bounds.xi.0),
        (best.slopes.xi + step_xi).min(bounds.xi.1),
    );
    let eta_box = (
        (best.slopes.eta - step_eta).max(bounds.eta.0),
        (best.slopes.eta + step_eta).min(bounds.eta.1),
    );
    let refined = grid_min(lin, xi_box, eta_box);
    if refined.rho <= best.rho {
        refined
    } else {
        best
    }
}

fn grid_min(lin: &Linearization, xi: (f64, f64), eta: (f64, f64)) -> RateOptimum {
    let xs: Vec<f64> = linspace(xi.0, xi.1, JOINT_GRID).collect();
    let es: Vec<f64> = linspace(eta.0, eta.1, JOINT_GRID).collect();
    // row-major reduction keeps ties deterministic regardless of scheduling
    let rows: Vec<RateOptimum> = xs
        .par_iter()
        .map(|&x| {
            let values: Vec<f64> = es
                .iter()
                .map(|&e| lin.spectral_radius_at(&SlopePair { xi: x, eta: e }))
                .collect();
            let k = argmin(&values);
            RateOptimum {
                slopes: SlopePair { xi: x, eta: es[k] },
                rho: values[k],
            }
        })
        .collect();
    let k = argmin(&rows.iter().map(|r| r.rho).collect::<Vec<_>>());
    rows[k]
}

/// Index of the first minimum; NaNs never win.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let v = 0.5 * (a + b);
    (v, f(v))
}

/// Roots of the amplitude-only polynomial as complex numbers, for callers
/// that want them without assembling the Jacobian.
pub fn amplitude_multipliers(lin: &Linearization, xi: f64) -> [Complex64; 3] {
    let [g1, g2, g3] = lin.amplitude_char_poly(xi);
    crate::matfun3::solve_monic_cubic(-g1, -g2, -g3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean() -> (PlantParams, CycleTarget) {
        (PlantParams::population_mean(), CycleTarget::new(20.0, 200.0).unwrap())
    }

    #[test]
    fn fixed_point_reproduces_reference() {
        let (p, t) = mean();
        let fp = fixed_point(&p, &t);
        assert_relative_eq!(fp.x.x1, 179.7316, epsilon = 5e-4);
        assert_relative_eq!(fp.x.x2, 56.3880, epsilon = 5e-4);
        assert_relative_eq!(fp.x.x3, 9.0833, epsilon = 5e-4);
        assert_eq!(fp.ybar0, fp.x.x3);
    }

    #[test]
    fn fixed_point_matches_resolvent_form() {
        let (p, t) = mean();
        let x = fixed_point(&p, &t).x.as_array();
        // (e^{−AT} − I) X = λB, with e^{−AT} = E⁻¹: equivalently X − E X = λ E B
        let e = expm(&p, 20.0);
        let lhs = axpy(-1.0, e.mul_vec(x), x);
        let rhs = e.column(0).map(|v| 200.0 * v);
        for k in 0..3 {
            assert_relative_eq!(lhs[k], rhs[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn targets_and_slopes_validate() {
        assert!(CycleTarget::new(0.0, 200.0).is_err());
        assert!(CycleTarget::new(20.0, 0.0).is_err());
        assert!(SlopePair::new(0.1, 0.0).is_err());
        assert!(SlopePair::new(-1.0, -0.1).is_err());
        assert!(SlopePair::new(-1.0, 0.1).is_ok());
    }

    #[test]
    fn case_two_spectrum() {
        let (p, t) = mean();
        let r = stability_report(&p, &t, &SlopePair::new(-2.0, 0.7).unwrap());
        assert!(r.stable);
        assert!(!r.critical_branch_used);
        assert_relative_eq!(r.rho, 0.2349, epsilon = 1e-3);
        assert!(r.spectrum.has_complex_pair());
        assert_relative_eq!(r.spectrum.eigenvalues[0].re, 0.1551, epsilon = 1e-3);
        assert_relative_eq!(r.spectrum.eigenvalues[0].im.abs(), 0.1765, epsilon = 1e-3);
        assert_relative_eq!(r.spectrum.eigenvalues[2].re, 0.0002, epsilon = 1e-3);
    }

    #[test]
    fn open_loop_is_stable_with_rate_of_slowest_pole() {
        let (p, t) = mean();
        let r = stability_report(&p, &t, &SlopePair::ZERO);
        assert!(r.stable);
        assert_relative_eq!(r.rho, (-p.poles()[0] * 20.0).exp(), max_relative = 1e-12);
        assert_eq!(psi(&p, &t, &SlopePair::ZERO, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn psi_refuses_poles() {
        let (p, t) = mean();
        let pole = (-p.poles()[1] * 20.0).exp();
        assert!(matches!(
            psi(&p, &t, &SlopePair::new(-1.0, 0.2).unwrap(), pole),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn critical_branch_at_eta_star() {
        let (p, t) = mean();
        let lin = Linearization::new(&p, &t);
        let es = lin.eta_star();
        assert!(es > 0.0);
        assert!(lin.c0(es).abs() <= CRITICAL_C0_TOL * lin.c0(0.0));
        let r = lin.stability_report(&SlopePair::new(-1.0, es).unwrap());
        assert!(r.critical_branch_used);
        assert_eq!(r.stable, r.rho < 1.0);
    }

    #[test]
    fn amplitude_poly_matches_jacobian() {
        let (p, t) = mean();
        let lin = Linearization::new(&p, &t);
        for xi in [0.0, -1.0, -8.0, -40.0] {
            let [g1, g2, g3] = lin.amplitude_char_poly(xi);
            let [b, c, d] = lin.jacobian(&SlopePair::new(xi, 0.0).unwrap()).char_poly();
            assert_relative_eq!(-g1, b, epsilon = 1e-14);
            assert_relative_eq!(-g2, c, epsilon = 1e-14);
            assert_relative_eq!(-g3, d, epsilon = 1e-16);
        }
    }

    #[test]
    fn amplitude_eigenvector_residual() {
        let (p, t) = mean();
        let lin = Linearization::new(&p, &t);
        let xi = -2.0;
        let q = lin.jacobian(&SlopePair::new(xi, 0.0).unwrap());
        let spec = cubic_eigenvalues(&q);
        for s in spec.real_eigenvalues() {
            let u = lin.amplitude_eigenvector(xi, s).unwrap();
            let qu = q.mul_vec(u);
            for k in 0..3 {
                assert!((qu[k] - s * u[k]).abs() <= 1e-8 * (1.0 + u[k].abs()));
            }
        }
        let e3 = lin.poles()[2];
        assert_eq!(lin.amplitude_eigenvector(0.0, e3).unwrap(), [0.0, 0.0, 1.0]);
        assert!(matches!(
            lin.amplitude_eigenvector(-1.0, lin.poles()[0]),
            Err(Error::DegenerateEigenvalue { .. })
        ));
    }

    #[test]
    fn amplitude_hopf_point_and_double_root() {
        let (p, t) = mean();
        let lin = Linearization::new(&p, &t);
        let xi = hopf_slope(&p, &t, SlopeMode::Amplitude).unwrap();
        assert_relative_eq!(xi, -8.2600, epsilon = 5e-2);
        let [g1, g2, g3] = lin.amplitude_char_poly(xi);
        // the two closest roots form the (numerically split) double root x₁
        let roots = amplitude_multipliers(&lin, xi);
        let (i, j, k) = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
            .into_iter()
            .min_by(|a, b| {
                let da = (roots[a.0] - roots[a.1]).norm();
                let db = (roots[b.0] - roots[b.1]).norm();
                da.total_cmp(&db)
            })
            .unwrap();
        let x1 = 0.5 * (roots[i] + roots[j]).re;
        let x3 = roots[k].re;
        assert!((g1 - (2.0 * x1 + x3)).abs() < 1e-6);
        assert!((g2 + (x1 * x1 + 2.0 * x1 * x3)).abs() < 1e-6);
        assert!((g3 - x1 * x1 * x3).abs() < 1e-6);
    }

    #[test]
    fn rate_minimiser_is_hopf_point_in_amplitude_mode() {
        let (p, t) = mean();
        let opt = min_spectral_radius(&p, &t, SearchMode::Amplitude, &SlopeBox::default()).unwrap();
        let hopf = hopf_slope(&p, &t, SlopeMode::Amplitude).unwrap();
        assert!((opt.slopes.xi() - hopf).abs() < 1e-2);
        assert!(opt.rho <= (-p.poles()[0] * 20.0).exp());
    }

    #[test]
    fn discriminant_signs() {
        // (s−1)(s−2)(s−3): three real roots
        assert!(cubic_discriminant(-6.0, 11.0, -6.0) > 0.0);
        // (s−1)(s²+1): complex pair
        assert!(cubic_discriminant(-1.0, 1.0, -1.0) < 0.0);
        // (s−1)²(s−2): double root
        assert_eq!(cubic_discriminant(-4.0, 5.0, -2.0), 0.0);
    }

    #[test]
    fn serde_round_trips() {
        let t = CycleTarget::new(20.0, 200.0).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"T":20.0,"lambda":200.0}"#);
        assert_eq!(serde_json::from_str::<CycleTarget>(&s).unwrap(), t);
        assert!(serde_json::from_str::<SlopePair>(r#"{"xi":1.0,"eta":0.0}"#).is_err());
    }
}
