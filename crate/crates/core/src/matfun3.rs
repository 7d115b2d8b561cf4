//! Scalar functions of the 3×3 lower-bidiagonal chain matrix.
//!
//! For the compartment chain `A` with poles `−a₁, −a₂, −a₃` and chain gains
//! `g₁, g₂`, any function analytic near the spectrum of `tA` is
//!
//! ```text
//!          ⎡ f(−a₁t)                 0               0      ⎤
//! f(tA) =  ⎢ g₁t·f[−a₁t,−a₂t]        f(−a₂t)         0      ⎥
//!          ⎣ g₁g₂t²·f[−a₁t,−a₂t,−a₃t] g₂t·f[−a₂t,−a₃t] f(−a₃t) ⎦
//! ```
//!
//! where `f[…]` are divided differences. No series expansion of the matrix
//! and no ODE integration is involved; the cost is three scalar evaluations.
//!
//! The module also hosts the closed-form cubic eigenvalue solver used for all
//! spectral tests on 3×3 Jacobians.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::plant::PlantParams;

/// Minimum admissible node separation, relative to the node magnitude.
pub const NODE_SEPARATION_TOL: f64 = 1e-9;
/// An eigenvalue is real when `|Im| ≤ REAL_TOL·(1 + |Re|)`.
pub const REAL_TOL: f64 = 1e-9;

/// A real scalar function together with its first and second divided
/// differences.
///
/// The default divided differences use the plain recursion. Implementors may
/// override them with cancellation-free forms; such implementations report
/// `stable_near_confluence() == true` and are then accepted for arbitrarily
/// close nodes.
pub trait ScalarFn {
    fn value(&self, x: f64) -> f64;

    fn dd1(&self, x0: f64, x1: f64) -> f64 {
        (self.value(x1) - self.value(x0)) / (x1 - x0)
    }

    fn dd2(&self, x0: f64, x1: f64, x2: f64) -> f64 {
        (self.dd1(x1, x2) - self.dd1(x0, x1)) / (x2 - x0)
    }

    fn stable_near_confluence(&self) -> bool {
        false
    }
}

impl<F: Fn(f64) -> f64> ScalarFn for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `x ↦ exp(rate·x)` with cancellation-free divided differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp {
    pub rate: f64,
}

impl Exp {
    pub const UNIT: Exp = Exp { rate: 1.0 };

    pub fn with_rate(rate: f64) -> Self {
        Exp { rate }
    }
}

impl ScalarFn for Exp {
    fn value(&self, x: f64) -> f64 {
        (self.rate * x).exp()
    }

    fn dd1(&self, x0: f64, x1: f64) -> f64 {
        self.rate * exp_dd1(self.rate * x0, self.rate * x1)
    }

    fn dd2(&self, x0: f64, x1: f64, x2: f64) -> f64 {
        let r = self.rate;
        r * r * exp_dd2(r * x0, r * x1, r * x2)
    }

    fn stable_near_confluence(&self) -> bool {
        true
    }
}

/// `exp[x0, x1]` without cancellation.
fn exp_dd1(x0: f64, x1: f64) -> f64 {
    let hi = x0.max(x1);
    let h = (x0 - x1).abs();
    if h == 0.0 {
        return hi.exp();
    }
    // e^hi · (1 − e^{−h}) / h
    hi.exp() * (-(-h).exp_m1()) / h
}

/// `exp[x0, x1, x2]`; power series in the shifted nodes when they are
/// clustered, recursion on the stable first differences otherwise.
fn exp_dd2(x0: f64, x1: f64, x2: f64) -> f64 {
    let hi = x0.max(x1).max(x2);
    let lo = x0.min(x1).min(x2);
    if hi - lo <= 1.0 {
        // Shift so that one node sits at 0: exp[x0,x1,x2] = e^{x0}·exp[0,u,v],
        // exp[0,u,v] = Σ_k h_k(u,v)/(k+2)! with h_k the complete homogeneous
        // symmetric polynomial of degree k.
        let (u, v) = (x1 - x0, x2 - x0);
        let mut h = 1.0;
        let mut v_pow = 1.0;
        let mut fact = 2.0;
        let mut sum = 0.5;
        for k in 1..30 {
            v_pow *= v;
            h = u * h + v_pow;
            fact *= (k + 2) as f64;
            let term = h / fact;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() * 1e-3 {
                break;
            }
        }
        x0.exp() * sum
    } else {
        (exp_dd1(x1, x2) - exp_dd1(x0, x1)) / (x2 - x0)
    }
}

/// Triangular divided-difference table over a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifferenceTable {
    nodes: Vec<f64>,
    /// `levels[k][i] = f[x_i, …, x_{i+k}]`
    levels: Vec<Vec<f64>>,
}

impl DividedDifferenceTable {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `f[x_i, …, x_j]` for `i ≤ j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i <= j && j < self.nodes.len(), "invalid table index ({i}, {j})");
        self.levels[j - i][i]
    }

    /// `f[x_0, …, x_n]`, the highest-order entry.
    pub fn leading(&self) -> f64 {
        self.levels[self.levels.len() - 1][0]
    }

    pub fn order(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }
}

fn check_separation(nodes: &[f64]) -> Result<()> {
    let scale = 1.0 + nodes.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if (nodes[i] - nodes[j]).abs() < NODE_SEPARATION_TOL * scale {
                return Err(Error::NodesTooClose {
                    i,
                    j,
                    xi: nodes[i],
                    xj: nodes[j],
                });
            }
        }
    }
    Ok(())
}

/// Builds the full divided-difference table of `f` by the standard
/// recursion `f[x₀…x_k] = (f[x₁…x_k] − f[x₀…x_{k−1}]) / (x_k − x₀)`.
pub fn divided_differences<F: Fn(f64) -> f64>(f: F, nodes: &[f64]) -> Result<DividedDifferenceTable> {
    check_separation(nodes)?;
    let mut levels = Vec::with_capacity(nodes.len());
    levels.push(nodes.iter().map(|&x| f(x)).collect::<Vec<_>>());
    for k in 1..nodes.len() {
        let prev = &levels[k - 1];
        let next = (0..nodes.len() - k)
            .map(|i| (prev[i + 1] - prev[i]) / (nodes[i + k] - nodes[i]))
            .collect();
        levels.push(next);
    }
    Ok(DividedDifferenceTable {
        nodes: nodes.to_vec(),
        levels,
    })
}

/// `f(tA)` for the plant's chain matrix via the Opitz formula.
pub fn matrix_function<F: ScalarFn + ?Sized>(plant: &PlantParams, t: f64, f: &F) -> Result<Mat3> {
    if t.is_nan() || t < 0.0 || t.is_infinite() {
        return Err(Error::out_of_range("t", t, "t >= 0"));
    }
    if t == 0.0 {
        return Ok(Mat3::IDENTITY.scale(f.value(0.0)));
    }
    let [a1, a2, a3] = plant.poles();
    let [g1, g2] = plant.chain_gains();
    let x = [-a1 * t, -a2 * t, -a3 * t];
    if !f.stable_near_confluence() {
        check_separation(&x)?;
    }
    Ok(Mat3([
        [f.value(x[0]), 0.0, 0.0],
        [g1 * t * f.dd1(x[0], x[1]), f.value(x[1]), 0.0],
        [
            g1 * g2 * t * t * f.dd2(x[0], x[1], x[2]),
            g2 * t * f.dd1(x[1], x[2]),
            f.value(x[2]),
        ],
    ]))
}

/// `e^{At}` for `t ≥ 0`. Infallible because the exponential's divided
/// differences are evaluated without cancellation.
pub fn expm(plant: &PlantParams, t: f64) -> Mat3 {
    assert!(t >= 0.0, "expm requires t >= 0, got {t}");
    matrix_function(plant, t, &Exp::UNIT).expect("exp is defined for all nodes")
}

/// Eigenvector matrices `S`, `S⁻¹` with `A = S·diag(−aᵢ)·S⁻¹`.
pub fn similarity(plant: &PlantParams) -> (Mat3, Mat3) {
    let [a1, a2, a3] = plant.poles();
    let [g1, g2] = plant.chain_gains();
    let s = Mat3([
        [1.0, 0.0, 0.0],
        [g1 / (a2 - a1), 1.0, 0.0],
        [g1 * g2 / ((a2 - a1) * (a3 - a1)), g2 / (a3 - a2), 1.0],
    ]);
    let s_inv = Mat3([
        [1.0, 0.0, 0.0],
        [g1 / (a1 - a2), 1.0, 0.0],
        [g1 * g2 / ((a1 - a3) * (a2 - a3)), g2 / (a2 - a3), 1.0],
    ]);
    (s, s_inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    Real,
    ConjugatePair,
}

/// The three eigenvalues of a real 3×3 matrix, sorted by decreasing modulus.
/// A conjugate pair is stored adjacently, positive imaginary part first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum3 {
    pub eigenvalues: [Complex64; 3],
    pub kinds: [EigenKind; 3],
}

impl Spectrum3 {
    /// Builds a spectrum from raw roots, applying the real/complex
    /// classification tolerance.
    pub fn from_roots(roots: [Complex64; 3]) -> Self {
        let mut roots = roots.map(|z| {
            if z.im.abs() <= REAL_TOL * (1.0 + z.re.abs()) {
                Complex64::new(z.re, 0.0)
            } else {
                z
            }
        });
        roots.sort_by(|x, y| {
            y.norm()
                .partial_cmp(&x.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let kinds = roots.map(|z| {
            if z.im == 0.0 {
                EigenKind::Real
            } else {
                EigenKind::ConjugatePair
            }
        });
        Spectrum3 {
            eigenvalues: roots,
            kinds,
        }
    }

    pub fn real_eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues
            .iter()
            .zip(self.kinds.iter())
            .filter(|(_, k)| **k == EigenKind::Real)
            .map(|(z, _)| z.re)
    }

    pub fn has_complex_pair(&self) -> bool {
        self.kinds.contains(&EigenKind::ConjugatePair)
    }

    /// Monic characteristic polynomial `(b, c, d)` rebuilt from the roots.
    pub fn char_poly(&self) -> [f64; 3] {
        let [z1, z2, z3] = self.eigenvalues;
        let b = -(z1 + z2 + z3);
        let c = z1 * z2 + z1 * z3 + z2 * z3;
        let d = -(z1 * z2 * z3);
        [b.re, c.re, d.re]
    }
}

pub fn spectral_radius(s: &Spectrum3) -> f64 {
    s.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Roots of the monic cubic `s³ + b s² + c s + d`, closed form plus one
/// guarded Newton polish per root.
pub fn solve_monic_cubic(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let raw: [Complex64; 3] = if disc > 0.0 {
        let sq = disc.sqrt();
        // pick the branch that avoids cancellation
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let re = -(u + v) / 2.0 - shift;
        let im = 3.0_f64.sqrt() / 2.0 * (u - v).abs();
        [
            Complex64::new(u + v - shift, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else if p == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(r * (phi - tau * k).cos() - shift, 0.0))
    };

    let poly = |s: Complex64| ((s + b) * s + c) * s + d;
    let dpoly = |s: Complex64| (3.0 * s + 2.0 * b) * s + c;
    let mut roots = raw.map(|s| {
        let ds = dpoly(s);
        if ds.norm() == 0.0 {
            return s;
        }
        let cand = s - poly(s) / ds;
        if poly(cand).norm() < poly(s).norm() {
            cand
        } else {
            s
        }
    });
    // keep conjugate symmetry exact after polishing
    if raw[1].im != 0.0 {
        roots[0].im = 0.0;
        roots[2] = roots[1].conj();
    }
    roots
}

/// Eigenvalues of a real 3×3 matrix through its characteristic cubic.
pub fn cubic_eigenvalues(m: &Mat3) -> Spectrum3 {
    let [b, c, d] = m.char_poly();
    Spectrum3::from_roots(solve_monic_cubic(b, c, d))
}
