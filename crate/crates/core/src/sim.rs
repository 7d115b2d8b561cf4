//! Exact event-driven simulation of the impulsive closed loop and of
//! open-loop dose schedules.
//!
//! Between firings the plant is linear and time-invariant, so every state is
//! obtained from the previous post-jump state by one matrix exponential; the
//! sample grid is purely observational and never influences the events.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cycle::{fixed_point, CycleTarget};
use crate::error::{Error, Result};
use crate::linalg::axpy;
use crate::matfun3::expm;
use crate::plant::{PlantParams, StateVec, B};

/// Default observation step (min).
pub const DEFAULT_DT_SAMPLE: f64 = 0.01;
/// Default horizon of transient studies, in periods.
pub const DEFAULT_HORIZON_PERIODS: f64 = 12.0;

/// A pulse-modulation law: maps the measured effect at a firing instant to
/// the next interval (min) and the weight of the impulse fired now (μg/kg).
pub trait PulseModulator {
    fn modulate(&self, y_measured: f64) -> (f64, f64);

    /// The decision at `t = 0`; by default the same law.
    fn first(&self, y_measured: f64) -> (f64, f64) {
        self.modulate(y_measured)
    }
}

/// Constant modulation: the open-loop pulse train of the target 1-cycle.
impl PulseModulator for CycleTarget {
    fn modulate(&self, _y_measured: f64) -> (f64, f64) {
        (self.period(), self.weight())
    }
}

impl<M: PulseModulator + ?Sized> PulseModulator for &M {
    fn modulate(&self, y_measured: f64) -> (f64, f64) {
        (**self).modulate(y_measured)
    }

    fn first(&self, y_measured: f64) -> (f64, f64) {
        (**self).first(y_measured)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Firing {
    pub t: f64,
    pub weight: f64,
    /// Time until the next event (min).
    pub interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub state: StateVec,
    pub ybar: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub firings: Vec<Firing>,
    pub samples: Vec<Sample>,
    pub dt_sample: f64,
}

/// Open-loop administration plan: `(time, dose)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DoseSchedule {
    events: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for DoseSchedule {
    type Error = Error;
    fn try_from(events: Vec<(f64, f64)>) -> Result<Self> {
        DoseSchedule::new(events)
    }
}

impl From<DoseSchedule> for Vec<(f64, f64)> {
    fn from(s: DoseSchedule) -> Self {
        s.events
    }
}

impl DoseSchedule {
    /// Times must be nonnegative and nondecreasing, doses positive.
    /// Coincident events are merged by summing their doses.
    pub fn new(events: Vec<(f64, f64)>) -> Result<Self> {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(events.len());
        for (t, dose) in events {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::out_of_range("dose time", t, "t >= 0"));
            }
            if !(dose > 0.0 && dose.is_finite()) {
                return Err(Error::out_of_range("dose", dose, "dose > 0"));
            }
            match merged.last_mut() {
                Some(last) if t < last.0 => return Err(Error::out_of_range("dose time", t, "nondecreasing times")),
                Some(last) if t == last.0 => last.1 += dose,
                _ => merged.push((t, dose)),
            }
        }
        Ok(DoseSchedule { events: merged })
    }

    /// A bolus at `t = 0` followed by `count` maintenance doses every
    /// `period` minutes.
    pub fn bolus_maintenance(bolus: f64, maintenance: f64, period: f64, count: usize) -> Result<Self> {
        let mut events = vec![(0.0, bolus)];
        events.extend((1..=count).map(|k| (k as f64 * period, maintenance)));
        DoseSchedule::new(events)
    }

    /// The reference open-loop protocol: 400 μg/kg bolus, then five
    /// maintenance doses of 200 μg/kg every 20 min.
    pub fn reference_protocol() -> Self {
        DoseSchedule::bolus_maintenance(400.0, 200.0, 20.0, 5).expect("valid constants")
    }

    pub fn events(&self) -> &[(f64, f64)] {
        &self.events
    }

    /// Every dose multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DoseSchedule::new(self.events.iter().map(|&(t, d)| (t, d * factor)).collect())
    }
}

fn check_run(horizon: f64, dt_sample: f64, x0: &StateVec) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::out_of_range("horizon", horizon, "horizon > 0"));
    }
    if !(dt_sample > 0.0 && dt_sample.is_finite()) {
        return Err(Error::out_of_range("dt_sample", dt_sample, "dt_sample > 0"));
    }
    for v in x0.as_array() {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::NegativeConcentration(v));
        }
    }
    Ok(())
}

fn sample(plant: &PlantParams, time: f64, state: StateVec) -> Sample {
    let ybar = state.output();
    Sample {
        time,
        state,
        ybar,
        y: plant.hill_unchecked(ybar),
    }
}

/// Cursor on the global sample grid `k·dt`.
struct Sampler<'a> {
    plant: &'a PlantParams,
    dt: f64,
    next_k: usize,
    samples: Vec<Sample>,
}

impl<'a> Sampler<'a> {
    fn new(plant: &'a PlantParams, dt: f64) -> Self {
        Sampler {
            plant,
            dt,
            next_k: 0,
            samples: Vec::new(),
        }
    }

    /// Records the grid points falling into `[t0, t1)` (or `[t0, t1]` when
    /// `closed`), propagating from the post-jump state `x`.
    fn segment(&mut self, x: [f64; 3], t0: f64, t1: f64, closed: bool) {
        loop {
            let time = self.next_k as f64 * self.dt;
            if time > t1 || (time == t1 && !closed) {
                break;
            }
            let state = StateVec::from(expm(self.plant, (time - t0).max(0.0)).mul_vec(x));
            self.samples.push(sample(self.plant, time, state));
            self.next_k += 1;
        }
    }
}

/// One impulse-to-impulse step of the closed loop: measure, fire, propagate.
pub fn impulse_map<M: PulseModulator + ?Sized>(plant: &PlantParams, modulator: &M, x_pre: &StateVec) -> StateVec {
    let y = plant.hill_unchecked(x_pre.output());
    let (interval, weight) = modulator.modulate(y);
    let jumped = axpy(weight, B, x_pre.as_array());
    StateVec::from(expm(plant, interval).mul_vec(jumped))
}

/// Simulates the hybrid closed loop from `x0` on `[0, horizon]`. The first
/// firing happens at `t = 0` and uses [`PulseModulator::first`].
pub fn simulate_closed_loop<M: PulseModulator + ?Sized>(
    plant: &PlantParams,
    modulator: &M,
    x0: &StateVec,
    horizon: f64,
    dt_sample: f64,
) -> Result<SimTrace> {
    check_run(horizon, dt_sample, x0)?;
    let mut firings = Vec::new();
    let mut sampler = Sampler::new(plant, dt_sample);
    let mut t = 0.0;
    let mut x = x0.as_array();
    while t <= horizon {
        let y = plant.hill_unchecked(x[2]);
        let (interval, weight) = if firings.is_empty() {
            modulator.first(y)
        } else {
            modulator.modulate(y)
        };
        firings.push(Firing { t, weight, interval });
        x = axpy(weight, B, x);
        let t_next = t + interval;
        let last = t_next > horizon;
        sampler.segment(x, t, t_next.min(horizon), last);
        if last {
            break;
        }
        x = expm(plant, interval).mul_vec(x);
        t = t_next;
    }
    Ok(SimTrace {
        firings,
        samples: sampler.samples,
        dt_sample,
    })
}

/// Simulates an open-loop schedule from the drug-free state on `[0, horizon]`.
pub fn simulate_open_loop(
    plant: &PlantParams,
    schedule: &DoseSchedule,
    horizon: f64,
    dt_sample: f64,
) -> Result<SimTrace> {
    check_run(horizon, dt_sample, &StateVec::ZERO)?;
    if let Some(&(t, _)) = schedule.events.iter().find(|&&(t, _)| t > horizon) {
        return Err(Error::out_of_range("dose time", t, "within the horizon"));
    }
    let mut firings = Vec::new();
    let mut sampler = Sampler::new(plant, dt_sample);
    let mut x = [0.0; 3];
    let mut t = 0.0;
    for (i, &(te, dose)) in schedule.events.iter().enumerate() {
        // drift from the previous event (or the start) to this one
        sampler.segment(x, t, te, false);
        x = expm(plant, te - t).mul_vec(x);
        x = axpy(dose, B, x);
        let t_next = schedule.events.get(i + 1).map_or(horizon, |e| e.0);
        firings.push(Firing {
            t: te,
            weight: dose,
            interval: t_next - te,
        });
        t = te;
    }
    sampler.segment(x, t, horizon, true);
    Ok(SimTrace {
        firings,
        samples: sampler.samples,
        dt_sample,
    })
}

/// Vertex of the parabola through three equally spaced samples around an
/// interior extremum; falls back to the middle sample when degenerate.
fn parabolic_extremum(y_prev: f64, y_mid: f64, y_next: f64) -> f64 {
    let curvature = y_prev - 2.0 * y_mid + y_next;
    if curvature == 0.0 {
        return y_mid;
    }
    let slope = y_prev - y_next;
    // vertex offset in units of the step; only trust it inside the bracket
    let offset = slope / (2.0 * curvature);
    if offset.abs() > 1.0 {
        return y_mid;
    }
    y_mid - slope * slope / (8.0 * curvature)
}

/// Refined extremum of `ys` (minimum when `min`), refining interior extrema.
fn refined_extremum(ys: &[f64], min: bool) -> f64 {
    let better = |a: f64, b: f64| if min { a < b } else { a > b };
    let mut k = 0;
    for (i, &v) in ys.iter().enumerate() {
        if better(v, ys[k]) {
            k = i;
        }
    }
    if k == 0 || k + 1 == ys.len() {
        return ys[k];
    }
    let v = parabolic_extremum(ys[k - 1], ys[k], ys[k + 1]);
    if min {
        v.min(ys[k])
    } else {
        v.max(ys[k])
    }
}

/// Output band `(y_lo, y_hi)` of the steady 1-cycle started at the fixed
/// point. Two periods are sampled so that the extremum near the firing
/// instant is interior and can be refined.
pub fn cycle_corridor(plant: &PlantParams, target: &CycleTarget, dt_sample: f64) -> Result<(f64, f64)> {
    if !(dt_sample > 0.0 && dt_sample < target.period()) {
        return Err(Error::out_of_range("dt_sample", dt_sample, "0 < dt_sample < T"));
    }
    let x0 = fixed_point(plant, target).x;
    let horizon = 2.0 * target.period();
    let trace = simulate_closed_loop(plant, target, &x0, horizon, dt_sample)?;
    let ys: Vec<f64> = trace.samples.iter().map(|s| s.y).collect();
    Ok((refined_extremum(&ys, true), refined_extremum(&ys, false)))
}

/// Summary metrics of a transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    /// Infimum of `y` over the whole trace.
    pub inf_y: f64,
    /// Supremum of `y` over `[T, 5T]`.
    pub sup_y_t_5t: f64,
}

/// `inf y` over the horizon and `sup y` over `[T, 5T]`; the initial
/// `y(0) = 100 %` is thereby excluded from the supremum.
pub fn trace_metrics(trace: &SimTrace, period_t: f64) -> Result<TraceMetrics> {
    let horizon = trace.samples.last().map_or(0.0, |s| s.time);
    let required = 5.0 * period_t;
    // the last grid point may fall short of the nominal horizon by rounding
    if horizon + 0.5 * trace.dt_sample < required {
        return Err(Error::HorizonTooShort { horizon, required });
    }
    let ys: Vec<f64> = trace.samples.iter().map(|s| s.y).collect();
    let window: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.time >= period_t && s.time <= required)
        .map(|s| s.y)
        .collect();
    Ok(TraceMetrics {
        inf_y: refined_extremum(&ys, true),
        sup_y_t_5t: refined_extremum(&window, false),
    })
}

/// Writes the samples as CSV with header `time_min,x1,x2,x3,ybar,y`,
/// preceded by an optional `# …` provenance line.
pub fn write_samples_csv<W: Write>(trace: &SimTrace, mut out: W, provenance: Option<&str>) -> Result<()> {
    if let Some(p) = provenance {
        writeln!(out, "# {p}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_min", "x1", "x2", "x3", "ybar", "y"])
        .map_err(csv_io)?;
    for s in &trace.samples {
        let StateVec { x1, x2, x3 } = s.state;
        w.serialize((s.time, x1, x2, x3, s.ybar, s.y)).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the firings as CSV with header `t_min,weight,interval`.
pub fn write_firings_csv<W: Write>(trace: &SimTrace, mut out: W, provenance: Option<&str>) -> Result<()> {
    if let Some(p) = provenance {
        writeln!(out, "# {p}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_min", "weight", "interval"]).map_err(csv_io)?;
    for f in &trace.firings {
        w.serialize((f.t, f.weight, f.interval)).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean() -> (PlantParams, CycleTarget) {
        (PlantParams::population_mean(), CycleTarget::new(20.0, 200.0).unwrap())
    }

    #[test]
    fn fixed_point_is_invariant_under_constant_modulation() {
        let (p, t) = mean();
        let x = fixed_point(&p, &t).x;
        let next = impulse_map(&p, &t, &x);
        for (a, b) in next.as_array().iter().zip(x.as_array()) {
            assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn empty_schedule_leaves_patient_unblocked() {
        let p = PlantParams::population_mean();
        let trace = simulate_open_loop(&p, &DoseSchedule::new(vec![]).unwrap(), 30.0, 0.5).unwrap();
        assert_eq!(trace.samples.len(), 61);
        assert!(trace.samples.iter().all(|s| s.y == 100.0));
        assert!(trace.firings.is_empty());
    }

    #[test]
    fn single_impulse_matches_triple_exponential() {
        let p = PlantParams::population_mean();
        let [a1, a2, a3] = p.poles();
        let [g1, g2] = p.chain_gains();
        let lambda = 300.0;
        let trace = simulate_open_loop(&p, &DoseSchedule::new(vec![(0.0, lambda)]).unwrap(), 60.0, 0.25).unwrap();
        for s in &trace.samples {
            let t = s.time;
            // partial fractions of g₁g₂ / ((s+a₁)(s+a₂)(s+a₃))
            let y = g1
                * g2
                * ((-a1 * t).exp() / ((a2 - a1) * (a3 - a1))
                    + (-a2 * t).exp() / ((a1 - a2) * (a3 - a2))
                    + (-a3 * t).exp() / ((a1 - a3) * (a2 - a3)));
            assert_relative_eq!(s.ybar, lambda * y, epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn coincident_doses_merge() {
        let s = DoseSchedule::new(vec![(0.0, 100.0), (0.0, 50.0), (10.0, 20.0)]).unwrap();
        assert_eq!(s.events(), &[(0.0, 150.0), (10.0, 20.0)]);
        assert!(DoseSchedule::new(vec![(10.0, 1.0), (5.0, 1.0)]).is_err());
        assert!(DoseSchedule::new(vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn corridor_matches_reference() {
        let (p, t) = mean();
        let (lo, hi) = cycle_corridor(&p, &t, DEFAULT_DT_SAMPLE).unwrap();
        assert_relative_eq!(lo, 3.9866, epsilon = 2e-3);
        assert_relative_eq!(hi, 6.1562, epsilon = 2e-3);
    }

    #[test]
    fn short_horizon_is_rejected() {
        let (p, t) = mean();
        let trace = simulate_closed_loop(&p, &t, &StateVec::ZERO, 50.0, 0.1).unwrap();
        assert!(matches!(
            trace_metrics(&trace, 20.0),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn closed_loop_events_are_independent_of_sampling() {
        let (p, t) = mean();
        let a = simulate_closed_loop(&p, &t, &StateVec::ZERO, 100.0, 0.1).unwrap();
        let b = simulate_closed_loop(&p, &t, &StateVec::ZERO, 100.0, 0.05).unwrap();
        assert_eq!(a.firings, b.firings);
        assert_eq!(a.firings.len(), 6);
    }

    #[test]
    fn csv_headers() {
        let (p, t) = mean();
        let trace = simulate_closed_loop(&p, &t, &StateVec::ZERO, 5.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&trace, &mut buf, Some("prov")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# prov"));
        assert_eq!(lines.next(), Some("time_min,x1,x2,x3,ybar,y"));
        assert_eq!(lines.count(), 6);
        let mut buf = Vec::new();
        write_firings_csv(&trace, &mut buf, None).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("t_min,weight,interval\n0.0,200.0,20.0"));
    }
}
