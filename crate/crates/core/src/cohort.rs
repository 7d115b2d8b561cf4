//! Virtual-patient cohorts: loading, seeded synthesis, and population
//! evaluation of dosing policies against clinical effect bounds.

use std::collections::HashSet;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{ALPHA_MAX, C50_DEFAULT, DATASET_ALPHA_RANGE, DATASET_GAMMA_RANGE, GAMMA_MAX, Y_MAX, Y_MIN};
use crate::design::Controller;
use crate::error::{Error, Result};
use crate::plant::{PlantParams, StateVec};
use crate::sim::{
    csv_io, simulate_closed_loop, simulate_open_loop, trace_metrics, DoseSchedule, DEFAULT_DT_SAMPLE,
    DEFAULT_HORIZON_PERIODS,
};

/// One virtual patient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub pin: u32,
    pub alpha: f64,
    pub gamma: f64,
}

impl PatientRecord {
    pub fn new(pin: u32, alpha: f64, gamma: f64) -> Result<Self> {
        if pin == 0 {
            return Err(Error::out_of_range("pin", 0.0, "pin >= 1"));
        }
        // validates the ranges
        PlantParams::new(alpha, gamma, C50_DEFAULT)?;
        Ok(PatientRecord { pin, alpha, gamma })
    }

    pub fn plant(&self) -> PlantParams {
        PlantParams::new(self.alpha, self.gamma, C50_DEFAULT).expect("validated at construction")
    }

    /// True when the record lies outside the parameter box observed in the
    /// identification cohort (advisory only).
    pub fn outside_dataset_range(&self) -> bool {
        let (al, ah) = DATASET_ALPHA_RANGE;
        let (gl, gh) = DATASET_GAMMA_RANGE;
        !(al..=ah).contains(&self.alpha) || !(gl..=gh).contains(&self.gamma)
    }
}

/// Reads a cohort CSV with header `pin,alpha,gamma`. Row numbers in errors
/// are 1-based line numbers of the document.
pub fn load_cohort<R: Read>(source: R) -> Result<Vec<PatientRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = reader.headers().map_err(|e| parse_error(1, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pin", "alpha", "gamma"] {
        return Err(Error::Parse {
            row: 1,
            message: format!(
                "expected header `pin,alpha,gamma`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for result in reader.records() {
        let raw = result.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            parse_error(row, e)
        })?;
        let row = raw.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| raw.get(i).unwrap_or("");
        let pin: u32 = field(0).parse().map_err(|e| parse_error(row, format!("pin: {e}")))?;
        let alpha: f64 = field(1).parse().map_err(|e| parse_error(row, format!("alpha: {e}")))?;
        let gamma: f64 = field(2).parse().map_err(|e| parse_error(row, format!("gamma: {e}")))?;
        let record = PatientRecord::new(pin, alpha, gamma).map_err(|e| Error::AtRow {
            row,
            source: Box::new(e),
        })?;
        if !seen.insert(pin) {
            return Err(Error::DuplicatePin(pin));
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_error(row: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

/// Writes a cohort in the format read by [`load_cohort`].
pub fn write_cohort<W: Write>(cohort: &[PatientRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pin", "alpha", "gamma"]).map_err(csv_io)?;
    for r in cohort {
        w.serialize((r.pin, r.alpha, r.gamma)).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters `(μ, σ)` of the underlying normal of a lognormal law; the
/// median is `e^μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormalParams {
    /// Default for `α`: median 0.0376 1/min; the observed extremes 0.0270
    /// and 0.0524 sit at about ±2.2σ.
    pub const DEFAULT_ALPHA: LogNormalParams = LogNormalParams {
        mu: -3.2805,
        sigma: 0.1507,
    };
    /// Default for `γ`: median 2.79; the observed extremes 1.4030 and 5.5619
    /// sit at about ±2.2σ.
    pub const DEFAULT_GAMMA: LogNormalParams = LogNormalParams {
        mu: 1.0272,
        sigma: 0.3130,
    };

    pub fn median(&self) -> f64 {
        self.mu.exp()
    }

    fn distribution(&self, name: &'static str) -> Result<LogNormal<f64>> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::out_of_range(name, self.sigma, "sigma > 0"));
        }
        if !self.mu.is_finite() {
            return Err(Error::out_of_range(name, self.mu, "finite mu"));
        }
        LogNormal::new(self.mu, self.sigma).map_err(|_| Error::out_of_range(name, self.sigma, "sigma > 0"))
    }
}

/// Upper bound on redraws per parameter before the distribution is declared
/// incompatible with the model's hard ranges.
const MAX_REDRAWS: usize = 10_000;

/// Draws `n` patients with PINs `1..=n` from independent lognormal laws,
/// redrawing any sample outside `(0, 0.1] × (0, 10]`. Deterministic for a
/// fixed seed.
pub fn sample_cohort(
    n: usize,
    alpha_dist: &LogNormalParams,
    gamma_dist: &LogNormalParams,
    seed: u64,
) -> Result<Vec<PatientRecord>> {
    if n == 0 {
        return Err(Error::out_of_range("n", 0.0, "n > 0"));
    }
    let da = alpha_dist.distribution("alpha distribution")?;
    let dg = gamma_dist.distribution("gamma distribution")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |d: &LogNormal<f64>, max: f64, name: &'static str| -> Result<f64> {
        for _ in 0..MAX_REDRAWS {
            let v = d.sample(&mut rng);
            if v > 0.0 && v <= max {
                return Ok(v);
            }
        }
        Err(Error::out_of_range(
            name,
            max,
            "distribution mass inside the model range",
        ))
    };
    (1..=n as u32)
        .map(|pin| {
            let alpha = draw(&da, ALPHA_MAX, "alpha distribution")?;
            let gamma = draw(&dg, GAMMA_MAX, "gamma distribution")?;
            PatientRecord::new(pin, alpha, gamma)
        })
        .collect()
}

/// A dosing policy under evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Feedback(Controller),
    OpenLoop(DoseSchedule),
}

/// Clinical bounds and simulation settings of an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSettings {
    pub y_min: f64,
    pub y_max: f64,
    /// Period `T` defining the `[T, 5T]` underdosing window (min).
    pub period: f64,
    pub horizon: f64,
    pub dt_sample: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            y_min: Y_MIN,
            y_max: Y_MAX,
            period: 20.0,
            horizon: DEFAULT_HORIZON_PERIODS * 20.0,
            dt_sample: DEFAULT_DT_SAMPLE,
        }
    }
}

impl EvaluationSettings {
    fn validate(&self) -> Result<()> {
        if !(0.0 <= self.y_min && self.y_min <= self.y_max && self.y_max <= 100.0) {
            return Err(Error::out_of_range("y_min", self.y_min, "0 <= y_min <= y_max <= 100"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::out_of_range("period", self.period, "period > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientOutcome {
    pub pin: u32,
    pub inf_y: f64,
    pub sup_y_t_5t: f64,
    pub underdose: bool,
    pub overdose: bool,
    /// The effect never dropped below `y_max` at all.
    pub never_below: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub case_label: String,
    pub per_patient: Vec<PatientOutcome>,
    pub underdose_count: usize,
    pub overdose_count: usize,
}

/// The JSON summary of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub case_label: String,
    pub underdose_count: usize,
    pub overdose_count: usize,
    pub n: usize,
}

impl EvaluationReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            case_label: self.case_label.clone(),
            underdose_count: self.underdose_count,
            overdose_count: self.overdose_count,
            n: self.per_patient.len(),
        }
    }

    pub fn underdosed_pins(&self) -> Vec<u32> {
        self.per_patient.iter().filter(|o| o.underdose).map(|o| o.pin).collect()
    }

    pub fn overdosed_pins(&self) -> Vec<u32> {
        self.per_patient.iter().filter(|o| o.overdose).map(|o| o.pin).collect()
    }

    /// Writes `pin,inf_y,sup_y_T_5T,underdose,overdose` rows ordered by PIN.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<()> {
        if let Some(p) = provenance {
            writeln!(out, "# {p}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pin", "inf_y", "sup_y_T_5T", "underdose", "overdose"])
            .map_err(csv_io)?;
        for o in &self.per_patient {
            w.serialize((o.pin, o.inf_y, o.sup_y_t_5t, o.underdose, o.overdose))
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn evaluate_patient(record: &PatientRecord, policy: &Policy, s: &EvaluationSettings) -> Result<PatientOutcome> {
    let plant = record.plant();
    let trace = match policy {
        Policy::Feedback(c) => simulate_closed_loop(&plant, c, &StateVec::ZERO, s.horizon, s.dt_sample)?,
        Policy::OpenLoop(schedule) => simulate_open_loop(&plant, schedule, s.horizon, s.dt_sample)?,
    };
    let m = trace_metrics(&trace, s.period)?;
    let never_below = m.inf_y > s.y_max;
    Ok(PatientOutcome {
        pin: record.pin,
        inf_y: m.inf_y,
        sup_y_t_5t: m.sup_y_t_5t,
        underdose: m.sup_y_t_5t > s.y_max || never_below,
        overdose: m.inf_y < s.y_min,
        never_below,
    })
}

/// Simulates every patient from the drug-free state under `policy` and
/// flags under- and overdosing. Patients are evaluated concurrently; the
/// report is ordered by PIN.
pub fn evaluate_cohort(
    cohort: &[PatientRecord],
    policy: &Policy,
    settings: &EvaluationSettings,
    case_label: &str,
) -> Result<EvaluationReport> {
    settings.validate()?;
    let mut per_patient = cohort
        .par_iter()
        .map(|r| {
            evaluate_patient(r, policy, settings).map_err(|e| Error::Patient {
                pin: r.pin,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    per_patient.sort_by_key(|o| o.pin);
    let underdose_count = per_patient.iter().filter(|o| o.underdose).count();
    let overdose_count = per_patient.iter().filter(|o| o.overdose).count();
    Ok(EvaluationReport {
        case_label: case_label.to_string(),
        per_patient,
        underdose_count,
        overdose_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_records() {
        let text = "pin,alpha,gamma\n26,0.0524,1.4030\n3, 0.03 , 2.5\n";
        let c = load_cohort(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], PatientRecord::new(26, 0.0524, 1.4030).unwrap());
        assert!(!c[0].outside_dataset_range());
        assert!(PatientRecord::new(1, 0.09, 2.0).unwrap().outside_dataset_range());
    }

    #[test]
    fn empty_body_is_empty_cohort() {
        assert!(load_cohort("pin,alpha,gamma\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let err = load_cohort("pin,alpha,gamma\n1,0.03,2\n2,0.2,2\n".as_bytes()).unwrap_err();
        match err {
            Error::AtRow { row, source } => {
                assert_eq!(row, 3);
                assert!(matches!(*source, Error::OutOfRange { name: "alpha", .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = load_cohort("pin,alpha,gamma\n1,abc,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        let err = load_cohort("pin,alpha,gamma\n1,0.03,2\n1,0.04,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicatePin(1)));
        let err = load_cohort("id,a,g\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = LogNormalParams::DEFAULT_ALPHA;
        let g = LogNormalParams::DEFAULT_GAMMA;
        let c1 = sample_cohort(48, &a, &g, 7).unwrap();
        let c2 = sample_cohort(48, &a, &g, 7).unwrap();
        assert_eq!(c1, c2);
        assert_ne!(c1, sample_cohort(48, &a, &g, 8).unwrap());
        assert_eq!(
            c1.iter().map(|r| r.pin).collect::<Vec<_>>(),
            (1..=48).collect::<Vec<_>>()
        );
        assert!(sample_cohort(0, &a, &g, 7).is_err());
    }

    #[test]
    fn write_then_load_round_trips() {
        let c = sample_cohort(5, &LogNormalParams::DEFAULT_ALPHA, &LogNormalParams::DEFAULT_GAMMA, 1).unwrap();
        let mut buf = Vec::new();
        write_cohort(&c, &mut buf).unwrap();
        assert_eq!(load_cohort(buf.as_slice()).unwrap(), c);
    }
}
