//! The six study commands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use pulsedose_core::cohort::{evaluate_cohort, load_cohort, sample_cohort, write_cohort};
use pulsedose_core::constants::{C50_DEFAULT, POP_MEAN_ALPHA, POP_MEAN_GAMMA, Y_MAX, Y_MIN};
use pulsedose_core::cycle::{fixed_point, hopf_slope, min_spectral_radius, Linearization};
use pulsedose_core::design::design_modulation;
use pulsedose_core::sim::{
    simulate_closed_loop, simulate_open_loop, trace_metrics, write_firings_csv, write_samples_csv, DEFAULT_DT_SAMPLE,
    DEFAULT_HORIZON_PERIODS,
};
use pulsedose_core::{
    Controller, CycleTarget, Design, DoseSchedule, EvaluationSettings, FirstPulse, FixedPoint, LogNormalParams,
    ModulationConfig, PatientRecord, PlantParams, Policy, RateOptimum, SaturationBounds, SearchMode, SlopeBox,
    SlopeMode, SlopePair, Spectrum3, StabilityReport, StateVec, TraceMetrics,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{
    BoundsArgs, CohortArgs, FileConfig, Format, PlantArgs, PolicyArgs, PolicyKind, RunArgs, SlopeArgs, SweepArgs,
    SweepMode, TargetArgs,
};
use crate::output::{display_path, provenance, sig6, with_provenance, OutDir};
use crate::CliError;

/// What every command needs besides its own flags.
pub struct Context {
    pub command: &'static str,
    pub file: FileConfig,
    pub out: OutDir,
    pub format: Format,
}

impl Context {
    /// Prints `doc` as JSON, or the human rendering.
    fn emit<T: Serialize>(&self, doc: &T, prov: &str, human: impl FnOnce() -> String) -> Result<(), CliError> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(&with_provenance(doc, prov)?).map_err(CliError::json)? + "\n",
            Format::Human => human(),
        };
        let mut stdout = std::io::stdout().lock();
        match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
            // a closed pipe (`| head`) is the reader's choice, not a failure
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
            _ => Ok(()),
        }
    }
}

fn pick<T: Clone>(cli: &Option<T>, file: &Option<T>) -> Option<T> {
    cli.clone().or_else(|| file.clone())
}

fn plant(a: &PlantArgs, f: &FileConfig) -> Result<PlantParams, CliError> {
    Ok(PlantParams::new(
        pick(&a.alpha, &f.alpha).unwrap_or(POP_MEAN_ALPHA),
        pick(&a.gamma, &f.gamma).unwrap_or(POP_MEAN_GAMMA),
        pick(&a.c50, &f.c50).unwrap_or(C50_DEFAULT),
    )?)
}

fn target(a: &TargetArgs, f: &FileConfig) -> Result<CycleTarget, CliError> {
    Ok(CycleTarget::new(
        pick(&a.period, &f.period).unwrap_or(20.0),
        pick(&a.lambda, &f.lambda).unwrap_or(200.0),
    )?)
}

fn slopes(a: &SlopeArgs, f: &FileConfig) -> Result<SlopePair, CliError> {
    Ok(SlopePair::new(
        pick(&a.xi, &f.xi).unwrap_or(0.0),
        pick(&a.eta, &f.eta).unwrap_or(0.0),
    )?)
}

fn bounds(a: &BoundsArgs, f: &FileConfig) -> Result<SaturationBounds, CliError> {
    let d = SaturationBounds::default();
    Ok(SaturationBounds::new(
        pick(&a.phi_lo, &f.phi_lo).unwrap_or(d.phi().0),
        pick(&a.phi_hi, &f.phi_hi).unwrap_or(d.phi().1),
        pick(&a.f_lo, &f.f_lo).unwrap_or(d.f().0),
        pick(&a.f_hi, &f.f_hi).unwrap_or(d.f().1),
    )?)
}

/// Horizon and sample step, defaulting to twelve periods at 0.01 min.
fn run(a: &RunArgs, f: &FileConfig, period: f64) -> (f64, f64) {
    (
        pick(&a.horizon, &f.horizon).unwrap_or(DEFAULT_HORIZON_PERIODS * period),
        pick(&a.dt, &f.dt).unwrap_or(DEFAULT_DT_SAMPLE),
    )
}

fn fmt_state(x: &StateVec) -> String {
    format!("({}, {}, {})", sig6(x.x1), sig6(x.x2), sig6(x.x3))
}

fn fmt_spectrum(s: &Spectrum3) -> String {
    s.eigenvalues
        .iter()
        .map(|z| match z.im {
            0.0 => sig6(z.re),
            im if im > 0.0 => format!("{}+{}i", sig6(z.re), sig6(im)),
            im => format!("{}-{}i", sig6(z.re), sig6(-im)),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------- fixed-point

#[derive(Serialize)]
struct FixedPointDoc {
    plant: PlantParams,
    target: CycleTarget,
    fixed_point: FixedPoint,
    /// Measured effect at the firing instant (%).
    y0: f64,
}

pub fn fixed_point_cmd(ctx: &Context, p: &PlantArgs, t: &TargetArgs) -> Result<(), CliError> {
    let (plant, target) = (plant(p, &ctx.file)?, target(t, &ctx.file)?);
    let prov = provenance(ctx.command, &json!({ "plant": plant, "target": target }));
    let fp = fixed_point(&plant, &target);
    let doc = FixedPointDoc {
        plant,
        target,
        fixed_point: fp,
        y0: plant.hill(fp.ybar0)?,
    };
    ctx.out.json("fixed_point.json", &doc, &prov)?;
    ctx.emit(&doc, &prov, || {
        format!(
            "fixed point of the 1-cycle (T = {} min, lambda = {} ug/kg)\n  X     = {}\n  ybar0 = {}\n  y0    = {} %\n",
            sig6(target.period()),
            sig6(target.weight()),
            fmt_state(&fp.x),
            sig6(fp.ybar0),
            sig6(doc.y0)
        )
    })
}

// ------------------------------------------------------------------ stability

#[derive(Serialize)]
struct HopfSlopes {
    xi: f64,
    eta: f64,
}

#[derive(Serialize)]
struct StabilityDoc {
    plant: PlantParams,
    target: CycleTarget,
    slopes: SlopePair,
    report: StabilityReport,
    /// Frequency slope at which the cycle map becomes singular.
    eta_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hopf: Option<HopfSlopes>,
}

pub fn stability_cmd(ctx: &Context, p: &PlantArgs, t: &TargetArgs, s: &SlopeArgs, hopf: bool) -> Result<(), CliError> {
    let (plant, target, slopes) = (plant(p, &ctx.file)?, target(t, &ctx.file)?, slopes(s, &ctx.file)?);
    let hopf = hopf || ctx.file.hopf.unwrap_or(false);
    let prov = provenance(
        ctx.command,
        &json!({ "plant": plant, "target": target, "slopes": slopes, "hopf": hopf }),
    );
    let lin = Linearization::new(&plant, &target);
    let hopf = if hopf {
        Some(HopfSlopes {
            xi: hopf_slope(&plant, &target, SlopeMode::Amplitude)?,
            eta: hopf_slope(&plant, &target, SlopeMode::Frequency)?,
        })
    } else {
        None
    };
    let doc = StabilityDoc {
        plant,
        target,
        slopes,
        report: lin.stability_report(&slopes),
        eta_star: lin.eta_star(),
        hopf,
    };
    ctx.out.json("stability.json", &doc, &prov)?;
    ctx.emit(&doc, &prov, || {
        let r = &doc.report;
        let mut s = format!(
            "1-cycle with xi = {}, eta = {}: {}{}\n",
            sig6(slopes.xi()),
            sig6(slopes.eta()),
            if r.stable {
                "locally orbitally stable"
            } else {
                "unstable"
            },
            if r.critical_branch_used { " (critical case)" } else { "" }
        );
        let _ = writeln!(s, "  rho          = {}", sig6(r.rho));
        let _ = writeln!(s, "  psi(0)       = {}", sig6(r.psi_at_zero));
        let _ = writeln!(s, "  psi(-1)      = {}", sig6(r.psi_at_minus_one));
        let _ = writeln!(s, "  c0           = {}", sig6(r.c0));
        let _ = writeln!(s, "  c0*psi(c0)   = {}", sig6(r.c0_times_psi_c0));
        let _ = writeln!(s, "  eta*         = {}", sig6(doc.eta_star));
        let _ = writeln!(s, "  eigenvalues  = {}", fmt_spectrum(&r.spectrum));
        if let Some(h) = &doc.hopf {
            let _ = writeln!(s, "  Hopf xi      = {}", sig6(h.xi));
            let _ = writeln!(s, "  Hopf eta     = {}", sig6(h.eta));
        }
        s
    })
}

// --------------------------------------------------------------------- design

#[derive(Serialize)]
struct DesignDoc {
    plant: PlantParams,
    target: CycleTarget,
    slopes: SlopePair,
    #[serde(flatten)]
    design: Design,
}

pub fn design_cmd(ctx: &Context, p: &PlantArgs, t: &TargetArgs, s: &SlopeArgs, b: &BoundsArgs) -> Result<(), CliError> {
    let (plant, target, slopes) = (plant(p, &ctx.file)?, target(t, &ctx.file)?, slopes(s, &ctx.file)?);
    let bounds = bounds(b, &ctx.file)?;
    let prov = provenance(
        ctx.command,
        &json!({ "plant": plant, "target": target, "slopes": slopes, "bounds": bounds }),
    );
    let design = design_modulation(&plant, &target, &slopes, &bounds)?;
    for w in &design.warnings {
        eprintln!("warning: {w}");
    }
    let doc = DesignDoc {
        plant,
        target,
        slopes,
        design,
    };
    ctx.out.json("modulation.json", &doc, &prov)?;
    ctx.emit(&doc, &prov, || {
        let [k1, k2, k3, k4] = doc.design.config.k();
        let (pl, ph) = bounds.phi();
        let (fl, fh) = bounds.f();
        format!(
            "modulation law for xi = {}, eta = {}\n  Phi(y) = sat[{}, {}]({} {} y)  min\n  F(y)   = sat[{}, {}]({} + {} y)  ug/kg\n  y0 = {} %, phi'(ybar0) = {}\n",
            sig6(slopes.xi()),
            sig6(slopes.eta()),
            sig6(pl),
            sig6(ph),
            sig6(k1),
            if k2 < 0.0 { format!("- {}", sig6(-k2)) } else { format!("+ {}", sig6(k2)) },
            sig6(fl),
            sig6(fh),
            sig6(k3),
            sig6(k4),
            sig6(doc.design.y0),
            sig6(doc.design.hill_slope)
        )
    })
}

// ------------------------------------------------------------------- policies

/// A modulation law file: either a bare law or a `design` output.
#[derive(Deserialize)]
#[serde(untagged)]
enum ModulationFile {
    Bare(ModulationConfig),
    Designed { config: ModulationConfig },
}

fn read_modulation(path: &Path) -> Result<ModulationConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: ModulationFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a modulation law: {e}", display_path(path))))?;
    Ok(match parsed {
        ModulationFile::Bare(c) | ModulationFile::Designed { config: c } => c,
    })
}

#[derive(Deserialize)]
struct ScheduleRow {
    time_min: f64,
    dose: f64,
}

fn read_schedule(path: &Path) -> Result<DoseSchedule, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut events = Vec::new();
    for row in reader.deserialize::<ScheduleRow>() {
        let row = row.map_err(|e| CliError::Usage(format!("{}: {e}", display_path(path))))?;
        events.push((row.time_min, row.dose));
    }
    Ok(DoseSchedule::new(events)?)
}

/// The resolved policy plus the target whose period sets the defaults.
fn policy(a: &PolicyArgs, f: &FileConfig) -> Result<(Policy, CycleTarget), CliError> {
    let target = target(&a.target, f)?;
    let kind = pick(&a.policy, &f.policy).unwrap_or(PolicyKind::Feedback);
    let policy = match kind {
        PolicyKind::Feedback => {
            let config = match pick(&a.modulation, &f.modulation) {
                Some(path) => read_modulation(&path)?,
                None => {
                    let nominal = PlantParams::population_mean();
                    design_modulation(&nominal, &target, &slopes(&a.slopes, f)?, &bounds(&a.bounds, f)?)?.config
                }
            };
            let first = pick(&a.bolus, &f.bolus).map_or(FirstPulse::Feedback, FirstPulse::Bolus);
            Policy::Feedback(Controller::new(config, first)?)
        }
        PolicyKind::OpenLoop => Policy::OpenLoop(match pick(&a.schedule, &f.schedule) {
            Some(path) => read_schedule(&path)?,
            None => DoseSchedule::reference_protocol(),
        }),
    };
    Ok((policy, target))
}

// ------------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulationDoc {
    plant: PlantParams,
    policy: Policy,
    horizon: f64,
    dt_sample: f64,
    firings: usize,
    /// Absent when the horizon is shorter than five periods.
    metrics: Option<TraceMetrics>,
}

pub fn simulate_cmd(ctx: &Context, p: &PlantArgs, pa: &PolicyArgs, r: &RunArgs) -> Result<(), CliError> {
    let plant = plant(p, &ctx.file)?;
    let (policy, target) = policy(pa, &ctx.file)?;
    let (horizon, dt) = run(r, &ctx.file, target.period());
    let prov = provenance(
        ctx.command,
        &json!({ "plant": plant, "policy": policy, "T": target.period(), "horizon": horizon, "dt": dt }),
    );
    let trace = match &policy {
        Policy::Feedback(c) => simulate_closed_loop(&plant, c, &StateVec::ZERO, horizon, dt)?,
        Policy::OpenLoop(s) => simulate_open_loop(&plant, s, horizon, dt)?,
    };
    let metrics = trace_metrics(&trace, target.period()).ok();
    if let Some((path, w)) = ctx.out.create("samples.csv")? {
        write_samples_csv(&trace, w, Some(&prov)).map_err(|e| CliError::at(&path, e))?;
    }
    if let Some((path, w)) = ctx.out.create("firings.csv")? {
        write_firings_csv(&trace, w, Some(&prov)).map_err(|e| CliError::at(&path, e))?;
    }
    let doc = SimulationDoc {
        plant,
        policy,
        horizon,
        dt_sample: dt,
        firings: trace.firings.len(),
        metrics,
    };
    ctx.out.json("metrics.json", &doc, &prov)?;
    ctx.emit(&doc, &prov, || {
        let mut s = format!(
            "simulated {} min, {} doses, {} samples\n",
            sig6(horizon),
            trace.firings.len(),
            trace.samples.len()
        );
        let total: f64 = trace.firings.iter().map(|f| f.weight).sum();
        let _ = writeln!(s, "  total dose       = {} ug/kg", sig6(total));
        match &doc.metrics {
            Some(m) => {
                let _ = writeln!(s, "  inf y            = {} %", sig6(m.inf_y));
                let _ = writeln!(s, "  sup y on [T, 5T] = {} %", sig6(m.sup_y_t_5t));
            }
            None => s.push_str("  (horizon shorter than 5T: no metrics)\n"),
        }
        s
    })
}

// ---------------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepDoc {
    plant: PlantParams,
    target: CycleTarget,
    mode: SearchMode,
    bounds: SlopeBox,
    points: usize,
    grid_minimum: RateOptimum,
    optimum: RateOptimum,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub fn sweep_cmd(ctx: &Context, p: &PlantArgs, t: &TargetArgs, a: &SweepArgs) -> Result<(), CliError> {
    let f = &ctx.file;
    let (plant, target) = (plant(p, f)?, target(t, f)?);
    let mode = match pick(&a.mode, &f.mode).unwrap_or(SweepMode::Joint) {
        SweepMode::Amplitude => SearchMode::Amplitude,
        SweepMode::Frequency => SearchMode::Frequency,
        SweepMode::Joint => SearchMode::Joint,
    };
    let points = pick(&a.points, &f.points).unwrap_or(201);
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let d = SlopeBox::default();
    let bounds = SlopeBox {
        xi: (
            pick(&a.xi_min, &f.xi_min).unwrap_or(d.xi.0),
            pick(&a.xi_max, &f.xi_max).unwrap_or(d.xi.1),
        ),
        eta: (
            pick(&a.eta_min, &f.eta_min).unwrap_or(d.eta.0),
            pick(&a.eta_max, &f.eta_max).unwrap_or(d.eta.1),
        ),
    };
    let prov = provenance(
        ctx.command,
        &json!({ "plant": plant, "target": target, "mode": mode, "bounds": bounds, "points": points }),
    );
    // the refined optimum validates the box before the grid is laid out
    let optimum = min_spectral_radius(&plant, &target, mode, &bounds)?;
    let (xis, etas) = match mode {
        SearchMode::Amplitude => (linspace(bounds.xi.0, bounds.xi.1, points), vec![0.0]),
        SearchMode::Frequency => (vec![0.0], linspace(bounds.eta.0, bounds.eta.1, points)),
        SearchMode::Joint => (
            linspace(bounds.xi.0, bounds.xi.1, points),
            linspace(bounds.eta.0, bounds.eta.1, points),
        ),
    };
    let lin = Linearization::new(&plant, &target);
    let mut rows = Vec::with_capacity(xis.len() * etas.len());
    for &xi in &xis {
        for &eta in &etas {
            let s = SlopePair::new(xi, eta)?;
            let r = lin.stability_report(&s);
            rows.push((s, r.rho, r.stable));
        }
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(slopes, rho, _)| RateOptimum { slopes, rho })
        .expect("grid is nonempty");
    if let Some((path, mut w)) = ctx.out.create("sweep.csv")? {
        let write = |w: &mut dyn Write| -> std::io::Result<()> {
            writeln!(w, "# {prov}")?;
            writeln!(w, "xi,eta,rho,stable")?;
            for (s, rho, stable) in &rows {
                writeln!(w, "{},{},{},{}", s.xi(), s.eta(), rho, stable)?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| CliError::io(&path, e))?;
    }
    let doc = SweepDoc {
        plant,
        target,
        mode,
        bounds,
        points,
        grid_minimum: best,
        optimum,
    };
    ctx.out.json("optimum.json", &doc, &prov)?;
    ctx.emit(&doc, &prov, || {
        format!(
            "{} grid points, {} stable\n  grid minimum    rho = {} at (xi, eta) = ({}, {})\n  refined optimum rho = {} at (xi, eta) = ({}, {})\n",
            rows.len(),
            rows.iter().filter(|r| r.2).count(),
            sig6(best.rho),
            sig6(best.slopes.xi()),
            sig6(best.slopes.eta()),
            sig6(optimum.rho),
            sig6(optimum.slopes.xi()),
            sig6(optimum.slopes.eta())
        )
    })
}

// ------------------------------------------------------------------- evaluate

#[derive(Serialize)]
struct EvaluationDoc {
    case_label: String,
    n: usize,
    underdose_count: usize,
    overdose_count: usize,
    underdosed_pins: Vec<u32>,
    overdosed_pins: Vec<u32>,
    /// Patients outside the parameter box of the identification cohort.
    outside_dataset_range: usize,
    settings: EvaluationSettings,
    policy: Policy,
}

pub struct EvaluateArgs<'a> {
    pub cohort: &'a CohortArgs,
    pub policy: &'a PolicyArgs,
    pub run: &'a RunArgs,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub label: Option<String>,
}

fn cohort(a: &CohortArgs, f: &FileConfig) -> Result<(Vec<PatientRecord>, serde_json::Value), CliError> {
    if let Some(path) = pick(&a.cohort, &f.cohort) {
        if a.n.is_some() || a.seed.is_some() {
            return Err(CliError::Usage("--cohort excludes --n and --seed".into()));
        }
        let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        let records = load_cohort(file).map_err(|e| CliError::at(&path, e))?;
        let desc = json!({ "cohort": records });
        return Ok((records, desc));
    }
    let la = LogNormalParams {
        mu: pick(&a.alpha_mu, &f.alpha_mu).unwrap_or(LogNormalParams::DEFAULT_ALPHA.mu),
        sigma: pick(&a.alpha_sigma, &f.alpha_sigma).unwrap_or(LogNormalParams::DEFAULT_ALPHA.sigma),
    };
    let lg = LogNormalParams {
        mu: pick(&a.gamma_mu, &f.gamma_mu).unwrap_or(LogNormalParams::DEFAULT_GAMMA.mu),
        sigma: pick(&a.gamma_sigma, &f.gamma_sigma).unwrap_or(LogNormalParams::DEFAULT_GAMMA.sigma),
    };
    let n = pick(&a.n, &f.n).unwrap_or(48);
    let seed = pick(&a.seed, &f.seed).unwrap_or(2024);
    let records = sample_cohort(n, &la, &lg, seed)?;
    Ok((
        records,
        json!({ "n": n, "seed": seed, "alpha_law": la, "gamma_law": lg }),
    ))
}

pub fn evaluate_cmd(ctx: &Context, a: EvaluateArgs) -> Result<(), CliError> {
    let f = &ctx.file;
    let (records, cohort_desc) = cohort(a.cohort, f)?;
    let (policy, target) = policy(a.policy, f)?;
    let (horizon, dt_sample) = run(a.run, f, target.period());
    let settings = EvaluationSettings {
        y_min: a.y_min.or(f.y_min).unwrap_or(Y_MIN),
        y_max: a.y_max.or(f.y_max).unwrap_or(Y_MAX),
        period: target.period(),
        horizon,
        dt_sample,
    };
    let label = a.label.or_else(|| f.label.clone()).unwrap_or_else(|| {
        match policy {
            Policy::Feedback(_) => "feedback",
            Policy::OpenLoop(_) => "open-loop",
        }
        .into()
    });
    let prov = provenance(
        ctx.command,
        &json!({ "cohort": cohort_desc, "policy": policy, "settings": settings, "label": label }),
    );
    let report = evaluate_cohort(&records, &policy, &settings, &label)?;
    if let Some((path, w)) = ctx.out.create("report.csv")? {
        report.write_csv(w, Some(&prov)).map_err(|e| CliError::at(&path, e))?;
    }
    if let Some((path, mut w)) = ctx.out.create("cohort.csv")? {
        writeln!(w, "# {prov}").map_err(|e| CliError::io(&path, e))?;
        write_cohort(&records, w).map_err(|e| CliError::at(&path, e))?;
    }
    let summary = report.summary();
    let doc = EvaluationDoc {
        case_label: summary.case_label,
        n: summary.n,
        underdose_count: summary.underdose_count,
        overdose_count: summary.overdose_count,
        underdosed_pins: report.underdosed_pins(),
        overdosed_pins: report.overdosed_pins(),
        outside_dataset_range: records.iter().filter(|r| r.outside_dataset_range()).count(),
        settings,
        policy,
    };
    ctx.out.json("summary.json", &doc, &prov)?;
    let pins = |v: &[u32]| {
        if v.is_empty() {
            "-".to_string()
        } else {
            v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
        }
    };
    ctx.emit(&doc, &prov, || {
        format!(
            "{}: {} patients, bounds [{}, {}] %\n  underdosed (y > y_max on [T, 5T]): {:>3}  pins {}\n  overdosed  (y < y_min):            {:>3}  pins {}\n",
            doc.case_label,
            doc.n,
            sig6(settings.y_min),
            sig6(settings.y_max),
            doc.underdose_count,
            pins(&doc.underdosed_pins),
            doc.overdose_count,
            pins(&doc.overdosed_pins)
        )
    })
}
