mod common;

use common::{mean_plant, reference_target};
use proptest::prelude::*;
use pulsedose_core::cohort::{evaluate_cohort, load_cohort, sample_cohort, write_cohort};
use pulsedose_core::design::design_modulation;
use pulsedose_core::{
    Controller, DoseSchedule, Error, EvaluationSettings, LogNormalParams, PatientRecord, Policy, SaturationBounds,
    SlopePair,
};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn case_two() -> Policy {
    let s = SlopePair::new(-2.0, 0.7).unwrap();
    let d = design_modulation(&mean_plant(), &reference_target(), &s, &SaturationBounds::default()).unwrap();
    Policy::Feedback(Controller::feedback(d.config))
}

fn quick_settings() -> EvaluationSettings {
    EvaluationSettings {
        dt_sample: 0.05,
        ..EvaluationSettings::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_cohorts_respect_model_ranges(seed in any::<u64>(), n in 1usize..200) {
        let c = sample_cohort(n, &LogNormalParams::DEFAULT_ALPHA, &LogNormalParams::DEFAULT_GAMMA, seed).unwrap();
        prop_assert_eq!(c.len(), n);
        for (i, r) in c.iter().enumerate() {
            prop_assert_eq!(r.pin as usize, i + 1);
            prop_assert!(r.alpha > 0.0 && r.alpha <= 0.1 && r.gamma > 0.0 && r.gamma <= 10.0);
        }
    }

    #[test]
    fn cohort_csv_round_trips(seed in any::<u64>(), n in 1usize..50) {
        let c = sample_cohort(n, &LogNormalParams::DEFAULT_ALPHA, &LogNormalParams::DEFAULT_GAMMA, seed).unwrap();
        let mut buf = Vec::new();
        write_cohort(&c, &mut buf).unwrap();
        prop_assert_eq!(load_cohort(buf.as_slice()).unwrap(), c);
    }
}

#[test]
fn large_cohort_medians_match_the_laws() {
    let (a, g) = (LogNormalParams::DEFAULT_ALPHA, LogNormalParams::DEFAULT_GAMMA);
    let c = sample_cohort(20_000, &a, &g, 7).unwrap();
    let ma = median(c.iter().map(|r| r.alpha).collect());
    let mg = median(c.iter().map(|r| r.gamma).collect());
    assert!((ma / a.median() - 1.0).abs() < 0.05, "{ma}");
    assert!((mg / g.median() - 1.0).abs() < 0.05, "{mg}");
}

#[test]
fn evaluation_is_deterministic_to_the_byte() {
    let cohort = sample_cohort(
        12,
        &LogNormalParams::DEFAULT_ALPHA,
        &LogNormalParams::DEFAULT_GAMMA,
        2024,
    )
    .unwrap();
    let again = sample_cohort(
        12,
        &LogNormalParams::DEFAULT_ALPHA,
        &LogNormalParams::DEFAULT_GAMMA,
        2024,
    )
    .unwrap();
    assert_eq!(cohort, again);
    let render = || {
        let report = evaluate_cohort(&cohort, &case_two(), &quick_settings(), "Case 2").unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf, Some("determinism")).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn vacuous_bounds_flag_nobody() {
    let cohort = sample_cohort(16, &LogNormalParams::DEFAULT_ALPHA, &LogNormalParams::DEFAULT_GAMMA, 3).unwrap();
    let settings = EvaluationSettings {
        y_min: 0.0,
        y_max: 100.0,
        ..quick_settings()
    };
    for policy in [case_two(), Policy::OpenLoop(DoseSchedule::reference_protocol())] {
        let report = evaluate_cohort(&cohort, &policy, &settings, "vacuous").unwrap();
        assert_eq!((report.underdose_count, report.overdose_count), (0, 0));
        assert_eq!(report.per_patient.len(), 16);
    }
}

#[test]
fn mean_patient_is_not_flagged_by_either_policy() {
    let p = mean_plant();
    let cohort = vec![PatientRecord::new(1, p.alpha(), p.gamma()).unwrap()];
    for policy in [case_two(), Policy::OpenLoop(DoseSchedule::reference_protocol())] {
        let report = evaluate_cohort(&cohort, &policy, &quick_settings(), "mean").unwrap();
        assert!(report.underdosed_pins().is_empty() && report.overdosed_pins().is_empty());
        let o = report.per_patient[0];
        assert!(o.inf_y > 2.0 && o.sup_y_t_5t < 10.0 && !o.never_below);
    }
}

#[test]
fn report_counts_match_flags_and_summary() {
    let cohort = sample_cohort(
        24,
        &LogNormalParams::DEFAULT_ALPHA,
        &LogNormalParams::DEFAULT_GAMMA,
        2024,
    )
    .unwrap();
    let report = evaluate_cohort(
        &cohort,
        &Policy::OpenLoop(DoseSchedule::reference_protocol()),
        &quick_settings(),
        "Case 0",
    )
    .unwrap();
    assert_eq!(report.underdose_count, report.underdosed_pins().len());
    assert_eq!(report.overdose_count, report.overdosed_pins().len());
    let s = report.summary();
    assert_eq!((s.n, s.case_label.as_str()), (24, "Case 0"));
    assert!(report.per_patient.windows(2).all(|w| w[0].pin < w[1].pin));
}

#[test]
fn loader_reports_rows_and_duplicates() {
    let good = "# comment\npin,alpha,gamma\n1, 0.03, 2.0\n2,0.04,3.0\n";
    assert_eq!(load_cohort(good.as_bytes()).unwrap().len(), 2);

    let err = load_cohort("pin,alpha,gamma\n1,0.03,2.0\n2,0.5,2.0\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::AtRow { row: 3, .. }), "{err}");
    assert!(err.is_validation());

    let err = load_cohort("pin,alpha,gamma\n1,0.03,x\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");

    let err = load_cohort("pin,alpha,gamma\n4,0.03,2\n4,0.04,2\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::DuplicatePin(4)));

    let err = load_cohort("id,a,g\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { row: 1, .. }));
}

#[test]
fn sampler_rejects_degenerate_laws() {
    let bad = LogNormalParams { mu: 0.0, sigma: 0.0 };
    assert!(sample_cohort(3, &bad, &LogNormalParams::DEFAULT_GAMMA, 1).is_err());
    // all mass far above the α ceiling
    let far = LogNormalParams { mu: 5.0, sigma: 0.01 };
    assert!(sample_cohort(3, &far, &LogNormalParams::DEFAULT_GAMMA, 1).is_err());
    assert!(sample_cohort(0, &LogNormalParams::DEFAULT_ALPHA, &LogNormalParams::DEFAULT_GAMMA, 1).is_err());
}
