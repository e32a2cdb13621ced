//! Subcommand handlers: merge file + flag parameters, validate, run the
//! library call, and emit the canonical document.

use std::path::{Path, PathBuf};

use gbbm_kam::acceptance;
use gbbm_kam::config::{
    self, AnalyzeConfig, DivisorsConfig, FreqMapConfig, NormalFormConfig, Validate,
    VerifyAllConfig,
};
use gbbm_kam::divisor_analysis::{admissible_labels, survey_min_divisor, tail_certificate};
use gbbm_kam::dynamics::{extract_frequencies, integrate, IntegratorKind, SimConfig};
use gbbm_kam::index_sets::TangentialSet;
use gbbm_kam::kam_check::{derive_frequency_model, omega0, verify_assumptions, FrequencyModel};
use gbbm_kam::normal_form::{build_f6, build_g_parts, compute_rbar, compute_tbar, lambda_poly};
use gbbm_kam::report::{
    freq_map_doc, normal_form_doc, parse_trajectory_csv, to_canonical_json, trajectory_to_csv,
    AnalyzeDoc, AnalyzePredictionDoc, DivisorSurveyDoc, DivisorsDoc, SimulateDoc,
    TailCertificateDoc, ToneDoc,
};
use gbbm_kam::spectral_core::lambda_f64;
use gbbm_kam::{Error, Result};

use crate::{
    AnalyzeArgs, DivisorsArgs, FreqmapArgs, NormalformArgs, SimulateArgs, VerifyAllArgs,
};

pub(crate) fn parse_integrator(s: &str) -> std::result::Result<IntegratorKind, String> {
    match s {
        "midpoint" | "implicit-midpoint" => Ok(IntegratorKind::ImplicitMidpoint),
        "splitting" => Ok(IntegratorKind::Splitting),
        other => Err(format!("unknown integrator {other:?} (expected midpoint | splitting)")),
    }
}

fn req<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("{flag} is required when no --config is given")))
}

fn load_config<T: serde::de::DeserializeOwned + Validate>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    config::from_json(&text)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Print the published schema and report whether it handled the call.
fn schema_requested(command: &str, args: &crate::CommonArgs) -> Result<bool> {
    if args.schema {
        emit(config::schema(command)?, args.out.as_ref())?;
        return Ok(true);
    }
    Ok(false)
}

pub(crate) fn divisors(args: DivisorsArgs) -> Result<()> {
    if schema_requested("divisors", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<DivisorsConfig>(p)?,
        None => DivisorsConfig {
            order: req(args.order, "--order")?,
            n1: req(args.n1, "--n1")?,
            n2: req(args.n2, "--n2")?,
            j_max: req(args.j_max, "--jmax")?,
            ceiling: None,
        },
    };
    if let Some(v) = args.order {
        cfg.order = v;
    }
    if let Some(v) = args.n1 {
        cfg.n1 = v;
    }
    if let Some(v) = args.n2 {
        cfg.n2 = v;
    }
    if let Some(v) = args.j_max {
        cfg.j_max = v;
    }
    if args.ceiling.is_some() {
        cfg.ceiling = args.ceiling;
    }
    cfg.validate()?;

    let s = TangentialSet::new(cfg.n1, cfg.n2)?;
    let labels = admissible_labels(cfg.order)?;
    let survey = survey_min_divisor(cfg.order, labels, &s, cfg.j_max, cfg.ceiling)?;
    // The analytic tail rule covers the order-6 one- and two-free-mode
    // strata; higher orders confine their free entries by momentum.
    let tail = if cfg.order == 6 {
        Some(TailCertificateDoc::new(&tail_certificate(cfg.order, &s, cfg.j_max)?))
    } else {
        None
    };
    let doc = DivisorsDoc { survey: DivisorSurveyDoc::new(&survey), tail };
    emit(&to_canonical_json(&doc)?, args.common.out.as_ref())
}

/// parts + generating function + ladders + frequency model for one
/// tangential set.
fn build_model(s: TangentialSet, j_max: usize, ceiling: Option<u64>) -> Result<FrequencyModel> {
    let parts = build_g_parts(s, j_max, ceiling, false)?;
    let f6 = build_f6(&parts.g_tilde)?;
    let rbar = compute_rbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    let tbar = compute_tbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    derive_frequency_model(&parts.g_bar, &rbar, &tbar)
}

pub(crate) fn normalform(args: NormalformArgs) -> Result<()> {
    if schema_requested("normalform", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<NormalFormConfig>(p)?,
        None => NormalFormConfig {
            n1: req(args.n1, "--n1")?,
            n2: req(args.n2, "--n2")?,
            j_max: None,
            ceiling: None,
        },
    };
    if let Some(v) = args.n1 {
        cfg.n1 = v;
    }
    if let Some(v) = args.n2 {
        cfg.n2 = v;
    }
    if args.j_max.is_some() {
        cfg.j_max = args.j_max;
    }
    if args.ceiling.is_some() {
        cfg.ceiling = args.ceiling;
    }
    cfg.validate()?;

    let s = TangentialSet::new(cfg.n1, cfg.n2)?;
    let j_max = cfg.effective_j_max();
    let parts = build_g_parts(s, j_max, cfg.ceiling, false)?;
    let f6 = build_f6(&parts.g_tilde)?;
    let lam = lambda_poly(s, j_max);
    let residual = gbbm_kam::normal_form::homological_residual(&lam, &parts.g_tilde, &f6)?;
    let rbar = compute_rbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    let tbar = compute_tbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    let doc = normal_form_doc(&parts, &f6, residual.len(), &rbar, &tbar)?;
    emit(&to_canonical_json(&doc)?, args.common.out.as_ref())
}

pub(crate) fn freqmap(args: FreqmapArgs) -> Result<()> {
    if schema_requested("freqmap", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<FreqMapConfig>(p)?,
        None => FreqMapConfig {
            n1: req(args.n1, "--n1")?,
            n2: req(args.n2, "--n2")?,
            epsilon: req(args.epsilon, "--epsilon")?,
            j_max: None,
            j_max_check: None,
        },
    };
    if let Some(v) = args.n1 {
        cfg.n1 = v;
    }
    if let Some(v) = args.n2 {
        cfg.n2 = v;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if args.j_max.is_some() {
        cfg.j_max = args.j_max;
    }
    if args.j_max_check.is_some() {
        cfg.j_max_check = args.j_max_check;
    }
    cfg.validate()?;

    let s = TangentialSet::new(cfg.n1, cfg.n2)?;
    let model = build_model(s, cfg.effective_j_max(), None)?;
    let assumptions = verify_assumptions(&model, cfg.epsilon, cfg.effective_j_max_check())?;
    let doc = freq_map_doc(&model, cfg.epsilon, &assumptions)?;
    emit(&to_canonical_json(&doc)?, args.common.out.as_ref())
}

pub(crate) fn simulate(args: SimulateArgs) -> Result<()> {
    if schema_requested("simulate", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<SimConfig>(p)?,
        None => {
            let s = TangentialSet::new(req(args.n1, "--n1")?, req(args.n2, "--n2")?)?;
            SimConfig::for_tangential(s, [req(args.xi1, "--xi1")?, req(args.xi2, "--xi2")?])
        }
    };
    if let Some(v) = args.n1 {
        cfg.n1 = v;
    }
    if let Some(v) = args.n2 {
        cfg.n2 = v;
    }
    if let Some(v) = args.xi1 {
        cfg.xi[0] = v;
    }
    if let Some(v) = args.xi2 {
        cfg.xi[1] = v;
    }
    if let Some(v) = args.phase1 {
        cfg.phases[0] = v;
    }
    if let Some(v) = args.phase2 {
        cfg.phases[1] = v;
    }
    if let Some(v) = args.j_max {
        cfg.j_max = v;
    }
    if let Some(v) = args.m {
        cfg.m = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = args.sample_stride {
        cfg.sample_stride = v;
    }
    if let Some(v) = args.integrator {
        cfg.integrator = v;
    }
    if args.linear {
        cfg.include_nonlinearity = false;
    }
    cfg.validate()?;

    let traj = integrate(&cfg)?;
    if let Some(path) = &args.summary {
        std::fs::write(path, to_canonical_json(&SimulateDoc::new(&traj))?).map_err(Error::Io)?;
    }
    emit(&trajectory_to_csv(&traj), args.common.out.as_ref())
}

pub(crate) fn analyze(args: AnalyzeArgs) -> Result<()> {
    if schema_requested("analyze", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<AnalyzeConfig>(p)?,
        None => AnalyzeConfig { count: 1, n1: None, n2: None, xi: None, j_max: None },
    };
    if let Some(v) = args.count {
        cfg.count = v;
    }
    if args.n1.is_some() {
        cfg.n1 = args.n1;
    }
    if args.n2.is_some() {
        cfg.n2 = args.n2;
    }
    match (args.xi1, args.xi2) {
        (None, None) => {}
        (Some(x1), Some(x2)) => cfg.xi = Some([x1, x2]),
        _ => return Err(Error::Config("--xi1 and --xi2 must be given together".into())),
    }
    if args.j_max.is_some() {
        cfg.j_max = args.j_max;
    }
    cfg.validate()?;

    let path = req(args.trajectory, "--trajectory")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read trajectory {}: {e}", path.display())))?;
    let parsed = parse_trajectory_csv(&text)?;
    let tones_z1 = extract_frequencies(&parsed.z1, parsed.sample_dt, cfg.count)?;
    let tones_z2 = extract_frequencies(&parsed.z2, parsed.sample_dt, cfg.count)?;

    let prediction = match cfg.prediction_request()? {
        None => None,
        Some((s, xi, j_max)) => {
            let model = build_model(s, j_max, None)?;
            let lambda = [lambda_f64(s.n1()), lambda_f64(s.n2())];
            let omega_quadratic = omega0(&model.quadratic_only(), xi);
            let omega_full = omega0(&model, xi);
            let measured = [tones_z1[0].0, tones_z2[0].0];
            let shift_measured = [measured[0] - lambda[0], measured[1] - lambda[1]];
            let shift_predicted =
                [omega_quadratic[0] - lambda[0], omega_quadratic[1] - lambda[1]];
            let rel_shift_error = [
                (shift_measured[0] - shift_predicted[0]).abs() / shift_predicted[0].abs(),
                (shift_measured[1] - shift_predicted[1]).abs() / shift_predicted[1].abs(),
            ];
            Some(AnalyzePredictionDoc {
                lambda,
                omega_quadratic,
                omega_full,
                measured,
                shift_measured,
                shift_predicted,
                rel_shift_error,
            })
        }
    };
    let as_docs = |tones: &[(f64, f64)]| -> Vec<ToneDoc> {
        tones.iter().map(|&(frequency, amplitude)| ToneDoc { frequency, amplitude }).collect()
    };
    let doc = AnalyzeDoc {
        n_samples: parsed.times.len(),
        sample_dt: parsed.sample_dt,
        tones_z1: as_docs(&tones_z1),
        tones_z2: as_docs(&tones_z2),
        prediction,
    };
    emit(&to_canonical_json(&doc)?, args.common.out.as_ref())
}

pub(crate) fn verify_all(args: VerifyAllArgs) -> Result<()> {
    if schema_requested("verify-all", &args.common)? {
        return Ok(());
    }
    let mut cfg = match &args.common.config {
        Some(p) => load_config::<VerifyAllConfig>(p)?,
        None => VerifyAllConfig::default(),
    };
    if let Some(v) = args.criteria {
        cfg.criteria = v;
    }
    cfg.validate()?;

    let ids: Vec<u8> =
        if cfg.criteria.is_empty() { (1..=10).collect() } else { cfg.criteria.clone() };
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        let c = acceptance::run_criterion(id)?;
        eprintln!("criterion {}: {} — {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        criteria.push(c);
    }
    let all_pass = criteria.iter().all(|c| c.pass);
    let doc = acceptance::VerifyAllDoc { criteria, all_pass };
    emit(&to_canonical_json(&doc)?, args.common.out.as_ref())?;
    if !all_pass {
        return Err(Error::Verification("one or more criteria failed".into()));
    }
    Ok(())
}
