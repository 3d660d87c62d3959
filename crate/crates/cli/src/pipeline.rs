//! `run` and `sweep`: prepare, scan (exactly or by simulated counting),
//! analyse, and write the results.

use std::path::Path;

use serde::Serialize;
use weakwave::analysis::{
    compare_expectation_profile, compare_probability, extract_phase_with_floor, fit_linear_phase,
    fit_quadratic_phase, reconstruction_fidelity, write_reconstruction_csv, FitResult, PhaseProfile,
    ProbabilityReport,
};
use weakwave::counting::{estimate_profile, simulate_scan, write_counts_csv, CountRecord, EstimatedProfile};
use weakwave::engine::{scan_weak_values, PostSelection, ScanSettings, WeakValueProfile};
use weakwave::par::{map_indexed, Strategy};
use weakwave::scenario::{probability_scan, ScenarioKind};
use weakwave::state::GridState;

use crate::config::{Resolved, RunConfig, SweepParam, SweepSection};
use crate::error::CliError;
use crate::output::{header, write_file, Cplx};

#[derive(Debug, Clone, Serialize)]
pub struct PassSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingSummary {
    pub n_incident: u64,
    pub seed: u64,
    pub mean_standard_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub scenario: ScenarioKind,
    pub n_points: usize,
    pub dx_mm: f64,
    pub phi_rad: f64,
    pub postselection: PostSelection,
    /// Fidelity of the reported reconstruction (counted if counting is on).
    pub fidelity: f64,
    /// Fidelity of the noiseless engine reconstruction.
    pub exact_fidelity: f64,
    /// `sum_x <pi_x>_W dx` of the engine profile; tends to 1 as phi -> 0.
    pub weak_value_sum: Cplx,
    pub pass_probability: PassSummary,
    pub flagged_bins: usize,
    pub flagged_fraction: f64,
    pub probability: ProbabilityReport,
    /// Re of the profile scaled to unit sum against `|psi|^2 dx`, without a slit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_slit_expectation: Option<ProbabilityReport>,
    pub linear_fit: Option<FitResult>,
    pub quadratic_fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_gradient_rad_per_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_curvature_rad_per_mm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_step_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counting: Option<CountingSummary>,
    pub config: RunConfig,
}

pub struct Outcome {
    pub truth: GridState,
    pub exact: WeakValueProfile,
    pub counts: Option<(Vec<CountRecord>, EstimatedProfile)>,
    pub measured: WeakValueProfile,
    pub phase: Option<PhaseProfile>,
    pub report: Report,
}

pub fn evaluate(r: &Resolved) -> Result<Outcome, CliError> {
    let cfg = &r.config;
    let truth = r.prepare()?;
    let visibility = cfg.measurement.visibility;
    let exact = scan_weak_values(&truth, r.phi_rad, &r.postselection, visibility)?;

    let counts = if cfg.counting.enabled {
        let records = simulate_scan(
            Strategy::Parallel,
            &truth,
            r.phi_rad,
            &r.postselection,
            cfg.counting.n_incident,
            cfg.counting.seed,
        )?;
        // simulated detectors see the full fringe contrast
        let settings = ScanSettings {
            phi: r.phi_rad,
            postselection: r.postselection,
            visibility: 1.0,
        };
        let est = estimate_profile(&records, &r.spec, &settings).map_err(|e| match e {
            weakwave::Error::EmptyBin(b) => CliError::Degenerate(format!(
                "bin {b} recorded no detections; raise counting.n_incident"
            )),
            other => other.into(),
        })?;
        Some((records, est))
    } else {
        None
    };
    let measured = match &counts {
        Some((_, est)) => est.to_profile(),
        None => exact.clone(),
    };

    let valid_pass: Vec<f64> = (0..exact.len())
        .filter(|&i| exact.is_valid(i))
        .map(|i| exact.postselect_prob[i])
        .collect();
    let pass_probability = if valid_pass.is_empty() {
        PassSummary { min: 0.0, mean: 0.0, max: 0.0 }
    } else {
        PassSummary {
            min: valid_pass.iter().copied().fold(f64::INFINITY, f64::min),
            mean: valid_pass.iter().sum::<f64>() / valid_pass.len() as f64,
            max: valid_pass.iter().copied().fold(0.0, f64::max),
        }
    };
    let truth_p = probability_scan(&truth);
    let phase = extract_phase_with_floor(&measured, cfg.analysis.magnitude_floor).ok();
    let fit = |quadratic: bool| {
        phase.as_ref().and_then(|pp| {
            if quadratic {
                fit_quadratic_phase(pp).ok()
            } else {
                fit_linear_phase(pp).ok()
            }
        })
    };
    let kind = r.scenario.kind;
    let report = Report {
        command: "run",
        scenario: kind,
        n_points: r.spec.n_points(),
        dx_mm: r.spec.dx(),
        phi_rad: r.phi_rad,
        postselection: r.postselection,
        fidelity: reconstruction_fidelity(&measured, &truth)?,
        exact_fidelity: reconstruction_fidelity(&exact, &truth)?,
        weak_value_sum: exact.total().into(),
        pass_probability,
        flagged_bins: exact.flagged_count(),
        flagged_fraction: exact.flagged_count() as f64 / exact.len() as f64,
        probability: compare_probability(&measured, &truth_p)?,
        no_slit_expectation: match r.postselection {
            PostSelection::None => Some(compare_expectation_profile(&measured, &truth_p)?),
            _ => None,
        },
        linear_fit: fit(false),
        quadratic_fit: fit(true),
        expected_gradient_rad_per_mm: (kind == ScenarioKind::PhaseGradient).then(|| r.scenario.optics.phase_gradient()),
        expected_curvature_rad_per_mm2: (kind == ScenarioKind::PhaseCurvature)
            .then(|| r.scenario.optics.phase_curvature()),
        phase_step_rad: match (kind, &phase) {
            (ScenarioKind::GlassStep, Some(pp)) => pp.step_across(0.0).ok(),
            _ => None,
        },
        counting: counts.as_ref().map(|(_, est)| CountingSummary {
            n_incident: cfg.counting.n_incident,
            seed: cfg.counting.seed,
            mean_standard_error: est.mean_standard_error(),
        }),
        config: cfg.clone(),
    };
    Ok(Outcome {
        truth,
        exact,
        counts,
        measured,
        phase,
        report,
    })
}

fn check_flags(r: &Resolved, report: &Report) -> Result<(), CliError> {
    let limit = r.config.measurement.max_flagged_fraction;
    if report.flagged_fraction > limit {
        return Err(CliError::Degenerate(format!(
            "{} of {} bins have a null post-selection ({:.3} > measurement.max_flagged_fraction = {limit})",
            report.flagged_bins, report.n_points, report.flagged_fraction
        )));
    }
    Ok(())
}

/// Writes every artifact of one run into `out`; returns the file names.
pub fn write_run(out: &Path, o: &Outcome) -> Result<Vec<&'static str>, CliError> {
    let cfg = &o.report.config;
    let head = header("run", cfg);
    let mut files = Vec::new();

    let mut buf = Vec::new();
    o.exact.write_csv(&head, &mut buf)?;
    write_file(out, "profile.csv", &buf)?;
    files.push("profile.csv");

    let mut buf = Vec::new();
    write_reconstruction_csv(&o.measured, o.phase.as_ref(), &head, &mut buf)?;
    write_file(out, "reconstruction.csv", &buf)?;
    files.push("reconstruction.csv");

    if let Some((records, est)) = &o.counts {
        let mut buf = Vec::new();
        write_counts_csv(records, o.truth.spec(), &head, &mut buf)?;
        write_file(out, "counts.csv", &buf)?;
        files.push("counts.csv");

        let mut text = String::new();
        for c in &head {
            text.push_str(&format!("# {c}\n"));
        }
        text.push_str("x_mm,re_wv,im_wv,se_re,se_im\n");
        for i in 0..est.len() {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                est.spec.x(i),
                est.re[i],
                est.im[i],
                est.se_re[i],
                est.se_im[i]
            ));
        }
        write_file(out, "estimate.csv", text.as_bytes())?;
        files.push("estimate.csv");
    }

    let mut json = serde_json::to_string_pretty(&o.report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    write_file(out, "report.json", json.as_bytes())?;
    files.push("report.json");

    write_file(out, "config.resolved.toml", cfg.to_toml().as_bytes())?;
    files.push("config.resolved.toml");
    Ok(files)
}

pub fn cmd_run(r: &Resolved, quiet: bool) -> Result<(), CliError> {
    let o = evaluate(r)?;
    let out = &r.config.output.dir;
    let files = write_run(out, &o)?;
    if !quiet {
        let rep = &o.report;
        println!(
            "fidelity {:.6} (engine {:.6}), sum {:.6}{:+.6}i, flagged {}/{}",
            rep.fidelity, rep.exact_fidelity, rep.weak_value_sum.re, rep.weak_value_sum.im, rep.flagged_bins, rep.n_points
        );
        if let Some(f) = &rep.linear_fit {
            println!("linear phase fit m = {:.6e} +/- {:.1e} rad/mm", f.coefficient, f.coefficient_se);
        }
        if let Some(f) = &rep.quadratic_fit {
            println!("quadratic phase fit r = {:.6e} +/- {:.1e} rad/mm^2", f.coefficient, f.coefficient_se);
        }
        println!("wrote {} to {}", files.join(", "), out.display());
    }
    check_flags(r, &o.report)
}

#[derive(Debug, Clone)]
struct SweepRow {
    value: f64,
    report: Report,
}

pub fn cmd_sweep(base: &Resolved, quiet: bool) -> Result<(), CliError> {
    let sweep = base
        .config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Validation("sweep: missing [sweep] table or --param/--values".into()))?;
    let param = SweepParam::parse(&sweep.parameter)?;
    if sweep.values.is_empty() {
        return Err(CliError::Validation("sweep.values: must not be empty".into()));
    }
    let mut values = sweep.values.clone();
    values.sort_by(f64::total_cmp);

    // validate every point before computing any
    let points: Vec<Resolved> = values
        .iter()
        .map(|&v| {
            let mut c = param.apply(&base.config, v)?;
            c.sweep = None;
            c.resolve().map_err(|e| match e {
                CliError::Validation(m) => CliError::Validation(format!("{} = {v}: {m}", param.key())),
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<SweepRow> = map_indexed(Strategy::Parallel, points.len(), |i| {
        evaluate(&points[i]).map(|o| SweepRow {
            value: values[i],
            report: o.report,
        })
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    for (row, p) in rows.iter().zip(&points) {
        check_flags(p, &row.report)?;
    }

    let cfg = RunConfig {
        sweep: Some(SweepSection {
            parameter: param.key().to_string(),
            values: values.clone(),
        }),
        ..base.config.clone()
    };
    let mut text = String::new();
    for c in header("sweep", &cfg) {
        text.push_str(&format!("# {c}\n"));
    }
    text.push_str(&format!(
        "{},fidelity,exact_fidelity,prob_l1,gradient_rad_per_mm,gradient_se,curvature_rad_per_mm2,curvature_se,mean_standard_error,flagged_bins\n",
        param.key()
    ));
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for row in &rows {
        let r = &row.report;
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{},{},{}\n",
            row.value,
            r.fidelity,
            r.exact_fidelity,
            r.probability.l1,
            opt(r.linear_fit.as_ref().map(|f| f.coefficient)),
            opt(r.linear_fit.as_ref().map(|f| f.coefficient_se)),
            opt(r.quadratic_fit.as_ref().map(|f| f.coefficient)),
            opt(r.quadratic_fit.as_ref().map(|f| f.coefficient_se)),
            opt(r.counting.as_ref().map(|c| c.mean_standard_error)),
            r.flagged_bins
        ));
    }
    let out = &cfg.output.dir;
    write_file(out, "sweep.csv", text.as_bytes())?;
    write_file(out, "config.resolved.toml", cfg.to_toml().as_bytes())?;
    if !quiet {
        println!("{:>16}  {:>10}  {:>14}  {:>14}", param.key(), "fidelity", "m rad/mm", "r rad/mm^2");
        for row in &rows {
            let r = &row.report;
            println!(
                "{:>16}  {:>10.6}  {:>14}  {:>14}",
                row.value,
                r.fidelity,
                r.linear_fit.as_ref().map(|f| format!("{:.6e}", f.coefficient)).unwrap_or_default(),
                r.quadratic_fit.as_ref().map(|f| format!("{:.6e}", f.coefficient)).unwrap_or_default(),
            );
        }
        println!("wrote sweep.csv, config.resolved.toml to {}", out.display());
    }
    Ok(())
}
