//! `oracle`: engine against the brute-force joint-space simulation.

use serde::Serialize;
use weakwave::engine::{oracle_scan, scan_weak_values, ORACLE_MAX_POINTS, ROTATION_GAIN};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{header, write_file};

pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct OracleReport {
    command: &'static str,
    n_points: usize,
    max_abs_diff: f64,
    worst_bin: Option<usize>,
    flag_mismatches: usize,
    tolerance: f64,
    pass: bool,
}

/// `corrupt` drops the rotation gain from the engine readout, a negative
/// control that the comparison must catch.
pub fn cmd_oracle(r: &Resolved, corrupt: bool, quiet: bool) -> Result<(), CliError> {
    let n = r.spec.n_points();
    if n > ORACLE_MAX_POINTS {
        return Err(CliError::Validation(format!(
            "grid.n_points: the oracle is limited to {ORACLE_MAX_POINTS} points, got {n}"
        )));
    }
    let state = r.prepare()?;
    let eta = r.config.measurement.visibility;
    let mut engine = scan_weak_values(&state, r.phi_rad, &r.postselection, eta)?;
    if corrupt {
        for v in &mut engine.values {
            *v *= ROTATION_GAIN;
        }
    }
    let oracle = oracle_scan(&state, r.phi_rad, &r.postselection, eta)?;

    let mut max_diff: f64 = 0.0;
    let mut worst = None;
    let mut mismatches = 0;
    let mut text = String::new();
    for c in header("oracle", &r.config) {
        text.push_str(&format!("# {c}\n"));
    }
    text.push_str("x_mm,engine_re,engine_im,oracle_re,oracle_im,abs_diff,flag\n");
    for (b, o) in oracle.iter().enumerate() {
        let e = engine.values[b];
        let x = r.spec.x(b);
        match (o, engine.is_valid(b)) {
            (Some(o), true) => {
                let d = (e - o).norm();
                if d > max_diff || worst.is_none() {
                    max_diff = max_diff.max(d);
                    worst = Some(b);
                }
                text.push_str(&format!(
                    "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{d:.16e},ok\n",
                    e.re, e.im, o.re, o.im
                ));
            }
            (None, false) => text.push_str(&format!("{x:.16e},,,,,,null_postselection\n")),
            _ => {
                mismatches += 1;
                text.push_str(&format!("{x:.16e},,,,,,flag_mismatch\n"));
            }
        }
    }
    let pass = max_diff <= TOLERANCE && mismatches == 0;
    let report = OracleReport {
        command: "oracle",
        n_points: n,
        max_abs_diff: max_diff,
        worst_bin: worst,
        flag_mismatches: mismatches,
        tolerance: TOLERANCE,
        pass,
    };
    let out = &r.config.output.dir;
    write_file(out, "oracle.csv", text.as_bytes())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    write_file(out, "oracle.json", json.as_bytes())?;
    if !quiet {
        println!(
            "max |engine - oracle| = {max_diff:.3e} over {n} bins, flag mismatches {mismatches}: {}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "max difference {max_diff:.3e} exceeds {TOLERANCE:e} or flags disagree ({mismatches})"
        )))
    }
}
