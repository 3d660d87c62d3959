//! `discrete`: weak-value tomography of an N-level state with the Fourier
//! pair of mutually unbiased bases.

use std::path::Path;

use serde::Serialize;
use weakwave::engine::{discrete_profile, reconstruct_discrete};
use weakwave::state::{fourier_mub, DiscreteState};
use weakwave::Complex64;

use crate::error::CliError;
use crate::output::{write_file, Cplx};

pub const MAX_DIM: usize = 64;
const NORM_TOL: f64 = 1e-9;
const FIDELITY_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct PostselectionResult {
    b0: usize,
    weak_values: Vec<Cplx>,
    weak_value_sum: Cplx,
    reconstruction: Vec<Cplx>,
    fidelity: f64,
}

#[derive(Debug, Serialize)]
struct DiscreteReport {
    command: &'static str,
    dim: usize,
    source: String,
    state: Vec<Cplx>,
    results: Vec<PostselectionResult>,
}

/// Reads `index,re,im` rows (header required, `#` lines ignored).
pub fn read_state(path: &Path) -> Result<DiscreteState, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let bad = |msg: String| CliError::Validation(format!("state file {}: {msg}", path.display()));
    let mut rows = Vec::new();
    let mut header = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line.replace(' ', "") != "index,re,im" {
                return Err(bad(format!("expected header `index,re,im`, got `{line}`")));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match f.as_slice() {
            [i, re, im] => i.parse::<usize>().ok().zip(re.parse::<f64>().ok()).zip(im.parse::<f64>().ok()),
            _ => None,
        };
        let ((i, re), im) = parsed.ok_or_else(|| bad(format!("line {}: expected `index,re,im`", n + 1)))?;
        rows.push((i, Complex64::new(re, im)));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(k, r)| r.0 != k) {
        return Err(bad("indices must be 0..N-1, each exactly once".into()));
    }
    DiscreteState::new(rows.into_iter().map(|r| r.1).collect()).map_err(|e| bad(e.to_string()))
}

pub struct DiscreteArgs<'a> {
    pub dim: Option<usize>,
    pub state: Option<&'a Path>,
    pub b0: Option<usize>,
    pub seed: u64,
    pub out: Option<&'a Path>,
    pub quiet: bool,
}

pub fn cmd_discrete(a: DiscreteArgs<'_>) -> Result<(), CliError> {
    let (psi, source) = match a.state {
        Some(p) => (read_state(p)?, p.display().to_string()),
        None => {
            let dim = a
                .dim
                .ok_or_else(|| CliError::Validation("dim: give --dim or --state".into()))?;
            check_dim(dim)?;
            (DiscreteState::random(dim, a.seed)?, format!("random, seed {}", a.seed))
        }
    };
    let dim = psi.dim();
    check_dim(dim)?;
    if let Some(d) = a.dim {
        if d != dim {
            return Err(CliError::Validation(format!("dim: --dim {d} but the state has {dim} entries")));
        }
    }
    let n2 = psi.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(CliError::Validation(format!("state: must be normalized, |psi|^2 = {n2}")));
    }
    let b0s: Vec<usize> = match a.b0 {
        Some(b) if b >= dim => return Err(CliError::Validation(format!("b0: must be below {dim}, got {b}"))),
        Some(b) => vec![b],
        None => (0..dim).collect(),
    };

    let pair = fourier_mub(dim)?;
    let mut results = Vec::new();
    for &b0 in &b0s {
        let wv = discrete_profile(&psi, &pair, b0)?;
        let rec = reconstruct_discrete(&wv, &pair, b0)?;
        let fidelity = rec.fidelity(&psi)?;
        // align the arbitrary global phase with the input for display
        let ov = psi.inner(&rec)?;
        let phase = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { Complex64::new(1.0, 0.0) };
        results.push(PostselectionResult {
            b0,
            weak_value_sum: wv.iter().sum::<Complex64>().into(),
            weak_values: wv.iter().map(|&z| z.into()).collect(),
            reconstruction: rec.amplitudes().iter().map(|&z| (z * phase).into()).collect(),
            fidelity,
        });
    }

    if !a.quiet {
        println!("dim {dim}, state {source}");
        for r in &results {
            println!(
                "b0 = {:>2}: fidelity {:.15}, sum of weak values {:.12}{:+.12}i",
                r.b0, r.fidelity, r.weak_value_sum.re, r.weak_value_sum.im
            );
        }
    }
    if let Some(out) = a.out {
        let mut csv = format!("# weakwave {} discrete\n# dim = {dim}\n# state = {source}\n", env!("CARGO_PKG_VERSION"));
        csv.push_str("b0,a,re_wv,im_wv,re_rec,im_rec\n");
        for r in &results {
            for (i, (w, z)) in r.weak_values.iter().zip(&r.reconstruction).enumerate() {
                csv.push_str(&format!("{},{i},{:.16e},{:.16e},{:.16e},{:.16e}\n", r.b0, w.re, w.im, z.re, z.im));
            }
        }
        write_file(out, "discrete.csv", csv.as_bytes())?;
        let report = DiscreteReport {
            command: "discrete",
            dim,
            source,
            state: psi.amplitudes().iter().map(|&z| z.into()).collect(),
            results,
        };
        let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        json.push('\n');
        write_file(out, "discrete.json", json.as_bytes())?;
        return check_fidelity(&report.results);
    }
    check_fidelity(&results)
}

fn check_dim(dim: usize) -> Result<(), CliError> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(CliError::Validation(format!("dim: must lie in 2..={MAX_DIM}, got {dim}")));
    }
    Ok(())
}

fn check_fidelity(results: &[PostselectionResult]) -> Result<(), CliError> {
    match results.iter().find(|r| (1.0 - r.fidelity).abs() > FIDELITY_TOL) {
        Some(r) => Err(CliError::Mismatch(format!(
            "b0 = {}: round-trip fidelity {} differs from 1 by more than {FIDELITY_TOL:e}",
            r.b0, r.fidelity
        ))),
        None => Ok(()),
    }
}
