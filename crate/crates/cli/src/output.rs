use std::fs;
use std::path::Path;

use serde::Serialize;
use weakwave::Complex64;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

/// Comment lines that make a data file self-describing: the tool, the
/// seed, and the complete resolved configuration.
pub fn header(command: &str, cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![
        format!("weakwave {} {command}", env!("CARGO_PKG_VERSION")),
        format!("seed = {}", cfg.counting.seed),
        "resolved config:".to_string(),
    ];
    lines.extend(cfg.to_toml().lines().filter(|l| !l.is_empty()).map(str::to_string));
    lines
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
