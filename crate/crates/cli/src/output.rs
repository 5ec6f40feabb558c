//! CSV and JSON writers with provenance.
//!
//! CSV files start with `#` comment lines naming the tool, version, command
//! and the SHA-256 of the resolved configuration, followed by one header
//! line. Floats are written in scientific notation with 17 significant
//! digits, so identical configurations give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "twistlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new<C: Serialize>(command: &'static str, config: &C) -> CliResult<Self> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Schema(e.to_string()))?;
        let canonical = serde_json::to_string(&config).map_err(|e| CliError::Schema(e.to_string()))?;
        let digest = Sha256::digest(format!("{command}\n{canonical}").as_bytes());
        Ok(Self {
            tool: TOOL,
            version: VERSION,
            command,
            config_sha256: hex::encode(digest),
            config,
        })
    }

    fn comment_lines(&self) -> String {
        format!(
            "# tool: {} {}\n# command: {}\n# config_sha256: {}\n# config: {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.config
        )
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_csv<I>(path: &Path, provenance: &Provenance, header: &[&str], rows: I) -> CliResult<usize>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    let mut out = create(path)?;
    let io = |e| CliError::io(path, e);
    out.write_all(provenance.comment_lines().as_bytes()).map_err(io)?;
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let mut n = 0;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
        n += 1;
    }
    out.flush().map_err(io)?;
    Ok(n)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with a `provenance` block, to `path` or stdout.
pub fn write_json<T: Serialize>(path: Option<&Path>, provenance: &Provenance, body: &T) -> CliResult<()> {
    let text =
        serde_json::to_string_pretty(&Document { provenance, body }).map_err(|e| CliError::Numeric(e.to_string()))?;
    match path {
        Some(p) => {
            let mut out = create(p)?;
            writeln!(out, "{text}")
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(p, e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 14.885_780_140_019_74, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn hash_depends_on_command_and_config() {
        let a = Provenance::new("qpd", &serde_json::json!({"spin": 20.0})).unwrap();
        let b = Provenance::new("qpd", &serde_json::json!({"spin": 20.0})).unwrap();
        let c = Provenance::new("qpd", &serde_json::json!({"spin": 20.5})).unwrap();
        let d = Provenance::new("evolve", &serde_json::json!({"spin": 20.0})).unwrap();
        assert_eq!(a.config_sha256, b.config_sha256);
        assert_ne!(a.config_sha256, c.config_sha256);
        assert_ne!(a.config_sha256, d.config_sha256);
        assert_eq!(a.config_sha256.len(), 64);
    }
}
