use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "spingate";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance attached to every output file. No wall-clock fields, so
/// identical inputs give identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Metadata {
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
        }
    }

    /// `# key: value` comment lines for the top of a CSV file.
    pub fn csv_header(&self) -> String {
        format!(
            "# tool: {} {}\n# config_sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.config_sha256, self.seed
        )
    }
}

pub fn with_csv_header(meta: &Metadata, body: &str) -> String {
    let mut out = meta.csv_header();
    out.push_str(body);
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Write to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("writing stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines_are_comments() {
        let m = Metadata::new(b"{}", 9);
        let h = m.csv_header();
        assert_eq!(h.lines().count(), 3);
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# seed: 9"));
        assert!(h.contains("44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"));
    }
}
