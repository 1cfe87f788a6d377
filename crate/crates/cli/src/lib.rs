//! Experiment runner library: configuration, the magnetometry studies
//! (estimation, probe training, trainability scan, bound comparison) and
//! deterministic CSV/SVG persistence.

pub mod config;
pub mod experiments;
pub mod plot;

use std::fmt;

/// Errors surfaced to the command line, mapped onto exit codes:
/// configuration problems exit 2, numerical-invariant violations exit 3,
/// I/O failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
    Core(qfisher::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical invariant violated: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<qfisher::Error> for CliError {
    fn from(e: qfisher::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
            CliError::Core(_) => 3,
        }
    }
}

/// Write a CSV file with a `# key = value` metadata preamble, a header
/// row, then the data rows. No timestamps: reruns are byte-identical.
pub fn write_csv(
    path: &std::path::Path,
    metadata: &[(String, String)],
    header: &str,
    rows: &[String],
) -> Result<(), CliError> {
    let mut out = String::new();
    for (k, v) in metadata {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// SplitMix64 step; derives independent per-unit seeds from a base seed
/// and a unit index so results do not depend on worker scheduling.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
