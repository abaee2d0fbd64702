//! Run-report plumbing for the command-line front end: a canonical JSON
//! envelope that is byte-identical for identical config and seed, CSV
//! projections, a non-deterministic timing sidecar, and replayable witness
//! files for failed checks.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const TOOL_NAME: &str = "hesslab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical report envelope. Field order is fixed by this declaration, and
/// all content is a pure function of (config, seed), so serializing the same
/// run twice yields identical bytes; wall-clock data lives in the sidecar.
#[derive(Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    /// Slug naming the property this run checks.
    pub check: &'static str,
    pub seed: Option<u64>,
    pub passed: bool,
    /// The exact configuration used, after config-file merging.
    pub config: serde_json::Value,
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(
        check: &'static str,
        seed: Option<u64>,
        passed: bool,
        config: serde_json::Value,
        data: serde_json::Value,
    ) -> Self {
        Report { tool: TOOL_NAME, version: TOOL_VERSION, check, seed, passed, config, data }
    }
}

/// Writes one command's artifacts under a fixed base name in the output
/// directory: `<name>.json` (always), `<name>.csv` (tabular commands),
/// `<name>.witness.json` (failed checks), `<name>.meta.json` (timing).
pub struct Emitter {
    dir: PathBuf,
    name: String,
    started: Instant,
}

impl Emitter {
    pub fn new(dir: &Path, name: &str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Emitter { dir: dir.to_path_buf(), name: name.to_string(), started: Instant::now() })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{}", self.name, suffix))
    }

    pub fn write_json(&self, report: &Report) -> io::Result<PathBuf> {
        let path = self.path(".json");
        let mut text = serde_json::to_string_pretty(report).expect("report serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// CSV projection; the leading comment line records tool, version, and
    /// seed so the table is self-describing.
    pub fn write_csv(&self, body: &str, seed: Option<u64>) -> io::Result<PathBuf> {
        let path = self.path(".csv");
        let seed_part = seed.map(|s| format!(" seed={s}")).unwrap_or_default();
        let text = format!("# tool={TOOL_NAME} version={TOOL_VERSION}{seed_part}\n{body}");
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Standalone replayable record of a failed check's inputs.
    pub fn write_witness(&self, witness: &serde_json::Value) -> io::Result<PathBuf> {
        let path = self.path(".witness.json");
        let mut text = serde_json::to_string_pretty(witness).expect("witness serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn write_binary(&self, write: impl FnOnce(&Path) -> io::Result<()>) -> io::Result<PathBuf> {
        let path = self.path(".bin");
        write(&path)?;
        Ok(path)
    }

    /// Timing sidecar — deliberately outside the deterministic report.
    pub fn write_sidecar(&self) -> io::Result<PathBuf> {
        let path = self.path(".meta.json");
        let unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = serde_json::json!({
            "written_unix_s": unix_s,
            "duration_ms": self.started.elapsed().as_millis() as u64,
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
