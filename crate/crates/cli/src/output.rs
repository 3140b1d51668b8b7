//! Artifact names, default file names and writers.
//!
//! CSV floats use the shortest representation that round-trips (exponent form
//! outside roughly 1e-5..1e16), and JSON objects have sorted keys, so
//! identical runs write identical bytes.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;
use swarmlink::channel::FadingKind;

use crate::error::CliError;

/// Version stamped into every JSON artifact as `schema_version`.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Dynamics,
    WindPsd,
    WindSeries,
    WindSummary,
    OptimizeTrace,
    OptimizeSummary,
    Formation,
    ChannelSweep,
    Constellation(FadingKind),
    Ber(FadingKind),
    BudgetReport,
    Budget,
    BerDist,
    NetworkTopology,
    NetworkComparison,
    Apf,
    ApfSummary,
}

pub fn fading_tag(kind: FadingKind) -> &'static str {
    match kind {
        FadingKind::Awgn => "awgn",
        FadingKind::Rician => "rician",
        FadingKind::Rayleigh => "rayleigh",
    }
}

const FADINGS: [FadingKind; 3] = [FadingKind::Awgn, FadingKind::Rician, FadingKind::Rayleigh];

impl Artifact {
    pub fn key(self) -> String {
        match self {
            Artifact::Dynamics => "dynamics".into(),
            Artifact::WindPsd => "wind_psd".into(),
            Artifact::WindSeries => "wind_series".into(),
            Artifact::WindSummary => "wind_summary".into(),
            Artifact::OptimizeTrace => "optimize_trace".into(),
            Artifact::OptimizeSummary => "optimize_summary".into(),
            Artifact::Formation => "formation".into(),
            Artifact::ChannelSweep => "channel_sweep".into(),
            Artifact::Constellation(k) => format!("constellation_{}", fading_tag(k)),
            Artifact::Ber(k) => format!("ber_{}", fading_tag(k)),
            Artifact::BudgetReport => "budget_report".into(),
            Artifact::Budget => "budget".into(),
            Artifact::BerDist => "berdist".into(),
            Artifact::NetworkTopology => "network_topology".into(),
            Artifact::NetworkComparison => "network_comparison".into(),
            Artifact::Apf => "apf".into(),
            Artifact::ApfSummary => "apf_summary".into(),
        }
    }

    pub fn all() -> Vec<Artifact> {
        let mut v = vec![
            Artifact::Dynamics,
            Artifact::WindPsd,
            Artifact::WindSeries,
            Artifact::WindSummary,
            Artifact::OptimizeTrace,
            Artifact::OptimizeSummary,
            Artifact::Formation,
            Artifact::ChannelSweep,
        ];
        v.extend(FADINGS.map(Artifact::Constellation));
        v.extend(FADINGS.map(Artifact::Ber));
        v.extend([
            Artifact::BudgetReport,
            Artifact::Budget,
            Artifact::BerDist,
            Artifact::NetworkTopology,
            Artifact::NetworkComparison,
            Artifact::Apf,
            Artifact::ApfSummary,
        ]);
        v
    }

    pub fn from_key(key: &str) -> Option<Artifact> {
        Artifact::all().into_iter().find(|a| a.key() == key)
    }

    /// File format: `csv`, `json` or `txt`.
    pub fn format(self) -> &'static str {
        match self {
            Artifact::WindSummary
            | Artifact::OptimizeSummary
            | Artifact::Budget
            | Artifact::NetworkTopology
            | Artifact::NetworkComparison
            | Artifact::ApfSummary => "json",
            Artifact::BudgetReport => "txt",
            _ => "csv",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.{}", self.key(), self.format())
    }
}

/// Resolves artifact paths and writes files, creating parent directories.
pub struct Writer {
    dir: PathBuf,
    overrides: Vec<(String, PathBuf)>,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: impl Into<PathBuf>, overrides: Vec<(String, PathBuf)>) -> Self {
        Self {
            dir: dir.into(),
            overrides,
            written: Vec::new(),
        }
    }

    pub fn path(&self, a: Artifact) -> PathBuf {
        let key = a.key();
        match self.overrides.iter().find(|(k, _)| *k == key) {
            Some((_, p)) if p.is_absolute() => p.clone(),
            Some((_, p)) => self.dir.join(p),
            None => self.dir.join(a.file_name()),
        }
    }

    /// Paths written so far, in write order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn put(&mut self, a: Artifact, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(a);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    pub fn csv<R, I>(&mut self, a: Artifact, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let path = self.path(a);
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::io(&path, e);
        w.write_record(header).map_err(io)?;
        for row in rows {
            let row: Vec<String> = row.into_iter().collect();
            debug_assert_eq!(row.len(), header.len());
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(&path, e.error()))?;
        self.put(a, &bytes)
    }

    /// Writes a JSON object with `schema_version` added at the top level.
    pub fn json<T: Serialize>(&mut self, a: Artifact, payload: &T) -> Result<(), CliError> {
        let mut value = serde_json::to_value(payload).map_err(|e| CliError::Parse(e.to_string()))?;
        let Value::Object(map) = &mut value else {
            return Err(CliError::Parse(format!("{} payload is not an object", a.key())));
        };
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Parse(e.to_string()))?;
        text.push('\n');
        self.put(a, text.as_bytes())
    }

    pub fn text(&mut self, a: Artifact, body: &str) -> Result<(), CliError> {
        self.put(a, body.as_bytes())
    }
}

/// CSV cell for a float, e.g. `0.5`, `20.0`, `2.3e-16`.
pub fn f(x: f64) -> String {
    format!("{x:?}")
}
