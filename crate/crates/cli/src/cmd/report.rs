use std::fs;
use std::path::PathBuf;

use clap::Args;
use foresight_core::nav::EpisodeLog;
use serde::{Deserialize, Serialize};

use super::nav::write_reports;
use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::ensure_dir;

#[derive(Args, Serialize, Default, Debug)]
pub struct ReportFlags {
    /// episodes.tsv written by `foresight nav`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub episodes: PathBuf,
    pub out: PathBuf,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            episodes: "nav/episodes.tsv".into(),
            out: "report".into(),
        }
    }
}

impl Section for ReportSection {
    const NAME: &'static str = "report";
    const HAS_SEED: bool = false;
}

pub fn run(cfg: &ReportSection) -> CliResult<()> {
    let text = fs::read_to_string(&cfg.episodes).map_err(|e| CliError::from(e).context(cfg.episodes.display()))?;
    let mut parsed = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        parsed.push(EpisodeLog::from_line(line).map_err(|e| CliError::from(e).context(cfg.episodes.display()))?);
    }
    let logs: Vec<(&str, EpisodeLog)> = parsed.iter().map(|(a, l)| (a.as_str(), l.clone())).collect();
    ensure_dir(&cfg.out)?;
    let report = write_reports(&cfg.out, &logs)?;
    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    print!("{report}");
    Ok(())
}
