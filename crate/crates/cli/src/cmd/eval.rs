use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use foresight_core::dataset::{Dataset, Split, TrainingSample};
use foresight_core::metrics::{evaluate, EvalConfig, EvalReport, EvalSummary, MetricsError, DEFAULT_MIN_ROOM_AREA};
use foresight_core::NUM_CLASSES;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{DATASET_FILE, SPLIT_FILE};
use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::ensure_dir;
use crate::predictor::Choice;

#[derive(Args, Serialize, Default, Debug)]
pub struct EvalFlags {
    /// Directory written by `foresight dataset`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// oracle, uniform, zero, constant:V, frequency or external:ENDPOINT.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictor: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relax: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_room_area: Option<usize>,
    /// all, train, val or test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub predictor: String,
    pub relax: bool,
    pub min_room_area: usize,
    pub split: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            dataset: "dataset".into(),
            out: "eval".into(),
            predictor: "oracle".into(),
            relax: true,
            min_room_area: DEFAULT_MIN_ROOM_AREA,
            split: "all".into(),
        }
    }
}

impl Section for EvalSection {
    const NAME: &'static str = "eval";
    const HAS_SEED: bool = false;
}

struct Scored {
    plan: u32,
    step: usize,
    report: Option<EvalReport>,
}

pub fn run(cfg: &EvalSection) -> CliResult<()> {
    let choice = Choice::parse(&cfg.predictor)?;
    if choice == Choice::None {
        return Err(CliError::config("eval needs a predictor"));
    }
    let data_path = cfg.dataset.join(DATASET_FILE);
    let data = Dataset::open(&data_path).map_err(|e| CliError::from(e).context(data_path.display()))?;
    let split_path = cfg.dataset.join(SPLIT_FILE);
    let split = if split_path.exists() {
        Split::from_manifest(&fs::read_to_string(&split_path)?)?
    } else {
        Split::default()
    };
    let selected: Option<BTreeSet<u32>> = match cfg.split.as_str() {
        "all" => None,
        name => Some(
            split
                .get(name)
                .ok_or_else(|| CliError::config(format!("split must be all, train, val or test, got `{name}`")))?
                .iter()
                .copied()
                .collect(),
        ),
    };

    // One sample per (plan, step); the query only selects the heatmap.
    let mut frames: BTreeMap<(u32, usize), TrainingSample> = BTreeMap::new();
    for sample in data.iter() {
        let sample = sample?;
        frames.entry((sample.plan_id, sample.frame.step)).or_insert(sample);
    }

    let census = if choice.needs_census() {
        let train: BTreeSet<u32> = split.train.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut census = [0u64; NUM_CLASSES];
        for ((plan, _), sample) in &frames {
            if (train.is_empty() || train.contains(plan)) && seen.insert(*plan) {
                for (slot, n) in census.iter_mut().zip(sample.gt.census()) {
                    *slot += n;
                }
            }
        }
        Some(census)
    } else {
        None
    };
    let kind = choice.kind(census.as_ref())?.expect("predictor present");
    let eval_cfg = EvalConfig {
        relax: cfg.relax,
        min_room_area: cfg.min_room_area,
    };

    let mut by_plan: BTreeMap<u32, Vec<&TrainingSample>> = BTreeMap::new();
    for ((plan, _), sample) in &frames {
        if selected.as_ref().is_none_or(|s| s.contains(plan)) {
            by_plan.entry(*plan).or_default().push(sample);
        }
    }
    if by_plan.is_empty() {
        return Err(CliError::config(format!("no frames in split `{}`", cfg.split)));
    }
    let scored = by_plan
        .par_iter()
        .map(|(plan, samples)| {
            let mut predictor = kind.build(&samples[0].gt)?;
            samples
                .iter()
                .map(|s| {
                    let pred = predictor.predict(&s.frame, s.query)?.argmax();
                    let report = match evaluate(&pred, &s.gt, &s.frame.explored, &eval_cfg) {
                        Ok(r) => Some(r),
                        Err(MetricsError::EmptyRegion) => None,
                        Err(e) => return Err(e.into()),
                    };
                    Ok(Scored {
                        plan: *plan,
                        step: s.frame.step,
                        report,
                    })
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let scored: Vec<Scored> = scored.into_iter().flatten().collect();

    ensure_dir(&cfg.out)?;
    let mut rows = EvalReport::row_header();
    rows.push('\n');
    let mut reports = Vec::new();
    let mut skipped = 0;
    for s in &scored {
        match &s.report {
            Some(r) => {
                rows.push_str(&r.to_row(s.plan, s.step));
                rows.push('\n');
                reports.push(r.clone());
            }
            None => skipped += 1,
        }
    }
    fs::write(cfg.out.join("frames.tsv"), rows)?;
    let mut text = String::new();
    let _ = writeln!(text, "predictor={}", kind);
    let _ = writeln!(text, "skipped_empty={skipped}");
    match EvalSummary::from_reports(&reports) {
        Some(summary) => text.push_str(&summary.to_key_value()),
        None => text.push_str("frames=0\n"),
    }
    fs::write(cfg.out.join("report.txt"), &text)?;
    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    print!("{text}");
    Ok(())
}
