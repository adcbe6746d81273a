use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use foresight_core::dataset::{
    compute_class_weights, samples_for_frames, write_dataset, Split, Supervision, DEFAULT_STORE_FRAMES,
    DEFAULT_TRAIN_FRAMES,
};
use foresight_core::explore::{random_start, run_exploration, ExploreConfig};
use foresight_core::{ClassId, NUM_CLASSES};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::{derive_seed, ensure_dir, load_plans};

pub const DATASET_FILE: &str = "dataset.ssds";
pub const SPLIT_FILE: &str = "split.txt";
pub const WEIGHTS_FILE: &str = "class_weights.txt";

#[derive(Args, Serialize, Default, Debug)]
pub struct DatasetFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plans: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Frames stored per exploration sequence.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub store_frames: Option<usize>,
    /// Leading frames a trainer should use (recorded, not enforced).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_frames: Option<usize>,
    /// `unexplored` (default) or `explored`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supervision: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_frac: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_frac: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub plans: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub radius: usize,
    pub max_steps: usize,
    pub store_frames: usize,
    pub train_frames: usize,
    pub supervision: String,
    pub train_frac: f64,
    pub val_frac: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let d = ExploreConfig::default();
        DatasetSection {
            plans: "plans".into(),
            out: "dataset".into(),
            seed: 0,
            radius: d.radius,
            max_steps: d.max_steps,
            store_frames: DEFAULT_STORE_FRAMES,
            train_frames: DEFAULT_TRAIN_FRAMES,
            supervision: "unexplored".into(),
            train_frac: 0.8,
            val_frac: 0.1,
        }
    }
}

impl Section for DatasetSection {
    const NAME: &'static str = "dataset";
}

fn parse_supervision(s: &str) -> CliResult<Supervision> {
    match s {
        "unexplored" => Ok(Supervision::Unexplored),
        "explored" => Ok(Supervision::Explored),
        other => Err(CliError::config(format!(
            "supervision must be `unexplored` or `explored`, got `{other}`"
        ))),
    }
}

pub fn run(cfg: &DatasetSection) -> CliResult<()> {
    let cfg = &DatasetSection {
        train_frames: cfg.train_frames.min(cfg.store_frames),
        ..cfg.clone()
    };
    let supervision = parse_supervision(&cfg.supervision)?;
    if !(0.0..=1.0).contains(&cfg.train_frac) || !(0.0..=1.0).contains(&cfg.val_frac) || cfg.train_frac + cfg.val_frac > 1.0 {
        return Err(CliError::config("train_frac and val_frac must be in [0, 1] and sum to at most 1"));
    }
    let plans = load_plans(&cfg.plans)?;
    ensure_dir(&cfg.out)?;
    let ecfg = ExploreConfig {
        radius: cfg.radius,
        max_steps: cfg.max_steps,
        keep_first: cfg.store_frames,
    };
    let per_plan = plans
        .par_iter()
        .map(|(id, plan)| {
            let start = random_start(plan, derive_seed(cfg.seed, *id as u64, 0))
                .ok_or_else(|| CliError::config(format!("plan {id} has no free cell")))?;
            let frames = run_exploration(plan, start, &ecfg)?;
            Ok::<_, CliError>(samples_for_frames(*id, &frames, plan, supervision)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<_> = per_plan.into_iter().flatten().collect();
    write_dataset(&samples, &cfg.out.join(DATASET_FILE))?;

    let ids: Vec<u32> = plans.iter().map(|(id, _)| *id).collect();
    let split = Split::by_plan(&ids, cfg.seed, cfg.train_frac, cfg.val_frac);
    fs::write(cfg.out.join(SPLIT_FILE), split.to_manifest())?;

    let census_ids: &[u32] = if split.train.is_empty() { &ids } else { &split.train };
    let mut census = [0u64; NUM_CLASSES];
    for (id, plan) in &plans {
        if census_ids.contains(id) {
            for (slot, n) in census.iter_mut().zip(plan.labels.census()) {
                *slot += n;
            }
        }
    }
    let weights = compute_class_weights(&census)?;
    let mut text = String::new();
    for class in ClassId::all() {
        let _ = writeln!(text, "{}={}", class.name(), weights.w[class.index()]);
    }
    fs::write(cfg.out.join(WEIGHTS_FILE), text)?;

    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    println!(
        "wrote {} samples from {} plans to {}",
        samples.len(),
        plans.len(),
        cfg.out.join(DATASET_FILE).display()
    );
    Ok(())
}
