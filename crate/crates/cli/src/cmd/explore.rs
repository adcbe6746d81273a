use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use foresight_core::explore::{random_start, run_exploration, ExploreConfig, ObservationFrame};
use foresight_core::raster::{self, mask_to_labels};
use foresight_core::ClassId;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::{derive_seed, ensure_dir, load_plans, plan_stem};

#[derive(Args, Serialize, Default, Debug)]
pub struct ExploreFlags {
    /// Directory of generated plans.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plans: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Seed for start-pose sampling.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_first: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExploreSection {
    pub plans: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub radius: usize,
    pub max_steps: usize,
    pub keep_first: usize,
}

impl Default for ExploreSection {
    fn default() -> Self {
        let d = ExploreConfig::default();
        ExploreSection {
            plans: "plans".into(),
            out: "frames".into(),
            seed: 0,
            radius: d.radius,
            max_steps: d.max_steps,
            keep_first: d.keep_first,
        }
    }
}

impl Section for ExploreSection {
    const NAME: &'static str = "explore";
}

impl ExploreSection {
    pub fn explore_config(&self) -> ExploreConfig {
        ExploreConfig {
            radius: self.radius,
            max_steps: self.max_steps,
            keep_first: self.keep_first,
        }
    }
}

/// Layer file names in frame-manifest column order.
pub fn layer_names() -> Vec<String> {
    let mut names: Vec<String> = ["position", "trajectory", "obstacles", "explored"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend(ClassId::all().map(|c| format!("sem_{}", c.name())));
    names
}

fn frame_layers(frame: &ObservationFrame) -> Vec<foresight_core::LabelGrid> {
    let mut layers = vec![
        mask_to_labels(&frame.position_mask()),
        mask_to_labels(&frame.trajectory),
        mask_to_labels(&frame.obstacles_seen),
        mask_to_labels(&frame.explored),
    ];
    for class in ClassId::all() {
        let bits = frame.local_semantics.channel(class).iter().map(|v| *v > 0.5).collect();
        let mask = foresight_core::BitMask::from_bits(frame.height(), frame.width(), bits).expect("frame shape");
        layers.push(mask_to_labels(&mask));
    }
    layers
}

pub fn run(cfg: &ExploreSection) -> CliResult<()> {
    let plans = load_plans(&cfg.plans)?;
    ensure_dir(&cfg.out)?;
    let ecfg = cfg.explore_config();
    let runs = plans
        .par_iter()
        .map(|(id, plan)| {
            let start = random_start(plan, derive_seed(cfg.seed, *id as u64, 0))
                .ok_or_else(|| CliError::config(format!("plan {id} has no free cell")))?;
            Ok::<_, CliError>((*id, run_exploration(plan, start, &ecfg)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let names = layer_names();
    let mut total = 0;
    for (id, frames) in &runs {
        let plan_dir = cfg.out.join(plan_stem(*id));
        ensure_dir(&plan_dir)?;
        let mut manifest = format!("step\tpose\t{}\n", names.join("\t"));
        for frame in frames {
            let frame_dir = format!("frame_{:03}", frame.step);
            ensure_dir(&plan_dir.join(&frame_dir))?;
            let _ = write!(manifest, "{}\t{},{}", frame.step, frame.pose.row, frame.pose.col);
            for (name, layer) in names.iter().zip(frame_layers(frame)) {
                let rel = format!("{frame_dir}/{name}.semgrid");
                raster::save(&layer, &plan_dir.join(&rel))?;
                let _ = write!(manifest, "\t{rel}");
            }
            manifest.push('\n');
        }
        fs::write(plan_dir.join("frames.tsv"), manifest)?;
        total += frames.len();
    }
    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    println!("wrote {total} frames for {} plans to {}", runs.len(), cfg.out.display());
    Ok(())
}
