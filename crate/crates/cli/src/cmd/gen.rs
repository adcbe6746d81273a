use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use foresight_core::floorgen::ClassQuota;
use foresight_core::{generate_floorplan, ClassId, FloorplanSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::{ensure_dir, save_plan};

#[derive(Args, Serialize, Default, Debug)]
pub struct GenFlags {
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Number of plans; plan i uses seed + i.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_rooms: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rooms: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_room_side: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GenSection {
    pub out: PathBuf,
    pub count: u32,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub min_rooms: u32,
    pub max_rooms: u32,
    pub min_room_side: usize,
    /// Room-class name -> [min, max]; unlisted classes keep their defaults.
    pub quota: BTreeMap<String, [u32; 2]>,
}

impl Default for GenSection {
    fn default() -> Self {
        let spec = FloorplanSpec::default();
        GenSection {
            out: "plans".into(),
            count: 10,
            seed: 0,
            height: spec.height,
            width: spec.width,
            min_rooms: spec.room_count_range.0,
            max_rooms: spec.room_count_range.1,
            min_room_side: spec.min_room_side,
            quota: BTreeMap::new(),
        }
    }
}

impl Section for GenSection {
    const NAME: &'static str = "gen";
}

impl GenSection {
    pub fn spec(&self, seed: u64) -> CliResult<FloorplanSpec> {
        let mut quota = ClassQuota::default();
        for (name, [lo, hi]) in &self.quota {
            let class = ClassId::from_name(name)
                .filter(|c| c.is_room())
                .ok_or_else(|| CliError::config(format!("quota: `{name}` is not a room class")))?;
            quota.bounds[class.index()] = (*lo, *hi);
        }
        let spec = FloorplanSpec {
            height: self.height,
            width: self.width,
            seed,
            room_count_range: (self.min_rooms, self.max_rooms),
            min_room_side: self.min_room_side,
            class_quota: quota,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn run(cfg: &GenSection) -> CliResult<()> {
    cfg.spec(cfg.seed)?;
    ensure_dir(&cfg.out)?;
    let plans = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let plan = generate_floorplan(&cfg.spec(seed)?).map_err(|e| CliError::from(e).context(format!("seed {seed}")))?;
            Ok::<_, CliError>((i, seed, plan))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, seed, plan) in &plans {
        save_plan(&cfg.out, *i, plan, *seed)?;
    }
    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    println!("wrote {} plans to {}", plans.len(), cfg.out.display());
    Ok(())
}

