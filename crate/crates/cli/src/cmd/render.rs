use std::path::{Path, PathBuf};

use clap::Args;
use foresight_core::dataset::Dataset;
use foresight_core::predict::Heatmap;
use foresight_core::raster;
use foresight_core::render::{render_heatmap, render_labels, Image};
use foresight_core::BitMask;
use serde::{Deserialize, Serialize};

use crate::config::{write_manifest, Section};
use crate::error::{CliError, CliResult};

/// Colour of cells the agent has not observed in the `semantics` layer.
pub const UNKNOWN_RGB: [u8; 3] = [128, 128, 128];

pub const SSDS_LAYERS: [&str; 9] = [
    "gt",
    "semantics",
    "position",
    "trajectory",
    "obstacles",
    "explored",
    "target",
    "loss_weight",
    "heat",
];

#[derive(Args, Serialize, Default, Debug)]
pub struct RenderFlags {
    /// A .semgrid raster or an .ssds dataset.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Record index for .ssds input.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<usize>,
    /// Layer to draw; .semgrid input only has `labels`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer: Option<String>,
    /// Output .ppm path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RenderSection {
    pub input: PathBuf,
    pub record: usize,
    pub layer: String,
    pub out: PathBuf,
}

impl Default for RenderSection {
    fn default() -> Self {
        RenderSection {
            input: "plans/plan_0000.semgrid".into(),
            record: 0,
            layer: "labels".into(),
            out: "render.ppm".into(),
        }
    }
}

impl Section for RenderSection {
    const NAME: &'static str = "render";
    const HAS_SEED: bool = false;
}

fn mask_image(mask: &BitMask) -> Image {
    render_heatmap(&Heatmap {
        height: mask.height(),
        width: mask.width(),
        values: mask.bits().iter().map(|b| *b as u8 as f32).collect(),
    })
}

fn unknown_layer(layer: &str, known: &[&str]) -> CliError {
    CliError::config(format!("unknown layer `{layer}` (expected one of {})", known.join(", ")))
}

pub fn render_input(cfg: &RenderSection) -> CliResult<Image> {
    let is_ssds = cfg.input.extension().and_then(|e| e.to_str()) == Some("ssds");
    if !is_ssds {
        if cfg.layer != "labels" && cfg.layer != "gt" {
            return Err(unknown_layer(&cfg.layer, &["labels"]));
        }
        let labels = raster::load(&cfg.input).map_err(|e| CliError::from(e).context(cfg.input.display()))?;
        return Ok(render_labels(&labels));
    }
    let data = Dataset::open(&cfg.input).map_err(|e| CliError::from(e).context(cfg.input.display()))?;
    if cfg.record >= data.len() {
        return Err(CliError::config(format!(
            "record {} out of range ({} records)",
            cfg.record,
            data.len()
        )));
    }
    let s = data.record(cfg.record)?;
    let f = &s.frame;
    Ok(match cfg.layer.as_str() {
        "gt" => render_labels(&s.gt),
        "semantics" => {
            let mut img = render_labels(&f.local_semantics.argmax());
            for cell in f.explored.not().iter_set() {
                let i = 3 * (cell.row * img.width + cell.col);
                img.rgb[i..i + 3].copy_from_slice(&UNKNOWN_RGB);
            }
            img
        }
        "position" => mask_image(&f.position_mask()),
        "trajectory" => mask_image(&f.trajectory),
        "obstacles" => mask_image(&f.obstacles_seen),
        "explored" => mask_image(&f.explored),
        "target" => mask_image(&s.target_mask),
        "loss_weight" => mask_image(&s.loss_weight_mask),
        "heat" => render_heatmap(&Heatmap {
            height: s.masked_gt.height(),
            width: s.masked_gt.width(),
            values: s.masked_gt.channel(s.query),
        }),
        other => return Err(unknown_layer(other, &SSDS_LAYERS)),
    })
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.toml")
}

pub fn run(cfg: &RenderSection) -> CliResult<()> {
    let img = render_input(cfg)?;
    img.save(&cfg.out).map_err(|e| CliError::from(e).context(cfg.out.display()))?;
    write_manifest(&manifest_path(&cfg.out), cfg)?;
    println!("wrote {}x{} image to {}", img.width, img.height, cfg.out.display());
    Ok(())
}

