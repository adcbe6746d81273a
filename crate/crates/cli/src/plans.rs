use std::fs;
use std::path::{Path, PathBuf};

use foresight_core::floorgen::{sidecar, Floorplan};
use foresight_core::raster;

use crate::error::{CliError, CliResult};

pub fn plan_stem(id: u32) -> String {
    format!("plan_{id:04}")
}

pub fn save_plan(dir: &Path, id: u32, plan: &Floorplan, seed: u64) -> CliResult<()> {
    let stem = plan_stem(id);
    raster::save(&plan.labels, &dir.join(format!("{stem}.semgrid")))?;
    fs::write(dir.join(format!("{stem}.meta")), sidecar(plan, seed))?;
    Ok(())
}

/// Every `plan_NNNN.semgrid` in `dir`, ordered by id.
pub fn load_plans(dir: &Path) -> CliResult<Vec<(u32, Floorplan)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::from(e).context(dir.display()))?;
    let mut found: Vec<(u32, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(id) = name
            .strip_prefix("plan_")
            .and_then(|rest| rest.strip_suffix(".semgrid"))
            .and_then(|n| n.parse().ok())
        {
            found.push((id, path));
        }
    }
    if found.is_empty() {
        return Err(CliError::config(format!("no plan_NNNN.semgrid files in {}", dir.display())));
    }
    found.sort();
    found
        .into_iter()
        .map(|(id, path)| {
            let labels = raster::load(&path).map_err(|e| CliError::from(e).context(path.display()))?;
            let plan = Floorplan::from_labels(labels).map_err(|e| CliError::from(e).context(path.display()))?;
            Ok((id, plan))
        })
        .collect()
}

/// Independent stream seed for item `(a, b)` under a run seed.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::from(e).context(dir.display()))
}
