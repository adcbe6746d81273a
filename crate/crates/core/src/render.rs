//! Binary PPM (P6) previews of label grids and heatmaps.

use std::io::Write;
use std::path::Path;

use crate::grid::{Cell, LabelGrid, NUM_CLASSES};
use crate::predict::Heatmap;

/// RGB per class id.
pub const PALETTE: [[u8; 3]; NUM_CLASSES] = [
    [228, 119, 119], // bedroom
    [246, 203, 105], // living_room
    [130, 196, 108], // kitchen
    [109, 175, 222], // bathroom
    [176, 140, 214], // balcony
    [170, 150, 120], // storage
    [255, 255, 255], // doorway
    [40, 40, 40],    // wall
    [255, 0, 255],   // entrance_door
    [0, 0, 0],       // outside
];

pub struct Image {
    pub height: usize,
    pub width: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn encode_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&self.encode_ppm())?;
        f.flush()
    }

    pub fn pixel(&self, cell: Cell) -> [u8; 3] {
        let i = 3 * (cell.row * self.width + cell.col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }
}

pub fn render_labels(labels: &LabelGrid) -> Image {
    let rgb = labels
        .labels()
        .iter()
        .flat_map(|c| PALETTE[c.index()])
        .collect();
    Image {
        height: labels.height(),
        width: labels.width(),
        rgb,
    }
}

/// Black -> red -> yellow -> white over [0, 1]; values are clamped.
pub fn heat_color(v: f32) -> [u8; 3] {
    let t = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) } * 3.0;
    let ramp = |x: f32| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    [ramp(t), ramp(t - 1.0), ramp(t - 2.0)]
}

pub fn render_heatmap(heat: &Heatmap) -> Image {
    Image {
        height: heat.height,
        width: heat.width,
        rgb: heat.values.iter().flat_map(|v| heat_color(*v)).collect(),
    }
}
