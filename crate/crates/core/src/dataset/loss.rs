//! Reference implementation of the class-weighted, mask-restricted BCE and
//! the two-term objective (global map completion + query heatmap).

use crate::grid::{check_shape, BitMask, NUM_CLASSES};

use super::{DatasetError, TrainingSample};

/// Logits are clamped to this magnitude before the sigmoid.
pub const LOGIT_CLAMP: f64 = 30.0;

pub const MIN_CLASS_WEIGHT: f64 = 0.5;
pub const MAX_CLASS_WEIGHT: f64 = 5.0;

/// Raw network outputs, cell-major with `channels` values per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitGrid {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl LogitGrid {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f64>) -> Result<Self, DatasetError> {
        if values.len() != height * width * channels {
            return Err(DatasetError::ShapeMismatch(format!(
                "{} logits for a {height}x{width}x{channels} grid",
                values.len()
            )));
        }
        Ok(LogitGrid {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        LogitGrid {
            height,
            width,
            channels,
            values: vec![0.0; height * width * channels],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }
}

impl crate::grid::Shaped for LogitGrid {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

/// Per-class loss weights, each clipped to `[0.5, 5.0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassWeights {
    pub w: [f64; NUM_CLASSES],
}

impl Default for ClassWeights {
    fn default() -> Self {
        ClassWeights { w: [1.0; NUM_CLASSES] }
    }
}

/// Median-frequency balancing: `w_c = clip(median / count_c, 0.5, 5.0)`,
/// with the median taken over classes that occur. Absent classes get 5.0.
pub fn compute_class_weights(census: &[u64; NUM_CLASSES]) -> Result<ClassWeights, DatasetError> {
    let mut present: Vec<f64> = census.iter().filter(|n| **n > 0).map(|n| *n as f64).collect();
    if present.is_empty() {
        return Err(DatasetError::EmptyCensus);
    }
    present.sort_by(|a, b| a.total_cmp(b));
    let mid = present.len() / 2;
    let median = if present.len().is_multiple_of(2) {
        (present[mid - 1] + present[mid]) / 2.0
    } else {
        present[mid]
    };
    let mut w = [MAX_CLASS_WEIGHT; NUM_CLASSES];
    for (slot, count) in w.iter_mut().zip(census) {
        if *count > 0 {
            *slot = (median / *count as f64).clamp(MIN_CLASS_WEIGHT, MAX_CLASS_WEIGHT);
        }
    }
    Ok(ClassWeights { w })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub lambda_global: f64,
    pub lambda_area: f64,
    pub weights: ClassWeights,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_global: 1.0,
            lambda_area: 1.0,
            weights: ClassWeights::default(),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.lambda_global >= 0.0 && self.lambda_area >= 0.0) {
            return Err(DatasetError::InvalidLossConfig("lambdas must be non-negative".into()));
        }
        if self.lambda_global == 0.0 && self.lambda_area == 0.0 {
            return Err(DatasetError::InvalidLossConfig("both lambdas are zero".into()));
        }
        Ok(())
    }
}

/// `log(sigmoid(x))` and `log(1 - sigmoid(x))` without cancellation.
#[inline]
fn log_sigmoid_pair(x: f64) -> (f64, f64) {
    let softplus = |z: f64| z.max(0.0) + (-z.abs()).exp().ln_1p();
    (-softplus(-x), -softplus(x))
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_inputs(logits: &LogitGrid, targets_len: usize, weights: &[f64], valid: &BitMask) -> Result<usize, DatasetError> {
    check_shape(logits.height, logits.width, valid)?;
    if targets_len != logits.values.len() || weights.len() != logits.channels {
        return Err(DatasetError::ShapeMismatch(format!(
            "{} logits, {targets_len} targets, {} weights for {} channels",
            logits.values.len(),
            weights.len(),
            logits.channels
        )));
    }
    let n = valid.count();
    if n == 0 {
        return Err(DatasetError::NoValidCells);
    }
    Ok(n)
}

/// `-(1/N) sum_c w_c sum_{valid} [y log s(x) + (1-y) log(1-s(x))]`,
/// N = number of valid cells.
pub fn weighted_bce(logits: &LogitGrid, targets: &[f64], weights: &[f64], valid: &BitMask) -> Result<f64, DatasetError> {
    let n = check_inputs(logits, targets.len(), weights, valid)?;
    let c = logits.channels;
    let mut total = 0.0;
    for (cell, &is_valid) in valid.bits().iter().enumerate() {
        if !is_valid {
            continue;
        }
        for (ch, w) in weights.iter().enumerate().take(c) {
            let i = cell * c + ch;
            let x = logits.values[i].clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
            let y = targets[i];
            let (log_p, log_q) = log_sigmoid_pair(x);
            total += w * (y * log_p + (1.0 - y) * log_q);
        }
    }
    Ok(-total / n as f64)
}

/// Analytic gradient of [`weighted_bce`] with respect to the logits:
/// `(s(x) - y) * w_c / N` on valid cells inside the clamp, zero elsewhere.
pub fn weighted_bce_grad(logits: &LogitGrid, targets: &[f64], weights: &[f64], valid: &BitMask) -> Result<LogitGrid, DatasetError> {
    let n = check_inputs(logits, targets.len(), weights, valid)? as f64;
    let c = logits.channels;
    let mut grad = LogitGrid::zeros(logits.height, logits.width, c);
    for (cell, &is_valid) in valid.bits().iter().enumerate() {
        if !is_valid {
            continue;
        }
        for (ch, w) in weights.iter().enumerate().take(c) {
            let i = cell * c + ch;
            let x = logits.values[i];
            if x.abs() < LOGIT_CLAMP {
                grad.values[i] = (sigmoid(x) - targets[i]) * w / n;
            }
        }
    }
    Ok(grad)
}

fn semantic_targets(target: &crate::grid::SemanticGrid) -> Vec<f64> {
    target.values().iter().map(|v| *v as f64).collect()
}

fn mask_targets(target: &BitMask) -> Vec<f64> {
    target.bits().iter().map(|b| *b as u8 as f64).collect()
}

/// Ten-channel BCE against a semantic target.
pub fn masked_weighted_bce(
    pred_logits: &LogitGrid,
    target: &crate::grid::SemanticGrid,
    weights: &ClassWeights,
    valid: &BitMask,
) -> Result<f64, DatasetError> {
    check_shape(pred_logits.height, pred_logits.width, target)?;
    weighted_bce(pred_logits, &semantic_targets(target), &weights.w, valid)
}

/// Single-channel BCE of a query heatmap against its binary target.
pub fn masked_bce_map(pred_logits: &LogitGrid, target: &BitMask, weight: f64, valid: &BitMask) -> Result<f64, DatasetError> {
    check_shape(pred_logits.height, pred_logits.width, target)?;
    weighted_bce(pred_logits, &mask_targets(target), &[weight], valid)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub global: f64,
    pub area: f64,
}

/// `lambda_global * BCE(global) + lambda_area * BCE(area)`, both restricted
/// to the sample's loss-weight mask. The area term uses the query's weight.
pub fn multitask_loss(
    pred_global: &LogitGrid,
    pred_area: &LogitGrid,
    sample: &TrainingSample,
    cfg: &LossConfig,
) -> Result<LossBreakdown, DatasetError> {
    cfg.validate()?;
    if pred_global.channels != NUM_CLASSES || pred_area.channels != 1 {
        return Err(DatasetError::ShapeMismatch(format!(
            "expected {NUM_CLASSES} global and 1 area channel, got {} and {}",
            pred_global.channels, pred_area.channels
        )));
    }
    let valid = &sample.loss_weight_mask;
    let global = masked_weighted_bce(pred_global, &sample.masked_gt, &cfg.weights, valid)?;
    let area = masked_bce_map(pred_area, &sample.target_mask, cfg.weights.w[sample.query.index()], valid)?;
    Ok(LossBreakdown {
        total: cfg.lambda_global * global + cfg.lambda_area * area,
        global,
        area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{onehot_encode, ClassId, LabelGrid};

    const LN2: f64 = std::f64::consts::LN_2;

    fn single(logit: f64, y: f64) -> f64 {
        let l = LogitGrid::new(1, 1, 1, vec![logit]).unwrap();
        weighted_bce(&l, &[y], &[1.0], &BitMask::full(1, 1)).unwrap()
    }

    #[test]
    fn hand_cases() {
        assert!((single(0.0, 1.0) - LN2).abs() < 1e-12);
        assert!(single(30.0, 1.0) <= 1e-12);
        assert!(single(500.0, 1.0) <= 1e-12);
        let l = LogitGrid::new(1, 2, 1, vec![0.0, 0.0]).unwrap();
        let loss = weighted_bce(&l, &[1.0, 0.0], &[1.0], &BitMask::full(1, 2)).unwrap();
        assert!((loss - LN2).abs() < 1e-12);
    }

    #[test]
    fn empty_valid_mask_is_an_error() {
        let l = LogitGrid::zeros(2, 2, 1);
        let err = weighted_bce(&l, &[0.0; 4], &[1.0], &BitMask::new(2, 2)).unwrap_err();
        assert!(matches!(err, DatasetError::NoValidCells));
    }

    #[test]
    fn class_weight_examples() {
        let w = compute_class_weights(&[7; NUM_CLASSES]).unwrap();
        assert_eq!(w.w, [1.0; NUM_CLASSES]);

        let mut census = [0u64; NUM_CLASSES];
        census[0] = 90;
        census[1] = 10;
        let w = compute_class_weights(&census).unwrap();
        assert!((w.w[0] - 50.0 / 90.0).abs() < 1e-12);
        assert!((w.w[0] - 0.556).abs() < 1e-3);
        assert_eq!(w.w[1], 5.0);
        assert!(w.w[2..].iter().all(|x| *x == 5.0));

        assert!(matches!(compute_class_weights(&[0; NUM_CLASSES]), Err(DatasetError::EmptyCensus)));
    }

    #[test]
    fn lambda_validation() {
        let cfg = LossConfig {
            lambda_global: 0.0,
            lambda_area: 0.0,
            ..LossConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn semantic_bce_matches_scalar_core() {
        let gt = onehot_encode(&LabelGrid::filled(1, 1, ClassId::KITCHEN));
        let logits = LogitGrid::zeros(1, 1, NUM_CLASSES);
        let loss = masked_weighted_bce(&logits, &gt, &ClassWeights::default(), &BitMask::full(1, 1)).unwrap();
        assert!((loss - 10.0 * LN2).abs() < 1e-12);
    }
}
