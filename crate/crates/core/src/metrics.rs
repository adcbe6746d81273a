//! Unexplored-region evaluation: pixel accuracy, frequency-weighted IoU,
//! per-class precision/recall/F1, and structural consistency of the room
//! adjacency graph.
//!
//! The evaluated region is every unexplored cell whose ground truth is not
//! `outside`. With boundary relaxation, cells whose 3x3 neighbourhood holds
//! more than one ground-truth class are dropped as well.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grid::{check_shape, BitMask, ClassId, GridError, LabelGrid, NUM_CLASSES};
use crate::search::components;

pub const DEFAULT_MIN_ROOM_AREA: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no cells left to evaluate")]
    EmptyRegion,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    /// Boundary relaxation for PA and FWIoU.
    pub relax: bool,
    pub min_room_area: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            relax: true,
            min_room_area: DEFAULT_MIN_ROOM_AREA,
        }
    }
}

/// Cells whose Chebyshev neighbourhood contains a different ground-truth class.
pub fn boundary_band(gt: &LabelGrid) -> BitMask {
    let (h, w) = (gt.height(), gt.width());
    BitMask::from_fn(h, w, |cell| {
        let class = gt.get(cell);
        cell.neighbors8_inclusive(h, w).any(|n| gt.get(n) != class)
    })
}

/// Unexplored, not outside, and (when `relax`) off the boundary band.
pub fn evaluation_region(gt: &LabelGrid, explored: &BitMask, relax: bool) -> Result<BitMask, MetricsError> {
    gt.same_shape(explored)?;
    let band = relax.then(|| boundary_band(gt));
    Ok(BitMask::from_fn(gt.height(), gt.width(), |c| {
        !explored.get(c) && gt.get(c) != ClassId::OUTSIDE && band.as_ref().is_none_or(|b| !b.get(c))
    }))
}

fn check_pair(pred: &LabelGrid, gt: &LabelGrid, region: &BitMask) -> Result<usize, MetricsError> {
    gt.same_shape(pred)?;
    check_shape(gt.height(), gt.width(), region)?;
    match region.count() {
        0 => Err(MetricsError::EmptyRegion),
        n => Ok(n),
    }
}

/// Fraction of `region` cells where `pred` matches `gt`.
pub fn pixel_accuracy(pred: &LabelGrid, gt: &LabelGrid, region: &BitMask) -> Result<f64, MetricsError> {
    let n = check_pair(pred, gt, region)?;
    let hits = region.iter_set().filter(|c| pred.get(*c) == gt.get(*c)).count();
    Ok(hits as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

pub fn class_confusion(pred: &LabelGrid, gt: &LabelGrid, region: &BitMask) -> [Confusion; NUM_CLASSES] {
    let mut out = [Confusion::default(); NUM_CLASSES];
    for c in region.iter_set() {
        let (p, g) = (pred.get(c), gt.get(c));
        if p == g {
            out[g.index()].tp += 1;
        } else {
            out[p.index()].fp += 1;
            out[g.index()].fn_ += 1;
        }
    }
    out
}

/// `sum_c freq_c * IoU_c` with `freq_c` the ground-truth share of class `c`
/// inside `region`.
pub fn frequency_weighted_iou(pred: &LabelGrid, gt: &LabelGrid, region: &BitMask) -> Result<f64, MetricsError> {
    let n = check_pair(pred, gt, region)? as f64;
    let conf = class_confusion(pred, gt, region);
    let weighted: f64 = conf
        .iter()
        .filter(|k| k.tp + k.fn_ > 0)
        .map(|k| (k.tp + k.fn_) as f64 * k.tp as f64 / (k.tp + k.fp + k.fn_) as f64)
        .sum();
    Ok(weighted / n)
}

pub fn pa_unexplored(pred: &LabelGrid, gt: &LabelGrid, explored: &BitMask, relax: bool) -> Result<f64, MetricsError> {
    pixel_accuracy(pred, gt, &evaluation_region(gt, explored, relax)?)
}

pub fn fwiou_unexplored(pred: &LabelGrid, gt: &LabelGrid, explored: &BitMask, relax: bool) -> Result<f64, MetricsError> {
    frequency_weighted_iou(pred, gt, &evaluation_region(gt, explored, relax)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl Prf {
    pub const PERFECT: Prf = Prf {
        recall: 1.0,
        precision: 1.0,
        f1: 1.0,
    };

    /// Binary scores from confusion counts. A class absent from both sides
    /// scores 1 everywhere; no true positives with any error gives F1 = 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Prf {
        if tp + fp + fn_ == 0 {
            return Prf::PERFECT;
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let recall = ratio(tp, tp + fn_);
        let precision = ratio(tp, tp + fp);
        let f1 = if tp == 0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { recall, precision, f1 }
    }
}

pub fn class_prf_in(pred: &LabelGrid, gt: &LabelGrid, region: &BitMask, class: ClassId) -> Result<Prf, MetricsError> {
    check_pair(pred, gt, region)?;
    let k = class_confusion(pred, gt, region)[class.index()];
    Ok(Prf::from_counts(k.tp, k.fp, k.fn_))
}

/// Strict (unrelaxed) per-class scores over the unexplored region.
pub fn class_prf(pred: &LabelGrid, gt: &LabelGrid, explored: &BitMask, class: ClassId) -> Result<Prf, MetricsError> {
    class_prf_in(pred, gt, &evaluation_region(gt, explored, false)?, class)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomNode {
    pub class: ClassId,
    pub cells: Vec<crate::grid::Cell>,
}

/// Unordered class pair, smaller id first.
pub type ClassPair = (ClassId, ClassId);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdjacencyGraph {
    pub nodes: Vec<RoomNode>,
    pub edges: BTreeSet<ClassPair>,
}

fn pair(a: ClassId, b: ClassId) -> ClassPair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Rooms are 4-connected components of room classes (doorway excluded) with
/// at least `min_room_area` cells. Two rooms are linked when their cells touch
/// or when a doorway / entrance-door cell touches both. With `restrict`, only
/// rooms with a cell inside the mask are kept.
pub fn room_adjacency_graph(labels: &LabelGrid, restrict: Option<&BitMask>, min_room_area: usize) -> AdjacencyGraph {
    let (h, w) = (labels.height(), labels.width());
    let mut nodes = Vec::new();
    for class in ClassId::all().filter(|c| c.is_room()) {
        for cells in components(h, w, |c| labels.get(c) == class) {
            if cells.len() < min_room_area {
                continue;
            }
            if let Some(mask) = restrict {
                if !cells.iter().any(|c| mask.get(*c)) {
                    continue;
                }
            }
            nodes.push(RoomNode { class, cells });
        }
    }
    let mut node_at = vec![usize::MAX; h * w];
    for (i, node) in nodes.iter().enumerate() {
        for c in &node.cells {
            node_at[c.row * w + c.col] = i;
        }
    }
    let mut linked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for cell in labels.cells() {
        let here = node_at[cell.row * w + cell.col];
        let class = labels.get(cell);
        if here != usize::MAX {
            for n in cell.neighbors4(h, w) {
                let there = node_at[n.row * w + n.col];
                if there != usize::MAX && there != here {
                    linked.insert((here.min(there), here.max(there)));
                }
            }
        } else if class == ClassId::DOORWAY || class == ClassId::ENTRANCE_DOOR {
            let touching: BTreeSet<usize> = cell
                .neighbors4(h, w)
                .map(|n| node_at[n.row * w + n.col])
                .filter(|i| *i != usize::MAX)
                .collect();
            let touching: Vec<usize> = touching.into_iter().collect();
            for (k, a) in touching.iter().enumerate() {
                for b in &touching[k + 1..] {
                    linked.insert((*a, *b));
                }
            }
        }
    }
    let edges = linked
        .into_iter()
        .map(|(a, b)| pair(nodes[a].class, nodes[b].class))
        .collect();
    AdjacencyGraph { nodes, edges }
}

/// F1 between two edge sets; two empty sets agree perfectly.
pub fn edge_set_f1(pred: &BTreeSet<ClassPair>, gt: &BTreeSet<ClassPair>) -> f64 {
    if pred.is_empty() && gt.is_empty() {
        return 1.0;
    }
    let common = pred.intersection(gt).count() as u64;
    let fp = pred.len() as u64 - common;
    let fn_ = gt.len() as u64 - common;
    Prf::from_counts(common, fp, fn_).f1
}

/// Edge-set F1 between the predicted and ground-truth room graphs, each
/// restricted to rooms reaching into the unexplored region.
pub fn structural_consistency_with(
    pred: &LabelGrid,
    gt: &LabelGrid,
    explored: &BitMask,
    min_room_area: usize,
) -> Result<f64, MetricsError> {
    gt.same_shape(pred)?;
    gt.same_shape(explored)?;
    let unexplored = explored.not();
    let p = room_adjacency_graph(pred, Some(&unexplored), min_room_area);
    let g = room_adjacency_graph(gt, Some(&unexplored), min_room_area);
    Ok(edge_set_f1(&p.edges, &g.edges))
}

pub fn structural_consistency(pred: &LabelGrid, gt: &LabelGrid, explored: &BitMask) -> Result<f64, MetricsError> {
    structural_consistency_with(pred, gt, explored, DEFAULT_MIN_ROOM_AREA)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassScore {
    pub class: ClassId,
    pub prf: Prf,
    /// Class occurs in the ground truth or the prediction inside the region.
    pub present: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub pa: f64,
    pub fwiou: f64,
    pub per_class: Vec<ClassScore>,
    pub sc: f64,
    pub evaluated_cells: usize,
}

/// Classes reported per class (outside never enters the region).
pub fn reported_classes() -> impl Iterator<Item = ClassId> {
    ClassId::all().filter(|c| *c != ClassId::OUTSIDE)
}

pub fn evaluate(pred: &LabelGrid, gt: &LabelGrid, explored: &BitMask, cfg: &EvalConfig) -> Result<EvalReport, MetricsError> {
    let region = evaluation_region(gt, explored, cfg.relax)?;
    let strict = evaluation_region(gt, explored, false)?;
    let pa = pixel_accuracy(pred, gt, &region)?;
    let fwiou = frequency_weighted_iou(pred, gt, &region)?;
    let conf = class_confusion(pred, gt, &strict);
    let per_class = reported_classes()
        .map(|class| {
            let k = conf[class.index()];
            ClassScore {
                class,
                prf: Prf::from_counts(k.tp, k.fp, k.fn_),
                present: k.tp + k.fp + k.fn_ > 0,
            }
        })
        .collect();
    let sc = structural_consistency_with(pred, gt, explored, cfg.min_room_area)?;
    Ok(EvalReport {
        pa,
        fwiou,
        per_class,
        sc,
        evaluated_cells: region.count(),
    })
}

impl EvalReport {
    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pa={:.6}", self.pa);
        let _ = writeln!(out, "fwiou={:.6}", self.fwiou);
        let _ = writeln!(out, "sc={:.6}", self.sc);
        let _ = writeln!(out, "evaluated_cells={}", self.evaluated_cells);
        for s in &self.per_class {
            let name = s.class.name();
            let _ = writeln!(out, "recall.{name}={:.6}", s.prf.recall);
            let _ = writeln!(out, "precision.{name}={:.6}", s.prf.precision);
            let _ = writeln!(out, "f1.{name}={:.6}", s.prf.f1);
        }
        out
    }

    pub fn row_header() -> String {
        let mut cols = vec!["plan".to_string(), "step".into(), "pa".into(), "fwiou".into(), "sc".into(), "cells".into()];
        for class in reported_classes() {
            cols.push(format!("f1.{}", class.name()));
        }
        cols.join("\t")
    }

    /// One tab-separated line; absent classes are written as `-`.
    pub fn to_row(&self, plan: u32, step: usize) -> String {
        let mut cols = vec![
            plan.to_string(),
            step.to_string(),
            format!("{:.6}", self.pa),
            format!("{:.6}", self.fwiou),
            format!("{:.6}", self.sc),
            self.evaluated_cells.to_string(),
        ];
        for s in &self.per_class {
            cols.push(if s.present { format!("{:.6}", s.prf.f1) } else { "-".into() });
        }
        cols.join("\t")
    }
}

/// Means over frames. Per-class means only use frames where the class is present.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub frames: usize,
    pub pa: f64,
    pub fwiou: f64,
    pub sc: f64,
    pub per_class: Vec<(ClassId, Option<Prf>)>,
}

impl EvalSummary {
    pub fn from_reports(reports: &[EvalReport]) -> Option<EvalSummary> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let per_class = reported_classes()
            .enumerate()
            .map(|(i, class)| {
                let present: Vec<Prf> = reports
                    .iter()
                    .map(|r| &r.per_class[i])
                    .filter(|s| s.present)
                    .map(|s| s.prf)
                    .collect();
                let m = present.len() as f64;
                let avg = (!present.is_empty()).then(|| Prf {
                    recall: present.iter().map(|p| p.recall).sum::<f64>() / m,
                    precision: present.iter().map(|p| p.precision).sum::<f64>() / m,
                    f1: present.iter().map(|p| p.f1).sum::<f64>() / m,
                });
                (class, avg)
            })
            .collect();
        Some(EvalSummary {
            frames: reports.len(),
            pa: mean(|r| r.pa),
            fwiou: mean(|r| r.fwiou),
            sc: mean(|r| r.sc),
            per_class,
        })
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "frames={}", self.frames);
        let _ = writeln!(out, "pa={:.6}", self.pa);
        let _ = writeln!(out, "fwiou={:.6}", self.fwiou);
        let _ = writeln!(out, "sc={:.6}", self.sc);
        for (class, prf) in &self.per_class {
            if let Some(p) = prf {
                let name = class.name();
                let _ = writeln!(out, "recall.{name}={:.6}", p.recall);
                let _ = writeln!(out, "precision.{name}={:.6}", p.precision);
                let _ = writeln!(out, "f1.{name}={:.6}", p.f1);
            }
        }
        out
    }
}
