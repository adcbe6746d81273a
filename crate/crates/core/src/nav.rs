//! Closed-loop target-area navigation with optional predictor guidance.
//!
//! Both arms share sensing, step length and planning. The only difference is
//! the frontier utility numerator: the probability mass of the query heatmap
//! over unexplored cells near each frontier. With no predictor the mass is
//! zero and selection reduces to nearest-frontier exploration.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::explore::{reachable_frontiers, reachable_free, ExplorationState, ExploreError, DEFAULT_MAX_STEPS, DEFAULT_RADIUS};
use crate::floorgen::Floorplan;
use crate::grid::{BitMask, Cell, ClassId, Pose};
use crate::predict::{Heatmap, PredictError, Predictor};
use crate::search::DistanceField;

#[derive(Debug, Error)]
pub enum NavError {
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("invalid nav config: {0}")]
    Config(String),
    #[error("cannot aggregate an empty episode list")]
    NoEpisodes,
    #[error("malformed episode record: {0}")]
    Parse(String),
    #[error("plan has no free cell to start from")]
    NoStart,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavConfig {
    pub query: ClassId,
    /// Steps between predictor calls.
    pub repredict_every: usize,
    /// Side of the square window summed around each frontier (odd).
    pub window: usize,
    /// Distance discount in `mass / (1 + alpha * dist)`.
    pub alpha: f64,
    pub max_steps: usize,
    pub radius: usize,
    /// Walk straight to the query class once a cell of it has been observed.
    /// Off by default: with it on, the unguided arm no longer follows the
    /// explorer's trajectory.
    pub approach_observed_target: bool,
    /// Recorded in the log for replay.
    pub seed: u64,
}

impl Default for NavConfig {
    fn default() -> Self {
        NavConfig {
            query: ClassId::BEDROOM,
            repredict_every: 5,
            window: 7,
            alpha: 0.1,
            max_steps: DEFAULT_MAX_STEPS,
            radius: DEFAULT_RADIUS,
            approach_observed_target: false,
            seed: 0,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<(), NavError> {
        if self.window.is_multiple_of(2) {
            return Err(NavError::Config(format!("window must be odd, got {}", self.window)));
        }
        if self.max_steps == 0 {
            return Err(NavError::Config("max_steps must be at least 1".into()));
        }
        if self.repredict_every == 0 {
            return Err(NavError::Config("repredict_every must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(NavError::Config("alpha must be non-negative".into()));
        }
        if !self.query.is_query() {
            return Err(NavError::Config(format!("{} is not a room class", self.query)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierChoice {
    pub step: usize,
    pub cell: Cell,
    pub utility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub plan_id: u32,
    pub seed: u64,
    pub query: ClassId,
    pub start: Pose,
    pub success: bool,
    /// The query class is absent from the plan or unreachable from the start.
    pub vacuous: bool,
    pub steps: usize,
    pub exploration_ratio: f64,
    pub spl: f64,
    pub optimal_len: Option<u32>,
    pub poses: Vec<Pose>,
    pub frontier_choices: Vec<FrontierChoice>,
}

/// BFS length through ground-truth free space from `from` to the nearest
/// cell of `targets`.
pub fn shortest_path_len(plan: &Floorplan, from: Pose, targets: &BitMask) -> Option<u32> {
    let field = DistanceField::from(plan.height(), plan.width(), from, |c| plan.is_free(c));
    targets.iter_set().filter_map(|c| field.get(c)).min()
}

/// `U(f) = mass(f) / (1 + alpha * dist(f))`, where `mass(f)` sums the heatmap
/// over unexplored cells in the `window x window` box centred on `f`.
pub fn score_frontiers(
    frontiers: &[Cell],
    area_prob: Option<&Heatmap>,
    explored: &BitMask,
    dists: &[u32],
    cfg: &NavConfig,
) -> Vec<f64> {
    let (h, w) = (explored.height(), explored.width());
    let half = cfg.window / 2;
    frontiers
        .iter()
        .zip(dists)
        .map(|(f, d)| {
            let Some(heat) = area_prob else { return 0.0 };
            let mut mass = 0.0f64;
            for row in f.row.saturating_sub(half)..=(f.row + half).min(h - 1) {
                for col in f.col.saturating_sub(half)..=(f.col + half).min(w - 1) {
                    let c = Cell::new(row, col);
                    if !explored.get(c) {
                        mass += heat.get(c) as f64;
                    }
                }
            }
            mass / (1.0 + cfg.alpha * *d as f64)
        })
        .collect()
}

/// Highest utility; ties go to the nearer frontier, then the smaller (row, col).
pub fn select_frontier(frontiers: &[Cell], dists: &[u32], utilities: &[f64]) -> Option<usize> {
    (0..frontiers.len()).min_by(|&a, &b| {
        utilities[b]
            .total_cmp(&utilities[a])
            .then(dists[a].cmp(&dists[b]))
            .then(frontiers[a].cmp(&frontiers[b]))
    })
}

pub fn run_navigation_episode(
    plan: &Floorplan,
    start: Pose,
    cfg: &NavConfig,
    mut predictor: Option<&mut dyn Predictor>,
) -> Result<EpisodeLog, NavError> {
    cfg.validate()?;
    let q = cfg.query;
    let target_mask = plan.labels.mask_of(q);
    let optimal_len = shortest_path_len(plan, start, &target_mask);
    let vacuous = optimal_len.is_none();

    let mut state = ExplorationState::new(plan, start, cfg.radius)?;
    let mut poses = vec![start];
    let mut choices = Vec::new();
    let mut heat: Option<(usize, Heatmap)> = None;
    let mut success = false;

    loop {
        if plan.labels.get(state.pose) == q {
            success = true;
            break;
        }
        if state.step >= cfg.max_steps {
            break;
        }
        let field = state.explored_distances();

        if cfg.approach_observed_target {
            let seen = state
                .observed_class(q)
                .filter_map(|c| field.get(c).map(|d| (d, c)))
                .min();
            if let Some((_, target)) = seen {
                let next = field.first_step(target).expect("reachable");
                state.advance(next, cfg.radius);
                poses.push(state.pose);
                continue;
            }
        }

        let candidates = reachable_frontiers(&state, &field);
        if candidates.is_empty() {
            if !state.frontiers().is_empty() && !state.has_explored_free_neighbor() {
                return Err(ExploreError::PoseIsolated(state.pose).into());
            }
            break;
        }
        if let Some(p) = predictor.as_deref_mut() {
            let stale = heat
                .as_ref()
                .is_none_or(|(at, _)| state.step - at >= cfg.repredict_every);
            if stale {
                heat = Some((state.step, p.predict(&state.frame(), q)?.area_prob));
            }
        }
        let (cells, dists): (Vec<Cell>, Vec<u32>) = candidates.into_iter().unzip();
        let utilities = score_frontiers(&cells, heat.as_ref().map(|(_, h)| h), &state.explored, &dists, cfg);
        let best = select_frontier(&cells, &dists, &utilities).expect("non-empty");
        choices.push(FrontierChoice {
            step: state.step,
            cell: cells[best],
            utility: utilities[best],
        });
        let next = field.first_step(cells[best]).expect("reachable");
        state.advance(next, cfg.radius);
        poses.push(state.pose);
    }

    let reachable = reachable_free(plan, start);
    let seen = reachable.and(&state.explored).expect("same shape").count();
    let exploration_ratio = seen as f64 / reachable.count() as f64;
    let steps = state.step;
    let spl = match (success, optimal_len) {
        (true, Some(0)) => 1.0,
        (true, Some(l_opt)) => l_opt as f64 / (steps as f64).max(l_opt as f64),
        _ => 0.0,
    };
    Ok(EpisodeLog {
        plan_id: 0,
        seed: cfg.seed,
        query: q,
        start,
        success,
        vacuous,
        steps,
        exploration_ratio,
        spl,
        optimal_len,
        poses,
        frontier_choices: choices,
    })
}

/// Draws a query among the room classes present in the plan and a free start
/// cell of a different class.
pub fn sample_episode(plan: &Floorplan, seed: u64) -> Result<(Pose, ClassId), NavError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present: Vec<ClassId> = ClassId::all().filter(|c| c.is_room() && plan.has_class(*c)).collect();
    present.dedup();
    let query = *present.choose(&mut rng).ok_or(NavError::NoStart)?;
    let starts: Vec<Cell> = plan.free_cells().filter(|c| plan.labels.get(*c) != query).collect();
    let start = *starts.choose(&mut rng).ok_or(NavError::NoStart)?;
    Ok((start, query))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NavSummary {
    pub episodes: usize,
    pub mean_steps: f64,
    pub mean_exploration_ratio: f64,
    pub mean_spl: f64,
    pub success_rate: f64,
}

/// Arithmetic means; SPL is averaged over every episode, failures included.
pub fn aggregate(logs: &[EpisodeLog]) -> Result<NavSummary, NavError> {
    if logs.is_empty() {
        return Err(NavError::NoEpisodes);
    }
    let n = logs.len() as f64;
    let mean = |f: &dyn Fn(&EpisodeLog) -> f64| logs.iter().map(f).sum::<f64>() / n;
    Ok(NavSummary {
        episodes: logs.len(),
        mean_steps: mean(&|l| l.steps as f64),
        mean_exploration_ratio: mean(&|l| l.exploration_ratio),
        mean_spl: mean(&|l| l.spl),
        success_rate: mean(&|l| l.success as u8 as f64),
    })
}

impl NavSummary {
    pub fn row_header() -> &'static str {
        "arm\tepisodes\tmean_steps\tmean_exploration_ratio\tmean_spl\tsuccess_rate"
    }

    pub fn to_row(&self, arm: &str) -> String {
        format!(
            "{arm}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            self.episodes, self.mean_steps, self.mean_exploration_ratio, self.mean_spl, self.success_rate
        )
    }
}

/// Baseline vs guided runs on identical (plan, start, query) triples.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedReport {
    pub baseline: NavSummary,
    pub guided: NavSummary,
    /// Guided steps minus baseline steps, per pair.
    pub step_deltas: Vec<i64>,
    /// `(baseline mean steps - guided mean steps) / baseline mean steps`.
    pub mean_relative_reduction: f64,
}

pub fn paired_report(baseline: &[EpisodeLog], guided: &[EpisodeLog]) -> Result<PairedReport, NavError> {
    if baseline.len() != guided.len() {
        return Err(NavError::Config(format!(
            "{} baseline episodes vs {} guided",
            baseline.len(),
            guided.len()
        )));
    }
    let b = aggregate(baseline)?;
    let g = aggregate(guided)?;
    let step_deltas = baseline
        .iter()
        .zip(guided)
        .map(|(x, y)| y.steps as i64 - x.steps as i64)
        .collect();
    let mean_relative_reduction = if b.mean_steps > 0.0 {
        (b.mean_steps - g.mean_steps) / b.mean_steps
    } else {
        0.0
    };
    Ok(PairedReport {
        baseline: b,
        guided: g,
        step_deltas,
        mean_relative_reduction,
    })
}

impl EpisodeLog {
    pub const FIELDS: [&'static str; 14] = [
        "arm",
        "plan_id",
        "seed",
        "query",
        "start",
        "success",
        "vacuous",
        "steps",
        "exploration_ratio",
        "spl",
        "optimal_len",
        "poses",
        "frontier_choices",
        "end",
    ];

    /// One tab-separated line in [`EpisodeLog::FIELDS`] order.
    pub fn to_line(&self, arm: &str) -> String {
        let mut poses = String::new();
        for (i, p) in self.poses.iter().enumerate() {
            let sep = if i == 0 { "" } else { ";" };
            let _ = write!(poses, "{sep}{},{}", p.row, p.col);
        }
        let mut choices = String::new();
        for (i, c) in self.frontier_choices.iter().enumerate() {
            let sep = if i == 0 { "" } else { ";" };
            let _ = write!(choices, "{sep}{}:{},{}:{}", c.step, c.cell.row, c.cell.col, c.utility);
        }
        let optimal = self.optimal_len.map_or("-".to_string(), |l| l.to_string());
        [
            arm.to_string(),
            self.plan_id.to_string(),
            self.seed.to_string(),
            self.query.name().to_string(),
            format!("{},{}", self.start.row, self.start.col),
            (self.success as u8).to_string(),
            (self.vacuous as u8).to_string(),
            self.steps.to_string(),
            format!("{}", self.exploration_ratio),
            format!("{}", self.spl),
            optimal,
            poses,
            choices,
            "end".to_string(),
        ]
        .join("\t")
    }

    /// Parses a line written by [`EpisodeLog::to_line`]; returns the arm too.
    pub fn from_line(line: &str) -> Result<(String, EpisodeLog), NavError> {
        let bad = |what: &str| NavError::Parse(format!("{what} in `{line}`"));
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != Self::FIELDS.len() || f[13] != "end" {
            return Err(bad("wrong field count"));
        }
        let cell = |s: &str| -> Result<Cell, NavError> {
            let (r, c) = s.split_once(',').ok_or_else(|| bad("bad cell"))?;
            Ok(Cell::new(
                r.parse().map_err(|_| bad("bad row"))?,
                c.parse().map_err(|_| bad("bad col"))?,
            ))
        };
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad("bad flag")),
        };
        let poses = f[11]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(cell)
            .collect::<Result<Vec<_>, _>>()?;
        let frontier_choices = f[12]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| {
                let mut parts = s.splitn(3, ':');
                let step = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad step"))?;
                let at = cell(parts.next().ok_or_else(|| bad("bad choice"))?)?;
                let utility = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad utility"))?;
                Ok(FrontierChoice { step, cell: at, utility })
            })
            .collect::<Result<Vec<_>, NavError>>()?;
        let log = EpisodeLog {
            plan_id: f[1].parse().map_err(|_| bad("bad plan id"))?,
            seed: f[2].parse().map_err(|_| bad("bad seed"))?,
            query: ClassId::from_name(f[3]).ok_or_else(|| bad("bad query"))?,
            start: cell(f[4])?,
            success: flag(f[5])?,
            vacuous: flag(f[6])?,
            steps: f[7].parse().map_err(|_| bad("bad steps"))?,
            exploration_ratio: f[8].parse().map_err(|_| bad("bad ratio"))?,
            spl: f[9].parse().map_err(|_| bad("bad spl"))?,
            optimal_len: match f[10] {
                "-" => None,
                v => Some(v.parse().map_err(|_| bad("bad optimal length"))?),
            },
            poses,
            frontier_choices,
        };
        Ok((f[0].to_string(), log))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorgen::tiny_two_room_plan;
    use crate::grid::LabelGrid;
    use crate::predict::Oracle;

    #[test]
    fn path_length_cases() {
        let plan = tiny_two_room_plan();
        let bedroom = plan.labels.mask_of(ClassId::BEDROOM);
        assert_eq!(shortest_path_len(&plan, Cell::new(2, 2), &bedroom), Some(0));
        // Living room (3,5) -> doorway (3,4) -> bedroom (3,3).
        assert_eq!(shortest_path_len(&plan, Cell::new(3, 5), &bedroom), Some(2));
        assert_eq!(shortest_path_len(&plan, Cell::new(4, 5), &bedroom), Some(3));

        let corridor = Floorplan {
            labels: LabelGrid::from_rows(&["000000"]).unwrap(),
            rooms: vec![],
            doors: vec![],
            entrance: Cell::new(0, 0),
        };
        let end = BitMask::from_cells(1, 6, [Cell::new(0, 5)]);
        assert_eq!(shortest_path_len(&corridor, Cell::new(0, 0), &end), Some(5));
    }

    #[test]
    fn zero_mass_reduces_to_nearest() {
        let frontiers = [Cell::new(1, 1), Cell::new(0, 5), Cell::new(4, 4)];
        let dists = [3, 1, 1];
        let explored = BitMask::new(6, 6);
        let u = score_frontiers(&frontiers, None, &explored, &dists, &NavConfig::default());
        assert!(u.iter().all(|v| *v == 0.0));
        assert_eq!(select_frontier(&frontiers, &dists, &u), Some(1));
        let zero = Heatmap::zeros(6, 6);
        let u = score_frontiers(&frontiers, Some(&zero), &explored, &dists, &NavConfig::default());
        assert_eq!(select_frontier(&frontiers, &dists, &u), Some(1));
    }

    #[test]
    fn mass_inside_one_window_dominates() {
        let frontiers = [Cell::new(2, 2), Cell::new(12, 12)];
        let dists = [1, 40];
        let explored = BitMask::new(15, 15);
        let mut heat = Heatmap::zeros(15, 15);
        heat.values[13 * 15 + 13] = 0.01;
        for alpha in [0.0, 0.1, 10.0] {
            let cfg = NavConfig {
                alpha,
                ..NavConfig::default()
            };
            let u = score_frontiers(&frontiers, Some(&heat), &explored, &dists, &cfg);
            assert_eq!(select_frontier(&frontiers, &dists, &u), Some(1));
        }
    }

    #[test]
    fn equal_utilities_tie_break() {
        // Mass 1.0 at distance 10 and 0.5 at distance 0 with alpha 0.1 both
        // score exactly 0.5.
        let frontiers = [Cell::new(0, 0), Cell::new(0, 20)];
        let dists = [10, 0];
        let explored = BitMask::from_fn(1, 21, |c| c.col != 1 && c.col != 19);
        let mut heat = Heatmap::zeros(1, 21);
        heat.values[1] = 1.0;
        heat.values[19] = 0.5;
        let u = score_frontiers(&frontiers, Some(&heat), &explored, &dists, &NavConfig::default());
        assert_eq!(u, vec![0.5, 0.5]);
        assert_eq!(select_frontier(&frontiers, &dists, &u), Some(1));
    }

    #[test]
    fn start_in_target_is_immediate_success() {
        let plan = tiny_two_room_plan();
        let cfg = NavConfig::default();
        let log = run_navigation_episode(&plan, Cell::new(3, 2), &cfg, None).unwrap();
        assert!(log.success);
        assert_eq!((log.steps, log.spl), (0, 1.0));
    }

    #[test]
    fn absent_target_fails_vacuously() {
        let plan = tiny_two_room_plan();
        let cfg = NavConfig {
            query: ClassId::KITCHEN,
            ..NavConfig::default()
        };
        let log = run_navigation_episode(&plan, Cell::new(3, 5), &cfg, None).unwrap();
        assert!(!log.success && log.vacuous);
        assert_eq!(log.spl, 0.0);
        assert_eq!(log.exploration_ratio, 1.0);
    }

    #[test]
    fn oracle_walks_the_shortest_path() {
        let plan = tiny_two_room_plan();
        let cfg = NavConfig::default();
        let mut oracle = Oracle::new(plan.labels.clone());
        let log = run_navigation_episode(&plan, Cell::new(3, 5), &cfg, Some(&mut oracle)).unwrap();
        assert!(log.success);
        assert_eq!(log.steps as u32, log.optimal_len.unwrap());
        assert_eq!(log.steps, 2);
        assert_eq!(log.spl, 1.0);
    }

    #[test]
    fn aggregate_cases() {
        let plan = tiny_two_room_plan();
        let log = run_navigation_episode(&plan, Cell::new(3, 5), &NavConfig::default(), None).unwrap();
        let one = aggregate(std::slice::from_ref(&log)).unwrap();
        assert_eq!(one.mean_steps, log.steps as f64);
        assert_eq!(one.mean_spl, log.spl);
        let mut failed = log.clone();
        failed.spl = 0.0;
        failed.success = false;
        let mut ok = log;
        ok.spl = 1.0;
        assert_eq!(aggregate(&[ok, failed]).unwrap().mean_spl, 0.5);
        assert!(matches!(aggregate(&[]), Err(NavError::NoEpisodes)));
    }

    #[test]
    fn log_line_round_trip() {
        let plan = tiny_two_room_plan();
        let mut log = run_navigation_episode(&plan, Cell::new(5, 5), &NavConfig::default(), None).unwrap();
        log.plan_id = 12;
        log.frontier_choices.push(FrontierChoice {
            step: 9,
            cell: Cell::new(1, 2),
            utility: 0.1 + 0.2,
        });
        let (arm, back) = EpisodeLog::from_line(&log.to_line("baseline")).unwrap();
        assert_eq!(arm, "baseline");
        assert_eq!(back, log);
    }

    #[test]
    fn even_window_rejected() {
        let cfg = NavConfig {
            window: 6,
            ..NavConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(NavError::Config(_))));
    }
}
