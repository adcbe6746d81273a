//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use foresight_core::dataset::ssds::{encode_dataset, Dataset};
use foresight_core::dataset::{
    build_sample_with, multitask_loss, weighted_bce, weighted_bce_grad, DatasetError, LogitGrid, LossConfig,
    Supervision,
};
use foresight_core::explore::{explore_full, reachable_free, run_exploration, ExploreConfig};
use foresight_core::metrics::{class_prf_in, evaluate, evaluation_region, EvalConfig, MetricsError};
use foresight_core::nav::{paired_report, run_navigation_episode, sample_episode, NavConfig};
use foresight_core::predict::protocol::{decode_request, ProtocolError};
use foresight_core::predict::{decode_response, encode_response, Constant, Oracle, Predictor};
use foresight_core::raster::{self, RasterError};
use foresight_core::{generate_floorplan, BitMask, Cell, ClassId, FloorplanSpec, LabelGrid, NUM_CLASSES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plan(seed: u64) -> foresight_core::Floorplan {
    generate_floorplan(&FloorplanSpec::with_seed(seed)).expect("generation")
}

fn random_start(plan: &foresight_core::Floorplan, rng: &mut ChaCha8Rng) -> Cell {
    let free: Vec<Cell> = plan.free_cells().collect();
    free[rng.gen_range(0..free.len())]
}

fn loss_math() -> Outcome {
    let one = |logit: f64, y: f64| {
        let l = LogitGrid::new(1, 1, 1, vec![logit]).unwrap();
        weighted_bce(&l, &[y], &[1.0], &BitMask::full(1, 1)).unwrap()
    };
    let ln2 = std::f64::consts::LN_2;
    ensure((one(0.0, 1.0) - ln2).abs() <= 1e-9, || "logit 0 is not ln 2".into())?;
    ensure(one(30.0, 1.0).abs() <= 1e-9, || "saturated logit is not 0".into())?;
    let two = LogitGrid::new(1, 2, 1, vec![0.0, 0.0]).unwrap();
    let pair = weighted_bce(&two, &[1.0, 0.0], &[1.0], &BitMask::full(1, 2)).unwrap();
    ensure((pair - ln2).abs() <= 1e-9, || format!("two-cell case gave {pair}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (h, w, c) = (rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..4));
        let n = h * w * c;
        let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(0..2) as f64).collect();
        let weights: Vec<f64> = (0..c).map(|_| rng.gen_range(0.5..5.0)).collect();
        let mut valid = BitMask::from_fn(h, w, |_| rng.gen_bool(0.7));
        valid.set(Cell::new(0, 0), true);
        let grid = LogitGrid::new(h, w, c, logits.clone()).unwrap();
        let grad = weighted_bce_grad(&grid, &targets, &weights, &valid).unwrap();
        let step = 1e-4;
        for i in 0..n {
            let mut plus = grid.clone();
            plus.values_mut()[i] += step;
            let mut minus = grid.clone();
            minus.values_mut()[i] -= step;
            let fd = (weighted_bce(&plus, &targets, &weights, &valid).unwrap()
                - weighted_bce(&minus, &targets, &weights, &valid).unwrap())
                / (2.0 * step);
            let analytic = grad.values()[i];
            let scale = analytic.abs().max(fd.abs());
            if scale > 1e-12 {
                worst = worst.max((analytic - fd).abs() / scale);
            } else {
                worst = worst.max((analytic - fd).abs());
            }
        }
    }
    ensure(worst <= 1e-6, || format!("worst relative gradient error {worst:.3e}"))?;
    Ok(format!("hand cases within 1e-9; worst gradient rel. error {worst:.2e} over 100 tensors"))
}

fn mask_constraint() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = LossConfig::default();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 100 {
        seed += 1;
        let plan = plan(1000 + seed);
        let start = random_start(&plan, &mut rng);
        let frames = run_exploration(&plan, start, &ExploreConfig::default()).unwrap();
        let frame = &frames[rng.gen_range(0..frames.len())];
        let q = ClassId::query(rng.gen_range(0..7)).unwrap();
        let (h, w) = (plan.height(), plan.width());
        let sample = build_sample_with(frame, &plan.labels, q, Supervision::Unexplored).unwrap();
        let global = LogitGrid::new(h, w, NUM_CLASSES, (0..h * w * NUM_CLASSES).map(|_| rng.gen_range(-4.0..4.0)).collect()).unwrap();
        let area = LogitGrid::new(h, w, 1, (0..h * w).map(|_| rng.gen_range(-4.0..4.0)).collect()).unwrap();
        let base = multitask_loss(&global, &area, &sample, &cfg).map_err(|e| e.to_string())?.total;

        let explored: Vec<Cell> = frame.explored.iter_set().collect();
        let unexplored: Vec<Cell> = frame.explored.not().iter_set().collect();
        for _ in 0..10 {
            let cell = explored[rng.gen_range(0..explored.len())];
            let mut gt = plan.labels.clone();
            gt.set(cell, ClassId::new((gt.get(cell).id() + 1) % 10).unwrap());
            let s = build_sample_with(frame, &gt, q, Supervision::Unexplored).unwrap();
            let l = multitask_loss(&global, &area, &s, &cfg).unwrap().total;
            ensure(l == base, || format!("explored GT perturbation at {cell:?} moved the loss by {}", l - base))?;

            let mut g = global.clone();
            let i = g.index(cell.row, cell.col, rng.gen_range(0..NUM_CLASSES));
            g.values_mut()[i] += 3.0;
            let mut a = area.clone();
            a.values_mut()[cell.row * w + cell.col] -= 3.0;
            let l = multitask_loss(&g, &a, &sample, &cfg).unwrap().total;
            ensure(l == base, || format!("explored prediction perturbation at {cell:?} moved the loss"))?;
        }
        for _ in 0..10 {
            let cell = unexplored[rng.gen_range(0..unexplored.len())];
            let mut g = global.clone();
            let i = g.index(cell.row, cell.col, rng.gen_range(0..NUM_CLASSES));
            g.values_mut()[i] += 0.5;
            let l = multitask_loss(&g, &area, &sample, &cfg).unwrap().total;
            ensure(l != base, || format!("unexplored prediction perturbation at {cell:?} left the loss unchanged"))?;

            let mut gt = plan.labels.clone();
            gt.set(cell, ClassId::new((gt.get(cell).id() + 1) % 10).unwrap());
            let s = build_sample_with(frame, &gt, q, Supervision::Unexplored).unwrap();
            let l = multitask_loss(&global, &area, &s, &cfg).unwrap().total;
            ensure(l != base, || format!("unexplored GT perturbation at {cell:?} left the loss unchanged"))?;
        }
        checked += 1;
    }
    Ok(format!("{checked} samples, 20 explored + 20 unexplored perturbations each"))
}

fn oracle_perfection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut frames_scored, mut skipped, mut plans) = (0, 0, 0);
    for seed in 0..25u64 {
        let plan = plan(2000 + seed);
        plans += 1;
        let start = random_start(&plan, &mut rng);
        let frames = run_exploration(&plan, start, &ExploreConfig::default()).unwrap();
        let mut oracle = Oracle::new(plan.labels.clone());
        for frame in frames.iter().take(10) {
            let q = ClassId::query(rng.gen_range(0..7)).unwrap();
            let pred = oracle.predict(frame, q).map_err(|e| e.to_string())?;
            ensure(pred.area_prob.values == pred.global_probs.channel(q), || "area_prob is not channel q".into())?;
            let labels = pred.argmax();
            for relax in [true, false] {
                let cfg = EvalConfig {
                    relax,
                    ..EvalConfig::default()
                };
                let report = match evaluate(&labels, &plan.labels, &frame.explored, &cfg) {
                    Ok(r) => r,
                    Err(MetricsError::EmptyRegion) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e.to_string()),
                };
                ensure(report.pa == 1.0 && report.fwiou == 1.0 && report.sc == 1.0, || {
                    format!("plan {seed} step {}: {}", frame.step, report.to_key_value())
                })?;
                let region = evaluation_region(&plan.labels, &frame.explored, relax).unwrap();
                for class in ClassId::all() {
                    if !region.iter_set().any(|c| plan.labels.get(c) == class) {
                        continue;
                    }
                    let prf = class_prf_in(&labels, &plan.labels, &region, class).unwrap();
                    ensure(prf.recall == 1.0 && prf.precision == 1.0 && prf.f1 == 1.0, || {
                        format!("plan {seed} step {} class {class}: {prf:?}", frame.step)
                    })?;
                }
                if relax {
                    frames_scored += 1;
                }
            }
        }
    }
    ensure(frames_scored >= 200 && plans >= 20, || format!("only {frames_scored} frames scored"))?;
    Ok(format!("{frames_scored} frames from {plans} plans perfect (relaxed and strict); {skipped} empty regions skipped"))
}

fn exploration_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0;
    for seed in 0..100u64 {
        let plan = plan(3000 + seed);
        let start = random_start(&plan, &mut rng);
        let run = explore_full(&plan, start, 8, 200).map_err(|e| e.to_string())?;
        for pair in run.frames.windows(2) {
            ensure(pair[1].explored.contains_all(&pair[0].explored), || {
                format!("plan {seed}: explored shrank at step {}", pair[1].step)
            })?;
        }
        let reach = reachable_free(&plan, start);
        let last = &run.frames.last().unwrap().explored;
        ensure(run.complete && last.contains_all(&reach), || {
            format!(
                "plan {seed}: covered {}/{} reachable free cells in {} steps",
                last.and(&reach).unwrap().count(),
                reach.count(),
                run.steps
            )
        })?;
        worst = worst.max(run.steps);
    }
    Ok(format!("100 plans fully covered, monotone; worst case {worst} steps"))
}

fn navigation_benefit() -> Outcome {
    let (mut base, mut guided) = (Vec::new(), Vec::new());
    for seed in 0..200u64 {
        let plan = plan(4000 + seed);
        let (start, query) = sample_episode(&plan, seed).map_err(|e| e.to_string())?;
        let cfg = NavConfig {
            query,
            seed,
            ..NavConfig::default()
        };
        base.push(run_navigation_episode(&plan, start, &cfg, None).map_err(|e| e.to_string())?);
        let mut oracle = Oracle::new(plan.labels.clone());
        guided.push(run_navigation_episode(&plan, start, &cfg, Some(&mut oracle)).map_err(|e| e.to_string())?);
    }
    let r = paired_report(&base, &guided).map_err(|e| e.to_string())?;
    let detail = format!(
        "200 triples: steps {:.2} -> {:.2} ({:.1}% fewer), exploration ratio {:.3} -> {:.3}, SPL {:.3} -> {:.3}",
        r.baseline.mean_steps,
        r.guided.mean_steps,
        100.0 * r.mean_relative_reduction,
        r.baseline.mean_exploration_ratio,
        r.guided.mean_exploration_ratio,
        r.baseline.mean_spl,
        r.guided.mean_spl
    );
    let ok = r.mean_relative_reduction >= 0.20
        && r.guided.mean_exploration_ratio < r.baseline.mean_exploration_ratio
        && r.guided.mean_spl > r.baseline.mean_spl;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn baseline_equivalence() -> Outcome {
    let mut successes = 0;
    for seed in 0..50u64 {
        let plan = plan(5000 + seed);
        let (start, query) = sample_episode(&plan, seed).map_err(|e| e.to_string())?;
        let cfg = NavConfig {
            query,
            seed,
            ..NavConfig::default()
        };
        let none = run_navigation_episode(&plan, start, &cfg, None).map_err(|e| e.to_string())?;
        let mut zero = Constant(0.0);
        let zeroed = run_navigation_episode(&plan, start, &cfg, Some(&mut zero)).map_err(|e| e.to_string())?;
        ensure(none == zeroed, || format!("episode {seed}: logs differ"))?;
        let run = explore_full(&plan, start, cfg.radius, none.steps.max(1)).map_err(|e| e.to_string())?;
        let explorer: Vec<Cell> = run.frames.iter().map(|f| f.pose).collect();
        ensure(explorer[..none.poses.len()] == none.poses[..], || {
            format!("episode {seed}: trajectory departs from the explorer")
        })?;
        successes += none.success as usize;
    }
    Ok(format!("50 paired runs identical and on the explorer trajectory ({successes} successes)"))
}

const SEMGRID: &[u8] = include_bytes!("fixtures/tiny.semgrid");
const SSDS: &[u8] = include_bytes!("fixtures/tiny.ssds");
const REQUEST: &[u8] = include_bytes!("fixtures/tiny_request.ssp1");
const RESPONSE: &[u8] = include_bytes!("fixtures/tiny_response.ssp1");

fn flip(bytes: &[u8], at: usize, value: u8) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[at] = value;
    out
}

fn format_stability() -> Outcome {
    let grid: LabelGrid = raster::decode(SEMGRID).map_err(|e| e.to_string())?;
    ensure(raster::encode(&grid) == SEMGRID, || "SEMGRIDv1 re-encode differs".into())?;
    let samples = Dataset::from_bytes(SSDS.to_vec())
        .and_then(|d| d.samples())
        .map_err(|e| e.to_string())?;
    ensure(encode_dataset(&samples) == SSDS, || "SSDS re-encode differs".into())?;
    let req = decode_request(REQUEST).map_err(|e| e.to_string())?;
    let mut rebuilt = REQUEST[..16].to_vec();
    req.layers.iter().for_each(|l| rebuilt.extend_from_slice(l));
    ensure(rebuilt == REQUEST, || "SSP1 request re-encode differs".into())?;
    let resp = decode_response(RESPONSE, ClassId::BEDROOM).map_err(|e| e.to_string())?;
    ensure(encode_response(&resp.global_probs) == RESPONSE, || "SSP1 response re-encode differs".into())?;

    let checks = [
        matches!(raster::decode(&flip(SEMGRID, 0, b'x')), Err(RasterError::BadMagic)),
        matches!(raster::decode(&SEMGRID[..40]), Err(RasterError::Truncated { .. })),
        matches!(raster::decode(&flip(SEMGRID, SEMGRID.len() - 1, 77)), Err(RasterError::LabelOutOfRange { .. })),
        matches!(Dataset::from_bytes(flip(SSDS, 0, b'x')), Err(DatasetError::BadMagic)),
        matches!(Dataset::from_bytes(flip(SSDS, 4, 2)), Err(DatasetError::UnsupportedVersion(2))),
        matches!(
            Dataset::from_bytes(SSDS[..SSDS.len() - 1].to_vec()),
            Err(DatasetError::ChecksumMismatch { record: 13 })
        ),
        matches!(
            Dataset::from_bytes(flip(SSDS, 40, SSDS[40] ^ 1)).and_then(|d| d.record(0)),
            Err(DatasetError::ChecksumMismatch { record: 0 })
        ),
        matches!(decode_request(&flip(REQUEST, 0, b'x')), Err(ProtocolError::BadMagic)),
        matches!(decode_request(&flip(REQUEST, 4, 9)), Err(ProtocolError::VersionMismatch(9))),
        matches!(decode_request(&REQUEST[..100]), Err(ProtocolError::ShapeMismatch(_))),
        matches!(
            decode_response(&[RESPONSE, &[0u8; 256][..]].concat(), ClassId::BEDROOM),
            Err(ProtocolError::ShapeMismatch(_))
        ),
    ];
    let failed: Vec<usize> = (0..checks.len()).filter(|i| !checks[*i]).collect();
    ensure(failed.is_empty(), || format!("corruption cases {failed:?} raised the wrong error"))?;
    Ok(format!("4 fixtures bit-exact; {} corruption cases raise their named errors", checks.len()))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("loss math", loss_math, Duration::from_secs(1)),
        ("mask constraint", mask_constraint, Duration::from_secs(10)),
        ("oracle perfection", oracle_perfection, Duration::from_secs(60)),
        ("exploration soundness", exploration_soundness, Duration::from_secs(120)),
        ("navigation benefit", navigation_benefit, Duration::from_secs(300)),
        ("baseline equivalence", baseline_equivalence, Duration::from_secs(300)),
        ("format stability", format_stability, Duration::from_secs(10)),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let t = Instant::now();
        let outcome = check();
        let elapsed = t.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            Err(d) => (false, d),
        };
        failures += !ok as usize;
        println!("{} {name}: {detail} [{elapsed:.2?}]", if ok { "PASS" } else { "FAIL" });
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
