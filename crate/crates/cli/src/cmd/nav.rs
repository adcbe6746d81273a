use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use foresight_core::explore::{DEFAULT_MAX_STEPS, DEFAULT_RADIUS};
use foresight_core::nav::{aggregate, paired_report, run_navigation_episode, sample_episode, EpisodeLog, NavConfig, NavSummary};
use foresight_core::NUM_CLASSES;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{write_manifest, Section, MANIFEST_NAME};
use crate::error::{CliError, CliResult};
use crate::plans::{derive_seed, ensure_dir, load_plans};
use crate::predictor::Choice;

pub const BASELINE: &str = "baseline";
pub const GUIDED: &str = "guided";

#[derive(Args, Serialize, Default, Debug)]
pub struct NavFlags {
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
    pub episodes_per_plan: Option<u32>,
    /// none, oracle, uniform, zero, constant:V, frequency or external:ENDPOINT.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictor: Option<String>,
    /// Also run the unguided arm on the same episodes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repredict_every: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approach_observed_target: Option<bool>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NavSection {
    pub plans: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub episodes_per_plan: u32,
    pub predictor: String,
    pub paired: bool,
    pub radius: usize,
    pub max_steps: usize,
    pub repredict_every: usize,
    pub window: usize,
    pub alpha: f64,
    pub approach_observed_target: bool,
}

impl Default for NavSection {
    fn default() -> Self {
        let d = NavConfig::default();
        NavSection {
            plans: "plans".into(),
            out: "nav".into(),
            seed: 0,
            episodes_per_plan: 1,
            predictor: "oracle".into(),
            paired: true,
            radius: DEFAULT_RADIUS,
            max_steps: DEFAULT_MAX_STEPS,
            repredict_every: d.repredict_every,
            window: d.window,
            alpha: d.alpha,
            approach_observed_target: d.approach_observed_target,
        }
    }
}

impl Section for NavSection {
    const NAME: &'static str = "nav";
}

pub fn run(cfg: &NavSection) -> CliResult<()> {
    let choice = Choice::parse(&cfg.predictor)?;
    let base = NavConfig {
        repredict_every: cfg.repredict_every,
        window: cfg.window,
        alpha: cfg.alpha,
        max_steps: cfg.max_steps,
        radius: cfg.radius,
        approach_observed_target: cfg.approach_observed_target,
        ..NavConfig::default()
    };
    base.validate()?;
    let plans = load_plans(&cfg.plans)?;
    let census = choice.needs_census().then(|| {
        let mut census = [0u64; NUM_CLASSES];
        for (_, plan) in &plans {
            for (slot, n) in census.iter_mut().zip(plan.labels.census()) {
                *slot += n;
            }
        }
        census
    });
    let kind = choice.kind(census.as_ref())?;
    let mut arms: Vec<&str> = Vec::new();
    if cfg.paired || kind.is_none() {
        arms.push(BASELINE);
    }
    if kind.is_some() {
        arms.push(GUIDED);
    }

    let jobs: Vec<(usize, u32)> = (0..plans.len())
        .flat_map(|p| (0..cfg.episodes_per_plan).map(move |e| (p, e)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(p, e)| {
            let (id, plan) = &plans[p];
            let seed = derive_seed(cfg.seed, *id as u64, e as u64);
            let (start, query) = sample_episode(plan, seed)?;
            let ncfg = NavConfig { query, seed, ..base };
            let mut logs = Vec::new();
            for arm in &arms {
                let mut log = if *arm == GUIDED {
                    let mut predictor = kind.as_ref().expect("guided arm has a predictor").build(&plan.labels)?;
                    run_navigation_episode(plan, start, &ncfg, Some(predictor.as_mut()))?
                } else {
                    run_navigation_episode(plan, start, &ncfg, None)?
                };
                log.plan_id = *id;
                logs.push((*arm, log));
            }
            Ok::<_, CliError>(logs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let logs: Vec<(&str, EpisodeLog)> = results.into_iter().flatten().collect();
    if logs.is_empty() {
        return Err(CliError::config("no episodes to run"));
    }

    ensure_dir(&cfg.out)?;
    let mut episodes = EpisodeLog::FIELDS.join("\t");
    episodes.push('\n');
    for (arm, log) in &logs {
        episodes.push_str(&log.to_line(arm));
        episodes.push('\n');
    }
    fs::write(cfg.out.join("episodes.tsv"), episodes)?;
    let text = write_reports(&cfg.out, &logs)?;
    write_manifest(&cfg.out.join(MANIFEST_NAME), cfg)?;
    print!("{text}");
    Ok(())
}

/// Writes summary.tsv, deltas.tsv (paired runs only) and report.txt; returns
/// the report text.
pub fn write_reports(out: &Path, logs: &[(&str, EpisodeLog)]) -> CliResult<String> {
    let mut arms: Vec<&str> = Vec::new();
    for (arm, _) in logs {
        if !arms.contains(arm) {
            arms.push(arm);
        }
    }
    let of_arm = |name: &str| -> Vec<EpisodeLog> {
        logs.iter().filter(|(a, _)| *a == name).map(|(_, l)| l.clone()).collect()
    };
    let mut summary = format!("{}\n", NavSummary::row_header());
    let mut text = String::new();
    for arm in &arms {
        let s = aggregate(&of_arm(arm))?;
        summary.push_str(&s.to_row(arm));
        summary.push('\n');
        let _ = writeln!(text, "{arm}.episodes={}", s.episodes);
        let _ = writeln!(text, "{arm}.mean_steps={:.4}", s.mean_steps);
        let _ = writeln!(text, "{arm}.mean_exploration_ratio={:.4}", s.mean_exploration_ratio);
        let _ = writeln!(text, "{arm}.mean_spl={:.4}", s.mean_spl);
        let _ = writeln!(text, "{arm}.success_rate={:.4}", s.success_rate);
    }
    fs::write(out.join("summary.tsv"), summary)?;
    if arms.contains(&BASELINE) && arms.contains(&GUIDED) {
        let (b, g) = (of_arm(BASELINE), of_arm(GUIDED));
        let report = paired_report(&b, &g)?;
        let mut deltas = String::from("plan_id\tseed\tquery\tbaseline_steps\tguided_steps\tdelta\n");
        for ((x, y), d) in b.iter().zip(&g).zip(&report.step_deltas) {
            if (x.plan_id, x.seed) != (y.plan_id, y.seed) {
                return Err(CliError::new(
                    crate::error::Category::Format,
                    format!("episode order differs between arms at plan {} seed {}", x.plan_id, x.seed),
                ));
            }
            let _ = writeln!(deltas, "{}\t{}\t{}\t{}\t{}\t{d}", x.plan_id, x.seed, x.query.name(), x.steps, y.steps);
        }
        fs::write(out.join("deltas.tsv"), deltas)?;
        let _ = writeln!(text, "mean_relative_reduction={:.4}", report.mean_relative_reduction);
    }
    fs::write(out.join("report.txt"), &text)?;
    Ok(text)
}
