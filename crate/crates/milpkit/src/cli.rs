//! Command implementations behind the `milpkit` binary.
//!
//! Every command is a library function so the thin binary only parses
//! arguments. Identical inputs, seed, and simulated clock produce
//! byte-identical outputs; the wall clock is strictly opt-in.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{solve, BnbConfig, BnbStatus, BranchingRule, NodeSelection};
use crate::clock::{Clock, SimClock, WallClock};
use crate::generators::{
    gen_item_placement, gen_time_indexed, gen_workload, load_instance, save_instance, Family,
    GeneratorError, ItemPlacementParams, StructuredView, TimeIndexedParams, WorkloadParams,
};
use crate::heuristics::{primal_pipeline, HeuristicBudget};
use crate::learner::{
    collect_sb_data, dagger_loop, greedy_omega_search, top_k_sba, CollectOptions, CollectPolicy,
    ModelFile, SolverCrEvaluator,
};
use crate::metrics::{cumulated_reward, dual_integral, gap_integral, primal_integral};
use crate::model::MilpInstance;
use crate::runlog::{config_hash, RunLog};
use crate::tuner::{
    cluster_instances, reduce_space, tune, ReduceOptions, TuneOptions, TuningInstance,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Solve(#[from] crate::bnb::SolveError),
    #[error(transparent)]
    Tune(#[from] crate::tuner::TuneError),
    #[error("no files match '{0}'")]
    EmptyGlob(String),
    #[error("glob: {0}")]
    Glob(#[from] glob::PatternError),
    #[error("{0}")]
    BadArg(String),
}

/// What a command did; the binary maps this onto exit codes 0/1.
#[derive(Debug, Default)]
pub struct CmdOutcome {
    pub processed: usize,
    pub partial_failures: usize,
    pub notes: Vec<String>,
}

/// Expands a glob pattern (or a directory, meaning `dir/*.mps`) into a
/// sorted file list.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, CliError> {
    let pat = if Path::new(pattern).is_dir() {
        format!("{}/*.mps", pattern.trim_end_matches('/'))
    } else {
        pattern.to_string()
    };
    let mut files: Vec<PathBuf> = glob::glob(&pat)?.filter_map(Result::ok).collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::EmptyGlob(pattern.to_string()));
    }
    Ok(files)
}

fn load_many(pattern: &str) -> Result<Vec<(PathBuf, MilpInstance, Option<StructuredView>)>, CliError> {
    expand_glob(pattern)?
        .into_iter()
        .map(|p| {
            let (inst, view) = load_instance(&p)?;
            Ok((p, inst, view))
        })
        .collect()
}

fn stem_of(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().to_string()
}

fn make_clock(wall: bool) -> Box<dyn Clock> {
    if wall {
        Box::new(WallClock::new())
    } else {
        Box::new(SimClock::new())
    }
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub family: String,
    pub count: usize,
    pub seed: u64,
    pub params_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub train_ratio: f64,
}

#[derive(Serialize, Deserialize)]
struct SplitManifest {
    train: Vec<String>,
    valid: Vec<String>,
}

/// Merges a partial JSON override file onto default parameters.
fn merged_params<T: Serialize + serde::de::DeserializeOwned>(
    defaults: T,
    file: Option<&PathBuf>,
) -> Result<T, CliError> {
    let Some(path) = file else { return Ok(defaults) };
    let overrides: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let mut base = serde_json::to_value(&defaults)?;
    if let (Some(obj), Some(over)) = (base.as_object_mut(), overrides.as_object()) {
        for (k, v) in over {
            obj.insert(k.clone(), v.clone());
        }
    }
    Ok(serde_json::from_value(base)?)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<CmdOutcome, CliError> {
    let family = Family::parse(&args.family)
        .ok_or_else(|| CliError::BadArg(format!("unknown family '{}'", args.family)))?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut stems = Vec::new();
    for index in 0..args.count {
        let seed = args.seed.wrapping_add(index as u64);
        let (inst, view) = match family {
            Family::ItemPlacement => {
                let mut p: ItemPlacementParams =
                    merged_params(ItemPlacementParams::default(), args.params_file.as_ref())?;
                p.seed = seed;
                gen_item_placement(&p)?
            }
            Family::Workload => {
                let mut p: WorkloadParams =
                    merged_params(WorkloadParams::default(), args.params_file.as_ref())?;
                p.seed = seed;
                gen_workload(&p)?
            }
            Family::TimeIndexed => {
                let mut p: TimeIndexedParams =
                    merged_params(TimeIndexedParams::default(), args.params_file.as_ref())?;
                p.seed = seed;
                gen_time_indexed(&p)?
            }
        };
        let stem = format!("{}_{index:04}", family.as_str());
        save_instance(&args.out_dir, &stem, &inst, &view)?;
        stems.push(stem);
    }
    let n_train = ((args.train_ratio * args.count as f64).round() as usize).min(args.count);
    let manifest = SplitManifest {
        train: stems[..n_train].to_vec(),
        valid: stems[n_train..].to_vec(),
    };
    std::fs::write(
        args.out_dir.join("manifest.json"),
        crate::jsonio::to_string(&manifest)?,
    )?;
    Ok(CmdOutcome {
        processed: args.count,
        ..Default::default()
    })
}

// ------------------------------------------------------------------ primal

#[derive(Debug, Clone)]
pub struct PrimalArgs {
    pub glob: String,
    pub budget: f64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub wall_clock: bool,
}

#[derive(Serialize, Deserialize)]
struct MetricRow {
    instance: String,
    family: String,
    metric: String,
    value: f64,
    opt_value: f64,
    opt_source: String,
    runlog: String,
}

fn write_metric_csv(path: &Path, rows: &[MetricRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance", "family", "metric", "value", "opt_value", "opt_source", "runlog"])?;
    for r in rows {
        w.write_record([
            &r.instance,
            &r.family,
            &r.metric,
            &crate::mps::fmt_num(r.value),
            &crate::mps::fmt_num(r.opt_value),
            &r.opt_source,
            &r.runlog,
        ])?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

pub fn cmd_primal(args: &PrimalArgs) -> Result<CmdOutcome, CliError> {
    let inputs = load_many(&args.glob)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let budget = HeuristicBudget {
        wall_seconds: args.budget,
        ..HeuristicBudget::default()
    };

    let results: Vec<Result<(String, RunLog, Vec<MetricRow>), String>> = pool(args.workers)
        .install(|| {
            inputs
                .par_iter()
                .map(|(path, inst, view)| {
                    let stem = stem_of(path);
                    let clock = make_clock(args.wall_clock);
                    let out = primal_pipeline(inst, view.as_ref(), &budget, clock.as_ref());
                    let (opt, opt_source) = match view.as_ref().and_then(|v| v.planted_optimum) {
                        Some(v) => (v, "planted"),
                        None => (out.timeline.final_primal(), "substitute"),
                    };
                    let pi = primal_integral(&out.timeline, opt).map_err(|e| e.to_string())?;
                    let seed = 0;
                    let log = RunLog::from_timeline(
                        &stem,
                        view.as_ref().map(|v| v.family.as_str()),
                        seed,
                        config_hash(&(args.budget, "primal_pipeline")),
                        if args.wall_clock { "wall" } else { "sim" },
                        &out.timeline,
                        if out.best.is_some() { "Feasible" } else { "NoSolution" },
                        0,
                    );
                    let rows = vec![MetricRow {
                        instance: stem.clone(),
                        family: log.header.family.clone().unwrap_or_default(),
                        metric: "primal_integral".into(),
                        value: pi,
                        opt_value: opt,
                        opt_source: opt_source.into(),
                        runlog: format!("{stem}.runlog.json"),
                    }];
                    Ok((stem, log, rows))
                })
                .collect()
        });

    let mut rows = Vec::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok((stem, log, mut rs)) => {
                std::fs::write(args.out_dir.join(format!("{stem}.runlog.json")), log.to_json())?;
                rows.append(&mut rs);
            }
            Err(_) => failures += 1,
        }
    }
    write_metric_csv(&args.out_dir.join("primal_metrics.csv"), &rows)?;
    Ok(CmdOutcome {
        processed: rows.len(),
        partial_failures: failures,
        ..Default::default()
    })
}

// -------------------------------------------------------------------- dual

#[derive(Debug, Clone)]
pub struct DualArgs {
    pub glob: String,
    /// "mostfrac", "random:SEED", "strong", "pseudocost", "learned:PATH".
    pub rule: String,
    pub budget: f64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub wall_clock: bool,
}

pub fn parse_rule(spec: &str) -> Result<BranchingRule, CliError> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    Ok(match kind {
        "mostfrac" | "most_fractional" => BranchingRule::MostFractional,
        "random" => BranchingRule::Random {
            seed: arg.unwrap_or("0").parse().map_err(|_| {
                CliError::BadArg(format!("random rule needs a numeric seed, got {spec}"))
            })?,
        },
        "strong" | "strong_branching" => BranchingRule::StrongBranching,
        "pseudocost" => BranchingRule::PseudoCost,
        "learned" => {
            let path = arg.ok_or_else(|| {
                CliError::BadArg("learned rule needs a model path: learned:PATH".into())
            })?;
            let file: ModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            BranchingRule::Learned(file.params())
        }
        other => return Err(CliError::BadArg(format!("unknown rule '{other}'"))),
    })
}

pub fn cmd_dual(args: &DualArgs) -> Result<CmdOutcome, CliError> {
    let rule = parse_rule(&args.rule)?;
    let inputs = load_many(&args.glob)?;
    std::fs::create_dir_all(&args.out_dir)?;

    let results: Vec<Result<(String, RunLog, Vec<MetricRow>), String>> = pool(args.workers)
        .install(|| {
            inputs
                .par_iter()
                .map(|(path, inst, view)| {
                    let stem = stem_of(path);
                    // Primal heuristics stay off for the dual task.
                    let cfg = BnbConfig {
                        branching_rule: rule.clone(),
                        time_limit: args.budget,
                        objective_limit: view.as_ref().map(|v| v.trivial_bound),
                        primal_heuristics_enabled: false,
                        ..BnbConfig::default()
                    };
                    let clock = make_clock(args.wall_clock);
                    let res = solve(inst, &cfg, None, clock.as_ref()).map_err(|e| e.to_string())?;
                    let (opt, opt_source) = match view.as_ref().and_then(|v| v.planted_optimum) {
                        Some(v) => (v, "planted"),
                        None => (res.timeline.final_dual(), "substitute"),
                    };
                    let di = dual_integral(&res.timeline, opt).map_err(|e| e.to_string())?;
                    let cr = cumulated_reward(&res.timeline).map_err(|e| e.to_string())?;
                    let log = RunLog::from_timeline(
                        &stem,
                        view.as_ref().map(|v| v.family.as_str()),
                        0,
                        config_hash(&cfg),
                        if args.wall_clock { "wall" } else { "sim" },
                        &res.timeline,
                        &format!("{:?}", res.status),
                        res.nodes,
                    );
                    let mk = |metric: &str, value: f64| MetricRow {
                        instance: stem.clone(),
                        family: log.header.family.clone().unwrap_or_default(),
                        metric: metric.into(),
                        value,
                        opt_value: opt,
                        opt_source: opt_source.into(),
                        runlog: format!("{stem}.runlog.json"),
                    };
                    let rows = vec![mk("dual_integral", di), mk("cumulated_reward", cr)];
                    Ok((stem, log, rows))
                })
                .collect()
        });

    let mut rows = Vec::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok((stem, log, mut rs)) => {
                std::fs::write(args.out_dir.join(format!("{stem}.runlog.json")), log.to_json())?;
                rows.append(&mut rs);
            }
            Err(_) => failures += 1,
        }
    }
    write_metric_csv(&args.out_dir.join("dual_metrics.csv"), &rows)?;
    Ok(CmdOutcome {
        processed: rows.len() / 2,
        partial_failures: failures,
        ..Default::default()
    })
}

// ----------------------------------------------------------- train-branching

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub train_glob: String,
    pub valid_glob: String,
    pub rounds: usize,
    pub omega_max: usize,
    pub out_model: PathBuf,
    pub node_cap: usize,
    pub budget_per_instance: f64,
    pub cr_time_limit: f64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct TrainReportFile {
    omega_table: crate::learner::OmegaSearchReport,
    top1_sba: f64,
    top3_sba: f64,
    rounds: usize,
    dataset_sizes: Vec<usize>,
}

pub fn cmd_train_branching(args: &TrainArgs) -> Result<CmdOutcome, CliError> {
    let train: Vec<MilpInstance> = load_many(&args.train_glob)?
        .into_iter()
        .map(|(_, i, _)| i)
        .collect();
    let valid: Vec<MilpInstance> = load_many(&args.valid_glob)?
        .into_iter()
        .map(|(_, i, _)| i)
        .collect();

    let collect = CollectOptions {
        node_cap: args.node_cap,
        budget_per_instance: args.budget_per_instance,
        sb_candidate_limit: 8,
    };
    let outcome = dagger_loop(&train, args.rounds, &collect, 1e-4);
    let evaluator = SolverCrEvaluator {
        instances: &valid,
        time_limit: args.cr_time_limit,
        sb_candidate_limit: collect.sb_candidate_limit,
    };
    let (best, report) = greedy_omega_search(&outcome.candidates, args.omega_max, &evaluator);

    // Held-out labels for SBA: fresh oracle collection on the validation set.
    let heldout = collect_sb_data(&valid, CollectPolicy::Oracle, &collect, usize::MAX);

    let model = ModelFile::new(&best, args.rounds, report.chosen_omega, args.seed);
    std::fs::write(&args.out_model, crate::jsonio::to_string(&model)?)?;
    let report_file = TrainReportFile {
        top1_sba: top_k_sba(&best, &heldout, 1),
        top3_sba: top_k_sba(&best, &heldout, 3),
        omega_table: report,
        rounds: args.rounds,
        dataset_sizes: outcome.dataset_sizes,
    };
    let report_path = args.out_model.with_extension("report.json");
    std::fs::write(&report_path, crate::jsonio::to_string(&report_file)?)?;
    Ok(CmdOutcome {
        processed: train.len() + valid.len(),
        notes: vec![format!(
            "selected omega {} (top-1 SBA {:.3})",
            report_file.omega_table.chosen_omega, report_file.top1_sba
        )],
        ..Default::default()
    })
}

// -------------------------------------------------------------------- tune

#[derive(Debug, Clone)]
pub struct TuneArgs {
    pub glob: String,
    pub subspaces: Option<usize>,
    pub iterations: usize,
    pub proposals: usize,
    pub init_samples: usize,
    pub seed: u64,
    pub out_config: PathBuf,
    pub budget: f64,
    pub clusters: Option<usize>,
    pub skip_reduction: bool,
}

pub fn cmd_tune(args: &TuneArgs) -> Result<CmdOutcome, CliError> {
    let inputs = load_many(&args.glob)?;
    let prepared: Vec<(String, TuningInstance)> = inputs
        .iter()
        .filter_map(|(p, inst, view)| {
            TuningInstance::prepare(inst.clone(), view.as_ref())
                .map(|ti| (stem_of(p), ti))
        })
        .collect();
    if prepared.is_empty() {
        return Err(CliError::EmptyGlob(args.glob.clone()));
    }

    let mut space = crate::tuner::default_space();
    if let Some(k) = args.subspaces {
        space.repartition(k);
    }
    let opts = TuneOptions {
        init_samples: args.init_samples,
        iterations: args.iterations,
        proposals: args.proposals,
        seed: args.seed,
        per_instance_budget: args.budget,
        ..Default::default()
    };

    // Cluster assignment: one tuned configuration per cluster.
    let cluster_of: Vec<usize> = match args.clusters {
        Some(k) => {
            let insts: Vec<MilpInstance> =
                prepared.iter().map(|(_, ti)| ti.inst.clone()).collect();
            cluster_instances(&insts, k, args.seed)
        }
        None => vec![0; prepared.len()],
    };
    let num_clusters = cluster_of.iter().copied().max().unwrap_or(0) + 1;

    let mut all_lines = Vec::new();
    let mut configs: BTreeMap<String, crate::tuner::Assignment> = BTreeMap::new();
    let mut printed = String::new();
    printed.push_str("dataset            default_perf     tuned_perf       improvement\n");
    for c in 0..num_clusters {
        let members: Vec<TuningInstance> = prepared
            .iter()
            .zip(&cluster_of)
            .filter(|(_, &cl)| cl == c)
            .map(|((_, ti), _)| ti.clone())
            .collect();
        if members.is_empty() {
            continue;
        }
        let tuned_space = if args.skip_reduction {
            space.clone()
        } else {
            let ropts = ReduceOptions {
                samples: 32,
                keep: 12,
                probe_instances: 2,
                probe_budget: (args.budget / 4.0).max(1.0),
                seed: args.seed,
                ..Default::default()
            };
            reduce_space(&space, &members, &ropts).0
        };
        let result = tune(&tuned_space, &members, &opts)?;
        for t in &result.history {
            all_lines.push(crate::jsonio::to_string(t)?);
        }
        let label = if num_clusters == 1 {
            "all".to_string()
        } else {
            format!("cluster{c}")
        };
        let factor = if result.best_objective > 0.0 {
            result.default_objective / result.best_objective
        } else if result.default_objective > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        printed.push_str(&format!(
            "{label:<18} {:<16.2} {:<16.2} x{factor:.2}\n",
            result.default_objective, result.best_objective
        ));
        configs.insert(label, result.best);
    }
    print!("{printed}");

    std::fs::write(&args.out_config, crate::jsonio::to_string(&configs)?)?;
    std::fs::write(
        args.out_config.with_extension("history.jsonl"),
        all_lines.join("\n") + "\n",
    )?;
    if args.clusters.is_some() {
        let map: BTreeMap<String, usize> = prepared
            .iter()
            .zip(&cluster_of)
            .map(|((stem, _), &c)| (stem.clone(), c))
            .collect();
        std::fs::write(
            args.out_config.with_extension("clusters.json"),
            crate::jsonio::to_string(&map)?,
        )?;
    }
    std::fs::write(args.out_config.with_extension("table.txt"), printed)?;
    Ok(CmdOutcome {
        processed: prepared.len(),
        ..Default::default()
    })
}

// ------------------------------------------------------------------ report

#[derive(Debug, Clone)]
pub struct ReportArgs {
    pub csv_glob: String,
    pub out_dir: PathBuf,
}

pub fn cmd_report(args: &ReportArgs) -> Result<CmdOutcome, CliError> {
    let files = expand_glob(&args.csv_glob)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut mismatches = 0usize;
    let mut rows_seen = 0usize;

    for file in &files {
        let dir = file.parent().unwrap_or(Path::new("."));
        let mut rdr = csv::Reader::from_path(file)?;
        for record in rdr.deserialize::<MetricRow>() {
            let row: MetricRow = record?;
            rows_seen += 1;
            groups
                .entry((row.family.clone(), row.metric.clone()))
                .or_default()
                .push(row.value);

            // Cross-check: the run log must re-derive to the same value.
            let log_path = dir.join(&row.runlog);
            if log_path.exists() {
                let log = RunLog::from_json(&std::fs::read_to_string(&log_path)?)?;
                let tl = log.timeline();
                let recomputed = match row.metric.as_str() {
                    "primal_integral" => primal_integral(&tl, row.opt_value).ok(),
                    "dual_integral" => dual_integral(&tl, row.opt_value).ok(),
                    "cumulated_reward" => cumulated_reward(&tl).ok(),
                    "gap_integral" => gap_integral(&tl).ok(),
                    _ => None,
                };
                if let Some(v) = recomputed {
                    if (v - row.value).abs() > 1e-9 * (1.0 + row.value.abs()) {
                        mismatches += 1;
                    }
                }
                // Plot-ready series: step points of both bound tracks.
                let stem = row.runlog.trim_end_matches(".runlog.json");
                let series_path = args.out_dir.join(format!("{stem}.series.csv"));
                if !series_path.exists() {
                    write_series(&series_path, &tl)?;
                }
            }
        }
    }
    if rows_seen == 0 {
        return Err(CliError::EmptyGlob(args.csv_glob.clone()));
    }

    let mut w = csv::Writer::from_path(args.out_dir.join("summary.csv"))?;
    w.write_record(["family", "metric", "count", "mean", "median", "std"])?;
    for ((family, metric), mut values) in groups {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        w.write_record([
            &family,
            &metric,
            &n.to_string(),
            &crate::mps::fmt_num(mean),
            &crate::mps::fmt_num(median),
            &crate::mps::fmt_num(std),
        ])?;
    }
    w.flush().map_err(std::io::Error::from)?;

    Ok(CmdOutcome {
        processed: rows_seen,
        partial_failures: mismatches,
        notes: if mismatches > 0 {
            vec![format!("{mismatches} rows disagree with their run logs")]
        } else {
            Vec::new()
        },
    })
}

fn write_series(path: &Path, tl: &crate::metrics::BoundsTimeline) -> Result<(), CliError> {
    let mut out = String::from("t,primal,dual\n");
    let mut pb = tl.initial_primal;
    let mut db = tl.initial_dual;
    let fmt = crate::mps::fmt_num;
    let push = |t: f64, pb: f64, db: f64, out: &mut String| {
        out.push_str(&format!("{},{},{}\n", fmt(t), fmt(pb), fmt(db)));
    };
    push(0.0, pb, db, &mut out);
    for e in &tl.events {
        match e.kind {
            crate::metrics::EventKind::PrimalUpdate(v) => {
                pb = v;
                push(e.t, pb, db, &mut out);
            }
            crate::metrics::EventKind::DualUpdate(v) => {
                db = v;
                push(e.t, pb, db, &mut out);
            }
            crate::metrics::EventKind::NodeProcessed => {}
        }
    }
    push(tl.horizon, pb, db, &mut out);
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

// A dual-task warm-up: the solve command used by examples and tests.
/// Solves one MPS file with a given rule under the simulated clock.
pub fn solve_one(
    path: &Path,
    rule: BranchingRule,
    budget: f64,
) -> Result<(BnbStatus, Option<f64>, usize), CliError> {
    let (inst, view) = load_instance(path)?;
    let cfg = BnbConfig {
        branching_rule: rule,
        time_limit: budget,
        objective_limit: view.as_ref().map(|v| v.trivial_bound),
        node_selection: NodeSelection::BestBound,
        ..BnbConfig::default()
    };
    let clock = SimClock::new();
    let res = solve(&inst, &cfg, None, &clock)?;
    Ok((res.status, res.best.map(|s| s.objective), res.nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn generate(dir: &Path, family: &str, count: usize, params: Option<serde_json::Value>) {
        let params_file = params.map(|v| {
            let p = dir.join("params.json");
            std::fs::write(&p, v.to_string()).unwrap();
            p
        });
        cmd_generate(&GenerateArgs {
            family: family.into(),
            count,
            seed: 11,
            params_file,
            out_dir: dir.to_path_buf(),
            train_ratio: 0.9,
        })
        .unwrap();
    }

    #[test]
    fn generate_writes_files_and_manifest() {
        let dir = tempdir().unwrap();
        generate(
            dir.path(),
            "item_placement",
            10,
            Some(serde_json::json!({"items": 8, "containers": 4, "big_item_count": 2})),
        );
        let mps_count = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                e.as_ref().unwrap().path().extension().map(|x| x == "mps") == Some(true)
            })
            .count();
        assert_eq!(mps_count, 10);
        let manifest: SplitManifest = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest.train.len(), 9);
        assert_eq!(manifest.valid.len(), 1);
    }

    #[test]
    fn primal_then_report_round_trip() {
        let dir = tempdir().unwrap();
        generate(
            dir.path(),
            "time_indexed",
            3,
            Some(serde_json::json!({"horizon": 4, "vars_per_period": 3})),
        );
        let out = dir.path().join("runs");
        let outcome = cmd_primal(&PrimalArgs {
            glob: dir.path().to_string_lossy().to_string(),
            budget: 3.0,
            out_dir: out.clone(),
            workers: 2,
            wall_clock: false,
        })
        .unwrap();
        assert_eq!(outcome.processed, 3);
        assert_eq!(outcome.partial_failures, 0);

        let report_out = dir.path().join("report");
        let rep = cmd_report(&ReportArgs {
            csv_glob: out.join("*.csv").to_string_lossy().to_string(),
            out_dir: report_out.clone(),
        })
        .unwrap();
        assert_eq!(rep.partial_failures, 0, "CSV values must re-derive from logs");
        assert!(report_out.join("summary.csv").exists());
    }

    #[test]
    fn dual_command_emits_both_metrics() {
        let dir = tempdir().unwrap();
        generate(
            dir.path(),
            "workload",
            2,
            Some(serde_json::json!({"tasks": 6, "machines": 4})),
        );
        let out = dir.path().join("runs");
        let outcome = cmd_dual(&DualArgs {
            glob: dir.path().to_string_lossy().to_string(),
            rule: "mostfrac".into(),
            budget: 5.0,
            out_dir: out.clone(),
            workers: 1,
            wall_clock: false,
        })
        .unwrap();
        assert_eq!(outcome.processed, 2);
        let csv = std::fs::read_to_string(out.join("dual_metrics.csv")).unwrap();
        assert!(csv.contains("dual_integral"));
        assert!(csv.contains("cumulated_reward"));
    }

    #[test]
    fn reruns_are_byte_identical_under_the_simulated_clock() {
        let once = |dirname: &str| {
            let dir = tempfile::Builder::new().prefix(dirname).tempdir().unwrap();
            generate(
                dir.path(),
                "time_indexed",
                2,
                Some(serde_json::json!({"horizon": 4, "vars_per_period": 2})),
            );
            let out = dir.path().join("runs");
            cmd_primal(&PrimalArgs {
                glob: dir.path().to_string_lossy().to_string(),
                budget: 2.0,
                out_dir: out.clone(),
                workers: 2,
                wall_clock: false,
            })
            .unwrap();
            let mut blobs = Vec::new();
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            paths.sort();
            for p in paths {
                blobs.push((
                    p.file_name().unwrap().to_string_lossy().to_string(),
                    std::fs::read(p).unwrap(),
                ));
            }
            blobs
        };
        assert_eq!(once("milpkit_det_a"), once("milpkit_det_b"));
    }

    #[test]
    fn empty_glob_is_an_explicit_error() {
        let dir = tempdir().unwrap();
        let err = cmd_report(&ReportArgs {
            csv_glob: dir.path().join("*.csv").to_string_lossy().to_string(),
            out_dir: dir.path().join("out"),
        })
        .unwrap_err();
        assert!(matches!(err, CliError::EmptyGlob(_)));
    }

    #[test]
    fn rule_parsing_covers_the_surface() {
        assert!(matches!(parse_rule("mostfrac"), Ok(BranchingRule::MostFractional)));
        assert!(matches!(
            parse_rule("random:7"),
            Ok(BranchingRule::Random { seed: 7 })
        ));
        assert!(matches!(parse_rule("strong"), Ok(BranchingRule::StrongBranching)));
        assert!(matches!(parse_rule("pseudocost"), Ok(BranchingRule::PseudoCost)));
        assert!(parse_rule("nonsense").is_err());
        assert!(parse_rule("learned").is_err());
    }
}
