//! Experiment runners: replicated mechanism audits, the decoupling grid,
//! synthetic power studies, DP-SGD canary sweeps, and Type-I calibration.
//!
//! Replications fan out over the worker pool keyed by `(master seed,
//! replication index)` and are collected in submission order, so outputs are
//! byte-identical regardless of the worker count.

use rayon::prelude::*;

use seqaudit_core::bounds::{
    mmd_threshold_legacy, mmd_threshold_new, MmdThreshold, PrivacyParams, ThresholdFormula,
};
use seqaudit_core::kernel::Point;
use seqaudit_core::mechanisms::{Dataset, MechanismKind, MechanismSpec, StreamFamily, StreamSpec};
use seqaudit_core::rng::{derive_seed, fnv1a64};
use seqaudit_core::seq_test::{
    epsilon_lower_bound, run_audit, run_audit_with_threshold, AuditResult, BandwidthSpec,
    EpsilonSweep, PairStream, StepRecord, Strategy, TestConfig,
};

use crate::batch::{batch_mmd_test, BatchBandwidth};
use crate::config::ExperimentConfig;
use crate::summary::{strategy_str, summarize, RunOutcome, SummaryRow};
use crate::{thread_pool, HarnessError, Result};

/// Seed for replication `rep` of the experiment slice named `tag`.
fn tag_seed(master: u64, tag: &str, rep: u32) -> u64 {
    derive_seed(derive_seed(master, fnv1a64(tag.as_bytes())), rep as u64)
}

fn mechanism_spec(kind: MechanismKind, epsilon: f64, delta: f64) -> Result<MechanismSpec> {
    let delta = kind.is_gaussian().then_some(delta);
    Ok(MechanismSpec::new(kind, epsilon, delta)?)
}

/// Paired mechanism stream on the fixed neighbors S = {0}, S' = {0, 1}.
pub fn mechanism_stream_spec(
    kind: MechanismKind,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<StreamSpec> {
    let (baseline, neighbor) = Dataset::mean_benchmark_neighbors();
    Ok(StreamSpec {
        family: StreamFamily::MechanismPair {
            spec: mechanism_spec(kind, epsilon, delta)?,
            baseline,
            neighbor,
        },
        seed,
    })
}

/// A trace destined for one CSV file.
#[derive(Debug, Clone)]
pub struct TraceFileEntry {
    pub name: String,
    pub config_fingerprint: u64,
    pub trace: Vec<StepRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct TableRun {
    pub rows: Vec<SummaryRow>,
    pub traces: Vec<TraceFileEntry>,
}

fn replicate_stream_audits(
    cfg: &ExperimentConfig,
    tag: &str,
    reps: u32,
    make_family: impl Fn() -> StreamFamily + Sync,
    test_cfg: impl Fn(u64) -> TestConfig + Sync,
    tau: Option<MmdThreshold>,
) -> Result<Vec<AuditResult>> {
    let master = cfg.seed;
    thread_pool().install(|| {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let seed = tag_seed(master, tag, rep);
                let spec = StreamSpec {
                    family: make_family(),
                    seed,
                };
                let mut stream = spec.build(rep as u64)?;
                let cfg = test_cfg(seed);
                let result = match tau {
                    Some(tau) => run_audit_with_threshold(&cfg, tau, &mut stream)?,
                    None => run_audit(&cfg, &mut stream)?,
                };
                Ok(result)
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Replicated audits of one mechanism at one ε; the core of the results
/// tables.
pub fn mechanism_cell(
    cfg: &ExperimentConfig,
    kind: MechanismKind,
    epsilon: f64,
    strategy: Strategy,
    keep_traces: bool,
) -> Result<(SummaryRow, Vec<TraceFileEntry>)> {
    let privacy = PrivacyParams::new(epsilon, cfg.delta)?;
    let n_max = cfg.n_max_for(epsilon);
    let tag = format!("{}-{}-{}", kind.label(), epsilon, strategy_str(strategy));
    let delta = cfg.delta;
    let results = replicate_stream_audits(
        cfg,
        &tag,
        cfg.repetitions,
        || {
            let (baseline, neighbor) = Dataset::mean_benchmark_neighbors();
            StreamFamily::MechanismPair {
                spec: mechanism_spec(kind, epsilon, delta).expect("validated parameters"),
                baseline,
                neighbor,
            }
        },
        |seed| {
            let mut tc = cfg.test_config(privacy, n_max, seed);
            tc.strategy = strategy;
            tc
        },
        None,
    )?;
    let outcomes: Vec<RunOutcome> = results.iter().map(RunOutcome::from).collect();
    let row = summarize(kind.label(), epsilon, strategy, &outcomes);
    let traces = if keep_traces {
        results
            .into_iter()
            .enumerate()
            .map(|(rep, r)| TraceFileEntry {
                name: format!(
                    "trace_{}_eps{}_{}_rep{:02}.csv",
                    kind.label(),
                    epsilon,
                    strategy_str(strategy),
                    rep
                ),
                config_fingerprint: r.config_fingerprint,
                trace: r.trace,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok((row, traces))
}

/// The mean-mechanism benchmark: every mechanism × ε with the given
/// strategy.
pub fn mean_mechanism_table(
    cfg: &ExperimentConfig,
    strategy: Strategy,
    mechanisms: &[MechanismKind],
    keep_traces: bool,
) -> Result<TableRun> {
    let mut run = TableRun::default();
    for &kind in mechanisms {
        for &eps in &cfg.epsilons {
            let (row, traces) = mechanism_cell(cfg, kind, eps, strategy, keep_traces)?;
            run.rows.push(row);
            run.traces.extend(traces);
        }
    }
    Ok(run)
}

/// One variant of the decoupling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoupleVariant {
    pub sequential: bool,
    pub bound: ThresholdFormula,
    pub median_heuristic: bool,
}

impl DecoupleVariant {
    /// All 8 variants, sequential first, strongest configuration first.
    pub const ALL: [DecoupleVariant; 8] = [
        DecoupleVariant {
            sequential: true,
            bound: ThresholdFormula::New,
            median_heuristic: true,
        },
        DecoupleVariant {
            sequential: true,
            bound: ThresholdFormula::Legacy,
            median_heuristic: true,
        },
        DecoupleVariant {
            sequential: true,
            bound: ThresholdFormula::New,
            median_heuristic: false,
        },
        DecoupleVariant {
            sequential: true,
            bound: ThresholdFormula::Legacy,
            median_heuristic: false,
        },
        DecoupleVariant {
            sequential: false,
            bound: ThresholdFormula::New,
            median_heuristic: true,
        },
        DecoupleVariant {
            sequential: false,
            bound: ThresholdFormula::Legacy,
            median_heuristic: true,
        },
        DecoupleVariant {
            sequential: false,
            bound: ThresholdFormula::New,
            median_heuristic: false,
        },
        DecoupleVariant {
            sequential: false,
            bound: ThresholdFormula::Legacy,
            median_heuristic: false,
        },
    ];

    pub fn label(&self) -> String {
        let mut parts = vec![if self.sequential {
            "Sequential"
        } else {
            "Batch"
        }
        .to_string()];
        if self.bound == ThresholdFormula::New {
            parts.push("new MMD bound".into());
        }
        if self.median_heuristic {
            parts.push("MH".into());
        }
        parts.join(" + ")
    }
}

#[derive(Debug, Clone)]
pub struct DecoupleCell {
    pub variant: String,
    pub mechanism: String,
    pub rejection_rate: f64,
    pub runs: u32,
}

/// The 8-variant × 3-mechanism decoupling grid at (ε, δ) =
/// (`epsilons[0]`, `delta`). Batch variants consume `batch_size` pairs per
/// repetition (median-heuristic pilot included); sequential variants run the
/// usual budget for that ε.
pub fn decoupling_grid(cfg: &ExperimentConfig) -> Result<Vec<DecoupleCell>> {
    let epsilon = cfg.epsilons[0];
    let privacy = PrivacyParams::new(epsilon, cfg.delta)?;
    let mechanisms = [
        MechanismKind::DpGaussian,
        MechanismKind::NonDpGaussian1,
        MechanismKind::NonDpGaussian2,
    ];
    let mut cells = Vec::new();
    for variant in DecoupleVariant::ALL {
        for kind in mechanisms {
            let tag = format!("decouple-{}-{}", variant.label(), kind.label());
            let rate = if variant.sequential {
                let tau = match variant.bound {
                    ThresholdFormula::New => mmd_threshold_new(&privacy),
                    ThresholdFormula::Legacy => mmd_threshold_legacy(&privacy),
                };
                let delta = cfg.delta;
                let results = replicate_stream_audits(
                    cfg,
                    &tag,
                    cfg.decouple_repetitions,
                    || {
                        let (baseline, neighbor) = Dataset::mean_benchmark_neighbors();
                        StreamFamily::MechanismPair {
                            spec: mechanism_spec(kind, epsilon, delta)
                                .expect("validated parameters"),
                            baseline,
                            neighbor,
                        }
                    },
                    |seed| TestConfig {
                        privacy,
                        alpha: cfg.alpha,
                        n_max: Some(cfg.n_max_for(epsilon)),
                        pilot_size: if variant.median_heuristic {
                            cfg.pilot_size
                        } else {
                            0
                        },
                        bandwidth: if variant.median_heuristic {
                            BandwidthSpec::MedianHeuristic
                        } else {
                            BandwidthSpec::Fixed(1.0)
                        },
                        strategy: cfg.strategy,
                        seed,
                    },
                    Some(tau),
                )?;
                results.iter().filter(|r| r.rejected).count() as f64
                    / cfg.decouple_repetitions as f64
            } else {
                let master = cfg.seed;
                let rejections: Vec<u32> = thread_pool().install(|| {
                    (0..cfg.decouple_repetitions)
                        .into_par_iter()
                        .map(|rep| {
                            let seed = tag_seed(master, &tag, rep);
                            let spec = mechanism_stream_spec(kind, epsilon, cfg.delta, seed)?;
                            let mut stream = spec.build(rep as u64)?;
                            let (xs, ys) = draw_pairs(&mut stream, cfg.batch_size)?;
                            let outcome = batch_mmd_test(
                                &xs,
                                &ys,
                                &privacy,
                                cfg.alpha,
                                variant.bound,
                                if variant.median_heuristic {
                                    BatchBandwidth::MedianHeuristic
                                } else {
                                    BatchBandwidth::FixedOne
                                },
                                cfg.bootstrap_resamples,
                                seed,
                            )?;
                            Ok(outcome.reject as u32)
                        })
                        .collect::<Result<Vec<u32>>>()
                })?;
                rejections.iter().sum::<u32>() as f64 / cfg.decouple_repetitions as f64
            };
            cells.push(DecoupleCell {
                variant: variant.label(),
                mechanism: kind.label().to_string(),
                rejection_rate: rate,
                runs: cfg.decouple_repetitions,
            });
        }
    }
    Ok(cells)
}

/// Pure two-sample mode: τ = 0 via the (ε, δ) = (0, 0) claim.
fn two_sample_config(cfg: &ExperimentConfig, strategy: Strategy, seed: u64) -> TestConfig {
    TestConfig {
        privacy: PrivacyParams::new(0.0, 0.0).expect("zero parameters are valid"),
        alpha: cfg.alpha,
        n_max: Some(cfg.n_max),
        pilot_size: cfg.pilot_size,
        bandwidth: cfg.bandwidth,
        strategy,
        seed,
    }
}

/// Synthetic two-sample studies: identical uniforms on [0,1]² (Type-I),
/// perturbed uniform (power/stopping time), and the Gaussian-shift grid.
pub fn synthetic_suite(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    let strategy = cfg.strategy;

    let uniform = replicate_stream_audits(
        cfg,
        "uniform-identical-d2",
        cfg.uniform_sims,
        || StreamFamily::UniformCube { dim: 2 },
        |seed| two_sample_config(cfg, strategy, seed),
        None,
    )?;
    let outcomes: Vec<RunOutcome> = uniform.iter().map(RunOutcome::from).collect();
    rows.push(summarize("uniform_identical_d2", 0.0, strategy, &outcomes));

    let perturbed = replicate_stream_audits(
        cfg,
        "perturbed-uniform-d2",
        cfg.uniform_sims,
        || StreamFamily::PerturbedUniform {
            dim: 2,
            perturbations: cfg.perturbations,
            amplitude: cfg.perturb_amplitude,
        },
        |seed| two_sample_config(cfg, strategy, seed),
        None,
    )?;
    let outcomes: Vec<RunOutcome> = perturbed.iter().map(RunOutcome::from).collect();
    rows.push(summarize("perturbed_uniform_d2", 0.0, strategy, &outcomes));

    for &dim in &cfg.gaussian_dims {
        for &norm in &cfg.gaussian_shift_norms {
            let mut shift = vec![0.0; dim];
            shift[0] = norm;
            let tag = format!("gaussian-shift-d{dim}-mu{norm}");
            let results = replicate_stream_audits(
                cfg,
                &tag,
                cfg.gaussian_sims,
                || StreamFamily::GaussianShift {
                    dim,
                    shift: shift.clone(),
                },
                |seed| two_sample_config(cfg, strategy, seed),
                None,
            )?;
            let outcomes: Vec<RunOutcome> = results.iter().map(RunOutcome::from).collect();
            rows.push(summarize(
                format!("gaussian_shift_d{dim}_mu{norm:.2}"),
                0.0,
                strategy,
                &outcomes,
            ));
        }
    }
    Ok(rows)
}

/// One canary-stream ε sweep per run: candidate tests share the stream.
pub fn dpsgd_audit(cfg: &ExperimentConfig, sigma: f64, fixture: &str) -> Result<Vec<EpsilonSweep>> {
    if cfg.candidate_epsilons.is_empty() {
        return Err(HarnessError::Usage("candidate grid is empty".into()));
    }
    let master = cfg.seed;
    thread_pool().install(|| {
        (0..cfg.dpsgd_runs)
            .into_par_iter()
            .map(|run| {
                let seed = tag_seed(master, &format!("dpsgd-{fixture}"), run);
                let spec = StreamSpec {
                    family: StreamFamily::CanaryGaussian { sigma },
                    seed,
                };
                let mut stream = spec.build(run as u64)?;
                let template = TestConfig {
                    privacy: PrivacyParams::new(0.0, cfg.delta)?,
                    alpha: cfg.alpha,
                    n_max: Some(cfg.dpsgd_steps),
                    pilot_size: cfg.pilot_size,
                    bandwidth: cfg.bandwidth,
                    strategy: cfg.strategy,
                    seed,
                };
                Ok(epsilon_lower_bound(
                    &cfg.candidate_epsilons,
                    cfg.delta,
                    &template,
                    &mut stream,
                )?)
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Identical-distribution audits for Type-I calibration; returns one outcome
/// per run.
pub fn type_one_error_runs(
    cfg: &ExperimentConfig,
    runs: u32,
    n_max: u64,
    strategy: Strategy,
) -> Result<Vec<RunOutcome>> {
    let results = replicate_stream_audits(
        cfg,
        "type-one-null",
        runs,
        || StreamFamily::GaussianShift {
            dim: 1,
            shift: vec![0.0],
        },
        |seed| {
            let mut tc = two_sample_config(cfg, strategy, seed);
            tc.n_max = Some(n_max);
            tc
        },
        None,
    )?;
    Ok(results.iter().map(RunOutcome::from).collect())
}

/// Single audit of the configured stream (CLI `audit`).
pub fn single_audit(cfg: &ExperimentConfig) -> Result<AuditResult> {
    let spec = cfg
        .stream
        .clone()
        .ok_or_else(|| HarnessError::Usage("audit requires a `stream` in the config".into()))?;
    let mut stream = spec.build(0)?;
    let epsilon = cfg.epsilons[0];
    let privacy = PrivacyParams::new(epsilon, cfg.delta)?;
    let tc = cfg.test_config(privacy, cfg.n_max_for(epsilon), spec.seed);
    Ok(run_audit(&tc, &mut stream)?)
}

/// ε lower-bound sweep over the configured stream (CLI `sweep-epsilon`).
pub fn epsilon_sweep(cfg: &ExperimentConfig) -> Result<EpsilonSweep> {
    let spec = cfg.stream.clone().ok_or_else(|| {
        HarnessError::Usage("sweep-epsilon requires a `stream` in the config".into())
    })?;
    if cfg.candidate_epsilons.is_empty() {
        return Err(HarnessError::Usage("candidate grid is empty".into()));
    }
    let mut stream = spec.build(0)?;
    let template = TestConfig {
        privacy: PrivacyParams::new(0.0, cfg.delta)?,
        alpha: cfg.alpha,
        n_max: Some(cfg.n_max),
        pilot_size: cfg.pilot_size,
        bandwidth: cfg.bandwidth,
        strategy: cfg.strategy,
        seed: spec.seed,
    };
    Ok(epsilon_lower_bound(
        &cfg.candidate_epsilons,
        cfg.delta,
        &template,
        &mut stream,
    )?)
}

/// Rejecting candidates of a sweep, formatted as CSV rows `t,eps_lb`.
pub fn sweep_rows(sweep: &EpsilonSweep) -> Vec<String> {
    sweep
        .lower_bound
        .iter()
        .enumerate()
        .map(|(i, lb)| format!("{},{:.12e}", i + 1, lb))
        .collect()
}

/// Collects n pairs into parallel point vectors (batch-tester input).
pub fn draw_pairs<S: PairStream>(stream: &mut S, n: usize) -> Result<(Vec<Point>, Vec<Point>)> {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = stream
            .next_pair()
            .ok_or_else(|| HarnessError::Usage("stream ended early".into()))?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}
