//! Experiment drivers behind the CLI subcommands.
//!
//! Monte-Carlo repetitions run in parallel (see [`crate::par`]); records are
//! assembled in `(sweep value, repetition)` order so output files are
//! reproducible byte for byte for a fixed config and seed.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bound::{compute_eta_bound, estimate_lipschitz, EtaBound};
use crate::delay::DelayModel;
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::lyapunov::solve_lyapunov;
use crate::par;
use crate::plant::build_companion;
use crate::sim::{run, SimTrace};
use crate::tracking::{bound_constants, tracking_bound_offline, BoundConstants};
use crate::trigger::{
    min_error_bound, offline_beats_online, DeletionStrategy, TradeoffInputs, TradeoffReport,
    TriggerPolicy,
};

use super::config::Resolved;
use super::data::{derive_seed, fit_initial_model, SALT_RUN};
use super::table::{write_error_series, ResultTable, RunRecord, SweepRow};

/// Closed-loop constants independent of the training data.
#[derive(Debug, Clone)]
pub struct LoopConstants {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// Lipschitz constant of the latent vector field (safety-inflated).
    pub l_f: f64,
    /// Per-output-dimension constants entering the per-dimension offsets.
    pub l_f_per_dim: Vec<f64>,
}

/// Companion matrices, Lyapunov solution, and grid Lipschitz estimates of
/// the plant nonlinearity.
pub fn loop_constants(rx: &Resolved) -> Result<LoopConstants> {
    let gains = &rx.loop_config.gains;
    let (a, b) = build_companion(gains);
    let q = gains.q_matrix.clone();
    let p = solve_lyapunov(&a, &q)?;
    let plant = &rx.loop_config.plant;
    let field = plant.f_field();
    let l_f = estimate_lipschitz(
        |x| field(x),
        plant.domain(),
        rx.grid_step,
        rx.lipschitz_safety,
    )?;
    let n = plant.dim();
    let mut l_f_per_dim = Vec::with_capacity(n);
    for dim in 0..n {
        let field = plant.f_field();
        let l = estimate_lipschitz(
            move |x| nalgebra::DVector::from_element(1, field(x)[dim]),
            plant.domain(),
            rx.grid_step,
            rx.lipschitz_safety,
        )?;
        l_f_per_dim.push(l);
    }
    Ok(LoopConstants {
        a,
        b,
        p,
        q,
        l_f,
        l_f_per_dim,
    })
}

/// Kind-specific admissibility checks that need the loop constants, run
/// before any simulation starts. Sweeps without bound certification
/// (delay-sweep, dataset-sweep) have nothing to check here.
pub fn validate_experiment(rx: &Resolved) -> Result<()> {
    match rx.config.kind {
        super::config::ExperimentKind::OnlineTrigger => {
            let lc = loop_constants(rx)?;
            let oc = rx.config.online.as_ref().expect("resolved online config");
            for &delta_bar in &oc.delta_bars {
                check_delay_hypothesis(delta_bar, lc.l_f)?;
            }
        }
        super::config::ExperimentKind::TradeoffSweep => {
            let lc = loop_constants(rx)?;
            let tc = rx.config.tradeoff.as_ref().expect("resolved tradeoff config");
            for &d2 in &tc.delta_bar_2 {
                if tc.delta_bar_1 > d2 {
                    return Err(Error::Precondition(format!(
                        "tradeoff needs delta_bar_1 <= delta_bar_2, got {} > {d2}",
                        tc.delta_bar_1
                    )));
                }
                check_delay_hypothesis(d2, lc.l_f)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn check_delay_hypothesis(delta_bar: f64, l_f: f64) -> Result<()> {
    let limit = 1.0 / (2.0 * l_f);
    if delta_bar >= limit {
        return Err(Error::Precondition(format!(
            "delay bound {delta_bar} violates delta_bar < 1/(2 L_f) = {limit:.4} \
             (L_f = {l_f:.4}); bound-certified runs cannot proceed"
        )));
    }
    Ok(())
}

/// Bound constants for one fitted model at one delay bound.
pub fn constants_for_model(
    rx: &Resolved,
    lc: &LoopConstants,
    model: &GpModel,
    delta_bar: f64,
) -> Result<BoundConstants> {
    let eta = compute_eta_bound(
        model,
        &rx.bound_params,
        &lc.l_f_per_dim,
        rx.grid_step,
        rx.lipschitz_safety,
    )?;
    constants_for_eta(rx, lc, eta, delta_bar)
}

fn constants_for_eta(
    rx: &Resolved,
    lc: &LoopConstants,
    eta: EtaBound,
    delta_bar: f64,
) -> Result<BoundConstants> {
    bound_constants(
        &lc.a,
        &lc.b,
        &lc.p,
        &lc.q,
        &rx.loop_config.gains,
        lc.l_f,
        eta,
        &rx.loop_config.reference,
        rx.loop_config.plant.domain(),
        delta_bar,
    )
}

fn empty_model(rx: &Resolved) -> Result<GpModel> {
    GpModel::new(
        rx.kernel,
        rx.loop_config.plant.domain().clone(),
        rx.noise_std.clone(),
    )
}

fn rep_model(rx: &Resolved, n0: usize, rep: usize) -> Result<GpModel> {
    fit_initial_model(
        rx.kernel,
        &rx.loop_config.plant,
        n0,
        &rx.noise_std,
        rx.config.seed,
        rep as u64,
    )
}

/// One run's record plus its trace when it is the repetition kept for the
/// error-vs-time series.
type RunOutcome = (RunRecord, Option<SimTrace>);

fn record_from(trace: &SimTrace, rep: usize, seed: u64) -> RunRecord {
    RunRecord {
        rep,
        seed,
        max_error: trace.max_error(),
        evaluated: trace.evaluated_cycles(),
        selected: trace.selected_updates(),
    }
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn slug(value: f64) -> String {
    format!("{value:e}").replace(['+', '.'], "_")
}

/// Fixed data sets, no model updates: sweep constant computation delays and
/// compare against the no-model baseline.
pub fn run_delay_sweep(rx: &Resolved, out: Option<&Path>) -> Result<ResultTable> {
    let ds = rx.config.delay_sweep.as_ref().ok_or_else(|| {
        Error::Config("delay-sweep configuration missing".to_string())
    })?;
    let reps = rx.config.reps;
    let n0 = rx.config.data.n0;

    struct Item {
        label: &'static str,
        delta_bar: f64,
        rep: usize,
    }
    let mut items = Vec::new();
    for &delta_bar in &ds.delta_bars {
        for rep in 0..reps {
            items.push(Item {
                label: "gp",
                delta_bar,
                rep,
            });
        }
    }
    if ds.include_baseline {
        for rep in 0..reps {
            // The baseline never queries the model, so its committed
            // compensation stays zero and the delay value is immaterial.
            items.push(Item {
                label: "baseline",
                delta_bar: 0.1,
                rep,
            });
        }
    }

    let results = par::map(items.len(), |i| -> Result<RunOutcome> {
        let item = &items[i];
        let model = if item.label == "baseline" {
            empty_model(rx)?
        } else {
            rep_model(rx, n0, item.rep)?
        };
        let delay = DelayModel::Constant {
            delta_bar: item.delta_bar,
        };
        let seed = derive_seed(rx.config.seed, item.rep as u64, SALT_RUN);
        let trace = run(&rx.loop_config, &model, &delay, None, seed)?;
        let rec = record_from(&trace, item.rep, seed);
        let keep = (item.rep == 0).then_some(trace);
        Ok((rec, keep))
    });

    let mut table = ResultTable::new("delta_bar");
    let mut cursor = 0;
    for &delta_bar in &ds.delta_bars {
        let mut row = SweepRow {
            label: "gp".to_string(),
            sweep_value: delta_bar,
            runs: Vec::with_capacity(reps),
        };
        for _ in 0..reps {
            let (rec, trace) = match &results[cursor] {
                Ok(v) => v,
                Err(e) => return Err(Error::Config(e.to_string())),
            };
            if let (Some(trace), Some(dir)) = (trace, out) {
                ensure_dir(dir)?;
                write_error_series(
                    trace,
                    &dir.join(format!("error_vs_time_delay_{}.csv", slug(delta_bar))),
                )?;
            }
            row.runs.push(rec.clone());
            cursor += 1;
        }
        table.rows.push(row);
    }
    if ds.include_baseline {
        let mut row = SweepRow {
            label: "baseline".to_string(),
            sweep_value: 0.0,
            runs: Vec::with_capacity(reps),
        };
        for _ in 0..reps {
            let (rec, trace) = match &results[cursor] {
                Ok(v) => v,
                Err(e) => return Err(Error::Config(e.to_string())),
            };
            if let (Some(trace), Some(dir)) = (trace, out) {
                ensure_dir(dir)?;
                write_error_series(trace, &dir.join("error_vs_time_baseline.csv"))?;
            }
            row.runs.push(rec.clone());
            cursor += 1;
        }
        table.rows.push(row);
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        table.write_csv(&dir.join("max_error_vs_delay.csv"))?;
    }
    Ok(table)
}

/// Accuracy-delay tradeoff: per-size fresh data sets with the delay growing
/// linearly in the training-set size.
pub fn run_dataset_sweep(rx: &Resolved, out: Option<&Path>) -> Result<ResultTable> {
    let ds = rx.config.dataset_sweep.as_ref().ok_or_else(|| {
        Error::Config("dataset-sweep configuration missing".to_string())
    })?;
    let reps = rx.config.reps;
    let pairs: Vec<(usize, usize)> = ds
        .n0_values
        .iter()
        .flat_map(|&n0| (0..reps).map(move |rep| (n0, rep)))
        .collect();

    let results = par::map(pairs.len(), |i| -> Result<RunRecord> {
        let (n0, rep) = pairs[i];
        let model = rep_model(rx, n0, rep)?;
        let delay = if ds.c == 0.0 {
            // Delay-free reference case at desk scale: one integrator step.
            DelayModel::Constant {
                delta_bar: rx.loop_config.dt,
            }
        } else {
            DelayModel::LinearInN { c: ds.c, cap: None }
        };
        let seed = derive_seed(rx.config.seed, rep as u64, SALT_RUN);
        let trace = run(&rx.loop_config, &model, &delay, None, seed)?;
        Ok(record_from(&trace, rep, seed))
    });

    let mut table = ResultTable::new("n0");
    let mut cursor = 0;
    for &n0 in &ds.n0_values {
        let mut row = SweepRow {
            label: "gp".to_string(),
            sweep_value: n0 as f64,
            runs: Vec::with_capacity(reps),
        };
        for _ in 0..reps {
            match &results[cursor] {
                Ok(rec) => row.runs.push(rec.clone()),
                Err(e) => return Err(Error::Config(e.to_string())),
            }
            cursor += 1;
        }
        table.rows.push(row);
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        table.write_csv(&dir.join("max_error_vs_n0.csv"))?;
    }
    Ok(table)
}

/// Event-triggered online learning at the minimal admissible bound, swept
/// over delay bounds, with an optional offline comparison run.
pub fn run_online_trigger(rx: &Resolved, out: Option<&Path>) -> Result<ResultTable> {
    let oc = rx.config.online.as_ref().ok_or_else(|| {
        Error::Config("online-trigger configuration missing".to_string())
    })?;
    let reps = rx.config.reps;
    let n0 = rx.config.data.n0;
    let capacity = rx.config.data.capacity;
    let lc = loop_constants(rx)?;

    // Reject inadmissible delay bounds before running anything.
    for &delta_bar in &oc.delta_bars {
        check_delay_hypothesis(delta_bar, lc.l_f)?;
    }

    // One repetition: shared initial model and eta bound, one run per delay.
    let per_rep = par::map(reps, |rep| -> Result<(Vec<RunOutcome>, Option<RunOutcome>)> {
        let model = rep_model(rx, n0, rep)?;
        let eta = compute_eta_bound(
            &model,
            &rx.bound_params,
            &lc.l_f_per_dim,
            rx.grid_step,
            rx.lipschitz_safety,
        )?;
        let seed = derive_seed(rx.config.seed, rep as u64, SALT_RUN);
        let mut online_results = Vec::with_capacity(oc.delta_bars.len());
        for &delta_bar in &oc.delta_bars {
            let bc = constants_for_eta(rx, &lc, eta.clone(), delta_bar)?;
            let policy = match oc.e_bar {
                None => TriggerPolicy::minimal(bc, DeletionStrategy::OldestFirst, capacity)?,
                Some(e) => TriggerPolicy::new(e, bc, DeletionStrategy::OldestFirst, capacity)?,
            };
            let c = delta_bar / (capacity as f64 * capacity as f64);
            let delay = DelayModel::QuadraticInN {
                c,
                cap: Some(delta_bar),
            };
            let trace = run(&rx.loop_config, &model, &delay, Some(&policy), seed)?;
            let rec = record_from(&trace, rep, seed);
            online_results.push((rec, (rep == 0).then_some(trace)));
        }
        let offline = match oc.offline_comparison_delta {
            Some(d) => {
                let delay = DelayModel::Constant { delta_bar: d };
                let trace = run(&rx.loop_config, &model, &delay, None, seed)?;
                let rec = record_from(&trace, rep, seed);
                Some((rec, (rep == 0).then_some(trace)))
            }
            None => None,
        };
        Ok((online_results, offline))
    });

    let mut table = ResultTable::new("delta_bar");
    for (di, &delta_bar) in oc.delta_bars.iter().enumerate() {
        let mut row = SweepRow {
            label: "online".to_string(),
            sweep_value: delta_bar,
            runs: Vec::with_capacity(reps),
        };
        for rep_result in &per_rep {
            match rep_result {
                Ok((online, _)) => {
                    let (rec, trace) = &online[di];
                    if let (Some(trace), Some(dir)) = (trace, out) {
                        ensure_dir(dir)?;
                        write_error_series(
                            trace,
                            &dir.join(format!("error_vs_time_online_{}.csv", slug(delta_bar))),
                        )?;
                    }
                    row.runs.push(rec.clone());
                }
                Err(e) => return Err(Error::Config(e.to_string())),
            }
        }
        table.rows.push(row);
    }
    if let Some(offline_delta) = oc.offline_comparison_delta {
        let mut row = SweepRow {
            label: "offline".to_string(),
            sweep_value: offline_delta,
            runs: Vec::with_capacity(reps),
        };
        for rep_result in &per_rep {
            match rep_result {
                Ok((_, Some((rec, trace)))) => {
                    if let (Some(trace), Some(dir)) = (trace, out) {
                        ensure_dir(dir)?;
                        write_error_series(trace, &dir.join("error_vs_time_offline.csv"))?;
                    }
                    row.runs.push(rec.clone());
                }
                Ok((_, None)) => unreachable!("offline comparison requested"),
                Err(e) => return Err(Error::Config(e.to_string())),
            }
        }
        table.rows.push(row);
    }

    if let Some(dir) = out {
        ensure_dir(dir)?;
        table.write_csv(&dir.join("max_error_vs_delay_online.csv"))?;
        table.write_counts_csv(&dir.join("trigger_counts.csv"))?;
        if let Some(offline_delta) = oc.offline_comparison_delta {
            // Aggregate against the extra delay caused by online updates.
            let mut shifted = ResultTable::new("delta_tilde");
            for row in table.rows.iter().filter(|r| r.label == "online") {
                shifted.rows.push(SweepRow {
                    label: row.label.clone(),
                    sweep_value: row.sweep_value - offline_delta,
                    runs: row.runs.clone(),
                });
            }
            shifted.write_csv(&dir.join("max_error_vs_delta_tilde.csv"))?;
        }
    }
    Ok(table)
}

/// Full tradeoff report for one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffRunReport {
    pub xi: f64,
    pub chi: f64,
    pub l_f: f64,
    pub f_d: f64,
    pub eta_sup: f64,
    pub eta_inf: f64,
    pub entries: Vec<TradeoffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffEntry {
    pub f_const: f64,
    /// Offline bound at `delta_bar_1` (shared `F`).
    pub e_bar_offline: f64,
    /// Minimal admissible online bound at `delta_bar_2`.
    pub e_bar_online: f64,
    /// `e_bar_offline <= e_bar_online` by direct evaluation.
    pub direct_comparison: bool,
    pub certificate: TradeoffReport,
}

/// Evaluate the offline-vs-online certificate for each configured
/// `delta_bar_2`, using the repetition-0 initial model.
pub fn run_tradeoff_report(rx: &Resolved, out: Option<&Path>) -> Result<TradeoffRunReport> {
    let tc = rx.config.tradeoff.as_ref().ok_or_else(|| {
        Error::Config("tradeoff configuration missing".to_string())
    })?;
    let lc = loop_constants(rx)?;
    let model = rep_model(rx, rx.config.data.n0, 0)?;
    let eta = compute_eta_bound(
        &model,
        &rx.bound_params,
        &lc.l_f_per_dim,
        rx.grid_step,
        rx.lipschitz_safety,
    )?;

    let mut entries = Vec::with_capacity(tc.delta_bar_2.len());
    let mut shared = None;
    for &d2 in &tc.delta_bar_2 {
        let bc = constants_for_eta(rx, &lc, eta.clone(), d2)?;
        let ti = TradeoffInputs {
            delta_bar_1: tc.delta_bar_1,
            delta_bar_2: d2,
            eta_sup: eta.eta_sup,
            eta_inf: eta.eta_inf,
            bc: bc.clone(),
        };
        let (_, certificate) = offline_beats_online(&ti)?;
        let mut bc_offline = bc.clone();
        bc_offline.delta_bar = tc.delta_bar_1;
        let e_bar_offline = tracking_bound_offline(&bc_offline);
        let e_bar_online = min_error_bound(&bc)?;
        shared.get_or_insert((bc.xi, bc.chi, bc.l_f, bc.f_d));
        entries.push(TradeoffEntry {
            f_const: bc.f_const,
            e_bar_offline,
            e_bar_online,
            direct_comparison: e_bar_offline <= e_bar_online,
            certificate,
        });
    }
    let (xi, chi, l_f, f_d) = shared.expect("at least one delta_bar_2");
    let report = TradeoffRunReport {
        xi,
        chi,
        l_f,
        f_d,
        eta_sup: eta.eta_sup,
        eta_inf: eta.eta_inf,
        entries,
    };
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        fs::write(dir.join("tradeoff_report.json"), json)?;
    }
    Ok(report)
}
