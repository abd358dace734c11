//! End-to-end experiment execution: plan, acquire, estimate, report.

use std::time::Instant;

use shadow_core::rng::{derive_seed, stream};
use shadow_core::{
    acquire, default_shots, median_of_means, phase2, phase2_variance_bound, snapshot_from_record,
    CopyCounter, MeasurementRecord, MoMPlan, Observable, QuantumState, RecordFile, Scheme,
};

use crate::config::{spec_label, ExperimentConfig, Mode, Overrides};
use crate::report::{
    dense_snapshot_scalars, phase2_workspace_scalars, record_stored_scalars, ObservableReport,
    RunReport, Timing, Totals, Versions,
};
use crate::CliError;

pub struct RunOutput {
    pub report: RunReport,
    pub record_file: RecordFile,
}

/// Budget for the experiment: planner output with config overrides applied.
pub fn plan_for(cfg: &ExperimentConfig, observables: &[Observable]) -> Result<MoMPlan, CliError> {
    let var_bound = observables
        .iter()
        .map(|o| phase2_variance_bound(o, cfg.scheme))
        .fold(0.0f64, f64::max);
    let mut plan = shadow_core::plan(cfg.epsilon, cfg.delta, observables.len(), var_bound)
        .map_err(CliError::config)?;
    apply_overrides(&mut plan, &cfg.overrides)?;
    Ok(plan)
}

fn apply_overrides(plan: &mut MoMPlan, ov: &Overrides) -> Result<(), CliError> {
    if let Some(k) = ov.groups {
        if k == 0 {
            return Err(CliError::config("groups override must be at least 1"));
        }
        plan.groups = k;
    }
    if let Some(n) = ov.records {
        if n == 0 {
            return Err(CliError::config("records override must be at least 1"));
        }
        plan.records = n;
    }
    if let Some(m) = ov.shots {
        if m == 0 {
            return Err(CliError::config("shots override must be at least 1"));
        }
        plan.shots = Some(m);
    }
    // keep N a multiple of K so the median groups stay equal-sized
    plan.records = plan.records.max(plan.groups).div_ceil(plan.groups) * plan.groups;
    Ok(())
}

/// Phase 1: consume copies, return the persistable record archive.
pub fn acquire_records(
    state: &QuantumState,
    scheme: Scheme,
    count: usize,
    seed: u64,
) -> Result<RecordFile, CliError> {
    let counter = CopyCounter::new();
    let mut rng = stream(seed, "acquire", 0);
    let records = acquire(state, scheme, count, &counter, &mut rng)?;
    Ok(RecordFile {
        scheme,
        n: state.n(),
        records,
        copies_consumed: counter.count(),
        seed,
    })
}

struct EstimateOutcome {
    observables: Vec<ObservableReport>,
    phase2_shots: u64,
    workspace_scalars: u64,
}

fn estimate_stage(
    cfg: &ExperimentConfig,
    state: &QuantumState,
    observables: &[Observable],
    records: &[MeasurementRecord],
    plan: &MoMPlan,
    seed: u64,
    threads: usize,
) -> Result<EstimateOutcome, CliError> {
    let (values, shot_counts, shots_per_record) = match cfg.mode {
        Mode::Baseline => baseline_values(cfg, observables, records)?,
        Mode::Qcqc => qcqc_values(cfg, observables, records, plan, seed, threads)?,
    };
    let mut reports = Vec::with_capacity(observables.len());
    for (j, obs) in observables.iter().enumerate() {
        let mom = median_of_means(&values[j], plan.groups)?;
        // estimates of physical observables cannot leave the spectrum, so
        // the report clamps; group means are kept raw for diagnostics
        let estimate = obs.clamp_to_range(mom.estimate);
        let exact = obs.expectation(state).ok();
        reports.push(ObservableReport {
            label: spec_label(&cfg.observables[j]),
            estimate,
            exact,
            abs_error: exact.map(|e| (estimate - e).abs()),
            shots_per_record: shots_per_record[j],
            empirical_variance: mom.empirical_variance,
            group_means: mom.group_means,
        });
    }
    let workspace_scalars = match cfg.mode {
        Mode::Baseline => (observables.len() as u64 + 1) * dense_snapshot_scalars(cfg.n),
        Mode::Qcqc => cfg
            .observables
            .iter()
            .zip(observables)
            .map(|(spec, obs)| {
                phase2_workspace_scalars(cfg.scheme, cfg.n, spec, obs.locality())
            })
            .max()
            .unwrap_or(0),
    };
    Ok(EstimateOutcome {
        observables: reports,
        phase2_shots: shot_counts,
        workspace_scalars,
    })
}

type ValueTable = (Vec<Vec<f64>>, u64, Vec<u64>);

/// Dense-trace pipeline: one snapshot matrix per record, contracted
/// against each observable matrix. Deliberately quadratic in the state
/// dimension; this is the cost the record-replay pipeline avoids.
fn baseline_values(
    cfg: &ExperimentConfig,
    observables: &[Observable],
    records: &[MeasurementRecord],
) -> Result<ValueTable, CliError> {
    let cap = cfg.dense_cap;
    let obs_mats = observables
        .iter()
        .map(|o| o.to_matrix(cap))
        .collect::<Result<Vec<_>, _>>()?;
    let mut values = vec![vec![0.0f64; records.len()]; observables.len()];
    for (i, rec) in records.iter().enumerate() {
        let snap = snapshot_from_record(rec)?.to_matrix(cap)?;
        for (j, om) in obs_mats.iter().enumerate() {
            values[j][i] = frobenius_trace(&snap, om);
        }
    }
    Ok((values, 0, vec![0; observables.len()]))
}

pub use shadow_core::frobenius_trace;

fn qcqc_values(
    cfg: &ExperimentConfig,
    observables: &[Observable],
    records: &[MeasurementRecord],
    plan: &MoMPlan,
    seed: u64,
    threads: usize,
) -> Result<ValueTable, CliError> {
    let shots_per_record: Vec<u64> = observables
        .iter()
        .map(|o| plan.shots.unwrap_or_else(|| default_shots(cfg.scheme, cfg.n, o)))
        .collect();
    // one stream per (observable, record), so results do not depend on
    // scheduling or worker count
    let eval_one = |j: usize| -> Result<(Vec<f64>, u64), shadow_core::Error> {
        let obs_seed = derive_seed(seed, "phase2", j as u64);
        let mut column = Vec::with_capacity(records.len());
        let mut shots = 0u64;
        for (i, rec) in records.iter().enumerate() {
            let mut rng = stream(obs_seed, "record", i as u64);
            let ev = phase2(rec, &observables[j], shots_per_record[j], &mut rng)?;
            column.push(ev.value);
            shots += ev.shots;
        }
        Ok((column, shots))
    };
    let count = observables.len();
    let workers = threads.clamp(1, count.max(1));
    let mut slots: Vec<Option<(Vec<f64>, u64)>> = (0..count).map(|_| None).collect();
    if workers <= 1 {
        for (j, slot) in slots.iter_mut().enumerate() {
            *slot = Some(eval_one(j)?);
        }
    } else {
        let gathered: Vec<(usize, Result<(Vec<f64>, u64), shadow_core::Error>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let eval_one = &eval_one;
                        scope.spawn(move || {
                            (w..count)
                                .step_by(workers)
                                .map(|j| (j, eval_one(j)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("phase-2 worker panicked"))
                    .collect()
            });
        for (j, res) in gathered {
            slots[j] = Some(res?);
        }
    }
    let mut values = Vec::with_capacity(observables.len());
    let mut total_shots = 0u64;
    for slot in slots {
        let (column, shots) = slot.expect("every observable evaluated");
        values.push(column);
        total_shots += shots;
    }
    Ok((values, total_shots, shots_per_record))
}

/// Full pipeline for one config and seed.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    seed: u64,
    threads: usize,
) -> Result<RunOutput, CliError> {
    let t_total = Instant::now();
    let (state, observables) = cfg.materialize()?;
    let plan = plan_for(cfg, &observables)?;
    let t_acquire = Instant::now();
    let record_file = acquire_records(&state, cfg.scheme, plan.records, seed)?;
    let acquire_ms = elapsed_ms(t_acquire);
    let t_estimate = Instant::now();
    let est = estimate_stage(
        cfg,
        &state,
        &observables,
        &record_file.records,
        &plan,
        seed,
        threads,
    )?;
    let estimate_ms = elapsed_ms(t_estimate);
    let report = assemble_report(
        cfg,
        seed,
        plan,
        &record_file,
        record_file.records.len(),
        est,
        acquire_ms,
        estimate_ms,
        elapsed_ms(t_total),
    );
    Ok(RunOutput {
        report,
        record_file,
    })
}

/// Phase 2 over an existing record archive; consumes zero copies.
pub fn estimate_experiment(
    cfg: &ExperimentConfig,
    file: &RecordFile,
    seed: u64,
    threads: usize,
) -> Result<RunReport, CliError> {
    file.validate().map_err(CliError::config)?;
    if file.scheme != cfg.scheme {
        return Err(CliError::config(format!(
            "record archive was acquired under the {} scheme, config says {}",
            file.scheme, cfg.scheme
        )));
    }
    if file.n != cfg.n {
        return Err(CliError::config(format!(
            "record archive is on {} qubits, config says {}",
            file.n, cfg.n
        )));
    }
    let t_total = Instant::now();
    let (state, observables) = cfg.materialize()?;
    let mut plan = plan_for(cfg, &observables)?;
    // the archive fixes N; a trailing remainder is dropped by the median
    plan.records = file.records.len();
    plan.groups = plan.groups.min(plan.records).max(1);
    let t_estimate = Instant::now();
    let est = estimate_stage(
        cfg,
        &state,
        &observables,
        &file.records,
        &plan,
        seed,
        threads,
    )?;
    let estimate_ms = elapsed_ms(t_estimate);
    Ok(assemble_report(
        cfg,
        seed,
        plan,
        file,
        file.records.len(),
        est,
        0.0,
        estimate_ms,
        elapsed_ms(t_total),
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    cfg: &ExperimentConfig,
    seed: u64,
    plan: MoMPlan,
    file: &RecordFile,
    records: usize,
    est: EstimateOutcome,
    acquire_ms: f64,
    estimate_ms: f64,
    total_ms: f64,
) -> RunReport {
    // echo the effective seed so the config block alone replays the run
    let mut echo = cfg.clone();
    echo.seed = Some(seed);
    let record_scalars: u64 = file.records.iter().map(record_stored_scalars).sum();
    let estimate_table = (records * est.observables.len()) as u64;
    let totals = Totals {
        copies_consumed: file.copies_consumed,
        records,
        phase2_shots: est.phase2_shots,
        record_scalars,
        workspace_scalars: est.workspace_scalars,
        peak_stored_scalars: record_scalars + est.workspace_scalars + estimate_table,
    };
    let per_shot_ns = (est.phase2_shots > 0)
        .then(|| estimate_ms * 1e6 / est.phase2_shots as f64);
    RunReport {
        schema: 1,
        config: echo,
        seed,
        versions: Versions::current(),
        plan,
        observables: est.observables,
        totals,
        timing: Timing {
            acquire_ms,
            estimate_ms,
            total_ms,
            per_shot_ns,
        },
        determinism_hash: String::new(),
    }
    .seal()
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
