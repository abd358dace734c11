//! Cost grid comparing the dense-trace baseline with record replay.
//!
//! For each register size the same acquired records are pushed through
//! both pipelines and the per-observable-per-record cost is timed. The
//! table carries fitted log-log slopes of cost against the state
//! dimension; the baseline contracts d x d matrices, replay stays linear
//! in d, so the slopes should sit roughly two versus one.

use std::hint::black_box;
use std::time::{Duration, Instant};

use shadow_core::rng::{derive_seed, stream};
use shadow_core::{
    default_shots, phase2, snapshot_from_record, Observable, QuantumState, Scheme,
};

use crate::config::Mode;
use crate::report::{dense_snapshot_scalars, record_stored_scalars};
use crate::runner::{acquire_records, frobenius_trace};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct BenchPoint {
    pub n: usize,
    pub d: usize,
    pub scheme: Scheme,
    pub mode: Mode,
    pub records: usize,
    /// Median per-observable-per-record wall cost.
    pub per_pair_ns: f64,
    /// Stored scalars of the per-record object this mode keeps around:
    /// the dense snapshot for baseline, the classical record for replay.
    pub stored_scalars: u64,
    pub copies: u64,
    pub shots: u64,
}

#[derive(Debug, Clone)]
pub struct BenchTable {
    pub points: Vec<BenchPoint>,
    pub slope_baseline: f64,
    pub slope_qcqc: f64,
}

impl BenchTable {
    pub fn slope_gap(&self) -> f64 {
        self.slope_baseline - self.slope_qcqc
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d,scheme,mode,records,per_pair_ns,stored_scalars,copies,shots\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{:.1},{},{},{}\n",
                p.n, p.d, p.scheme, p.mode, p.records, p.per_pair_ns, p.stored_scalars, p.copies,
                p.shots
            ));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::from(
            "   n      d  scheme    mode      per-pair cost     stored scalars  copies    shots\n",
        );
        for p in &self.points {
            out.push_str(&format!(
                "{:>4} {:>6}  {:<8} {:<8} {:>12.1} ns {:>16} {:>7} {:>8}\n",
                p.n, p.d, p.scheme.to_string(), p.mode.to_string(), p.per_pair_ns,
                p.stored_scalars, p.copies, p.shots
            ));
        }
        out.push_str(&format!(
            "\nlog-log slope of cost vs d: baseline {:.3}, qcqc {:.3}, gap {:.3}\n",
            self.slope_baseline,
            self.slope_qcqc,
            self.slope_gap()
        ));
        out
    }
}

/// Least-squares slope of y against x on log-log axes.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a slope");
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Times one closure: untimed warm-up call, then batches grown until the
/// measurement window is long enough to trust. Returns ns per call.
fn time_op<F: FnMut()>(mut op: F) -> f64 {
    op();
    let mut reps = 1u64;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            op();
        }
        let elapsed = start.elapsed();
        if elapsed >= Duration::from_micros(200) || reps >= 1 << 22 {
            return elapsed.as_nanos() as f64 / reps as f64;
        }
        reps *= 4;
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    values[(values.len() - 1) / 2]
}

/// What one grid point measures for one scheme.
fn bench_observable(scheme: Scheme, state: &QuantumState) -> Result<Observable, CliError> {
    Ok(match scheme {
        // fidelity with the source state: the projector case
        Scheme::Clifford => Observable::fidelity_with(state)?,
        // local observables are the pauli scheme's domain
        Scheme::Pauli => {
            let mut letters = vec!['I'; state.n()];
            letters[0] = 'X';
            letters[state.n() - 1] = 'Z';
            Observable::pauli_from_str(1.0, &letters.iter().collect::<String>())?
        }
    })
}

/// Runs the cost grid. Register sizes come from `grid`; each point
/// acquires `records` fresh records and times both pipelines on them.
pub fn bench_compare(
    grid: &[usize],
    records: usize,
    scheme: Scheme,
    seed: u64,
    dense_cap: usize,
) -> Result<BenchTable, CliError> {
    if grid.len() < 2 {
        return Err(CliError::config("bench grid needs at least two register sizes"));
    }
    if records == 0 {
        return Err(CliError::config("bench needs at least one record per point"));
    }
    if let Some(&too_big) = grid.iter().find(|&&n| n > dense_cap) {
        return Err(CliError::config(format!(
            "grid point n = {too_big} exceeds the dense cap of {dense_cap}"
        )));
    }
    let mut points = Vec::new();
    let mut base_xy = (Vec::new(), Vec::new());
    let mut qcqc_xy = (Vec::new(), Vec::new());
    for &n in grid {
        let state = QuantumState::ghz(n)?;
        let obs = bench_observable(scheme, &state)?;
        let file = acquire_records(&state, scheme, records, derive_seed(seed, "bench", n as u64))?;
        let d = 1usize << n;

        // baseline: record -> snapshot -> dense matrix -> trace
        let obs_mat = obs.to_matrix(n)?;
        let base_costs: Vec<f64> = file
            .records
            .iter()
            .map(|rec| {
                time_op(|| {
                    let snap = snapshot_from_record(rec).expect("valid record");
                    let sm = snap.to_matrix(n).expect("within cap");
                    black_box(frobenius_trace(&sm, &obs_mat));
                })
            })
            .collect();
        let base_ns = median(base_costs);
        points.push(BenchPoint {
            n,
            d,
            scheme,
            mode: Mode::Baseline,
            records,
            per_pair_ns: base_ns,
            stored_scalars: dense_snapshot_scalars(n),
            copies: file.copies_consumed,
            shots: 0,
        });
        base_xy.0.push(d as f64);
        base_xy.1.push(base_ns);

        // replay: record -> re-prepared state -> m emulated shots
        let m = default_shots(scheme, n, &obs);
        let mut rng = stream(seed, "bench-shots", n as u64);
        let qcqc_costs: Vec<f64> = file
            .records
            .iter()
            .map(|rec| {
                time_op(|| {
                    black_box(phase2(rec, &obs, m, &mut rng).expect("valid record").value);
                })
            })
            .collect();
        let qcqc_ns = median(qcqc_costs);
        points.push(BenchPoint {
            n,
            d,
            scheme,
            mode: Mode::Qcqc,
            records,
            per_pair_ns: qcqc_ns,
            stored_scalars: record_stored_scalars(&file.records[0]),
            copies: file.copies_consumed,
            shots: records as u64 * m,
        });
        qcqc_xy.0.push(d as f64);
        qcqc_xy.1.push(qcqc_ns);
    }
    Ok(BenchTable {
        points,
        slope_baseline: fit_loglog(&base_xy.0, &base_xy.1),
        slope_qcqc: fit_loglog(&qcqc_xy.0, &qcqc_xy.1),
    })
}
