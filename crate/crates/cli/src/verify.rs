//! Monte Carlo verification suites behind `cst verify`.
//!
//! Every suite runs on a fixed derived seed, so a pass is reproducible.
//! Sample sizes are parameters; the CLI uses the documented defaults
//! below, the acceptance tests call the same functions at full size.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use shadow_core::rng::{derive_seed, stream};
use shadow_core::{
    acquire_record, default_shots, measurement_channel, median_of_means, phase2, plan,
    snapshot_from_record, CopyCounter, Observable, QuantumState, RecordFile, Scheme,
};

use crate::bench::fit_loglog;
use crate::report::record_stored_scalars;
use crate::runner::acquire_records;
use crate::CliError;

pub const DEFAULT_CHANNEL_DRAWS: usize = 20_000;
pub const DEFAULT_SNAPSHOT_DRAWS: usize = 20_000;
pub const DEFAULT_QCQC_RECORDS: usize = 2_000;
pub const DEFAULT_VARIANCE_RECORDS: usize = 4_000;
pub const DEFAULT_MOM_TRIALS: usize = 500;

pub const SUITES: [&str; 5] = ["channel", "unbiased", "variance", "mom", "records"];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteOutcome {
    fn new(suite: &str) -> Self {
        SuiteOutcome {
            suite: suite.to_string(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let good = self.checks.iter().filter(|c| c.pass).count();
        let mut out = format!("suite {}: {good}/{} checks passed\n", self.suite, self.checks.len());
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

/// Dispatch by suite name, at the documented default sample sizes.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteOutcome, CliError> {
    match name {
        "channel" => channel_suite(DEFAULT_CHANNEL_DRAWS, seed),
        "unbiased" => unbiased_suite(DEFAULT_SNAPSHOT_DRAWS, DEFAULT_QCQC_RECORDS, seed),
        "variance" => variance_suite(DEFAULT_VARIANCE_RECORDS, seed),
        "mom" => mom_suite(DEFAULT_MOM_TRIALS, seed),
        "records" => records_suite(seed),
        other => Err(CliError::config(format!(
            "unknown suite '{other}' (channel, unbiased, variance, mom, records, all)"
        ))),
    }
}

/// Three states per register size: a GHZ state, a seeded random pure
/// state, and a rank-2 mixture of two random pure states.
pub fn test_states(n: usize, seed: u64) -> Vec<(String, QuantumState)> {
    let mut rng = stream(seed, "verify-states", n as u64);
    let pure = QuantumState::random_pure(n, &mut rng).expect("within cap");
    let a = QuantumState::random_pure(n, &mut rng).expect("within cap");
    let b = QuantumState::random_pure(n, &mut rng).expect("within cap");
    let mixed = QuantumState::mixture(&[(0.6, a), (0.4, b)]).expect("valid mixture");
    vec![
        ("ghz".to_string(), QuantumState::ghz(n).expect("within cap")),
        ("random-pure".to_string(), pure),
        ("rank2-mixed".to_string(), mixed),
    ]
}

fn scheme_tag(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Pauli => "pauli",
        Scheme::Clifford => "clifford",
    }
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Monte Carlo average of the raw post-measurement retraction
/// U^dag |b><b| U against the closed-form depolarizing channel.
pub fn channel_suite(draws: usize, seed: u64) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("channel");
    for scheme in [Scheme::Pauli, Scheme::Clifford] {
        out.checks.extend(channel_scheme_suite(scheme, draws, seed)?.checks);
    }
    Ok(out)
}

/// One scheme's worth of channel-identity checks.
pub fn channel_scheme_suite(
    scheme: Scheme,
    draws: usize,
    seed: u64,
) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("channel");
    let tol = 5.0 / (draws as f64).sqrt();
    for n in 1..=3usize {
        for (idx, (label, state)) in test_states(n, seed).into_iter().enumerate() {
            let d = 1usize << n;
            let counter = CopyCounter::new();
            let mut rng = stream(
                derive_seed(seed, scheme_tag(scheme), (8 * n + idx) as u64),
                "channel",
                0,
            );
            let mut acc = DMatrix::<Complex64>::zeros(d, d);
            for _ in 0..draws {
                let rec = acquire_record(&state, scheme, &counter, &mut rng)?;
                let snap = snapshot_from_record(&rec)?;
                // the channel applied to the debiased snapshot is
                // exactly the raw retraction of this record
                acc += measurement_channel(scheme, &snap.to_matrix(n)?, n);
            }
            let avg = acc.unscale(draws as f64);
            let expected = measurement_channel(scheme, &state.to_density(), n);
            let dev = max_abs_diff(&avg, &expected);
            out.push(
                format!("{} n={n} {label}", scheme_tag(scheme)),
                dev <= tol,
                format!("max entry deviation {dev:.5} (tolerance {tol:.5}, {draws} draws)"),
            );
        }
    }
    Ok(out)
}

/// State/observable pairs exercised by the replay estimator suites.
/// Each scheme gets six pairs, including rank-2 mixed states, and the
/// pauli set spans localities one through three.
pub fn qcqc_pairs(scheme: Scheme, seed: u64) -> Result<Vec<(String, QuantumState, Observable)>, CliError> {
    let mut rng = stream(seed, "verify-pairs", 0);
    let ghz2 = QuantumState::ghz(2)?;
    let ghz3 = QuantumState::ghz(3)?;
    let pure2 = QuantumState::random_pure(2, &mut rng)?;
    let pure3 = QuantumState::random_pure(3, &mut rng)?;
    let mixed2 = rank2_mixture(2, &mut rng)?;
    let mixed3 = rank2_mixture(3, &mut rng)?;
    let h1 = dense_1q();
    let h2 = h1.kronecker(&h1);
    let pairs = match scheme {
        Scheme::Clifford => vec![
            (
                "ghz2 fidelity".to_string(),
                ghz2.clone(),
                Observable::fidelity_with(&ghz2)?,
            ),
            ("ghz2 XX".to_string(), ghz2, Observable::pauli_from_str(1.0, "XX")?),
            ("pure3 XZY".to_string(), pure3, Observable::pauli_from_str(1.0, "XZY")?),
            ("mixed2 ZI".to_string(), mixed2.clone(), Observable::pauli_from_str(1.0, "ZI")?),
            ("pure2 dense q1".to_string(), pure2, Observable::dense(2, vec![1], h1.clone())?),
            (
                "mixed3 ghz overlap".to_string(),
                mixed3,
                Observable::fidelity_with(&ghz3)?,
            ),
        ],
        Scheme::Pauli => vec![
            ("ghz2 XX".to_string(), ghz2.clone(), Observable::pauli_from_str(1.0, "XX")?),
            ("pure2 IZ".to_string(), pure2, Observable::pauli_from_str(1.0, "IZ")?),
            ("mixed2 dense q0".to_string(), mixed2, Observable::dense(2, vec![0], h1.clone())?),
            ("pure3 XIZ".to_string(), pure3, Observable::pauli_from_str(1.0, "XIZ")?),
            ("mixed3 XYZ".to_string(), mixed3, Observable::pauli_from_str(1.0, "XYZ")?),
            ("ghz3 dense q0q2".to_string(), ghz3, Observable::dense(3, vec![0, 2], h2)?),
        ],
    };
    Ok(pairs)
}

fn rank2_mixture<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QuantumState, CliError> {
    let a = QuantumState::random_pure(n, rng)?;
    let b = QuantumState::random_pure(n, rng)?;
    Ok(QuantumState::mixture(&[(0.7, a), (0.3, b)])?)
}

fn dense_1q() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.3, 0.0),
            Complex64::new(0.4, 0.1),
            Complex64::new(0.4, -0.1),
            Complex64::new(-0.2, 0.0),
        ],
    )
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Per-pair replay estimates: one Y per fresh record at default shots.
fn collect_ys(
    state: &QuantumState,
    obs: &Observable,
    scheme: Scheme,
    records: usize,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    let counter = CopyCounter::new();
    let mut rng = stream(seed, "collect", 0);
    let m = default_shots(scheme, state.n(), obs);
    let mut ys = Vec::with_capacity(records);
    for _ in 0..records {
        let rec = acquire_record(state, scheme, &counter, &mut rng)?;
        ys.push(phase2(&rec, obs, m, &mut rng)?.value);
    }
    Ok(ys)
}

/// Two unbiasedness layers: snapshot matrices against the state, and
/// replay estimates against the exact expectation oracle.
pub fn unbiased_suite(
    snapshot_draws: usize,
    qcqc_records: usize,
    seed: u64,
) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("unbiased");
    for scheme in [Scheme::Pauli, Scheme::Clifford] {
        out.checks
            .extend(snapshot_mean_suite(scheme, snapshot_draws, seed)?.checks);
    }
    for scheme in [Scheme::Pauli, Scheme::Clifford] {
        out.checks
            .extend(replay_mean_suite(scheme, qcqc_records, seed)?.checks);
    }
    Ok(out)
}

/// Entrywise snapshot mean against the true density matrix for one scheme.
pub fn snapshot_mean_suite(
    scheme: Scheme,
    snapshot_draws: usize,
    seed: u64,
) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("unbiased");
    for n in 1..=3usize {
        for (idx, (label, state)) in test_states(n, seed).into_iter().enumerate() {
            let d = 1usize << n;
            let counter = CopyCounter::new();
            let mut rng = stream(
                derive_seed(seed, scheme_tag(scheme), (64 + 8 * n + idx) as u64),
                "snapshot",
                0,
            );
            let mut sum = DMatrix::<Complex64>::zeros(d, d);
            let mut sumsq = DMatrix::<f64>::zeros(d, d);
            for _ in 0..snapshot_draws {
                let rec = acquire_record(&state, scheme, &counter, &mut rng)?;
                let sm = snapshot_from_record(&rec)?.to_matrix(n)?;
                for (acc, v) in sum.iter_mut().zip(sm.iter()) {
                    *acc += v;
                }
                for (acc, v) in sumsq.iter_mut().zip(sm.iter()) {
                    *acc += v.norm_sqr();
                }
            }
            let s = snapshot_draws as f64;
            let rho = state.to_density();
            let mut worst = 0.0f64;
            for ((m, q), r) in sum.iter().zip(sumsq.iter()).zip(rho.iter()) {
                let mean = m / s;
                let var = (q / s - mean.norm_sqr()).max(0.0);
                let tol = 5.0 * (var / s).sqrt() + 1e-9;
                worst = worst.max((mean - r).norm() / tol);
            }
            out.push(
                format!("snapshot mean {} n={n} {label}", scheme_tag(scheme)),
                worst <= 1.0,
                format!("worst entry at {worst:.3} of its 5-sigma budget ({snapshot_draws} draws)"),
            );
        }
    }
    Ok(out)
}

/// Replay estimator mean against exact expectations for one scheme.
pub fn replay_mean_suite(
    scheme: Scheme,
    qcqc_records: usize,
    seed: u64,
) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("unbiased");
    for (idx, (label, state, obs)) in qcqc_pairs(scheme, seed)?.into_iter().enumerate() {
        let exact = obs.expectation(&state)?;
        let ys = collect_ys(
            &state,
            &obs,
            scheme,
            qcqc_records,
            derive_seed(seed, scheme_tag(scheme), 1000 + idx as u64),
        )?;
        let (mean, var) = mean_and_var(&ys);
        let tol = 4.0 * (var / ys.len() as f64).sqrt() + 1e-9;
        out.push(
            format!("replay mean {} {label}", scheme_tag(scheme)),
            (mean - exact).abs() <= tol,
            format!(
                "|mean - exact| = {:.4} (tolerance {tol:.4}, exact {exact:.4}, {} records)",
                (mean - exact).abs(),
                ys.len()
            ),
        );
    }
    Ok(out)
}

/// Empirical replay variance against the scheme bounds at default shots:
/// 4 tr(O^2) for clifford, 2 * 4^k * |O|_inf^2 for pauli.
pub fn variance_suite(records: usize, seed: u64) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("variance");
    for scheme in [Scheme::Clifford, Scheme::Pauli] {
        for (idx, (label, state, obs)) in qcqc_pairs(scheme, seed)?.into_iter().enumerate() {
            let bound = match scheme {
                Scheme::Clifford => 4.0 * obs.trace_sq(),
                Scheme::Pauli => {
                    2.0 * 4.0f64.powi(obs.locality() as i32) * obs.inf_norm() * obs.inf_norm()
                }
            };
            let allowed = bound * 1.15;
            let ys = collect_ys(
                &state,
                &obs,
                scheme,
                records,
                derive_seed(seed, scheme_tag(scheme), 2000 + idx as u64),
            )?;
            let (_, var) = mean_and_var(&ys);
            out.push(
                format!("variance {} {label}", scheme_tag(scheme)),
                var <= allowed,
                format!("Var[Y] = {var:.3} vs bound {bound:.3} * 1.15 ({records} records)"),
            );
        }
    }
    Ok(out)
}

/// Synthetic coverage experiment: plan a budget for unit-variance data,
/// then check the median-of-means misses the truth by more than epsilon
/// in at most a delta fraction of trials.
pub fn mom_suite(trials: usize, seed: u64) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("mom");
    let truth = 0.7;
    for (epsilon, delta, observables) in [(0.2, 0.1, 1usize), (0.3, 0.05, 4)] {
        let p = plan(epsilon, delta, observables, 1.0)?;
        let mut rng = stream(seed, "mom", observables as u64);
        let mut failures = 0usize;
        for _ in 0..trials {
            let values: Vec<f64> = (0..p.records)
                .map(|_| truth + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let est = median_of_means(&values, p.groups)?;
            if (est.estimate - truth).abs() > epsilon {
                failures += 1;
            }
        }
        let rate = failures as f64 / trials as f64;
        out.push(
            format!("coverage eps={epsilon} delta={delta} M={observables}"),
            rate <= delta,
            format!("failure rate {rate:.4} over {trials} trials (allowed {delta}, K={} N={})", p.groups, p.records),
        );
    }
    Ok(out)
}

/// Record archive invariants: byte-identical replay, tamper detection,
/// and at-most-quadratic growth of the per-record footprint.
pub fn records_suite(seed: u64) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new("records");
    for scheme in [Scheme::Pauli, Scheme::Clifford] {
        let state = QuantumState::ghz(3)?;
        let a = acquire_records(&state, scheme, 24, derive_seed(seed, scheme_tag(scheme), 0))?;
        let b = acquire_records(&state, scheme, 24, derive_seed(seed, scheme_tag(scheme), 0))?;
        let ja = a.to_json()?;
        let jb = b.to_json()?;
        out.push(
            format!("{} replay", scheme_tag(scheme)),
            ja == jb,
            if ja == jb {
                "24 records, byte-identical archives".to_string()
            } else {
                "archives differ".to_string()
            },
        );
        let parsed = RecordFile::from_json(&ja)?;
        out.push(
            format!("{} roundtrip", scheme_tag(scheme)),
            parsed.to_json()? == ja,
            "parse then serialize reproduces the bytes",
        );
        let mut wrong_n = a.clone();
        wrong_n.n = 5;
        out.push(
            format!("{} register tamper", scheme_tag(scheme)),
            wrong_n.validate().is_err(),
            "validation rejects a changed register size",
        );
        let mut wrong_scheme = a.clone();
        wrong_scheme.scheme = match scheme {
            Scheme::Pauli => Scheme::Clifford,
            Scheme::Clifford => Scheme::Pauli,
        };
        out.push(
            format!("{} scheme tamper", scheme_tag(scheme)),
            wrong_scheme.validate().is_err(),
            "validation rejects a changed scheme tag",
        );
    }
    let mut corrupt = acquire_records(&QuantumState::ghz(2)?, Scheme::Clifford, 1, seed)?;
    if let shadow_core::UnitaryDescription::Clifford { tableau, .. } =
        &mut corrupt.records[0].unitary
    {
        *tableau = format!("zz{}", &tableau[2..]);
    }
    out.push(
        "payload tamper",
        corrupt.validate().is_err(),
        "validation rejects corrupted tableau hex",
    );

    let counter = CopyCounter::new();
    let mut ns = Vec::new();
    let mut clifford_sizes = Vec::new();
    let mut pauli_sizes = Vec::new();
    for n in 2..=10usize {
        let state = QuantumState::ghz(n)?;
        let mut rng = stream(seed, "sizes", n as u64);
        let c = acquire_record(&state, Scheme::Clifford, &counter, &mut rng)?;
        let p = acquire_record(&state, Scheme::Pauli, &counter, &mut rng)?;
        ns.push(n as f64);
        clifford_sizes.push(record_stored_scalars(&c) as f64);
        pauli_sizes.push(record_stored_scalars(&p) as f64);
    }
    let slope_c = fit_loglog(&ns, &clifford_sizes);
    let slope_p = fit_loglog(&ns, &pauli_sizes);
    out.push(
        "clifford record growth",
        slope_c <= 2.05,
        format!("log-log slope {slope_c:.2} over n = 2..10 (at most quadratic)"),
    );
    out.push(
        "pauli record growth",
        slope_p <= 2.05,
        format!("log-log slope {slope_p:.2} over n = 2..10 (at most quadratic)"),
    );
    Ok(out)
}
