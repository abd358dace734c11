//! Median-of-means aggregation and the sample-size planning around it.
//!
//! Planning follows the proof-level constants: K = ceil(2 ln(M/delta))
//! groups and N = ceil((8/eps^2) ln(M/delta) var_bound) records, with N
//! rounded up to a multiple of K. Natural logarithms throughout; the
//! coverage experiment in the tests is what pins that convention down.

use serde::{Deserialize, Serialize};

use crate::ensembles::Scheme;
use crate::error::{Error, Result};
use crate::observable::Observable;

/// Multipliers in the planning formulas, exposed because they come from
/// a proof rather than anything fundamental.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlanConstants {
    /// Factor in front of the record count N.
    pub records: f64,
    /// Factor in front of the group count K.
    pub groups: f64,
}

impl Default for PlanConstants {
    fn default() -> Self {
        PlanConstants {
            records: 8.0,
            groups: 2.0,
        }
    }
}

/// Sampling budget for one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoMPlan {
    /// K, the number of median groups.
    pub groups: usize,
    /// N, total records; always a multiple of `groups`.
    pub records: usize,
    /// Optional phase-2 shot override; None means scheme defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub epsilon: f64,
    pub delta: f64,
    pub var_bound: f64,
}

pub fn plan(epsilon: f64, delta: f64, observables: usize, var_bound: f64) -> Result<MoMPlan> {
    plan_with_constants(epsilon, delta, observables, var_bound, PlanConstants::default())
}

pub fn plan_with_constants(
    epsilon: f64,
    delta: f64,
    observables: usize,
    var_bound: f64,
    constants: PlanConstants,
) -> Result<MoMPlan> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    if observables < 1 {
        return Err(Error::InvalidInput("need at least one observable".into()));
    }
    if !(var_bound > 0.0 && var_bound.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "variance bound must be > 0, got {var_bound}"
        )));
    }
    let log_term = (observables as f64 / delta).ln();
    let groups = ((constants.groups * log_term).ceil() as usize).max(1);
    let raw = (constants.records / (epsilon * epsilon) * log_term * var_bound).ceil() as usize;
    let records = raw.max(groups).div_ceil(groups) * groups;
    Ok(MoMPlan {
        groups,
        records,
        shots: None,
        epsilon,
        delta,
        var_bound,
    })
}

/// Budget from an observable-class promise: every observable has rank at
/// most r and operator norm at most lambda, so tr(O^2) <= r lambda^2 and
/// the per-record variance stays under 4 r lambda^2.
pub fn corollary_budget(
    rank: usize,
    lambda: f64,
    observables: usize,
    epsilon: f64,
    delta: f64,
) -> Result<MoMPlan> {
    if rank < 1 {
        return Err(Error::InvalidInput("rank must be >= 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "operator-norm bound must be > 0, got {lambda}"
        )));
    }
    plan(epsilon, delta, observables, 4.0 * rank as f64 * lambda * lambda)
}

/// Aggregated estimate with the diagnostics reports carry around.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoMEstimate {
    pub estimate: f64,
    pub group_means: Vec<f64>,
    pub empirical_variance: f64,
    /// Values actually used (trailing remainder is discarded).
    pub used: usize,
}

/// Splits `values` in order into `groups` contiguous equal slices and
/// returns the lower median of the slice means. A trailing remainder is
/// dropped with a warning so replays stay exact.
pub fn median_of_means(values: &[f64], groups: usize) -> Result<MoMEstimate> {
    if groups == 0 {
        return Err(Error::InvalidInput("need at least one group".into()));
    }
    if values.len() < groups {
        return Err(Error::InvalidInput(format!(
            "{} values cannot fill {} groups",
            values.len(),
            groups
        )));
    }
    let per_group = values.len() / groups;
    let used = per_group * groups;
    if used < values.len() {
        log::warn!(
            "median_of_means: discarding {} trailing values ({} into {} groups)",
            values.len() - used,
            values.len(),
            groups
        );
    }
    let group_means: Vec<f64> = values[..used]
        .chunks_exact(per_group)
        .map(|chunk| chunk.iter().sum::<f64>() / per_group as f64)
        .collect();
    let mut sorted = group_means.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("estimator values must be finite"));
    // lower median keeps the estimate equal to an achieved group mean
    let estimate = sorted[(groups - 1) / 2];

    let mean = values[..used].iter().sum::<f64>() / used as f64;
    let empirical_variance = if used > 1 {
        values[..used].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (used - 1) as f64
    } else {
        0.0
    };
    Ok(MoMEstimate {
        estimate,
        group_means,
        empirical_variance,
        used,
    })
}

/// Worst-case single-snapshot norm of the baseline estimator.
pub fn shadow_norm_bound(obs: &Observable, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Pauli => 2f64.powi(obs.locality() as i32) * obs.inf_norm(),
        Scheme::Clifford => (3.0 * obs.trace_sq()).sqrt(),
    }
}

/// Per-record variance bound of the phase-2 estimator variable Y at the
/// default shot counts.
pub fn phase2_variance_bound(obs: &Observable, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Clifford => 4.0 * obs.trace_sq(),
        Scheme::Pauli => {
            let b = obs.inf_norm();
            2.0 * 4f64.powi(obs.locality() as i32) * b * b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::QuantumState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn plan_matches_closed_form_example() {
        // M=1, delta=1/e makes the log term exactly 1
        let p = plan(1.0, 1.0 / std::f64::consts::E, 1, 1.0).unwrap();
        assert_eq!(p.groups, 2);
        assert_eq!(p.records, 8);
    }

    #[test]
    fn plan_rounds_up_to_group_multiple() {
        let p = plan(0.5, 0.2, 3, 2.0).unwrap();
        assert_eq!(p.records % p.groups, 0);
        assert!(p.records >= p.groups);
        // K = ceil(2 ln 15) = ceil(5.416) = 6
        assert_eq!(p.groups, 6);
        // N raw = ceil(32 * ln 15 * 2) = ceil(173.3) = 174, already 29*6
        assert_eq!(p.records, 174);
        // a raw count one above a multiple must round up, not truncate
        let p = plan(1.0, 1.0 / std::f64::consts::E, 1, 1.1).unwrap();
        assert_eq!(p.groups, 2);
        // raw = ceil(8 * 1.1) = 9 -> 10
        assert_eq!(p.records, 10);
    }

    #[test]
    fn plan_rejects_bad_parameters() {
        assert!(plan(0.0, 0.1, 1, 1.0).is_err());
        assert!(plan(0.1, 0.0, 1, 1.0).is_err());
        assert!(plan(0.1, 1.0, 1, 1.0).is_err());
        assert!(plan(0.1, 0.1, 0, 1.0).is_err());
        assert!(plan(0.1, 0.1, 1, 0.0).is_err());
    }

    #[test]
    fn median_examples() {
        let e = median_of_means(&[1.0, 2.0, 100.0], 3).unwrap();
        assert_eq!(e.estimate, 2.0);
        let e = median_of_means(&[5.0; 17], 4).unwrap();
        assert_eq!(e.estimate, 5.0);
        // even group count takes the lower median
        let e = median_of_means(&[0.0, 2.0, 4.0, 6.0], 2).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.group_means, vec![1.0, 5.0]);
    }

    #[test]
    fn single_group_is_the_mean() {
        let v = [3.0, 4.0, 8.0, 1.0];
        let e = median_of_means(&v, 1).unwrap();
        assert_eq!(e.estimate, 4.0);
    }

    #[test]
    fn remainder_is_discarded() {
        // 7 values into 2 groups of 3; the trailing 100 never enters
        let e = median_of_means(&[1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 100.0], 2).unwrap();
        assert_eq!(e.used, 6);
        assert_eq!(e.estimate, 1.0);
    }

    #[test]
    fn mom_rejects_more_groups_than_values() {
        assert!(median_of_means(&[1.0, 2.0], 3).is_err());
        assert!(median_of_means(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn shadow_norm_trivia() {
        let z = Observable::pauli_from_str(1.0, "Z").unwrap();
        assert_eq!(shadow_norm_bound(&z, Scheme::Pauli), 2.0);
        let proj = Observable::fidelity_with(&QuantumState::ghz(2).unwrap()).unwrap();
        assert!((shadow_norm_bound(&proj, Scheme::Clifford) - 3f64.sqrt()).abs() < 1e-12);
        let half = Observable::pauli_from_str(0.5, "XZI").unwrap();
        assert_eq!(shadow_norm_bound(&half, Scheme::Pauli), 2.0);
    }

    #[test]
    fn corollary_budget_examples() {
        let p = corollary_budget(1, 1.0, 1, 0.5, 0.1).unwrap();
        assert_eq!(p.var_bound, 4.0);
        let p = corollary_budget(2, 0.5, 1, 0.5, 0.1).unwrap();
        assert_eq!(p.var_bound, 2.0);
        let lo = corollary_budget(1, 0.5, 2, 0.5, 0.1).unwrap();
        let hi = corollary_budget(3, 0.5, 2, 0.5, 0.1).unwrap();
        assert!(hi.records >= lo.records);
        assert!(corollary_budget(0, 1.0, 1, 0.5, 0.1).is_err());
    }

    fn coverage_run(epsilon: f64, delta: f64, observables: usize) -> f64 {
        let truth = 0.7;
        let p = plan(epsilon, delta, observables, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let trials = 500;
        let mut failures = 0usize;
        for _ in 0..trials {
            let values: Vec<f64> = (0..p.records)
                .map(|_| truth + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let e = median_of_means(&values, p.groups).unwrap();
            if (e.estimate - truth).abs() > epsilon {
                failures += 1;
            }
        }
        failures as f64 / trials as f64
    }

    #[test]
    fn coverage_holds_at_both_parameter_points() {
        // unit-variance synthetic data; the planned (K, N) must keep the
        // miss rate at or below delta
        assert!(coverage_run(0.2, 0.1, 1) <= 0.1);
        assert!(coverage_run(0.3, 0.05, 4) <= 0.05);
    }

    #[test]
    fn clifford_shadow_norm_bounds_baseline_variance() {
        use crate::baseline::snapshot_from_record;
        use crate::ensembles::{acquire_record, CopyCounter};
        let state = QuantumState::ghz(2).unwrap();
        let obs = Observable::fidelity_with(&state).unwrap();
        let counter = CopyCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(405);
        let trials = 20_000;
        let mut vals = Vec::with_capacity(trials);
        for _ in 0..trials {
            let rec = acquire_record(&state, Scheme::Clifford, &counter, &mut rng).unwrap();
            vals.push(snapshot_from_record(&rec).unwrap().estimate(&obs).unwrap());
        }
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials - 1) as f64;
        let bound = shadow_norm_bound(&obs, Scheme::Clifford).powi(2);
        assert!(
            var <= bound * 1.15 + obs.trace().powi(2) * 0.1,
            "empirical {var} vs bound {bound}"
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn plan_shape_is_always_valid(
                epsilon in 0.05f64..2.0,
                delta in 0.01f64..0.5,
                observables in 1usize..50,
                var_bound in 0.1f64..100.0,
            ) {
                let p = plan(epsilon, delta, observables, var_bound).unwrap();
                prop_assert!(p.groups >= 1);
                prop_assert!(p.records >= p.groups);
                prop_assert_eq!(p.records % p.groups, 0);
            }

            #[test]
            fn mom_shifts_with_constants(
                raw in prop::collection::vec(-50i32..50, 4..60),
                shift in -50i32..50,
                groups in 1usize..5,
            ) {
                prop_assume!(raw.len() >= groups);
                // integer-valued doubles keep the arithmetic exact
                let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
                let shifted: Vec<f64> = raw.iter().map(|&v| (v + shift) as f64).collect();
                let base = median_of_means(&values, groups).unwrap().estimate;
                let moved = median_of_means(&shifted, groups).unwrap().estimate;
                prop_assert!((moved - (base + shift as f64)).abs() < 1e-9);
            }

            #[test]
            fn mom_ignores_order_within_groups(
                raw in prop::collection::vec(-50i32..50, 6..40),
                groups in 1usize..4,
                seed in 0u64..1000,
            ) {
                prop_assume!(raw.len() >= groups);
                let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
                let per_group = values.len() / groups;
                let mut shuffled = values.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for g in 0..groups {
                    let slice = &mut shuffled[g * per_group..(g + 1) * per_group];
                    for i in (1..slice.len()).rev() {
                        slice.swap(i, rng.random_range(0..=i));
                    }
                }
                let a = median_of_means(&values, groups).unwrap().estimate;
                let b = median_of_means(&shuffled, groups).unwrap().estimate;
                prop_assert_eq!(a, b);
            }
        }
    }
}
