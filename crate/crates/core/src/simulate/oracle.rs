use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimEstimate;
use crate::error::{domain, Error, Result};
use crate::structure::RedundancyStructure;

/// Largest component count [`exact_structure_reliability`] will enumerate.
pub const EXHAUSTIVE_LIMIT: usize = 25;

/// Probability that the structure is up, by enumerating every up/down state of
/// its components. Node factors are independent series elements and multiply
/// the result.
pub fn exact_structure_reliability(structure: &RedundancyStructure) -> Result<f64> {
    let leaves = structure.body.leaves();
    if leaves.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::Size {
            components: leaves.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut states = vec![false; leaves.len()];
    Ok(enumerate(structure, &leaves, &mut states, 0) * structure.node_factor())
}

// Branches on component `i`; summing conditionally keeps rounding error
// proportional to the depth rather than to the number of states.
fn enumerate(s: &RedundancyStructure, leaves: &[f64], states: &mut [bool], i: usize) -> f64 {
    if i == leaves.len() {
        return if s.body.is_up(states) { 1.0 } else { 0.0 };
    }
    let p = leaves[i];
    states[i] = true;
    let up = enumerate(s, leaves, states, i + 1);
    if p == 1.0 {
        return up;
    }
    states[i] = false;
    let down = enumerate(s, leaves, states, i + 1);
    p * up + (1.0 - p) * down
}

/// Monte-Carlo estimate: every component and every hosting node is sampled
/// independently in each trial. The half-width is the normal-approximation
/// binomial interval.
pub fn mc_structure_reliability(structure: &RedundancyStructure, trials: u64, seed: u64) -> Result<SimEstimate> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let leaves = structure.body.leaves();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![false; leaves.len()];
    let mut successes = 0u64;
    for _ in 0..trials {
        let nodes_up = structure.node_reliabilities.iter().all(|&p| rng.random::<f64>() < p);
        for (s, &p) in states.iter_mut().zip(&leaves) {
            *s = rng.random::<f64>() < p;
        }
        if nodes_up && structure.body.is_up(&states) {
            successes += 1;
        }
    }
    let n = trials as f64;
    let mean = successes as f64 / n;
    let std_error = (mean * (1.0 - mean) / n).sqrt();
    Ok(SimEstimate {
        mean,
        half_width_95: 1.959_963_984_540_054 * std_error,
        std_error,
        samples: trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::*;
    use approx::assert_abs_diff_eq;

    const P5: [f64; 5] = [0.9; 5];
    const HOST: [f64; 1] = [0.999];

    #[test]
    fn published_structures() {
        let bare = RedundancyStructure::bare_chain(&P5, &HOST).unwrap();
        assert_abs_diff_eq!(exact_structure_reliability(&bare).unwrap(), 0.58990, epsilon = 5e-6);
        let two = RedundancyStructure::parallel_chains(&P5, 2, &HOST).unwrap();
        assert_abs_diff_eq!(exact_structure_reliability(&two).unwrap(), 0.83147, epsilon = 5e-6);
        let mixed = RedundancyStructure::mixed_mm1(&P5, 2, 2, 0, &[0], &HOST).unwrap();
        assert_abs_diff_eq!(exact_structure_reliability(&mixed).unwrap(), 0.85563, epsilon = 5e-6);
        let full = RedundancyStructure::mixed_mm1(&P5, 2, 2, 1, &[0, 1, 2, 3, 4], &HOST).unwrap();
        assert_eq!(full.component_count(), 20);
        assert_abs_diff_eq!(exact_structure_reliability(&full).unwrap(), 0.99660, epsilon = 5e-6);
    }

    #[test]
    fn closed_forms_match_enumeration() {
        let p = [0.93, 0.8, 0.97, 0.85];
        let n = [0.999, 0.995];
        let exact = |s: RedundancyStructure| exact_structure_reliability(&s).unwrap();
        for l in 1..=4 {
            let want = subchain_mm1_reliability(&p, l, &n).unwrap();
            assert_abs_diff_eq!(exact(RedundancyStructure::parallel_chains(&p, l, &n).unwrap()), want, epsilon = 1e-12);
            let want = subchain_mmm_reliability(&p, l, &n).unwrap();
            assert_abs_diff_eq!(exact(RedundancyStructure::pools(&p, &[l; 4], &n).unwrap()), want, epsilon = 1e-12);
        }
        let b = [2, 0, 1, 3];
        assert_abs_diff_eq!(
            exact(RedundancyStructure::dedicated_backups(&p, &b, &n).unwrap()),
            dedicated_backup_reliability(&p, &b, &n).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn size_limit() {
        let s = RedundancyStructure::parallel_chains(&P5, 6, &HOST).unwrap();
        assert!(matches!(exact_structure_reliability(&s), Err(Error::Size { components: 30, .. })));
    }

    #[test]
    fn certain_components_give_a_degenerate_estimate() {
        let s = RedundancyStructure::parallel_chains(&[1.0; 3], 2, &[1.0]).unwrap();
        let est = mc_structure_reliability(&s, 1000, 1).unwrap();
        assert_eq!((est.mean, est.half_width_95), (1.0, 0.0));
        assert_eq!(exact_structure_reliability(&s).unwrap(), 1.0);
    }

    #[test]
    fn monte_carlo_tracks_closed_form() {
        let s = RedundancyStructure::bare_chain(&P5, &HOST).unwrap();
        let est = mc_structure_reliability(&s, 200_000, 5).unwrap();
        let want = chain_reliability(&P5, &HOST).unwrap();
        assert!((est.mean - want).abs() < 4.0 * est.std_error);
        assert_eq!(est, mc_structure_reliability(&s, 200_000, 5).unwrap());
        assert!(mc_structure_reliability(&s, 0, 5).is_err());
    }
}
