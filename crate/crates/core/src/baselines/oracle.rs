use crate::baselines::BaselineError;
use crate::model::{Assignment, DcopInstance};
use crate::scalar::Cost;

pub const DEFAULT_SEARCH_CAP: u128 = 10_000_000;

/// Exact optimum by enumeration; ties go to the lexicographically smallest
/// value vector.
pub fn brute_force_optimum<C: Cost>(instance: &DcopInstance<C>) -> Result<(Vec<usize>, C), BaselineError> {
    brute_force_optimum_capped(instance, DEFAULT_SEARCH_CAP)
}

pub fn brute_force_optimum_capped<C: Cost>(
    instance: &DcopInstance<C>,
    cap: u128,
) -> Result<(Vec<usize>, C), BaselineError> {
    let size = instance
        .domains()
        .iter()
        .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
        .unwrap_or(u128::MAX);
    if size > cap {
        return Err(BaselineError::SearchSpaceTooLarge { size, cap });
    }
    let n = instance.agent_count();
    let mut values = vec![0usize; n];
    let mut best: Option<(Vec<usize>, C)> = None;
    loop {
        let cost = instance.evaluate_fitness(&Assignment::from_values(&values))?;
        if best.as_ref().is_none_or(|(_, b)| cost < *b) {
            best = Some((values.clone(), cost));
        }
        // odometer with the last agent moving fastest keeps lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(best.expect("at least one assignment"));
            }
            k -= 1;
            values[k] += 1;
            if values[k] < instance.domain_size(k) {
                break;
            }
            values[k] = 0;
        }
    }
}
