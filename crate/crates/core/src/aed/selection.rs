//! Rank-proportional selection over a local population.
//!
//! Ranks fall in `(0, r_max]`: the best individual gets `r_max`, the worst
//! gets `r_max / (spread + 1)`. Probabilities are `rank^alpha` normalized.

use rand::Rng;

use crate::aed::AedError;
use crate::model::Individual;
use crate::scalar::{Cost, Real};

pub fn rank_population<C: Cost, F: Real>(population: &[Individual<C>], r_max: F) -> Vec<F> {
    let Some(worst) = population.iter().map(|i| i.fitness).max() else {
        return Vec::new();
    };
    let best = population.iter().map(|i| i.fitness).min().expect("non-empty");
    let denom: F = ((worst - best).abs() + C::one()).to_real();
    population
        .iter()
        .map(|i| {
            let num: F = ((worst - i.fitness).abs() + C::one()).to_real();
            r_max * num / denom
        })
        .collect()
}

/// `w^exponent` for every weight, with integer exponents done by repeated multiplication.
pub(crate) fn powers<F: Real>(weights: &[F], exponent: F) -> Vec<F> {
    let small_int = exponent >= F::zero() && exponent <= F::from_u8(64).expect("64 fits") && exponent.fract() == F::zero();
    match exponent.to_i32() {
        Some(e) if small_int => weights.iter().map(|w| w.powi(e)).collect(),
        _ => weights.iter().map(|w| w.powf(exponent)).collect(),
    }
}

/// `w^exponent` normalized to sum to one.
pub fn power_normalize<F: Real>(weights: &[F], exponent: F) -> Vec<F> {
    let powered = powers(weights, exponent);
    let total = powered.iter().fold(F::zero(), |a, &b| a + b);
    powered.into_iter().map(|w| w / total).collect()
}

pub fn selection_probabilities<F: Real>(ranks: &[F], alpha: F) -> Vec<F> {
    power_normalize(ranks, alpha)
}

/// Draws an index proportionally to non-negative `weights`.
pub(crate) struct Roulette<F> {
    cumulative: Vec<F>,
}

impl<F: Real> Roulette<F> {
    pub(crate) fn new(weights: &[F]) -> Self {
        let mut acc = F::zero();
        let cumulative = weights
            .iter()
            .map(|&w| {
                acc = acc + w;
                acc
            })
            .collect();
        Roulette { cumulative }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty roulette");
        let target = F::unit(rng) * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1)
    }
}

/// Indices of `size` draws with replacement.
pub fn select_rp_indices<C: Cost, F: Real, R: Rng + ?Sized>(
    population: &[Individual<C>],
    size: usize,
    r_max: F,
    alpha: F,
    rng: &mut R,
) -> Vec<usize> {
    if population.is_empty() {
        return Vec::new();
    }
    let ranks = rank_population(population, r_max);
    let weights = powers(&ranks, alpha);
    let wheel = Roulette::new(&weights);
    (0..size).map(|_| wheel.draw(rng)).collect()
}

/// Sample of `size` with replacement (copies).
pub fn select_rp<C: Cost, F: Real, R: Rng + ?Sized>(
    population: &[Individual<C>],
    size: usize,
    r_max: F,
    alpha: F,
    rng: &mut R,
) -> Vec<Individual<C>> {
    select_rp_indices(population, size, r_max, alpha, rng)
        .into_iter()
        .map(|i| population[i].clone())
        .collect()
}

/// Indices of `size` distinct positions, in draw order.
///
/// Weighted reservoir keys `ln(u) / w`: the top `size` keys have the same
/// distribution as `size` successive normalized draws without replacement.
pub fn select_wrp_indices<C: Cost, F: Real, R: Rng + ?Sized>(
    population: &[Individual<C>],
    size: usize,
    r_max: F,
    alpha: F,
    rng: &mut R,
) -> Result<Vec<usize>, AedError> {
    if size > population.len() {
        return Err(AedError::SampleTooLarge { requested: size, available: population.len() });
    }
    let weights = powers(&rank_population(population, r_max), alpha);
    let mut keyed: Vec<(F, usize)> = weights
        .iter()
        .enumerate()
        .map(|(idx, &w)| {
            // 1 - u lies in (0, 1], keeping ln finite
            let u = F::one() - F::unit(rng);
            (u.ln() / w, idx)
        })
        .collect();
    let order = |a: &(F, usize), b: &(F, usize)| b.0.partial_cmp(&a.0).expect("finite keys").then(a.1.cmp(&b.1));
    if size < keyed.len() {
        keyed.select_nth_unstable_by(size, order);
        keyed.truncate(size);
    }
    keyed.sort_unstable_by(order);
    Ok(keyed.into_iter().map(|(_, idx)| idx).collect())
}

/// Sample of `size` without replacement (copies).
pub fn select_wrp<C: Cost, F: Real, R: Rng + ?Sized>(
    population: &[Individual<C>],
    size: usize,
    r_max: F,
    alpha: F,
    rng: &mut R,
) -> Result<Vec<Individual<C>>, AedError> {
    Ok(select_wrp_indices(population, size, r_max, alpha, rng)?
        .into_iter()
        .map(|i| population[i].clone())
        .collect())
}

/// Keeps exactly the sampled individuals, moving them out of `population`.
pub(crate) fn retain_wrp<C: Cost, F: Real, R: Rng + ?Sized>(
    population: &mut Vec<Individual<C>>,
    size: usize,
    r_max: F,
    alpha: F,
    rng: &mut R,
) -> Result<(), AedError> {
    let picked = select_wrp_indices(population, size, r_max, alpha, rng)?;
    let mut slots: Vec<Option<Individual<C>>> = std::mem::take(population).into_iter().map(Some).collect();
    *population = picked.into_iter().map(|i| slots[i].take().expect("distinct indices")).collect();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Assignment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pop(fits: &[i64]) -> Vec<Individual<i64>> {
        fits.iter()
            .enumerate()
            .map(|(k, &f)| Individual::new(Assignment::from_values(&[k]), f))
            .collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn ranks_of_the_worked_example() {
        let r = rank_population(&pop(&[16, 30, 40]), 5.0);
        assert!(close(&r, &[5.0, 2.2, 0.2], 1e-12), "{r:?}");
    }

    #[test]
    fn degenerate_rankings() {
        assert_eq!(rank_population(&pop(&[7, 7, 7]), 5.0), vec![5.0; 3]);
        assert_eq!(rank_population(&pop(&[3]), 5.0), vec![5.0]);
        assert!(rank_population::<i64, f64>(&[], 5.0).is_empty());
    }

    #[test]
    fn probabilities_of_the_worked_example() {
        let r = rank_population(&pop(&[16, 30, 40]), 5.0);
        let p1 = selection_probabilities(&r, 1.0);
        assert!(close(&p1, &[0.676, 0.297, 0.027], 1e-3), "{p1:?}");
        let p3 = selection_probabilities(&r, 3.0);
        assert!(close(&p3, &[0.92153, 0.07842, 0.00005], 1e-4), "{p3:?}");
        let uniform = selection_probabilities(&[2.0; 4], 7.0);
        assert!(close(&uniform, &[0.25; 4], 1e-15));
    }

    #[test]
    fn single_individual_is_always_drawn() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = pop(&[9]);
        let s = select_rp(&p, 10, 5.0, 1.0, &mut rng);
        assert_eq!(s, vec![p[0].clone(); 10]);
    }

    #[test]
    fn empirical_frequencies_follow_the_probabilities() {
        let p = pop(&[16, 30, 40, 22, 35]);
        let probs = selection_probabilities(&rank_population(&p, 5.0), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut counts = [0usize; 5];
        for i in select_rp_indices(&p, draws, 5.0, 2.0, &mut rng) {
            counts[i] += 1;
        }
        for k in 0..5 {
            let freq = counts[k] as f64 / draws as f64;
            assert!((freq - probs[k]).abs() <= 0.01, "index {k}: {freq} vs {}", probs[k]);
        }
    }

    #[test]
    fn large_alpha_concentrates_on_the_best() {
        let p = pop(&[16, 30, 40]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx = select_rp_indices(&p, 1000, 5.0, 60.0, &mut rng);
        assert!(idx.iter().all(|&i| i == 0));
    }

    #[test]
    fn wrp_full_sample_is_a_permutation() {
        let p = pop(&[5, 1, 9, 3, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut idx = select_wrp_indices(&p, 5, 5.0, 1.0, &mut rng).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert!(matches!(
            select_wrp_indices(&p, 6, 5.0, 1.0, &mut rng),
            Err(AedError::SampleTooLarge { requested: 6, available: 5 })
        ));
    }

    #[test]
    fn wrp_first_draw_matches_the_probabilities() {
        let p = pop(&[16, 30, 40]);
        let probs = selection_probabilities(&rank_population(&p, 5.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 50_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            counts[select_wrp_indices(&p, 1, 5.0, 1.0, &mut rng).unwrap()[0]] += 1;
        }
        for k in 0..3 {
            assert!((counts[k] as f64 / trials as f64 - probs[k]).abs() < 0.01);
        }
    }

    /// Inclusion probability of each position in a size-`s` sample drawn by
    /// successive normalized draws, by enumerating all ordered draw sequences.
    fn successive_draw_inclusion(weights: &[f64], s: usize) -> Vec<f64> {
        fn rec(weights: &[f64], taken: &mut Vec<usize>, s: usize, prob: f64, out: &mut [f64]) {
            if taken.len() == s {
                for &t in taken.iter() {
                    out[t] += prob;
                }
                return;
            }
            let rest: f64 = (0..weights.len()).filter(|i| !taken.contains(i)).map(|i| weights[i]).sum();
            for i in 0..weights.len() {
                if taken.contains(&i) {
                    continue;
                }
                taken.push(i);
                rec(weights, taken, s, prob * weights[i] / rest, out);
                taken.pop();
            }
        }
        let mut out = vec![0.0; weights.len()];
        rec(weights, &mut Vec::new(), s, 1.0, &mut out);
        out
    }

    #[test]
    fn wrp_inclusion_matches_successive_draws() {
        let p = pop(&[10, 80, 45, 60, 95]);
        let alpha = 2.0;
        let weights: Vec<f64> = rank_population(&p, 5.0).iter().map(|r: &f64| r.powf(alpha)).collect();
        let oracle = successive_draw_inclusion(&weights, 2);
        let first_draw = selection_probabilities(&rank_population(&p, 5.0), alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 60_000;
        let mut counts = [0usize; 5];
        for _ in 0..trials {
            for i in select_wrp_indices(&p, 2, 5.0, alpha, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        for k in 0..5 {
            let freq = counts[k] as f64 / trials as f64;
            assert!((freq - oracle[k]).abs() < 0.01, "index {k}: {freq} vs {}", oracle[k]);
        }
        // the dominant individual shows up at least as often as its first-draw probability
        assert!(counts[0] as f64 / trials as f64 >= first_draw[0]);
    }

    #[test]
    fn probabilities_do_not_depend_on_r_max() {
        let p = pop(&[16, 30, 40, 12, 99, 57]);
        let base = selection_probabilities(&rank_population(&p, 1.0), 3.0);
        for r_max in [5.0, 100.0] {
            let other = selection_probabilities(&rank_population(&p, r_max), 3.0);
            assert!(close(&base, &other, 1e-12));
        }
    }

    #[test]
    fn retain_keeps_distinct_members() {
        let mut p = pop(&[4, 8, 15, 16, 23, 42]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        retain_wrp(&mut p, 3, 5.0, 1.0, &mut rng).unwrap();
        assert_eq!(p.len(), 3);
        let mut fits: Vec<i64> = p.iter().map(|i| i.fitness).collect();
        fits.dedup();
        assert_eq!(fits.len(), 3);
    }
}
