use aed_bench::generators::{erdos_renyi_edges, gen_random_dcop, gen_weighted_graph_coloring};
use aed_core::io::{instance_from_json, instance_to_json};
use aed_core::{Assignment, Instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn mean_edge_count_matches_expectation() {
    for &(n, p) in &[(70usize, 0.1f64), (70, 0.6), (120, 0.05)] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let total: usize = (0..200).map(|_| erdos_renyi_edges(n, p, &mut rng).len()).sum();
        let mean = total as f64 / 200.0;
        let expected = p * (n * (n - 1)) as f64 / 2.0;
        assert!((mean - expected).abs() <= 0.05 * expected, "n={n} p={p}: {mean} vs {expected}");
    }
}

#[test]
fn benchmark_families_generate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b1 = gen_random_dcop(70, 10, 0.1, (1, 100), &mut rng).unwrap();
    assert_eq!((b1.agent_count(), b1.domain_size(0)), (70, 10));
    let b2 = gen_random_dcop(70, 10, 0.6, (1, 100), &mut rng).unwrap();
    assert!(b2.constraints().len() > b1.constraints().len());
    let b3 = gen_weighted_graph_coloring(120, 3, 0.05, (1, 100), &mut rng).unwrap();
    assert_eq!((b3.agent_count(), b3.domain_size(0)), (120, 3));
}

#[test]
fn proper_colorings_cost_nothing() {
    // p = 1 on three agents with three colors: the only proper colorings are permutations
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = gen_weighted_graph_coloring(3, 3, 1.0, (1, 100), &mut rng).unwrap();
    assert_eq!(inst.evaluate_fitness(&Assignment::from_values(&[0, 1, 2])).unwrap(), 0);
    assert!(inst.evaluate_fitness(&Assignment::from_values(&[0, 0, 2])).unwrap() > 0);
}

fn round_trips(inst: &Instance) -> bool {
    let text = instance_to_json(inst);
    let back: Instance = instance_from_json(&text).unwrap();
    &back == inst && instance_to_json(&back) == text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn coloring_cells_are_zero_exactly_off_the_diagonal(
        seed in any::<u64>(), n in 2usize..15, colors in 2usize..5, p in 0.3f64..1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(inst) = gen_weighted_graph_coloring(n, colors, p, (1, 100), &mut rng) {
            for c in inst.constraints() {
                for a in 0..colors {
                    for b in 0..colors {
                        prop_assert_eq!(c.get(a, b) == 0, a != b);
                    }
                }
            }
            prop_assert!(round_trips(&inst));
        }
    }

    #[test]
    fn random_instances_round_trip_through_json(
        seed in any::<u64>(), n in 2usize..15, d in 1usize..6, p in 0.3f64..1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(inst) = gen_random_dcop(n, d, p, (0, 1_000_000), &mut rng) {
            for c in inst.constraints() {
                for row in c.to_rows() {
                    prop_assert!(row.iter().all(|v| (0..=1_000_000).contains(v)));
                }
            }
            prop_assert!(round_trips(&inst));
        }
    }
}
