use aed_core::{Constraint, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected random instance: a random spanning tree plus extra edges with probability `p`.
pub fn random_instance(seed: u64, n: usize, d: usize, p: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for j in 1..n {
        edges.push((rng.gen_range(0..j), j));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let constraints = edges
        .into_iter()
        .map(|(i, j)| {
            let rows = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..30)).collect()).collect();
            Constraint::new(i, j, rows)
        })
        .collect();
    Instance::new(vec![d; n], constraints).unwrap()
}

pub fn small_params() -> aed_core::Params {
    aed_core::Params { initial_population: 12, exchange_rate: 4, ..Default::default() }
}
