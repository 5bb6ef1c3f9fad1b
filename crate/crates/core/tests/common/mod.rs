#![allow(dead_code)]

use rand::Rng;
use walkmeet::{generate_ba, generate_er, seed, Graph};

/// Copy of `g` with every weight redrawn uniformly from [0.5, 2.5).
pub fn reweight(g: &Graph, seed: u64) -> Graph {
    let mut rng = seed::stream(seed, 1);
    let edges: Vec<_> = g.edges().iter().map(|e| (e.i, e.j, 0.5 + 2.0 * rng.random::<f64>())).collect();
    Graph::from_edges(g.node_count(), edges).unwrap()
}

/// Connected non-bipartite graph of kind `index % 3` (BA, ER, weighted BA)
/// with between `min_n` and `max_n` nodes.
pub fn corpus_graph(index: u64, min_n: usize, max_n: usize, seed: u64) -> Graph {
    let mut rng = seed::stream(seed, 1000 + index);
    let mut attempt = 0u64;
    loop {
        let n = rng.random_range(min_n..=max_n);
        let s = seed::derive_seed(seed, index * 1000 + attempt);
        attempt += 1;
        let g = match index % 3 {
            0 => generate_ba(n, rng.random_range(2..=3), s).unwrap(),
            1 => match generate_er(n, rng.random_range(4.0..7.0) / (n - 1) as f64, s, 50) {
                Ok(g) => g,
                Err(_) => continue,
            },
            _ => reweight(&generate_ba(n, 2, s).unwrap(), s),
        };
        if g.check_assumptions().is_ergodic() {
            return g;
        }
    }
}

pub fn corpus(count: u64, min_n: usize, max_n: usize, seed: u64) -> Vec<Graph> {
    (0..count).map(|i| corpus_graph(i, min_n, max_n, seed)).collect()
}

pub fn rel(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
