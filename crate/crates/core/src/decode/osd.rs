//! Ordered-statistics post-processing.

use serde::{Deserialize, Serialize};

use super::bp::SparseGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsdConfig {
    pub order: usize,
}

impl Default for OsdConfig {
    fn default() -> Self {
        OsdConfig { order: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsdResult {
    pub estimate: Vec<u8>,
    /// Sum of prior weights `ln((1-p)/p)` over the estimate.
    pub cost: f64,
    /// False when the syndrome is outside the column space; the estimate
    /// then satisfies only the consistent part.
    pub satisfied: bool,
}

/// OSD of order `cfg.order`. Columns are ranked most-likely-faulty first
/// (ascending posterior LLR, index tie-break). Elimination in that order picks
/// the pivot set; the `order` first non-pivot columns are then searched
/// exhaustively and the cheapest consistent candidate is kept.
pub fn osd(g: &SparseGraph, llrs: &[f64], syndrome: &[u8], cfg: &OsdConfig) -> OsdResult {
    let n = g.n_cols();
    let m = g.n_checks;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| llrs[a].total_cmp(&llrs[b]).then(a.cmp(&b)));
    // Dense rows over permuted columns plus the syndrome bit at index n.
    let w = (n + 1).div_ceil(64);
    let mut rows = vec![0u64; m * w];
    for (pos, &j) in order.iter().enumerate() {
        for i in g.col_checks(j) {
            rows[i * w + pos / 64] ^= 1 << (pos % 64);
        }
    }
    for (i, &s) in syndrome.iter().enumerate() {
        if s != 0 {
            rows[i * w + n / 64] ^= 1 << (n % 64);
        }
    }
    let bit = |rows: &[u64], r: usize, c: usize| rows[r * w + c / 64] >> (c % 64) & 1 == 1;
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| bit(&rows, r, c)) else { continue };
        if p != rank {
            for k in 0..w {
                rows.swap(p * w + k, rank * w + k);
            }
        }
        for r in 0..m {
            if r != rank && bit(&rows, r, c) {
                for k in 0..w {
                    let v = rows[rank * w + k];
                    rows[r * w + k] ^= v;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let satisfied = (rank..m).all(|r| !bit(&rows, r, n));
    let weight: Vec<f64> = order.iter().map(|&j| g.prior_llr[j]).collect();
    let is_pivot = {
        let mut v = vec![false; n];
        pivots.iter().for_each(|&c| v[c] = true);
        v
    };
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).take(cfg.order).collect();
    // Pivot-space solution and the pivot-space image of each searched column.
    let base: Vec<bool> = (0..rank).map(|r| bit(&rows, r, n)).collect();
    let images: Vec<Vec<usize>> = free.iter().map(|&c| (0..rank).filter(|&r| bit(&rows, r, c)).collect()).collect();
    let mut cur = base.clone();
    let mut chosen = vec![false; free.len()];
    let cost_of = |cur: &[bool], chosen: &[bool]| -> f64 {
        let a: f64 = cur.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| weight[pivots[r]]).sum();
        let b: f64 = chosen.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| weight[free[k]]).sum();
        a + b
    };
    let mut best_cost = cost_of(&cur, &chosen);
    let mut best = (cur.clone(), chosen.clone());
    let mut cost = best_cost;
    // Gray-code walk over the 2^order patterns, updating the cost in place.
    for step in 1u64..(1u64 << free.len()) {
        let k = step.trailing_zeros() as usize;
        chosen[k] = !chosen[k];
        cost += if chosen[k] { weight[free[k]] } else { -weight[free[k]] };
        for &r in &images[k] {
            cur[r] = !cur[r];
            let wr = weight[pivots[r]];
            cost += if cur[r] { wr } else { -wr };
        }
        if cost < best_cost - 1e-12 {
            best_cost = cost;
            best = (cur.clone(), chosen.clone());
        }
    }
    let mut estimate = vec![0u8; n];
    for (r, &b) in best.0.iter().enumerate() {
        if b {
            estimate[order[pivots[r]]] = 1;
        }
    }
    for (k, &b) in best.1.iter().enumerate() {
        if b {
            estimate[order[free[k]]] = 1;
        }
    }
    let cost = estimate.iter().enumerate().filter(|(_, &e)| e != 0).map(|(j, _)| g.prior_llr[j]).sum();
    OsdResult { estimate, cost, satisfied }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (Vec<Vec<usize>>, Vec<f64>) {
        let cols: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut c: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.3)).collect();
                if c.is_empty() {
                    c.push(rng.gen_range(0..m));
                }
                c
            })
            .collect();
        let priors = (0..n).map(|_| rng.gen_range(0.01..0.3)).collect();
        (cols, priors)
    }

    #[test]
    fn zero_syndrome_zero_estimate() {
        let g = SparseGraph::new(2, &[vec![0], vec![1]], &[0.1, 0.1]);
        let r = osd(&g, &[2.0, 2.0], &[0, 0], &OsdConfig::default());
        assert_eq!(r.estimate, vec![0, 0]);
        assert!(r.satisfied);
    }

    #[test]
    fn higher_order_never_costs_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = rng.gen_range(3..10);
            let n = rng.gen_range(m..=20);
            let (cols, priors) = random_graph(&mut rng, m, n);
            let g = SparseGraph::new(m, &cols, &priors);
            let e: Vec<u8> = (0..n).map(|_| rng.gen_bool(0.2) as u8).collect();
            let syn = g.syndrome_of(&e);
            let llrs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let r0 = osd(&g, &llrs, &syn, &OsdConfig { order: 0 });
            let r10 = osd(&g, &llrs, &syn, &OsdConfig { order: 10 });
            assert!(r0.satisfied && r10.satisfied);
            assert_eq!(g.syndrome_of(&r0.estimate), syn);
            assert_eq!(g.syndrome_of(&r10.estimate), syn);
            assert!(r10.cost <= r0.cost + 1e-9);
        }
    }

    #[test]
    fn full_order_finds_minimum_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (m, n) = (5, 10);
            let (cols, priors) = random_graph(&mut rng, m, n);
            let g = SparseGraph::new(m, &cols, &priors);
            let e: Vec<u8> = (0..n).map(|_| rng.gen_bool(0.3) as u8).collect();
            let syn = g.syndrome_of(&e);
            let r = osd(&g, &vec![0.0; n], &syn, &OsdConfig { order: n });
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << n) {
                let cand: Vec<u8> = (0..n).map(|j| (mask >> j & 1) as u8).collect();
                if g.syndrome_of(&cand) == syn {
                    let c: f64 = (0..n).filter(|&j| cand[j] != 0).map(|j| g.prior_llr[j]).sum();
                    best = best.min(c);
                }
            }
            assert!((r.cost - best).abs() < 1e-9);
        }
    }

    #[test]
    fn inconsistent_syndrome_flagged() {
        let g = SparseGraph::new(2, &[vec![0, 1]], &[0.1]);
        assert!(!osd(&g, &[1.0], &[1, 0], &OsdConfig::default()).satisfied);
    }

    proptest! {
        #[test]
        fn osd_solves_consistent_syndromes(seed in 0u64..1000, order in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..12);
            let n = rng.gen_range(1..30);
            let (cols, priors) = random_graph(&mut rng, m, n);
            let g = SparseGraph::new(m, &cols, &priors);
            let e: Vec<u8> = (0..n).map(|_| rng.gen_bool(0.25) as u8).collect();
            let syn = g.syndrome_of(&e);
            let llrs: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let r = osd(&g, &llrs, &syn, &OsdConfig { order });
            prop_assert!(r.satisfied);
            prop_assert_eq!(g.syndrome_of(&r.estimate), syn);
        }
    }
}
