//! Classical LDPC codes: repetition codes, random biregular Tanner graphs,
//! spectral gap and minimum distance.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CodeError;
use crate::gf2::{xor_into, BinaryMatrix, BinaryVector};

pub const DEFAULT_ATTEMPTS: usize = 100_000;
pub const DEFAULT_DISTANCE_BUDGET: u64 = 1 << 16;

/// Bipartite graph of bits and checks. Edges are `(check, bit)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TannerGraph {
    pub n_bits: usize,
    pub n_checks: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TannerGraph {
    pub fn from_matrix(h: &BinaryMatrix) -> Self {
        TannerGraph { n_bits: h.cols(), n_checks: h.rows(), edges: h.to_sparse() }
    }

    pub fn to_matrix(&self) -> BinaryMatrix {
        BinaryMatrix::from_sparse(self.n_checks, self.n_bits, &self.edges)
            .expect("edge endpoints within range")
    }

    pub fn bit_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_bits];
        for &(_, b) in &self.edges {
            d[b] += 1;
        }
        d
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_checks];
        for &(c, _) in &self.edges {
            d[c] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        let b = self.bit_degrees().into_iter().max().unwrap_or(0);
        let c = self.check_degrees().into_iter().max().unwrap_or(0);
        b.max(c)
    }

    /// Adjacency over vertices `0..n_checks` (checks) then bits.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_checks + self.n_bits];
        for &(c, b) in &self.edges {
            adj[c].push(self.n_checks + b);
            adj[self.n_checks + b].push(c);
        }
        adj
    }

    /// Length of the shortest cycle, `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        girth_of(&self.adjacency())
    }

    pub fn has_duplicate_edges(&self) -> bool {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.windows(2).any(|w| w[0] == w[1])
    }
}

/// Shortest cycle length of a simple undirected graph by BFS from every vertex.
pub fn girth_of(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    q.push_back(v);
                } else if parent[u] != v {
                    best = best.min(dist[u] + dist[v] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalCode {
    pub h: BinaryMatrix,
    pub n: usize,
    pub k: usize,
    pub d_estimate: usize,
    pub d_certified: bool,
    pub girth: Option<usize>,
    pub spectral_gap: f64,
}

impl ClassicalCode {
    pub fn from_parity_check(h: BinaryMatrix, distance_budget: u64) -> Self {
        let n = h.cols();
        let k = n - h.rank();
        let (d_estimate, d_certified) = classical_distance(&h, distance_budget);
        let girth = TannerGraph::from_matrix(&h).girth();
        let spectral_gap = if h.is_zero() { 0.0 } else { spectral_gap(&h) };
        ClassicalCode { h, n, k, d_estimate, d_certified, girth, spectral_gap }
    }

    /// Rows of `H` are linearly independent.
    pub fn has_independent_checks(&self) -> bool {
        self.h.rows() + self.k == self.n
    }

    pub fn tanner_graph(&self) -> TannerGraph {
        TannerGraph::from_matrix(&self.h)
    }
}

/// Length-`d` repetition code with adjacent-pair checks.
pub fn repetition_code(d: usize) -> Result<ClassicalCode, CodeError> {
    if d < 2 {
        return Err(CodeError::InvalidParameter(format!("repetition length {d} < 2")));
    }
    let mut h = BinaryMatrix::zeros(d - 1, d);
    for i in 0..d - 1 {
        h.set(i, i, true);
        h.set(i, i + 1, true);
    }
    Ok(ClassicalCode::from_parity_check(h, DEFAULT_DISTANCE_BUDGET))
}

/// Random `(bit_deg, check_deg)`-biregular Tanner graph with girth at least
/// `girth_min`.
///
/// Stubs are matched one edge at a time in configuration-model fashion;
/// a stub choice that would create a repeated edge or a short cycle is
/// rejected, and an attempt that runs out of admissible stubs is discarded
/// and restarted. No edge swaps are performed.
pub fn random_biregular_tanner(
    n_bits: usize,
    bit_deg: usize,
    check_deg: usize,
    girth_min: usize,
    seed: u64,
) -> Result<TannerGraph, CodeError> {
    random_biregular_tanner_with_budget(n_bits, bit_deg, check_deg, girth_min, seed, DEFAULT_ATTEMPTS)
}

pub fn random_biregular_tanner_with_budget(
    n_bits: usize,
    bit_deg: usize,
    check_deg: usize,
    girth_min: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<TannerGraph, CodeError> {
    if bit_deg == 0 || check_deg == 0 || (n_bits * bit_deg) % check_deg != 0 {
        return Err(CodeError::InvalidParameter(format!(
            "n_bits*bit_deg = {} not divisible by check_deg = {check_deg}",
            n_bits * bit_deg
        )));
    }
    let n_checks = n_bits * bit_deg / check_deg;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_attempts {
        if let Some(edges) = try_biregular(n_bits, n_checks, bit_deg, check_deg, girth_min, &mut rng) {
            return Ok(TannerGraph { n_bits, n_checks, edges });
        }
    }
    Err(CodeError::RejectionBudgetExhausted { attempts: max_attempts })
}

fn try_biregular(
    n_bits: usize,
    n_checks: usize,
    bit_deg: usize,
    check_deg: usize,
    girth_min: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(usize, usize)>> {
    let nv = n_checks + n_bits;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut check_left = vec![check_deg; n_checks];
    let mut bit_stubs: Vec<usize> = (0..n_bits).flat_map(|b| std::iter::repeat_n(b, bit_deg)).collect();
    bit_stubs.shuffle(rng);
    // A new edge (c, b) closes a cycle of length dist(b, c) + 1.
    let reach = girth_min.saturating_sub(2);
    let mut dist = vec![usize::MAX; nv];
    let mut touched = Vec::new();
    let mut edges = Vec::with_capacity(n_bits * bit_deg);
    for &b in &bit_stubs {
        let bv = n_checks + b;
        touched.clear();
        dist[bv] = 0;
        touched.push(bv);
        let mut q = VecDeque::from([bv]);
        while let Some(u) = q.pop_front() {
            if dist[u] >= reach {
                continue;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    touched.push(v);
                    q.push_back(v);
                }
            }
        }
        let mut total = 0usize;
        for c in 0..n_checks {
            if check_left[c] > 0 && dist[c] == usize::MAX {
                total += check_left[c];
            }
        }
        // dist[c] finite means an existing edge or a cycle shorter than girth_min.
        let chosen = if total == 0 {
            None
        } else {
            let mut t = rng.gen_range(0..total);
            (0..n_checks).find(|&c| {
                if check_left[c] > 0 && dist[c] == usize::MAX {
                    if t < check_left[c] {
                        return true;
                    }
                    t -= check_left[c];
                }
                false
            })
        };
        for &v in &touched {
            dist[v] = usize::MAX;
        }
        let c = chosen?;
        check_left[c] -= 1;
        adj[c].push(bv);
        adj[bv].push(c);
        edges.push((c, b));
    }
    edges.sort_unstable();
    Some(edges)
}

/// `σ₁ − σ₂` of `h` viewed as a real matrix (σ₂ = 0 for rank one).
pub fn spectral_gap(h: &BinaryMatrix) -> f64 {
    let (r, c) = h.shape();
    let small = r.min(c);
    if small == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(r, c, |i, j| if h.get(i, j) { 1.0 } else { 0.0 });
    let gram = if r <= c { &m * m.transpose() } else { m.transpose() * &m };
    let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|x: &f64| x.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev[0] - ev.get(1).copied().unwrap_or(0.0)
}

/// Minimum weight over the nonzero vectors of the row space of `basis`.
///
/// Exhaustive Gray-code walk; callers bound `2^rows`.
pub(crate) fn min_weight_exhaustive(basis: &BinaryMatrix, accept: impl Fn(&[u64]) -> bool) -> Option<usize> {
    let k = basis.rows();
    let mut cur = vec![0u64; basis.row(0).len().max(1)];
    let mut best: Option<usize> = None;
    for i in 1u64..(1u64 << k) {
        let bit = i.trailing_zeros() as usize;
        xor_into(&mut cur, basis.row(bit));
        let w: usize = cur.iter().map(|x| x.count_ones() as usize).sum();
        if best.is_none_or(|b| w < b) && accept(&cur) {
            best = Some(w);
        }
    }
    best
}

/// Randomized information-set search for low-weight vectors in the row
/// space of `basis`, restricted to those accepted by `accept`.
pub(crate) fn min_weight_isd(
    basis: &BinaryMatrix,
    rounds: usize,
    seed: u64,
    accept: impl Fn(&BinaryVector) -> bool,
) -> Option<usize> {
    let n = basis.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<usize> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..rounds {
        perm.shuffle(&mut rng);
        let red = basis.select_cols(&perm).row_reduce().reduced;
        let rows: Vec<BinaryVector> = (0..red.rows())
            .map(|r| red.row_vector(r))
            .filter(|v| !v.is_zero())
            .map(|v| {
                let mut u = BinaryVector::zeros(n);
                for j in v.support() {
                    u.set(perm[j], true);
                }
                u
            })
            .collect();
        let mut consider = |v: &BinaryVector| {
            let w = v.weight();
            if w > 0 && best.is_none_or(|b| w < b) && accept(v) {
                best = Some(w);
            }
        };
        for v in &rows {
            consider(v);
        }
        if rows.len() <= 64 {
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    let mut s = rows[i].clone();
                    s.xor_assign(&rows[j]);
                    consider(&s);
                }
            }
        }
    }
    best
}

/// Minimum distance of the code `ker h`.
///
/// Exhaustive (certified) when `2^k <= budget`; otherwise the best weight
/// found by randomized information-set search, an upper bound. A code with
/// `k = 0` reports `(0, true)`.
pub fn classical_distance(h: &BinaryMatrix, budget: u64) -> (usize, bool) {
    let g = h.kernel_basis();
    let k = g.rows();
    if k == 0 {
        return (0, true);
    }
    if k < 63 && (1u64 << k) <= budget {
        let d = min_weight_exhaustive(&g, |_| true).expect("nonzero codewords exist");
        return (d, true);
    }
    let rounds = (budget / 1024).clamp(100, 5000) as usize;
    let d = min_weight_isd(&g, rounds, 0x5eed, |_| true).expect("nonzero codewords exist");
    (d, false)
}

/// Draws `candidates` random biregular codes and keeps the one with the
/// largest distance, breaking ties by the largest spectral gap.
pub fn select_classical_code(
    n_bits: usize,
    bit_deg: usize,
    check_deg: usize,
    candidates: usize,
    seed: u64,
) -> Result<ClassicalCode, CodeError> {
    let scored: Vec<Result<ClassicalCode, CodeError>> = (0..candidates.max(1) as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i);
            let g = random_biregular_tanner(n_bits, bit_deg, check_deg, 6, s)?;
            Ok(ClassicalCode::from_parity_check(g.to_matrix(), DEFAULT_DISTANCE_BUDGET))
        })
        .collect();
    let mut best: Option<ClassicalCode> = None;
    for r in scored {
        let c = r?;
        let better = match &best {
            None => true,
            Some(b) => (c.d_estimate, c.spectral_gap) > (b.d_estimate, b.spectral_gap),
        };
        if better {
            best = Some(c);
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming7() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[
            vec![1, 0, 1, 0, 1, 0, 1],
            vec![0, 1, 1, 0, 0, 1, 1],
            vec![0, 0, 0, 1, 1, 1, 1],
        ])
    }

    fn brute_force_distance(h: &BinaryMatrix) -> usize {
        let n = h.cols();
        (1u64..1 << n)
            .filter_map(|x| {
                let v = BinaryVector::from_words(n, vec![x]);
                h.mul_vec(&v).unwrap().is_zero().then(|| v.weight())
            })
            .min()
            .unwrap_or(0)
    }

    #[test]
    fn repetition_examples() {
        let r3 = repetition_code(3).unwrap();
        assert_eq!(r3.h, BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]));
        assert_eq!((r3.k, r3.d_estimate), (1, 3));
        let r2 = repetition_code(2).unwrap();
        assert_eq!(r2.h, BinaryMatrix::from_dense(&[vec![1, 1]]));
        assert!(repetition_code(1).is_err());
        let r5 = repetition_code(5).unwrap();
        assert_eq!(r5.h.kernel_basis(), BinaryMatrix::from_dense(&[vec![1; 5]]));
    }

    #[test]
    fn biregular_sixteen_bits() {
        let g = random_biregular_tanner(16, 3, 4, 6, 11).unwrap();
        assert_eq!(g.n_checks, 12);
        assert!(g.bit_degrees().iter().all(|&d| d == 3));
        assert!(g.check_degrees().iter().all(|&d| d == 4));
        assert!(!g.has_duplicate_edges());
        assert!(g.girth().unwrap() >= 6);
        assert_eq!(g, random_biregular_tanner(16, 3, 4, 6, 11).unwrap());
    }

    #[test]
    fn biregular_rejects_bad_degrees() {
        assert!(matches!(
            random_biregular_tanner(10, 3, 4, 6, 0),
            Err(CodeError::InvalidParameter(_))
        ));
        assert!(matches!(
            random_biregular_tanner_with_budget(8, 3, 4, 6, 0, 50),
            Err(CodeError::RejectionBudgetExhausted { attempts: 50 })
        ));
    }

    #[test]
    fn girth_of_small_graphs() {
        // 4-cycle: two checks sharing two bits.
        let h = BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 1]]);
        assert_eq!(TannerGraph::from_matrix(&h).girth(), Some(4));
        let rep = repetition_code(4).unwrap();
        assert_eq!(rep.girth, None);
        assert_eq!(TannerGraph::from_matrix(&hamming7()).girth(), Some(4));
    }

    #[test]
    fn spectral_gap_examples() {
        let ones = BinaryMatrix::from_dense(&[vec![1; 5]]);
        assert!((spectral_gap(&ones) - 5f64.sqrt()).abs() < 1e-12);
        let r3 = repetition_code(3).unwrap().h;
        // H Hᵀ = [[2,1],[1,2]] has eigenvalues 3 and 1.
        assert!((spectral_gap(&r3) - (3f64.sqrt() - 1.0)).abs() < 1e-12);
        let permuted = r3.select_cols(&[2, 0, 1]).select_rows(&[1, 0]);
        assert!((spectral_gap(&permuted) - spectral_gap(&r3)).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(classical_distance(&repetition_code(5).unwrap().h, 1 << 10), (5, true));
        assert_eq!(classical_distance(&hamming7(), 1 << 10), (3, true));
    }

    #[test]
    fn certified_distance_matches_brute_force() {
        for seed in 0..6 {
            let g = random_biregular_tanner(16, 3, 4, 6, seed).unwrap();
            let h = g.to_matrix();
            let (d, cert) = classical_distance(&h, 1 << 12);
            assert!(cert);
            assert_eq!(d, brute_force_distance(&h));
        }
    }

    #[test]
    fn isd_is_an_upper_bound_and_usually_tight() {
        let h = random_biregular_tanner(20, 3, 4, 6, 3).unwrap().to_matrix();
        let exact = brute_force_distance(&h);
        let (d, cert) = classical_distance(&h, 1);
        assert!(!cert);
        assert!(d >= exact);
        assert_eq!(d, exact);
    }

    #[test]
    fn selection_prefers_distance() {
        let best = select_classical_code(16, 3, 4, 6, 1).unwrap();
        for i in 0..6u64 {
            let s = 1u64.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i);
            let g = random_biregular_tanner(16, 3, 4, 6, s).unwrap();
            let (d, _) = classical_distance(&g.to_matrix(), DEFAULT_DISTANCE_BUDGET);
            assert!(d <= best.d_estimate);
        }
    }
}
