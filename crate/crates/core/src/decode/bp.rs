//! Flooding belief propagation on a sparse fault graph.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BpVariant {
    #[default]
    MinSum,
    ProductSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub variant: BpVariant,
    /// Min-sum normalization `s`.
    pub scale: f64,
    /// Iteration cap is `ceil(n / ratio)` for `n` fault classes.
    pub ratio: f64,
    /// Overrides the ratio-derived cap when set.
    pub max_iters: Option<usize>,
}

impl BpConfig {
    pub fn hgp_default() -> Self {
        BpConfig { variant: BpVariant::MinSum, scale: 0.9, ratio: 5.0, max_iters: None }
    }

    pub fn lp_default() -> Self {
        BpConfig { variant: BpVariant::MinSum, scale: 1.0, ratio: 20.0, max_iters: None }
    }

    pub fn iterations_for(&self, n_cols: usize) -> usize {
        self.max_iters.unwrap_or_else(|| ((n_cols as f64 / self.ratio).ceil() as usize).max(1))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(format!("scale {} outside (0, 1]", self.scale));
        }
        if self.ratio.is_nan() || self.ratio <= 0.0 {
            return Err(format!("ratio {} must be positive", self.ratio));
        }
        Ok(())
    }
}

impl Default for BpConfig {
    fn default() -> Self {
        Self::hgp_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult {
    pub estimate: Vec<u8>,
    /// Posterior log-likelihood ratios, positive favours "no fault".
    pub llrs: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Fault graph in compressed form. Columns are faults, rows are checks.
#[derive(Clone, Debug)]
pub struct SparseGraph {
    pub n_checks: usize,
    col_start: Vec<usize>,
    edge_check: Vec<u32>,
    check_start: Vec<usize>,
    check_edges: Vec<u32>,
    pub prior_llr: Vec<f64>,
}

pub fn prior_llr(p: f64) -> f64 {
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    ((1.0 - p) / p).ln()
}

impl SparseGraph {
    pub fn new(n_checks: usize, cols: &[Vec<usize>], priors: &[f64]) -> Self {
        let mut col_start = Vec::with_capacity(cols.len() + 1);
        let mut edge_check = Vec::new();
        col_start.push(0);
        let mut deg = vec![0usize; n_checks];
        for c in cols {
            for &i in c {
                edge_check.push(i as u32);
                deg[i] += 1;
            }
            col_start.push(edge_check.len());
        }
        let mut check_start = vec![0usize; n_checks + 1];
        for i in 0..n_checks {
            check_start[i + 1] = check_start[i] + deg[i];
        }
        let mut fill = check_start.clone();
        let mut check_edges = vec![0u32; edge_check.len()];
        for (e, &i) in edge_check.iter().enumerate() {
            check_edges[fill[i as usize]] = e as u32;
            fill[i as usize] += 1;
        }
        SparseGraph {
            n_checks,
            col_start,
            edge_check,
            check_start,
            check_edges,
            prior_llr: priors.iter().map(|&p| prior_llr(p)).collect(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.col_start.len() - 1
    }

    pub fn col_checks(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_check[self.col_start[j]..self.col_start[j + 1]].iter().map(|&i| i as usize)
    }

    pub fn syndrome_of(&self, est: &[u8]) -> Vec<u8> {
        let mut s = vec![0u8; self.n_checks];
        for (j, &e) in est.iter().enumerate() {
            if e != 0 {
                for i in self.col_checks(j) {
                    s[i] ^= 1;
                }
            }
        }
        s
    }

    pub fn bp(&self, syndrome: &[u8], cfg: &BpConfig) -> BpResult {
        self.bp_with(syndrome, cfg, true)
    }

    /// With `early_stop` false, runs the full iteration cap.
    pub fn bp_with(&self, syndrome: &[u8], cfg: &BpConfig, early_stop: bool) -> BpResult {
        let n = self.n_cols();
        let max_iters = cfg.iterations_for(n);
        let ne = self.edge_check.len();
        let mut q = vec![0f64; ne];
        let mut r = vec![0f64; ne];
        for j in 0..n {
            for e in self.col_start[j]..self.col_start[j + 1] {
                q[e] = self.prior_llr[j];
            }
        }
        let mut post = self.prior_llr.clone();
        let mut est = vec![0u8; n];
        let mut converged = false;
        let mut it = 0;
        while it < max_iters {
            it += 1;
            for i in 0..self.n_checks {
                let edges = &self.check_edges[self.check_start[i]..self.check_start[i + 1]];
                if edges.is_empty() {
                    continue;
                }
                let syn_neg = syndrome[i] != 0;
                match cfg.variant {
                    BpVariant::MinSum => {
                        let (mut m1, mut m2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                        let mut neg = syn_neg;
                        for &e in edges {
                            let v = q[e as usize];
                            neg ^= v < 0.0;
                            let a = v.abs();
                            if a < m1 {
                                m2 = m1;
                                m1 = a;
                                arg = e as usize;
                            } else if a < m2 {
                                m2 = a;
                            }
                        }
                        for &e in edges {
                            let e = e as usize;
                            let mag = if e == arg { m2 } else { m1 };
                            let sign_neg = neg ^ (q[e] < 0.0);
                            let mag = if mag.is_finite() { mag } else { 1e300 };
                            r[e] = if sign_neg { -cfg.scale * mag } else { cfg.scale * mag };
                        }
                    }
                    BpVariant::ProductSum => {
                        for &e in edges {
                            let e = e as usize;
                            let mut prod = if syn_neg { -1.0 } else { 1.0 };
                            for &f in edges {
                                if f as usize != e {
                                    prod *= (q[f as usize] / 2.0).tanh();
                                }
                            }
                            let prod = prod.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                            r[e] = 2.0 * prod.atanh();
                        }
                    }
                }
            }
            for j in 0..n {
                let range = self.col_start[j]..self.col_start[j + 1];
                let total: f64 = self.prior_llr[j] + r[range.clone()].iter().sum::<f64>();
                post[j] = total;
                for e in range {
                    q[e] = total - r[e];
                }
                est[j] = (total < 0.0) as u8;
            }
            converged = self.syndrome_of(&est) == syndrome;
            if converged && early_stop {
                break;
            }
        }
        BpResult { estimate: est, llrs: post, converged, iterations: it }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_syndrome_converges_immediately() {
        let g = SparseGraph::new(2, &[vec![0], vec![0, 1], vec![1]], &[0.1, 0.1, 0.1]);
        let r = g.bp(&[0, 0], &BpConfig::default());
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.estimate, vec![0, 0, 0]);
    }

    #[test]
    fn single_column_syndrome() {
        let g = SparseGraph::new(2, &[vec![0], vec![0, 1], vec![1]], &[0.1, 0.1, 0.1]);
        let r = g.bp(&[1, 1], &BpConfig::default());
        assert!(r.converged);
        assert_eq!(r.estimate, vec![0, 1, 0]);
    }

    /// Brute-force (max-)marginal LLRs over all fault patterns consistent
    /// with the syndrome.
    fn brute(cols: &[Vec<usize>], priors: &[f64], syn: &[u8], max: bool) -> Vec<f64> {
        let n = cols.len();
        let mut best = vec![[f64::NEG_INFINITY; 2]; n];
        let mut sum = vec![[0f64; 2]; n];
        for mask in 0u32..(1 << n) {
            let mut s = vec![0u8; syn.len()];
            let mut logp = 0.0;
            for j in 0..n {
                let on = mask >> j & 1 == 1;
                logp += if on { priors[j].ln() } else { (1.0 - priors[j]).ln() };
                if on {
                    for &i in &cols[j] {
                        s[i] ^= 1;
                    }
                }
            }
            if s != syn {
                continue;
            }
            for j in 0..n {
                let b = (mask >> j & 1) as usize;
                best[j][b] = best[j][b].max(logp);
                sum[j][b] += logp.exp();
            }
        }
        (0..n)
            .map(|j| if max { best[j][0] - best[j][1] } else { (sum[j][0] / sum[j][1]).ln() })
            .collect()
    }

    #[test]
    fn tree_marginals_exact() {
        // Tree: checks 0..3, faults as edges of a path-like bipartite tree.
        let cols = vec![vec![0], vec![0, 1], vec![1, 2], vec![2], vec![1], vec![2, 3], vec![3]];
        let priors = [0.1, 0.05, 0.2, 0.15, 0.08, 0.12, 0.3];
        let g = SparseGraph::new(4, &cols, &priors);
        for syn in [[1u8, 0, 1, 0], [0, 1, 1, 1], [1, 1, 0, 0]] {
            let cfg_ps = BpConfig { variant: BpVariant::ProductSum, scale: 1.0, ratio: 1.0, max_iters: Some(8) };
            let cfg_ms = BpConfig { variant: BpVariant::MinSum, scale: 1.0, ratio: 1.0, max_iters: Some(8) };
            let exact = brute(&cols, &priors, &syn, false);
            let maxm = brute(&cols, &priors, &syn, true);
            // The tree has diameter 8; run the full cap.
            let ps = g.bp_with(&syn, &cfg_ps, false).llrs;
            let ms = g.bp_with(&syn, &cfg_ms, false).llrs;
            for j in 0..cols.len() {
                assert!((ps[j] - exact[j]).abs() < 1e-9, "sum-product {j}: {} vs {}", ps[j], exact[j]);
                assert!((ms[j] - maxm[j]).abs() < 1e-9, "min-sum {j}: {} vs {}", ms[j], maxm[j]);
            }
        }
    }

    #[test]
    fn iteration_cap_from_ratio() {
        let cfg = BpConfig::hgp_default();
        assert_eq!(cfg.iterations_for(101), 21);
        assert_eq!(BpConfig::lp_default().iterations_for(1), 1);
        assert!(BpConfig { scale: 0.0, ..cfg }.validate().is_err());
    }
}
