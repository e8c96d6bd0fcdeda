//! Sliding-window space-time decoding.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bp::{BpConfig, SparseGraph};
use super::graph::{xor_prob, DecodingGraph};
use super::osd::{osd, OsdConfig};
use super::DecodeError;
use crate::gf2::{BinaryMatrix, BinaryVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Code cycles per window.
    pub window: usize,
    /// Residual prior is `residual_prior_ratio * base_error_rate`.
    pub residual_prior_ratio: f64,
    pub base_error_rate: f64,
    /// Also run OSD inside noisy windows when BP does not converge.
    pub osd_in_windows: bool,
}

impl WindowConfig {
    pub fn hgp(p_gate: f64) -> Self {
        WindowConfig { window: 3, residual_prior_ratio: 5.0, base_error_rate: p_gate, osd_in_windows: true }
    }

    pub fn lp(p_gate: f64) -> Self {
        WindowConfig { window: 3, residual_prior_ratio: 1.0, base_error_rate: p_gate, osd_in_windows: true }
    }

    pub fn residual_prior(&self) -> f64 {
        (self.residual_prior_ratio * self.base_error_rate).min(0.5)
    }
}

struct Plan {
    rounds: (usize, usize),
    commit: Vec<bool>,
    det_ids: Vec<usize>,
    graph: SparseGraph,
    full_dets: Vec<Vec<usize>>,
    obs: Vec<Vec<usize>>,
    use_osd: bool,
}

/// Decoder over non-overlapping windows of detector rounds. Each noisy
/// window is decoded with BP together with a one-round look-ahead buffer,
/// and the chosen columns that start inside the window are committed:
/// their detector flips update the remaining syndrome and their observable
/// flips accumulate into the prediction. The last round is decoded with
/// BP+OSD.
pub struct WindowedDecoder {
    plans: Vec<Plan>,
    n_detectors: usize,
    n_observables: usize,
    pub bp: BpConfig,
    pub osd: OsdConfig,
}

impl WindowedDecoder {
    pub fn new(g: &DecodingGraph, cfg: WindowConfig, bp: BpConfig, osd: OsdConfig) -> Result<Self, DecodeError> {
        if cfg.window == 0 {
            return Err(DecodeError::InvalidConfig("window must be at least one cycle".into()));
        }
        bp.validate().map_err(DecodeError::InvalidConfig)?;
        let last = check_rounds(g)?;
        let mut parts = Vec::new();
        let mut a = 1;
        while a < last {
            let b = (a + cfg.window - 1).min(last - 1);
            parts.push((a, b, b + 1, cfg.osd_in_windows));
            a = b + 1;
        }
        parts.push((last, last, last, true));
        Ok(Self::from_parts(g, &parts, cfg.residual_prior(), bp, osd))
    }

    /// A single BP+OSD pass over the whole graph, with the residual layer at
    /// the first round.
    pub fn global(g: &DecodingGraph, p_res: f64, bp: BpConfig, osd: OsdConfig) -> Result<Self, DecodeError> {
        bp.validate().map_err(DecodeError::InvalidConfig)?;
        let last = check_rounds(g)?;
        Ok(Self::from_parts(g, &[(1, last, last, true)], p_res, bp, osd))
    }

    fn from_parts(g: &DecodingGraph, parts: &[(usize, usize, usize, bool)], p_res: f64, bp: BpConfig, osd: OsdConfig) -> Self {
        let plans = parts
            .iter()
            .map(|&(a, b, end, use_osd)| {
                let det_ids: Vec<usize> = (0..g.n_detectors).filter(|&d| (a..=end).contains(&g.detector_rounds[d])).collect();
                let local: HashMap<usize, usize> = det_ids.iter().enumerate().map(|(i, &d)| (d, i)).collect();
                let mut index: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
                let mut full_dets = Vec::new();
                let mut obs = Vec::new();
                let mut priors: Vec<f64> = Vec::new();
                let mut commit = Vec::new();
                let mut add = |dets: &Vec<usize>, o: &Vec<usize>, p: f64, c: bool| {
                    if !dets.iter().any(|d| local.contains_key(d)) {
                        return;
                    }
                    match index.get(&(dets.clone(), o.clone())) {
                        Some(&j) => priors[j] = xor_prob(priors[j], p),
                        None => {
                            index.insert((dets.clone(), o.clone()), priors.len());
                            full_dets.push(dets.clone());
                            obs.push(o.clone());
                            priors.push(p);
                            commit.push(c);
                        }
                    }
                };
                for (col, &r) in g.columns.iter().zip(&g.window_map) {
                    if (a..=end).contains(&r) {
                        add(&col.dets, &col.obs, col.prior, r <= b);
                    }
                }
                if p_res > 0.0 {
                    if let Some(layer) = g.residual_layers.iter().find(|l| l.round == a) {
                        for (_, _, d, o) in &layer.faults {
                            add(d, o, p_res, true);
                        }
                    }
                }
                let cols: Vec<Vec<usize>> = full_dets
                    .iter()
                    .map(|ds: &Vec<usize>| ds.iter().filter_map(|d| local.get(d).copied()).collect())
                    .collect();
                let graph = SparseGraph::new(det_ids.len(), &cols, &priors);
                Plan { rounds: (a, b), commit, det_ids, graph, full_dets, obs, use_osd }
            })
            .collect();
        WindowedDecoder { plans, n_detectors: g.n_detectors, n_observables: g.n_observables, bp, osd }
    }

    /// `(first round, last round, columns)` per window.
    pub fn windows(&self) -> Vec<(usize, usize, usize)> {
        self.plans.iter().map(|p| (p.rounds.0, p.rounds.1, p.graph.n_cols())).collect()
    }

    /// Predicted observable flips for one shot.
    pub fn decode(&self, syndrome: &BinaryVector) -> Result<BinaryVector, DecodeError> {
        if syndrome.len() != self.n_detectors {
            return Err(DecodeError::Misaligned(format!(
                "syndrome has {} bits, graph has {} detectors",
                syndrome.len(),
                self.n_detectors
            )));
        }
        Ok(self.decode_words(syndrome.words()))
    }

    fn decode_words(&self, words: &[u64]) -> BinaryVector {
        let mut syn = BinaryVector::from_words(self.n_detectors, words.to_vec());
        let mut pred = BinaryVector::zeros(self.n_observables);
        for p in &self.plans {
            let local: Vec<u8> = p.det_ids.iter().map(|&d| syn.get(d) as u8).collect();
            if local.iter().all(|&b| b == 0) {
                continue;
            }
            let r = p.graph.bp(&local, &self.bp);
            let est = if !r.converged && p.use_osd { osd(&p.graph, &r.llrs, &local, &self.osd).estimate } else { r.estimate };
            for (j, &e) in est.iter().enumerate() {
                if e != 0 && p.commit[j] {
                    p.full_dets[j].iter().for_each(|&d| syn.flip(d));
                    p.obs[j].iter().for_each(|&o| pred.flip(o));
                }
            }
        }
        pred
    }

    /// Predictions for every row of a shots × detectors matrix.
    pub fn decode_batch(&self, dets: &BinaryMatrix) -> Result<BinaryMatrix, DecodeError> {
        if dets.cols() != self.n_detectors {
            return Err(DecodeError::Misaligned(format!(
                "{} detector columns, graph has {}",
                dets.cols(),
                self.n_detectors
            )));
        }
        let preds: Vec<BinaryVector> = (0..dets.rows()).into_par_iter().map(|s| self.decode_words(dets.row(s))).collect();
        Ok(BinaryMatrix::from_rows(self.n_observables, &preds))
    }
}

fn check_rounds(g: &DecodingGraph) -> Result<usize, DecodeError> {
    if let Some(d) = g.detector_rounds.iter().position(|&r| r == 0) {
        return Err(DecodeError::Misaligned(format!("detector {d} carries no round index")));
    }
    Ok(g.max_round().max(1))
}

/// One-shot convenience wrapper.
pub fn windowed_decode(syndrome: &BinaryVector, decoder: &WindowedDecoder) -> Result<BinaryVector, DecodeError> {
    decoder.decode(syndrome)
}
