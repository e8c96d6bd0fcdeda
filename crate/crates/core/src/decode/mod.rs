//! Circuit-level decoding: fault graph construction, BP, OSD and the
//! sliding-window decoder, plus greedy and confinement diagnostics.

mod bp;
mod diag;
mod graph;
mod osd;
mod window;

pub use bp::{prior_llr, BpConfig, BpResult, BpVariant, SparseGraph};
pub use diag::{confinement_probe, greedy_flip_decode, ConfinementRow, GreedyOutcome};
pub use graph::{
    add_residual_layer, build_decoding_graph, build_decoding_graph_with, code_capacity_graph, xor_prob, DecodingGraph,
    FaultColumn, GraphOptions, ResidualLayer,
};
pub use osd::{osd, OsdConfig, OsdResult};
pub use window::{windowed_decode, WindowConfig, WindowedDecoder};

use crate::codes::CssCode;
use crate::gf2::{BinaryMatrix, BinaryVector};

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("invalid decoder configuration: {0}")]
    InvalidConfig(String),
    #[error("window/detector misalignment: {0}")]
    Misaligned(String),
    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("shot count mismatch: {0} predictions vs {1} observations")]
    ShotMismatch(usize, usize),
}

impl DecodingGraph {
    pub fn sparse(&self) -> SparseGraph {
        let cols: Vec<Vec<usize>> = self.columns.iter().map(|c| c.dets.clone()).collect();
        SparseGraph::new(self.n_detectors, &cols, &self.priors())
    }

    /// Observable flips implied by a fault estimate.
    pub fn observables_of(&self, estimate: &[u8]) -> BinaryVector {
        let mut v = BinaryVector::zeros(self.n_observables);
        for (c, &e) in self.columns.iter().zip(estimate) {
            if e != 0 {
                c.obs.iter().for_each(|&o| v.flip(o));
            }
        }
        v
    }
}

fn syndrome_bits(g: &DecodingGraph, syndrome: &BinaryVector) -> Result<Vec<u8>, DecodeError> {
    if syndrome.len() != g.n_detectors {
        return Err(DecodeError::Misaligned(format!(
            "syndrome has {} bits, graph has {} detectors",
            syndrome.len(),
            g.n_detectors
        )));
    }
    Ok(syndrome.to_bits())
}

pub fn bp_decode(g: &DecodingGraph, syndrome: &BinaryVector, cfg: &BpConfig) -> Result<BpResult, DecodeError> {
    cfg.validate().map_err(DecodeError::InvalidConfig)?;
    Ok(g.sparse().bp(&syndrome_bits(g, syndrome)?, cfg))
}

pub fn osd_postprocess(g: &DecodingGraph, llrs: &[f64], syndrome: &BinaryVector, cfg: &OsdConfig) -> Result<OsdResult, DecodeError> {
    if llrs.len() != g.n_columns() {
        return Err(DecodeError::Misaligned(format!("{} llrs for {} columns", llrs.len(), g.n_columns())));
    }
    Ok(osd(&g.sparse(), llrs, &syndrome_bits(g, syndrome)?, cfg))
}

/// Number of shots in which any observable was mispredicted.
pub fn logical_failure(predictions: &BinaryMatrix, truth: &BinaryMatrix) -> Result<usize, DecodeError> {
    if predictions.shape() != truth.shape() {
        return Err(DecodeError::ShotMismatch(predictions.rows(), truth.rows()));
    }
    Ok((0..truth.rows()).filter(|&s| predictions.row(s) != truth.row(s)).count())
}

/// Greedy decoding of a code-capacity syndrome against `hz` (X errors).
pub fn greedy_flip_decode_code(code: &CssCode, syndrome: &BinaryVector, c: usize) -> GreedyOutcome {
    greedy_flip_decode(&code.hz, syndrome, c)
}
