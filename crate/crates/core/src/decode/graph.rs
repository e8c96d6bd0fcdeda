//! Space-time decoding graph: detectors × fault classes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction};
use crate::codes::CssCode;
use crate::gf2::{iter_ones, BinaryMatrix};
use crate::sim::FaultLocation;

/// One fault class: every fault in it has the same detector and observable
/// signature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultColumn {
    pub dets: Vec<usize>,
    pub obs: Vec<usize>,
    pub prior: f64,
}

/// Single-qubit data faults available at the start of a round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualLayer {
    pub round: usize,
    /// `(qubit, pauli)` with pauli 1 = X, 2 = Z, and its signature.
    pub faults: Vec<(usize, u8, Vec<usize>, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingGraph {
    pub n_detectors: usize,
    pub n_observables: usize,
    pub columns: Vec<FaultColumn>,
    /// Earliest detector round of each column.
    pub window_map: Vec<usize>,
    pub detector_rounds: Vec<usize>,
    pub residual_layers: Vec<ResidualLayer>,
    /// Contributing faults per column; empty when not recorded.
    #[serde(skip)]
    pub sources: Vec<Vec<FaultLocation>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphOptions {
    /// Split each site into independent single-qubit X/Z component columns.
    /// When false, every Pauli of a site gets its own column.
    pub decompose: bool,
    pub record_sources: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { decompose: true, record_sources: true }
    }
}

/// Probability that exactly one of two independent mechanisms fires.
pub fn xor_prob(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

struct Accumulator {
    index: HashMap<Vec<u64>, usize>,
    sigs: Vec<Vec<u64>>,
    priors: Vec<f64>,
    sources: Vec<Vec<FaultLocation>>,
    record: bool,
}

impl Accumulator {
    fn add(&mut self, sig: &[u64], p: f64, src: FaultLocation) {
        if p <= 0.0 || sig.iter().all(|&w| w == 0) {
            return;
        }
        match self.index.get(sig) {
            Some(&j) => {
                self.priors[j] = xor_prob(self.priors[j], p);
                if self.record {
                    self.sources[j].push(src);
                }
            }
            None => {
                self.index.insert(sig.to_vec(), self.sigs.len());
                self.sigs.push(sig.to_vec());
                self.priors.push(p);
                self.sources.push(if self.record { vec![src] } else { Vec::new() });
            }
        }
    }
}

fn split_sig(sig: &[u64], nd: usize) -> (Vec<usize>, Vec<usize>) {
    let mut d = Vec::new();
    let mut o = Vec::new();
    for i in iter_ones(sig) {
        if i < nd {
            d.push(i);
        } else {
            o.push(i - nd);
        }
    }
    (d, o)
}

pub fn build_decoding_graph(c: &Circuit) -> DecodingGraph {
    build_decoding_graph_with(c, GraphOptions::default())
}

/// Propagates detector/observable sensitivities backwards through the
/// circuit; at each noise site the current sensitivities are exactly the
/// signatures of the faults there.
pub fn build_decoding_graph_with(c: &Circuit, opts: GraphOptions) -> DecodingGraph {
    let ann = c.annotations();
    let nd = ann.detectors.len();
    let no = ann.observables.len();
    let w = (nd + no).div_ceil(64).max(1);
    let nq = c.n_qubits();
    let n_meas = c.num_measurements();
    let mut meas_sig = vec![0u64; n_meas * w];
    for (d, refs) in ann.detectors.iter().enumerate() {
        for &m in refs {
            meas_sig[m * w + d / 64] ^= 1 << (d % 64);
        }
    }
    for (o, refs) in ann.observables.iter().enumerate() {
        let b = nd + o;
        for &m in refs {
            meas_sig[m * w + b / 64] ^= 1 << (b % 64);
        }
    }
    let mut sx = vec![0u64; nq * w];
    let mut sz = vec![0u64; nq * w];
    let xor_rows = |s: &mut [u64], dst: usize, src: &[u64]| {
        for k in 0..w {
            s[dst * w + k] ^= src[k];
        }
    };
    let mut acc = Accumulator {
        index: HashMap::new(),
        sigs: Vec::new(),
        priors: Vec::new(),
        sources: Vec::new(),
        record: opts.record_sources,
    };
    let mut residual = Vec::new();
    let mut meas_cursor = n_meas;
    let mut next_meas_base = n_meas;
    let mut tmp = vec![0u64; w];
    for (k, ins) in c.instructions().iter().enumerate().rev() {
        match ins {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                for &q in t {
                    sx[q * w..(q + 1) * w].fill(0);
                    sz[q * w..(q + 1) * w].fill(0);
                }
            }
            Instruction::H(t) => {
                for &q in t {
                    for kk in 0..w {
                        std::mem::swap(&mut sx[q * w + kk], &mut sz[q * w + kk]);
                    }
                }
            }
            Instruction::Cnot(t) => {
                for p in t.chunks_exact(2) {
                    let (a, b) = (p[0], p[1]);
                    tmp.copy_from_slice(&sx[b * w..(b + 1) * w]);
                    xor_rows(&mut sx, a, &tmp);
                    tmp.copy_from_slice(&sz[a * w..(a + 1) * w]);
                    xor_rows(&mut sz, b, &tmp);
                }
            }
            Instruction::Cz(t) => {
                for p in t.chunks_exact(2) {
                    let (a, b) = (p[0], p[1]);
                    tmp.copy_from_slice(&sz[b * w..(b + 1) * w]);
                    xor_rows(&mut sx, a, &tmp);
                    tmp.copy_from_slice(&sz[a * w..(a + 1) * w]);
                    xor_rows(&mut sx, b, &tmp);
                }
            }
            Instruction::MeasureZ(t) | Instruction::MeasureX(t) => {
                meas_cursor -= t.len();
                next_meas_base = meas_cursor;
                let s = if matches!(ins, Instruction::MeasureZ(_)) { &mut sx } else { &mut sz };
                for (i, &q) in t.iter().enumerate() {
                    let m = meas_cursor + i;
                    for kk in 0..w {
                        s[q * w + kk] ^= meas_sig[m * w + kk];
                    }
                }
            }
            Instruction::FlipMeas(p) => {
                let next = c.instructions()[k + 1..].iter().find(|j| j.is_measurement());
                let n = next.map_or(0, |j| j.targets().len());
                for i in 0..n {
                    let m = next_meas_base + i;
                    acc.add(&meas_sig[m * w..(m + 1) * w], *p, FaultLocation { instruction: k, target: i, pauli: 1 });
                }
            }
            Instruction::Depol1(p, t) => {
                for (i, &q) in t.iter().enumerate() {
                    let x = &sx[q * w..(q + 1) * w];
                    let z = &sz[q * w..(q + 1) * w];
                    let loc = |pauli| FaultLocation { instruction: k, target: i, pauli };
                    if opts.decompose {
                        acc.add(x, 2.0 * p / 3.0, loc(1));
                        acc.add(z, 2.0 * p / 3.0, loc(2));
                    } else {
                        let y: Vec<u64> = x.iter().zip(z).map(|(a, b)| a ^ b).collect();
                        acc.add(x, p / 3.0, loc(1));
                        acc.add(z, p / 3.0, loc(2));
                        acc.add(&y, p / 3.0, loc(3));
                    }
                }
            }
            Instruction::Depol2(p, t) => {
                for (i, pair) in t.chunks_exact(2).enumerate() {
                    let (a, b) = (pair[0], pair[1]);
                    let comp = [
                        sx[a * w..(a + 1) * w].to_vec(),
                        sz[a * w..(a + 1) * w].to_vec(),
                        sx[b * w..(b + 1) * w].to_vec(),
                        sz[b * w..(b + 1) * w].to_vec(),
                    ];
                    let loc = |pauli| FaultLocation { instruction: k, target: i, pauli };
                    if opts.decompose {
                        for (bit, sig) in comp.iter().enumerate() {
                            acc.add(sig, 8.0 * p / 15.0, loc(1 << bit));
                        }
                    } else {
                        for pauli in 1u8..16 {
                            let mut sig = vec![0u64; w];
                            for (bit, cs) in comp.iter().enumerate() {
                                if pauli >> bit & 1 == 1 {
                                    sig.iter_mut().zip(cs).for_each(|(s, c)| *s ^= c);
                                }
                            }
                            acc.add(&sig, p / 15.0, loc(pauli));
                        }
                    }
                }
            }
            Instruction::Round(t) => {
                let mut faults = Vec::new();
                for q in 0..nq {
                    for (pauli, s) in [(1u8, &sx), (2u8, &sz)] {
                        let sig = &s[q * w..(q + 1) * w];
                        if sig.iter().any(|&x| x != 0) {
                            let (d, o) = split_sig(sig, nd);
                            faults.push((q, pauli, d, o));
                        }
                    }
                }
                residual.push(ResidualLayer { round: *t, faults });
            }
            Instruction::Tick | Instruction::Detector { .. } | Instruction::Observable { .. } => {}
        }
    }
    residual.reverse();
    let max_round = ann.detector_rounds.iter().copied().max().unwrap_or(0);
    let mut columns = Vec::with_capacity(acc.sigs.len());
    let mut window_map = Vec::with_capacity(acc.sigs.len());
    for (sig, &prior) in acc.sigs.iter().zip(&acc.priors) {
        let (dets, obs) = split_sig(sig, nd);
        window_map.push(dets.iter().map(|&d| ann.detector_rounds[d]).min().unwrap_or(max_round));
        columns.push(FaultColumn { dets, obs, prior });
    }
    DecodingGraph {
        n_detectors: nd,
        n_observables: no,
        columns,
        window_map,
        detector_rounds: ann.detector_rounds,
        residual_layers: residual,
        sources: acc.sources,
    }
}

impl DecodingGraph {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn check_matrix(&self) -> BinaryMatrix {
        let ones: Vec<(usize, usize)> =
            self.columns.iter().enumerate().flat_map(|(j, c)| c.dets.iter().map(move |&d| (d, j))).collect();
        BinaryMatrix::from_sparse(self.n_detectors, self.columns.len(), &ones).expect("indices in range")
    }

    pub fn obs_matrix(&self) -> BinaryMatrix {
        let ones: Vec<(usize, usize)> =
            self.columns.iter().enumerate().flat_map(|(j, c)| c.obs.iter().map(move |&o| (o, j))).collect();
        BinaryMatrix::from_sparse(self.n_observables, self.columns.len(), &ones).expect("indices in range")
    }

    pub fn priors(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.prior).collect()
    }

    pub fn max_round(&self) -> usize {
        self.detector_rounds.iter().copied().max().unwrap_or(0)
    }

    /// Insert a column, merging with an identical signature.
    pub fn add_column(&mut self, mut dets: Vec<usize>, mut obs: Vec<usize>, prior: f64) {
        if prior <= 0.0 || (dets.is_empty() && obs.is_empty()) {
            return;
        }
        dets.sort_unstable();
        obs.sort_unstable();
        if let Some(j) = self.columns.iter().position(|c| c.dets == dets && c.obs == obs) {
            self.columns[j].prior = xor_prob(self.columns[j].prior, prior);
            return;
        }
        let round = dets.iter().map(|&d| self.detector_rounds[d]).min().unwrap_or(self.max_round());
        self.columns.push(FaultColumn { dets, obs, prior });
        self.window_map.push(round);
        if !self.sources.is_empty() {
            self.sources.push(Vec::new());
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        serde_json::from_value(v.clone())
    }
}

/// Adds X and Z data-fault columns from the layer at the start of the first
/// round, each with prior `p_res`.
pub fn add_residual_layer(g: &DecodingGraph, p_res: f64) -> DecodingGraph {
    let mut out = g.clone();
    if p_res <= 0.0 {
        return out;
    }
    let first = g.residual_layers.iter().min_by_key(|l| l.round);
    if let Some(layer) = first {
        for (_, _, d, o) in &layer.faults {
            out.add_column(d.clone(), o.clone(), p_res);
        }
    }
    out
}

/// Code-capacity graph: detectors are the Z checks then the X checks;
/// observables are the Z logicals then the X logicals. One column per
/// single-qubit X and Z error.
pub fn code_capacity_graph(code: &CssCode, p: f64) -> DecodingGraph {
    let (mz, mx, k) = (code.hz.rows(), code.hx.rows(), code.k);
    let mut g = DecodingGraph {
        n_detectors: mz + mx,
        n_observables: 2 * k,
        columns: Vec::new(),
        window_map: Vec::new(),
        detector_rounds: vec![1; mz + mx],
        residual_layers: Vec::new(),
        sources: Vec::new(),
    };
    let hz_t = code.hz.transpose();
    let hx_t = code.hx.transpose();
    let lz_t = code.logicals_z.transpose();
    let lx_t = code.logicals_x.transpose();
    for q in 0..code.n {
        let d = hz_t.row_support(q);
        let o = lz_t.row_support(q);
        g.add_column(d, o, p);
    }
    for q in 0..code.n {
        let d = hx_t.row_support(q).into_iter().map(|r| mz + r).collect();
        let o = lx_t.row_support(q).into_iter().map(|r| k + r).collect();
        g.add_column(d, o, p);
    }
    g
}
