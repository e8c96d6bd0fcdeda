//! Syndrome-extraction generators: product coloration (HGP and flattened LP),
//! pipelined product coloration, generic colored rounds and memory
//! experiments.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::coloring::{bipartite_edge_coloring, EdgeColoring};
use super::{Circuit, CircuitError, Instruction};
use crate::codes::{CodeStructure, CssCode, ProductLayout, TannerGraph};
use crate::gf2::BinaryMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EntanglingBasis {
    #[default]
    Cnot,
    CzH,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemoryBasis {
    Z,
    X,
}

/// Colorings of the two factor Tanner graphs. `horizontal` colors the second
/// factor (H2 or B2), `vertical` the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colorings {
    pub horizontal: EdgeColoring,
    pub vertical: EdgeColoring,
}

impl Colorings {
    pub fn max_colors(&self) -> usize {
        self.horizontal.n_colors.max(self.vertical.n_colors)
    }
}

/// A layer of `(check row, data qubit)` interactions.
pub type Layer = Vec<(usize, usize)>;

/// Color layers of a product code, split by check type and direction.
#[derive(Clone, Debug, Default)]
pub struct ProductLayers {
    pub x_h: Vec<Layer>,
    pub x_v: Vec<Layer>,
    pub z_h: Vec<Layer>,
    pub z_v: Vec<Layer>,
    pub layout: Option<ProductLayout>,
}

struct Factor {
    graph: TannerGraph,
    exp: HashMap<(usize, usize), u32>,
}

fn hgp_factor(h: &BinaryMatrix) -> Factor {
    let graph = TannerGraph::from_matrix(h);
    let exp = graph.edges.iter().map(|&e| (e, 0)).collect();
    Factor { graph, exp }
}

fn lp_factor(b: &crate::codes::RingMatrix) -> Result<Factor, CircuitError> {
    let mut edges = Vec::new();
    let mut exp = HashMap::new();
    for r in 0..b.rows {
        for c in 0..b.cols {
            match b.get(r, c) {
                [] => {}
                [e] => {
                    edges.push((r, c));
                    exp.insert((r, c), *e);
                }
                _ => {
                    return Err(CircuitError::StructureMismatch(format!(
                        "base entry ({r}, {c}) is not a monomial"
                    )))
                }
            }
        }
    }
    Ok(Factor { graph: TannerGraph { n_bits: b.cols, n_checks: b.rows, edges }, exp })
}

/// (vertical factor, horizontal factor, layout).
fn factors(code: &CssCode) -> Result<(Factor, Factor, ProductLayout), CircuitError> {
    let layout = code
        .layout()
        .ok_or_else(|| CircuitError::StructureMismatch("code has no product factors".into()))?;
    match &code.structure {
        CodeStructure::Hgp { h1, h2 } => Ok((hgp_factor(h1), hgp_factor(h2), layout)),
        CodeStructure::Lp { b1, b2 } => Ok((lp_factor(b1)?, lp_factor(b2)?, layout)),
        CodeStructure::Generic => unreachable!("layout exists only for product codes"),
    }
}

/// König colorings of both factor graphs (base graphs for LP).
pub fn default_colorings(code: &CssCode) -> Result<Colorings, CircuitError> {
    let (v, h, _) = factors(code)?;
    Ok(Colorings { horizontal: bipartite_edge_coloring(&h.graph), vertical: bipartite_edge_coloring(&v.graph) })
}

fn same_graph(a: &TannerGraph, b: &TannerGraph) -> bool {
    let mut ea = a.edges.clone();
    let mut eb = b.edges.clone();
    ea.sort_unstable();
    eb.sort_unstable();
    a.n_bits == b.n_bits && a.n_checks == b.n_checks && ea == eb
}

/// Per-color interaction layers of the product coloration circuit.
///
/// With lift `l` a base edge of exponent `e` becomes `l` parallel
/// interactions, one per copy; shifts follow the lifted check matrices.
pub fn product_layers(code: &CssCode, col: &Colorings) -> Result<ProductLayers, CircuitError> {
    let (fv, fh, lay) = factors(code)?;
    if !same_graph(&fh.graph, &col.horizontal.graph) || !same_graph(&fv.graph, &col.vertical.graph) {
        return Err(CircuitError::StructureMismatch("colorings do not belong to the factor graphs".into()));
    }
    if !col.horizontal.is_proper() || !col.vertical.is_proper() {
        return Err(CircuitError::InvalidParameter("improper edge coloring".into()));
    }
    let l = lay.lift;
    let shift = |t: usize, e: u32| (t + e as usize) % l;
    let unshift = |t: usize, e: u32| (t + l - e as usize % l) % l;
    let mut out = ProductLayers { layout: Some(lay), ..Default::default() };
    for c in 0..col.horizontal.n_colors {
        let (mut xh, mut zh) = (Vec::new(), Vec::new());
        for (j, b) in col.horizontal.edges_of(c) {
            let e = fh.exp[&(j, b)];
            for t in 0..l {
                for a in 0..lay.n1 {
                    xh.push((lay.x_check(a, j, t), lay.vv(a, b, shift(t, e))));
                }
                for i in 0..lay.r1 {
                    zh.push((lay.z_check(i, b, t), lay.cc(i, j, unshift(t, e))));
                }
            }
        }
        if !xh.is_empty() {
            out.x_h.push(xh);
        }
        if !zh.is_empty() {
            out.z_h.push(zh);
        }
    }
    for c in 0..col.vertical.n_colors {
        let (mut xv, mut zv) = (Vec::new(), Vec::new());
        for (i, a) in col.vertical.edges_of(c) {
            let e = fv.exp[&(i, a)];
            for t in 0..l {
                for j in 0..lay.r2 {
                    xv.push((lay.x_check(a, j, t), lay.cc(i, j, unshift(t, e))));
                }
                for b in 0..lay.n2 {
                    zv.push((lay.z_check(i, b, t), lay.vv(a, b, shift(t, e))));
                }
            }
        }
        if !xv.is_empty() {
            out.x_v.push(xv);
        }
        if !zv.is_empty() {
            out.z_v.push(zv);
        }
    }
    Ok(out)
}

/// Colored layers for an arbitrary CSS code: one König coloring of each
/// check-qubit Tanner graph.
pub fn generic_layers(code: &CssCode) -> (Vec<Layer>, Vec<Layer>) {
    let layers = |h: &BinaryMatrix| -> Vec<Layer> {
        let col = bipartite_edge_coloring(&TannerGraph::from_matrix(h));
        (0..col.n_colors).map(|c| col.edges_of(c)).filter(|l| !l.is_empty()).collect()
    };
    (layers(&code.hx), layers(&code.hz))
}

enum Schedule {
    Sequential { x: Vec<Layer>, z: Vec<Layer> },
    Pipelined { p: ProductLayers },
}

struct Emitter<'a> {
    code: &'a CssCode,
    basis: EntanglingBasis,
    ins: Vec<Instruction>,
    n_meas: usize,
    /// Data qubits currently in the Hadamard frame (CZ+H only).
    frame_h: Vec<bool>,
}

impl<'a> Emitter<'a> {
    fn new(code: &'a CssCode, basis: EntanglingBasis) -> Self {
        Emitter { code, basis, ins: Vec::new(), n_meas: 0, frame_h: vec![false; code.n] }
    }

    fn n_qubits(&self) -> usize {
        self.code.n + self.code.hx.rows() + self.code.hz.rows()
    }

    fn xa(&self, r: usize) -> usize {
        self.code.n + r
    }

    fn za(&self, r: usize) -> usize {
        self.code.n + self.code.hx.rows() + r
    }

    fn x_ancillas(&self) -> Vec<usize> {
        (0..self.code.hx.rows()).map(|r| self.xa(r)).collect()
    }

    fn z_ancillas(&self) -> Vec<usize> {
        (0..self.code.hz.rows()).map(|r| self.za(r)).collect()
    }

    /// Measure and return the absolute record index of the first outcome.
    fn measure(&mut self, x_basis: bool, qubits: Vec<usize>) -> usize {
        let base = self.n_meas;
        self.n_meas += qubits.len();
        if !qubits.is_empty() {
            self.ins.push(if x_basis { Instruction::MeasureX(qubits) } else { Instruction::MeasureZ(qubits) });
        }
        base
    }

    fn reset_x_anc(&mut self) {
        let q = self.x_ancillas();
        if !q.is_empty() {
            self.ins.push(Instruction::ResetX(q));
        }
    }

    fn reset_z_anc(&mut self) {
        let q = self.z_ancillas();
        if q.is_empty() {
            return;
        }
        self.ins.push(match self.basis {
            EntanglingBasis::Cnot => Instruction::ResetZ(q),
            EntanglingBasis::CzH => Instruction::ResetX(q),
        });
    }

    fn measure_x_anc(&mut self) -> usize {
        let q = self.x_ancillas();
        self.measure(true, q)
    }

    fn measure_z_anc(&mut self) -> usize {
        let q = self.z_ancillas();
        self.measure(self.basis == EntanglingBasis::CzH, q)
    }

    /// Put the listed data qubits into (or out of) the Hadamard frame.
    fn ensure_frame(&mut self, qubits: impl IntoIterator<Item = usize>, want_h: bool) {
        if self.basis != EntanglingBasis::CzH {
            return;
        }
        let flip: Vec<usize> = qubits.into_iter().filter(|&q| self.frame_h[q] != want_h).collect();
        for &q in &flip {
            self.frame_h[q] = want_h;
        }
        if !flip.is_empty() {
            self.ins.push(Instruction::H(flip));
        }
    }

    /// One entangling layer from X-check and Z-check interaction lists.
    fn layer(&mut self, x: &[(usize, usize)], z: &[(usize, usize)]) {
        let mut t = Vec::with_capacity(2 * (x.len() + z.len()));
        for &(r, q) in x {
            t.extend([self.xa(r), q]);
        }
        match self.basis {
            EntanglingBasis::Cnot => {
                for &(r, q) in z {
                    t.extend([q, self.za(r)]);
                }
                self.ins.push(Instruction::Cnot(t));
            }
            EntanglingBasis::CzH => {
                for &(r, q) in z {
                    t.extend([self.za(r), q]);
                }
                self.ins.push(Instruction::Cz(t));
            }
        }
        self.ins.push(Instruction::Tick);
    }

    fn detector(&mut self, round: usize, recs: &[usize]) {
        let refs = recs.iter().map(|&r| self.n_meas - r).collect();
        self.ins.push(Instruction::Detector { round, refs });
    }

    fn finish(self) -> Result<Circuit, CircuitError> {
        let n = self.n_qubits();
        let mut ins = self.ins;
        if matches!(ins.last(), Some(Instruction::Tick)) {
            ins.pop();
        }
        Circuit::new(n, ins)
    }
}

fn touched(layers: &[Layer]) -> Vec<usize> {
    let mut q: Vec<usize> = layers.iter().flatten().map(|&(_, q)| q).collect();
    q.sort_unstable();
    q.dedup();
    q
}

/// Emit `rounds` rounds under `schedule`, with data initialization,
/// first-round detectors and transversal readout when `memory` is given.
/// Without it, only detectors between consecutive rounds are emitted.
fn emit(
    code: &CssCode,
    schedule: &Schedule,
    rounds: usize,
    memory: Option<MemoryBasis>,
    basis: EntanglingBasis,
) -> Result<Circuit, CircuitError> {
    if rounds == 0 {
        return Err(CircuitError::InvalidParameter("at least one round is required".into()));
    }
    let mut em = Emitter::new(code, basis);
    let (mx, mz) = (code.hx.rows(), code.hz.rows());
    let data: Vec<usize> = (0..code.n).collect();
    match memory {
        Some(MemoryBasis::Z) => em.ins.push(Instruction::ResetZ(data.clone())),
        Some(MemoryBasis::X) => em.ins.push(Instruction::ResetX(data.clone())),
        None => {}
    }
    let mut prev: Option<(usize, usize)> = None;
    let round_detectors = |em: &mut Emitter, t: usize, xb: usize, zb: usize, prev: Option<(usize, usize)>| {
        let first_x = memory == Some(MemoryBasis::X);
        let first_z = memory == Some(MemoryBasis::Z);
        for r in 0..mz {
            match prev {
                Some((_, pz)) => em.detector(t, &[zb + r, pz + r]),
                None if first_z => em.detector(t, &[zb + r]),
                None => {}
            }
        }
        for r in 0..mx {
            match prev {
                Some((px, _)) => em.detector(t, &[xb + r, px + r]),
                None if first_x => em.detector(t, &[xb + r]),
                None => {}
            }
        }
    };
    match schedule {
        Schedule::Sequential { x, z } => {
            let (xq, zq) = (touched(x), touched(z));
            for t in 1..=rounds {
                em.ins.push(Instruction::Round(t));
                em.reset_x_anc();
                em.ensure_frame(xq.iter().copied(), true);
                for l in x {
                    em.layer(l, &[]);
                }
                em.ensure_frame(xq.iter().copied(), false);
                let xb = em.measure_x_anc();
                em.reset_z_anc();
                em.ensure_frame(zq.iter().copied(), false);
                for l in z {
                    em.layer(&[], l);
                }
                let zb = em.measure_z_anc();
                round_detectors(&mut em, t, xb, zb, prev);
                prev = Some((xb, zb));
            }
        }
        Schedule::Pipelined { p } => {
            let lay = p.layout.expect("pipelined schedule needs a product layout");
            let vv: Vec<usize> = (0..lay.n_vv()).collect();
            let cc: Vec<usize> = (lay.n_vv()..lay.n_qubits()).collect();
            let step = |em: &mut Emitter, xl: Option<&Vec<Layer>>, zl: Option<&Vec<Layer>>| {
                let nx = xl.map_or(0, |l| l.len());
                let nz = zl.map_or(0, |l| l.len());
                for c in 0..nx.max(nz) {
                    let xs = xl.and_then(|l| l.get(c)).map_or(&[][..], |l| &l[..]);
                    let zs = zl.and_then(|l| l.get(c)).map_or(&[][..], |l| &l[..]);
                    em.layer(xs, zs);
                }
            };
            let mut x_rec = Vec::with_capacity(rounds);
            // Step 0: X_1 horizontal.
            em.ins.push(Instruction::Round(1));
            em.reset_x_anc();
            em.ensure_frame(vv.iter().copied(), true);
            step(&mut em, Some(&p.x_h), None);
            for t in 1..=rounds {
                // Vertical: X_t on CC, Z_t on VV.
                em.reset_z_anc();
                em.ensure_frame(cc.iter().copied(), true);
                em.ensure_frame(vv.iter().copied(), false);
                step(&mut em, Some(&p.x_v), Some(&p.z_v));
                x_rec.push(em.measure_x_anc());
                // Horizontal: X_{t+1} on VV, Z_t on CC.
                let next = t < rounds;
                em.ensure_frame(cc.iter().copied(), false);
                if next {
                    em.ins.push(Instruction::Round(t + 1));
                    em.reset_x_anc();
                    em.ensure_frame(vv.iter().copied(), true);
                }
                step(&mut em, next.then_some(&p.x_h), Some(&p.z_h));
                let zb = em.measure_z_anc();
                round_detectors(&mut em, t, x_rec[t - 1], zb, prev);
                prev = Some((x_rec[t - 1], zb));
            }
            em.ensure_frame(data.iter().copied(), false);
        }
    }
    if let Some(mb) = memory {
        em.ensure_frame(data.iter().copied(), false);
        em.ins.push(Instruction::Round(rounds + 1));
        let (h, last, logicals) = match mb {
            MemoryBasis::Z => (&code.hz, prev.map(|p| p.1), &code.logicals_z),
            MemoryBasis::X => (&code.hx, prev.map(|p| p.0), &code.logicals_x),
        };
        let db = em.measure(mb == MemoryBasis::X, data.clone());
        let last = last.expect("at least one round");
        for r in 0..h.rows() {
            let mut recs: Vec<usize> = h.row_support(r).into_iter().map(|q| db + q).collect();
            recs.push(last + r);
            em.detector(rounds + 1, &recs);
        }
        for (id, row) in (0..logicals.rows()).enumerate() {
            let refs = logicals.row_support(row).into_iter().map(|q| em.n_meas - (db + q)).collect();
            em.ins.push(Instruction::Observable { id, refs });
        }
    }
    em.finish()
}

fn sequential_from_product(p: ProductLayers) -> Schedule {
    let mut x = p.x_h;
    x.extend(p.x_v);
    let mut z = p.z_h;
    z.extend(p.z_v);
    Schedule::Sequential { x, z }
}

/// One round of the product coloration circuit of an HGP code: the X half
/// (horizontal then vertical colors) followed by the Z half.
pub fn product_coloration_circuit(
    code: &CssCode,
    col_h: &EdgeColoring,
    col_v: &EdgeColoring,
    basis: EntanglingBasis,
) -> Result<Circuit, CircuitError> {
    if !matches!(code.structure, CodeStructure::Hgp { .. }) {
        return Err(CircuitError::StructureMismatch("expected a hypergraph product code".into()));
    }
    let col = Colorings { horizontal: col_h.clone(), vertical: col_v.clone() };
    let s = sequential_from_product(product_layers(code, &col)?);
    emit(code, &s, 1, None, basis)
}

/// The product coloration round applied to the flattened LP layout.
pub fn lp_syndrome_circuit(code: &CssCode, col: &Colorings, basis: EntanglingBasis) -> Result<Circuit, CircuitError> {
    if !matches!(code.structure, CodeStructure::Lp { .. }) {
        return Err(CircuitError::StructureMismatch("expected a lifted product code".into()));
    }
    let s = sequential_from_product(product_layers(code, col)?);
    emit(code, &s, 1, None, basis)
}

/// `d_rounds` pipelined rounds: X stabilizers of round t+1 share direction
/// steps with Z stabilizers of round t. Detectors compare consecutive rounds.
pub fn pipelined_circuit(
    code: &CssCode,
    col: &Colorings,
    d_rounds: usize,
    basis: EntanglingBasis,
) -> Result<Circuit, CircuitError> {
    let p = product_layers(code, col)?;
    emit(code, &Schedule::Pipelined { p }, d_rounds, None, basis)
}

/// Memory experiment with the pipelined schedule.
pub fn pipelined_memory_experiment(
    code: &CssCode,
    col: &Colorings,
    rounds: usize,
    mb: MemoryBasis,
    basis: EntanglingBasis,
) -> Result<Circuit, CircuitError> {
    let p = product_layers(code, col)?;
    emit(code, &Schedule::Pipelined { p }, rounds, Some(mb), basis)
}

/// Memory experiment with CNOT product coloration rounds (generic colored
/// rounds for codes without product structure).
pub fn memory_experiment(code: &CssCode, rounds: usize, mb: MemoryBasis) -> Result<Circuit, CircuitError> {
    memory_experiment_with(code, rounds, mb, EntanglingBasis::Cnot)
}

pub fn memory_experiment_with(
    code: &CssCode,
    rounds: usize,
    mb: MemoryBasis,
    basis: EntanglingBasis,
) -> Result<Circuit, CircuitError> {
    let schedule = match code.structure {
        CodeStructure::Generic => {
            let (x, z) = generic_layers(code);
            Schedule::Sequential { x, z }
        }
        _ => sequential_from_product(product_layers(code, &default_colorings(code)?)?),
    };
    emit(code, &schedule, rounds, Some(mb), basis)
}
