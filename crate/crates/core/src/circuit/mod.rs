//! Stabilizer-circuit IR, text format, noise insertion and the syndrome
//! extraction generators.

mod coloring;
mod generate;

use std::fmt::{self, Write as _};
use std::ops::Range;

use thiserror::Error;

pub use coloring::{bipartite_edge_coloring, EdgeColoring};
pub use generate::{
    default_colorings, generic_layers, lp_syndrome_circuit, memory_experiment, memory_experiment_with,
    pipelined_circuit, pipelined_memory_experiment, product_coloration_circuit, product_layers, Colorings,
    EntanglingBasis, MemoryBasis, ProductLayers,
};

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("probability {p} out of range for {kind}")]
    ProbabilityOutOfRange { kind: &'static str, p: f64 },
    #[error("qubit {qubit} out of range (n_qubits = {n_qubits})")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate with odd or repeated targets at instruction {0}")]
    BadPairs(usize),
    #[error("qubit {qubit} targeted twice in one entangling layer at instruction {index}")]
    LayerConflict { qubit: usize, index: usize },
    #[error("record reference rec[-{offset}] at instruction {index} precedes the record")]
    BadRecord { offset: usize, index: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    ResetZ(Vec<usize>),
    ResetX(Vec<usize>),
    H(Vec<usize>),
    Cnot(Vec<usize>),
    Cz(Vec<usize>),
    MeasureZ(Vec<usize>),
    MeasureX(Vec<usize>),
    Tick,
    Depol1(f64, Vec<usize>),
    Depol2(f64, Vec<usize>),
    /// Flips each outcome of the next measurement instruction.
    FlipMeas(f64),
    /// `refs` are lookbacks: `k` means `rec[-k]`.
    Detector { round: usize, refs: Vec<usize> },
    Observable { id: usize, refs: Vec<usize> },
    /// Start of syndrome round `t`; a place for residual data errors.
    Round(usize),
}

impl Instruction {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Instruction::Cnot(_) | Instruction::Cz(_))
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Instruction::MeasureZ(_) | Instruction::MeasureX(_))
    }

    pub fn targets(&self) -> &[usize] {
        use Instruction::*;
        match self {
            ResetZ(t) | ResetX(t) | H(t) | Cnot(t) | Cz(t) | MeasureZ(t) | MeasureX(t) | Depol1(_, t) | Depol2(_, t) => t,
            _ => &[],
        }
    }
}

/// Absolute view of a circuit's annotations.
#[derive(Clone, Debug, Default)]
pub struct Annotations {
    /// Record indices per detector.
    pub detectors: Vec<Vec<usize>>,
    pub detector_rounds: Vec<usize>,
    /// Record indices per observable id.
    pub observables: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    entangling_depth: usize,
}

impl Circuit {
    /// Validates targets, gate pairs, layer disjointness and record references.
    pub fn new(n_qubits: usize, instructions: Vec<Instruction>) -> Result<Self, CircuitError> {
        let mut n_meas = 0usize;
        let mut layer = vec![false; n_qubits];
        let mut touched: Vec<usize> = Vec::new();
        for (idx, ins) in instructions.iter().enumerate() {
            for &q in ins.targets() {
                if q >= n_qubits {
                    return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits });
                }
            }
            match ins {
                Instruction::Cnot(t) | Instruction::Cz(t) | Instruction::Depol2(_, t) => {
                    if t.len() % 2 != 0 || t.chunks(2).any(|p| p[0] == p[1]) {
                        return Err(CircuitError::BadPairs(idx));
                    }
                    if ins.is_two_qubit() {
                        for &q in t {
                            if layer[q] {
                                return Err(CircuitError::LayerConflict { qubit: q, index: idx });
                            }
                            layer[q] = true;
                            touched.push(q);
                        }
                    }
                }
                Instruction::Tick => {
                    for q in touched.drain(..) {
                        layer[q] = false;
                    }
                }
                Instruction::MeasureZ(t) | Instruction::MeasureX(t) => n_meas += t.len(),
                Instruction::Detector { refs, .. } | Instruction::Observable { refs, .. } => {
                    if let Some(&offset) = refs.iter().find(|&&k| k == 0 || k > n_meas) {
                        return Err(CircuitError::BadRecord { offset, index: idx });
                    }
                }
                Instruction::Depol1(p, _) => check_prob("DEPOL1", *p, 0.75)?,
                Instruction::FlipMeas(p) => check_prob("FLIPM", *p, 1.0)?,
                _ => {}
            }
            if let Instruction::Depol2(p, _) = ins {
                check_prob("DEPOL2", *p, 15.0 / 16.0)?;
            }
        }
        let entangling_depth = depth_of(&instructions);
        Ok(Circuit { n_qubits, instructions, entangling_depth })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn entangling_depth(&self) -> usize {
        self.entangling_depth
    }

    pub fn num_measurements(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_measurement()).map(|i| i.targets().len()).sum()
    }

    pub fn num_detectors(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Detector { .. })).count()
    }

    pub fn num_observables(&self) -> usize {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Observable { id, .. } => Some(id + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Number of two-qubit gate pairs.
    pub fn num_entangling_gates(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_two_qubit()).map(|i| i.targets().len() / 2).sum()
    }

    /// Resolve lookbacks to absolute record indices. Repeated observable ids
    /// accumulate by symmetric difference.
    pub fn annotations(&self) -> Annotations {
        let mut out = Annotations::default();
        let mut n_meas = 0;
        for ins in &self.instructions {
            match ins {
                Instruction::MeasureZ(t) | Instruction::MeasureX(t) => n_meas += t.len(),
                Instruction::Detector { round, refs } => {
                    let mut r: Vec<usize> = refs.iter().map(|k| n_meas - k).collect();
                    r.sort_unstable();
                    out.detectors.push(r);
                    out.detector_rounds.push(*round);
                }
                Instruction::Observable { id, refs } => {
                    if out.observables.len() <= *id {
                        out.observables.resize(id + 1, Vec::new());
                    }
                    let o = &mut out.observables[*id];
                    for k in refs {
                        let r = n_meas - k;
                        match o.iter().position(|&x| x == r) {
                            Some(pos) => {
                                o.swap_remove(pos);
                            }
                            None => o.push(r),
                        }
                    }
                    o.sort_unstable();
                }
                _ => {}
            }
        }
        out
    }

    /// Append another circuit on the same qubits. Record references of the
    /// appended part stay relative, so they keep their meaning.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        let n = self.n_qubits.max(other.n_qubits);
        let mut ins = self.instructions.clone();
        if !matches!(ins.last(), None | Some(Instruction::Tick)) {
            ins.push(Instruction::Tick);
        }
        ins.extend(other.instructions.iter().cloned());
        Circuit::new(n, ins)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
        let mut n_qubits: Option<usize> = None;
        let mut ins = Vec::new();
        let mut max_q = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CircuitError::Parse { line: lineno + 1, msg };
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or("");
            let (name, arg) = match head.find('(') {
                Some(pos) => {
                    let close = head.rfind(')').ok_or_else(|| err("unclosed argument".into()))?;
                    (&head[..pos], Some(&head[pos + 1..close]))
                }
                None => (head, None),
            };
            let rest: Vec<&str> = parts.collect();
            let qubits = |rest: &[&str]| -> Result<Vec<usize>, CircuitError> {
                rest.iter().map(|s| s.parse::<usize>().map_err(|e| err(format!("bad target {s}: {e}")))).collect()
            };
            let recs = |rest: &[&str]| -> Result<Vec<usize>, CircuitError> {
                rest.iter()
                    .map(|s| {
                        s.strip_prefix("rec[-")
                            .and_then(|s| s.strip_suffix(']'))
                            .and_then(|s| s.parse::<usize>().ok())
                            .ok_or_else(|| err(format!("bad record reference {s}")))
                    })
                    .collect()
            };
            let prob = || -> Result<f64, CircuitError> {
                arg.ok_or_else(|| err(format!("{name} needs a probability")))?
                    .parse::<f64>()
                    .map_err(|e| err(format!("bad probability: {e}")))
            };
            let one = |rest: &[&str]| -> Result<usize, CircuitError> {
                rest.first()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("{name} needs an integer")))
            };
            let i = match name {
                "QUBITS" => {
                    n_qubits = Some(one(&rest)?);
                    continue;
                }
                "RZ" | "R" => Instruction::ResetZ(qubits(&rest)?),
                "RX" => Instruction::ResetX(qubits(&rest)?),
                "H" => Instruction::H(qubits(&rest)?),
                "CNOT" | "CX" => Instruction::Cnot(qubits(&rest)?),
                "CZ" => Instruction::Cz(qubits(&rest)?),
                "MZ" | "M" => Instruction::MeasureZ(qubits(&rest)?),
                "MX" => Instruction::MeasureX(qubits(&rest)?),
                "TICK" => Instruction::Tick,
                "DEPOL1" | "DEPOLARIZE1" => Instruction::Depol1(prob()?, qubits(&rest)?),
                "DEPOL2" | "DEPOLARIZE2" => Instruction::Depol2(prob()?, qubits(&rest)?),
                "FLIPM" => Instruction::FlipMeas(prob()?),
                "DETECTOR" => {
                    let round = match arg {
                        Some(a) if !a.is_empty() => {
                            a.parse::<usize>().map_err(|e| err(format!("bad detector round: {e}")))?
                        }
                        _ => 0,
                    };
                    Instruction::Detector { round, refs: recs(&rest)? }
                }
                "OBSERVABLE" | "OBSERVABLE_INCLUDE" => {
                    let (id, refs) = match arg {
                        Some(a) => (a.parse::<usize>().map_err(|e| err(format!("bad id: {e}")))?, recs(&rest)?),
                        None => (one(&rest)?, recs(&rest[1..])?),
                    };
                    Instruction::Observable { id, refs }
                }
                "ROUND" => Instruction::Round(one(&rest)?),
                other => return Err(err(format!("unknown instruction {other}"))),
            };
            if let Some(&m) = i.targets().iter().max() {
                max_q = max_q.max(m + 1);
            }
            ins.push(i);
        }
        Circuit::new(n_qubits.unwrap_or(max_q).max(max_q), ins)
    }
}

fn check_prob(kind: &'static str, p: f64, max: f64) -> Result<(), CircuitError> {
    if !(0.0..=max).contains(&p) {
        return Err(CircuitError::ProbabilityOutOfRange { kind, p });
    }
    Ok(())
}

fn depth_of(instructions: &[Instruction]) -> usize {
    let mut depth = 0;
    let mut has_gate = false;
    for ins in instructions {
        if ins.is_two_qubit() {
            has_gate = true;
        }
        if matches!(ins, Instruction::Tick) {
            depth += has_gate as usize;
            has_gate = false;
        }
    }
    depth + has_gate as usize
}

/// Number of TICK-delimited layers containing a two-qubit gate.
pub fn entangling_depth(c: &Circuit) -> usize {
    c.entangling_depth()
}

fn join(t: &[usize]) -> String {
    let mut s = String::new();
    for q in t {
        let _ = write!(s, " {q}");
    }
    s
}

fn join_rec(r: &[usize]) -> String {
    let mut s = String::new();
    for k in r {
        let _ = write!(s, " rec[-{k}]");
    }
    s
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n_qubits)?;
        for ins in &self.instructions {
            match ins {
                Instruction::ResetZ(t) => writeln!(f, "RZ{}", join(t))?,
                Instruction::ResetX(t) => writeln!(f, "RX{}", join(t))?,
                Instruction::H(t) => writeln!(f, "H{}", join(t))?,
                Instruction::Cnot(t) => writeln!(f, "CNOT{}", join(t))?,
                Instruction::Cz(t) => writeln!(f, "CZ{}", join(t))?,
                Instruction::MeasureZ(t) => writeln!(f, "MZ{}", join(t))?,
                Instruction::MeasureX(t) => writeln!(f, "MX{}", join(t))?,
                Instruction::Tick => writeln!(f, "TICK")?,
                Instruction::Depol1(p, t) => writeln!(f, "DEPOL1({p}){}", join(t))?,
                Instruction::Depol2(p, t) => writeln!(f, "DEPOL2({p}){}", join(t))?,
                Instruction::FlipMeas(p) => writeln!(f, "FLIPM({p})")?,
                Instruction::Detector { round, refs } => writeln!(f, "DETECTOR({round}){}", join_rec(refs))?,
                Instruction::Observable { id, refs } => writeln!(f, "OBSERVABLE {id}{}", join_rec(refs))?,
                Instruction::Round(t) => writeln!(f, "ROUND {t}")?,
            }
        }
        Ok(())
    }
}

/// Insert circuit-level depolarizing noise.
///
/// DEPOL2(p_gate) follows every entangling gate, DEPOL1(p_gate) every
/// Hadamard, FLIPM(p_gate) precedes every measurement, and each entangling
/// layer closes with DEPOL1(p_idle) on the qubits it leaves untouched.
/// Zero rates emit nothing.
pub fn add_noise(c: &Circuit, p_gate: f64, p_idle: f64) -> Result<Circuit, CircuitError> {
    add_noise_in(c, p_gate, p_idle, 0..c.instructions().len())
}

/// [`add_noise`] restricted to the instructions whose index lies in `range`.
pub fn add_noise_in(c: &Circuit, p_gate: f64, p_idle: f64, range: Range<usize>) -> Result<Circuit, CircuitError> {
    check_prob("DEPOL2", p_gate, 15.0 / 16.0)?;
    check_prob("DEPOL1", p_idle, 0.75)?;
    let n = c.n_qubits();
    let mut out = Vec::with_capacity(c.instructions().len() * 2);
    let mut busy = vec![false; n];
    let mut layer_has_gate = false;
    let close_layer = |out: &mut Vec<Instruction>, busy: &mut Vec<bool>, has: &mut bool| {
        if *has && p_idle > 0.0 {
            let idle: Vec<usize> = (0..n).filter(|&q| !busy[q]).collect();
            if !idle.is_empty() {
                out.push(Instruction::Depol1(p_idle, idle));
            }
        }
        busy.iter_mut().for_each(|b| *b = false);
        *has = false;
    };
    for (i, ins) in c.instructions().iter().enumerate() {
        if !range.contains(&i) {
            if matches!(ins, Instruction::Tick) {
                close_layer(&mut out, &mut busy, &mut layer_has_gate);
            }
            out.push(ins.clone());
            continue;
        }
        match ins {
            Instruction::Cnot(t) | Instruction::Cz(t) => {
                out.push(ins.clone());
                if p_gate > 0.0 {
                    out.push(Instruction::Depol2(p_gate, t.clone()));
                }
                t.iter().for_each(|&q| busy[q] = true);
                layer_has_gate = true;
            }
            Instruction::H(t) => {
                out.push(ins.clone());
                if p_gate > 0.0 {
                    out.push(Instruction::Depol1(p_gate, t.clone()));
                }
            }
            Instruction::MeasureZ(_) | Instruction::MeasureX(_) => {
                if p_gate > 0.0 {
                    out.push(Instruction::FlipMeas(p_gate));
                }
                out.push(ins.clone());
            }
            Instruction::Tick => {
                close_layer(&mut out, &mut busy, &mut layer_has_gate);
                out.push(Instruction::Tick);
            }
            _ => out.push(ins.clone()),
        }
    }
    close_layer(&mut out, &mut busy, &mut layer_has_gate);
    Circuit::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Circuit {
        Circuit::parse(
            "RZ 0 1 2\nCNOT 0 2\nTICK\nCNOT 1 2\nTICK\nMZ 2\nDETECTOR(1) rec[-1]\nMZ 0 1\nOBSERVABLE 0 rec[-1] rec[-2]\n",
        )
        .unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        let c = small();
        assert_eq!(c.n_qubits(), 3);
        assert_eq!(c.entangling_depth(), 2);
        let again = Circuit::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn annotations_resolve_absolute_indices() {
        let a = small().annotations();
        assert_eq!(a.detectors, vec![vec![0]]);
        assert_eq!(a.detector_rounds, vec![1]);
        assert_eq!(a.observables, vec![vec![1, 2]]);
    }

    #[test]
    fn empty_circuit_has_depth_zero() {
        assert_eq!(Circuit::new(0, vec![]).unwrap().entangling_depth(), 0);
    }

    #[test]
    fn concatenation_adds_depth() {
        let c = small();
        assert_eq!(c.concat(&c).unwrap().entangling_depth(), 4);
    }

    #[test]
    fn layer_conflict_rejected() {
        let e = Circuit::parse("CNOT 0 1\nCNOT 1 2\n").unwrap_err();
        assert!(matches!(e, CircuitError::LayerConflict { qubit: 1, .. }));
        assert!(matches!(Circuit::parse("CNOT 0 0\n").unwrap_err(), CircuitError::BadPairs(0)));
    }

    #[test]
    fn dangling_record_rejected() {
        let e = Circuit::parse("MZ 0\nDETECTOR rec[-2]\n").unwrap_err();
        assert!(matches!(e, CircuitError::BadRecord { offset: 2, .. }));
    }

    #[test]
    fn detector_without_round_parses() {
        let c = Circuit::parse("MZ 0\nDETECTOR rec[-1]\n").unwrap();
        assert_eq!(c.annotations().detector_rounds, vec![0]);
    }

    #[test]
    fn zero_noise_is_identity() {
        let c = small();
        assert_eq!(add_noise(&c, 0.0, 0.0).unwrap(), c);
    }

    #[test]
    fn noise_counts() {
        let c = small();
        let noisy = add_noise(&c, 1e-3, 2e-3).unwrap();
        let depol2: usize = noisy
            .instructions()
            .iter()
            .filter_map(|i| match i {
                Instruction::Depol2(_, t) => Some(t.len() / 2),
                _ => None,
            })
            .sum();
        assert_eq!(depol2, c.num_entangling_gates());
        let flips = noisy.instructions().iter().filter(|i| matches!(i, Instruction::FlipMeas(_))).count();
        assert_eq!(flips, 2);
        let idles: Vec<&Vec<usize>> = noisy
            .instructions()
            .iter()
            .filter_map(|i| match i {
                Instruction::Depol1(p, t) if *p == 2e-3 => Some(t),
                _ => None,
            })
            .collect();
        assert_eq!(idles, vec![&vec![1], &vec![0]]);
    }

    #[test]
    fn noise_range_checked() {
        assert!(matches!(add_noise(&small(), 0.95, 0.0), Err(CircuitError::ProbabilityOutOfRange { .. })));
        assert!(matches!(add_noise(&small(), 0.0, 0.8), Err(CircuitError::ProbabilityOutOfRange { .. })));
    }
}
