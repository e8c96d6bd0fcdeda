//! Lattice-surgery teleportation between a qLDPC block and a surface patch:
//! restricted checks, the ancilla patch, merged patches, subsystem-code
//! diagnostics and the teleportation experiment circuit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{add_noise_in, bipartite_edge_coloring, Circuit, CircuitError, Instruction};
use crate::codes::{hgp_from_matrices, CodeError, CodeStructure, CssCode, TannerGraph};
use crate::gf2::{iter_ones, parity_and, BinaryMatrix, BinaryVector, EchelonBasis};

#[derive(Debug, Error)]
pub enum SurgeryError {
    #[error("invalid logical operator: {0}")]
    InvalidLogical(String),
    #[error("degenerate ancilla patch: {0}")]
    Degenerate(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("brute-force search needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("only {available} distinct columns available, {requested} requested")]
    InsufficientColumns { available: usize, requested: usize },
    #[error("incompatible teleportation pair: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    pub fn dual(self) -> PauliType {
        match self {
            PauliType::X => PauliType::Z,
            PauliType::Z => PauliType::X,
        }
    }
}

/// A single-type Pauli operator on a code block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalOperator {
    pub pauli: PauliType,
    /// Sorted qubit indices.
    pub support: Vec<usize>,
}

impl LogicalOperator {
    pub fn new(pauli: PauliType, support: impl IntoIterator<Item = usize>) -> Self {
        let mut support: Vec<usize> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        LogicalOperator { pauli, support }
    }

    pub fn from_vector(pauli: PauliType, v: &BinaryVector) -> Self {
        LogicalOperator { pauli, support: v.support() }
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn to_vector(&self, n: usize) -> BinaryVector {
        BinaryVector::from_indices(n, &self.support)
    }

    /// Commutes with every opposite-type check and lies outside the
    /// same-type stabilizer span.
    pub fn validate(&self, code: &CssCode) -> Result<(), SurgeryError> {
        if let Some(&q) = self.support.iter().find(|&&q| q >= code.n) {
            return Err(SurgeryError::InvalidLogical(format!("qubit {q} outside a code of {} qubits", code.n)));
        }
        if self.support.is_empty() {
            return Err(SurgeryError::InvalidLogical("empty support".into()));
        }
        let (checks, stabs) = match self.pauli {
            PauliType::X => (&code.hz, &code.hx),
            PauliType::Z => (&code.hx, &code.hz),
        };
        let v = self.to_vector(code.n);
        if !checks.mul_vec(&v).map_err(CodeError::from)?.is_zero() {
            return Err(SurgeryError::InvalidLogical(format!("{:?} operator violates opposite-type checks", self.pauli)));
        }
        if stabs.row_space_contains(&v) {
            return Err(SurgeryError::InvalidLogical(format!("{:?} operator is a stabilizer", self.pauli)));
        }
        Ok(())
    }
}

/// Restricted check matrix plus the check indices behind its rows.
fn restriction(code: &CssCode, l: &LogicalOperator) -> Result<(BinaryMatrix, Vec<usize>), SurgeryError> {
    l.validate(code)?;
    let checks = match l.pauli {
        PauliType::X => &code.hz,
        PauliType::Z => &code.hx,
    };
    let mut rows = Vec::new();
    let mut idx = Vec::new();
    for r in 0..checks.rows() {
        let bits: Vec<u8> = l.support.iter().map(|&q| checks.get(r, q) as u8).collect();
        let v = BinaryVector::from_bits(&bits);
        if !v.is_zero() {
            rows.push(v);
            idx.push(r);
        }
    }
    Ok((BinaryMatrix::from_rows(l.weight(), &rows), idx))
}

/// Opposite-type checks that touch the logical's support, restricted to
/// that support (columns in support order).
pub fn restricted_checks(code: &CssCode, logical: &LogicalOperator) -> Result<BinaryMatrix, SurgeryError> {
    Ok(restriction(code, logical)?.0)
}

/// Hypergraph product of the two restricted check matrices.
///
/// The patch code keeps the product layout: VV cell `(k, l)` for
/// `k < m_a, l < m_b` is qubit `k·m_b + l`, followed by the CC block.
#[derive(Clone, Debug)]
pub struct AncillaPatch {
    pub code: CssCode,
    pub x_source: LogicalOperator,
    pub z_source: LogicalOperator,
    pub h_a: BinaryMatrix,
    pub h_b: BinaryMatrix,
    /// Z checks of code A behind the rows of `h_a`.
    pub a_checks: Vec<usize>,
    /// X checks of code B behind the rows of `h_b`.
    pub b_checks: Vec<usize>,
}

impl AncillaPatch {
    pub fn m_a(&self) -> usize {
        self.h_a.cols()
    }

    pub fn m_b(&self) -> usize {
        self.h_b.cols()
    }

    pub fn vv(&self, k: usize, l: usize) -> usize {
        k * self.m_b() + l
    }

    /// Z check of the patch at cell `(i, l)`, `i < r_a`.
    pub fn z_check(&self, i: usize, l: usize) -> usize {
        i * self.m_b() + l
    }

    /// X check of the patch at cell `(k, j)`, `j < r_b`.
    pub fn x_check(&self, k: usize, j: usize) -> usize {
        k * self.h_b.rows() + j
    }

    /// X logical on VV column `l`.
    pub fn x_logical(&self, l: usize) -> LogicalOperator {
        LogicalOperator::new(PauliType::X, (0..self.m_a()).map(|k| self.vv(k, l)))
    }

    /// Z logical on VV row `k`.
    pub fn z_logical(&self, k: usize) -> LogicalOperator {
        LogicalOperator::new(PauliType::Z, (0..self.m_b()).map(|l| self.vv(k, l)))
    }
}

/// Builds the ancilla patch for `(A, B, X̄_A, Z̄_B)`. Rejects inputs where
/// `h_b` has dependent rows or where either restricted kernel is larger
/// than the all-ones vector (a smaller logical or stabilizer hides inside
/// the chosen support).
pub fn ancilla_patch(
    code_a: &CssCode,
    code_b: &CssCode,
    x_a: &LogicalOperator,
    z_b: &LogicalOperator,
) -> Result<AncillaPatch, SurgeryError> {
    if x_a.pauli != PauliType::X || z_b.pauli != PauliType::Z {
        return Err(SurgeryError::InvalidLogical("expected an X logical of A and a Z logical of B".into()));
    }
    let (h_a, a_checks) = restriction(code_a, x_a)?;
    let (h_b, b_checks) = restriction(code_b, z_b)?;
    if h_b.rank() != h_b.rows() {
        return Err(SurgeryError::Degenerate("transposed restricted checks of B have a nontrivial kernel".into()));
    }
    for (name, h) in [("A", &h_a), ("B", &h_b)] {
        if h.cols() - h.rank() != 1 {
            return Err(SurgeryError::Degenerate(format!("logical of {name} is not minimal on its support")));
        }
    }
    let code = hgp_from_matrices(&h_a, &h_b)?;
    if code.k != 1 {
        return Err(SurgeryError::Degenerate(format!("patch encodes {} qubits", code.k)));
    }
    Ok(AncillaPatch { code, x_source: x_a.clone(), z_source: z_b.clone(), h_a, h_b, a_checks, b_checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorFamily {
    /// Joint-measurement generators through the interface.
    Interface,
    /// Boundary checks of the code block, extended onto the interface.
    CodeBoundary,
    /// Boundary checks of the ancilla line, extended onto the interface.
    AncillaBoundary,
    /// Opposite-type ancilla checks off the merged line.
    AncillaRemaining,
    /// Code checks that are not boundary checks.
    CodeRemaining,
    /// Same-type ancilla checks.
    AncillaSameType,
}

/// Stabilizer generators of a merged patch. Qubits: code block, then the
/// ancilla patch, then the interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedCode {
    /// Type of the measured joint logical.
    pub kind: PauliType,
    pub n_code: usize,
    pub n_ancilla: usize,
    pub n_interface: usize,
    /// Ancilla column (X merge) or row (Z merge) the merge attaches to.
    pub line: usize,
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
    pub x_families: Vec<GeneratorFamily>,
    pub z_families: Vec<GeneratorFamily>,
    /// Code logical times the ancilla line logical.
    pub joint_logical: LogicalOperator,
}

impl MergedCode {
    pub fn n(&self) -> usize {
        self.n_code + self.n_ancilla + self.n_interface
    }

    pub fn interface_offset(&self) -> usize {
        self.n_code + self.n_ancilla
    }

    pub fn commutes(&self) -> bool {
        self.hx.matmul(&self.hz.transpose()).map(|m| m.is_zero()).unwrap_or(false)
    }

    fn same_type(&self) -> (&BinaryMatrix, &[GeneratorFamily]) {
        match self.kind {
            PauliType::X => (&self.hx, &self.x_families),
            PauliType::Z => (&self.hz, &self.z_families),
        }
    }

    /// Product of all interface generators.
    pub fn interface_product(&self) -> BinaryVector {
        let (h, fam) = self.same_type();
        let mut v = BinaryVector::zeros(self.n());
        for (r, f) in fam.iter().enumerate() {
            if *f == GeneratorFamily::Interface {
                v.xor_assign(&h.row_vector(r));
            }
        }
        v
    }

    pub fn interface_identity_holds(&self) -> bool {
        self.interface_product() == self.joint_logical.to_vector(self.n())
    }

    pub fn family_count(&self, f: GeneratorFamily) -> usize {
        self.x_families.iter().chain(&self.z_families).filter(|&&g| g == f).count()
    }
}

fn embed_row(dst: &mut BinaryVector, src: &[usize], offset: usize) {
    for &q in src {
        dst.flip(q + offset);
    }
}

/// Shared construction for both merge directions. `kind` is the type of the
/// logical on `code`; the ancilla line is column `line` for X and row `line`
/// for Z.
fn merge(code: &CssCode, patch: &AncillaPatch, kind: PauliType, line: usize) -> Result<MergedCode, SurgeryError> {
    let (source, hbar, boundary) = match kind {
        PauliType::X => (&patch.x_source, &patch.h_a, &patch.a_checks),
        PauliType::Z => (&patch.z_source, &patch.h_b, &patch.b_checks),
    };
    let (check, _) = restriction(code, source).map_err(|e| SurgeryError::Inconsistent(e.to_string()))?;
    if &check != hbar {
        return Err(SurgeryError::Inconsistent("code does not match the patch's restricted checks".into()));
    }
    let limit = match kind {
        PauliType::X => patch.m_b(),
        PauliType::Z => patch.m_a(),
    };
    if line >= limit {
        return Err(SurgeryError::IndexOutOfRange { index: line, limit });
    }
    let (n_code, n_anc, n_t) = (code.n, patch.code.n, hbar.rows());
    let n = n_code + n_anc + n_t;
    let t0 = n_code + n_anc;
    let m = hbar.cols();
    // Ancilla qubit of line position i, and ancilla boundary check of row j.
    let line_qubit = |i: usize| match kind {
        PauliType::X => patch.vv(i, line),
        PauliType::Z => patch.vv(line, i),
    };
    let anc_boundary = |j: usize| match kind {
        PauliType::X => patch.z_check(j, line),
        PauliType::Z => patch.x_check(line, j),
    };
    let (code_same, code_opp, anc_same, anc_opp) = match kind {
        PauliType::X => (&code.hx, &code.hz, &patch.code.hx, &patch.code.hz),
        PauliType::Z => (&code.hz, &code.hx, &patch.code.hz, &patch.code.hx),
    };
    let mut same: Vec<(BinaryVector, GeneratorFamily)> = Vec::new();
    let mut opp: Vec<(BinaryVector, GeneratorFamily)> = Vec::new();
    for i in 0..m {
        let mut v = BinaryVector::zeros(n);
        v.flip(source.support[i]);
        v.flip(n_code + line_qubit(i));
        for j in 0..n_t {
            if hbar.get(j, i) {
                v.flip(t0 + j);
            }
        }
        same.push((v, GeneratorFamily::Interface));
    }
    for (j, &c) in boundary.iter().enumerate() {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &code_opp.row_support(c), 0);
        v.flip(t0 + j);
        opp.push((v, GeneratorFamily::CodeBoundary));
    }
    let anc_lines: Vec<usize> = (0..n_t).map(anc_boundary).collect();
    for (j, &c) in anc_lines.iter().enumerate() {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &anc_opp.row_support(c), n_code);
        v.flip(t0 + j);
        opp.push((v, GeneratorFamily::AncillaBoundary));
    }
    for c in (0..anc_opp.rows()).filter(|c| !anc_lines.contains(c)) {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &anc_opp.row_support(c), n_code);
        opp.push((v, GeneratorFamily::AncillaRemaining));
    }
    for c in 0..code_same.rows() {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &code_same.row_support(c), 0);
        same.push((v, GeneratorFamily::CodeRemaining));
    }
    for c in (0..code_opp.rows()).filter(|c| !boundary.contains(c)) {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &code_opp.row_support(c), 0);
        opp.push((v, GeneratorFamily::CodeRemaining));
    }
    for c in 0..anc_same.rows() {
        let mut v = BinaryVector::zeros(n);
        embed_row(&mut v, &anc_same.row_support(c), n_code);
        same.push((v, GeneratorFamily::AncillaSameType));
    }
    let joint = LogicalOperator::new(
        kind,
        source.support.iter().copied().chain((0..m).map(|i| n_code + line_qubit(i))),
    );
    let split = |g: Vec<(BinaryVector, GeneratorFamily)>| {
        let (rows, fam): (Vec<BinaryVector>, Vec<GeneratorFamily>) = g.into_iter().unzip();
        (BinaryMatrix::from_rows(n, &rows), fam)
    };
    let (s_h, s_f) = split(same);
    let (o_h, o_f) = split(opp);
    let (hx, x_families, hz, z_families) = match kind {
        PauliType::X => (s_h, s_f, o_h, o_f),
        PauliType::Z => (o_h, o_f, s_h, s_f),
    };
    Ok(MergedCode { kind, n_code, n_ancilla: n_anc, n_interface: n_t, line, hx, hz, x_families, z_families, joint_logical: joint })
}

/// `(A, ℓ)`-merged patch measuring `X̄_A·X̄_C` through the interface.
pub fn merged_patch(code_a: &CssCode, patch: &AncillaPatch, ell: usize) -> Result<MergedCode, SurgeryError> {
    merge(code_a, patch, PauliType::X, ell)
}

/// Mirror construction on the B side: measures `Z̄_C·Z̄_B` with the ancilla
/// attached along VV row `row`.
pub fn merged_patch_z(code_b: &CssCode, patch: &AncillaPatch, row: usize) -> Result<MergedCode, SurgeryError> {
    merge(code_b, patch, PauliType::Z, row)
}

/// CSS subsystem code from X and Z gauge generators.
#[derive(Clone, Debug)]
pub struct SubsystemCode {
    pub n: usize,
    pub gx: BinaryMatrix,
    pub gz: BinaryMatrix,
    /// Independent generators of the center.
    pub center_x: BinaryMatrix,
    pub center_z: BinaryMatrix,
}

fn independent_rows(m: &BinaryMatrix) -> BinaryMatrix {
    let mut span = EchelonBasis::new(m.cols());
    let mut out = BinaryMatrix::zeros(0, m.cols());
    for r in 0..m.rows() {
        let v = m.row_vector(r);
        if span.insert(v.clone()) {
            out.push_row(&v);
        }
    }
    out
}

impl SubsystemCode {
    pub fn new(gx: BinaryMatrix, gz: BinaryMatrix) -> Result<Self, SurgeryError> {
        if gx.cols() != gz.cols() {
            return Err(SurgeryError::Inconsistent(format!("{} vs {} qubits", gx.cols(), gz.cols())));
        }
        let n = gx.cols();
        // X part of the center: combinations a·Gx with Gz·(a·Gx)ᵀ = 0.
        let m = gz.matmul(&gx.transpose()).map_err(CodeError::from)?;
        let cx = m.kernel_basis().matmul(&gx).map_err(CodeError::from)?;
        let cz = m.transpose().kernel_basis().matmul(&gz).map_err(CodeError::from)?;
        Ok(SubsystemCode { n, center_x: independent_rows(&cx), center_z: independent_rows(&cz), gx, gz })
    }

    pub fn center_commutes_with_gauge(&self) -> bool {
        let ok = |a: &BinaryMatrix, b: &BinaryMatrix| a.matmul(&b.transpose()).map(|m| m.is_zero()).unwrap_or(false);
        ok(&self.center_x, &self.gz) && ok(&self.center_z, &self.gx)
    }

    pub fn in_gauge_group(&self, pauli: PauliType, v: &BinaryVector) -> bool {
        match pauli {
            PauliType::X => self.gx.row_space_contains(v),
            PauliType::Z => self.gz.row_space_contains(v),
        }
    }

    pub fn in_center(&self, pauli: PauliType, v: &BinaryVector) -> bool {
        match pauli {
            PauliType::X => self.center_x.row_space_contains(v),
            PauliType::Z => self.center_z.row_space_contains(v),
        }
    }

    pub fn stabilizer_rank(&self) -> usize {
        self.center_x.rows() + self.center_z.rows()
    }

    pub fn gauge_rank(&self) -> usize {
        self.gx.rank() + self.gz.rank()
    }

    pub fn n_gauge_qubits(&self) -> usize {
        (self.gauge_rank() - self.stabilizer_rank()) / 2
    }

    pub fn n_logical(&self) -> usize {
        self.n - (self.gauge_rank() + self.stabilizer_rank()) / 2
    }
}

/// Gauge group `S_S ∪ S_M ∪ {L}` of a merge: split stabilizers of the code
/// block and the ancilla patch, the merged generators, and the code logical
/// `extra` of the type opposite to the merge (`Z̄_A` for an X merge).
pub fn gauge_group(
    code: &CssCode,
    patch: &AncillaPatch,
    merged: &MergedCode,
    extra: Option<&LogicalOperator>,
) -> Result<SubsystemCode, SurgeryError> {
    if merged.n_code != code.n || merged.n_ancilla != patch.code.n {
        return Err(SurgeryError::Inconsistent("merged patch was built from different blocks".into()));
    }
    let n = merged.n();
    let embed = |h: &BinaryMatrix, offset: usize| -> Vec<BinaryVector> {
        (0..h.rows())
            .map(|r| {
                let mut v = BinaryVector::zeros(n);
                embed_row(&mut v, &h.row_support(r), offset);
                v
            })
            .collect()
    };
    let rows = |h: &BinaryMatrix| -> Vec<BinaryVector> { (0..h.rows()).map(|r| h.row_vector(r)).collect() };
    let mut gx = embed(&code.hx, 0);
    gx.extend(embed(&patch.code.hx, code.n));
    gx.extend(rows(&merged.hx));
    let mut gz = embed(&code.hz, 0);
    gz.extend(embed(&patch.code.hz, code.n));
    gz.extend(rows(&merged.hz));
    if let Some(l) = extra {
        if l.pauli != merged.kind.dual() {
            return Err(SurgeryError::Inconsistent(format!("extra gauge logical must be {:?}-type", merged.kind.dual())));
        }
        l.validate(code).map_err(|e| SurgeryError::Inconsistent(e.to_string()))?;
        let joint = merged.joint_logical.to_vector(n);
        let v = l.to_vector(n);
        if !joint.dot(&v) {
            return Err(SurgeryError::Inconsistent("extra logical commutes with the measured joint logical".into()));
        }
        match l.pauli {
            PauliType::X => gx.push(v),
            PauliType::Z => gz.push(v),
        }
    }
    SubsystemCode::new(BinaryMatrix::from_rows(n, &gx), BinaryMatrix::from_rows(n, &gz))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DressedDistance {
    Exact(usize),
    /// No dressed logical up to and including this weight.
    Exceeds(usize),
}

impl std::fmt::Display for DressedDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DressedDistance::Exact(d) => write!(f, "{d}"),
            DressedDistance::Exceeds(c) => write!(f, "> {c}"),
        }
    }
}

/// Largest qubit count the brute-force search accepts.
pub const BRUTE_FORCE_MAX_QUBITS: usize = 32;
/// Largest number of candidate operators the brute-force search accepts.
pub const BRUTE_FORCE_BUDGET: u128 = 1 << 31;

fn binom(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct MaskSpan {
    rows: Vec<(u64, u32)>,
}

impl MaskSpan {
    fn new(m: &BinaryMatrix) -> Self {
        let mut rows: Vec<(u64, u32)> = Vec::new();
        for r in 0..m.rows() {
            let mut v = m.row(r).first().copied().unwrap_or(0);
            for &(row, p) in &rows {
                if v >> p & 1 == 1 {
                    v ^= row;
                }
            }
            if v != 0 {
                rows.push((v, v.trailing_zeros()));
            }
        }
        MaskSpan { rows }
    }

    fn contains(&self, mut v: u64) -> bool {
        for &(row, p) in &self.rows {
            if v >> p & 1 == 1 {
                v ^= row;
            }
        }
        v == 0
    }
}

/// Minimum weight of a `pauli`-type dressed logical, searched in order of
/// weight up to `cap`.
pub fn dressed_distance_of_type(sub: &SubsystemCode, pauli: PauliType, cap: usize) -> Result<DressedDistance, SurgeryError> {
    let n = sub.n;
    if n > BRUTE_FORCE_MAX_QUBITS {
        return Err(SurgeryError::BudgetExceeded { needed: 1u128 << n.min(127), budget: 1u128 << BRUTE_FORCE_MAX_QUBITS });
    }
    let cap = cap.min(n);
    let needed: u128 = (1..=cap).map(|w| binom(n, w)).sum();
    if needed > BRUTE_FORCE_BUDGET {
        return Err(SurgeryError::BudgetExceeded { needed, budget: BRUTE_FORCE_BUDGET });
    }
    let (center, gauge) = match pauli {
        PauliType::X => (&sub.center_z, &sub.gx),
        PauliType::Z => (&sub.center_x, &sub.gz),
    };
    let checks: Vec<u64> = (0..center.rows()).map(|r| center.row(r).first().copied().unwrap_or(0)).collect();
    let span = MaskSpan::new(gauge);
    let is_logical = |v: u64| checks.iter().all(|c| (c & v).count_ones() % 2 == 0) && !span.contains(v);
    for w in 1..=cap {
        // Split the weight class by its lowest qubit.
        let found = (0..=n - w).into_par_iter().any(|first| {
            let rest = n - first - 1;
            if w == 1 {
                return is_logical(1u64 << first);
            }
            // Gosper's hack over (w-1)-subsets of the qubits above `first`.
            let mut s: u64 = (1u64 << (w - 1)) - 1;
            let limit = 1u64 << rest;
            while s < limit {
                if is_logical((1u64 << first) | (s << (first + 1))) {
                    return true;
                }
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
            false
        });
        if found {
            return Ok(DressedDistance::Exact(w));
        }
    }
    Ok(DressedDistance::Exceeds(cap))
}

/// Dressed distance of a subsystem code on at most 32 qubits.
pub fn dressed_distance_bruteforce(sub: &SubsystemCode, cap: usize) -> Result<DressedDistance, SurgeryError> {
    let x = dressed_distance_of_type(sub, PauliType::X, cap)?;
    let z = dressed_distance_of_type(sub, PauliType::Z, cap)?;
    Ok(match (x, z) {
        (DressedDistance::Exact(a), DressedDistance::Exact(b)) => DressedDistance::Exact(a.min(b)),
        (DressedDistance::Exact(a), _) | (_, DressedDistance::Exact(a)) => DressedDistance::Exact(a),
        (e, _) => e,
    })
}

/// `m` logical X operators of an HGP code on pairwise distinct VV columns,
/// each `x ⊗ e_b` with `x` a lightest nonzero kernel vector of `H1`.
pub fn select_parallel_logicals(code: &CssCode, m: usize) -> Result<Vec<LogicalOperator>, SurgeryError> {
    let CodeStructure::Hgp { h1, h2 } = &code.structure else {
        return Err(SurgeryError::Inconsistent("parallel logicals need a hypergraph product code".into()));
    };
    let n2 = h2.cols();
    let ker = h1.kernel_basis();
    if ker.rows() == 0 {
        return Err(SurgeryError::InsufficientColumns { available: 0, requested: m });
    }
    let x = if ker.rows() <= 20 {
        (1u64..1 << ker.rows())
            .map(|mask| {
                let mut v = BinaryVector::zeros(h1.cols());
                for r in iter_ones(&[mask]) {
                    v.xor_assign(&ker.row_vector(r));
                }
                v
            })
            .min_by_key(|v| v.weight())
            .expect("nonempty kernel")
    } else {
        (0..ker.rows()).map(|r| ker.row_vector(r)).min_by_key(|v| v.weight()).expect("nonempty kernel")
    };
    let mut span = EchelonBasis::from_matrix(h2);
    let columns: Vec<usize> = (0..n2).filter(|&b| span.insert(BinaryVector::from_indices(n2, &[b]))).collect();
    if m > columns.len() {
        return Err(SurgeryError::InsufficientColumns { available: columns.len(), requested: m });
    }
    Ok(columns[..m]
        .iter()
        .map(|&b| LogicalOperator::new(PauliType::X, x.support().into_iter().map(|a| a * n2 + b)))
        .collect())
}

// ---------------------------------------------------------------------------
// Teleportation experiment.

fn xor_sets(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct Entry {
    pauli: BinaryVector,
    expr: Vec<usize>,
    stamp: usize,
}

enum Outcome {
    Random,
    Deterministic(Vec<usize>),
}

/// Operators with a known sign, each with the measurement records whose
/// parity gives that sign. Entries stay independent; a repeated measurement
/// overwrites the expression so detectors compare consecutive outcomes.
struct Tracker {
    nw: usize,
    entries: Vec<Entry>,
    basis: Option<(Vec<(BinaryVector, BinaryVector)>, Vec<usize>)>,
}

impl Tracker {
    fn new(n: usize) -> Self {
        Tracker { nw: n.div_ceil(64), entries: Vec::new(), basis: None }
    }

    fn pauli(&self, pauli: PauliType, support: &[usize]) -> BinaryVector {
        let shift = if pauli == PauliType::Z { self.nw * 64 } else { 0 };
        let idx: Vec<usize> = support.iter().map(|&q| q + shift).collect();
        BinaryVector::from_indices(2 * self.nw * 64, &idx)
    }

    fn anticommute(&self, a: &BinaryVector, b: &BinaryVector) -> bool {
        let (a, b) = (a.words(), b.words());
        parity_and(&a[..self.nw], &b[self.nw..]) ^ parity_and(&a[self.nw..], &b[..self.nw])
    }

    fn prepare(&mut self, p: BinaryVector) {
        self.entries.push(Entry { pauli: p, expr: Vec::new(), stamp: 0 });
        self.basis = None;
    }

    fn ensure_basis(&mut self) {
        if self.basis.is_some() {
            return;
        }
        let e = self.entries.len();
        let mut rows: Vec<(BinaryVector, BinaryVector)> = Vec::new();
        let mut pivots = Vec::new();
        for (i, entry) in self.entries.iter().enumerate() {
            let mut v = entry.pauli.clone();
            let mut c = BinaryVector::from_indices(e, &[i]);
            for ((row, combo), &p) in rows.iter().zip(&pivots) {
                if v.get(p) {
                    v.xor_assign(row);
                    c.xor_assign(combo);
                }
            }
            let lead = iter_ones(v.words()).next();
            if let Some(p) = lead {
                rows.push((v, c));
                pivots.push(p);
            }
        }
        self.basis = Some((rows, pivots));
    }

    /// Entries whose product is `p`, if `p` has a known sign.
    fn combo(&mut self, p: &BinaryVector) -> Option<BinaryVector> {
        self.ensure_basis();
        let (rows, pivots) = self.basis.as_ref().expect("basis");
        let mut v = p.clone();
        let mut c = BinaryVector::zeros(self.entries.len());
        for ((row, combo), &piv) in rows.iter().zip(pivots) {
            if v.get(piv) {
                v.xor_assign(row);
                c.xor_assign(combo);
            }
        }
        v.is_zero().then_some(c)
    }

    fn expr_of(&self, combo: &BinaryVector) -> Vec<usize> {
        combo.support().into_iter().fold(Vec::new(), |acc, u| xor_sets(&acc, &self.entries[u].expr))
    }

    fn query(&mut self, p: &BinaryVector) -> Option<Vec<usize>> {
        self.combo(p).map(|c| self.expr_of(&c))
    }

    fn measure(&mut self, p: BinaryVector, rec: usize) -> Outcome {
        let stamp = rec + 1;
        let anti: Vec<usize> = (0..self.entries.len()).filter(|&i| self.anticommute(&self.entries[i].pauli, &p)).collect();
        if let Some(&a) = anti.iter().min_by_key(|&&i| self.entries[i].stamp) {
            let (ap, ae, ast) = {
                let e = &self.entries[a];
                (e.pauli.clone(), e.expr.clone(), e.stamp)
            };
            for &b in anti.iter().filter(|&&b| b != a) {
                let e = &mut self.entries[b];
                e.pauli.xor_assign(&ap);
                e.expr = xor_sets(&e.expr, &ae);
                e.stamp = e.stamp.max(ast);
            }
            self.entries.remove(a);
            self.entries.push(Entry { pauli: p, expr: vec![rec], stamp });
            self.basis = None;
            return Outcome::Random;
        }
        match self.combo(&p) {
            None => {
                self.entries.push(Entry { pauli: p, expr: vec![rec], stamp });
                self.basis = None;
                Outcome::Random
            }
            Some(c) => {
                let expr = self.expr_of(&c);
                let used = c.support();
                if used.len() == 1 {
                    let e = &mut self.entries[used[0]];
                    e.expr = vec![rec];
                    e.stamp = stamp;
                } else {
                    // Swap the stalest constituent for `p` itself.
                    let u0 = *used.iter().min_by_key(|&&u| self.entries[u].stamp).expect("nonempty");
                    self.entries[u0] = Entry { pauli: p, expr: vec![rec], stamp };
                    let mut rest = c.clone();
                    rest.flip(u0);
                    if let Some((rows, _)) = self.basis.as_mut() {
                        for (_, combo) in rows.iter_mut() {
                            if combo.get(u0) {
                                combo.xor_assign(&rest);
                            }
                        }
                    }
                }
                Outcome::Deterministic(expr)
            }
        }
    }
}

/// Stabilizer generators measured together in one round, with their colored
/// CNOT layers.
struct Stage {
    hx: BinaryMatrix,
    hz: BinaryMatrix,
    x_layers: Vec<Vec<(usize, usize)>>,
    z_layers: Vec<Vec<(usize, usize)>>,
}

impl Stage {
    fn new(hx: BinaryMatrix, hz: BinaryMatrix) -> Self {
        let layers = |h: &BinaryMatrix| -> Vec<Vec<(usize, usize)>> {
            let col = bipartite_edge_coloring(&TannerGraph::from_matrix(h));
            (0..col.n_colors).map(|c| col.edges_of(c)).filter(|l| !l.is_empty()).collect()
        };
        let (x_layers, z_layers) = (layers(&hx), layers(&hz));
        Stage { hx, hz, x_layers, z_layers }
    }

    fn n_checks(&self) -> usize {
        self.hx.rows() + self.hz.rows()
    }
}

struct Builder {
    n_data: usize,
    ins: Vec<Instruction>,
    n_meas: usize,
    tracker: Tracker,
    round: usize,
    pool: usize,
}

impl Builder {
    fn new(n_data: usize) -> Self {
        Builder { n_data, ins: Vec::new(), n_meas: 0, tracker: Tracker::new(n_data), round: 0, pool: 1 }
    }

    fn prepare(&mut self, qubits: &[usize], basis: PauliType) {
        if qubits.is_empty() {
            return;
        }
        self.ins.push(match basis {
            PauliType::Z => Instruction::ResetZ(qubits.to_vec()),
            PauliType::X => Instruction::ResetX(qubits.to_vec()),
        });
        for &q in qubits {
            let p = self.tracker.pauli(basis, &[q]);
            self.tracker.prepare(p);
        }
    }

    fn measure(&mut self, basis: PauliType, qubits: Vec<usize>) -> usize {
        let base = self.n_meas;
        self.n_meas += qubits.len();
        if !qubits.is_empty() {
            self.ins.push(match basis {
                PauliType::Z => Instruction::MeasureZ(qubits),
                PauliType::X => Instruction::MeasureX(qubits),
            });
        }
        base
    }

    fn detector(&mut self, recs: &[usize]) {
        let refs = recs.iter().map(|&r| self.n_meas - r).collect();
        self.ins.push(Instruction::Detector { round: self.round, refs });
    }

    fn record(&mut self, pauli: PauliType, support: &[usize], rec: usize) -> Outcome {
        let p = self.tracker.pauli(pauli, support);
        self.tracker.measure(p, rec)
    }

    /// One syndrome round: X half, then Z half, then detectors for every
    /// generator whose outcome is fixed by earlier records.
    fn round(&mut self, s: &Stage) {
        self.round += 1;
        self.pool = self.pool.max(s.n_checks());
        self.ins.push(Instruction::Round(self.round));
        let (nx, nz) = (s.hx.rows(), s.hz.rows());
        let base = self.n_data;
        let xa: Vec<usize> = (0..nx).map(|r| base + r).collect();
        let za: Vec<usize> = (0..nz).map(|r| base + nx + r).collect();
        if !xa.is_empty() {
            self.ins.push(Instruction::ResetX(xa.clone()));
        }
        for l in &s.x_layers {
            self.ins.push(Instruction::Cnot(l.iter().flat_map(|&(r, q)| [base + r, q]).collect()));
            self.ins.push(Instruction::Tick);
        }
        let xb = self.measure(PauliType::X, xa);
        if !za.is_empty() {
            self.ins.push(Instruction::ResetZ(za.clone()));
        }
        for l in &s.z_layers {
            self.ins.push(Instruction::Cnot(l.iter().flat_map(|&(r, q)| [q, base + nx + r]).collect()));
            self.ins.push(Instruction::Tick);
        }
        let zb = self.measure(PauliType::Z, za);
        let mut dets = Vec::new();
        for (h, b, pauli) in [(&s.hx, xb, PauliType::X), (&s.hz, zb, PauliType::Z)] {
            for r in 0..h.rows() {
                if let Outcome::Deterministic(expr) = self.record(pauli, &h.row_support(r), b + r) {
                    dets.push(xor_sets(&[b + r], &expr));
                }
            }
        }
        for d in dets {
            self.detector(&d);
        }
    }

    /// Destructive single-qubit readout; returns the first record index.
    fn readout(&mut self, qubits: &[usize], basis: PauliType) -> usize {
        let b = self.measure(basis, qubits.to_vec());
        for (i, &q) in qubits.iter().enumerate() {
            self.record(basis, &[q], b + i);
        }
        b
    }

    /// Noiseless measurement of a Z-type product through one ancilla.
    fn measure_z_product(&mut self, support: &[usize]) -> usize {
        let a = self.n_data;
        self.ins.push(Instruction::ResetZ(vec![a]));
        for &q in support {
            self.ins.push(Instruction::Cnot(vec![q, a]));
            self.ins.push(Instruction::Tick);
        }
        let r = self.measure(PauliType::Z, vec![a]);
        self.record(PauliType::Z, support, r);
        r
    }

    fn observable(&mut self, id: usize, recs: &[usize]) {
        let refs = recs.iter().map(|&r| self.n_meas - r).collect();
        self.ins.push(Instruction::Observable { id, refs });
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TeleportInput {
    /// Logical |0⟩: the qLDPC block's Z logicals are observed.
    Zero,
    /// Logical |+⟩: the teleported X logical is observed.
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeleportConfig {
    /// QEC rounds after each merge and each split.
    pub rounds: usize,
    /// Gate error rate on the noisy steps.
    pub p_gate: f64,
    pub input: TeleportInput,
    /// Ancilla VV column the qLDPC merge attaches to.
    pub column: usize,
    /// Ancilla VV row used for the Z̄Z̄ measurement.
    pub row: usize,
    /// Run the Z̄Z̄ step as a noisy lattice surgery instead of a noiseless
    /// logical measurement.
    pub noisy_zz: bool,
}

impl TeleportConfig {
    pub fn new(rounds: usize, p_gate: f64) -> Self {
        TeleportConfig { rounds, p_gate, input: TeleportInput::Zero, column: 0, row: 0, noisy_zz: false }
    }
}

#[derive(Clone, Debug)]
pub struct TeleportExperiment {
    pub circuit: Circuit,
    pub patch: AncillaPatch,
    /// Observable id of the teleported logical.
    pub teleported_observable: usize,
    /// Noisy code cycles, for the per-cycle failure rate.
    pub noisy_cycles: usize,
    /// Qubit offsets: qLDPC block, ancilla patch, surface patch, interfaces.
    pub offsets: [usize; 5],
}

/// Per-cycle failure rate from a total failure probability over `cycles`.
pub fn per_cycle_lfr(p_l: f64, cycles: usize) -> f64 {
    1.0 - (1.0 - p_l).powf(1.0 / cycles as f64)
}

fn embed_matrix(h: &BinaryMatrix, n: usize, map: impl Fn(usize) -> usize) -> BinaryMatrix {
    let rows: Vec<BinaryVector> = (0..h.rows())
        .map(|r| BinaryVector::from_indices(n, &h.row_support(r).into_iter().map(&map).collect::<Vec<_>>()))
        .collect();
    BinaryMatrix::from_rows(n, &rows)
}

fn stack(parts: &[BinaryMatrix], n: usize) -> BinaryMatrix {
    let mut out = BinaryMatrix::zeros(0, n);
    for p in parts {
        for r in 0..p.rows() {
            out.push_row(&p.row_vector(r));
        }
    }
    out
}

/// Measurement-based teleportation of a surface-code state into logical
/// `logical` of a qLDPC block through an ancilla patch.
///
/// Sequence: prepare all blocks; `rounds` rounds of the X̄X̄ merged code
/// (qLDPC + ancilla); interface readout and `rounds` rounds of the split
/// code; optionally the mirrored Z̄Z̄ merge and split with the surface patch;
/// one perfect round; the Z̄Z̄ measurement when it is not done by surgery;
/// destructive X readout of the surface and ancilla patches; final readout
/// of the qLDPC block. Only the surgery steps carry noise. Detectors and
/// observables (with their Pauli-frame corrections) are derived by tracking
/// which operators have signs fixed by earlier records.
pub fn teleportation_experiment(
    qldpc: &CssCode,
    surface: &CssCode,
    logical: usize,
    cfg: &TeleportConfig,
) -> Result<TeleportExperiment, SurgeryError> {
    if cfg.rounds == 0 {
        return Err(SurgeryError::Incompatible("at least one round per step is required".into()));
    }
    if logical >= qldpc.k {
        return Err(SurgeryError::IndexOutOfRange { index: logical, limit: qldpc.k });
    }
    if surface.k != 1 {
        return Err(SurgeryError::Incompatible(format!("surface patch encodes {} qubits", surface.k)));
    }
    let x_a = LogicalOperator::from_vector(PauliType::X, &qldpc.logicals_x.row_vector(logical));
    let z_b = LogicalOperator::from_vector(PauliType::Z, &surface.logicals_z.row_vector(0));
    let patch = ancilla_patch(qldpc, surface, &x_a, &z_b).map_err(|e| SurgeryError::Incompatible(e.to_string()))?;
    let mx = merged_patch(qldpc, &patch, cfg.column)?;
    let mz = if cfg.noisy_zz { Some(merged_patch_z(surface, &patch, cfg.row)?) } else { None };
    if cfg.row >= patch.m_a() {
        return Err(SurgeryError::IndexOutOfRange { index: cfg.row, limit: patch.m_a() });
    }
    let (n_a, n_c, n_b) = (qldpc.n, patch.code.n, surface.n);
    let o_c = n_a;
    let o_b = o_c + n_c;
    let o_ta = o_b + n_b;
    let o_tb = o_ta + mx.n_interface;
    let n = o_tb + mz.as_ref().map_or(0, |m| m.n_interface);

    let map_x = |q: usize| if q < n_a + n_c { q } else { o_ta + q - n_a - n_c };
    let map_z = |q: usize| {
        if q < n_b {
            o_b + q
        } else if q < n_b + n_c {
            o_c + q - n_b
        } else {
            o_tb + q - n_b - n_c
        }
    };
    let a_x = embed_matrix(&qldpc.hx, n, |q| q);
    let a_z = embed_matrix(&qldpc.hz, n, |q| q);
    let c_x = embed_matrix(&patch.code.hx, n, |q| o_c + q);
    let c_z = embed_matrix(&patch.code.hz, n, |q| o_c + q);
    let b_x = embed_matrix(&surface.hx, n, |q| o_b + q);
    let b_z = embed_matrix(&surface.hz, n, |q| o_b + q);
    let merged_x = Stage::new(embed_matrix(&mx.hx, n, map_x), embed_matrix(&mx.hz, n, map_x));
    let split_ac = Stage::new(stack(&[a_x.clone(), c_x.clone()], n), stack(&[a_z.clone(), c_z.clone()], n));

    let range = |o: usize, len: usize| -> Vec<usize> { (o..o + len).collect() };
    let mut b = Builder::new(n);
    b.prepare(&range(0, n_a), PauliType::Z);
    b.prepare(&range(o_c, n_c), PauliType::Z);
    let input_basis = match cfg.input {
        TeleportInput::Zero => PauliType::Z,
        TeleportInput::Plus => PauliType::X,
    };
    b.prepare(&range(o_b, n_b), input_basis);
    b.prepare(&range(o_ta, mx.n_interface), PauliType::Z);
    if let Some(m) = &mz {
        b.prepare(&range(o_tb, m.n_interface), PauliType::X);
    }
    b.ins.push(Instruction::Tick);

    let noisy_start = b.ins.len();
    for _ in 0..cfg.rounds {
        b.round(&merged_x);
    }
    b.readout(&range(o_ta, mx.n_interface), PauliType::Z);
    for _ in 0..cfg.rounds {
        b.round(&split_ac);
    }
    if let Some(m) = &mz {
        let merged_z = Stage::new(embed_matrix(&m.hx, n, map_z), embed_matrix(&m.hz, n, map_z));
        let split_cb = Stage::new(stack(&[c_x.clone(), b_x.clone()], n), stack(&[c_z.clone(), b_z.clone()], n));
        for _ in 0..cfg.rounds {
            b.round(&merged_z);
        }
        b.readout(&range(o_tb, m.n_interface), PauliType::X);
        for _ in 0..cfg.rounds {
            b.round(&split_cb);
        }
    }
    let noisy_end = b.ins.len();

    let mut perfect_x = vec![a_x, c_x];
    let mut perfect_z = vec![a_z, c_z];
    if mz.is_some() {
        perfect_x.push(b_x);
        perfect_z.push(b_z);
    }
    b.round(&Stage::new(stack(&perfect_x, n), stack(&perfect_z, n)));
    let r_c: Vec<usize> = patch.z_logical(cfg.row).support.iter().map(|&q| o_c + q).collect();
    if mz.is_none() {
        let support: Vec<usize> = r_c.iter().copied().chain(z_b.support.iter().map(|&q| o_b + q)).collect();
        b.measure_z_product(&support);
    }
    b.readout(&range(o_b, n_b), PauliType::X);
    b.readout(&range(o_c, n_c), PauliType::X);

    let (observed, basis): (Vec<LogicalOperator>, PauliType) = match cfg.input {
        TeleportInput::Zero => (
            (0..qldpc.k).map(|j| LogicalOperator::from_vector(PauliType::Z, &qldpc.logicals_z.row_vector(j))).collect(),
            PauliType::Z,
        ),
        TeleportInput::Plus => (vec![x_a.clone()], PauliType::X),
    };
    let mut exprs = Vec::with_capacity(observed.len());
    for l in &observed {
        let p = b.tracker.pauli(l.pauli, &l.support);
        let e = b
            .tracker
            .query(&p)
            .ok_or_else(|| SurgeryError::Incompatible("teleported logical is not fixed by the records".into()))?;
        exprs.push(e);
    }
    let base = b.readout(&range(0, n_a), basis);
    for (id, (l, e)) in observed.iter().zip(&exprs).enumerate() {
        let recs: Vec<usize> = l.support.iter().map(|&q| base + q).collect();
        let mut recs_sorted = recs.clone();
        recs_sorted.sort_unstable();
        b.observable(id, &xor_sets(&recs_sorted, e));
    }
    let n_total = n + b.pool;
    let circuit = Circuit::new(n_total, b.ins)?;
    let circuit = if cfg.p_gate > 0.0 { add_noise_in(&circuit, cfg.p_gate, 0.0, noisy_start..noisy_end)? } else { circuit };
    let teleported_observable = match cfg.input {
        TeleportInput::Zero => logical,
        TeleportInput::Plus => 0,
    };
    let steps = if cfg.noisy_zz { 4 } else { 2 };
    Ok(TeleportExperiment {
        circuit,
        patch,
        teleported_observable,
        noisy_cycles: steps * cfg.rounds,
        offsets: [0, o_c, o_b, o_ta, o_tb],
    })
}

/// Circuit of [`teleportation_experiment`].
pub fn teleportation_circuit(
    qldpc: &CssCode,
    surface: &CssCode,
    logical: usize,
    cfg: &TeleportConfig,
) -> Result<Circuit, SurgeryError> {
    Ok(teleportation_experiment(qldpc, surface, logical, cfg)?.circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{hgp, quantum_distance, repetition_code};
    use crate::sim::{reference_run, sample};
    use proptest::prelude::*;

    fn patch_code(a: usize, b: usize) -> CssCode {
        hgp(&repetition_code(a).unwrap(), &repetition_code(b).unwrap()).unwrap()
    }

    fn lx(c: &CssCode, i: usize) -> LogicalOperator {
        LogicalOperator::from_vector(PauliType::X, &c.logicals_x.row_vector(i))
    }

    fn lz(c: &CssCode, i: usize) -> LogicalOperator {
        LogicalOperator::from_vector(PauliType::Z, &c.logicals_z.row_vector(i))
    }

    fn pair(da: usize, db: usize) -> (CssCode, CssCode, AncillaPatch) {
        let a = patch_code(da, da);
        let b = patch_code(db, db);
        let p = ancilla_patch(&a, &b, &lx(&a, 0), &lz(&b, 0)).unwrap();
        (a, b, p)
    }

    #[test]
    fn restricted_checks_of_surface_patch_is_repetition() {
        let a = patch_code(3, 3);
        let h = restricted_checks(&a, &lx(&a, 0)).unwrap();
        assert_eq!(h.shape(), (2, 3));
        assert_eq!(h.kernel_basis().rows(), 1);
        assert_eq!(h.kernel_basis().row_support(0), vec![0, 1, 2]);
        assert!(h.rows() <= a.hz.rows());
        assert_eq!(h, repetition_code(3).unwrap().h);
    }

    #[test]
    fn invalid_logicals_rejected() {
        let a = patch_code(3, 3);
        let stab = LogicalOperator::from_vector(PauliType::X, &a.hx.row_vector(0));
        assert!(matches!(restricted_checks(&a, &stab), Err(SurgeryError::InvalidLogical(_))));
        let bad = LogicalOperator::new(PauliType::X, [0]);
        assert!(restricted_checks(&a, &bad).is_err());
        assert!(restricted_checks(&a, &LogicalOperator::new(PauliType::X, [99])).is_err());
    }

    #[test]
    fn ancilla_patch_of_two_distance_three_patches() {
        let (_, _, p) = pair(3, 3);
        assert_eq!((p.code.n, p.code.k), (13, 1));
        assert_eq!(quantum_distance(&p.code, 0, 1), (3, true));
        assert_eq!(p.x_logical(1).weight(), 3);
        assert!(p.x_logical(1).validate(&p.code).is_ok());
        assert!(p.z_logical(2).validate(&p.code).is_ok());
    }

    #[test]
    fn mixed_distance_patch() {
        let (_, _, p) = pair(4, 3);
        assert_eq!(p.code.k, 1);
        assert_eq!(quantum_distance(&p.code, 0, 1).0, 3);
    }

    #[test]
    fn non_minimal_logical_is_degenerate() {
        let a = patch_code(3, 3);
        let b = patch_code(3, 3);
        // X̄ times a weight-4 stabilizer overlapping it: support no longer minimal.
        let base = a.logicals_x.row_vector(0);
        let v = (0..a.hx.rows())
            .map(|r| {
                let mut w = base.clone();
                w.xor_assign(&a.hx.row_vector(r));
                w
            })
            .find(|w| w.weight() > base.weight())
            .unwrap();
        let x = LogicalOperator::from_vector(PauliType::X, &v);
        assert!(matches!(ancilla_patch(&a, &b, &x, &lz(&b, 0)), Err(SurgeryError::Degenerate(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn patch_encodes_one_qubit(da in 2usize..6, db in 2usize..6) {
            let (_, _, p) = pair(da, db);
            let (ha, hb) = (&p.h_a, &p.h_b);
            let k = (ha.cols() - ha.rank()) * (hb.cols() - hb.rank())
                + (ha.rows() - ha.rank()) * (hb.rows() - hb.rank());
            prop_assert_eq!(k, 1);
            prop_assert_eq!(p.code.k, 1);
        }
    }

    #[test]
    fn merged_patch_structure() {
        let (a, b, p) = pair(3, 3);
        for ell in 0..3 {
            let m = merged_patch(&a, &p, ell).unwrap();
            assert!(m.commutes());
            assert!(m.interface_identity_holds());
            assert_eq!(m.n_interface, p.h_a.rows());
            assert_eq!(m.family_count(GeneratorFamily::Interface), p.m_a());
            assert_eq!(m.n(), 13 + 13 + 2);
        }
        assert!(matches!(merged_patch(&a, &p, 3), Err(SurgeryError::IndexOutOfRange { .. })));
        let mz = merged_patch_z(&b, &p, 1).unwrap();
        assert!(mz.commutes());
        assert!(mz.interface_identity_holds());
        assert_eq!(mz.n_interface, p.h_b.rows());
    }

    #[test]
    fn merged_patch_mixed_sizes_commutes() {
        let (a, b, p) = pair(5, 3);
        let m = merged_patch(&a, &p, 1).unwrap();
        assert!(m.commutes() && m.interface_identity_holds());
        let mz = merged_patch_z(&b, &p, 4).unwrap();
        assert!(mz.commutes() && mz.interface_identity_holds());
    }

    fn gauge(with_extra: bool) -> (SubsystemCode, MergedCode) {
        let (a, _, p) = pair(3, 3);
        let m = merged_patch(&a, &p, 0).unwrap();
        let z = lz(&a, 0);
        let g = gauge_group(&a, &p, &m, with_extra.then_some(&z)).unwrap();
        (g, m)
    }

    #[test]
    fn gauge_group_center() {
        let (g, m) = gauge(true);
        assert!(g.center_commutes_with_gauge());
        let joint = m.joint_logical.to_vector(m.n());
        assert!(g.in_gauge_group(PauliType::X, &joint));
        assert!(!g.in_center(PauliType::X, &joint));
        for j in 0..m.n_interface {
            let zt = BinaryVector::from_indices(m.n(), &[m.interface_offset() + j]);
            assert!(g.in_gauge_group(PauliType::Z, &zt));
        }
        assert_eq!(g.n_logical(), 1);
        let (g0, _) = gauge(false);
        assert!(g0.in_center(PauliType::X, &joint));
    }

    #[test]
    fn dressed_distance_of_merge() {
        let (g, _) = gauge(true);
        assert_eq!(g.n, 28);
        assert_eq!(dressed_distance_bruteforce(&g, 6).unwrap(), DressedDistance::Exact(3));
        assert_eq!(dressed_distance_bruteforce(&g, 2).unwrap(), DressedDistance::Exceeds(2));
    }

    #[test]
    fn dressed_distance_matches_stabilizer_code() {
        // With no gauge freedom the dressed distance is the code distance.
        let c = patch_code(3, 2);
        let g = SubsystemCode::new(c.hx.clone(), c.hz.clone()).unwrap();
        assert_eq!(g.n_gauge_qubits(), 0);
        assert_eq!(g.n_logical(), c.k);
        let want = quantum_distance(&c, 0, 1).0;
        assert_eq!(dressed_distance_bruteforce(&g, 5).unwrap(), DressedDistance::Exact(want));
    }

    #[test]
    fn brute_force_rejects_large_codes() {
        let c = patch_code(5, 5);
        let g = SubsystemCode::new(c.hx.clone(), c.hz.clone()).unwrap();
        assert!(matches!(dressed_distance_bruteforce(&g, 3), Err(SurgeryError::BudgetExceeded { .. })));
    }

    #[test]
    fn parallel_logicals_on_distinct_columns() {
        let c = patch_code(4, 4);
        let ls = select_parallel_logicals(&c, 1).unwrap();
        assert_eq!(ls.len(), 1);
        assert!(ls[0].validate(&c).is_ok());
        assert!(matches!(select_parallel_logicals(&c, 2), Err(SurgeryError::InsufficientColumns { available: 1, .. })));
        let rep = repetition_code(3).unwrap();
        let wide = hgp(&rep, &crate::codes::ClassicalCode::from_parity_check(BinaryMatrix::from_dense(&[vec![1, 1, 0, 0]]), 1 << 10)).unwrap();
        let ls = select_parallel_logicals(&wide, 3).unwrap();
        let n2 = 4;
        let mut cols: Vec<usize> = ls.iter().map(|l| l.support[0] % n2).collect();
        for l in &ls {
            assert!(l.validate(&wide).is_ok());
            assert!(l.support.iter().all(|&q| q % n2 == l.support[0] % n2));
        }
        cols.dedup();
        assert_eq!(cols.len(), 3);
    }

    fn experiment(cfg: &TeleportConfig) -> TeleportExperiment {
        let a = patch_code(3, 3);
        let b = patch_code(3, 3);
        teleportation_experiment(&a, &b, 0, cfg).unwrap()
    }

    #[test]
    fn noiseless_teleportation_is_deterministic() {
        for input in [TeleportInput::Zero, TeleportInput::Plus] {
            for noisy_zz in [false, true] {
                let cfg = TeleportConfig { input, noisy_zz, ..TeleportConfig::new(3, 0.0) };
                let e = experiment(&cfg);
                reference_run(&e.circuit).unwrap();
                let shots = sample(&e.circuit, 256, 3);
                assert!(shots.detectors.is_zero(), "{input:?} {noisy_zz}");
                assert!(shots.observables.is_zero(), "{input:?} {noisy_zz}");
                assert!(e.circuit.num_detectors() > 0);
            }
        }
    }

    #[test]
    fn noisy_teleportation_decodes() {
        use crate::decode::{build_decoding_graph, logical_failure, BpConfig, OsdConfig, WindowConfig, WindowedDecoder};
        let p = 1e-3;
        let e = experiment(&TeleportConfig::new(3, p));
        assert_eq!(e.noisy_cycles, 6);
        let g = build_decoding_graph(&e.circuit);
        let w = WindowedDecoder::new(&g, WindowConfig::hgp(p), BpConfig::hgp_default(), OsdConfig::default()).unwrap();
        let shots = sample(&e.circuit, 2000, 11);
        let fails = logical_failure(&w.decode_batch(&shots.detectors).unwrap(), &shots.observables).unwrap();
        assert!(fails < 40, "{fails} failures");
    }

    #[test]
    fn teleportation_tracks_every_row_and_column() {
        let a = patch_code(3, 3);
        let b = patch_code(3, 3);
        for (column, row) in [(1, 2), (2, 0)] {
            let cfg = TeleportConfig { column, row, input: TeleportInput::Plus, ..TeleportConfig::new(2, 0.0) };
            let c = teleportation_circuit(&a, &b, 0, &cfg).unwrap();
            reference_run(&c).unwrap();
        }
    }

    #[test]
    fn teleportation_rejects_bad_inputs() {
        let a = patch_code(3, 3);
        let b = patch_code(3, 3);
        let cfg = TeleportConfig::new(2, 0.0);
        assert!(teleportation_experiment(&a, &b, 1, &cfg).is_err());
        assert!(teleportation_experiment(&a, &b, 0, &TeleportConfig::new(0, 0.0)).is_err());
        let two = hgp(&repetition_code(3).unwrap(), &crate::codes::ClassicalCode::from_parity_check(BinaryMatrix::from_dense(&[vec![1, 1, 0, 0]]), 1 << 10)).unwrap();
        assert!(matches!(teleportation_experiment(&a, &two, 0, &cfg), Err(SurgeryError::Incompatible(_))));
    }

    #[test]
    fn per_cycle_rate_inverts_compounding() {
        let p = 1e-3;
        let total = 1.0 - (1.0 - p as f64).powi(6);
        assert!((per_cycle_lfr(total, 6) - p).abs() < 1e-12);
    }

    #[test]
    fn tracker_flags_repeated_measurements() {
        let mut t = Tracker::new(2);
        let zz = t.pauli(PauliType::Z, &[0, 1]);
        let xx = t.pauli(PauliType::X, &[0, 1]);
        assert!(matches!(t.measure(zz.clone(), 0), Outcome::Random));
        assert!(matches!(t.measure(xx.clone(), 1), Outcome::Random));
        match t.measure(zz, 2) {
            Outcome::Deterministic(e) => assert_eq!(e, vec![0]),
            Outcome::Random => panic!("ZZ should be fixed"),
        }
        let z0 = t.pauli(PauliType::Z, &[0]);
        assert!(matches!(t.measure(z0, 3), Outcome::Random));
        let z1 = t.pauli(PauliType::Z, &[1]);
        assert_eq!(t.query(&z1), Some(vec![2, 3]));
        assert_eq!(t.query(&xx), None);
    }
}
