//! CSS codes, the hypergraph product, logical bases and distance search.

use serde_json::{json, Map, Value};

use super::classical::{min_weight_exhaustive, min_weight_isd, ClassicalCode};
use super::lifted::RingMatrix;
use super::CodeError;
use crate::gf2::{parity_and, BinaryMatrix, EchelonBasis};

/// Product structure remembered from construction. Circuit generation and
/// surgery need the factors.
#[derive(Clone, Debug, PartialEq)]
pub enum CodeStructure {
    Generic,
    Hgp { h1: BinaryMatrix, h2: BinaryMatrix },
    Lp { b1: RingMatrix, b2: RingMatrix },
}

/// Index map of a product code.
///
/// Qubits: VV cells `(a, b)` for `a < n1, b < n2`, then CC cells `(i, j)` for
/// `i < r1, j < r2`, row-major, each cell holding `lift` qubits. X checks
/// are cells `(a, j)`, Z checks are cells `(i, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductLayout {
    pub n1: usize,
    pub r1: usize,
    pub n2: usize,
    pub r2: usize,
    pub lift: usize,
}

impl ProductLayout {
    pub fn vv(&self, a: usize, b: usize, t: usize) -> usize {
        (a * self.n2 + b) * self.lift + t
    }
    pub fn cc(&self, i: usize, j: usize, t: usize) -> usize {
        (self.n1 * self.n2 + i * self.r2 + j) * self.lift + t
    }
    pub fn x_check(&self, a: usize, j: usize, t: usize) -> usize {
        (a * self.r2 + j) * self.lift + t
    }
    pub fn z_check(&self, i: usize, b: usize, t: usize) -> usize {
        (i * self.n2 + b) * self.lift + t
    }
    pub fn n_vv(&self) -> usize {
        self.n1 * self.n2 * self.lift
    }
    pub fn n_qubits(&self) -> usize {
        (self.n1 * self.n2 + self.r1 * self.r2) * self.lift
    }
}

#[derive(Clone, Debug)]
pub struct CssCode {
    pub family: String,
    pub structure: CodeStructure,
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
    pub n: usize,
    pub k: usize,
    pub d_upper: Option<usize>,
    pub d_certified: bool,
    pub logicals_x: BinaryMatrix,
    pub logicals_z: BinaryMatrix,
    pub meta: Map<String, Value>,
}

impl CssCode {
    /// Validates orthogonality, computes `k` and a paired logical basis.
    pub fn new(hx: BinaryMatrix, hz: BinaryMatrix, structure: CodeStructure) -> Result<Self, CodeError> {
        if hx.cols() != hz.cols() {
            return Err(CodeError::InvalidParameter(format!(
                "Hx has {} columns, Hz has {}",
                hx.cols(),
                hz.cols()
            )));
        }
        if !hx.matmul(&hz.transpose())?.is_zero() {
            return Err(CodeError::NotOrthogonal);
        }
        let n = hx.cols();
        let k = n - hx.rank() - hz.rank();
        let family = match structure {
            CodeStructure::Generic => "css",
            CodeStructure::Hgp { .. } => "hgp",
            CodeStructure::Lp { .. } => "lp",
        }
        .to_string();
        let mut code = CssCode {
            family,
            structure,
            hx,
            hz,
            n,
            k,
            d_upper: None,
            d_certified: false,
            logicals_x: BinaryMatrix::zeros(0, n),
            logicals_z: BinaryMatrix::zeros(0, n),
            meta: Map::new(),
        };
        let (lx, lz) = logical_basis(&code)?;
        code.logicals_x = lx;
        code.logicals_z = lz;
        Ok(code)
    }

    pub fn layout(&self) -> Option<ProductLayout> {
        match &self.structure {
            CodeStructure::Generic => None,
            CodeStructure::Hgp { h1, h2 } => Some(ProductLayout {
                n1: h1.cols(),
                r1: h1.rows(),
                n2: h2.cols(),
                r2: h2.rows(),
                lift: 1,
            }),
            CodeStructure::Lp { b1, b2 } => Some(ProductLayout {
                n1: b1.cols,
                r1: b1.rows,
                n2: b2.cols,
                r2: b2.rows,
                lift: b1.lift,
            }),
        }
    }

    pub fn n_checks(&self) -> usize {
        self.hx.rows() + self.hz.rows()
    }

    /// Problems found by re-checking every invariant; empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.hx.cols() != self.n || self.hz.cols() != self.n {
            issues.push("check matrix width differs from n".to_string());
            return issues;
        }
        if !self.hx.matmul(&self.hz.transpose()).map(|m| m.is_zero()).unwrap_or(false) {
            issues.push("Hx·Hzᵀ ≠ 0".to_string());
        }
        let k = self.n - self.hx.rank() - self.hz.rank();
        if k != self.k {
            issues.push(format!("k = {} but rank formula gives {k}", self.k));
        }
        if self.logicals_x.rows() != k || self.logicals_z.rows() != k {
            issues.push("logical basis size differs from k".to_string());
            return issues;
        }
        if !self.hz.matmul(&self.logicals_x.transpose()).map(|m| m.is_zero()).unwrap_or(false) {
            issues.push("some logical X anticommutes with a Z check".to_string());
        }
        if !self.hx.matmul(&self.logicals_z.transpose()).map(|m| m.is_zero()).unwrap_or(false) {
            issues.push("some logical Z anticommutes with an X check".to_string());
        }
        match self.logicals_x.matmul(&self.logicals_z.transpose()) {
            Ok(m) if m == BinaryMatrix::identity(k) => {}
            _ => issues.push("logical pairing is not the identity".to_string()),
        }
        issues
    }

    pub fn to_json(&self) -> Value {
        let mut meta = self.meta.clone();
        match &self.structure {
            CodeStructure::Generic => {}
            CodeStructure::Hgp { h1, h2 } => {
                meta.insert("h1".into(), serde_json::to_value(h1).expect("serializable"));
                meta.insert("h2".into(), serde_json::to_value(h2).expect("serializable"));
            }
            CodeStructure::Lp { b1, b2 } => {
                meta.insert("b1".into(), serde_json::to_value(b1).expect("serializable"));
                meta.insert("b2".into(), serde_json::to_value(b2).expect("serializable"));
            }
        }
        meta.insert("d_certified".into(), self.d_certified.into());
        json!({
            "family": self.family,
            "n": self.n,
            "k": self.k,
            "d_upper": self.d_upper,
            "hx": self.hx,
            "hz": self.hz,
            "logicals_x": self.logicals_x,
            "logicals_z": self.logicals_z,
            "meta": meta,
        })
    }

    /// Parses the JSON written by [`CssCode::to_json`]. Stored fields are
    /// kept as-is so that [`CssCode::validate`] can audit them.
    pub fn from_json(v: &Value) -> Result<Self, CodeError> {
        let bad = |what: &str| CodeError::InvalidParameter(format!("code JSON: {what}"));
        let mat = |key: &str| -> Result<BinaryMatrix, CodeError> {
            serde_json::from_value(v.get(key).cloned().ok_or_else(|| bad(key))?).map_err(|e| bad(&format!("{key}: {e}")))
        };
        let mut meta = v.get("meta").and_then(|m| m.as_object()).cloned().unwrap_or_default();
        let family = v.get("family").and_then(|f| f.as_str()).unwrap_or("css").to_string();
        let structure = match family.as_str() {
            "hgp" => {
                let h1 = meta.remove("h1").ok_or_else(|| bad("meta.h1"))?;
                let h2 = meta.remove("h2").ok_or_else(|| bad("meta.h2"))?;
                CodeStructure::Hgp {
                    h1: serde_json::from_value(h1).map_err(|e| bad(&e.to_string()))?,
                    h2: serde_json::from_value(h2).map_err(|e| bad(&e.to_string()))?,
                }
            }
            "lp" => {
                let b1 = meta.remove("b1").ok_or_else(|| bad("meta.b1"))?;
                let b2 = meta.remove("b2").ok_or_else(|| bad("meta.b2"))?;
                CodeStructure::Lp {
                    b1: serde_json::from_value(b1).map_err(|e| bad(&e.to_string()))?,
                    b2: serde_json::from_value(b2).map_err(|e| bad(&e.to_string()))?,
                }
            }
            _ => CodeStructure::Generic,
        };
        let d_certified = meta.remove("d_certified").and_then(|b| b.as_bool()).unwrap_or(false);
        let hx = mat("hx")?;
        Ok(CssCode {
            family,
            structure,
            n: v.get("n").and_then(|x| x.as_u64()).map(|x| x as usize).unwrap_or(hx.cols()),
            k: v.get("k").and_then(|x| x.as_u64()).ok_or_else(|| bad("k"))? as usize,
            d_upper: v.get("d_upper").and_then(|x| x.as_u64()).map(|x| x as usize),
            d_certified,
            hz: mat("hz")?,
            logicals_x: mat("logicals_x")?,
            logicals_z: mat("logicals_z")?,
            hx,
            meta,
        })
    }
}

/// Hypergraph product of two classical codes.
///
/// `Hx = (I_{n1}⊗H2 | H1ᵀ⊗I_{r2})`, `Hz = (H1⊗I_{n2} | I_{r1}⊗H2ᵀ)` with the
/// VV block first. `d_upper = min(d1, d2)`, certified when both classical
/// distances are certified and both transposed codes are trivial.
pub fn hgp(c1: &ClassicalCode, c2: &ClassicalCode) -> Result<CssCode, CodeError> {
    let mut code = hgp_from_matrices(&c1.h, &c2.h)?;
    code.d_upper = Some(c1.d_estimate.min(c2.d_estimate));
    code.d_certified = c1.d_certified && c2.d_certified && c1.has_independent_checks() && c2.has_independent_checks();
    code.meta.insert("d1".into(), c1.d_estimate.into());
    code.meta.insert("d2".into(), c2.d_estimate.into());
    Ok(code)
}

pub fn hgp_from_matrices(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<CssCode, CodeError> {
    let (r1, n1) = h1.shape();
    let (r2, n2) = h2.shape();
    let hx = BinaryMatrix::identity(n1).kron(h2).hstack(&h1.transpose().kron(&BinaryMatrix::identity(r2)))?;
    let hz = h1.kron(&BinaryMatrix::identity(n2)).hstack(&BinaryMatrix::identity(r1).kron(&h2.transpose()))?;
    CssCode::new(hx, hz, CodeStructure::Hgp { h1: h1.clone(), h2: h2.clone() })
}

/// Symplectically paired logical bases `(Lx, Lz)` with `Lx·Lzᵀ = I`.
///
/// For a hypergraph product with `k = k1·k2`, X representatives are
/// `x ⊗ e_b` (one VV column each) and Z representatives `e_a ⊗ z` (one VV
/// row each), built from reduced kernel bases of the factors.
pub fn logical_basis(code: &CssCode) -> Result<(BinaryMatrix, BinaryMatrix), CodeError> {
    if let CodeStructure::Hgp { h1, h2 } = &code.structure {
        let k1 = h1.cols() - h1.rank();
        let k2 = h2.cols() - h2.rank();
        if k1 * k2 == code.k {
            return Ok(hgp_logicals(h1, h2, code.n));
        }
    }
    generic_logicals(&code.hx, &code.hz, code.k)
}

fn free_columns(h: &BinaryMatrix) -> Vec<usize> {
    let piv = h.row_reduce().pivots;
    (0..h.cols()).filter(|c| !piv.contains(c)).collect()
}

fn hgp_logicals(h1: &BinaryMatrix, h2: &BinaryMatrix, n: usize) -> (BinaryMatrix, BinaryMatrix) {
    let n2 = h2.cols();
    let (g1, g2) = (h1.kernel_basis(), h2.kernel_basis());
    let (f1, f2) = (free_columns(h1), free_columns(h2));
    let k = g1.rows() * g2.rows();
    let mut lx = BinaryMatrix::zeros(k, n);
    let mut lz = BinaryMatrix::zeros(k, n);
    for i in 0..g1.rows() {
        for j in 0..g2.rows() {
            let row = i * g2.rows() + j;
            // Kernel row i is the unit vector on free column f1[i] there.
            for a in g1.row_support(i) {
                lx.set(row, a * n2 + f2[j], true);
            }
            for b in g2.row_support(j) {
                lz.set(row, f1[i] * n2 + b, true);
            }
        }
    }
    (lx, lz)
}

fn independent_kernel_rows(h: &BinaryMatrix, stabilizers: &BinaryMatrix, k: usize) -> BinaryMatrix {
    let mut span = EchelonBasis::from_matrix(stabilizers);
    let ker = h.kernel_basis();
    let mut picked = BinaryMatrix::zeros(0, h.cols());
    for r in 0..ker.rows() {
        if picked.rows() == k {
            break;
        }
        let v = ker.row_vector(r);
        if span.insert(v.clone()) {
            picked.push_row(&v);
        }
    }
    picked
}

fn generic_logicals(hx: &BinaryMatrix, hz: &BinaryMatrix, k: usize) -> Result<(BinaryMatrix, BinaryMatrix), CodeError> {
    let lx = independent_kernel_rows(hz, hx, k);
    let lz = independent_kernel_rows(hx, hz, k);
    if lx.rows() != k || lz.rows() != k {
        return Err(CodeError::PairingFailure);
    }
    let m = lx.matmul(&lz.transpose())?;
    let inv = m.inverse().ok_or(CodeError::PairingFailure)?;
    let lz = inv.transpose().matmul(&lz)?;
    Ok((lx, lz))
}

/// Minimum logical weight found, with a flag telling whether the search was
/// exhaustive. Exhaustive when `n ≤ 20` or the relevant kernel has
/// dimension at most 20; otherwise randomized information-set search with
/// `trials` rounds per Pauli type.
pub fn quantum_distance(code: &CssCode, trials: usize, seed: u64) -> (usize, bool) {
    if code.k == 0 {
        return (0, true);
    }
    let mut best = usize::MAX;
    let mut certified = true;
    for (checks, dual) in [(&code.hz, &code.logicals_z), (&code.hx, &code.logicals_x)] {
        let ker = checks.kernel_basis();
        let nontrivial = |w: &[u64]| (0..dual.rows()).any(|j| parity_and(w, dual.row(j)));
        let d = if code.n <= 20 || ker.rows() <= 20 {
            min_weight_exhaustive(&ker, nontrivial)
        } else {
            certified = false;
            min_weight_isd(&ker, trials, seed, |v| nontrivial(v.words()))
        };
        if let Some(d) = d {
            best = best.min(d);
        }
    }
    (best, certified)
}

/// Upper bound on the quantum distance; exact for small codes.
pub fn quantum_distance_upper(code: &CssCode, trials: usize, seed: u64) -> usize {
    quantum_distance(code, trials, seed).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::classical::{random_biregular_tanner, repetition_code, ClassicalCode};
    use crate::gf2::BinaryVector;

    fn surface13() -> CssCode {
        let r3 = repetition_code(3).unwrap();
        hgp(&r3, &r3).unwrap()
    }

    #[test]
    fn surface_patch_parameters() {
        let c = surface13();
        assert_eq!((c.n, c.k), (13, 1));
        assert!(c.validate().is_empty());
        assert_eq!(quantum_distance(&c, 0, 0), (3, true));
    }

    #[test]
    fn hgp_rep5_rep3_distance() {
        let c = hgp(&repetition_code(5).unwrap(), &repetition_code(3).unwrap()).unwrap();
        assert_eq!((c.n, c.k), (15 + 8, 1));
        assert_eq!(quantum_distance_upper(&c, 0, 0), 3);
    }

    #[test]
    fn surface_logicals_are_rows_and_columns() {
        let c = surface13();
        let lay = c.layout().unwrap();
        let lx = c.logicals_x.row_support(0);
        let lz = c.logicals_z.row_support(0);
        assert_eq!((lx.len(), lz.len()), (3, 3));
        // X on one VV column: fixed b, all a. Z on one VV row.
        let col = lx[0] % lay.n2;
        assert!(lx.iter().all(|&q| q < lay.n_vv() && q % lay.n2 == col));
        let row = lz[0] / lay.n2;
        assert!(lz.iter().all(|&q| q < lay.n_vv() && q / lay.n2 == row));
    }

    #[test]
    fn exhaustive_weight3_logicals_on_surface() {
        // Every weight-3 X operator commuting with Hz and not a stabilizer
        // sits on one VV column.
        let c = surface13();
        let stab = EchelonBasis::from_matrix(&c.hx);
        let mut found = 0;
        for mask in 0u64..1 << 13 {
            if mask.count_ones() != 3 {
                continue;
            }
            let v = BinaryVector::from_words(13, vec![mask]);
            if c.hz.mul_vec(&v).unwrap().is_zero() && !stab.contains(&v) {
                let s = v.support();
                assert!(s.iter().all(|&q| q < 9 && q % 3 == s[0] % 3));
                found += 1;
            }
        }
        assert_eq!(found, 3);
    }

    #[test]
    fn hgp_of_random_codes() {
        for seed in 0..3 {
            let t1 = random_biregular_tanner(16, 3, 4, 6, seed).unwrap();
            let t2 = random_biregular_tanner(12, 3, 4, 6, seed + 10).unwrap();
            let c1 = ClassicalCode::from_parity_check(t1.to_matrix(), 1 << 12);
            let c2 = ClassicalCode::from_parity_check(t2.to_matrix(), 1 << 12);
            let q = hgp(&c1, &c2).unwrap();
            assert!(q.validate().is_empty());
            assert_eq!(q.n, 16 * 12 + 12 * 9);
            let kt1 = c1.h.rows() - c1.h.rank();
            let kt2 = c2.h.rows() - c2.h.rank();
            assert_eq!(q.k, c1.k * c2.k + kt1 * kt2);
            for h in [&q.hx, &q.hz] {
                assert!((0..h.rows()).all(|r| h.row_weight(r) <= 7));
                let t = h.transpose();
                assert!((0..t.rows()).all(|r| t.row_weight(r) <= 7));
            }
            assert!(quantum_distance_upper(&q, 30, 1) <= c1.d_estimate.min(c2.d_estimate));
        }
    }

    #[test]
    fn generic_basis_pairs() {
        // Dependent checks force the generic path.
        let h = BinaryMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        let c = hgp_from_matrices(&h, &h).unwrap();
        assert_eq!(c.k, 2);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn json_roundtrip() {
        let c = surface13();
        let v = c.to_json();
        let back = CssCode::from_json(&v).unwrap();
        assert_eq!(back.hx, c.hx);
        assert_eq!(back.structure, c.structure);
        assert_eq!(back.logicals_z, c.logicals_z);
        assert!(back.validate().is_empty());
    }

    #[test]
    fn orthogonality_is_enforced() {
        let hx = BinaryMatrix::from_dense(&[vec![1, 0]]);
        let hz = BinaryMatrix::from_dense(&[vec![1, 1]]);
        assert!(matches!(CssCode::new(hx, hz, CodeStructure::Generic), Err(CodeError::NotOrthogonal)));
    }
}
