//! Matrices over F₂[x]/(xˡ − 1), circulant lifts and the lifted product.

use serde::{Deserialize, Serialize};

use super::css::{CodeStructure, CssCode};
use super::CodeError;
use crate::gf2::BinaryMatrix;

/// Matrix whose entries are polynomials in F₂[x]/(xˡ − 1), each stored as a
/// sorted exponent set. An empty set is the zero entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingMatrix {
    pub rows: usize,
    pub cols: usize,
    pub lift: usize,
    pub entries: Vec<Vec<u32>>,
}

fn normalize(mut e: Vec<u32>) -> Vec<u32> {
    // Coefficients live in F₂, so repeated exponents cancel in pairs.
    e.sort_unstable();
    let mut out: Vec<u32> = Vec::with_capacity(e.len());
    for x in e {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

impl RingMatrix {
    pub fn zeros(rows: usize, cols: usize, lift: usize) -> Self {
        RingMatrix { rows, cols, lift, entries: vec![Vec::new(); rows * cols] }
    }

    pub fn identity(n: usize, lift: usize) -> Self {
        let mut m = Self::zeros(n, n, lift);
        for i in 0..n {
            m.entries[i * n + i] = vec![0];
        }
        m
    }

    /// Build from per-cell exponent lists.
    pub fn new(lift: usize, cells: Vec<Vec<Vec<u32>>>) -> Result<Self, CodeError> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows, cols, lift);
        for (r, row) in cells.into_iter().enumerate() {
            if row.len() != cols {
                return Err(CodeError::InvalidParameter("ragged ring matrix".into()));
            }
            for (c, e) in row.into_iter().enumerate() {
                if let Some(&bad) = e.iter().find(|&&a| a as usize >= lift) {
                    return Err(CodeError::ExponentOutOfRange { exponent: bad as usize, lift });
                }
                m.entries[r * cols + c] = normalize(e);
            }
        }
        Ok(m)
    }

    /// Build from single monomials `x^a`.
    pub fn from_monomials(lift: usize, exps: &[Vec<u32>]) -> Result<Self, CodeError> {
        Self::new(lift, exps.iter().map(|r| r.iter().map(|&a| vec![a]).collect()).collect())
    }

    pub fn get(&self, r: usize, c: usize) -> &[u32] {
        &self.entries[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, e: Vec<u32>) {
        self.entries[r * self.cols + c] = e;
    }

    fn mul_entries(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let l = self.lift as u32;
        normalize(a.iter().flat_map(|&x| b.iter().map(move |&y| (x + y) % l)).collect())
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix, CodeError> {
        if self.lift != other.lift {
            return Err(CodeError::LiftMismatch(self.lift, other.lift));
        }
        if self.cols != other.rows {
            return Err(CodeError::InvalidParameter("ring matrix shape mismatch".into()));
        }
        let mut out = RingMatrix::zeros(self.rows, other.cols, self.lift);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Vec::new();
                for t in 0..self.cols {
                    acc.extend(self.mul_entries(self.get(i, t), other.get(t, j)));
                }
                out.set(i, j, normalize(acc));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix, CodeError> {
        if self.lift != other.lift {
            return Err(CodeError::LiftMismatch(self.lift, other.lift));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(CodeError::InvalidParameter("ring matrix shape mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| normalize(a.iter().chain(b).copied().collect()))
            .collect();
        Ok(RingMatrix { entries, ..self.clone() })
    }

    /// Transpose with every exponent negated, so that
    /// `lift(conj_transpose(B)) == lift(B)ᵀ`.
    pub fn conj_transpose(&self) -> RingMatrix {
        let l = self.lift as u32;
        let mut out = RingMatrix::zeros(self.cols, self.rows, self.lift);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, normalize(self.get(r, c).iter().map(|&a| (l - a) % l).collect()));
            }
        }
        out
    }

    pub fn kron(&self, other: &RingMatrix) -> RingMatrix {
        let mut out = RingMatrix::zeros(self.rows * other.rows, self.cols * other.cols, self.lift);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_empty() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let e = self.mul_entries(a, other.get(k, l));
                        out.set(i * other.rows + k, j * other.cols + l, e);
                    }
                }
            }
        }
        out
    }

    pub fn hstack(&self, other: &RingMatrix) -> RingMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = RingMatrix::zeros(self.rows, self.cols + other.cols, self.lift);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).to_vec());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).to_vec());
            }
        }
        out
    }

    /// Replace each entry by its `l×l` circulant block.
    pub fn lift(&self) -> BinaryMatrix {
        let l = self.lift;
        let mut out = BinaryMatrix::zeros(self.rows * l, self.cols * l);
        for r in 0..self.rows {
            for c in 0..self.cols {
                for &a in self.get(r, c) {
                    for i in 0..l {
                        out.flip(r * l + i, c * l + (i + a as usize) % l);
                    }
                }
            }
        }
        out
    }
}

/// `l×l` circulant of the polynomial with the given exponents; `x^a` has
/// ones at `(i, (i + a) mod l)`.
pub fn circulant(exponents: &[u32], l: usize) -> Result<BinaryMatrix, CodeError> {
    let m = RingMatrix::new(l, vec![vec![exponents.to_vec()]])?;
    Ok(m.lift())
}

/// Lifted product code of two base matrices. Qubits are ordered as the VV
/// cells `(a, b)` then the CC cells `(i, j)`, each cell expanded to `l`
/// consecutive qubits.
pub fn lifted_product(b1: &RingMatrix, b2: &RingMatrix) -> Result<CssCode, CodeError> {
    if b1.lift != b2.lift {
        return Err(CodeError::LiftMismatch(b1.lift, b2.lift));
    }
    let l = b1.lift;
    let (m1, n1, m2, n2) = (b1.rows, b1.cols, b2.rows, b2.cols);
    let bx = RingMatrix::identity(n1, l).kron(b2).hstack(&b1.conj_transpose().kron(&RingMatrix::identity(m2, l)));
    let bz = b1.kron(&RingMatrix::identity(n2, l)).hstack(&RingMatrix::identity(m1, l).kron(&b2.conj_transpose()));
    CssCode::new(bx.lift(), bz.lift(), CodeStructure::Lp { b1: b1.clone(), b2: b2.clone() })
}

/// The four base matrices `B^l_d` (3×5, monomial entries) as `(l, d, exponents)`.
pub fn builtin_base_matrices() -> Vec<(usize, usize, RingMatrix)> {
    let table: [(usize, usize, [[u32; 5]; 3]); 4] = [
        (16, 12, [[0, 0, 0, 0, 0], [0, 2, 4, 7, 11], [0, 3, 10, 14, 15]]),
        (21, 16, [[0, 0, 0, 0, 0], [0, 4, 5, 7, 17], [0, 14, 18, 12, 11]]),
        (30, 20, [[0, 0, 0, 0, 0], [0, 2, 14, 24, 25], [0, 16, 11, 14, 13]]),
        (42, 24, [[0, 0, 0, 0, 0], [0, 6, 7, 9, 30], [0, 40, 15, 31, 35]]),
    ];
    table
        .iter()
        .map(|(l, d, rows)| {
            let exps: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
            (*l, *d, RingMatrix::from_monomials(*l, &exps).expect("valid built-in exponents"))
        })
        .collect()
}

/// The four built-in LP codes, sizes 544, 714, 1020 and 1428.
///
/// `d_upper` is the base-matrix label `d` and is not certified.
pub fn builtin_lp_codes() -> Vec<CssCode> {
    builtin_base_matrices().into_iter().map(|(l, d, b)| builtin(l, d, &b)).collect()
}

fn builtin(l: usize, d: usize, b: &RingMatrix) -> CssCode {
    let mut code = lifted_product(b, b).expect("built-in lift sizes agree");
    code.d_upper = Some(d);
    code.d_certified = false;
    code.meta.insert("lift".into(), l.into());
    code.meta.insert("label".into(), format!("B^{l}_{d}").into());
    code
}

/// Built-in LP code with the given block length.
pub fn builtin_lp_code(n: usize) -> Option<CssCode> {
    let (l, d, b) = builtin_base_matrices().into_iter().find(|(l, _, _)| 34 * l == n)?;
    Some(builtin(l, d, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::classical::TannerGraph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ring(rows: usize, cols: usize, l: usize, rng: &mut ChaCha8Rng) -> RingMatrix {
        let cells = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let t = rng.gen_range(0..3);
                        (0..t).map(|_| rng.gen_range(0..l as u32)).collect()
                    })
                    .collect()
            })
            .collect();
        RingMatrix::new(l, cells).unwrap()
    }

    #[test]
    fn circulant_examples() {
        assert_eq!(circulant(&[0], 5).unwrap(), BinaryMatrix::identity(5));
        let s = circulant(&[1], 3).unwrap();
        assert_eq!(s, BinaryMatrix::from_dense(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]));
        assert!(matches!(circulant(&[3], 3), Err(CodeError::ExponentOutOfRange { .. })));
    }

    #[test]
    fn lift_is_a_ring_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_ring(3, 4, 8, &mut rng);
            let b = random_ring(4, 2, 8, &mut rng);
            let c = random_ring(3, 4, 8, &mut rng);
            assert_eq!(a.mul(&b).unwrap().lift(), a.lift().matmul(&b.lift()).unwrap());
            assert_eq!(a.add(&c).unwrap().lift(), a.lift().add(&c.lift()).unwrap());
            assert_eq!(a.conj_transpose().lift(), a.lift().transpose());
        }
    }

    #[test]
    fn lift_mismatch_is_reported() {
        let a = RingMatrix::identity(2, 3);
        let b = RingMatrix::identity(2, 4);
        assert!(matches!(lifted_product(&a, &b), Err(CodeError::LiftMismatch(3, 4))));
    }

    #[test]
    fn builtin_sizes_and_rates() {
        let codes = builtin_lp_codes();
        let sizes: Vec<usize> = codes.iter().map(|c| c.n).collect();
        assert_eq!(sizes, vec![544, 714, 1020, 1428]);
        for c in &codes {
            assert!(17 * c.k >= 2 * c.n, "k = {} for n = {}", c.k, c.n);
            assert!(c.hx.matmul(&c.hz.transpose()).unwrap().is_zero());
            let fit = 0.38 * (c.n as f64).powf(0.85);
            assert!((c.k as f64 - fit).abs() <= 0.15 * fit, "k = {} vs {fit}", c.k);
        }
    }

    #[test]
    fn builtin_lifted_girths() {
        // B^30_20 as published closes 6-cycles (rows 0,1,2; columns 0,1,3:
        // 0 - 0 + 2 - 16 + 14 - 0 = 0), the other three reach girth 8.
        let girths: Vec<usize> = builtin_base_matrices()
            .iter()
            .map(|(_, _, b)| TannerGraph::from_matrix(&b.lift()).girth().unwrap())
            .collect();
        assert_eq!(girths, vec![8, 8, 6, 8]);
    }
}
