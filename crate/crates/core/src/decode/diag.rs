//! Greedy local decoding and the confinement probe.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::DecodeError;
use crate::codes::CssCode;
use crate::gf2::{BinaryMatrix, BinaryVector, EchelonBasis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GreedyOutcome {
    /// Correction that clears the syndrome.
    Success(BinaryVector),
    /// Stuck at a local minimum with this partial correction and residual
    /// syndrome weight.
    Stuck { partial: BinaryVector, residual_weight: usize },
}

fn subsets(pool: &[usize], max: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(pool: &[usize], start: usize, max: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, i + 1, max, cur, f);
            cur.pop();
        }
    }
    rec(pool, 0, max, &mut Vec::new(), f);
}

/// Repeatedly applies the flip of at most `c` bits that lowers the syndrome
/// weight the most (first found on ties) until the syndrome is clear or no
/// flip helps. Candidates are bits within two hops of an unsatisfied check.
pub fn greedy_flip_decode(h: &BinaryMatrix, syndrome: &BinaryVector, c: usize) -> GreedyOutcome {
    let ht = h.transpose();
    let mut syn = syndrome.clone();
    let mut corr = BinaryVector::zeros(h.cols());
    while !syn.is_zero() {
        let mut pool: Vec<usize> = syn.support().into_iter().flat_map(|r| h.row_support(r)).collect();
        let hop: Vec<usize> = pool.iter().flat_map(|&q| ht.row_support(q)).flat_map(|r| h.row_support(r)).collect();
        pool.extend(hop);
        pool.sort_unstable();
        pool.dedup();
        let base = syn.weight() as isize;
        let mut best: Option<(isize, Vec<usize>)> = None;
        subsets(&pool, c, &mut |set| {
            let mut s = syn.clone();
            for &q in set {
                s.xor_assign(&ht.row_vector(q));
            }
            let delta = s.weight() as isize - base;
            if delta < 0 && best.as_ref().is_none_or(|(d, _)| delta < *d) {
                best = Some((delta, set.to_vec()));
            }
        });
        match best {
            Some((_, set)) => {
                for q in set {
                    syn.xor_assign(&ht.row_vector(q));
                    corr.flip(q);
                }
            }
            None => return GreedyOutcome::Stuck { partial: corr, residual_weight: syn.weight() },
        }
    }
    GreedyOutcome::Success(corr)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfinementRow {
    pub reduced_weight: usize,
    pub min_syndrome_weight: usize,
    pub errors_checked: usize,
}

fn binom(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// For each reduced weight `w <= max_weight`, the smallest syndrome weight
/// over single-type (all-X or all-Z) errors whose lightest stabilizer-
/// equivalent form has weight `w`.
pub fn confinement_probe(code: &CssCode, max_weight: usize, budget: u64) -> Result<Vec<ConfinementRow>, DecodeError> {
    let n = code.n;
    let total: u128 = (0..=max_weight).map(|w| 2 * binom(n, w)).sum();
    if total > budget as u128 {
        return Err(DecodeError::BudgetExceeded { needed: total, budget });
    }
    let mut rows: Vec<ConfinementRow> = (0..=max_weight)
        .map(|w| ConfinementRow { reduced_weight: w, min_syndrome_weight: usize::MAX, errors_checked: 0 })
        .collect();
    // X errors: syndrome from Hz, equivalence modulo rows of Hx. Z errors swap.
    for (syn_m, stab_m) in [(&code.hz, &code.hx), (&code.hx, &code.hz)] {
        let stab = EchelonBasis::from_matrix(stab_m);
        let cols = syn_m.transpose();
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        for w in 0..=max_weight {
            let mut idx: Vec<usize> = (0..w).collect();
            loop {
                let e = BinaryVector::from_indices(n, &idx);
                let mut key = e.clone();
                stab.reduce(&mut key);
                if seen.insert(key.words().to_vec()) {
                    let mut s = BinaryVector::zeros(syn_m.rows());
                    for &q in &idx {
                        s.xor_assign(&cols.row_vector(q));
                    }
                    let row = &mut rows[w];
                    row.errors_checked += 1;
                    row.min_syndrome_weight = row.min_syndrome_weight.min(s.weight());
                }
                // Next combination.
                let mut i = w;
                while i > 0 && idx[i - 1] == n - w + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..w {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{hgp, repetition_code};

    fn code13() -> CssCode {
        hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap()
    }

    #[test]
    fn greedy_zero_syndrome() {
        let c = code13();
        let out = greedy_flip_decode(&c.hz, &BinaryVector::zeros(c.hz.rows()), 1);
        assert_eq!(out, GreedyOutcome::Success(BinaryVector::zeros(13)));
    }

    #[test]
    fn greedy_corrects_single_errors() {
        let c = code13();
        for h in [&c.hz, &c.hx] {
            for q in 0..13 {
                let e = BinaryVector::from_indices(13, &[q]);
                let s = h.mul_vec(&e).unwrap();
                match greedy_flip_decode(h, &s, 1) {
                    GreedyOutcome::Success(corr) => assert_eq!(h.mul_vec(&corr).unwrap(), s),
                    other => panic!("qubit {q}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn greedy_reports_local_minimum() {
        // A 4-cycle check where any single flip keeps weight: syndrome on two
        // checks that share no bit, each bit in two checks.
        let h = BinaryMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 1], vec![1, 0, 0, 1]]);
        let s = BinaryVector::from_indices(4, &[0, 2]);
        match greedy_flip_decode(&h, &s, 1) {
            GreedyOutcome::Stuck { residual_weight, .. } => assert_eq!(residual_weight, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(greedy_flip_decode(&h, &s, 2), GreedyOutcome::Success(_)));
    }

    #[test]
    fn confinement_table_small_code() {
        let rows = confinement_probe(&code13(), 3, 1 << 20).unwrap();
        assert_eq!(rows[0].min_syndrome_weight, 0);
        assert!(rows[1].min_syndrome_weight >= 1);
        assert_eq!(rows[1].errors_checked, 26);
        // Weight 3 contains the logical operators.
        assert_eq!(rows[3].min_syndrome_weight, 0);
        assert!(rows[1].min_syndrome_weight <= rows[1].min_syndrome_weight.max(rows[0].min_syndrome_weight));
        assert!(confinement_probe(&code13(), 4, 10).is_err());
    }
}
