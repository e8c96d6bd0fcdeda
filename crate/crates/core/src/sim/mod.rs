//! Pauli-frame Monte Carlo sampler, single-fault injection and the noiseless
//! reference record.

mod tableau;

use std::io::{self, Read, Write};

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, Instruction};
use crate::gf2::{BinaryMatrix, BinaryVector};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid fault location: {0}")]
    InvalidLocation(String),
    #[error("detector {0} is not deterministic in the noiseless circuit")]
    NondeterministicDetector(usize),
    #[error("observable {0} is not deterministic in the noiseless circuit")]
    NondeterministicObservable(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Depol1,
    Depol2,
    FlipMeas,
}

impl SiteKind {
    /// Number of non-identity Pauli choices at a site of this kind.
    pub fn n_paulis(self) -> u8 {
        match self {
            SiteKind::Depol1 => 3,
            SiteKind::Depol2 => 15,
            SiteKind::FlipMeas => 1,
        }
    }
}

/// One noise site: a target (qubit, pair or measured qubit) of a noise
/// annotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaultSite {
    pub instruction: usize,
    pub target: usize,
    pub kind: SiteKind,
    pub p: f64,
}

/// A specific Pauli at a site. Encoding: bit 0 = X and bit 1 = Z on the
/// first qubit, bits 2 and 3 likewise on the second; a flip is `1`.
/// Zero is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaultLocation {
    pub instruction: usize,
    pub target: usize,
    pub pauli: u8,
}

/// Every noise site of a circuit in instruction order.
pub fn fault_sites(c: &Circuit) -> Vec<FaultSite> {
    let ins = c.instructions();
    let mut out = Vec::new();
    for (k, i) in ins.iter().enumerate() {
        match i {
            Instruction::Depol1(p, t) => {
                out.extend((0..t.len()).map(|target| FaultSite { instruction: k, target, kind: SiteKind::Depol1, p: *p }))
            }
            Instruction::Depol2(p, t) => out.extend(
                (0..t.len() / 2).map(|target| FaultSite { instruction: k, target, kind: SiteKind::Depol2, p: *p }),
            ),
            Instruction::FlipMeas(p) => {
                let n = ins[k + 1..].iter().find(|j| j.is_measurement()).map_or(0, |j| j.targets().len());
                out.extend((0..n).map(|target| FaultSite { instruction: k, target, kind: SiteKind::FlipMeas, p: *p }))
            }
            _ => {}
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotBatch {
    pub shots: usize,
    pub seed: u64,
    /// shots × detectors.
    pub detectors: BinaryMatrix,
    /// shots × observables.
    pub observables: BinaryMatrix,
}

impl ShotBatch {
    pub fn syndrome(&self, shot: usize) -> BinaryVector {
        self.detectors.row_vector(shot)
    }

    pub fn observable_flips(&self, shot: usize) -> BinaryVector {
        self.observables.row_vector(shot)
    }

    /// Detector and observable firing counts.
    pub fn detector_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.detectors.cols()];
        for s in 0..self.shots {
            for d in crate::gf2::iter_ones(self.detectors.row(s)) {
                c[d] += 1;
            }
        }
        c
    }

    /// Packed rows, bit `i` of each row in byte `i / 8` at position `i % 8`.
    pub fn write_b8<W: Write>(&self, m: &BinaryMatrix, mut w: W) -> io::Result<()> {
        let nbytes = m.cols().div_ceil(8);
        for s in 0..m.rows() {
            let row = m.row(s);
            let bytes: Vec<u8> = (0..nbytes).map(|b| (row[b / 8] >> (8 * (b % 8))) as u8).collect();
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    /// One line of `0`/`1` characters per shot.
    pub fn write_01<W: Write>(&self, m: &BinaryMatrix, mut w: W) -> io::Result<()> {
        for s in 0..m.rows() {
            let line: String = (0..m.cols()).map(|c| if m.get(s, c) { '1' } else { '0' }).collect();
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Inverse of [`ShotBatch::write_b8`] for rows of `cols` bits.
pub fn read_b8<R: Read>(mut r: R, cols: usize) -> io::Result<BinaryMatrix> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let nbytes = cols.div_ceil(8);
    if nbytes == 0 || buf.len() % nbytes != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("{} bytes is not a whole number of {cols}-bit rows", buf.len())));
    }
    let rows: Vec<BinaryVector> = buf
        .chunks(nbytes)
        .map(|chunk| {
            let ones: Vec<usize> = (0..cols).filter(|&i| chunk[i / 8] >> (i % 8) & 1 == 1).collect();
            BinaryVector::from_indices(cols, &ones)
        })
        .collect();
    Ok(BinaryMatrix::from_rows(cols, &rows))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn stream(seed: u64, block: u64, site: u64) -> SmallRng {
    SmallRng::seed_from_u64(splitmix(splitmix(splitmix(seed) ^ block) ^ site.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

/// Calls `hit` for each position in `0..nbits` independently with
/// probability `p`, skipping geometrically.
fn bernoulli_hits(rng: &mut SmallRng, p: f64, nbits: usize, mut hit: impl FnMut(usize, &mut SmallRng)) {
    if p <= 0.0 || nbits == 0 {
        return;
    }
    if p >= 0.5 {
        for i in 0..nbits {
            if rng.gen::<f64>() < p {
                hit(i, rng);
            }
        }
        return;
    }
    let denom = (1.0 - p).ln();
    let mut pos = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / denom).floor();
        if gap >= (nbits - pos) as f64 {
            return;
        }
        pos += gap as usize;
        hit(pos, rng);
        pos += 1;
        if pos >= nbits {
            return;
        }
    }
}

#[derive(Clone, Copy)]
struct Mode {
    seed: u64,
    block: u64,
    noise: bool,
    gauge: bool,
    inject: Option<FaultLocation>,
}

/// Propagate 64 frames through the circuit and return the flip record,
/// one word per measurement.
fn run_block(c: &Circuit, mode: Mode) -> Vec<u64> {
    let n = c.n_qubits();
    let mut x = vec![0u64; n];
    let mut z = vec![0u64; n];
    let mut rec: Vec<u64> = Vec::with_capacity(c.num_measurements());
    let mut pending: Option<(usize, f64)> = None;
    let inj = mode.inject;
    let inj_at = |k: usize| inj.filter(|f| f.instruction == k);
    for (k, ins) in c.instructions().iter().enumerate() {
        let mut rng = || stream(mode.seed, mode.block, k as u64);
        match ins {
            Instruction::ResetZ(t) | Instruction::ResetX(t) => {
                let mut g = mode.gauge.then(&mut rng);
                for &q in t {
                    let r = g.as_mut().map_or(0, |g| g.gen::<u64>());
                    if matches!(ins, Instruction::ResetZ(_)) {
                        x[q] = 0;
                        z[q] = r;
                    } else {
                        z[q] = 0;
                        x[q] = r;
                    }
                }
            }
            Instruction::H(t) => {
                for &q in t {
                    std::mem::swap(&mut x[q], &mut z[q]);
                }
            }
            Instruction::Cnot(t) => {
                for p in t.chunks_exact(2) {
                    x[p[1]] ^= x[p[0]];
                    z[p[0]] ^= z[p[1]];
                }
            }
            Instruction::Cz(t) => {
                for p in t.chunks_exact(2) {
                    z[p[0]] ^= x[p[1]];
                    z[p[1]] ^= x[p[0]];
                }
            }
            Instruction::MeasureZ(t) | Instruction::MeasureX(t) => {
                let is_z = matches!(ins, Instruction::MeasureZ(_));
                let mut flips = vec![0u64; t.len()];
                if let Some((fk, p)) = pending.take() {
                    if mode.noise {
                        let mut r = stream(mode.seed, mode.block, fk as u64);
                        bernoulli_hits(&mut r, p, 64 * t.len(), |pos, _| flips[pos / 64] ^= 1 << (pos % 64));
                    }
                    if let Some(f) = inj_at(fk) {
                        if f.pauli & 1 == 1 {
                            flips[f.target] ^= 1;
                        }
                    }
                }
                let mut g = mode.gauge.then(&mut rng);
                for (i, &q) in t.iter().enumerate() {
                    let r = g.as_mut().map_or(0, |g| g.gen::<u64>());
                    if is_z {
                        rec.push(x[q] ^ flips[i]);
                        z[q] = r;
                    } else {
                        rec.push(z[q] ^ flips[i]);
                        x[q] = r;
                    }
                }
            }
            Instruction::FlipMeas(p) => pending = Some((k, *p)),
            Instruction::Depol1(p, t) => {
                if mode.noise {
                    let mut r = rng();
                    bernoulli_hits(&mut r, *p, 64 * t.len(), |pos, r| {
                        let q = t[pos / 64];
                        let bit = 1u64 << (pos % 64);
                        let pauli: u8 = r.gen_range(1..=3);
                        if pauli & 1 == 1 {
                            x[q] ^= bit;
                        }
                        if pauli & 2 == 2 {
                            z[q] ^= bit;
                        }
                    });
                }
                if let Some(f) = inj_at(k) {
                    let q = t[f.target];
                    x[q] ^= (f.pauli & 1) as u64;
                    z[q] ^= (f.pauli >> 1 & 1) as u64;
                }
            }
            Instruction::Depol2(p, t) => {
                let apply = |x: &mut [u64], z: &mut [u64], pair: usize, pauli: u8, bit: u64| {
                    let (a, b) = (t[2 * pair], t[2 * pair + 1]);
                    if pauli & 1 != 0 {
                        x[a] ^= bit;
                    }
                    if pauli & 2 != 0 {
                        z[a] ^= bit;
                    }
                    if pauli & 4 != 0 {
                        x[b] ^= bit;
                    }
                    if pauli & 8 != 0 {
                        z[b] ^= bit;
                    }
                };
                if mode.noise {
                    let mut r = rng();
                    bernoulli_hits(&mut r, *p, 64 * (t.len() / 2), |pos, r| {
                        let pauli: u8 = r.gen_range(1..=15);
                        apply(&mut x, &mut z, pos / 64, pauli, 1 << (pos % 64));
                    });
                }
                if let Some(f) = inj_at(k) {
                    apply(&mut x, &mut z, f.target, f.pauli, 1);
                }
            }
            Instruction::Tick | Instruction::Round(_) | Instruction::Detector { .. } | Instruction::Observable { .. } => {}
        }
    }
    rec
}

fn parity_words(rec: &[u64], refs: &[usize]) -> u64 {
    refs.iter().fold(0, |acc, &r| acc ^ rec[r])
}

/// Sample `shots` noisy shots; detector and observable bits are deviations
/// from their noiseless values. Reproducible for fixed `(c, shots, seed)`
/// regardless of thread count.
pub fn sample(c: &Circuit, shots: usize, seed: u64) -> ShotBatch {
    let ann = c.annotations();
    let nd = ann.detectors.len();
    let no = c.num_observables();
    let mut detectors = BinaryMatrix::zeros(shots, nd);
    let mut observables = BinaryMatrix::zeros(shots, no);
    let blocks = shots.div_ceil(64);
    const CHUNK: usize = 256;
    for start in (0..blocks).step_by(CHUNK) {
        let end = (start + CHUNK).min(blocks);
        let results: Vec<(Vec<u64>, Vec<u64>)> = (start..end)
            .into_par_iter()
            .map(|b| {
                let rec = run_block(c, Mode { seed, block: b as u64, noise: true, gauge: true, inject: None });
                let d = ann.detectors.iter().map(|r| parity_words(&rec, r)).collect();
                let o = ann.observables.iter().map(|r| parity_words(&rec, r)).collect();
                (d, o)
            })
            .collect();
        for (off, (d, o)) in results.into_iter().enumerate() {
            let base = (start + off) * 64;
            let valid = (shots - base).min(64);
            let mask = if valid == 64 { u64::MAX } else { (1u64 << valid) - 1 };
            for (j, w) in d.into_iter().enumerate() {
                for s in crate::gf2::iter_ones(&[w & mask]) {
                    detectors.set(base + s, j, true);
                }
            }
            for (j, w) in o.into_iter().enumerate() {
                for s in crate::gf2::iter_ones(&[w & mask]) {
                    observables.set(base + s, j, true);
                }
            }
        }
    }
    ShotBatch { shots, seed, detectors, observables }
}

fn check_location(c: &Circuit, f: &FaultLocation) -> Result<(), SimError> {
    let ins = c
        .instructions()
        .get(f.instruction)
        .ok_or_else(|| SimError::InvalidLocation(format!("instruction {} out of range", f.instruction)))?;
    let (sites, max) = match ins {
        Instruction::Depol1(_, t) => (t.len(), 3),
        Instruction::Depol2(_, t) => (t.len() / 2, 15),
        Instruction::FlipMeas(_) => (
            c.instructions()[f.instruction + 1..].iter().find(|j| j.is_measurement()).map_or(0, |j| j.targets().len()),
            1,
        ),
        _ => return Err(SimError::InvalidLocation(format!("instruction {} is not a noise site", f.instruction))),
    };
    if f.target >= sites || f.pauli > max {
        return Err(SimError::InvalidLocation(format!(
            "target {} / pauli {} invalid at instruction {}",
            f.target, f.pauli, f.instruction
        )));
    }
    Ok(())
}

/// Detector and observable signature of exactly one fault.
pub fn inject(c: &Circuit, fault: FaultLocation) -> Result<(BinaryVector, BinaryVector), SimError> {
    check_location(c, &fault)?;
    let rec = run_block(c, Mode { seed: 0, block: 0, noise: false, gauge: false, inject: Some(fault) });
    let ann = c.annotations();
    let bit = |refs: &Vec<usize>| parity_words(&rec, refs) & 1 == 1;
    let d: Vec<usize> = ann.detectors.iter().enumerate().filter(|(_, r)| bit(r)).map(|(i, _)| i).collect();
    let o: Vec<usize> = ann.observables.iter().enumerate().filter(|(_, r)| bit(r)).map(|(i, _)| i).collect();
    Ok((BinaryVector::from_indices(ann.detectors.len(), &d), BinaryVector::from_indices(c.num_observables(), &o)))
}

/// Noiseless measurement record from a stabilizer tableau. Random outcomes
/// are resolved to 0. Fails if any detector or observable depends on a
/// random outcome, checked with 256 gauge-randomized noiseless frames.
pub fn reference_run(c: &Circuit) -> Result<BinaryVector, SimError> {
    let ann = c.annotations();
    for b in 0..4 {
        let rec = run_block(c, Mode { seed: 0x5eed, block: b, noise: false, gauge: true, inject: None });
        if let Some(d) = ann.detectors.iter().position(|r| parity_words(&rec, r) != 0) {
            return Err(SimError::NondeterministicDetector(d));
        }
        if let Some(o) = ann.observables.iter().position(|r| parity_words(&rec, r) != 0) {
            return Err(SimError::NondeterministicObservable(o));
        }
    }
    let mut t = tableau::Tableau::new(c.n_qubits());
    let mut out = Vec::with_capacity(c.num_measurements());
    for ins in c.instructions() {
        match ins {
            Instruction::ResetZ(q) => q.iter().for_each(|&q| t.reset_z(q)),
            Instruction::ResetX(q) => q.iter().for_each(|&q| t.reset_x(q)),
            Instruction::H(q) => q.iter().for_each(|&q| t.h(q)),
            Instruction::Cnot(q) => q.chunks_exact(2).for_each(|p| t.cnot(p[0], p[1])),
            Instruction::Cz(q) => q.chunks_exact(2).for_each(|p| t.cz(p[0], p[1])),
            Instruction::MeasureZ(q) => out.extend(q.iter().map(|&q| t.measure_z(q).0 as u8)),
            Instruction::MeasureX(q) => out.extend(q.iter().map(|&q| t.measure_x(q).0 as u8)),
            _ => {}
        }
    }
    Ok(BinaryVector::from_bits(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{add_noise, memory_experiment, MemoryBasis};
    use crate::codes::{hgp, repetition_code};

    fn rep_round() -> Circuit {
        // Data 0,1,2; ancillas 3,4 measure Z0Z1 and Z1Z2.
        Circuit::parse(
            "RZ 0 1 2 3 4\nDEPOL1(0.1) 0 1 2\nCNOT 0 3 1 4\nTICK\nCNOT 1 3 2 4\nTICK\nMZ 3 4\nDETECTOR(1) rec[-2]\nDETECTOR(1) rec[-1]\n",
        )
        .unwrap()
    }

    #[test]
    fn middle_x_fires_both_detectors() {
        let c = rep_round();
        let (d, o) = inject(&c, FaultLocation { instruction: 1, target: 1, pauli: 1 }).unwrap();
        assert_eq!(d.support(), vec![0, 1]);
        assert!(o.is_empty());
        let (d, _) = inject(&c, FaultLocation { instruction: 1, target: 0, pauli: 2 }).unwrap();
        assert!(d.is_zero());
        let (d, _) = inject(&c, FaultLocation { instruction: 1, target: 2, pauli: 0 }).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn invalid_locations() {
        let c = rep_round();
        assert!(inject(&c, FaultLocation { instruction: 0, target: 0, pauli: 1 }).is_err());
        assert!(inject(&c, FaultLocation { instruction: 1, target: 3, pauli: 1 }).is_err());
        assert!(inject(&c, FaultLocation { instruction: 1, target: 0, pauli: 4 }).is_err());
        assert!(inject(&c, FaultLocation { instruction: 99, target: 0, pauli: 1 }).is_err());
    }

    #[test]
    fn noiseless_memory_is_silent_and_deterministic() {
        let code = hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap();
        for mb in [MemoryBasis::Z, MemoryBasis::X] {
            let c = memory_experiment(&code, 3, mb).unwrap();
            let b = sample(&c, 100, 1);
            assert!(b.detectors.is_zero() && b.observables.is_zero());
            let r1 = reference_run(&c).unwrap();
            assert_eq!(r1, reference_run(&c).unwrap());
            let ann = c.annotations();
            for d in &ann.detectors {
                assert!(!d.iter().fold(false, |a, &i| a ^ r1.get(i)));
            }
        }
    }

    #[test]
    fn nondeterministic_detector_rejected() {
        let c = Circuit::parse("RX 0\nMZ 0\nDETECTOR rec[-1]\n").unwrap();
        assert!(matches!(reference_run(&c), Err(SimError::NondeterministicDetector(0))));
        assert!(!sample(&c, 64, 0).detectors.is_zero());
    }

    #[test]
    fn sampling_reproducible() {
        let code = hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap();
        let c = add_noise(&memory_experiment(&code, 2, MemoryBasis::Z).unwrap(), 0.01, 0.0).unwrap();
        let a = sample(&c, 300, 9);
        assert_eq!(a, sample(&c, 300, 9));
        assert_ne!(a.detectors, sample(&c, 300, 10).detectors);
        assert_eq!(a.detectors.rows(), 300);
    }

    #[test]
    fn fault_sites_enumerated() {
        let c = add_noise(&rep_round(), 0.01, 0.0).unwrap();
        let s = fault_sites(&c);
        let count = |k| s.iter().filter(|f| f.kind == k).count();
        assert_eq!(count(SiteKind::Depol1), 3);
        assert_eq!(count(SiteKind::Depol2), 4);
        assert_eq!(count(SiteKind::FlipMeas), 2);
    }

    #[test]
    fn bernoulli_rate() {
        let mut r = stream(1, 2, 3);
        let mut hits = 0;
        bernoulli_hits(&mut r, 0.01, 1_000_000, |_, _| hits += 1);
        assert!((hits as f64 - 10_000.0).abs() < 5.0 * 99.5f64);
    }

    #[test]
    fn b8_layout() {
        let mut m = BinaryMatrix::zeros(1, 10);
        m.set(0, 0, true);
        m.set(0, 9, true);
        let b = ShotBatch { shots: 1, seed: 0, detectors: m.clone(), observables: BinaryMatrix::zeros(1, 0) };
        let mut out = Vec::new();
        b.write_b8(&m, &mut out).unwrap();
        assert_eq!(out, vec![0b1, 0b10]);
    }

    #[test]
    fn b8_round_trip() {
        let c = add_noise(&memory_experiment(&hgp(&repetition_code(3).unwrap(), &repetition_code(3).unwrap()).unwrap(), 2, MemoryBasis::Z).unwrap(), 0.02, 0.0).unwrap();
        let b = sample(&c, 37, 4);
        let mut bytes = Vec::new();
        b.write_b8(&b.detectors, &mut bytes).unwrap();
        assert_eq!(read_b8(&bytes[..], b.detectors.cols()).unwrap(), b.detectors);
        assert!(read_b8(&bytes[..bytes.len() - 1], b.detectors.cols()).is_err());
    }
}
