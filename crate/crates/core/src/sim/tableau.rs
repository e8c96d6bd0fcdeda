//! CHP stabilizer tableau, used only for the noiseless reference record.

pub(crate) struct Tableau {
    n: usize,
    words: usize,
    /// Rows 0..n destabilizers, n..2n stabilizers, 2n scratch.
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for q in 0..n {
            t.x[q * words + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    pub fn h(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for i in 0..2 * self.n {
            let k = i * self.words + w;
            let (xb, zb) = (self.x[k] & m, self.z[k] & m);
            if xb != 0 && zb != 0 {
                self.r[i] ^= true;
            }
            self.x[k] = (self.x[k] & !m) | zb;
            self.z[k] = (self.z[k] & !m) | xb;
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        let words = self.words;
        for i in 0..2 * self.n {
            let xa = Self::bit(&self.x, i, words, a);
            let zb = Self::bit(&self.z, i, words, b);
            let xb = Self::bit(&self.x, i, words, b);
            let za = Self::bit(&self.z, i, words, a);
            if xa && zb && (xb == za) {
                self.r[i] ^= true;
            }
            if xa {
                self.x[i * words + b / 64] ^= 1 << (b % 64);
            }
            if zb {
                self.z[i * words + a / 64] ^= 1 << (a % 64);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    /// Left-multiply row `h` by row `i`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut sum: i64 = 2 * (self.r[h] as i64) + 2 * (self.r[i] as i64);
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let pos = (y & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let neg = (y & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            sum += pos.count_ones() as i64 - neg.count_ones() as i64;
            self.x[h * w + k] ^= x1;
            self.z[h * w + k] ^= z1;
        }
        self.r[h] = sum.rem_euclid(4) == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Z measurement. Random outcomes resolve to 0. Returns (outcome, random).
    pub fn measure_z(&mut self, q: usize) -> (bool, bool) {
        let n = self.n;
        let w = self.words;
        if let Some(p) = (n..2 * n).find(|&p| Self::bit(&self.x, p, w, q)) {
            for i in 0..2 * n {
                if i != p && Self::bit(&self.x, i, w, q) {
                    self.rowsum(i, p);
                }
            }
            self.copy_row(p - n, p);
            self.x[p * w..(p + 1) * w].fill(0);
            self.z[p * w..(p + 1) * w].fill(0);
            self.z[p * w + q / 64] |= 1 << (q % 64);
            self.r[p] = false;
            (false, true)
        } else {
            let s = 2 * n;
            self.x[s * w..(s + 1) * w].fill(0);
            self.z[s * w..(s + 1) * w].fill(0);
            self.r[s] = false;
            for i in 0..n {
                if Self::bit(&self.x, i, w, q) {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }

    pub fn measure_x(&mut self, q: usize) -> (bool, bool) {
        self.h(q);
        let out = self.measure_z(q);
        self.h(q);
        out
    }

    pub fn reset_z(&mut self, q: usize) {
        let (m, _) = self.measure_z(q);
        if m {
            self.x_flip(q);
        }
    }

    pub fn reset_x(&mut self, q: usize) {
        self.h(q);
        self.reset_z(q);
        self.h(q);
    }

    /// Apply Pauli X to qubit `q`: flips signs of rows with Z on `q`.
    fn x_flip(&mut self, q: usize) {
        for i in 0..2 * self.n {
            if Self::bit(&self.z, i, self.words, q) {
                self.r[i] ^= true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        let (a, ra) = t.measure_z(0);
        let (b, rb) = t.measure_z(1);
        assert!(ra && !rb);
        assert_eq!(a, b);
    }

    #[test]
    fn x_then_measure_is_one() {
        let mut t = Tableau::new(1);
        t.x_flip(0);
        assert_eq!(t.measure_z(0), (true, false));
        t.reset_z(0);
        assert_eq!(t.measure_z(0), (false, false));
    }

    #[test]
    fn plus_state_measures_deterministically_in_x() {
        let mut t = Tableau::new(3);
        t.reset_x(1);
        assert_eq!(t.measure_x(1), (false, false));
        t.h(2);
        t.h(2);
        t.cnot(0, 2);
        assert_eq!(t.measure_z(2), (false, false));
    }

    #[test]
    fn sign_tracking_through_cz() {
        // |+>|1>, CZ, then X measurement of qubit 0 gives 1.
        let mut t = Tableau::new(2);
        t.h(0);
        t.x_flip(1);
        t.cz(0, 1);
        assert_eq!(t.measure_x(0), (true, false));
    }
}
