//! Banded storage and LU factorization with partial pivoting.
//!
//! Layout follows the LAPACK `gbtrf` convention: column-major with `2 kl + ku + 1`
//! rows per column, entry `(i, j)` at row `kl + ku + i - j`. The extra `kl` rows hold
//! fill-in from row interchanges.

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ld, data: vec![0.0; ld * n] }
    }

    pub fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                s += self.data[self.idx(i, j)] * xj;
            }
            *yi = s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `alpha * self + beta * I`.
    pub fn scaled_shift(&self, alpha: f64, beta: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= alpha;
        }
        for i in 0..self.n {
            m.add(i, i, beta);
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn factor(self) -> Result<BandLu, usize> {
        BandLu::new(self)
    }
}

/// `P A = L U` for a banded `A`. Multipliers of column `j` are stored below the
/// diagonal and are not permuted by later interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    /// Returns the failing column on a zero pivot.
    pub fn new(mut m: BandMatrix) -> Result<Self, usize> {
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let kv = kl + ku;
        let mut piv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = m.data[m.idx(j, j)].abs();
            for r in 1..=km {
                let v = m.data[m.idx(j + r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[j] = j + p;
            if best == 0.0 || !best.is_finite() {
                return Err(j);
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = m.idx(j, c);
                    let b = m.idx(j + p, c);
                    m.data.swap(a, b);
                }
            }
            let d = m.data[m.idx(j, j)];
            for r in 1..=km {
                let k = m.idx(j + r, j);
                m.data[k] /= d;
            }
            for c in (j + 1)..=ju {
                let u = m.data[m.idx(j, c)];
                if u == 0.0 {
                    continue;
                }
                for r in 1..=km {
                    let l = m.data[m.idx(j + r, j)];
                    let k = m.idx(j + r, c);
                    m.data[k] -= l * u;
                }
            }
            debug_assert!(ju <= j + kv);
        }
        Ok(BandLu { m, piv })
    }

    pub fn dim(&self) -> usize {
        self.m.n
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, kv) = (m.n, m.kl, m.kl + m.ku);
        for j in 0..n {
            let l = self.piv[j];
            if l != j {
                b.swap(j, l);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for r in 1..=km {
                    b[j + r] -= m.data[m.idx(j + r, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= m.data[m.idx(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= m.data[m.idx(i, j)] * bj;
            }
        }
    }
}
