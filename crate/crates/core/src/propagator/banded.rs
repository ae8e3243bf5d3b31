//! Square matrices with a few nonzero diagonals, multiplied against dense
//! column-major matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Banded {
    n: usize,
    offsets: Vec<isize>,
    /// `bands[k][i] = B[i, i + offsets[k]]`, zero where out of range.
    bands: Vec<Vec<C>>,
}

impl Banded {
    /// Keeps every diagonal that has an entry with modulus above `tol`.
    pub fn from_dense(m: &DMatrix<C>, tol: f64) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols());
        let mut offsets = Vec::new();
        let mut bands = Vec::new();
        for o in -(n as isize - 1)..(n as isize) {
            let mut band = vec![C::new(0.0, 0.0); n];
            let mut any = false;
            for (i, slot) in band.iter_mut().enumerate() {
                let j = i as isize + o;
                if j >= 0 && (j as usize) < n {
                    *slot = m[(i, j as usize)];
                    any |= slot.norm() > tol;
                }
            }
            if any {
                offsets.push(o);
                bands.push(band);
            }
        }
        Self { n, offsets, bands }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn offsets(&self) -> &[isize] {
        &self.offsets
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (o, band) in self.offsets.iter().zip(&self.bands) {
            for (i, v) in band.iter().enumerate() {
                let j = i as isize + o;
                if j >= 0 && (j as usize) < self.n {
                    m[(i, j as usize)] = *v;
                }
            }
        }
        m
    }

    /// `Σ_k w_k B_k` over matrices of equal size.
    pub fn combine(terms: &[(C, &Banded)]) -> Self {
        let n = terms[0].1.n;
        let mut offsets: Vec<isize> = terms.iter().flat_map(|(_, b)| b.offsets.iter().cloned()).collect();
        offsets.sort_unstable();
        offsets.dedup();
        let mut bands = vec![vec![C::new(0.0, 0.0); n]; offsets.len()];
        for (w, b) in terms {
            assert_eq!(b.n, n);
            for (o, band) in b.offsets.iter().zip(&b.bands) {
                let k = offsets.binary_search(o).unwrap();
                for (dst, src) in bands[k].iter_mut().zip(band) {
                    *dst += w * src;
                }
            }
        }
        Self { n, offsets, bands }
    }

    /// `out += s · B X`.
    pub fn left_acc(&self, x: &[C], out: &mut [C], s: C) {
        let n = self.n;
        for (o, band) in self.offsets.iter().zip(&self.bands) {
            let (lo, hi) = self.row_range(*o);
            if lo >= hi {
                continue;
            }
            let coef: Vec<C> = band[lo..hi].iter().map(|b| s * b).collect();
            for j in 0..n {
                let col = j * n;
                let src = &x[col + (lo as isize + o) as usize..col + (hi as isize + o) as usize];
                let dst = &mut out[col + lo..col + hi];
                for ((d, c), v) in dst.iter_mut().zip(&coef).zip(src) {
                    *d += c * v;
                }
            }
        }
    }

    /// `out += s · X B`.
    pub fn right_acc(&self, x: &[C], out: &mut [C], s: C) {
        let n = self.n;
        for (o, band) in self.offsets.iter().zip(&self.bands) {
            for j in 0..n {
                let k = j as isize - o;
                if k < 0 || k as usize >= n {
                    continue;
                }
                let k = k as usize;
                let c = s * band[k];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let (src, dst) = (k * n, j * n);
                for i in 0..n {
                    let v = x[src + i];
                    out[dst + i] += c * v;
                }
            }
        }
    }

    /// `out += s · [B, X]`.
    pub fn commutator_acc(&self, x: &[C], out: &mut [C], s: C) {
        self.left_acc(x, out, s);
        self.right_acc(x, out, -s);
    }

    /// `out += s · {B, X}`.
    pub fn anticommutator_acc(&self, x: &[C], out: &mut [C], s: C) {
        self.left_acc(x, out, s);
        self.right_acc(x, out, s);
    }

    /// `Tr(X B)` for column-major `X`.
    pub fn trace_product(&self, x: &[C]) -> C {
        let n = self.n;
        let mut acc = C::new(0.0, 0.0);
        for (o, band) in self.offsets.iter().zip(&self.bands) {
            let (lo, hi) = self.row_range(*o);
            for i in lo..hi {
                let j = (i as isize + o) as usize;
                // X[j, i] B[i, j]
                acc += x[i * n + j] * band[i];
            }
        }
        acc
    }

    fn row_range(&self, o: isize) -> (usize, usize) {
        let n = self.n as isize;
        ((-o).max(0) as usize, (n - o).min(n).max(0) as usize)
    }
}
