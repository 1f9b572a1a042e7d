//! Compressed sparse row storage and a banded LU with partial pivoting.

use crate::{Error, Result, C64};

/// Complex CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

/// Coordinate-list builder. Duplicate entries are summed in insertion order,
/// so identical insertion sequences yield bitwise identical matrices.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry present") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, C64::new(1.0, 0.0));
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(n, m);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != C64::new(0.0, 0.0) {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Entrywise `a·A + b·B` on matrices with (possibly different) patterns.
    pub fn linear_combination(&self, a: C64, other: &CsrMatrix, b: C64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (r, c, v) in self.iter() {
            t.push(r, c, a * v);
        }
        for (r, c, v) in other.iter() {
            t.push(r, c, b * v);
        }
        t.build()
    }

    pub fn conj(&self) -> CsrMatrix {
        CsrMatrix {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (r, c, v) in self.iter() {
            t.push(c, r, v);
        }
        t.build()
    }

    /// `max |A − Aᵀ|` over entries.
    pub fn asymmetry(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r)).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij − B_ij|` over the union of patterns.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        let d = self.linear_combination(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0));
        d.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max absolute row sum (∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Half bandwidths `(lower, upper)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (r, c, _) in self.iter() {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }

    pub fn to_dense(&self) -> faer::Mat<C64> {
        let mut m = faer::Mat::<C64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn dot_h(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear product `Σ a_i b_i`.
pub fn dot_u(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorisation of a band matrix with partial pivoting.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl` upper
/// diagonals hold fill created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<C64>,
    pivots: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factors `A`. Fails when a pivot is exactly zero.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            band: vec![C64::new(0.0, 0.0); n * width],
            pivots: vec![0; n],
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        for (r, c, v) in a.iter() {
            let idx = lu.at(r, c);
            lu.band[idx] = v;
        }
        let upper = ku + kl;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.band[lu.at(k, k)].norm();
            for i in k + 1..=last_row {
                let m = lu.band[lu.at(i, k)].norm();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            lu.pivots[k] = p;
            let last_col = (k + upper).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let ik = lu.at(k, j);
                    let ip = lu.at(p, j);
                    lu.band.swap(ik, ip);
                }
            }
            let pivot = lu.band[lu.at(k, k)];
            let pn = pivot.norm();
            lu.min_pivot = lu.min_pivot.min(pn);
            lu.max_pivot = lu.max_pivot.max(pn);
            if pn == 0.0 {
                return Err(Error::Numerical(format!("zero pivot at column {k}")));
            }
            let inv = pivot.inv();
            for i in k + 1..=last_row {
                let lik_idx = lu.at(i, k);
                let l = lu.band[lik_idx] * inv;
                lu.band[lik_idx] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let row_k = lu.at(k, k);
                let row_i = lu.at(i, k);
                for off in 1..=(last_col - k) {
                    let u = lu.band[row_k + off];
                    lu.band[row_i + off] -= l * u;
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `min |pivot| / max |pivot|`.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n, "solve dimension mismatch");
        // forward: apply P and unit L
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == C64::new(0.0, 0.0) {
                continue;
            }
            let last_row = (k + self.kl).min(n - 1);
            for (i, bi) in b.iter_mut().enumerate().take(last_row + 1).skip(k + 1) {
                *bi -= self.band[self.at(i, k)] * bk;
            }
        }
        // backward: U
        let upper = self.ku + self.kl;
        for k in (0..n).rev() {
            let last_col = (k + upper).min(n - 1);
            let base = self.at(k, k);
            let mut s = b[k];
            for off in 1..=(last_col - k) {
                s -= self.band[base + off] * b[k + off];
            }
            b[k] = s / self.band[base];
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn banded_random(n: usize, kl: usize, ku: usize, seed: u64) -> CsrMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                t.push(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        t.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(1, 0, c(1.0, 0.0));
        t.push(0, 1, c(2.0, 0.0));
        t.push(1, 0, c(0.5, 1.0));
        let m = t.build();
        assert_eq!(m.get(1, 0), c(1.5, 1.0));
        assert_eq!(m.get(0, 1), c(2.0, 0.0));
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn band_lu_requires_pivoting() {
        // zero leading entry forces a row swap
        let a = CsrMatrix::from_dense(&[
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(2.0, 0.0), c(1.0, 1.0), c(3.0, 0.0)],
            vec![c(0.0, 0.0), c(4.0, 0.0), c(1.0, -1.0)],
        ]);
        let lu = BandLu::factor(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)];
        let x = lu.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_dense(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(BandLu::factor(&a).is_err());
    }

    proptest! {
        #[test]
        fn band_lu_solves_random_systems(n in 1usize..40, kl in 0usize..5, ku in 0usize..5, seed in 0u64..1000) {
            let a = banded_random(n, kl, ku, seed);
            let lu = BandLu::factor(&a).unwrap();
            let b: Vec<C64> = (0..n).map(|i| c(i as f64 + 1.0, -(i as f64))).collect();
            let x = lu.solve(&b);
            let r = a.mul_vec(&x);
            let res: f64 = r.iter().zip(&b).map(|(r, b)| (r - b).norm()).fold(0.0, f64::max);
            let scale = a.norm_inf() * x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            prop_assert!(res <= 1e-10 * scale.max(1.0), "res {res} scale {scale}");
        }

        #[test]
        fn transpose_is_involution(n in 1usize..20, seed in 0u64..100) {
            let a = banded_random(n, 2, 3, seed);
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
