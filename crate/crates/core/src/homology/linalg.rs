//! Dense matrices over `Z/p^N` and Smith normal form by valuation pivoting.
//!
//! `Z/p^N` is a chain ring: every element is a unit times a power of `p`, so
//! choosing the pivot of least valuation lets every other entry in its row and
//! column be cleared exactly.

use std::fmt;

use crate::coeffs::PrimeContext;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct ModMatrix {
    ctx: PrimeContext,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ModMatrix {}x{} mod {}", self.rows, self.cols, self.ctx.modulus())?;
        for r in 0..self.rows.min(12) {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl ModMatrix {
    pub fn zeros(ctx: PrimeContext, rows: usize, cols: usize) -> Self {
        Self { ctx, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: PrimeContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from column vectors, each of length `rows`.
    pub fn from_columns(ctx: PrimeContext, rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(ctx, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v % ctx.modulus();
            }
        }
        m
    }

    pub fn from_rows(ctx: PrimeContext, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(ctx, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i * cols + j] = ctx.reduce_i128(v as i128);
            }
        }
        m
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.ctx.modulus();
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_mul(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_mul(other)?;
        let m = self.ctx.modulus() as u128;
        let mut out = Self::zeros(self.ctx, self.rows, other.cols);
        let mut acc = vec![0u128; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (s, &b) in acc.iter_mut().zip(row) {
                    *s += a as u128 * b as u128;
                }
            }
            for (j, s) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (s % m) as u64;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let m = self.ctx.modulus() as u128;
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                (row.iter().zip(v).map(|(&a, &b)| a as u128 * b as u128).sum::<u128>() % m) as u64
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |ctx, a, b| ctx.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |ctx, a, b| ctx.sub(a, b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&PrimeContext, u64, u64) -> u64) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(&self.ctx, a, b)).collect();
        Ok(Self { ctx: self.ctx, rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: u64) -> Self {
        let data = self.data.iter().map(|&a| self.ctx.mul(a, c % self.ctx.modulus())).collect();
        Self { ctx: self.ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|&a| self.ctx.neg(a)).collect();
        Self { ctx: self.ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Stack matrices with a common column count on top of each other.
    pub fn vstack(parts: &[&ModMatrix]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Dimension("empty vstack".into()))?;
        let cols = first.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.cols != cols || m.ctx != first.ctx {
                return Err(Error::Dimension("vstack column mismatch".into()));
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Ok(Self { ctx: first.ctx, rows, cols, data })
    }

    /// Place matrices side by side.
    pub fn hstack(parts: &[&ModMatrix]) -> Result<Self> {
        let t: Vec<ModMatrix> = parts.iter().map(|m| m.transpose()).collect();
        let refs: Vec<&ModMatrix> = t.iter().collect();
        Ok(Self::vstack(&refs)?.transpose())
    }

    /// Block matrix from a grid of optional blocks; `None` is a zero block.
    pub fn block(
        ctx: PrimeContext,
        row_dims: &[usize],
        col_dims: &[usize],
        blocks: &[Vec<Option<&ModMatrix>>],
    ) -> Result<Self> {
        let rows: usize = row_dims.iter().sum();
        let cols: usize = col_dims.iter().sum();
        let mut out = Self::zeros(ctx, rows, cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    if b.rows != row_dims[bi] || b.cols != col_dims[bj] {
                        return Err(Error::Dimension(format!("block ({bi},{bj}) has wrong shape")));
                    }
                    for i in 0..b.rows {
                        let dst = (r0 + i) * cols + c0;
                        out.data[dst..dst + b.cols].copy_from_slice(&b.data[i * b.cols..(i + 1) * b.cols]);
                    }
                }
                c0 += col_dims[bj];
            }
            r0 += row_dims[bi];
        }
        Ok(out)
    }

    /// Keep only the listed rows, in order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(self.ctx, keep.len(), self.cols);
        for (k, &i) in keep.iter().enumerate() {
            out.data[k * self.cols..(k + 1) * self.cols].copy_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        out
    }

    /// Keep only the listed columns, in order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(self.ctx, self.rows, keep.len());
        for i in 0..self.rows {
            for (k, &j) in keep.iter().enumerate() {
                out.data[i * keep.len() + k] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn smith(&self) -> Smith {
        Smith::compute(self)
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::compute(self)
    }
}

/// `A V = U^{-1} D` with `D` diagonal; only the column transform is kept.
#[derive(Debug, Clone)]
pub struct Smith {
    /// Valuations `e_k < N` of the nonzero diagonal entries `p^{e_k}`.
    pub exponents: Vec<u32>,
    pub v: ModMatrix,
    pub v_inv: ModMatrix,
}

impl Smith {
    fn compute(a: &ModMatrix) -> Self {
        let ctx = a.ctx;
        let n = ctx.n();
        let (rows, cols) = (a.rows, a.cols);
        let mut w = a.clone();
        let mut v = ModMatrix::identity(ctx, cols);
        let mut v_inv = ModMatrix::identity(ctx, cols);
        let mut exponents = Vec::new();
        for k in 0..rows.min(cols) {
            // least-valuation pivot in the trailing block
            let mut best: Option<(u32, usize, usize)> = None;
            'search: for i in k..rows {
                for j in k..cols {
                    let x = w.data[i * cols + j];
                    if x == 0 {
                        continue;
                    }
                    let val = ctx.valuation(x);
                    if best.map_or(true, |(b, _, _)| val < b) {
                        best = Some((val, i, j));
                        if val == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let Some((e, pi, pj)) = best else { break };
            if e >= n {
                break;
            }
            swap_rows(&mut w, k, pi);
            swap_cols(&mut w, k, pj);
            swap_cols(&mut v, k, pj);
            swap_rows(&mut v_inv, k, pj);
            // normalize the pivot to p^e
            let pe = ctx.p_pow(e);
            let unit = w.data[k * cols + k] / pe;
            let uinv = ctx.inv(unit % ctx.modulus()).expect("cofactor of least valuation is a unit");
            for j in k..cols {
                let x = &mut w.data[k * cols + j];
                *x = ctx.mul(*x, uinv);
            }
            // clear the column below the pivot
            for i in k + 1..rows {
                let x = w.data[i * cols + k];
                if x == 0 {
                    continue;
                }
                let q = x / pe;
                for j in k..cols {
                    let t = ctx.mul(q, w.data[k * cols + j]);
                    let y = &mut w.data[i * cols + j];
                    *y = ctx.sub(*y, t);
                }
            }
            // clear the row to the right of the pivot
            for j in k + 1..cols {
                let x = w.data[k * cols + j];
                if x == 0 {
                    continue;
                }
                let q = x / pe;
                w.data[k * cols + j] = 0;
                for i in 0..cols {
                    let t = ctx.mul(q, v.data[i * cols + k]);
                    let y = &mut v.data[i * cols + j];
                    *y = ctx.sub(*y, t);
                }
                for c in 0..cols {
                    let t = ctx.mul(q, v_inv.data[j * cols + c]);
                    let y = &mut v_inv.data[k * cols + c];
                    *y = ctx.add(*y, t);
                }
            }
            exponents.push(e);
        }
        Smith { exponents, v, v_inv }
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }
}

fn swap_rows(m: &mut ModMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let c = m.cols;
    for j in 0..c {
        m.data.swap(a * c + j, b * c + j);
    }
}

fn swap_cols(m: &mut ModMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let c = m.cols;
    for i in 0..m.rows {
        m.data.swap(i * c + a, i * c + b);
    }
}

/// The kernel of a matrix as `⊕ Z/p^{e_k}`, with explicit generators.
#[derive(Debug, Clone)]
pub struct Kernel {
    /// Generators as columns of an `ambient x g` matrix.
    pub generators: ModMatrix,
    /// Orders: generator `k` spans a copy of `Z/p^{orders[k]}`.
    pub orders: Vec<u32>,
    /// For each generator, the index in `v_inv` and the `p`-power it was scaled by.
    coords: Vec<(usize, u32)>,
    v_inv: ModMatrix,
}

impl Kernel {
    fn compute(a: &ModMatrix) -> Self {
        let ctx = a.ctx;
        let n = ctx.n();
        let s = a.smith();
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        let mut coords = Vec::new();
        for k in 0..a.cols {
            let e = if k < s.rank() { s.exponents[k] } else { n };
            if e == 0 {
                continue;
            }
            let shift = n - e;
            let pw = ctx.p_pow(shift);
            gens.push(s.v.column(k).into_iter().map(|x| ctx.mul(x, pw)).collect::<Vec<_>>());
            orders.push(e);
            coords.push((k, shift));
        }
        Kernel { generators: ModMatrix::from_columns(ctx, a.cols, &gens), orders, coords, v_inv: s.v_inv }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Coordinates of a kernel vector with respect to the generators,
    /// entry `k` determined modulo `p^{orders[k]}`.
    pub fn coordinates(&self, x: &[u64]) -> Vec<u64> {
        let ctx = self.v_inv.ctx();
        let y = self.v_inv.apply(x);
        self.coords
            .iter()
            .zip(&self.orders)
            .map(|(&(k, shift), &e)| (y[k] / ctx.p().pow(shift)) % ctx.p().pow(e))
            .collect()
    }

    /// `F_p`-dimension of the socle, i.e. the number of cyclic summands.
    pub fn summands(&self) -> usize {
        self.orders.len()
    }
}

/// Exponents of `⊕ Z/p^{e}`-summands of `(⊕_k Z/p^{orders[k]}) / span(relations)`,
/// where relations are given by columns in generator coordinates.
pub fn quotient_invariants(ctx: PrimeContext, orders: &[u32], relations: &ModMatrix) -> Result<Vec<u32>> {
    let g = orders.len();
    if relations.rows() != g {
        return Err(Error::Dimension(format!("relations have {} rows, expected {g}", relations.rows())));
    }
    let mut torsion = ModMatrix::zeros(ctx, g, g);
    for (k, &e) in orders.iter().enumerate() {
        torsion.set(k, k, ctx.p_pow(e));
    }
    let full = ModMatrix::hstack(&[relations, &torsion])?;
    let s = full.smith();
    let n = ctx.n();
    let mut out: Vec<u32> = s.exponents.iter().filter(|&&e| e > 0).copied().collect();
    out.extend(std::iter::repeat(n).take(g - s.rank()));
    out.sort_unstable();
    Ok(out)
}
