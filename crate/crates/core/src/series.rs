//! The truncated bivariate ring `R = (Z/p^N)[X, Y] / (X^Mx, Y^My)`.
//!
//! `X` plays the role of the Teichmüller lift of `u`, `Y` that of `eta = eps - 1`,
//! and `W = 1 + Y` that of `eps`. Elements are stored densely, row-major in `X`,
//! with every coefficient reduced; equality is therefore exact equality of
//! canonical representatives.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{binom_padic_row, ModInt, PadicScalar, PrimeContext};
use crate::error::{Error, Result};

/// Largest admissible truncation order in either variable.
pub const MAX_ORDER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesContext {
    ctx: PrimeContext,
    mx: usize,
    my: usize,
}

impl SeriesContext {
    pub fn new(ctx: PrimeContext, mx: usize, my: usize) -> Result<Self> {
        if mx == 0 || my == 0 || mx > MAX_ORDER || my > MAX_ORDER {
            return Err(Error::InvalidContext(format!(
                "truncation orders must lie in 1..={MAX_ORDER}, got Mx={mx}, My={my}"
            )));
        }
        Ok(Self { ctx, mx, my })
    }

    /// `p`, `N` and a common truncation order `M` for both variables.
    pub fn square(p: u64, n: u32, m: usize) -> Result<Self> {
        Self::new(PrimeContext::new(p, n)?, m, m)
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn mx(&self) -> usize {
        self.mx
    }

    pub fn my(&self) -> usize {
        self.my
    }

    /// Number of monomials `X^i Y^j` in the canonical basis.
    pub fn dim(&self) -> usize {
        self.mx * self.my
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.my + j
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    sctx: SeriesContext,
    coeffs: Vec<u64>,
}

// Univariate helpers on coefficient slices of a common length.
pub(crate) mod uni {
    use crate::coeffs::PrimeContext;

    pub fn mul(ctx: &PrimeContext, a: &[u64], b: &[u64]) -> Vec<u64> {
        let len = a.len();
        let mut acc = vec![0u128; len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b[..len - i].iter().enumerate() {
                acc[i + j] += x as u128 * y as u128;
            }
        }
        let m = ctx.modulus() as u128;
        acc.into_iter().map(|v| (v % m) as u64).collect()
    }

    pub fn add_scaled(ctx: &PrimeContext, acc: &mut [u64], c: u64, a: &[u64]) {
        if c == 0 {
            return;
        }
        for (s, &x) in acc.iter_mut().zip(a) {
            *s = ctx.add(*s, ctx.mul(c, x));
        }
    }

    pub fn is_zero(a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn one(len: usize) -> Vec<u64> {
        let mut v = vec![0; len];
        v[0] = 1;
        v
    }

    pub fn pow(ctx: &PrimeContext, a: &[u64], mut e: usize) -> Vec<u64> {
        let mut acc = one(a.len());
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(ctx, &acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = mul(ctx, &base, &base);
            }
        }
        acc
    }
}

/// Binomial coefficients `C(n, k) mod p^N` for `0 <= k <= n < size`.
pub(crate) fn binomial_table(ctx: &PrimeContext, size: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; size]; size];
    for n in 0..size {
        t[n][0] = 1 % ctx.modulus();
        for k in 1..=n {
            t[n][k] = ctx.add(t[n - 1][k - 1], t[n - 1][k]);
        }
    }
    t
}

impl TruncatedSeries {
    pub fn zero(sctx: SeriesContext) -> Self {
        Self { sctx, coeffs: vec![0; sctx.dim()] }
    }

    pub fn constant(sctx: SeriesContext, c: i128) -> Self {
        let mut s = Self::zero(sctx);
        s.coeffs[0] = sctx.ctx.reduce_i128(c);
        s
    }

    pub fn one(sctx: SeriesContext) -> Self {
        Self::constant(sctx, 1)
    }

    /// `c X^i Y^j`, or zero if the monomial is truncated away.
    pub fn monomial(sctx: SeriesContext, i: usize, j: usize, c: i128) -> Self {
        let mut s = Self::zero(sctx);
        if i < sctx.mx && j < sctx.my {
            s.coeffs[sctx.index(i, j)] = sctx.ctx.reduce_i128(c);
        }
        s
    }

    pub fn x(sctx: SeriesContext) -> Self {
        Self::monomial(sctx, 1, 0, 1)
    }

    pub fn y(sctx: SeriesContext) -> Self {
        Self::monomial(sctx, 0, 1, 1)
    }

    /// `W = 1 + Y`.
    pub fn w(sctx: SeriesContext) -> Self {
        &Self::one(sctx) + &Self::y(sctx)
    }

    /// Build from `(i, j, c)` triples; out-of-range monomials are truncated.
    pub fn from_terms(sctx: SeriesContext, terms: &[(usize, usize, i128)]) -> Self {
        let ctx = sctx.ctx;
        let mut s = Self::zero(sctx);
        for &(i, j, c) in terms {
            if i < sctx.mx && j < sctx.my {
                let k = sctx.index(i, j);
                s.coeffs[k] = ctx.add(s.coeffs[k], ctx.reduce_i128(c));
            }
        }
        s
    }

    /// Wrap a dense coefficient vector (row-major, `Mx * My` entries).
    pub fn from_coeffs(sctx: SeriesContext, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != sctx.dim() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                sctx.dim(),
                coeffs.len()
            )));
        }
        let m = sctx.ctx.modulus();
        Ok(Self { sctx, coeffs: coeffs.into_iter().map(|c| c % m).collect() })
    }

    /// A Y-only series from its coefficient list (length `My`).
    pub fn from_y_poly(sctx: SeriesContext, coeffs: &[u64]) -> Self {
        let mut s = Self::zero(sctx);
        let m = sctx.ctx.modulus();
        for (j, &c) in coeffs.iter().take(sctx.my).enumerate() {
            s.coeffs[j] = c % m;
        }
        s
    }

    /// Uniformly random coefficients on monomials with `i < max_i`, `j < max_j`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, sctx: SeriesContext, max_i: usize, max_j: usize) -> Self {
        let mut s = Self::zero(sctx);
        let m = sctx.ctx.modulus();
        for i in 0..max_i.min(sctx.mx) {
            for j in 0..max_j.min(sctx.my) {
                s.coeffs[sctx.index(i, j)] = rng.gen_range(0..m);
            }
        }
        s
    }

    pub fn sctx(&self) -> SeriesContext {
        self.sctx
    }

    pub fn ctx(&self) -> PrimeContext {
        self.sctx.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> u64 {
        if i < self.sctx.mx && j < self.sctx.my {
            self.coeffs[self.sctx.index(i, j)]
        } else {
            0
        }
    }

    pub fn coeff_mod(&self, i: usize, j: usize) -> ModInt {
        ModInt::from_residue(self.sctx.ctx, self.coeff(i, j))
    }

    pub fn constant_term(&self) -> u64 {
        self.coeffs[0]
    }

    /// Nonzero coefficients as `(i, j, c)` in row-major order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let my = self.sctx.my;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(k, &c)| (k / my, k % my, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `(1 + max i, 1 + max j)` over the support; `(0, 0)` for zero.
    pub fn support_bounds(&self) -> (usize, usize) {
        self.terms().fold((0, 0), |(a, b), (i, j, _)| (a.max(i + 1), b.max(j + 1)))
    }

    /// Zero every coefficient outside `i < wx, j < wy`.
    pub fn project(&self, wx: usize, wy: usize) -> Self {
        let mut s = self.clone();
        for i in 0..self.sctx.mx {
            for j in 0..self.sctx.my {
                if i >= wx || j >= wy {
                    s.coeffs[self.sctx.index(i, j)] = 0;
                }
            }
        }
        s
    }

    /// Equality in the quotient by `(X^wx, Y^wy)`.
    pub fn agrees_within(&self, other: &Self, wx: usize, wy: usize) -> bool {
        self.sctx == other.sctx && self.project(wx, wy) == other.project(wx, wy)
    }

    fn row(&self, i: usize) -> &[u64] {
        let my = self.sctx.my;
        &self.coeffs[i * my..(i + 1) * my]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.sctx == other.sctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// If the series is `X^e * u(Y)`, returns `e` and `u`. Zero is reported as `e = 0`.
    pub fn as_x_power_times_y_series(&self) -> Option<(usize, Vec<u64>)> {
        let mut found: Option<usize> = None;
        for i in 0..self.sctx.mx {
            if !uni::is_zero(self.row(i)) {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        let e = found.unwrap_or(0);
        Some((e, self.row(e).to_vec()))
    }

    pub fn is_y_only(&self) -> bool {
        matches!(self.as_x_power_times_y_series(), Some((0, _)))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let ctx = self.sctx.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ctx.add(a, b)).collect();
        Ok(Self { sctx: self.sctx, coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let ctx = self.sctx.ctx;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ctx.sub(a, b)).collect();
        Ok(Self { sctx: self.sctx, coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if let Some((e, u)) = other.as_x_power_times_y_series() {
            return Ok(self.mul_x_power_times(e, &u));
        }
        if let Some((e, u)) = self.as_x_power_times_y_series() {
            return Ok(other.mul_x_power_times(e, &u));
        }
        let SeriesContext { ctx, mx, my } = self.sctx;
        let mut acc = vec![0u128; self.sctx.dim()];
        for i in 0..mx {
            for j in 0..my {
                let a = self.coeffs[i * my + j] as u128;
                if a == 0 {
                    continue;
                }
                for k in 0..mx - i {
                    let row = &other.coeffs[k * my..k * my + my - j];
                    let base = (i + k) * my + j;
                    for (l, &b) in row.iter().enumerate() {
                        acc[base + l] += a * b as u128;
                    }
                }
            }
        }
        let m = ctx.modulus() as u128;
        Ok(Self { sctx: self.sctx, coeffs: acc.into_iter().map(|v| (v % m) as u64).collect() })
    }

    /// `self * X^e * u(Y)`, row by row.
    fn mul_x_power_times(&self, e: usize, u: &[u64]) -> Self {
        let SeriesContext { ctx, mx, my } = self.sctx;
        let mut out = Self::zero(self.sctx);
        for i in 0..mx.saturating_sub(e) {
            let row = self.row(i);
            if uni::is_zero(row) {
                continue;
            }
            let prod = uni::mul(&ctx, row, u);
            out.coeffs[(i + e) * my..(i + e + 1) * my].copy_from_slice(&prod);
        }
        out
    }

    pub fn scale(&self, c: u64) -> Self {
        let ctx = self.sctx.ctx;
        let c = c % ctx.modulus();
        Self { sctx: self.sctx, coeffs: self.coeffs.iter().map(|&a| ctx.mul(a, c)).collect() }
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut acc = Self::one(self.sctx);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// True when `self^e` vanishes in `R`.
    fn power_vanishes(&self, e: usize) -> bool {
        match self.as_x_power_times_y_series() {
            Some((k, _)) if k > 0 => k * e >= self.sctx.mx || self.pow(e).is_zero(),
            Some((_, u)) => uni::is_zero(&uni::pow(&self.sctx.ctx, &u, e)),
            None => self.pow(e).is_zero(),
        }
    }

    /// `f(gX, gY)` in `R`; rejects substitutions that do not map the
    /// truncation ideal into itself.
    pub fn substitute(&self, gx: &Self, gy: &Self) -> Result<Self> {
        self.check_same(gx)?;
        self.check_same(gy)?;
        if !gx.power_vanishes(self.sctx.mx) || !gy.power_vanishes(self.sctx.my) {
            return Err(Error::IdealNotPreserved);
        }
        self.substitute_representative(gx, gy)
    }

    /// Substitutes into the canonical representative without checking that the
    /// result is independent of the representative.
    pub fn substitute_representative(&self, gx: &Self, gy: &Self) -> Result<Self> {
        self.check_same(gx)?;
        self.check_same(gy)?;
        let SeriesContext { ctx, mx, my } = self.sctx;
        let (rows, cols) = self.support_bounds();
        if rows == 0 {
            return Ok(Self::zero(self.sctx));
        }
        match gy.as_x_power_times_y_series() {
            Some((0, v)) => {
                // F_i(gY) for every row i, univariately
                let mut ypow = vec![uni::one(my)];
                for j in 1..cols {
                    let next = uni::mul(&ctx, &ypow[j - 1], &v);
                    ypow.push(next);
                }
                let inner: Vec<Vec<u64>> = (0..rows)
                    .map(|i| {
                        let mut acc = vec![0u64; my];
                        for (j, &c) in self.row(i)[..cols].iter().enumerate() {
                            uni::add_scaled(&ctx, &mut acc, c, &ypow[j]);
                        }
                        acc
                    })
                    .collect();
                if let Some((e, u)) = gx.as_x_power_times_y_series() {
                    let mut out = Self::zero(self.sctx);
                    let mut upow = uni::one(my);
                    for (i, fi) in inner.iter().enumerate() {
                        let row = e * i;
                        if row >= mx {
                            break;
                        }
                        if !uni::is_zero(fi) {
                            let term = uni::mul(&ctx, &upow, fi);
                            let dst = &mut out.coeffs[row * my..(row + 1) * my];
                            for (d, t) in dst.iter_mut().zip(term) {
                                *d = ctx.add(*d, t);
                            }
                        }
                        upow = uni::mul(&ctx, &upow, &u);
                    }
                    Ok(out)
                } else {
                    let mut out = Self::zero(self.sctx);
                    let mut gxpow = Self::one(self.sctx);
                    for fi in &inner {
                        if !uni::is_zero(fi) {
                            out = &out + &gxpow.mul_x_power_times(0, fi);
                        }
                        gxpow = &gxpow * gx;
                    }
                    Ok(out)
                }
            }
            _ => {
                let mut ypow = vec![Self::one(self.sctx)];
                for j in 1..cols {
                    let next = &ypow[j - 1] * gy;
                    ypow.push(next);
                }
                let mut out = Self::zero(self.sctx);
                let mut gxpow = Self::one(self.sctx);
                for i in 0..rows {
                    let mut fi = Self::zero(self.sctx);
                    for (j, &c) in self.row(i)[..cols].iter().enumerate() {
                        if c != 0 {
                            fi = &fi + &ypow[j].scale(c);
                        }
                    }
                    if !fi.is_zero() {
                        out = &out + &(&gxpow * &fi);
                    }
                    gxpow = &gxpow * gx;
                }
                Ok(out)
            }
        }
    }

    /// Two-sided inverse of a series whose constant term is a unit mod `p`.
    pub fn unit_inverse(&self) -> Result<Self> {
        let ctx = self.sctx.ctx;
        let c0 = ctx.inv(self.constant_term())?;
        let one = Self::one(self.sctx);
        let two = Self::constant(self.sctx, 2);
        let mut g = Self::constant(self.sctx, c0 as i128);
        // Newton: the error 1 - f g squares at every step and starts in (X, Y).
        for _ in 0..64 {
            let fg = self * &g;
            if fg == one {
                return Ok(g);
            }
            g = &g * &(&two - &fg);
        }
        unreachable!("Newton iteration for a unit must converge")
    }

    /// Rewrite in the basis `X^i W^b`, `W = 1 + Y`.
    pub fn to_w_coordinates(&self) -> WCoordinates {
        let SeriesContext { ctx, mx, my } = self.sctx;
        let binom = binomial_table(&ctx, my);
        let mut out = vec![0u64; self.sctx.dim()];
        for i in 0..mx {
            let row = self.row(i);
            if uni::is_zero(row) {
                continue;
            }
            // Y^j = sum_b C(j, b) (-1)^(j-b) W^b
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for b in 0..=j {
                    let t = ctx.mul(c, binom[j][b]);
                    let k = i * my + b;
                    out[k] = if (j - b) % 2 == 0 { ctx.add(out[k], t) } else { ctx.sub(out[k], t) };
                }
            }
        }
        WCoordinates { sctx: self.sctx, coeffs: out }
    }

    pub fn from_w_coordinates(w: &WCoordinates) -> Self {
        let SeriesContext { ctx, mx, my } = w.sctx;
        let binom = binomial_table(&ctx, my);
        let mut out = Self::zero(w.sctx);
        for i in 0..mx {
            for b in 0..my {
                let c = w.coeffs[i * my + b];
                if c == 0 {
                    continue;
                }
                // W^b = sum_j C(b, j) Y^j
                for j in 0..=b {
                    let k = i * my + j;
                    out.coeffs[k] = ctx.add(out.coeffs[k], ctx.mul(c, binom[b][j]));
                }
            }
        }
        out
    }

    pub fn parse(sctx: SeriesContext, text: &str) -> Result<Self> {
        Parser { sctx, src: text.as_bytes(), pos: 0 }.series()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            p: self.sctx.ctx.p(),
            n: self.sctx.ctx.n(),
            mx: self.sctx.mx,
            my: self.sctx.my,
            terms: self.terms().collect(),
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<Self> {
        let sctx = SeriesContext::new(PrimeContext::new(json.p, json.n)?, json.mx, json.my)?;
        let terms: Vec<(usize, usize, i128)> = json.terms.iter().map(|&(i, j, c)| (i, j, c as i128)).collect();
        Ok(Self::from_terms(sctx, &terms))
    }
}

/// `(1 + Y)^a = sum_{k < My} C(a, k) Y^k` for a p-adic exponent `a`.
pub fn binom_pow_one_plus_y(sctx: SeriesContext, a: &PadicScalar) -> Result<TruncatedSeries> {
    let row = binom_padic_row(a, sctx.my, &sctx.ctx)?;
    Ok(TruncatedSeries::from_y_poly(sctx, &row))
}

/// Coefficients of a series in the basis `X^i W^b` (`i < Mx`, `b < My`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WCoordinates {
    sctx: SeriesContext,
    coeffs: Vec<u64>,
}

impl WCoordinates {
    pub fn zero(sctx: SeriesContext) -> Self {
        Self { sctx, coeffs: vec![0; sctx.dim()] }
    }

    pub fn sctx(&self) -> SeriesContext {
        self.sctx
    }

    pub fn get(&self, i: usize, b: usize) -> u64 {
        self.coeffs[self.sctx.index(i, b)]
    }

    pub fn set(&mut self, i: usize, b: usize, c: u64) {
        let k = self.sctx.index(i, b);
        self.coeffs[k] = c % self.sctx.ctx.modulus();
    }

    /// Nonzero entries as `(i, b, c)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let my = self.sctx.my;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(k, &c)| (k / my, k % my, c))
    }
}

/// Structured series format: `{ "p", "N", "Mx", "My", "terms": [[i, j, c], ...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "Mx")]
    pub mx: usize,
    #[serde(rename = "My")]
    pub my: usize,
    pub terms: Vec<(usize, usize, u64)>,
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = self.sctx.ctx;
        let mut first = true;
        for (i, j, c) in self.terms() {
            let s = ctx.signed(c);
            let mag = s.unsigned_abs();
            if first {
                if s < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if s < 0 { '-' } else { '+' })?;
            }
            first = false;
            let mono = match (i, j) {
                (0, 0) => String::new(),
                (i, 0) => power("X", i),
                (0, j) => power("Y", j),
                (i, j) => format!("{}*{}", power("X", i), power("Y", j)),
            };
            match (mono.is_empty(), mag) {
                (true, _) => write!(f, "{mag}")?,
                (false, 1) => write!(f, "{mono}")?,
                (false, _) => write!(f, "{mag}*{mono}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn power(var: &str, e: usize) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

// series := ['-'] term (('+'|'-') term)*
// term   := coeff | coeff '*' mono | mono
// mono   := 'X'['^'int] ['*' 'Y'['^'int]] | 'Y'['^'int]
struct Parser<'a> {
    sctx: SeriesContext,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse { position: self.pos, message: message.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match digits.parse::<u128>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err("integer too large")
            }
        }
    }

    fn exponent(&mut self) -> Result<usize> {
        if self.eat(b'^') {
            let e = self.integer()?;
            Ok(e.min(usize::MAX as u128) as usize)
        } else {
            Ok(1)
        }
    }

    fn mono(&mut self) -> Result<(usize, usize)> {
        match self.peek() {
            Some(b'X') => {
                self.pos += 1;
                let i = self.exponent()?;
                let save = self.pos;
                if self.eat(b'*') {
                    if self.peek() == Some(b'Y') {
                        self.pos += 1;
                        let j = self.exponent()?;
                        return Ok((i, j));
                    }
                    self.pos = save;
                    return self.err("expected 'Y' after '*'");
                }
                Ok((i, 0))
            }
            Some(b'Y') => {
                self.pos += 1;
                Ok((0, self.exponent()?))
            }
            _ => self.err("expected 'X', 'Y' or a coefficient"),
        }
    }

    fn term(&mut self) -> Result<(u128, usize, usize)> {
        match self.peek() {
            Some(b) if b.is_ascii_digit() => {
                let c = self.integer()?;
                if self.eat(b'*') {
                    let (i, j) = self.mono()?;
                    Ok((c, i, j))
                } else {
                    Ok((c, 0, 0))
                }
            }
            _ => {
                let (i, j) = self.mono()?;
                Ok((1, i, j))
            }
        }
    }

    fn series(mut self) -> Result<TruncatedSeries> {
        let ctx = self.sctx.ctx;
        let m = ctx.modulus() as u128;
        let mut out = TruncatedSeries::zero(self.sctx);
        let mut negative = self.eat(b'-');
        loop {
            let (c, i, j) = self.term()?;
            let c = (c % m) as u64;
            let c = if negative { ctx.neg(c) } else { c };
            if i < self.sctx.mx && j < self.sctx.my {
                let k = self.sctx.index(i, j);
                out.coeffs[k] = ctx.add(out.coeffs[k], c);
            }
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                Some(_) => return self.err("expected '+', '-' or end of input"),
            }
            self.pos += 1;
        }
    }
}

macro_rules! series_binop {
    ($Op:ident, $op:ident, $try:ident) => {
        impl<'a> $Op<&'a TruncatedSeries> for &'a TruncatedSeries {
            type Output = TruncatedSeries;
            /// Panics on mismatched contexts; use the `try_` form to get an error instead.
            fn $op(self, rhs: &'a TruncatedSeries) -> TruncatedSeries {
                self.$try(rhs).expect("series context mismatch")
            }
        }
    };
}

series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        let ctx = self.sctx.ctx;
        TruncatedSeries { sctx: self.sctx, coeffs: self.coeffs.iter().map(|&a| ctx.neg(a)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sc(p: u64, n: u32, m: usize) -> SeriesContext {
        SeriesContext::square(p, n, m).unwrap()
    }

    fn parse(s: SeriesContext, t: &str) -> TruncatedSeries {
        TruncatedSeries::parse(s, t).unwrap()
    }

    #[test]
    fn ring_examples() {
        let s = sc(3, 1, 8);
        let x = TruncatedSeries::x(s);
        let y = TruncatedSeries::y(s);
        let f = parse(s, "1 + X*Y^2");
        assert_eq!(&f + &TruncatedSeries::zero(s), f);
        assert_eq!(&(&x + &y) * &(&x - &y), parse(s, "X^2 - Y^2"));
        assert!((&x.pow(7) * &x).is_zero());
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = TruncatedSeries::one(sc(3, 1, 8));
        let b = TruncatedSeries::one(sc(3, 1, 9));
        assert_eq!(a.try_add(&b), Err(Error::ContextMismatch));
        assert_eq!(a.try_mul(&b), Err(Error::ContextMismatch));
        assert_eq!(a.substitute(&b, &b), Err(Error::ContextMismatch));
    }

    #[test]
    fn substitution_examples() {
        let s = sc(3, 2, 8);
        let x = TruncatedSeries::x(s);
        let y = TruncatedSeries::y(s);
        let f = parse(s, "X^2*Y");
        assert_eq!(f.substitute(&x, &y).unwrap(), f);
        let tau_x = &x * &TruncatedSeries::w(s);
        assert_eq!(x.substitute(&tau_x, &y).unwrap(), parse(s, "X + X*Y"));
        let gy = parse(s, "2*Y + Y^2");
        let y2 = parse(s, "Y^2");
        assert_eq!(y2.substitute(&x, &gy).unwrap(), parse(s, "4*Y^2 + 4*Y^3 + Y^4"));
    }

    #[test]
    fn substitution_rejects_non_nilpotent_images() {
        let s = sc(3, 1, 6);
        let f = parse(s, "X + Y");
        let one_plus_x = parse(s, "1 + X");
        let y = TruncatedSeries::y(s);
        assert_eq!(f.substitute(&one_plus_x, &y), Err(Error::IdealNotPreserved));
        // X -> Y does not preserve (X^6, Y^6) when Mx > My
        let s2 = SeriesContext::new(PrimeContext::new(3, 1).unwrap(), 8, 4).unwrap();
        let g = parse(s2, "X");
        let y2 = TruncatedSeries::y(s2);
        assert_eq!(g.substitute(&y2, &y2).map(|_| ()), Ok(()));
        let s3 = SeriesContext::new(PrimeContext::new(3, 1).unwrap(), 4, 8).unwrap();
        let y3 = TruncatedSeries::y(s3);
        assert_eq!(parse(s3, "X").substitute(&y3, &y3), Err(Error::IdealNotPreserved));
    }

    #[test]
    fn fast_and_general_substitution_agree() {
        let s = sc(5, 2, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let f = TruncatedSeries::random(&mut rng, s, 10, 10);
            let u = TruncatedSeries::random(&mut rng, s, 1, 10);
            let gx = &TruncatedSeries::x(s) * &u;
            let gy = &TruncatedSeries::y(s) * &TruncatedSeries::random(&mut rng, s, 1, 10);
            let fast = f.substitute(&gx, &gy).unwrap();
            // force the general path by adding an X-dependent zero-valued detour
            let mut slow = TruncatedSeries::zero(s);
            let mut gxpow = TruncatedSeries::one(s);
            for i in 0..10 {
                let mut fi = TruncatedSeries::zero(s);
                let mut gypow = TruncatedSeries::one(s);
                for j in 0..10 {
                    fi = &fi + &gypow.scale(f.coeff(i, j));
                    gypow = &gypow * &gy;
                }
                slow = &slow + &(&gxpow * &fi);
                gxpow = &gxpow * &gx;
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn inverse_examples() {
        let s = sc(3, 2, 6);
        let one = TruncatedSeries::one(s);
        assert_eq!(one.unit_inverse().unwrap(), one);
        let w = TruncatedSeries::w(s);
        let expect = TruncatedSeries::from_terms(s, &(0..6).map(|j| (0, j, if j % 2 == 0 { 1 } else { -1 })).collect::<Vec<_>>());
        assert_eq!(w.unit_inverse().unwrap(), expect);
        let f = parse(s, "1 + X + Y");
        assert_eq!(&f.unit_inverse().unwrap() * &f, one);
        assert_eq!(parse(s, "3 + X").unit_inverse(), Err(Error::NonUnit));
    }

    #[test]
    fn binomial_series_examples() {
        let s = sc(3, 2, 6);
        let prec = crate::coeffs::binomial_precision(&s.ctx(), 5);
        let a1 = PadicScalar::new(3, 1, prec).unwrap();
        assert_eq!(binom_pow_one_plus_y(s, &a1).unwrap(), TruncatedSeries::w(s));
        let a3 = PadicScalar::new(3, 3, prec).unwrap();
        assert_eq!(binom_pow_one_plus_y(s, &a3).unwrap(), parse(s, "1 + 3*Y + 3*Y^2 + Y^3"));
        let am1 = PadicScalar::new(3, -1, prec).unwrap();
        assert_eq!(binom_pow_one_plus_y(s, &am1).unwrap(), TruncatedSeries::w(s).unit_inverse().unwrap());
        let low = PadicScalar::new(3, 1, 2).unwrap();
        assert!(matches!(binom_pow_one_plus_y(s, &low), Err(Error::InsufficientPrecision { .. })));
    }

    #[test]
    fn w_coordinate_examples() {
        let s = sc(3, 2, 6);
        let w = TruncatedSeries::y(s).to_w_coordinates();
        let mut expect = WCoordinates::zero(s);
        expect.set(0, 1, 1);
        expect.set(0, 0, 8);
        assert_eq!(w, expect);
        let w2 = parse(s, "Y^2").to_w_coordinates();
        let mut expect = WCoordinates::zero(s);
        expect.set(0, 2, 1);
        expect.set(0, 1, 7);
        expect.set(0, 0, 1);
        assert_eq!(w2, expect);
    }

    #[test]
    fn parse_examples() {
        let s = sc(3, 2, 8);
        let f = parse(s, "1 + 2*X^2*Y");
        assert_eq!(f.terms().collect::<Vec<_>>(), vec![(0, 0, 1), (2, 1, 2)]);
        assert!(parse(s, "X^9").is_zero());
        assert_eq!(parse(s, "-1").to_string(), "-1");
        assert_eq!(parse(s, "Y - 1").to_string(), "-1 + Y");
        assert_eq!(parse(s, "  X * Y^3 +4").to_string(), "4 + X*Y^3");
        assert!(matches!(TruncatedSeries::parse(s, "1 + "), Err(Error::Parse { position: 4, .. })));
        assert!(matches!(TruncatedSeries::parse(s, "Y*X"), Err(Error::Parse { .. })));
        assert!(matches!(TruncatedSeries::parse(s, "2 3"), Err(Error::Parse { position: 2, .. })));
    }

    #[test]
    fn json_round_trip() {
        let s = sc(5, 2, 7);
        let f = parse(s, "3 + 4*X^2*Y^5 - Y");
        let json = serde_json::to_string(&f.to_json()).unwrap();
        assert!(json.contains("\"Mx\":7"));
        let back: SeriesJson = serde_json::from_str(&json).unwrap();
        assert_eq!(TruncatedSeries::from_json(&back).unwrap(), f);
    }
}
