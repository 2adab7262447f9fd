//! The group `Z_p ⋊ Z_p^×` generated by `tau` and `gamma_a`, its action on the
//! truncated ring, and the operators `tau^c` and `delta = (tau^c - 1)/(tau - 1)`
//! on any carrier where `tau - 1` is nilpotent.

use std::fmt;

use num_bigint::BigInt;

use crate::coeffs::{binom_padic_row, binomial_precision, PadicScalar, PrimeContext};
use crate::error::{Error, Result};
use crate::series::{binom_pow_one_plus_y, SeriesContext, TruncatedSeries};

/// The element `tau^m gamma_a`; `a` is a p-adic unit (the value of the
/// cyclotomic character).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    m: PadicScalar,
    a: PadicScalar,
}

impl GroupElement {
    pub fn new(m: PadicScalar, a: PadicScalar) -> Result<Self> {
        if m.p() != a.p() {
            return Err(Error::ContextMismatch);
        }
        if !a.is_unit() {
            return Err(Error::NonUnit);
        }
        Ok(Self { m, a })
    }

    /// Convenience constructor from integers, both known to `precision` digits.
    pub fn from_integers(p: u64, m: i64, a: i64, precision: u32) -> Result<Self> {
        Self::new(PadicScalar::new(p, m, precision)?, PadicScalar::new(p, a, precision)?)
    }

    pub fn identity(p: u64, precision: u32) -> Result<Self> {
        Self::from_integers(p, 0, 1, precision)
    }

    pub fn tau(p: u64, precision: u32) -> Result<Self> {
        Self::from_integers(p, 1, 1, precision)
    }

    pub fn tau_power(c: PadicScalar) -> Result<Self> {
        let one = PadicScalar::new(c.p(), 1, c.precision())?;
        Self::new(c, one)
    }

    pub fn gamma(a: PadicScalar) -> Result<Self> {
        let zero = PadicScalar::new(a.p(), 0, a.precision())?;
        Self::new(zero, a)
    }

    pub fn m(&self) -> &PadicScalar {
        &self.m
    }

    pub fn a(&self) -> &PadicScalar {
        &self.a
    }

    pub fn precision(&self) -> u32 {
        self.m.precision().min(self.a.precision())
    }

    /// `(m1, a1)(m2, a2) = (m1 + a1 m2, a1 a2)`, from `gamma_a tau = tau^a gamma_a`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = &self.m + &(&self.a * &other.m);
        let a = &self.a * &other.a;
        Self { m, a }
    }

    pub fn inverse(&self) -> Self {
        let a_inv = self.a.inverse().expect("group elements have unit a");
        let m = -&(&a_inv * &self.m);
        Self { m, a: a_inv }
    }

    /// The ring endomorphism `X -> X (1+Y)^m`, `Y -> (1+Y)^a - 1`.
    pub fn act(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        let (gx, gy) = self.generator_images(f.sctx())?;
        f.substitute(&gx, &gy)
    }

    /// Images of `X` and `Y` under the action.
    pub fn generator_images(&self, sctx: SeriesContext) -> Result<(TruncatedSeries, TruncatedSeries)> {
        let wm = binom_pow_one_plus_y(sctx, &self.m)?;
        let wa = binom_pow_one_plus_y(sctx, &self.a)?;
        let gx = &TruncatedSeries::x(sctx) * &wm;
        let gy = &wa - &TruncatedSeries::one(sctx);
        Ok((gx, gy))
    }

    /// Digits needed on `m` and `a` to act on series of this context.
    pub fn required_precision(sctx: &SeriesContext) -> u32 {
        binomial_precision(&sctx.ctx(), sctx.my() as u64 - 1)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, a={})", self.m, self.a)
    }
}

/// A Z/p^N-module on which `tau - 1` can be iterated to zero.
pub trait Carrier: Clone {
    fn ctx(&self) -> PrimeContext;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, c: u64) -> Self;
}

impl Carrier for TruncatedSeries {
    fn ctx(&self) -> PrimeContext {
        TruncatedSeries::ctx(self)
    }
    fn is_zero(&self) -> bool {
        TruncatedSeries::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, c: u64) -> Self {
        TruncatedSeries::scale(self, c)
    }
}

/// Vectors of series, i.e. elements of a free module of finite rank over `R`.
impl Carrier for Vec<TruncatedSeries> {
    fn ctx(&self) -> PrimeContext {
        self[0].ctx()
    }
    fn is_zero(&self) -> bool {
        self.iter().all(|v| v.is_zero())
    }
    fn add(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn sub(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a - b).collect()
    }
    fn scale(&self, c: u64) -> Self {
        self.iter().map(|a| a.scale(c)).collect()
    }
}

/// `[v, (tau-1)v, (tau-1)^2 v, ...]` up to the last nonzero iterate.
fn nilpotent_iterates<C, F>(v: &C, tau: F, cap: usize) -> Result<Vec<C>>
where
    C: Carrier,
    F: Fn(&C) -> Result<C>,
{
    let mut out = Vec::new();
    let mut cur = v.clone();
    while !cur.is_zero() {
        if out.len() >= cap {
            return Err(Error::NonNilpotentTau { cap });
        }
        let next = tau(&cur)?.sub(&cur);
        out.push(cur);
        cur = next;
    }
    Ok(out)
}

fn binomial_sum<C: Carrier>(zero: &C, iterates: &[C], coeffs: &[u64]) -> C {
    iterates.iter().zip(coeffs).fold(zero.clone(), |acc, (t, &c)| acc.add(&t.scale(c)))
}

/// `tau^c v = sum_k C(c, k) (tau - 1)^k v`.
pub fn tau_power<C, F>(c: &PadicScalar, v: &C, tau: F, cap: usize) -> Result<C>
where
    C: Carrier,
    F: Fn(&C) -> Result<C>,
{
    let iterates = nilpotent_iterates(v, tau, cap)?;
    let coeffs = binom_padic_row(c, iterates.len(), &v.ctx())?;
    Ok(binomial_sum(&v.scale(0), &iterates, &coeffs))
}

/// `delta v = sum_k C(c, k + 1) (tau - 1)^k v`.
pub fn delta_op<C, F>(c: &PadicScalar, v: &C, tau: F, cap: usize) -> Result<C>
where
    C: Carrier,
    F: Fn(&C) -> Result<C>,
{
    let iterates = nilpotent_iterates(v, tau, cap)?;
    let coeffs = binom_padic_row(c, iterates.len() + 1, &v.ctx())?;
    Ok(binomial_sum(&v.scale(0), &iterates, &coeffs[1..]))
}

/// Iteration cap used for `tau - 1` on vectors of rank `rank` over the ring.
pub fn default_tau_cap(sctx: &SeriesContext, rank: usize) -> usize {
    sctx.my() * sctx.ctx().n() as usize * rank.max(1)
}

/// `tau` acting on a series.
pub fn tau_series(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let sctx = f.sctx();
    let gx = &TruncatedSeries::x(sctx) * &TruncatedSeries::w(sctx);
    f.substitute(&gx, &TruncatedSeries::y(sctx))
}

/// An integer p-adic scalar carrying enough digits to act on `sctx`, and to
/// serve as an exponent of `tau` on modules of rank up to 4.
pub fn scalar_for(sctx: &SeriesContext, value: impl Into<BigInt>) -> PadicScalar {
    let cap = default_tau_cap(sctx, 4) as u64;
    PadicScalar::new(sctx.p(), value, binomial_precision(&sctx.ctx(), cap))
        .expect("context prime is valid")
}
