//! Exact coefficient arithmetic: residues modulo `p^N`, p-adic scalars known
//! to a finite number of digits, arbitrary-precision rationals and the
//! valuation helpers built on top of them.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest admissible `p^N`; keeps every product of two residues inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// The prime `p` and the coefficient ring `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeContext {
    p: u64,
    n: u32,
    modulus: u64,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeContext {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidContext(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidContext("N must be at least 1".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m < MAX_MODULUS)
                .ok_or_else(|| Error::InvalidContext(format!("p^N = {p}^{n} is too large")))?;
        }
        Ok(Self { p, n, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.modulus as i128) as u64
    }

    pub fn reduce_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    /// Inverse of a residue that is a unit mod `p`.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if !self.is_unit(a) {
            return Err(Error::NonUnit);
        }
        let (g, x, _) = ext_gcd(a as i128, self.modulus as i128);
        debug_assert_eq!(g, 1);
        Ok(self.reduce_i128(x))
    }

    /// Valuation of a residue, capped at `N` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let a = a % self.modulus;
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// `p^e` as a residue (zero once `e >= N`).
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.n {
            0
        } else {
            self.p.pow(e)
        }
    }

    /// Symmetric representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.modulus / 2 {
            a as i64 - self.modulus as i64
        } else {
            a as i64
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// An element of `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    value: u64,
    ctx: PrimeContext,
}

impl ModInt {
    pub fn new(ctx: PrimeContext, value: i128) -> Self {
        Self { value: ctx.reduce_i128(value), ctx }
    }

    pub fn from_residue(ctx: PrimeContext, value: u64) -> Self {
        Self { value: value % ctx.modulus, ctx }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.is_unit(self.value)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { value: self.ctx.inv(self.value)?, ctx: self.ctx })
    }

    pub fn valuation(&self) -> u32 {
        self.ctx.valuation(self.value)
    }
}

impl Add for ModInt {
    type Output = ModInt;
    fn add(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.ctx, rhs.ctx, "ModInt context mismatch");
        ModInt { value: self.ctx.add(self.value, rhs.value), ctx: self.ctx }
    }
}

impl Sub for ModInt {
    type Output = ModInt;
    fn sub(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.ctx, rhs.ctx, "ModInt context mismatch");
        ModInt { value: self.ctx.sub(self.value, rhs.value), ctx: self.ctx }
    }
}

impl Mul for ModInt {
    type Output = ModInt;
    fn mul(self, rhs: ModInt) -> ModInt {
        assert_eq!(self.ctx, rhs.ctx, "ModInt context mismatch");
        ModInt { value: self.ctx.mul(self.value, rhs.value), ctx: self.ctx }
    }
}

impl Neg for ModInt {
    type Output = ModInt;
    fn neg(self) -> ModInt {
        ModInt { value: self.ctx.neg(self.value), ctx: self.ctx }
    }
}

impl fmt::Display for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An element of `Z_p` known modulo `p^precision`.
///
/// Arithmetic keeps the smaller precision of the two operands.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    value: BigInt,
    precision: u32,
}

impl PadicScalar {
    pub fn new(p: u64, value: impl Into<BigInt>, precision: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidContext(format!("p = {p} must be an odd prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidContext("p-adic precision must be at least 1".into()));
        }
        let modulus = BigInt::from(p).pow(precision);
        let value = value.into().mod_floor(&modulus);
        Ok(Self { p, value, precision })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Canonical representative in `[0, p^precision)`.
    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_unit(&self) -> bool {
        !(&self.value % self.p).is_zero()
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.p, self.value.clone(), precision.min(self.precision))
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        let modulus = BigInt::from(self.p).pow(self.precision);
        let e = self.value.extended_gcd(&modulus);
        Self::new(self.p, e.x, self.precision)
    }

    /// Reduction into `Z/p^N`; requires at least `N` known digits.
    pub fn residue(&self, ctx: &PrimeContext) -> Result<ModInt> {
        if ctx.p() != self.p {
            return Err(Error::ContextMismatch);
        }
        if self.precision < ctx.n() {
            return Err(Error::InsufficientPrecision { required: ctx.n(), available: self.precision });
        }
        Ok(ModInt::from_residue(*ctx, ctx.reduce_bigint(&self.value)))
    }

    fn combine(&self, rhs: &Self, value: BigInt) -> Self {
        assert_eq!(self.p, rhs.p, "PadicScalar prime mismatch");
        Self::new(self.p, value, self.precision.min(rhs.precision)).unwrap()
    }
}

impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.combine(rhs, &self.value + &rhs.value)
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.combine(rhs, &self.value - &rhs.value)
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.combine(rhs, &self.value * &rhs.value)
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::new(self.p, -&self.value, self.precision).unwrap()
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.value, self.p, self.precision)
    }
}

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Self {
        Self(BigRational::new(numerator.into(), denominator.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn pow(&self, e: i32) -> Self {
        Self(num_traits::Pow::pow(&self.0, e))
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

macro_rules! forward_rational_op {
    ($Op:ident, $op:ident) => {
        impl $Op for ExactRational {
            type Output = ExactRational;
            fn $op(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$op(rhs.0))
            }
        }
        impl<'a> $Op<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $op(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$op(&rhs.0))
            }
        }
    };
}

forward_rational_op!(Add, add);
forward_rational_op!(Sub, sub);
forward_rational_op!(Mul, mul);
forward_rational_op!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: &str| Error::Parse { position: 0, message: message.to_string() };
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
                let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
                if d.is_zero() {
                    return Err(bad("zero denominator"));
                }
                Ok(Self::new(n, d))
            }
            None => Ok(Self::from_integer(s.parse::<BigInt>().map_err(|_| bad("bad integer"))?)),
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> Result<i64> {
    if n.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp(q: &ExactRational, ctx: &PrimeContext) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(vp_int(q.numer(), ctx.p())? - vp_int(q.denom(), ctx.p())?)
}

/// `v_p(k!)` by Legendre's formula.
pub fn vp_factorial(k: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

/// Digits of `a` needed to pin down `C(a, k) mod p^N`.
pub fn binomial_precision(ctx: &PrimeContext, k: u64) -> u32 {
    ctx.n() + vp_factorial(k, ctx.p())
}

/// `C(a, k) mod p^N` for a p-adic integer `a`.
pub fn binom_padic(a: &PadicScalar, k: u64, ctx: &PrimeContext) -> Result<ModInt> {
    let row = binom_padic_row(a, k as usize + 1, ctx)?;
    Ok(ModInt::from_residue(*ctx, row[k as usize]))
}

/// `[C(a, 0), ..., C(a, count - 1)] mod p^N`.
pub fn binom_padic_row(a: &PadicScalar, count: usize, ctx: &PrimeContext) -> Result<Vec<u64>> {
    if a.p() != ctx.p() {
        return Err(Error::ContextMismatch);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let required = binomial_precision(ctx, count as u64 - 1);
    if a.precision() < required {
        return Err(Error::InsufficientPrecision { required, available: a.precision() });
    }
    // The representative is a non-negative integer, so the integer binomials
    // C(r, k) are exact and agree with the p-adic ones to N digits.
    let r = a.value().clone();
    let mut row = Vec::with_capacity(count);
    let mut c = BigInt::one();
    for k in 0..count {
        row.push(ctx.reduce_bigint(&c));
        c = c * (&r - BigInt::from(k)) / BigInt::from(k + 1);
    }
    Ok(row)
}

/// Smallest integer `e` with `p^e >= q`, by exact comparison.
pub fn ceil_log_p(q: &ExactRational, ctx: &PrimeContext) -> Result<i64> {
    if !q.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    let p = BigInt::from(ctx.p());
    let (a, b) = (q.numer(), q.denom());
    // p^e >= a/b  <=>  p^e * b >= a (e >= 0)  or  b >= a * p^{-e} (e < 0)
    let holds = |e: i64| -> bool {
        if e >= 0 {
            p.pow(e as u32) * b >= *a
        } else {
            *b >= a * p.pow((-e) as u32)
        }
    };
    let mut e: i64 = (a.bits() as i64 - b.bits() as i64) / (ctx.p().ilog2() as i64).max(1);
    while !holds(e) {
        e += 1;
    }
    while holds(e - 1) {
        e -= 1;
    }
    Ok(e)
}
