//! Exact valuation bounds for `K = Q_p`: the values `v(eps^n - 1)`, the
//! thresholds `n(c)`, `n'(c)`, the recursive sequences `M_1`, `M_2`, their
//! closed-form majorants `F_1`, `F_2`, `M(n)`, the function `frakM(t)` and the
//! monomial valuation. Everything is computed in exact rationals.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::coeffs::{ceil_log_p, vp_int, ExactRational, PrimeContext};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

pub const DEFAULT_DEPTH_CAP: u32 = 14;

/// Which of the two operators `delta_1 = tau_c u - u`, `delta_2 = gamma_c eta - eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    One,
    Two,
}

impl Kind {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Kind::One),
            2 => Ok(Kind::Two),
            _ => Err(Error::Dimension(format!("kind must be 1 or 2, got {k}"))),
        }
    }
}

/// Valuations of the two generators: `v(u) = 1`, `v(eta) = p/(p-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationTable {
    pub vflat_u: ExactRational,
    pub vflat_eta: ExactRational,
}

impl ValuationTable {
    pub fn new(ctx: &PrimeContext) -> Self {
        Self { vflat_u: ExactRational::one(), vflat_eta: p_over_p_minus_1(ctx) }
    }
}

fn rat(n: u64) -> ExactRational {
    ExactRational::from_integer(n)
}

fn p_over_p_minus_1(ctx: &PrimeContext) -> ExactRational {
    ExactRational::new(ctx.p(), ctx.p() - 1)
}

fn p_power(ctx: &PrimeContext, e: i64) -> ExactRational {
    rat(ctx.p()).pow(e as i32)
}

/// `v(eps^n - 1) = p^{v_p(n) + 1} / (p - 1)`.
pub fn vflat_eps_pow(n: i64, ctx: &PrimeContext) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::ZeroExponent);
    }
    let v = vp_int(&BigInt::from(n), ctx.p())?;
    Ok(p_power(ctx, v + 1) / rat(ctx.p() - 1))
}

/// `(n(c), n'(c))`.
pub fn n_thresholds(c: &ExactRational, ctx: &PrimeContext) -> Result<(i64, i64)> {
    if !c.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    let pm1 = rat(ctx.p() - 1);
    let n1 = if *c > p_over_p_minus_1(ctx) {
        ceil_log_p(&(&pm1 * &(c - &ExactRational::one())), ctx)? - 1
    } else {
        0
    };
    let n2 = if *c > ExactRational::new(1, ctx.p() - 1) { ceil_log_p(&(&pm1 * c), ctx)? - 1 } else { 0 };
    Ok((n1, n2))
}

/// Exact `v(delta_1(c)) = 1 + p^{n(c)+1}/(p-1)` and `v(delta_2(c)) = p^{n'(c)+1}/(p-1)`.
pub fn vflat_delta(kind: Kind, c: &ExactRational, ctx: &PrimeContext) -> Result<ExactRational> {
    let (n1, n2) = n_thresholds(c, ctx)?;
    let pm1 = rat(ctx.p() - 1);
    Ok(match kind {
        Kind::One => ExactRational::one() + p_power(ctx, n1 + 1) / pm1,
        Kind::Two => p_power(ctx, n2 + 1) / pm1,
    })
}

/// Memoized evaluator for `M_k^[i](c)`, confined to one owner.
#[derive(Debug)]
pub struct RecursiveBounds {
    ctx: PrimeContext,
    depth_cap: u32,
    memo: HashMap<(Kind, u32, ExactRational), ExactRational>,
}

impl RecursiveBounds {
    pub fn new(ctx: PrimeContext, depth_cap: u32) -> Self {
        Self { ctx, depth_cap, memo: HashMap::new() }
    }

    /// `M^[0](c) = c`, `M^[i+1](c) = max{M^[i](c'), c', M^[i](c)}` with
    /// `c' = c + (i+1) v(delta(c))`.
    pub fn eval(&mut self, kind: Kind, i: u32, c: &ExactRational) -> Result<ExactRational> {
        if i > self.depth_cap {
            return Err(Error::DepthCapExceeded { depth: i, cap: self.depth_cap });
        }
        if !c.is_positive() {
            return Err(Error::NonPositiveArgument);
        }
        if i == 0 {
            return Ok(c.clone());
        }
        let key = (kind, i, c.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let shifted = c + &(&rat(i as u64) * &vflat_delta(kind, c, &self.ctx)?);
        let a = self.eval(kind, i - 1, &shifted)?;
        let b = self.eval(kind, i - 1, c)?;
        let v = a.max(shifted).max(b);
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// `M_k^[i](c)` with a fresh memo table.
pub fn m_recursive(kind: Kind, i: u32, c: &ExactRational, ctx: &PrimeContext, depth_cap: u32) -> Result<ExactRational> {
    RecursiveBounds::new(*ctx, depth_cap).eval(kind, i, c)
}

/// `prod_{k<i} (k + (p+1)/p)`.
fn rising(ctx: &PrimeContext, i: u64) -> ExactRational {
    let base = ExactRational::new(ctx.p() + 1, ctx.p());
    (0..i).fold(ExactRational::one(), |acc, k| acc * (rat(k) + base.clone()))
}

/// `(p-1) sum_{k<i} (k+1) p^k prod_{l<k} (l + (p+1)/p)`.
fn f1_offset(ctx: &PrimeContext, i: u64) -> ExactRational {
    let sum = (0..i).fold(ExactRational::zero(), |acc, k| {
        acc + rat(k + 1) * p_power(ctx, k as i64) * rising(ctx, k)
    });
    rat(ctx.p() - 1) * sum
}

/// `F_1^[i](x)` or `F_2^[i](x)`.
pub fn f_closed(kind: Kind, i: u64, x: &ExactRational, ctx: &PrimeContext) -> ExactRational {
    let lead = p_power(ctx, i as i64) * rising(ctx, i) * x.clone();
    match kind {
        Kind::One => lead - f1_offset(ctx, i),
        Kind::Two => lead,
    }
}

/// `M(n) = F_1^[n](F_2^[n](p/(p-1)))`.
pub fn m_threshold(n: u64, ctx: &PrimeContext) -> ExactRational {
    let inner = f_closed(Kind::Two, n, &p_over_p_minus_1(ctx), ctx);
    f_closed(Kind::One, n, &inner, ctx)
}

/// The expanded closed form of `M(n)`:
/// `p^{2n+1}/(p-1) prod_{k<n}(k+(p+1)/p)^2 - (p-1) sum_{k<n} (k+1) p^k prod_{l<k}(l+(p+1)/p)`.
pub fn m_threshold_expanded(n: u64, ctx: &PrimeContext) -> ExactRational {
    let r = rising(ctx, n);
    p_power(ctx, 2 * n as i64 + 1) / rat(ctx.p() - 1) * r.clone() * r - f1_offset(ctx, n)
}

/// `frakM(t)`, with exponent `2 ceil(t) + 3` and products up to `ceil(t)`.
pub fn frak_m(t: &ExactRational, ctx: &PrimeContext) -> Result<ExactRational> {
    if t.is_negative() {
        return Err(Error::NegativeArgument);
    }
    let ct = t.ceil().to_u64().ok_or_else(|| Error::Dimension("t too large".into()))?;
    let r = rising(ctx, ct + 1);
    Ok(p_power(ctx, 2 * ct as i64 + 3) / rat(ctx.p() - 1) * r.clone() * r - f1_offset(ctx, ct + 1))
}

/// `v_mono` value, possibly infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonoValuation {
    Finite(ExactRational),
    Infinity,
}

impl fmt::Display for MonoValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonoValuation::Finite(v) => write!(f, "{v}"),
            MonoValuation::Infinity => write!(f, "inf"),
        }
    }
}

/// `min over the support of i + j p/(p-1)`.
pub fn v_mono(f: &TruncatedSeries) -> MonoValuation {
    let table = ValuationTable::new(&f.ctx());
    f.terms()
        .map(|(i, j, _)| &table.vflat_u * &rat(i as u64) + &table.vflat_eta * &rat(j as u64))
        .min()
        .map_or(MonoValuation::Infinity, MonoValuation::Finite)
}
