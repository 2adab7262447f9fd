//! Hasse derivatives `d1^[s]`, `d2^[s]` and the Taylor expansions built from them.

use crate::error::{Error, Result};
use crate::series::{binomial_table, TruncatedSeries};

/// `d1^[s](X^i Y^j) = C(i, s) X^{i-s} Y^j`.
pub fn hasse1(f: &TruncatedSeries, s: usize) -> TruncatedSeries {
    hasse(f, s, true)
}

/// `d2^[s](X^i Y^j) = C(j, s) X^i Y^{j-s}`.
pub fn hasse2(f: &TruncatedSeries, s: usize) -> TruncatedSeries {
    hasse(f, s, false)
}

fn hasse(f: &TruncatedSeries, s: usize, in_x: bool) -> TruncatedSeries {
    let sctx = f.sctx();
    let ctx = sctx.ctx();
    let binom = binomial_table(&ctx, sctx.mx().max(sctx.my()));
    let mut terms = Vec::new();
    for (i, j, c) in f.terms() {
        let e = if in_x { i } else { j };
        if e < s {
            continue;
        }
        let c = ctx.mul(c, binom[e][s]);
        let (ni, nj) = if in_x { (i - s, j) } else { (i, j - s) };
        terms.push((ni, nj, c as i128));
    }
    TruncatedSeries::from_terms(sctx, &terms)
}

fn check_positive_order(s: &TruncatedSeries) -> Result<()> {
    if s.constant_term() == 0 {
        Ok(())
    } else {
        Err(Error::NonNilpotentShift)
    }
}

/// `sum_{m,l} d2^[l] d1^[m] f * B^l A^m`, which equals `f(X + A, Y + B)`.
pub fn taylor_expand(f: &TruncatedSeries, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_positive_order(a)?;
    check_positive_order(b)?;
    let sctx = f.sctx();
    let (rows, cols) = f.support_bounds();
    let b_pows: Vec<TruncatedSeries> = std::iter::successors(Some(TruncatedSeries::one(sctx)), |q| Some(q * b))
        .take(cols.max(1))
        .collect();
    let mut out = TruncatedSeries::zero(sctx);
    let mut a_pow = TruncatedSeries::one(sctx);
    for m in 0..rows {
        let dm = hasse1(f, m);
        let mut inner = TruncatedSeries::zero(sctx);
        for (l, bl) in b_pows.iter().enumerate() {
            let d = hasse2(&dm, l);
            if !d.is_zero() {
                inner = &inner + &(&d * bl);
            }
        }
        out = &out + &(&inner * &a_pow);
        a_pow = &a_pow * a;
    }
    Ok(out)
}

/// Checks `f(X, Y + dc) = sum_l d2^[l] f * dc^l`.
pub fn taylor_univariate_check(f: &TruncatedSeries, dc: &TruncatedSeries) -> Result<bool> {
    check_positive_order(dc)?;
    let sctx = f.sctx();
    let zero = TruncatedSeries::zero(sctx);
    let lhs = f.substitute_representative(&TruncatedSeries::x(sctx), &(&TruncatedSeries::y(sctx) + dc))?;
    let rhs = taylor_expand(f, &zero, dc)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesContext;

    fn sc(p: u64, n: u32, m: usize) -> SeriesContext {
        SeriesContext::square(p, n, m).unwrap()
    }

    fn parse(s: SeriesContext, t: &str) -> TruncatedSeries {
        TruncatedSeries::parse(s, t).unwrap()
    }

    #[test]
    fn hasse_examples() {
        let s = sc(3, 1, 8);
        let f = parse(s, "1 + X^3*Y + 2*Y^5");
        assert_eq!(hasse1(&f, 0), f);
        assert_eq!(hasse1(&parse(s, "X^5"), 2), parse(s, "X^3"));
        assert!(hasse2(&parse(s, "Y^3"), 1).is_zero());
        assert!(hasse1(&parse(s, "X^2"), 3).is_zero());
    }

    #[test]
    fn taylor_examples() {
        let s = sc(3, 2, 8);
        let zero = TruncatedSeries::zero(s);
        let f = parse(s, "1 + X*Y + 4*X^2*Y^3");
        assert_eq!(taylor_expand(&f, &zero, &zero).unwrap(), f);
        let x2 = parse(s, "X^2");
        let a = parse(s, "X*Y");
        let expect = parse(s, "X^2 + 2*X^2*Y + X^2*Y^2");
        assert_eq!(taylor_expand(&x2, &a, &zero).unwrap(), expect);
        let one = TruncatedSeries::one(s);
        assert_eq!(taylor_expand(&f, &one, &zero), Err(Error::NonNilpotentShift));
    }

    #[test]
    fn univariate_examples() {
        let s = sc(5, 1, 10);
        let f = parse(s, "Y^4");
        let dc = parse(s, "Y^2");
        assert!(taylor_univariate_check(&f, &dc).unwrap());
        let lhs = taylor_expand(&f, &TruncatedSeries::zero(s), &dc).unwrap();
        assert_eq!(lhs, parse(s, "Y + Y^2").pow(4));
        assert!(taylor_univariate_check(&f, &TruncatedSeries::zero(s)).unwrap());
    }
}
