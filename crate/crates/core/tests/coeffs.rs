use num_bigint::BigInt;
use phigamma::coeffs::{
    binom_padic, binom_padic_row, binomial_precision, ceil_log_p, vp_factorial, vp_int, ExactRational, PadicScalar,
    PrimeContext,
};
use phigamma::Error;
use proptest::prelude::*;

/// `C(a, k)` for integer `a`, via the falling factorial over the integers.
fn binom_int(a: i64, k: u64) -> BigInt {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for t in 0..k as i64 {
        num *= BigInt::from(a - t);
        den *= BigInt::from(t + 1);
    }
    num / den
}

#[test]
fn valuations() {
    assert_eq!(vp_int(&BigInt::from(54), 3).unwrap(), 3);
    assert_eq!(vp_int(&BigInt::from(-25), 5).unwrap(), 2);
    assert_eq!(vp_int(&BigInt::from(0), 5), Err(Error::ZeroArgument));
    assert_eq!(vp_factorial(9, 3), 4);
    assert_eq!(vp_factorial(2, 3), 0);
}

#[test]
fn ceil_log_examples() {
    let ctx = PrimeContext::new(3, 1).unwrap();
    let q = |n: i64, d: i64| ExactRational::new(n, d);
    assert_eq!(ceil_log_p(&q(1, 1), &ctx).unwrap(), 0);
    assert_eq!(ceil_log_p(&q(3, 1), &ctx).unwrap(), 1);
    assert_eq!(ceil_log_p(&q(4, 1), &ctx).unwrap(), 2);
    assert_eq!(ceil_log_p(&q(1, 3), &ctx).unwrap(), -1);
    assert_eq!(ceil_log_p(&q(1, 2), &ctx).unwrap(), 0);
    assert!(ceil_log_p(&q(0, 1), &ctx).is_err());
}

#[test]
fn negative_one_binomials_alternate() {
    let ctx = PrimeContext::new(5, 3).unwrap();
    let a = PadicScalar::new(5, -1, binomial_precision(&ctx, 20)).unwrap();
    let row = binom_padic_row(&a, 20, &ctx).unwrap();
    for (k, c) in row.iter().enumerate() {
        assert_eq!(*c, if k % 2 == 0 { 1 } else { ctx.modulus() - 1 });
    }
}

#[test]
fn low_precision_is_reported() {
    let ctx = PrimeContext::new(3, 2).unwrap();
    let a = PadicScalar::new(3, 4, 2).unwrap();
    // C(a, 3) needs 2 + v_3(3!) = 3 digits of a
    assert!(matches!(binom_padic(&a, 3, &ctx), Err(Error::InsufficientPrecision { .. })));
}

#[test]
fn padic_inverse() {
    let a = PadicScalar::new(3, 4, 5).unwrap();
    let inv = a.inverse().unwrap();
    let prod = &a * &inv;
    assert_eq!(prod.value() % BigInt::from(243), BigInt::from(1));
    assert!(PadicScalar::new(3, 6, 5).unwrap().inverse().is_err());
}

#[test]
fn rational_parsing() {
    let r: ExactRational = "6/4".parse().unwrap();
    assert_eq!(r, ExactRational::new(3, 2));
    assert_eq!(r.to_string(), "3/2");
    assert_eq!(r.ceil(), BigInt::from(2));
    assert!("1/0".parse::<ExactRational>().is_err());
}

proptest! {
    #[test]
    fn binomials_match_integers(a in -60i64..60, k in 0u64..12, p in prop::sample::select(vec![3u64, 5, 7]), n in 1u32..4) {
        let ctx = PrimeContext::new(p, n).unwrap();
        let s = PadicScalar::new(p, a, binomial_precision(&ctx, k)).unwrap();
        let got = binom_padic(&s, k, &ctx).unwrap().value();
        prop_assert_eq!(got, ctx.reduce_bigint(&binom_int(a, k)));
    }

    #[test]
    fn modular_inverse(p in prop::sample::select(vec![3u64, 5, 7]), n in 1u32..4, x in 0u64..1000) {
        let ctx = PrimeContext::new(p, n).unwrap();
        let x = x % ctx.modulus();
        if x % p == 0 {
            prop_assert!(ctx.inv(x).is_err());
        } else {
            prop_assert_eq!(ctx.mul(x, ctx.inv(x).unwrap()), 1);
        }
    }
}
