use std::collections::BTreeMap;

use phigamma::coeffs::PrimeContext;
use phigamma::series::{SeriesContext, TruncatedSeries};
use phigamma::Error;
use proptest::prelude::*;

fn sctx(p: u64, n: u32, mx: usize, my: usize) -> SeriesContext {
    SeriesContext::new(PrimeContext::new(p, n).unwrap(), mx, my).unwrap()
}

fn series(s: SeriesContext) -> impl Strategy<Value = TruncatedSeries> {
    let m = s.ctx().modulus();
    prop::collection::vec(0..m, s.dim()).prop_map(move |c| TruncatedSeries::from_coeffs(s, c).unwrap())
}

/// Schoolbook product over a sparse map of signed coefficients.
fn naive_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
    let s = a.sctx();
    let mut acc: BTreeMap<(usize, usize), i128> = BTreeMap::new();
    for (i1, j1, c1) in a.terms() {
        for (i2, j2, c2) in b.terms() {
            if i1 + i2 < s.mx() && j1 + j2 < s.my() {
                *acc.entry((i1 + i2, j1 + j2)).or_default() += c1 as i128 * c2 as i128;
            }
        }
    }
    let terms: Vec<_> = acc.into_iter().map(|((i, j), c)| (i, j, c)).collect();
    TruncatedSeries::from_terms(s, &terms)
}

#[test]
fn context_validation() {
    let ctx = PrimeContext::new(3, 2).unwrap();
    assert!(SeriesContext::new(ctx, 0, 4).is_err());
    assert!(PrimeContext::new(4, 1).is_err());
    assert!(PrimeContext::new(3, 0).is_err());
    assert_eq!(sctx(3, 2, 4, 5).dim(), 20);
}

#[test]
fn parse_examples() {
    let s = sctx(3, 2, 6, 6);
    let f = TruncatedSeries::parse(s, "2*X^2*Y + X - 1").unwrap();
    assert_eq!(f.coeff(2, 1), 2);
    assert_eq!(f.coeff(1, 0), 1);
    assert_eq!(f.coeff(0, 0), 8);
    // monomials beyond the truncation vanish
    assert!(TruncatedSeries::parse(s, "X^6 + Y^7").unwrap().is_zero());
    assert!(matches!(TruncatedSeries::parse(s, "X +* Y"), Err(Error::Parse { .. })));
}

#[test]
fn geometric_inverse() {
    let s = sctx(5, 2, 4, 7);
    let f = TruncatedSeries::parse(s, "1 - Y").unwrap();
    let g = f.unit_inverse().unwrap();
    let want: Vec<(usize, usize, i128)> = (0..7).map(|j| (0, j, 1)).collect();
    assert_eq!(g, TruncatedSeries::from_terms(s, &want));
    assert!(TruncatedSeries::parse(s, "X + Y").unwrap().unit_inverse().is_err());
}

#[test]
fn mismatched_contexts_are_rejected() {
    let a = TruncatedSeries::one(sctx(3, 1, 4, 4));
    let b = TruncatedSeries::one(sctx(3, 2, 4, 4));
    assert!(a.try_add(&b).is_err());
    assert!(a.try_mul(&b).is_err());
}

#[test]
fn substitution_outside_the_ideal_is_rejected() {
    let s = sctx(3, 1, 4, 4);
    let f = TruncatedSeries::parse(s, "X").unwrap();
    let one = TruncatedSeries::one(s);
    assert!(f.substitute(&one, &TruncatedSeries::y(s)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook(a in series(sctx(3, 2, 5, 6)), b in series(sctx(3, 2, 5, 6))) {
        prop_assert_eq!(&a * &b, naive_mul(&a, &b));
    }

    #[test]
    fn ring_axioms(
        a in series(sctx(5, 2, 4, 5)),
        b in series(sctx(5, 2, 4, 5)),
        c in series(sctx(5, 2, 4, 5)),
    ) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &(-&a), TruncatedSeries::zero(a.sctx()));
        prop_assert_eq!(&a * &TruncatedSeries::one(a.sctx()), a.clone());
    }

    #[test]
    fn render_parse_round_trip(a in series(sctx(7, 2, 4, 4))) {
        let back = TruncatedSeries::parse(a.sctx(), &a.render()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn json_round_trip(a in series(sctx(3, 3, 3, 5))) {
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let back = TruncatedSeries::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn w_coordinates_round_trip(a in series(sctx(3, 2, 4, 6))) {
        prop_assert_eq!(TruncatedSeries::from_w_coordinates(&a.to_w_coordinates()), a);
    }

    #[test]
    fn units_invert(a in series(sctx(3, 2, 4, 4)), c in 1u64..3) {
        let mut u = a.clone();
        u = &u - &TruncatedSeries::constant(u.sctx(), u.constant_term() as i128);
        u = &u + &TruncatedSeries::constant(u.sctx(), c as i128);
        let inv = u.unit_inverse().unwrap();
        prop_assert_eq!(&u * &inv, TruncatedSeries::one(u.sctx()));
    }

    #[test]
    fn substitution_is_a_ring_map(
        a in series(sctx(3, 2, 4, 4)),
        b in series(sctx(3, 2, 4, 4)),
        gx in series(sctx(3, 2, 4, 4)),
        gy in series(sctx(3, 2, 4, 4)),
    ) {
        let s = a.sctx();
        let gx = &gx * &TruncatedSeries::x(s);
        let gy = &gy * &TruncatedSeries::y(s);
        let sub = |f: &TruncatedSeries| f.substitute(&gx, &gy).unwrap();
        prop_assert_eq!(sub(&(&a * &b)), &sub(&a) * &sub(&b));
        prop_assert_eq!(sub(&(&a + &b)), &sub(&a) + &sub(&b));
    }
}
