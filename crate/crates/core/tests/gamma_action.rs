use phigamma::gamma_action::{default_tau_cap, delta_op, scalar_for, tau_power, tau_series, GroupElement};
use phigamma::series::{SeriesContext, TruncatedSeries};
use phigamma::Error;
use proptest::prelude::*;

fn sc(p: u64, n: u32, m: usize) -> SeriesContext {
    SeriesContext::square(p, n, m).unwrap()
}

fn series(s: SeriesContext) -> impl Strategy<Value = TruncatedSeries> {
    let m = s.ctx().modulus();
    prop::collection::vec(0..m, s.dim()).prop_map(move |c| TruncatedSeries::from_coeffs(s, c).unwrap())
}

fn elem(s: &SeriesContext, m: i64, a: i64) -> GroupElement {
    GroupElement::from_integers(s.p(), m, a, GroupElement::required_precision(s) + 2).unwrap()
}

/// `f(X (1+Y)^m, (1+Y)^a - 1)` for `m, a >= 0`, with powers of `1 + Y` by repeated products.
fn act_oracle(f: &TruncatedSeries, m: usize, a: usize) -> TruncatedSeries {
    let s = f.sctx();
    let w = &TruncatedSeries::one(s) + &TruncatedSeries::y(s);
    let pow = |e: usize| (0..e).fold(TruncatedSeries::one(s), |acc, _| &acc * &w);
    let gx = &TruncatedSeries::x(s) * &pow(m);
    let gy = &pow(a) - &TruncatedSeries::one(s);
    let mut out = TruncatedSeries::zero(s);
    for (i, j, c) in f.terms() {
        let t = &gx.pow(i) * &gy.pow(j);
        out = &out + &t.scale(c);
    }
    out
}

#[test]
fn generators_act_as_expected() {
    let s = sc(3, 2, 6);
    let x = TruncatedSeries::x(s);
    let y = TruncatedSeries::y(s);
    let tau = elem(&s, 1, 1);
    assert_eq!(tau.act(&x).unwrap(), &x * &(&TruncatedSeries::one(s) + &y));
    assert_eq!(tau.act(&y).unwrap(), y);
    let g = elem(&s, 0, 4);
    assert_eq!(g.act(&x).unwrap(), x);
    assert_eq!(tau_series(&x).unwrap(), tau.act(&x).unwrap());
}

#[test]
fn non_unit_a_is_rejected() {
    assert!(GroupElement::from_integers(3, 0, 3, 4).is_err());
}

#[test]
fn tau_iteration_cap_is_enforced() {
    // (tau - 1)^k X = X Y^k only vanishes once k reaches My
    let s = sc(3, 1, 4);
    let c = scalar_for(&s, 4);
    let x = TruncatedSeries::x(s);
    assert!(tau_power(&c, &x, tau_series, 2).is_err());
    assert!(matches!(tau_power(&c, &x, tau_series, 2), Err(Error::NonNilpotentTau { .. })));
    assert!(tau_power(&c, &x, tau_series, default_tau_cap(&s, 1)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn act_matches_oracle(f in series(sc(3, 2, 5)), m in 0usize..5, a in prop::sample::select(vec![1usize, 2, 4, 5, 7])) {
        let s = f.sctx();
        prop_assert_eq!(elem(&s, m as i64, a as i64).act(&f).unwrap(), act_oracle(&f, m, a));
    }

    #[test]
    fn action_is_a_group_action(
        f in series(sc(5, 2, 5)),
        m1 in -20i64..20, m2 in -20i64..20,
        a1 in prop::sample::select(vec![1i64, 2, 3, 4, 6, -1]),
        a2 in prop::sample::select(vec![1i64, 2, 3, 4, 6, -1]),
    ) {
        let s = f.sctx();
        let g1 = elem(&s, m1, a1);
        let g2 = elem(&s, m2, a2);
        let lhs = g1.compose(&g2).act(&f).unwrap();
        let rhs = g1.act(&g2.act(&f).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(g1.inverse().act(&g1.act(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn ring_automorphism(a in series(sc(3, 3, 4)), b in series(sc(3, 3, 4)), m in -9i64..9) {
        let g = elem(&a.sctx(), m, 2);
        prop_assert_eq!(g.act(&(&a * &b)).unwrap(), &g.act(&a).unwrap() * &g.act(&b).unwrap());
    }

    #[test]
    fn tau_power_expansion(f in series(sc(3, 2, 5)), c in 0i64..12) {
        let s = f.sctx();
        let cap = default_tau_cap(&s, 1);
        let via_binomial = tau_power(&scalar_for(&s, c), &f, tau_series, cap).unwrap();
        prop_assert_eq!(via_binomial, elem(&s, c, 1).act(&f).unwrap());
    }

    #[test]
    fn delta_times_tau_minus_one(f in series(sc(3, 2, 5)), c in prop::sample::select(vec![4i64, 10, 2, 7])) {
        let s = f.sctx();
        let cap = default_tau_cap(&s, 1);
        let chi = scalar_for(&s, c);
        let t1 = tau_series(&f).unwrap().try_sub(&f).unwrap();
        let lhs = delta_op(&chi, &t1, tau_series, cap).unwrap();
        let rhs = tau_power(&chi, &f, tau_series, cap).unwrap().try_sub(&f).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
