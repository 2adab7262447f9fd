use phigamma::coeffs::PrimeContext;
use phigamma::gamma_action::{scalar_for, GroupElement};
use phigamma::homology::linalg::quotient_invariants;
use phigamma::homology::module::identity_matrix;
use phigamma::homology::{build_cube, condition_c0_check, Iota, KoszulComplex, ModMatrix, ModuleSpec, SemilinearModule};
use phigamma::phi_psi::phi;
use phigamma::series::{SeriesContext, TruncatedSeries};
use phigamma::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx(p: u64, n: u32) -> PrimeContext {
    PrimeContext::new(p, n).unwrap()
}

fn matrix(c: PrimeContext, rows: usize, cols: usize) -> impl Strategy<Value = ModMatrix> {
    let m = c.modulus();
    prop::collection::vec(0..m, rows * cols).prop_map(move |v| {
        let cols_v: Vec<Vec<u64>> = (0..cols).map(|j| (0..rows).map(|i| v[j * rows + i]).collect()).collect();
        ModMatrix::from_columns(c, rows, &cols_v)
    })
}

/// Every vector of `(Z/p^N)^n`.
fn all_vectors(c: PrimeContext, n: usize) -> Vec<Vec<u64>> {
    let m = c.modulus();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (0..m).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn order(c: PrimeContext, exponents: &[u32]) -> u64 {
    exponents.iter().map(|&e| c.p().pow(e)).product()
}

/// Rank over `F_p` by Gaussian elimination on rows.
fn rank_mod_p(p: u64, mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] % p != 0) else { continue };
        rows.swap(rank, piv);
        let inv = (1..p).find(|&x| x * rows[rank][c] % p == 1).unwrap();
        let pivot_row: Vec<u64> = rows[rank].iter().map(|&x| x * inv % p).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] % p != 0 {
                let f = row[c] % p;
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

#[test]
fn trivial_h0_matches_brute_force() {
    let s = SeriesContext::square(3, 1, 4).unwrap();
    let gamma = GroupElement::from_integers(3, 0, 4, 4).unwrap();
    let tau = GroupElement::from_integers(3, 1, 1, 4).unwrap();
    // rows of the stacked map v -> (gamma v - v, v - phi v, tau v - v) on the 16 monomials
    let mut columns = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let e = TruncatedSeries::monomial(s, i, j, 1);
            let parts = [
                gamma.act(&e).unwrap().try_sub(&e).unwrap(),
                e.try_sub(&phi(&e)).unwrap(),
                tau.act(&e).unwrap().try_sub(&e).unwrap(),
            ];
            columns.push(parts.iter().flat_map(|f| f.coeffs().to_vec()).collect::<Vec<u64>>());
        }
    }
    let rows: Vec<Vec<u64>> = (0..48).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let oracle_dim = 16 - rank_mod_p(3, rows);
    assert_eq!(oracle_dim, 1);
    let d = SemilinearModule::trivial(s, 1, scalar_for(&s, 4)).unwrap();
    let h0 = build_cube(&d).unwrap().complex.cohomology(0).unwrap();
    assert_eq!(h0.len(), oracle_dim);
}

#[test]
fn top_cohomology_is_cokernel() {
    let s = SeriesContext::square(3, 1, 4).unwrap();
    let d = SemilinearModule::trivial(s, 1, scalar_for(&s, 4)).unwrap();
    let cube = build_cube(&d).unwrap();
    let g2 = cube.complex.differential(2);
    let c = g2.ctx();
    let free = vec![c.n(); g2.rows()];
    let coker = quotient_invariants(c, &free, g2).unwrap();
    assert_eq!(cube.complex.cohomology(3).unwrap(), coker);
}

#[test]
fn trivial_h0_agrees_with_lateral_subcomplex() {
    let s = SeriesContext::square(3, 1, 4).unwrap();
    let d = SemilinearModule::trivial(s, 1, scalar_for(&s, 4)).unwrap();
    let cube = build_cube(&d).unwrap();
    let lateral = cube.lateral_kernel_complex().unwrap();
    assert_eq!(lateral.cohomology(0).unwrap(), cube.complex.cohomology(0).unwrap());
    assert_eq!(lateral.dims(), [16, 32, 16, 0]);
}

#[test]
fn invalid_modules_are_rejected() {
    let s = SeriesContext::square(3, 1, 6).unwrap();
    let id = identity_matrix(s, 1);
    let x = vec![vec![TruncatedSeries::x(s)]];
    let chi = scalar_for(&s, 4);
    let bad_phi = SemilinearModule::new(s, x.clone(), id.clone(), id.clone(), chi.clone()).unwrap();
    assert!(matches!(build_cube(&bad_phi), Err(Error::InvalidModule(_))));
    let one_plus_x = vec![vec![TruncatedSeries::parse(s, "1 + X").unwrap()]];
    let bad_tau = SemilinearModule::new(s, id.clone(), id, one_plus_x, chi).unwrap();
    assert!(!bad_tau.validate().passed());
    assert!(condition_c0_check(&bad_tau, 2).is_err());
}

#[test]
fn spec_with_non_unit_frobenius_is_rejected() {
    let text = r#"{"p": 3, "N": 1, "Mx": 6, "My": 6, "rank": 1,
        "chi": {"value": "4", "precision": 6},
        "P_phi": [["X"]], "P_gamma": [["1"]], "P_tau": [["1"]]}"#;
    let spec: ModuleSpec = serde_json::from_str(text).unwrap();
    assert!(matches!(SemilinearModule::from_spec(&spec), Err(Error::InvalidModule(_))));
}

#[test]
fn random_modules_satisfy_complex_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (k, (n, m, rank)) in [(1, 4, 1), (2, 4, 2), (1, 6, 2), (2, 6, 1), (1, 9, 1)].into_iter().enumerate() {
        let s = SeriesContext::square(3, n, m).unwrap();
        let d = SemilinearModule::random_valid(&mut rng, s, rank, scalar_for(&s, 4)).unwrap();
        assert!(d.validate().passed(), "module {k}");
        let spec = d.to_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back = SemilinearModule::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.to_spec(), spec);
        let cube = build_cube(&d).unwrap();
        cube.complex.check_d2().unwrap();
        let rows = cube.window_rows();
        cube.psi_complex().unwrap().check_d2_on_rows(Some(&rows)).unwrap();
        let phi_map = cube.phi_map().unwrap();
        assert!(phi_map.check_chain_law(&cube.complex, &cube.psi_complex().unwrap(), Some(&rows)).unwrap());
        assert!(cube.phi_map_onto_window().unwrap());
        for which in [Iota::PInfinity, Iota::Infinity] {
            let (sub, iota) = cube.iota(which).unwrap();
            sub.check_d2().unwrap();
            assert!(iota.check_chain_law(&sub, &cube.complex, None).unwrap());
            assert!(iota.is_injective(&sub).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kernel_matches_enumeration(a in matrix(ctx(3, 2), 2, 3)) {
        let c = a.ctx();
        let k = a.kernel();
        let members: Vec<Vec<u64>> = all_vectors(c, 3).into_iter().filter(|v| a.apply(v).iter().all(|&x| x == 0)).collect();
        prop_assert_eq!(order(c, &k.orders), members.len() as u64);
        for g in 0..k.len() {
            prop_assert!(a.apply(&k.generators.column(g)).iter().all(|&x| x == 0));
        }
        for v in &members {
            let t = k.coordinates(v);
            let mut back = vec![0u64; 3];
            for (g, &tg) in t.iter().enumerate() {
                for (b, x) in back.iter_mut().zip(k.generators.column(g)) {
                    *b = c.add(*b, c.mul(tg, x));
                }
            }
            prop_assert_eq!(&back, v);
        }
    }

    #[test]
    fn smith_transforms_are_inverse(a in matrix(ctx(5, 2), 3, 3)) {
        let s = a.smith();
        let id = ModMatrix::identity(a.ctx(), 3);
        prop_assert_eq!(s.v.mul(&s.v_inv).unwrap(), id);
    }

    #[test]
    fn cohomology_order_matches_counting(b in matrix(ctx(3, 2), 2, 3), r in matrix(ctx(3, 2), 3, 2)) {
        let c = b.ctx();
        let kb = b.kernel();
        // a = ker(b) * r, padded so that b a = 0
        let g = kb.generators.clone();
        let r = r.select_rows(&(0..g.cols()).collect::<Vec<_>>());
        let a = if g.cols() == 0 { ModMatrix::zeros(c, 3, 2) } else { g.mul(&r).unwrap() };
        let z = ModMatrix::zeros(c, 0, 2);
        let complex = KoszulComplex::new(c, [2, 3, 2, 0], [a.clone(), b.clone(), z]).unwrap();
        complex.check_d2().unwrap();
        let h1 = complex.cohomology(1).unwrap();
        let image: std::collections::BTreeSet<Vec<u64>> = all_vectors(c, 2).iter().map(|v| a.apply(v)).collect();
        let ker_size = all_vectors(c, 3).into_iter().filter(|v| b.apply(v).iter().all(|&x| x == 0)).count() as u64;
        prop_assert_eq!(order(c, &h1), ker_size / image.len() as u64);
    }
}
