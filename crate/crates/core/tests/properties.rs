use num_bigint::BigInt;
use proptest::prelude::*;

use k3rm::branchgeom::{self, pair_fixed_count, Family, FiberSpec, Perm6};
use k3rm::counter::{CountRecord, Method};
use k3rm::ffield::make_field;
use k3rm::harness::{self, CacheEntry, CountCache, CountProvider};
use k3rm::zeta;
use k3rm::{IntPoly, RatPoly};

fn int_poly(max_deg: usize) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-20i64..=20, 0..=max_deg + 1).prop_map(|c| IntPoly::from_i64s(&c))
}

fn monic_int_poly(max_deg: usize) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-6i64..=6, 0..=max_deg).prop_map(|mut c| {
        c.push(1);
        IntPoly::from_i64s(&c)
    })
}

/// Odd `p`, `p^k < 2^17`.
fn field_shape() -> impl Strategy<Value = (u64, usize)> {
    prop::sample::select(vec![(3, 1), (3, 10), (3, 4), (3, 7), (5, 3), (7, 2), (11, 2), (13, 3), (101, 2), (65521, 1)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_ring_axioms(a in int_poly(6), b in int_poly(6), c in int_poly(6)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn division_reconstructs(a in int_poly(8), b in monic_int_poly(4)) {
        let (a, b) = (a.to_rational(), b.to_rational());
        let (q, r) = a.div_rem(&b);
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.degree().unwrap_or(0) < b.degree().unwrap().max(1));
    }

    #[test]
    fn gcd_divides_both(a in monic_int_poly(4), b in monic_int_poly(4), c in monic_int_poly(2)) {
        let (a, b, c) = ((&a * &c).to_rational(), (&b * &c).to_rational(), c.to_rational());
        let g = a.gcd(&b);
        prop_assert!(a.exact_div(&g).is_some());
        prop_assert!(b.exact_div(&g).is_some());
        prop_assert!(g.exact_div(&c).is_some());
    }

    #[test]
    fn newton_round_trip(f in monic_int_poly(6)) {
        let f = f.to_rational();
        let n = f.degree().unwrap();
        prop_assert_eq!(RatPoly::from_power_sums(&f.power_sums(n)), f);
    }

    #[test]
    fn power_charpoly_is_multiplicative(f in monic_int_poly(3), g in monic_int_poly(3), m in 1u32..=4) {
        let (f, g) = (f.to_rational(), g.to_rational());
        let lhs = zeta::power_charpoly(&(&f * &g), m);
        let rhs = &zeta::power_charpoly(&f, m) * &zeta::power_charpoly(&g, m);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn power_charpoly_composes(f in monic_int_poly(3), a in 1u32..=3, b in 1u32..=3) {
        let f = f.to_rational();
        prop_assert_eq!(zeta::power_charpoly(&zeta::power_charpoly(&f, a), b), zeta::power_charpoly(&f, a * b));
    }

    #[test]
    fn cyclotomic_split_is_idempotent(core in monic_int_poly(3), picks in prop::collection::vec((1u32..=12, 1u32..=2), 0..3)) {
        let cyc = zeta::cyclotomic_polys(12);
        let mut f = core.to_rational();
        for &(d, m) in &picks {
            f = &f * &cyc[&d].to_rational().pow(m);
        }
        let once = zeta::split_cyclotomic(&f);
        let twice = zeta::split_cyclotomic(&once.chi_tr);
        prop_assert!(twice.removed.is_empty());
        prop_assert_eq!(&twice.chi_tr, &once.chi_tr);
        let degree = once.chi_tr.degree().unwrap_or(0) + once.cyclotomic_degree();
        prop_assert_eq!(degree, f.degree().unwrap());
    }

    #[test]
    fn field_inverse_and_sqrt((p, k) in field_shape(), i in any::<u128>(), j in any::<u128>()) {
        let f = make_field(p, k).unwrap();
        let q = f.order();
        let (a, b) = (f.from_index(i % q), f.from_index(j % q));
        if !b.is_zero() {
            let ratio = a.checked_div(&b).unwrap();
            prop_assert_eq!(&ratio * &b, a.clone());
            prop_assert!(b.pow(q - 1).is_one());
        }
        if a.quadratic_character() == 1 {
            prop_assert_eq!(a.sqrt().unwrap().square(), a.clone());
        }
        prop_assert_eq!(a.quadratic_character() == -1, a.sqrt().is_err());
        let mut x = a.clone();
        for _ in 0..k {
            x = x.frobenius();
        }
        prop_assert_eq!(x, a);
    }

    #[test]
    fn pair_counts_grow_along_divisibility(idx in 0usize..720, k in 1u32..=6, m in 1u32..=4) {
        let sigma = Perm6::all()[idx];
        prop_assert!(pair_fixed_count(&sigma, k) <= pair_fixed_count(&sigma, k * m));
        prop_assert_eq!(pair_fixed_count(&sigma, k), pair_fixed_count(&sigma.pow(k), 1));
        let order = (1..=6u32).find(|&e| sigma.pow(e) == Perm6::IDENTITY).unwrap();
        prop_assert_eq!(pair_fixed_count(&sigma, order), 15);
    }

    #[test]
    fn cache_line_round_trip(family in prop::sample::select(vec![Family::Qw2, Family::Qw5]), t in 1u64..1000, k in 1u32..8,
                             n_prime in any::<u64>(), extra in 0u64..1000, fibred in any::<bool>()) {
        prop_assume!(branchgeom::good_fiber(family, 1009, t).unwrap());
        let record = CountRecord {
            fiber: FiberSpec::new(family, 1009, t).unwrap(),
            k,
            n_prime,
            n_k3: n_prime.saturating_add(extra),
            method: if fibred { Method::Fibration } else { Method::Naive },
            wall_time_secs: 0.0,
        };
        let entry = CacheEntry::from_record(&record);
        let parsed = CacheEntry::parse_json_line(&entry.to_json_line()).unwrap();
        prop_assert_eq!(&parsed, &entry);
        prop_assert_eq!(parsed.to_record().unwrap(), record);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembled_charpolys_are_consistent(choice in 0usize..6, pick in any::<prop::sample::Index>()) {
        let (family, p) = [(Family::Qw5, 3), (Family::Qw5, 7), (Family::Qw5, 13), (Family::Qw2, 5), (Family::Qw2, 11), (Family::Qw2, 13)][choice];
        let good: Vec<u64> = (0..p).filter(|&t| branchgeom::good_fiber(family, p, t).unwrap()).collect();
        let fiber = FiberSpec::new(family, p, *pick.get(&good)).unwrap();
        let run = harness::charpoly_pipeline(&fiber, 4, false, Method::Naive, &CountProvider::uncached()).unwrap();
        let tp = &run.transcendental;
        prop_assert_eq!(tp.degree() + tp.cyclotomic_degree(), 22);
        prop_assert!(zeta::split_cyclotomic(&tp.chi_tr).removed.is_empty());
        prop_assert!(zeta::is_reciprocal_up_to_sign(&tp.chi_tr));
        for c in &run.counts {
            prop_assert_eq!(run.charpoly.predicted_count(c.k), BigInt::from(c.n_k3));
            prop_assert!(c.within_weil_bound());
        }
        let p = BigInt::from(p);
        prop_assert_eq!(zeta::functional_equation_sign(&run.charpoly.untwisted, &p), Some(run.charpoly.sign));
        prop_assert_eq!(zeta::twist(&run.charpoly.untwisted, &p), run.charpoly.twisted.clone());
    }
}

#[test]
fn cache_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let fiber = FiberSpec::new(Family::Qw5, 7, 2).unwrap();
    let first = {
        let provider = CountProvider::new(Some(CountCache::open(dir.path()).unwrap()), Default::default());
        let r = provider.count(&fiber, 2, Method::Naive).unwrap();
        assert_eq!(provider.computed(), 1);
        r
    };
    let provider = CountProvider::new(Some(CountCache::open(dir.path()).unwrap()), Default::default());
    let again = provider.count(&fiber, 2, Method::Naive).unwrap();
    assert_eq!(provider.computed(), 0);
    assert_eq!((again.n_prime, again.n_k3), (first.n_prime, first.n_k3));
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let sweep = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| harness::rm_sweep(Family::Qw5, 40, Method::Fibration, &CountProvider::uncached()).unwrap())
    };
    let one = sweep(1);
    assert!(one.passed());
    assert_eq!(one, sweep(4));
    assert_eq!(one, sweep(7));
}
