//! Property tests for the combinatorial and measure-theoretic invariants.

use num_bigint::BigUint;
use proptest::prelude::*;

use harity::adversaries::{find_clean_subset, random_ramsey_instance, verify_clean_subset};
use harity::dims::{natarajan_dim, ssp_bound, FunctionFamily};
use harity::hypotheses::{decode_pattern, encode_pattern, Hypothesis};
use harity::index::{
    enumerate_injections, enumerate_subsets, factorial, injection_rank, pullback, subset_rank, Injection,
};
use harity::losses::{agnostic_zero_one, empirical_loss_nonpartite, Atoms, OrderChoice};
use harity::reductions::{
    check_reconstruction, departization_count, disintegrate_finite, fill_bottoms, perm_rank, perm_unrank,
    DepartizationRandomness,
};
use harity::templates::Config;
use harity::{q, Setting, Q};

/// A random injection `[k] -> [m]` from a shuffled seed vector.
fn injection(m: usize, k: usize, seed: &[u32]) -> Injection {
    let mut pool: Vec<u32> = (1..=m as u32).collect();
    for (i, &s) in seed.iter().enumerate().take(m) {
        pool.swap(i, i + s as usize % (m - i));
    }
    Injection::new(pool[..k].to_vec()).unwrap()
}

/// A configuration over `[m]` with `sizes[i-1]` values at arity `i`, filled from `raw`.
fn config(m: usize, sizes: &[usize], raw: &[u32]) -> Config {
    let coords = enumerate_subsets(m, sizes.len())
        .iter()
        .enumerate()
        .map(|(i, s)| raw[i % raw.len()] % sizes[s.len() - 1] as u32)
        .collect();
    Config { m, cap: sizes.len(), coords }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_rank_inverts_enumeration(m in 1usize..9, cap in 1usize..4, pick in any::<u64>()) {
        let subsets = enumerate_subsets(m, cap);
        let i = (pick % subsets.len() as u64) as usize;
        prop_assert_eq!(subset_rank(m, subsets[i].members()), i);
    }

    #[test]
    fn injection_rank_inverts_enumeration(m in 1usize..7, k in 1usize..4, seed in prop::collection::vec(any::<u32>(), 7)) {
        prop_assume!(k <= m);
        let a = injection(m, k, &seed);
        prop_assert_eq!(&enumerate_injections(m, k)[injection_rank(m, a.images())], &a);
    }

    #[test]
    fn pullback_is_functorial(
        seed_a in prop::collection::vec(any::<u32>(), 6),
        seed_b in prop::collection::vec(any::<u32>(), 6),
        raw in prop::collection::vec(any::<u32>(), 1..40),
    ) {
        let (m, mid, k) = (6, 4, 2);
        let x = config(m, &[3, 2], &raw);
        let alpha = injection(m, mid, &seed_a);
        let beta = injection(mid, k, &seed_b);
        let lhs = pullback(&beta, &pullback(&alpha, &x).unwrap()).unwrap();
        prop_assert_eq!(lhs, pullback(&alpha.compose(&beta), &x).unwrap());
    }

    #[test]
    fn star_commutes_with_pullback(
        table in prop::collection::vec(0u32..3, 18),
        seed in prop::collection::vec(any::<u32>(), 5),
        raw in prop::collection::vec(any::<u32>(), 1..30),
    ) {
        // F over local points of sizes (3, 3, 2), labels in [3]
        let f = Hypothesis::from_table("F", 2, Setting::NonPartite, vec![3, 3, 2], 3, table);
        let (m, mp) = (5, 3);
        let x = config(m, &[3, 2], &raw);
        let alpha = injection(m, mp, &seed);
        let y = f.star(&x);
        let restricted: Vec<u32> = enumerate_injections(mp, 2)
            .iter()
            .map(|b| y[injection_rank(m, alpha.compose(b).images())])
            .collect();
        prop_assert_eq!(f.star(&pullback(&alpha, &x).unwrap()), restricted);
    }

    #[test]
    fn atoms_match_term_by_term_loss(
        table in prop::collection::vec(0u32..2, 8),
        labels in prop::collection::vec(0u32..2, 20),
        raw in prop::collection::vec(any::<u32>(), 1..20),
    ) {
        let h = Hypothesis::from_table("H", 2, Setting::NonPartite, vec![2, 2, 2], 2, table);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, vec![2, 2, 2]);
        let x = config(5, &[2, 2], &raw);
        let oc = OrderChoice::canonical(5, 2);
        let direct = empirical_loss_nonpartite(&x, &labels, &ell, &h, &oc).unwrap();
        let atoms = Atoms::nonpartite(&x, &labels, 2, &oc, &[2, 2, 2], 2);
        prop_assert_eq!(atoms.loss(&ell, &h), direct);
    }

    #[test]
    fn pattern_codes_roundtrip(p in prop::collection::vec(0u32..4, 0..6)) {
        prop_assert_eq!(decode_pattern(encode_pattern(&p, 4), p.len(), 4), p);
    }

    #[test]
    fn permutation_rank_roundtrip(m in 1usize..8, seed in prop::collection::vec(any::<u32>(), 8)) {
        let sigma = injection(m, m, &seed);
        let r = perm_rank(&sigma);
        prop_assert!(r < BigUint::from(factorial(m)));
        prop_assert_eq!(perm_unrank(m, &r), sigma);
    }

    #[test]
    fn departization_randomness_roundtrip(m in 2usize..4, pick in any::<u64>()) {
        let count = departization_count(m, 2);
        let idx = BigUint::from(pick) % &count;
        prop_assert_eq!(DepartizationRandomness::decode(m, 2, &idx).encode(2), idx);
    }

    #[test]
    fn disintegration_reconstructs(weights in prop::collection::vec(prop::collection::vec(0i64..6, 3), 1..5)) {
        let total: i64 = weights.iter().flatten().sum();
        prop_assume!(total > 0);
        let nu: Vec<Vec<Q>> = weights.iter().map(|r| r.iter().map(|&w| q(w, total)).collect()).collect();
        let (marginal, kernel) = disintegrate_finite(&nu);
        prop_assert!(check_reconstruction(&nu, &marginal, &kernel));
    }

    #[test]
    fn fill_bottoms_removes_every_bottom(
        y in prop::collection::vec(0u32..3, 12),
        fresh in prop::collection::vec(0u32..2, 12),
    ) {
        // labels {0, 1} plus ⊥ = 2 on the 12 injections [2] -> [4]
        let out = fill_bottoms(&y, &fresh, 2, 4, 2, Setting::NonPartite);
        prop_assert!(!out.contains(&2));
        let injections = enumerate_injections(4, 2);
        for (i, alpha) in injections.iter().enumerate() {
            // an entry is refilled iff some injection with the same image carries ⊥
            let touched = injections.iter().zip(&y).any(|(b, &v)| v == 2 && b.image_set() == alpha.image_set());
            prop_assert_eq!(out[i], if touched { fresh[i] } else { y[i] });
        }
    }

    #[test]
    fn natarajan_lemma_bound(
        domain in 1usize..7,
        labels in 2usize..4,
        raw in prop::collection::vec(prop::collection::vec(any::<u32>(), 6), 1..30),
        mask in any::<u32>(),
    ) {
        let fns: Vec<Vec<u32>> = raw.iter().map(|f| f[..domain].iter().map(|v| v % labels as u32).collect()).collect();
        let fam = FunctionFamily::new(domain, labels, fns).unwrap();
        let set: Vec<usize> = (0..domain).filter(|&t| mask >> t & 1 == 1).collect();
        let proj: Vec<Vec<u32>> = fam.restrict(&set).into_iter().collect();
        let n = proj.len();
        let nat = natarajan_dim(&FunctionFamily::new(set.len(), labels, proj).unwrap(), set.len()).value();
        prop_assert!(n as u128 <= ssp_bound(set.len(), nat, labels));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ramsey_search_always_succeeds(n in 1usize..5, seed in any::<u64>()) {
        let (f1, f2) = random_ramsey_instance(n, seed);
        let g = |a: usize, b: usize| f2[a][b];
        let u = find_clean_subset(&f1, &g, n);
        prop_assert!(u.as_ref().is_some_and(|u| u.len() == n && verify_clean_subset(&f1, &g, u)));
    }
}
