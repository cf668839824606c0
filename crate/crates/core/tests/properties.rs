use imin_core::baselines::{ag, gr, mc_greedy};
use imin_core::fixtures::{self, Fixture};
use imin_core::optimize::{gsbm, lsbm, max_coverage, AlgoParams};
use imin_core::oracle::{Objective, Oracle};
use imin_core::sampling::{compute_population, coverage_cp, coverage_lrr, CpCollection, LrrCollection};
use imin_core::sandwich::ratio_formula;
use imin_core::{BlockerSet, NodeId, SeedSet, SeedStream};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny(seed: u64, n: usize, m: usize, seeds: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fixtures::random_tiny(&mut rng, n, m, seeds, &[0.3, 0.6, 1.0])
}

fn arb_fixture() -> impl Strategy<Value = Fixture> {
    (any::<u64>(), 4usize..9, 3usize..13, 1usize..3).prop_map(|(s, n, m, k)| tiny(s, n, m, k.min(n - 1)))
}

fn set(mask: usize, c: &[NodeId]) -> Vec<NodeId> {
    (0..c.len()).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_spread_never_grows(f in arb_fixture()) {
        let g = f.unified();
        let o = Oracle::new(&g).unwrap();
        let c = o.candidates().to_vec();
        let sets: Vec<Vec<NodeId>> = (0..1usize << c.len()).map(|m| set(m, &c)).collect();
        let vals = o.evaluate(&sets).unwrap();
        for mask in 0..sets.len() {
            for v in 0..c.len() {
                let bigger = mask | 1 << v;
                prop_assert!(vals[bigger].residual <= vals[mask].residual + 1e-9);
            }
        }
    }

    #[test]
    fn unification_preserves_decrease(f in arb_fixture()) {
        let seeds = SeedSet::new(f.seeds.iter().copied(), f.graph.n()).unwrap();
        let multi = Oracle::multi_seed(&f.graph, &seeds).unwrap();
        let unified = Oracle::new(&f.unified()).unwrap();
        let sets = unified.subsets(2);
        let a = multi.evaluate(&sets).unwrap();
        let b = unified.evaluate(&sets).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.decrease - y.decrease).abs() < 1e-9);
            prop_assert!((x.residual - y.residual).abs() < 1e-9);
        }
    }

    #[test]
    fn bounds_bracket_the_decrease(f in arb_fixture()) {
        let g = f.unified();
        let o = Oracle::new(&g).unwrap();
        for e in o.evaluate(&o.subsets(3)).unwrap() {
            prop_assert!(e.lower <= e.decrease + 1e-9 && e.decrease <= e.upper + 1e-9);
        }
    }

    #[test]
    fn coverage_is_monotone_and_submodular(f in arb_fixture(), seed in any::<u64>()) {
        let g = f.unified();
        let c: Vec<NodeId> = g.candidates().collect();
        let mut stream = SeedStream::new(seed);
        let cp = CpCollection::generate(&g, 30, &mut stream.fork());
        let population = compute_population(&g);
        let lrr = (!population.is_empty())
            .then(|| LrrCollection::generate(&g, &population, 30, &mut stream.fork()).unwrap());
        let cov = |mask: usize| {
            let b = BlockerSet::new(set(mask, &c)).unwrap();
            (coverage_cp(&cp, &b), lrr.as_ref().map_or(0, |l| coverage_lrr(l, &b)))
        };
        let all: Vec<(u64, u64)> = (0..1usize << c.len()).map(cov).collect();
        for t in 0..all.len() {
            let mut b = t;
            loop {
                for x in 0..c.len() {
                    if t >> x & 1 == 1 {
                        continue;
                    }
                    let (bx, tx) = (all[b | 1 << x], all[t | 1 << x]);
                    prop_assert!(bx.0 >= all[b].0 && bx.1 >= all[b].1);
                    prop_assert!(bx.0 - all[b].0 >= tx.0 - all[t].0);
                    prop_assert!(bx.1 - all[b].1 >= tx.1 - all[t].1);
                }
                if b == 0 {
                    break;
                }
                b = (b - 1) & t;
            }
        }
    }

    #[test]
    fn greedy_coverage_is_within_one_minus_inverse_e(f in arb_fixture(), seed in any::<u64>(), k in 1usize..4) {
        let g = f.unified();
        let c: Vec<NodeId> = g.candidates().collect();
        let cp = CpCollection::generate(&g, 40, &mut SeedStream::new(seed));
        let greedy = max_coverage(&cp, &c, k).coverage as f64;
        let best = (0..1usize << c.len())
            .filter(|m: &usize| m.count_ones() as usize <= k)
            .map(|m| coverage_cp(&cp, &BlockerSet::new(set(m, &c)).unwrap()))
            .max()
            .unwrap() as f64;
        prop_assert!(greedy >= (1.0 - 1.0 / std::f64::consts::E) * best - 1e-9);
    }

    #[test]
    fn ratio_stays_in_unit_interval(g in 0.01f64..0.99, e in 0.01f64..0.6, d in -5.0f64..50.0, u in -1.0f64..50.0) {
        let r = ratio_formula(g, e, d, u);
        prop_assert!((0.0..=1.0).contains(&r));
        if u > 0.0 && d > 0.0 {
            prop_assert!(r > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn maximizers_are_deterministic(f in arb_fixture(), seed in any::<u64>()) {
        let g = f.unified();
        prop_assume!(!compute_population(&g).is_empty());
        let params = AlgoParams { k: 2, epsilon: 0.3, delta: 0.2, beta: 0.1, gamma: 0.1 };
        let a = lsbm(&g, &params, &mut SeedStream::new(seed)).unwrap();
        let b = lsbm(&g, &params, &mut SeedStream::new(seed)).unwrap();
        prop_assert_eq!(&a.blockers, &b.blockers);
        prop_assert_eq!(a.certificate.samples, b.certificate.samples);
        let a = gsbm(&g, &params, &mut SeedStream::new(seed)).unwrap();
        let b = gsbm(&g, &params, &mut SeedStream::new(seed)).unwrap();
        prop_assert_eq!(&a.blockers, &b.blockers);
        prop_assert_eq!(a.certificate.samples, b.certificate.samples);
    }

    #[test]
    fn baselines_never_beat_the_optimum(f in arb_fixture(), seed in any::<u64>()) {
        let g = f.unified();
        let o = Oracle::new(&g).unwrap();
        let (_, best) = o.optimal_blockers(2, Objective::Decrease).unwrap();
        let mut s = SeedStream::new(seed);
        for b in [
            ag(&g, 2, 200, &mut s.fork()).unwrap(),
            gr(&g, 2, 200, &mut s.fork()).unwrap(),
            mc_greedy(&g, 2, 200, &mut s.fork()).unwrap(),
        ] {
            prop_assert!(b.len() <= 2);
            prop_assert!(o.exact(b.as_slice()).unwrap().decrease <= best + 1e-9);
        }
    }
}
