mod common;

use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tnkit::contract::{contract_pair, pair_cost, PairContraction};
use tnkit::netcon::{
    contract_network, search_sequence, ContractionTree, Method, Nested, NetworkSpec, SequenceCache, TensorSlot,
};
use tnkit::tensor::strides;
use tnkit::{DenseTensor, C64};

#[test]
fn random_networks_match_explicit_summation() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..60 {
        let n = rng.gen_range(1..=5);
        let net = random_network(&mut rng, n, &[1, 2, 3], case % 2 == 0, case % 3 != 0);
        let got = contract_network(&net.spec, &net.tensors, None).unwrap();
        let want = brute_force(&net.spec, &net.tensors);
        assert_eq!(got.shape(), want.shape(), "case {case}");
        worst = worst.max(rel_err(&got, &want));
        // every method and a few forced trees agree
        let greedy = search_sequence(&net.spec, Method::Greedy).unwrap();
        let alt = contract_network(&net.spec, &net.tensors, Some(&greedy)).unwrap();
        worst = worst.max(rel_err(&alt, &want));
    }
    assert!(worst <= 1e-12, "{worst}");
}

/// Contraction by nested loops, counting multiply-accumulates.
fn loop_contract(a: &DenseTensor, b: &DenseTensor, pc: &PairContraction) -> (Vec<C64>, u64) {
    let fa: Vec<usize> = (0..a.order()).filter(|i| !pc.a_axes.contains(i)).collect();
    let fb: Vec<usize> = (0..b.order()).filter(|i| !pc.b_axes.contains(i)).collect();
    let free: Vec<usize> = fa.iter().map(|&i| a.shape()[i]).chain(fb.iter().map(|&j| b.shape()[j])).collect();
    let shared: Vec<usize> = pc.a_axes.iter().map(|&i| a.shape()[i]).collect();
    let count = |s: &[usize]| s.iter().product::<usize>();
    let (nf, ns) = (count(&free), count(&shared));
    let (sf, ss) = (strides(&free), strides(&shared));
    let mut out = Vec::with_capacity(nf);
    let mut macs = 0u64;
    for f in 0..nf {
        let fi: Vec<usize> = (0..free.len()).map(|k| f / sf[k] % free[k]).collect();
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..ns {
            let si: Vec<usize> = (0..shared.len()).map(|k| s / ss[k] % shared[k]).collect();
            let mut ia = vec![0; a.order()];
            let mut ib = vec![0; b.order()];
            for (k, &ax) in fa.iter().enumerate() {
                ia[ax] = fi[k];
            }
            for (k, &ax) in fb.iter().enumerate() {
                ib[ax] = fi[fa.len() + k];
            }
            for (k, (&x, &y)) in pc.a_axes.iter().zip(&pc.b_axes).enumerate() {
                ia[x] = si[k];
                ib[y] = si[k];
            }
            acc += a.get(&ia).unwrap() * b.get(&ib).unwrap();
            macs += 1;
        }
        out.push(acc);
    }
    (out, macs)
}

#[test]
fn pair_cost_counts_loop_multiplications() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let shared = rng.gen_range(0..=2);
        let fa = rng.gen_range(0..=2);
        let fb = rng.gen_range(0..=2);
        let sd: Vec<usize> = (0..shared).map(|_| rng.gen_range(1..=4)).collect();
        let mut sa: Vec<usize> = (0..fa).map(|_| rng.gen_range(1..=4)).chain(sd.clone()).collect();
        let mut sb: Vec<usize> = sd.iter().copied().chain((0..fb).map(|_| rng.gen_range(1..=4))).collect();
        if sa.is_empty() {
            sa.push(2);
        }
        if sb.is_empty() {
            sb.push(3);
        }
        let pc = PairContraction::new((fa..fa + shared).collect(), (0..shared).collect());
        let a = random_tensor(&mut rng, sa.clone(), true);
        let b = random_tensor(&mut rng, sb.clone(), false);
        let (values, macs) = loop_contract(&a, &b, &pc);
        assert_eq!(pair_cost(&sa, &sb, &pc).unwrap(), macs);
        let got = contract_pair(&a, &b, &pc).unwrap();
        for (x, y) in got.data().iter().zip(&values) {
            assert!((x - y).norm() <= 1e-13);
        }
    }
}

fn mmv(chi: usize) -> NetworkSpec {
    NetworkSpec::new(vec![
        TensorSlot::new("A", vec![chi, chi], vec![-1, 1]),
        TensorSlot::new("B", vec![chi, chi], vec![1, 2]),
        TensorSlot::new("C", vec![chi], vec![2]),
    ])
}

#[test]
fn mmv_costs() {
    let spec = mmv(10);
    let tree = search_sequence(&spec, Method::Dp).unwrap();
    assert_eq!(tree.to_nested(), Nested::pair(Nested::leaf("A"), Nested::pair(Nested::leaf("B"), Nested::leaf("C"))));
    assert_eq!(tree.total_cost(), 200);
    let forced = Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("B")), Nested::leaf("C"));
    assert_eq!(ContractionTree::annotate(&spec, &forced).unwrap().total_cost(), 1100);
}

#[test]
fn dp_matches_exhaustive_enumeration() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..25 {
        let net = random_network(&mut rng, 6, &[2, 3, 4], false, true);
        let dp = search_sequence(&net.spec, Method::Dp).unwrap();
        let greedy = search_sequence(&net.spec, Method::Greedy).unwrap();
        assert_eq!(dp.total_cost(), exhaustive_min_cost(&net.spec));
        assert!(greedy.total_cost() >= dp.total_cost());
        assert_eq!(dp.step_costs().iter().sum::<u64>(), dp.total_cost());
    }
}

#[test]
fn cache_reuses_until_dimensions_drift() {
    let cache = SequenceCache::default();
    let chain = |a: usize| {
        NetworkSpec::new(vec![
            TensorSlot::new("A", vec![a, 10], vec![-1, 1]),
            TensorSlot::new("B", vec![10, 10], vec![1, 2]),
            TensorSlot::new("C", vec![10, 20], vec![2, -2]),
        ])
    };
    let first = cache.cached_sequence(&chain(10)).unwrap();
    assert_eq!(first.to_nested(), Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("B")), Nested::leaf("C")));
    cache.cached_sequence(&chain(15)).unwrap();
    assert_eq!(cache.searches(), 1);
    let flipped = cache.cached_sequence(&chain(100)).unwrap();
    assert_eq!(cache.searches(), 2);
    assert_eq!(flipped.to_nested(), Nested::pair(Nested::leaf("A"), Nested::pair(Nested::leaf("B"), Nested::leaf("C"))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_inverse_round_trips(dims in proptest::collection::vec(1usize..4, 1..5), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, dims.clone(), true);
        let mut perm: Vec<usize> = (0..dims.len()).collect();
        for k in (1..perm.len()).rev() {
            perm.swap(k, rng.gen_range(0..=k));
        }
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let back = t.permute(&perm).unwrap().permute(&inv).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn contraction_is_input_order_invariant(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(2..=5);
        let net = random_network(&mut rng, n, &[2, 3], false, true);
        let mut shuffled = net.spec.clone();
        shuffled.tensors.reverse();
        let a = search_sequence(&net.spec, Method::Dp).unwrap();
        let b = search_sequence(&shuffled, Method::Dp).unwrap();
        prop_assert_eq!(a.to_nested(), b.to_nested());
        let x = contract_network(&net.spec, &net.tensors, None).unwrap();
        let y = contract_network(&shuffled, &net.tensors, None).unwrap();
        prop_assert!(rel_err(&x, &y) < 1e-13);
    }
}
