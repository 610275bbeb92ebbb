mod common;

use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tnkit::manifest::{self, Network};
use tnkit::netcon::{search_sequence, Method};
use tnkit::{tnt, DenseTensor, ScalarKind, C64};

fn bits(t: &DenseTensor) -> Vec<(u64, u64)> {
    t.data().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tnt_round_trip_is_bit_exact(
        dims in proptest::collection::vec(1usize..5, 0..5),
        complex in any::<bool>(),
        raw in proptest::collection::vec(any::<u64>(), 2 * 4usize.pow(4)),
    ) {
        let n: usize = dims.iter().product();
        let data: Vec<C64> = (0..n)
            .map(|i| C64::new(f64::from_bits(raw[2 * i]), if complex { f64::from_bits(raw[2 * i + 1]) } else { 0.0 }))
            .collect();
        let kind = if complex { ScalarKind::Complex } else { ScalarKind::Real };
        let t = DenseTensor::from_parts(dims.clone(), data, kind).unwrap();
        let mut buf = Vec::new();
        tnt::write_to(&t, &mut buf).unwrap();
        let back = tnt::decode(&buf).unwrap();
        prop_assert_eq!(back.shape(), t.shape());
        prop_assert_eq!(back.kind(), t.kind());
        prop_assert_eq!(bits(&back), bits(&t));
    }
}

#[test]
fn manifests_round_trip() {
    let mut rng = StdRng::seed_from_u64(31);
    let dir = tempfile::tempdir().unwrap();
    for k in 0..20 {
        let n = rng.gen_range(1..=6);
        let net = random_network(&mut rng, n, &[1, 2, 3], k % 2 == 0, k % 4 != 0);
        let mut network = Network::new(net.spec.clone(), net.tensors.clone());
        if k % 3 == 0 {
            network.spec = network.spec.clone().with_sequence(search_sequence(&net.spec, Method::Greedy).unwrap());
        }
        let path = dir.path().join(format!("m{k}/net.json"));
        manifest::save(&network, &path).unwrap();
        let first = manifest::load(&path).unwrap();
        assert_eq!(first.spec, network.spec);
        for (id, t) in &net.tensors {
            assert_eq!(bits(&first.tensors[id]), bits(t));
        }
        manifest::save(&first, &path).unwrap();
        assert_eq!(manifest::load(&path).unwrap().spec, first.spec);
    }
}
