//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::rngs::StdRng;
use rand::Rng;
use tnkit::netcon::{NetworkSpec, TensorSlot};
use tnkit::{DenseTensor, ScalarKind, C64};

pub fn random_tensor(rng: &mut StdRng, shape: Vec<usize>, complex: bool) -> DenseTensor {
    let n: usize = shape.iter().product();
    if complex {
        let data = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        DenseTensor::from_complex(shape, data).unwrap()
    } else {
        DenseTensor::from_real(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }
}

pub struct RandomNet {
    pub spec: NetworkSpec,
    pub tensors: HashMap<String, DenseTensor>,
}

/// Random ncon network: a spanning tree of bonds (when `connected`), extra
/// bonds that may close loops, occasional trace lines and a few open legs.
pub fn random_network(rng: &mut StdRng, n: usize, dims: &[usize], complex: bool, connected: bool) -> RandomNet {
    let mut legs: Vec<Vec<i64>> = vec![Vec::new(); n];
    let mut dim_of: BTreeMap<i64, usize> = BTreeMap::new();
    let mut next = 1i64;
    let mut bond = |legs: &mut Vec<Vec<i64>>, a: usize, b: usize, rng: &mut StdRng| {
        let l = next;
        next += 1;
        dim_of.insert(l, dims[rng.gen_range(0..dims.len())]);
        legs[a].push(l);
        legs[b].push(l);
    };
    for i in 1..n {
        if connected || rng.gen_bool(0.6) {
            let j = rng.gen_range(0..i);
            bond(&mut legs, i, j, rng);
        }
    }
    for _ in 0..rng.gen_range(0..=n / 2 + 1) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b || rng.gen_bool(0.3) {
            bond(&mut legs, a, b, rng);
        }
    }
    let opens = rng.gen_range(0..=3usize);
    let mut open_dims = Vec::new();
    for k in 0..opens {
        let t = rng.gen_range(0..n);
        legs[t].push(-(k as i64) - 1);
        open_dims.push(dims[rng.gen_range(0..dims.len())]);
    }
    for l in legs.iter_mut() {
        if l.is_empty() {
            // keep every tensor at order >= 1 with a private trace-free leg pair
            let d = next;
            next += 1;
            dim_of.insert(d, 1);
            l.push(d);
            l.push(d);
        }
    }
    let mut slots = Vec::new();
    let mut tensors = HashMap::new();
    let ids: Vec<String> = (0..n).map(|i| format!("T{i}")).collect();
    for (i, mut labels) in legs.into_iter().enumerate() {
        // shuffle index order
        for k in (1..labels.len()).rev() {
            labels.swap(k, rng.gen_range(0..=k));
        }
        let shape: Vec<usize> = labels.iter().map(|&l| if l > 0 { dim_of[&l] } else { open_dims[(-l - 1) as usize] }).collect();
        let cplx = complex && rng.gen_bool(0.7);
        tensors.insert(ids[i].clone(), random_tensor(rng, shape.clone(), cplx));
        slots.push(TensorSlot::new(ids[i].clone(), shape, labels));
    }
    RandomNet { spec: NetworkSpec::new(slots), tensors }
}

/// Explicit sum over every label assignment.
pub fn brute_force(spec: &NetworkSpec, tensors: &HashMap<String, DenseTensor>) -> DenseTensor {
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    for s in &spec.tensors {
        for (&l, &d) in s.labels.iter().zip(&s.shape) {
            dims.insert(l, d);
        }
    }
    let labels: Vec<i64> = dims.keys().copied().collect();
    let pos: HashMap<i64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut open: Vec<i64> = labels.iter().copied().filter(|&l| l < 0).collect();
    open.sort_by_key(|l| -l);
    let out_shape: Vec<usize> = open.iter().map(|l| dims[l]).collect();
    let out_len: usize = out_shape.iter().product();
    let mut out = vec![C64::new(0.0, 0.0); out_len];
    let mut assign = vec![0usize; labels.len()];
    let extents: Vec<usize> = labels.iter().map(|l| dims[l]).collect();
    loop {
        let mut prod = C64::new(1.0, 0.0);
        for s in &spec.tensors {
            let idx: Vec<usize> = s.labels.iter().map(|l| assign[pos[l]]).collect();
            prod *= tensors[&s.id].get(&idx).unwrap();
        }
        let mut flat = 0;
        for l in &open {
            flat = flat * dims[l] + assign[pos[l]];
        }
        out[flat] += prod;
        let mut k = labels.len();
        loop {
            if k == 0 {
                let kind = if tensors.values().all(|t| t.is_real()) { ScalarKind::Real } else { ScalarKind::Complex };
                let mut t = DenseTensor::from_parts(out_shape, out, ScalarKind::Complex).unwrap();
                if kind == ScalarKind::Real {
                    t = t.realify(f64::INFINITY);
                }
                return t;
            }
            k -= 1;
            assign[k] += 1;
            if assign[k] < extents[k] {
                break;
            }
            assign[k] = 0;
        }
    }
}

/// Minimum total cost over every sequence of pairwise merges, outer
/// products included, by explicit enumeration.
pub fn exhaustive_min_cost(spec: &NetworkSpec) -> u64 {
    let dims = spec.label_dims();
    let items: Vec<Vec<i64>> = spec.tensors.iter().map(|s| s.labels.iter().copied().filter(|&l| s.labels.iter().filter(|&&m| m == l).count() == 1).collect()).collect();
    fn size(legs: &[i64], dims: &BTreeMap<i64, usize>) -> u64 {
        legs.iter().map(|l| dims[l] as u64).product()
    }
    fn go(items: Vec<Vec<i64>>, dims: &BTreeMap<i64, usize>) -> Option<u64> {
        if items.len() == 1 {
            return Some(0);
        }
        let mut best: Option<u64> = None;
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                let shared: Vec<i64> = items[i].iter().copied().filter(|l| items[j].contains(l)).collect();
                let cost = size(&items[i], dims) * size(&items[j], dims) / size(&shared, dims);
                let merged: Vec<i64> = items[i].iter().chain(&items[j]).copied().filter(|l| !shared.contains(l)).collect();
                let mut rest: Vec<Vec<i64>> = items.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, v)| v.clone()).collect();
                rest.push(merged);
                if let Some(c) = go(rest, dims) {
                    best = Some(best.map_or(cost + c, |b| b.min(cost + c)));
                }
            }
        }
        best
    }
    go(items, &dims).expect("connected network")
}

pub fn rel_err(a: &DenseTensor, b: &DenseTensor) -> f64 {
    let d = a.sub(b).unwrap().frobenius_norm();
    let n = b.frobenius_norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}
