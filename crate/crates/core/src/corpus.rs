//! Seeded instance generators. All randomness in the crate flows through
//! these functions; the algorithms themselves are deterministic.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bourgain::BourgainSystem;
use crate::decompose::CosetPiece;
use crate::group::{Domain, Group, GroupFunction, Subgroup};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The fixed family used by the transform checks.
pub fn fourier_groups() -> Vec<Group> {
    vec![
        Group::cyclic(8),
        Group::cyclic(12),
        Group::new(vec![2, 8]).unwrap(),
        Group::new(vec![3, 9]).unwrap(),
        Group::cyclic(128),
    ]
}

/// Uniform complex values in the unit box.
pub fn random_function(group: &Group, rng: &mut ChaCha8Rng) -> GroupFunction {
    let values: Vec<Complex64> = (0..group.size())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GroupFunction::new(group.clone(), values, Domain::Primal).unwrap()
}

/// Groups of size at most `max_size` with one or two cyclic factors.
pub fn random_group(rng: &mut ChaCha8Rng, max_size: usize) -> Group {
    if rng.gen_bool(0.5) {
        Group::cyclic(rng.gen_range(4..=max_size))
    } else {
        let a = rng.gen_range(2..=16usize);
        let b_max = (max_size / a).max(2);
        let b = rng.gen_range(2..=b_max);
        Group::new(vec![a, b]).unwrap()
    }
}

/// A Bohr system with up to `k_max` distinct nonzero characters and widths
/// in (0, 1].
pub fn random_bohr_system(group: &Group, rng: &mut ChaCha8Rng, k_max: usize) -> BourgainSystem {
    let k = rng.gen_range(1..=k_max);
    let mut gammas: Vec<usize> = Vec::new();
    while gammas.len() < k {
        let gamma = rng.gen_range(1..group.size());
        if !gammas.contains(&gamma) {
            gammas.push(gamma);
        }
    }
    let kappas: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..=1.0)).collect();
    BourgainSystem::bohr_system(group, &gammas, &kappas).unwrap()
}

/// A random subgroup: the closure of up to two random elements (possibly
/// trivial).
pub fn random_subgroup(group: &Group, rng: &mut ChaCha8Rng) -> Subgroup {
    let n_gens = rng.gen_range(0..=2usize);
    let gens: Vec<usize> = (0..n_gens).map(|_| rng.gen_range(0..group.size())).collect();
    if gens.is_empty() {
        Subgroup::trivial(group)
    } else {
        Subgroup::closure(group, &gens).unwrap()
    }
}

/// A signed sum of at most `max_pieces` coset indicators, returned with its
/// witness pieces. The algebra norm is at most the piece count.
pub fn random_coset_sum(
    group: &Group,
    rng: &mut ChaCha8Rng,
    max_pieces: usize,
) -> (GroupFunction, Vec<CosetPiece>) {
    let n = rng.gen_range(1..=max_pieces);
    let mut f = GroupFunction::zero(group.clone(), Domain::Primal);
    let mut pieces = Vec::with_capacity(n);
    for _ in 0..n {
        let subgroup = random_subgroup(group, rng);
        let rep = subgroup.coset_rep(rng.gen_range(0..group.size()));
        let sign: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let ind = subgroup.coset_indicator(rep).scaled(sign as f64);
        f = f.add_fn(&ind).unwrap();
        pieces.push(CosetPiece {
            sign,
            rep,
            subgroup,
        });
    }
    (f, pieces)
}

/// Adds a real perturbation with total pointwise mass at most `budget`,
/// which also bounds the algebra-norm shift by `budget`.
pub fn perturb(f: &GroupFunction, rng: &mut ChaCha8Rng, budget: f64) -> GroupFunction {
    let n = f.group().size();
    let per_point = budget / n as f64;
    let mut g = f.clone();
    for v in g.values_mut() {
        v.re += rng.gen_range(-per_point..per_point);
    }
    g
}

/// Structured sets for the dense-path checks: subgroups, intervals, and
/// unions of two cosets of one subgroup.
pub fn structured_sets(group: &Group, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let h = random_subgroup(group, rng);
    out.push(h.elements().to_vec());
    // an interval in the first cyclic factor
    let len = rng.gen_range(1..=group.orders()[0]);
    let start = rng.gen_range(0..group.orders()[0]);
    let mut interval = Vec::new();
    for i in 0..len {
        let mut coords = vec![0usize; group.orders().len()];
        coords[0] = (start + i) % group.orders()[0];
        interval.push(group.index(&coords));
    }
    interval.sort_unstable();
    interval.dedup();
    out.push(interval);
    // union of two cosets of a common subgroup
    let h2 = random_subgroup(group, rng);
    let r1 = rng.gen_range(0..group.size());
    let r2 = rng.gen_range(0..group.size());
    let mut union: Vec<usize> = h2
        .elements()
        .iter()
        .flat_map(|&x| [group.add(r1, x), group.add(r2, x)])
        .collect();
    union.sort_unstable();
    union.dedup();
    out.push(union);
    out
}

/// A random nonempty subset of the group with at most `max_size` elements.
pub fn random_subset(group: &Group, rng: &mut ChaCha8Rng, max_size: usize) -> Vec<usize> {
    let size = rng.gen_range(1..=max_size.min(group.size()));
    let mut set: Vec<usize> = Vec::new();
    while set.len() < size {
        let x = rng.gen_range(0..group.size());
        if !set.contains(&x) {
            set.push(x);
        }
    }
    set.sort_unstable();
    set
}
