//! Property tests for the quantified invariants: exact algebraic identities
//! over random rational instances, and round trips of every codec.

use proptest::prelude::*;

use cptp_core::builder::{
    build_homogeneous_cptp, build_lifting_data, lift_feasible_point, normalization_split,
};
use cptp_core::formats::{
    parse_polynomial, parse_problem, parse_tensor, serialize_polynomial, serialize_problem,
    serialize_tensor,
};
use cptp_core::poly::{embed_tensor, polynomial_from_homogeneous_tensor, Polynomial};
use cptp_core::pop::{
    brute_force_solve, FeasibleSet, FiniteSet, PolyhedralSet, PopInstance, PopKind,
};
use cptp_core::rat::Rat;
use cptp_core::tensor::{
    adjoint_pairing_check, canonical_indices, DenseMatrix, MultiIndex, SymmetricTensor,
};

use num_traits::{One, Zero};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=6).prop_map(|(num, den)| Rat::new(num.into(), den.into()))
}

fn arb_nonneg_rat() -> impl Strategy<Value = Rat> {
    (0i64..=40, 1i64..=6).prop_map(|(num, den)| Rat::new(num.into(), den.into()))
}

fn arb_rat_vec(len: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(arb_rat(), len)
}

fn arb_symmetric_tensor(order: usize, dim: usize) -> impl Strategy<Value = SymmetricTensor> {
    let orbits = canonical_indices(dim, order);
    prop::collection::vec(arb_rat(), orbits.len()).prop_map(move |values| {
        SymmetricTensor::from_entries(order, dim, orbits.iter().cloned().zip(values)).unwrap()
    })
}

fn arb_polynomial(nvars: usize, degree: usize) -> impl Strategy<Value = Polynomial> {
    let exps = prop::collection::vec(0usize..=degree, nvars)
        .prop_filter("bounded total degree", move |e| {
            e.iter().sum::<usize>() <= degree
        });
    prop::collection::vec((exps, arb_rat()), 1..6)
        .prop_map(move |terms| Polynomial::from_terms(nvars, terms).unwrap())
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn power(base: &Rat, exp: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_one_inner_equals_dot_power(
        (dim, order) in (1usize..=5, 1usize..=4),
        seed in any::<u64>(),
    ) {
        let mut rng = cptp_core::rat::SplitMix64::new(seed);
        let x: Vec<Rat> = (0..dim).map(|_| rng.small_rat(6)).collect();
        let y: Vec<Rat> = (0..dim).map(|_| rng.small_rat(6)).collect();
        let mx = SymmetricTensor::rank_one_power(&x, order).unwrap();
        let my = SymmetricTensor::rank_one_power(&y, order).unwrap();
        prop_assert_eq!(mx.inner(&my).unwrap(), power(&dot(&x, &y), order));
    }

    #[test]
    fn mode_product_of_rank_one_is_rank_one_of_image(
        x in arb_rat_vec(3),
        rows in prop::collection::vec(arb_rat_vec(3), 1..=4),
        order in 1usize..=3,
    ) {
        let m = DenseMatrix::from_rows(rows).unwrap();
        let t = SymmetricTensor::rank_one_power(&x, order).unwrap();
        let image = t.mode_multiply_uniform(&m).unwrap();
        let expected =
            SymmetricTensor::rank_one_power(&m.mul_vec(&x).unwrap(), order).unwrap();
        prop_assert_eq!(image, expected);
    }

    #[test]
    fn entries_are_permutation_invariant(
        t in arb_symmetric_tensor(3, 4),
        index in prop::collection::vec(0usize..4, 3),
        swap in (0usize..3, 0usize..3),
    ) {
        let mut permuted = index.clone();
        permuted.swap(swap.0, swap.1);
        prop_assert_eq!(t.entry(&index).unwrap(), t.entry(&permuted).unwrap());
    }

    #[test]
    fn adjoint_identity_holds(
        (order, image_dim, source_dim) in (1usize..=4, 1usize..=5, 1usize..=5),
        seed in any::<u64>(),
    ) {
        let mut rng = cptp_core::rat::SplitMix64::new(seed);
        let x = SymmetricTensor::from_entries(
            order,
            image_dim,
            canonical_indices(image_dim, order)
                .into_iter()
                .map(|idx| (idx, rng.small_rat(5))),
        )
        .unwrap();
        let a = SymmetricTensor::from_entries(
            order,
            source_dim,
            canonical_indices(source_dim, order)
                .into_iter()
                .map(|idx| (idx, rng.small_rat(5))),
        )
        .unwrap();
        let m = DenseMatrix::new(
            image_dim,
            source_dim,
            (0..image_dim * source_dim).map(|_| rng.small_rat(4)).collect(),
        )
        .unwrap();
        prop_assert!(adjoint_pairing_check(&x, &a, &m).unwrap());
    }

    #[test]
    fn orbit_sums_scale_by_multiplicity(
        t in arb_symmetric_tensor(3, 3),
        index in prop::collection::vec(0usize..3, 3),
    ) {
        // sum over all 27 tuples whose multiset matches the index
        let key = {
            let mut sorted = index.clone();
            sorted.sort_unstable();
            sorted
        };
        let mut orbit_sum = Rat::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let tuple = vec![i, j, k];
                    let mut sorted = tuple.clone();
                    sorted.sort_unstable();
                    if sorted == key {
                        orbit_sum += t.entry(&tuple).unwrap();
                    }
                }
            }
        }
        let multiplicity = Rat::from_integer(MultiIndex::new(key.clone()).orbit_multiplicity());
        prop_assert_eq!(orbit_sum, multiplicity * t.entry(&key).unwrap());
    }

    #[test]
    fn evaluation_identities_hold(
        f in arb_polynomial(3, 3),
        x in arb_rat_vec(3),
    ) {
        let order = f.degree().max(1);
        let tensor = f.coefficient_tensor(order).unwrap();

        let mut lifted = vec![Rat::one()];
        lifted.extend(x.iter().cloned());
        let pairing = tensor
            .inner(&SymmetricTensor::rank_one_power(&lifted, order).unwrap())
            .unwrap();
        prop_assert_eq!(pairing, f.evaluate(&x).unwrap());

        let mut top_lift = vec![Rat::zero()];
        top_lift.extend(x.iter().cloned());
        let top_pairing = tensor
            .inner(&SymmetricTensor::rank_one_power(&top_lift, order).unwrap())
            .unwrap();
        let top_value = f
            .decompose()
            .part(order)
            .map(|p| p.evaluate(&x).unwrap())
            .unwrap_or_else(Rat::zero);
        prop_assert_eq!(top_pairing, top_value);
    }

    #[test]
    fn coefficient_orbits_reconstruct_coefficients(f in arb_polynomial(3, 3)) {
        let order = f.degree().max(1);
        let tensor = f.coefficient_tensor(order).unwrap();
        for (exps, coeff) in f.terms() {
            let total: usize = exps.iter().sum();
            let mut index = vec![0usize; order - total];
            for (var, &e) in exps.iter().enumerate() {
                index.extend(std::iter::repeat_n(var + 1, e));
            }
            let key = MultiIndex::new(index.clone());
            let stored = tensor.entry(&index).unwrap();
            let multiplicity = Rat::from_integer(key.orbit_multiplicity());
            prop_assert_eq!(multiplicity * stored, coeff.clone());
        }
    }

    #[test]
    fn homogeneous_tensor_round_trips(t in arb_symmetric_tensor(3, 3)) {
        let poly = polynomial_from_homogeneous_tensor(&t).unwrap();
        if !poly.is_zero() {
            prop_assert_eq!(poly.homogeneous_tensor().unwrap(), t);
        }
    }

    #[test]
    fn decomposition_recombines(f in arb_polynomial(4, 4)) {
        let parts = f.decompose();
        for (degree, part) in parts.parts().iter().enumerate() {
            if !part.is_zero() {
                prop_assert!(part.is_homogeneous());
                prop_assert_eq!(part.degree(), degree);
            }
        }
        prop_assert_eq!(parts.recombine(), f);
    }

    #[test]
    fn embedding_preserves_pairings(
        t in arb_symmetric_tensor(2, 3),
        x in arb_rat_vec(3),
        pad in 1usize..=3,
    ) {
        let embedded = embed_tensor(&t, 3 + pad).unwrap();
        let mut padded_x = x.clone();
        padded_x.extend(std::iter::repeat_n(Rat::zero(), pad));
        let lhs = embedded
            .inner(&SymmetricTensor::rank_one_power(&padded_x, 2).unwrap())
            .unwrap();
        let rhs = t
            .inner(&SymmetricTensor::rank_one_power(&x, 2).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn finite_brute_force_is_exact_enumeration(
        points in prop::collection::btree_set(
            prop::collection::vec((-8i64..=8, 1i64..=3), 2),
            1..6,
        ),
        f in arb_polynomial(2, 3),
    ) {
        let mut points: Vec<Vec<Rat>> = points
            .into_iter()
            .map(|p| p.into_iter().map(|(n, d)| Rat::new(n.into(), d.into())).collect())
            .collect();
        // distinct (num, den) pairs can reduce to the same rational
        points.sort();
        points.dedup();
        let set = FiniteSet::new(points.clone()).unwrap();
        let instance = PopInstance::new(
            f.clone(),
            FeasibleSet::Finite(set),
            PopKind::Inhomogeneous,
        )
        .unwrap();
        let result = brute_force_solve(&instance, 1, None).unwrap();
        let direct = points
            .iter()
            .map(|p| f.evaluate(p).unwrap())
            .min()
            .unwrap();
        prop_assert_eq!(result.value, direct);
        prop_assert!(result.exact);
    }

    #[test]
    fn zero_alpha_is_always_certified(
        rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 2), 0..3),
        rhs in prop::collection::vec(0i64..=4, 3),
    ) {
        let m = rows.len();
        let b_matrix = DenseMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Rat::from_integer_i64).collect())
                .collect::<Vec<Vec<Rat>>>(),
        )
        .unwrap();
        let b_matrix = if m == 0 { DenseMatrix::zeros(0, 2) } else { b_matrix };
        let b_rhs: Vec<Rat> = rhs.into_iter().take(m).map(Rat::from_integer_i64).collect();
        let set = PolyhedralSet::new(b_matrix, b_rhs).unwrap();
        prop_assert!(set.alpha_certificate(&[Rat::zero(), Rat::zero()]).unwrap());
    }

    #[test]
    fn recession_cone_closed_under_scaling(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 0..3),
        weights in prop::collection::vec(arb_nonneg_rat(), 4),
        scale in arb_nonneg_rat(),
    ) {
        let m = rows.len();
        let b_matrix = if m == 0 {
            DenseMatrix::zeros(0, 2)
        } else {
            DenseMatrix::from_rows(
                rows.into_iter()
                    .map(|r| r.into_iter().map(Rat::from_integer_i64).collect())
                    .collect::<Vec<Vec<Rat>>>(),
            )
            .unwrap()
        };
        let set = PolyhedralSet::new(b_matrix, vec![Rat::zero(); m]).unwrap();
        let cone = set.recession_cone();
        prop_assert!(cone.contains(&[Rat::zero(), Rat::zero()]).unwrap());

        let rays = cone.extreme_rays().unwrap();
        if !rays.is_empty() {
            let mut member = vec![Rat::zero(); 2];
            for (ray, weight) in rays.iter().zip(&weights) {
                for (slot, component) in member.iter_mut().zip(ray) {
                    *slot += weight * component;
                }
            }
            prop_assert!(cone.contains(&member).unwrap());
            let scaled: Vec<Rat> = member.iter().map(|v| v * &scale).collect();
            prop_assert!(cone.contains(&scaled).unwrap());
        }
    }

    #[test]
    fn normalization_split_reconstructs_generators(
        generators in prop::collection::vec(
            prop::collection::vec((0i64..=6, 1i64..=3), 3),
            1..5,
        ),
        order in 1usize..=3,
    ) {
        let generators: Vec<Vec<Rat>> = generators
            .into_iter()
            .map(|g| g.into_iter().map(|(n, d)| Rat::new(n.into(), d.into())).collect())
            .collect();
        let normalizer = vec![Rat::one(), Rat::one(), Rat::one()];
        let split = normalization_split(&generators, &normalizer, order).unwrap();
        let mut direct = SymmetricTensor::zero(order, 3).unwrap();
        for g in &generators {
            direct = direct
                .add(&SymmetricTensor::rank_one_power(g, order).unwrap())
                .unwrap();
        }
        prop_assert_eq!(split.reconstruct().unwrap(), direct);
    }

    #[test]
    fn tensor_text_round_trips(t in arb_symmetric_tensor(3, 3)) {
        let text = serialize_tensor(&t);
        let parsed = parse_tensor(&text).unwrap();
        prop_assert_eq!(&parsed, &t);
        prop_assert_eq!(serialize_tensor(&parsed), text);
    }

    #[test]
    fn polynomial_text_round_trips(f in arb_polynomial(3, 4)) {
        let text = serialize_polynomial(&f);
        let parsed = parse_polynomial(&text, Some(3)).unwrap();
        prop_assert_eq!(parsed, f);
    }

    #[test]
    fn problem_json_round_trips(
        f in arb_polynomial(2, 2),
        rhs in prop::collection::vec(0i64..=4, 1),
    ) {
        let set = PolyhedralSet::new(
            DenseMatrix::from_rows(vec![vec![Rat::one(), Rat::one()]]).unwrap(),
            rhs.into_iter().map(Rat::from_integer_i64).collect(),
        )
        .unwrap();
        let instance = PopInstance::new(
            f,
            FeasibleSet::Polyhedral(set),
            PopKind::Inhomogeneous,
        )
        .unwrap();
        let text = serialize_problem(&instance);
        prop_assert_eq!(parse_problem(&text).unwrap(), instance);
    }
}

proptest! {
    // heavier end-to-end property: reformulation preserves objective values
    // on random feasible points of random bounded sets
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifted_atoms_preserve_objective_values(
        coeff in arb_rat(),
        cross in arb_rat(),
        rhs in 1i64..=3,
        weight_a in 0i64..=8,
        weight_b in 0i64..=8,
    ) {
        // homogeneous quadratic over a scaled simplex
        let objective = Polynomial::from_terms(
            2,
            vec![(vec![2, 0], coeff), (vec![1, 1], cross)],
        )
        .unwrap();
        if objective.is_zero() {
            return Ok(());
        }
        let set = PolyhedralSet::new(
            DenseMatrix::from_rows(vec![vec![Rat::one(), Rat::one()]]).unwrap(),
            vec![Rat::from_integer_i64(rhs)],
        )
        .unwrap();
        let instance = PopInstance::new(
            objective.clone(),
            FeasibleSet::Polyhedral(set.clone()),
            PopKind::Homogeneous,
        )
        .unwrap();
        let data = build_lifting_data(&instance, &[Rat::zero(), Rat::zero()], 1).unwrap();
        let program = build_homogeneous_cptp(&instance, &data).unwrap();

        // a random convex combination of (rhs, 0) and (0, rhs), scaled in
        let denom = Rat::from_integer_i64(16);
        let a = Rat::from_integer_i64(weight_a * rhs) / &denom;
        let b = Rat::from_integer_i64(weight_b * rhs) / &denom;
        let x = vec![a, b];
        prop_assert!(set.is_feasible(&x).unwrap());
        let lifted = lift_feasible_point(&set, &x, &data).unwrap();
        let atom = SymmetricTensor::rank_one_power(&lifted, 2).unwrap();
        prop_assert_eq!(
            program.objective.inner(&atom).unwrap(),
            objective.evaluate(&x).unwrap()
        );
        for (constraint, value) in &program.eq_constraints {
            prop_assert_eq!(&constraint.inner(&atom).unwrap(), value);
        }
        for map in &program.membership_maps {
            for residual in map.mul_vec(&lifted).unwrap() {
                prop_assert!(residual >= Rat::zero());
            }
        }
    }
}

/// Small helper so integer literals read cleanly above.
trait FromI64 {
    fn from_integer_i64(v: i64) -> Rat;
}

impl FromI64 for Rat {
    fn from_integer_i64(v: i64) -> Rat {
        Rat::from_integer(v.into())
    }
}
