//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Expected values are either frozen exact constants or recomputed by
//! independent brute-force oracles inside the test.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use cptp_core::builder::{
    build_homogeneous_cptp, build_inhomogeneous_cptp, build_lifting_data, dual_homogeneous,
    dual_inhomogeneous, inhomogeneous_atom_vector, lift_feasible_point, solve_lifted_finite,
};
use cptp_core::formats::{parse_problem, parse_tensor};
use cptp_core::oracle::{
    bound_solve, copositive_check, cp_reconstruct, cptp_feasibility_check,
    strict_feasibility_probe, AtomDecomposition, CopositivityStatus,
};
use cptp_core::pipeline::evaluation_identity_holds;
use cptp_core::poly::Polynomial;
use cptp_core::pop::{
    brute_force_solve, recession_growth_check, FeasibleSet, PolyhedralSet, PopInstance, PopKind,
};
use cptp_core::rat::SplitMix64;
use cptp_core::tensor::{adjoint_pairing_check, canonical_indices, DenseMatrix, SymmetricTensor};

type Rat = BigRational;

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

fn rat_int(value: i64) -> Rat {
    Rat::from_integer(value.into())
}

fn rat_vec(values: &[i64]) -> Vec<Rat> {
    values.iter().map(|&v| rat_int(v)).collect()
}

fn samples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn scratch_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cptp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cptp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn criterion(number: u8, name: &str, limit: Option<Duration>, body: impl FnOnce()) {
    let clock = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = clock.elapsed();
    match outcome {
        Ok(()) => {
            if let Some(limit) = limit {
                assert!(
                    elapsed <= limit,
                    "criterion {number} exceeded its runtime limit: {elapsed:?} > {limit:?}"
                );
            }
            println!("[acceptance] criterion {number} ({name}): PASS ({elapsed:?})");
        }
        Err(payload) => {
            println!("[acceptance] criterion {number} ({name}): FAIL");
            resume_unwind(payload);
        }
    }
}

// ---------------------------------------------------------------------------
// shared fixtures

fn bilinear_instance() -> PopInstance {
    parse_problem(&std::fs::read_to_string(samples_dir().join("simplex_bilinear.json")).unwrap())
        .unwrap()
}

fn interval_instance() -> PopInstance {
    parse_problem(&std::fs::read_to_string(samples_dir().join("interval_quadratic.json")).unwrap())
        .unwrap()
}

fn finite_instance() -> PopInstance {
    parse_problem(&std::fs::read_to_string(samples_dir().join("finite_three_points.json")).unwrap())
        .unwrap()
}

fn random_symmetric_tensor(
    order: usize,
    dim: usize,
    rng: &mut SplitMix64,
    max_num: i64,
) -> SymmetricTensor {
    SymmetricTensor::from_entries(
        order,
        dim,
        canonical_indices(dim, order)
            .into_iter()
            .map(|idx| (idx, rng.small_rat(max_num))),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// criterion 1

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_1_coefficient_tensor_exactness() {
    criterion(
        1,
        "coefficient-tensor exactness",
        Some(Duration::from_secs(1)),
        || {
            let input = samples_dir().join("cubic_three_vars.json");
            let out = scratch_path("cubic_tensor.txt");
            let output = run_cli(&[
                "tensorize",
                input.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(output.status.success(), "tensorize failed: {output:?}");
            let tensor = parse_tensor(&std::fs::read_to_string(&out).unwrap()).unwrap();
            assert_eq!(tensor.order(), 3);
            assert_eq!(tensor.dim(), 4);

            // the four slices, frozen entry for entry as (num, den) pairs
            let slices: [[[(i64, i64); 4]; 4]; 4] = [
                [
                    [(-3, 1), (1, 3), (1, 3), (0, 1)],
                    [(1, 3), (0, 1), (1, 6), (0, 1)],
                    [(1, 3), (1, 6), (0, 1), (1, 6)],
                    [(0, 1), (0, 1), (1, 6), (0, 1)],
                ],
                [
                    [(1, 3), (0, 1), (1, 6), (0, 1)],
                    [(0, 1), (1, 1), (0, 1), (0, 1)],
                    [(1, 6), (0, 1), (0, 1), (0, 1)],
                    [(0, 1), (0, 1), (0, 1), (0, 1)],
                ],
                [
                    [(1, 3), (1, 6), (0, 1), (1, 6)],
                    [(1, 6), (0, 1), (0, 1), (0, 1)],
                    [(0, 1), (0, 1), (1, 1), (0, 1)],
                    [(1, 6), (0, 1), (0, 1), (0, 1)],
                ],
                [
                    [(0, 1), (0, 1), (1, 6), (0, 1)],
                    [(0, 1), (0, 1), (0, 1), (0, 1)],
                    [(1, 6), (0, 1), (0, 1), (0, 1)],
                    [(0, 1), (0, 1), (0, 1), (1, 1)],
                ],
            ];
            for (s, expected) in slices.iter().enumerate() {
                for i in 0..4 {
                    for j in 0..4 {
                        let (num, den) = expected[i][j];
                        assert_eq!(
                            tensor.entry(&[s, i, j]).unwrap(),
                            rat(num, den),
                            "slice {s} entry ({i}, {j})"
                        );
                    }
                }
            }
        },
    );
}

// ---------------------------------------------------------------------------
// criterion 2

#[test]
fn criterion_2_evaluation_identity() {
    criterion(
        2,
        "evaluation identity",
        Some(Duration::from_secs(30)),
        || {
            let mut rng = SplitMix64::new(0xe7a1);
            let mut checked = 0usize;
            while checked < 1000 {
                let nvars = 1 + (rng.below(4) as usize);
                let degree = 1 + (rng.below(4) as usize);
                let mut poly = Polynomial::zero(nvars);
                for _ in 0..(1 + rng.below(6)) {
                    let mut exps = vec![0usize; nvars];
                    for _ in 0..rng.below((degree + 1) as u64) {
                        exps[rng.below(nvars as u64) as usize] += 1;
                    }
                    poly.add_term(exps, rng.small_rat(6)).unwrap();
                }
                if poly.is_zero() {
                    continue;
                }
                assert!(
                    evaluation_identity_holds(&poly, 2, rng.next_u64()).unwrap(),
                    "identity failed for {poly:?}"
                );
                checked += 1;
            }
        },
    );
}

// ---------------------------------------------------------------------------
// criterion 3

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_3_finite_end_to_end() {
    criterion(3, "finite end-to-end", Some(Duration::from_secs(1)), || {
        let instance = finite_instance();

        let brute = brute_force_solve(&instance, 1, None).unwrap();
        assert_eq!(brute.value, rat_int(-2));
        assert_eq!(brute.argmins, vec![rat_vec(&[0, 1]), rat_vec(&[1, 1])]);
        assert!(brute.exact);

        let out = scratch_path("finite_solution.json");
        let input = samples_dir().join("finite_three_points.json");
        let output = run_cli(&[
            "solve-finite",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "solve-finite failed: {output:?}");
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(report["value"], "-2/1");
        assert_eq!(report["argmins"][0][0], "0/1");
        assert_eq!(report["argmins"][0][1], "1/1");
        assert_eq!(report["argmins"][1][0], "1/1");
        assert_eq!(report["argmins"][1][1], "1/1");

        let solution = solve_lifted_finite(&instance).unwrap();
        assert_eq!(solution.value, rat_int(-2));
        let expected_atoms = vec![
            SymmetricTensor::rank_one_power(&rat_vec(&[1, 0, 1]), 2).unwrap(),
            SymmetricTensor::rank_one_power(&rat_vec(&[1, 1, 1]), 2).unwrap(),
        ];
        assert_eq!(solution.optimal_atoms, expected_atoms);

        // the midpoint of the optimal segment, assembled two independent
        // ways
        let member = solution.hull_member(&[rat(1, 2), rat(1, 2)]).unwrap();
        let mixture = cp_reconstruct(
            &AtomDecomposition::new(
                2,
                3,
                vec![
                    (rat(1, 2), rat_vec(&[1, 0, 1])),
                    (rat(1, 2), rat_vec(&[1, 1, 1])),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(member, mixture);
        let expected = [
            [rat_int(1), rat(1, 2), rat_int(1)],
            [rat(1, 2), rat(1, 2), rat(1, 2)],
            [rat_int(1), rat(1, 2), rat_int(1)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(member.entry(&[i, j]).unwrap(), expected[i][j]);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// criterion 4

#[test]
fn criterion_4_homogeneous_pipeline() {
    criterion(
        4,
        "homogeneous pipeline",
        Some(Duration::from_secs(10)),
        || {
            let instance = bilinear_instance();
            let FeasibleSet::Polyhedral(set) = instance.feasible() else {
                panic!("polyhedral sample expected")
            };
            let alpha = rat_vec(&[1, 1]);

            let brute = brute_force_solve(&instance, 64, None).unwrap();
            assert_eq!(brute.value, rat(-1, 2));
            assert!(brute.argmins.contains(&vec![rat(1, 2), rat(1, 2)]));

            let data = build_lifting_data(&instance, &alpha, 1).unwrap();
            let program = build_homogeneous_cptp(&instance, &data).unwrap();

            // sampled feasible lifts: vertices, midpoints, centroid, and
            // seeded random convex combinations
            let vertices = set.vertices().unwrap();
            let mut points: Vec<Vec<Rat>> = vertices.clone();
            for i in 0..vertices.len() {
                for j in (i + 1)..vertices.len() {
                    points.push(
                        vertices[i]
                            .iter()
                            .zip(&vertices[j])
                            .map(|(a, b)| (a + b) * rat(1, 2))
                            .collect(),
                    );
                }
            }
            points.push(vec![rat(1, 3), rat(1, 3)]);
            let mut rng = SplitMix64::new(0xc4);
            while points.len() < 30 {
                let a = rng.small_nonneg_rat(8) / rat_int(8);
                let remaining = rat_int(1) - &a;
                let b = rng.small_nonneg_rat(8) / rat_int(8);
                let b = if b > remaining { remaining } else { b };
                points.push(vec![a, b]);
            }

            for x in &points {
                assert!(set.is_feasible(x).unwrap());
                let lifted = lift_feasible_point(set, x, &data).unwrap();
                let dec = AtomDecomposition::from_vectors(2, 3, vec![lifted.clone()]).unwrap();
                let report = cptp_feasibility_check(&program, &dec, 0.0).unwrap();
                assert!(report.passed, "lift of {x:?} failed feasibility");

                let atom = SymmetricTensor::rank_one_power(&lifted, 2).unwrap();
                assert_eq!(
                    program.objective.inner(&atom).unwrap(),
                    instance.objective().evaluate(x).unwrap(),
                    "objective preservation failed at {x:?}"
                );
            }

            let dual = dual_homogeneous(&program, &data).unwrap();
            let bound = bound_solve(&dual, 4, 1e-8).unwrap();
            assert!(
                (-0.52..=-0.50).contains(&bound.lambda),
                "bound {} outside [-0.52, -0.50]",
                bound.lambda
            );

            let gap = (&brute.value - &bound.lambda_exact).to_f64().unwrap();
            assert!(
                (0.0..=0.02).contains(&gap),
                "weak-duality gap {gap} outside [0, 0.02]"
            );

            // the full pipeline agrees through the CLI
            let input = samples_dir().join("simplex_bilinear.json");
            let out = scratch_path("bilinear_report.json");
            let output = run_cli(&[
                "verify",
                input.to_str().unwrap(),
                "--alpha",
                "1,1",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(output.status.success(), "verify failed: {output:?}");
            let report: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
            assert_eq!(report["status"], "pass");
            assert_eq!(report["brute_force"]["value"], "-1/2");
            assert_eq!(report["dual"]["bound"]["lambda_exact"], "-1/2");
        },
    );
}

// ---------------------------------------------------------------------------
// criterion 5

#[test]
fn criterion_5_inhomogeneous_pipeline() {
    criterion(
        5,
        "inhomogeneous pipeline",
        Some(Duration::from_secs(10)),
        || {
            let instance = interval_instance();
            let FeasibleSet::Polyhedral(set) = instance.feasible() else {
                panic!("polyhedral sample expected")
            };
            let alpha = vec![rat_int(1)];

            let brute = brute_force_solve(&instance, 64, None).unwrap();
            assert_eq!(brute.value, rat_int(-1));
            assert_eq!(brute.argmins, vec![vec![rat_int(1)]]);

            let data = build_lifting_data(&instance, &alpha, 1).unwrap();
            let program = build_inhomogeneous_cptp(&instance, &data).unwrap();

            let atom_vector = inhomogeneous_atom_vector(set, &[rat_int(1)], &data).unwrap();
            assert_eq!(atom_vector, rat_vec(&[1, 1, 0]));
            let atom = SymmetricTensor::rank_one_power(&atom_vector, 2).unwrap();
            assert_eq!(
                program.eq_constraints[0].0.inner(&atom).unwrap(),
                rat_int(1)
            );
            assert_eq!(
                program.eq_constraints[1].0.inner(&atom).unwrap(),
                rat_int(0)
            );
            let dec = AtomDecomposition::from_vectors(2, 3, vec![atom_vector]).unwrap();
            let report = cptp_feasibility_check(&program, &dec, 0.0).unwrap();
            assert!(report.passed);
            assert!(report.membership_checks.iter().all(|c| c.passed));

            let dual = dual_inhomogeneous(&program, &data).unwrap();
            let probe = strict_feasibility_probe(&dual, 4, 1e-8).unwrap();
            assert!(probe.conclusive);
            assert!(probe.lambda <= -1.0, "probe lambda {}", probe.lambda);
            assert!(probe.margin > 0.0, "probe margin {}", probe.margin);

            let input = samples_dir().join("interval_quadratic.json");
            let out = scratch_path("interval_report.json");
            let output = run_cli(&[
                "verify",
                input.to_str().unwrap(),
                "--alpha",
                "1",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(output.status.success(), "verify failed: {output:?}");
            let report: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
            assert_eq!(report["status"], "pass");
            assert_eq!(report["brute_force"]["value"], "-1/1");
        },
    );
}

// ---------------------------------------------------------------------------
// criterion 6

#[test]
fn criterion_6_adjoint_identity_suite() {
    criterion(
        6,
        "adjoint identity suite",
        Some(Duration::from_secs(10)),
        || {
            let mut rng = SplitMix64::new(0xad01);
            for _ in 0..500 {
                let order = 1 + (rng.below(3) as usize);
                let image_dim = 1 + (rng.below(4) as usize);
                let source_dim = 1 + (rng.below(4) as usize);
                let x = random_symmetric_tensor(order, image_dim, &mut rng, 4);
                let a = random_symmetric_tensor(order, source_dim, &mut rng, 4);
                let m = DenseMatrix::new(
                    image_dim,
                    source_dim,
                    (0..image_dim * source_dim)
                        .map(|_| rng.small_rat(3))
                        .collect(),
                )
                .unwrap();
                assert!(adjoint_pairing_check(&x, &a, &m).unwrap());
            }
        },
    );
}

// ---------------------------------------------------------------------------
// criterion 7

#[test]
fn criterion_7_copositivity_oracle_soundness() {
    criterion(7, "copositivity oracle soundness", None, || {
        let tol = 1e-8;
        let tol_rat = rat(1, 100_000_000);
        let mut rng = SplitMix64::new(0x50d);
        for case in 0..200 {
            let (order, dim) = if case % 2 == 0 {
                (2, 2 + (rng.below(3) as usize)) // matrices, n in 2..=4
            } else {
                (3, 2 + (rng.below(2) as usize)) // 3-tensors, n in 2..=3
            };
            let base = random_symmetric_tensor(order, dim, &mut rng, 4);

            // plant a violation at a base-lattice point
            let mut coords = vec![0usize; dim];
            for _ in 0..8 {
                coords[rng.below(dim as u64) as usize] += 1;
            }
            let point: Vec<Rat> = coords.iter().map(|&c| rat(c as i64, 8)).collect();
            let base_value = base.form_value(&point).unwrap();
            let self_pairing: Rat = point.iter().map(|c| c * c).sum();
            let mut scale_den = Rat::one();
            for _ in 0..order {
                scale_den *= &self_pairing;
            }
            let scale = (base_value + rat(1, 2)) / scale_den;
            let planted = base
                .sub(
                    &SymmetricTensor::rank_one_power(&point, order)
                        .unwrap()
                        .scale(&scale),
                )
                .unwrap();
            assert_eq!(planted.form_value(&point).unwrap(), rat(-1, 2));

            let verdict = copositive_check(&planted, 2, tol).unwrap();
            assert_eq!(
                verdict.status,
                CopositivityStatus::NotCopositive,
                "planted violation missed in case {case}"
            );
            let witness = verdict.witness.unwrap();
            assert!(witness.iter().all(|c| !c.is_negative()));
            assert_eq!(witness.iter().sum::<Rat>(), Rat::one());
            let exact = planted.form_value(&witness).unwrap();
            assert!(
                exact < -&tol_rat,
                "witness re-verification failed in case {case}: {exact}"
            );
        }

        // identity margins converge to 1/n
        for n in 2..=4usize {
            let identity =
                SymmetricTensor::from_entries(2, n, (0..n).map(|i| (vec![i, i], rat_int(1))))
                    .unwrap();
            let verdict = copositive_check(&identity, 9, tol).unwrap();
            assert_eq!(verdict.status, CopositivityStatus::Copositive);
            let expected = 1.0 / n as f64;
            assert!(
                (verdict.margin - expected).abs() < 1e-6,
                "identity margin for n = {n}: {} vs {expected}",
                verdict.margin
            );
        }

        // all-ones tensors have margin exactly 1 on the simplex
        for (order, dim) in [(2usize, 3usize), (3, 3)] {
            let ones = SymmetricTensor::from_entries(
                order,
                dim,
                canonical_indices(dim, order)
                    .into_iter()
                    .map(|idx| (idx, rat_int(1))),
            )
            .unwrap();
            let verdict = copositive_check(&ones, 2, tol).unwrap();
            assert_eq!(verdict.status, CopositivityStatus::Copositive);
            assert!(
                (verdict.margin - 1.0).abs() < 1e-6,
                "all-ones margin: {}",
                verdict.margin
            );
        }
    });
}

// ---------------------------------------------------------------------------
// criterion 8

#[test]
fn criterion_8_property_suite() {
    criterion(8, "property suite", None, || {
        // fifty random bounded-feasible instances: the recession screen is
        // vacuously true
        let mut rng = SplitMix64::new(0x8888);
        for _ in 0..50 {
            let nvars = 1 + (rng.below(3) as usize);
            // a simplex-style row keeps the set bounded
            let mut rows = vec![vec![rat_int(1); nvars]];
            let mut rhs = vec![rat_int(1 + rng.below(3) as i64)];
            if rng.below(2) == 1 {
                let mut extra = vec![rat_int(0); nvars];
                extra[rng.below(nvars as u64) as usize] = rat_int(1);
                rows.push(extra);
                rhs.push(rat_int(1));
            }
            let set = PolyhedralSet::new(DenseMatrix::from_rows(rows).unwrap(), rhs).unwrap();
            let mut objective = Polynomial::zero(nvars);
            for _ in 0..3 {
                let mut exps = vec![0usize; nvars];
                for _ in 0..rng.below(3) {
                    exps[rng.below(nvars as u64) as usize] += 1;
                }
                objective.add_term(exps, rng.small_rat(5)).unwrap();
            }
            let instance = PopInstance::new(
                objective,
                FeasibleSet::Polyhedral(set),
                PopKind::Inhomogeneous,
            )
            .unwrap();
            let report = recession_growth_check(&instance, 8).unwrap();
            assert!(report.passed);
            assert_eq!(report.sampled, 0, "bounded set sampled directions");
        }

        // the planted counterexample is flagged with the first unit vector
        let planted = PopInstance::new(
            Polynomial::from_terms(2, vec![(vec![2, 0], rat_int(-1))]).unwrap(),
            FeasibleSet::Polyhedral(PolyhedralSet::orthant(2).unwrap()),
            PopKind::Homogeneous,
        )
        .unwrap();
        let report = recession_growth_check(&planted, 16).unwrap();
        assert!(!report.passed);
        assert_eq!(report.witness, Some(rat_vec(&[1, 0])));

        // margins never increase with depth
        let mut rng = SplitMix64::new(0x0890);
        for case in 0..20 {
            let (order, dim) = if case % 2 == 0 { (2, 3) } else { (3, 3) };
            let tensor = random_symmetric_tensor(order, dim, &mut rng, 4);
            let mut previous = f64::INFINITY;
            for depth in 0..=4 {
                let verdict = copositive_check(&tensor, depth, 1e-8).unwrap();
                assert!(
                    verdict.margin <= previous,
                    "margin increased with depth in case {case}"
                );
                previous = verdict.margin;
            }
        }
    });
}
