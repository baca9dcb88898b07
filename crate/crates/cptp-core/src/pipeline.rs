//! End-to-end verification: brute force, lifted solve, reformulation
//! feasibility, duality probes, and a machine-readable report.
//!
//! Reports are deterministic given identical inputs and options, except for
//! the `timing_ms` object; consumers comparing reports byte-for-byte should
//! strip that field first.

use std::time::Instant;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::builder::{
    build_homogeneous_cptp, build_inhomogeneous_cptp, build_lifting_data_with_order,
    dual_homogeneous, dual_inhomogeneous, inhomogeneous_atom_vector, lift_feasible_point,
    solve_lifted_finite, CpTensorProgram, LiftedFiniteSolution, LiftingData,
};
use crate::error::{Error, Result};
use crate::formats::{serialize_problem, tensor_to_json};
use crate::oracle::{
    bound_solve, cptp_feasibility_check, strict_feasibility_probe, AtomDecomposition,
};
use crate::poly::Polynomial;
use crate::pop::{
    brute_force_solve, recession_growth_check, BruteForceResult, FeasibleSet, PolyhedralSet,
    PopInstance, PopKind, RecessionDiagnosis, SearchBox,
};
use crate::rat::{
    format_f64, format_rat, format_rat_vec, rat_from_f64, rat_to_f64, Rat, SplitMix64,
};
use crate::tensor::{adjoint_pairing_check, canonical_indices, SymmetricTensor};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Scaling vector; defaults to all zeros (always certified).
    pub alpha: Option<Vec<Rat>>,
    /// Number of duplicated coupling rows.
    pub coupling_count: usize,
    /// Tensor order override; defaults to the objective degree.
    pub order: Option<usize>,
    /// Oracle refinement depth.
    pub depth: usize,
    /// Oracle tolerance.
    pub tol: f64,
    /// Random feasible samples for atom checks.
    pub samples: usize,
    /// Grid steps per axis; defaults by dimension.
    pub resolution: Option<usize>,
    pub search_box: Option<SearchBox>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            alpha: None,
            coupling_count: 1,
            order: None,
            depth: 4,
            tol: 1e-8,
            samples: 50,
            resolution: None,
            search_box: None,
        }
    }
}

/// Default grid steps per axis, shrinking with dimension to keep the scan
/// at desk scale.
pub fn default_resolution(nvars: usize) -> usize {
    match nvars {
        0..=2 => 64,
        3 => 32,
        4 => 16,
        _ => 8,
    }
}

#[derive(Debug, Clone)]
struct CheckOutcome {
    name: &'static str,
    passed: Option<bool>,
    detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            passed: Some(true),
            detail: detail.into(),
        }
    }

    fn result(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            passed: Some(passed),
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, reason: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            passed: None,
            detail: reason.into(),
        }
    }

    fn to_json(&self) -> Value {
        match self.passed {
            Some(passed) => json!({
                "name": self.name,
                "passed": passed,
                "detail": self.detail,
            }),
            None => json!({
                "name": self.name,
                "skipped": true,
                "detail": self.detail,
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub passed: bool,
    pub report: Value,
}

impl PipelineReport {
    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("serializable") + "\n"
    }
}

/// FNV-1a over the canonical problem serialization.
fn instance_digest(p: &PopInstance) -> String {
    let text = serialize_problem(p);
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

fn brute_force_json(result: &BruteForceResult) -> Value {
    json!({
        "value": format_rat(&result.value),
        "argmins": result.argmins.iter().map(|p| format_rat_vec(p)).collect::<Vec<_>>(),
        "evaluations": result.evaluations,
        "exact": result.exact,
        "recession": match &result.recession {
            RecessionDiagnosis::BoundedSet => json!("bounded"),
            RecessionDiagnosis::NoNegativeDirectionFound { sampled } => json!({
                "inconclusive": "no negative recession direction among samples",
                "sampled": sampled,
            }),
        },
    })
}

pub fn lifted_solution_to_json(solution: &LiftedFiniteSolution) -> Value {
    json!({
        "value": format_rat(&solution.value),
        "order": solution.order,
        "dim": solution.dim,
        "argmins": solution
            .optimal_points
            .iter()
            .map(|p| format_rat_vec(p))
            .collect::<Vec<_>>(),
        "optimal_atoms": solution
            .optimal_points
            .iter()
            .zip(&solution.optimal_atoms)
            .map(|(point, atom)| json!({
                "point": format_rat_vec(point),
                "tensor": tensor_to_json(atom),
            }))
            .collect::<Vec<_>>(),
    })
}

/// Deterministic feasible samples: vertices, pairwise midpoints, the vertex
/// centroid, ray-shifted vertices when the set is unbounded, and seeded
/// random convex combinations.
fn sample_feasible_points(set: &PolyhedralSet, samples: usize) -> Result<Vec<Vec<Rat>>> {
    let vertices = set.vertices()?;
    if vertices.is_empty() {
        return Err(Error::Infeasible("feasible set is empty".into()));
    }
    let mut points: Vec<Vec<Rat>> = vertices.clone();
    let half = Rat::new(1.into(), 2.into());
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            points.push(
                vertices[i]
                    .iter()
                    .zip(&vertices[j])
                    .map(|(a, b)| (a + b) * &half)
                    .collect(),
            );
        }
    }
    let count = Rat::from_integer(vertices.len().into());
    let centroid: Vec<Rat> = (0..set.nvars())
        .map(|axis| vertices.iter().map(|v| &v[axis]).sum::<Rat>() / &count)
        .collect();
    points.push(centroid);
    for ray in set.recession_cone().extreme_rays()? {
        points.push(vertices[0].iter().zip(&ray).map(|(v, r)| v + r).collect());
    }
    let mut rng = SplitMix64::new(0x0a70_0b5e);
    for _ in 0..samples {
        let mut weights: Vec<Rat> = (0..vertices.len())
            .map(|_| rng.small_nonneg_rat(8))
            .collect();
        let total: Rat = weights.iter().sum();
        if total.is_zero() {
            continue;
        }
        for w in weights.iter_mut() {
            *w /= &total;
        }
        let point: Vec<Rat> = (0..set.nvars())
            .map(|axis| {
                weights
                    .iter()
                    .zip(&vertices)
                    .map(|(w, v)| w * &v[axis])
                    .sum()
            })
            .collect();
        points.push(point);
    }
    points.sort();
    points.dedup();
    Ok(points)
}

/// Single-atom decomposition of the lifted image of a feasible point.
fn lifted_atom_vector(
    set: &PolyhedralSet,
    x: &[Rat],
    data: &LiftingData,
    kind: PopKind,
) -> Result<Vec<Rat>> {
    match kind {
        PopKind::Homogeneous => lift_feasible_point(set, x, data),
        PopKind::Inhomogeneous => inhomogeneous_atom_vector(set, x, data),
    }
}

/// Deterministic pseudo-random symmetric tensor for consistency spot
/// checks.
fn pseudo_random_tensor(order: usize, dim: usize, rng: &mut SplitMix64) -> Result<SymmetricTensor> {
    SymmetricTensor::from_entries(
        order,
        dim,
        canonical_indices(dim, order)
            .into_iter()
            .map(|idx| (idx, rng.small_rat(3))),
    )
}

/// Runs every applicable construction and oracle check on one instance and
/// assembles the report. `passed` is true exactly when every non-skipped
/// check passed.
pub fn run_verify(p: &PopInstance, options: &VerifyOptions) -> Result<PipelineReport> {
    let total_clock = Instant::now();
    let mut checks: Vec<CheckOutcome> = Vec::new();
    let mut report = serde_json::Map::new();

    report.insert(
        "instance".into(),
        json!({
            "digest": instance_digest(p),
            "nvars": p.nvars(),
            "degree": p.objective().degree(),
            "kind": match p.kind() {
                PopKind::Homogeneous => "homogeneous",
                PopKind::Inhomogeneous => "inhomogeneous",
            },
            "feasible": match p.feasible() {
                FeasibleSet::Polyhedral(_) => "polyhedral",
                FeasibleSet::Finite(_) => "finite",
            },
        }),
    );

    let alpha = options
        .alpha
        .clone()
        .unwrap_or_else(|| vec![Rat::zero(); p.nvars()]);
    let resolution = options
        .resolution
        .unwrap_or_else(|| default_resolution(p.nvars()));
    let order = options.order.unwrap_or_else(|| p.default_order());
    report.insert(
        "options".into(),
        json!({
            "alpha": format_rat_vec(&alpha),
            "t": options.coupling_count,
            "order": order,
            "depth": options.depth,
            "tol": format_f64(options.tol),
            "samples": options.samples,
            "resolution": resolution,
        }),
    );

    // brute force
    let brute_clock = Instant::now();
    let brute = brute_force_solve(p, resolution, options.search_box.as_ref())?;
    let brute_ms = brute_clock.elapsed().as_millis();
    report.insert("brute_force".into(), brute_force_json(&brute));
    checks.push(CheckOutcome::pass(
        "brute_force",
        format!("value {}", format_rat(&brute.value)),
    ));

    // the attainment screen (necessary condition on recession directions)
    let growth = recession_growth_check(p, options.samples.max(8))?;
    checks.push(CheckOutcome::result(
        "recession_growth",
        growth.passed,
        match (&growth.witness, growth.sampled) {
            (_, 0) => "bounded feasible set; vacuously true".to_string(),
            (None, sampled) => format!("top form nonnegative on {sampled} sampled directions"),
            (Some(w), _) => format!("negative direction {:?}", format_rat_vec(w)),
        },
    ));

    let verify_clock = Instant::now();
    let mut dual_section = serde_json::Map::new();
    let mut gap_value: Option<Value> = None;

    match p.feasible() {
        FeasibleSet::Finite(_) => {
            let lifted = solve_lifted_finite(p)?;
            report.insert("lifted".into(), lifted_solution_to_json(&lifted));
            checks.push(CheckOutcome::result(
                "lifted_value_matches_brute_force",
                lifted.value == brute.value && lifted.optimal_points == brute.argmins,
                format!(
                    "lifted {} vs brute force {}",
                    format_rat(&lifted.value),
                    format_rat(&brute.value)
                ),
            ));
            report.insert(
                "lifted_gap".into(),
                json!(format_rat(&(&brute.value - &lifted.value))),
            );

            // linearity of the lifted objective on the optimal hull
            let atoms = lifted.optimal_atoms.len();
            let uniform = Rat::new(1.into(), (atoms as i64).into());
            let member = lifted.hull_member(&vec![uniform; atoms])?;
            let objective = p.objective().coefficient_tensor(lifted.order)?;
            let member_value = objective.inner(&member)?;
            checks.push(CheckOutcome::result(
                "optimal_hull_member_value",
                member_value == lifted.value,
                format!("uniform hull member pairs to {}", format_rat(&member_value)),
            ));

            checks.push(CheckOutcome::skipped(
                "reformulation",
                "finite feasible sets use the lifted enumeration route",
            ));
        }
        FeasibleSet::Polyhedral(set) => {
            let data = build_lifting_data_with_order(p, &alpha, options.coupling_count, order)?;
            checks.push(CheckOutcome::pass(
                "alpha_certificate",
                "alpha'x <= 1 certified exactly on vertices and rays",
            ));
            let program = match p.kind() {
                PopKind::Homogeneous => build_homogeneous_cptp(p, &data)?,
                PopKind::Inhomogeneous => build_inhomogeneous_cptp(p, &data)?,
            };
            report.insert(
                "reformulation".into(),
                json!({
                    "order": program.order,
                    "base_dim": program.base_dim,
                    "equalities": program.eq_constraints.len(),
                    "map_dims": program
                        .membership_maps
                        .iter()
                        .map(crate::tensor::DenseMatrix::rows)
                        .collect::<Vec<_>>(),
                }),
            );

            let sampled = sample_feasible_points(set, options.samples)?;
            let (atom_ok, preserve_ok) =
                check_sampled_atoms(p, set, &data, &program, &sampled, options.tol)?;
            checks.push(CheckOutcome::result(
                "atom_feasibility",
                atom_ok,
                format!("{} sampled feasible lifts", sampled.len()),
            ));
            checks.push(CheckOutcome::result(
                "objective_preservation",
                preserve_ok,
                "program objective pairs to f(x) exactly on every sampled lift",
            ));

            // mixed atom with a recession direction, when one exists
            let rays = set.recession_cone().extreme_rays()?;
            if let Some(ray) = rays.first() {
                let vertex = &set.vertices()?[0];
                let mut recession_vector = match p.kind() {
                    PopKind::Homogeneous => Vec::new(),
                    PopKind::Inhomogeneous => vec![Rat::zero()],
                };
                recession_vector.extend(ray.iter().cloned());
                recession_vector.push(Rat::zero());
                let point_atom = lifted_atom_vector(set, vertex, &data, p.kind())?;
                let dec = AtomDecomposition::new(
                    program.order,
                    program.base_dim,
                    vec![(Rat::one(), point_atom), (Rat::one(), recession_vector)],
                )?;
                let mixed = cptp_feasibility_check(&program, &dec, options.tol)?;
                checks.push(CheckOutcome::result(
                    "mixed_recession_atom",
                    mixed.passed,
                    "vertex atom plus recession atom stays feasible",
                ));
            }

            // adjoint consistency of every membership map
            let mut rng = SplitMix64::new(0xad01);
            let mut adjoint_ok = true;
            for map in &program.membership_maps {
                let u = pseudo_random_tensor(program.order, map.rows(), &mut rng)?;
                let x = pseudo_random_tensor(program.order, program.base_dim, &mut rng)?;
                if !adjoint_pairing_check(&u, &x, map)? {
                    adjoint_ok = false;
                }
            }
            checks.push(CheckOutcome::result(
                "adjoint_consistency",
                adjoint_ok,
                "transpose pairing identity holds exactly on random tensors",
            ));

            // duality
            let dual = match p.kind() {
                PopKind::Homogeneous => dual_homogeneous(&program, &data)?,
                PopKind::Inhomogeneous => dual_inhomogeneous(&program, &data)?,
            };
            if data.normalizer_is_positive() {
                let probe = strict_feasibility_probe(&dual, options.depth, options.tol)?;
                dual_section.insert(
                    "probe".into(),
                    json!({
                        "lambda": format_f64(probe.lambda),
                        "mu": probe.mu.map(format_f64),
                        "margin": format_f64(probe.margin),
                        "conclusive": probe.conclusive,
                        "attempts": probe.attempts,
                    }),
                );
                checks.push(CheckOutcome::result(
                    "dual_strict_feasibility",
                    probe.conclusive && probe.margin > 0.0,
                    format!("lambda {} margin {}", probe.lambda, probe.margin),
                ));

                if p.kind() == PopKind::Homogeneous {
                    let bound = bound_solve(&dual, options.depth, options.tol)?;
                    dual_section.insert(
                        "bound".into(),
                        json!({
                            "lambda": format_f64(bound.lambda),
                            "lambda_exact": format_rat(&bound.lambda_exact),
                            "minimizer": format_rat_vec(&bound.minimizer),
                            "evaluations": bound.evaluations,
                        }),
                    );
                    let gap = &brute.value - &bound.lambda_exact;
                    gap_value = Some(json!(format_f64(rat_to_f64(&gap))));
                    let tol_rat = rat_from_f64(options.tol)?;
                    checks.push(CheckOutcome::result(
                        "weak_duality_gap",
                        gap >= -tol_rat,
                        format!(
                            "primal {} - dual bound {}",
                            rat_to_f64(&brute.value),
                            bound.lambda
                        ),
                    ));
                } else {
                    checks.push(CheckOutcome::skipped(
                        "weak_duality_gap",
                        "bound computation needs the homogeneous normalizer form",
                    ));
                }
            } else {
                checks.push(CheckOutcome::skipped(
                    "dual_strict_feasibility",
                    "needs a componentwise positive certified alpha",
                ));
                checks.push(CheckOutcome::skipped(
                    "weak_duality_gap",
                    "needs a componentwise positive certified alpha",
                ));
            }
        }
    }
    let verify_ms = verify_clock.elapsed().as_millis();

    if !dual_section.is_empty() {
        report.insert("dual".into(), Value::Object(dual_section));
    }
    if let Some(gap) = gap_value {
        report.insert("weak_duality_gap".into(), gap);
    }

    let passed = checks.iter().all(|c| c.passed.unwrap_or(true));
    report.insert(
        "checks".into(),
        Value::Array(checks.iter().map(CheckOutcome::to_json).collect()),
    );
    report.insert("passed".into(), json!(passed));
    report.insert("status".into(), json!(if passed { "pass" } else { "fail" }));
    report.insert(
        "timing_ms".into(),
        json!({
            "total": total_clock.elapsed().as_millis() as u64,
            "brute_force": brute_ms as u64,
            "verification": verify_ms as u64,
        }),
    );

    Ok(PipelineReport {
        passed,
        report: Value::Object(report),
    })
}

fn check_sampled_atoms(
    p: &PopInstance,
    set: &PolyhedralSet,
    data: &LiftingData,
    program: &CpTensorProgram,
    sampled: &[Vec<Rat>],
    tol: f64,
) -> Result<(bool, bool)> {
    let mut atoms_ok = true;
    let mut preserve_ok = true;
    for x in sampled {
        let atom_vector = lifted_atom_vector(set, x, data, p.kind())?;
        let dec = AtomDecomposition::from_vectors(
            program.order,
            program.base_dim,
            vec![atom_vector.clone()],
        )?;
        let feasibility = cptp_feasibility_check(program, &dec, tol)?;
        if !feasibility.passed {
            atoms_ok = false;
        }
        let atom = SymmetricTensor::rank_one_power(&atom_vector, program.order)?;
        if program.objective.inner(&atom)? != p.objective().evaluate(x)? {
            preserve_ok = false;
        }
    }
    Ok((atoms_ok, preserve_ok))
}

/// Checks a polynomial's evaluation identity against its coefficient tensor
/// at pseudo-random rational points; used by the verification suites.
pub fn evaluation_identity_holds(f: &Polynomial, trials: usize, seed: u64) -> Result<bool> {
    let order = f.degree().max(1);
    let tensor = f.coefficient_tensor(order)?;
    let mut rng = SplitMix64::new(seed);
    for _ in 0..trials {
        let x: Vec<Rat> = (0..f.nvars()).map(|_| rng.small_rat(5)).collect();
        let mut lifted = vec![Rat::one()];
        lifted.extend(x.iter().cloned());
        let pairing = tensor.inner(&SymmetricTensor::rank_one_power(&lifted, order)?)?;
        if pairing != f.evaluate(&x)? {
            return Ok(false);
        }
        let mut top_lift = vec![Rat::zero()];
        top_lift.extend(x.iter().cloned());
        let top_pairing = tensor.inner(&SymmetricTensor::rank_one_power(&top_lift, order)?)?;
        let top_value = f
            .decompose()
            .part(order)
            .map(|part| part.evaluate(&x))
            .transpose()?
            .unwrap_or_else(Rat::zero);
        if top_pairing != top_value {
            return Ok(false);
        }
    }
    Ok(true)
}
