//! Desk-scale numerical oracles for the two cones.
//!
//! Copositivity of a symmetric tensor is probed by minimizing its form over
//! the standard simplex (the form is scale-invariant on rays, so the
//! simplex slice decides the nonnegative orthant). The search walks a
//! rational simplex lattice with 8 points per axis and then refines: each
//! level contracts the lattice by a factor 2 around the incumbent minimum,
//! so depth `L` resolves spacing `1/(8·2^L)`. Everything is evaluated in
//! exact rational arithmetic; reported margins are the `f64` view of exact
//! minima, and every violation witness is re-verified exactly before it is
//! reported.
//!
//! A `Copositive` verdict is an approximate certificate (the search can
//! miss a thin violation region); `NotCopositive` is exact.
//!
//! Completely positive membership is only ever certified constructively,
//! by reconstructing a tensor from an explicit list of nonnegative rank-1
//! atoms.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::builder::{CopositiveProgram, DualAssignment};
use crate::error::{Error, Result};
use crate::rat::{rat, rat_from_f64, rat_to_f64, Rat};
use crate::tensor::SymmetricTensor;

/// Base lattice subdivisions per level.
const BASE_SUBDIVISIONS: usize = 8;
/// Cap on lattice points per refinement level.
const LATTICE_POINT_CAP: usize = 200_000;
/// Cap on doublings tried by the strict-feasibility probe.
const PROBE_DOUBLING_CAP: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopositivityStatus {
    /// Minimum found over the simplex is nonnegative (approximate
    /// certificate).
    Copositive,
    /// A point with form value below `-tol` was found and exactly
    /// re-verified.
    NotCopositive,
    /// Minimum found is negative but within tolerance; neither side can be
    /// certified at this resolution.
    Inconclusive,
}

impl CopositivityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CopositivityStatus::Copositive => "copositive",
            CopositivityStatus::NotCopositive => "not_copositive",
            CopositivityStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CopositivityVerdict {
    pub status: CopositivityStatus,
    /// Minimum of the form over all evaluated simplex points (`f64` view of
    /// the exact minimum).
    pub margin: f64,
    /// Witness point for `NotCopositive`, exact and exactly re-verified.
    pub witness: Option<Vec<Rat>>,
    pub depth: usize,
    pub tol: f64,
    pub evaluations: usize,
}

/// All nonnegative integer `n`-tuples summing to `k`, lexicographic.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; parts];
    fill_compositions(total, 0, &mut current, &mut out);
    out
}

fn fill_compositions(
    remaining: usize,
    slot: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for value in 0..=remaining {
        current[slot] = value;
        fill_compositions(remaining - value, slot + 1, current, out);
    }
}

fn lattice_cap_check(dim: usize) -> Result<usize> {
    if dim == 0 {
        return Err(Error::invalid("simplex lattice needs dimension >= 1"));
    }
    // C(dim + BASE_SUBDIVISIONS - 1, dim - 1) without overflow worries at
    // desk scale
    let mut count: usize = 1;
    for i in 0..(dim - 1) {
        count = count.saturating_mul(BASE_SUBDIVISIONS + 1 + i) / (i + 1);
        if count > LATTICE_POINT_CAP {
            return Err(Error::ResourceLimit(format!(
                "simplex lattice for dimension {dim} exceeds {LATTICE_POINT_CAP} points per level"
            )));
        }
    }
    Ok(count)
}

/// Exact minimization of `eval` over the refined simplex lattice. Stops
/// descending once a level's running minimum falls below `stop_below`.
fn refine_minimum<F>(
    dim: usize,
    depth: usize,
    stop_below: Option<&Rat>,
    eval: F,
) -> Result<(Rat, Vec<Rat>, usize)>
where
    F: Fn(&[Rat]) -> Result<Rat> + Sync,
{
    lattice_cap_check(dim)?;
    if depth > 48 {
        return Err(Error::ResourceLimit(
            "refinement depth is capped at 48 levels".into(),
        ));
    }
    let base: Vec<Vec<Rat>> = compositions(BASE_SUBDIVISIONS, dim)
        .into_iter()
        .map(|combo| {
            combo
                .into_iter()
                .map(|c| rat(c as i64, BASE_SUBDIVISIONS as i64))
                .collect()
        })
        .collect();

    let mut evaluations = 0usize;
    let mut incumbent: Option<(Rat, Vec<Rat>)> = None;

    for level in 0..=depth {
        let candidates: Vec<Vec<Rat>> = if level == 0 {
            base.clone()
        } else {
            let (_, center) = incumbent.as_ref().expect("level 0 always evaluates");
            let shrink = Rat::new(1.into(), num_bigint::BigInt::from(1u64 << level));
            let mut points: Vec<Vec<Rat>> = base
                .iter()
                .map(|y| {
                    y.iter()
                        .zip(center)
                        .map(|(yi, ci)| ci + (yi - ci) * &shrink)
                        .collect()
                })
                .collect();
            // face snap: drop coordinates smaller than 1.5 lattice spacings
            // so boundary minima are reachable despite the contraction
            let spacing = &shrink * rat(3, 2 * BASE_SUBDIVISIONS as i64);
            let mut snapped: Vec<Rat> = center
                .iter()
                .map(|c| {
                    if *c <= spacing {
                        Rat::zero()
                    } else {
                        c.clone()
                    }
                })
                .collect();
            let total: Rat = snapped.iter().sum();
            if !total.is_zero() && snapped != *center {
                for coord in snapped.iter_mut() {
                    *coord /= &total;
                }
                points.push(snapped);
            }
            points
        };

        evaluations += candidates.len();
        let level_best = candidates
            .into_par_iter()
            .map(|point| eval(&point).map(|value| Some((value, point))))
            .try_reduce(|| None, |a, b| Ok(min_pair(a, b)))?
            .expect("lattice is nonempty");

        incumbent = Some(match incumbent {
            None => level_best,
            Some(current) => min_pair(Some(current), Some(level_best)).expect("both present"),
        });

        if let (Some(threshold), Some((value, _))) = (stop_below, incumbent.as_ref()) {
            if value < threshold {
                break;
            }
        }
    }

    let (value, point) = incumbent.expect("at least one level ran");
    Ok((value, point, evaluations))
}

fn min_pair(
    left: Option<(Rat, Vec<Rat>)>,
    right: Option<(Rat, Vec<Rat>)>,
) -> Option<(Rat, Vec<Rat>)> {
    match (left, right) {
        (None, candidate) | (candidate, None) => candidate,
        (Some(a), Some(b)) => {
            if (&b.0, &b.1) < (&a.0, &a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Minimizes the form of `t` over the standard simplex and classifies the
/// outcome. `depth` refinement levels beyond the base lattice; `tol` is the
/// violation threshold.
pub fn copositive_check(
    t: &SymmetricTensor,
    depth: usize,
    tol: f64,
) -> Result<CopositivityVerdict> {
    let tol_rat = rat_from_f64(tol)?;
    if tol_rat < Rat::zero() {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let stop = -&tol_rat;
    let (minimum, argmin, evaluations) =
        refine_minimum(t.dim(), depth, Some(&stop), |point| t.form_value(point))?;

    let margin = rat_to_f64(&minimum);
    if minimum < stop {
        // exact re-verification of the witness before reporting
        let verified = t.form_value(&argmin)?;
        debug_assert!(verified < stop);
        debug_assert!(argmin.iter().all(|c| c >= &Rat::zero()));
        if verified >= stop {
            return Err(Error::invalid(
                "internal: witness failed exact re-verification",
            ));
        }
        return Ok(CopositivityVerdict {
            status: CopositivityStatus::NotCopositive,
            margin,
            witness: Some(argmin),
            depth,
            tol,
            evaluations,
        });
    }
    let status = if minimum >= Rat::zero() {
        CopositivityStatus::Copositive
    } else {
        CopositivityStatus::Inconclusive
    };
    Ok(CopositivityVerdict {
        status,
        margin,
        witness: None,
        depth,
        tol,
        evaluations,
    })
}

/// A conical combination of rank-1 powers of nonnegative vectors: a
/// constructive certificate of completely positive membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomDecomposition {
    pub order: usize,
    pub dim: usize,
    /// `(weight, vector)` pairs; weights and vector components must be
    /// nonnegative.
    pub atoms: Vec<(Rat, Vec<Rat>)>,
}

impl AtomDecomposition {
    pub fn new(order: usize, dim: usize, atoms: Vec<(Rat, Vec<Rat>)>) -> Result<Self> {
        let dec = AtomDecomposition { order, dim, atoms };
        dec.validate()?;
        Ok(dec)
    }

    /// Unit-weight atoms from generator vectors.
    pub fn from_vectors(order: usize, dim: usize, vectors: Vec<Vec<Rat>>) -> Result<Self> {
        AtomDecomposition::new(
            order,
            dim,
            vectors.into_iter().map(|v| (Rat::one(), v)).collect(),
        )
    }

    fn validate(&self) -> Result<()> {
        for (weight, vector) in &self.atoms {
            if weight < &Rat::zero() {
                return Err(Error::invalid("atom weights must be nonnegative"));
            }
            if vector.len() != self.dim {
                return Err(Error::invalid("atom vector length mismatch"));
            }
            if vector.iter().any(|c| c < &Rat::zero()) {
                return Err(Error::invalid(
                    "atom vectors must be componentwise nonnegative",
                ));
            }
        }
        Ok(())
    }
}

/// Exact reconstruction `Σ wᵢ M_d(vᵢ)`; completely positive by
/// construction.
pub fn cp_reconstruct(dec: &AtomDecomposition) -> Result<SymmetricTensor> {
    dec.validate()?;
    let mut total = SymmetricTensor::zero(dec.order, dec.dim)?;
    for (weight, vector) in &dec.atoms {
        if weight.is_zero() {
            continue;
        }
        total = total.add(&SymmetricTensor::rank_one_power(vector, dec.order)?.scale(weight))?;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct EqualityCheck {
    pub expected: Rat,
    pub actual: Rat,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct MembershipFailure {
    pub atom_index: usize,
    pub row: usize,
    pub value: Rat,
}

#[derive(Debug, Clone)]
pub struct MembershipCheck {
    pub map_index: usize,
    pub passed: bool,
    pub failure: Option<MembershipFailure>,
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub equality_checks: Vec<EqualityCheck>,
    pub membership_checks: Vec<MembershipCheck>,
    pub passed: bool,
}

/// Checks a constructive candidate against a completely positive program:
/// equalities are verified exactly on the reconstructed tensor, and each
/// membership map is verified atomwise (the image of every atom vector must
/// be componentwise `>= -tol`; nonnegative images make the mapped tensor a
/// nonnegative rank-1 combination, hence completely positive).
pub fn cptp_feasibility_check(
    prog: &crate::builder::CpTensorProgram,
    dec: &AtomDecomposition,
    tol: f64,
) -> Result<FeasibilityReport> {
    if dec.order != prog.order || dec.dim != prog.base_dim {
        return Err(Error::invalid(format!(
            "decomposition has shape ({}, {}), program expects ({}, {})",
            dec.order, dec.dim, prog.order, prog.base_dim
        )));
    }
    let tol_rat = rat_from_f64(tol)?;
    let threshold = -tol_rat;
    let tensor = cp_reconstruct(dec)?;

    let mut equality_checks = Vec::with_capacity(prog.eq_constraints.len());
    for (constraint, rhs) in &prog.eq_constraints {
        let actual = tensor.inner(constraint)?;
        equality_checks.push(EqualityCheck {
            expected: rhs.clone(),
            actual: actual.clone(),
            passed: actual == *rhs,
        });
    }

    let mut membership_checks = Vec::with_capacity(prog.membership_maps.len());
    for (map_index, map) in prog.membership_maps.iter().enumerate() {
        let mut failure = None;
        'atoms: for (atom_index, (weight, vector)) in dec.atoms.iter().enumerate() {
            if weight.is_zero() {
                continue;
            }
            let image = map.mul_vec(vector)?;
            for (row, value) in image.into_iter().enumerate() {
                if value < threshold {
                    failure = Some(MembershipFailure {
                        atom_index,
                        row,
                        value,
                    });
                    break 'atoms;
                }
            }
        }
        membership_checks.push(MembershipCheck {
            map_index,
            passed: failure.is_none(),
            failure,
        });
    }

    let passed =
        equality_checks.iter().all(|c| c.passed) && membership_checks.iter().all(|c| c.passed);
    Ok(FeasibilityReport {
        equality_checks,
        membership_checks,
        passed,
    })
}

/// Assembles the affine expression of a dual candidate exactly and runs the
/// copositivity oracle on it. Nonzero multipliers must themselves be
/// certified copositive first.
pub fn dual_feasibility_check(
    dual: &CopositiveProgram,
    assignment: &DualAssignment,
    tol: f64,
    depth: usize,
) -> Result<CopositivityVerdict> {
    for multiplier in &assignment.multipliers {
        if multiplier.is_zero() {
            continue;
        }
        let verdict = copositive_check(multiplier, depth, tol)?;
        if verdict.status != CopositivityStatus::Copositive {
            return Err(Error::invalid(
                "multiplier tensor is not certified copositive",
            ));
        }
    }
    let expression = dual.affine_expression(assignment)?;
    copositive_check(&expression, depth, tol)
}

#[derive(Debug, Clone)]
pub struct BoundResult {
    /// Grid minimum of `form(x) / (aᵀx)^d` over the simplex; `lambda - tol`
    /// is dual-feasible at the oracle's resolution, so this is a numerical
    /// lower bound on every lifted feasible objective value.
    pub lambda: f64,
    pub lambda_exact: Rat,
    pub minimizer: Vec<Rat>,
    pub depth: usize,
    pub tol: f64,
    pub evaluations: usize,
}

/// Best dual scalar with all multipliers pinned to zero: minimizes the
/// normalized objective form over the refined simplex lattice. Requires a
/// componentwise positive normalizer so the denominator never vanishes.
pub fn bound_solve(dual: &CopositiveProgram, depth: usize, tol: f64) -> Result<BoundResult> {
    if dual.normalization.iter().any(|v| v <= &Rat::zero()) {
        return Err(Error::invalid(
            "bound computation needs a componentwise positive normalizer \
             (certify a strictly positive alpha)",
        ));
    }
    let order = dual.order;
    let (minimum, minimizer, evaluations) = refine_minimum(dual.base_dim, depth, None, |point| {
        let numerator = dual.base.form_value(point)?;
        let pairing: Rat = dual
            .normalization
            .iter()
            .zip(point)
            .map(|(a, b)| a * b)
            .sum();
        let mut denominator = Rat::one();
        for _ in 0..order {
            denominator *= &pairing;
        }
        Ok(numerator / denominator)
    })?;
    Ok(BoundResult {
        lambda: rat_to_f64(&minimum),
        lambda_exact: minimum,
        minimizer,
        depth,
        tol,
        evaluations,
    })
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    /// First scalar in the doubling sequence whose expression came back
    /// strictly copositive.
    pub lambda: f64,
    /// Fixed offset scalar used for inhomogeneous duals.
    pub mu: Option<f64>,
    pub margin: f64,
    /// False when the doubling cap was exhausted without a strict verdict.
    pub conclusive: bool,
    pub attempts: usize,
}

/// Demonstrates strict dual feasibility numerically: tries
/// `λ ∈ {-1, -2, -4, …}` with zero multipliers until the oracle reports a
/// margin above `tol`.
///
/// For inhomogeneous duals the normalizer has a structural zero in the
/// homogenizing slot, so the normalization form vanishes at that vertex; a
/// fixed negative `μ` turns the coupling tensor into a positive offset
/// there (scaled past the base tensor's constant term when that is
/// negative).
pub fn strict_feasibility_probe(
    dual: &CopositiveProgram,
    depth: usize,
    tol: f64,
) -> Result<ProbeResult> {
    let structural_zero = dual.scalars.len() > 1;
    let tail = if structural_zero {
        &dual.normalization[1..]
    } else {
        &dual.normalization[..]
    };
    if tail.iter().any(|v| v <= &Rat::zero()) {
        return Err(Error::invalid(
            "strict feasibility probing needs a componentwise positive alpha",
        ));
    }
    if structural_zero && !dual.normalization[0].is_zero() {
        return Err(Error::invalid("unexpected normalizer layout"));
    }

    let mu = if structural_zero {
        let constant = dual.base.entry(&vec![0usize; dual.order])?;
        let offset = if constant < Rat::zero() {
            constant
        } else {
            Rat::zero()
        };
        Some(-Rat::one() + offset)
    } else {
        None
    };

    let mut lambda = -Rat::one();
    for attempt in 0..PROBE_DOUBLING_CAP {
        let scalars = match &mu {
            Some(mu_value) => vec![lambda.clone(), mu_value.clone()],
            None => vec![lambda.clone()],
        };
        let assignment = DualAssignment::scalars_only(dual, scalars)?;
        let verdict = dual_feasibility_check(dual, &assignment, tol, depth)?;
        if verdict.status == CopositivityStatus::Copositive && verdict.margin > tol {
            return Ok(ProbeResult {
                lambda: rat_to_f64(&lambda),
                mu: mu.as_ref().map(rat_to_f64),
                margin: verdict.margin,
                conclusive: true,
                attempts: attempt + 1,
            });
        }
        lambda = &lambda * rat(2, 1);
    }
    Ok(ProbeResult {
        lambda: f64::NEG_INFINITY,
        mu: mu.as_ref().map(rat_to_f64),
        margin: f64::NEG_INFINITY,
        conclusive: false,
        attempts: PROBE_DOUBLING_CAP,
    })
}
