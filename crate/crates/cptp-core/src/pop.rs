//! Problem instances: polynomial objectives over polyhedral or finite
//! feasible sets, recession cones, the scaling certificate `αᵀx <= 1`, and
//! desk-scale brute-force solving.
//!
//! Everything here is exact except where a search is inherently a search:
//! grid scans evaluate the objective at rational points and compare
//! rationally, and unboundedness detection is a sampled heuristic that
//! reports an explicit "inconclusive" instead of guessing.

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cone_extreme_rays, polyhedron_vertices};
use crate::poly::Polynomial;
use crate::rat::{rat, Rat, SplitMix64};
use crate::tensor::{DenseMatrix, SymmetricTensor};

/// Combinatorial cap for exact vertex/ray enumeration.
pub const ENUMERATION_CAP: usize = 12;

/// Absolute tie tolerance for grid argmins, `1e-9` as an exact rational.
fn tie_tolerance() -> Rat {
    rat(1, 1_000_000_000)
}

/// `F = {x | Bx <= b, x >= 0}`; zero inequality rows mean the whole
/// nonnegative orthant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralSet {
    b_matrix: DenseMatrix,
    b_rhs: Vec<Rat>,
}

impl PolyhedralSet {
    pub fn new(b_matrix: DenseMatrix, b_rhs: Vec<Rat>) -> Result<Self> {
        if b_matrix.rows() != b_rhs.len() {
            return Err(Error::invalid(format!(
                "B has {} rows but b has {} entries",
                b_matrix.rows(),
                b_rhs.len()
            )));
        }
        if b_matrix.cols() == 0 {
            return Err(Error::invalid("feasible set needs at least one variable"));
        }
        Ok(PolyhedralSet { b_matrix, b_rhs })
    }

    /// The nonnegative orthant of dimension `n`.
    pub fn orthant(n: usize) -> Result<Self> {
        PolyhedralSet::new(DenseMatrix::zeros(0, n), Vec::new())
    }

    pub fn nvars(&self) -> usize {
        self.b_matrix.cols()
    }

    pub fn num_inequalities(&self) -> usize {
        self.b_matrix.rows()
    }

    pub fn b_matrix(&self) -> &DenseMatrix {
        &self.b_matrix
    }

    pub fn b_rhs(&self) -> &[Rat] {
        &self.b_rhs
    }

    /// Exact membership check `Bx <= b` and `x >= 0`.
    pub fn is_feasible(&self, x: &[Rat]) -> Result<bool> {
        if x.len() != self.nvars() {
            return Err(Error::invalid(format!(
                "point has length {}, feasible set has {} variables",
                x.len(),
                self.nvars()
            )));
        }
        if x.iter().any(|v| v < &Rat::zero()) {
            return Ok(false);
        }
        let image = self.b_matrix.mul_vec(x)?;
        Ok(image.iter().zip(&self.b_rhs).all(|(lhs, rhs)| lhs <= rhs))
    }

    /// The recession cone `{y | By <= 0, y >= 0}`.
    pub fn recession_cone(&self) -> ConeSet {
        ConeSet {
            b_matrix: self.b_matrix.clone(),
        }
    }

    fn check_enumeration_cap(&self) -> Result<()> {
        let size = self.nvars() + self.num_inequalities();
        if size > ENUMERATION_CAP {
            return Err(Error::ResourceLimit(format!(
                "vertex enumeration needs n + m <= {ENUMERATION_CAP}, got {size}"
            )));
        }
        Ok(())
    }

    /// All vertices, exactly. Empty iff the set is empty.
    pub fn vertices(&self) -> Result<Vec<Vec<Rat>>> {
        self.check_enumeration_cap()?;
        polyhedron_vertices(&self.b_matrix, &self.b_rhs)
    }

    /// Decides `αᵀx <= 1` for every `x ∈ F`, exactly: all vertices must
    /// satisfy it and every extreme recession ray must be orthogonal to α.
    pub fn alpha_certificate(&self, alpha: &[Rat]) -> Result<bool> {
        if alpha.len() != self.nvars() {
            return Err(Error::invalid(format!(
                "alpha has length {}, feasible set has {} variables",
                alpha.len(),
                self.nvars()
            )));
        }
        if alpha.iter().any(|v| v < &Rat::zero()) {
            return Err(Error::invalid("alpha must be componentwise nonnegative"));
        }
        self.check_enumeration_cap()?;
        let one = rat(1, 1);
        for vertex in self.vertices()? {
            let value: Rat = alpha.iter().zip(&vertex).map(|(a, x)| a * x).sum();
            if value > one {
                return Ok(false);
            }
        }
        for ray in self.recession_cone().extreme_rays()? {
            let value: Rat = alpha.iter().zip(&ray).map(|(a, y)| a * y).sum();
            if !value.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Explicit finite feasible set with pairwise-distinct points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSet {
    points: Vec<Vec<Rat>>,
}

impl FiniteSet {
    pub fn new(points: Vec<Vec<Rat>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::invalid(
                "finite feasible set needs at least one point",
            ));
        };
        let nvars = first.len();
        if nvars == 0 {
            return Err(Error::invalid(
                "feasible points need at least one coordinate",
            ));
        }
        if points.iter().any(|p| p.len() != nvars) {
            return Err(Error::invalid("feasible points have unequal lengths"));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::invalid("feasible points must be distinct"));
                }
            }
        }
        Ok(FiniteSet { points })
    }

    pub fn nvars(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<Rat>] {
        &self.points
    }

    /// A finite set is bounded, so its recession cone is `{0}`.
    pub fn recession_cone(&self) -> ConeSet {
        ConeSet::zero_cone(self.nvars())
    }
}

/// Polyhedral cone `{y | By <= 0, y >= 0}`. Contains the origin and is
/// closed under nonnegative scaling by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSet {
    b_matrix: DenseMatrix,
}

impl ConeSet {
    /// The cone `{0}`, encoded as `y <= 0, y >= 0`.
    pub fn zero_cone(n: usize) -> ConeSet {
        ConeSet {
            b_matrix: DenseMatrix::identity(n),
        }
    }

    pub fn nvars(&self) -> usize {
        self.b_matrix.cols()
    }

    pub fn contains(&self, y: &[Rat]) -> Result<bool> {
        if y.len() != self.nvars() {
            return Err(Error::invalid(format!(
                "direction has length {}, cone has {} variables",
                y.len(),
                self.nvars()
            )));
        }
        if y.iter().any(|v| v < &Rat::zero()) {
            return Ok(false);
        }
        let image = self.b_matrix.mul_vec(y)?;
        Ok(image.iter().all(|v| v <= &Rat::zero()))
    }

    /// Normalized extreme rays; empty iff the cone is `{0}`.
    pub fn extreme_rays(&self) -> Result<Vec<Vec<Rat>>> {
        let size = self.nvars() + self.b_matrix.rows();
        if size > ENUMERATION_CAP {
            return Err(Error::ResourceLimit(format!(
                "ray enumeration needs n + m <= {ENUMERATION_CAP}, got {size}"
            )));
        }
        cone_extreme_rays(&self.b_matrix)
    }

    pub fn is_zero_only(&self) -> Result<bool> {
        Ok(self.extreme_rays()?.is_empty())
    }
}

/// The two feasible-set shapes an instance can carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibleSet {
    Polyhedral(PolyhedralSet),
    Finite(FiniteSet),
}

impl FeasibleSet {
    pub fn nvars(&self) -> usize {
        match self {
            FeasibleSet::Polyhedral(p) => p.nvars(),
            FeasibleSet::Finite(f) => f.nvars(),
        }
    }

    pub fn recession_cone(&self) -> ConeSet {
        match self {
            FeasibleSet::Polyhedral(p) => p.recession_cone(),
            FeasibleSet::Finite(f) => f.recession_cone(),
        }
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool> {
        match self {
            FeasibleSet::Polyhedral(p) => p.is_feasible(x),
            FeasibleSet::Finite(f) => {
                if x.len() != f.nvars() {
                    return Err(Error::invalid("point length mismatch"));
                }
                Ok(f.points().iter().any(|p| p == x))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopKind {
    Homogeneous,
    Inhomogeneous,
}

/// A polynomial minimization instance `min f(x) s.t. x ∈ F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopInstance {
    objective: Polynomial,
    feasible: FeasibleSet,
    kind: PopKind,
}

impl PopInstance {
    pub fn new(objective: Polynomial, feasible: FeasibleSet, kind: PopKind) -> Result<Self> {
        if objective.nvars() != feasible.nvars() {
            return Err(Error::invalid(format!(
                "objective has {} variables, feasible set has {}",
                objective.nvars(),
                feasible.nvars()
            )));
        }
        if kind == PopKind::Homogeneous && !objective.is_homogeneous() {
            return Err(Error::invalid(
                "declared homogeneous but the objective has mixed-degree terms",
            ));
        }
        Ok(PopInstance {
            objective,
            feasible,
            kind,
        })
    }

    pub fn objective(&self) -> &Polynomial {
        &self.objective
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn kind(&self) -> PopKind {
        self.kind
    }

    pub fn nvars(&self) -> usize {
        self.objective.nvars()
    }

    /// Default tensor order for reformulations: the objective degree, at
    /// least 1 so constants still produce order-1 data.
    pub fn default_order(&self) -> usize {
        self.objective.degree().max(1)
    }
}

/// The copositivity question for a symmetric tensor, phrased as the
/// homogeneous instance `min ⟨t, M_d(x)⟩ s.t. x ∈ R^n_+`.
pub fn copositivity_instance(t: &SymmetricTensor) -> Result<PopInstance> {
    let objective = if t.is_zero() {
        Polynomial::zero(t.dim())
    } else {
        crate::poly::polynomial_from_homogeneous_tensor(t)?
    };
    PopInstance::new(
        objective,
        FeasibleSet::Polyhedral(PolyhedralSet::orthant(t.dim())?),
        PopKind::Homogeneous,
    )
}

/// Axis-aligned search region for grid scans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBox {
    pub lo: Vec<Rat>,
    pub hi: Vec<Rat>,
}

impl SearchBox {
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("search box needs matching nonempty bounds"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::invalid("search box has lo > hi"));
        }
        Ok(SearchBox { lo, hi })
    }
}

/// What the recession-direction screen concluded before a grid scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecessionDiagnosis {
    /// The recession cone is `{0}`; the feasible set is bounded.
    BoundedSet,
    /// Sampled directions all kept the top-degree form nonnegative. This is
    /// inconclusive: the scan proceeds but global boundedness is unknown.
    NoNegativeDirectionFound { sampled: usize },
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Best objective value found, exact.
    pub value: Rat,
    /// All minimizers found within the tie tolerance, sorted
    /// lexicographically. Exact for finite sets; grid/refinement points
    /// otherwise.
    pub argmins: Vec<Vec<Rat>>,
    /// Number of objective evaluations performed.
    pub evaluations: usize,
    /// True when the result is an exact optimum (finite-set enumeration).
    pub exact: bool,
    pub recession: RecessionDiagnosis,
}

/// Outcome of sampling the recession cone against the top-degree form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecessionGrowthReport {
    pub passed: bool,
    /// A direction with strictly negative top-degree value, when found.
    pub witness: Option<Vec<Rat>>,
    pub sampled: usize,
}

/// Samples directions from the recession cone of the feasible set and
/// checks that the top-degree homogeneous component of the objective is
/// nonnegative on each (a necessary condition for an attained minimum).
/// Extreme rays are always included; the rest are deterministic
/// pseudo-random nonnegative combinations.
pub fn recession_growth_check(p: &PopInstance, samples: usize) -> Result<RecessionGrowthReport> {
    let cone = p.feasible().recession_cone();
    let rays = cone.extreme_rays()?;
    if rays.is_empty() {
        return Ok(RecessionGrowthReport {
            passed: true,
            witness: None,
            sampled: 0,
        });
    }
    let top = if p.objective().is_zero() {
        Polynomial::zero(p.nvars())
    } else {
        p.objective().top_component()?
    };
    let directions = sample_cone_directions(&rays, samples);
    let sampled = directions.len();
    for direction in directions {
        if top.evaluate(&direction)? < Rat::zero() {
            return Ok(RecessionGrowthReport {
                passed: false,
                witness: Some(direction),
                sampled,
            });
        }
    }
    Ok(RecessionGrowthReport {
        passed: true,
        witness: None,
        sampled,
    })
}

/// Extreme rays, their pairwise sums, the all-ray sum, and seeded random
/// nonnegative combinations. Deterministic for a fixed ray set and count.
fn sample_cone_directions(rays: &[Vec<Rat>], samples: usize) -> Vec<Vec<Rat>> {
    let n = rays[0].len();
    let mut directions: Vec<Vec<Rat>> = rays.to_vec();
    for i in 0..rays.len() {
        for j in (i + 1)..rays.len() {
            directions.push(add_vectors(&rays[i], &rays[j]));
        }
    }
    if rays.len() > 2 {
        let mut total = vec![Rat::zero(); n];
        for ray in rays {
            total = add_vectors(&total, ray);
        }
        directions.push(total);
    }
    let mut rng = SplitMix64::new(0x5eed_c0de);
    while directions.len() < rays.len() + samples {
        let mut combo = vec![Rat::zero(); n];
        for ray in rays {
            let weight = rng.small_nonneg_rat(4);
            for (slot, component) in combo.iter_mut().zip(ray) {
                *slot += &weight * component;
            }
        }
        if combo.iter().any(|v| !v.is_zero()) {
            directions.push(combo);
        }
    }
    directions
}

fn add_vectors(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Desk-scale global minimization.
///
/// Finite sets are enumerated exactly. Polyhedral sets are screened for
/// unbounded descent along sampled recession directions, then scanned on a
/// rational grid over the (supplied or derived) bounding box, and finally
/// polished by coordinate descent on successively halved steps. All
/// comparisons are exact; `resolution` is the number of grid steps per axis.
pub fn brute_force_solve(
    p: &PopInstance,
    resolution: usize,
    search_box: Option<&SearchBox>,
) -> Result<BruteForceResult> {
    match p.feasible() {
        FeasibleSet::Finite(set) => solve_finite(p.objective(), set),
        FeasibleSet::Polyhedral(set) => solve_polyhedral(p, set, resolution, search_box),
    }
}

fn solve_finite(objective: &Polynomial, set: &FiniteSet) -> Result<BruteForceResult> {
    let mut best: Option<Rat> = None;
    let mut values = Vec::with_capacity(set.points().len());
    for point in set.points() {
        let value = objective.evaluate(point)?;
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value.clone());
        }
        values.push(value);
    }
    let best = best.expect("finite sets are nonempty");
    let mut argmins: Vec<Vec<Rat>> = set
        .points()
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v == best)
        .map(|(p, _)| p.clone())
        .collect();
    argmins.sort();
    Ok(BruteForceResult {
        value: best,
        evaluations: values.len(),
        argmins,
        exact: true,
        recession: RecessionDiagnosis::BoundedSet,
    })
}

fn solve_polyhedral(
    p: &PopInstance,
    set: &PolyhedralSet,
    resolution: usize,
    search_box: Option<&SearchBox>,
) -> Result<BruteForceResult> {
    if resolution == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    let vertices = set.vertices()?;
    if vertices.is_empty() {
        return Err(Error::Infeasible(
            "the polyhedral feasible set is empty".into(),
        ));
    }

    // Screen for unbounded descent along the recession cone.
    let growth = recession_growth_check(p, 32)?;
    if let Some(witness) = growth.witness {
        return Err(Error::Unbounded { witness });
    }
    let recession = if growth.sampled == 0 {
        RecessionDiagnosis::BoundedSet
    } else {
        RecessionDiagnosis::NoNegativeDirectionFound {
            sampled: growth.sampled,
        }
    };

    let search_box = match search_box {
        Some(user_box) => {
            if user_box.lo.len() != set.nvars() {
                return Err(Error::invalid("search box dimension mismatch"));
            }
            user_box.clone()
        }
        None => {
            if recession != RecessionDiagnosis::BoundedSet {
                return Err(Error::invalid(
                    "unbounded feasible set: a search box must be supplied",
                ));
            }
            bounding_box_from_vertices(&vertices)
        }
    };

    let n = set.nvars();
    let steps: Vec<Vec<Rat>> = (0..n)
        .map(|axis| {
            let lo = &search_box.lo[axis];
            let hi = &search_box.hi[axis];
            let span = hi - lo;
            (0..=resolution)
                .map(|k| lo + &span * rat(k as i64, resolution as i64))
                .collect()
        })
        .collect();
    let total: usize = steps.iter().map(Vec::len).product();

    let objective = p.objective();
    let tie = tie_tolerance();

    // Pass 1: exact minimum over feasible grid points, in parallel.
    let chunk_best = (0..total)
        .into_par_iter()
        .map(|flat| {
            let point = unflatten(flat, &steps);
            match set.is_feasible(&point) {
                Ok(true) => objective.evaluate(&point).map(|v| Some((v, point))),
                Ok(false) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .try_reduce(|| None, |left, right| Ok(min_candidate(left, right)))?;
    let Some((mut best_value, mut best_point)) = chunk_best else {
        return Err(Error::Infeasible(
            "no feasible grid point inside the search box; refine the box or resolution".into(),
        ));
    };
    let mut evaluations = total;

    // Pass 2: all grid argmins within the tie tolerance of the scan minimum.
    let threshold = &best_value + &tie;
    let mut argmins: Vec<Vec<Rat>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let point = unflatten(flat, &steps);
            match set.is_feasible(&point) {
                Ok(true) => {
                    let value = objective.evaluate(&point)?;
                    Ok((value <= threshold).then_some(point))
                }
                Ok(false) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    evaluations += total;

    // Pass 3: coordinate-descent polish from the incumbent on halved steps.
    let mut step: Vec<Rat> = (0..n)
        .map(|axis| (&search_box.hi[axis] - &search_box.lo[axis]) * rat(1, 2 * resolution as i64))
        .collect();
    for _round in 0..20 {
        let mut improved = false;
        for axis in 0..n {
            if step[axis].is_zero() {
                continue;
            }
            for sign in [1i64, -1i64] {
                let mut candidate = best_point.clone();
                candidate[axis] = &candidate[axis] + &step[axis] * rat(sign, 1);
                if candidate[axis] < search_box.lo[axis] || candidate[axis] > search_box.hi[axis] {
                    continue;
                }
                if !set.is_feasible(&candidate)? {
                    continue;
                }
                let value = objective.evaluate(&candidate)?;
                evaluations += 1;
                if value < best_value {
                    best_value = value;
                    best_point = candidate;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s /= rat(2, 1);
            }
        }
    }

    // Polish may have moved strictly below the scanned grid; re-filter.
    let threshold = &best_value + &tie;
    argmins.push(best_point);
    argmins.retain(|point| objective.evaluate(point).expect("seen point") <= threshold);
    argmins.sort();
    argmins.dedup();

    Ok(BruteForceResult {
        value: best_value,
        argmins,
        evaluations,
        exact: false,
        recession,
    })
}

fn min_candidate(
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

fn unflatten(mut flat: usize, steps: &[Vec<Rat>]) -> Vec<Rat> {
    let mut point = vec![Rat::zero(); steps.len()];
    for axis in (0..steps.len()).rev() {
        let size = steps[axis].len();
        point[axis] = steps[axis][flat % size].clone();
        flat /= size;
    }
    point
}

fn bounding_box_from_vertices(vertices: &[Vec<Rat>]) -> SearchBox {
    let n = vertices[0].len();
    let mut lo = vertices[0].clone();
    let mut hi = vertices[0].clone();
    for vertex in vertices.iter().skip(1) {
        for axis in 0..n {
            if vertex[axis] < lo[axis] {
                lo[axis] = vertex[axis].clone();
            }
            if vertex[axis] > hi[axis] {
                hi[axis] = vertex[axis].clone();
            }
        }
    }
    SearchBox { lo, hi }
}
