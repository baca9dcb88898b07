//! Assembly of the lifted convex program, the equivalent completely
//! positive tensor programs for homogeneous and inhomogeneous objectives
//! over `{x | Bx <= b, x >= 0}`, and their copositive dual programs.
//!
//! The construction introduces a slack coordinate: a certified scaling
//! vector `α >= 0` with `αᵀx <= 1` on the feasible set extends every
//! feasible `x` to `y = (x, 1 - αᵀx)`, which satisfies `Ay >= 0` and
//! `aᵀy = 1` for the normalizer `a = (α, 1)` and the stacked map
//! `A = [b aᵀ - (B | 0); I]`. Rank-1 powers of lifted points are the
//! feasible atoms of the resulting cone programs; the inhomogeneous variant
//! adds a homogenizing coordinate in slot 0 together with coupling rows
//! `(1, -aᵀ)` that pin it to the normalizer value.
//!
//! Dual programs maximize `λ` subject to copositivity of
//! `objective - λ·M_d(a) - Σ U_j ×₁Mⱼᵀ ⋯ ×ₐMⱼᵀ` with copositive
//! multipliers `U_j`; the multiplier terms enter with a minus sign so that
//! pairing a dual-feasible point with any primal-feasible atom yields the
//! weak-duality bound directly.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{embed_tensor, Polynomial};
use crate::pop::{FeasibleSet, PolyhedralSet, PopInstance, PopKind};
use crate::rat::Rat;
use crate::tensor::{DenseMatrix, SymmetricTensor};

/// All auxiliary vectors, matrices and tensors derived from a certified
/// scaling vector for one polyhedral instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingData {
    /// Certified scaling vector, length n.
    pub alpha: Vec<Rat>,
    /// `a = (α, 1)`, length n+1; normalizes lifted points to `aᵀy = 1`.
    pub normalizer: Vec<Rat>,
    /// `[b aᵀ - (B | 0); I_{n+1}]`, shape (m+n+1) x (n+1); sends lifted
    /// feasible points to nonnegative residual vectors.
    pub feasibility_map: DenseMatrix,
    /// Number of duplicated coupling rows (any positive integer works; they
    /// are identical).
    pub coupling_count: usize,
    /// `(0, aᵀ)`, length n+2, the normalizer seen through the homogenizing
    /// coordinate.
    pub extended_normalizer: Vec<Rat>,
    /// `coupling_count` copies of the row `(1, -aᵀ)`, shape t x (n+2).
    pub coupling_map: DenseMatrix,
    /// `(0 | A)`, shape (m+n+1) x (n+2).
    pub extended_feasibility_map: DenseMatrix,
    /// Rank-1 power of `(1, -a)`; its vanishing pairing ties the
    /// homogenizing coordinate of every generator to the normalizer value.
    pub coupling_tensor: SymmetricTensor,
    /// Tensor order shared by every constraint of the derived programs.
    pub order: usize,
}

impl LiftingData {
    /// Assembles every derived quantity from the scaling vector, the
    /// constraint data and the target order.
    #[allow(clippy::needless_range_loop)]
    pub fn from_constraints(
        set: &PolyhedralSet,
        alpha: &[Rat],
        coupling_count: usize,
        order: usize,
    ) -> Result<Self> {
        let n = set.nvars();
        if alpha.len() != n {
            return Err(Error::invalid(format!(
                "alpha has length {}, instance has {n} variables",
                alpha.len()
            )));
        }
        let m = set.num_inequalities();
        let mut normalizer = alpha.to_vec();
        normalizer.push(Rat::one());

        // top block: b aᵀ - (B | 0)
        let mut top = DenseMatrix::zeros(m, n + 1);
        for row in 0..m {
            for col in 0..=n {
                let mut value = &set.b_rhs()[row] * &normalizer[col];
                if col < n {
                    value -= set.b_matrix().get(row, col);
                }
                top.set(row, col, value);
            }
        }
        let feasibility_map = top.vstack(&DenseMatrix::identity(n + 1))?;
        Self::from_components(alpha.to_vec(), coupling_count, feasibility_map, order)
    }

    /// Rebuilds the derived quantities from a scaling vector and an already
    /// assembled feasibility map (used when reloading exported programs).
    pub fn from_components(
        alpha: Vec<Rat>,
        coupling_count: usize,
        feasibility_map: DenseMatrix,
        order: usize,
    ) -> Result<Self> {
        if coupling_count < 1 {
            return Err(Error::invalid("coupling row count must be at least 1"));
        }
        if order < 1 {
            return Err(Error::invalid("tensor order must be at least 1"));
        }
        let n = alpha.len();
        if feasibility_map.cols() != n + 1 || feasibility_map.rows() < n + 1 {
            return Err(Error::invalid(format!(
                "feasibility map is {}x{}, expected at least {}x{}",
                feasibility_map.rows(),
                feasibility_map.cols(),
                n + 1,
                n + 1
            )));
        }
        let mut normalizer = alpha.clone();
        normalizer.push(Rat::one());

        let mut extended_normalizer = vec![Rat::zero()];
        extended_normalizer.extend(normalizer.iter().cloned());

        let coupling_row: Vec<Rat> = std::iter::once(Rat::one())
            .chain(normalizer.iter().map(|v| -v))
            .collect();
        let coupling_map = DenseMatrix::from_rows(vec![coupling_row.clone(); coupling_count])?;

        let mut extended_feasibility_map = DenseMatrix::zeros(feasibility_map.rows(), n + 2);
        for row in 0..feasibility_map.rows() {
            for col in 0..=n {
                extended_feasibility_map.set(row, col + 1, feasibility_map.get(row, col).clone());
            }
        }

        let coupling_tensor = SymmetricTensor::rank_one_power(&coupling_row, order)?;

        Ok(LiftingData {
            alpha,
            normalizer,
            feasibility_map,
            coupling_count,
            extended_normalizer,
            coupling_map,
            extended_feasibility_map,
            coupling_tensor,
            order,
        })
    }

    pub fn nvars(&self) -> usize {
        self.alpha.len()
    }

    /// True when the normalizer is componentwise strictly positive, the
    /// precondition for dual bound computation and strict-feasibility
    /// probing.
    pub fn normalizer_is_positive(&self) -> bool {
        self.normalizer.iter().all(|v| v > &Rat::zero())
    }
}

/// Builds lifting data for a polyhedral instance after verifying the
/// scaling certificate. The tensor order defaults to the objective degree.
pub fn build_lifting_data(
    p: &PopInstance,
    alpha: &[Rat],
    coupling_count: usize,
) -> Result<LiftingData> {
    build_lifting_data_with_order(p, alpha, coupling_count, p.default_order())
}

/// As [`build_lifting_data`], with an explicit tensor order (must be at
/// least the objective degree).
pub fn build_lifting_data_with_order(
    p: &PopInstance,
    alpha: &[Rat],
    coupling_count: usize,
    order: usize,
) -> Result<LiftingData> {
    let FeasibleSet::Polyhedral(set) = p.feasible() else {
        return Err(Error::invalid(
            "lifting data is defined for polyhedral feasible sets",
        ));
    };
    if order < p.objective().degree() {
        return Err(Error::invalid(format!(
            "order {} is below the objective degree {}",
            order,
            p.objective().degree()
        )));
    }
    if !set.alpha_certificate(alpha)? {
        return Err(Error::invalid(
            "alpha is not certified: alpha'x <= 1 fails somewhere on the feasible set",
        ));
    }
    LiftingData::from_constraints(set, alpha, coupling_count, order)
}

/// Lifts a feasible point to `y = (x, 1 - αᵀx)`, which satisfies
/// `Ay >= 0` and `aᵀy = 1`.
pub fn lift_feasible_point(set: &PolyhedralSet, x: &[Rat], data: &LiftingData) -> Result<Vec<Rat>> {
    if !set.is_feasible(x)? {
        return Err(Error::invalid("cannot lift an infeasible point"));
    }
    let alpha_dot: Rat = data.alpha.iter().zip(x).map(|(a, b)| a * b).sum();
    let mut lifted = x.to_vec();
    lifted.push(Rat::one() - alpha_dot);
    debug_assert_eq!(
        data.normalizer
            .iter()
            .zip(&lifted)
            .map(|(a, b)| a * b)
            .sum::<Rat>(),
        Rat::one()
    );
    Ok(lifted)
}

/// The generator vector of the rank-1 atom a feasible point contributes to
/// the inhomogeneous program: `(1, x, 1 - αᵀx)`.
pub fn inhomogeneous_atom_vector(
    set: &PolyhedralSet,
    x: &[Rat],
    data: &LiftingData,
) -> Result<Vec<Rat>> {
    let mut atom = vec![Rat::one()];
    atom.extend(lift_feasible_point(set, x, data)?);
    Ok(atom)
}

/// A conic linear program over a completely positive tensor cone: linear
/// equalities plus mode-product maps whose images must stay completely
/// positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpTensorProgram {
    pub order: usize,
    pub base_dim: usize,
    pub kind: PopKind,
    pub objective: SymmetricTensor,
    /// Constraints `⟨X, C⟩ = c`.
    pub eq_constraints: Vec<(SymmetricTensor, Rat)>,
    /// Maps `M`: `X ×₁M ⋯ ×ₐM` must be completely positive in dimension
    /// `M.rows()`.
    pub membership_maps: Vec<DenseMatrix>,
}

impl CpTensorProgram {
    fn validate(&self) -> Result<()> {
        if self.objective.order() != self.order || self.objective.dim() != self.base_dim {
            return Err(Error::invalid("objective tensor shape mismatch"));
        }
        for (tensor, _) in &self.eq_constraints {
            if tensor.order() != self.order || tensor.dim() != self.base_dim {
                return Err(Error::invalid("equality tensor shape mismatch"));
            }
        }
        for map in &self.membership_maps {
            if map.cols() != self.base_dim {
                return Err(Error::invalid("membership map column count mismatch"));
            }
        }
        Ok(())
    }
}

/// The completely positive program equivalent to a homogeneous instance:
/// variable dimension n+1, one normalization equality, one membership map.
pub fn build_homogeneous_cptp(p: &PopInstance, data: &LiftingData) -> Result<CpTensorProgram> {
    if p.kind() != PopKind::Homogeneous {
        return Err(Error::invalid("instance is not declared homogeneous"));
    }
    let n = p.nvars();
    if data.nvars() != n {
        return Err(Error::invalid("lifting data dimension mismatch"));
    }
    let objective = if p.objective().is_zero() {
        SymmetricTensor::zero(data.order, n + 1)?
    } else {
        if p.objective().degree() != data.order {
            return Err(Error::invalid(
                "homogeneous programs need the tensor order to equal the objective degree",
            ));
        }
        embed_tensor(&p.objective().homogeneous_tensor()?, n + 1)?
    };
    let normalization = SymmetricTensor::rank_one_power(&data.normalizer, data.order)?;
    let program = CpTensorProgram {
        order: data.order,
        base_dim: n + 1,
        kind: PopKind::Homogeneous,
        objective,
        eq_constraints: vec![(normalization, Rat::one())],
        membership_maps: vec![data.feasibility_map.clone()],
    };
    program.validate()?;
    Ok(program)
}

/// The completely positive program equivalent to an inhomogeneous instance:
/// variable dimension n+2 with a homogenizing coordinate in slot 0, two
/// equalities (normalization and coupling) and two membership maps.
pub fn build_inhomogeneous_cptp(p: &PopInstance, data: &LiftingData) -> Result<CpTensorProgram> {
    if p.kind() != PopKind::Inhomogeneous {
        return Err(Error::invalid("instance is not declared inhomogeneous"));
    }
    let n = p.nvars();
    if data.nvars() != n {
        return Err(Error::invalid("lifting data dimension mismatch"));
    }
    if data.order < p.objective().degree().max(1) {
        return Err(Error::invalid("tensor order is below the objective degree"));
    }
    // The objective seen in the lifted variables: same terms, one extra
    // (slack) variable that never appears.
    let padded = Polynomial::from_terms(
        n + 1,
        p.objective().terms().map(|(exponents, coeff)| {
            let mut padded_exps = exponents.clone();
            padded_exps.push(0);
            (padded_exps, coeff.clone())
        }),
    )?;
    let objective = padded.coefficient_tensor(data.order)?;
    let normalization = SymmetricTensor::rank_one_power(&data.extended_normalizer, data.order)?;
    let program = CpTensorProgram {
        order: data.order,
        base_dim: n + 2,
        kind: PopKind::Inhomogeneous,
        objective,
        eq_constraints: vec![
            (normalization, Rat::one()),
            (data.coupling_tensor.clone(), Rat::zero()),
        ],
        membership_maps: vec![
            data.coupling_map.clone(),
            data.extended_feasibility_map.clone(),
        ],
    };
    program.validate()?;
    Ok(program)
}

/// A free scalar of a copositive program together with its coefficient
/// tensor in the affine expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualScalar {
    pub name: String,
    pub coeff: SymmetricTensor,
}

/// A copositive multiplier slot: the multiplier lives in the copositive
/// cone of `(order, dim)` and enters the affine expression through the
/// uniform mode product with `adjoint` (the transpose of a primal
/// membership map), with a minus sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplierSlot {
    pub dim: usize,
    pub adjoint: DenseMatrix,
}

/// Dual data: maximize the scalar named `lambda` subject to the affine
/// expression staying copositive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopositiveProgram {
    pub order: usize,
    pub base_dim: usize,
    pub kind: PopKind,
    /// The primal objective tensor.
    pub base: SymmetricTensor,
    /// Free scalars in order: `lambda`, then `mu` for inhomogeneous duals.
    pub scalars: Vec<DualScalar>,
    pub slots: Vec<MultiplierSlot>,
    /// The vector whose rank-1 power multiplies `lambda` (negated) in the
    /// affine expression: `a` or `(0, a)`.
    pub normalization: Vec<Rat>,
}

/// Values for every free scalar and multiplier slot of a dual program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualAssignment {
    pub scalars: Vec<Rat>,
    pub multipliers: Vec<SymmetricTensor>,
}

impl DualAssignment {
    /// Scalars only, all multipliers zero.
    pub fn scalars_only(program: &CopositiveProgram, scalars: Vec<Rat>) -> Result<Self> {
        if scalars.len() != program.scalars.len() {
            return Err(Error::invalid(format!(
                "expected {} scalars, got {}",
                program.scalars.len(),
                scalars.len()
            )));
        }
        let multipliers = program
            .slots
            .iter()
            .map(|slot| SymmetricTensor::zero(program.order, slot.dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(DualAssignment {
            scalars,
            multipliers,
        })
    }
}

impl CopositiveProgram {
    /// Assembles the affine expression
    /// `base + Σ sᵢ·coeffᵢ - Σ Uⱼ ×₁Mⱼᵀ ⋯ ×ₐMⱼᵀ` exactly.
    pub fn affine_expression(&self, assignment: &DualAssignment) -> Result<SymmetricTensor> {
        if assignment.scalars.len() != self.scalars.len()
            || assignment.multipliers.len() != self.slots.len()
        {
            return Err(Error::invalid("assignment shape mismatch"));
        }
        let mut expr = self.base.clone();
        for (scalar, value) in self.scalars.iter().zip(&assignment.scalars) {
            expr = expr.add(&scalar.coeff.scale(value))?;
        }
        for (slot, multiplier) in self.slots.iter().zip(&assignment.multipliers) {
            if multiplier.order() != self.order || multiplier.dim() != slot.dim {
                return Err(Error::invalid(format!(
                    "multiplier has shape ({}, {}), slot expects ({}, {})",
                    multiplier.order(),
                    multiplier.dim(),
                    self.order,
                    slot.dim
                )));
            }
            let mapped = multiplier.mode_multiply_uniform(&slot.adjoint)?;
            expr = expr.sub(&mapped)?;
        }
        Ok(expr)
    }
}

/// Dual of a homogeneous program: maximize λ with
/// `objective - λ·M_d(a) - U ×₁Aᵀ ⋯ ×ₐAᵀ` copositive in dimension n+1 and
/// `U` copositive in dimension m+n+1.
pub fn dual_homogeneous(prog: &CpTensorProgram, data: &LiftingData) -> Result<CopositiveProgram> {
    if prog.kind != PopKind::Homogeneous
        || prog.base_dim != data.nvars() + 1
        || prog.order != data.order
        || prog.membership_maps.len() != 1
    {
        return Err(Error::invalid(
            "program shape does not match a homogeneous reformulation",
        ));
    }
    let lambda_coeff =
        SymmetricTensor::rank_one_power(&data.normalizer, data.order)?.scale(&-Rat::one());
    Ok(CopositiveProgram {
        order: prog.order,
        base_dim: prog.base_dim,
        kind: PopKind::Homogeneous,
        base: prog.objective.clone(),
        scalars: vec![DualScalar {
            name: "lambda".into(),
            coeff: lambda_coeff,
        }],
        slots: vec![MultiplierSlot {
            dim: data.feasibility_map.rows(),
            adjoint: data.feasibility_map.transpose(),
        }],
        normalization: data.normalizer.clone(),
    })
}

/// Dual of an inhomogeneous program: maximize λ with
/// `objective - λ·M_d(ā) - μ·T - U¹ ×₁M₁ᵀ⋯ - U² ×₁M₂ᵀ⋯` copositive in
/// dimension n+2, where `T` is the coupling tensor and `μ` is free.
pub fn dual_inhomogeneous(prog: &CpTensorProgram, data: &LiftingData) -> Result<CopositiveProgram> {
    if prog.kind != PopKind::Inhomogeneous
        || prog.base_dim != data.nvars() + 2
        || prog.order != data.order
        || prog.membership_maps.len() != 2
    {
        return Err(Error::invalid(
            "program shape does not match an inhomogeneous reformulation",
        ));
    }
    let lambda_coeff =
        SymmetricTensor::rank_one_power(&data.extended_normalizer, data.order)?.scale(&-Rat::one());
    let mu_coeff = data.coupling_tensor.scale(&-Rat::one());
    Ok(CopositiveProgram {
        order: prog.order,
        base_dim: prog.base_dim,
        kind: PopKind::Inhomogeneous,
        base: prog.objective.clone(),
        scalars: vec![
            DualScalar {
                name: "lambda".into(),
                coeff: lambda_coeff,
            },
            DualScalar {
                name: "mu".into(),
                coeff: mu_coeff,
            },
        ],
        slots: prog
            .membership_maps
            .iter()
            .map(|map| MultiplierSlot {
                dim: map.rows(),
                adjoint: map.transpose(),
            })
            .collect(),
        normalization: data.extended_normalizer.clone(),
    })
}

/// Rebuilds lifting data from an exported program and its meta block. The
/// feasibility map is recovered from the membership maps, so the original
/// constraint matrices are not needed.
pub fn lifting_data_from_program(
    prog: &CpTensorProgram,
    alpha: &[Rat],
    coupling_count: usize,
) -> Result<LiftingData> {
    match prog.kind {
        PopKind::Homogeneous => {
            if prog.membership_maps.len() != 1 {
                return Err(Error::invalid(
                    "homogeneous programs carry one membership map",
                ));
            }
            let map = prog.membership_maps[0].clone();
            if map.cols() != alpha.len() + 1 {
                return Err(Error::invalid("membership map width does not match alpha"));
            }
            LiftingData::from_components(alpha.to_vec(), coupling_count, map, prog.order)
        }
        PopKind::Inhomogeneous => {
            if prog.membership_maps.len() != 2 {
                return Err(Error::invalid(
                    "inhomogeneous programs carry two membership maps",
                ));
            }
            let extended = &prog.membership_maps[1];
            if extended.cols() != alpha.len() + 2 {
                return Err(Error::invalid("membership map width does not match alpha"));
            }
            let mut stripped = DenseMatrix::zeros(extended.rows(), extended.cols() - 1);
            for row in 0..extended.rows() {
                if !extended.get(row, 0).is_zero() {
                    return Err(Error::invalid(
                        "extended feasibility map must have a zero leading column",
                    ));
                }
                for col in 1..extended.cols() {
                    stripped.set(row, col - 1, extended.get(row, col).clone());
                }
            }
            let data =
                LiftingData::from_components(alpha.to_vec(), coupling_count, stripped, prog.order)?;
            if data.coupling_map != prog.membership_maps[0] {
                return Err(Error::invalid(
                    "coupling rows do not match the exported alpha and t",
                ));
            }
            Ok(data)
        }
    }
}

/// The lifted convex formulation: a linear objective over convex
/// combinations of point atoms `M_d(1, x)`, `x` feasible, plus recession
/// atoms `M_d(0, y)`, `y` in the recession cone.
#[derive(Debug, Clone)]
pub struct LiftedProgram {
    pub order: usize,
    /// n + 1 (one leading coordinate distinguishing point from recession
    /// atoms).
    pub dim: usize,
    pub objective: SymmetricTensor,
    pub feasible: FeasibleSet,
    pub recession: crate::pop::ConeSet,
}

impl LiftedProgram {
    /// The atom of a feasible point, `M_d(1, x)`.
    pub fn point_atom(&self, x: &[Rat]) -> Result<SymmetricTensor> {
        if !self.feasible.contains(x)? {
            return Err(Error::invalid("point is not feasible"));
        }
        let mut lifted = vec![Rat::one()];
        lifted.extend_from_slice(x);
        SymmetricTensor::rank_one_power(&lifted, self.order)
    }

    /// The atom of a recession direction, `M_d(0, y)`.
    pub fn recession_atom(&self, y: &[Rat]) -> Result<SymmetricTensor> {
        if !self.recession.contains(y)? {
            return Err(Error::invalid("direction is not in the recession cone"));
        }
        let mut lifted = vec![Rat::zero()];
        lifted.extend_from_slice(y);
        SymmetricTensor::rank_one_power(&lifted, self.order)
    }
}

/// Builds the lifted formulation of an instance: the coefficient tensor of
/// the objective paired against atoms with a leading 1 (feasible points) or
/// a leading 0 (recession directions).
pub fn build_lifted(p: &PopInstance) -> Result<LiftedProgram> {
    let order = p.default_order();
    let objective = p.objective().coefficient_tensor(order)?;
    Ok(LiftedProgram {
        order,
        dim: p.nvars() + 1,
        objective,
        feasible: p.feasible().clone(),
        recession: p.feasible().recession_cone(),
    })
}

/// Solution of the lifted program over a finite feasible set.
#[derive(Debug, Clone)]
pub struct LiftedFiniteSolution {
    pub order: usize,
    pub dim: usize,
    /// Optimal value, exact; equals the minimum of the objective over the
    /// points.
    pub value: Rat,
    /// Minimizing points, sorted lexicographically.
    pub optimal_points: Vec<Vec<Rat>>,
    /// The atoms `M_d(1, x)` of the minimizing points; the optimal set of
    /// the lifted program is their convex hull.
    pub optimal_atoms: Vec<SymmetricTensor>,
}

impl LiftedFiniteSolution {
    /// A member of the optimal set: the convex combination of the optimal
    /// atoms with the given weights.
    pub fn hull_member(&self, weights: &[Rat]) -> Result<SymmetricTensor> {
        if weights.len() != self.optimal_atoms.len() {
            return Err(Error::invalid("one weight per optimal atom required"));
        }
        if weights.iter().any(|w| w < &Rat::zero()) {
            return Err(Error::invalid("hull weights must be nonnegative"));
        }
        if weights.iter().sum::<Rat>() != Rat::one() {
            return Err(Error::invalid("hull weights must sum to one"));
        }
        let mut member = SymmetricTensor::zero(self.order, self.dim)?;
        for (weight, atom) in weights.iter().zip(&self.optimal_atoms) {
            member = member.add(&atom.scale(weight))?;
        }
        Ok(member)
    }
}

/// Solves the lifted program of a finite-set instance exactly. The
/// objective is linear in the atom weights, so the optimum is attained on
/// atoms and the optimal set is the convex hull of the minimizing ones.
pub fn solve_lifted_finite(p: &PopInstance) -> Result<LiftedFiniteSolution> {
    let FeasibleSet::Finite(set) = p.feasible() else {
        return Err(Error::invalid(
            "the lifted enumeration solver needs a finite feasible set",
        ));
    };
    let lifted = build_lifted(p)?;
    let mut best: Option<Rat> = None;
    let mut scored: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity(set.points().len());
    for point in set.points() {
        let atom = lifted.point_atom(point)?;
        let value = lifted.objective.inner(&atom)?;
        debug_assert_eq!(value, p.objective().evaluate(point)?);
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value.clone());
        }
        scored.push((point.clone(), value));
    }
    let value = best.ok_or_else(|| Error::Infeasible("finite set is empty".into()))?;
    let mut optimal_points: Vec<Vec<Rat>> = scored
        .into_iter()
        .filter(|(_, v)| *v == value)
        .map(|(p, _)| p)
        .collect();
    optimal_points.sort();
    let optimal_atoms = optimal_points
        .iter()
        .map(|point| lifted.point_atom(point))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftedFiniteSolution {
        order: lifted.order,
        dim: lifted.dim,
        value,
        optimal_points,
        optimal_atoms,
    })
}

/// Result of splitting rank-1 generators by the sign of their normalizer
/// pairing and rescaling the positive class.
#[derive(Debug, Clone)]
pub struct NormalizationSplit {
    /// `(λᵈ, z)` pairs with `aᵀz = 1`; the weights of the convex-side
    /// atoms.
    pub scaled: Vec<(Rat, Vec<Rat>)>,
    /// Generators with `aᵀy = 0` (recession side), unscaled.
    pub recession: Vec<Vec<Rat>>,
    order: usize,
    dim: usize,
}

impl NormalizationSplit {
    /// `Σ λᵈ M_d(z) + Σ M_d(y)`; equals the sum of the rank-1 powers of the
    /// original generators.
    pub fn reconstruct(&self) -> Result<SymmetricTensor> {
        let mut total = SymmetricTensor::zero(self.order, self.dim)?;
        for (weight, z) in &self.scaled {
            total = total.add(&SymmetricTensor::rank_one_power(z, self.order)?.scale(weight))?;
        }
        for y in &self.recession {
            total = total.add(&SymmetricTensor::rank_one_power(y, self.order)?)?;
        }
        Ok(total)
    }
}

/// Classifies generators by `aᵀy > 0` versus `aᵀy = 0` and rescales the
/// positive ones to `z = y / (aᵀy)` with weight `(aᵀy)^d`, reproducing the
/// represented tensor exactly.
pub fn normalization_split(
    generators: &[Vec<Rat>],
    normalizer: &[Rat],
    order: usize,
) -> Result<NormalizationSplit> {
    let dim = normalizer.len();
    let mut scaled = Vec::new();
    let mut recession = Vec::new();
    for y in generators {
        if y.len() != dim {
            return Err(Error::invalid("generator length mismatch"));
        }
        let pairing: Rat = normalizer.iter().zip(y).map(|(a, b)| a * b).sum();
        if pairing < Rat::zero() {
            return Err(Error::invalid(
                "generator pairs negatively with the normalizer; split undefined",
            ));
        }
        if pairing.is_zero() {
            recession.push(y.clone());
        } else {
            let z: Vec<Rat> = y.iter().map(|v| v / &pairing).collect();
            let mut weight = Rat::one();
            for _ in 0..order {
                weight *= &pairing;
            }
            scaled.push((weight, z));
        }
    }
    Ok(NormalizationSplit {
        scaled,
        recession,
        order,
        dim,
    })
}
