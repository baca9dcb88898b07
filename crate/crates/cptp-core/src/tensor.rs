//! Exact symmetric tensor algebra.
//!
//! Tensors of order `d` and dimension `n` are stored sparsely: one exact
//! rational value per canonical (sorted) multi-index orbit. Symmetry is
//! therefore structural rather than enforced by redundant storage, and the
//! full-index-space inner product is recovered by weighting each orbit with
//! its multinomial multiplicity `d!/∏ m_v!`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Canonical (non-decreasing) multi-index of a symmetric tensor entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    indices: Vec<usize>,
}

impl MultiIndex {
    /// Canonicalizes by sorting; any permutation of the same multiset maps
    /// to the same `MultiIndex`.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex { indices }
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("order >= 1")
    }

    /// Counts of each distinct index value, in increasing index order.
    pub fn value_counts(&self) -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &i in &self.indices {
            match counts.last_mut() {
                Some((value, count)) if *value == i => *count += 1,
                _ => counts.push((i, 1)),
            }
        }
        counts
    }

    /// Number of distinct permutations of this index multiset,
    /// `d! / ∏ m_v!`.
    pub fn orbit_multiplicity(&self) -> BigInt {
        let mut result = factorial(self.order());
        for (_, count) in self.value_counts() {
            result /= factorial(count);
        }
        result
    }
}

// Factorials up to 20! fit in u64; beyond desk scale fall back to BigInt.
const SMALL_FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut i = 1;
    while i < 21 {
        table[i] = table[i - 1] * i as u64;
        i += 1;
    }
    table
};

pub(crate) fn factorial(n: usize) -> BigInt {
    if n < SMALL_FACTORIALS.len() {
        BigInt::from(SMALL_FACTORIALS[n])
    } else {
        let mut acc = BigInt::from(SMALL_FACTORIALS[20]);
        for k in 21..=n {
            acc *= BigInt::from(k);
        }
        acc
    }
}

/// All canonical multi-indices of the given order over `[0, dim)`,
/// in lexicographic order.
pub fn canonical_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; order];
    loop {
        out.push(current.clone());
        // advance the non-decreasing odometer
        let mut pos = order;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] + 1 < dim {
                let value = current[pos] + 1;
                for slot in current.iter_mut().skip(pos) {
                    *slot = value;
                }
                break;
            }
        }
    }
}

/// Distinct permutations of a sorted index multiset.
pub(crate) fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut remaining = sorted.to_vec();
    let mut current = Vec::with_capacity(sorted.len());
    let mut out = Vec::new();
    permute_rec(&mut remaining, &mut current, &mut out);
    out
}

fn permute_rec(remaining: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining.is_empty() {
        out.push(current.clone());
        return;
    }
    let mut last_picked: Option<usize> = None;
    for i in 0..remaining.len() {
        let value = remaining[i];
        if last_picked == Some(value) {
            continue;
        }
        last_picked = Some(value);
        remaining.remove(i);
        current.push(value);
        permute_rec(remaining, current, out);
        current.pop();
        remaining.insert(i, value);
    }
}

/// Order-`d`, dimension-`n` symmetric tensor with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    entries: BTreeMap<MultiIndex, Rat>,
}

impl SymmetricTensor {
    pub fn zero(order: usize, dim: usize) -> Result<Self> {
        if order < 1 || dim < 1 {
            return Err(Error::invalid(format!(
                "tensor needs order >= 1 and dim >= 1, got order {order}, dim {dim}"
            )));
        }
        Ok(SymmetricTensor {
            order,
            dim,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a tensor from (index, value) pairs. Indices are canonicalized,
    /// repeated orbits are summed, and zero results are dropped.
    pub fn from_entries<I>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Rat)>,
    {
        let mut tensor = SymmetricTensor::zero(order, dim)?;
        for (indices, value) in entries {
            tensor.add_to_entry(indices, value)?;
        }
        Ok(tensor)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical entries in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.entries.iter()
    }

    fn check_index(&self, indices: &[usize]) -> Result<()> {
        if indices.len() != self.order {
            return Err(Error::invalid(format!(
                "index has length {}, tensor order is {}",
                indices.len(),
                self.order
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(Error::invalid(format!(
                "index component {bad} out of range for dimension {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Entry lookup for an arbitrary-order index tuple: canonicalizes by
    /// sorting, absent orbits read as zero.
    pub fn entry(&self, indices: &[usize]) -> Result<Rat> {
        self.check_index(indices)?;
        let key = MultiIndex::new(indices.to_vec());
        Ok(self.entries.get(&key).cloned().unwrap_or_else(Rat::zero))
    }

    /// Adds `value` into the orbit of `indices`, removing the orbit when the
    /// sum cancels to zero.
    pub fn add_to_entry(&mut self, indices: Vec<usize>, value: Rat) -> Result<()> {
        self.check_index(&indices)?;
        if value.is_zero() {
            return Ok(());
        }
        let key = MultiIndex::new(indices);
        let slot = self.entries.entry(key.clone()).or_insert_with(Rat::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
        Ok(())
    }

    /// The symmetric rank-1 tensor `x ∘ x ∘ … ∘ x` (`d` factors): the entry
    /// at `(i_1, …, i_d)` is `x_{i_1} ⋯ x_{i_d}`.
    pub fn rank_one_power(x: &[Rat], order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::invalid("rank-1 power needs order >= 1"));
        }
        if x.is_empty() {
            return Err(Error::invalid("rank-1 power needs a nonempty vector"));
        }
        let dim = x.len();
        let support: Vec<usize> = (0..dim).filter(|&i| !x[i].is_zero()).collect();
        let mut tensor = SymmetricTensor::zero(order, dim)?;
        if support.is_empty() {
            return Ok(tensor);
        }
        // enumerate canonical indices over the support only
        for combo in canonical_indices(support.len(), order) {
            let indices: Vec<usize> = combo.iter().map(|&k| support[k]).collect();
            let mut value = Rat::one();
            for &i in &indices {
                value *= &x[i];
            }
            tensor.entries.insert(MultiIndex::new(indices), value);
        }
        Ok(tensor)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::invalid(format!(
                "shape mismatch: ({}, {}) vs ({}, {})",
                self.order, self.dim, other.order, other.dim
            )));
        }
        Ok(())
    }

    /// Full-index-space inner product `Σ a_{i_1…i_d} b_{i_1…i_d}`, computed
    /// as a multiplicity-weighted sum over canonical orbits.
    pub fn inner(&self, other: &Self) -> Result<Rat> {
        self.check_same_shape(other)?;
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Rat::zero();
        for (key, value) in &small.entries {
            if let Some(other_value) = large.entries.get(key) {
                acc += Rat::from_integer(key.orbit_multiplicity()) * value * other_value;
            }
        }
        Ok(acc)
    }

    /// Value of the associated form `A x^d = ⟨A, M_d(x)⟩`, evaluated exactly.
    pub fn form_value(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has length {}, tensor dimension is {}",
                x.len(),
                self.dim
            )));
        }
        let mut acc = Rat::zero();
        for (key, value) in &self.entries {
            let mut term = Rat::from_integer(key.orbit_multiplicity()) * value;
            for &i in key.indices() {
                if x[i].is_zero() {
                    term = Rat::zero();
                    break;
                }
                term *= &x[i];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// The uniform mode product `T ×₁M ×₂M ⋯ ×ₐM`. With identical factor
    /// matrices and symmetric input the result is symmetric, so only
    /// canonical entries of the image are materialized.
    pub fn mode_multiply_uniform(&self, m: &DenseMatrix) -> Result<Self> {
        if m.cols() != self.dim {
            return Err(Error::invalid(format!(
                "matrix has {} columns, tensor dimension is {}",
                m.cols(),
                self.dim
            )));
        }
        if m.rows() == 0 {
            return Err(Error::invalid("mode product needs a nonempty matrix"));
        }
        let image_dim = m.rows();
        let mut out = SymmetricTensor::zero(self.order, image_dim)?;
        if self.is_zero() {
            return Ok(out);
        }
        let inputs: Vec<(Vec<Vec<usize>>, &Rat)> = self
            .entries
            .iter()
            .map(|(key, value)| (distinct_permutations(key.indices()), value))
            .collect();
        for target in canonical_indices(image_dim, self.order) {
            let mut acc = Rat::zero();
            for (perms, value) in &inputs {
                let mut perm_sum = Rat::zero();
                for perm in perms {
                    let mut product = Rat::one();
                    let mut vanished = false;
                    for (slot, &source) in perm.iter().enumerate() {
                        let factor = m.get(target[slot], source);
                        if factor.is_zero() {
                            vanished = true;
                            break;
                        }
                        product *= factor;
                    }
                    if !vanished {
                        perm_sum += product;
                    }
                }
                if !perm_sum.is_zero() {
                    acc += perm_sum * *value;
                }
            }
            if !acc.is_zero() {
                out.entries.insert(MultiIndex::new(target), acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Rat) -> Self {
        if factor.is_zero() {
            return SymmetricTensor {
                order: self.order,
                dim: self.dim,
                entries: BTreeMap::new(),
            };
        }
        SymmetricTensor {
            order: self.order,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(key, value)| (key.clone(), value * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (key, value) in &other.entries {
            let slot = out.entries.entry(key.clone()).or_insert_with(Rat::zero);
            *slot += value;
            if slot.is_zero() {
                out.entries.remove(key);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rat::one()))
    }
}

/// Checks the adjoint identity
/// `⟨X, A ×₁M ⋯ ×ₐM⟩ = ⟨X ×₁Mᵀ ⋯ ×ₐMᵀ, A⟩` exactly.
pub fn adjoint_pairing_check(
    x: &SymmetricTensor,
    a: &SymmetricTensor,
    m: &DenseMatrix,
) -> Result<bool> {
    if x.order() != a.order() {
        return Err(Error::invalid(format!(
            "order mismatch: {} vs {}",
            x.order(),
            a.order()
        )));
    }
    if m.rows() != x.dim() || m.cols() != a.dim() {
        return Err(Error::invalid(format!(
            "matrix is {}x{}, expected {}x{}",
            m.rows(),
            m.cols(),
            x.dim(),
            a.dim()
        )));
    }
    let lhs = x.inner(&a.mode_multiply_uniform(m)?)?;
    let rhs = x.mode_multiply_uniform(&m.transpose())?.inner(a)?;
    Ok(lhs == rhs)
}

/// Row-major dense matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Result<Self> {
        if rows.checked_mul(cols).is_none_or(|len| len != data.len()) {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("matrix rows have unequal lengths"));
        }
        Ok(DenseMatrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &Rat {
        &self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rat) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rat] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rat]> {
        self.data.chunks(self.cols)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "vector has length {}, matrix has {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(self
            .row_iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Stacks `self` on top of `other` (column counts must agree).
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::invalid("vstack needs equal column counts"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        DenseMatrix::new(self.rows + other.rows, self.cols, data)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    //! Brute-force reference implementations, independent of the
    //! multiplicity-weighted fast paths they are used to check.

    use super::*;

    /// Every index tuple in the full (non-canonical) space `[0, dim)^order`.
    pub fn full_index_space(dim: usize, order: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..order {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..dim).map(move |i| {
                        let mut next = prefix.clone();
                        next.push(i);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Inner product by literal summation over the full index space.
    pub fn naive_inner(a: &SymmetricTensor, b: &SymmetricTensor) -> Rat {
        full_index_space(a.dim(), a.order())
            .into_iter()
            .map(|idx| a.entry(&idx).unwrap() * b.entry(&idx).unwrap())
            .sum()
    }

    /// Mode product by literal summation over the defining formula.
    pub fn naive_mode_multiply(t: &SymmetricTensor, m: &DenseMatrix) -> SymmetricTensor {
        let p = m.rows();
        let mut out = SymmetricTensor::zero(t.order(), p).unwrap();
        for target in canonical_indices(p, t.order()) {
            let mut acc = Rat::zero();
            for source in full_index_space(t.dim(), t.order()) {
                let mut product = t.entry(&source).unwrap();
                for (slot, &j) in source.iter().enumerate() {
                    product *= m.get(target[slot], j);
                }
                acc += product;
            }
            out.add_to_entry(target, acc).unwrap();
        }
        out
    }

    pub fn rat_vec(values: &[i64]) -> Vec<Rat> {
        values.iter().map(|&v| crate::rat::rat_int(v)).collect()
    }
}
