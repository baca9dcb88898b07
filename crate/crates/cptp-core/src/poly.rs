//! Sparse multivariate polynomials over exact rationals, and the maps
//! between polynomials and symmetric coefficient tensors.
//!
//! The augmented tensor of an `n`-variable polynomial of degree at most `d`
//! lives in dimension `n + 1`: index 0 is the constant slot, the original
//! variables occupy indices `1..=n`. Pairing that tensor with the rank-1
//! power of `(1, x)` reproduces the polynomial value exactly, and pairing
//! with `(0, x)` isolates the degree-`d` homogeneous component.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::tensor::{factorial, SymmetricTensor};

/// Sparse polynomial: a map from exponent vectors to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<usize>, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial, merging duplicate exponent vectors and dropping
    /// zero coefficients.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Rat)>,
    {
        let mut poly = Polynomial::zero(nvars);
        for (exponents, coeff) in terms {
            poly.add_term(exponents, coeff)?;
        }
        Ok(poly)
    }

    pub fn constant(nvars: usize, value: Rat) -> Self {
        Polynomial::from_terms(nvars, vec![(vec![0; nvars], value)]).expect("valid exponents")
    }

    pub fn add_term(&mut self, exponents: Vec<usize>, coeff: Rat) -> Result<()> {
        if exponents.len() != self.nvars {
            return Err(Error::invalid(format!(
                "exponent vector has length {}, polynomial has {} variables",
                exponents.len(),
                self.nvars
            )));
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let slot = self
            .terms
            .entry(exponents.clone())
            .or_insert_with(Rat::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exponents);
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<usize>());
        match degrees.next() {
            None => true, // zero polynomial, vacuously
            Some(first) => degrees.all(|d| d == first),
        }
    }

    /// Exact evaluation `Σ f_α x^α`.
    pub fn evaluate(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.nvars {
            return Err(Error::invalid(format!(
                "point has length {}, polynomial has {} variables",
                x.len(),
                self.nvars
            )));
        }
        let mut acc = Rat::zero();
        for (exponents, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, &e) in exponents.iter().enumerate() {
                for _ in 0..e {
                    if term.is_zero() {
                        break;
                    }
                    term *= &x[i];
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// The homogeneous component of highest degree.
    pub fn top_component(&self) -> Result<Polynomial> {
        if self.is_zero() {
            return Err(Error::invalid(
                "the zero polynomial has no top homogeneous component",
            ));
        }
        let degree = self.degree();
        Ok(self.component_of_degree(degree))
    }

    fn component_of_degree(&self, degree: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<usize>() == degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Splits into homogeneous components, indexed by degree `0..=deg(f)`.
    pub fn decompose(&self) -> HomoDecomposition {
        let degree = self.degree();
        HomoDecomposition {
            parts: (0..=degree).map(|d| self.component_of_degree(d)).collect(),
        }
    }

    /// The augmented coefficient tensor of order `d >= deg(f)` and dimension
    /// `nvars + 1`: the orbit of a term `f_α x^α` (with `d - |α|` copies of
    /// the constant slot 0) stores `(d-|α|)! α_1! ⋯ α_n! / d! · f_α`.
    pub fn coefficient_tensor(&self, order: usize) -> Result<SymmetricTensor> {
        if order < 1 {
            return Err(Error::invalid("coefficient tensor needs order >= 1"));
        }
        if order < self.degree() {
            return Err(Error::invalid(format!(
                "order {} is below the polynomial degree {}",
                order,
                self.degree()
            )));
        }
        let mut tensor = SymmetricTensor::zero(order, self.nvars + 1)?;
        for (exponents, coeff) in &self.terms {
            let total: usize = exponents.iter().sum();
            let mut indices = vec![0usize; order - total];
            for (var, &e) in exponents.iter().enumerate() {
                indices.extend(std::iter::repeat_n(var + 1, e));
            }
            let mut weight = Rat::from_integer(factorial(order - total));
            for &e in exponents {
                weight *= Rat::from_integer(factorial(e));
            }
            weight /= Rat::from_integer(factorial(order));
            tensor.add_to_entry(indices, weight * coeff)?;
        }
        Ok(tensor)
    }

    /// The order-`deg(f)`, dimension-`nvars` tensor of a homogeneous
    /// polynomial (no constant slot): the orbit of `f_α x^α` stores
    /// `α_1! ⋯ α_n! / d! · f_α`.
    pub fn homogeneous_tensor(&self) -> Result<SymmetricTensor> {
        if self.is_zero() {
            return Err(Error::invalid(
                "homogeneous tensor of the zero polynomial has no defined order",
            ));
        }
        if !self.is_homogeneous() {
            return Err(Error::invalid(
                "polynomial is not homogeneous; use coefficient_tensor instead",
            ));
        }
        let order = self.degree();
        if order < 1 {
            return Err(Error::invalid(
                "homogeneous tensor needs degree >= 1; constants have none",
            ));
        }
        let mut tensor = SymmetricTensor::zero(order, self.nvars)?;
        for (exponents, coeff) in &self.terms {
            let mut indices = Vec::with_capacity(order);
            let mut weight = Rat::one();
            for (var, &e) in exponents.iter().enumerate() {
                indices.extend(std::iter::repeat_n(var, e));
                weight *= Rat::from_integer(factorial(e));
            }
            weight /= Rat::from_integer(factorial(order));
            tensor.add_to_entry(indices, weight * coeff)?;
        }
        Ok(tensor)
    }
}

/// Recovers the homogeneous polynomial represented by a symmetric tensor:
/// each orbit contributes `multiplicity × value` to the coefficient of the
/// monomial read off the index multiset.
pub fn polynomial_from_homogeneous_tensor(t: &SymmetricTensor) -> Result<Polynomial> {
    let mut poly = Polynomial::zero(t.dim());
    for (key, value) in t.entries() {
        let mut exponents = vec![0usize; t.dim()];
        for (index, count) in key.value_counts() {
            exponents[index] = count;
        }
        let coeff = Rat::from_integer(key.orbit_multiplicity()) * value;
        poly.add_term(exponents, coeff)?;
    }
    Ok(poly)
}

/// Zero-padding embedding into a larger dimension: entries whose indices all
/// lie below the original dimension are copied, everything else is zero.
pub fn embed_tensor(t: &SymmetricTensor, newdim: usize) -> Result<SymmetricTensor> {
    if newdim < t.dim() {
        return Err(Error::invalid(format!(
            "cannot embed dimension {} into smaller dimension {newdim}",
            t.dim()
        )));
    }
    SymmetricTensor::from_entries(
        t.order(),
        newdim,
        t.entries().map(|(k, v)| (k.indices().to_vec(), v.clone())),
    )
}

/// Homogeneous components `A_d x^d + … + A_1 x + A_0`, indexed by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomoDecomposition {
    parts: Vec<Polynomial>,
}

impl HomoDecomposition {
    /// The degree-`d` part; zero polynomial when absent.
    pub fn part(&self, degree: usize) -> Option<&Polynomial> {
        self.parts.get(degree)
    }

    pub fn parts(&self) -> &[Polynomial] {
        &self.parts
    }

    /// Recombines the parts; inverse of [`Polynomial::decompose`].
    pub fn recombine(&self) -> Polynomial {
        let nvars = self.parts.first().map_or(0, Polynomial::nvars);
        let mut poly = Polynomial::zero(nvars);
        for part in &self.parts {
            for (exponents, coeff) in part.terms() {
                poly.add_term(exponents.clone(), coeff.clone())
                    .expect("parts share nvars");
            }
        }
        poly
    }
}
