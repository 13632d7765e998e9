//! Sparse multivariate polynomials over a [`Scalar`] coefficient type.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors, which gives a
//! deterministic lexicographic term order for printing and serialization.
//! Zero coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Rational, Scalar};

/// Upper bound on stored terms; products beyond it fail with [`PolyError::TooLarge`].
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomial would exceed {limit} terms (got {terms})")]
    TooLarge { terms: usize, limit: usize },
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<S> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    /// The coordinate function `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::monomial(nvars, e, S::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: S) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector has wrong length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { nvars, terms }
    }

    /// `|x|^2 = x_1^2 + ... + x_n^2`.
    pub fn norm_squared(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for v in 0..nvars {
            let mut e = vec![0; nvars];
            e[v] = 2;
            p.add_term(e, S::one());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, S)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector has wrong length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> S {
        self.terms.get(exps).cloned().unwrap_or_else(S::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The common degree of all terms, if the polynomial is homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &S) {
        debug_assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (e, v) in &other.terms {
            self.add_term(e.clone(), v.clone() * c.clone());
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarMismatch(self.nvars, other.nvars));
        }
        let bound = self.terms.len().saturating_mul(other.terms.len());
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
            if bound > MAX_TERMS && out.terms.len() > MAX_TERMS {
                return Err(PolyError::TooLarge { terms: out.terms.len(), limit: MAX_TERMS });
            }
        }
        Ok(out)
    }

    pub fn checked_pow(&self, e: u32) -> Result<Self, PolyError> {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[var] -= 1;
            out.add_term(ne, c.clone() * S::from_int(e[var] as i64));
        }
        out
    }

    /// Mixed partial derivative; `orders[v]` is the order in variable `v`.
    pub fn derivative_orders(&self, orders: &[u32]) -> Self {
        let mut p = self.clone();
        for (v, &o) in orders.iter().enumerate() {
            for _ in 0..o {
                p = p.derivative(v);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for v in 0..self.nvars {
            out = &out + &self.derivative(v).derivative(v);
        }
        out
    }

    /// Multiply by `x_var`.
    pub fn mul_var(&self, var: usize) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = e.clone();
                    ne[var] += 1;
                    (ne, c.clone())
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t * x[v].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.to_f64()))
                .filter(|(_, c)| *c != 0.0)
                .collect(),
        }
    }

    /// Flatten into an evaluator suited for repeated `f64` evaluation.
    pub fn compile(&self) -> EvalPoly {
        EvalPoly::new(self)
    }
}

impl Polynomial<Rational> {
    /// `true` when every coefficient is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }
}

impl<S: Scalar> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{k}", v + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: Self) -> Polynomial<S> {
        let mut out = self.clone();
        out.add_scaled(rhs, &S::one());
        out
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: Self) -> Polynomial<S> {
        let mut out = self.clone();
        out.add_scaled(rhs, &-S::one());
        out
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        self.scale(&-S::one())
    }
}

/// Panics beyond [`MAX_TERMS`]; use [`Polynomial::checked_mul`] where inputs can grow.
impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: Self) -> Polynomial<S> {
        self.checked_mul(rhs).expect("polynomial product exceeded term limit")
    }
}

/// Dense, cache-friendly form of a polynomial for `f64` evaluation.
#[derive(Debug, Clone)]
pub struct EvalPoly {
    nvars: usize,
    max_exp: Vec<usize>,
    coeffs: Vec<f64>,
    exps: Vec<u32>,
}

impl EvalPoly {
    fn new<S: Scalar>(p: &Polynomial<S>) -> Self {
        let nvars = p.nvars;
        let mut max_exp = vec![0usize; nvars];
        let mut coeffs = Vec::with_capacity(p.terms.len());
        let mut exps = Vec::with_capacity(p.terms.len() * nvars);
        for (e, c) in &p.terms {
            coeffs.push(c.to_f64());
            for (v, &k) in e.iter().enumerate() {
                max_exp[v] = max_exp[v].max(k as usize);
                exps.push(k);
            }
        }
        EvalPoly { nvars, max_exp, coeffs, exps }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        // Power tables, at most 4 variables of modest degree at desk scale.
        let mut pows: Vec<Vec<f64>> = Vec::with_capacity(self.nvars);
        for v in 0..self.nvars {
            let mut row = Vec::with_capacity(self.max_exp[v] + 1);
            let mut acc = 1.0;
            row.push(acc);
            for _ in 0..self.max_exp[v] {
                acc *= x[v];
                row.push(acc);
            }
            pows.push(row);
        }
        let mut sum = 0.0;
        for (t, c) in self.coeffs.iter().enumerate() {
            let mut term = *c;
            let e = &self.exps[t * self.nvars..(t + 1) * self.nvars];
            for v in 0..self.nvars {
                term *= pows[v][e[v] as usize];
            }
            sum += term;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn p(terms: &[(&[u32], i64)]) -> Polynomial<Rational> {
        Polynomial::from_terms(2, terms.iter().map(|(e, c)| (e.to_vec(), int(*c))))
    }

    #[test]
    fn arithmetic_cancels_zero_terms() {
        let a = p(&[(&[1, 0], 2), (&[0, 1], 1)]);
        let b = p(&[(&[1, 0], -2)]);
        let s = &a + &b;
        assert_eq!(s.num_terms(), 1);
        assert_eq!(s.coeff(&[0, 1]), int(1));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn product_and_power() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let a = p(&[(&[1, 0], 1), (&[0, 1], 1)]);
        let sq = a.checked_pow(2).unwrap();
        assert_eq!(sq, p(&[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]));
        assert_eq!(sq.homogeneous_degree(), Some(2));
    }

    #[test]
    fn derivative_and_laplacian() {
        // x^3 y -> d/dx = 3 x^2 y ; laplacian = 6 x y
        let a = p(&[(&[3, 1], 1)]);
        assert_eq!(a.derivative(0), p(&[(&[2, 1], 3)]));
        assert_eq!(a.laplacian(), p(&[(&[1, 1], 6)]));
        // harmonic: x^2 - y^2
        assert!(p(&[(&[2, 0], 1), (&[0, 2], -1)]).laplacian().is_zero());
    }

    #[test]
    fn exact_and_compiled_eval_agree() {
        let a = Polynomial::from_terms(
            2,
            vec![(vec![2, 1], rat(1, 3)), (vec![0, 0], rat(-5, 2)), (vec![0, 4], int(7))],
        );
        let exact = a.eval(&[rat(1, 2), rat(-3, 4)]);
        let fast = a.compile().eval(&[0.5, -0.75]);
        assert!((exact.to_f64() - fast).abs() < 1e-14);
    }

    #[test]
    fn term_limit_is_enforced() {
        // (sum x^i)(sum y^j) has 1001^2 > 10^6 distinct terms.
        let px = Polynomial::<f64>::from_terms(2, (0..1001).map(|i| (vec![i, 0], 1.0)));
        let py = Polynomial::<f64>::from_terms(2, (0..1001).map(|j| (vec![0, j], 1.0)));
        let err = px.checked_mul(&py).unwrap_err();
        assert!(matches!(err, PolyError::TooLarge { .. }));
    }
}
