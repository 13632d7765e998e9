//! Compactly supported polynomial tensor fields and the operators
//! `d`, `δ`, `Δ`, `W`, `R`, `W^k`, `R^k`.
//!
//! A [`PolyBumpField`] stores a symmetric tensor of polynomial cores `q_I`;
//! the realized component is `q_I(x) (ρ² − |x|²)^s` inside the closed ball
//! of radius `ρ` and zero outside, so the field is `C^{s-1}`. Derivatives
//! keep the bump factor symbolic:
//!
//! `∂_v (q B^e) = (∂_v q · B − 2 e x_v q) B^{e-1}`,  `B = ρ² − |x|²`,
//!
//! and every component of a derived field shares one exponent. A field with
//! [`Support::Unbounded`] is a plain polynomial field with unlimited budget.
//!
//! [`PairSymTensorField`] holds the images of `R^k` (interleaved layout
//! `p_1 q_1 … p_M q_M i_1 … i_k`) and `W^k` (grouped layout
//! `p_1 … p_M q_1 … q_M i_1 … i_k`), with `M = m − k`.

use std::collections::HashMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::{EvalPoly, PolyError, Polynomial};
use crate::scalar::{binomial, int, rat, Rational, Scalar};
use crate::spherequad::{integrate_polynomial_ball, SphereValue};
use crate::symtensor::{DenseTensor, SymTensor, TensorError};

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Ball { rho: Rational },
    Unbounded,
}

impl Support {
    pub fn ball(rho: Rational) -> Self {
        Support::Ball { rho }
    }

    pub fn rho(&self) -> Option<&Rational> {
        match self {
            Support::Ball { rho } => Some(rho),
            Support::Unbounded => None,
        }
    }

    pub fn rho_f64(&self) -> Option<f64> {
        self.rho().map(Scalar::to_f64)
    }

    /// `ρ² − |x|²`.
    fn bump(&self, n: usize) -> Option<Polynomial<Rational>> {
        self.rho().map(|r| &Polynomial::constant(n, r * r) - &Polynomial::norm_squared(n))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("smoothness budget exhausted: {needed} derivative(s) requested, {available} available")]
    Budget { needed: u32, available: u32 },
    #[error("k = {k} out of range for rank {m}")]
    KOutOfRange { k: usize, m: usize },
    #[error("rank error: {0}")]
    Rank(String),
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error("unbounded field has no finite integral")]
    Unbounded,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("field document: {0}")]
    Parse(String),
}

/// `∂_v(q B^e)` as a new core with exponent `e − 1` (or `∂_v q` when unbounded).
fn bump_derivative(
    q: &Polynomial<Rational>,
    e: u32,
    v: usize,
    bump: Option<&Polynomial<Rational>>,
) -> Result<Polynomial<Rational>, PolyError> {
    match bump {
        None => Ok(q.derivative(v)),
        Some(b) => {
            let mut out = q.derivative(v).checked_mul(b)?;
            if e > 0 {
                out.add_scaled(&q.mul_var(v), &int(-2 * e as i64));
            }
            Ok(out)
        }
    }
}

/// Memoized mixed partials of the cores of one field.
struct DerivTable<'a> {
    field: &'a PolyBumpField,
    bump: Option<Polynomial<Rational>>,
    memo: HashMap<(usize, Vec<u32>), Polynomial<Rational>>,
}

impl<'a> DerivTable<'a> {
    fn new(field: &'a PolyBumpField) -> Self {
        DerivTable { field, bump: field.support.bump(field.n()), memo: HashMap::new() }
    }

    /// Core of `∂^orders q_pos B^s`; its exponent is `s − |orders|`.
    fn get(&mut self, pos: usize, orders: &[u32]) -> Result<Polynomial<Rational>, PolyError> {
        let total: u32 = orders.iter().sum();
        if total == 0 {
            return Ok(self.field.core.entries()[pos].clone());
        }
        let key = (pos, orders.to_vec());
        if let Some(p) = self.memo.get(&key) {
            return Ok(p.clone());
        }
        let v = orders.iter().rposition(|&o| o > 0).unwrap();
        let mut prev_orders = orders.to_vec();
        prev_orders[v] -= 1;
        let prev = self.get(pos, &prev_orders)?;
        let e = self.field.s.saturating_sub(total - 1);
        let out = bump_derivative(&prev, e, v, self.bump.as_ref())?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn get_idx(&mut self, idx: &[usize], orders: &[u32]) -> Result<Polynomial<Rational>, PolyError> {
        let pos = self.field.core.space().position(idx);
        self.get(pos, orders)
    }
}

fn orders_of(n: usize, vars: &[usize]) -> Vec<u32> {
    let mut o = vec![0u32; n];
    for &v in vars {
        o[v] += 1;
    }
    o
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyBumpField {
    support: Support,
    s: u32,
    core: SymTensor<Polynomial<Rational>>,
}

impl PolyBumpField {
    pub fn new(support: Support, s: u32, core: SymTensor<Polynomial<Rational>>) -> Self {
        let n = core.n();
        assert!(core.entries().iter().all(|p| p.nvars() == n), "core polynomials must have n variables");
        let s = if support == Support::Unbounded { 0 } else { s };
        PolyBumpField { support, s, core }
    }

    /// Scalar field `q (ρ² − |x|²)^s`.
    pub fn scalar(support: Support, s: u32, q: Polynomial<Rational>) -> Self {
        let n = q.nvars();
        Self::new(support, s, SymTensor::from_vec(n, 0, vec![q]))
    }

    pub fn zeros(n: usize, m: usize, support: Support, s: u32) -> Self {
        Self::new(support, s, SymTensor::from_fn(n, m, |_| Polynomial::zero(n)))
    }

    pub fn n(&self) -> usize {
        self.core.n()
    }

    pub fn rank(&self) -> usize {
        self.core.rank()
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn core(&self) -> &SymTensor<Polynomial<Rational>> {
        &self.core
    }

    /// Number of derivatives that stay classical: `s − 1`, unlimited when unbounded.
    pub fn budget(&self) -> Option<u32> {
        match self.support {
            Support::Unbounded => None,
            Support::Ball { .. } => Some(self.s.saturating_sub(1)),
        }
    }

    pub fn check_budget(&self, needed: u32) -> Result<(), FieldError> {
        match self.budget() {
            Some(available) if needed > available => Err(FieldError::Budget { needed, available }),
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.core.entries().iter().all(|p| p.is_zero())
    }

    /// Largest total degree among the cores.
    pub fn core_degree(&self) -> u32 {
        self.core.entries().iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Degree of the realized components as polynomials inside the ball.
    pub fn degree(&self) -> u32 {
        self.core_degree() + 2 * self.s
    }

    fn derived(&self, s: u32, core: SymTensor<Polynomial<Rational>>) -> Self {
        PolyBumpField { support: self.support.clone(), s, core }
    }

    fn lowered_s(&self, order: u32) -> u32 {
        self.s.saturating_sub(order)
    }

    /// Mixed partial derivative `∂^orders f`, componentwise.
    pub fn partial(&self, orders: &[u32]) -> Result<Self, FieldError> {
        assert_eq!(orders.len(), self.n());
        let total: u32 = orders.iter().sum();
        self.check_budget(total)?;
        let mut table = DerivTable::new(self);
        let entries =
            (0..self.core.storage_len()).map(|p| table.get(p, orders)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.derived(self.lowered_s(total), SymTensor::from_vec(self.n(), self.rank(), entries)))
    }

    /// `d f`, the symmetrized derivative.
    pub fn inner_derivative(&self) -> Result<Self, FieldError> {
        self.check_budget(1)?;
        let n = self.n();
        let m = self.rank();
        let mut table = DerivTable::new(self);
        let w = rat(1, m as i64 + 1);
        let mut rest = Vec::with_capacity(m);
        let mut err = None;
        let core = SymTensor::from_fn(n, m + 1, |idx| {
            let mut acc = Polynomial::zero(n);
            for t in 0..=m {
                if t > 0 && idx[t] == idx[t - 1] {
                    // repeated index, already counted with weight `same`
                    continue;
                }
                let same = idx.iter().filter(|&&i| i == idx[t]).count();
                rest.clear();
                rest.extend(idx.iter().enumerate().filter(|&(u, _)| u != t).map(|(_, &i)| i));
                match table.get_idx(&rest, &orders_of(n, &[idx[t]])) {
                    Ok(p) => acc.add_scaled(&p, &int(same as i64)),
                    Err(e) => err = Some(e),
                }
            }
            acc.scale(&w)
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        Ok(self.derived(self.lowered_s(1), core))
    }

    /// `δ f`, contraction of the derivative with the last slot.
    pub fn divergence(&self) -> Result<Self, FieldError> {
        let m = self.rank();
        if m == 0 {
            return Err(FieldError::Rank("divergence needs rank >= 1".into()));
        }
        self.check_budget(1)?;
        let n = self.n();
        let mut table = DerivTable::new(self);
        let mut full = vec![0usize; m];
        let mut err = None;
        let core = SymTensor::from_fn(n, m - 1, |idx| {
            full[..m - 1].copy_from_slice(idx);
            let mut acc = Polynomial::zero(n);
            for j in 0..n {
                full[m - 1] = j;
                match table.get_idx(&full, &orders_of(n, &[j])) {
                    Ok(p) => acc = &acc + &p,
                    Err(e) => err = Some(e),
                }
            }
            acc
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        Ok(self.derived(self.lowered_s(1), core))
    }

    /// `Δ^p f`, componentwise.
    pub fn laplacian_power(&self, p: u32) -> Result<Self, FieldError> {
        self.check_budget(2 * p)?;
        let mut f = self.clone();
        for _ in 0..p {
            let n = f.n();
            let mut table = DerivTable::new(&f);
            let mut entries = Vec::with_capacity(f.core.storage_len());
            for pos in 0..f.core.storage_len() {
                let mut acc = Polynomial::zero(n);
                for v in 0..n {
                    let mut o = vec![0u32; n];
                    o[v] = 2;
                    acc = &acc + &table.get(pos, &o)?;
                }
                entries.push(acc);
            }
            f = f.derived(f.lowered_s(2), SymTensor::from_vec(n, f.rank(), entries));
        }
        Ok(f)
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.combine(other, &int(1))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.combine(other, &int(-1))
    }

    /// `self + c · other`, raising the smaller bump exponent to the larger one.
    pub fn combine(&self, other: &Self, c: &Rational) -> Result<Self, FieldError> {
        if self.n() != other.n() || self.rank() != other.rank() {
            return Err(FieldError::Structure("fields differ in dimension or rank".into()));
        }
        if self.support != other.support {
            return Err(FieldError::Structure("fields differ in support".into()));
        }
        let s = self.s.min(other.s);
        let a = self.with_exponent(s)?;
        let b = other.with_exponent(s)?;
        let core = SymTensor::from_vec(
            self.n(),
            self.rank(),
            a.core.entries().iter().zip(b.core.entries()).map(|(p, q)| { let mut r = p.clone(); r.add_scaled(q, c); r }).collect(),
        );
        Ok(self.derived(s, core))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.derived(self.s, self.core.map(|p| p.scale(c)))
    }

    /// Same field with the bump exponent lowered to `s` (core absorbs `B^{self.s − s}`).
    pub fn with_exponent(&self, s: u32) -> Result<Self, FieldError> {
        if s > self.s {
            return Err(FieldError::Structure(format!("cannot raise exponent {} to {s}", self.s)));
        }
        let Some(b) = self.support.bump(self.n()) else {
            return Ok(self.clone());
        };
        if s == self.s {
            return Ok(self.clone());
        }
        let factor = b.checked_pow(self.s - s)?;
        let entries =
            self.core.entries().iter().map(|p| p.checked_mul(&factor)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.derived(s, SymTensor::from_vec(self.n(), self.rank(), entries)))
    }

    /// Realized components `q_I B^s` as plain polynomials (valid inside the support).
    pub fn realize(&self) -> Result<SymTensor<Polynomial<Rational>>, FieldError> {
        Ok(self.with_exponent(0)?.core)
    }

    /// Exact `⟨f, g⟩_{L²} = ∫ Σ_{i_1…i_m} f_{i…} g_{i…} dx` over the support.
    pub fn l2_inner(&self, other: &Self) -> Result<SphereValue, FieldError> {
        let Some(rho) = self.support.rho() else {
            return Err(FieldError::Unbounded);
        };
        if self.support != other.support || self.n() != other.n() || self.rank() != other.rank() {
            return Err(FieldError::Structure("inner product needs matching fields".into()));
        }
        let n = self.n();
        let space = self.core.space().clone();
        let mut integrand = Polynomial::zero(n);
        for (p, (a, b)) in self.core.entries().iter().zip(other.core.entries()).enumerate() {
            let prod = a.checked_mul(b)?;
            integrand.add_scaled(&prod, &int(space.multiplicity(p) as i64));
        }
        let bump = self.support.bump(n).unwrap().checked_pow(self.s + other.s)?;
        Ok(integrate_polynomial_ball(&integrand.checked_mul(&bump)?, rho))
    }

    /// Rank-`(m−k)` field `f^{i_1…i_k}` with the last `k` indices fixed.
    pub fn fix_indices(&self, fixed: &[usize]) -> Result<Self, FieldError> {
        let m = self.rank();
        if fixed.len() > m {
            return Err(FieldError::KOutOfRange { k: fixed.len(), m });
        }
        let r = m - fixed.len();
        let mut full = vec![0usize; m];
        full[r..].copy_from_slice(fixed);
        let core = SymTensor::from_fn(self.n(), r, |idx| {
            full[..r].copy_from_slice(idx);
            self.core.get(&full).clone()
        });
        Ok(self.derived(self.s, core))
    }

    /// `R f`.
    pub fn operator_r(&self) -> Result<PairSymTensorField, FieldError> {
        self.generalized_r(0)
    }

    /// `W f`.
    pub fn saint_venant_w(&self) -> Result<PairSymTensorField, FieldError> {
        self.generalized_w(0)
    }

    /// `R^k f`: `α(p_1 q_1)…α(p_M q_M) ∂^M f_{p_1…p_M i_1…i_k} / ∂x_{q_1}…∂x_{q_M}`.
    pub fn generalized_r(&self, k: usize) -> Result<PairSymTensorField, FieldError> {
        let m = self.rank();
        if k > m {
            return Err(FieldError::KOutOfRange { k, m });
        }
        let big_m = m - k;
        self.check_budget(big_m as u32)?;
        let n = self.n();
        let mut table = DerivTable::new(self);
        let mut err = None;
        let mut f_idx = vec![0usize; m];
        let mut dvars = vec![0usize; big_m];
        let mut t = DenseTensor::from_fn(n, 2 * big_m + k, |idx| {
            for a in 0..big_m {
                f_idx[a] = idx[2 * a];
                dvars[a] = idx[2 * a + 1];
            }
            f_idx[big_m..].copy_from_slice(&idx[2 * big_m..]);
            table.get_idx(&f_idx, &orders_of(n, &dvars)).unwrap_or_else(|e| {
                err = Some(e);
                Polynomial::zero(n)
            })
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        for a in 0..big_m {
            t = t.alternate::<Rational>(2 * a, 2 * a + 1)?;
        }
        Ok(PairSymTensorField {
            layout: PairLayout::Interleaved,
            pairs: big_m,
            block: k,
            support: self.support.clone(),
            s: self.lowered_s(big_m as u32),
            comps: t,
        })
    }

    /// `W^k f` per the generalized Saint-Venant formula.
    pub fn generalized_w(&self, k: usize) -> Result<PairSymTensorField, FieldError> {
        let m = self.rank();
        if k > m {
            return Err(FieldError::KOutOfRange { k, m });
        }
        let big_m = m - k;
        self.check_budget(big_m as u32)?;
        let n = self.n();
        let mut table = DerivTable::new(self);
        let mut err = None;
        let coeffs: Vec<Rational> = (0..=big_m)
            .map(|l| int(if l % 2 == 0 { 1 } else { -1 } * binomial(big_m as u64, l as u64) as i64))
            .collect();
        let mut f_idx = vec![0usize; m];
        let mut dvars = Vec::with_capacity(big_m);
        let mut t = DenseTensor::from_fn(n, 2 * big_m + k, |idx| {
            let (p, rest) = idx.split_at(big_m);
            let (q, i) = rest.split_at(big_m);
            let mut acc = Polynomial::zero(n);
            for (l, c) in coeffs.iter().enumerate() {
                // f^{i}_{p_1…p_{M−l} q_1…q_l} differentiated in p_{M−l+1…M}, q_{l+1…M}.
                f_idx[..big_m - l].copy_from_slice(&p[..big_m - l]);
                f_idx[big_m - l..big_m].copy_from_slice(&q[..l]);
                f_idx[big_m..].copy_from_slice(i);
                dvars.clear();
                dvars.extend_from_slice(&p[big_m - l..]);
                dvars.extend_from_slice(&q[l..]);
                match table.get_idx(&f_idx, &orders_of(n, &dvars)) {
                    Ok(d) => acc.add_scaled(&d, c),
                    Err(e) => err = Some(e),
                }
            }
            acc
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        if big_m >= 2 {
            t = t.partial_symmetrize::<Rational>(&(0..big_m).collect::<Vec<_>>())?;
        }
        if big_m + k >= 2 {
            t = t.partial_symmetrize::<Rational>(&(big_m..2 * big_m + k).collect::<Vec<_>>())?;
        }
        Ok(PairSymTensorField {
            layout: PairLayout::Grouped,
            pairs: big_m,
            block: k,
            support: self.support.clone(),
            s: self.lowered_s(big_m as u32),
            comps: t,
        })
    }

    /// `f64` evaluator for the realized field.
    pub fn compile(&self) -> CompiledField {
        CompiledField {
            n: self.n(),
            m: self.rank(),
            rho2: self.support.rho_f64().map(|r| r * r),
            s: self.s as i32,
            degree: self.degree(),
            cores: self.core.entries().iter().map(|p| p.compile()).collect(),
            space: self.core.space().clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = FieldDoc {
            n: self.n(),
            m: self.rank(),
            rho: self.support.rho().map(|r| serde_json::Value::String(r.to_string())),
            s: self.s,
            components: self
                .core
                .iter()
                .map(|(idx, p)| ComponentDoc { index: idx.to_vec(), terms: terms_to_doc(p) })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("field document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let doc: FieldDoc = serde_json::from_str(text).map_err(|e| FieldError::Parse(e.to_string()))?;
        let support = match &doc.rho {
            None | Some(serde_json::Value::Null) => Support::Unbounded,
            Some(v) => {
                let r = parse_rational(v)?;
                if !r.is_positive() {
                    return Err(FieldError::Parse("rho must be positive".into()));
                }
                Support::ball(r)
            }
        };
        let n = doc.n;
        let mut core = SymTensor::from_fn(n, doc.m, |_| Polynomial::zero(n));
        for c in doc.components {
            if c.index.len() != doc.m || c.index.iter().any(|&i| i >= n) {
                return Err(FieldError::Parse(format!("bad component index {:?}", c.index)));
            }
            let mut p = Polynomial::zero(n);
            for t in c.terms {
                if t.exps.len() != n {
                    return Err(FieldError::Parse(format!("exponent vector {:?} needs {n} entries", t.exps)));
                }
                let num = parse_integer(&t.num)?;
                let den = parse_integer(&t.den)?;
                if den.is_zero() {
                    return Err(FieldError::Parse("zero denominator".into()));
                }
                p.add_term(t.exps, Rational::new(num, den));
            }
            let mut idx = c.index;
            idx.sort_unstable();
            core.set(&idx, p);
        }
        Ok(PolyBumpField::new(support, doc.s, core))
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    n: usize,
    m: usize,
    #[serde(default)]
    rho: Option<serde_json::Value>,
    s: u32,
    components: Vec<ComponentDoc>,
}

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    index: Vec<usize>,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    exps: Vec<u32>,
    num: serde_json::Value,
    den: serde_json::Value,
}

fn integer_value(v: &num_bigint::BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::String(v.to_string()),
    }
}

fn terms_to_doc(p: &Polynomial<Rational>) -> Vec<TermDoc> {
    p.terms()
        .map(|(e, c)| TermDoc { exps: e.clone(), num: integer_value(c.numer()), den: integer_value(c.denom()) })
        .collect()
}

fn parse_integer(v: &serde_json::Value) -> Result<num_bigint::BigInt, FieldError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(num_bigint::BigInt::from)
            .ok_or_else(|| FieldError::Parse(format!("{n} is not an integer"))),
        serde_json::Value::String(s) => s.trim().parse().map_err(|_| FieldError::Parse(format!("{s:?} is not an integer"))),
        other => Err(FieldError::Parse(format!("expected integer, got {other}"))),
    }
}

/// Accepts `"p/q"`, `"p"`, an integer, or a finite float (converted exactly).
pub fn parse_rational(v: &serde_json::Value) -> Result<Rational, FieldError> {
    match v {
        serde_json::Value::String(s) => {
            let s = s.trim();
            match s.split_once('/') {
                Some((a, b)) => {
                    let num: num_bigint::BigInt =
                        a.trim().parse().map_err(|_| FieldError::Parse(format!("bad rational {s:?}")))?;
                    let den: num_bigint::BigInt =
                        b.trim().parse().map_err(|_| FieldError::Parse(format!("bad rational {s:?}")))?;
                    if den.is_zero() {
                        return Err(FieldError::Parse("zero denominator".into()));
                    }
                    Ok(Rational::new(num, den))
                }
                None => Ok(Rational::from_integer(
                    s.parse().map_err(|_| FieldError::Parse(format!("bad rational {s:?}")))?,
                )),
            }
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else {
                n.as_f64()
                    .and_then(Rational::from_float)
                    .ok_or_else(|| FieldError::Parse(format!("bad number {n}")))
            }
        }
        other => Err(FieldError::Parse(format!("expected rational, got {other}"))),
    }
}

/// `f64` evaluation of a [`PolyBumpField`].
#[derive(Debug, Clone)]
pub struct CompiledField {
    n: usize,
    m: usize,
    rho2: Option<f64>,
    s: i32,
    degree: u32,
    cores: Vec<EvalPoly>,
    space: std::sync::Arc<crate::symtensor::IndexSpace>,
}

impl CompiledField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn space(&self) -> &std::sync::Arc<crate::symtensor::IndexSpace> {
        &self.space
    }

    /// Total degree of the realized components inside the support.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho2.map(f64::sqrt)
    }

    /// `Σ_p weights[p] f_p(x)` over canonical positions.
    pub fn contract(&self, x: &[f64], weights: &[f64]) -> f64 {
        let Some(b) = self.bump(x) else { return 0.0 };
        let mut acc = 0.0;
        for (c, w) in self.cores.iter().zip(weights) {
            if *w != 0.0 {
                acc += w * c.eval(x);
            }
        }
        acc * b
    }

    /// Bump factor `B(x)^s`, or `None` outside the support.
    pub fn bump(&self, x: &[f64]) -> Option<f64> {
        match self.rho2 {
            None => Some(1.0),
            Some(r2) => {
                let b = r2 - x.iter().map(|a| a * a).sum::<f64>();
                if b <= 0.0 {
                    None
                } else {
                    Some(b.powi(self.s))
                }
            }
        }
    }

    /// Component at canonical position `pos`.
    pub fn component(&self, pos: usize, x: &[f64]) -> f64 {
        match self.bump(x) {
            None => 0.0,
            Some(b) => self.cores[pos].eval(x) * b,
        }
    }

    pub fn eval(&self, x: &[f64]) -> SymTensor<f64> {
        let b = self.bump(x);
        let entries = self.cores.iter().map(|c| b.map_or(0.0, |b| c.eval(x) * b)).collect();
        SymTensor::from_vec(self.n, self.m, entries)
    }

    /// `⟨f(x), ξ^{⊙m}⟩`.
    pub fn pair_with_power(&self, x: &[f64], xi: &[f64]) -> f64 {
        let Some(b) = self.bump(x) else { return 0.0 };
        let mut acc = 0.0;
        for (p, idx) in self.space.indices().enumerate() {
            if self.cores[p].is_zero() {
                continue;
            }
            let mono: f64 = idx.iter().map(|&i| xi[i]).product();
            acc += self.space.multiplicity(p) as f64 * mono * self.cores[p].eval(x);
        }
        acc * b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLayout {
    /// `p_1 q_1 … p_M q_M i_1 … i_k` (images of `R^k`).
    Interleaved,
    /// `p_1 … p_M q_1 … q_M i_1 … i_k` (images of `W^k`).
    Grouped,
}

/// Dense tensor of polynomial cores with a pair structure; realized
/// components are `core · B^s` as for [`PolyBumpField`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairSymTensorField {
    layout: PairLayout,
    pairs: usize,
    block: usize,
    support: Support,
    s: u32,
    comps: DenseTensor<Polynomial<Rational>>,
}

impl PairSymTensorField {
    pub fn layout(&self) -> PairLayout {
        self.layout
    }

    /// `M = m − k`.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// `k`, the trailing symmetric block length.
    pub fn block(&self) -> usize {
        self.block
    }

    /// Rank `m` of the source field.
    pub fn source_rank(&self) -> usize {
        self.pairs + self.block
    }

    pub fn n(&self) -> usize {
        self.comps.n()
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn components(&self) -> &DenseTensor<Polynomial<Rational>> {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Polynomial<Rational> {
        self.comps.get(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.entries().iter().all(|p| p.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PairSymTensorField { comps: self.comps.scale::<Rational>(c), ..self.clone() }
    }

    /// Component `idx` as a scalar field.
    pub fn component_field(&self, idx: &[usize]) -> PolyBumpField {
        PolyBumpField::scalar(self.support.clone(), self.s, self.get(idx).clone())
    }

    /// Skew in each pair and symmetric under pair exchange (interleaved layout).
    pub fn has_pair_symmetries(&self) -> bool {
        if self.layout != PairLayout::Interleaved {
            return false;
        }
        let rank = 2 * self.pairs + self.block;
        let mut swapped = vec![0usize; rank];
        for (idx, c) in self.comps.iter() {
            for a in 0..self.pairs {
                swapped.copy_from_slice(&idx);
                swapped.swap(2 * a, 2 * a + 1);
                if &(-c) != self.comps.get(&swapped) {
                    return false;
                }
                if a + 1 < self.pairs {
                    swapped.copy_from_slice(&idx);
                    swapped.swap(2 * a, 2 * a + 2);
                    swapped.swap(2 * a + 1, 2 * a + 3);
                    if c != self.comps.get(&swapped) {
                        return false;
                    }
                }
            }
            for b in 1..self.block {
                swapped.copy_from_slice(&idx);
                swapped.swap(2 * self.pairs + b - 1, 2 * self.pairs + b);
                if c != self.comps.get(&swapped) {
                    return false;
                }
            }
        }
        true
    }

    /// Symmetric within `p_1…p_M` and within `q_1…q_M i_1…i_k` (grouped layout).
    pub fn has_block_symmetries(&self) -> bool {
        if self.layout != PairLayout::Grouped {
            return false;
        }
        let big_m = self.pairs;
        let rank = 2 * big_m + self.block;
        let mut swapped = vec![0usize; rank];
        for (idx, c) in self.comps.iter() {
            for a in 1..rank {
                if a == big_m {
                    continue;
                }
                swapped.copy_from_slice(&idx);
                swapped.swap(a - 1, a);
                if c != self.comps.get(&swapped) {
                    return false;
                }
            }
        }
        true
    }

    /// `R^{k−1}` from `R^k`: the last block index becomes a new pair
    /// `(p, q)`, differentiated in `q` and alternated.
    pub fn lower_generalized_r(&self) -> Result<Self, FieldError> {
        if self.layout != PairLayout::Interleaved {
            return Err(FieldError::Structure("lowering needs an R^k image".into()));
        }
        if self.block == 0 {
            return Err(FieldError::KOutOfRange { k: 0, m: self.source_rank() });
        }
        if let (Some(_), true) = (self.support.rho(), self.s < 2) {
            return Err(FieldError::Budget { needed: 1, available: self.s.saturating_sub(1) });
        }
        let n = self.n();
        let big_m = self.pairs;
        let k = self.block;
        let bump = self.support.bump(n);
        let mut src = vec![0usize; 2 * big_m + k];
        let mut err = None;
        let mut t = DenseTensor::from_fn(n, 2 * (big_m + 1) + k - 1, |idx| {
            // idx = p_1 q_1 … p_{M+1} q_{M+1} i_1 … i_{k−1}
            src[..2 * big_m].copy_from_slice(&idx[..2 * big_m]);
            src[2 * big_m..2 * big_m + k - 1].copy_from_slice(&idx[2 * big_m + 2..]);
            src[2 * big_m + k - 1] = idx[2 * big_m];
            bump_derivative(self.comps.get(&src), self.s, idx[2 * big_m + 1], bump.as_ref()).unwrap_or_else(|e| {
                err = Some(e);
                Polynomial::zero(n)
            })
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        t = t.alternate::<Rational>(2 * big_m, 2 * big_m + 1)?;
        Ok(PairSymTensorField {
            layout: PairLayout::Interleaved,
            pairs: big_m + 1,
            block: k - 1,
            support: self.support.clone(),
            s: if self.support.rho().is_some() { self.s - 1 } else { 0 },
            comps: t,
        })
    }

    /// Exact equality of realized fields (cores compared after matching exponents).
    pub fn same_field(&self, other: &Self) -> bool {
        if self.layout != other.layout
            || self.pairs != other.pairs
            || self.block != other.block
            || self.support != other.support
            || self.n() != other.n()
        {
            return false;
        }
        if self.s == other.s {
            return self.comps == other.comps;
        }
        let (lo, hi) = if self.s < other.s { (self, other) } else { (other, self) };
        let b = hi.support.bump(hi.n()).expect("exponents differ only with bounded support");
        let factor = b.checked_pow(hi.s - lo.s).expect("bump power fits");
        hi.comps.entries().iter().zip(lo.comps.entries()).all(|(h, l)| &h.checked_mul(&factor).expect("fits") == l)
    }
}

/// Constant in `W^k = 2^{m−k} σ(q, i) σ(p) R^k`.
pub fn r_to_w_constant(m: usize, k: usize) -> Rational {
    Rational::from_integer(num_bigint::BigInt::one() << (m - k))
}

/// The constant printed in the generalized `W^k → R^k` relation, `C(m, k)/(m − k + 1)`.
pub fn printed_w_to_r_constant(m: usize, k: usize) -> Rational {
    rat(binomial(m as u64, k as u64) as i64, (m - k + 1) as i64)
}

/// `(k + 1)/(m + 1)`: the constant for which `R^k = c αα W^k` holds exactly.
/// Agrees with [`printed_w_to_r_constant`] for `k = 0` and `k = m`.
pub fn w_to_r_constant(m: usize, k: usize) -> Rational {
    rat(k as i64 + 1, m as i64 + 1)
}

/// `2^{m−k} σ(q_1…q_M i_1…i_k) σ(p_1…p_M)` applied to an `R^k` image.
pub fn r_to_w(rf: &PairSymTensorField) -> Result<PairSymTensorField, FieldError> {
    if rf.layout != PairLayout::Interleaved {
        return Err(FieldError::Structure("r_to_w expects an R^k image".into()));
    }
    let big_m = rf.pairs;
    let k = rf.block;
    let rank = 2 * big_m + k;
    // grouped slot t reads interleaved slot perm[t]
    let perm: Vec<usize> =
        (0..big_m).map(|a| 2 * a).chain((0..big_m).map(|a| 2 * a + 1)).chain(2 * big_m..rank).collect();
    let mut t = rf.comps.permute_slots(&perm);
    if big_m >= 2 {
        t = t.partial_symmetrize::<Rational>(&(0..big_m).collect::<Vec<_>>())?;
    }
    if big_m + k >= 2 && big_m > 0 {
        t = t.partial_symmetrize::<Rational>(&(big_m..rank).collect::<Vec<_>>())?;
    }
    let c = r_to_w_constant(big_m + k, k);
    Ok(PairSymTensorField { layout: PairLayout::Grouped, comps: t.scale::<Rational>(&c), ..rf.clone() })
}

/// `α(p_1 q_1)…α(p_M q_M)` applied to a `W^k` image, without the constant.
pub fn alternate_pairs(wf: &PairSymTensorField) -> Result<PairSymTensorField, FieldError> {
    if wf.layout != PairLayout::Grouped {
        return Err(FieldError::Structure("w_to_r expects a W^k image".into()));
    }
    let big_m = wf.pairs;
    let k = wf.block;
    let rank = 2 * big_m + k;
    // interleaved slot t reads grouped slot perm[t]
    let mut perm = Vec::with_capacity(rank);
    for a in 0..big_m {
        perm.push(a);
        perm.push(big_m + a);
    }
    perm.extend(2 * big_m..rank);
    let mut t = wf.comps.permute_slots(&perm);
    for a in 0..big_m {
        t = t.alternate::<Rational>(2 * a, 2 * a + 1)?;
    }
    Ok(PairSymTensorField { layout: PairLayout::Interleaved, comps: t, ..wf.clone() })
}

/// `c · αα W^k` with the given constant.
pub fn w_to_r_with(wf: &PairSymTensorField, c: &Rational) -> Result<PairSymTensorField, FieldError> {
    Ok(alternate_pairs(wf)?.scale(c))
}

/// `W^k → R^k` with [`w_to_r_constant`].
pub fn w_to_r(wf: &PairSymTensorField) -> Result<PairSymTensorField, FieldError> {
    let c = w_to_r_constant(wf.source_rank(), wf.block);
    w_to_r_with(wf, &c)
}

/// The scalar `c` with `rf = c · αα wf`, if one exists.
pub fn solve_w_to_r_constant(wf: &PairSymTensorField, rf: &PairSymTensorField) -> Result<Option<Rational>, FieldError> {
    let a = alternate_pairs(wf)?;
    if a.s != rf.s || a.n() != rf.n() || a.comps.rank() != rf.comps.rank() {
        return Err(FieldError::Structure("images of different shape".into()));
    }
    let mut c: Option<Rational> = None;
    for (x, y) in a.comps.entries().iter().zip(rf.comps.entries()) {
        if x.is_zero() {
            if !y.is_zero() {
                return Ok(None);
            }
            continue;
        }
        let (e, cx) = x.terms().next().unwrap();
        let ratio = y.coeff(e) / cx;
        match &c {
            None => c = Some(ratio),
            Some(prev) if *prev != ratio => return Ok(None),
            _ => {}
        }
    }
    let Some(c) = c else { return Ok(Some(int(0))) };
    Ok(if a.scale(&c).comps == rf.comps { Some(c) } else { None })
}

/// Random field with integer-coefficient cores of degree `<= degree`.
pub fn random_field(
    sampler: &mut crate::rng::Sampler,
    n: usize,
    m: usize,
    degree: u32,
    support: Support,
    s: u32,
) -> PolyBumpField {
    let core = SymTensor::from_fn(n, m, |_| sampler.polynomial(n, degree, 3));
    PolyBumpField::new(support, s, core)
}
