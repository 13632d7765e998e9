//! Symmetric tensors over `R^n` in compressed multi-index storage.
//!
//! Indices are 0-based throughout the crate. A rank-`m` symmetric tensor
//! stores one value per non-decreasing index tuple, `C(n+m-1, m)` in all;
//! [`DenseTensor`] keeps the full `n^m` array and is used for the partial
//! symmetrization and alternation operators as well as for test oracles.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, Mutex, OnceLock};

use crate::linalg;
use crate::poly::Polynomial;
use crate::scalar::{binomial, factorial, Scalar};

/// Anything that can be a tensor component: scalars and polynomials.
pub trait Component<S: Scalar>: Clone + Debug + PartialEq + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: &S) -> Self;
    fn is_zero(&self) -> bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }
}

impl<S: Scalar> Component<S> for S {
    fn zero_like(&self) -> Self {
        S::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }
    fn scale(&self, c: &S) -> Self {
        self.clone() * c.clone()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl<S: Scalar> Component<S> for Polynomial<S> {
    fn zero_like(&self) -> Self {
        Polynomial::zero(self.nvars())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: &S) -> Self {
        Polynomial::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        Polynomial::is_zero(self)
    }
}

/// Sorted index tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Number of distinct orderings, `m! / prod(count_i!)`.
    pub fn multiplicity(&self) -> u64 {
        let mut denom = 1u64;
        let mut run = 1u64;
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                run += 1;
                denom *= run;
            } else {
                run = 1;
            }
        }
        factorial(self.0.len() as u64) / denom
    }

    /// How often each coordinate occurs; the exponent vector of `xi^I`.
    pub fn counts(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0u32; n];
        for &i in &self.0 {
            c[i] += 1;
        }
        c
    }
}

/// Enumeration tables for rank-`m` tensors in dimension `n`.
#[derive(Debug)]
pub struct IndexSpace {
    pub n: usize,
    pub m: usize,
    canon: Vec<Vec<usize>>,
    mult: Vec<u64>,
    dense_to_canon: Vec<u32>,
}

impl PartialEq for IndexSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }
}

impl IndexSpace {
    fn build(n: usize, m: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        let mut canon = Vec::new();
        let mut cur = vec![0usize; m];
        loop {
            canon.push(cur.clone());
            // advance to the next non-decreasing tuple
            let mut p = m;
            while p > 0 && cur[p - 1] == n - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            cur[p - 1] += 1;
            let v = cur[p - 1];
            for c in cur.iter_mut().skip(p) {
                *c = v;
            }
        }
        let mult = canon.iter().map(|c| MultiIndex(c.clone()).multiplicity()).collect();
        let lookup: HashMap<&[usize], u32> =
            canon.iter().enumerate().map(|(i, c)| (c.as_slice(), i as u32)).collect();
        let total = n.pow(m as u32);
        let mut dense_to_canon = Vec::with_capacity(total);
        let mut tuple = vec![0usize; m];
        for off in 0..total {
            dense_tuple(n, off, &mut tuple);
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            dense_to_canon.push(lookup[sorted.as_slice()]);
        }
        IndexSpace { n, m, canon, mult, dense_to_canon }
    }

    pub fn len(&self) -> usize {
        self.canon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canon.is_empty()
    }

    pub fn index(&self, pos: usize) -> &[usize] {
        &self.canon[pos]
    }

    pub fn indices(&self) -> impl Iterator<Item = &[usize]> {
        self.canon.iter().map(|v| v.as_slice())
    }

    pub fn multiplicity(&self, pos: usize) -> u64 {
        self.mult[pos]
    }

    /// Storage position of an index tuple in any order.
    pub fn position(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.m);
        self.dense_to_canon[dense_offset(self.n, idx)] as usize
    }

    pub fn position_of_dense(&self, offset: usize) -> usize {
        self.dense_to_canon[offset] as usize
    }
}

/// Shared tables for `(n, m)`.
pub fn index_space(n: usize, m: usize) -> Arc<IndexSpace> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<IndexSpace>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&(n, m)) {
        return s.clone();
    }
    let built = Arc::new(IndexSpace::build(n, m));
    cache.lock().unwrap().entry((n, m)).or_insert(built).clone()
}

/// `dim S^m = C(n+m-1, m)`.
pub fn sym_dim(n: usize, m: usize) -> usize {
    binomial((n + m - 1) as u64, m as u64) as usize
}

pub fn dense_offset(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub fn dense_tuple(n: usize, mut offset: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = offset % n;
        offset /= n;
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("rank mismatch: {0}")]
    Rank(String),
    #[error("slot {slot} out of range for rank {rank}")]
    Slot { slot: usize, rank: usize },
    #[error("invalid slot selection: {0}")]
    Slots(String),
}

/// Full `n^m` array, slot 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<C> {
    n: usize,
    m: usize,
    entries: Vec<C>,
}

impl<C: Clone> DenseTensor<C> {
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(&[usize]) -> C) -> Self {
        let total = n.pow(m as u32);
        let mut tuple = vec![0usize; m];
        let entries = (0..total)
            .map(|off| {
                dense_tuple(n, off, &mut tuple);
                f(&tuple)
            })
            .collect();
        DenseTensor { n, m, entries }
    }

    pub fn from_vec(n: usize, m: usize, entries: Vec<C>) -> Self {
        assert_eq!(entries.len(), n.pow(m as u32), "dense entry count must be n^m");
        DenseTensor { n, m, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> &C {
        &self.entries[dense_offset(self.n, idx)]
    }

    pub fn entries(&self) -> &[C] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &C)> {
        let n = self.n;
        let m = self.m;
        self.entries.iter().enumerate().map(move |(off, c)| {
            let mut t = vec![0; m];
            dense_tuple(n, off, &mut t);
            (t, c)
        })
    }

    pub fn map<D: Clone>(&self, f: impl FnMut(&C) -> D) -> DenseTensor<D> {
        DenseTensor { n: self.n, m: self.m, entries: self.entries.iter().map(f).collect() }
    }

    /// Reorder slots: the result at `(j_0..j_{m-1})` reads `self` at the
    /// tuple whose slot `perm[t]` holds `j_t`.
    pub fn permute_slots(&self, perm: &[usize]) -> DenseTensor<C> {
        assert_eq!(perm.len(), self.m);
        let mut src = vec![0usize; self.m];
        DenseTensor::from_fn(self.n, self.m, |idx| {
            for (t, &p) in perm.iter().enumerate() {
                src[p] = idx[t];
            }
            self.get(&src).clone()
        })
    }
}

impl<C> DenseTensor<C> {
    fn check_slot(&self, slot: usize) -> Result<(), TensorError> {
        if slot >= self.m {
            Err(TensorError::Slot { slot, rank: self.m })
        } else {
            Ok(())
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// All `k`-element subsets of `0..total`, ascending.
pub fn combinations(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            if total - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, total, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, k, &mut Vec::new(), &mut out);
    out
}

impl<C> DenseTensor<C> {
    pub fn add<S: Scalar>(&self, other: &Self) -> Self
    where
        C: Component<S>,
    {
        assert_eq!((self.n, self.m), (other.n, other.m));
        DenseTensor {
            n: self.n,
            m: self.m,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale<S: Scalar>(&self, c: &S) -> Self
    where
        C: Component<S>,
    {
        DenseTensor { n: self.n, m: self.m, entries: self.entries.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn is_zero<S: Scalar>(&self) -> bool
    where
        C: Component<S>,
    {
        self.entries.iter().all(|c| c.is_zero())
    }

    /// Average over all permutations of the named slots (`σ` on a subset).
    pub fn partial_symmetrize<S: Scalar>(&self, slots: &[usize]) -> Result<Self, TensorError>
    where
        C: Component<S>,
    {
        if slots.is_empty() {
            return Err(TensorError::Slots("empty slot set".into()));
        }
        for &s in slots {
            self.check_slot(s)?;
        }
        let mut sorted = slots.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != slots.len() {
            return Err(TensorError::Slots("repeated slot".into()));
        }
        let perms = permutations(slots.len());
        let weight = S::from_ratio(1, perms.len() as i64);
        let mut src = vec![0usize; self.m];
        Ok(DenseTensor::from_fn(self.n, self.m, |idx| {
            let mut acc = self.entries[0].zero_like();
            for p in &perms {
                src.copy_from_slice(idx);
                for (t, &s) in slots.iter().enumerate() {
                    src[s] = idx[slots[p[t]]];
                }
                acc = acc.add(self.get(&src));
            }
            acc.scale(&weight)
        }))
    }

    /// `α(a b)`: half the difference with slots `a`, `b` exchanged.
    pub fn alternate<S: Scalar>(&self, a: usize, b: usize) -> Result<Self, TensorError>
    where
        C: Component<S>,
    {
        self.check_slot(a)?;
        self.check_slot(b)?;
        if a == b {
            return Err(TensorError::Slots("alternation needs two distinct slots".into()));
        }
        let half = S::from_ratio(1, 2);
        let mut src = vec![0usize; self.m];
        Ok(DenseTensor::from_fn(self.n, self.m, |idx| {
            src.copy_from_slice(idx);
            src.swap(a, b);
            self.get(idx).sub(self.get(&src)).scale(&half)
        }))
    }

    /// Full symmetrization `σ`.
    pub fn symmetrize<S: Scalar>(&self) -> SymTensor<C>
    where
        C: Component<S>,
    {
        let space = index_space(self.n, self.m);
        let mut acc: Vec<C> = vec![self.entries[0].zero_like(); space.len()];
        for (off, c) in self.entries.iter().enumerate() {
            let p = space.position_of_dense(off);
            acc[p] = acc[p].add(c);
        }
        let entries = acc
            .into_iter()
            .enumerate()
            .map(|(p, c)| c.scale(&S::from_ratio(1, space.multiplicity(p) as i64)))
            .collect();
        SymTensor { space, entries }
    }
}

/// Symmetric tensor with one stored value per canonical multi-index.
#[derive(Clone, PartialEq)]
pub struct SymTensor<C> {
    space: Arc<IndexSpace>,
    entries: Vec<C>,
}

impl<C: Debug> Debug for SymTensor<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut d = f.debug_map();
        for (i, c) in self.space.indices().zip(&self.entries) {
            d.entry(&i, c);
        }
        d.finish()
    }
}

impl<C: Clone> SymTensor<C> {
    pub fn from_fn(n: usize, m: usize, f: impl FnMut(&[usize]) -> C) -> Self {
        let space = index_space(n, m);
        let entries = space.indices().map(f).collect();
        SymTensor { space, entries }
    }

    /// Entries in canonical order (see [`IndexSpace::indices`]).
    pub fn from_vec(n: usize, m: usize, entries: Vec<C>) -> Self {
        let space = index_space(n, m);
        assert_eq!(entries.len(), space.len(), "storage size must be C(n+m-1, m)");
        SymTensor { space, entries }
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn rank(&self) -> usize {
        self.space.m
    }

    pub fn space(&self) -> &Arc<IndexSpace> {
        &self.space
    }

    pub fn storage_len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C> {
        self.entries
    }

    /// Component at an index tuple in any order.
    pub fn get(&self, idx: &[usize]) -> &C {
        &self.entries[self.space.position(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C) {
        let p = self.space.position(idx);
        self.entries[p] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &C)> {
        self.space.indices().zip(self.entries.iter())
    }

    pub fn map<D: Clone>(&self, f: impl FnMut(&C) -> D) -> SymTensor<D> {
        SymTensor { space: self.space.clone(), entries: self.entries.iter().map(f).collect() }
    }

    pub fn expand(&self) -> DenseTensor<C> {
        let space = &self.space;
        let total = space.n.pow(space.m as u32);
        DenseTensor {
            n: space.n,
            m: space.m,
            entries: (0..total).map(|off| self.entries[space.position_of_dense(off)].clone()).collect(),
        }
    }
}

impl<C> SymTensor<C> {
    pub fn add<S: Scalar>(&self, other: &Self) -> Self
    where
        C: Component<S>,
    {
        assert_eq!((self.n(), self.rank()), (other.n(), other.rank()), "shape mismatch");
        SymTensor {
            space: self.space.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub<S: Scalar>(&self, other: &Self) -> Self
    where
        C: Component<S>,
    {
        assert_eq!((self.n(), self.rank()), (other.n(), other.rank()), "shape mismatch");
        SymTensor {
            space: self.space.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale<S: Scalar>(&self, c: &S) -> Self
    where
        C: Component<S>,
    {
        SymTensor { space: self.space.clone(), entries: self.entries.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn is_zero<S: Scalar>(&self) -> bool
    where
        C: Component<S>,
    {
        self.entries.iter().all(|c| c.is_zero())
    }

    pub fn zeros_like<S: Scalar>(&self) -> Self
    where
        C: Component<S>,
    {
        self.map_ref(|c| c.zero_like())
    }

    fn map_ref(&self, f: impl FnMut(&C) -> C) -> Self {
        SymTensor { space: self.space.clone(), entries: self.entries.iter().map(f).collect() }
    }
}

impl<S: Scalar> SymTensor<S> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self::from_fn(n, m, |_| S::zero())
    }

    /// The scalar `c` as a rank-0 tensor.
    pub fn scalar(n: usize, c: S) -> Self {
        Self::from_vec(n, 0, vec![c])
    }

    /// Euclidean metric `δ_ij`.
    pub fn metric(n: usize) -> Self {
        Self::from_fn(n, 2, |idx| if idx[0] == idx[1] { S::one() } else { S::zero() })
    }

    pub fn vector(v: &[S]) -> Self {
        Self::from_fn(v.len(), 1, |idx| v[idx[0]].clone())
    }

    /// `ξ^{⊙m}`, with components `ξ_{i_1}⋯ξ_{i_m}`.
    pub fn outer_power(xi: &[S], m: usize) -> Self {
        Self::from_fn(xi.len(), m, |idx| {
            idx.iter().fold(S::one(), |acc, &i| acc * xi[i].clone())
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Norm induced by [`inner`].
    pub fn norm(&self) -> f64 {
        self.iter()
            .enumerate()
            .map(|(p, (_, c))| {
                let v = c.to_f64();
                self.space.multiplicity(p) as f64 * v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_f64(&self) -> SymTensor<f64> {
        SymTensor { space: self.space.clone(), entries: self.entries.iter().map(|c| c.to_f64()).collect() }
    }
}

/// `σ t`.
pub fn symmetrize<S: Scalar, C: Component<S>>(t: &DenseTensor<C>) -> SymTensor<C> {
    t.symmetrize::<S>()
}

/// `u ⊙ v = σ(u ⊗ v)`; `u` carries scalar entries, `v` any component type.
pub fn sym_product<S: Scalar, C: Component<S>>(
    u: &SymTensor<S>,
    v: &SymTensor<C>,
) -> Result<SymTensor<C>, TensorError> {
    if u.n() != v.n() {
        return Err(TensorError::Dimension(u.n(), v.n()));
    }
    let (a, b) = (u.rank(), v.rank());
    let subsets = combinations(a + b, a);
    let weight = S::from_ratio(1, subsets.len() as i64);
    let zero = v.entries[0].zero_like();
    let mut ui = Vec::with_capacity(a);
    let mut vi = Vec::with_capacity(b);
    Ok(SymTensor::from_fn(u.n(), a + b, |idx| {
        let mut acc = zero.clone();
        for subset in &subsets {
            ui.clear();
            vi.clear();
            let mut s = subset.iter().peekable();
            for (pos, &i) in idx.iter().enumerate() {
                if s.peek() == Some(&&pos) {
                    ui.push(i);
                    s.next();
                } else {
                    vi.push(i);
                }
            }
            let c = u.get(&ui);
            if !Scalar::is_zero(c) {
                acc = acc.add(&v.get(&vi).scale(c));
            }
        }
        acc.scale(&weight)
    }))
}

/// `i_u f`, symmetric multiplication by `u`.
pub fn i_mul<S: Scalar, C: Component<S>>(
    u: &SymTensor<S>,
    f: &SymTensor<C>,
) -> Result<SymTensor<C>, TensorError> {
    sym_product(u, f)
}

/// `i f = i_δ f`.
pub fn i_metric<S: Scalar, C: Component<S>>(f: &SymTensor<C>) -> SymTensor<C> {
    sym_product(&SymTensor::<S>::metric(f.n()), f).expect("same dimension")
}

/// `j_u g`: contract the last `rank(u)` slots of `g` against `u`.
pub fn j_contract<S: Scalar, C: Component<S>>(
    u: &SymTensor<S>,
    g: &SymTensor<C>,
) -> Result<SymTensor<C>, TensorError> {
    if u.n() != g.n() {
        return Err(TensorError::Dimension(u.n(), g.n()));
    }
    let k = u.rank();
    if g.rank() < k {
        return Err(TensorError::Rank(format!("j_u needs rank(g) = {} >= rank(u) = {k}", g.rank())));
    }
    let m = g.rank() - k;
    let uspace = u.space.clone();
    let zero = g.entries[0].zero_like();
    let mut full = vec![0usize; m + k];
    Ok(SymTensor::from_fn(u.n(), m, |idx| {
        full[..m].copy_from_slice(idx);
        let mut acc = zero.clone();
        for (p, j) in uspace.indices().enumerate() {
            let c = &u.entries[p];
            if Scalar::is_zero(c) {
                continue;
            }
            full[m..].copy_from_slice(j);
            let w = c.clone() * S::from_int(uspace.multiplicity(p) as i64);
            acc = acc.add(&g.get(&full).scale(&w));
        }
        acc
    }))
}

/// `j g = j_δ g`, the metric trace.
pub fn j_metric<S: Scalar, C: Component<S>>(g: &SymTensor<C>) -> SymTensor<C> {
    j_contract(&SymTensor::<S>::metric(g.n()), g).expect("rank checked by caller")
}

/// `i^l j^l g`.
pub fn ij_power<S: Scalar, C: Component<S>>(g: &SymTensor<C>, l: usize) -> SymTensor<C> {
    let mut t = g.clone();
    for _ in 0..l {
        t = j_metric::<S, C>(&t);
    }
    for _ in 0..l {
        t = i_metric::<S, C>(&t);
    }
    t
}

/// Full contraction `u_{i_1…i_m} v^{i_1…i_m}` over all dense tuples.
pub fn inner<S: Scalar>(u: &SymTensor<S>, v: &SymTensor<S>) -> Result<S, TensorError> {
    if u.n() != v.n() {
        return Err(TensorError::Dimension(u.n(), v.n()));
    }
    if u.rank() != v.rank() {
        return Err(TensorError::Rank(format!("{} vs {}", u.rank(), v.rank())));
    }
    let mut acc = S::zero();
    for (p, (a, b)) in u.entries.iter().zip(&v.entries).enumerate() {
        acc = acc + a.clone() * b.clone() * S::from_int(u.space.multiplicity(p) as i64);
    }
    Ok(acc)
}

/// `η_{i_1} ⊙ … ⊙ η_{i_m}` for a canonical index tuple.
pub fn sym_monomial<S: Scalar>(vectors: &[Vec<S>], idx: &[usize]) -> SymTensor<S> {
    let n = vectors[0].len();
    let mut t = SymTensor::scalar(n, S::one());
    for &i in idx {
        t = sym_product(&SymTensor::vector(&vectors[i]), &t).expect("same dimension");
    }
    t
}

/// Rank of `{η_{i_1} ⊙ … ⊙ η_{i_m}}` over canonical tuples, inside `S^m`.
pub fn sym_power_span_rank<S: Scalar>(vectors: &[Vec<S>], m: usize) -> usize {
    let n = vectors.len();
    assert!(n >= 1 && vectors.iter().all(|v| v.len() == n), "need n vectors in dimension n");
    let rows = index_space(n, m)
        .indices()
        .map(|idx| sym_monomial(vectors, idx).into_entries())
        .collect();
    linalg::rank(rows)
}
