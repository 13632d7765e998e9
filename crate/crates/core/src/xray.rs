//! Ray, momentum-ray and transverse-ray transforms of [`PolyBumpField`]s.
//!
//! Along a line the realized field is a polynomial in `t` on the chord
//! cut out by the support ball, so every transform here is a Gauss–Legendre
//! sum that is exact up to rounding. Derivatives in `(x, ξ)` are taken
//! under the integral sign:
//!
//! `∂^α_x ∂^β_ξ J^k f = Σ_{β₁ ≤ β} C(β, β₁) ∫ t^{k+|β₁|} Σ_I mult_I (∂^{α+β₁} f_I)(x+tξ) ∂^{β−β₁}(ξ^I) dt`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::gauss::gauss_legendre;
use crate::linalg;
use crate::polyfield::{CompiledField, FieldError, PolyBumpField};
use crate::scalar::binomial;
use crate::symtensor::{index_space, sym_monomial, SymTensor};

/// Lines closer than this to tangency count as missing the ball.
pub const TANGENCY_TOL: f64 = 1e-14;
/// Orthogonality and normalization tolerance for [`TransverseRay`].
pub const TRANSVERSE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum XrayError {
    #[error("line direction must be nonzero")]
    ZeroDirection,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("transverse ray constraint violated by {0:e}")]
    Constraint(f64),
    #[error("line integrals of a field with unbounded support diverge")]
    Unbounded,
    #[error("direction set is linearly dependent")]
    Singular,
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("line file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl Line {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self, XrayError> {
        if x.len() != xi.len() {
            return Err(XrayError::Dimension { expected: x.len(), got: xi.len() });
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Err(XrayError::ZeroDirection);
        }
        Ok(Line { x, xi })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.x.iter().zip(&self.xi).map(|(a, b)| a + t * b).collect()
    }

    /// Parameter interval where the line is inside the ball of radius `rho`.
    pub fn chord(&self, rho: f64) -> Option<(f64, f64)> {
        let a: f64 = self.xi.iter().map(|v| v * v).sum();
        let b: f64 = self.x.iter().zip(&self.xi).map(|(p, q)| p * q).sum();
        let tc = -b / a;
        let d2: f64 = self.x.iter().zip(&self.xi).map(|(p, q)| (p + tc * q).powi(2)).sum();
        let d = d2.sqrt();
        if rho - d <= TANGENCY_TOL * rho.max(1.0) {
            return None;
        }
        let half = ((rho - d) * (rho + d)).sqrt() / a.sqrt();
        Some((tc - half, tc + half))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseRay {
    pub omega: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TransverseRay {
    pub fn new(omega: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self, XrayError> {
        let n = omega.len();
        for v in [&x, &y] {
            if v.len() != n {
                return Err(XrayError::Dimension { expected: n, got: v.len() });
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let viol = (dot(&omega, &omega) - 1.0).abs().max(dot(&omega, &x).abs()).max(dot(&omega, &y).abs());
        if viol > TRANSVERSE_TOL {
            return Err(XrayError::Constraint(viol));
        }
        Ok(TransverseRay { omega, x, y })
    }
}

/// Lazily compiled partial derivatives `∂^α f` of one field.
pub struct FieldDerivatives {
    field: PolyBumpField,
    cache: Mutex<HashMap<Vec<u32>, Arc<CompiledField>>>,
}

impl FieldDerivatives {
    pub fn new(field: PolyBumpField) -> Self {
        FieldDerivatives { field, cache: Mutex::new(HashMap::new()) }
    }

    pub fn field(&self) -> &PolyBumpField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn rank(&self) -> usize {
        self.field.rank()
    }

    pub fn get(&self, orders: &[u32]) -> Result<Arc<CompiledField>, FieldError> {
        if let Some(c) = self.cache.lock().unwrap().get(orders) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.field.partial(orders)?.compile());
        Ok(self.cache.lock().unwrap().entry(orders.to_vec()).or_insert(c).clone())
    }

    pub fn base(&self) -> Arc<CompiledField> {
        self.get(&vec![0; self.n()]).expect("zero derivative order is always within budget")
    }
}

/// `∫_{chord} t^k Σ_p w_p f_p(x + tξ) dt`, exact for the polynomial integrand.
fn chord_integral(f: &CompiledField, line: &Line, k: u32, weights: &[f64]) -> Result<f64, XrayError> {
    let rho = f.rho().ok_or(XrayError::Unbounded)?;
    let Some((a, b)) = line.chord(rho) else { return Ok(0.0) };
    let deg = f.degree() + k;
    let rule = gauss_legendre(deg as usize / 2 + 1);
    let n = line.n();
    let mut pt = vec![0.0; n];
    Ok(rule.integrate(a, b, |t| {
        for i in 0..n {
            pt[i] = line.x[i] + t * line.xi[i];
        }
        t.powi(k as i32) * f.contract(&pt, weights)
    }))
}

fn check_dim(f: &CompiledField, line: &Line) -> Result<(), XrayError> {
    if f.n() != line.n() {
        return Err(XrayError::Dimension { expected: f.n(), got: line.n() });
    }
    Ok(())
}

/// Weights `mult_I ∂^β(ξ^I)` over canonical positions of rank `m`.
fn monomial_weights(n: usize, m: usize, xi: &[f64], beta: &[u32]) -> Vec<f64> {
    let space = index_space(n, m);
    space
        .indices()
        .enumerate()
        .map(|(p, idx)| {
            let mut counts = vec![0u32; n];
            for &i in idx {
                counts[i] += 1;
            }
            let mut w = space.multiplicity(p) as f64;
            for v in 0..n {
                if beta[v] > counts[v] {
                    return 0.0;
                }
                for j in 0..beta[v] {
                    w *= (counts[v] - j) as f64;
                }
                w *= xi[v].powi((counts[v] - beta[v]) as i32);
            }
            w
        })
        .collect()
}

/// `J^k_m f(x, ξ) = ∫ t^k ⟨f(x+tξ), ξ^{⊙m}⟩ dt` on a compiled field.
pub fn momentum_compiled(f: &CompiledField, line: &Line, k: u32) -> Result<f64, XrayError> {
    check_dim(f, line)?;
    let w = monomial_weights(f.n(), f.rank(), &line.xi, &vec![0; f.n()]);
    chord_integral(f, line, k, &w)
}

pub fn ray_transform(f: &PolyBumpField, line: &Line) -> Result<f64, XrayError> {
    momentum_transform(f, line, 0)
}

pub fn momentum_transform(f: &PolyBumpField, line: &Line, k: u32) -> Result<f64, XrayError> {
    momentum_compiled(&f.compile(), line, k)
}

/// Residuals of `J(x, rξ) − (r^m/|r|) J(x, ξ)` and `J(x + sξ, ξ) − J(x, ξ)`.
pub fn homogeneity_check(
    f: &PolyBumpField,
    x: &[f64],
    xi: &[f64],
    r: f64,
    s_shift: f64,
) -> Result<(f64, f64), XrayError> {
    if r == 0.0 {
        return Err(XrayError::ZeroDirection);
    }
    let c = f.compile();
    let m = f.rank() as i32;
    let base = momentum_compiled(&c, &Line::new(x.to_vec(), xi.to_vec())?, 0)?;
    let scaled = momentum_compiled(&c, &Line::new(x.to_vec(), xi.iter().map(|v| r * v).collect())?, 0)?;
    let shifted = Line::new(x.iter().zip(xi).map(|(a, b)| a + s_shift * b).collect(), xi.to_vec())?;
    let moved = momentum_compiled(&c, &shifted, 0)?;
    Ok((scaled - r.powi(m) / r.abs() * base, moved - base))
}

/// `J^k(x + sξ, ξ)` from `[J^0, …, J^k](x, ξ)`.
pub fn momentum_shift(values: &[f64], s: f64) -> f64 {
    let k = values.len() - 1;
    (0..=k).map(|l| binomial(k as u64, l as u64) as f64 * (-s).powi((k - l) as i32) * values[l]).sum()
}

pub(crate) fn binomial_multi(beta: &[u32], beta1: &[u32]) -> f64 {
    beta.iter().zip(beta1).map(|(&b, &c)| binomial(b as u64, c as u64) as f64).product()
}

/// All `β₁ ≤ β` componentwise.
pub(crate) fn sub_multi_indices(beta: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &b in beta {
        out = out.into_iter().flat_map(|p| (0..=b).map(move |c| { let mut q = p.clone(); q.push(c); q })).collect();
    }
    out
}

/// `∂^α_x ∂^β_ξ J^k_m f (x, ξ)`, exact.
pub fn transform_derivative(
    fd: &FieldDerivatives,
    line: &Line,
    k: u32,
    alpha: &[u32],
    beta: &[u32],
) -> Result<f64, XrayError> {
    let n = fd.n();
    if line.n() != n || alpha.len() != n || beta.len() != n {
        return Err(XrayError::Dimension { expected: n, got: line.n() });
    }
    let total: u32 = alpha.iter().sum::<u32>() + beta.iter().sum::<u32>();
    fd.field().check_budget(total)?;
    let mut acc = 0.0;
    for beta1 in sub_multi_indices(beta) {
        let beta2: Vec<u32> = beta.iter().zip(&beta1).map(|(a, b)| a - b).collect();
        let w = monomial_weights(n, fd.rank(), &line.xi, &beta2);
        if w.iter().all(|&v| v == 0.0) {
            continue;
        }
        let orders: Vec<u32> = alpha.iter().zip(&beta1).map(|(a, b)| a + b).collect();
        let g = fd.get(&orders)?;
        let b1: u32 = beta1.iter().sum();
        acc += binomial_multi(beta, &beta1) * chord_integral(&g, line, k + b1, &w)?;
    }
    Ok(acc)
}

/// `J_{ij} J^k f = ∂²/∂x_i∂ξ_j − ∂²/∂x_j∂ξ_i`.
pub fn john_apply(fd: &FieldDerivatives, line: &Line, k: u32, pair: (usize, usize)) -> Result<f64, XrayError> {
    john_iterate(fd, line, k, &[pair])
}

/// `J_{i_1 j_1} ⋯ J_{i_P j_P} J^k f`, expanded into `2^P` signed mixed partials.
pub fn john_iterate(
    fd: &FieldDerivatives,
    line: &Line,
    k: u32,
    pairs: &[(usize, usize)],
) -> Result<f64, XrayError> {
    let n = fd.n();
    fd.field().check_budget(2 * pairs.len() as u32)?;
    let mut acc = 0.0;
    for mask in 0u32..(1 << pairs.len()) {
        let mut alpha = vec![0u32; n];
        let mut beta = vec![0u32; n];
        let mut sign = 1.0;
        for (t, &(i, j)) in pairs.iter().enumerate() {
            let (a, b) = if mask >> t & 1 == 0 { (i, j) } else { (j, i) };
            if mask >> t & 1 == 1 {
                sign = -sign;
            }
            alpha[a] += 1;
            beta[b] += 1;
        }
        acc += sign * transform_derivative(fd, line, k, &alpha, &beta)?;
    }
    Ok(acc)
}

/// One component of the John relation check.
#[derive(Debug, Clone, PartialEq)]
pub struct JohnResidual {
    /// Interleaved index `i_1 j_1 … i_m j_m`.
    pub index: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl JohnResidual {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Sorted tuples of pairs `(i, j)` with `i < j`, one per independent component of `Rf`.
pub fn pair_components(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let space = index_space(pairs.len(), m);
    space.indices().map(|idx| idx.iter().map(|&p| pairs[p]).collect()).collect()
}

/// `(−2)^m m! J_0((Rf)_{i_1 j_1 …}) = J_{i_1 j_1} ⋯ J_{i_m j_m} J_m f` on one line.
pub fn verify_john_relation(
    fd: &FieldDerivatives,
    rf: &crate::polyfield::PairSymTensorField,
    line: &Line,
) -> Result<Vec<JohnResidual>, XrayError> {
    let m = fd.rank();
    if m == 0 {
        return Err(XrayError::Field(FieldError::Rank("the John relation needs m >= 1".into())));
    }
    fd.field().check_budget(2 * m as u32)?;
    let n = fd.n();
    let scale = (-2f64).powi(m as i32) * (1..=m).product::<usize>() as f64;
    let mut out = Vec::new();
    for comps in pair_components(n, m) {
        let index: Vec<usize> = comps.iter().flat_map(|&(i, j)| [i, j]).collect();
        let scalar = rf.component_field(&index).compile();
        let lhs = scale * momentum_compiled(&scalar, line, 0)?;
        let rhs = john_iterate(fd, line, 0, &comps)?;
        out.push(JohnResidual { index, lhs, rhs });
    }
    Ok(out)
}

/// `T f(ω, x, y) = ∫ ⟨f(x + tω), y^{⊙m}⟩ dt`.
pub fn transverse_compiled(f: &CompiledField, ray: &TransverseRay) -> Result<f64, XrayError> {
    let line = Line::new(ray.x.clone(), ray.omega.clone())?;
    check_dim(f, &line)?;
    let w = monomial_weights(f.n(), f.rank(), &ray.y, &vec![0; f.n()]);
    chord_integral(f, &line, 0, &w)
}

pub fn transverse_transform(f: &PolyBumpField, ray: &TransverseRay) -> Result<f64, XrayError> {
    transverse_compiled(&f.compile(), ray)
}

/// `⟨f, η_{I_1} ⊙ ⋯ ⊙ η_{I_m}⟩` from values of `φ(v) = ⟨f, v^{⊙m}⟩` by polarization:
/// `u_1 ⊙ ⋯ ⊙ u_m = (1/m!) Σ_{∅≠S} (−1)^{m−|S|} (Σ_{t∈S} u_t)^{⊙m}`.
pub fn polarized_pairings(etas: &[Vec<f64>], m: usize, mut phi: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let n = etas.len();
    let mfact: f64 = (1..=m).product::<usize>() as f64;
    index_space(n, m)
        .indices()
        .map(|idx| {
            if m == 0 {
                return phi(&vec![0.0; etas.first().map_or(0, |e| e.len())]);
            }
            let dim = etas[0].len();
            let mut acc = 0.0;
            for mask in 1u32..(1 << m) {
                let mut v = vec![0.0; dim];
                for t in 0..m {
                    if mask >> t & 1 == 1 {
                        for (a, b) in v.iter_mut().zip(&etas[idx[t]]) {
                            *a += b;
                        }
                    }
                }
                let sign = if (m - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * phi(&v);
            }
            acc / mfact
        })
        .collect()
}

/// Recover `f(x) ∈ S^m` from `samples[p] = ⟨f, η_{I_1} ⊙ ⋯ ⊙ η_{I_m}⟩`, `I` the
/// `p`-th canonical multi-index.
pub fn trt_pointwise_recover(etas: &[Vec<f64>], m: usize, samples: &[f64]) -> Result<SymTensor<f64>, XrayError> {
    let n = etas.len();
    if etas.iter().any(|e| e.len() != n) {
        return Err(XrayError::Dimension { expected: n, got: etas.iter().map(|e| e.len()).find(|&l| l != n).unwrap() });
    }
    let space = index_space(n, m);
    if samples.len() != space.len() {
        return Err(XrayError::SampleCount { expected: space.len(), got: samples.len() });
    }
    let rows: Vec<Vec<f64>> = space
        .indices()
        .map(|idx| {
            let mono = sym_monomial(etas, idx);
            mono.entries().iter().enumerate().map(|(q, v)| v * space.multiplicity(q) as f64).collect()
        })
        .collect();
    let sol = linalg::solve(&rows, samples).ok_or(XrayError::Singular)?;
    Ok(SymTensor::from_vec(n, m, sol))
}

/// Evaluate `J^k` on many lines in parallel; output order follows input.
pub fn momentum_batch(f: &CompiledField, lines: &[Line], k: u32) -> Result<Vec<f64>, XrayError> {
    lines.par_iter().map(|l| momentum_compiled(f, l, k)).collect()
}

/// Read a line set: header row, then `x_1..x_n, xi_1..xi_n` per row.
pub fn read_lines_csv(reader: impl Read, n: usize) -> Result<Vec<Line>, XrayError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| XrayError::Io(e.to_string()))?;
        if rec.len() != 2 * n {
            return Err(XrayError::Io(format!("row {}: expected {} columns, got {}", row + 1, 2 * n, rec.len())));
        }
        let vals = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| XrayError::Io(format!("row {}: bad number {v:?}", row + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Line::new(vals[..n].to_vec(), vals[n..].to_vec())?);
    }
    Ok(out)
}

/// Write lines with appended value columns named `names`.
pub fn write_lines_csv(
    writer: impl Write,
    lines: &[Line],
    names: &[&str],
    values: &[Vec<f64>],
) -> Result<(), XrayError> {
    let io = |e: csv::Error| XrayError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let n = lines.first().map_or(0, |l| l.n());
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.extend((1..=n).map(|i| format!("xi_{i}")));
    header.extend(names.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(io)?;
    for (r, line) in lines.iter().enumerate() {
        let mut rec: Vec<String> = line.x.iter().chain(&line.xi).map(|v| format!("{v:e}")).collect();
        rec.extend(values.iter().map(|col| format!("{:e}", col[r])));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| XrayError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::polyfield::{random_field, Support};
    use crate::rng::Sampler;
    use crate::scalar::{int, rat};

    fn ball() -> Support {
        Support::ball(int(1))
    }

    fn random_line(s: &mut Sampler, n: usize) -> Line {
        Line::new(s.in_ball(n, 0.8), (0..n).map(|_| s.uniform(-1.5, 1.5)).collect()).unwrap()
    }

    #[test]
    fn chord_integral_of_bump() {
        let f = PolyBumpField::scalar(ball(), 1, Polynomial::one(2));
        let through = Line::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!((ray_transform(&f, &through).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let miss = Line::new(vec![0.0, 1.5], vec![1.0, 0.0]).unwrap();
        assert_eq!(ray_transform(&f, &miss).unwrap(), 0.0);
        let tangent = Line::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(ray_transform(&f, &tangent).unwrap(), 0.0);
        assert!(matches!(Line::new(vec![0.0, 0.0], vec![0.0, 0.0]), Err(XrayError::ZeroDirection)));
    }

    #[test]
    fn potentials_have_zero_transform() {
        let mut s = Sampler::new(31, 0);
        for m in 1..=3 {
            let v = random_field(&mut s, 2, m - 1, 2, ball(), 3);
            let dv = v.inner_derivative().unwrap().compile();
            for _ in 0..50 {
                let line = random_line(&mut s, 2);
                assert!(momentum_compiled(&dv, &line, 0).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn homogeneities() {
        let mut s = Sampler::new(32, 0);
        for m in 0..3 {
            let f = random_field(&mut s, 2, m, 2, ball(), 3);
            for r in [2.0, -1.0, 0.5, -3.0] {
                let (a, b) = homogeneity_check(&f, &[0.1, 0.2], &[0.6, -0.3], r, 0.7).unwrap();
                assert!(a.abs() < 1e-12 && b.abs() < 1e-12, "m={m} r={r}: {a} {b}");
            }
        }
    }

    #[test]
    fn momentum_laws() {
        let mut s = Sampler::new(33, 0);
        let f = random_field(&mut s, 2, 1, 2, ball(), 3);
        let c = f.compile();
        let line = random_line(&mut s, 2);
        assert_eq!(momentum_compiled(&c, &line, 0).unwrap(), ray_transform(&f, &line).unwrap());
        let vals: Vec<f64> = (0..=2).map(|k| momentum_compiled(&c, &line, k).unwrap()).collect();
        let shift = -0.37;
        let moved = Line::new(line.point(shift), line.xi.clone()).unwrap();
        let want = momentum_compiled(&c, &moved, 2).unwrap();
        assert!((momentum_shift(&vals, shift) - want).abs() < 1e-12);
        let scaled = Line::new(line.x.clone(), line.xi.iter().map(|v| 3.0 * v).collect()).unwrap();
        let j1 = momentum_compiled(&c, &line, 1).unwrap();
        assert!((momentum_compiled(&c, &scaled, 1).unwrap() - j1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut s = Sampler::new(34, 0);
        let h = 1e-5;
        for trial in 0..20 {
            let m = trial % 3;
            let f = random_field(&mut s, 2, m, 2, Support::ball(rat(6, 5)), 4);
            let fd = FieldDerivatives::new(f);
            let c = fd.base();
            let line = random_line(&mut s, 2);
            let k = (trial % 2) as u32;
            for var in 0..2 {
                for in_xi in [false, true] {
                    let mut alpha = vec![0, 0];
                    let mut beta = vec![0, 0];
                    if in_xi { beta[var] = 1 } else { alpha[var] = 1 }
                    let exact = transform_derivative(&fd, &line, k, &alpha, &beta).unwrap();
                    let shifted = |d: f64| {
                        let mut l = line.clone();
                        if in_xi { l.xi[var] += d } else { l.x[var] += d }
                        momentum_compiled(&c, &l, k).unwrap()
                    };
                    let fdv = (shifted(h) - shifted(-h)) / (2.0 * h);
                    let scale = exact.abs().max(1.0);
                    assert!((exact - fdv).abs() / scale < 1e-7, "trial {trial}: {exact} vs {fdv}");
                }
            }
        }
    }

    #[test]
    fn john_operator_basics() {
        let mut s = Sampler::new(35, 0);
        let f0 = FieldDerivatives::new(random_field(&mut s, 3, 0, 2, ball(), 4));
        for _ in 0..100 {
            let line = random_line(&mut s, 3);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!(john_apply(&f0, &line, 0, (i, j)).unwrap().abs() < 1e-10);
            }
        }
        let f1 = FieldDerivatives::new(random_field(&mut s, 2, 1, 2, ball(), 4));
        let line = random_line(&mut s, 2);
        let a = john_apply(&f1, &line, 0, (0, 1)).unwrap();
        let b = john_apply(&f1, &line, 0, (1, 0)).unwrap();
        assert!((a + b).abs() < 1e-12);
        assert_eq!(john_apply(&f1, &line, 0, (1, 1)).unwrap(), 0.0);
    }

    #[test]
    fn john_relation() {
        let mut s = Sampler::new(36, 0);
        for (m, tol) in [(1usize, 1e-10), (2, 1e-9)] {
            let f = random_field(&mut s, 2, m, 2, ball(), 2 * m as u32 + 2);
            let rf = f.operator_r().unwrap();
            let fd = FieldDerivatives::new(f);
            for _ in 0..20 {
                let line = random_line(&mut s, 2);
                for r in verify_john_relation(&fd, &rf, &line).unwrap() {
                    assert!(r.residual() <= tol * r.lhs.abs().max(1.0), "m={m}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn transverse_cases() {
        let mut s = Sampler::new(37, 0);
        let f = random_field(&mut s, 3, 2, 2, ball(), 3);
        let omega = vec![0.0, 0.0, 1.0];
        let ray = TransverseRay::new(omega.clone(), vec![0.2, -0.1, 0.0], vec![0.3, 0.7, 0.0]).unwrap();
        let t = transverse_transform(&f, &ray).unwrap();
        // componentwise scalar oracle
        let mut want = 0.0;
        for (idx, q) in f.core().iter() {
            let comp = PolyBumpField::scalar(ball(), f.s(), q.clone());
            let mono: f64 = idx.iter().map(|&i| ray.y[i]).product();
            let mult = index_space(3, 2).multiplicity(index_space(3, 2).position(idx)) as f64;
            want += mult * mono * ray_transform(&comp, &Line::new(ray.x.clone(), omega.clone()).unwrap()).unwrap();
        }
        assert!((t - want).abs() < 1e-12);
        let zero_y = TransverseRay::new(omega.clone(), vec![0.2, -0.1, 0.0], vec![0.0; 3]).unwrap();
        assert_eq!(transverse_transform(&f, &zero_y).unwrap(), 0.0);
        assert!(matches!(
            TransverseRay::new(omega, vec![0.0, 0.0, 0.1], vec![1.0, 0.0, 0.0]),
            Err(XrayError::Constraint(_))
        ));
    }

    #[test]
    fn pointwise_recovery() {
        let mut s = Sampler::new(38, 0);
        let f = SymTensor::from_fn(3, 2, |_| s.uniform(-1.0, 1.0));
        let basis: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let etas: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| s.uniform(-1.0, 1.0)).collect()).collect();
        let phi = |v: &[f64]| crate::symtensor::inner(&f, &SymTensor::outer_power(v, 2)).unwrap();
        for e in [&basis, &etas] {
            let samples = polarized_pairings(e, 2, phi);
            let got = trt_pointwise_recover(e, 2, &samples).unwrap();
            assert!(got.sub::<f64>(&f).max_abs() < 1e-10);
        }
        let zeros = trt_pointwise_recover(&etas, 2, &[0.0; 6]).unwrap();
        assert_eq!(zeros.max_abs(), 0.0);
        let dependent = vec![etas[0].clone(), etas[1].clone(), etas[0].clone()];
        assert!(matches!(trt_pointwise_recover(&dependent, 2, &[1.0; 6]), Err(XrayError::Singular)));
    }

    #[test]
    fn csv_round_trip() {
        let lines = vec![
            Line::new(vec![0.0, 0.1], vec![1.0, 0.0]).unwrap(),
            Line::new(vec![-0.2, 0.3], vec![0.5, 0.5]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_lines_csv(&mut buf, &lines, &["j0"], &[vec![1.5, -2.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x_1,x_2,xi_1,xi_2,j0"));
        let input = "x_1,x_2,xi_1,xi_2\n0,0.1,1,0\n-0.2,0.3,0.5,0.5\n";
        assert_eq!(read_lines_csv(input.as_bytes(), 2).unwrap(), lines);
        assert!(read_lines_csv("a,b\n1,2\n".as_bytes(), 2).is_err());
    }
}
