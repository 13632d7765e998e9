//! Angular-quadrature evaluation of `N_m^k f`, `δ^r N_m^k f` and their
//! spatial derivatives.

use std::collections::HashMap;

use rayon::prelude::*;

use super::NormalError;
use crate::polyfield::{CompiledField, PolyBumpField};
use crate::scalar::{binomial, factorial};
use crate::spherequad::SphereRule;
use crate::symtensor::SymTensor;
use crate::xray::{binomial_multi, momentum_compiled, sub_multi_indices, transform_derivative, FieldDerivatives, Line};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn falling(a: u64, b: u64) -> f64 {
    (0..b).map(|j| (a - j) as f64).product()
}

/// `∫_S g(ξ) ξ^{⊙b} dS` by the rule; node values computed in parallel and
/// summed in node order.
fn sphere_tensor(
    rule: &SphereRule,
    n: usize,
    b: usize,
    g: impl Fn(&[f64]) -> Result<f64, NormalError> + Sync,
) -> Result<SymTensor<f64>, NormalError> {
    if rule.n != n {
        return Err(NormalError::Dimension { expected: n, got: rule.n });
    }
    let vals: Vec<f64> = rule.nodes.par_iter().map(|xi| g(xi)).collect::<Result<_, _>>()?;
    let mut acc = SymTensor::<f64>::zeros(n, b);
    let space = acc.space().clone();
    let mut entries = vec![0.0; space.len()];
    for ((xi, w), v) in rule.nodes.iter().zip(&rule.weights).zip(vals) {
        if v == 0.0 {
            continue;
        }
        for (p, idx) in space.indices().enumerate() {
            entries[p] += w * v * idx.iter().map(|&i| xi[i]).product::<f64>();
        }
    }
    acc = SymTensor::from_vec(n, b, entries);
    Ok(acc)
}

fn check_point(f: &CompiledField, x: &[f64]) -> Result<(), NormalError> {
    if x.len() != f.n() {
        return Err(NormalError::Dimension { expected: f.n(), got: x.len() });
    }
    Ok(())
}

/// `x − ⟨x, ξ⟩ ξ`.
fn project(x: &[f64], xi: &[f64]) -> Vec<f64> {
    let c = dot(x, xi);
    x.iter().zip(xi).map(|(a, b)| a - c * b).collect()
}

/// `∫_S ⟨x,ξ⟩^k ξ^{⊙m} J^k f(x − ⟨x,ξ⟩ξ, ξ) dS`.
pub fn normal_momentum_compiled(
    f: &CompiledField,
    x: &[f64],
    k: u32,
    rule: &SphereRule,
) -> Result<SymTensor<f64>, NormalError> {
    check_point(f, x)?;
    sphere_tensor(rule, f.n(), f.rank(), |xi| {
        let c = dot(x, xi);
        if k > 0 && c == 0.0 {
            return Ok(0.0);
        }
        let line = Line::new(project(x, xi), xi.to_vec())?;
        Ok(c.powi(k as i32) * momentum_compiled(f, &line, k)?)
    })
}

pub fn normal_ray(f: &PolyBumpField, x: &[f64], rule: &SphereRule) -> Result<SymTensor<f64>, NormalError> {
    normal_momentum_compiled(&f.compile(), x, 0, rule)
}

pub fn normal_momentum(
    f: &PolyBumpField,
    x: &[f64],
    k: u32,
    rule: &SphereRule,
) -> Result<SymTensor<f64>, NormalError> {
    normal_momentum_compiled(&f.compile(), x, k, rule)
}

/// `δ^r N^k f = k!/(k−r)! ∫_S ⟨x,ξ⟩^{k−r} ξ^{⊙(m−r)} J^k f(x − ⟨x,ξ⟩ξ, ξ) dS`;
/// zero for `r = k + 1`.
pub fn divergence_normal_compiled(
    f: &CompiledField,
    x: &[f64],
    k: u32,
    r: u32,
    rule: &SphereRule,
) -> Result<SymTensor<f64>, NormalError> {
    check_point(f, x)?;
    let m = f.rank();
    if r > k + 1 || r as usize > m {
        return Err(NormalError::ROutOfRange { r: r as usize, k: k as usize, m });
    }
    if r == k + 1 {
        return Ok(SymTensor::zeros(f.n(), m - r as usize));
    }
    let scale = falling(k as u64, r as u64);
    let e = (k - r) as i32;
    sphere_tensor(rule, f.n(), m - r as usize, |xi| {
        let c = dot(x, xi);
        if e > 0 && c == 0.0 {
            return Ok(0.0);
        }
        let line = Line::new(project(x, xi), xi.to_vec())?;
        Ok(scale * c.powi(e) * momentum_compiled(f, &line, k)?)
    })
}

pub fn divergence_normal(
    f: &PolyBumpField,
    x: &[f64],
    k: u32,
    r: u32,
    rule: &SphereRule,
) -> Result<SymTensor<f64>, NormalError> {
    divergence_normal_compiled(&f.compile(), x, k, r, rule)
}

/// Fourth-order central-difference divergence `Σ_j ∂_j g_{…j}` of a
/// tensor field given pointwise.
pub fn fd_divergence(
    x: &[f64],
    h: f64,
    mut g: impl FnMut(&[f64]) -> Result<SymTensor<f64>, NormalError>,
) -> Result<SymTensor<f64>, NormalError> {
    let n = x.len();
    let mut out: Option<SymTensor<f64>> = None;
    for j in 0..n {
        let mut at = |s: f64| {
            let mut y = x.to_vec();
            y[j] += s * h;
            g(&y)
        };
        let (a, b, c, d) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        let m = a.rank();
        if m == 0 {
            return Err(NormalError::ROutOfRange { r: 1, k: 0, m });
        }
        let t = SymTensor::from_fn(n, m - 1, |idx| {
            let mut full = idx.to_vec();
            full.push(j);
            full.sort_unstable();
            (a.get(&full) - 8.0 * b.get(&full) + 8.0 * c.get(&full) - d.get(&full)) / (12.0 * h)
        });
        out = Some(match out {
            None => t,
            Some(o) => o.add::<f64>(&t),
        });
    }
    out.ok_or(NormalError::Dimension { expected: 1, got: 0 })
}

/// `∂^γ x^{⊙q}` evaluated at `x`.
pub fn power_derivative(x: &[f64], q: usize, gamma: &[u32]) -> SymTensor<f64> {
    let n = x.len();
    SymTensor::from_fn(n, q, |idx| {
        let mut counts = vec![0u32; n];
        for &i in idx {
            counts[i] += 1;
        }
        let mut v = 1.0;
        for (t, (&c, &g)) in counts.iter().zip(gamma).enumerate() {
            if g > c {
                return 0.0;
            }
            v *= falling(c as u64, g as u64) * x[t].powi((c - g) as i32);
        }
        v
    })
}

/// Memoized angular moments of one field at one point, with analytic
/// spatial derivatives moved under the line integral.
pub struct AngularIntegrals<'a> {
    fd: &'a FieldDerivatives,
    rule: &'a SphereRule,
    x: Vec<f64>,
    moments: HashMap<(u32, usize, u32, Vec<u32>), SymTensor<f64>>,
}

impl<'a> AngularIntegrals<'a> {
    pub fn new(fd: &'a FieldDerivatives, rule: &'a SphereRule, x: &[f64]) -> Result<Self, NormalError> {
        if x.len() != fd.n() {
            return Err(NormalError::Dimension { expected: fd.n(), got: x.len() });
        }
        if rule.n != fd.n() {
            return Err(NormalError::Dimension { expected: fd.n(), got: rule.n });
        }
        Ok(AngularIntegrals { fd, rule, x: x.to_vec(), moments: HashMap::new() })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn field(&self) -> &FieldDerivatives {
        self.fd
    }

    /// `∂^γ_x ∫_S ⟨x,ξ⟩^a ξ^{⊙b} J^l f(x, ξ) dS`.
    pub fn moment(&mut self, a: u32, b: usize, l: u32, gamma: &[u32]) -> Result<SymTensor<f64>, NormalError> {
        let key = (a, b, l, gamma.to_vec());
        if let Some(t) = self.moments.get(&key) {
            return Ok(t.clone());
        }
        let n = self.fd.n();
        let fd = self.fd;
        let x = &self.x;
        let parts: Vec<(Vec<u32>, Vec<u32>, f64)> = sub_multi_indices(gamma)
            .into_iter()
            .filter_map(|g1| {
                let d: u32 = g1.iter().sum();
                if d > a {
                    return None;
                }
                let rest: Vec<u32> = gamma.iter().zip(&g1).map(|(u, v)| u - v).collect();
                let c = binomial_multi(gamma, &g1) * falling(a as u64, d as u64);
                Some((g1, rest, c))
            })
            .collect();
        let zero = vec![0u32; n];
        let t = sphere_tensor(self.rule, n, b, |xi| {
            let c = dot(x, xi);
            let line = Line::new(x.to_vec(), xi.to_vec())?;
            let mut acc = 0.0;
            for (g1, rest, coef) in &parts {
                let d: u32 = g1.iter().sum();
                let mut pre = coef * c.powi((a - d) as i32);
                for (v, &e) in g1.iter().enumerate() {
                    pre *= xi[v].powi(e as i32);
                }
                if pre == 0.0 {
                    continue;
                }
                acc += pre * transform_derivative(fd, &line, l, rest, &zero)?;
            }
            Ok(acc)
        })?;
        self.moments.insert(key, t.clone());
        Ok(t)
    }

    /// `∂^γ δ^p N^p f = p! Σ_l C(p,l) ∂^γ ∫_S ⟨x,ξ⟩^{p−l} ξ^{⊙(m−p)} J^l f(x, ξ) dS`.
    pub fn divergence_normal_derivative(&mut self, p: u32, gamma: &[u32]) -> Result<SymTensor<f64>, NormalError> {
        let m = self.fd.rank();
        if p as usize > m {
            return Err(NormalError::ROutOfRange { r: p as usize, k: p as usize, m });
        }
        let b = m - p as usize;
        let mut acc = SymTensor::<f64>::zeros(self.fd.n(), b);
        for l in 0..=p {
            let c = factorial(p as u64) as f64 * binomial(p as u64, l as u64) as f64;
            acc = acc.add::<f64>(&self.moment(p - l, b, l, gamma)?.scale::<f64>(&c));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::polyfield::{random_field, Support};
    use crate::rng::Sampler;
    use crate::scalar::int;
    use crate::spherequad::build_rule;

    #[test]
    fn radial_bump_matches_chord_formula() {
        let s = 3u32;
        let f = PolyBumpField::scalar(Support::ball(int(1)), s, Polynomial::constant(2, int(1)));
        let rule = build_rule(2, 80).unwrap();
        // ∫_{−c}^{c} (c² − t²)^s dt = c^{2s+1} 2^{2s+1} (s!)² / (2s+1)!
        let beta = 2f64.powi(2 * s as i32 + 1) * 36.0 / 5040.0;
        for x in [[0.0, 0.0], [0.4, -0.3], [1.5, 0.2]] {
            let steps = 4000;
            let mut oracle = 0.0;
            for i in 0..steps {
                let th = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
                let c = x[0] * th.cos() + x[1] * th.sin();
                let c2 = 1.0 - (x[0] * x[0] + x[1] * x[1]) + c * c;
                if c2 > 0.0 {
                    oracle += beta * c2.powf(s as f64 + 0.5);
                }
            }
            oracle *= 2.0 * std::f64::consts::PI / steps as f64;
            let got = normal_ray(&f, &x, &rule).unwrap().get(&[]).clone();
            assert!((got - oracle).abs() < 1e-6 * oracle.abs().max(1.0), "{x:?}: {got} vs {oracle}");
        }
    }

    #[test]
    fn potential_fields_are_annihilated() {
        for n in [2, 3] {
            let v = random_field(&mut Sampler::new(5, n as u64), n, 1, 2, Support::ball(int(1)), 4);
            let f = v.inner_derivative().unwrap();
            let rule = build_rule(n, 30).unwrap();
            let x: Vec<f64> = [0.2, -0.1, 0.3][..n].to_vec();
            assert!(normal_ray(&f, &x, &rule).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_vanishes_at_the_origin() {
        let f = random_field(&mut Sampler::new(2, 0), 2, 2, 2, Support::ball(int(1)), 3);
        let rule = build_rule(2, 20).unwrap();
        assert_eq!(normal_momentum(&f, &[0.0, 0.0], 1, &rule).unwrap().max_abs(), 0.0);
        assert!(normal_momentum(&f, &[0.0, 0.0], 0, &rule).unwrap().max_abs() > 0.0);
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let f = random_field(&mut Sampler::new(4, 0), 2, 2, 2, Support::ball(int(1)), 4).compile();
        let rule = build_rule(2, 60).unwrap();
        let x = [0.3, 0.25];
        for k in 0..=2u32 {
            let exact = divergence_normal_compiled(&f, &x, k, 1, &rule).unwrap();
            let fd = fd_divergence(&x, 1e-3, |y| normal_momentum_compiled(&f, y, k, &rule)).unwrap();
            assert!(exact.sub::<f64>(&fd).max_abs() < 1e-6 * exact.max_abs().max(1.0), "k = {k}");
        }
        // δ^{k+1} N^k = 0, checked by differentiating δ^k N^k numerically.
        let dk = |y: &[f64]| divergence_normal_compiled(&f, y, 1, 1, &rule);
        assert!(fd_divergence(&x, 1e-3, dk).unwrap().max_abs() < 1e-6);
        assert!(divergence_normal_compiled(&f, &x, 1, 2, &rule).unwrap().max_abs() == 0.0);
        assert!(divergence_normal_compiled(&f, &x, 0, 2, &rule).is_err());
    }

    #[test]
    fn power_derivative_of_a_vector() {
        let x = [0.5, 2.0];
        let d = power_derivative(&x, 2, &[1, 0]);
        assert_eq!(*d.get(&[0, 0]), 1.0);
        assert_eq!(*d.get(&[0, 1]), 2.0);
        assert_eq!(*d.get(&[1, 1]), 0.0);
    }
}
