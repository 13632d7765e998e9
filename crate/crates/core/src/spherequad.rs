//! Integration over the unit sphere `S^{n-1}`.
//!
//! Exact results are carried as a rational multiple of the surface measure
//! `|S^{n-1}|` (which is `2π` for `n = 2` and `4π` for `n = 3`); every
//! monomial integral is such a multiple, so identities built from them can
//! be checked with exact equality.

use serde::{Deserialize, Serialize};

use crate::gauss::gauss_legendre;
use crate::poly::Polynomial;
use crate::scalar::{factorial, int, Rational, Scalar};
use crate::symtensor::{ij_power, SymTensor};

/// `|S^{n-1}|`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let (mut a, mut k) = if n % 2 == 1 { (2.0, 1) } else { (two_pi, 2) };
    while k < n {
        a *= two_pi / k as f64;
        k += 2;
    }
    a
}

/// Exact value `coeff · |S^{n-1}|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereValue {
    pub n: usize,
    pub coeff: Rational,
}

impl SphereValue {
    pub fn zero(n: usize) -> Self {
        SphereValue { n, coeff: int(0) }
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64() * sphere_area(self.n)
    }

    pub fn is_zero(&self) -> bool {
        Scalar::is_zero(&self.coeff)
    }
}

impl std::ops::Add for SphereValue {
    type Output = SphereValue;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.n, rhs.n);
        SphereValue { n: self.n, coeff: self.coeff + rhs.coeff }
    }
}

impl std::ops::Sub for SphereValue {
    type Output = SphereValue;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.n, rhs.n);
        SphereValue { n: self.n, coeff: self.coeff - rhs.coeff }
    }
}

fn double_factorial_odd(k: u32) -> u64 {
    // (k-1)!! for even k, i.e. 1·3·5⋯(k-1)
    (1..k as u64).step_by(2).product()
}

/// `∫_S ξ^α dS / |S^{n-1}|`: zero unless all exponents are even, otherwise
/// `∏(α_i - 1)!! / ∏_{j<|α|/2} (n + 2j)`.
pub fn sphere_monomial_ratio(exps: &[u32]) -> Rational {
    if exps.iter().any(|e| e % 2 == 1) {
        return int(0);
    }
    let n = exps.len() as i64;
    let half: u32 = exps.iter().sum::<u32>() / 2;
    let mut num = num_bigint::BigInt::from(1);
    for &e in exps {
        num *= double_factorial_odd(e);
    }
    let mut den = num_bigint::BigInt::from(1);
    for j in 0..half as i64 {
        den *= n + 2 * j;
    }
    Rational::new(num, den)
}

pub fn monomial_sphere_integral(exps: &[u32]) -> SphereValue {
    SphereValue { n: exps.len(), coeff: sphere_monomial_ratio(exps) }
}

/// Exact sphere integral of a polynomial.
pub fn integrate_polynomial(p: &Polynomial<Rational>) -> SphereValue {
    let mut coeff = int(0);
    for (e, c) in p.terms() {
        let r = sphere_monomial_ratio(e);
        if !Scalar::is_zero(&r) {
            coeff += c * r;
        }
    }
    SphereValue { n: p.nvars(), coeff }
}

/// Exact integral over the ball of radius `rho`, as a multiple of `|S^{n-1}|`.
pub fn integrate_polynomial_ball(p: &Polynomial<Rational>, rho: &Rational) -> SphereValue {
    let n = p.nvars() as u32;
    let mut coeff = int(0);
    for (e, c) in p.terms() {
        let r = sphere_monomial_ratio(e);
        if Scalar::is_zero(&r) {
            continue;
        }
        let d: u32 = e.iter().sum::<u32>() + n;
        let radial = num_traits::pow(rho.clone(), d as usize) / int(d as i64);
        coeff += c * r * radial;
    }
    SphereValue { n: p.nvars(), coeff }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("numerator is not homogeneous")]
    NotHomogeneous,
    #[error("homogeneity degree {got} does not match required {want}")]
    DegreeMismatch { got: i64, want: i64 },
    #[error("l = {l} out of range 0..={max} for s = {s}")]
    LOutOfRange { l: u32, s: u32, max: u32 },
    #[error("no numerical sphere rule for dimension {0}; supported: 2, 3")]
    UnsupportedDimension(usize),
    #[error("index {index} out of range for dimension {n}")]
    Index { index: usize, n: usize },
}

/// `p(ξ) / |ξ|^{2r}` with `p` homogeneous.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousRational {
    numerator: Polynomial<Rational>,
    pow2r: u32,
    degree: i64,
}

impl HomogeneousRational {
    pub fn new(numerator: Polynomial<Rational>, pow2r: u32) -> Result<Self, QuadError> {
        let d = if numerator.is_zero() {
            0
        } else {
            numerator.homogeneous_degree().ok_or(QuadError::NotHomogeneous)? as i64
        };
        Ok(HomogeneousRational { numerator, pow2r, degree: d - 2 * pow2r as i64 })
    }

    /// The zero function, assigned homogeneity degree `degree`.
    pub fn zero(n: usize, degree: i64) -> Self {
        HomogeneousRational { numerator: Polynomial::zero(n), pow2r: 0, degree }
    }

    pub fn n(&self) -> usize {
        self.numerator.nvars()
    }

    pub fn numerator(&self) -> &Polynomial<Rational> {
        &self.numerator
    }

    pub fn pow2r(&self) -> u32 {
        self.pow2r
    }

    /// Homogeneity degree `λ = deg p - 2r`.
    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// `∂g/∂ξ_i = [(∂_i p)|ξ|² - 2r ξ_i p] / |ξ|^{2(r+1)}`.
    pub fn derivative(&self, i: usize) -> Self {
        let n = self.n();
        let r = self.pow2r;
        let mut num = &self.numerator.derivative(i) * &Polynomial::norm_squared(n);
        num.add_scaled(&self.numerator.mul_var(i), &int(-2 * r as i64));
        HomogeneousRational { numerator: num, pow2r: r + 1, degree: self.degree - 1 }
    }

    /// Multiply by a homogeneous polynomial.
    pub fn mul_polynomial(&self, q: &Polynomial<Rational>) -> Self {
        let dq = q.homogeneous_degree().unwrap_or(0) as i64;
        HomogeneousRational {
            numerator: &self.numerator * q,
            pow2r: self.pow2r,
            degree: self.degree + dq,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        self.numerator.to_f64().eval(xi) / r2.powi(self.pow2r as i32)
    }
}

/// Exact `∫_S g dS`; on the sphere `|ξ| = 1`, so only the numerator matters.
pub fn integrate_homogeneous(g: &HomogeneousRational) -> SphereValue {
    integrate_polynomial(&g.numerator)
}

/// Exact `∫_{|ξ|≤1} g dξ = ∫_S g / (n + λ)` by radial factorization; needs `n + λ > 0`.
pub fn integrate_homogeneous_ball(g: &HomogeneousRational) -> Option<SphereValue> {
    let nl = g.n() as i64 + g.degree;
    if nl <= 0 {
        return None;
    }
    let s = integrate_homogeneous(g);
    Some(SphereValue { n: s.n, coeff: s.coeff / int(nl) })
}

/// `c_{l,s} = ∏_{w=0}^{s-l-1}(n-1+2w) · (-1)^l s! / (2^l l! (s-2l)!)`.
pub fn c_constant(l: u32, s: u32, n: u32) -> Result<Rational, QuadError> {
    if 2 * l > s {
        return Err(QuadError::LOutOfRange { l, s, max: s / 2 });
    }
    let mut prod = int(1);
    for w in 0..(s - l) as i64 {
        prod *= int(n as i64 - 1 + 2 * w);
    }
    let sign = if l % 2 == 0 { 1 } else { -1 };
    let num = Rational::from_integer(crate::scalar::factorial_big(s as u64)) * int(sign);
    let den = int(1i64 << l) * int(factorial(l as u64) as i64) * int(factorial((s - 2 * l) as u64) as i64);
    Ok(prod * num / den)
}

/// `ξ^{⊙s}` with polynomial components in `n` variables.
pub fn xi_power_polynomial(n: usize, s: usize) -> SymTensor<Polynomial<Rational>> {
    SymTensor::from_fn(n, s, |idx| {
        let mut e = vec![0u32; n];
        for &i in idx {
            e[i] += 1;
        }
        Polynomial::monomial(n, e, int(1))
    })
}

/// LHS − RHS of the integration-by-parts identity for `g` of degree `s − 1`
/// and the derivative index tuple `idx` (length `s`), evaluated exactly.
pub fn verify_ibp(g: &HomogeneousRational, idx: &[usize]) -> Result<SphereValue, QuadError> {
    let s = idx.len();
    let n = g.n();
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(QuadError::Index { index: bad, n });
    }
    if g.degree() != s as i64 - 1 {
        return Err(QuadError::DegreeMismatch { got: g.degree(), want: s as i64 - 1 });
    }
    let mut d = g.clone();
    for &i in idx {
        d = d.derivative(i);
    }
    let lhs = integrate_homogeneous(&d);
    let xi = xi_power_polynomial(n, s);
    let mut rhs = SphereValue::zero(n);
    for l in 0..=(s / 2) as u32 {
        let c = c_constant(l, s as u32, n as u32)?;
        let comp = ij_power::<Rational, _>(&xi, l as usize).get(idx).clone();
        let prod = &comp * g.numerator();
        let v = integrate_polynomial(&prod);
        rhs = rhs + SphereValue { n, coeff: v.coeff * c };
    }
    Ok(lhs - rhs)
}

/// Nodes and weights on `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRule {
    pub n: usize,
    pub degree: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// `n = 2`: `degree + 1` equispaced angles; `n = 3`: Gauss–Legendre in
/// `cos θ` times equispaced azimuth. Both are exact through `degree`.
pub fn build_rule(n: usize, degree: usize) -> Result<SphereRule, QuadError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    match n {
        2 => {
            let count = degree + 1;
            let w = two_pi / count as f64;
            let nodes = (0..count)
                .map(|j| {
                    let t = two_pi * j as f64 / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            Ok(SphereRule { n, degree, nodes, weights: vec![w; count] })
        }
        3 => {
            let polar = gauss_legendre(degree / 2 + 1);
            let naz = degree + 1;
            let mut nodes = Vec::with_capacity(polar.len() * naz);
            let mut weights = Vec::with_capacity(polar.len() * naz);
            for (z, wz) in polar.nodes.iter().zip(&polar.weights) {
                let rxy = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..naz {
                    let phi = two_pi * j as f64 / naz as f64;
                    nodes.push(vec![rxy * phi.cos(), rxy * phi.sin(), *z]);
                    weights.push(wz * two_pi / naz as f64);
                }
            }
            Ok(SphereRule { n, degree, nodes, weights })
        }
        _ => Err(QuadError::UnsupportedDimension(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use std::f64::consts::PI;

    /// Γ at positive half-integers `k/2`.
    fn gamma_half(k: u32) -> f64 {
        let mut x = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
        let mut a = if k % 2 == 0 { 1.0 } else { 0.5 };
        let target = k as f64 / 2.0;
        while a < target - 1e-9 {
            x *= a;
            a += 1.0;
        }
        x
    }

    fn gamma_formula(exps: &[u32]) -> f64 {
        if exps.iter().any(|e| e % 2 == 1) {
            return 0.0;
        }
        let n = exps.len() as u32;
        let total: u32 = exps.iter().sum();
        2.0 * exps.iter().map(|&a| gamma_half(a + 1)).product::<f64>() / gamma_half(total + n)
    }

    #[test]
    fn areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn monomials_match_gamma_formula() {
        assert!((monomial_sphere_integral(&[0, 0]).to_f64() - 2.0 * PI).abs() < 1e-14);
        assert!(monomial_sphere_integral(&[1, 0]).is_zero());
        assert_eq!(monomial_sphere_integral(&[0, 0, 2]).coeff, rat(1, 3));
        for n in 2..=4usize {
            for total in 0..=8u32 {
                let mut e = vec![0u32; n];
                e[0] = total;
                let got = monomial_sphere_integral(&e).to_f64();
                assert!((got - gamma_formula(&e)).abs() < 1e-12, "{e:?}");
                if n >= 2 && total >= 2 {
                    e[0] = total - 2;
                    e[1] = 2;
                    let got = monomial_sphere_integral(&e).to_f64();
                    assert!((got - gamma_formula(&e)).abs() < 1e-12, "{e:?}");
                }
            }
        }
    }

    #[test]
    fn homogeneous_examples() {
        let n = 2;
        let x1x2 = Polynomial::monomial(n, vec![1, 1], int(1));
        let g = HomogeneousRational::new(x1x2, 1).unwrap();
        assert_eq!(g.degree(), 0);
        assert!(integrate_homogeneous(&g).is_zero());
        let x1sq = Polynomial::monomial(n, vec![2, 0], int(1));
        let g = HomogeneousRational::new(x1sq.clone(), 1).unwrap();
        assert!((integrate_homogeneous(&g).to_f64() - PI).abs() < 1e-14);
        // ∫_S ξ_1² = (n+λ) ∫_ball ξ_1²: π = 4 · π/4
        let h = HomogeneousRational::new(x1sq.clone(), 0).unwrap();
        let ball = integrate_polynomial_ball(&x1sq, &int(1));
        assert!((ball.to_f64() - PI / 4.0).abs() < 1e-14);
        assert_eq!(integrate_homogeneous(&h).coeff, int(4) * ball.coeff);
    }

    #[test]
    fn derivative_lowers_degree() {
        let p = Polynomial::from_terms(3, vec![(vec![3, 0, 0], int(2)), (vec![1, 1, 1], int(-1))]);
        let g = HomogeneousRational::new(p, 1).unwrap();
        let d = g.derivative(1);
        assert_eq!(d.degree(), 0);
        // finite-difference check
        let x = [0.3, -0.7, 0.4];
        let h = 1e-6;
        let fd = (g.eval(&[x[0], x[1] + h, x[2]]) - g.eval(&[x[0], x[1] - h, x[2]])) / (2.0 * h);
        assert!((fd - d.eval(&x)).abs() < 1e-8);
    }

    #[test]
    fn constants() {
        for n in 2..=4u32 {
            assert_eq!(c_constant(0, 1, n).unwrap(), int(n as i64 - 1));
            let prod: i64 = (0..3).map(|p| n as i64 - 1 + 2 * p).product();
            assert_eq!(c_constant(0, 3, n).unwrap(), int(prod));
        }
        assert_eq!(c_constant(1, 2, 3).unwrap(), int(-2));
        assert!(c_constant(2, 3, 3).is_err());
    }

    #[test]
    fn ibp_small_cases() {
        let n = 2;
        let one = HomogeneousRational::new(Polynomial::constant(n, int(1)), 0).unwrap();
        assert!(verify_ibp(&one, &[0]).unwrap().is_zero());
        let g = HomogeneousRational::new(Polynomial::monomial(n, vec![1, 1], int(1)), 1).unwrap();
        assert!(verify_ibp(&g, &[0]).unwrap().is_zero());
        let lin = HomogeneousRational::new(
            Polynomial::from_terms(n, vec![(vec![1, 0], int(3)), (vec![0, 1], int(-2))]),
            0,
        )
        .unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!(verify_ibp(&lin, &[a, b]).unwrap().is_zero());
            }
        }
        assert!(verify_ibp(&lin, &[0]).is_err());
    }

    #[test]
    fn rules() {
        let r2 = build_rule(2, 4).unwrap();
        assert!((r2.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        assert!((r2.integrate(|x| x[0].powi(4)) - 3.0 * PI / 4.0).abs() < 1e-12);
        let r3 = build_rule(3, 6).unwrap();
        assert!((r3.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        assert!((r3.integrate(|x| x[2].powi(6)) - 4.0 * PI / 7.0).abs() < 1e-10);
        assert!(build_rule(4, 4).is_err());
        let back = SphereRule::from_json(&r2.to_json()).unwrap();
        assert_eq!(back, r2);
    }

    #[test]
    fn rules_converge_on_smooth_integrand() {
        // ∫_{S^1} exp(ξ_1) = 2π I_0(1)
        let exact = 2.0 * PI * 1.266_065_877_752_008_4;
        let mut prev = f64::INFINITY;
        for deg in [2, 4, 6, 8, 10, 12, 14] {
            let err = (build_rule(2, deg).unwrap().integrate(|x| x[0].exp()) - exact).abs();
            assert!(err < prev || err < 1e-14);
            prev = err;
        }
        assert!(prev < 1e-10);
    }
}
