//! Grid evaluation of `N_m^k f` as a sum of convolutions with the
//! homogeneous kernels `K_l(z) = z^{⊙(2m+2k−l)} / |z|^{2m+2k−2l+n−1}`:
//!
//! `N^k f(x) = 2 Σ_l C(k,l) (−1)^l j_{x^{⊙(2k−l)}} [f_J ∗ K_l]_{· J}`.
//!
//! Each convolution integral is discretized by the trapezoidal rule on the
//! grid with the singular point at the target node. The weights near the
//! origin carry the locally corrected terms
//! `−h^{n+α+|β|} Z(K y^β) ∂^β g(0) / β!`, `|β| ≤ 2`, where `α` is the
//! kernel degree and `Z` the lattice zeta constant; the origin weight thus
//! replaces the kernel's cell average by its exact lattice correction.
//! Derivatives of the field are taken by central differences.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{fft_nd, GridTensorField};
use super::NormalError;
use crate::gauss::gauss_legendre;
use crate::scalar::binomial;
use crate::spherequad::monomial_sphere_integral;
use crate::symtensor::{index_space, j_contract, SymTensor};

/// Cutoff radius (in lattice units) of the smoothed lattice sums.
const ZETA_RADIUS: [f64; 4] = [0.0, 0.0, 64.0, 24.0];
const ZETA_PLATEAU: f64 = 0.2;

fn cutoff(r: f64) -> f64 {
    if r <= ZETA_PLATEAU {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let u = (r - ZETA_PLATEAU) / (1.0 - ZETA_PLATEAU);
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    b / (a + b)
}

fn monomial(y: &[f64], exps: &[u32]) -> f64 {
    y.iter().zip(exps).map(|(v, &e)| v.powi(e as i32)).product()
}

/// Lattice zeta constant `Z(G) = Σ'_{j ∈ ℤ^n} G(j) − ∫ G` (analytically
/// continued) of `G(y) = y^{exps} / |y|^e`, computed as the smoothly cut-off
/// sum minus the matching integral. Requires `deg G + n > 0`.
pub fn lattice_zeta(exps: &[u32], e: u32) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<u32>, u32), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (exps.to_vec(), e);
    if let Some(&z) = cache.lock().unwrap().get(&key) {
        return z;
    }
    let z = lattice_zeta_uncached(exps, e);
    cache.lock().unwrap().insert(key, z);
    z
}

fn lattice_zeta_uncached(exps: &[u32], e: u32) -> f64 {
    let n = exps.len();
    let deg = exps.iter().sum::<u32>() as f64 - e as f64;
    let p = deg + n as f64;
    assert!(p > 0.0, "lattice zeta needs a locally integrable function");
    let rc = ZETA_RADIUS[n.min(3)];
    let span = rc.ceil() as i64;
    let side = (2 * span + 1) as usize;
    let total = side.pow(n as u32);
    let sum: f64 = (0..total)
        .into_par_iter()
        .map(|mut t| {
            let mut y = vec![0.0; n];
            for a in (0..n).rev() {
                y[a] = (t % side) as f64 - span as f64;
                t /= side;
            }
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 || r >= rc {
                return 0.0;
            }
            monomial(&y, exps) / r.powi(e as i32) * cutoff(r / rc)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let angular = monomial_sphere_integral(exps).to_f64();
    if angular == 0.0 {
        return sum;
    }
    let gl = gauss_legendre(160);
    let radial = ZETA_PLATEAU.powf(p) / p + gl.integrate(ZETA_PLATEAU, 1.0, |r| r.powf(p - 1.0) * cutoff(r));
    sum - angular * rc.powf(p) * radial
}

fn counts(n: usize, idx: &[usize]) -> Vec<u32> {
    let mut c = vec![0u32; n];
    for &i in idx {
        c[i] += 1;
    }
    c
}

/// Trapezoidal weights with local corrections for `K(y) = y^{exps}/|y|^e`
/// on the padded periodic grid of side `2N` and spacing `h`.
pub fn kernel_weights(exps: &[u32], e: u32, size: usize, h: f64) -> Vec<f64> {
    let n = exps.len();
    let padded = 2 * size;
    let total = padded.pow(n as u32);
    let offset_of = |d: &[i64]| -> usize {
        d.iter().fold(0usize, |acc, &v| acc * padded + v.rem_euclid(padded as i64) as usize)
    };
    let hn = h.powi(n as i32);
    let mut w: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut t| {
            let mut y = vec![0.0; n];
            for a in (0..n).rev() {
                let i = (t % padded) as i64;
                y[a] = if i < size as i64 { i as f64 } else { (i - padded as i64) as f64 } * h;
                t /= padded;
            }
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                0.0
            } else {
                hn * monomial(&y, exps) / r.powi(e as i32)
            }
        })
        .collect();
    let alpha = exps.iter().sum::<u32>() as i32 - e as i32;
    let parity = exps.iter().sum::<u32>() % 2;
    let unit = |i: usize, s: i64| -> Vec<i64> {
        let mut d = vec![0i64; n];
        d[i] = s;
        d
    };
    // |β| = 0
    if parity == 0 {
        let c = -h.powi(n as i32 + alpha) * lattice_zeta(exps, e);
        w[offset_of(&vec![0; n])] += c;
    }
    // |β| = 1: ∂_i g(0) ≈ (g(e_i) − g(−e_i)) / 2h
    if parity == 1 {
        for i in 0..n {
            let mut ex = exps.to_vec();
            ex[i] += 1;
            let c = -h.powi(n as i32 + alpha + 1) * lattice_zeta(&ex, e) / (2.0 * h);
            w[offset_of(&unit(i, 1))] += c;
            w[offset_of(&unit(i, -1))] -= c;
        }
    }
    // |β| = 2
    if parity == 0 {
        let scale = -h.powi(n as i32 + alpha + 2);
        for i in 0..n {
            let mut ex = exps.to_vec();
            ex[i] += 2;
            let c = scale * lattice_zeta(&ex, e) / 2.0 / (h * h);
            w[offset_of(&unit(i, 1))] += c;
            w[offset_of(&unit(i, -1))] += c;
            w[offset_of(&vec![0; n])] -= 2.0 * c;
            for j in i + 1..n {
                let mut ex = exps.to_vec();
                ex[i] += 1;
                ex[j] += 1;
                let c = scale * lattice_zeta(&ex, e) / (4.0 * h * h);
                for (si, sj, sg) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                    let mut d = vec![0i64; n];
                    d[i] = si;
                    d[j] = sj;
                    w[offset_of(&d)] += sg * c;
                }
            }
        }
    }
    w
}

/// Transformed kernels for one `(n, m, k, N, L)`; reusable across fields.
pub struct ConvolutionPlan {
    n: usize,
    m: usize,
    k: usize,
    size: usize,
    length: f64,
    /// Per `l`: kernel transforms indexed by canonical position at rank `2m+2k−l`.
    kernels: Vec<Vec<Vec<Complex64>>>,
}

impl ConvolutionPlan {
    pub fn new(n: usize, m: usize, k: usize, size: usize, length: f64) -> Result<Self, NormalError> {
        GridTensorField::zeros(n, m, size, length)?;
        if size < 16 {
            return Err(NormalError::Grid(format!("grid of size {size} is too coarse to resolve the kernel near the origin")));
        }
        let h = length / size as f64;
        let padded = 2 * size;
        let mut kernels = Vec::with_capacity(k + 1);
        for l in 0..=k {
            let rank = 2 * m + 2 * k - l;
            let e = (2 * m + 2 * k - 2 * l + n - 1) as u32;
            let space = index_space(n, rank);
            let comps: Vec<Vec<Complex64>> = space
                .indices()
                .map(|idx| {
                    let w = kernel_weights(&counts(n, idx), e, size, h);
                    let mut c: Vec<Complex64> = w.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
                    fft_nd(&mut c, n, padded, false);
                    c
                })
                .collect();
            kernels.push(comps);
        }
        Ok(ConvolutionPlan { n, m, k, size, length, kernels })
    }

    pub fn apply(&self, f: &GridTensorField) -> Result<GridTensorField, NormalError> {
        if f.n() != self.n || f.rank() != self.m || f.size() != self.size || f.length() != self.length {
            return Err(NormalError::Grid("field does not match the convolution plan".into()));
        }
        let (n, m, k, size) = (self.n, self.m, self.k, self.size);
        let padded = 2 * size;
        let fspace = index_space(n, m);
        let transformed: Vec<Vec<Complex64>> = (0..fspace.len())
            .map(|p| {
                let mut buf = vec![Complex64::new(0.0, 0.0); padded.pow(n as u32)];
                for j in 0..f.nodes() {
                    buf[pad_offset(j, n, size)] = Complex64::new(f.component(p)[j], 0.0);
                }
                fft_nd(&mut buf, n, padded, false);
                buf
            })
            .collect();
        let mut out = GridTensorField::zeros(n, m, size, self.length)?;
        for l in 0..=k {
            let q = 2 * k - l;
            let krank = 2 * m + 2 * k - l;
            let kspace = index_space(n, krank);
            let cspace = index_space(n, q + m);
            // C_Q = Σ_J mult_J f_J ∗ K_{Q ∪ J} over canonical Q of rank q + m.
            let cgrid: Vec<Vec<f64>> = cspace
                .indices()
                .collect::<Vec<_>>()
                .par_iter()
                .map(|qidx| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); padded.pow(n as u32)];
                    for (jp, jidx) in fspace.indices().enumerate() {
                        let mut full = qidx.to_vec();
                        full.extend_from_slice(jidx);
                        full.sort_unstable();
                        let kern = &self.kernels[l][kspace.position(&full)];
                        let mult = fspace.multiplicity(jp) as f64;
                        for ((a, fv), kv) in acc.iter_mut().zip(&transformed[jp]).zip(kern) {
                            *a += mult * fv * kv;
                        }
                    }
                    fft_nd(&mut acc, n, padded, true);
                    (0..size.pow(n as u32)).map(|j| acc[pad_offset(j, n, size)].re).collect()
                })
                .collect();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let coef = 2.0 * binomial(k as u64, l as u64) as f64 * sign;
            let vals: Vec<SymTensor<f64>> = (0..f.nodes())
                .into_par_iter()
                .map(|j| {
                    let c = SymTensor::from_vec(n, q + m, cgrid.iter().map(|g| g[j]).collect());
                    let x = out.coords(j);
                    let xq = SymTensor::outer_power(&x, q);
                    j_contract::<f64, f64>(&xq, &c).expect("ranks match by construction")
                })
                .collect();
            for (j, t) in vals.into_iter().enumerate() {
                for (p, v) in t.entries().iter().enumerate() {
                    out.component_mut(p)[j] += coef * v;
                }
            }
        }
        Ok(out)
    }
}

/// Flat node `j` of the `size^n` grid inside the `(2 size)^n` padded grid.
fn pad_offset(mut j: usize, n: usize, size: usize) -> usize {
    let mut off = 0;
    let mut stride = 1;
    for _ in 0..n {
        off += (j % size) * stride;
        j /= size;
        stride *= 2 * size;
    }
    off
}

/// `N_m^k f` on the grid of `f`.
pub fn normal_convolution(f: &GridTensorField, k: usize) -> Result<GridTensorField, NormalError> {
    ConvolutionPlan::new(f.n(), f.rank(), k, f.size(), f.length())?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_of_inverse_distance_in_the_plane() {
        // Σ' 1/|j| over ℤ² continues to 4 ζ(1/2) β(1/2).
        let z = lattice_zeta(&[0, 0], 1);
        assert!((z + 3.900264920001956).abs() < 1e-10, "{z}");
    }

    #[test]
    fn zeta_of_odd_function_vanishes() {
        assert!(lattice_zeta(&[1, 2], 3).abs() < 1e-12);
    }

    #[test]
    fn pad_offsets() {
        assert_eq!(pad_offset(0, 2, 4), 0);
        assert_eq!(pad_offset(5, 2, 4), 9);
    }

    #[test]
    fn agrees_with_angular_quadrature() {
        use crate::normalops::normal_momentum_compiled;
        use crate::polyfield::{random_field, Support};
        use crate::rng::Sampler;
        use crate::scalar::int;
        use crate::spherequad::build_rule;
        let f = random_field(&mut Sampler::new(11, 0), 2, 1, 2, Support::ball(int(1)), 6).compile();
        let g = GridTensorField::sample(&f, 32, 4.0).unwrap();
        let rule = build_rule(2, 120).unwrap();
        for k in 0..=1 {
            let conv = normal_convolution(&g, k).unwrap();
            let mut diff = 0.0;
            let mut norm = 0.0;
            for j in (0..g.nodes()).step_by(7) {
                let a = normal_momentum_compiled(&f, &g.coords(j), k as u32, &rule).unwrap();
                let c = conv.value(j);
                diff += a.sub::<f64>(&c).max_abs().powi(2);
                norm += a.max_abs().powi(2);
            }
            assert!((diff / norm).sqrt() < 5e-3, "k = {k}: {}", (diff / norm).sqrt());
        }
    }
}
