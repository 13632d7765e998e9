//! Numerical checks of the identities linking `N_0 R^k f` with derivatives
//! of `δ^p N^p f`.

use std::collections::HashMap;

use super::angular::{divergence_normal_compiled, normal_momentum_compiled, power_derivative, AngularIntegrals};
use super::NormalError;
use crate::scalar::{binomial, factorial, rational_to_f64};
use crate::spherequad::{c_constant, SphereRule};
use crate::symtensor::{dense_tuple, ij_power, index_space, j_contract, DenseTensor, SymTensor};
use crate::xray::{binomial_multi, pair_components, sub_multi_indices, FieldDerivatives};

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResidual {
    pub index: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl ComponentResidual {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn max_residual(rs: &[ComponentResidual]) -> f64 {
    rs.iter().map(|r| r.residual()).fold(0.0, f64::max)
}

fn orders(n: usize, vars: &[usize]) -> Vec<u32> {
    let mut o = vec![0u32; n];
    for &v in vars {
        o[v] += 1;
    }
    o
}

/// `∂^γ G_{m−r}` with `G_{m−r} = Σ_l c_{l,m−r} i^l j^l H_r` and
/// `H_r = Σ_p (−1)^{r−p} (1/p!) C(r,p) j_{x^{⊙(r−p)}} δ^p N^p f`.
fn g_derivative(eng: &mut AngularIntegrals, r: u32, gamma: &[u32]) -> Result<SymTensor<f64>, NormalError> {
    let n = eng.field().n();
    let m = eng.field().rank();
    let x = eng.x().to_vec();
    let b = m - r as usize;
    let mut h = SymTensor::<f64>::zeros(n, b);
    for p in 0..=r {
        let sign = if (r - p) % 2 == 0 { 1.0 } else { -1.0 };
        let coef = sign * binomial(r as u64, p as u64) as f64 / factorial(p as u64) as f64;
        for g1 in sub_multi_indices(gamma) {
            let d: u32 = g1.iter().sum();
            if d > r - p {
                continue;
            }
            let rest: Vec<u32> = gamma.iter().zip(&g1).map(|(u, v)| u - v).collect();
            let xd = power_derivative(&x, (r - p) as usize, &g1);
            let dn = eng.divergence_normal_derivative(p, &rest)?;
            let term = j_contract::<f64, f64>(&xd, &dn)?;
            h = h.add::<f64>(&term.scale::<f64>(&(coef * binomial_multi(gamma, &g1))));
        }
    }
    let mut g = SymTensor::<f64>::zeros(n, b);
    for l in 0..=(b / 2) {
        let c = rational_to_f64(&c_constant(l as u32, b as u32, n as u32)?);
        g = g.add::<f64>(&ij_power::<f64, f64>(&h, l).scale::<f64>(&c));
    }
    Ok(g)
}

/// Right-hand side of the `N_0 R^k` identity as a dense tensor in the
/// interleaved layout `(p_1 q_1 … p_M q_M i_1 … i_k)`:
/// `σ(i) Σ_r (−1)^r C(k,r) α(p_1q_1)…α(p_Mq_M) ∂_{i_1…i_r} ∂_{q_1…q_M} (G_{m−r})_{p_1…p_M i_{r+1}…i_k}`.
fn prop_rhs(eng: &mut AngularIntegrals, k: usize) -> Result<DenseTensor<f64>, NormalError> {
    let n = eng.field().n();
    let m = eng.field().rank();
    let big_m = m - k;
    let rank = 2 * big_m + k;
    let len = n.pow(rank as u32);
    let mut total = DenseTensor::from_fn(n, rank, |_| 0.0);
    let mut tuple = vec![0usize; rank];
    for r in 0..=k {
        let mut cache: HashMap<Vec<u32>, SymTensor<f64>> = HashMap::new();
        let mut vals = Vec::with_capacity(len);
        for off in 0..len {
            dense_tuple(n, off, &mut tuple);
            let mut dvars: Vec<usize> = (0..big_m).map(|a| tuple[2 * a + 1]).collect();
            dvars.extend_from_slice(&tuple[2 * big_m..2 * big_m + r]);
            let mut tidx: Vec<usize> = (0..big_m).map(|a| tuple[2 * a]).collect();
            tidx.extend_from_slice(&tuple[2 * big_m + r..]);
            let gamma = orders(n, &dvars);
            if !cache.contains_key(&gamma) {
                let g = g_derivative(eng, r as u32, &gamma)?;
                cache.insert(gamma.clone(), g);
            }
            tidx.sort_unstable();
            vals.push(*cache[&gamma].get(&tidx));
        }
        let mut t = DenseTensor::from_vec(n, rank, vals);
        for a in 0..big_m {
            t = t.alternate::<f64>(2 * a, 2 * a + 1)?;
        }
        if k >= 2 {
            t = t.partial_symmetrize::<f64>(&(2 * big_m..rank).collect::<Vec<_>>())?;
        }
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        total = total.add::<f64>(&t.scale::<f64>(&(sign * binomial(k as u64, r as u64) as f64)));
    }
    Ok(total)
}

/// `m! N_0((R^k f)_{p_1 q_1 … i_1 … i_k})(x)` against the assembled
/// right-hand side, over independent components.
pub fn verify_prop_mrt(
    fd: &FieldDerivatives,
    x: &[f64],
    k: usize,
    rule: &SphereRule,
) -> Result<Vec<ComponentResidual>, NormalError> {
    let m = fd.rank();
    if k > m {
        return Err(NormalError::KOutOfRange { k, m });
    }
    fd.field().check_budget(m as u32)?;
    let n = fd.n();
    let big_m = m - k;
    let rk = fd.field().generalized_r(k)?;
    let mut eng = AngularIntegrals::new(fd, rule, x)?;
    let rhs = prop_rhs(&mut eng, k)?;
    let mfact = factorial(m as u64) as f64;
    let block = index_space(n, k);
    let mut out = Vec::new();
    for pairs in pair_components(n, big_m) {
        for i in block.indices() {
            let mut index: Vec<usize> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
            index.extend_from_slice(i);
            let comp = rk.component_field(&index).compile();
            let lhs = mfact * normal_momentum_compiled(&comp, x, 0, rule)?.get(&[]);
            out.push(ComponentResidual { rhs: *rhs.get(&index), index, lhs });
        }
    }
    Ok(out)
}

/// `m! N_0((Rf)_{i_1 j_1 …}) = Σ_l c_{l,m} (R(i^l j^l N_m f))_{i_1 j_1 …}`.
pub fn verify_prop_ray(
    fd: &FieldDerivatives,
    x: &[f64],
    rule: &SphereRule,
) -> Result<Vec<ComponentResidual>, NormalError> {
    verify_prop_mrt(fd, x, 0, rule)
}

/// `∫_S ξ^{⊙(m−k)} J^k f(x, ξ) dS = Σ_r (−1)^{k−r} (1/r!) C(k,r) j_{x^{⊙(k−r)}} δ^r N^r f`.
pub fn verify_lemma_mrt(
    fd: &FieldDerivatives,
    x: &[f64],
    k: usize,
    rule: &SphereRule,
) -> Result<Vec<ComponentResidual>, NormalError> {
    let m = fd.rank();
    if k > m {
        return Err(NormalError::KOutOfRange { k, m });
    }
    let n = fd.n();
    let base = fd.base();
    let mut eng = AngularIntegrals::new(fd, rule, x)?;
    let lhs = eng.moment(0, m - k, k as u32, &vec![0; n])?;
    let mut rhs = SymTensor::<f64>::zeros(n, m - k);
    for r in 0..=k {
        let sign = if (k - r) % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * binomial(k as u64, r as u64) as f64 / factorial(r as u64) as f64;
        let d = divergence_normal_compiled(&base, x, r as u32, r as u32, rule)?;
        let xp = power_derivative(x, k - r, &vec![0; n]);
        rhs = rhs.add::<f64>(&j_contract::<f64, f64>(&xp, &d)?.scale::<f64>(&c));
    }
    Ok(lhs
        .space()
        .indices()
        .map(|idx| ComponentResidual { index: idx.to_vec(), lhs: *lhs.get(idx), rhs: *rhs.get(idx) })
        .collect())
}
