//! Solenoidal–potential decomposition `f = ŝf + dv`, `δ ŝf = 0`, frequency by
//! frequency on a periodic grid, and the spectral form of
//! `Δ^m ŝf = 2^m δ_e^m R f`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{fft_nd, wavenumbers, GridTensorField};
use super::NormalError;
use crate::linalg;
use crate::symtensor::{dense_tuple, index_space, sym_product, DenseTensor, SymTensor};

/// The map `i_y : S^{m−1} → S^m` at one frequency, as a matrix in
/// canonical bases (rows indexed by `S^m`).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySymbol {
    pub y: Vec<f64>,
    pub m: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl FrequencySymbol {
    pub fn new(y: &[f64], m: usize) -> Self {
        assert!(m >= 1, "i_y needs m >= 1");
        let n = y.len();
        let src = index_space(n, m - 1);
        let dst = index_space(n, m);
        let yv = SymTensor::vector(y);
        let mut matrix = vec![vec![0.0; src.len()]; dst.len()];
        for b in 0..src.len() {
            let mut e = vec![0.0; src.len()];
            e[b] = 1.0;
            let col = sym_product::<f64, f64>(&yv, &SymTensor::from_vec(n, m - 1, e)).expect("same dimension");
            for (a, v) in col.entries().iter().enumerate() {
                matrix[a][b] = *v;
            }
        }
        FrequencySymbol { y: y.to_vec(), m, matrix }
    }

    /// `(i_y)* i_y` with the full tensor inner product on `S^m`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.y.len();
        let dst = index_space(n, self.m);
        let cols = self.matrix[0].len();
        (0..cols)
            .map(|a| {
                (0..cols)
                    .map(|b| {
                        (0..dst.len())
                            .map(|r| dst.multiplicity(r) as f64 * self.matrix[r][a] * self.matrix[r][b])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `(i_y)* g`.
    pub fn adjoint_apply(&self, g: &[f64]) -> Vec<f64> {
        let dst = index_space(self.y.len(), self.m);
        let cols = self.matrix[0].len();
        (0..cols)
            .map(|b| (0..dst.len()).map(|r| dst.multiplicity(r) as f64 * self.matrix[r][b] * g[r]).sum())
            .collect()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub solenoidal: GridTensorField,
    pub potential: GridTensorField,
}

pub(crate) fn forward(g: &GridTensorField) -> Vec<Vec<Complex64>> {
    g.components()
        .par_iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft_nd(&mut buf, g.n(), g.size(), false);
            buf
        })
        .collect()
}

pub(crate) fn inverse(
    spec: Vec<Vec<Complex64>>,
    n: usize,
    m: usize,
    size: usize,
    length: f64,
) -> Result<GridTensorField, NormalError> {
    let comps = spec
        .into_par_iter()
        .map(|mut buf| {
            fft_nd(&mut buf, n, size, true);
            buf.into_iter().map(|v| v.re).collect()
        })
        .collect();
    GridTensorField::from_components(n, m, size, length, comps)
}

/// Frequency vector of flat node `j` (Nyquist entries zeroed).
fn frequency(ks: &[f64], n: usize, size: usize, mut j: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for a in (0..n).rev() {
        y[a] = ks[j % size];
        j /= size;
    }
    y
}

/// Per frequency `y ≠ 0`: `ŵ = ((i_y)* i_y)^{−1} (i_y)* f̂`, `ŝf = f̂ − i_y ŵ`,
/// `v̂ = −i ŵ` (so that `(dv)^ = i·i_y v̂`). The zero frequency goes to `ŝf`.
pub fn solenoidal_decompose(f: &GridTensorField) -> Result<Decomposition, NormalError> {
    let (n, m, size) = (f.n(), f.rank(), f.size());
    if m == 0 {
        return Err(NormalError::Grid("decomposition needs rank m >= 1".into()));
    }
    let ks = wavenumbers(size, f.length());
    let fh = forward(f);
    let dim = fh.len();
    let vdim = index_space(n, m - 1).len();
    let nodes = f.nodes();
    let per: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let y = frequency(&ks, n, size, j);
            let fv: Vec<Complex64> = fh.iter().map(|c| c[j]).collect();
            if y.iter().all(|&v| v == 0.0) {
                return Ok((fv, vec![Complex64::new(0.0, 0.0); vdim]));
            }
            let sym = FrequencySymbol::new(&y, m);
            let gram = sym.gram();
            let re: Vec<f64> = fv.iter().map(|c| c.re).collect();
            let im: Vec<f64> = fv.iter().map(|c| c.im).collect();
            let wr = linalg::solve(&gram, &sym.adjoint_apply(&re)).ok_or_else(|| NormalError::Singular(vec![j as i64]))?;
            let wi = linalg::solve(&gram, &sym.adjoint_apply(&im)).ok_or_else(|| NormalError::Singular(vec![j as i64]))?;
            let (pr, pi) = (sym.apply(&wr), sym.apply(&wi));
            let s: Vec<Complex64> = (0..dim).map(|p| fv[p] - Complex64::new(pr[p], pi[p])).collect();
            let v: Vec<Complex64> = wr.iter().zip(&wi).map(|(a, b)| Complex64::new(*b, -*a)).collect();
            Ok((s, v))
        })
        .collect::<Result<_, NormalError>>()?;
    let mut sh = vec![vec![Complex64::new(0.0, 0.0); nodes]; dim];
    let mut vh = vec![vec![Complex64::new(0.0, 0.0); nodes]; vdim];
    for (j, (s, v)) in per.into_iter().enumerate() {
        for p in 0..dim {
            sh[p][j] = s[p];
        }
        for p in 0..vdim {
            vh[p][j] = v[p];
        }
    }
    Ok(Decomposition {
        solenoidal: inverse(sh, n, m, size, f.length())?,
        potential: inverse(vh, n, m - 1, size, f.length())?,
    })
}

/// Spectral divergence `δg`, `(δg)^ = i j_y ĝ`.
pub fn spectral_divergence(g: &GridTensorField) -> Result<GridTensorField, NormalError> {
    let (n, m, size) = (g.n(), g.rank(), g.size());
    if m == 0 {
        return Err(NormalError::Grid("divergence needs rank m >= 1".into()));
    }
    let ks = wavenumbers(size, g.length());
    let gh = forward(g);
    let out_space = index_space(n, m - 1);
    let in_space = index_space(n, m);
    let mut oh = vec![vec![Complex64::new(0.0, 0.0); g.nodes()]; out_space.len()];
    for j in 0..g.nodes() {
        let y = frequency(&ks, n, size, j);
        for (p, idx) in out_space.indices().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, ya) in y.iter().enumerate() {
                let mut full = idx.to_vec();
                full.push(a);
                full.sort_unstable();
                acc += ya * gh[in_space.position(&full)][j];
            }
            oh[p][j] = Complex64::new(0.0, 1.0) * acc;
        }
    }
    inverse(oh, n, m - 1, size, g.length())
}

/// Spectral symmetric derivative `dv`, `(dv)^ = i·i_y v̂`.
pub fn spectral_symmetric_derivative(v: &GridTensorField) -> Result<GridTensorField, NormalError> {
    let (n, m, size) = (v.n(), v.rank(), v.size());
    let ks = wavenumbers(size, v.length());
    let vh = forward(v);
    let out_dim = index_space(n, m + 1).len();
    let mut oh = vec![vec![Complex64::new(0.0, 0.0); v.nodes()]; out_dim];
    for j in 0..v.nodes() {
        let y = frequency(&ks, n, size, j);
        let sym = FrequencySymbol::new(&y, m + 1);
        let re: Vec<f64> = vh.iter().map(|c| c[j].re).collect();
        let im: Vec<f64> = vh.iter().map(|c| c[j].im).collect();
        let (ar, ai) = (sym.apply(&re), sym.apply(&im));
        for p in 0..out_dim {
            oh[p][j] = Complex64::new(0.0, 1.0) * Complex64::new(ar[p], ai[p]);
        }
    }
    inverse(oh, n, m + 1, size, v.length())
}

/// `Δ^m(ŝf) − 2^m δ_e^m R f`, all spectral; `δ_e` contracts one derivative
/// against the second slot of each alternated pair of `Rf`.
/// Returns `(residual, Δ^m ŝf)`.
pub fn verify_smoothness(f: &GridTensorField) -> Result<(GridTensorField, GridTensorField), NormalError> {
    let (n, m, size) = (f.n(), f.rank(), f.size());
    let dec = solenoidal_decompose(f)?;
    let ks = wavenumbers(size, f.length());
    let fh = forward(f);
    let sh = forward(&dec.solenoidal);
    let space = index_space(n, m);
    let nodes = f.nodes();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let two_m = 2f64.powi(m as i32);
    let per: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let y = frequency(&ks, n, size, j);
            let y2: f64 = y.iter().map(|v| v * v).sum();
            let lap = (-y2).powi(m as i32);
            let lhs: Vec<Complex64> = sh.iter().map(|c| lap * c[j]).collect();
            let part = |take: fn(&Complex64) -> f64| -> Vec<f64> {
                let fv: Vec<f64> = fh.iter().map(|c| take(&c[j])).collect();
                delta_e_r(&y, m, &fv)
            };
            let (re, im) = (part(|c| c.re), part(|c| c.im));
            let rhs: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| sign * two_m * Complex64::new(*a, *b)).collect();
            (lhs, rhs)
        })
        .collect();
    let mut lh = vec![vec![Complex64::new(0.0, 0.0); nodes]; space.len()];
    let mut rh = lh.clone();
    for (j, (l, r)) in per.into_iter().enumerate() {
        for p in 0..space.len() {
            lh[p][j] = l[p];
            rh[p][j] = l[p] - r[p];
        }
    }
    Ok((inverse(rh, n, m, size, f.length())?, inverse(lh, n, m, size, f.length())?))
}

/// `Σ_{j} y_{j_1}…y_{j_m} [α…α (y_{j_1}…y_{j_m} f_{i_1…i_m})]_{i_1 j_1 … i_m j_m}` at
/// canonical `i`, for real symbol values; the `i^{2m}` factor is applied by the caller.
fn delta_e_r(y: &[f64], m: usize, f: &[f64]) -> Vec<f64> {
    let n = y.len();
    let space = index_space(n, m);
    let fs = SymTensor::from_vec(n, m, f.to_vec());
    let mut tuple = vec![0usize; 2 * m];
    let len = n.pow(2 * m as u32);
    let mut vals = Vec::with_capacity(len);
    for off in 0..len {
        dense_tuple(n, off, &mut tuple);
        let mut i: Vec<usize> = (0..m).map(|a| tuple[2 * a]).collect();
        let c: f64 = (0..m).map(|a| y[tuple[2 * a + 1]]).product();
        i.sort_unstable();
        vals.push(c * fs.get(&i));
    }
    let mut t = DenseTensor::from_vec(n, 2 * m, vals);
    for a in 0..m {
        t = t.alternate::<f64>(2 * a, 2 * a + 1).expect("slots in range");
    }
    space
        .indices()
        .map(|idx| {
            let mut acc = 0.0;
            for joff in 0..n.pow(m as u32) {
                let mut js = vec![0usize; m];
                dense_tuple(n, joff, &mut js);
                let mut full = vec![0usize; 2 * m];
                for a in 0..m {
                    full[2 * a] = idx[a];
                    full[2 * a + 1] = js[a];
                }
                acc += js.iter().map(|&v| y[v]).product::<f64>() * t.get(&full);
            }
            acc
        })
        .collect()
}
