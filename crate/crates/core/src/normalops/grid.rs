//! Tensor fields sampled on uniform periodic grids.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::NormalError;
use crate::polyfield::CompiledField;
use crate::symtensor::{index_space, IndexSpace, SymTensor};

/// Samples of a rank-`m` symmetric tensor field on the grid
/// `x_j = −L/2 + j L/N`, `j ∈ {0, …, N−1}^n`, stored component-major with
/// nodes in row-major order (last axis fastest). Fourier operations treat
/// the box as periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTensorField {
    n: usize,
    m: usize,
    size: usize,
    length: f64,
    comps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl GridTensorField {
    pub fn zeros(n: usize, m: usize, size: usize, length: f64) -> Result<Self, NormalError> {
        if !(2..=3).contains(&n) {
            return Err(NormalError::Grid(format!("grids support n = 2 or 3, got {n}")));
        }
        if size < 4 || size % 2 != 0 {
            return Err(NormalError::Grid(format!("grid size must be even and >= 4, got {size}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(NormalError::Grid(format!("box length must be positive, got {length}")));
        }
        let nodes = size.pow(n as u32);
        let dim = index_space(n, m).len();
        Ok(GridTensorField { n, m, size, length, comps: vec![vec![0.0; nodes]; dim] })
    }

    pub fn from_components(
        n: usize,
        m: usize,
        size: usize,
        length: f64,
        comps: Vec<Vec<f64>>,
    ) -> Result<Self, NormalError> {
        let mut g = Self::zeros(n, m, size, length)?;
        if comps.len() != g.comps.len() || comps.iter().any(|c| c.len() != g.nodes()) {
            return Err(NormalError::Grid("component array shape does not match the grid".into()));
        }
        g.comps = comps;
        Ok(g)
    }

    /// Samples a compiled field at every node.
    pub fn sample(f: &CompiledField, size: usize, length: f64) -> Result<Self, NormalError> {
        let mut g = Self::zeros(f.n(), f.rank(), size, length)?;
        let vals: Vec<SymTensor<f64>> = (0..g.nodes()).into_par_iter().map(|j| f.eval(&g.coords(j))).collect();
        for (j, t) in vals.into_iter().enumerate() {
            for (p, v) in t.entries().iter().enumerate() {
                g.comps[p][j] = *v;
            }
        }
        Ok(g)
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(
        n: usize,
        m: usize,
        size: usize,
        length: f64,
        f: impl Fn(&[f64]) -> SymTensor<f64> + Sync,
    ) -> Result<Self, NormalError> {
        let mut g = Self::zeros(n, m, size, length)?;
        let vals: Vec<SymTensor<f64>> = (0..g.nodes()).into_par_iter().map(|j| f(&g.coords(j))).collect();
        for (j, t) in vals.into_iter().enumerate() {
            if t.n() != n || t.rank() != m {
                return Err(NormalError::Grid("sample tensor shape does not match the grid".into()));
            }
            for (p, v) in t.entries().iter().enumerate() {
                g.comps[p][j] = *v;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.size as f64
    }

    pub fn nodes(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn space(&self) -> std::sync::Arc<IndexSpace> {
        index_space(self.n, self.m)
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn component(&self, p: usize) -> &[f64] {
        &self.comps[p]
    }

    pub fn component_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.comps[p]
    }

    /// Grid multi-index of a flat node number.
    pub fn node_index(&self, mut j: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for a in (0..self.n).rev() {
            idx[a] = j % self.size;
            j /= self.size;
        }
        idx
    }

    pub fn coords(&self, j: usize) -> Vec<f64> {
        let h = self.spacing();
        self.node_index(j).into_iter().map(|i| -0.5 * self.length + i as f64 * h).collect()
    }

    pub fn value(&self, j: usize) -> SymTensor<f64> {
        SymTensor::from_vec(self.n, self.m, self.comps.iter().map(|c| c[j]).collect())
    }

    fn same_shape(&self, other: &Self) -> Result<(), NormalError> {
        if self.n != other.n || self.m != other.m || self.size != other.size || self.length != other.length {
            return Err(NormalError::Grid("grid fields have different shapes".into()));
        }
        Ok(())
    }

    pub fn combine(&self, other: &Self, c: f64) -> Result<Self, NormalError> {
        self.same_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + c * v).collect())
            .collect();
        Ok(GridTensorField { comps, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NormalError> {
        self.combine(other, -1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, NormalError> {
        self.combine(other, 1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let comps = self.comps.iter().map(|a| a.iter().map(|v| c * v).collect()).collect();
        GridTensorField { comps, ..self.clone() }
    }

    /// Discrete `L²` norm `(h^n Σ_j |f(x_j)|²)^{1/2}` with the full tensor norm.
    pub fn l2_norm(&self) -> f64 {
        let space = self.space();
        let h = self.spacing().powi(self.n as i32);
        let s: f64 = self
            .comps
            .iter()
            .enumerate()
            .map(|(p, c)| space.multiplicity(p) as f64 * c.iter().map(|v| v * v).sum::<f64>())
            .sum();
        (h * s).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn header(&self) -> GridHeader {
        GridHeader { n: self.n, m: self.m, size: self.size, length: self.length }
    }

    /// Writes the JSON header and the CSV body: grid indices `j_1…j_n`,
    /// then one column per canonical component.
    pub fn write(&self, header: impl Write, body: impl Write) -> Result<(), NormalError> {
        serde_json::to_writer_pretty(header, &self.header()).map_err(|e| NormalError::Grid(e.to_string()))?;
        let mut w = csv::Writer::from_writer(body);
        let io = |e: csv::Error| NormalError::Grid(e.to_string());
        let mut names: Vec<String> = (1..=self.n).map(|a| format!("j_{a}")).collect();
        for idx in self.space().indices() {
            names.push(format!("f_{}", idx.iter().map(|i| i.to_string()).collect::<String>()));
        }
        w.write_record(&names).map_err(io)?;
        for j in 0..self.nodes() {
            let mut rec: Vec<String> = self.node_index(j).iter().map(|i| i.to_string()).collect();
            rec.extend(self.comps.iter().map(|c| format!("{:e}", c[j])));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| NormalError::Grid(e.to_string()))
    }

    pub fn read(header: impl Read, body: impl BufRead) -> Result<Self, NormalError> {
        let h: GridHeader = serde_json::from_reader(header).map_err(|e| NormalError::Grid(e.to_string()))?;
        let mut g = Self::zeros(h.n, h.m, h.size, h.length)?;
        let dim = g.comps.len();
        let mut r = csv::Reader::from_reader(body);
        let mut seen = 0usize;
        for rec in r.records() {
            let rec = rec.map_err(|e| NormalError::Grid(e.to_string()))?;
            if rec.len() != h.n + dim {
                return Err(NormalError::Grid(format!("row {} has {} fields, expected {}", seen + 1, rec.len(), h.n + dim)));
            }
            let parse_err = |s: &str| NormalError::Grid(format!("row {}: cannot parse {s:?}", seen + 1));
            let mut j = 0usize;
            for a in 0..h.n {
                let i: usize = rec[a].trim().parse().map_err(|_| parse_err(&rec[a]))?;
                if i >= h.size {
                    return Err(NormalError::Grid(format!("row {}: grid index {i} out of range", seen + 1)));
                }
                j = j * h.size + i;
            }
            for p in 0..dim {
                g.comps[p][j] = rec[h.n + p].trim().parse().map_err(|_| parse_err(&rec[h.n + p]))?;
            }
            seen += 1;
        }
        if seen != g.nodes() {
            return Err(NormalError::Grid(format!("expected {} rows, found {seen}", g.nodes())));
        }
        Ok(g)
    }
}

/// In-place `n`-dimensional DFT over a cube of side `size`, row-major.
/// The inverse is normalized by `size^{-n}`.
pub fn fft_nd(data: &mut [Complex64], n: usize, size: usize, inverse: bool) {
    assert_eq!(data.len(), size.pow(n as u32), "buffer does not match the grid");
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(size) } else { planner.plan_fft_forward(size) };
    for axis in 0..n {
        let stride = size.pow((n - 1 - axis) as u32);
        let block = stride * size;
        // Gather lines along `axis`, transform, scatter back.
        let lines: Vec<(usize, usize)> = (0..data.len() / block)
            .flat_map(|b| (0..stride).map(move |s| (b * block, s)))
            .collect();
        let mut buf: Vec<Vec<Complex64>> = lines
            .iter()
            .map(|&(base, s)| (0..size).map(|t| data[base + s + t * stride]).collect())
            .collect();
        buf.par_iter_mut().for_each(|line| fft.process(line));
        for (&(base, s), line) in lines.iter().zip(&buf) {
            for t in 0..size {
                data[base + s + t * stride] = line[t];
            }
        }
    }
    if inverse {
        let c = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= c);
    }
}

/// Angular wavenumbers `2π k / L` per axis in FFT order, with the Nyquist
/// entry set to zero so that odd-order spectral derivatives stay real.
pub(crate) fn wavenumbers(size: usize, length: f64) -> Vec<f64> {
    (0..size)
        .map(|j| {
            let k = if j < size / 2 {
                j as f64
            } else if j == size / 2 {
                0.0
            } else {
                j as f64 - size as f64
            };
            std::f64::consts::TAU * k / length
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip_and_single_mode() {
        let (n, size) = (2, 8);
        let mut data: Vec<Complex64> = (0..64).map(|j| Complex64::new((j as f64).sin(), 0.0)).collect();
        let orig = data.clone();
        fft_nd(&mut data, n, size, false);
        fft_nd(&mut data, n, size, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
        // cos(2π x_1 / L) has energy only at (±1, 0).
        let g = GridTensorField::from_fn(2, 0, size, 1.0, |x| SymTensor::scalar(2, (std::f64::consts::TAU * x[0]).cos()))
            .unwrap();
        let mut d: Vec<Complex64> = g.component(0).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut d, n, size, false);
        for (j, v) in d.iter().enumerate() {
            let expect = if j == size || j == (size - 1) * size { 32.0 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-10, "{j}: {v}");
        }
    }

    #[test]
    fn io_round_trip() {
        let g = GridTensorField::from_fn(2, 1, 4, 2.0, |x| SymTensor::vector(&[x[0], x[0] * x[1] + 0.1])).unwrap();
        let (mut h, mut b) = (Vec::new(), Vec::new());
        g.write(&mut h, &mut b).unwrap();
        let text = String::from_utf8(h.clone()).unwrap();
        assert!(text.contains("\"N\": 4") && text.contains("\"L\": 2.0"));
        let back = GridTensorField::read(&h[..], &b[..]).unwrap();
        assert_eq!(back, g);
        assert!(GridTensorField::read(&h[..], &b[..b.len() - 10]).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridTensorField::zeros(4, 1, 8, 1.0).is_err());
        assert!(GridTensorField::zeros(2, 1, 7, 1.0).is_err());
        assert!(GridTensorField::zeros(2, 1, 8, 0.0).is_err());
    }
}
