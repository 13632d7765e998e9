//! Seeded sampling of integers, reals, polynomials and fields.
//!
//! The generator is PCG32 (XSH-RR output over a 64-bit LCG state) as
//! implemented by `rand_pcg::Pcg32`. A [`Sampler`] is addressed by
//! `(seed, stream)`; independent components draw from distinct streams so
//! that adding a component never shifts the values of another.
//!
//! Derived draws, stable across releases:
//! * `u64`: two consecutive 32-bit outputs, high word first (`next_u64`).
//! * integer in `[lo, hi]`: `lo + next_u64() % (hi - lo + 1)`.
//! * `f64` in `[0, 1)`: `(next_u64() >> 11) * 2^-53`.

use rand_core::Rng;
use rand_pcg::Pcg32;

use crate::poly::Polynomial;
use crate::scalar::{int, Rational};

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Pcg32,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Sampler { rng: Pcg32::new(seed, stream) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in the closed range `[lo, hi]`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi as i128 - lo as i128 + 1) as u128;
        (lo as i128 + (self.next_u64() as u128 % span) as i128) as i64
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit_f64();
        let u2 = self.unit_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform point on `S^{n-1}`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.normal()).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-8 {
                return v.into_iter().map(|a| a / norm).collect();
            }
        }
    }

    /// Uniform point in the ball of radius `r`.
    pub fn in_ball(&mut self, n: usize, r: f64) -> Vec<f64> {
        let dir = self.unit_vector(n);
        let rad = r * self.unit_f64().powf(1.0 / n as f64);
        dir.into_iter().map(|a| a * rad).collect()
    }

    /// Dense random polynomial of total degree `<= degree`, integer
    /// coefficients in `[-bound, bound]`, each monomial kept with
    /// probability one half.
    pub fn polynomial(&mut self, nvars: usize, degree: u32, bound: i64) -> Polynomial<Rational> {
        let mut p = Polynomial::zero(nvars);
        for e in exponents_up_to(nvars, degree) {
            if self.next_u64() & 1 == 0 {
                continue;
            }
            p.add_term(e, int(self.int_in(-bound, bound)));
        }
        if p.is_zero() {
            p.add_term(vec![0; nvars], int(1));
        }
        p
    }
}

/// All exponent vectors of total degree `<= degree`, graded then lexicographic.
pub fn exponents_up_to(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(v: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if v == cur.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in (0..=left).rev() {
            cur[v] = e;
            rec(v + 1, left - e, cur, out);
        }
        cur[v] = 0;
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        rec(0, d, &mut vec![0; nvars], &mut out);
    }
    out
}
