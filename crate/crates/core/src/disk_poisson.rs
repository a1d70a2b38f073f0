//! The equatorial Dirichlet problem `-Δ Z = rhs` in the unit disk,
//! `Z = ψ` on its rim.
//!
//! The spectral solver works mode by mode in polar form: a source term
//! `r^k trig(mθ)` has the particular solution
//! `r^{k+2} trig(mθ) / ((k+2)^2 - m^2)` (up to sign), and `r^{|m|} trig(mθ)`
//! is harmonic, which fixes the boundary values. The Green solver is direct
//! quadrature against `G_D` and the disk Poisson kernel.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{BackusError, Result};
use crate::grids::DiskField;
use crate::kernels::green_disk_apply;
use crate::poly::Poly;

/// `Σ c_{m,k} r^k trig(mθ)` with `trig = cos(mθ)` for `m >= 0` and
/// `sin(|m|θ)` for `m < 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiskPoly {
    terms: BTreeMap<(i64, u32), f64>,
}

impl DiskPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, m: i64, k: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry((m, k)).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&(m, k));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, u32), &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: i64, k: u32) -> f64 {
        self.terms.get(&(m, k)).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(|(m, _)| m.unsigned_abs() as u32).max().unwrap_or(0)
    }

    pub fn max_radial_degree(&self) -> u32 {
        self.terms.keys().map(|(_, k)| *k).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// True when every term is a polynomial in `(x_1, x_2)`.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|(m, k)| {
            let am = m.unsigned_abs() as u32;
            *k >= am && (k - am) % 2 == 0
        })
    }

    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|((m, k), c)| c * r.powi(*k as i32) * trig(*m, theta))
            .sum()
    }

    pub fn eval(&self, x: &[f64; 2]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        self.eval_polar(r, x[1].atan2(x[0]))
    }

    /// Polar Laplacian: `Δ(r^k trig(mθ)) = (k^2 - m^2) r^{k-2} trig(mθ)`.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for ((m, k), c) in &self.terms {
            let factor = (*k as f64).powi(2) - (*m as f64).powi(2);
            if factor != 0.0 {
                out.add_term(*m, k - 2, c * factor);
            }
        }
        out
    }

    /// Values on the rim as a Fourier series.
    pub fn rim_series(&self) -> FourierSeries {
        let order = self.max_order() as usize;
        let mut s = FourierSeries::zeros(order);
        for ((m, _), c) in &self.terms {
            s.add_mode(*m, *c);
        }
        s
    }

    /// Polar form of a polynomial in `(x_1, x_2)`; fails on `x_N` terms.
    pub fn from_poly(p: &Poly) -> Result<Self> {
        let mut out = Self::zero();
        for (e, c) in p.terms() {
            if e[2] != 0 {
                return Err(BackusError::InvalidParameter(
                    "disk polynomial depends on x_N".into(),
                ));
            }
            let k = e[0] + e[1];
            for (m, v) in trig_power_series(e[0], e[1]) {
                out.add_term(m, k, c * v);
            }
        }
        Ok(out.pruned(1e-15 * p.max_abs_coefficient()))
    }

    /// Cartesian form; fails unless [`DiskPoly::is_polynomial`].
    pub fn to_poly(&self) -> Result<Poly> {
        if !self.is_polynomial() {
            return Err(BackusError::InvalidParameter(
                "disk function is not a polynomial in x'".into(),
            ));
        }
        let x = Poly::var(0);
        let y = Poly::var(1);
        let r2 = &x.square() + &y.square();
        let max_m = self.max_order() as usize;
        let mut re = vec![Poly::constant(1.0)];
        let mut im = vec![Poly::zero()];
        for m in 1..=max_m {
            let c = &(&x * &re[m - 1]) - &(&y * &im[m - 1]);
            let s = &(&x * &im[m - 1]) + &(&y * &re[m - 1]);
            re.push(c);
            im.push(s);
        }
        let mut r2_pows = vec![Poly::constant(1.0)];
        let mut out = Poly::zero();
        for ((m, k), c) in &self.terms {
            let am = m.unsigned_abs() as usize;
            let j = (*k as usize - am) / 2;
            while r2_pows.len() <= j {
                let next = r2_pows.last().expect("nonempty") * &r2;
                r2_pows.push(next);
            }
            let angular = if *m >= 0 { &re[am] } else { &im[am] };
            out = &out + &(&r2_pows[j] * angular).scale(*c);
        }
        Ok(out)
    }

    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }
}

impl std::ops::Add for &DiskPoly {
    type Output = DiskPoly;
    fn add(self, rhs: &DiskPoly) -> DiskPoly {
        let mut out = self.clone();
        for ((m, k), c) in &rhs.terms {
            out.add_term(*m, *k, *c);
        }
        out
    }
}

#[inline]
fn trig(m: i64, theta: f64) -> f64 {
    if m >= 0 {
        (m as f64 * theta).cos()
    } else {
        (-m as f64 * theta).sin()
    }
}

/// Fourier modes of `cos^a θ sin^b θ` as `(m, coefficient)` pairs.
fn trig_power_series(a: u32, b: u32) -> Vec<(i64, f64)> {
    // Laurent polynomial in z = e^{iθ}, stored with offset n = a + b
    let n = (a + b) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let cos_factor = [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
    // sin θ = (z - 1/z) / (2i)
    let sin_factor = [Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)];
    let mut apply = |f: &[Complex64; 2]| {
        let mut next = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            // f[0] multiplies 1/z, f[1] multiplies z
            next[i - 1] += c * f[0];
            next[i + 1] += c * f[1];
        }
        coeffs = next;
    };
    for _ in 0..a {
        apply(&cos_factor);
    }
    for _ in 0..b {
        apply(&sin_factor);
    }
    let mut out = Vec::new();
    let c0 = coeffs[n].re;
    if c0 != 0.0 {
        out.push((0, c0));
    }
    for m in 1..=n {
        let c = coeffs[n + m];
        if c.re != 0.0 {
            out.push((m as i64, 2.0 * c.re));
        }
        if c.im != 0.0 {
            out.push((-(m as i64), -2.0 * c.im));
        }
    }
    out
}

/// `a_0 + Σ_{m>=1} (a_m cos mθ + b_m sin mθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn zeros(order: usize) -> Self {
        Self {
            cos: vec![0.0; order + 1],
            sin: vec![0.0; order + 1],
        }
    }

    pub fn constant(h: f64) -> Self {
        let mut s = Self::zeros(0);
        s.cos[0] = h;
        s
    }

    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    fn add_mode(&mut self, m: i64, c: f64) {
        let am = m.unsigned_abs() as usize;
        if am > self.order() {
            self.cos.resize(am + 1, 0.0);
            self.sin.resize(am + 1, 0.0);
        }
        if m >= 0 {
            self.cos[am] += c;
        } else {
            self.sin[am] += c;
        }
    }

    /// Discrete Fourier coefficients of equispaced rim samples
    /// `θ_j = 2πj/n`, keeping modes `m < n/2`.
    pub fn from_samples(samples: &RimSamples) -> Self {
        let n = samples.values.len();
        let order = (n - 1) / 2;
        let mut s = Self::zeros(order);
        for m in 0..=order {
            let (mut c, mut d) = (0.0, 0.0);
            for (j, v) in samples.values.iter().enumerate() {
                let a = 2.0 * PI * ((m * j) % n) as f64 / n as f64;
                c += v * a.cos();
                d += v * a.sin();
            }
            let scale = if m == 0 { 1.0 } else { 2.0 } / n as f64;
            s.cos[m] = c * scale;
            s.sin[m] = d * scale;
        }
        s
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.cos[0];
        for m in 1..=self.order() {
            let (s, c) = (m as f64 * theta).sin_cos();
            v += self.cos[m] * c + self.sin[m] * s;
        }
        v
    }

    /// Harmonic extension `Σ r^m (a_m cos mθ + b_m sin mθ)` into the disk.
    pub fn harmonic_extension(&self) -> DiskPoly {
        let mut out = DiskPoly::zero();
        out.add_term(0, 0, self.cos[0]);
        for m in 1..=self.order() {
            out.add_term(m as i64, m as u32, self.cos[m]);
            out.add_term(-(m as i64), m as u32, self.sin[m]);
        }
        out
    }

    pub fn sample(&self, n: usize) -> RimSamples {
        RimSamples {
            values: (0..n).map(|j| self.eval(2.0 * PI * j as f64 / n as f64)).collect(),
        }
    }
}

/// Values at the equispaced rim angles `θ_j = 2πj/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RimSamples {
    pub values: Vec<f64>,
}

impl RimSamples {
    pub fn constant(h: f64, n: usize) -> Self {
        Self { values: vec![h; n] }
    }

    pub fn sample<F: Fn(f64) -> f64>(n: usize, f: F) -> Self {
        Self {
            values: (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect(),
        }
    }

    /// `∫_{∂D} P_D(x'; e) ψ(e) dS` by the trapezoid rule, normalized by the
    /// discrete kernel mass so constants are reproduced exactly.
    pub fn poisson_extend(&self, x: &[f64; 2]) -> Result<f64> {
        let xx = x[0] * x[0] + x[1] * x[1];
        if xx >= 1.0 {
            return Err(BackusError::Domain(format!("|x'| = {} >= 1", xx.sqrt())));
        }
        let n = self.values.len();
        if n == 0 {
            return Ok(0.0);
        }
        let mut mass = 0.0;
        let mut acc = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            let a = 2.0 * PI * j as f64 / n as f64;
            let d0 = x[0] - a.cos();
            let d1 = x[1] - a.sin();
            let p = (1.0 - xx) / (d0 * d0 + d1 * d1);
            mass += p;
            acc += p * v;
        }
        Ok(acc / mass)
    }
}

/// `Z = Z_1 + Z_2` with `-ΔZ_2 = rhs`, `Z_2 = 0` on the rim, and `Z_1` the
/// harmonic extension of `ψ`.
pub fn solve_disk_spectral(rhs: &Poly, psi: &FourierSeries) -> Result<DiskPoly> {
    let source = DiskPoly::from_poly(rhs)?;
    let mut z = psi.harmonic_extension();
    for ((m, k), c) in source.terms() {
        let am = m.unsigned_abs() as u32;
        let denom = ((*k + 2) as f64).powi(2) - (am as f64).powi(2);
        if denom == 0.0 || *k < am {
            return Err(BackusError::Resonance(format!(
                "source mode r^{k} trig({m}θ) has no polynomial particular solution"
            )));
        }
        let a = c / denom;
        z.add_term(*m, am, a);
        z.add_term(*m, k + 2, -a);
    }
    Ok(z)
}

/// `∫_D G_D(x'; z') rhs(z') dz' + ∫_{∂D} P_D(x'; e) ψ(e) dS` by quadrature.
pub fn solve_disk_green(rhs: &DiskField, psi: &RimSamples, x: &[f64; 2]) -> Result<f64> {
    if x[0] * x[0] + x[1] * x[1] >= 1.0 {
        return Err(BackusError::Domain(format!(
            "disk solve at |x'| = {} >= 1",
            (x[0] * x[0] + x[1] * x[1]).sqrt()
        )));
    }
    let f_at_x = rhs.interpolate(x);
    let interior = green_disk_apply(x, f_at_x, &rhs.grid, |i, _| rhs.values[i]);
    Ok(interior + psi.poisson_extend(x)?)
}
