//! Harmonic extension of sphere data.
//!
//! Two independent routes compute the Poisson extension `w` of `φ`:
//! the spectral route projects `φ` onto real spherical harmonics and extends
//! each mode as a solid-harmonic polynomial; the quadrature route integrates
//! the Poisson kernel against nodal samples. The vertical primitive `W` and
//! the equatorial source `∂_{x_N} w(x', 0)` are exact polynomial operations.

pub mod basis;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{BackusError, Result};
use crate::grids::{pairwise_sum, SphereField, SphereGrid};
use crate::kernels::{poisson_ball_unchecked, BallPoint};
use crate::poly::Poly;

pub use basis::{lm_from_index, lm_index, num_coefficients, real_sph_harmonics, solid_harmonics};

/// Relative tolerance on Laplacian coefficients for a polynomial to count as
/// harmonic.
pub const HARMONIC_TOL: f64 = 1e-12;

/// Radius beyond which the quadrature extension switches to the
/// constant-subtracted form.
pub const NEAR_BOUNDARY_RADIUS: f64 = 0.95;

/// Symmetry tags carried by a [`SphereExpansion`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryTags {
    /// `φ(y', -y_N) = φ(y', y_N)`.
    pub even: bool,
    /// invariant under rotations about the `x_N` axis
    pub axisymmetric: bool,
}

/// Real spherical-harmonic coefficients `a_lm`, `0 <= l <= L`, `|m| <= l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereExpansion {
    l_max: usize,
    coeffs: Vec<f64>,
    tags: SymmetryTags,
}

/// One serialized coefficient.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Coefficient {
    pub l: usize,
    pub m: i64,
    pub value: f64,
}

impl SphereExpansion {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coeffs: vec![0.0; num_coefficients(l_max)],
            tags: SymmetryTags::default(),
        }
    }

    pub fn from_coefficients(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != num_coefficients(l_max) {
            return Err(BackusError::LengthMismatch {
                expected: num_coefficients(l_max),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            l_max,
            coeffs,
            tags: SymmetryTags::default(),
        })
    }

    pub fn from_list(l_max: usize, list: &[Coefficient]) -> Result<Self> {
        let mut e = Self::zeros(l_max);
        for c in list {
            if c.l > l_max || c.m.unsigned_abs() as usize > c.l {
                return Err(BackusError::InvalidParameter(format!(
                    "coefficient (l={}, m={}) outside degree {l_max}",
                    c.l, c.m
                )));
            }
            e.coeffs[lm_index(c.l, c.m)] += c.value;
        }
        Ok(e)
    }

    /// Nonzero coefficients in index order.
    pub fn to_list(&self) -> Vec<Coefficient> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| {
                let (l, m) = lm_from_index(i);
                Coefficient { l, m, value: *v }
            })
            .collect()
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tags(&self) -> SymmetryTags {
        self.tags
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.l_max {
            0.0
        } else {
            self.coeffs[lm_index(l, m)]
        }
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        self.coeffs[lm_index(l, m)] = value;
        self.tags = SymmetryTags::default();
    }

    /// Largest coefficient with `l - |m|` odd, i.e. the part odd in `y_N`.
    pub fn odd_part_max(&self) -> f64 {
        self.max_where(|l, m| (l as i64 - m.abs()) % 2 == 1)
    }

    /// Largest coefficient even in `y_N`.
    pub fn even_part_max(&self) -> f64 {
        self.max_where(|l, m| (l as i64 - m.abs()) % 2 == 0)
    }

    /// Largest coefficient with `m != 0`.
    pub fn azimuthal_max(&self) -> f64 {
        self.max_where(|_, m| m != 0)
    }

    fn max_where<F: Fn(usize, i64) -> bool>(&self, pick: F) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (l, m) = lm_from_index(*i);
                pick(l, m)
            })
            .fold(0.0, |acc, (_, v)| acc.max(v.abs()))
    }

    /// Sets the symmetry tags after checking the coefficient invariants.
    pub fn with_tags(mut self, tags: SymmetryTags) -> Result<Self> {
        if tags.even && self.odd_part_max() > 1e-12 {
            return Err(BackusError::Symmetry(format!(
                "expansion tagged even has odd coefficients up to {:e}",
                self.odd_part_max()
            )));
        }
        if tags.axisymmetric && self.azimuthal_max() > 1e-12 {
            return Err(BackusError::Symmetry(format!(
                "expansion tagged axisymmetric has m != 0 coefficients up to {:e}",
                self.azimuthal_max()
            )));
        }
        self.tags = tags;
        Ok(self)
    }

    /// Zeroes every coefficient for which `keep(l, m)` is false.
    pub fn filtered<F: Fn(usize, i64) -> bool>(&self, keep: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (l, m) = lm_from_index(i);
                if keep(l, m) {
                    *v
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            l_max: self.l_max,
            coeffs,
            tags: SymmetryTags::default(),
        }
    }

    /// Same function at a different truncation degree (dropping or padding).
    pub fn resized(&self, l_max: usize) -> Self {
        let mut out = Self::zeros(l_max);
        let n = num_coefficients(l_max.min(self.l_max));
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out.tags = self.tags;
        out
    }

    /// Largest coefficient of degree `l > l_max`.
    pub fn tail_max(&self, l_max: usize) -> f64 {
        self.max_where(|l, _| l > l_max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coefficient sup-norm distance, zero-padding the shorter expansion.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0.0);
                let b = other.coeffs.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            l_max: self.l_max,
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
            tags: self.tags,
        }
    }

    /// `self + s * other`, at the larger of the two degrees.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        let l = self.l_max.max(other.l_max);
        let mut out = self.resized(l);
        for (i, v) in other.coeffs.iter().enumerate() {
            out.coeffs[i] += s * v;
        }
        out.tags = SymmetryTags {
            even: self.tags.even && other.tags.even,
            axisymmetric: self.tags.axisymmetric && other.tags.axisymmetric,
        };
        out
    }

    pub fn evaluate(&self, y: &[f64; 3]) -> f64 {
        let vals = real_sph_harmonics(self.l_max, y);
        let terms: Vec<f64> = vals.iter().zip(&self.coeffs).map(|(a, b)| a * b).collect();
        pairwise_sum(&terms)
    }

    /// Values at every node of a product grid, in node order.
    pub fn evaluate_on(&self, grid: &SphereGrid) -> Vec<f64> {
        let l_max = self.l_max;
        let trig = AzimuthTable::new(grid, l_max);
        let sqrt2 = 2f64.sqrt();
        let mut out = vec![0.0; grid.len()];
        for (i, t) in grid.cos_theta.iter().enumerate() {
            let q = basis::normalized_legendre(l_max, *t);
            // ring Fourier coefficients: c_m, s_m
            let mut cm = vec![0.0; l_max + 1];
            let mut sm = vec![0.0; l_max + 1];
            for l in 0..=l_max {
                let base = l * (l + 1) / 2;
                cm[0] += q[base] * self.coeffs[lm_index(l, 0)];
                for m in 1..=l {
                    cm[m] += sqrt2 * q[base + m] * self.coeffs[lm_index(l, m as i64)];
                    sm[m] += sqrt2 * q[base + m] * self.coeffs[lm_index(l, -(m as i64))];
                }
            }
            for j in 0..grid.n_phi {
                let mut v = cm[0];
                for m in 1..=l_max {
                    v += cm[m] * trig.cos(j, m) + sm[m] * trig.sin(j, m);
                }
                out[grid.index(i, j)] = v;
            }
        }
        out
    }
}

struct AzimuthTable {
    n_phi: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl AzimuthTable {
    fn new(grid: &SphereGrid, l_max: usize) -> Self {
        let n_phi = grid.n_phi;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        // cos(m φ_j) with the angle reduced modulo 2π through integer arithmetic
        let mut cos = vec![0.0; n_phi * (l_max + 1)];
        let mut sin = vec![0.0; n_phi * (l_max + 1)];
        for j in 0..n_phi {
            for m in 0..=l_max {
                let k = (m * j) % n_phi;
                let (s, c) = (k as f64 * dphi).sin_cos();
                cos[j * (l_max + 1) + m] = c;
                sin[j * (l_max + 1) + m] = s;
            }
        }
        let _ = n_phi;
        Self { n_phi: l_max + 1, cos, sin }
    }

    #[inline]
    fn cos(&self, j: usize, m: usize) -> f64 {
        self.cos[j * self.n_phi + m]
    }

    #[inline]
    fn sin(&self, j: usize, m: usize) -> f64 {
        self.sin[j * self.n_phi + m]
    }
}

/// L²(S)-orthogonal projection of nodal data onto degree `l_max`.
///
/// Exact to rounding for polynomial restrictions of degree `d` whenever the
/// grid integrates degree `d + l_max` exactly; the grid must at least
/// integrate degree `2 l_max`.
pub fn project_sphere(field: &SphereField, l_max: usize) -> Result<SphereExpansion> {
    let grid = &*field.grid;
    if grid.degree_exactness() < 2 * l_max {
        return Err(BackusError::Resolution(format!(
            "grid {}x{} is exact to degree {}, projection to L = {l_max} needs {}",
            grid.n_theta,
            grid.n_phi,
            grid.degree_exactness(),
            2 * l_max
        )));
    }
    let trig = AzimuthTable::new(grid, l_max);
    let sqrt2 = 2f64.sqrt();
    let mut coeffs = vec![0.0; num_coefficients(l_max)];
    let mut contributions: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.n_theta); coeffs.len()];
    for (i, t) in grid.cos_theta.iter().enumerate() {
        let ring = &field.values[grid.index(i, 0)..grid.index(i, 0) + grid.n_phi];
        let mut fc = vec![0.0; l_max + 1];
        let mut fs = vec![0.0; l_max + 1];
        for m in 0..=l_max {
            let c: Vec<f64> = ring.iter().enumerate().map(|(j, v)| v * trig.cos(j, m)).collect();
            let s: Vec<f64> = ring.iter().enumerate().map(|(j, v)| v * trig.sin(j, m)).collect();
            fc[m] = pairwise_sum(&c);
            fs[m] = pairwise_sum(&s);
        }
        let q = basis::normalized_legendre(l_max, *t);
        let w = grid.ring_weights[i];
        for l in 0..=l_max {
            let base = l * (l + 1) / 2;
            contributions[lm_index(l, 0)].push(w * q[base] * fc[0]);
            for m in 1..=l {
                contributions[lm_index(l, m as i64)].push(w * sqrt2 * q[base + m] * fc[m]);
                contributions[lm_index(l, -(m as i64))].push(w * sqrt2 * q[base + m] * fs[m]);
            }
        }
    }
    for (c, parts) in coeffs.iter_mut().zip(&contributions) {
        *c = pairwise_sum(parts);
    }
    SphereExpansion::from_coefficients(l_max, coeffs)
}

/// A polynomial whose exact Laplacian vanishes up to [`HARMONIC_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPoly {
    poly: Poly,
}

impl HarmonicPoly {
    pub fn new(poly: Poly) -> Result<Self> {
        let defect = harmonic_defect(&poly);
        if defect > HARMONIC_TOL {
            return Err(BackusError::Precondition(format!(
                "polynomial is not harmonic: relative Laplacian defect {defect:e}"
            )));
        }
        Ok(Self { poly })
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }
}

impl Deref for HarmonicPoly {
    type Target = Poly;
    fn deref(&self) -> &Poly {
        &self.poly
    }
}

/// Largest Laplacian coefficient relative to `max(1, max |coefficient|)`.
pub fn harmonic_defect(p: &Poly) -> f64 {
    p.laplacian().max_abs_coefficient() / p.max_abs_coefficient().max(1.0)
}

/// `Σ a_lm r^l Y_lm` as an explicit polynomial.
pub fn poisson_extend_spectral(exp: &SphereExpansion) -> Result<HarmonicPoly> {
    let basis = solid_harmonics(exp.l_max());
    let mut w = Poly::zero();
    for (c, p) in exp.coeffs().iter().zip(basis.iter()) {
        if *c != 0.0 {
            w = &w + &p.scale(*c);
        }
    }
    HarmonicPoly::new(w)
}

/// `∫_S P_B(x; y) φ(y) dS_y` on the field's grid.
///
/// For `|x| >= 0.95` the value `c ≈ φ(x/|x|)` (bilinear interpolation) is
/// subtracted under the integral and added back, which leaves the exact
/// answer unchanged and removes the bulk of the kernel peak.
pub fn poisson_extend_quadrature(phi: &SphereField, x: &BallPoint) -> Result<f64> {
    if !x.is_interior() {
        return Err(BackusError::Domain(format!(
            "Poisson extension at |x| = {} >= 1",
            x.norm()
        )));
    }
    let r = x.norm();
    let anchor = if r >= NEAR_BOUNDARY_RADIUS {
        let xb = [x.x[0] / r, x.x[1] / r, x.x[2] / r];
        phi.interpolate(&xb)
    } else {
        0.0
    };
    let g = &*phi.grid;
    let terms: Vec<f64> = g
        .nodes
        .iter()
        .zip(&g.weights)
        .zip(&phi.values)
        .map(|((y, w), v)| w * poisson_ball_unchecked(&x.x, y) * (v - anchor))
        .collect();
    Ok(anchor + pairwise_sum(&terms))
}

/// `∂_{x_N} w` restricted to the plane `x_N = 0`.
pub fn equatorial_normal_trace(w: &HarmonicPoly) -> Poly {
    w.derivative(2).restrict_xn_zero()
}

/// `W(x) = ∫_0^{x_N} w(x', t) dt`.
pub fn vertical_primitive(w: &Poly) -> Poly {
    w.integrate_xn_from_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn xn() -> Poly {
        Poly::var(2)
    }

    #[test]
    fn projection_of_simple_data() {
        let g = Arc::new(SphereGrid::new(16, 32).unwrap());
        let e = project_sphere(&SphereField::sample(g.clone(), |y| y[2]), 6).unwrap();
        for (i, v) in e.coeffs().iter().enumerate() {
            if i == lm_index(1, 0) {
                assert!((v - (4.0 * std::f64::consts::PI / 3.0).sqrt()).abs() < 1e-13);
            } else {
                assert!(v.abs() <= 1e-13);
            }
        }
        let one = project_sphere(&SphereField::sample(g.clone(), |_| 1.0), 6).unwrap();
        assert!(one.coeffs()[1..].iter().all(|v| v.abs() <= 1e-13));
        assert!((one.coeffs()[0] - (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn projection_round_trip() {
        let g = Arc::new(SphereGrid::new(16, 32).unwrap());
        let f = SphereField::sample(g.clone(), |y| y[0] * y[2]);
        let e = project_sphere(&f, 6).unwrap();
        let back = e.evaluate_on(&g);
        for (a, b) in back.iter().zip(&f.values) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (y, v) in g.nodes.iter().zip(&f.values).step_by(7) {
            assert!((e.evaluate(y) - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_rejects_coarse_grid() {
        let g = Arc::new(SphereGrid::new(4, 8).unwrap());
        let f = SphereField::sample(g, |_| 1.0);
        assert!(matches!(project_sphere(&f, 6), Err(BackusError::Resolution(_))));
    }

    #[test]
    fn spectral_extension_closed_forms() {
        let g = Arc::new(SphereGrid::new(12, 24).unwrap());
        let w = poisson_extend_spectral(&project_sphere(&SphereField::sample(g.clone(), |_| 1.0), 4).unwrap()).unwrap();
        assert!(w.pruned(1e-13).max_coefficient_distance(&Poly::constant(1.0)) < 1e-13);
        let w = poisson_extend_spectral(&project_sphere(&SphereField::sample(g.clone(), |y| y[2]), 4).unwrap()).unwrap();
        assert!(w.max_coefficient_distance(&xn()) < 1e-13);
        let w = poisson_extend_spectral(&project_sphere(&SphereField::sample(g, |y| y[0] * y[2]), 4).unwrap()).unwrap();
        assert!(w.max_coefficient_distance(&Poly::monomial([1, 0, 1], 1.0)) < 1e-13);
    }

    #[test]
    fn spectral_extension_of_nonharmonic_trace() {
        // y_N^2 extends to x_N^2 + (1 - |x|^2) / 3
        let g = Arc::new(SphereGrid::new(12, 24).unwrap());
        let w = poisson_extend_spectral(&project_sphere(&SphereField::sample(g, |y| y[2] * y[2]), 4).unwrap()).unwrap();
        let expect = Poly::from_terms([([0, 0, 2], 2.0 / 3.0), ([2, 0, 0], -1.0 / 3.0), ([0, 2, 0], -1.0 / 3.0), ([0, 0, 0], 1.0 / 3.0)]);
        assert!(w.max_coefficient_distance(&expect) < 1e-13);
    }

    #[test]
    fn quadrature_extension() {
        let g = Arc::new(SphereGrid::new(64, 128).unwrap());
        let one = SphereField::sample(g.clone(), |_| 1.0);
        let v = poisson_extend_quadrature(&one, &BallPoint::new([0.0, 0.0, 0.99]).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let yn = SphereField::sample(g.clone(), |y| y[2]);
        let v = poisson_extend_quadrature(&yn, &BallPoint::new([0.1, 0.2, 0.3]).unwrap()).unwrap();
        assert!((v - 0.3).abs() < 1e-6);
        assert!(poisson_extend_quadrature(&yn, &BallPoint::new([0.0, 0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn quadrature_and_spectral_extensions_agree() {
        let g = Arc::new(SphereGrid::new(64, 128).unwrap());
        let f = SphereField::sample(g.clone(), |y| y[0] * y[2]);
        let w = poisson_extend_spectral(&project_sphere(&f, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut count = 0;
        while count < 100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 >= 0.9 * 0.9 {
                continue;
            }
            count += 1;
            let q = poisson_extend_quadrature(&f, &BallPoint::new(x).unwrap()).unwrap();
            assert!((q - w.eval(&x)).abs() <= 1e-6, "{x:?}");
        }
    }

    #[test]
    fn trace_and_primitive() {
        let w = HarmonicPoly::new(xn()).unwrap();
        assert_eq!(equatorial_normal_trace(&w), Poly::constant(1.0));
        assert_eq!(vertical_primitive(&w), Poly::monomial([0, 0, 2], 0.5));
        let one = HarmonicPoly::new(Poly::constant(1.0)).unwrap();
        assert!(equatorial_normal_trace(&one).is_zero());
        assert_eq!(vertical_primitive(&one), xn());
        let w = HarmonicPoly::new(Poly::monomial([1, 0, 1], 1.0)).unwrap();
        let trace = equatorial_normal_trace(&w);
        assert_eq!(trace, Poly::var(0));
        let big_w = vertical_primitive(&w);
        assert_eq!(big_w, Poly::monomial([1, 0, 2], 0.5));
        assert_eq!(big_w.laplacian(), trace);
        assert!(HarmonicPoly::new(Poly::monomial([0, 0, 2], 1.0)).is_err());
    }

    #[test]
    fn primitive_identities_on_random_harmonics() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let l_max = rng.gen_range(1..=10);
            let coeffs: Vec<f64> = (0..num_coefficients(l_max)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let e = SphereExpansion::from_coefficients(l_max, coeffs).unwrap();
            let w = poisson_extend_spectral(&e).unwrap();
            let big_w = vertical_primitive(&w);
            assert!(big_w.derivative(2).max_coefficient_distance(&w) <= 1e-12 * w.max_abs_coefficient().max(1.0));
            let defect = (&big_w.laplacian() - &equatorial_normal_trace(&w)).max_abs_coefficient();
            assert!(defect <= 1e-11 * w.max_abs_coefficient().max(1.0), "defect {defect}");
        }
    }

    #[test]
    fn symmetry_tags_are_checked() {
        let mut e = SphereExpansion::zeros(3);
        e.set(1, 0, 1.0);
        assert!(e.clone().with_tags(SymmetryTags { even: true, axisymmetric: false }).is_err());
        assert!(e.clone().with_tags(SymmetryTags { even: false, axisymmetric: true }).is_ok());
        e.set(2, 1, 1.0);
        assert!(e.with_tags(SymmetryTags { even: false, axisymmetric: true }).is_err());
    }
}
