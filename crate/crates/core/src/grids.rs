//! Quadrature grids on the unit sphere, the equatorial disk and vertical
//! segments, plus deterministic reductions over them.
//!
//! Every grid is immutable after construction. Integration is a parallel
//! map followed by a sequential pairwise reduction, so results do not depend
//! on the size of the rayon pool.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{BackusError, Result};

/// Pairwise (tree) summation with a fixed split order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
///
/// The node set is exactly symmetric: the negative half is the mirror image
/// of the positive half, and an odd rule has an exact zero in the middle.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` times the
/// uniform trapezoid rule in azimuth.
///
/// Node `(i, j)` lives at index `i * n_phi + j`; ring `i` has polar cosine
/// `cos_theta[i]` (ascending) and azimuth `2π j / n_phi`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub cos_theta: Vec<f64>,
    pub ring_weights: Vec<f64>,
    pub azimuths: Vec<f64>,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(BackusError::InvalidParameter(format!(
                "sphere grid needs n_theta >= 2 and n_phi >= 4, got {n_theta}x{n_phi}"
            )));
        }
        let (cos_theta, gl_w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let ring_weights: Vec<f64> = gl_w.iter().map(|w| w * dphi).collect();
        let azimuths: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (t, w) in cos_theta.iter().zip(&ring_weights) {
            let s = (1.0 - t * t).sqrt();
            for a in &azimuths {
                nodes.push([s * a.cos(), s * a.sin(), *t]);
                weights.push(*w);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            cos_theta,
            ring_weights,
            azimuths,
            nodes,
            weights,
        })
    }

    /// Smallest grid that integrates products of degree `3 * l_max` exactly,
    /// which is what re-projecting a degree `2L` polynomial onto degree `L`
    /// requires.
    pub fn for_degree(l_max: usize) -> Self {
        let exact = 3 * l_max;
        let n_theta = (exact + 2).div_ceil(2).max(2);
        let n_phi = (exact + 2).max(4);
        Self::new(n_theta, n_phi).expect("valid grid sizes")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest total degree of polynomial restrictions integrated exactly.
    pub fn degree_exactness(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    pub fn index(&self, ring: usize, az: usize) -> usize {
        ring * self.n_phi + az
    }

    /// Index of the node reflected through the plane `x_N = 0`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let ring = idx / self.n_phi;
        let az = idx % self.n_phi;
        self.index(self.n_theta - 1 - ring, az)
    }

    pub fn integrate_fn<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64; 3]) -> f64 + Sync + Send,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(y, w)| w * f(y))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Sphere rule in polar coordinates around `pole`, with geometrically
/// graded Gauss panels in the polar angle.
///
/// The first panel has width `scale / 2`, each following panel doubles, so
/// integrands peaked at `pole` with width `~scale` (Poisson-type kernels at
/// `x = (1 - scale) pole`) are resolved with a logarithmic node count.
#[derive(Debug, Clone)]
pub struct FocusedSphereRule {
    pub pole: [f64; 3],
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl FocusedSphereRule {
    pub fn new(pole: [f64; 3], scale: f64, per_panel: usize, n_phi: usize) -> Result<Self> {
        let norm = (pole[0] * pole[0] + pole[1] * pole[1] + pole[2] * pole[2]).sqrt();
        if !(norm > 0.0) || !(scale > 0.0) || per_panel == 0 || n_phi < 4 {
            return Err(BackusError::InvalidParameter(
                "focused rule needs a nonzero pole, positive scale and n_phi >= 4".into(),
            ));
        }
        let e3 = [pole[0] / norm, pole[1] / norm, pole[2] / norm];
        // any unit vector orthogonal to e3
        let helper = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = helper[0] * e3[0] + helper[1] * e3[1] + helper[2] * e3[2];
        let mut e1 = [helper[0] - d * e3[0], helper[1] - d * e3[1], helper[2] - d * e3[2]];
        let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
        let e2 = [
            e3[1] * e1[2] - e3[2] * e1[1],
            e3[2] * e1[0] - e3[0] * e1[2],
            e3[0] * e1[1] - e3[1] * e1[0],
        ];

        let mut breaks = vec![0.0];
        let mut b = (0.5 * scale).min(PI / 4.0);
        while b < PI {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(PI);

        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for win in breaks.windows(2) {
            let (th, wt) = gauss_legendre_on(win[0], win[1], per_panel);
            for (t, w) in th.iter().zip(&wt) {
                let (st, ct) = t.sin_cos();
                for j in 0..n_phi {
                    let (sa, ca) = (j as f64 * dphi).sin_cos();
                    let mut y = [0.0; 3];
                    for k in 0..3 {
                        y[k] = st * (ca * e1[k] + sa * e2[k]) + ct * e3[k];
                    }
                    nodes.push(y);
                    weights.push(w * st * dphi);
                }
            }
        }
        Ok(Self {
            pole: e3,
            nodes,
            weights,
        })
    }

    pub fn integrate_fn<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64; 3]) -> f64 + Sync + Send,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(y, w)| w * f(y))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Polar rule on the unit disk with radial nodes graded toward the rim by
/// `r = 1 - (1 - s)^grading`, `s` Gauss–Legendre on [0, 1].
#[derive(Debug, Clone)]
pub struct DiskGrid {
    pub n_r: usize,
    pub n_phi: usize,
    pub grading: f64,
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl DiskGrid {
    pub fn new(n_r: usize, n_phi: usize, grading: f64) -> Result<Self> {
        if n_r < 2 || n_phi < 4 {
            return Err(BackusError::InvalidParameter(format!(
                "disk grid needs n_r >= 2 and n_phi >= 4, got {n_r}x{n_phi}"
            )));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(BackusError::InvalidParameter(format!(
                "disk grading must be >= 1, got {grading}"
            )));
        }
        let (s, ws) = gauss_legendre_on(0.0, 1.0, n_r);
        let mut radii = Vec::with_capacity(n_r);
        let mut radial_weights = Vec::with_capacity(n_r);
        for (si, wi) in s.iter().zip(&ws) {
            let q = 1.0 - si;
            let r = 1.0 - q.powf(grading);
            let dr = grading * q.powf(grading - 1.0);
            radii.push(r);
            radial_weights.push(wi * dr * r);
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_r * n_phi);
        let mut weights = Vec::with_capacity(n_r * n_phi);
        for (r, w) in radii.iter().zip(&radial_weights) {
            for j in 0..n_phi {
                let a = j as f64 * dphi;
                nodes.push([r * a.cos(), r * a.sin()]);
                weights.push(w * dphi);
            }
        }
        Ok(Self {
            n_r,
            n_phi,
            grading,
            radii,
            radial_weights,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate_fn<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64; 2]) -> f64 + Sync + Send,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(z, w)| w * f(z))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Gauss rule on the vertical segment from `(x', 0)` to `(x', x_N)`.
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub base: [f64; 2],
    pub height: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SegmentRule {
    pub fn new(base: [f64; 2], height: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BackusError::InvalidParameter(
                "segment rule needs at least one node".into(),
            ));
        }
        let (nodes, weights) = gauss_legendre_on(0.0, height, n);
        Ok(Self {
            base,
            height,
            nodes,
            weights,
        })
    }

    /// Polynomials of degree up to this value are integrated exactly.
    pub fn degree_exactness(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(*t))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Nodal samples of a scalar function on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct SphereField {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<f64>,
}

impl SphereField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BackusError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn sample<F>(grid: Arc<SphereGrid>, f: F) -> Self
    where
        F: Fn(&[f64; 3]) -> f64 + Sync + Send,
    {
        let values = grid.nodes.par_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// Bilinear interpolation in `(cos θ, azimuth)` on the product grid.
    /// Outside the extreme rings the ring values are held constant.
    pub fn interpolate(&self, y: &[f64; 3]) -> f64 {
        let g = &*self.grid;
        let t = y[2].clamp(-1.0, 1.0);
        let mut az = y[1].atan2(y[0]);
        if az < 0.0 {
            az += 2.0 * PI;
        }
        let dphi = 2.0 * PI / g.n_phi as f64;
        let ja = ((az / dphi).floor() as usize) % g.n_phi;
        let jb = (ja + 1) % g.n_phi;
        let fa = (az - ja as f64 * dphi) / dphi;
        let ring_value = |i: usize| {
            (1.0 - fa) * self.values[g.index(i, ja)] + fa * self.values[g.index(i, jb)]
        };
        let ct = &g.cos_theta;
        if t <= ct[0] {
            return ring_value(0);
        }
        if t >= ct[g.n_theta - 1] {
            return ring_value(g.n_theta - 1);
        }
        let i = ct.partition_point(|c| *c <= t) - 1;
        let ft = (t - ct[i]) / (ct[i + 1] - ct[i]);
        (1.0 - ft) * ring_value(i) + ft * ring_value(i + 1)
    }
}

/// Nodal samples of a scalar function on a [`DiskGrid`].
#[derive(Debug, Clone)]
pub struct DiskField {
    pub grid: Arc<DiskGrid>,
    pub values: Vec<f64>,
}

impl DiskField {
    pub fn new(grid: Arc<DiskGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BackusError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn sample<F>(grid: Arc<DiskGrid>, f: F) -> Self
    where
        F: Fn(&[f64; 2]) -> f64 + Sync + Send,
    {
        let values = grid.nodes.par_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// Bilinear interpolation in `(r, angle)`; ring values are held constant
    /// inside the innermost ring and outside the outermost one.
    pub fn interpolate(&self, x: &[f64; 2]) -> f64 {
        let g = &*self.grid;
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let mut az = x[1].atan2(x[0]);
        if az < 0.0 {
            az += 2.0 * PI;
        }
        let dphi = 2.0 * PI / g.n_phi as f64;
        let ja = ((az / dphi).floor() as usize) % g.n_phi;
        let jb = (ja + 1) % g.n_phi;
        let fa = (az - ja as f64 * dphi) / dphi;
        let ring_value = |i: usize| {
            (1.0 - fa) * self.values[i * g.n_phi + ja] + fa * self.values[i * g.n_phi + jb]
        };
        let rs = &g.radii;
        if r <= rs[0] {
            return ring_value(0);
        }
        if r >= rs[g.n_r - 1] {
            return ring_value(g.n_r - 1);
        }
        let i = rs.partition_point(|c| *c <= r) - 1;
        let fr = (r - rs[i]) / (rs[i + 1] - rs[i]);
        (1.0 - fr) * ring_value(i) + fr * ring_value(i + 1)
    }
}

/// Anything that carries quadrature weights and matching nodal values.
pub trait WeightedSamples {
    fn weights(&self) -> &[f64];
    fn values(&self) -> &[f64];
}

impl WeightedSamples for SphereField {
    fn weights(&self) -> &[f64] {
        &self.grid.weights
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl WeightedSamples for DiskField {
    fn weights(&self) -> &[f64] {
        &self.grid.weights
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Weighted sum of a field over its grid.
pub fn integrate<F: WeightedSamples + ?Sized>(field: &F) -> f64 {
    try_integrate(field.weights(), field.values()).expect("field lengths checked at construction")
}

/// Weighted sum with explicit length checking.
pub fn try_integrate(weights: &[f64], values: &[f64]) -> Result<f64> {
    if weights.len() != values.len() {
        return Err(BackusError::LengthMismatch {
            expected: weights.len(),
            got: values.len(),
        });
    }
    let terms: Vec<f64> = weights
        .par_iter()
        .zip(values.par_iter())
        .map(|(w, v)| w * v)
        .collect();
    Ok(pairwise_sum(&terms))
}
