//! The linearized problem `Δv = 0` in `B`, `∂_{x_N} v = φ` on `S`,
//! `v = ψ` on the equator `E`, solved as `v = W + Z`.
//!
//! `w` is the Poisson extension of `φ`, `W = ∫_0^{x_N} w(x', t) dt`, and `Z`
//! depends on `x'` only with `-Δ_{x'} Z = ∂_{x_N} w(x', 0)` in the disk and
//! `Z = ψ` on its rim.
//!
//! The spectral path carries every piece as an exact polynomial. The kernel
//! path evaluates the integral representation
//! `v(x) = ∫_S K(x; y) φ(y) dS_y + ∫_E P_D(x'; e) ψ(e) dS_e` with the sums
//! over sphere and disk nodes taken in the cheaper order: the equatorial
//! trace `∂_{x_N} w(z', 0)` is tabulated once at every disk node.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::disk_poisson::{solve_disk_spectral, DiskPoly, FourierSeries, RimSamples};
use crate::error::{BackusError, Result};
use crate::grids::{pairwise_sum, DiskGrid, SegmentRule, SphereField, SphereGrid};
use crate::harmonic_ext::{
    equatorial_normal_trace, poisson_extend_quadrature, poisson_extend_spectral, vertical_primitive,
    HarmonicPoly, SphereExpansion,
};
use crate::kernels::{green_disk_apply, poisson_ball_dxn_on_plane, BallPoint};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Spectral,
    Kernel,
}

/// Sphere data for [`solve_linearized`].
#[derive(Debug, Clone, Copy)]
pub enum PhiData<'a> {
    Expansion(&'a SphereExpansion),
    Field(&'a SphereField),
}

/// Resolution of the kernel path.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOptions {
    pub sphere_theta: usize,
    pub sphere_phi: usize,
    pub disk_r: usize,
    pub disk_phi: usize,
    pub disk_grading: f64,
    pub segment_nodes: usize,
    pub rim_samples: usize,
    /// Radial offset for boundary extrapolation from `1 - 2ε`, `1 - ε`.
    pub boundary_eps: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            sphere_theta: 64,
            sphere_phi: 128,
            disk_r: 64,
            disk_phi: 128,
            disk_grading: 2.0,
            segment_nodes: 16,
            rim_samples: 128,
            boundary_eps: 0.01,
        }
    }
}

impl KernelOptions {
    /// Same rule family with every node count scaled by `2^level`
    /// relative to `16 x 32`.
    pub fn refined(level: u32) -> Self {
        let s = 1usize << level;
        Self {
            sphere_theta: 16 * s,
            sphere_phi: 32 * s,
            disk_r: 16 * s,
            disk_phi: 32 * s,
            rim_samples: 32 * s,
            ..Self::default()
        }
    }
}

/// Exact-polynomial diagnostics of a spectral solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// Largest Laplacian coefficient of `v`.
    pub harmonic: f64,
    /// Largest coefficient of `∂_{x_N} v - w`.
    pub normal_derivative: f64,
    /// `max |v - ψ|` over 256 rim samples.
    pub equator: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub v: Poly,
    pub grad_v: [Poly; 3],
    /// Poisson extension of `φ`, equal to `∂_{x_N} v`.
    pub w: HarmonicPoly,
    pub w_part: Poly,
    pub z_part: DiskPoly,
    pub z_poly: Poly,
    pub residuals: Residuals,
}

impl SpectralSolution {
    pub fn evaluate(&self, x: &[f64; 3]) -> f64 {
        self.v.eval(x)
    }
}

/// Spectral solve on exact polynomials.
pub fn solve_spectral(phi: &SphereExpansion, psi: &FourierSeries) -> Result<SpectralSolution> {
    let w = poisson_extend_spectral(phi)?;
    let w_part = vertical_primitive(&w);
    let rhs = equatorial_normal_trace(&w);
    let z_part = solve_disk_spectral(&rhs, psi)?;
    let z_poly = z_part.to_poly()?;
    let v = &w_part + &z_poly;
    let grad_v = v.gradient();
    let harmonic = v.laplacian().max_abs_coefficient();
    let normal_derivative = grad_v[2].max_coefficient_distance(&w);
    let equator = (0..256)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / 256.0;
            (v.eval(&[a.cos(), a.sin(), 0.0]) - psi.eval(a)).abs()
        })
        .fold(0.0, f64::max);
    Ok(SpectralSolution {
        v,
        grad_v,
        w,
        w_part,
        z_part,
        z_poly,
        residuals: Residuals {
            harmonic,
            normal_derivative,
            equator,
        },
    })
}

/// Kernel-path solution: the data plus tabulated equatorial trace.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    phi: SphereField,
    psi: RimSamples,
    disk: Arc<DiskGrid>,
    trace: Vec<f64>,
    segment_nodes: usize,
    boundary_eps: f64,
}

impl KernelSolution {
    pub fn new(phi: SphereField, psi: RimSamples, opts: &KernelOptions) -> Result<Self> {
        let disk = Arc::new(DiskGrid::new(opts.disk_r, opts.disk_phi, opts.disk_grading)?);
        if !(opts.boundary_eps > 0.0 && opts.boundary_eps < 0.25) {
            return Err(BackusError::InvalidParameter(format!(
                "boundary extrapolation offset must lie in (0, 0.25), got {}",
                opts.boundary_eps
            )));
        }
        let mut sol = Self {
            phi,
            psi,
            disk,
            trace: Vec::new(),
            segment_nodes: opts.segment_nodes,
            boundary_eps: opts.boundary_eps,
        };
        sol.trace = sol.disk.nodes.par_iter().map(|z| sol.trace_at(z)).collect();
        Ok(sol)
    }

    pub fn phi(&self) -> &SphereField {
        &self.phi
    }

    /// `∂_{x_N} w(z', 0)` by sphere quadrature.
    pub fn trace_at(&self, z: &[f64; 2]) -> f64 {
        let g = &*self.phi.grid;
        let terms: Vec<f64> = g
            .nodes
            .iter()
            .zip(&g.weights)
            .zip(&self.phi.values)
            .map(|((y, w), v)| w * poisson_ball_dxn_on_plane(z, y) * v)
            .collect();
        pairwise_sum(&terms)
    }

    pub fn w(&self, x: &[f64; 3]) -> Result<f64> {
        poisson_extend_quadrature(&self.phi, &BallPoint::new(*x)?)
    }

    /// `W(x) = ∫_0^{x_N} w(x', t) dt` by Gauss–Legendre on the segment.
    pub fn w_part(&self, x: &[f64; 3]) -> Result<f64> {
        if x[2] == 0.0 {
            return Ok(0.0);
        }
        let seg = SegmentRule::new([x[0], x[1]], x[2], self.segment_nodes)?;
        let mut acc = Vec::with_capacity(seg.nodes.len());
        for (t, wt) in seg.nodes.iter().zip(&seg.weights) {
            acc.push(wt * self.w(&[x[0], x[1], *t])?);
        }
        Ok(pairwise_sum(&acc))
    }

    /// `Z(x')` from the Green and rim Poisson integrals.
    pub fn z_part(&self, x: &[f64; 2]) -> Result<f64> {
        if x[0] * x[0] + x[1] * x[1] >= 1.0 {
            return Err(BackusError::Domain("equatorial correction needs |x'| < 1".into()));
        }
        let f_at_x = self.trace_at(x);
        let interior = green_disk_apply(x, f_at_x, &self.disk, |i, _| self.trace[i]);
        Ok(interior + self.psi.poisson_extend(x)?)
    }

    pub fn evaluate(&self, x: &[f64; 3]) -> Result<f64> {
        let p = BallPoint::new(*x)?;
        if !p.is_interior() {
            return Err(BackusError::Domain(format!(
                "kernel path evaluated at |x| = {} >= 1; use evaluate_boundary",
                p.norm()
            )));
        }
        Ok(self.w_part(x)? + self.z_part(&[x[0], x[1]])?)
    }

    /// Boundary value at `y ∈ S` by linear extrapolation from radii
    /// `1 - 2ε` and `1 - ε`. The equator itself is refused.
    pub fn evaluate_boundary(&self, y: &[f64; 3]) -> Result<f64> {
        let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(BackusError::Domain(format!("boundary point has |y| = {n}")));
        }
        if y[2].abs() < 1e-14 {
            return Err(BackusError::Domain(
                "kernel path is not evaluated on the equator ring".into(),
            ));
        }
        let e = self.boundary_eps;
        let at = |r: f64| self.evaluate(&[r * y[0], r * y[1], r * y[2]]);
        Ok(2.0 * at(1.0 - e)? - at(1.0 - 2.0 * e)?)
    }
}

#[derive(Debug, Clone)]
pub enum LinearizedSolution {
    Spectral(SpectralSolution),
    Kernel(KernelSolution),
}

impl LinearizedSolution {
    pub fn path(&self) -> Path {
        match self {
            Self::Spectral(_) => Path::Spectral,
            Self::Kernel(_) => Path::Kernel,
        }
    }

    pub fn evaluate(&self, x: &[f64; 3]) -> Result<f64> {
        match self {
            Self::Spectral(s) => Ok(s.evaluate(x)),
            Self::Kernel(k) => k.evaluate(x),
        }
    }

    pub fn as_spectral(&self) -> Option<&SpectralSolution> {
        match self {
            Self::Spectral(s) => Some(s),
            Self::Kernel(_) => None,
        }
    }
}

/// Solves the linearized problem on the requested path. The spectral path
/// needs expansion input; the kernel path samples an expansion on the grid
/// given by `opts`.
pub fn solve_linearized(
    phi: PhiData<'_>,
    psi: &FourierSeries,
    path: Path,
    opts: &KernelOptions,
) -> Result<LinearizedSolution> {
    match (path, phi) {
        (Path::Spectral, PhiData::Expansion(e)) => Ok(LinearizedSolution::Spectral(solve_spectral(e, psi)?)),
        (Path::Spectral, PhiData::Field(_)) => Err(BackusError::Precondition(
            "spectral path needs a spherical-harmonic expansion of φ".into(),
        )),
        (Path::Kernel, phi) => {
            let field = match phi {
                PhiData::Field(f) => f.clone(),
                PhiData::Expansion(e) => {
                    let grid = Arc::new(SphereGrid::new(opts.sphere_theta, opts.sphere_phi)?);
                    let values = e.evaluate_on(&grid);
                    SphereField::new(grid, values)?
                }
            };
            let rim = psi.sample(opts.rim_samples);
            Ok(LinearizedSolution::Kernel(KernelSolution::new(field, rim, opts)?))
        }
    }
}

/// Single-point kernel-representation value of `v`.
pub fn evaluate_kernel_k_path(phi: &SphereField, psi: &RimSamples, x: &BallPoint, opts: &KernelOptions) -> Result<f64> {
    if !x.is_interior() {
        return Err(BackusError::Domain(format!("|x| = {} >= 1", x.norm())));
    }
    KernelSolution::new(phi.clone(), psi.clone(), opts)?.evaluate(&x.x)
}

/// Points of an `n^3` lattice on `[-radius, radius]^3` with `|x| <= radius`.
pub fn interior_lattice(n: usize, radius: f64) -> Vec<[f64; 3]> {
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (n - 1).max(1) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [coord(i), coord(j), coord(k)];
                if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= radius * radius {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Default centered-difference step for kernel-path residuals.
pub const FD_STEP: f64 = 0.05;

/// Largest `|Δv|` over the probe points: exact polynomial Laplacian on the
/// spectral path, the 7-point centered difference with step `h` on the
/// kernel path.
pub fn harmonic_residual(sol: &LinearizedSolution, probe: &[[f64; 3]], h: f64) -> Result<f64> {
    match sol {
        LinearizedSolution::Spectral(s) => {
            let lap = s.v.laplacian();
            Ok(probe.iter().map(|x| lap.eval(x).abs()).fold(0.0, f64::max))
        }
        LinearizedSolution::Kernel(k) => {
            let vals: Result<Vec<f64>> = probe
                .par_iter()
                .map(|x| {
                    let mut acc = -6.0 * k.evaluate(x)?;
                    for axis in 0..3 {
                        for s in [-1.0, 1.0] {
                            let mut y = *x;
                            y[axis] += s * h;
                            acc += k.evaluate(&y)?;
                        }
                    }
                    Ok((acc / (h * h)).abs())
                })
                .collect();
            Ok(vals?.into_iter().fold(0.0, f64::max))
        }
    }
}

/// `ω = v / x_N`, extended to the plane by `∂_{x_N} v(x', 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaField {
    pub omega: Poly,
    /// `∂_{x_N} v(x', 0)` as a polynomial in `x'`.
    pub plane_values: Poly,
}

impl OmegaField {
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.omega.eval(x)
    }

    /// Largest gap between the one-sided quotients `v(x', ±δ) / (±δ)` and
    /// the plane value at the given `x'`.
    pub fn continuity_gap(&self, v: &Poly, points: &[[f64; 2]], delta: f64) -> f64 {
        points
            .iter()
            .map(|p| {
                let on = self.plane_values.eval(&[p[0], p[1], 0.0]);
                let up = v.eval(&[p[0], p[1], delta]) / delta;
                let down = v.eval(&[p[0], p[1], -delta]) / -delta;
                (up - on).abs().max((down - on).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Tolerance on the equatorial trace of `v` for [`omega_quotient`].
pub const PLANE_TRACE_TOL: f64 = 1e-12;

pub fn omega_quotient(sol: &SpectralSolution) -> Result<OmegaField> {
    let plane = sol.v.restrict_xn_zero();
    let trace = plane.max_abs_coefficient();
    if trace > PLANE_TRACE_TOL {
        return Err(BackusError::Precondition(format!(
            "v does not vanish on the equatorial plane (coefficient {trace:e})"
        )));
    }
    let omega = (&sol.v - &plane)
        .divide_by_xn()
        .expect("plane terms were removed");
    let plane_values = sol.grad_v[2].restrict_xn_zero();
    Ok(OmegaField { omega, plane_values })
}

/// `(|v|_0 + |∂_{x_N} v|_0 + |x_N D^2_{x'} v|_0) / (|φ| + |ψ|)` with sup norms
/// over the given points; `phi_norm + psi_norm` must be positive.
pub fn a_priori_ratio(sol: &SpectralSolution, phi_norm: f64, psi_norm: f64, points: &[[f64; 3]]) -> Result<f64> {
    let data = phi_norm + psi_norm;
    if !(data > 0.0) {
        return Err(BackusError::InvalidParameter("data norm must be positive".into()));
    }
    let sup = |p: &Poly, weight_xn: bool| {
        points
            .iter()
            .map(|x| {
                let v = p.eval(x).abs();
                if weight_xn {
                    v * x[2].abs()
                } else {
                    v
                }
            })
            .fold(0.0, f64::max)
    };
    let d11 = sol.v.derivative(0).derivative(0);
    let d12 = sol.v.derivative(0).derivative(1);
    let d22 = sol.v.derivative(1).derivative(1);
    let hess = sup(&d11, true).max(sup(&d12, true)).max(sup(&d22, true));
    Ok((sup(&sol.v, false) + sup(&sol.grad_v[2], false) + hess) / data)
}
