//! Fixed-point machinery for the nonlinear boundary condition.
//!
//! With `u = x_N + v` and `φ = ∂_{x_N} v` on `S`, the condition
//! `|∇u|^2 = g^2` reads `φ = ½ (g^2 - 1 - |∇v|^2)`. The right-hand side is
//! iterated as a contraction: `Ψ_g` on data even in `y_N` (the odd branch,
//! `u = 0` on the equator) and `Ψ̃_{g,h}` on axisymmetric data with
//! `u = h` on the equator, where `|∇v|^2` is first passed through the glue
//! operator `J`.

mod glue;
mod report;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disk_poisson::FourierSeries;
use crate::error::{BackusError, Result};
use crate::grids::{SphereField, SphereGrid};
use crate::harmonic_ext::{poisson_extend_spectral, project_sphere, SphereExpansion, SymmetryTags};
use crate::linearized::{solve_spectral, SpectralSolution};
use crate::norms::HolderMonitor;
use crate::poly::Poly;

pub use glue::{cutoff_eta, glue_j};
pub use report::{FixedPointReport, PsiConstants};

/// Tolerance on forbidden coefficients of symmetry-tagged input.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Symmetry class of boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Even,
    Axisymmetric,
}

/// Branch of the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `g` even in `y_N`; `u` odd in `x_N`, zero on the equator.
    Odd,
    /// `g` axisymmetric; `u` axisymmetric, `u = h` on the equator.
    Axisymmetric,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Odd => "odd",
            Mode::Axisymmetric => "axisym",
        }
    }

    pub fn symmetry(self) -> Symmetry {
        match self {
            Mode::Odd => Symmetry::Even,
            Mode::Axisymmetric => Symmetry::Axisymmetric,
        }
    }
}

/// Subspaces for [`project_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Even,
    Odd,
    Axisymmetric,
}

/// Orthogonal projection onto a symmetry class; idempotent.
pub fn project_symmetry(field: &SphereExpansion, class: Projection) -> SphereExpansion {
    let parity = |l: usize, m: i64| (l as i64 - m.abs()) % 2;
    match class {
        Projection::Even => field
            .filtered(|l, m| parity(l, m) == 0)
            .with_tags(SymmetryTags {
                even: true,
                axisymmetric: field.tags().axisymmetric,
            })
            .expect("even projection has no odd coefficients"),
        Projection::Odd => field.filtered(|l, m| parity(l, m) == 1),
        Projection::Axisymmetric => field
            .filtered(|_, m| m == 0)
            .with_tags(SymmetryTags {
                even: field.tags().even,
                axisymmetric: true,
            })
            .expect("axisymmetric projection has no azimuthal coefficients"),
    }
}

fn projection_for(mode: Mode) -> Projection {
    match mode {
        Mode::Odd => Projection::Even,
        Mode::Axisymmetric => Projection::Axisymmetric,
    }
}

/// How the boundary data was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum DataKind {
    Constant(f64),
    Manufactured { q: Poly, eps: f64 },
    Coefficients,
    Tabulated,
}

/// Boundary modulus `g` sampled on a sphere grid, with its symmetry class
/// and equatorial level.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub kind: DataKind,
    pub g: SphereField,
    pub symmetry: Symmetry,
    pub h: f64,
}

impl BoundaryData {
    /// Validates positivity and the symmetry tag on the nodal values.
    pub fn new(kind: DataKind, g: SphereField, symmetry: Symmetry, h: f64) -> Result<Self> {
        if let Some((i, v)) = g.values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(BackusError::Domain(format!(
                "g must be positive, node {i} has g = {v}"
            )));
        }
        if !h.is_finite() {
            return Err(BackusError::InvalidParameter(format!("equatorial level h = {h}")));
        }
        let grid = &*g.grid;
        match symmetry {
            Symmetry::Even => {
                for i in 0..grid.len() {
                    let d = (g.values[i] - g.values[grid.mirror_index(i)]).abs();
                    if d > 1e-12 {
                        return Err(BackusError::Symmetry(format!(
                            "g tagged even differs by {d:e} between mirrored nodes"
                        )));
                    }
                }
            }
            Symmetry::Axisymmetric => {
                for ring in 0..grid.n_theta {
                    let vals = &g.values[grid.index(ring, 0)..grid.index(ring, 0) + grid.n_phi];
                    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if hi - lo > 1e-12 {
                        return Err(BackusError::Symmetry(format!(
                            "g tagged axisymmetric varies by {:e} on ring {ring}",
                            hi - lo
                        )));
                    }
                }
            }
        }
        Ok(Self { kind, g, symmetry, h })
    }

    pub fn constant(c: f64, grid: Arc<SphereGrid>, symmetry: Symmetry, h: f64) -> Result<Self> {
        Self::new(DataKind::Constant(c), SphereField::sample(grid, |_| c), symmetry, h)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.g.grid
    }

    /// Projection of `g^2 - 1` onto degree `l_max`, symmetrized.
    pub fn g2_minus_one(&self, l_max: usize) -> Result<SphereExpansion> {
        let f = SphereField::new(
            self.g.grid.clone(),
            self.g.values.iter().map(|v| v * v - 1.0).collect(),
        )?;
        let e = project_sphere(&f, l_max)?;
        Ok(project_symmetry(&e, self.projection()))
    }

    /// Projection of `g - 1` onto degree `l_max`.
    pub fn g_minus_one(&self, l_max: usize) -> Result<SphereExpansion> {
        let f = SphereField::new(self.g.grid.clone(), self.g.values.iter().map(|v| v - 1.0).collect())?;
        project_sphere(&f, l_max)
    }

    fn projection(&self) -> Projection {
        match self.symmetry {
            Symmetry::Even => Projection::Even,
            Symmetry::Axisymmetric => Projection::Axisymmetric,
        }
    }
}

/// `|∇v|^2` for the linearized solution of `φ`, with its degree-`L` trace.
#[derive(Debug, Clone)]
pub struct OperatorOutput {
    /// `|∇v|^2` in the ball.
    pub interior: Poly,
    /// Degree-`L` projection of the trace on `S` (glued in the
    /// axisymmetric branch).
    pub trace: SphereExpansion,
    /// Largest discarded coefficient of degree above `L`.
    pub tail: f64,
    pub solution: SpectralSolution,
}

fn gradient_square(sol: &SpectralSolution) -> Poly {
    let [a, b, c] = &sol.grad_v;
    &(&a.square() + &b.square()) + &c.square()
}

/// Samples `f` on a grid exact to degree `6L`, projects to degree `2L`
/// and truncates to `L`.
fn project_trace<F>(f: F, l_max: usize) -> Result<(SphereExpansion, f64)>
where
    F: Fn(&[f64; 3]) -> f64 + Sync + Send,
{
    let grid = Arc::new(SphereGrid::for_degree(2 * l_max));
    let full = project_sphere(&SphereField::sample(grid, f), 2 * l_max)?;
    Ok((full.resized(l_max), full.tail_max(l_max)))
}

fn t_with_psi(phi: &SphereExpansion, l_max: usize, psi: f64) -> Result<OperatorOutput> {
    let solution = solve_spectral(&phi.resized(l_max), &FourierSeries::constant(psi))?;
    let interior = gradient_square(&solution);
    let [a, b, c] = &solution.grad_v;
    let (trace, tail) = project_trace(
        |y| {
            let (p, q, r) = (a.eval(y), b.eval(y), c.eval(y));
            p * p + q * q + r * r
        },
        l_max,
    )?;
    Ok(OperatorOutput {
        interior,
        trace,
        tail,
        solution,
    })
}

/// `T[φ] = |∇v|^2` with `v` the linearized solution for `(φ, 0)`;
/// `φ` must be even in `y_N`.
pub fn operator_t(phi: &SphereExpansion, l_max: usize) -> Result<OperatorOutput> {
    let odd = phi.odd_part_max();
    if odd > SYMMETRY_TOL {
        return Err(BackusError::Symmetry(format!(
            "T needs φ even in y_N, odd coefficients reach {odd:e}"
        )));
    }
    let mut out = t_with_psi(phi, l_max, 0.0)?;
    out.trace = project_symmetry(&out.trace, Projection::Even);
    Ok(out)
}

/// [`operator_t`] without the symmetry check.
pub fn operator_t_unchecked(phi: &SphereExpansion, l_max: usize) -> Result<OperatorOutput> {
    t_with_psi(phi, l_max, 0.0)
}

/// `T̃_h[φ] = J[|∇v|^2]` with `v` the linearized solution for `(φ, h)`;
/// `φ` must be axisymmetric.
pub fn operator_t_tilde(phi: &SphereExpansion, h: f64, l_max: usize) -> Result<OperatorOutput> {
    let az = phi.azimuthal_max();
    if az > SYMMETRY_TOL {
        return Err(BackusError::Symmetry(format!(
            "T̃ needs axisymmetric φ, azimuthal coefficients reach {az:e}"
        )));
    }
    let solution = solve_spectral(&phi.resized(l_max), &FourierSeries::constant(h))?;
    let interior = gradient_square(&solution);
    let [a, b, c] = &solution.grad_v;
    let glued = glue_j(|y: &[f64; 3]| {
        let (p, q, r) = (a.eval(y), b.eval(y), c.eval(y));
        p * p + q * q + r * r
    });
    let (trace, tail) = project_trace(glued, l_max)?;
    Ok(OperatorOutput {
        interior,
        trace: project_symmetry(&trace, Projection::Axisymmetric),
        tail,
        solution,
    })
}

/// One application of `Ψ_g` (even data) or `Ψ̃_{g,h}` (axisymmetric data)
/// at the degree of `φ`, with `h` taken from `g`.
pub fn psi_step(g: &BoundaryData, phi: &SphereExpansion) -> Result<SphereExpansion> {
    let mode = match g.symmetry {
        Symmetry::Even => Mode::Odd,
        Symmetry::Axisymmetric => Mode::Axisymmetric,
    };
    let stepper = Stepper::new(g, mode, g.h, phi.l_max())?;
    Ok(stepper.step(phi)?.0)
}

struct Stepper {
    mode: Mode,
    h: f64,
    l_max: usize,
    g2m1: SphereExpansion,
}

impl Stepper {
    fn new(g: &BoundaryData, mode: Mode, h: f64, l_max: usize) -> Result<Self> {
        if g.symmetry != mode.symmetry() {
            return Err(BackusError::Symmetry(format!(
                "{} branch needs {:?} data, got {:?}",
                mode.name(),
                mode.symmetry(),
                g.symmetry
            )));
        }
        Ok(Self {
            mode,
            h,
            l_max,
            g2m1: g.g2_minus_one(l_max)?,
        })
    }

    fn check(&self, phi: &SphereExpansion) -> Result<()> {
        let bad = match self.mode {
            Mode::Odd => phi.odd_part_max(),
            Mode::Axisymmetric => phi.azimuthal_max(),
        };
        if bad > SYMMETRY_TOL {
            return Err(BackusError::Symmetry(format!(
                "iterate outside the {} class by {bad:e}",
                self.mode.name()
            )));
        }
        Ok(())
    }

    fn apply_t(&self, phi: &SphereExpansion) -> Result<OperatorOutput> {
        match self.mode {
            Mode::Odd => operator_t(phi, self.l_max),
            Mode::Axisymmetric => operator_t_tilde(phi, self.h, self.l_max),
        }
    }

    fn step(&self, phi: &SphereExpansion) -> Result<(SphereExpansion, OperatorOutput)> {
        self.check(phi)?;
        let t = self.apply_t(phi)?;
        let next = self.g2m1.add_scaled(&t.trace, -1.0).scale(0.5);
        Ok((project_symmetry(&next, projection_for(self.mode)), t))
    }
}

/// Settings of [`fixed_point_solve`].
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    pub l_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub lambda: f64,
    /// `|g - 1|` surrogate above which a warning is recorded.
    pub delta_threshold: f64,
    pub alpha: f64,
    pub pairs: usize,
    pub seed: u64,
    /// Starting iterate; zero when absent.
    pub init: Option<SphereExpansion>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            l_max: 8,
            tol: 1e-10,
            max_iter: 50,
            lambda: 0.9,
            delta_threshold: 0.25,
            alpha: crate::norms::DEFAULT_ALPHA,
            pairs: crate::norms::DEFAULT_PAIRS,
            seed: crate::norms::DEFAULT_SEED,
            init: None,
        }
    }
}

/// Result of a converged solve.
#[derive(Debug, Clone)]
pub struct BackusSolution {
    pub mode: Mode,
    pub h: f64,
    /// `u = x_N + v`.
    pub u: Poly,
    pub phi: SphereExpansion,
    pub linearized: SpectralSolution,
    pub report: FixedPointReport,
}

impl BackusSolution {
    pub fn grad_u(&self) -> [Poly; 3] {
        self.u.gradient()
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && num.is_finite()).then(|| num / den)
}

fn update_max(slot: &mut Option<f64>, v: Option<f64>) {
    if let Some(v) = v {
        *slot = Some(slot.map_or(v, |s| s.max(v)));
    }
}

/// Iterates `φ_{k+1} = Ψ[φ_k]` until the coefficient sup-norm step is at
/// most `tol`, then assembles `u = x_N + v`.
pub fn fixed_point_solve(g: &BoundaryData, mode: Mode, h: f64, config: &FixedPointConfig) -> Result<BackusSolution> {
    if config.l_max < 1 {
        return Err(BackusError::InvalidParameter("L must be at least 1".into()));
    }
    if !(config.tol > 0.0) {
        return Err(BackusError::InvalidParameter(format!("tolerance must be positive, got {}", config.tol)));
    }
    let h = if mode == Mode::Odd { 0.0 } else { h };
    let l_max = config.l_max;
    let stepper = Stepper::new(g, mode, h, l_max)?;
    let monitor = HolderMonitor::new(config.alpha, config.pairs, config.seed)?;
    let holder = |e: &SphereExpansion| -> Result<f64> { Ok(monitor.norm_1_alpha(poisson_extend_spectral(e)?.poly())) };

    let mut report = FixedPointReport {
        mode: mode.name().to_string(),
        lambda_target: config.lambda,
        tolerance: config.tol,
        ..FixedPointReport::default()
    };
    let g_m1 = holder(&g.g_minus_one(l_max)?)?;
    let g2_m1 = holder(&stepper.g2m1)?;
    report.psi_constants.delta1 = Some(g_m1);
    report.psi_constants.delta2 = Some(g2_m1);
    report.psi_constants.c0 = ratio(g2_m1, (g_m1 + 2.0) * g_m1);
    if g_m1 > config.delta_threshold {
        report.warnings.push(format!(
            "|g - 1| surrogate {g_m1:.3e} exceeds the perturbative threshold {:.3e}",
            config.delta_threshold
        ));
    }

    let mut phi = match &config.init {
        Some(e) => project_symmetry(&e.resized(l_max), projection_for(mode)),
        None => project_symmetry(&SphereExpansion::zeros(l_max), projection_for(mode)),
    };
    report.iterates.push(phi.sup_norm());
    let mut prev: Option<(SphereExpansion, SphereExpansion, f64)> = None;
    let mut converged = false;
    for _ in 0..config.max_iter {
        let (next, t) = stepper.step(&phi)?;
        let step = next.sup_distance(&phi);
        report.iterations += 1;
        report.tail_norms.push(t.tail);
        report.step_norms.push(step);
        if report.step_norms.len() >= 2 {
            let n = report.step_norms.len();
            report.contraction_ratios.push(step / report.step_norms[n - 2]);
        }
        let phi_norm = holder(&phi)?;
        let t_norm = holder(&t.trace)?;
        report.holder_norms.push(phi_norm);
        let (quad, lip) = match mode {
            Mode::Odd => (&mut report.psi_constants.c1, &mut report.psi_constants.c2),
            Mode::Axisymmetric => (&mut report.psi_constants.c3, &mut report.psi_constants.c4),
        };
        update_max(quad, ratio(t_norm, phi_norm * phi_norm).filter(|_| phi_norm > 1e-12));
        if let Some((prev_phi, prev_t, prev_norm)) = &prev {
            let diff = holder(&phi.add_scaled(prev_phi, -1.0))?;
            let tdiff = holder(&t.trace.add_scaled(prev_t, -1.0))?;
            update_max(lip, ratio(tdiff, (phi_norm + prev_norm) * diff).filter(|_| diff > 1e-13));
        }
        prev = Some((phi.clone(), t.trace.clone(), phi_norm));
        phi = next;
        report.iterates.push(phi.sup_norm());
        if !step.is_finite() {
            break;
        }
        if step <= config.tol {
            converged = true;
            break;
        }
    }
    report.converged = converged;
    if report.max_ratio_from(1) > config.lambda {
        report.warnings.push(format!(
            "empirical contraction ratio {:.3e} above λ = {}",
            report.max_ratio_from(1),
            config.lambda
        ));
    }

    let linearized = solve_spectral(&phi, &FourierSeries::constant(h))?;
    let u = &Poly::var(2) + &linearized.v;
    let grad = u.gradient();
    let residual = g
        .g
        .grid
        .nodes
        .iter()
        .zip(&g.g.values)
        .map(|(y, gv)| {
            let s: f64 = grad.iter().map(|p| p.eval(y).powi(2)).sum();
            (s - gv * gv).abs()
        })
        .fold(0.0, f64::max);
    report.boundary_residual = Some(residual);
    if !converged {
        return Err(BackusError::Divergence {
            report: Box::new(report),
        });
    }
    Ok(BackusSolution {
        mode,
        h,
        u,
        phi,
        linearized,
        report,
    })
}

/// Expansion with every admissible coefficient shifted by `amount`, used as
/// a second starting point.
pub fn perturbed_start(phi: &SphereExpansion, mode: Mode, amount: f64, seed: u64) -> SphereExpansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..phi.coeffs().len()).map(|_| amount * rng.gen_range(-1.0..1.0)).collect();
    let shift = SphereExpansion::from_coefficients(phi.l_max(), noise).expect("length matches");
    project_symmetry(&phi.add_scaled(&shift, 1.0), projection_for(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic_ext::lm_index;

    fn grid(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::for_degree(l))
    }

    fn expansion_of<F: Fn(&[f64; 3]) -> f64 + Sync + Send>(l: usize, f: F) -> SphereExpansion {
        project_sphere(&SphereField::sample(grid(l), f), l).unwrap()
    }

    fn close(a: &SphereExpansion, b: &SphereExpansion, tol: f64) -> bool {
        a.sup_distance(b) <= tol
    }

    #[test]
    fn symmetry_projections() {
        let yn = expansion_of(4, |y| y[2]);
        assert!(project_symmetry(&yn, Projection::Even).sup_norm() < 1e-13);
        let y1 = expansion_of(4, |y| y[0]);
        assert!(project_symmetry(&y1, Projection::Axisymmetric).sup_norm() < 1e-13);
        let yn2 = expansion_of(4, |y| y[2] * y[2]);
        let p = project_symmetry(&yn2, Projection::Even);
        assert!(close(&p, &yn2, 1e-13));
        assert_eq!(project_symmetry(&p, Projection::Even), p);
        let mixed = expansion_of(4, |y| y[0] + y[2] + y[0] * y[1] * y[2]);
        let e = project_symmetry(&mixed, Projection::Even);
        let o = project_symmetry(&mixed, Projection::Odd);
        assert!(close(&e.add_scaled(&o, 1.0), &mixed, 0.0));
    }

    #[test]
    fn operator_t_examples() {
        let l = 4;
        let zero = SphereExpansion::zeros(l);
        assert_eq!(operator_t(&zero, l).unwrap().trace.sup_norm(), 0.0);
        let one = expansion_of(l, |_| 1.0);
        let t = operator_t(&one, l).unwrap();
        assert!(close(&t.trace, &one, 1e-12));
        assert!(t.interior.pruned(1e-13).max_coefficient_distance(&Poly::constant(1.0)) < 1e-13);
        let yn = expansion_of(l, |y| y[2]);
        assert!(matches!(operator_t(&yn, l), Err(BackusError::Symmetry(_))));
        let t = operator_t_unchecked(&yn, l).unwrap();
        let expect = expansion_of(l, |y| 0.25 + 0.75 * y[2] * y[2]);
        assert!(close(&t.trace, &expect, 1e-12));
        // independent of the projection: |∇v|^2 as a polynomial restricted to S
        let y = [0.48, 0.6, 0.64];
        assert!((t.interior.eval(&y) - (0.25 + 0.75 * y[2] * y[2])).abs() < 1e-13);
    }

    #[test]
    fn operator_t_tilde_examples() {
        let l = 4;
        let zero = SphereExpansion::zeros(l);
        assert_eq!(operator_t_tilde(&zero, 0.0, l).unwrap().trace.sup_norm(), 0.0);
        assert!(operator_t_tilde(&zero, 0.7, l).unwrap().trace.sup_norm() < 1e-14);
        let one = expansion_of(l, |_| 1.0);
        let t = operator_t_tilde(&one, 0.0, l).unwrap();
        assert!(close(&t.trace, &one, 1e-12));
        let y1 = expansion_of(l, |y| y[0]);
        assert!(matches!(operator_t_tilde(&y1, 0.0, l), Err(BackusError::Symmetry(_))));
    }

    #[test]
    fn glued_trace_matches_field_on_sphere() {
        let l = 5;
        let phi = expansion_of(l, |y| 0.1 * y[2] + 0.05 * y[2] * y[2] * y[2] - 0.02);
        let phi = project_symmetry(&phi, Projection::Axisymmetric);
        let t = operator_t_tilde(&phi, 0.03, l).unwrap();
        let raw = t.interior.clone();
        let j = glue_j(|x| raw.eval(x));
        let g = SphereGrid::new(10, 20).unwrap();
        for y in g.nodes.iter() {
            assert!((j(y) - raw.eval(y)).abs() < 1e-10);
        }
    }

    fn odd_manufactured(eps: f64, l: usize) -> BoundaryData {
        let f = SphereField::sample(grid(l), move |y| {
            (1.0 + 2.0 * eps * y[0] + eps * eps * (y[0] * y[0] + y[2] * y[2])).sqrt()
        });
        BoundaryData::new(DataKind::Coefficients, f, Symmetry::Even, 0.0).unwrap()
    }

    #[test]
    fn psi_step_examples() {
        let l = 6;
        let g = BoundaryData::constant(1.0, grid(l), Symmetry::Even, 0.0).unwrap();
        assert!(psi_step(&g, &SphereExpansion::zeros(l)).unwrap().sup_norm() < 1e-15);

        let eps = 0.05;
        let g = odd_manufactured(eps, l);
        let star = expansion_of(l, |y| eps * y[0]);
        assert!(close(&psi_step(&g, &star).unwrap(), &star, 1e-10));

        let a = project_symmetry(&expansion_of(l, |y| 0.02 * y[0] * y[1] + 0.01), Projection::Even);
        let b = project_symmetry(&expansion_of(l, |y| -0.03 * y[2] * y[2]), Projection::Even);
        let lhs = psi_step(&g, &a).unwrap().add_scaled(&psi_step(&g, &b).unwrap(), -1.0);
        let rhs = operator_t(&a, l).unwrap().trace.add_scaled(&operator_t(&b, l).unwrap().trace, -1.0).scale(-0.5);
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn boundary_data_validation() {
        let g = grid(4);
        assert!(matches!(
            BoundaryData::constant(-1.0, g.clone(), Symmetry::Even, 0.0),
            Err(BackusError::Domain(_))
        ));
        let odd = SphereField::sample(g.clone(), |y| 1.0 + 0.1 * y[2]);
        assert!(matches!(
            BoundaryData::new(DataKind::Coefficients, odd, Symmetry::Even, 0.0),
            Err(BackusError::Symmetry(_))
        ));
        let az = SphereField::sample(g, |y| 1.0 + 0.1 * y[0]);
        assert!(matches!(
            BoundaryData::new(DataKind::Coefficients, az, Symmetry::Axisymmetric, 0.0),
            Err(BackusError::Symmetry(_))
        ));
    }

    #[test]
    fn constant_data_converges_immediately() {
        let config = FixedPointConfig { l_max: 4, ..FixedPointConfig::default() };
        let g = BoundaryData::constant(1.0, grid(4), Symmetry::Even, 0.0).unwrap();
        let sol = fixed_point_solve(&g, Mode::Odd, 0.0, &config).unwrap();
        assert_eq!(sol.report.iterations, 1);
        assert!(sol.u.max_coefficient_distance(&Poly::var(2)) <= 1e-12);
        assert!(sol.report.converged);
    }

    #[test]
    fn mode_mismatch_and_divergence() {
        let config = FixedPointConfig { l_max: 4, max_iter: 2, tol: 1e-14, ..FixedPointConfig::default() };
        let g = BoundaryData::constant(1.0, grid(4), Symmetry::Even, 0.0).unwrap();
        assert!(matches!(fixed_point_solve(&g, Mode::Axisymmetric, 0.0, &config), Err(BackusError::Symmetry(_))));
        let g = odd_manufactured(0.05, 4);
        match fixed_point_solve(&g, Mode::Odd, 0.0, &config) {
            Err(BackusError::Divergence { report }) => {
                assert!(!report.converged);
                assert_eq!(report.iterations, 2);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn odd_manufactured_recovery() {
        let eps = 0.05;
        let l = 8;
        let g = odd_manufactured(eps, l);
        let sol = fixed_point_solve(&g, Mode::Odd, 0.0, &FixedPointConfig::default()).unwrap();
        let exact = Poly::from_terms([([0, 0, 1], 1.0), ([1, 0, 1], eps)]);
        let err = g.grid().nodes.iter().map(|y| (sol.u.eval(y) - exact.eval(y)).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
        assert!(sol.report.iterations <= 20);
        assert!(sol.report.max_ratio_from(1) <= 0.5);
        assert!(sol.phi.get(1, 1) > 0.0);
        assert!(sol.phi.get(1, 0) == 0.0 && sol.phi.coeffs()[lm_index(2, 1)] == 0.0);
        assert!(sol.u.even_part_xn().is_zero());
    }
}
