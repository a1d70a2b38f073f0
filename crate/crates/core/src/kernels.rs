//! Closed-form kernels: the Poisson kernel of the ball and its first three
//! derivatives, fundamental solutions, the Green's function and Poisson
//! kernel of the equatorial disk, and the composite kernel `K(x; y)` of the
//! oblique-derivative representation.

use std::f64::consts::PI;

use crate::error::{BackusError, Result};
use crate::grids::{pairwise_sum, DiskGrid, SegmentRule};

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_n = π ω_{n-2} / (n / 2)
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// A point of the closed unit ball in `R^3`, with `1 - |x|^2` cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint {
    pub x: [f64; 3],
    pub one_minus_r2: f64,
}

impl BallPoint {
    pub fn new(x: [f64; 3]) -> Result<Self> {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if !r2.is_finite() || r2.sqrt() > 1.0 + 1e-14 {
            return Err(BackusError::Domain(format!("|x| = {} > 1", r2.sqrt())));
        }
        Ok(Self {
            x,
            one_minus_r2: 1.0 - r2,
        })
    }

    pub fn norm(&self) -> f64 {
        (1.0 - self.one_minus_r2).max(0.0).sqrt()
    }

    pub fn horizontal(&self) -> [f64; 2] {
        [self.x[0], self.x[1]]
    }

    pub fn is_interior(&self) -> bool {
        self.one_minus_r2 > 0.0
    }

    fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(BackusError::Domain(format!(
                "kernel evaluated at |x| = {} >= 1",
                self.norm()
            )))
        }
    }
}

/// Kernel value together with the distance `|x - y|` it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub singular_scale: f64,
}

const FOUR_PI: f64 = 4.0 * PI;

#[inline]
fn diff3(x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

#[inline]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `P_B(x; y)` in three dimensions without domain checks (hot loops).
#[inline]
pub fn poisson_ball_unchecked(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let d = diff3(x, y);
    let rho2 = dot3(&d, &d);
    let s = 1.0 - dot3(x, x);
    s / (FOUR_PI * rho2 * rho2.sqrt())
}

/// `∂_{x_N} P_B((z', 0); y)` without domain checks.
#[inline]
pub fn poisson_ball_dxn_on_plane(z: &[f64; 2], y: &[f64; 3]) -> f64 {
    let d0 = z[0] - y[0];
    let d1 = z[1] - y[1];
    let rho2 = d0 * d0 + d1 * d1 + y[2] * y[2];
    let s = 1.0 - z[0] * z[0] - z[1] * z[1];
    3.0 * s * y[2] / (FOUR_PI * rho2 * rho2 * rho2.sqrt())
}

/// Poisson kernel of the unit ball in `R^N`, `N = x.len() >= 3`:
/// `(1 - |x|^2) / (N ω_N |x - y|^N)`.
pub fn poisson_kernel_ball_nd(x: &[f64], y: &[f64]) -> Result<KernelValue> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(BackusError::InvalidParameter(format!(
            "Poisson kernel needs matching points of dimension >= 3 (got {} and {})",
            n,
            y.len()
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        return Err(BackusError::Domain(format!("|x| = {} >= 1", r2.sqrt())));
    }
    let rho: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let value = (1.0 - r2) / (n as f64 * unit_ball_volume(n) * rho.powi(n as i32));
    Ok(KernelValue {
        value,
        singular_scale: rho,
    })
}

pub fn poisson_kernel_ball(x: &BallPoint, y: &[f64; 3]) -> Result<KernelValue> {
    x.require_interior()?;
    let d = diff3(&x.x, y);
    Ok(KernelValue {
        value: poisson_ball_unchecked(&x.x, y),
        singular_scale: dot3(&d, &d).sqrt(),
    })
}

/// Analytic gradient of `P_B(x; y)` in `x`.
pub fn grad_poisson_kernel_ball(x: &BallPoint, y: &[f64; 3]) -> Result<[f64; 3]> {
    x.require_interior()?;
    Ok(grad_poisson_unchecked(&x.x, y))
}

#[inline]
pub fn grad_poisson_unchecked(x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    let d = diff3(x, y);
    let rho2 = dot3(&d, &d);
    let s = 1.0 - dot3(x, x);
    let r0 = 1.0 / (rho2 * rho2.sqrt());
    let r2 = r0 / rho2;
    let mut g = [0.0; 3];
    for i in 0..3 {
        g[i] = (-2.0 * x[i] * r0 - 3.0 * s * d[i] * r2) / FOUR_PI;
    }
    g
}

/// Analytic Hessian of `P_B(x; y)` in `x`.
pub fn hessian_poisson_kernel_ball(x: &BallPoint, y: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
    x.require_interior()?;
    let x = &x.x;
    let d = diff3(x, y);
    let rho2 = dot3(&d, &d);
    let s = 1.0 - dot3(x, x);
    let n = 3.0;
    let r0 = 1.0 / (rho2 * rho2.sqrt());
    let r2 = r0 / rho2;
    let r4 = r2 / rho2;
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = (-2.0 * delta * r0 + 2.0 * n * (x[i] * d[j] + x[j] * d[i]) * r2
                - n * s * delta * r2
                + n * (n + 2.0) * s * d[i] * d[j] * r4)
                / FOUR_PI;
        }
    }
    Ok(h)
}

/// Analytic third derivatives `∂_i ∂_j ∂_k P_B(x; y)`.
pub fn third_derivative_poisson_kernel_ball(
    x: &BallPoint,
    y: &[f64; 3],
) -> Result<[[[f64; 3]; 3]; 3]> {
    x.require_interior()?;
    let x = &x.x;
    let d = diff3(x, y);
    let rho2 = dot3(&d, &d);
    let s = 1.0 - dot3(x, x);
    let n = 3.0;
    let r0 = 1.0 / (rho2 * rho2.sqrt());
    let r2 = r0 / rho2;
    let r4 = r2 / rho2;
    let r6 = r4 / rho2;
    let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut t = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let a = 2.0 * n * dl(i, j) * d[k] * r2;
                let b = 2.0 * n * (dl(i, k) * d[j] + x[i] * dl(j, k) + dl(j, k) * d[i] + x[j] * dl(i, k)) * r2
                    - 2.0 * n * (n + 2.0) * (x[i] * d[j] + x[j] * d[i]) * d[k] * r4;
                let c = 2.0 * n * dl(i, j) * x[k] * r2 + n * (n + 2.0) * s * dl(i, j) * d[k] * r4;
                let e = n * (n + 2.0) * (-2.0 * x[k] * d[i] * d[j] + s * (dl(i, k) * d[j] + dl(j, k) * d[i])) * r4
                    - n * (n + 2.0) * (n + 4.0) * s * d[i] * d[j] * d[k] * r6;
                t[i][j][k] = (a + b + c + e) / FOUR_PI;
            }
        }
    }
    Ok(t)
}

/// Fundamental solution of the Laplacian in `R^d`, `d = z.len() >= 2`.
pub fn fundamental_solution(z: &[f64]) -> Result<f64> {
    let d = z.len();
    if d < 2 {
        return Err(BackusError::InvalidParameter(format!(
            "fundamental solution needs dimension >= 2, got {d}"
        )));
    }
    let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(BackusError::Singular("fundamental solution at z = 0".into()));
    }
    Ok(fundamental_from_radius(r, d))
}

#[inline]
fn fundamental_from_radius(r: f64, d: usize) -> f64 {
    if d == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        let df = d as f64;
        r.powf(2.0 - df) / (df * (df - 2.0) * unit_ball_volume(d))
    }
}

/// Green's function of the unit ball `D ⊂ R^d`, `d = x.len()`.
///
/// The image term `Γ(|x'| (I(x') - y'))` is evaluated through
/// `|x'| |I(x') - y'| = sqrt(1 - 2 x'·y' + |x'|^2 |y'|^2)`, which is also
/// the correct limit at `x' = 0`.
pub fn green_disk(x: &[f64], y: &[f64]) -> Result<f64> {
    let d = x.len();
    if d < 2 || y.len() != d {
        return Err(BackusError::InvalidParameter(
            "green_disk needs matching points of dimension >= 2".into(),
        ));
    }
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if dist2 == 0.0 {
        return Err(BackusError::Singular("green_disk at coincident points".into()));
    }
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let image2 = (1.0 - 2.0 * xy + xx * yy).max(0.0);
    if d == 2 {
        Ok(0.25 / PI * (image2 / dist2).ln())
    } else {
        Ok(fundamental_from_radius(dist2.sqrt(), d) - fundamental_from_radius(image2.sqrt(), d))
    }
}

/// Two-dimensional `G_D(x'; z')` without checks; zero at coincident points.
#[inline]
pub fn green_disk_unchecked(x: &[f64; 2], z: &[f64; 2]) -> f64 {
    let d0 = x[0] - z[0];
    let d1 = x[1] - z[1];
    let dist2 = d0 * d0 + d1 * d1;
    if dist2 == 0.0 {
        return 0.0;
    }
    let xx = x[0] * x[0] + x[1] * x[1];
    let zz = z[0] * z[0] + z[1] * z[1];
    let xz = x[0] * z[0] + x[1] * z[1];
    let image2 = (1.0 - 2.0 * xz + xx * zz).max(f64::MIN_POSITIVE);
    0.25 / PI * (image2 / dist2).ln()
}

/// Poisson kernel of the unit ball `D ⊂ R^d`:
/// `(1 - |x'|^2) / (d ω_d |x' - y'|^d)`.
pub fn poisson_kernel_disk(x: &[f64], y: &[f64]) -> Result<f64> {
    let d = x.len();
    if d < 2 || y.len() != d {
        return Err(BackusError::InvalidParameter(
            "poisson_kernel_disk needs matching points of dimension >= 2".into(),
        ));
    }
    let xx: f64 = x.iter().map(|v| v * v).sum();
    if xx >= 1.0 {
        return Err(BackusError::Domain(format!("|x'| = {} >= 1", xx.sqrt())));
    }
    let rho: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((1.0 - xx) / (d as f64 * unit_ball_volume(d) * rho.powi(d as i32)))
}

/// `∫_D G_D(x'; z') dz' = (1 - |x'|^2) / 4` on the unit disk.
#[inline]
pub fn green_disk_mass(x: &[f64; 2]) -> f64 {
    0.25 * (1.0 - x[0] * x[0] - x[1] * x[1])
}

/// `∫_D G_D(x'; z') f(z') dz'` on the disk grid with the value at `x'`
/// subtracted, so only an `O(ρ log ρ)` singularity is left for the
/// quadrature.
pub fn green_disk_apply<F>(x: &[f64; 2], f_at_x: f64, disk: &DiskGrid, f: F) -> f64
where
    F: Fn(usize, &[f64; 2]) -> f64,
{
    let terms: Vec<f64> = disk
        .nodes
        .iter()
        .zip(&disk.weights)
        .enumerate()
        .map(|(i, (z, w))| w * green_disk_unchecked(x, z) * (f(i, z) - f_at_x))
        .collect();
    pairwise_sum(&terms) + f_at_x * green_disk_mass(x)
}

/// Composite kernel
/// `K(x; y) = ∫_0^{x_N} P_B(x', t; y) dt + ∫_D G_D(x', z') ∂_{x_N} P_B(z', 0; y) dz'`
/// by Gauss quadrature on the vertical segment and the graded disk grid.
pub fn kernel_k(x: &BallPoint, y: &[f64; 3], segment_nodes: usize, disk: &DiskGrid) -> Result<f64> {
    x.require_interior()?;
    let xp = x.horizontal();
    if xp[0] * xp[0] + xp[1] * xp[1] >= 1.0 {
        return Err(BackusError::Domain("kernel K needs |x'| < 1".into()));
    }
    let seg = SegmentRule::new(xp, x.x[2], segment_nodes)?;
    let vertical = seg.integrate(|t| poisson_ball_unchecked(&[xp[0], xp[1], t], y));
    let k_at_x = poisson_ball_dxn_on_plane(&xp, y);
    let horizontal = green_disk_apply(&xp, k_at_x, disk, |_, z| poisson_ball_dxn_on_plane(z, y));
    Ok(vertical + horizontal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::SphereGrid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_interior(rng: &mut ChaCha8Rng, rmax: f64) -> [f64; 3] {
        loop {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if dot3(&x, &x).sqrt() < rmax {
                return x;
            }
        }
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let x = random_interior(rng, 1.0);
            let n = dot3(&x, &x).sqrt();
            if n > 1e-3 {
                return [x[0] / n, x[1] / n, x[2] / n];
            }
        }
    }

    #[test]
    fn ball_volume() {
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn poisson_ball_closed_form_values() {
        let y = [0.0, 0.6, 0.8];
        let c = poisson_kernel_ball(&BallPoint::new([0.0; 3]).unwrap(), &y).unwrap();
        assert_abs_diff_eq!(c.value, 1.0 / (4.0 * PI), epsilon = 1e-15);
        let near = BallPoint::new([0.0, 0.54, 0.72]).unwrap();
        let v = poisson_kernel_ball(&near, &y).unwrap().value;
        assert_abs_diff_eq!(v, 0.19 / 0.001 / (4.0 * PI), epsilon = 1e-9);
        assert!((v - 15.1197).abs() < 1e-4);
        let nd = poisson_kernel_ball_nd(&[0.0, 0.54, 0.72], &y).unwrap().value;
        assert_abs_diff_eq!(nd, v, epsilon = 1e-12);
        assert!(poisson_kernel_ball(&BallPoint::new([0.0, 0.0, 1.0]).unwrap(), &y).is_err());
        assert!(BallPoint::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn poisson_ball_reproduces_constants_and_coordinates() {
        let g = SphereGrid::new(64, 128).unwrap();
        let x = BallPoint::new([0.0, 0.0, 0.5]).unwrap();
        let m0 = g.integrate_fn(|y| poisson_kernel_ball(&x, y).unwrap().value);
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-8);
        let x = BallPoint::new([0.3, 0.0, 0.2]).unwrap();
        for k in 0..3 {
            let m1 = g.integrate_fn(|y| poisson_kernel_ball(&x, y).unwrap().value * y[k]);
            assert_abs_diff_eq!(m1, x.x[k], epsilon = 1e-8);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..20 {
            let x = random_interior(&mut rng, 0.8);
            let y = random_unit(&mut rng);
            let g = grad_poisson_kernel_ball(&BallPoint::new(x).unwrap(), &y).unwrap();
            for i in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (poisson_ball_unchecked(&xp, &y) - poisson_ball_unchecked(&xm, &y)) / (2.0 * h);
                let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((fd - g[i]).abs() <= 1e-6 * scale, "component {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn gradient_at_center() {
        let y = [0.48, 0.6, 0.64];
        let g = grad_poisson_kernel_ball(&BallPoint::new([0.0; 3]).unwrap(), &y).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(g[i], 3.0 * y[i] / (4.0 * PI), epsilon = 1e-15);
        }
    }

    #[test]
    fn higher_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..10 {
            let x = random_interior(&mut rng, 0.7);
            let y = random_unit(&mut rng);
            let bp = BallPoint::new(x).unwrap();
            let hess = hessian_poisson_kernel_ball(&bp, &y).unwrap();
            let third = third_derivative_poisson_kernel_ball(&bp, &y).unwrap();
            let hs = hess.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let ts = third.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let gp = grad_poisson_unchecked(&xp, &y);
                let gm = grad_poisson_unchecked(&xm, &y);
                let hp = hessian_poisson_kernel_ball(&BallPoint::new(xp).unwrap(), &y).unwrap();
                let hm = hessian_poisson_kernel_ball(&BallPoint::new(xm).unwrap(), &y).unwrap();
                for i in 0..3 {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    assert!((fd - hess[i][j]).abs() <= 1e-6 * hs);
                    for k in 0..3 {
                        let fd3 = (hp[i][k] - hm[i][k]) / (2.0 * h);
                        assert!((fd3 - third[i][k][j]).abs() <= 1e-6 * ts);
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_structure_constant_is_bounded() {
        // |∇P_B| |x - y|^N stays bounded, including pairs that nearly touch.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sup = 0.0f64;
        for k in 0..10_000 {
            let y = random_unit(&mut rng);
            let x = if k % 2 == 0 {
                random_interior(&mut rng, 1.0)
            } else {
                let t = 1.0 - 10f64.powf(-rng.gen_range(1.0..8.0));
                [t * y[0], t * y[1], t * y[2]]
            };
            let bp = BallPoint::new(x).unwrap();
            if !bp.is_interior() {
                continue;
            }
            let g = grad_poisson_kernel_ball(&bp, &y).unwrap();
            let rho = dot3(&diff3(&x, &y), &diff3(&x, &y)).sqrt();
            sup = sup.max(dot3(&g, &g).sqrt() * rho.powi(3));
        }
        // |a_β| <= (2 + 2·3·... ) / 4π; anything finite and O(1) is the claim
        assert!(sup.is_finite() && sup < 2.0, "sup = {sup}");
    }

    #[test]
    fn fundamental_solution_values() {
        assert_abs_diff_eq!(fundamental_solution(&[1.0, 0.0]).unwrap(), 0.0, epsilon = 1e-16);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(fundamental_solution(&[e, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(fundamental_solution(&[0.0, 0.0, 1.0]).unwrap(), 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert!(fundamental_solution(&[0.0, 0.0]).is_err());
        assert!(fundamental_solution(&[1.0]).is_err());
    }

    #[test]
    fn green_disk_values() {
        let y = [0.3, -0.4];
        assert_abs_diff_eq!(green_disk(&[0.0, 0.0], &y).unwrap(), (1.0 / 0.5f64).ln() / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(green_disk(&[0.2, 0.1], &[0.6, 0.8]).unwrap(), 0.0, epsilon = 1e-14);
        assert!(green_disk(&y, &y).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = random_interior(&mut rng, 1.0);
            let b = random_interior(&mut rng, 1.0);
            let (a, b) = ([a[0], a[1]], [b[0], b[1]]);
            if a[0].hypot(a[1]) >= 1.0 || b[0].hypot(b[1]) >= 1.0 {
                continue;
            }
            let gab = green_disk(&a, &b).unwrap();
            let gba = green_disk(&b, &a).unwrap();
            assert!((gab - gba).abs() <= 1e-13);
            assert!(gab >= 0.0);
            assert_eq!(green_disk_unchecked(&a, &b), gab);
        }
    }

    #[test]
    fn green_three_dimensional_vanishes_on_boundary() {
        let g = green_disk(&[0.1, 0.2, 0.3], &[0.0, 0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn poisson_disk_values() {
        assert_abs_diff_eq!(poisson_kernel_disk(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let n = 256;
        let rim: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let dl = 2.0 * PI / n as f64;
        let mass: f64 = rim.iter().map(|y| poisson_kernel_disk(&[0.5, 0.0], y).unwrap() * dl).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
        let ext: f64 = rim.iter().map(|y| poisson_kernel_disk(&[0.3, 0.4], y).unwrap() * y[0] * dl).sum();
        assert_abs_diff_eq!(ext, 0.3, epsilon = 1e-8);
        assert!(poisson_kernel_disk(&[1.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn green_apply_solves_constant_source() {
        let disk = DiskGrid::new(64, 128, 2.0).unwrap();
        let z = green_disk_apply(&[0.0, 0.0], 1.0, &disk, |_, _| 1.0);
        assert_abs_diff_eq!(z, 0.25, epsilon = 1e-14);
        // x' (1 - r^2) / 8 solves -ΔZ = x'_1
        let x = [0.3, -0.2];
        let z = green_disk_apply(&x, x[0], &disk, |_, p| p[0]);
        assert_abs_diff_eq!(z, x[0] * (1.0 - 0.13) / 8.0, epsilon = 1e-5);
    }

    #[test]
    fn kernel_k_reproduces_closed_form_solutions() {
        let g = SphereGrid::new(64, 128).unwrap();
        let disk = DiskGrid::new(64, 128, 2.0).unwrap();
        let x = BallPoint::new([0.2, 0.0, 0.3]).unwrap();
        let k: Vec<f64> = g.nodes.iter().map(|y| kernel_k(&x, y, 16, &disk).unwrap()).collect();
        let one: f64 = pairwise_sum(&k.iter().zip(&g.weights).map(|(a, w)| a * w).collect::<Vec<_>>());
        assert_abs_diff_eq!(one, 0.3, epsilon = 2e-3);
        let yn: f64 = pairwise_sum(
            &k.iter().zip(&g.weights).zip(&g.nodes).map(|((a, w), y)| a * w * y[2]).collect::<Vec<_>>(),
        );
        assert_abs_diff_eq!(yn, 0.09 / 2.0 + (1.0 - 0.04) / 4.0, epsilon = 2e-3);
    }
}
