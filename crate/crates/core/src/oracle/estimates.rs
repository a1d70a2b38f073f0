//! Numerical checkers for the decay, weighted-integral and
//! gradient-to-Hölder estimates behind the linearized theory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::quadrature::integrate_adaptive;
use crate::error::{BackusError, Result};
use crate::grids::FocusedSphereRule;
use crate::kernels::{hessian_poisson_kernel_ball, third_derivative_poisson_kernel_ball, BallPoint};
use crate::norms::random_ball_point;

/// Radii of the decay probes.
pub const DECAY_RADII: [f64; 3] = [0.9, 0.99, 0.999];

/// Default probe directions (not aligned with grid or coordinate symmetries).
pub fn probe_directions() -> Vec<[f64; 3]> {
    let raw: [[f64; 3]; 6] = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 1.0],
        [-0.3, 0.5, 0.8],
        [0.6, -0.8, 0.1],
        [-0.5, -0.5, -0.7],
    ];
    raw.iter()
        .map(|d| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [d[0] / n, d[1] / n, d[2] / n]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub order: usize,
    pub alpha: f64,
    pub radii: Vec<f64>,
    /// `sup_dir |D^β w(r dir)| (1 - r^2)^{|β| - 1 - α}` per radius.
    pub weighted_sup: Vec<f64>,
    /// Unweighted `sup_dir |D^β w|` per radius.
    pub raw_sup: Vec<f64>,
    /// `max_r weighted_sup(r) / weighted_sup(radii[0])` (0 when the first
    /// value vanishes and all others do too).
    pub growth: f64,
}

fn gradient_fd<F: Fn(&[f64; 3]) -> f64>(f: &F, y: &[f64; 3]) -> [f64; 3] {
    let h = 1e-5;
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut a = *y;
        let mut b = *y;
        a[i] += h;
        b[i] -= h;
        *gi = (f(&a) - f(&b)) / (2.0 * h);
    }
    g
}

/// Frobenius norm of `D^β w(x)`, `|β| ∈ {2, 3}`, for `w` the Poisson
/// extension of `phi`. The linear Taylor polynomial of `phi` at `x/|x|` is
/// subtracted under the integral (its extension has no second derivatives)
/// and the sphere rule is refined toward `x/|x|`.
pub fn poisson_derivative_norm<F>(phi: &F, x: &[f64; 3], order: usize) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> f64 + Sync + Send,
{
    let p = BallPoint::new(*x)?;
    let r = p.norm();
    if !p.is_interior() || r == 0.0 {
        return Err(BackusError::Domain(format!("decay probe at |x| = {r}")));
    }
    let xb = [x[0] / r, x[1] / r, x[2] / r];
    let c = phi(&xb);
    let g = gradient_fd(phi, &xb);
    let remainder = |y: &[f64; 3]| phi(y) - c - g[0] * (y[0] - xb[0]) - g[1] * (y[1] - xb[1]) - g[2] * (y[2] - xb[2]);
    let rule = FocusedSphereRule::new(xb, 1.0 - r, 24, 96)?;
    match order {
        2 => {
            let mut acc = [[0.0; 3]; 3];
            for (y, w) in rule.nodes.iter().zip(&rule.weights) {
                let h = hessian_poisson_kernel_ball(&p, y)?;
                let f = w * remainder(y);
                for i in 0..3 {
                    for j in 0..3 {
                        acc[i][j] += h[i][j] * f;
                    }
                }
            }
            Ok(acc.iter().flatten().map(|v| v * v).sum::<f64>().sqrt())
        }
        3 => {
            let mut acc = [[[0.0; 3]; 3]; 3];
            for (y, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = third_derivative_poisson_kernel_ball(&p, y)?;
                let f = w * remainder(y);
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            acc[i][j][k] += t[i][j][k] * f;
                        }
                    }
                }
            }
            Ok(acc.iter().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt())
        }
        _ => Err(BackusError::InvalidParameter(format!(
            "derivative order must be 2 or 3, got {order}"
        ))),
    }
}

/// Weighted derivative sup along radial probe lines.
pub fn check_derivative_decay<F>(phi: F, order: usize, alpha: f64, radii: &[f64], directions: &[[f64; 3]]) -> Result<DecayReport>
where
    F: Fn(&[f64; 3]) -> f64 + Sync + Send,
{
    if radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(BackusError::Domain("probe radii must lie in (0, 1)".into()));
    }
    let mut weighted_sup = Vec::new();
    let mut raw_sup = Vec::new();
    for r in radii {
        let mut raw = 0.0f64;
        for d in directions {
            let x = [r * d[0], r * d[1], r * d[2]];
            raw = raw.max(poisson_derivative_norm(&phi, &x, order)?);
        }
        raw_sup.push(raw);
        weighted_sup.push(raw * (1.0 - r * r).powf(order as f64 - 1.0 - alpha));
    }
    let first = weighted_sup.first().copied().unwrap_or(0.0);
    let top = weighted_sup.iter().copied().fold(0.0, f64::max);
    let growth = if first > 0.0 {
        top / first
    } else if top == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(DecayReport {
        order,
        alpha,
        radii: radii.to_vec(),
        weighted_sup,
        raw_sup,
        growth,
    })
}

/// `|x_N| (1 - |x|^2)^κ ∫_0^{|x_N|} (1 - |x'|^2 - t^2)^{-1-κ} dt` at `x`.
pub fn integral_lemma_quantity(kappa: f64, x: &[f64; 3]) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(BackusError::InvalidParameter(format!("κ must be positive, got {kappa}")));
    }
    let a = 1.0 - x[0] * x[0] - x[1] * x[1];
    let xn = x[2].abs();
    if !(a > 0.0) || xn * xn >= a {
        return Err(BackusError::Domain("integral lemma needs |x| < 1".into()));
    }
    if xn == 0.0 {
        return Ok(0.0);
    }
    // With t = √a (1 - e^{-τ}) the endpoint layer near t = √a becomes a
    // slowly varying integrand in τ.
    let sa = a.sqrt();
    let tau_end = -(1.0 - xn / sa).ln();
    let integrand = |tau: f64| {
        let gap = sa * (-tau).exp(); // √a - t
        let t = sa - gap;
        gap * ((sa - t) * (sa + t)).powf(-1.0 - kappa)
    };
    let reference = integrand(tau_end) * tau_end.max(1.0);
    let inner = integrate_adaptive(integrand, 0.0, tau_end, 1e-13 * reference);
    // 1 - |x|^2 = a - x_N^2
    Ok(xn * (a - xn * xn).powf(kappa) * inner)
}

/// The lemma quantity at `|x'| = r_prime`, `|x_N| = σ √(1 - r_prime^2)`.
pub fn integral_lemma_at_sigma(kappa: f64, sigma: f64, r_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) || !(0.0..1.0).contains(&r_prime) {
        return Err(BackusError::Domain("σ and |x'| must lie in [0, 1)".into()));
    }
    let xn = sigma * (1.0 - r_prime * r_prime).sqrt();
    integral_lemma_quantity(kappa, &[r_prime, 0.0, xn])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralLemmaReport {
    pub kappa: f64,
    pub values: Vec<f64>,
    pub sup: f64,
    pub limit: f64,
}

pub fn check_integral_lemma(kappa: f64, samples: &[[f64; 3]]) -> Result<IntegralLemmaReport> {
    let values = samples
        .iter()
        .map(|x| integral_lemma_quantity(kappa, x))
        .collect::<Result<Vec<_>>>()?;
    let sup = values.iter().copied().fold(0.0, f64::max);
    Ok(IntegralLemmaReport {
        kappa,
        values,
        sup,
        limit: 0.5 / kappa,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderCheck {
    pub alpha: f64,
    pub gradient_bound: f64,
    /// Largest sampled `|v(a) - v(b)| / |a - b|^α`.
    pub seminorm: f64,
    /// `seminorm / gradient_bound` (0 when the bound is 0).
    pub constant: f64,
}

/// Pair-sampled Hölder quotient of `v` against the certified bound
/// `|∇v(x)| <= M (1 - |x|^2)^{α - 1}`. Half of the pairs are near pairs
/// (`|a - b| <= 0.1`) and half of the points lie in the shell
/// `0.99 <= |x| < 1`.
pub fn check_gradient_to_holder<F>(v: F, gradient_bound: f64, alpha: f64, n_pairs: usize, seed: u64) -> Result<HolderCheck>
where
    F: Fn(&[f64; 3]) -> f64,
{
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BackusError::InvalidParameter(format!("α must lie in (0, 1), got {alpha}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        let x = random_ball_point(rng, 1.0);
        if rng.gen_bool(0.5) {
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
            let r = rng.gen_range(0.99..1.0);
            [x[0] / n * r, x[1] / n * r, x[2] / n * r]
        } else {
            x
        }
    };
    let mut seminorm = 0.0f64;
    for k in 0..n_pairs {
        let a = point(&mut rng);
        let b = if k % 2 == 0 {
            point(&mut rng)
        } else {
            let s = rng.gen_range(1e-4..0.1);
            let d = random_ball_point(&mut rng, s);
            let b = [a[0] + d[0], a[1] + d[1], a[2] + d[2]];
            let n = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            if n >= 1.0 {
                [b[0] / n * 0.999_999, b[1] / n * 0.999_999, b[2] / n * 0.999_999]
            } else {
                b
            }
        };
        let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        if dist == 0.0 {
            continue;
        }
        seminorm = seminorm.max((v(&a) - v(&b)).abs() / dist.powf(alpha));
    }
    Ok(HolderCheck {
        alpha,
        gradient_bound,
        seminorm,
        constant: if gradient_bound > 0.0 { seminorm / gradient_bound } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_lemma_limits() {
        for kappa in [0.5, 1.0, 2.0] {
            let v = integral_lemma_at_sigma(kappa, 0.999, 0.3).unwrap();
            let limit = 0.5 / kappa;
            assert!((v - limit).abs() <= 0.01 * limit, "κ = {kappa}: {v}");
        }
        assert_eq!(integral_lemma_at_sigma(1.0, 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn integral_lemma_matches_closed_form() {
        // κ = 1/2: ∫_0^σ (1 - s^2)^{-3/2} ds = σ / √(1 - σ^2), so the
        // quantity is σ^2 independently of |x'|
        for (sigma, rp) in [(0.3, 0.0), (0.7, 0.5), (0.99, 0.9)] {
            let v = integral_lemma_at_sigma(0.5, sigma, rp).unwrap();
            assert!((v - sigma * sigma).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn decay_of_smooth_and_constant_data() {
        let dirs = probe_directions();
        let r = check_derivative_decay(|y: &[f64; 3]| y[0] * y[2], 2, 0.5, &DECAY_RADII, &dirs).unwrap();
        // D^2 (x_1 x_N) has Frobenius norm √2 everywhere
        for raw in &r.raw_sup {
            assert!((raw - 2f64.sqrt()).abs() < 1e-6, "{raw}");
        }
        assert!(r.growth <= 1.0 + 1e-9);
        let r = check_derivative_decay(|_: &[f64; 3]| 1.0, 2, 0.5, &DECAY_RADII, &dirs).unwrap();
        assert!(r.raw_sup.iter().all(|v| *v < 1e-9));
        let r = check_derivative_decay(|y: &[f64; 3]| y[0] * y[1] * y[2], 3, 0.5, &[0.9, 0.99], &dirs).unwrap();
        // D^3 (x_1 x_2 x_N) has six unit entries
        assert!((r.raw_sup[1] - 6f64.sqrt()).abs() < 1e-5, "{:?}", r.raw_sup);
    }

    #[test]
    fn holder_quotients() {
        let c = check_gradient_to_holder(|x: &[f64; 3]| x[2], 1.0, 0.5, 5000, 3).unwrap();
        assert!(c.seminorm > 0.0 && c.seminorm <= 2f64.powf(0.5));
        let c = check_gradient_to_holder(|_: &[f64; 3]| 4.0, 0.0, 0.5, 1000, 3).unwrap();
        assert_eq!(c.seminorm, 0.0);
        let alpha = 0.5;
        let c = check_gradient_to_holder(
            |x: &[f64; 3]| (1.0 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2]).max(0.0).powf(alpha),
            2.0 * alpha,
            alpha,
            5000,
            3,
        )
        .unwrap();
        assert!(c.seminorm.is_finite() && c.seminorm < 10.0);
    }
}
