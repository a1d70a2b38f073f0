//! Real orthonormal spherical harmonics, numerically on the sphere and as
//! solid-harmonic polynomials in the ball.
//!
//! `Y_lm = N_lm P_l^{|m|}(cos θ) · {1, √2 cos(mφ), √2 sin(|m|φ)}` for
//! `m = 0, m > 0, m < 0`, with `P_l^m` carrying no Condon–Shortley phase.
//! The solid harmonic `r^l Y_lm` is
//! `N_lm A_l^{|m|}(x_N, r^2) · {Re, Im}(x_1 + i x_2)^{|m|}`, where
//! `A_l^m = r^{l-m} P_l^{(m)}(x_N / r)` obeys
//! `(l - m) A_l^m = (2l - 1) x_N A_{l-1}^m - (l + m - 1) r^2 A_{l-2}^m`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::poly::Poly;

/// Flat index of `(l, m)`, `|m| <= l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`lm_index`].
pub fn lm_from_index(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    (l, idx as i64 - (l * l + l) as i64)
}

pub fn num_coefficients(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// `q_l^m(t) = sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(t)` for `0 <= m <= l <= l_max`,
/// stored at `l * (l + 1) / 2 + m`.
pub fn normalized_legendre(l_max: usize, t: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut q = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let s = (1.0 - t * t).max(0.0).sqrt();
    q[0] = (0.25 / PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            q[idx(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * q[idx(m - 1, m - 1)];
        }
        if m < l_max {
            q[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * t * q[idx(m, m)];
        }
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            q[idx(l, m)] = a * (t * q[idx(l - 1, m)] - b * q[idx(l - 2, m)]);
        }
    }
    q
}

/// Values of all `Y_lm` at a unit vector, in [`lm_index`] order.
pub fn real_sph_harmonics(l_max: usize, y: &[f64; 3]) -> Vec<f64> {
    let t = y[2].clamp(-1.0, 1.0);
    let phi = y[1].atan2(y[0]);
    let q = normalized_legendre(l_max, t);
    let mut out = vec![0.0; num_coefficients(l_max)];
    let sqrt2 = 2f64.sqrt();
    for l in 0..=l_max {
        let base = l * (l + 1) / 2;
        out[lm_index(l, 0)] = q[base];
        for m in 1..=l {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            out[lm_index(l, m as i64)] = sqrt2 * q[base + m] * cm;
            out[lm_index(l, -(m as i64))] = sqrt2 * q[base + m] * sm;
        }
    }
    out
}

/// `N_lm` including the `√2` of the real basis.
pub fn normalization(l: usize, m: usize) -> f64 {
    // (l-m)!/(l+m)! as a running product
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    let n = ((2.0 * l as f64 + 1.0) / (4.0 * PI) * ratio).sqrt();
    if m == 0 {
        n
    } else {
        n * 2f64.sqrt()
    }
}

fn build_solid_harmonics(l_max: usize) -> Vec<Poly> {
    let x = Poly::var(0);
    let y = Poly::var(1);
    let z = Poly::var(2);
    let r2 = &(&x.square() + &y.square()) + &z.square();

    // Re / Im of (x + iy)^m
    let mut re = vec![Poly::constant(1.0)];
    let mut im = vec![Poly::zero()];
    for m in 1..=l_max {
        let c = &(&x * &re[m - 1]) - &(&y * &im[m - 1]);
        let s = &(&x * &im[m - 1]) + &(&y * &re[m - 1]);
        re.push(c);
        im.push(s);
    }

    let mut out = vec![Poly::zero(); num_coefficients(l_max)];
    let mut double_factorial = 1.0; // (2m - 1)!!
    for m in 0..=l_max {
        if m > 0 {
            double_factorial *= (2 * m - 1) as f64;
        }
        let mut prev2 = Poly::zero();
        let mut prev1 = Poly::constant(double_factorial);
        for l in m..=l_max {
            let a = if l == m {
                prev1.clone()
            } else {
                let lf = l as f64;
                let mf = m as f64;
                let t1 = (&z * &prev1).scale((2.0 * lf - 1.0) / (lf - mf));
                let t2 = (&r2 * &prev2).scale((lf + mf - 1.0) / (lf - mf));
                let next = &t1 - &t2;
                prev2 = std::mem::replace(&mut prev1, next.clone());
                next
            };
            let n = normalization(l, m);
            out[lm_index(l, m as i64)] = (&a * &re[m]).scale(n);
            if m > 0 {
                out[lm_index(l, -(m as i64))] = (&a * &im[m]).scale(n);
            }
        }
    }
    out
}

/// Cached solid harmonics `r^l Y_lm` up to degree `l_max`.
pub fn solid_harmonics(l_max: usize) -> Arc<Vec<Poly>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Poly>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("solid harmonic cache poisoned");
    guard
        .entry(l_max)
        .or_insert_with(|| Arc::new(build_solid_harmonics(l_max)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::SphereGrid;

    #[test]
    fn index_round_trip() {
        for l in 0..10 {
            for m in -(l as i64)..=(l as i64) {
                assert_eq!(lm_from_index(lm_index(l, m)), (l, m));
            }
        }
        assert_eq!(lm_index(0, 0), 0);
        assert_eq!(lm_index(1, -1), 1);
        assert_eq!(lm_index(1, 1), 3);
    }

    #[test]
    fn low_degree_closed_forms() {
        let y = [0.48, 0.6, 0.64];
        let v = real_sph_harmonics(2, &y);
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((v[lm_index(0, 0)] - (0.25 / PI).sqrt()).abs() < 1e-15);
        assert!((v[lm_index(1, 0)] - c1 * y[2]).abs() < 1e-15);
        assert!((v[lm_index(1, 1)] - c1 * y[0]).abs() < 1e-15);
        assert!((v[lm_index(1, -1)] - c1 * y[1]).abs() < 1e-15);
        let c2 = (15.0 / (4.0 * PI)).sqrt();
        assert!((v[lm_index(2, -2)] - c2 * y[0] * y[1]).abs() < 1e-14);
        assert!((v[lm_index(2, 1)] - c2 * y[0] * y[2]).abs() < 1e-14);
    }

    #[test]
    fn discrete_orthonormality() {
        let l_max = 8;
        let g = SphereGrid::new(l_max + 1, 2 * l_max + 2).unwrap();
        let vals: Vec<Vec<f64>> = g.nodes.iter().map(|y| real_sph_harmonics(l_max, y)).collect();
        let n = num_coefficients(l_max);
        for a in 0..n {
            for b in 0..n {
                let ip: f64 = vals.iter().zip(&g.weights).map(|(v, w)| w * v[a] * v[b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({a},{b}) -> {ip}");
            }
        }
    }

    #[test]
    fn solid_harmonics_are_harmonic_and_match_surface_values() {
        let l_max = 10;
        let basis = solid_harmonics(l_max);
        let pts = [[0.48, 0.6, 0.64], [0.0, 0.0, 1.0], [-0.6, 0.0, -0.8], [0.36, -0.48, 0.8]];
        for (idx, p) in basis.iter().enumerate() {
            let (l, _) = lm_from_index(idx);
            assert_eq!(p.degree() as usize, l);
            let lap = p.laplacian().max_abs_coefficient();
            assert!(lap <= 1e-12 * p.max_abs_coefficient().max(1.0), "idx {idx}: {lap}");
            for y in &pts {
                let num = real_sph_harmonics(l_max, y)[idx];
                assert!((p.eval(y) - num).abs() < 1e-11, "idx {idx}");
            }
        }
    }
}
