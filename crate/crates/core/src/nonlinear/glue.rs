/// `e^{-1/t}` for `t > 0`, zero otherwise.
fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step, exactly 0 for `t <= 0` and exactly 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Even cut-off: 1 for `|t| <= 1/3`, 0 for `|t| >= 2/3`, smooth and
/// monotone in between.
pub fn cutoff_eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 / 3.0 {
        1.0
    } else if a >= 2.0 / 3.0 {
        0.0
    } else {
        1.0 - smooth_step(3.0 * a - 1.0)
    }
}

/// `J[f](x) = η(x_N) f(√(1 - x_N^2) e_1, x_N) + (1 - η(x_N)) f(x)`.
pub fn glue_j<F>(field: F) -> impl Fn(&[f64; 3]) -> f64
where
    F: Fn(&[f64; 3]) -> f64,
{
    move |x: &[f64; 3]| {
        let eta = cutoff_eta(x[2]);
        let own = field(x);
        if eta == 0.0 {
            return own;
        }
        let meridian = [(1.0 - x[2] * x[2]).max(0.0).sqrt(), 0.0, x[2]];
        eta * field(&meridian) + (1.0 - eta) * own
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_symmetry() {
        assert_eq!(cutoff_eta(0.2), 1.0);
        assert_eq!(cutoff_eta(1.0 / 3.0), 1.0);
        assert_eq!(cutoff_eta(0.9), 0.0);
        assert_eq!(cutoff_eta(-2.0 / 3.0), 0.0);
        let m = cutoff_eta(0.5);
        assert!(m > 0.0 && m < 1.0);
        assert_eq!(m, cutoff_eta(-0.5));
        // the smooth step is antisymmetric about its midpoint
        assert!((m - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let t = 1.0 / 3.0 + k as f64 / 300.0;
            let v = cutoff_eta(t);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn glue_examples() {
        let j = glue_j(|x| x[2] * x[2] - 0.5 * x[2]);
        for x in [[0.1, 0.2, 0.3], [0.0, 0.0, -0.9], [0.5, -0.5, 0.5]] {
            assert_eq!(j(&x), x[2] * x[2] - 0.5 * x[2]);
        }
        let j = glue_j(|x| x[0]);
        assert_eq!(j(&[0.3, 0.4, 0.0]), 1.0);
        assert_eq!(j(&[-0.7, 0.1, 0.0]), 1.0);
    }

    #[test]
    fn glue_fixes_axisymmetric_fields_on_the_sphere() {
        let f = |x: &[f64; 3]| 1.0 + x[0] * x[0] + x[1] * x[1] + 0.3 * x[2];
        let j = glue_j(f);
        for k in 0..200 {
            let t = -1.0 + 2.0 * (k as f64 + 0.5) / 200.0;
            let a = 0.7 * k as f64;
            let s = (1.0 - t * t).sqrt();
            let y = [s * a.cos(), s * a.sin(), t];
            assert!((j(&y) - f(&y)).abs() < 1e-10);
        }
    }
}
