//! Independent verification machinery: exact polynomial calculus,
//! manufactured Backus solutions and checkers for the technical estimates.

pub mod estimates;
pub mod quadrature;

use std::sync::Arc;

use crate::error::{BackusError, Result};
use crate::grids::{SphereField, SphereGrid};
use crate::harmonic_ext::{harmonic_defect, project_sphere, HarmonicPoly, SphereExpansion};
use crate::nonlinear::{BoundaryData, DataKind, Mode};
use crate::poly::Poly;

pub use estimates::{
    check_derivative_decay, check_gradient_to_holder, check_integral_lemma, integral_lemma_at_sigma, DecayReport,
    HolderCheck, IntegralLemmaReport,
};

/// Operations of [`poly_calculus`].
#[derive(Debug, Clone, PartialEq)]
pub enum PolyOp {
    Derivative(usize),
    Laplacian,
    IntegrateXnFromZero,
    Evaluate([f64; 3]),
    Multiply(Poly),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolyValue {
    Poly(Poly),
    Scalar(f64),
}

impl PolyValue {
    pub fn into_poly(self) -> Option<Poly> {
        match self {
            PolyValue::Poly(p) => Some(p),
            PolyValue::Scalar(_) => None,
        }
    }

    pub fn into_scalar(self) -> Option<f64> {
        match self {
            PolyValue::Scalar(v) => Some(v),
            PolyValue::Poly(_) => None,
        }
    }
}

/// Exact coefficient arithmetic on `p`.
pub fn poly_calculus(p: &Poly, op: &PolyOp) -> PolyValue {
    match op {
        PolyOp::Derivative(i) => PolyValue::Poly(p.derivative(*i)),
        PolyOp::Laplacian => PolyValue::Poly(p.laplacian()),
        PolyOp::IntegrateXnFromZero => PolyValue::Poly(p.integrate_xn_from_zero()),
        PolyOp::Evaluate(x) => PolyValue::Scalar(p.eval(x)),
        PolyOp::Multiply(q) => PolyValue::Poly(p * q),
    }
}

/// Backus problem with known solution `u = x_N + ε q`.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub q: Poly,
    pub eps: f64,
    pub u_exact: HarmonicPoly,
    pub g: BoundaryData,
    pub mode: Mode,
    /// Equatorial value of `u` (0 in the odd branch).
    pub h: f64,
    /// `∂_{x_N}(ε q)` on `S`, projected to the working degree.
    pub phi_star: SphereExpansion,
    /// Expected sup error of the recovered `u` on `S`.
    pub tolerance: f64,
}

fn is_zonal(q: &Poly) -> bool {
    let scale = q.max_abs_coefficient().max(1.0);
    let pts = [[0.3, -0.2, 0.5], [0.7, 0.1, -0.4], [-0.1, 0.6, 0.2], [0.05, -0.8, -0.3]];
    pts.iter().all(|x| {
        (1..8).all(|k| {
            let a = 0.7 * k as f64;
            let (s, c) = a.sin_cos();
            let y = [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]];
            (q.eval(&y) - q.eval(x)).abs() <= 1e-12 * scale
        })
    })
}

/// Builds the manufactured case `u = x_N + ε q` with `g = |∇u|` sampled on
/// the grid exact to degree `3L`.
pub fn make_manufactured(name: &str, q: &Poly, eps: f64, mode: Mode, l_max: usize) -> Result<ManufacturedCase> {
    if harmonic_defect(q) > 1e-12 {
        return Err(BackusError::Precondition(format!("q is not harmonic (case {name})")));
    }
    match mode {
        Mode::Odd => {
            if q.even_part_xn().max_abs_coefficient() > 0.0 {
                return Err(BackusError::Symmetry(format!("odd case {name} needs q odd in x_N")));
            }
        }
        Mode::Axisymmetric => {
            if !is_zonal(q) {
                return Err(BackusError::Symmetry(format!("axisymmetric case {name} needs zonal q")));
            }
        }
    }
    let u = &Poly::var(2) + &q.scale(eps);
    let u_exact = HarmonicPoly::new(u.clone())?;
    let grad = u.gradient();
    let grid = Arc::new(SphereGrid::for_degree(l_max));
    let g = SphereField::sample(grid.clone(), |y| grad.iter().map(|p| p.eval(y).powi(2)).sum::<f64>().sqrt());
    if let Some(min) = g.values.iter().copied().reduce(f64::min) {
        if !(min > 0.0) {
            return Err(BackusError::Domain(format!("|∇u| vanishes on S for case {name} (eps {eps})")));
        }
    }
    let h = match mode {
        Mode::Odd => 0.0,
        Mode::Axisymmetric => u.eval(&[1.0, 0.0, 0.0]),
    };
    let kind = DataKind::Manufactured { q: q.clone(), eps };
    let g = BoundaryData::new(kind, g, mode.symmetry(), h)?;
    let dv = q.derivative(2).scale(eps);
    let phi_star = project_sphere(&SphereField::sample(grid, |y| dv.eval(y)), l_max)?;
    Ok(ManufacturedCase {
        name: name.to_string(),
        q: q.clone(),
        eps,
        u_exact,
        g,
        mode,
        h,
        phi_star,
        tolerance: match mode {
            Mode::Odd => 1e-6,
            Mode::Axisymmetric => 1e-5,
        },
    })
}

/// `x_1 x_N`, the odd test perturbation.
pub fn odd_test_q() -> Poly {
    Poly::monomial([1, 0, 1], 1.0)
}

/// `x_N^2 - |x'|^2 / 2`, the axisymmetric test perturbation.
pub fn axisymmetric_test_q() -> Poly {
    Poly::from_terms([([0, 0, 2], 1.0), ([2, 0, 0], -0.5), ([0, 2, 0], -0.5)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calculus_examples() {
        let p = Poly::monomial([1, 0, 1], 1.0);
        assert!(poly_calculus(&p, &PolyOp::Laplacian).into_poly().unwrap().is_zero());
        assert_eq!(
            poly_calculus(&p, &PolyOp::IntegrateXnFromZero).into_poly().unwrap(),
            Poly::monomial([1, 0, 2], 0.5)
        );
        let v = Poly::from_terms([([0, 0, 2], 0.5), ([2, 0, 0], -0.25), ([0, 2, 0], -0.25), ([0, 0, 0], 0.25)]);
        assert!(poly_calculus(&v, &PolyOp::Laplacian).into_poly().unwrap().is_zero());
        assert_eq!(poly_calculus(&p, &PolyOp::Evaluate([2.0, 5.0, 3.0])).into_scalar(), Some(6.0));
        assert_eq!(
            poly_calculus(&p, &PolyOp::Multiply(Poly::var(1))).into_poly().unwrap(),
            Poly::monomial([1, 1, 1], 1.0)
        );
        assert_eq!(poly_calculus(&p, &PolyOp::Derivative(0)).into_poly().unwrap(), Poly::var(2));
    }

    #[test]
    fn odd_manufactured_data() {
        let eps = 0.05;
        let c = make_manufactured("odd", &odd_test_q(), eps, Mode::Odd, 8).unwrap();
        for (y, g) in c.g.grid().nodes.iter().zip(&c.g.g.values) {
            let g2 = 1.0 + 2.0 * eps * y[0] + eps * eps * (y[0] * y[0] + y[2] * y[2]);
            assert!((g * g - g2).abs() < 1e-14);
        }
        assert_eq!(c.h, 0.0);
        assert!((c.phi_star.get(1, 1) - eps * (4.0 * std::f64::consts::PI / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn axisymmetric_manufactured_data() {
        let c = make_manufactured("axisym", &axisymmetric_test_q(), 0.05, Mode::Axisymmetric, 8).unwrap();
        assert!((c.h + 0.025).abs() < 1e-15);
        assert!(make_manufactured("bad", &odd_test_q(), 0.05, Mode::Axisymmetric, 8).is_err());
        assert!(make_manufactured("bad", &Poly::monomial([2, 0, 0], 1.0), 0.05, Mode::Odd, 8).is_err());
    }

    #[test]
    fn scaled_laminar_case() {
        let c = make_manufactured("scaled", &Poly::var(2), 0.3, Mode::Odd, 4).unwrap();
        assert!(c.g.g.values.iter().all(|g| (g - 1.3).abs() < 1e-15));
        assert_eq!(c.u_exact.poly(), &Poly::monomial([0, 0, 1], 1.3));
        assert!(matches!(
            make_manufactured("degenerate", &Poly::var(2), -1.0, Mode::Odd, 4),
            Err(BackusError::Domain(_))
        ));
    }
}
