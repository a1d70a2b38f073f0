//! Sampled Hölder-norm surrogates on the closed ball.
//!
//! Suprema are taken over a fixed point cloud (product-grid sphere nodes plus
//! seeded random interior points); Hölder quotients over seeded random pairs
//! from the same cloud.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BackusError, Result};
use crate::grids::SphereGrid;
use crate::poly::Poly;

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_PAIRS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

const INTERIOR_POINTS: usize = 512;

#[derive(Debug, Clone)]
pub struct HolderMonitor {
    pub alpha: f64,
    pub points: Vec<[f64; 3]>,
    pub pairs: Vec<(usize, usize)>,
}

/// Uniform sample of the open ball of radius `radius`.
pub fn random_ball_point<R: Rng>(rng: &mut R, radius: f64) -> [f64; 3] {
    loop {
        let x = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 1.0 {
            return [x[0] * radius, x[1] * radius, x[2] * radius];
        }
    }
}

impl HolderMonitor {
    pub fn new(alpha: f64, n_pairs: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(BackusError::InvalidParameter(format!(
                "Hölder exponent must lie in (0, 1), got {alpha}"
            )));
        }
        let grid = SphereGrid::new(12, 24)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = grid.nodes.clone();
        for _ in 0..INTERIOR_POINTS {
            points.push(random_ball_point(&mut rng, 1.0));
        }
        let n = points.len();
        let mut pairs = Vec::with_capacity(n_pairs);
        while pairs.len() < n_pairs {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                pairs.push((a, b));
            }
        }
        Ok(Self { alpha, points, pairs })
    }

    pub fn with_defaults(seed: u64) -> Self {
        Self::new(DEFAULT_ALPHA, DEFAULT_PAIRS, seed).expect("default Hölder monitor parameters are valid")
    }

    pub fn sup<F: Fn(&[f64; 3]) -> f64>(&self, f: F) -> f64 {
        self.points.iter().map(|x| f(x).abs()).fold(0.0, f64::max)
    }

    /// Largest `|f(a) - f(b)| / |a - b|^α` over the sampled pairs.
    pub fn seminorm<F: Fn(&[f64; 3]) -> f64>(&self, f: F) -> f64 {
        let vals: Vec<f64> = self.points.iter().map(&f).collect();
        self.seminorm_of_values(&vals)
    }

    fn seminorm_of_values(&self, vals: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|(a, b)| {
                let (p, q) = (&self.points[*a], &self.points[*b]);
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                (vals[*a] - vals[*b]).abs() / d.powf(self.alpha)
            })
            .fold(0.0, f64::max)
    }

    /// `|p|_0 + [p]_α`.
    pub fn norm_alpha(&self, p: &Poly) -> f64 {
        self.sup(|x| p.eval(x)) + self.seminorm(|x| p.eval(x))
    }

    /// `|p|_0 + Σ_i |∂_i p|_0 + Σ_i [∂_i p]_α`.
    pub fn norm_1_alpha(&self, p: &Poly) -> f64 {
        let mut total = self.sup(|x| p.eval(x));
        for d in p.gradient() {
            total += self.norm_alpha(&d);
        }
        total
    }
}
