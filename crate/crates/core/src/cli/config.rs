//! JSON run configuration and resolution of the boundary modulus `g`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::disk_poisson::FourierSeries;
use crate::error::{BackusError, Result};
use crate::grids::{SphereField, SphereGrid};
use crate::harmonic_ext::{Coefficient, SphereExpansion};
use crate::linearized::KernelOptions;
use crate::nonlinear::{BoundaryData, DataKind, FixedPointConfig, Mode};
use crate::oracle::make_manufactured;
use crate::poly::{Poly, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Linearized,
    Verify,
    Estimates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Odd,
    Axisym,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Odd => Mode::Odd,
            ModeName::Axisym => Mode::Axisymmetric,
        }
    }
}

/// Source of the boundary modulus `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GSpec {
    Constant { value: f64 },
    /// `g = |∇(x_N + eps q)|` on the sphere; fixes `h` in the
    /// axisymmetric branch.
    Manufactured { q: Vec<Term>, eps: f64 },
    /// Real spherical-harmonic coefficients of `g`.
    Coefficients { coefficients: Vec<Coefficient> },
    /// CSV of `theta,phi_az,g` rows on a regular lattice.
    Tabulated { path: PathBuf },
}

impl Default for GSpec {
    fn default() -> Self {
        GSpec::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub sphere_theta: usize,
    pub sphere_phi: usize,
    pub disk_r: usize,
    pub disk_phi: usize,
    pub disk_grading: f64,
    pub segment_nodes: usize,
    pub rim_samples: usize,
    pub boundary_eps: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let k = KernelOptions::default();
        Self {
            sphere_theta: k.sphere_theta,
            sphere_phi: k.sphere_phi,
            disk_r: k.disk_r,
            disk_phi: k.disk_phi,
            disk_grading: k.disk_grading,
            segment_nodes: k.segment_nodes,
            rim_samples: k.rim_samples,
            boundary_eps: k.boundary_eps,
        }
    }
}

impl GridConfig {
    pub fn kernel_options(&self) -> KernelOptions {
        KernelOptions {
            sphere_theta: self.sphere_theta,
            sphere_phi: self.sphere_phi,
            disk_r: self.disk_r,
            disk_phi: self.disk_phi,
            disk_grading: self.disk_grading,
            segment_nodes: self.segment_nodes,
            rim_samples: self.rim_samples,
            boundary_eps: self.boundary_eps,
        }
    }
}

impl LinearizedConfig {
    pub fn psi_series(&self) -> FourierSeries {
        let order = self.psi_cos.len().saturating_sub(1).max(self.psi_sin.len());
        let mut s = FourierSeries::zeros(order);
        for (i, c) in self.psi_cos.iter().enumerate() {
            s.cos[i] = *c;
        }
        for (i, b) in self.psi_sin.iter().enumerate() {
            s.sin[i + 1] = *b;
        }
        s
    }
}

/// Data of the `linearized` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizedConfig {
    /// Spherical-harmonic coefficients of `φ`.
    pub phi: Vec<Coefficient>,
    /// Cosine coefficients `a_0, a_1, ...` of `ψ` on the rim.
    pub psi_cos: Vec<f64>,
    /// Sine coefficients `b_1, b_2, ...` of `ψ`.
    pub psi_sin: Vec<f64>,
    /// Number of interior points compared against the kernel path.
    pub probes: usize,
}

impl Default for LinearizedConfig {
    fn default() -> Self {
        Self {
            phi: vec![Coefficient {
                l: 1,
                m: 0,
                value: (4.0 * std::f64::consts::PI / 3.0).sqrt(),
            }],
            psi_cos: vec![0.0],
            psi_sin: Vec::new(),
            probes: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip)]
    pub command: Option<Command>,
    pub dimension: usize,
    #[serde(rename = "L")]
    pub l_max: usize,
    pub grid: GridConfig,
    pub alpha: f64,
    pub mode: ModeName,
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub lambda: f64,
    pub delta_threshold: f64,
    pub g: GSpec,
    pub linearized: LinearizedConfig,
    pub pairs: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fp = FixedPointConfig::default();
        Self {
            command: None,
            dimension: 3,
            l_max: fp.l_max,
            grid: GridConfig::default(),
            alpha: fp.alpha,
            mode: ModeName::Odd,
            h: 0.0,
            tol: fp.tol,
            max_iter: fp.max_iter,
            lambda: fp.lambda,
            delta_threshold: fp.delta_threshold,
            g: GSpec::default(),
            linearized: LinearizedConfig::default(),
            pairs: fp.pairs,
            seed: fp.seed,
            out: None,
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(BackusError::Config(msg.into()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BackusError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackusError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 3 {
            return config_err(format!("only dimension 3 is supported, got {}", self.dimension));
        }
        if self.l_max < 1 {
            return config_err("L must be at least 1");
        }
        if self.l_max > 24 {
            return config_err(format!("L = {} exceeds the supported maximum 24", self.l_max));
        }
        if !(self.tol > 0.0) {
            return config_err(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return config_err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.max_iter == 0 {
            return config_err("max_iter must be positive");
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return config_err(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !self.h.is_finite() || !(self.delta_threshold > 0.0) {
            return config_err("h must be finite and delta_threshold positive");
        }
        if self.pairs == 0 {
            return config_err("pairs must be positive");
        }
        let k = self.grid.kernel_options();
        if k.sphere_theta < 2 || k.sphere_phi < 4 || k.disk_r < 2 || k.disk_phi < 4 || k.segment_nodes == 0 || k.rim_samples < 4 {
            return config_err("grid sizes too small");
        }
        if !(k.disk_grading >= 1.0) || !(k.boundary_eps > 0.0 && k.boundary_eps < 0.25) {
            return config_err("disk_grading must be >= 1 and boundary_eps in (0, 0.25)");
        }
        if self.linearized.psi_cos.iter().chain(&self.linearized.psi_sin).any(|v| !v.is_finite()) {
            return config_err("ψ coefficients must be finite");
        }
        for c in &self.linearized.phi {
            if c.l > self.l_max || c.m.unsigned_abs() as usize > c.l {
                return config_err(format!("φ coefficient (l={}, m={}) outside degree L = {}", c.l, c.m, self.l_max));
            }
        }
        Ok(())
    }

    pub fn fixed_point_config(&self) -> FixedPointConfig {
        FixedPointConfig {
            l_max: self.l_max,
            tol: self.tol,
            max_iter: self.max_iter,
            lambda: self.lambda,
            delta_threshold: self.delta_threshold,
            alpha: self.alpha,
            pairs: self.pairs,
            seed: self.seed,
            init: None,
        }
    }

    /// Resolves `g` on the grid exact to degree `3L`.
    /// Every failure is reported as a configuration error.
    pub fn boundary_data(&self) -> Result<BoundaryData> {
        resolve_g(&self.g, self.mode.into(), self.h, self.l_max).map_err(|e| match e {
            BackusError::Config(m) => BackusError::Config(m),
            other => BackusError::Config(format!("g: {other}")),
        })
    }
}

fn resolve_g(spec: &GSpec, mode: Mode, h: f64, l_max: usize) -> Result<BoundaryData> {
    let grid = Arc::new(SphereGrid::for_degree(l_max));
    let symmetry = mode.symmetry();
    match spec {
        GSpec::Constant { value } => BoundaryData::constant(*value, grid, symmetry, h),
        GSpec::Manufactured { q, eps } => {
            let q = Poly::from_term_list(q);
            Ok(make_manufactured("config", &q, *eps, mode, l_max)?.g)
        }
        GSpec::Coefficients { coefficients } => {
            let deg = coefficients.iter().map(|c| c.l).max().unwrap_or(0);
            let e = SphereExpansion::from_list(deg, coefficients)?;
            let values = e.evaluate_on(&grid);
            BoundaryData::new(DataKind::Coefficients, SphereField::new(grid, values)?, symmetry, h)
        }
        GSpec::Tabulated { path } => {
            let table = Table::read(path)?;
            let mut values: Vec<f64> = grid.nodes.iter().map(|y| table.interpolate(y)).collect();
            symmetrize(&grid, &mut values, mode)?;
            BoundaryData::new(DataKind::Tabulated, SphereField::new(grid, values)?, symmetry, h)
        }
    }
}

/// Largest relative asymmetry of tabulated data accepted as interpolation
/// noise before it is averaged out.
const TABLE_ASYMMETRY_TOL: f64 = 1e-3;

fn symmetrize(grid: &SphereGrid, values: &mut [f64], mode: Mode) -> Result<()> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut worst = 0.0f64;
    match mode {
        Mode::Odd => {
            for i in 0..grid.len() {
                let j = grid.mirror_index(i);
                if j > i {
                    let avg = 0.5 * (values[i] + values[j]);
                    worst = worst.max((values[i] - avg).abs());
                    values[i] = avg;
                    values[j] = avg;
                }
            }
        }
        Mode::Axisymmetric => {
            for ring in 0..grid.n_theta {
                let start = grid.index(ring, 0);
                let slice = &mut values[start..start + grid.n_phi];
                let avg = slice.iter().sum::<f64>() / grid.n_phi as f64;
                for v in slice.iter_mut() {
                    worst = worst.max((*v - avg).abs());
                    *v = avg;
                }
            }
        }
    }
    if worst > TABLE_ASYMMETRY_TOL * scale {
        return config_err(format!(
            "tabulated g deviates from the {} symmetry by {worst:e}",
            mode.name()
        ));
    }
    Ok(())
}

/// Regular `(theta, phi_az)` lattice of tabulated `g` values.
#[derive(Debug, Clone)]
struct Table {
    thetas: Vec<f64>,
    phis: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct Row {
    theta: f64,
    phi_az: f64,
    g: f64,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| BackusError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for r in reader.deserialize::<Row>() {
            let r = r.map_err(|e| BackusError::Config(format!("{}: {e}", path.display())))?;
            if !(r.theta.is_finite() && r.phi_az.is_finite() && r.g.is_finite()) {
                return config_err(format!("{}: non-finite entry", path.display()));
            }
            rows.push(r);
        }
        let mut thetas: Vec<f64> = rows.iter().map(|r| r.theta).collect();
        let mut phis: Vec<f64> = rows.iter().map(|r| r.phi_az.rem_euclid(2.0 * std::f64::consts::PI)).collect();
        for v in [&mut thetas, &mut phis] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        if thetas.len() < 2 || phis.is_empty() || thetas.len() * phis.len() != rows.len() {
            return config_err(format!(
                "{}: rows do not form a regular theta x phi_az lattice",
                path.display()
            ));
        }
        let mut values = vec![f64::NAN; rows.len()];
        for r in &rows {
            let i = thetas.partition_point(|t| *t < r.theta);
            let j = phis.partition_point(|p| *p < r.phi_az.rem_euclid(2.0 * std::f64::consts::PI));
            values[i * phis.len() + j] = r.g;
        }
        if values.iter().any(|v| v.is_nan()) {
            return config_err(format!("{}: duplicate lattice points", path.display()));
        }
        Ok(Self { thetas, phis, values })
    }

    /// Bilinear in `(theta, phi_az)`, periodic in azimuth, clamped in theta.
    fn interpolate(&self, y: &[f64; 3]) -> f64 {
        let theta = y[2].clamp(-1.0, 1.0).acos();
        let phi = y[1].atan2(y[0]).rem_euclid(2.0 * std::f64::consts::PI);
        let np = self.phis.len();
        let at = |i: usize, j: usize| self.values[i * np + j];
        let (i0, i1, ft) = bracket(&self.thetas, theta);
        let row = |i: usize| {
            if np == 1 {
                return at(i, 0);
            }
            let j1 = self.phis.partition_point(|p| *p <= phi);
            let (ja, jb, pa, pb) = if j1 == 0 || j1 == np {
                let pa = self.phis[np - 1];
                let pb = self.phis[0] + 2.0 * std::f64::consts::PI;
                let p = if phi < self.phis[0] { phi + 2.0 * std::f64::consts::PI } else { phi };
                return lerp(at(i, np - 1), at(i, 0), (p - pa) / (pb - pa));
            } else {
                (j1 - 1, j1, self.phis[j1 - 1], self.phis[j1])
            };
            lerp(at(i, ja), at(i, jb), (phi - pa) / (pb - pa))
        };
        lerp(row(i0), row(i1), ft)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}

fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
    if x <= xs[0] {
        return (0, 0, 0.0);
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    (i, i + 1, (x - xs[i]) / (xs[i + 1] - xs[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let parsed = RunConfig::from_json("{}").unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            r#"{"dimension": 4}"#,
            r#"{"tol": 0.0}"#,
            r#"{"alpha": 1.0}"#,
            r#"{"L": 0}"#,
        ] {
            let c = RunConfig::from_json(text).unwrap();
            assert!(matches!(c.validate(), Err(BackusError::Config(_))), "{text}");
        }
        assert!(RunConfig::from_json(r#"{"g": {"kind": "bogus"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"unknown_field": 1}"#).is_err());
    }

    #[test]
    fn resolves_g_sources() {
        let c = RunConfig::from_json(
            r#"{"L": 4, "g": {"kind": "manufactured", "q": [{"exponents": [1, 0, 1], "coefficient": 1.0}], "eps": 0.05}}"#,
        )
        .unwrap();
        let g = c.boundary_data().unwrap();
        assert!(g.g.values.iter().all(|v| (v - 1.0).abs() < 0.06));
        let c = RunConfig::from_json(r#"{"g": {"kind": "constant", "value": -1.0}}"#).unwrap();
        assert!(matches!(c.boundary_data(), Err(BackusError::Config(_))));
        let c = RunConfig::from_json(r#"{"L": 4, "g": {"kind": "coefficients", "coefficients": [{"l": 0, "m": 0, "value": 3.5449077018110318}]}}"#).unwrap();
        let g = c.boundary_data().unwrap();
        assert!(g.g.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn tabulated_g() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "theta,phi_az,g").unwrap();
        for i in 0..=20 {
            for j in 0..16 {
                let t = std::f64::consts::PI * i as f64 / 20.0;
                let p = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
                writeln!(f, "{t},{p},{}", 1.0 + 0.01 * t.cos().powi(2)).unwrap();
            }
        }
        drop(f);
        let spec = GSpec::Tabulated { path: path.clone() };
        let g = resolve_g(&spec, Mode::Odd, 0.0, 4).unwrap();
        for (y, v) in g.grid().nodes.iter().zip(&g.g.values) {
            assert!((v - (1.0 + 0.01 * y[2] * y[2])).abs() < 1e-4);
        }
        std::fs::write(&path, "theta,phi_az,g\n0,0,1\n1,0,1\n0.5,1,1\n").unwrap();
        assert!(matches!(resolve_g(&spec, Mode::Odd, 0.0, 4), Err(BackusError::Config(_))));
    }
}
