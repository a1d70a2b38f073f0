//! Writers for the JSON and CSV artifacts.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{BackusError, Result};
use crate::harmonic_ext::Coefficient;
use crate::nonlinear::{BackusSolution, BoundaryData};
use crate::poly::Term;

pub const TRACE_HEADER: [&str; 9] = ["theta", "phi_az", "y1", "y2", "y3", "u", "du_dxN", "grad_norm", "g"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> BackusError {
    BackusError::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

#[derive(Debug, Serialize)]
pub struct SolutionFile<'a> {
    pub mode: &'a str,
    #[serde(rename = "L")]
    pub l_max: usize,
    pub h: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Coefficients of `φ = ∂_{x_N} u - 1` on the sphere.
    pub phi: Vec<Coefficient>,
    /// Monomial terms of `u`.
    pub u: Vec<Term>,
}

impl<'a> SolutionFile<'a> {
    pub fn new(sol: &'a BackusSolution) -> Self {
        Self {
            mode: sol.mode.name(),
            l_max: sol.phi.l_max(),
            h: sol.h,
            converged: sol.report.converged,
            iterations: sol.report.iterations,
            phi: sol.phi.to_list(),
            u: sol.u.to_terms(),
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Table of `u`, `∂_{x_N} u`, `|∇u|` and `g` at the nodes of the `g` grid.
pub fn write_trace_csv(path: &Path, sol: &BackusSolution, g: &BoundaryData) -> Result<()> {
    let grid = g.grid();
    let grad = sol.grad_u();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(TRACE_HEADER).map_err(|e| io_err(path, e))?;
    for ring in 0..grid.n_theta {
        let theta = grid.cos_theta[ring].clamp(-1.0, 1.0).acos();
        for az in 0..grid.n_phi {
            let i = grid.index(ring, az);
            let y = grid.nodes[i];
            let du: Vec<f64> = grad.iter().map(|p| p.eval(&y)).collect();
            let norm = du.iter().map(|d| d * d).sum::<f64>().sqrt();
            let phi_az = grid.azimuths[az].rem_euclid(2.0 * PI);
            let row = [theta, phi_az, y[0], y[1], y[2], sol.u.eval(&y), du[2], norm, g.g.values[i]];
            w.write_record(row.iter().map(|v| fmt(*v))).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}
