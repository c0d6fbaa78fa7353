//! Picard iteration of the integral solution map on a fixed time grid.

use super::{dtilde_distance, rhs, CoupledState, Diagnostics, Model, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{EdgeField, VertexDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub horizon: f64,
    /// Grid spacing; the grid has `round(horizon / dt)` intervals.
    pub dt: f64,
    pub max_iters: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub iterations: usize,
    pub converged: bool,
    /// `d̃_∞` between consecutive iterates.
    pub distances: Vec<f64>,
    /// `distances[k+1] / distances[k]`.
    pub ratios: Vec<f64>,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Iterates `(r, η) ↦ (r₀ + ∫ ∂ₜr, η₀ + ∫ (ω − η))` starting from the constant
/// curve, with cumulative trapezoid quadrature.
pub fn picard_solve(model: &Model, init: &CoupledState, opts: &PicardOptions) -> Result<(Trajectory, ContractionReport)> {
    if !(opts.horizon > 0.0 && opts.dt > 0.0 && opts.dt <= opts.horizon) {
        return Err(Error::InvalidInput(format!(
            "need 0 < dt <= horizon, got dt = {}, horizon = {}",
            opts.dt, opts.horizon
        )));
    }
    if opts.max_iters == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("max_iters must be >= 1 and tol > 0".into()));
    }
    init.eta.require_symmetric()?;
    let steps = ((opts.horizon / opts.dt).round() as usize).max(1);
    let h = opts.horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| init.t + k as f64 * h).collect();

    let mut current = Trajectory {
        states: times
            .iter()
            .map(|&t| CoupledState {
                t,
                ..init.clone()
            })
            .collect(),
        diagnostics: Vec::new(),
    };
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut streak = 0;
    let mut converged = false;

    for _ in 0..opts.max_iters {
        let next = apply_solution_map(model, init, &current, h)?;
        let d = dtilde_distance(&current, &next, &model.mu)?;
        if let Some(prev) = distances.last().copied() {
            let ratio = if prev > 0.0 { d / prev } else { 0.0 };
            ratios.push(ratio);
            streak = if ratio >= 1.0 { streak + 1 } else { 0 };
        }
        distances.push(d);
        current = next;
        if d < opts.tol {
            converged = true;
            break;
        }
        if streak >= 3 {
            return Err(Error::HorizonTooLong {
                horizon: opts.horizon,
                ratios,
            });
        }
    }

    current.diagnostics = current.states.iter().map(|s| Diagnostics::of(s, &model.mu)).collect();
    let report = ContractionReport {
        iterations: distances.len(),
        converged,
        distances,
        ratios,
    };
    Ok((current, report))
}

fn apply_solution_map(model: &Model, init: &CoupledState, curve: &Trajectory, h: f64) -> Result<Trajectory> {
    let integrands = curve
        .states
        .iter()
        .map(|s| rhs(model, s))
        .collect::<Result<Vec<(VertexDensity, EdgeField)>>>()?;
    let mut states = Vec::with_capacity(curve.len());
    let mut r = init.r.clone();
    let mut eta = init.eta.clone();
    states.push(CoupledState {
        r: r.clone(),
        eta: eta.clone(),
        t: curve.states[0].t,
    });
    for k in 1..curve.len() {
        let (ra, ea) = &integrands[k - 1];
        let (rb, eb) = &integrands[k];
        r = r.axpy(0.5 * h, ra).axpy(0.5 * h, rb);
        eta = eta.axpy(0.5 * h, ea).axpy(0.5 * h, eb);
        if !(r.is_finite() && eta.is_finite()) {
            return Err(Error::BlowUp {
                t: curve.states[k].t,
                detail: "non-finite Picard iterate".into(),
            });
        }
        states.push(CoupledState {
            r: r.clone(),
            eta: eta.clone(),
            t: curve.states[k].t,
        });
    }
    Ok(Trajectory {
        states,
        diagnostics: Vec::new(),
    })
}
