//! Time integration of the coupled mass / edge-weight system.

mod picard;

pub use picard::{picard_solve, ContractionReport, PicardOptions};

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::fields::{omega_eval, OmegaSpec, VelocitySpec};
use crate::graph::{BaseMeasure, EdgeField, Symmetry, VertexDensity};
use crate::interpolation::FluxInterpolation;

/// Everything that defines the right-hand side apart from the state.
#[derive(Debug, Clone)]
pub struct Model {
    pub mu: BaseMeasure,
    pub flux: FluxInterpolation,
    pub velocity: VelocitySpec,
    pub omega: OmegaSpec,
}

/// The unknowns `(r, η)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub r: VertexDensity,
    pub eta: EdgeField,
    pub t: f64,
}

impl CoupledState {
    pub fn new(r: VertexDensity, eta: EdgeField, t: f64) -> Result<Self> {
        check_len(r.len(), eta.n())?;
        eta.require_symmetric()?;
        if !r.is_finite() || !eta.is_finite() || !t.is_finite() {
            return Err(Error::InvalidInput("initial state is not finite".into()));
        }
        Ok(Self { r, eta, t })
    }

    fn is_finite(&self) -> bool {
        self.r.is_finite() && self.eta.is_finite()
    }
}

/// `−Σ_{j≠i} Φ(r_i, r_j; V_ij) η_ij m_j` for every vertex.
fn drift(flux: &FluxInterpolation, mu: &BaseMeasure, r: &[f64], v: &EdgeField, eta: &EdgeField) -> VertexDensity {
    let n = r.len();
    let m = mu.weights();
    let out = (0..n)
        .map(|i| {
            let (vi, ei) = (v.row(i), eta.row(i));
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    acc += flux.apply(r[i], r[j], vi[j]) * ei[j] * m[j];
                }
            }
            -acc
        })
        .collect::<Vec<_>>();
    VertexDensity(out)
}

impl Model {
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    fn velocity(&self, r: &VertexDensity) -> Result<EdgeField> {
        self.velocity.evaluate(r, &self.mu)
    }

    fn omega(&self, r: &VertexDensity) -> Result<EdgeField> {
        omega_eval(&self.omega, r, &self.mu)
    }

    fn dr(&self, r: &VertexDensity, eta: &EdgeField) -> Result<VertexDensity> {
        let v = self.velocity(r)?;
        Ok(drift(&self.flux, &self.mu, r, &v, eta))
    }

    fn check_state(&self, state: &CoupledState) -> Result<()> {
        check_len(self.n(), state.r.len())?;
        check_len(self.n(), state.eta.n())
    }
}

/// Right-hand side `(∂ₜr, ∂ₜη)` of the coupled system.
pub fn rhs(model: &Model, state: &CoupledState) -> Result<(VertexDensity, EdgeField)> {
    model.check_state(state)?;
    let dr = model.dr(&state.r, &state.eta)?;
    let deta = model.omega(&state.r)?.axpy(-1.0, &state.eta);
    Ok((dr, deta))
}

fn blow_up(t: f64, detail: impl Into<String>) -> Error {
    Error::BlowUp { t, detail: detail.into() }
}

fn finite_stage(t: f64, stage: usize, r: &VertexDensity, eta: &EdgeField) -> Result<()> {
    if r.is_finite() && eta.is_finite() {
        Ok(())
    } else {
        Err(blow_up(t, format!("non-finite value in stage {stage}")))
    }
}

/// One classical RK4 step on the concatenated `(r, η)` system.
pub fn step_rk4(model: &Model, state: &CoupledState, dt: f64) -> Result<CoupledState> {
    require_dt(dt)?;
    model.check_state(state)?;
    let CoupledState { r, eta, t } = state;
    let (k1r, k1e) = rhs(model, state)?;
    finite_stage(*t, 1, &k1r, &k1e)?;
    let s2 = CoupledState {
        r: r.axpy(0.5 * dt, &k1r),
        eta: eta.axpy(0.5 * dt, &k1e),
        t: t + 0.5 * dt,
    };
    let (k2r, k2e) = rhs(model, &s2)?;
    finite_stage(*t, 2, &k2r, &k2e)?;
    let s3 = CoupledState {
        r: r.axpy(0.5 * dt, &k2r),
        eta: eta.axpy(0.5 * dt, &k2e),
        t: t + 0.5 * dt,
    };
    let (k3r, k3e) = rhs(model, &s3)?;
    finite_stage(*t, 3, &k3r, &k3e)?;
    let s4 = CoupledState {
        r: r.axpy(dt, &k3r),
        eta: eta.axpy(dt, &k3e),
        t: t + dt,
    };
    let (k4r, k4e) = rhs(model, &s4)?;
    finite_stage(*t, 4, &k4r, &k4e)?;

    let w = dt / 6.0;
    let r_new = r.axpy(w, &k1r).axpy(2.0 * w, &k2r).axpy(2.0 * w, &k3r).axpy(w, &k4r);
    let mut eta_new = eta.axpy(w, &k1e).axpy(2.0 * w, &k2e).axpy(2.0 * w, &k3e).axpy(w, &k4e);
    eta_new.symmetrize();
    Ok(CoupledState {
        r: r_new,
        eta: eta_new,
        t: t + dt,
    })
}

/// RK4 step where the linear part of `∂ₜη = ω − η` is integrated exactly.
///
/// Writes `η = ω_ref + ζ` with `ω_ref = ω[r(t)]`, so that
/// `∂ₜζ = −ζ + (ω[r] − ω_ref)`, and applies RK4 in the integrating-factor
/// variable `e^{s}ζ`. For `ω` independent of `r` the η update reduces to the
/// exact exponential formula.
pub fn step_lawson(model: &Model, state: &CoupledState, dt: f64) -> Result<CoupledState> {
    require_dt(dt)?;
    model.check_state(state)?;
    let CoupledState { r, eta, t } = state;
    let e1 = (-dt).exp();
    let e2 = (-0.5 * dt).exp();
    let omega_ref = model.omega(r)?;
    let zeta = eta.axpy(-1.0, &omega_ref);
    let forcing = |r: &VertexDensity| -> Result<EdgeField> { Ok(model.omega(r)?.axpy(-1.0, &omega_ref)) };

    let k1r = model.dr(r, eta)?;
    finite_stage(*t, 1, &k1r, eta)?;
    let g1 = EdgeField::zeros(r.len(), Symmetry::Symmetric);

    let r2 = r.axpy(0.5 * dt, &k1r);
    let z2 = zeta.axpy(0.5 * dt, &g1).map(|x| e2 * x);
    let eta2 = omega_ref.axpy(1.0, &z2);
    let k2r = model.dr(&r2, &eta2)?;
    let g2 = forcing(&r2)?;
    finite_stage(*t, 2, &k2r, &g2)?;

    let r3 = r.axpy(0.5 * dt, &k2r);
    let z3 = zeta.map(|x| e2 * x).axpy(0.5 * dt, &g2);
    let eta3 = omega_ref.axpy(1.0, &z3);
    let k3r = model.dr(&r3, &eta3)?;
    let g3 = forcing(&r3)?;
    finite_stage(*t, 3, &k3r, &g3)?;

    let r4 = r.axpy(dt, &k3r);
    let z4 = zeta.map(|x| e1 * x).axpy(dt * e2, &g3);
    let eta4 = omega_ref.axpy(1.0, &z4);
    let k4r = model.dr(&r4, &eta4)?;
    let g4 = forcing(&r4)?;
    finite_stage(*t, 4, &k4r, &g4)?;

    let w = dt / 6.0;
    let r_new = r.axpy(w, &k1r).axpy(2.0 * w, &k2r).axpy(2.0 * w, &k3r).axpy(w, &k4r);
    let z_new = zeta
        .map(|x| e1 * x)
        .axpy(w * e1, &g1)
        .axpy(2.0 * w * e2, &g2)
        .axpy(2.0 * w * e2, &g3)
        .axpy(w, &g4);
    let mut eta_new = omega_ref.axpy(1.0, &z_new);
    eta_new.symmetrize();
    Ok(CoupledState {
        r: r_new,
        eta: eta_new,
        t: t + dt,
    })
}

/// One explicit Euler step.
pub fn step_euler(model: &Model, state: &CoupledState, dt: f64) -> Result<CoupledState> {
    require_dt(dt)?;
    let (dr, deta) = rhs(model, state)?;
    finite_stage(state.t, 1, &dr, &deta)?;
    let mut eta = state.eta.axpy(dt, &deta);
    eta.symmetrize();
    Ok(CoupledState {
        r: state.r.axpy(dt, &dr),
        eta,
        t: state.t + dt,
    })
}

/// `η(t+dt) = e^{−dt}η(t) + (1 − e^{−dt})ω[r(t)]` with `r` frozen.
pub fn step_eta_exact(model: &Model, state: &CoupledState, dt: f64) -> Result<EdgeField> {
    require_dt(dt)?;
    model.check_state(state)?;
    let omega = model.omega(&state.r)?;
    let decay = (-dt).exp();
    let gain = -(-dt).exp_m1();
    Ok(state.eta.map(|x| decay * x).axpy(gain, &omega))
}

fn require_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time step must be > 0, got {dt}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Rk4Coupled,
    #[default]
    Rk4ExactEta,
    Euler,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rk4Coupled => "rk4-coupled",
            Self::Rk4ExactEta => "rk4-with-exact-eta",
            Self::Euler => "euler",
        }
    }

    pub fn step(self, model: &Model, state: &CoupledState, dt: f64) -> Result<CoupledState> {
        match self {
            Self::Rk4Coupled => step_rk4(model, state, dt),
            Self::Rk4ExactEta => step_lawson(model, state, dt),
            Self::Euler => step_euler(model, state, dt),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4-coupled" => Ok(Self::Rk4Coupled),
            "rk4-with-exact-eta" => Ok(Self::Rk4ExactEta),
            "euler" => Ok(Self::Euler),
            other => Err(Error::InvalidInput(format!(
                "unknown scheme '{other}' (expected rk4-coupled, rk4-with-exact-eta or euler)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride`-th step; the first and last states are always kept.
    pub stride: usize,
}

impl IntegrateOptions {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Per-time summary of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Diagnostics {
    pub fn of(state: &CoupledState, mu: &BaseMeasure) -> Self {
        Self {
            t: state.t,
            mass: mu.integrate(&state.r),
            r_min: state.r.min(),
            r_max: state.r.max(),
            eta_min: state.eta.min_offdiag().unwrap_or(0.0),
            eta_max: state.eta.max_offdiag().unwrap_or(0.0),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.r_max - self.r_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<CoupledState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &CoupledState {
        &self.states[0]
    }

    pub fn last(&self) -> &CoupledState {
        self.states.last().expect("trajectory is never empty")
    }

    /// `max_t |mass(t) − mass(0)|`.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        self.diagnostics.iter().map(|d| (d.mass - m0).abs()).fold(0.0, f64::max)
    }

    pub fn r_min(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.r_min).fold(f64::INFINITY, f64::min)
    }

    pub fn eta_min(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.eta_min).fold(f64::INFINITY, f64::min)
    }

    pub fn eta_abs_max(&self) -> f64 {
        self.states.iter().map(|s| s.eta.max_abs()).fold(0.0, f64::max)
    }
}

/// Integrates from `init` and records the trajectory.
pub fn integrate(model: &Model, init: &CoupledState, opts: &IntegrateOptions) -> Result<Trajectory> {
    integrate_with(model, init, opts, |_, _| {})
}

/// Like [`integrate`], calling `observer` on every recorded state as soon as it
/// is produced, so partial output survives a blow-up.
pub fn integrate_with(
    model: &Model,
    init: &CoupledState,
    opts: &IntegrateOptions,
    mut observer: impl FnMut(&CoupledState, &Diagnostics),
) -> Result<Trajectory> {
    require_dt(opts.dt)?;
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end must be > 0, got {}", opts.t_end)));
    }
    if opts.stride == 0 {
        return Err(Error::InvalidInput("record stride must be >= 1".into()));
    }
    model.check_state(init)?;
    init.eta.require_symmetric()?;
    if !init.is_finite() {
        return Err(Error::InvalidInput("initial state is not finite".into()));
    }

    let limit = 1e3 * init.r.sup_norm();
    let steps = opts.steps();
    let t0 = init.t;
    let mut traj = Trajectory {
        states: Vec::with_capacity(steps / opts.stride + 2),
        diagnostics: Vec::with_capacity(steps / opts.stride + 2),
    };
    let mut record = |traj: &mut Trajectory, state: &CoupledState| {
        let d = Diagnostics::of(state, &model.mu);
        observer(state, &d);
        traj.states.push(state.clone());
        traj.diagnostics.push(d);
    };
    record(&mut traj, init);

    let mut state = init.clone();
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            t0 + opts.t_end
        } else {
            t0 + (k + 1) as f64 * opts.dt
        };
        let h = t_next - state.t;
        let mut next = opts.scheme.step(model, &state, h)?;
        next.t = t_next;
        if !next.is_finite() {
            return Err(blow_up(t_next, "non-finite state"));
        }
        let sup = next.r.sup_norm();
        if sup > limit {
            return Err(blow_up(t_next, format!("‖r‖_∞ = {sup:e} exceeds 1e3·‖r₀‖_∞")));
        }
        state = next;
        if (k + 1) % opts.stride == 0 || k + 1 == steps {
            record(&mut traj, &state);
        }
    }
    Ok(traj)
}

/// `sup_t ‖r¹ − r²‖_{L²_μ} + sup_t max |η¹ − η²|` over aligned trajectories.
pub fn dtilde_distance(a: &Trajectory, b: &Trajectory, mu: &BaseMeasure) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let mut dr: f64 = 0.0;
    let mut de: f64 = 0.0;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        if (sa.t - sb.t).abs() > 1e-9 * sa.t.abs().max(1.0) {
            return Err(Error::InvalidInput(format!("time grids differ ({} vs {})", sa.t, sb.t)));
        }
        dr = dr.max(sa.r.l2_distance(&sb.r, mu));
        de = de.max(sa.eta.sup_distance(&sb.eta));
    }
    Ok(dr + de)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    /// False when the run is outside the hypotheses (non-upwind flux,
    /// negative initial density or nonpositive edge weights); the check is
    /// then skipped rather than failed.
    pub applicable: bool,
    pub passed: bool,
    pub min_value: f64,
    pub threshold: f64,
    /// `(t, vertex)` of the first sample below the threshold.
    pub first_violation: Option<(f64, usize)>,
}

/// Checks `min_i r_i(t) ≥ −1e−10·‖r₀‖_∞` along a trajectory.
pub fn positivity_check(model: &Model, traj: &Trajectory) -> PositivityReport {
    let r0 = &traj.first().r;
    let threshold = -1e-10 * r0.sup_norm();
    let applicable = model.flux.is_upwind() && r0.is_nonnegative() && traj.eta_min() > 0.0;
    let mut first_violation = None;
    let mut min_value = f64::INFINITY;
    for s in &traj.states {
        for (i, &x) in s.r.iter().enumerate() {
            min_value = min_value.min(x);
            if x < threshold && first_violation.is_none() {
                first_violation = Some((s.t, i));
            }
        }
    }
    PositivityReport {
        applicable,
        passed: !applicable || first_violation.is_none(),
        min_value,
        threshold,
        first_violation,
    }
}

/// `b(t) = η₀,min·e^{−t} + ω_*(1 − e^{−t})`.
pub fn eta_lower_bound_curve(eta0_min: f64, omega_star: f64, times: &[f64]) -> Result<Vec<f64>> {
    if !(omega_star >= 0.0) {
        return Err(Error::InvalidInput(format!("ω_* must be >= 0, got {omega_star}")));
    }
    Ok(times
        .iter()
        .map(|&t| {
            let e = (-t).exp();
            eta0_min * e + omega_star * (1.0 - e)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AlphaProfile, OmegaKernel};
    use approx::assert_abs_diff_eq;

    fn two_vertex(flux: FluxInterpolation, omega: OmegaSpec) -> Model {
        Model {
            mu: BaseMeasure::uniform_line(2).unwrap(),
            flux,
            velocity: VelocitySpec::Alpha(AlphaProfile::identity(0.0, 2.0).unwrap()),
            omega,
        }
    }

    fn init(r: Vec<f64>, eta: f64) -> CoupledState {
        let n = r.len();
        CoupledState::new(r.into(), EdgeField::constant(n, eta), 0.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(1.0));
        let (dr, deta) = rhs(&model, &init(vec![2.0, 0.0], 1.0)).unwrap();
        assert_eq!(dr.0, vec![-2.0, 2.0]);
        assert_eq!(deta.max_abs(), 0.0);

        let (dr, _) = rhs(&model, &init(vec![1.5, 1.5], 1.0)).unwrap();
        assert_eq!(dr.0, vec![0.0, 0.0]);
    }

    #[test]
    fn single_vertex_is_stationary() {
        let model = Model {
            mu: BaseMeasure::uniform_line(1).unwrap(),
            flux: FluxInterpolation::Upwind,
            velocity: VelocitySpec::Alpha(AlphaProfile::identity(0.0, 1.0).unwrap()),
            omega: OmegaSpec::constant(1.0),
        };
        let s = init(vec![0.7], 0.0);
        let (dr, deta) = rhs(&model, &s).unwrap();
        assert_eq!(dr.0, vec![0.0]);
        assert_eq!(deta.max_abs(), 0.0);
    }

    #[test]
    fn steady_state_is_unchanged() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(1.0));
        let s = init(vec![1.0, 1.0], 1.0);
        for scheme in [Scheme::Rk4Coupled, Scheme::Rk4ExactEta, Scheme::Euler] {
            let next = scheme.step(&model, &s, 0.1).unwrap();
            assert_eq!(next.r, s.r);
            assert_eq!(next.eta, s.eta);
        }
    }

    #[test]
    fn rk4_linear_eta_matches_exponential() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(3.0));
        let s = init(vec![1.0, 1.0], 0.5);
        for dt in [0.1, 0.05] {
            let next = step_rk4(&model, &s, dt).unwrap();
            let exact = (-dt).exp() * 0.5 + 3.0 * (1.0 - (-dt).exp());
            let err = (next.eta.get(0, 1) - exact).abs();
            // Local error of RK4 on a linear problem is (dt⁵/120)·|η₀ − c|.
            assert!(err <= dt.powi(5) / 120.0 * 2.5 * 1.01 + 1e-16, "dt={dt} err={err}");
            let lawson = step_lawson(&model, &s, dt).unwrap();
            assert_abs_diff_eq!(lawson.eta.get(0, 1), exact, epsilon = 1e-15);
        }
    }

    #[test]
    fn eta_exact_examples() {
        let mu = BaseMeasure::uniform_line(3).unwrap();
        let model = Model {
            mu: mu.clone(),
            flux: FluxInterpolation::Upwind,
            velocity: VelocitySpec::Alpha(AlphaProfile::identity(0.0, 2.0).unwrap()),
            omega: OmegaSpec::kernel(OmegaKernel::constant(3, 1.0), 0.0),
        };
        let r: VertexDensity = vec![2.0, 0.5, 0.5].into();
        let mass = mu.integrate(&r);
        let s = CoupledState::new(r, EdgeField::constant(3, 2.0), 0.0).unwrap();
        let eta = step_eta_exact(&model, &s, 2f64.ln()).unwrap();
        assert_abs_diff_eq!(eta.get(0, 2), 1.0 + mass / 2.0, epsilon = 1e-15);

        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(0.3));
        let s = init(vec![1.0, 0.0], -1.0);
        let eta = step_eta_exact(&model, &s, 0.7).unwrap();
        let e = (-0.7f64).exp();
        assert_abs_diff_eq!(eta.get(1, 0), -e + 0.3 * (1.0 - e), epsilon = 1e-15);

        // Consistency with the rhs as dt → 0.
        let (_, deta) = rhs(&model, &s).unwrap();
        let dt = 1e-7;
        let eta = step_eta_exact(&model, &s, dt).unwrap();
        assert_abs_diff_eq!((eta.get(0, 1) - s.eta.get(0, 1)) / dt, deta.get(0, 1), epsilon = 1e-6);
    }

    #[test]
    fn integrate_lands_on_t_end_and_keeps_mass() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(1.0));
        let opts = IntegrateOptions::new(Scheme::default(), 0.3, 1.0);
        let traj = integrate(&model, &init(vec![2.0, 0.0], 1.0), &opts).unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(traj.last().t, 1.0);
        assert!(traj.max_mass_drift() <= 1e-14);
        let strided = integrate(&model, &init(vec![2.0, 0.0], 1.0), &opts.with_stride(3)).unwrap();
        assert_eq!(strided.times(), vec![0.0, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn consensus_state_is_stationary() {
        let model = two_vertex(FluxInterpolation::ProductMean, OmegaSpec::constant(2.0));
        let s = init(vec![1.0, 1.0], 2.0);
        let traj = integrate(&model, &s, &IntegrateOptions::new(Scheme::Rk4Coupled, 0.1, 5.0)).unwrap();
        assert!(traj.states.iter().all(|x| x.r == s.r && x.eta == s.eta));
    }

    #[test]
    fn blow_up_is_reported_with_partial_rows() {
        let model = Model {
            mu: BaseMeasure::uniform_line(2).unwrap(),
            flux: FluxInterpolation::custom("explosive", 1.0, |a, b, _| -(a * a + b * b)),
            velocity: VelocitySpec::Static(EdgeField::from_fn(2, Symmetry::Antisymmetric, |i, j| {
                if i < j {
                    1.0
                } else {
                    -1.0
                }
            })),
            omega: OmegaSpec::constant(1.0),
        };
        let mut rows = 0;
        let opts = IntegrateOptions::new(Scheme::Euler, 0.01, 100.0);
        let err = integrate_with(&model, &init(vec![1.0, 1.0], 1.0), &opts, |_, _| rows += 1).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
        assert!(rows > 1);
    }

    #[test]
    fn positivity_examples() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(1.0));
        let zero = integrate(&model, &init(vec![0.0, 0.0], 1.0), &IntegrateOptions::new(Scheme::default(), 0.01, 1.0)).unwrap();
        assert!(zero.states.iter().all(|s| s.r.0 == vec![0.0, 0.0]));
        let report = positivity_check(&model, &zero);
        assert!(report.applicable && report.passed);

        let traj = integrate(&model, &init(vec![2.0, 0.0], 1.0), &IntegrateOptions::new(Scheme::default(), 1e-2, 5.0)).unwrap();
        let report = positivity_check(&model, &traj);
        assert!(report.applicable && report.passed, "{report:?}");

        let mean = two_vertex(FluxInterpolation::ProductMean, OmegaSpec::constant(1.0));
        let report = positivity_check(&mean, &traj);
        assert!(!report.applicable && report.passed);
    }

    #[test]
    fn eta_lower_bound_examples() {
        let b = eta_lower_bound_curve(1.5, 1.5, &[0.0, 1.0, 10.0]).unwrap();
        assert!(b.iter().all(|x| (x - 1.5).abs() < 1e-15));
        let b = eta_lower_bound_curve(2.0, 1.0, &[2f64.ln(), 50.0]).unwrap();
        assert_abs_diff_eq!(b[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 1.0, epsilon = 1e-15);
        assert!(eta_lower_bound_curve(1.0, -0.1, &[0.0]).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Rk4Coupled, Scheme::Rk4ExactEta, Scheme::Euler] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("rk5".parse::<Scheme>().is_err());
    }

    #[test]
    fn invalid_options_rejected() {
        let model = two_vertex(FluxInterpolation::Upwind, OmegaSpec::constant(1.0));
        let s = init(vec![1.0, 0.0], 1.0);
        assert!(integrate(&model, &s, &IntegrateOptions::new(Scheme::Euler, 0.0, 1.0)).is_err());
        assert!(integrate(&model, &s, &IntegrateOptions::new(Scheme::Euler, 0.1, -1.0)).is_err());
        assert!(integrate(&model, &s, &IntegrateOptions::new(Scheme::Euler, 0.1, 1.0).with_stride(0)).is_err());
    }
}
