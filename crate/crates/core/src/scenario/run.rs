//! Executes a parsed scenario and renders its outputs.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{
    AlphaChoice, Eta0Config, Experiment, FluxChoice, InitConfig, KernelChoice, OmegaConfig, Placement, ScenarioConfig,
    VelocityConfig, Weights,
};
use crate::bounds::{constants_of, BoundsLedger};
use crate::dynamics::{
    dtilde_distance, eta_lower_bound_curve, integrate, integrate_with, picard_solve, positivity_check,
    ContractionReport, CoupledState, Diagnostics, Model, PicardOptions, Trajectory,
};
use crate::error::{Error, Result};
use crate::fields::{
    velocity_from_kernel, AlphaKind, AlphaProfile, InteractionKernelSpec, OmegaKernel, OmegaKind, OmegaSpec,
    VelocitySpec,
};
use crate::graph::{BaseMeasure, EdgeField, Symmetry, VertexDensity};
use crate::graph_ce::{
    advect_with_probes, default_probes, flow_property_suite, stability_experiment, AtomicDisintegration, FlowReport,
    SigmaTrajectory, StabilityReport,
};
use crate::interpolation::FluxInterpolation;
use crate::metrics::{contraction_dissipation, inf_bound_curve, sup_bound_curve, AtomSet1D};

/// A scenario turned into a model, initial state and ledger.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: Model,
    pub init: CoupledState,
    /// Second initial density of a pair run.
    pub second: Option<VertexDensity>,
    pub ledger: BoundsLedger,
}

fn placement_points(config: &ScenarioConfig) -> Vec<Vec<f64>> {
    let (n, d) = (config.graph.n, config.graph.dimension);
    match config.graph.placement {
        Placement::Grid => {
            let mut side = 1usize;
            while side.pow(d as u32) < n {
                side += 1;
            }
            let spacing = if side > 1 { 1.0 / (side - 1) as f64 } else { 0.0 };
            (0..n)
                .map(|mut idx| {
                    (0..d)
                        .map(|_| {
                            let c = idx % side;
                            idx /= side;
                            c as f64 * spacing
                        })
                        .collect()
                })
                .collect()
        }
        Placement::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
        }
    }
}

fn kernel_spec(choice: KernelChoice, mu: &BaseMeasure) -> Result<InteractionKernelSpec> {
    match choice {
        KernelChoice::Gaussian { length } => InteractionKernelSpec::gaussian(mu, length),
        KernelChoice::Quadratic => Ok(InteractionKernelSpec::quadratic(mu)),
    }
}

fn density_of(init: &InitConfig, n: usize) -> VertexDensity {
    match init {
        InitConfig::Constant(c) => VertexDensity::constant(n, *c),
        InitConfig::Random { seed, lo, hi } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect::<Vec<_>>().into()
        }
        InitConfig::Indicator { subset, value } => {
            let mut r = vec![0.0; n];
            for &i in subset {
                r[i] = *value;
            }
            r.into()
        }
        InitConfig::Explicit(values) => values.clone().into(),
    }
}

/// Builds the model and initial data described by `config`.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let n = config.graph.n;
    let points = placement_points(config);
    let mu = match &config.graph.weights {
        Weights::Uniform => BaseMeasure::uniform(points)?,
        Weights::Explicit(w) => BaseMeasure::new(points, w.clone())?,
    };

    let r0 = density_of(&config.init, n);
    let second = match &config.experiment {
        Experiment::Pair { second } => Some(VertexDensity::new(second.clone())),
        _ => None,
    };

    let eta0 = match config.eta0 {
        Eta0Config::Constant(c) => EdgeField::constant(n, c),
        Eta0Config::Gaussian { length, scale } => EdgeField::from_fn(n, Symmetry::Symmetric, |i, j| {
            scale * (-mu.squared_distance(i, j) / (2.0 * length * length)).exp()
        }),
    };

    let mut omega = match config.omega {
        OmegaConfig::Constant(c) => OmegaSpec::constant(c),
        OmegaConfig::Ones { scale } => OmegaSpec::kernel(OmegaKernel::constant(n, scale), 0.0),
        OmegaConfig::Gaussian { length, scale, floor } => {
            OmegaSpec::kernel(OmegaKernel::gaussian(&mu, length, scale, floor)?, 0.0)
        }
    };
    if let Some(star) = config.omega_star {
        omega.omega_star = star;
    }

    let radius = second.iter().map(VertexDensity::sup_norm).fold(r0.sup_norm(), f64::max);
    let velocity = match config.velocity {
        VelocityConfig::Alpha(choice) => {
            let kind = match choice {
                AlphaChoice::Sigmoid => AlphaKind::Sigmoid,
                AlphaChoice::Tanh { gain } => AlphaKind::TanhScaled { gain },
                AlphaChoice::Identity => AlphaKind::Identity,
            };
            VelocitySpec::Alpha(AlphaProfile::new(kind, 0.0, radius)?)
        }
        VelocityConfig::Kernel(choice) => VelocitySpec::Kernel(kernel_spec(choice, &mu)?),
        VelocityConfig::Static(choice) => VelocitySpec::Static(velocity_from_kernel(&kernel_spec(choice, &mu)?, &r0, &mu)?),
    };

    let flux = match config.flux {
        FluxChoice::Upwind => FluxInterpolation::Upwind,
        FluxChoice::ProductMean => FluxInterpolation::ProductMean,
        FluxChoice::ProductMax => FluxInterpolation::ProductMax,
    };

    let ledger = constants_of(&flux, &velocity, &omega, &eta0, &r0, &mu)?;
    let init = CoupledState::new(r0, eta0, 0.0)?;
    Ok(Scenario {
        config: config.clone(),
        model: Model {
            mu,
            flux,
            velocity,
            omega,
        },
        init,
        second,
        ledger,
    })
}

/// One line of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub mass: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub diameter: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub sup_bound: Option<f64>,
    pub inf_bound: Option<f64>,
    pub pair: Option<PairColumns>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairColumns {
    /// `‖r¹ − r²‖_{L²_μ}`.
    pub l2mu_d2: f64,
    pub dissipation_lhs: Option<f64>,
    pub dissipation_rhs: Option<f64>,
}

/// A named pass/fail invariant; skipped checks count as passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub applicable: bool,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            applicable: true,
            passed,
            detail,
        }
    }

    fn skipped(name: &'static str, reason: &str) -> Self {
        Self {
            name,
            applicable: false,
            passed: true,
            detail: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scenario: Scenario,
    pub trajectory: Trajectory,
    pub second: Option<Trajectory>,
    pub sigma: Option<SigmaTrajectory>,
    pub picard: Option<ContractionReport>,
    pub flow: Option<FlowReport>,
    pub stability: Option<StabilityReport>,
    pub rows: Vec<Row>,
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

/// A run that stopped early, with the rows recorded before it did.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Vec<Row>,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: Vec::new(),
        }
    }
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

fn bounds_apply(sc: &Scenario) -> bool {
    sc.config.is_monotone_upwind() && sc.init.r.is_nonnegative() && sup_bound_curve(&sc.ledger, &[0.0]).is_ok()
}

fn row_of(sc: &Scenario, d: &Diagnostics) -> Row {
    let (sup_bound, inf_bound) = if bounds_apply(sc) {
        (
            sup_bound_curve(&sc.ledger, &[d.t]).ok().map(|v| v[0]),
            inf_bound_curve(&sc.ledger, sc.ledger.r0_min.max(0.0), &[d.t]).ok().map(|v| v[0]),
        )
    } else {
        (None, None)
    };
    Row {
        t: d.t,
        mass: d.mass,
        r_min: d.r_min,
        r_max: d.r_max,
        diameter: d.diameter(),
        eta_min: d.eta_min,
        eta_max: d.eta_max,
        sup_bound,
        inf_bound,
        pair: None,
    }
}

/// Parses nothing and writes nothing: runs the experiment and evaluates every
/// applicable invariant.
pub fn run_scenario(config: &ScenarioConfig) -> std::result::Result<RunOutcome, RunFailure> {
    let sc = build_scenario(config)?;
    let opts = config.integrator;
    let mut rows = Vec::new();

    let mut sigma = None;
    let mut picard = None;
    let mut second = None;
    let mut extra: Vec<(String, String)> = Vec::new();
    let mut extra_checks = Vec::new();

    let trajectory = match &config.experiment {
        Experiment::Picard { horizon, tol, max_iters } => {
            let popts = PicardOptions {
                horizon: *horizon,
                dt: opts.dt,
                max_iters: *max_iters,
                tol: *tol,
            };
            let (traj, report) = picard_solve(&sc.model, &sc.init, &popts)?;
            let mut reference_opts = opts;
            reference_opts.t_end = *horizon;
            reference_opts.stride = 1;
            let reference = integrate(&sc.model, &sc.init, &reference_opts)?;
            let gap = dtilde_distance(&traj, &reference, &sc.model.mu)?;
            extra.push(("picard_iterations".into(), report.iterations.to_string()));
            extra.push(("picard_converged".into(), report.converged.to_string()));
            extra.push(("picard_max_ratio".into(), fmt_f(report.max_ratio())));
            extra.push(("picard_final_distance".into(), fmt_f(report.distances.last().copied().unwrap_or(0.0))));
            extra.push(("picard_vs_integrator".into(), fmt_f(gap)));
            extra_checks.push(Check::new(
                "fixed-point contraction",
                report.converged && report.max_ratio() < 1.0,
                format!(
                    "{} iterations, max ratio {}, converged {}",
                    report.iterations,
                    sci(report.max_ratio()),
                    report.converged
                ),
            ));
            extra_checks.push(Check::new(
                "fixed point matches integrator",
                gap <= 1e-6,
                format!("distance {} (tol 1e-6)", sci(gap)),
            ));
            picard = Some(report);
            rows.extend(traj.diagnostics.iter().step_by(opts.stride).map(|d| row_of(&sc, d)));
            if (traj.len() - 1) % opts.stride != 0 {
                rows.push(row_of(&sc, traj.diagnostics.last().expect("nonempty")));
            }
            traj
        }
        Experiment::Monokinetic | Experiment::Stability { .. } => {
            // Advection needs the driving solution at every step.
            let fine = opts.with_stride(1);
            let traj = integrate(&sc.model, &sc.init, &fine)?;
            let keep = |k: usize| k.is_multiple_of(opts.stride) || k + 1 == traj.len();
            rows.extend(
                traj.diagnostics
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| keep(*k))
                    .map(|(_, d)| row_of(&sc, d)),
            );
            traj
        }
        _ => {
            integrate_with(&sc.model, &sc.init, &opts, |_, d| rows.push(row_of(&sc, d))).map_err(|error| RunFailure {
                error,
                partial: rows.clone(),
            })?
        }
    };

    let mut flow = None;
    let mut stability = None;
    match &config.experiment {
        Experiment::Pair { .. } => {
            let r2 = sc.second.clone().expect("pair runs carry a second density");
            let init2 = CoupledState::new(r2, sc.init.eta.clone(), sc.init.t)?;
            let traj2 = integrate(&sc.model, &init2, &opts)?;
            let frozen = match (&sc.model.velocity, &sc.model.omega.kind, sc.model.flux.is_upwind()) {
                (VelocitySpec::Static(v), OmegaKind::Constant(_), true) => Some(v.clone()),
                _ => None,
            };
            for (k, row) in rows.iter_mut().enumerate() {
                let (a, b) = (&trajectory.states[k], &traj2.states[k]);
                let dissipation = match &frozen {
                    Some(v) => Some(contraction_dissipation(&a.r, &b.r, v, &a.eta, &sc.model.mu)?),
                    None => None,
                };
                row.pair = Some(PairColumns {
                    l2mu_d2: a.r.l2_distance(&b.r, &sc.model.mu),
                    dissipation_lhs: dissipation.map(|d| d.0),
                    dissipation_rhs: dissipation.map(|d| d.1),
                });
            }
            extra_checks.push(mass_check("mass conservation (second solution)", &traj2));
            extra_checks.push(dissipation_check(&rows));
            extra.push((
                "final_pair_distance".into(),
                fmt_f(rows.last().and_then(|r| r.pair).map_or(0.0, |p| p.l2mu_d2)),
            ));
            second = Some(traj2);
        }
        Experiment::Monokinetic => {
            let sigma0 = AtomicDisintegration::monokinetic(&sc.init.r, &sc.model.mu)?;
            let probes = default_probes(sc.model.n(), sc.ledger.norm_r0_inf);
            let traj = advect_with_probes(&sc.model, &sigma0, &probes, &trajectory, opts.dt)?;
            let gap = atoms_vs_density(&traj, &trajectory)?;
            let report = flow_property_suite(&sc.ledger, &traj, &sc.model.mu);
            let tol = 1e-8;
            extra.push(("max_atom_density_gap".into(), fmt_f(gap)));
            extra.push(("flow_c_bar".into(), fmt_f(report.c_bar)));
            extra.push(("flow_c_tilde".into(), fmt_f(report.c_tilde)));
            extra.push(("flow_growth_ratio".into(), fmt_f(report.growth.worst)));
            extra.push(("flow_lipschitz_ratio".into(), fmt_f(report.lipschitz.worst)));
            extra.push(("flow_continuity_ratio".into(), fmt_f(report.continuity.worst)));
            extra_checks.push(Check::new(
                "atoms follow the density",
                gap <= tol,
                format!("max gap {} (tol {})", sci(gap), sci(tol)),
            ));
            extra_checks.push(Check::new(
                "flow properties",
                report.all_passed(),
                format!(
                    "worst ratios growth {}, lipschitz {}, continuity {}",
                    sci(report.growth.worst),
                    sci(report.lipschitz.worst),
                    sci(report.continuity.worst)
                ),
            ));
            flow = Some(report);
            sigma = Some(traj);
        }
        Experiment::Stability { vertex, perturbation } => {
            let a = AtomicDisintegration::monokinetic(&sc.init.r, &sc.model.mu)?;
            let b = AtomicDisintegration::new(
                sc.init
                    .r
                    .iter()
                    .enumerate()
                    .map(|(i, x)| AtomSet1D::dirac(if i == *vertex { x + perturbation } else { *x }))
                    .collect(),
                &sc.model.mu,
            )?;
            let report = stability_experiment(&sc.model, &sc.ledger, &a, &b, &trajectory, opts.dt)?;
            extra.push(("stability_initial_distance".into(), fmt_f(report.initial_distance)));
            extra.push(("stability_sup_distance".into(), fmt_f(report.sup_distance)));
            extra.push(("stability_ratio".into(), fmt_f(report.ratio)));
            extra.push(("stability_envelope".into(), fmt_f(report.envelope)));
            extra.push(("stability_ln_envelope".into(), fmt_f(ln_stability_envelope(&sc.ledger, report_horizon(&trajectory)))));
            extra_checks.push(Check::new(
                "stability envelope",
                report.within_envelope(),
                format!("ratio {} vs envelope {}", sci(report.ratio), sci(report.envelope)),
            ));
            stability = Some(report);
        }
        Experiment::Trajectory | Experiment::Picard { .. } => {}
    }

    let mut checks = invariant_checks(&sc, &trajectory);
    checks.extend(extra_checks);
    let summary = summary_lines(&sc, &trajectory, extra);
    Ok(RunOutcome {
        scenario: sc,
        trajectory,
        second,
        sigma,
        picard,
        flow,
        stability,
        rows,
        summary,
        checks,
    })
}

fn report_horizon(traj: &Trajectory) -> f64 {
    traj.last().t - traj.first().t
}

/// Natural logarithm of the stability envelope, finite even when the envelope
/// itself overflows.
fn ln_stability_envelope(l: &BoundsLedger, horizon: f64) -> f64 {
    let c_bar = l.l_phi * l.c_v_sqrt() * l.eta_sup();
    let c_sq = c_bar * c_bar;
    0.5 * 2f64.ln() + c_bar * horizon + c_bar * (0.5 * c_sq * horizon * horizon).exp() * horizon
}

fn atoms_vs_density(sigma: &SigmaTrajectory, traj: &Trajectory) -> Result<f64> {
    if sigma.states.len() != traj.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.len(),
            found: sigma.states.len(),
        });
    }
    let mut gap: f64 = 0.0;
    for (s, state) in sigma.states.iter().zip(&traj.states) {
        for (i, x) in state.r.iter().enumerate() {
            gap = gap.max((s.vertex(i).mean() - x).abs());
        }
    }
    Ok(gap)
}

fn mass_check(name: &'static str, traj: &Trajectory) -> Check {
    let drift = traj.max_mass_drift();
    let tol = 1e-10 * traj.diagnostics[0].mass.abs().max(1.0);
    Check::new(name, drift <= tol, format!("max drift {} (tol {})", sci(drift), sci(tol)))
}

/// Central differences of `‖r¹ − r²‖²` against the dissipation bound.
fn dissipation_check(rows: &[Row]) -> Check {
    let name = "dissipation inequality";
    let cols: Vec<(f64, f64, Option<f64>)> = rows
        .iter()
        .filter_map(|r| r.pair.map(|p| (r.t, p.l2mu_d2 * p.l2mu_d2, p.dissipation_rhs)))
        .collect();
    if cols.iter().any(|c| c.2.is_none()) || cols.len() < 3 {
        return Check::skipped(name, "needs a frozen velocity, a constant edge target and upwind flux");
    }
    let scale = cols.iter().map(|c| c.2.unwrap_or(0.0).abs()).fold(0.0, f64::max);
    let tol = 1e-6 * scale.max(f64::MIN_POSITIVE);
    let mut worst = f64::NEG_INFINITY;
    for w in cols.windows(3) {
        let fd = (w[2].1 - w[0].1) / (w[2].0 - w[0].0);
        worst = worst.max(fd - w[1].2.unwrap_or(0.0));
    }
    Check::new(
        name,
        worst <= tol,
        format!("max excess of d/dt|r1-r2|^2 over the bound {} (tol {})", sci(worst), sci(tol)),
    )
}

fn invariant_checks(sc: &Scenario, traj: &Trajectory) -> Vec<Check> {
    let mut checks = vec![mass_check("mass conservation", traj)];

    let pos = positivity_check(&sc.model, traj);
    checks.push(if pos.applicable {
        Check::new(
            "positivity",
            pos.passed,
            match pos.first_violation {
                Some((t, i)) => format!("r[{i}] below {} at t = {}", sci(pos.threshold), sci(t)),
                None => format!("min r {}", sci(pos.min_value)),
            },
        )
    } else {
        Check::skipped("positivity", "needs upwind flux, r0 >= 0 and positive edge weights")
    });

    let l = &sc.ledger;
    let omega_certified = matches!(sc.model.omega.kind, OmegaKind::Constant(_)) || traj.r_min() >= 0.0;
    if sc.model.n() < 2 {
        checks.push(Check::skipped("edge weight envelope", "a single vertex has no edges"));
    } else if !omega_certified {
        checks.push(Check::skipped("edge weight envelope", "the edge target is only bounded while r >= 0"));
    } else {
        let times: Vec<f64> = traj.diagnostics.iter().map(|d| d.t - traj.first().t).collect();
        let scale = l.omega_star.max(l.norm_eta0_inf).max(1.0);
        let lower = eta_lower_bound_curve(l.eta0_min, l.omega_star, &times).expect("ω_* is nonnegative");
        let below = traj
            .diagnostics
            .iter()
            .zip(&lower)
            .map(|(d, b)| b - d.eta_min)
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = traj.eta_abs_max() - l.eta_sup();
        let tol = 1e-9 * scale;
        checks.push(Check::new(
            "edge weight envelope",
            below <= tol && upper <= tol,
            format!(
                "lower excess {}, upper excess {} (tol {})",
                sci(below),
                sci(upper),
                sci(tol)
            ),
        ));
    }

    if bounds_apply(sc) {
        let tol = 1e-9 * l.norm_r0_inf.max(1.0);
        let (mut over, mut under) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for d in &traj.diagnostics {
            let t = [d.t - traj.first().t];
            let sup = sup_bound_curve(l, &t).expect("checked by bounds_apply")[0];
            let inf = inf_bound_curve(l, l.r0_min.max(0.0), &t).expect("checked by bounds_apply")[0];
            over = over.max(d.r_max - sup);
            under = under.max(inf - d.r_min);
        }
        checks.push(Check::new(
            "density envelopes",
            over <= tol && under <= tol,
            format!("max excess {}, min shortfall {} (tol {})", sci(over), sci(under), sci(tol)),
        ));
    } else {
        checks.push(Check::skipped(
            "density envelopes",
            "needs upwind flux, a monotone velocity and positive M, edge weights and slope",
        ));
    }
    checks
}

fn summary_lines(sc: &Scenario, traj: &Trajectory, extra: Vec<(String, String)>) -> Vec<(String, String)> {
    let c = &sc.config;
    let l = &sc.ledger;
    let last = traj.diagnostics.last().expect("nonempty");
    let mut out: Vec<(String, String)> = vec![
        ("name".into(), c.output.name.clone()),
        ("experiment".into(), c.experiment.name().into()),
        ("vertices".into(), c.graph.n.to_string()),
        ("flux".into(), sc.model.flux.name().to_string()),
        ("scheme".into(), c.integrator.scheme.name().into()),
        ("dt".into(), fmt_f(c.integrator.dt)),
        ("t_end".into(), fmt_f(last.t)),
        ("recorded_states".into(), traj.len().to_string()),
        ("initial_mass".into(), fmt_f(traj.diagnostics[0].mass)),
        ("final_mass".into(), fmt_f(last.mass)),
        ("max_mass_drift".into(), fmt_f(traj.max_mass_drift())),
        ("final_r_min".into(), fmt_f(last.r_min)),
        ("final_r_max".into(), fmt_f(last.r_max)),
        ("final_diameter".into(), fmt_f(last.diameter())),
        ("consensus_value".into(), fmt_f(l.consensus_value())),
        ("min_r".into(), fmt_f(traj.r_min())),
        ("min_eta".into(), fmt_f(traj.eta_min())),
        ("max_abs_eta".into(), fmt_f(traj.eta_abs_max())),
        ("ledger.l_phi".into(), fmt_f(l.l_phi)),
        ("ledger.c_v".into(), fmt_f(l.c_v)),
        ("ledger.c_v_certified".into(), l.c_v_certified.to_string()),
        ("ledger.l_v".into(), fmt_f(l.l_v)),
        ("ledger.c_omega".into(), fmt_f(l.c_omega)),
        ("ledger.l_omega".into(), fmt_f(l.l_omega)),
        ("ledger.omega_star".into(), fmt_f(l.omega_star)),
        ("ledger.eta_star".into(), fmt_f(l.eta_star)),
        ("ledger.alpha_prime_star".into(), fmt_f(l.alpha_prime_star)),
        ("ledger.mass".into(), fmt_f(l.mass)),
        ("ledger.norm_r0_inf".into(), fmt_f(l.norm_r0_inf)),
        ("ledger.eta_sup".into(), fmt_f(l.eta_sup())),
    ];
    out.extend(extra);
    out
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Shortest round-trip text; scientific outside `[1e-4, 1e15)`.
fn fmt_f(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Writes trajectory rows as CSV; bound and pair columns are empty where they
/// do not apply.
pub fn write_rows(rows: &[Row], out: impl Write) -> io::Result<()> {
    let with_pair = rows.iter().any(|r| r.pair.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "t", "mass", "r_min", "r_max", "diameter", "eta_min", "eta_max", "sup_bound", "inf_bound",
    ];
    if with_pair {
        header.extend(["l2mu_d2", "dissipation_lhs", "dissipation_rhs"]);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            fmt_f(r.t),
            fmt_f(r.mass),
            fmt_f(r.r_min),
            fmt_f(r.r_max),
            fmt_f(r.diameter),
            fmt_f(r.eta_min),
            fmt_f(r.eta_max),
            opt(r.sup_bound),
            opt(r.inf_bound),
        ];
        if with_pair {
            let p = r.pair;
            rec.push(opt(p.map(|p| p.l2mu_d2)));
            rec.push(opt(p.and_then(|p| p.dissipation_lhs)));
            rec.push(opt(p.and_then(|p| p.dissipation_rhs)));
        }
        w.write_record(&rec)?;
    }
    w.flush()
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k} = {v}");
        }
        for c in &self.checks {
            let status = match (c.applicable, c.passed) {
                (false, _) => "skipped",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            let _ = writeln!(s, "check.{} = {status}", c.name.replace(' ', "_"));
        }
        s
    }

    /// Fixed-width pass/fail table of the checks.
    pub fn verification_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<width$}  {:<7}  detail\n", "check", "status");
        for c in &self.checks {
            let status = match (c.applicable, c.passed) {
                (false, _) => "SKIP",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            let _ = writeln!(s, "{:<width$}  {:<7}  {}", c.name, status, c.detail);
        }
        s
    }

    /// Writes `<name>.csv` and `<name>.summary.txt` under `dir`.
    pub fn write_outputs(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let name = &self.scenario.config.output.name;
        let csv_path = dir.join(format!("{name}.csv"));
        write_rows(&self.rows, io::BufWriter::new(std::fs::File::create(&csv_path)?))?;
        let summary_path = dir.join(format!("{name}.summary.txt"));
        std::fs::write(&summary_path, self.summary_text())?;
        Ok((csv_path, summary_path))
    }
}
