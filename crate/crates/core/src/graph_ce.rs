//! The graph continuity equation: atoms at every vertex transported by the
//! self-consistent velocity `X[σ, r, η]`, driven by a solution `(r, η)` of the
//! coupled system.

use crate::bounds::BoundsLedger;
use crate::dynamics::{rhs, Model, Trajectory};
use crate::error::{check_len, Error, Result};
use crate::graph::{BaseMeasure, EdgeField, Symmetry, VertexDensity};
use crate::metrics::{dmu_sup, l2mu_d2, AtomSet1D};

/// Per-vertex atomic probability measures `σ_x` on ℝ; the vertex marginal is
/// the base measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDisintegration {
    vertices: Vec<AtomSet1D>,
}

impl AtomicDisintegration {
    pub fn new(vertices: Vec<AtomSet1D>, mu: &BaseMeasure) -> Result<Self> {
        check_len(mu.len(), vertices.len())?;
        Ok(Self { vertices })
    }

    /// `δ_{r_x} ⊗ μ`.
    pub fn monokinetic(r: &VertexDensity, mu: &BaseMeasure) -> Result<Self> {
        check_len(mu.len(), r.len())?;
        if !r.is_finite() {
            return Err(Error::InvalidInput("density is not finite".into()));
        }
        Ok(Self {
            vertices: r.iter().map(|x| AtomSet1D::dirac(*x)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, i: usize) -> &AtomSet1D {
        &self.vertices[i]
    }

    pub fn vertices(&self) -> &[AtomSet1D] {
        &self.vertices
    }

    /// `Σ_i m_i Σ_k p_ik ξ_ik`.
    pub fn first_moment(&self, mu: &BaseMeasure) -> f64 {
        self.vertices.iter().zip(mu.weights()).map(|(s, m)| m * s.mean()).sum()
    }

    /// `Σ_i m_i Σ_k p_ik ξ_ik²`.
    pub fn second_moment(&self, mu: &BaseMeasure) -> f64 {
        self.vertices.iter().zip(mu.weights()).map(|(s, m)| m * s.second_moment()).sum()
    }

    fn flat_positions(&self) -> Vec<f64> {
        self.vertices.iter().flat_map(|s| s.positions().iter().copied()).collect()
    }

    fn with_positions(&self, flat: &[f64]) -> Self {
        let mut out = self.clone();
        let mut offset = 0;
        for s in &mut out.vertices {
            let k = s.len();
            s.positions_mut().copy_from_slice(&flat[offset..offset + k]);
            offset += k;
        }
        out
    }
}

/// A test particle at vertex `vertex` starting from `position`; it feels the
/// field but does not contribute to `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub vertex: usize,
    pub position: f64,
}

/// Default probes `u ∈ {0, R, 2R}` at every vertex.
pub fn default_probes(n: usize, radius: f64) -> Vec<Probe> {
    (0..n)
        .flat_map(|vertex| [0.0, radius, 2.0 * radius].map(|position| Probe { vertex, position }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<AtomicDisintegration>,
    pub probes: Vec<Probe>,
    /// `probe_paths[t][p]` is the position of probe `p` at `times[t]`.
    pub probe_paths: Vec<Vec<f64>>,
}

impl SigmaTrajectory {
    pub fn last(&self) -> &AtomicDisintegration {
        self.states.last().expect("trajectory is never empty")
    }
}

/// `X(ξ, i) = −Σ_{j≠i} m_j Σ_k p_jk Φ(ξ, ξ_jk; V[r]_ij) η_ij`.
pub fn field_x(
    model: &Model,
    sigma: &AtomicDisintegration,
    r: &VertexDensity,
    eta: &EdgeField,
    xi: f64,
    i: usize,
) -> Result<f64> {
    check_len(model.n(), sigma.n())?;
    check_len(model.n(), eta.n())?;
    if i >= model.n() {
        return Err(Error::InvalidInput(format!("vertex {i} out of range")));
    }
    let v = model.velocity.evaluate(r, &model.mu)?;
    Ok(field_at(model, sigma.vertices(), &v, eta, xi, i))
}

fn field_at(model: &Model, sets: &[AtomSet1D], v: &EdgeField, eta: &EdgeField, xi: f64, i: usize) -> f64 {
    let m = model.mu.weights();
    let mut acc = 0.0;
    for (j, set) in sets.iter().enumerate() {
        let e = eta.get(i, j);
        if j == i || e == 0.0 {
            continue;
        }
        let vij = v.get(i, j);
        let inner: f64 = set
            .positions()
            .iter()
            .zip(set.weights())
            .map(|(x, p)| p * model.flux.apply(xi, *x, vij))
            .sum();
        acc += m[j] * inner * e;
    }
    -acc
}

/// Cubic Hermite interpolation of `(r, η)` through the recorded states, with
/// nodal derivatives from the right-hand side.
struct Driver<'a> {
    traj: &'a Trajectory,
    dr: Vec<VertexDensity>,
    deta: Vec<EdgeField>,
}

impl<'a> Driver<'a> {
    fn new(model: &Model, traj: &'a Trajectory) -> Result<Self> {
        let (dr, deta) = traj
            .states
            .iter()
            .map(|s| rhs(model, s))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(Self { traj, dr, deta })
    }

    fn at(&self, t: f64) -> (VertexDensity, EdgeField) {
        let states = &self.traj.states;
        let k = states.partition_point(|s| s.t <= t).clamp(1, states.len() - 1) - 1;
        let (a, b) = (&states[k], &states[k + 1]);
        let h = b.t - a.t;
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = (s3 - 2.0 * s2 + s) * h;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = (s3 - s2) * h;
        let r = VertexDensity(
            (0..a.r.len())
                .map(|i| h00 * a.r[i] + h10 * self.dr[k][i] + h01 * b.r[i] + h11 * self.dr[k + 1][i])
                .collect(),
        );
        let eta = EdgeField::from_fn(a.eta.n(), Symmetry::Symmetric, |i, j| {
            h00 * a.eta.get(i, j) + h10 * self.deta[k].get(i, j) + h01 * b.eta.get(i, j) + h11 * self.deta[k + 1].get(i, j)
        });
        (r, eta)
    }
}

/// Pushes `sigma0` along the characteristics driven by `euler`.
pub fn advect(model: &Model, sigma0: &AtomicDisintegration, euler: &Trajectory, dt: f64) -> Result<SigmaTrajectory> {
    advect_with_probes(model, sigma0, &[], euler, dt)
}

/// Like [`advect`], also transporting test particles.
///
/// Atoms and probes are advanced together by RK4; at every stage the field is
/// built from the stage positions of all atoms, so `σ` inside `X` is the
/// current atomic state.
pub fn advect_with_probes(
    model: &Model,
    sigma0: &AtomicDisintegration,
    probes: &[Probe],
    euler: &Trajectory,
    dt: f64,
) -> Result<SigmaTrajectory> {
    check_len(model.n(), sigma0.n())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be > 0, got {dt}")));
    }
    if euler.len() < 2 {
        return Err(Error::InvalidInput("driving trajectory needs at least two states".into()));
    }
    let times = euler.times();
    if times.windows(2).any(|w| w[1] - w[0] > dt * (1.0 + 1e-9)) {
        return Err(Error::InvalidInput("driving trajectory is coarser than the advection step".into()));
    }
    if let Some(p) = probes.iter().find(|p| p.vertex >= model.n() || !p.position.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid probe {p:?}")));
    }
    let driver = Driver::new(model, euler)?;

    let n_atoms: usize = sigma0.vertices().iter().map(AtomSet1D::len).sum();
    let owners: Vec<usize> = sigma0
        .vertices()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| std::iter::repeat_n(i, s.len()))
        .chain(probes.iter().map(|p| p.vertex))
        .collect();
    let mut y: Vec<f64> = sigma0.flat_positions();
    y.extend(probes.iter().map(|p| p.position));
    let scale = y.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let limit = if scale > 0.0 { 1e3 * scale } else { f64::INFINITY };

    let velocity = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (r, eta) = driver.at(t);
        let v = model.velocity.evaluate(&r, &model.mu)?;
        let sigma = sigma0.with_positions(&y[..n_atoms]);
        Ok(y.iter()
            .zip(&owners)
            .map(|(xi, &i)| field_at(model, sigma.vertices(), &v, &eta, *xi, i))
            .collect())
    };

    let t0 = times[0];
    let t_end = *times.last().expect("checked above");
    let span = t_end - t0;
    let ratio = span / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };

    let mut out = SigmaTrajectory {
        times: vec![t0],
        states: vec![sigma0.clone()],
        probes: probes.to_vec(),
        probe_paths: vec![y[n_atoms..].to_vec()],
    };
    let mut t = t0;
    for k in 0..steps {
        let t_next = if k + 1 == steps { t_end } else { t0 + (k + 1) as f64 * dt };
        let h = t_next - t;
        let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, d)| x + s * d).collect() };
        let k1 = velocity(t, &y)?;
        let k2 = velocity(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1))?;
        let k3 = velocity(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2))?;
        let k4 = velocity(t_next, &axpy(&y, h, &k3))?;
        for (idx, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
        t = t_next;
        if let Some(bad) = y.iter().find(|x| !x.is_finite() || x.abs() > limit) {
            return Err(Error::BlowUp {
                t,
                detail: format!("atom position {bad:e} left the admissible range"),
            });
        }
        out.times.push(t);
        out.states.push(sigma0.with_positions(&y[..n_atoms]));
        out.probe_paths.push(y[n_atoms..].to_vec());
    }
    Ok(out)
}

/// Outcome of one inequality checked along a run; `worst` is the largest
/// observed ratio of the left-hand side to its bound (≤ 1 means it holds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub passed: bool,
    pub worst: f64,
}

impl BoundCheck {
    fn from_worst(worst: f64) -> Self {
        Self {
            passed: worst <= 1.0 + 1e-12,
            worst,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    /// Growth constant `L_Φ(‖η₀‖ + C_ω) C_V^{1/2} max(1, m₂^{1/2})`.
    pub c_tilde: f64,
    /// Lipschitz constant `L_Φ C_V^{1/2} (‖η₀‖ + C_ω)`.
    pub c_bar: f64,
    /// Supremum in time of the second moment of `σ`.
    pub m2: f64,
    pub growth: BoundCheck,
    pub lipschitz: BoundCheck,
    pub continuity: BoundCheck,
}

impl FlowReport {
    pub fn all_passed(&self) -> bool {
        self.growth.passed && self.lipschitz.passed && self.continuity.passed
    }
}

/// Checks linear growth, Lipschitz dependence on the initial point and time
/// continuity of the probe trajectories against the ledger constants.
pub fn flow_property_suite(ledger: &BoundsLedger, traj: &SigmaTrajectory, mu: &BaseMeasure) -> FlowReport {
    let m2 = traj.states.iter().map(|s| s.second_moment(mu)).fold(0.0, f64::max);
    let c_bar = ledger.l_phi * ledger.c_v_sqrt() * ledger.eta_sup();
    let c_tilde = c_bar * m2.sqrt().max(1.0);
    let t0 = traj.times[0];

    let mut growth: f64 = 0.0;
    let mut lipschitz: f64 = 0.0;
    let mut continuity: f64 = 0.0;
    for (p, probe) in traj.probes.iter().enumerate() {
        let u = probe.position;
        let path: Vec<f64> = traj.probe_paths.iter().map(|row| row[p]).collect();
        let sup = path.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        for (k, (&t, &f)) in traj.times.iter().zip(&path).enumerate() {
            growth = growth.max(f.abs() / ((c_tilde * (t - t0)).exp() * (1.0 + u.abs())));
            if k > 0 {
                let step = traj.times[k] - traj.times[k - 1];
                let allowed = c_tilde * (1.0 + sup) * step;
                let inc = (f - path[k - 1]).abs();
                continuity = continuity.max(if allowed > 0.0 { inc / allowed } else if inc > 0.0 { f64::INFINITY } else { 0.0 });
            }
        }
        for (q, other) in traj.probes.iter().enumerate().skip(p + 1) {
            if other.vertex != probe.vertex {
                continue;
            }
            let gap0 = (u - other.position).abs();
            for (k, &t) in traj.times.iter().enumerate() {
                let gap = (traj.probe_paths[k][p] - traj.probe_paths[k][q]).abs();
                let bound = (c_bar * (t - t0)).exp() * gap0;
                let ratio = if bound > 0.0 {
                    gap / bound
                } else if gap > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                lipschitz = lipschitz.max(ratio);
            }
        }
    }
    FlowReport {
        c_tilde,
        c_bar,
        m2,
        growth: BoundCheck::from_worst(growth),
        lipschitz: BoundCheck::from_worst(lipschitz),
        continuity: BoundCheck::from_worst(continuity),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub initial_distance: f64,
    /// `D_{μ,d}` between the two advected trajectories.
    pub sup_distance: f64,
    /// `sup_distance / initial_distance`, or 0 when the inits coincide.
    pub ratio: f64,
    /// `√2·exp(C̄T + 𝒞̄(T)T)`.
    pub envelope: f64,
    pub identical_inits: bool,
}

impl StabilityReport {
    pub fn within_envelope(&self) -> bool {
        self.ratio <= self.envelope
    }
}

/// `√2·exp(C̄T + 𝒞̄(T)T)` with `C̄ = L_Φ C_V^{1/2}(‖η₀‖ + C_ω)` and
/// `𝒞(T) = C̄² exp(C̄² T²)`.
pub fn stability_envelope(ledger: &BoundsLedger, horizon: f64) -> f64 {
    let c_bar = ledger.l_phi * ledger.c_v_sqrt() * ledger.eta_sup();
    let c_sq = c_bar * c_bar;
    let cal = (c_sq * (c_sq * horizon * horizon).exp()).sqrt();
    2f64.sqrt() * (c_bar * horizon + cal * horizon).exp()
}

/// Advects two initial disintegrations through the same driving solution and
/// compares their distance with the stability envelope.
pub fn stability_experiment(
    model: &Model,
    ledger: &BoundsLedger,
    init_a: &AtomicDisintegration,
    init_b: &AtomicDisintegration,
    euler: &Trajectory,
    dt: f64,
) -> Result<StabilityReport> {
    let initial_distance = l2mu_d2(init_a, init_b, &model.mu)?;
    let a = advect(model, init_a, euler, dt)?;
    let b = advect(model, init_b, euler, dt)?;
    let sup_distance = dmu_sup(&a, &b, &model.mu)?;
    let horizon = euler.last().t - euler.first().t;
    let identical = initial_distance == 0.0;
    Ok(StabilityReport {
        initial_distance,
        sup_distance,
        ratio: if identical { 0.0 } else { sup_distance / initial_distance },
        envelope: stability_envelope(ledger, horizon),
        identical_inits: identical,
    })
}
