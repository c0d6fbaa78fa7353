//! Deliberately naive reference computations used to cross-check the engine.

use crate::dynamics::{CoupledState, Diagnostics, Model, Trajectory};
use crate::error::{check_len, Error, Result};
use crate::graph::{EdgeField, Symmetry, VertexDensity};
use crate::metrics::AtomSet1D;

/// Straightforward double loop for `(∂ₜr, ∂ₜη)`.
fn naive_rhs(model: &Model, r: &[f64], eta: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = r.len();
    let density = VertexDensity(r.to_vec());
    let v = model.velocity.evaluate(&density, &model.mu)?;
    let omega = model.omega.evaluate_unchecked(&density, &model.mu)?;
    let mut dr = vec![0.0; n];
    let mut deta = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            dr[i] -= model.flux.apply(r[i], r[j], v.get(i, j)) * eta[i][j] * model.mu.weights()[j];
            deta[i][j] = omega.get(i, j) - eta[i][j];
        }
    }
    Ok((dr, deta))
}

fn to_state(r: &[f64], eta: &[Vec<f64>], t: f64) -> CoupledState {
    let n = r.len();
    CoupledState {
        r: VertexDensity(r.to_vec()),
        eta: EdgeField::from_fn(n, Symmetry::Symmetric, |i, j| 0.5 * (eta[i][j] + eta[j][i])),
        t,
    }
}

fn euler_run(
    model: &Model,
    init: &CoupledState,
    dt: f64,
    t_end: f64,
    mut record: impl FnMut(&[f64], &[Vec<f64>], f64, usize),
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = init.r.len();
    let steps = (t_end / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::InvalidInput(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    let limit = 1e3 * init.r.sup_norm();
    let mut r = init.r.0.clone();
    let mut eta: Vec<Vec<f64>> = (0..n).map(|i| init.eta.row(i).to_vec()).collect();
    record(&r, &eta, init.t, 0);
    for k in 1..=steps {
        let (dr, deta) = naive_rhs(model, &r, &eta)?;
        for i in 0..n {
            r[i] += dt * dr[i];
            for j in 0..n {
                eta[i][j] += dt * deta[i][j];
            }
        }
        let t = init.t + k as f64 * dt;
        if r.iter().any(|x| !x.is_finite() || x.abs() > limit) {
            return Err(Error::BlowUp {
                t,
                detail: "reference integrator left the admissible range".into(),
            });
        }
        record(&r, &eta, t, k);
    }
    Ok((r, eta))
}

/// Explicit Euler with step `dt_fine`, recording every `stride`-th step.
pub fn reference_integrate(
    model: &Model,
    init: &CoupledState,
    dt_fine: f64,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory> {
    check_len(model.n(), init.r.len())?;
    if !(dt_fine > 0.0) || stride == 0 {
        return Err(Error::InvalidInput("dt_fine must be > 0 and stride >= 1".into()));
    }
    let mut traj = Trajectory {
        states: Vec::new(),
        diagnostics: Vec::new(),
    };
    euler_run(model, init, dt_fine, t_end, |r, eta, t, k| {
        if k % stride == 0 {
            let s = to_state(r, eta, t);
            traj.diagnostics.push(Diagnostics::of(&s, &model.mu));
            traj.states.push(s);
        }
    })?;
    Ok(traj)
}

/// State at `t_end` from explicit Euler runs with steps `dt, dt/2, …,
/// dt/2^{levels−1}`, combined by Richardson extrapolation to remove the error
/// terms of order `dt, dt², …, dt^{levels−1}`.
pub fn reference_final_state(
    model: &Model,
    init: &CoupledState,
    dt: f64,
    t_end: f64,
    levels: usize,
) -> Result<CoupledState> {
    check_len(model.n(), init.r.len())?;
    if levels == 0 {
        return Err(Error::InvalidInput("levels must be >= 1".into()));
    }
    let n = init.r.len();
    let flatten = |(r, eta): (Vec<f64>, Vec<Vec<f64>>)| -> Vec<f64> { r.into_iter().chain(eta.into_iter().flatten()).collect() };
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for level in 0..levels {
        let h = dt / f64::powi(2.0, level as i32);
        let mut row = flatten(euler_run(model, init, h, t_end, |_, _, _, _| {})?);
        // Neville-style elimination against the previous (coarser) diagonal.
        let mut factor = 2.0;
        for prev in table.iter_mut() {
            let improved: Vec<f64> = row.iter().zip(prev.iter()).map(|(f, c)| f + (f - c) / (factor - 1.0)).collect();
            *prev = std::mem::replace(&mut row, improved);
            factor *= 2.0;
        }
        table.push(row);
    }
    let best = table.pop().expect("levels >= 1");
    let eta: Vec<Vec<f64>> = best[n..].chunks(n).map(<[f64]>::to_vec).collect();
    Ok(to_state(&best[..n], &eta, init.t + t_end))
}

const BRUTE_FORCE_MAX: usize = 4;

/// Exact `W₂` by enumerating the vertices of the transport polytope.
pub fn bruteforce_w2(a: &AtomSet1D, b: &AtomSet1D) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    if m > BRUTE_FORCE_MAX || n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge(format!(
            "{m}×{n} atoms; at most {BRUTE_FORCE_MAX} per side"
        )));
    }
    let cost = |i: usize, j: usize| (a.positions()[i] - b.positions()[j]).powi(2);
    let mut best = f64::INFINITY;

    // North-west-corner rule under every ordering of rows and columns.
    for rows in permutations(m) {
        for cols in permutations(n) {
            let (mut sa, mut sb) = (a.weights().to_vec(), b.weights().to_vec());
            let (mut p, mut q, mut total) = (0, 0, 0.0);
            while p < m && q < n {
                let (i, j) = (rows[p], cols[q]);
                let w = sa[i].min(sb[j]);
                total += w * cost(i, j);
                sa[i] -= w;
                sb[j] -= w;
                if sa[i] <= 0.0 {
                    p += 1;
                } else {
                    q += 1;
                }
            }
            best = best.min(total);
        }
    }

    // Every basic solution is supported on a spanning tree of K_{m,n}.
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    for subset in combinations(cells.len(), m + n - 1) {
        let edges: Vec<(usize, usize)> = subset.iter().map(|&c| cells[c]).collect();
        if let Some(flows) = tree_flows(&edges, a.weights(), b.weights()) {
            if flows.iter().all(|f| *f >= -1e-14) {
                let total: f64 = edges.iter().zip(&flows).map(|(&(i, j), f)| f * cost(i, j)).sum();
                best = best.min(total);
            }
        }
    }
    Ok(best.max(0.0).sqrt())
}

/// Solves for the flows on a spanning tree by peeling leaves; `None` if the
/// edge set is not a spanning tree.
fn tree_flows(edges: &[(usize, usize)], supply: &[f64], demand: &[f64]) -> Option<Vec<f64>> {
    let m = supply.len();
    let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut degree = vec![0usize; residual.len()];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut flows = vec![0.0; edges.len()];
    let mut done = vec![false; edges.len()];
    for _ in 0..edges.len() {
        let (e, leaf) = edges.iter().enumerate().filter(|(e, _)| !done[*e]).find_map(|(e, &(i, j))| {
            if degree[i] == 1 {
                Some((e, i))
            } else if degree[m + j] == 1 {
                Some((e, m + j))
            } else {
                None
            }
        })?;
        let (i, j) = edges[e];
        let other = if leaf == i { m + j } else { i };
        let f = residual[leaf];
        flows[e] = f;
        residual[leaf] = 0.0;
        residual[other] -= f;
        degree[i] -= 1;
        degree[m + j] -= 1;
        done[e] = true;
    }
    // A forest with a cycle elsewhere would leave unbalanced residuals.
    residual.iter().all(|r| r.abs() <= 1e-12).then_some(flows)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            if n - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `y' = a y − b y²`, `y(0) = y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliParams {
    pub a: f64,
    pub b: f64,
    pub y0: f64,
}

/// `y(t) = y₀ a e^{at} / (a + b y₀ (e^{at} − 1))`, written without overflow.
pub fn bernoulli_closed_form(p: &BernoulliParams, times: &[f64]) -> Result<Vec<f64>> {
    if !(p.a > 0.0 && p.b > 0.0 && p.y0 >= 0.0) {
        return Err(Error::InvalidInput(format!("need a > 0, b > 0, y0 >= 0, got {p:?}")));
    }
    Ok(times
        .iter()
        .map(|&t| {
            let e = (-p.a * t).exp();
            p.y0 * p.a / (p.a * e + p.b * p.y0 * (1.0 - e))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `f ≤ g`.
    Below,
    /// `f ≥ g`.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub passed: bool,
    /// Largest signed violation of the ordering (≤ tolerance when passing).
    pub worst_excess: f64,
    pub tolerance: f64,
    pub first_violation: Option<f64>,
    /// `max_k |g(t_k) − g(t_0) − ∫ φ(g)|` with trapezoid quadrature; small
    /// when `g` really solves `g' = φ(g)`.
    pub g_residual: f64,
}

/// Pointwise ordering check between a sampled run `f` and a comparison
/// solution `g` of `g' = φ(g)`.
pub fn comparison_lemma_check(
    phi: impl Fn(f64) -> f64,
    times: &[f64],
    f: &[f64],
    g: &[f64],
    direction: Comparison,
) -> Result<ComparisonReport> {
    check_len(times.len(), f.len())?;
    check_len(times.len(), g.len())?;
    if times.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let scale = g.iter().chain(f).fold(1.0, |m: f64, x| m.max(x.abs()));
    let tolerance = 1e-6 * scale;
    let mut worst = f64::NEG_INFINITY;
    let mut first_violation = None;
    for ((&t, &fv), &gv) in times.iter().zip(f).zip(g) {
        let excess = match direction {
            Comparison::Below => fv - gv,
            Comparison::Above => gv - fv,
        };
        if excess > tolerance && first_violation.is_none() {
            first_violation = Some(t);
        }
        worst = worst.max(excess);
    }
    let mut integral = 0.0;
    let mut g_residual: f64 = 0.0;
    for k in 1..times.len() {
        integral += 0.5 * (times[k] - times[k - 1]) * (phi(g[k]) + phi(g[k - 1]));
        g_residual = g_residual.max((g[k] - g[0] - integral).abs());
    }
    Ok(ComparisonReport {
        passed: first_violation.is_none(),
        worst_excess: worst,
        tolerance,
        first_violation,
        g_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, step_rk4, IntegrateOptions, Scheme};
    use crate::fields::{AlphaProfile, OmegaSpec, VelocitySpec};
    use crate::graph::BaseMeasure;
    use crate::interpolation::FluxInterpolation;
    use crate::metrics::wasserstein_1d;
    use approx::assert_abs_diff_eq;

    fn model() -> Model {
        Model {
            mu: BaseMeasure::uniform_line(2).unwrap(),
            flux: FluxInterpolation::Upwind,
            velocity: VelocitySpec::Alpha(AlphaProfile::identity(0.0, 2.0).unwrap()),
            omega: OmegaSpec::constant(1.0),
        }
    }

    fn init() -> CoupledState {
        CoupledState::new(vec![2.0, 0.0].into(), EdgeField::constant(2, 1.0), 0.0).unwrap()
    }

    #[test]
    fn stationary_reference() {
        let s = CoupledState::new(vec![1.0, 1.0].into(), EdgeField::constant(2, 1.0), 0.0).unwrap();
        let traj = reference_integrate(&model(), &s, 1e-3, 1.0, 100).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.iter().all(|x| x.r == s.r && x.eta == s.eta));
    }

    #[test]
    fn reference_conserves_mass() {
        let traj = reference_integrate(&model(), &init(), 1e-4, 1.0, 1000).unwrap();
        assert!(traj.max_mass_drift() <= 1e-12);
    }

    #[test]
    fn one_rk4_step_matches_fine_euler() {
        let next = step_rk4(&model(), &init(), 1e-3).unwrap();
        let reference = reference_integrate(&model(), &init(), 1e-6, 1e-3, 1000).unwrap();
        for i in 0..2 {
            assert!((next.r[i] - reference.last().r[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn extrapolated_reference_matches_rk4() {
        let rk4 = integrate(&model(), &init(), &IntegrateOptions::new(Scheme::Rk4Coupled, 1e-3, 1.0)).unwrap();
        let reference = reference_final_state(&model(), &init(), 1e-3, 1.0, 4).unwrap();
        for i in 0..2 {
            assert!((rk4.last().r[i] - reference.r[i]).abs() < 1e-8);
        }
    }

    fn set(atoms: &[(f64, f64)]) -> AtomSet1D {
        AtomSet1D::new(atoms.iter().map(|a| a.0).collect(), atoms.iter().map(|a| a.1).collect()).unwrap()
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(bruteforce_w2(&AtomSet1D::dirac(1.0), &AtomSet1D::dirac(-2.0)).unwrap(), 3.0);
        let a = set(&[(0.0, 0.5), (1.0, 0.5)]);
        let b = set(&[(0.0, 0.5), (2.0, 0.5)]);
        assert_abs_diff_eq!(bruteforce_w2(&a, &b).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(bruteforce_w2(&a, &a).unwrap(), 0.0);
        let big = AtomSet1D::uniform(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(bruteforce_w2(&big, &a), Err(Error::TooLarge(_))));
    }

    #[test]
    fn bruteforce_matches_quantile_on_uneven_weights() {
        let a = set(&[(3.0, 0.1), (-1.0, 0.4), (0.5, 0.2), (2.0, 0.3)]);
        let b = set(&[(0.0, 0.25), (1.0, 0.35), (-2.0, 0.4)]);
        assert_abs_diff_eq!(bruteforce_w2(&a, &b).unwrap(), wasserstein_1d(2, &a, &b).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn bernoulli_examples() {
        let times = [0.0, 0.3, 2.0, 10.0];
        let eq = bernoulli_closed_form(&BernoulliParams { a: 2.0, b: 4.0, y0: 0.5 }, &times).unwrap();
        assert!(eq.iter().all(|y| (y - 0.5).abs() < 1e-15));
        let y = bernoulli_closed_form(&BernoulliParams { a: 1.0, b: 1.0, y0: 2.0 }, &times).unwrap();
        for (t, v) in times.iter().zip(&y) {
            assert_abs_diff_eq!(*v, 2.0 * t.exp() / (2.0 * t.exp() - 1.0), epsilon = 1e-14);
        }
        let zero = bernoulli_closed_form(&BernoulliParams { a: 1.0, b: 1.0, y0: 0.0 }, &times).unwrap();
        assert!(zero.iter().all(|y| *y == 0.0));
        assert!(bernoulli_closed_form(&BernoulliParams { a: 0.0, b: 1.0, y0: 1.0 }, &times).is_err());
    }

    #[test]
    fn bernoulli_ode_residual() {
        let p = BernoulliParams { a: 0.7, b: 1.3, y0: 2.5 };
        let h = 1e-5;
        for t in [0.1, 0.5, 1.0, 3.0, 8.0] {
            let y = bernoulli_closed_form(&p, &[t - h, t, t + h]).unwrap();
            let derivative = (y[2] - y[0]) / (2.0 * h);
            assert!((derivative - (p.a * y[1] - p.b * y[1] * y[1])).abs() < 1e-8);
        }
    }

    #[test]
    fn comparison_examples() {
        let p = BernoulliParams { a: 1.0, b: 1.0, y0: 2.0 };
        let phi = |y: f64| p.a * y - p.b * y * y;
        let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
        let g = bernoulli_closed_form(&p, &times).unwrap();
        let report = comparison_lemma_check(phi, &times, &g, &g, Comparison::Below).unwrap();
        assert!(report.passed && report.worst_excess == 0.0);
        assert!(report.g_residual < 1e-3);

        let above: Vec<f64> = g.iter().map(|y| y + 0.01).collect();
        let report = comparison_lemma_check(phi, &times, &above, &g, Comparison::Below).unwrap();
        assert_eq!(report.first_violation, Some(0.0));
        assert!(comparison_lemma_check(phi, &times, &above, &g, Comparison::Above).unwrap().passed);
    }

    #[test]
    fn permutation_and_combination_counts() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(combinations(16, 7).len(), 11440);
    }
}
