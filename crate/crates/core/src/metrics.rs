//! One-dimensional transport distances, disintegrated metrics, the
//! contraction dissipation identity and the long-time bound curves.

use crate::bounds::BoundsLedger;
use crate::error::{check_len, Error, Result};
use crate::graph::{BaseMeasure, EdgeField, VertexDensity};
use crate::graph_ce::{AtomicDisintegration, SigmaTrajectory};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability measure on ℝ with finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSet1D {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl AtomSet1D {
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_len(positions.len(), weights.len())?;
        if positions.is_empty() {
            return Err(Error::InvalidInput("an atom set needs at least one atom".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("atom positions must be finite".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::ContractViolation("atom weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL * weights.len() as f64 {
            return Err(Error::ContractViolation(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Self { positions, weights })
    }

    pub fn dirac(x: f64) -> Self {
        Self {
            positions: vec![x],
            weights: vec![1.0],
        }
    }

    /// Equal weights `1/k`.
    pub fn uniform(positions: Vec<f64>) -> Result<Self> {
        let k = positions.len();
        Self::new(positions, vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.positions.iter().zip(&self.weights).map(|(x, w)| w * x * x).sum()
    }

    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self.positions.iter().copied().zip(self.weights.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms
    }
}

/// `W_p(a, b)` for `p ∈ {1, 2}` through the monotone (quantile) coupling.
pub fn wasserstein_1d(p: u32, a: &AtomSet1D, b: &AtomSet1D) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::InvalidInput(format!("p must be 1 or 2, got {p}")));
    }
    let (xa, xb) = (a.sorted(), b.sorted());
    let (mut i, mut j) = (0, 0);
    let (mut wa, mut wb) = (xa[0].1, xb[0].1);
    let mut cost = 0.0;
    // Rounding remnants at the very end carry negligible weight.
    while i < xa.len() && j < xb.len() {
        let w = wa.min(wb);
        let gap = (xa[i].0 - xb[j].0).abs();
        cost += w * if p == 1 { gap } else { gap * gap };
        wa -= w;
        wb -= w;
        if wa <= 0.0 {
            i += 1;
            wa = xa.get(i).map_or(0.0, |x| x.1);
        }
        if wb <= 0.0 {
            j += 1;
            wb = xb.get(j).map_or(0.0, |x| x.1);
        }
    }
    Ok(if p == 1 { cost } else { cost.sqrt() })
}

/// `(Σ_i m_i d₂(σ¹_i, σ²_i)²)^{1/2}`.
pub fn l2mu_d2(s1: &AtomicDisintegration, s2: &AtomicDisintegration, mu: &BaseMeasure) -> Result<f64> {
    check_len(mu.len(), s1.n())?;
    check_len(mu.len(), s2.n())?;
    let mut acc = 0.0;
    for i in 0..mu.len() {
        let d = wasserstein_1d(2, s1.vertex(i), s2.vertex(i))?;
        acc += mu.weights()[i] * d * d;
    }
    Ok(acc.sqrt())
}

/// `sup_t L²_μd₂(σ¹_t, σ²_t)` over aligned trajectories.
pub fn dmu_sup(a: &SigmaTrajectory, b: &SigmaTrajectory, mu: &BaseMeasure) -> Result<f64> {
    if a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
    {
        return Err(Error::InvalidInput("trajectories are recorded on different time grids".into()));
    }
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| l2mu_d2(x, y, mu))
        .try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
}

/// Exact time derivative of `Σ_i m_i Δ_i²` under the upwind flux with a
/// velocity shared by both solutions, together with the bound term.
///
/// Returns `(−2Σ_i m_i Δ_i [Δ_i Σ_j V⁺_ij η_ij m_j − Σ_j Δ_j V⁻_ij η_ij m_j],
/// −Σ_i m_i Δ_i² Σ_j V_ij η_ij m_j)` with `Δ = r¹ − r²`. The first never
/// exceeds the second when `η ≥ 0`.
pub fn contraction_dissipation(
    r1: &VertexDensity,
    r2: &VertexDensity,
    v: &EdgeField,
    eta: &EdgeField,
    mu: &BaseMeasure,
) -> Result<(f64, f64)> {
    let n = mu.len();
    check_len(n, r1.len())?;
    check_len(n, r2.len())?;
    check_len(n, v.n())?;
    check_len(n, eta.n())?;
    v.require_antisymmetric()?;
    eta.require_symmetric()?;
    if eta.min_offdiag().is_some_and(|x| x < 0.0) {
        return Err(Error::ContractViolation("edge weights must be nonnegative".into()));
    }
    let m = mu.weights();
    let delta: Vec<f64> = r1.iter().zip(r2.iter()).map(|(a, b)| a - b).collect();
    let (mut identity, mut bound) = (0.0, 0.0);
    for i in 0..n {
        let (mut out, mut inflow, mut net) = (0.0, 0.0, 0.0);
        for j in 0..n {
            if i == j {
                continue;
            }
            let (vij, w) = (v.get(i, j), eta.get(i, j) * m[j]);
            out += vij.max(0.0) * w;
            inflow += delta[j] * (-vij).max(0.0) * w;
            net += vij * w;
        }
        identity += -2.0 * m[i] * delta[i] * (delta[i] * out - inflow);
        bound += -m[i] * delta[i] * delta[i] * net;
    }
    Ok((identity, bound))
}

/// `max_i r_i − min_i r_i`.
pub fn diameter(r: &VertexDensity) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        r.max() - r.min()
    }
}

fn bernoulli_rate(ledger: &BoundsLedger) -> Result<f64> {
    let named = [
        ("M", ledger.mass),
        ("η_*", ledger.eta_star),
        ("α'_*", ledger.alpha_prime_star),
        ("μ(K)", ledger.mu_k),
    ];
    if let Some((name, value)) = named.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(format!("ledger entry {name} = {value} must be > 0")));
    }
    Ok(ledger.alpha_prime_star * ledger.eta_star * ledger.mass)
}

/// Upper envelope for `max_i r_i(t)`:
/// `R a e^{at} / (a + R b (e^{at} − 1))` with `R = ‖r₀‖_∞`, `a = α'_* η_* M`,
/// `b = α'_* η_* μ(K)`, evaluated in a form that does not overflow.
pub fn sup_bound_curve(ledger: &BoundsLedger, times: &[f64]) -> Result<Vec<f64>> {
    let a = bernoulli_rate(ledger)?;
    let (big_r, m, k) = (ledger.norm_r0_inf, ledger.mass, ledger.mu_k);
    if !(big_r > 0.0) {
        return Err(Error::InvalidInput("ledger entry ‖r₀‖_∞ must be > 0".into()));
    }
    Ok(times
        .iter()
        .map(|&t| {
            let e = (-a * t).exp();
            big_r * m / (big_r * k * (1.0 - e) + m * e)
        })
        .collect())
}

/// Lower envelope for `min_i r_i(t)`; identically zero when `r0_min = 0`.
pub fn inf_bound_curve(ledger: &BoundsLedger, r0_min: f64, times: &[f64]) -> Result<Vec<f64>> {
    if !(r0_min >= 0.0) {
        return Err(Error::InvalidInput(format!("r0_min must be >= 0, got {r0_min}")));
    }
    let a = bernoulli_rate(ledger)?;
    if r0_min == 0.0 {
        return Ok(vec![0.0; times.len()]);
    }
    let (m, k) = (ledger.mass, ledger.mu_k);
    Ok(times
        .iter()
        .map(|&t| {
            let e = (-a * t).exp();
            r0_min * m / (m * e + (1.0 - e) * k * r0_min)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Symmetry;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn set(atoms: &[(f64, f64)]) -> AtomSet1D {
        AtomSet1D::new(atoms.iter().map(|a| a.0).collect(), atoms.iter().map(|a| a.1).collect()).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        for p in [1, 2] {
            assert_eq!(wasserstein_1d(p, &AtomSet1D::dirac(0.5), &AtomSet1D::dirac(-1.5)).unwrap(), 2.0);
        }
        let a = set(&[(0.0, 0.5), (1.0, 0.5)]);
        let b = set(&[(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(wasserstein_1d(2, &a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(wasserstein_1d(2, &a, &b).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(wasserstein_1d(1, &a, &b).unwrap(), 0.5, epsilon = 1e-15);
        assert!(wasserstein_1d(3, &a, &b).is_err());
    }

    #[test]
    fn unnormalized_sets_rejected() {
        assert!(matches!(
            AtomSet1D::new(vec![0.0, 1.0], vec![0.5, 0.6]),
            Err(Error::ContractViolation(_))
        ));
        assert!(AtomSet1D::new(vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn wasserstein_uneven_partition() {
        let a = set(&[(0.0, 0.3), (1.0, 0.7)]);
        let b = set(&[(0.5, 0.6), (3.0, 0.4)]);
        // Coupling: 0.3 (0→0.5), 0.3 (1→0.5), 0.4 (1→3).
        let expected = (0.3 * 0.25 + 0.3 * 0.25 + 0.4 * 4.0f64).sqrt();
        assert_abs_diff_eq!(wasserstein_1d(2, &a, &b).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn disintegrated_distance_examples() {
        let mu = BaseMeasure::uniform_line(2).unwrap();
        let s1 = AtomicDisintegration::new(vec![set(&[(0.0, 0.5), (1.0, 0.5)]), AtomSet1D::dirac(3.0)], &mu).unwrap();
        let s2 = AtomicDisintegration::new(vec![set(&[(0.0, 0.5), (2.0, 0.5)]), AtomSet1D::dirac(3.0)], &mu).unwrap();
        assert_eq!(l2mu_d2(&s1, &s1, &mu).unwrap(), 0.0);
        assert_abs_diff_eq!(l2mu_d2(&s1, &s2, &mu).unwrap(), 0.5, epsilon = 1e-15);

        let r1: VertexDensity = vec![1.0, 2.0].into();
        let r2: VertexDensity = vec![0.0, 4.0].into();
        let d = l2mu_d2(
            &AtomicDisintegration::monokinetic(&r1, &mu).unwrap(),
            &AtomicDisintegration::monokinetic(&r2, &mu).unwrap(),
            &mu,
        )
        .unwrap();
        assert_abs_diff_eq!(d, r1.l2_distance(&r2, &mu), epsilon = 1e-15);
    }

    #[test]
    fn dissipation_examples() {
        let mu = BaseMeasure::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let v = EdgeField::from_fn(4, Symmetry::Antisymmetric, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let eta = EdgeField::from_fn(4, Symmetry::Symmetric, |i, j| 1.0 + (i * j) as f64);
        let r: VertexDensity = vec![0.3, 1.2, 0.0, 2.0].into();
        assert_eq!(contraction_dissipation(&r, &r, &v, &eta, &mu).unwrap(), (0.0, 0.0));

        let shifted: VertexDensity = r.iter().map(|x| x + 0.7).collect::<Vec<_>>().into();
        let (identity, bound) = contraction_dissipation(&shifted, &r, &v, &eta, &mu).unwrap();
        assert_abs_diff_eq!(bound, 0.0, epsilon = 1e-14);
        assert!(identity <= bound + 1e-14);

        let sym = EdgeField::constant(4, 1.0);
        assert!(contraction_dissipation(&r, &r, &sym, &eta, &mu).is_err());
        assert!(contraction_dissipation(&r, &r, &v, &v, &mu).is_err());
    }

    fn unit_ledger(r0: f64) -> BoundsLedger {
        BoundsLedger {
            l_phi: 1.0,
            c_v: 1.0,
            c_v_l2: 1.0,
            c_v_certified: true,
            l_v: 2.0,
            c_omega: 1.0,
            l_omega: 0.0,
            omega_star: 1.0,
            eta_star: 1.0,
            alpha_prime_star: 1.0,
            mass: 1.0,
            norm_r0_inf: r0,
            norm_r0_l2: r0,
            norm_eta0_inf: 1.0,
            eta0_min: 1.0,
            r0_min: 0.0,
            mu_k: 1.0,
        }
    }

    #[test]
    fn sup_bound_examples() {
        let times = [0.0, 0.5, 3.0, 800.0];
        let curve = sup_bound_curve(&unit_ledger(2.0), &times).unwrap();
        for (t, b) in times.iter().zip(&curve) {
            let expected = if *t < 100.0 { 2.0 * t.exp() / (2.0 * t.exp() - 1.0) } else { 1.0 };
            assert_abs_diff_eq!(*b, expected, epsilon = 1e-14);
        }
        let flat = sup_bound_curve(&unit_ledger(1.0), &times).unwrap();
        assert!(flat.iter().all(|b| (b - 1.0).abs() < 1e-15));

        let mut bad = unit_ledger(2.0);
        bad.eta_star = 0.0;
        assert!(sup_bound_curve(&bad, &times).is_err());
    }

    #[test]
    fn inf_bound_examples() {
        let times = [0.0, 1.0, 4.0, 900.0];
        let ledger = unit_ledger(2.0);
        let curve = inf_bound_curve(&ledger, 0.5, &times).unwrap();
        for (t, b) in times.iter().zip(&curve) {
            let expected = if *t < 100.0 { 0.5 * t.exp() / (1.0 + 0.5 * (t.exp() - 1.0)) } else { 1.0 };
            assert_abs_diff_eq!(*b, expected, epsilon = 1e-14);
        }
        assert_eq!(inf_bound_curve(&ledger, 0.0, &times).unwrap(), vec![0.0; 4]);
        let flat = inf_bound_curve(&ledger, 1.0, &times).unwrap();
        assert!(flat.iter().all(|b| (b - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&vec![3.0; 4].into()), 0.0);
        assert_eq!(diameter(&vec![2.0, 0.0].into()), 2.0);
    }

    fn atom_set() -> impl Strategy<Value = AtomSet1D> {
        prop::collection::vec((-10.0f64..10.0, 0.05f64..1.0), 1..6).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let k = atoms.len();
            let mut weights: Vec<f64> = atoms.iter().map(|a| a.1 / total).collect();
            let head: f64 = weights[..k - 1].iter().sum();
            weights[k - 1] = 1.0 - head;
            AtomSet1D::new(atoms.iter().map(|a| a.0).collect(), weights).unwrap()
        })
    }

    proptest! {
        #[test]
        fn wasserstein_metric_axioms(a in atom_set(), b in atom_set(), c in atom_set()) {
            for p in [1, 2] {
                let ab = wasserstein_1d(p, &a, &b).unwrap();
                prop_assert_eq!(ab, wasserstein_1d(p, &b, &a).unwrap());
                prop_assert_eq!(wasserstein_1d(p, &a, &a).unwrap(), 0.0);
                let ac = wasserstein_1d(p, &a, &c).unwrap();
                let cb = wasserstein_1d(p, &c, &b).unwrap();
                prop_assert!(ab <= ac + cb + 1e-12);
            }
        }
    }
}
