//! Velocity fields `V[r]` and edge-weight targets `ω[r]`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::graph::{BaseMeasure, EdgeField, Symmetry, VertexDensity};

/// Slack allowed when checking that a density stays in the working box of an
/// [`AlphaProfile`]; integration stages may round a hair outside it.
const BOX_SLACK: f64 = 1e-9;

/// Symmetric table `K[i][j] = K(x_i, x_j)`, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionKernelSpec {
    n: usize,
    values: Vec<f64>,
}

impl InteractionKernelSpec {
    pub fn from_table(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            values.extend(row);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel table is not finite".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "kernel table is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// `K(x, y) = exp(−|x − y|² / (2ℓ²))`.
    pub fn gaussian(mu: &BaseMeasure, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput("kernel length scale must be > 0".into()));
        }
        Ok(Self::from_pairs(mu, |d2| (-d2 / (2.0 * length * length)).exp()))
    }

    /// `K(x, y) = |x − y|² / 2`.
    pub fn quadratic(mu: &BaseMeasure) -> Self {
        Self::from_pairs(mu, |d2| 0.5 * d2)
    }

    fn from_pairs(mu: &BaseMeasure, k: impl Fn(f64) -> f64) -> Self {
        let n = mu.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = k(mu.squared_distance(i, j));
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Shape of the increasing profile `α` in `V(r_x, r_y) = α(r_x) − α(r_y)`.
#[derive(Clone)]
pub enum AlphaKind {
    /// `1 / (1 + e^{−x})`.
    Sigmoid,
    /// `tanh(g·x)`.
    TanhScaled { gain: f64 },
    /// `x`, bounded because it is only evaluated on the working box.
    Identity,
    /// Arbitrary profile with its derivative; `α'_*` is estimated by sampling.
    Custom {
        name: String,
        alpha: Arc<ScalarFn>,
        derivative: Arc<ScalarFn>,
    },
}

impl fmt::Debug for AlphaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sigmoid => f.write_str("Sigmoid"),
            Self::TanhScaled { gain } => write!(f, "TanhScaled({gain})"),
            Self::Identity => f.write_str("Identity"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Profile `α` together with its working box `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    pub kind: AlphaKind,
    pub lo: f64,
    pub hi: f64,
}

const CUSTOM_GRID: usize = 1001;

impl AlphaProfile {
    pub fn new(kind: AlphaKind, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("invalid working box [{lo}, {hi}]")));
        }
        if let AlphaKind::TanhScaled { gain } = kind {
            if !(gain > 0.0) {
                return Err(Error::InvalidInput("tanh gain must be > 0".into()));
            }
        }
        Ok(Self { kind, lo, hi })
    }

    /// Profile on the box `[0, ‖r₀‖_∞]`.
    pub fn for_initial(kind: AlphaKind, r0: &VertexDensity) -> Result<Self> {
        Self::new(kind, 0.0, r0.sup_norm())
    }

    pub fn sigmoid(lo: f64, hi: f64) -> Result<Self> {
        Self::new(AlphaKind::Sigmoid, lo, hi)
    }

    pub fn identity(lo: f64, hi: f64) -> Result<Self> {
        Self::new(AlphaKind::Identity, lo, hi)
    }

    pub fn custom(
        name: impl Into<String>,
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        Self::new(
            AlphaKind::Custom {
                name: name.into(),
                alpha: Arc::new(alpha),
                derivative: Arc::new(derivative),
            },
            lo,
            hi,
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            AlphaKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            AlphaKind::TanhScaled { gain } => (gain * x).tanh(),
            AlphaKind::Identity => x,
            AlphaKind::Custom { alpha, .. } => alpha(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            AlphaKind::Sigmoid => {
                let e = (-x.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            AlphaKind::TanhScaled { gain } => {
                let c = (gain * x).cosh();
                gain / (c * c)
            }
            AlphaKind::Identity => 1.0,
            AlphaKind::Custom { derivative, .. } => derivative(x),
        }
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..CUSTOM_GRID)
            .map(move |k| self.lo + (self.hi - self.lo) * k as f64 / (CUSTOM_GRID - 1) as f64)
    }

    /// `α'_* = inf_{box} α'`.
    ///
    /// Sigmoid and tanh derivatives are unimodal with their peak at 0, so the
    /// infimum sits at an endpoint of the box.
    pub fn alpha_prime_star(&self) -> f64 {
        match &self.kind {
            AlphaKind::Sigmoid | AlphaKind::TanhScaled { .. } => {
                self.derivative(self.lo).min(self.derivative(self.hi))
            }
            AlphaKind::Identity => 1.0,
            AlphaKind::Custom { .. } => self.grid().map(|x| self.derivative(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// `sup_{box} α'`.
    pub fn alpha_prime_sup(&self) -> f64 {
        match &self.kind {
            AlphaKind::Sigmoid | AlphaKind::TanhScaled { .. } => self.derivative(0f64.clamp(self.lo, self.hi)),
            AlphaKind::Identity => 1.0,
            AlphaKind::Custom { .. } => self.grid().map(|x| self.derivative(x)).fold(0.0, f64::max),
        }
    }

    /// Oscillation `sup α − inf α` on the box, a bound for `|V|`.
    pub fn range(&self) -> f64 {
        match &self.kind {
            AlphaKind::Custom { .. } => {
                let (lo, hi) = self
                    .grid()
                    .map(|x| self.eval(x))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                hi - lo
            }
            _ => self.eval(self.hi) - self.eval(self.lo),
        }
    }

    fn contains(&self, x: f64) -> bool {
        let slack = BOX_SLACK * (1.0 + (self.hi - self.lo).abs().max(self.hi.abs()));
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// Velocity field constructor used by the dynamics.
#[derive(Debug, Clone)]
pub enum VelocitySpec {
    /// `V[r](x, y) = −∫ (K(y, z) − K(x, z)) r(z) dμ(z)`.
    Kernel(InteractionKernelSpec),
    /// Pointwise monotone `V = α(r_x) − α(r_y)`.
    Alpha(AlphaProfile),
    /// Velocity that does not depend on the density.
    Static(EdgeField),
}

impl VelocitySpec {
    pub fn evaluate(&self, r: &VertexDensity, mu: &BaseMeasure) -> Result<EdgeField> {
        match self {
            Self::Kernel(k) => velocity_from_kernel(k, r, mu),
            Self::Alpha(a) => {
                check_len(mu.len(), r.len())?;
                velocity_from_alpha(a, r)
            }
            Self::Static(v) => {
                check_len(mu.len(), v.n())?;
                Ok(v.clone())
            }
        }
    }

    pub fn alpha(&self) -> Option<&AlphaProfile> {
        match self {
            Self::Alpha(a) => Some(a),
            _ => None,
        }
    }
}

/// `V[i][j] = −Σ_k (K[j][k] − K[i][k]) r_k m_k`.
pub fn velocity_from_kernel(
    spec: &InteractionKernelSpec,
    r: &VertexDensity,
    mu: &BaseMeasure,
) -> Result<EdgeField> {
    check_len(mu.len(), r.len())?;
    check_len(mu.len(), spec.n())?;
    let n = mu.len();
    let potential: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|k| spec.get(i, k) * r[k] * mu.weights()[k]).sum())
        .collect();
    // V = −∇̄(K * ρ), computed as a difference of the convolved potential.
    Ok(EdgeField::from_fn(n, Symmetry::Antisymmetric, |i, j| {
        -(potential[j] - potential[i])
    }))
}

/// `V[i][j] = α(r_i) − α(r_j)`.
pub fn velocity_from_alpha(alpha: &AlphaProfile, r: &VertexDensity) -> Result<EdgeField> {
    if let Some((i, x)) = r.iter().enumerate().find(|(_, x)| !alpha.contains(**x)) {
        return Err(Error::ContractViolation(format!(
            "density r[{i}] = {x} leaves the working box [{}, {}] of α",
            alpha.lo, alpha.hi
        )));
    }
    let a: Vec<f64> = r.iter().map(|x| alpha.eval(*x)).collect();
    Ok(EdgeField::from_fn(r.len(), Symmetry::Antisymmetric, |i, j| a[i] - a[j]))
}

/// Monotonicity condition probed by [`monotonicity_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    /// `r_x > r_y ⇒ V⁺(r_x, r') ≥ V⁺(r_y, r')`, strictly while `r_x > r'`.
    MoreMassMoreOutflow,
    /// `r_x < r_y ⇒ V⁻(r_x, r') ≥ V⁻(r_y, r')`, strictly while `r_x < r'`.
    LessMassMoreInflow,
    /// `r_x = r_y ⇒ V(r_x, r') = V(r_y, r')`.
    EqualMassEqualVelocity,
    /// `V(s, s) = 0`.
    NoSelfFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCheck {
    pub property: Monotonicity,
    pub passed: bool,
    /// `(r_x, r_y, r')` of the first failure.
    pub witness: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub samples: usize,
    pub checks: Vec<MonotonicityCheck>,
}

impl MonotonicityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, property: Monotonicity) -> &MonotonicityCheck {
        self.checks
            .iter()
            .find(|c| c.property == property)
            .expect("every property is checked")
    }
}

/// Randomized check that `α(a) − α(b)` is a monotone pointwise velocity on
/// the working box.
pub fn monotonicity_suite(alpha: &AlphaProfile, samples: usize, seed: u64) -> Result<MonotonicityReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let v = |a: f64, b: f64| alpha.eval(a) - alpha.eval(b);
    let pos = |x: f64| x.max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        if alpha.hi > alpha.lo {
            rng.gen_range(alpha.lo..=alpha.hi)
        } else {
            alpha.lo
        }
    };
    let mut witnesses: [Option<[f64; 3]>; 4] = [None; 4];
    for _ in 0..samples {
        let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (hi, lo) = (x.max(y), x.min(y));
        if hi > lo {
            let (out_hi, out_lo) = (pos(v(hi, z)), pos(v(lo, z)));
            let ok = out_hi >= out_lo && (hi <= z || out_hi > out_lo);
            if !ok && witnesses[0].is_none() {
                witnesses[0] = Some([hi, lo, z]);
            }
            let (in_lo, in_hi) = (pos(-v(lo, z)), pos(-v(hi, z)));
            let ok = in_lo >= in_hi && (lo >= z || in_lo > in_hi);
            if !ok && witnesses[1].is_none() {
                witnesses[1] = Some([lo, hi, z]);
            }
        }
        if v(x, z) != v(x, z) && witnesses[2].is_none() {
            witnesses[2] = Some([x, x, z]);
        }
        if v(x, x) != 0.0 && witnesses[3].is_none() {
            witnesses[3] = Some([x, x, x]);
        }
    }
    let props = [
        Monotonicity::MoreMassMoreOutflow,
        Monotonicity::LessMassMoreInflow,
        Monotonicity::EqualMassEqualVelocity,
        Monotonicity::NoSelfFlow,
    ];
    Ok(MonotonicityReport {
        samples,
        checks: props
            .into_iter()
            .zip(witnesses)
            .map(|(property, witness)| MonotonicityCheck {
                property,
                passed: witness.is_none(),
                witness,
            })
            .collect(),
    })
}

/// Third-order table `W[i][j][k]`, symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaKernel {
    n: usize,
    values: Vec<f64>,
}

impl OmegaKernel {
    pub fn from_fn(n: usize, mut w: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    values[(i * n + j) * n + k] = w(i, j, k);
                }
            }
        }
        let kernel = Self { n, values };
        kernel.validate()?;
        Ok(kernel)
    }

    /// `W ≡ c`.
    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            n,
            values: vec![c; n * n * n],
        }
    }

    /// `W(x, y, z) = scale·exp(−(|x−z|² + |y−z|²)/(2ℓ²)) + floor`.
    pub fn gaussian(mu: &BaseMeasure, length: f64, scale: f64, floor: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput("omega length scale must be > 0".into()));
        }
        let s = 2.0 * length * length;
        Self::from_fn(mu.len(), |i, j, k| {
            scale * (-(mu.squared_distance(i, k) + mu.squared_distance(j, k)) / s).exp() + floor
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("omega kernel is not finite".into()));
        }
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    if self.get(i, j, k) != self.get(j, i, k) {
                        return Err(Error::InvalidInput(format!(
                            "omega kernel is not symmetric in its first two indices at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n + j) * self.n + k]
    }

    /// `max_{i,j} Σ_k |W[i][j][k]| m_k`.
    pub fn row_mass(&self, mu: &BaseMeasure) -> f64 {
        let n = self.n;
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let s: f64 = (0..n).map(|k| self.get(i, j, k).abs() * mu.weights()[k]).sum();
                    best = best.max(s);
                }
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaKind {
    Constant(f64),
    Kernel(OmegaKernel),
}

/// Target `ω[r]` for the edge weights together with its declared lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSpec {
    pub kind: OmegaKind,
    /// Declared `ω_*`; zero means no positivity claim.
    pub omega_star: f64,
}

impl OmegaSpec {
    /// Constant target; `ω_*` defaults to `max(c, 0)`.
    pub fn constant(c: f64) -> Self {
        Self {
            kind: OmegaKind::Constant(c),
            omega_star: c.max(0.0),
        }
    }

    pub fn kernel(w: OmegaKernel, omega_star: f64) -> Self {
        Self {
            kind: OmegaKind::Kernel(w),
            omega_star,
        }
    }

    /// Evaluates `ω[r]` without the `ω_*` runtime check.
    pub(crate) fn evaluate_unchecked(&self, r: &VertexDensity, mu: &BaseMeasure) -> Result<EdgeField> {
        check_len(mu.len(), r.len())?;
        let n = mu.len();
        match &self.kind {
            OmegaKind::Constant(c) => Ok(EdgeField::constant(n, *c)),
            OmegaKind::Kernel(w) => {
                check_len(n, w.n())?;
                let weighted: Vec<f64> = r.iter().zip(mu.weights()).map(|(x, m)| x * m).collect();
                Ok(EdgeField::from_fn(n, Symmetry::Symmetric, |i, j| {
                    (0..n).map(|k| w.get(i, j, k) * weighted[k]).sum()
                }))
            }
        }
    }
}

/// `ω[i][j] = Σ_k W[i][j][k] r_k m_k` (or the constant), checked against `ω_*`
/// whenever `r` is nonnegative.
pub fn omega_eval(spec: &OmegaSpec, r: &VertexDensity, mu: &BaseMeasure) -> Result<EdgeField> {
    let omega = spec.evaluate_unchecked(r, mu)?;
    if spec.omega_star > 0.0 && r.is_nonnegative() {
        let tol = 1e-9 * spec.omega_star.max(1.0);
        let n = omega.n();
        for i in 0..n {
            for j in 0..n {
                if i != j && omega.get(i, j) < spec.omega_star - tol {
                    return Err(Error::ContractViolation(format!(
                        "ω[{i}][{j}] = {} is below the declared ω_* = {}",
                        omega.get(i, j),
                        spec.omega_star
                    )));
                }
            }
        }
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_velocity_examples() {
        let mu = BaseMeasure::uniform_line(3).unwrap();
        let k = InteractionKernelSpec::gaussian(&mu, 0.8).unwrap();
        let v = velocity_from_kernel(&k, &VertexDensity::constant(3, 0.0), &mu).unwrap();
        assert_eq!(v.max_abs(), 0.0);

        let flat = InteractionKernelSpec::from_table(vec![vec![2.0; 3]; 3]).unwrap();
        let v = velocity_from_kernel(&flat, &vec![1.0, 5.0, 2.0].into(), &mu).unwrap();
        assert_eq!(v.max_abs(), 0.0);

        let mu = BaseMeasure::uniform_line(2).unwrap();
        let k = InteractionKernelSpec::from_table(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = velocity_from_kernel(&k, &vec![1.0, 0.0].into(), &mu).unwrap();
        // −[(K10 − K00)·1·½ + (K11 − K01)·0·½]
        assert_eq!(v.get(0, 1), -0.5);
        assert_eq!(v.get(1, 0), 0.5);
    }

    #[test]
    fn kernel_velocity_matches_direct_sum() {
        let mu = BaseMeasure::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.3, 2.0], vec![-1.0, 1.0]],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let k = InteractionKernelSpec::quadratic(&mu);
        let r: VertexDensity = vec![0.5, 1.5, 0.0, 2.0].into();
        let v = velocity_from_kernel(&k, &r, &mu).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let direct: f64 = -(0..4)
                    .map(|z| (k.get(j, z) - k.get(i, z)) * r[z] * mu.weights()[z])
                    .sum::<f64>();
                assert_abs_diff_eq!(v.get(i, j), direct, epsilon = 1e-14);
                assert_eq!(v.get(i, j), -v.get(j, i));
            }
        }
    }

    #[test]
    fn alpha_velocity_examples() {
        let id = AlphaProfile::identity(0.0, 3.0).unwrap();
        let v = velocity_from_alpha(&id, &vec![1.0, 3.0].into()).unwrap();
        assert_eq!(v.get(0, 1), -2.0);
        let v = velocity_from_alpha(&id, &vec![2.0, 2.0].into()).unwrap();
        assert_eq!(v.get(0, 1), 0.0);

        let sig = AlphaProfile::sigmoid(0.0, 1.0).unwrap();
        let v = velocity_from_alpha(&sig, &vec![0.0, 1.0].into()).unwrap();
        // 1/2 − 1/(1 + e^{−1}) with e^{−1} = 0.36787944117144233.
        assert_abs_diff_eq!(v.get(0, 1), 0.5 - 1.0 / 1.367_879_441_171_442_3, epsilon = 1e-15);
        assert_abs_diff_eq!(v.get(0, 1), -0.231_058_578_630_004_9, epsilon = 1e-15);
    }

    #[test]
    fn alpha_velocity_rejects_out_of_box() {
        let id = AlphaProfile::identity(0.0, 2.0).unwrap();
        assert!(matches!(
            velocity_from_alpha(&id, &vec![1.0, 2.5].into()),
            Err(Error::ContractViolation(_))
        ));
        assert!(velocity_from_alpha(&id, &vec![-0.1, 1.0].into()).is_err());
    }

    #[test]
    fn monotonicity_of_profiles() {
        let sig = AlphaProfile::sigmoid(0.0, 2.0).unwrap();
        assert!(monotonicity_suite(&sig, 5_000, 1).unwrap().all_passed());
        let id = AlphaProfile::identity(0.0, 2.0).unwrap();
        assert!(monotonicity_suite(&id, 5_000, 2).unwrap().all_passed());
        let tanh = AlphaProfile::new(AlphaKind::TanhScaled { gain: 0.7 }, 0.0, 3.0).unwrap();
        assert!(monotonicity_suite(&tanh, 5_000, 3).unwrap().all_passed());
    }

    #[test]
    fn constant_profile_fails_outflow_condition() {
        let flat = AlphaProfile::custom("flat", |_| 0.3, |_| 0.0, 0.0, 2.0).unwrap();
        let report = monotonicity_suite(&flat, 1_000, 4).unwrap();
        let first = report.check(Monotonicity::MoreMassMoreOutflow);
        assert!(!first.passed);
        let [hi, lo, _] = first.witness.unwrap();
        assert!(hi > lo);
        assert!(report.check(Monotonicity::NoSelfFlow).passed);
    }

    #[test]
    fn omega_examples() {
        let mu = BaseMeasure::uniform_line(3).unwrap();
        let r: VertexDensity = vec![1.0, 0.0, 2.0].into();
        let w = omega_eval(&OmegaSpec::constant(1.0), &r, &mu).unwrap();
        assert_eq!(w.min_offdiag(), Some(1.0));
        assert_eq!(w.max_offdiag(), Some(1.0));
        assert_eq!(w.get(1, 1), 0.0);

        let ones = OmegaSpec::kernel(OmegaKernel::constant(3, 1.0), 0.0);
        let w = omega_eval(&ones, &r, &mu).unwrap();
        let mass = mu.integrate(&r);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_abs_diff_eq!(w.get(i, j), mass, epsilon = 1e-15);
                }
            }
        }

        let mu = BaseMeasure::uniform_line(2).unwrap();
        let table = OmegaKernel::from_fn(2, |i, j, k| if i != j { [2.0, 4.0][k] } else { 0.0 }).unwrap();
        let w = omega_eval(&OmegaSpec::kernel(table, 0.0), &vec![1.0, 1.0].into(), &mu).unwrap();
        assert_eq!(w.get(0, 1), 3.0);
        assert_eq!(w.get(1, 0), 3.0);
    }

    #[test]
    fn omega_star_violation_reported() {
        let mu = BaseMeasure::uniform_line(2).unwrap();
        let spec = OmegaSpec::kernel(OmegaKernel::constant(2, 1.0), 2.0);
        let err = omega_eval(&spec, &vec![1.0, 1.0].into(), &mu).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(ref m) if m.contains("ω_*")));
        // Negative densities are outside the hypothesis and are not checked.
        assert!(omega_eval(&spec, &vec![-1.0, 1.0].into(), &mu).is_ok());
    }

    #[test]
    fn omega_kernel_must_be_symmetric() {
        assert!(OmegaKernel::from_fn(2, |i, _, _| i as f64).is_err());
    }

    #[test]
    fn sigmoid_derivative_extremes() {
        let sig = AlphaProfile::sigmoid(0.0, 2.0).unwrap();
        let e = (-2.0f64).exp();
        assert_abs_diff_eq!(sig.alpha_prime_star(), e / ((1.0 + e) * (1.0 + e)), epsilon = 1e-16);
        assert_abs_diff_eq!(sig.alpha_prime_star(), 0.104_993_585_403_506_6, epsilon = 1e-15);
        assert_eq!(sig.alpha_prime_sup(), 0.25);
    }
}
