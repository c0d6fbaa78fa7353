//! Flux interpolations `Φ(a, b; v)` turning two vertex densities and an edge
//! velocity into an edge flux, with a randomized admissibility checker.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type TernaryFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// An admissible flux interpolation.
#[derive(Clone)]
pub enum FluxInterpolation {
    /// `a·v₊ − b·v₋`: the donor cell is selected by the sign of the velocity.
    Upwind,
    /// `((a + b)/2)·v`.
    ProductMean,
    /// `max(a, b)·v`.
    ProductMax,
    /// User-supplied interpolation with a declared Lipschitz constant.
    Custom {
        name: String,
        lipschitz: f64,
        f: Arc<TernaryFn>,
    },
}

impl fmt::Debug for FluxInterpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FluxInterpolation {
    pub fn custom(
        name: impl Into<String>,
        lipschitz: f64,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom {
            name: name.into(),
            lipschitz,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Upwind => "upwind".into(),
            Self::ProductMean => "product-mean".into(),
            Self::ProductMax => "product-max".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_upwind(&self) -> bool {
        matches!(self, Self::Upwind)
    }

    /// Declared `L_Φ`; the three built-ins use 1.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Custom { lipschitz, .. } => *lipschitz,
            _ => 1.0,
        }
    }

    /// Evaluates `Φ(a, b; v)` without input validation.
    #[inline]
    pub fn apply(&self, a: f64, b: f64, v: f64) -> f64 {
        match self {
            Self::Upwind => a * v.max(0.0) - b * (-v).max(0.0),
            Self::ProductMean => 0.5 * (a + b) * v,
            Self::ProductMax => a.max(b) * v,
            Self::Custom { f, .. } => f(a, b, v),
        }
    }

    /// Evaluates `Φ(a, b; v)`, rejecting non-finite arguments.
    pub fn eval(&self, a: f64, b: f64, v: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite() && v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite flux arguments ({a}, {b}; {v})"
            )));
        }
        Ok(self.apply(a, b, v))
    }
}

/// Property probed by [`admissibility_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    /// `Φ(a, b; 0) = 0`.
    ZeroVelocity,
    /// `Φ(0, 0; v) = 0`.
    ZeroDensities,
    /// `|Φ(a,b;w) − Φ(a,b;v)| ≤ L_Φ(|a|+|b|)|w−v|`.
    LipschitzInVelocity,
    /// `|Φ(a,b;v) − Φ(c,d;v)| ≤ L_Φ(|a−c|+|b−d|)|v|`.
    LipschitzInDensities,
    /// `Φ(αa, αb; w) = αΦ(a, b; w)` for `α > 0`.
    Homogeneity,
    /// `Φ(a, b; −v) = −Φ(b, a; v)`.
    JointAntisymmetry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub property: Admissibility,
    pub passed: bool,
    /// Largest observed excess over the allowed bound (≤ 0 when passing).
    pub worst_excess: f64,
    /// Arguments realizing the worst excess.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub interpolation: String,
    pub samples: usize,
    pub checks: Vec<PropertyCheck>,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, property: Admissibility) -> &PropertyCheck {
        self.checks
            .iter()
            .find(|c| c.property == property)
            .expect("every property is checked")
    }
}

struct Tracker {
    property: Admissibility,
    worst: f64,
    witness: Vec<f64>,
}

impl Tracker {
    fn new(property: Admissibility) -> Self {
        Self {
            property,
            worst: f64::NEG_INFINITY,
            witness: Vec::new(),
        }
    }

    /// Records `lhs ≤ bound + tol`; NaN counts as a violation.
    fn record(&mut self, lhs: f64, bound: f64, tol: f64, args: &[f64]) {
        let excess = if lhs.is_nan() { f64::INFINITY } else { lhs - bound - tol };
        if excess > self.worst {
            self.worst = excess;
            self.witness = args.to_vec();
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            property: self.property,
            passed: self.worst <= 0.0,
            worst_excess: self.worst,
            witness: self.witness,
        }
    }
}

fn sample_value(rng: &mut ChaCha8Rng) -> f64 {
    // Exact zeros and ties show up often enough to exercise the kinks.
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => rng.gen_range(-1.0..1.0) * 1e-3,
        _ => rng.gen_range(-10.0..10.0),
    }
}

/// Randomized check of the admissibility conditions with the declared `L_Φ`.
pub fn admissibility_suite(phi: &FluxInterpolation, samples: usize, seed: u64) -> Result<AdmissibilityReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let lip = phi.lipschitz();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zero_v = Tracker::new(Admissibility::ZeroVelocity);
    let mut zero_ab = Tracker::new(Admissibility::ZeroDensities);
    let mut lip_v = Tracker::new(Admissibility::LipschitzInVelocity);
    let mut lip_ab = Tracker::new(Admissibility::LipschitzInDensities);
    let mut homog = Tracker::new(Admissibility::Homogeneity);
    let mut anti = Tracker::new(Admissibility::JointAntisymmetry);

    for _ in 0..samples {
        let [a, b, c, d, v, w] = std::array::from_fn(|_| sample_value(&mut rng));
        let alpha = 10f64.powf(rng.gen_range(-2.0..2.0));
        let eps = |x: f64| 1e-12 * (1.0 + x.abs());

        let z = phi.apply(a, b, 0.0);
        zero_v.record(z.abs(), 0.0, 0.0, &[a, b, 0.0]);
        let z = phi.apply(0.0, 0.0, v);
        zero_ab.record(z.abs(), 0.0, 0.0, &[0.0, 0.0, v]);

        let lhs = (phi.apply(a, b, w) - phi.apply(a, b, v)).abs();
        let bound = lip * (a.abs() + b.abs()) * (w - v).abs();
        lip_v.record(lhs, bound, eps(bound), &[a, b, v, w]);

        let lhs = (phi.apply(a, b, v) - phi.apply(c, d, v)).abs();
        let bound = lip * ((a - c).abs() + (b - d).abs()) * v.abs();
        lip_ab.record(lhs, bound, eps(bound), &[a, b, c, d, v]);

        let scaled = phi.apply(alpha * a, alpha * b, w);
        let lhs = (scaled - alpha * phi.apply(a, b, w)).abs();
        homog.record(lhs, 0.0, eps(scaled), &[alpha, a, b, w]);

        let forward = phi.apply(a, b, -v);
        let lhs = (forward + phi.apply(b, a, v)).abs();
        anti.record(lhs, 0.0, eps(forward), &[a, b, v]);
    }

    Ok(AdmissibilityReport {
        interpolation: phi.name(),
        samples,
        checks: vec![
            zero_v.finish(),
            zero_ab.finish(),
            lip_v.finish(),
            lip_ab.finish(),
            homog.finish(),
            anti.finish(),
        ],
    })
}
