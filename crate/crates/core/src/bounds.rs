//! Scalar constants entering the a priori estimates, collected from the
//! model specification and the initial data.

use crate::error::{check_len, Error, Result};
use crate::fields::{OmegaKind, OmegaSpec, VelocitySpec};
use crate::graph::{BaseMeasure, EdgeField, VertexDensity};
use crate::interpolation::FluxInterpolation;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsLedger {
    pub l_phi: f64,
    /// Uniform bound `sup |V[i][j]|` over the working box.
    pub c_v: f64,
    /// Square-integrated bound `sup_i Σ_j |V[i][j]|² m_j ≤ C_V² μ(K)`.
    pub c_v_l2: f64,
    /// Whether `c_v` is a certified bound (alpha and static kinds) or an
    /// estimate that assumes `r` stays in `[0, ‖r₀‖_∞]` (kernel kind).
    pub c_v_certified: bool,
    pub l_v: f64,
    pub c_omega: f64,
    pub l_omega: f64,
    pub omega_star: f64,
    pub eta_star: f64,
    /// Zero unless the velocity is of alpha kind.
    pub alpha_prime_star: f64,
    pub mass: f64,
    pub norm_r0_inf: f64,
    pub norm_r0_l2: f64,
    pub norm_eta0_inf: f64,
    pub eta0_min: f64,
    pub r0_min: f64,
    pub mu_k: f64,
}

impl BoundsLedger {
    /// `C_V^{1/2}` in the square-integrated sense.
    pub fn c_v_sqrt(&self) -> f64 {
        self.c_v_l2.sqrt()
    }

    /// Uniform bound on `|η|`: `‖η₀‖_∞ + C_ω`.
    pub fn eta_sup(&self) -> f64 {
        self.norm_eta0_inf + self.c_omega
    }

    /// Equilibrium density `M / μ(K)`.
    pub fn consensus_value(&self) -> f64 {
        self.mass / self.mu_k
    }
}

fn kernel_velocity_bound(k: &crate::fields::InteractionKernelSpec, mu: &BaseMeasure, radius: f64) -> (f64, f64) {
    let n = mu.len();
    let m = mu.weights();
    let (mut c_v, mut l_v): (f64, f64) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (mut pos, mut neg, mut abs) = (0.0, 0.0, 0.0);
            for (z, mz) in m.iter().enumerate() {
                let d = (k.get(j, z) - k.get(i, z)) * mz;
                if d > 0.0 {
                    pos += d;
                } else {
                    neg -= d;
                }
                abs += d.abs();
            }
            // The linear map r ↦ Σ d_z r_z over the box [0, R]^n peaks at a corner.
            c_v = c_v.max(radius * f64::max(pos, neg));
            l_v = l_v.max(abs);
        }
    }
    (c_v, l_v)
}

/// Collects the ledger for a model and its initial data.
pub fn constants_of(
    flux: &FluxInterpolation,
    velocity: &VelocitySpec,
    omega: &OmegaSpec,
    eta0: &EdgeField,
    r0: &VertexDensity,
    mu: &BaseMeasure,
) -> Result<BoundsLedger> {
    check_len(mu.len(), r0.len())?;
    check_len(mu.len(), eta0.n())?;
    if !(r0.is_finite() && eta0.is_finite()) {
        return Err(Error::InvalidInput("initial data is not finite".into()));
    }
    let mu_k = mu.total();
    let radius = r0.sup_norm();

    let (c_v, l_v, certified, alpha_prime_star) = match velocity {
        VelocitySpec::Alpha(a) => (a.range(), 2.0 * a.alpha_prime_sup(), true, a.alpha_prime_star()),
        VelocitySpec::Kernel(k) => {
            check_len(mu.len(), k.n())?;
            let (c_v, l_v) = kernel_velocity_bound(k, mu, radius);
            (c_v, l_v, false, 0.0)
        }
        VelocitySpec::Static(v) => {
            check_len(mu.len(), v.n())?;
            (v.max_abs(), 0.0, true, 0.0)
        }
    };

    let (c_omega, l_omega) = match &omega.kind {
        OmegaKind::Constant(c) => (c.abs(), 0.0),
        OmegaKind::Kernel(w) => {
            check_len(mu.len(), w.n())?;
            // Valid while r stays nonnegative, since then Σ|r| m = M is conserved.
            let l1: f64 = r0.iter().zip(mu.weights()).map(|(x, m)| x.abs() * m).sum();
            (w.max_abs() * l1, w.row_mass(mu))
        }
    };

    let eta0_min = if mu.len() > 1 {
        eta0.min_offdiag().unwrap_or(0.0)
    } else {
        0.0
    };
    let omega_star = omega.omega_star.max(0.0);
    let eta_star = eta0_min.min(omega_star).max(0.0);

    Ok(BoundsLedger {
        l_phi: flux.lipschitz(),
        c_v,
        c_v_l2: c_v * c_v * mu_k,
        c_v_certified: certified,
        l_v,
        c_omega,
        l_omega,
        omega_star,
        eta_star,
        alpha_prime_star,
        mass: mu.integrate(r0),
        norm_r0_inf: radius,
        norm_r0_l2: mu.integrate(&r0.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt(),
        norm_eta0_inf: eta0.max_abs(),
        eta0_min,
        r0_min: r0.min(),
        mu_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AlphaProfile, InteractionKernelSpec, OmegaKernel};
    use approx::assert_abs_diff_eq;

    fn two_vertex() -> (BaseMeasure, VertexDensity, EdgeField) {
        (
            BaseMeasure::uniform_line(2).unwrap(),
            vec![2.0, 0.0].into(),
            EdgeField::constant(2, 1.0),
        )
    }

    #[test]
    fn identity_ledger() {
        let (mu, r0, eta0) = two_vertex();
        let v = VelocitySpec::Alpha(AlphaProfile::for_initial(crate::fields::AlphaKind::Identity, &r0).unwrap());
        let l = constants_of(&FluxInterpolation::Upwind, &v, &OmegaSpec::constant(1.0), &eta0, &r0, &mu).unwrap();
        assert_eq!(l.alpha_prime_star, 1.0);
        assert_eq!(l.c_v, 2.0);
        assert_eq!(l.l_v, 2.0);
        assert_eq!(l.mass, 1.0);
        assert_eq!(l.consensus_value(), 1.0);
        assert_eq!(l.eta_star, 1.0);
        assert_eq!(l.c_omega, 1.0);
        assert_eq!(l.norm_r0_inf, 2.0);
        assert_abs_diff_eq!(l.norm_r0_l2, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(l.r0_min, 0.0);
    }

    #[test]
    fn sigmoid_ledger() {
        let (mu, r0, eta0) = two_vertex();
        let v = VelocitySpec::Alpha(AlphaProfile::sigmoid(0.0, 2.0).unwrap());
        let l = constants_of(&FluxInterpolation::Upwind, &v, &OmegaSpec::constant(1.0), &eta0, &r0, &mu).unwrap();
        assert_abs_diff_eq!(l.alpha_prime_star, 0.104_993_585_403_506_6, epsilon = 1e-15);
        assert_abs_diff_eq!(l.c_v, 1.0 / (1.0 + (-2f64).exp()) - 0.5, epsilon = 1e-15);
    }

    #[test]
    fn eta_star_takes_smaller_of_initial_and_target() {
        let (mu, r0, _) = two_vertex();
        let v = VelocitySpec::Alpha(AlphaProfile::identity(0.0, 2.0).unwrap());
        let eta0 = EdgeField::constant(2, 2.0);
        let l = constants_of(&FluxInterpolation::Upwind, &v, &OmegaSpec::constant(1.0), &eta0, &r0, &mu).unwrap();
        assert_eq!(l.eta_star, 1.0);
        assert_eq!(l.norm_eta0_inf, 2.0);
        assert_eq!(l.eta_sup(), 3.0);
    }

    #[test]
    fn kernel_velocity_bound_dominates_samples() {
        let mu = BaseMeasure::uniform_line(4).unwrap();
        let k = InteractionKernelSpec::gaussian(&mu, 0.7).unwrap();
        let r0: VertexDensity = vec![1.0, 0.2, 0.0, 0.5].into();
        let eta0 = EdgeField::constant(4, 1.0);
        let omega = OmegaSpec::kernel(OmegaKernel::constant(4, 2.0), 0.0);
        let spec = VelocitySpec::Kernel(k.clone());
        let l = constants_of(&FluxInterpolation::ProductMax, &spec, &omega, &eta0, &r0, &mu).unwrap();
        assert!(!l.c_v_certified);
        assert_abs_diff_eq!(l.c_omega, 2.0 * mu.integrate(&r0), epsilon = 1e-15);
        assert_eq!(l.l_omega, 2.0);
        // Every corner of the box respects the bound.
        for mask in 0..16u32 {
            let r: VertexDensity = (0..4).map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 }).collect::<Vec<_>>().into();
            let v = crate::fields::velocity_from_kernel(&k, &r, &mu).unwrap();
            assert!(v.max_abs() <= l.c_v + 1e-15);
        }
    }
}
