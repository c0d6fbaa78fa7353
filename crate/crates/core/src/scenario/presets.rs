//! Named, ready-to-run scenario files.

use super::config::{parse_config, ScenarioConfig};
use crate::error::{Error, Result};

const CONSENSUS_2: &str = "\
# Two vertices, all mass on one side; relaxes to the mean.
graph.n = 2
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 2, 0
integrator.scheme = rk4-with-exact-eta
integrator.dt = 1e-3
integrator.t_end = 10
integrator.stride = 10
experiment.kind = trajectory
output.name = consensus-2
";

const CONSENSUS_8: &str = "\
# Eight vertices on a line, random start, Gaussian edge weights.
graph.n = 8
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = gaussian
eta0.value = 1
eta0.length = 0.5
omega.kind = constant
omega.value = 1
init.kind = random
init.seed = 8
init.lo = 0
init.hi = 2
integrator.dt = 1e-3
integrator.t_end = 20
integrator.stride = 20
output.name = consensus-8
";

const CONSENSUS_64: &str = "\
# 64 random points in the unit square.
graph.n = 64
graph.dimension = 2
graph.placement = random
graph.seed = 64
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = gaussian
eta0.value = 1
eta0.length = 0.5
omega.kind = constant
omega.value = 1
init.kind = random
init.seed = 6464
init.lo = 0
init.hi = 2
integrator.dt = 1e-2
integrator.t_end = 20
integrator.stride = 10
output.name = consensus-64
";

const ENVELOPE: &str = "\
# Sigmoid velocity with a kernel edge target; compare with the max/min envelopes.
graph.n = 8
velocity.kind = alpha
velocity.alpha = sigmoid
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = ones
omega.value = 1
omega.star = 1
init.kind = explicit
init.values = 2, 0, 1.5, 0.5, 1, 0.25, 1.75, 1
integrator.dt = 1e-3
integrator.t_end = 20
integrator.stride = 10
output.name = envelope
";

const DISSIPATION: &str = "\
# Two solutions under one frozen kernel velocity.
graph.n = 4
velocity.kind = static
velocity.kernel = gaussian
velocity.length = 0.5
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 1, 0.2, 0.6, 1.4
integrator.dt = 1e-3
integrator.t_end = 5
experiment.kind = pair
pair.values = 0.8, 0.5, 0.3, 1.0
output.name = dissipation
";

const STABILITY: &str = "\
# Two monokinetic data that differ at one vertex, pushed by the same solution.
graph.n = 2
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 2, 0
integrator.dt = 1e-3
integrator.t_end = 2
integrator.stride = 10
experiment.kind = stability
stability.vertex = 1
stability.perturbation = 1e-3
output.name = stability
";

const PICARD: &str = "\
# Fixed-point iteration of the integral map on a short horizon.
graph.n = 2
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 2, 0
integrator.dt = 2.5e-4
integrator.t_end = 0.1
experiment.kind = picard
picard.horizon = 0.1
picard.tol = 1e-12
picard.max_iters = 100
output.name = picard
";

const ETA_POSITIVITY: &str = "\
# Edge weights start above the target and decay towards it.
graph.n = 4
velocity.kind = alpha
velocity.alpha = sigmoid
flux.kind = upwind
eta0.kind = constant
eta0.value = 2
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 2, 0, 1, 0.5
integrator.dt = 1e-3
integrator.t_end = 10
integrator.stride = 10
output.name = eta-positivity
";

const MASS_CHECK: &str = "\
# Product-max flux with a density-dependent kernel velocity.
graph.n = 16
graph.placement = random
graph.seed = 16
velocity.kind = kernel
velocity.kernel = gaussian
velocity.length = 0.3
flux.kind = product-max
eta0.kind = gaussian
eta0.value = 1
eta0.length = 0.4
omega.kind = constant
omega.value = 0.5
init.kind = random
init.seed = 1616
init.lo = 0
init.hi = 2
integrator.dt = 1e-2
integrator.t_end = 5
output.name = mass-check
";

const MONOKINETIC: &str = "\
# Atoms started on the density itself, plus test particles.
graph.n = 2
velocity.kind = alpha
velocity.alpha = identity
flux.kind = upwind
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
init.kind = explicit
init.values = 2, 0
integrator.dt = 1e-3
integrator.t_end = 10
integrator.stride = 10
experiment.kind = monokinetic
output.name = monokinetic
";

const PRESETS: &[(&str, &str)] = &[
    ("consensus-2", CONSENSUS_2),
    ("consensus-8", CONSENSUS_8),
    ("consensus-64", CONSENSUS_64),
    ("envelope", ENVELOPE),
    ("dissipation", DISSIPATION),
    ("stability", STABILITY),
    ("picard", PICARD),
    ("eta-positivity", ETA_POSITIVITY),
    ("mass-check", MASS_CHECK),
    ("monokinetic", MONOKINETIC),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// Scenario file text of a preset, as written by `scaffold`.
pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::InvalidInput(format!("unknown preset '{name}' (known: {})", preset_names().join(", "))))
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    parse_config(preset_text(name)?).map_err(|e| Error::InvalidInput(format!("preset {name} is malformed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for name in preset_names() {
            let c = preset(name).unwrap();
            assert_eq!(c.output.name, name);
        }
        assert!(preset("nope").is_err());
    }
}
