//! Line-oriented `section.key = value` scenario files.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dynamics::{IntegrateOptions, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    Grid,
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Uniform,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphConfig {
    pub n: usize,
    pub dimension: usize,
    pub placement: Placement,
    pub weights: Weights,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Eta0Config {
    Constant(f64),
    /// `scale·exp(−|x−y|²/(2ℓ²))`.
    Gaussian { length: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaConfig {
    Constant(f64),
    /// `W ≡ scale`.
    Ones { scale: f64 },
    Gaussian { length: f64, scale: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Sigmoid,
    Tanh { gain: f64 },
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    Gaussian { length: f64 },
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityConfig {
    Alpha(AlphaChoice),
    Kernel(KernelChoice),
    /// Kernel velocity frozen at the initial density.
    Static(KernelChoice),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxChoice {
    Upwind,
    ProductMean,
    ProductMax,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitConfig {
    Constant(f64),
    Random { seed: u64, lo: f64, hi: f64 },
    Indicator { subset: Vec<usize>, value: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Trajectory,
    /// Two solutions from `init` and `second`, compared along the way.
    Pair { second: Vec<f64> },
    /// Atoms started at `δ_{r₀} ⊗ μ` plus probes.
    Monokinetic,
    Stability { vertex: usize, perturbation: f64 },
    Picard { horizon: f64, tol: f64, max_iters: usize },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::Pair { .. } => "pair",
            Self::Monokinetic => "monokinetic",
            Self::Stability { .. } => "stability",
            Self::Picard { .. } => "picard",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub graph: GraphConfig,
    pub eta0: Eta0Config,
    pub omega: OmegaConfig,
    /// Declared `ω_*`; defaults to `max(c, 0)` for a constant target and 0
    /// otherwise.
    pub omega_star: Option<f64>,
    pub velocity: VelocityConfig,
    pub flux: FluxChoice,
    pub init: InitConfig,
    pub integrator: IntegrateOptions,
    pub output: OutputConfig,
    pub experiment: Experiment,
}

impl ScenarioConfig {
    /// Upwind flux with a monotone pointwise velocity: the setting of the
    /// long-time bounds, where positive edge weights are required.
    pub fn is_monotone_upwind(&self) -> bool {
        matches!(self.velocity, VelocityConfig::Alpha(_)) && self.flux == FluxChoice::Upwind
    }
}

/// One problem in a scenario file; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KNOWN_KEYS: &[&str] = &[
    "graph.n",
    "graph.dimension",
    "graph.placement",
    "graph.seed",
    "graph.weights",
    "graph.weight_values",
    "eta0.kind",
    "eta0.value",
    "eta0.length",
    "omega.kind",
    "omega.value",
    "omega.length",
    "omega.floor",
    "omega.star",
    "velocity.kind",
    "velocity.alpha",
    "velocity.gain",
    "velocity.kernel",
    "velocity.length",
    "flux.kind",
    "init.kind",
    "init.value",
    "init.values",
    "init.lo",
    "init.hi",
    "init.seed",
    "init.subset",
    "integrator.scheme",
    "integrator.dt",
    "integrator.t_end",
    "integrator.stride",
    "output.dir",
    "output.name",
    "experiment.kind",
    "pair.values",
    "stability.vertex",
    "stability.perturbation",
    "picard.horizon",
    "picard.tol",
    "picard.max_iters",
];

struct Reader {
    entries: HashMap<String, (String, usize)>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.1)
    }

    fn error(&mut self, key: &str, message: impl Into<String>) {
        let line = self.line(key);
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.0.as_str())
    }

    fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.raw(key)?.to_string();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(key, format!("{key} must be {what}, got '{raw}'"));
                None
            }
        }
    }

    fn real(&mut self, key: &str, default: f64) -> f64 {
        match self.parse::<f64>(key, "a real number") {
            Some(v) if v.is_finite() => v,
            Some(v) => {
                self.error(key, format!("{key} must be finite, got {v}"));
                default
            }
            None => default,
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        let v = self.real(key, default);
        if self.raw(key).is_some() && !(v > 0.0) {
            self.error(key, format!("{key} must be > 0"));
        }
        v
    }

    fn count(&mut self, key: &str, default: usize) -> usize {
        self.parse::<usize>(key, "a nonnegative integer").unwrap_or(default)
    }

    fn seed(&mut self, key: &str, needed_by: &str) -> u64 {
        if self.raw(key).is_none() {
            let line = self.line(needed_by);
            self.errors.push(ConfigError {
                line,
                message: format!("{key} is required when {needed_by} is random"),
            });
            return 0;
        }
        self.parse::<u64>(key, "a nonnegative integer seed").unwrap_or(0)
    }

    fn list<T: FromStr>(&mut self, key: &str, what: &str) -> Option<Vec<T>> {
        let raw = self.raw(key)?.to_string();
        let parsed: Result<Vec<T>, _> = raw.split(',').map(|s| s.trim().parse::<T>()).collect();
        match parsed {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(key, format!("{key} must be a comma-separated list of {what}, got '{raw}'"));
                None
            }
        }
    }

    fn required_list<T: FromStr>(&mut self, key: &str, what: &str, needed_by: &str) -> Vec<T> {
        if self.raw(key).is_none() {
            let line = self.line(needed_by);
            self.errors.push(ConfigError {
                line,
                message: format!("{key} is required by {needed_by}"),
            });
            return Vec::new();
        }
        self.list(key, what).unwrap_or_default()
    }

    fn choice<'a>(&mut self, key: &str, options: &[&'a str], default: &'a str) -> &'a str {
        let Some(raw) = self.raw(key).map(str::to_string) else {
            return default;
        };
        match options.iter().find(|o| **o == raw) {
            Some(o) => o,
            None => {
                self.error(key, format!("{key} must be one of {}, got '{raw}'", options.join(", ")));
                default
            }
        }
    }
}

/// Parses a scenario, reporting every problem with its line number.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let mut reader = Reader {
        entries: HashMap::new(),
        errors: Vec::new(),
    };
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            reader.errors.push(ConfigError {
                line: Some(line),
                message: format!("expected 'section.key = value', got '{content}'"),
            });
            continue;
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if !KNOWN_KEYS.contains(&key.as_str()) {
            reader.errors.push(ConfigError {
                line: Some(line),
                message: format!("unknown key '{key}'"),
            });
            continue;
        }
        if value.is_empty() {
            reader.errors.push(ConfigError {
                line: Some(line),
                message: format!("{key} has no value"),
            });
            continue;
        }
        if let Some((_, first)) = reader.entries.get(&key) {
            reader.errors.push(ConfigError {
                line: Some(line),
                message: format!("{key} is already set on line {first}"),
            });
            continue;
        }
        reader.entries.insert(key, (value, line));
    }

    let config = build(&mut reader);
    if reader.errors.is_empty() {
        Ok(config)
    } else {
        reader.errors.sort_by_key(|e| e.line.unwrap_or(0));
        Err(ConfigErrors(reader.errors))
    }
}

fn build(rd: &mut Reader) -> ScenarioConfig {
    if rd.raw("graph.n").is_none() {
        rd.errors.push(ConfigError {
            line: None,
            message: "graph.n is required".into(),
        });
    }
    let n = rd.count("graph.n", 1);
    if rd.raw("graph.n").is_some() && n == 0 {
        rd.error("graph.n", "graph.n must be >= 1");
    }
    let dimension = rd.count("graph.dimension", 1);
    if dimension == 0 {
        rd.error("graph.dimension", "graph.dimension must be >= 1");
    }
    let placement = match rd.choice("graph.placement", &["grid", "random"], "grid") {
        "random" => Placement::Random {
            seed: rd.seed("graph.seed", "graph.placement"),
        },
        _ => Placement::Grid,
    };
    let weights = match rd.choice("graph.weights", &["uniform", "explicit"], "uniform") {
        "explicit" => {
            let w: Vec<f64> = rd.required_list("graph.weight_values", "reals", "graph.weights");
            if !w.is_empty() && w.len() != n {
                rd.error("graph.weight_values", format!("graph.weight_values needs {n} entries, got {}", w.len()));
            }
            Weights::Explicit(w)
        }
        _ => Weights::Uniform,
    };

    let eta0 = match rd.choice("eta0.kind", &["constant", "gaussian"], "constant") {
        "gaussian" => Eta0Config::Gaussian {
            length: rd.positive("eta0.length", 0.5),
            scale: rd.real("eta0.value", 1.0),
        },
        _ => Eta0Config::Constant(rd.real("eta0.value", 1.0)),
    };

    let omega = match rd.choice("omega.kind", &["constant", "ones", "gaussian"], "constant") {
        "ones" => OmegaConfig::Ones {
            scale: rd.real("omega.value", 1.0),
        },
        "gaussian" => OmegaConfig::Gaussian {
            length: rd.positive("omega.length", 0.5),
            scale: rd.real("omega.value", 1.0),
            floor: rd.real("omega.floor", 0.0),
        },
        _ => OmegaConfig::Constant(rd.real("omega.value", 1.0)),
    };
    let omega_star = rd.raw("omega.star").is_some().then(|| rd.real("omega.star", 0.0));
    if omega_star.is_some_and(|s| s < 0.0) {
        rd.error("omega.star", "omega.star must be >= 0");
    }

    let kernel = |rd: &mut Reader| match rd.choice("velocity.kernel", &["gaussian", "quadratic"], "gaussian") {
        "quadratic" => KernelChoice::Quadratic,
        _ => KernelChoice::Gaussian {
            length: rd.positive("velocity.length", 0.5),
        },
    };
    let velocity = match rd.choice("velocity.kind", &["alpha", "kernel", "static"], "alpha") {
        "kernel" => VelocityConfig::Kernel(kernel(rd)),
        "static" => VelocityConfig::Static(kernel(rd)),
        _ => VelocityConfig::Alpha(match rd.choice("velocity.alpha", &["sigmoid", "tanh", "identity"], "identity") {
            "sigmoid" => AlphaChoice::Sigmoid,
            "tanh" => AlphaChoice::Tanh {
                gain: rd.positive("velocity.gain", 1.0),
            },
            _ => AlphaChoice::Identity,
        }),
    };

    let flux = match rd.choice("flux.kind", &["upwind", "product-mean", "product-max"], "upwind") {
        "product-mean" => FluxChoice::ProductMean,
        "product-max" => FluxChoice::ProductMax,
        _ => FluxChoice::Upwind,
    };

    let init = match rd.choice("init.kind", &["constant", "random", "indicator", "explicit"], "constant") {
        "random" => {
            let seed = rd.seed("init.seed", "init.kind");
            let lo = rd.real("init.lo", 0.0);
            let hi = rd.real("init.hi", 1.0);
            if lo > hi {
                rd.error("init.hi", format!("init.lo = {lo} must not exceed init.hi = {hi}"));
            }
            InitConfig::Random { seed, lo, hi }
        }
        "indicator" => {
            let subset: Vec<usize> = rd.required_list("init.subset", "vertex indices", "init.kind");
            if let Some(bad) = subset.iter().find(|i| **i >= n) {
                rd.error("init.subset", format!("vertex {bad} is out of range for n = {n}"));
            }
            InitConfig::Indicator {
                subset,
                value: rd.real("init.value", 1.0),
            }
        }
        "explicit" => {
            let values: Vec<f64> = rd.required_list("init.values", "reals", "init.kind");
            if !values.is_empty() && values.len() != n {
                rd.error("init.values", format!("init.values needs {n} entries, got {}", values.len()));
            }
            InitConfig::Explicit(values)
        }
        _ => InitConfig::Constant(rd.real("init.value", 1.0)),
    };

    let scheme = match rd.raw("integrator.scheme").map(str::to_string) {
        Some(raw) => raw.parse::<Scheme>().unwrap_or_else(|e| {
            rd.error("integrator.scheme", e.to_string().trim_start_matches("invalid input: ").to_string());
            Scheme::default()
        }),
        None => Scheme::default(),
    };
    let dt = rd.real("integrator.dt", 1e-3);
    if !(dt > 0.0) {
        rd.error("integrator.dt", "integrator.dt must be > 0");
    }
    let t_end = rd.real("integrator.t_end", 1.0);
    if !(t_end > 0.0) {
        rd.error("integrator.t_end", "integrator.t_end must be > 0");
    }
    let stride = rd.count("integrator.stride", 1);
    if stride == 0 {
        rd.error("integrator.stride", "integrator.stride must be >= 1");
    }

    let output = OutputConfig {
        dir: PathBuf::from(rd.raw("output.dir").unwrap_or(".")),
        name: rd.raw("output.name").unwrap_or("run").to_string(),
    };

    let experiment = match rd.choice(
        "experiment.kind",
        &["trajectory", "pair", "monokinetic", "stability", "picard"],
        "trajectory",
    ) {
        "pair" => {
            let second: Vec<f64> = rd.required_list("pair.values", "reals", "experiment.kind");
            if !second.is_empty() && second.len() != n {
                rd.error("pair.values", format!("pair.values needs {n} entries, got {}", second.len()));
            }
            Experiment::Pair { second }
        }
        "monokinetic" => Experiment::Monokinetic,
        "stability" => {
            let vertex = rd.count("stability.vertex", 0);
            if vertex >= n {
                rd.error("stability.vertex", format!("stability.vertex = {vertex} is out of range for n = {n}"));
            }
            Experiment::Stability {
                vertex,
                perturbation: rd.real("stability.perturbation", 1e-3),
            }
        }
        "picard" => Experiment::Picard {
            horizon: rd.positive("picard.horizon", 0.1),
            tol: rd.positive("picard.tol", 1e-12),
            max_iters: rd.count("picard.max_iters", 100).max(1),
        },
        _ => Experiment::Trajectory,
    };

    let config = ScenarioConfig {
        graph: GraphConfig {
            n,
            dimension,
            placement,
            weights,
        },
        eta0,
        omega,
        omega_star,
        velocity,
        flux,
        init,
        integrator: IntegrateOptions::new(scheme, dt, t_end).with_stride(stride.max(1)),
        output,
        experiment,
    };

    if config.is_monotone_upwind() {
        let (key, value) = match config.eta0 {
            Eta0Config::Constant(c) => ("eta0.value", c),
            Eta0Config::Gaussian { scale, .. } => ("eta0.value", scale),
        };
        if !(value > 0.0) {
            rd.error(
                key,
                format!("positivity: eta0.value = {value} must be > 0 for an upwind scenario with a monotone velocity"),
            );
        }
        let negative_init = match &config.init {
            InitConfig::Constant(c) => *c < 0.0,
            InitConfig::Random { lo, .. } => *lo < 0.0,
            InitConfig::Indicator { value, .. } => *value < 0.0,
            InitConfig::Explicit(v) => v.iter().any(|x| *x < 0.0),
        };
        if negative_init {
            rd.error("init.kind", "positivity: the initial density must be >= 0 for an upwind scenario with a monotone velocity");
        }
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("graph.n = 2\n").unwrap();
        assert_eq!(c.graph.n, 2);
        assert_eq!(c.graph.dimension, 1);
        assert_eq!(c.graph.placement, Placement::Grid);
        assert_eq!(c.eta0, Eta0Config::Constant(1.0));
        assert_eq!(c.omega, OmegaConfig::Constant(1.0));
        assert_eq!(c.velocity, VelocityConfig::Alpha(AlphaChoice::Identity));
        assert_eq!(c.flux, FluxChoice::Upwind);
        assert_eq!(c.integrator.scheme, Scheme::Rk4ExactEta);
        assert_eq!(c.integrator.dt, 1e-3);
        assert_eq!(c.experiment, Experiment::Trajectory);
    }

    #[test]
    fn zero_dt_reported_at_its_line() {
        let err = parse_config("graph.n = 2\n# comment\nintegrator.dt = 0\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, Some(3));
        assert_eq!(err.0[0].message, "integrator.dt must be > 0");
    }

    #[test]
    fn negative_edge_weights_rejected_for_monotone_upwind() {
        let text = "graph.n = 2\nvelocity.alpha = sigmoid\neta0.kind = constant\neta0.value = -1\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.0[0].line, Some(4));
        assert!(err.0[0].message.starts_with("positivity"));
        // Outside the monotone upwind setting the same edge weights are fine.
        assert!(parse_config(&format!("{text}flux.kind = product-mean\n")).is_ok());
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "graph.n = two\nbogus.key = 1\nintegrator.t_end = -1\ngraph.placement = random\nflux.kind = sideways\nno equals sign\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<Option<usize>> = err.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(1), Some(2), Some(3), Some(4), Some(5), Some(6)]);
        assert!(err.to_string().contains("graph.seed is required"));
    }

    #[test]
    fn duplicates_and_lists() {
        let err = parse_config("graph.n = 2\ngraph.n = 3\n").unwrap_err();
        assert!(err.0[0].message.contains("already set on line 1"));

        let c = parse_config("graph.n = 3\ninit.kind = explicit\ninit.values = 1, 2.5,0\n").unwrap();
        assert_eq!(c.init, InitConfig::Explicit(vec![1.0, 2.5, 0.0]));
        let err = parse_config("graph.n = 3\ninit.kind = explicit\ninit.values = 1, 2\n").unwrap_err();
        assert_eq!(err.0[0].line, Some(3));
    }

    #[test]
    fn random_init_needs_seed() {
        let err = parse_config("graph.n = 4\ninit.kind = random\n").unwrap_err();
        assert_eq!(err.0[0].line, Some(2));
        let c = parse_config("graph.n = 4\ninit.kind = random\ninit.seed = 9\ninit.lo = 0\ninit.hi = 2\n").unwrap();
        assert_eq!(c.init, InitConfig::Random { seed: 9, lo: 0.0, hi: 2.0 });
    }
}
