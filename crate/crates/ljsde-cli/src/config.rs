//! Flat key-value run configuration with dotted sections.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. Keys are dotted paths (`system.n`, `sim.dt`). Every key present
//! must be known and every value must parse; unknown keys are rejected
//! before any computation.

use ljsde::integrator::InitSpec;
use ljsde::potential::LJParams;
use ljsde::sampler::{DensitySpec, GibbsSpec};
use ljsde::system::{ExtraDrift, SystemSpec};
use std::collections::BTreeMap;
use std::fmt;

/// A config-level problem; always maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ConfigError(msg.into()))
}

/// Every key the toolkit understands.
pub const KNOWN_KEYS: &[&str] = &[
    "system.n",
    "system.d",
    "system.sigma",
    "potential.a",
    "potential.b",
    "potential.alpha",
    "potential.beta",
    "drift.kind",
    "drift.gammas",
    "sim.epsilon",
    "sim.t_end",
    "sim.dt",
    "sim.seed",
    "sim.record_stride",
    "init.kind",
    "init.positions",
    "init.scale",
    "init.radius",
    "init.center",
    "init.gibbs_k",
    "init.gibbs_c",
    "init.mh_steps",
    "init.mh_step_size",
    "runs",
    "sweep.eps",
    "sweep.mode",
    "sweep.eta",
    "sweep.c_markov",
    "sweep.runs_per_eps",
    "scan.samples",
    "cert.runs",
    "cert.ceiling",
    "verify.triples",
    "verify.configs_per_n",
    "verify.lo_frac",
    "verify.hi_frac",
    "out.dir",
];

/// Parsed, normalized configuration document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> CResult<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(format!("line {}: unknown key `{key}`", lineno + 1));
            }
            if value.is_empty() {
                return err(format!("line {}: empty value for `{key}`", lineno + 1));
            }
            if map.insert(key.clone(), value).is_some() {
                return err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        }
        Ok(Self { map })
    }

    /// Canonical rendering; parsing the output yields an identical document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> CResult<&str> {
        self.get(key)
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    pub fn require_f64(&self, key: &str) -> CResult<f64> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a number")))
    }

    pub fn opt_f64(&self, key: &str) -> CResult<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a number"))),
        }
    }

    pub fn require_usize(&self, key: &str) -> CResult<usize> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a count")))
    }

    pub fn opt_usize(&self, key: &str) -> CResult<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a count"))),
        }
    }

    pub fn require_u64(&self, key: &str) -> CResult<u64> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not an integer seed")))
    }

    pub fn opt_u64(&self, key: &str) -> CResult<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not an integer"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> CResult<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| {
                        ConfigError(format!("key `{key}`: `{}` is not a number", s.trim()))
                    })
                })
                .collect::<CResult<Vec<f64>>>()
                .map(Some),
        }
    }

    // ----- domain builders -------------------------------------------------

    pub fn potential(&self) -> CResult<LJParams> {
        let a = self.require_f64("potential.a")?;
        let b = self.require_f64("potential.b")?;
        let alpha = self.require_f64("potential.alpha")?;
        let beta = self.require_f64("potential.beta")?;
        LJParams::new(a, b, alpha, beta).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn system(&self) -> CResult<SystemSpec> {
        let n = self.require_usize("system.n")?;
        let d = self.require_usize("system.d")?;
        let sigma = self.require_f64("system.sigma")?;
        let potential = self.potential()?;
        let extra = match self.get("drift.kind") {
            None | Some("none") => ExtraDrift::None,
            Some("vortex") => {
                let gammas = self
                    .f64_list("drift.gammas")?
                    .ok_or_else(|| ConfigError("vortex drift needs `drift.gammas`".into()))?;
                ExtraDrift::Vortex { gammas }
            }
            Some(other) => return err(format!("drift.kind `{other}` is not none|vortex")),
        };
        SystemSpec::new(n, d, sigma, potential, extra).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn simulation(&self, seed_override: Option<u64>) -> CResult<ljsde::integrator::SimulationSpec> {
        let system = self.system()?;
        let spec = ljsde::integrator::SimulationSpec {
            system,
            epsilon: self.require_f64("sim.epsilon")?,
            t_end: self.require_f64("sim.t_end")?,
            dt: self.require_f64("sim.dt")?,
            seed: match seed_override {
                Some(s) => s,
                None => self.require_u64("sim.seed")?,
            },
            record_stride: self.opt_usize("sim.record_stride")?.unwrap_or(10),
        };
        spec.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(spec)
    }

    pub fn init(&self) -> CResult<InitSpec> {
        let kind = self.require("init.kind")?;
        let center = self.f64_list("init.center")?.unwrap_or_default();
        match kind {
            "fixed" => {
                let positions = self
                    .f64_list("init.positions")?
                    .ok_or_else(|| ConfigError("fixed init needs `init.positions`".into()))?;
                Ok(InitSpec::Fixed { positions })
            }
            "iid_gaussian" => Ok(InitSpec::Iid {
                density: DensitySpec::Gaussian {
                    scale: self.require_f64("init.scale")?,
                    center,
                },
            }),
            "iid_uniform_ball" => Ok(InitSpec::Iid {
                density: DensitySpec::UniformBall {
                    radius: self.require_f64("init.radius")?,
                    center,
                },
            }),
            "gibbs" => Ok(InitSpec::Gibbs {
                gibbs: GibbsSpec {
                    potential: self.potential()?,
                    confinement_k: self.require_f64("init.gibbs_k")?,
                    c: self.require_f64("init.gibbs_c")?,
                    mh_steps: self.require_usize("init.mh_steps")?,
                    mh_step_size: self.require_f64("init.mh_step_size")?,
                },
            }),
            other => err(format!(
                "init.kind `{other}` is not fixed|iid_gaussian|iid_uniform_ball|gibbs"
            )),
        }
    }

    pub fn runs(&self, override_runs: Option<u64>) -> CResult<u64> {
        if let Some(r) = override_runs {
            return Ok(r);
        }
        Ok(self.opt_u64("runs")?.unwrap_or(1))
    }
}
