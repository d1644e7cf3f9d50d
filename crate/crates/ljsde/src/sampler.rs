//! Initial-condition samplers: i.i.d. bounded densities (admissible when the
//! repulsion exponent is below the dimension) and the confined Gibbs measure
//! via Metropolis-Hastings, plus the Monte Carlo finite-energy certificate.

use crate::error::{Error, Result};
use crate::potential::LJParams;
use crate::rng::derive_seed;
use crate::system::{mean_interaction_energy, Configuration};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Bounded single-particle densities for i.i.d. initial draws.
///
/// Finite expected pair energy under i.i.d. draws needs the density in
/// `L^p(R^d)` with `p >= 2d/(2d - alpha)` (on top of `alpha < d`, see
/// [`check_iid_applicability`]); a compactly supported or Gaussian bounded
/// density lies in every `L^p`, so only the exponent check remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    /// Isotropic Gaussian with the given scale per coordinate.
    Gaussian { scale: f64, center: Vec<f64> },
    /// Uniform on a ball of the given radius.
    UniformBall { radius: f64, center: Vec<f64> },
}

impl DensitySpec {
    fn validate(&self, d: usize) -> Result<()> {
        let (scale, center) = match self {
            DensitySpec::Gaussian { scale, center } => (*scale, center),
            DensitySpec::UniformBall { radius, center } => (*radius, center),
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "density scale must be > 0, got {scale}"
            )));
        }
        if !center.is_empty() && center.len() != d {
            return Err(Error::InvalidParams(format!(
                "center has dimension {}, expected {d}",
                center.len()
            )));
        }
        Ok(())
    }
}

/// Whether i.i.d. draws from a bounded density yield finite expected pair
/// energy: requires `alpha < d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Applicability {
    Applicable,
    NotApplicable(String),
}

pub fn check_iid_applicability(p: &LJParams, d: usize) -> Applicability {
    if p.alpha() < d as f64 {
        Applicability::Applicable
    } else {
        Applicability::NotApplicable(format!(
            "alpha={} >= d={d}: pair-energy expectation may diverge for i.i.d. draws",
            p.alpha()
        ))
    }
}

/// Draw `n` i.i.d. particle positions. Deterministic given the generator
/// state.
pub fn sample_iid(
    spec: &DensitySpec,
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Configuration> {
    spec.validate(d)?;
    let mut positions = vec![0.0; n * d];
    match spec {
        DensitySpec::Gaussian { scale, center } => {
            for i in 0..n {
                for k in 0..d {
                    let z: f64 = StandardNormal.sample(rng);
                    let c = center.get(k).copied().unwrap_or(0.0);
                    positions[i * d + k] = c + scale * z;
                }
            }
        }
        DensitySpec::UniformBall { radius, center } => {
            for i in 0..n {
                // direction from normalized Gaussian, radius ~ R U^(1/d)
                let mut v = vec![0.0f64; d];
                loop {
                    let mut norm2 = 0.0f64;
                    for c in v.iter_mut() {
                        *c = StandardNormal.sample(rng);
                        norm2 += *c * *c;
                    }
                    if norm2 > 1e-24 {
                        let u: f64 = rng.gen();
                        let r = radius * u.powf(1.0 / d as f64) / norm2.sqrt();
                        for c in v.iter_mut() {
                            *c *= r;
                        }
                        break;
                    }
                }
                for k in 0..d {
                    positions[i * d + k] = center.get(k).copied().unwrap_or(0.0) + v[k];
                }
            }
        }
    }
    Configuration::new(positions, n, d)
}

/// Confined Gibbs target: density proportional to
/// `exp(-c sum_{i<j} V(x_i - x_j) - k sum_i |x_i|^2)`.
///
/// Only energy differences enter the chain; the normalization constant is
/// never needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub potential: LJParams,
    /// Confinement stiffness k in `k |x|^2` (> 0).
    pub confinement_k: f64,
    /// Coupling multiplying the pair energy (> 0).
    pub c: f64,
    /// Chain length; the first half is burn-in, only the final state is
    /// emitted (one configuration per independent chain).
    pub mh_steps: usize,
    /// Scale of the symmetric Gaussian proposal on the full configuration.
    pub mh_step_size: f64,
}

impl GibbsSpec {
    fn validate(&self) -> Result<()> {
        if !(self.confinement_k > 0.0) {
            return Err(Error::InvalidParams("confinement_k must be > 0".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidParams("coupling c must be > 0".into()));
        }
        if self.mh_steps == 0 {
            return Err(Error::Precondition("mh_steps must be >= 1".into()));
        }
        if !(self.mh_step_size > 0.0) {
            return Err(Error::InvalidParams("mh_step_size must be > 0".into()));
        }
        Ok(())
    }
}

/// Pair energy that degrades to +infinity at coincidence instead of erroring
/// (the chain then simply rejects the move).
fn total_pair_energy(x: &[f64], n: usize, d: usize, p: &LJParams) -> f64 {
    let mut e = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut r2 = 0.0;
            for k in 0..d {
                let dk = x[i * d + k] - x[j * d + k];
                r2 += dk * dk;
            }
            let r = r2.sqrt();
            if r == 0.0 {
                return f64::INFINITY;
            }
            let (ra, rb) = p.powers(r);
            e += p.a() * ra - p.b() * rb;
        }
    }
    e
}

fn log_target(x: &[f64], n: usize, d: usize, spec: &GibbsSpec) -> f64 {
    let pair = total_pair_energy(x, n, d, &spec.potential);
    if pair.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let conf: f64 = x.iter().map(|c| c * c).sum();
    -spec.c * pair - spec.confinement_k * conf
}

/// One symmetric-proposal Metropolis step; returns whether it was accepted.
fn mh_step(
    x: &mut Vec<f64>,
    logp: &mut f64,
    n: usize,
    d: usize,
    spec: &GibbsSpec,
    rng: &mut ChaCha8Rng,
) -> bool {
    let proposal: Vec<f64> = x
        .iter()
        .map(|c| {
            let z: f64 = StandardNormal.sample(rng);
            c + spec.mh_step_size * z
        })
        .collect();
    let logp_new = log_target(&proposal, n, d, spec);
    let u: f64 = rng.gen();
    if u.ln() < logp_new - *logp {
        *x = proposal;
        *logp = logp_new;
        true
    } else {
        false
    }
}

/// Centered cubic-grid start with spacing `max(r_bar, 1)`: finite energy by
/// construction, no rejection sampling needed.
pub fn grid_start(p: &LJParams, n: usize, d: usize) -> Configuration {
    let spacing = p.r_bar().unwrap_or(1.0).max(1.0);
    let side = (n as f64).powf(1.0 / d as f64).ceil() as usize;
    let mut positions = vec![0.0; n * d];
    for i in 0..n {
        let mut rem = i;
        for k in 0..d {
            positions[i * d + k] = (rem % side) as f64 * spacing;
            rem /= side;
        }
    }
    // center the cloud so the confinement energy starts small
    for k in 0..d {
        let mean = (0..n).map(|i| positions[i * d + k]).sum::<f64>() / n as f64;
        for i in 0..n {
            positions[i * d + k] -= mean;
        }
    }
    Configuration::new(positions, n, d).expect("grid is finite")
}

/// Chain statistics: the running-maximum energy certificate.
#[derive(Debug, Clone)]
pub struct GibbsTrace {
    pub configuration: Configuration,
    /// Max of the absolute pair-energy sum over all visited states.
    pub max_abs_energy: f64,
    pub final_abs_energy: f64,
    pub accepted: usize,
    pub steps: usize,
}

/// Run a Metropolis-Hastings chain targeting the confined Gibbs measure and
/// return its final state.
pub fn sample_gibbs(
    spec: &GibbsSpec,
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Configuration> {
    Ok(sample_gibbs_traced(spec, n, d, rng)?.configuration)
}

/// As [`sample_gibbs`], also reporting the monotone energy certificate.
pub fn sample_gibbs_traced(
    spec: &GibbsSpec,
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GibbsTrace> {
    spec.validate()?;
    let start = grid_start(&spec.potential, n, d);
    let mut x = start.positions().to_vec();
    let mut logp = log_target(&x, n, d, spec);
    let mut accepted = 0;
    let cfg_energy = |x: &[f64]| -> Result<f64> {
        mean_interaction_energy(
            &Configuration::new(x.to_vec(), n, d)?,
            &spec.potential,
        )
    };
    let mut max_abs_energy = cfg_energy(&x)?;
    for _ in 0..spec.mh_steps {
        if mh_step(&mut x, &mut logp, n, d, spec, rng) {
            accepted += 1;
            max_abs_energy = max_abs_energy.max(cfg_energy(&x)?);
        }
    }
    let final_abs_energy = cfg_energy(&x)?;
    Ok(GibbsTrace {
        configuration: Configuration::new(x, n, d)?,
        max_abs_energy,
        final_abs_energy,
        accepted,
        steps: spec.mh_steps,
    })
}

/// Monte Carlo finite-energy certificate over independent sampler draws.
#[derive(Debug, Clone)]
pub struct EnergyCertificate {
    pub runs: usize,
    pub mean: f64,
    /// 95% normal-approximation half width.
    pub ci_half_width: f64,
    /// Draws whose absolute pair-energy sum exceeded the ceiling.
    pub ceiling_hits: usize,
    pub ceiling: f64,
    /// No ceiling hits.
    pub passed: bool,
}

/// Estimate the mean pair energy of a sampler and flag heavy-tailed regimes:
/// any single draw above the ceiling (default `1e6 * delta' * n^2`) fails the
/// certificate.
pub fn certify_initial_energy(
    mut sampler: impl FnMut(u64) -> Result<Configuration>,
    p: &LJParams,
    runs: usize,
    master_seed: u64,
    ceiling: Option<f64>,
) -> Result<EnergyCertificate> {
    if runs < 2 {
        return Err(Error::Precondition("certification needs runs >= 2".into()));
    }
    let mut energies = Vec::with_capacity(runs);
    let mut ceiling_hits = 0;
    let mut ceiling_value = ceiling;
    for run in 0..runs {
        let config = sampler(derive_seed(master_seed, run as u64))?;
        let e = mean_interaction_energy(&config, p)?;
        let ceil = *ceiling_value.get_or_insert_with(|| {
            let delta_prime = crate::potential::lj_minimum(p).delta_prime;
            1e6 * delta_prime * (config.n() * config.n()) as f64
        });
        if e > ceil {
            ceiling_hits += 1;
        }
        energies.push(e);
    }
    let (mean, sd) = crate::stats::mean_and_sd(&energies);
    Ok(EnergyCertificate {
        runs,
        mean,
        ci_half_width: crate::stats::Z_975 * sd / (runs as f64).sqrt(),
        ceiling_hits,
        ceiling: ceiling_value.unwrap_or(f64::INFINITY),
        passed: ceiling_hits == 0,
    })
}
