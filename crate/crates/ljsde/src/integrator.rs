//! Euler-Maruyama time stepping of the regularized system, first-exit
//! detection on the minimal pair distance, coupled threshold sweeps on a
//! single noise path, and the embarrassingly parallel batch harness.

use crate::error::{Error, Result};
use crate::potential::RegularizedLJ;
use crate::rng::{derive_seed, seeded_rng};
use crate::sampler::{sample_gibbs, sample_iid, DensitySpec, GibbsSpec};
use crate::system::{eval_fields, vortex_drift, Configuration, ExtraDrift, SystemSpec};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Full description of one simulation: system, splice/exit radius, horizon,
/// step, master seed, and recording stride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub system: SystemSpec,
    /// Splice radius of the regularized drift; also the exit threshold on
    /// the minimal pair distance.
    pub epsilon: f64,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    /// Steps between recorded frames (1 records every step).
    pub record_stride: usize,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams("epsilon must be > 0".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::InvalidParams(format!(
                "need 0 < dt <= t_end, got dt={}, t_end={}",
                self.dt, self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParams("record_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

/// First crossing of the exit threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitEvent {
    /// Exit time, reported as the left endpoint of the crossing step.
    pub tau_eps: f64,
    /// Index of the step whose endpoint state first had `m <= epsilon`.
    pub step: usize,
    /// Minimal pair distance at the detection state.
    pub min_distance: f64,
}

/// Recorded path of one simulation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Configuration>,
    /// `m(X_t)` per recorded frame.
    pub min_distance_series: Vec<f64>,
    /// Frozen at the first crossing; integration continues afterwards.
    pub exit: Option<ExitEvent>,
    pub seed: u64,
    pub dt: f64,
    pub record_stride: usize,
    /// Extrema of the spliced global potential over every step taken.
    pub phi_max: f64,
    pub phi_final: f64,
    /// Minimum of `m(X_t)` over every step taken.
    pub min_m: f64,
    pub final_m: f64,
}

impl Trajectory {
    pub fn exited(&self) -> bool {
        self.exit.is_some()
    }

    pub fn tau_eps(&self) -> Option<f64> {
        self.exit.map(|e| e.tau_eps)
    }
}

/// The raw Euler-Maruyama update `x += drift dt + sigma sqrt(dt) noise`,
/// shared by the particle integrator and oracle tests with bespoke drifts.
#[inline]
pub fn em_update(x: &mut [f64], drift: &[f64], sigma: f64, dt: f64, noise: &[f64]) {
    let root_dt = dt.sqrt();
    for i in 0..x.len() {
        x[i] += drift[i] * dt + sigma * root_dt * noise[i];
    }
}

/// One Euler-Maruyama step of the spliced system; deterministic in
/// `(c, noise)`.
pub fn em_step(
    c: &Configuration,
    s: &SystemSpec,
    eps: f64,
    dt: f64,
    noise: &[f64],
) -> Result<Configuration> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("dt must be > 0, got {dt}")));
    }
    if noise.len() != c.n() * c.d() {
        return Err(Error::Precondition(format!(
            "noise length {} != n*d = {}",
            noise.len(),
            c.n() * c.d()
        )));
    }
    let splice = RegularizedLJ::new(s.potential, eps)?;
    let fields = eval_fields(c, &s.potential, Some(&splice), c.d())?;
    let mut drift = fields.drift_lj;
    if let ExtraDrift::Vortex { gammas } = &s.extra_drift {
        for (a, b) in drift.iter_mut().zip(vortex_drift(c, gammas)?) {
            *a += b;
        }
    }
    let mut x = c.positions().to_vec();
    em_update(&mut x, &drift, s.sigma, dt, noise);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric {
            step: 0,
            time: dt,
            what: "non-finite coordinate after step".into(),
        });
    }
    Configuration::new(x, c.n(), c.d())
}

struct StepObserver<'a> {
    thresholds: &'a [f64],
    crossings: Vec<Option<f64>>,
}

fn integrate_core(
    spec: &SimulationSpec,
    init: &Configuration,
    rng: &mut ChaCha8Rng,
    splice_eps: f64,
    observer: &mut StepObserver,
    record: bool,
) -> Result<Trajectory> {
    spec.validate()?;
    let s = &spec.system;
    if init.n() != s.n || init.d() != s.d {
        return Err(Error::Precondition(format!(
            "initial configuration is {}x{}, spec wants {}x{}",
            init.n(),
            init.d(),
            s.n,
            s.d
        )));
    }
    let splice = RegularizedLJ::new(s.potential, splice_eps)?;
    let n_steps = spec.n_steps();
    let nd = s.n * s.d;

    let mut x = init.positions().to_vec();
    let mut drift = vec![0.0; nd];
    let scalars = crate::system::eval_fields_into(
        &x,
        s.n,
        s.d,
        &s.potential,
        Some(&splice),
        s.d,
        &mut drift,
    )?;
    let mut phi = scalars.phi;
    let mut m = scalars.min_dist;

    if s.n >= 2 {
        let worst = observer.thresholds.iter().cloned().fold(f64::MIN, f64::max);
        if m <= worst {
            return Err(Error::Precondition(format!(
                "initial min pair distance {m} must exceed the largest threshold {worst}"
            )));
        }
    }

    let mut traj = Trajectory {
        times: Vec::new(),
        frames: Vec::new(),
        min_distance_series: Vec::new(),
        exit: None,
        seed: spec.seed,
        dt: spec.dt,
        record_stride: spec.record_stride,
        phi_max: phi,
        phi_final: phi,
        min_m: m,
        final_m: m,
    };

    let record_frame = |traj: &mut Trajectory, t: f64, x: &[f64], m: f64| -> Result<()> {
        if record {
            traj.times.push(t);
            traj.frames
                .push(Configuration::new(x.to_vec(), s.n, s.d)?);
            traj.min_distance_series.push(m);
        }
        Ok(())
    };
    record_frame(&mut traj, 0.0, &x, m)?;

    let mut noise = vec![0.0; nd];
    for k in 0..n_steps {
        for z in noise.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        if let ExtraDrift::Vortex { gammas } = &s.extra_drift {
            let c = Configuration::new(x.clone(), s.n, s.d)?;
            for (a, b) in drift.iter_mut().zip(vortex_drift(&c, gammas)?) {
                *a += b;
            }
        }
        em_update(&mut x, &drift, s.sigma, spec.dt, &noise);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric {
                step: k,
                time: k as f64 * spec.dt,
                what: format!("non-finite coordinate; last valid state at t={}", k as f64 * spec.dt),
            });
        }

        let scalars = crate::system::eval_fields_into(
            &x,
            s.n,
            s.d,
            &s.potential,
            Some(&splice),
            s.d,
            &mut drift,
        )?;
        phi = scalars.phi;
        m = scalars.min_dist;

        // threshold crossings: left endpoint of the crossing step
        for (ti, threshold) in observer.thresholds.iter().enumerate() {
            if observer.crossings[ti].is_none() && m <= *threshold {
                observer.crossings[ti] = Some(k as f64 * spec.dt);
                if ti == 0 && traj.exit.is_none() {
                    traj.exit = Some(ExitEvent {
                        tau_eps: k as f64 * spec.dt,
                        step: k + 1,
                        min_distance: m,
                    });
                }
            }
        }

        traj.phi_max = traj.phi_max.max(phi);
        traj.min_m = traj.min_m.min(m);
        let t = (k + 1) as f64 * spec.dt;
        if (k + 1) % spec.record_stride == 0 || k + 1 == n_steps {
            record_frame(&mut traj, t, &x, m)?;
        }
    }
    traj.phi_final = phi;
    traj.final_m = m;
    Ok(traj)
}

/// Integrate the spliced system to `t_end`, detect the first exit below
/// `epsilon`, and keep integrating after it (the spliced dynamics is global).
/// Bit-reproducible from the seed.
pub fn simulate(spec: &SimulationSpec, init: &Configuration) -> Result<Trajectory> {
    let mut rng = seeded_rng(spec.seed);
    simulate_with_rng(spec, init, &mut rng)
}

/// As [`simulate`] with a caller-owned generator (used by the batch harness
/// so initial sampling and noise share one per-run stream).
pub fn simulate_with_rng(
    spec: &SimulationSpec,
    init: &Configuration,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let mut observer = StepObserver {
        thresholds: &[spec.epsilon],
        crossings: vec![None],
    };
    integrate_core(spec, init, rng, spec.epsilon, &mut observer, true)
}

/// Run ONE noise realization spliced at the smallest threshold and read off
/// the first crossing time of every threshold from that single path.
///
/// Crossing times are non-decreasing as the threshold shrinks, pathwise and
/// exactly: the thresholds are nested level sets of the same `m(X_t)` path.
pub fn coupled_sweep(
    spec: &SimulationSpec,
    init: &Configuration,
    eps_list: &[f64],
) -> Result<Vec<Option<f64>>> {
    let mut rng = seeded_rng(spec.seed);
    coupled_sweep_with_rng(spec, init, eps_list, &mut rng)
}

/// As [`coupled_sweep`] with a caller-owned generator (lets batch drivers
/// sample the initial configuration and the noise from one per-run stream).
pub fn coupled_sweep_with_rng(
    spec: &SimulationSpec,
    init: &Configuration,
    eps_list: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Option<f64>>> {
    if eps_list.is_empty() {
        return Err(Error::Precondition("eps_list must be non-empty".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "eps_list must be strictly decreasing".into(),
        ));
    }
    let smallest = *eps_list.last().expect("non-empty");
    let mut observer = StepObserver {
        thresholds: eps_list,
        crossings: vec![None; eps_list.len()],
    };
    integrate_core(spec, init, rng, smallest, &mut observer, false)?;
    Ok(observer.crossings)
}

/// How batch runs obtain their initial configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InitSpec {
    /// The same fixed configuration for every run.
    Fixed { positions: Vec<f64> },
    /// Independent draws per particle.
    Iid { density: DensitySpec },
    /// One Metropolis-Hastings chain per run.
    Gibbs { gibbs: GibbsSpec },
}

impl InitSpec {
    pub fn sample(&self, n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Configuration> {
        match self {
            InitSpec::Fixed { positions } => Configuration::new(positions.clone(), n, d),
            InitSpec::Iid { density } => sample_iid(density, n, d, rng),
            InitSpec::Gibbs { gibbs } => sample_gibbs(gibbs, n, d, rng),
        }
    }
}

/// Per-run digest of a batch simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: u64,
    pub seed: u64,
    pub exited: bool,
    pub tau_eps: Option<f64>,
    pub min_m: f64,
    pub final_m: f64,
    pub phi_max: f64,
    pub phi_final: f64,
    /// Initial spliced potential (feeds the Markov constant estimate).
    pub phi_initial: f64,
    pub error: Option<String>,
}

/// Run `runs` independent simulations with per-run seeds derived from the
/// master seed. Failures are recorded per run and the batch continues.
pub fn run_batch(spec: &SimulationSpec, init: &InitSpec, runs: u64) -> Vec<RunSummary> {
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(spec.seed, run);
            let mut rng = seeded_rng(seed);
            let outcome = init
                .sample(spec.system.n, spec.system.d, &mut rng)
                .and_then(|start| {
                    let run_spec = SimulationSpec {
                        seed,
                        ..spec.clone()
                    };
                    let phi0 = eval_fields(
                        &start,
                        &spec.system.potential,
                        Some(&RegularizedLJ::new(spec.system.potential, spec.epsilon)?),
                        spec.system.d,
                    )?
                    .phi;
                    simulate_with_rng(&run_spec, &start, &mut rng).map(|t| (t, phi0))
                });
            match outcome {
                Ok((traj, phi_initial)) => RunSummary {
                    run,
                    seed,
                    exited: traj.exited(),
                    tau_eps: traj.tau_eps(),
                    min_m: traj.min_m,
                    final_m: traj.final_m,
                    phi_max: traj.phi_max,
                    phi_final: traj.phi_final,
                    phi_initial,
                    error: None,
                },
                Err(e) => RunSummary {
                    run,
                    seed,
                    exited: false,
                    tau_eps: None,
                    min_m: f64::NAN,
                    final_m: f64::NAN,
                    phi_max: f64::NAN,
                    phi_final: f64::NAN,
                    phi_initial: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
