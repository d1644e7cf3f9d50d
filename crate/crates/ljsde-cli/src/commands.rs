use crate::config::{Config, ConfigError};
use ljsde::diagnostics::{collision_probability, f_lower, CollisionEstimate};
use ljsde::integrator::{
    coupled_sweep_with_rng, run_batch, simulate_with_rng, InitSpec, SimulationSpec,
};
use ljsde::io;
use ljsde::lemmas::{
    default_c_n, h3_scan, sum_squares_bound_sweep, triple_bound_sweep, BoundConstants,
};
use ljsde::potential::{
    lj_force_scalar, lj_laplacian, lj_minimum, lj_value, LJParams, RegularizedLJ,
};
use ljsde::rng::{derive_seed, seeded_rng};
use ljsde::sampler::certify_initial_energy;
use ljsde::stats::{wilson_interval, Z_975};
use ljsde::system::eval_fields;
use rand::Rng;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Stable process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

pub enum CmdError {
    Config(String),
    Numeric(String),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

impl From<ljsde::Error> for CmdError {
    fn from(e: ljsde::Error) -> Self {
        CmdError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Numeric(format!("i/o: {e}"))
    }
}

type CmdResult = Result<u8, CmdError>;

pub fn out_dir(cfg: &Config) -> PathBuf {
    PathBuf::from(cfg.get("out.dir").unwrap_or("."))
}

fn create_out(cfg: &Config) -> Result<PathBuf, CmdError> {
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn writer(path: &Path) -> Result<BufWriter<File>, CmdError> {
    Ok(BufWriter::new(File::create(path)?))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(cfg: &Config, save_trajectories: bool) -> CmdResult {
    let spec = cfg.simulation(None)?;
    let init = cfg.init()?;
    let runs = cfg.runs(None)?;
    if runs == 0 {
        return Err(CmdError::Config("runs must be >= 1".into()));
    }
    let dir = create_out(cfg)?;

    println!("seed: {}", spec.seed);
    let summaries = run_batch(&spec, &init, runs);

    let mut csv = writer(&dir.join("summary.csv"))?;
    writeln!(csv, "{}", io::SUMMARY_CSV_HEADER)?;
    let mut failures = Vec::new();
    for s in &summaries {
        match &s.error {
            None => io::write_summary_row(&mut csv, s)?,
            Some(e) => failures.push((s.run, s.seed, e.clone())),
        }
    }
    csv.flush()?;

    if !failures.is_empty() {
        let mut ef = writer(&dir.join("errors.csv"))?;
        writeln!(ef, "run,seed,error")?;
        for (run, seed, e) in &failures {
            writeln!(ef, "{run},{seed},{}", e.replace(',', ";"))?;
        }
        ef.flush()?;
        eprintln!("{} of {} runs failed (errors.csv)", failures.len(), runs);
    }

    // trajectory files: always the first run, all runs on request
    let wanted: Vec<u64> = if save_trajectories {
        (0..runs).collect()
    } else {
        vec![0]
    };
    for run in wanted {
        let seed = derive_seed(spec.seed, run);
        let mut rng = seeded_rng(seed);
        let run_spec = SimulationSpec { seed, ..spec.clone() };
        let start = init.sample(spec.system.n, spec.system.d, &mut rng)?;
        match simulate_with_rng(&run_spec, &start, &mut rng) {
            Ok(traj) => {
                let mut w = writer(&dir.join(format!("trajectory_{run:06}.jsonl")))?;
                io::write_trajectory_jsonl(&mut w, &run_spec, &traj)?;
                w.flush()?;
            }
            Err(_) => continue, // already recorded in errors.csv
        }
    }

    if failures.len() as u64 == runs {
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn estimate_eta(cfg: &Config, spec: &SimulationSpec) -> Result<f64, CmdError> {
    if let Some(eta) = cfg.opt_f64("sweep.eta")? {
        return Ok(eta);
    }
    let samples = cfg.opt_usize("scan.samples")?.unwrap_or(200);
    let mut rng = seeded_rng(derive_seed(spec.seed, 0xE7A));
    let report = h3_scan(&spec.system.potential, &spec.system, samples, &mut rng)?;
    Ok(report.eta_estimate)
}

pub fn cmd_sweep(cfg: &Config) -> CmdResult {
    let mut spec = cfg.simulation(None)?;
    let init = cfg.init()?;
    let eps_list = cfg
        .f64_list("sweep.eps")?
        .ok_or_else(|| CmdError::Config("sweep needs `sweep.eps`".into()))?;
    if eps_list.is_empty() {
        return Err(CmdError::Config("sweep.eps must be non-empty".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CmdError::Config(
            "sweep.eps must be strictly decreasing".into(),
        ));
    }
    let mode = cfg.get("sweep.mode").unwrap_or("coupled");
    let runs = cfg.runs(None)?;
    let eta = estimate_eta(cfg, &spec)?;
    let c_markov = cfg.opt_f64("sweep.c_markov")?;
    let dir = create_out(cfg)?;
    let mut csv = writer(&dir.join("sweep.csv"))?;
    writeln!(csv, "{}", io::SWEEP_CSV_HEADER)?;
    println!("seed: {}", spec.seed);

    match mode {
        "coupled" => {
            let smallest = *eps_list.last().expect("non-empty");
            spec.epsilon = smallest;
            let mut exit_counts = vec![0usize; eps_list.len()];
            let mut phi0_sum = 0.0;
            let mut valid = 0usize;
            for run in 0..runs {
                let seed = derive_seed(spec.seed, run);
                let mut rng = seeded_rng(seed);
                let start = init.sample(spec.system.n, spec.system.d, &mut rng)?;
                let run_spec = SimulationSpec { seed, ..spec.clone() };
                let splice = RegularizedLJ::new(spec.system.potential, smallest)?;
                phi0_sum +=
                    eval_fields(&start, &spec.system.potential, Some(&splice), spec.system.d)?
                        .phi;
                let crossings = coupled_sweep_with_rng(&run_spec, &start, &eps_list, &mut rng)?;
                valid += 1;
                for (i, c) in crossings.iter().enumerate() {
                    if c.is_some() {
                        exit_counts[i] += 1;
                    }
                }
            }
            let delta = (spec.system.n as f64 - 1.0)
                * lj_minimum(&spec.system.potential).delta_prime
                / 2.0;
            let c = c_markov.unwrap_or(phi0_sum / valid.max(1) as f64 + delta);
            for (i, eps) in eps_list.iter().enumerate() {
                let f = f_lower(&spec.system.potential, spec.system.n, *eps)?;
                let (ci_low, ci_high) = wilson_interval(exit_counts[i], valid, Z_975);
                let est = CollisionEstimate {
                    eps: *eps,
                    t_end: spec.t_end,
                    runs: valid,
                    exits: exit_counts[i],
                    p_hat: exit_counts[i] as f64 / valid as f64,
                    ci_low,
                    ci_high,
                    eta_hat: eta,
                    c_markov: c,
                    f_lower: f,
                    theory_bound: c / f.sqrt() + (f.sqrt() + eta * spec.t_end) / f,
                    within_bound: ci_high <= c / f.sqrt() + (f.sqrt() + eta * spec.t_end) / f,
                    failed_runs: 0,
                };
                io::write_sweep_row(&mut csv, &est, spec.seed)?;
            }
        }
        "independent" => {
            let per_eps = cfg.f64_list("sweep.runs_per_eps")?;
            if let Some(list) = &per_eps {
                if list.len() != eps_list.len() {
                    return Err(CmdError::Config(
                        "sweep.runs_per_eps must match sweep.eps in length".into(),
                    ));
                }
            }
            for (i, eps) in eps_list.iter().enumerate() {
                let n_runs = per_eps
                    .as_ref()
                    .map(|l| l[i] as u64)
                    .unwrap_or(runs);
                let eps_seed = derive_seed(spec.seed, 1_000 + i as u64);
                let eps_spec = SimulationSpec {
                    epsilon: *eps,
                    seed: eps_seed,
                    ..spec.clone()
                };
                let est = collision_probability(&eps_spec, &init, n_runs, eta, c_markov)?;
                io::write_sweep_row(&mut csv, &est, eps_seed)?;
            }
        }
        other => {
            return Err(CmdError::Config(format!(
                "sweep.mode `{other}` is not coupled|independent"
            )))
        }
    }
    csv.flush()?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify-lemmas
// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    samples: usize,
    violations: usize,
    worst_slack: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.violations == 0 && self.worst_slack >= 0.0
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while (hi - lo).abs() > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

pub fn cmd_verify(cfg: &Config, quick: bool, h_override: Option<f64>) -> CmdResult {
    let p = match cfg.get("potential.a") {
        Some(_) => cfg.potential()?,
        None => LJParams::classical(),
    };
    let r_bar = p
        .r_bar()
        .ok_or_else(|| CmdError::Config("verification needs an attractive branch".into()))?;
    let seed = cfg.opt_u64("sim.seed")?.unwrap_or(20_25);
    let (triples, per_n) = if quick {
        (10_000, 1_000)
    } else {
        (
            cfg.opt_usize("verify.triples")?.unwrap_or(100_000),
            cfg.opt_usize("verify.configs_per_n")?.unwrap_or(10_000),
        )
    };
    let lo = cfg.opt_f64("verify.lo_frac")?.unwrap_or(0.4);
    let hi = cfg.opt_f64("verify.hi_frac")?.unwrap_or(4.0);
    let consts = match h_override {
        Some(h) => BoundConstants::overridden(h),
        None => BoundConstants::from_params(&p)?,
    };

    let mut checks: Vec<Check> = Vec::new();

    // closed-form minimum against an independent 1-d minimization
    {
        let m = lj_minimum(&p);
        let (r_num, v_num) = golden_min(
            |r| lj_value(&p, r).unwrap_or(f64::INFINITY),
            0.3 * r_bar,
            5.0 * r_bar,
            1e-11,
        );
        let worst = 1e-8
            - (m.r_bar.unwrap() - r_num)
                .abs()
                .max((m.v_min - v_num).abs());
        checks.push(Check {
            name: "potential.minimum",
            samples: 1,
            violations: usize::from(worst < 0.0),
            worst_slack: worst,
        });
    }

    // force and Laplacian against central finite differences
    {
        let mut rng = seeded_rng(derive_seed(seed, 1));
        let mut worst_f = f64::INFINITY;
        let mut worst_l = f64::INFINITY;
        let samples = if quick { 200 } else { 1_000 };
        for _ in 0..samples {
            let r = rng.gen_range(0.3..5.0) * r_bar;
            let h = 1e-5 * r;
            let (vp, v0, vm) = (
                lj_value(&p, r + h)?,
                lj_value(&p, r)?,
                lj_value(&p, r - h)?,
            );
            let fd_force = -(vp - vm) / (2.0 * h);
            let force = lj_force_scalar(&p, r)?;
            let (ra, rb) = (r.powf(-p.alpha()), r.powf(-p.beta()));
            let f_scale = (p.alpha() * p.a() * ra + p.beta() * p.b() * rb) / r;
            worst_f = worst_f.min(1e-6 - (force - fd_force).abs() / f_scale);

            let d = 3usize;
            let g1 = (vp - vm) / (2.0 * h);
            let g2 = (vp - 2.0 * v0 + vm) / (h * h);
            let fd_lap = g2 + (d as f64 - 1.0) * g1 / r;
            let lap = lj_laplacian(&p, r, d)?;
            let l_scale = (p.alpha() * p.a() * (p.alpha() + d as f64) * ra
                + p.beta() * p.b() * (p.beta() + d as f64) * rb)
                / (r * r);
            worst_l = worst_l.min(1e-5 - (lap - fd_lap).abs() / l_scale);
        }
        checks.push(Check {
            name: "potential.gradient_fd",
            samples,
            violations: usize::from(worst_f < 0.0),
            worst_slack: worst_f,
        });
        checks.push(Check {
            name: "potential.laplacian_fd",
            samples,
            violations: usize::from(worst_l < 0.0),
            worst_slack: worst_l,
        });
    }

    // splice: closed-form C1 match and force monotonicity below r_bar
    {
        let mut rng = seeded_rng(derive_seed(seed, 2));
        let samples = 100;
        let mut worst_c1 = f64::INFINITY;
        let mut worst_mono = f64::INFINITY;
        for _ in 0..samples {
            let eps = rng.gen_range(0.15..0.95) * r_bar;
            let reg = RegularizedLJ::new(p, eps)?;
            let v_scale = lj_value(&p, eps)?.abs().max(1.0);
            let f_scale = lj_force_scalar(&p, eps)?.abs().max(1.0);
            worst_c1 = worst_c1
                .min(1e-10 - (reg.value(eps) - lj_value(&p, eps)?).abs() / v_scale)
                .min(1e-10 - (reg.force_scalar(eps) - lj_force_scalar(&p, eps)?).abs() / f_scale);
            let mut prev = f64::INFINITY;
            for k in 1..=1_000 {
                let r = r_bar * k as f64 / 1_000.0;
                let mag = reg.force_scalar(r).abs();
                worst_mono = worst_mono.min(prev * (1.0 + 1e-12) - mag);
                prev = mag;
            }
        }
        checks.push(Check {
            name: "potential.splice_c1",
            samples,
            violations: usize::from(worst_c1 < 0.0),
            worst_slack: worst_c1,
        });
        checks.push(Check {
            name: "potential.splice_monotone",
            samples,
            violations: usize::from(worst_mono < 0.0),
            worst_slack: worst_mono,
        });
    }

    // triple product bound
    let rep = triple_bound_sweep(&p, &consts, triples, derive_seed(seed, 3), lo, hi)?;
    for tally in &rep.per_case {
        checks.push(Check {
            name: match tally.tag.label() {
                "all_attr" => "triple_bound.all_attr",
                "all_rep" => "triple_bound.all_rep",
                "mixed_1rep" => "triple_bound.mixed_1rep",
                _ => "triple_bound.mixed_2rep",
            },
            samples: tally.samples,
            violations: tally.violations,
            worst_slack: tally.worst_slack,
        });
    }
    if rep.violations > 0 {
        if let Some([xi, xj, xk]) = &rep.first_violation {
            eprintln!(
                "triple bound violated {} times; first at i={xi:?} j={xj:?} k={xk:?}",
                rep.violations
            );
        }
    }

    // sum-of-squares bound for N = 2..6
    for n in 2..=6usize {
        let rep = sum_squares_bound_sweep(
            &p,
            &consts,
            n,
            per_n,
            derive_seed(seed, 10 + n as u64),
            lo,
            hi,
        )?;
        checks.push(Check {
            name: match n {
                2 => "sum_squares.n2",
                3 => "sum_squares.n3",
                4 => "sum_squares.n4",
                5 => "sum_squares.n5",
                _ => "sum_squares.n6",
            },
            samples: per_n,
            violations: rep.violations,
            worst_slack: rep.worst_slack,
        });
    }

    // near-origin dominance of the squared force over the Laplacian
    {
        let mut worst = f64::INFINITY;
        for n in [2usize, 5, 10] {
            for sigma in [0.5, 1.0, 2.0] {
                for frac in [1e-2, 1e-3] {
                    let r = frac * r_bar;
                    let f = lj_force_scalar(&p, r)?;
                    let lap = lj_laplacian(&p, r, 3)?;
                    let nf = n as f64;
                    worst = worst.min(f * f / (nf * nf) - sigma * sigma / nf * lap.abs());
                }
            }
        }
        checks.push(Check {
            name: "dominance.near_origin",
            samples: 18,
            violations: usize::from(worst < 0.0),
            worst_slack: worst,
        });
    }

    let dir = create_out(cfg)?;
    let mut csv = writer(&dir.join("verify.csv"))?;
    writeln!(csv, "check,samples,violations,worst_slack,pass")?;
    let mut all_pass = true;
    for c in &checks {
        writeln!(
            csv,
            "{},{},{},{},{}",
            c.name,
            c.samples,
            c.violations,
            c.worst_slack,
            c.pass()
        )?;
        if !c.pass() {
            all_pass = false;
            println!("FAIL {} (violations={}, worst_slack={:e})", c.name, c.violations, c.worst_slack);
        } else {
            println!("pass {}", c.name);
        }
    }
    csv.flush()?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY })
}

// ---------------------------------------------------------------------------
// check-h
// ---------------------------------------------------------------------------

pub fn cmd_check_h(cfg: &Config) -> CmdResult {
    let system = cfg.system()?;
    let p = system.potential;
    let samples = cfg.opt_usize("scan.samples")?.unwrap_or(200);
    let seed = cfg.opt_u64("sim.seed")?.unwrap_or(7);
    let mut rng = seeded_rng(derive_seed(seed, 0xA3));
    let report = h3_scan(&p, &system, samples, &mut rng)?;

    let dir = create_out(cfg)?;
    let mut csv = writer(&dir.join("h3_scan.csv"))?;
    writeln!(csv, "stratum_m,samples,mean_expr,max_expr")?;
    for s in &report.strata {
        writeln!(csv, "{},{},{},{}", s.m_target, s.samples, s.mean, s.max)?;
    }
    csv.flush()?;

    println!("eta_estimate: {}", report.eta_estimate);
    match report.r_star {
        Some(r) => println!("r_star: {r}"),
        None => println!("r_star: none (pair term not positive in the certified range)"),
    }
    println!(
        "near_singular_monotone: {}",
        report.near_singular_monotone
    );
    println!("default_c_n: {}", default_c_n(&p, system.n)?);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// sample-init
// ---------------------------------------------------------------------------

pub fn cmd_sample_init(cfg: &Config) -> CmdResult {
    let system = cfg.system()?;
    let p = system.potential;
    let init = cfg.init()?;
    let seed = cfg.require_u64("sim.seed")?;
    let runs = cfg.opt_usize("cert.runs")?.unwrap_or(100);
    let ceiling = cfg.opt_f64("cert.ceiling")?;

    if matches!(init, InitSpec::Iid { .. }) {
        if let ljsde::sampler::Applicability::NotApplicable(reason) =
            ljsde::sampler::check_iid_applicability(&p, system.d)
        {
            println!("warning: i.i.d. sampling may be inadmissible: {reason}");
        }
    }

    let dir = create_out(cfg)?;
    let mut rng = seeded_rng(seed);
    let config = init.sample(system.n, system.d, &mut rng)?;
    let mut jsonl = writer(&dir.join("initial.jsonl"))?;
    io::write_configuration_record(&mut jsonl, 0.0, &config)?;
    jsonl.flush()?;

    let cert = certify_initial_energy(
        |s| {
            let mut rng = seeded_rng(s);
            init.sample(system.n, system.d, &mut rng)
        },
        &p,
        runs,
        seed,
        ceiling,
    )?;
    let mut csv = writer(&dir.join("certification.csv"))?;
    writeln!(csv, "{}", io::CERT_CSV_HEADER)?;
    io::write_certification_row(&mut csv, &cert, seed)?;
    csv.flush()?;

    println!(
        "mean energy {} +- {} over {} draws; ceiling hits: {}",
        cert.mean, cert.ci_half_width, cert.runs, cert.ceiling_hits
    );
    if !cert.passed {
        println!("certification FAILED: energy ceiling exceeded (likely heavy-tailed initial law)");
    }
    Ok(EXIT_OK)
}
