//! Runnable versions of the well-posedness proof quantities: the Ito
//! reconstruction of the martingale part of `Phi(X_t)`, its pathwise barrier
//! bounds, the certified boundary potential level, the first-exit probability
//! estimate against the `C/R + (R + eta T)/f` bound, and the two-barrier
//! hitting identity as a standalone check.

use crate::error::{Error, Result};
use crate::integrator::{run_batch, InitSpec, SimulationSpec, Trajectory};
use crate::potential::{lj_minimum, lj_value, LJParams, RegularizedLJ};
use crate::rng::{derive_seed, seeded_rng};
use crate::stats::{mean_and_sd, wilson_interval, Z_975};
use crate::system::{eval_fields, vortex_drift, ExtraDrift, SystemSpec};
use rand_chacha::ChaCha8Rng;

/// The reconstructed martingale part of the spliced potential along one
/// discrete path, with its running compensator.
#[derive(Debug, Clone)]
pub struct MartingalePath {
    pub times: Vec<f64>,
    /// `M_t = Phi_t - Phi_0 + compensator_t`.
    pub m_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// Left-point Riemann sum of
    /// `|grad Phi|^2 - grad Phi . mu - (sigma^2/2) lap Phi`.
    pub compensator: Vec<f64>,
}

impl MartingalePath {
    pub fn final_m(&self) -> f64 {
        *self.m_values.last().expect("non-empty path")
    }
}

/// Rebuild the martingale part from a trajectory recorded at every step.
pub fn martingale_path(traj: &Trajectory, s: &SystemSpec, eps: f64) -> Result<MartingalePath> {
    if traj.record_stride != 1 {
        return Err(Error::Precondition(format!(
            "martingale reconstruction needs record_stride = 1, got {}",
            traj.record_stride
        )));
    }
    if traj.frames.len() < 2 {
        return Err(Error::Precondition("need at least two frames".into()));
    }
    let splice = RegularizedLJ::new(s.potential, eps)?;
    let k_frames = traj.frames.len();
    let mut phi_values = Vec::with_capacity(k_frames);
    let mut integrand = Vec::with_capacity(k_frames);
    for frame in &traj.frames {
        let fields = eval_fields(frame, &s.potential, Some(&splice), s.d)?;
        let mut grad_dot_mu = 0.0;
        if let ExtraDrift::Vortex { gammas } = &s.extra_drift {
            let mu = vortex_drift(frame, gammas)?;
            // grad Phi rows are the negated drift rows
            grad_dot_mu = fields
                .drift_lj
                .iter()
                .zip(&mu)
                .map(|(dr, m)| -dr * m)
                .sum();
        }
        phi_values.push(fields.phi);
        integrand.push(fields.grad_sq - grad_dot_mu - 0.5 * s.sigma * s.sigma * fields.lap_phi);
    }
    let mut compensator = Vec::with_capacity(k_frames);
    compensator.push(0.0);
    for k in 1..k_frames {
        let dt = traj.times[k] - traj.times[k - 1];
        compensator.push(compensator[k - 1] + integrand[k - 1] * dt);
    }
    let m_values = phi_values
        .iter()
        .zip(&compensator)
        .map(|(phi, comp)| phi - phi_values[0] + comp)
        .collect();
    Ok(MartingalePath {
        times: traj.times.clone(),
        m_values,
        phi_values,
        compensator,
    })
}

/// Outcome of the pathwise barrier bounds on the reconstructed martingale.
#[derive(Debug, Clone, Copy)]
pub struct MartingaleBoundsReport {
    /// `inf_t M_t >= -Phi_0 - delta - eta T`.
    pub inf_holds: bool,
    pub inf_slack: f64,
    /// `sup_t M_t >= sup_t Phi_t - Phi_0 - delta - eta T`.
    pub sup_holds: bool,
    pub sup_slack: f64,
}

/// Check both barrier bounds. `delta` is the lower-bound constant of the
/// global potential (`(N-1) delta'/2` for the pairwise system), `eta` the
/// drift-dominance ceiling (from a scan or supplied).
pub fn check_martingale_bounds(
    mp: &MartingalePath,
    delta: f64,
    eta: f64,
    t_end: f64,
) -> MartingaleBoundsReport {
    let phi0 = mp.phi_values[0];
    let inf_m = mp.m_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup_m = mp
        .m_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let sup_phi = mp
        .phi_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let inf_slack = inf_m - (-phi0 - delta - eta * t_end);
    let sup_slack = sup_m - (sup_phi - phi0 - delta - eta * t_end);
    MartingaleBoundsReport {
        inf_holds: inf_slack >= 0.0,
        inf_slack,
        sup_holds: sup_slack >= 0.0,
        sup_slack,
    }
}

/// Certified lower bound of the global potential over configurations with
/// minimal pair distance `eps`:
/// `f(eps) = [V(eps) - (N(N-1)/2 - 1) delta'] / N`.
///
/// The closest pair contributes `V(eps)/N`, every other pair at least
/// `-delta'/N`. Monotone increasing as eps shrinks; diverges like
/// `eps^-alpha`. Requires `eps < r_bar` and `V(eps) > 0`, otherwise the
/// bound is not informative.
pub fn f_lower(p: &LJParams, n: usize, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("f_lower needs n >= 2".into()));
    }
    let r_bar = p
        .r_bar()
        .ok_or_else(|| Error::Domain("f_lower needs an attractive branch".into()))?;
    if !(eps > 0.0 && eps < r_bar) {
        return Err(Error::Domain(format!(
            "f_lower needs 0 < eps < r_bar = {r_bar}, got {eps}"
        )));
    }
    let v_eps = lj_value(p, eps)?;
    if v_eps <= 0.0 {
        return Err(Error::Domain(format!(
            "boundary level not informative: V({eps}) = {v_eps} <= 0"
        )));
    }
    let delta_prime = lj_minimum(p).delta_prime;
    let pairs = n * (n - 1) / 2;
    Ok((v_eps - (pairs as f64 - 1.0) * delta_prime) / n as f64)
}

/// First-exit probability estimate with its Wilson interval and the
/// theoretical ceiling `C/R + (R + eta T)/f` at `R = sqrt(f)`.
#[derive(Debug, Clone)]
pub struct CollisionEstimate {
    pub eps: f64,
    pub t_end: f64,
    pub runs: usize,
    pub exits: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub eta_hat: f64,
    pub c_markov: f64,
    pub f_lower: f64,
    pub theory_bound: f64,
    /// One-sided consistency: the estimate must not exceed the bound.
    pub within_bound: bool,
    pub failed_runs: usize,
}

/// Monte Carlo estimate of `P(tau_eps <= T)` over a batch, checked against
/// the theoretical bound. `c_markov` defaults to the batch mean of
/// `Phi_0 + delta` when not supplied.
pub fn collision_probability(
    spec: &SimulationSpec,
    init: &InitSpec,
    runs: u64,
    eta: f64,
    c_markov: Option<f64>,
) -> Result<CollisionEstimate> {
    if runs == 0 {
        return Err(Error::Precondition("runs must be >= 1".into()));
    }
    let f = f_lower(&spec.system.potential, spec.system.n, spec.epsilon)?;
    if f <= 0.0 {
        return Err(Error::Domain(format!(
            "boundary level f_lower = {f} <= 0: bound not informative at eps = {}",
            spec.epsilon
        )));
    }
    let summaries = run_batch(spec, init, runs);
    let failed_runs = summaries.iter().filter(|r| r.error.is_some()).count();
    let valid: Vec<_> = summaries.iter().filter(|r| r.error.is_none()).collect();
    if valid.is_empty() {
        return Err(Error::Numeric {
            step: 0,
            time: 0.0,
            what: "every batch run failed".into(),
        });
    }
    let exits = valid.iter().filter(|r| r.exited).count();
    let n_valid = valid.len();
    let p_hat = exits as f64 / n_valid as f64;
    let (ci_low, ci_high) = wilson_interval(exits, n_valid, Z_975);

    let delta =
        (spec.system.n as f64 - 1.0) * lj_minimum(&spec.system.potential).delta_prime / 2.0;
    let c_markov = match c_markov {
        Some(c) => c,
        None => {
            let phis: Vec<f64> = valid.iter().map(|r| r.phi_initial).collect();
            phis.iter().sum::<f64>() / phis.len() as f64 + delta
        }
    };
    let r = f.sqrt();
    let theory_bound = c_markov / r + (r + eta * spec.t_end) / f;

    Ok(CollisionEstimate {
        eps: spec.epsilon,
        t_end: spec.t_end,
        runs: n_valid,
        exits,
        p_hat,
        ci_low,
        ci_high,
        eta_hat: eta,
        c_markov,
        f_lower: f,
        theory_bound,
        within_bound: ci_high <= theory_bound,
        failed_runs,
    })
}

/// Monte Carlo estimate of the probability that a mean-zero walk hits `b - a`
/// before `-a`; the optional-sampling identity gives exactly `a/b`.
///
/// `increment` draws one step of the walk. Runs are capped at `max_steps`;
/// a run that hits neither barrier in the cap is an error (pick a cap well
/// above `a (b - a) / E[step^2]`).
pub fn doob_two_barrier(
    runs: usize,
    a: f64,
    b: f64,
    mut increment: impl FnMut(&mut ChaCha8Rng) -> f64,
    seed: u64,
    max_steps: usize,
) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return Err(Error::Precondition(format!(
            "need 0 < a < b, got a={a}, b={b}"
        )));
    }
    let mut hit_upper = 0usize;
    for run in 0..runs {
        let mut rng = seeded_rng(derive_seed(seed, run as u64));
        let mut m = 0.0f64;
        let mut decided = false;
        for _ in 0..max_steps {
            m += increment(&mut rng);
            if m >= b - a {
                hit_upper += 1;
                decided = true;
                break;
            }
            if m <= -a {
                decided = true;
                break;
            }
        }
        if !decided {
            return Err(Error::Numeric {
                step: max_steps,
                time: 0.0,
                what: format!("walk hit neither barrier within {max_steps} steps"),
            });
        }
    }
    Ok(hit_upper as f64 / runs as f64)
}

/// Convenience: mean of `M_T` over a batch of reconstructed paths with its
/// standard error (the zero-mean martingale diagnostic).
pub fn martingale_terminal_stats(m_terminal: &[f64]) -> (f64, f64) {
    let (mean, sd) = mean_and_sd(m_terminal);
    (mean, sd / (m_terminal.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::simulate;
    use crate::potential::LJParams;
    use crate::system::{min_pair_distance, Configuration, SystemSpec};
    use rand::Rng;
    use rand_distr::Distribution;

    const R_BAR: f64 = 1.122_462_048_309_373;

    fn classical() -> LJParams {
        LJParams::classical()
    }

    fn pair_spec(sigma: f64, eps: f64, t_end: f64, seed: u64) -> SimulationSpec {
        SimulationSpec {
            system: SystemSpec::new(2, 3, sigma, classical(), ExtraDrift::None).unwrap(),
            epsilon: eps,
            t_end,
            dt: 1e-3,
            seed,
            record_stride: 1,
        }
    }

    #[test]
    fn martingale_zero_at_equilibrium() {
        let sp = pair_spec(0.0, 0.3 * R_BAR, 0.1, 2);
        let init =
            Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![R_BAR, 0.0, 0.0]]).unwrap();
        let traj = simulate(&sp, &init).unwrap();
        let mp = martingale_path(&traj, &sp.system, sp.epsilon).unwrap();
        for (m, c) in mp.m_values.iter().zip(&mp.compensator) {
            assert!(m.abs() < 1e-12, "M = {m}");
            assert!(c.abs() < 1e-12);
        }
        // bounds hold with slack delta + eta T
        let rep = check_martingale_bounds(&mp, 0.125, 1.0, sp.t_end);
        assert!(rep.inf_holds && rep.sup_holds);
        assert!(rep.inf_slack > 0.0 && rep.sup_slack > 0.0);
    }

    #[test]
    fn martingale_requires_every_step() {
        let mut sp = pair_spec(0.5, 0.3 * R_BAR, 0.05, 3);
        sp.record_stride = 10;
        let init =
            Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.3, 0.0, 0.0]]).unwrap();
        let traj = simulate(&sp, &init).unwrap();
        assert!(matches!(
            martingale_path(&traj, &sp.system, sp.epsilon),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn decomposition_identity() {
        let sp = pair_spec(0.5, 0.3 * R_BAR, 0.08, 11);
        let init =
            Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.4, 0.0, 0.0]]).unwrap();
        let traj = simulate(&sp, &init).unwrap();
        let mp = martingale_path(&traj, &sp.system, sp.epsilon).unwrap();
        // identity M = Phi - Phi_0 + compensator, recomputed independently
        let splice = RegularizedLJ::new(sp.system.potential, sp.epsilon).unwrap();
        for (k, frame) in traj.frames.iter().enumerate() {
            let fields = eval_fields(frame, &sp.system.potential, Some(&splice), 3).unwrap();
            let expect = fields.phi - mp.phi_values[0] + mp.compensator[k];
            let scale = mp.m_values[k].abs().max(1.0);
            assert!(
                (mp.m_values[k] - expect).abs() <= 1e-10 * scale,
                "step {k}"
            );
        }
    }

    #[test]
    fn adversarial_eta_reports_violation() {
        let sp = pair_spec(0.5, 0.3 * R_BAR, 0.05, 13);
        let init =
            Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.3, 0.0, 0.0]]).unwrap();
        let traj = simulate(&sp, &init).unwrap();
        let mp = martingale_path(&traj, &sp.system, sp.epsilon).unwrap();
        let rep = check_martingale_bounds(&mp, 0.125, -1e6, sp.t_end);
        assert!(!rep.inf_holds || !rep.sup_holds);
    }

    #[test]
    fn f_lower_examples() {
        let p = classical();
        assert!((f_lower(&p, 2, 0.5).unwrap() - 2016.0).abs() < 1e-9);
        let expect = (4032.0 - 2.0 * 0.25) / 3.0;
        assert!((f_lower(&p, 3, 0.5).unwrap() - expect).abs() < 1e-9);

        // near r_bar the pair value is negative: flagged
        assert!(f_lower(&p, 2, 1.05).is_err());
        assert!(f_lower(&p, 2, 1.5).is_err());

        // monotone increasing as eps shrinks, diverging like eps^-alpha
        let f1 = f_lower(&p, 4, 1e-3).unwrap();
        let f2 = f_lower(&p, 4, 5e-4).unwrap();
        assert!(f2 > f1);
        assert!((f2 / f1 / 4096.0 - 1.0).abs() < 1e-6); // 2^alpha = 2^12
    }

    #[test]
    fn f_lower_certifies_constructed_configurations() {
        // one pair at distance eps, everyone else far apart: the global
        // potential must sit above the certified level
        let p = classical();
        let mut rng = seeded_rng(800);
        for _ in 0..200 {
            let n = rng.gen_range(2..6);
            let eps = rng.gen_range(0.2..0.8) * R_BAR;
            let mut rows = vec![
                vec![0.0, 0.0, 0.0],
                vec![eps, 0.0, 0.0],
            ];
            for i in 2..n {
                rows.push(vec![10.0 * i as f64, 5.0 * i as f64, -3.0 * i as f64]);
            }
            let c = Configuration::from_rows(&rows).unwrap();
            assert!((min_pair_distance(&c).unwrap() - eps).abs() < 1e-12);
            let phi = crate::system::global_potential(&c, &p).unwrap();
            let f = f_lower(&p, n, eps).unwrap();
            assert!(phi >= f - 1e-9 * f.abs(), "phi={phi} f={f}");
        }
    }

    #[test]
    fn doob_symmetric_walk() {
        // +-1 walk, a=1, b=2: the first step decides; exactly 1/2
        let p = doob_two_barrier(
            4000,
            1.0,
            2.0,
            |rng| if rng.gen::<bool>() { 1.0 } else { -1.0 },
            42,
            10_000,
        )
        .unwrap();
        let se = (0.25f64 / 4000.0).sqrt();
        assert!((p - 0.5).abs() <= 3.0 * se, "p = {p}");

        // a = b/2 symmetry at a different scale
        let p = doob_two_barrier(
            4000,
            1.5,
            3.0,
            |rng| {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                0.05 * z
            },
            43,
            10_000_000,
        )
        .unwrap();
        let se = (0.25f64 / 4000.0).sqrt();
        assert!((p - 0.5).abs() <= 3.0 * se, "p = {p}");
    }

    #[test]
    fn doob_requires_ordered_barriers() {
        assert!(doob_two_barrier(10, 2.0, 1.0, |_| 1.0, 1, 10).is_err());
        assert!(doob_two_barrier(10, 0.0, 1.0, |_| 1.0, 1, 10).is_err());
    }

    #[test]
    fn collision_probability_zero_at_equilibrium() {
        let sp = pair_spec(0.0, 0.5 * R_BAR, 0.05, 21);
        let init = InitSpec::Fixed {
            positions: vec![0.0, 0.0, 0.0, R_BAR, 0.0, 0.0],
        };
        let est = collision_probability(&sp, &init, 20, 1.0, None).unwrap();
        assert_eq!(est.exits, 0);
        assert_eq!(est.p_hat, 0.0);
        assert!(est.ci_high > 0.0); // Wilson does not collapse at zero
        assert!(est.theory_bound > 0.0);
        assert!(est.f_lower > 0.0);
        assert_eq!(est.failed_runs, 0);
    }
}
