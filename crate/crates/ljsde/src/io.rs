//! File formats: trajectory/configuration JSONL and the CSV digests.
//!
//! All floats are written in shortest round-trip form, so identical inputs
//! produce byte-identical files.

use crate::diagnostics::CollisionEstimate;
use crate::error::Result;
use crate::integrator::{RunSummary, SimulationSpec, Trajectory};
use crate::system::Configuration;
use serde::Serialize;
use std::io::Write;

#[derive(Serialize)]
struct TrajectoryHeader<'a> {
    spec: &'a SimulationSpec,
    seed: u64,
}

#[derive(Serialize)]
struct FrameRecord<'a> {
    t: f64,
    pos: Vec<&'a [f64]>,
}

/// One configuration record `{"t": ..., "pos": [[...d floats...] x N]}`.
pub fn write_configuration_record(
    w: &mut impl Write,
    t: f64,
    c: &Configuration,
) -> Result<()> {
    let record = FrameRecord {
        t,
        pos: c.rows().collect(),
    };
    serde_json::to_writer(&mut *w, &record)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Header record followed by one frame record per recorded step.
pub fn write_trajectory_jsonl(
    w: &mut impl Write,
    spec: &SimulationSpec,
    traj: &Trajectory,
) -> Result<()> {
    serde_json::to_writer(
        &mut *w,
        &TrajectoryHeader {
            spec,
            seed: traj.seed,
        },
    )?;
    w.write_all(b"\n")?;
    for (t, frame) in traj.times.iter().zip(&traj.frames) {
        write_configuration_record(w, *t, frame)?;
    }
    Ok(())
}

pub const SUMMARY_CSV_HEADER: &str = "run,seed,exited,tau_eps,min_m,phi_max,phi_final";

/// One batch-digest row; absent exit times are empty fields.
pub fn write_summary_row(w: &mut impl Write, s: &RunSummary) -> Result<()> {
    let tau = s.tau_eps.map(|t| t.to_string()).unwrap_or_default();
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        s.run, s.seed, s.exited, tau, s.min_m, s.phi_max, s.phi_final
    )?;
    Ok(())
}

pub const SWEEP_CSV_HEADER: &str =
    "eps,runs,p_hat,ci_low,ci_high,f_lower,theory_bound,eta,seed";

/// One sweep row per threshold.
pub fn write_sweep_row(w: &mut impl Write, est: &CollisionEstimate, seed: u64) -> Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{}",
        est.eps,
        est.runs,
        est.p_hat,
        est.ci_low,
        est.ci_high,
        est.f_lower,
        est.theory_bound,
        est.eta_hat,
        seed
    )?;
    Ok(())
}

pub const CERT_CSV_HEADER: &str = "mean_energy,ci,ceiling_hits,seed";

/// Certification row of the initial-energy Monte Carlo.
pub fn write_certification_row(
    w: &mut impl Write,
    cert: &crate::sampler::EnergyCertificate,
    seed: u64,
) -> Result<()> {
    writeln!(
        w,
        "{},{},{},{}",
        cert.mean, cert.ci_half_width, cert.ceiling_hits, seed
    )?;
    Ok(())
}
