//! N-particle configurations in R^d, the global interaction potential, the
//! mean-field pairwise drift, boundary-proximity via the minimal pair
//! distance, and the optional non-gradient vortex drift (d = 2).

use crate::error::{Error, Result};
use crate::potential::{lj_value, norm, LJParams, RegularizedLJ};
use serde::{Deserialize, Serialize};

/// Immutable snapshot of N particle positions in R^d (row-major N×d).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: Vec<f64>,
    n: usize,
    d: usize,
}

impl Configuration {
    pub fn new(positions: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParams(format!(
                "need n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if positions.len() != n * d {
            return Err(Error::InvalidParams(format!(
                "positions length {} != n*d = {}",
                positions.len(),
                n * d
            )));
        }
        if !positions.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParams("non-finite coordinate".into()));
        }
        Ok(Self { positions, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParams("ragged rows".into()));
        }
        Self::new(rows.concat(), n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.d)
    }
}

/// Optional non-gradient drift added on top of the pairwise gradient drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtraDrift {
    None,
    /// Point-vortex interaction with per-particle intensities; d = 2 only.
    Vortex { gammas: Vec<f64> },
}

/// The simulated system: particle count, dimension, diffusion amplitude,
/// pair potential, and the optional extra drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    pub d: usize,
    pub sigma: f64,
    pub potential: LJParams,
    pub extra_drift: ExtraDrift,
}

impl SystemSpec {
    pub fn new(
        n: usize,
        d: usize,
        sigma: f64,
        potential: LJParams,
        extra_drift: ExtraDrift,
    ) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParams(format!(
                "need n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma must be >= 0, got {sigma}")));
        }
        if let ExtraDrift::Vortex { gammas } = &extra_drift {
            if d != 2 {
                return Err(Error::InvalidParams(format!(
                    "vortex drift requires d = 2, got d={d}"
                )));
            }
            if gammas.len() != n {
                return Err(Error::InvalidParams(format!(
                    "need one vortex intensity per particle: {} != {n}",
                    gammas.len()
                )));
            }
        }
        Ok(Self {
            n,
            d,
            sigma,
            potential,
            extra_drift,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(
            self.n,
            self.d,
            self.sigma,
            self.potential,
            self.extra_drift.clone(),
        )
        .map(|_| ())
    }
}

/// Everything the pair loop produces in one pass over the i<j pairs.
///
/// `drift_lj` is the gradient part only: row i = (1/N) sum_{j != i} F(x_i - x_j);
/// `grad_sq` is |grad Phi|^2 = sum_i |row_i|^2, `lap_phi` the full-space
/// Laplacian (2/N) sum_{i<j} lap V(r_ij).
#[derive(Debug, Clone)]
pub struct FieldEval {
    pub drift_lj: Vec<f64>,
    pub phi: f64,
    pub min_dist: f64,
    pub grad_sq: f64,
    pub lap_phi: f64,
}

/// Scalar outputs of one fused pair pass (the drift rows land in a caller
/// buffer).
#[derive(Debug, Clone, Copy)]
pub struct FieldScalars {
    pub phi: f64,
    pub min_dist: f64,
    pub grad_sq: f64,
    pub lap_phi: f64,
}

/// Allocation-free fused pass over the i<j pairs: writes the drift rows into
/// `drift` and returns the scalar fields. The integrator's hot loop calls
/// this once per step.
pub fn eval_fields_into(
    positions: &[f64],
    n: usize,
    d: usize,
    p: &LJParams,
    splice: Option<&RegularizedLJ>,
    dim_for_laplacian: usize,
    drift: &mut [f64],
) -> Result<FieldScalars> {
    debug_assert_eq!(positions.len(), n * d);
    debug_assert_eq!(drift.len(), n * d);
    let inv_n = 1.0 / n as f64;
    drift.fill(0.0);
    let mut phi = 0.0;
    let mut lap_sum = 0.0;
    let mut min_dist = f64::INFINITY;
    let floor = p.force_floor();

    for i in 0..n {
        for j in (i + 1)..n {
            let (base_i, base_j) = (i * d, j * d);
            let mut r2 = 0.0;
            for k in 0..d {
                let dk = positions[base_i + k] - positions[base_j + k];
                r2 += dk * dk;
            }
            let r = r2.sqrt();
            min_dist = min_dist.min(r);

            let (v, f_over_r, lap) = match splice {
                Some(reg) => {
                    if r == 0.0 {
                        // coincident under the splice: finite value, zero
                        // force (no radial direction); the Laplacian has no
                        // limit here, so it is reported as NaN
                        (reg.value(0.0), 0.0, f64::NAN)
                    } else {
                        let (v, f, lap) = reg.pair_quantities(r, dim_for_laplacian);
                        (v, f / r, lap)
                    }
                }
                None => {
                    if r < floor {
                        return Err(Error::Coincident {
                            i,
                            j,
                            dist: r,
                            floor,
                        });
                    }
                    let (ra, rb) = p.powers(r);
                    let v = p.a() * ra - p.b() * rb;
                    let s = (p.alpha() * p.a() * ra - p.beta() * p.b() * rb) / r;
                    let dd = dim_for_laplacian as f64;
                    let lap = (p.alpha() * p.a() * (p.alpha() - dd + 2.0) * ra
                        - p.beta() * p.b() * (p.beta() - dd + 2.0) * rb)
                        / r2;
                    (v, s / r, lap)
                }
            };

            phi += v;
            lap_sum += lap;
            // symmetric accumulation: F_ij once, applied +/-
            for k in 0..d {
                let fk = f_over_r * (positions[base_i + k] - positions[base_j + k]) * inv_n;
                drift[base_i + k] += fk;
                drift[base_j + k] -= fk;
            }
        }
    }

    let grad_sq = drift.iter().map(|v| v * v).sum();
    Ok(FieldScalars {
        phi: phi * inv_n,
        min_dist,
        grad_sq,
        lap_phi: 2.0 * inv_n * lap_sum,
    })
}

/// One fused O(N^2) pass: drift rows, global potential, min pair distance,
/// |grad Phi|^2 and the Laplacian. With `splice` the spliced quantities are
/// used (total in the pair distance); without it coincident pairs error.
pub fn eval_fields(
    c: &Configuration,
    p: &LJParams,
    splice: Option<&RegularizedLJ>,
    dim_for_laplacian: usize,
) -> Result<FieldEval> {
    let (n, d) = (c.n(), c.d());
    let mut drift = vec![0.0; n * d];
    let scalars = eval_fields_into(
        c.positions(),
        n,
        d,
        p,
        splice,
        dim_for_laplacian,
        &mut drift,
    )?;
    Ok(FieldEval {
        drift_lj: drift,
        phi: scalars.phi,
        min_dist: scalars.min_dist,
        grad_sq: scalars.grad_sq,
        lap_phi: scalars.lap_phi,
    })
}

/// Global interaction potential `Phi(x) = (1/N) sum_{i<j} V(x_i - x_j)`.
///
/// Bounded below by `-(N-1) delta'/2`.
pub fn global_potential(c: &Configuration, p: &LJParams) -> Result<f64> {
    let mut phi = 0.0;
    for i in 0..c.n() {
        for j in (i + 1)..c.n() {
            let r = pair_distance(c, i, j);
            if r == 0.0 {
                return Err(Error::Coincident {
                    i,
                    j,
                    dist: r,
                    floor: 0.0,
                });
            }
            phi += lj_value(p, r)?;
        }
    }
    Ok(phi / c.n() as f64)
}

/// Drift of the interacting system: row i = (1/N) sum_{j != i} F(x_i - x_j),
/// plus the extra drift when configured. `eps` selects the spliced force.
pub fn system_drift(c: &Configuration, s: &SystemSpec, eps: Option<f64>) -> Result<Vec<f64>> {
    let splice = match eps {
        Some(e) => Some(RegularizedLJ::new(s.potential, e)?),
        None => None,
    };
    let fields = eval_fields(c, &s.potential, splice.as_ref(), c.d())?;
    let mut drift = fields.drift_lj;
    if let ExtraDrift::Vortex { gammas } = &s.extra_drift {
        let vort = vortex_drift(c, gammas)?;
        for (a, b) in drift.iter_mut().zip(vort) {
            *a += b;
        }
    }
    Ok(drift)
}

/// `m(x) = min_{i<j} |x_i - x_j|`. The distance of the stacked configuration
/// to the coincidence set is `m(x)/sqrt(2)`; every threshold in this crate is
/// expressed in `m(x)` units.
pub fn min_pair_distance(c: &Configuration) -> Result<f64> {
    if c.n() < 2 {
        return Err(Error::Domain("min_pair_distance needs n >= 2".into()));
    }
    let mut m = f64::INFINITY;
    for i in 0..c.n() {
        for j in (i + 1)..c.n() {
            m = m.min(pair_distance(c, i, j));
        }
    }
    Ok(m)
}

/// Sum of absolute pair energies `sum_{i<j} |V(x_i - x_j)|` (the finiteness
/// certificate for admissible initial laws).
pub fn mean_interaction_energy(c: &Configuration, p: &LJParams) -> Result<f64> {
    let mut e = 0.0;
    for i in 0..c.n() {
        for j in (i + 1)..c.n() {
            let r = pair_distance(c, i, j);
            if r == 0.0 {
                return Err(Error::Coincident {
                    i,
                    j,
                    dist: r,
                    floor: 0.0,
                });
            }
            e += lj_value(p, r)?.abs();
        }
    }
    Ok(e)
}

/// Point-vortex drift: row i = sum_{j != i} gamma_i gamma_j K(x_i - x_j) with
/// `K(x) = (1/2pi) (-x_1, x_0)/|x|^2`. Each summand is orthogonal to the
/// separation vector exactly.
pub fn vortex_drift(c: &Configuration, gammas: &[f64]) -> Result<Vec<f64>> {
    if c.d() != 2 {
        return Err(Error::Domain(format!(
            "vortex drift requires d = 2, got d={}",
            c.d()
        )));
    }
    if gammas.len() != c.n() {
        return Err(Error::InvalidParams(format!(
            "need one intensity per particle: {} != {}",
            gammas.len(),
            c.n()
        )));
    }
    let n = c.n();
    let mut out = vec![0.0; n * 2];
    let two_pi = 2.0 * std::f64::consts::PI;
    for i in 0..n {
        for j in (i + 1)..n {
            let (xi, xj) = (c.row(i), c.row(j));
            let dx = [xi[0] - xj[0], xi[1] - xj[1]];
            let r2 = dx[0] * dx[0] + dx[1] * dx[1];
            if r2 == 0.0 {
                return Err(Error::Coincident {
                    i,
                    j,
                    dist: 0.0,
                    floor: 0.0,
                });
            }
            let g = gammas[i] * gammas[j];
            let k = [-dx[1] / (two_pi * r2), dx[0] / (two_pi * r2)];
            // K is antisymmetric under x -> -x, so the j row gets -K
            out[i * 2] += g * k[0];
            out[i * 2 + 1] += g * k[1];
            out[j * 2] -= g * k[0];
            out[j * 2 + 1] -= g * k[1];
        }
    }
    Ok(out)
}

fn pair_distance(c: &Configuration, i: usize, j: usize) -> f64 {
    let (xi, xj) = (c.row(i), c.row(j));
    let mut r2 = 0.0;
    for k in 0..c.d() {
        let dk = xi[k] - xj[k];
        r2 += dk * dk;
    }
    r2.sqrt()
}

/// Euclidean norm helper re-exported for callers working with separations.
pub fn separation_norm(x: &[f64]) -> f64 {
    norm(x)
}
