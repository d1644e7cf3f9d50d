//! Brute-force numeric oracles for the pairwise-force inequalities: the
//! triple scalar-product bound with its explicit constant M(i,j,k), the
//! sum-of-squares lower bound built from it, and the drift-dominance
//! expression whose positivity near the singularity drives well-posedness.

use crate::error::{Error, Result};
use crate::potential::{attractive_bound, lj_force_scalar, lj_laplacian, LJParams};
use crate::system::{eval_fields, Configuration, SystemSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Force-bound constants entering M(i,j,k): the attractive cap H and the
/// repulsive force magnitude at half the equilibrium radius.
///
/// Overridable so the failure-reporting path can be exercised with an
/// injected (bad) H.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub h: f64,
    pub f_half_r0: f64,
}

impl BoundConstants {
    pub fn from_params(p: &LJParams) -> Result<Self> {
        let h = attractive_bound(p).h;
        let f_half_r0 = match p.r_bar() {
            Some(r0) => lj_force_scalar(p, r0 / 2.0)?.abs(),
            None => 0.0,
        };
        Ok(Self { h, f_half_r0 })
    }

    /// Replace both force bounds by an injected value (diagnostic override;
    /// a small value forces verification failures).
    pub fn overridden(h: f64) -> Self {
        Self { h, f_half_r0: h }
    }

    /// `max{2H, F(r0/2) + H}` — the multiplier of the largest force in M.
    pub fn multiplier(&self) -> f64 {
        (2.0 * self.h).max(self.f_half_r0 + self.h)
    }

    /// `M = H^2 + max{2H, F(r0/2)+H} * max_force`.
    pub fn m_bound(&self, max_force: f64) -> f64 {
        self.h * self.h + self.multiplier() * max_force
    }
}

/// Attract/repel pattern of the three bonds, by force sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    AllAttractive,
    AllRepulsive,
    MixedOneRepulsive,
    MixedTwoRepulsive,
}

impl CaseTag {
    pub fn label(self) -> &'static str {
        match self {
            CaseTag::AllAttractive => "all_attr",
            CaseTag::AllRepulsive => "all_rep",
            CaseTag::MixedOneRepulsive => "mixed_1rep",
            CaseTag::MixedTwoRepulsive => "mixed_2rep",
        }
    }

    pub const ALL: [CaseTag; 4] = [
        CaseTag::AllAttractive,
        CaseTag::AllRepulsive,
        CaseTag::MixedOneRepulsive,
        CaseTag::MixedTwoRepulsive,
    ];
}

/// Outcome of the triple scalar-product check.
#[derive(Debug, Clone, Copy)]
pub struct TripleReport {
    /// `F_ij . (F_ik - F_jk)`.
    pub lhs: f64,
    /// `M(i,j,k)`.
    pub m_bound: f64,
    /// `lhs >= -M` (the bound's conclusion).
    pub holds: bool,
    pub case_tag: CaseTag,
}

fn force_vec(p: &LJParams, xi: &[f64], xj: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let d = xi.len();
    let mut dx = vec![0.0; d];
    let mut r2 = 0.0;
    for k in 0..d {
        dx[k] = xi[k] - xj[k];
        r2 += dx[k] * dx[k];
    }
    let r = r2.sqrt();
    let s = lj_force_scalar(p, r)?;
    for c in dx.iter_mut() {
        *c *= s / r;
    }
    Ok((dx, s, r))
}

/// Check `F_ij . (F_ik - F_jk) >= -M(i,j,k)` for one triple of positions.
pub fn triple_check(p: &LJParams, xi: &[f64], xj: &[f64], xk: &[f64]) -> Result<TripleReport> {
    triple_check_with(p, &BoundConstants::from_params(p)?, xi, xj, xk)
}

/// As [`triple_check`] but with caller-supplied bound constants.
pub fn triple_check_with(
    p: &LJParams,
    consts: &BoundConstants,
    xi: &[f64],
    xj: &[f64],
    xk: &[f64],
) -> Result<TripleReport> {
    let (f_ij, s_ij, _) = force_vec(p, xi, xj)?;
    let (f_ik, s_ik, _) = force_vec(p, xi, xk)?;
    let (f_jk, s_jk, _) = force_vec(p, xj, xk)?;

    let lhs: f64 = f_ij
        .iter()
        .zip(f_ik.iter().zip(&f_jk))
        .map(|(a, (b, c))| a * (b - c))
        .sum();

    let max_force = norm3(&f_ij).max(norm3(&f_ik)).max(norm3(&f_jk));
    let m_bound = consts.m_bound(max_force);

    let repulsive = [s_ij, s_ik, s_jk].iter().filter(|s| **s > 0.0).count();
    let case_tag = match repulsive {
        0 => CaseTag::AllAttractive,
        1 => CaseTag::MixedOneRepulsive,
        2 => CaseTag::MixedTwoRepulsive,
        _ => CaseTag::AllRepulsive,
    };

    Ok(TripleReport {
        lhs,
        m_bound,
        holds: lhs >= -m_bound,
        case_tag,
    })
}

fn norm3(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Outcome of the sum-of-squares check.
#[derive(Debug, Clone, Copy)]
pub struct SumSquaresReport {
    /// `sum_i |sum_{j != i} F_ij|^2`.
    pub lhs: f64,
    /// `sum_{i<j} |F_ij|^2 - 2 sum_{i<j<k} M(i,j,k)`.
    pub rhs: f64,
    pub holds: bool,
}

/// Check the sum-of-squares lower bound on one configuration.
pub fn sum_squares_check(p: &LJParams, c: &Configuration) -> Result<SumSquaresReport> {
    sum_squares_check_with(p, &BoundConstants::from_params(p)?, c)
}

pub fn sum_squares_check_with(
    p: &LJParams,
    consts: &BoundConstants,
    c: &Configuration,
) -> Result<SumSquaresReport> {
    let n = c.n();
    if n < 2 {
        return Err(Error::Precondition("sum_squares_check needs n >= 2".into()));
    }
    let d = c.d();

    // pairwise force vectors, computed once per unordered pair
    let mut forces = vec![vec![0.0; d]; n * n];
    let mut magnitudes = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (f_ij, _, _) = force_vec(p, c.row(i), c.row(j))?;
            // antisymmetry is exact: the reversed evaluation negates the
            // separation vector and every later operation is sign-symmetric
            let (f_ji, _, _) = force_vec(p, c.row(j), c.row(i))?;
            for k in 0..d {
                assert_eq!(f_ji[k], -f_ij[k], "force antisymmetry broken");
            }
            let m = norm3(&f_ij);
            magnitudes[i * n + j] = m;
            magnitudes[j * n + i] = m;
            forces[j * n + i] = f_ji;
            forces[i * n + j] = f_ij;
        }
    }

    let mut lhs = 0.0;
    for i in 0..n {
        let mut row = vec![0.0; d];
        for j in 0..n {
            if j != i {
                for k in 0..d {
                    row[k] += forces[i * n + j][k];
                }
            }
        }
        lhs += row.iter().map(|v| v * v).sum::<f64>();
    }

    let mut rhs = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            rhs += magnitudes[i * n + j] * magnitudes[i * n + j];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let mx = magnitudes[i * n + j]
                    .max(magnitudes[i * n + k])
                    .max(magnitudes[j * n + k]);
                rhs -= 2.0 * consts.m_bound(mx);
            }
        }
    }

    Ok(SumSquaresReport {
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// Drift-dominance expression for the gradient system (no extra drift):
/// `-|grad Phi|^2 + (sigma^2/2) lap Phi`, with the full-space Laplacian.
///
/// Diverges to -infinity as the minimal pair distance shrinks (the squared
/// force term dominates the Laplacian).
pub fn h3_expression(p: &LJParams, c: &Configuration, sigma: f64) -> Result<f64> {
    let fields = eval_fields(c, p, None, c.d())?;
    Ok(-fields.grad_sq + 0.5 * sigma * sigma * fields.lap_phi)
}

/// Per-stratum statistics of an [`h3_scan`].
#[derive(Debug, Clone)]
pub struct StratumStats {
    /// Target minimal pair distance of the stratum.
    pub m_target: f64,
    pub samples: usize,
    pub mean: f64,
    pub max: f64,
}

/// Scan report: the empirical ceiling of the dominance expression and the
/// radius below which the per-pair term stays positive.
#[derive(Debug, Clone)]
pub struct H3Report {
    pub eta_estimate: f64,
    pub r_star: Option<f64>,
    pub strata: Vec<StratumStats>,
    /// Every sampled shape was more negative at 0.05 r_bar than at 0.2 r_bar.
    pub near_singular_monotone: bool,
}

/// Fractions of r_bar used to stratify configurations by min pair distance.
pub const H3_STRATA: [f64; 13] = [
    0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0, 1.25, 1.6, 2.0, 3.0, 5.0,
];

/// Evaluate [`h3_expression`] over random shapes rescaled to each stratum of
/// minimal pair distance in `[0.05, 5] * r_bar`.
pub fn h3_scan(
    p: &LJParams,
    s: &SystemSpec,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<H3Report> {
    if samples == 0 {
        return Err(Error::Precondition("h3_scan needs samples >= 1".into()));
    }
    let r_bar = p
        .r_bar()
        .ok_or_else(|| Error::Domain("h3_scan needs an attractive branch (beta > 0)".into()))?;
    let (n, d) = (s.n, s.d);
    if n < 2 {
        return Err(Error::Domain("h3_scan needs n >= 2".into()));
    }

    let mut sums = vec![0.0; H3_STRATA.len()];
    let mut maxs = vec![f64::NEG_INFINITY; H3_STRATA.len()];
    let mut monotone = true;

    for _ in 0..samples {
        // a random shape, then rescaled so m(x) hits each stratum exactly
        let base: Vec<f64> = (0..n * d)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                u
            })
            .collect();
        let c0 = Configuration::new(base.clone(), n, d)?;
        let m0 = crate::system::min_pair_distance(&c0)?;
        if m0 < 1e-9 {
            continue;
        }
        let mut per_shape = vec![0.0; H3_STRATA.len()];
        for (si, frac) in H3_STRATA.iter().enumerate() {
            let scale = frac * r_bar / m0;
            let scaled: Vec<f64> = base.iter().map(|v| v * scale).collect();
            let c = Configuration::new(scaled, n, d)?;
            let e = h3_expression(p, &c, s.sigma)?;
            sums[si] += e;
            maxs[si] = maxs[si].max(e);
            per_shape[si] = e;
        }
        // H3_STRATA[0] = 0.05 r_bar, [2] = 0.2 r_bar
        if per_shape[0] >= per_shape[2] {
            monotone = false;
        }
    }

    let eta_estimate = maxs.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    let strata = H3_STRATA
        .iter()
        .zip(sums.iter().zip(&maxs))
        .map(|(frac, (sum, max))| StratumStats {
            m_target: frac * r_bar,
            samples,
            mean: sum / samples as f64,
            max: *max,
        })
        .collect();

    let r_star = find_r_star(p, s.sigma, n, d, default_c_n(p, n)?);

    Ok(H3Report {
        eta_estimate,
        r_star,
        strata,
        near_singular_monotone: monotone,
    })
}

/// A concrete per-pair constant for [`find_r_star`], derived by spreading the
/// triple-sum budget `2 sum M(i,j,k) <= sum_pairs C_N (1 + |F|)` over pairs:
/// each pair sits in N-2 triples, M is affine in the largest force, so
/// `C_N = (2(N-2)/N^2) * max{H^2/3, max{2H, F(r0/2)+H}}` suffices (0 for N=2).
pub fn default_c_n(p: &LJParams, n: usize) -> Result<f64> {
    if n < 3 {
        return Ok(0.0);
    }
    let consts = BoundConstants::from_params(p)?;
    let nf = n as f64;
    Ok(2.0 * (nf - 2.0) / (nf * nf) * (consts.h * consts.h / 3.0).max(consts.multiplier()))
}

/// Lower end of the certified range: below this fraction of r_bar the
/// separate singularity-dominance property covers the behaviour.
pub const R_STAR_FLOOR_FRAC: f64 = 0.2;

/// Largest radius r* such that
/// `eta(r) = F(r)^2/N^2 - C_N (1 + |F(r)|) - (sigma^2/N) lap V(r)` stays
/// positive for all pair distances in `[0.2 r_bar, r*]`, certified on a dense
/// log grid and refined by bisection. `None` when even the floor fails.
pub fn find_r_star(p: &LJParams, sigma: f64, n: usize, d: usize, c_n: f64) -> Option<f64> {
    let r_bar = p.r_bar()?;
    if c_n < 0.0 {
        return None;
    }
    let nf = n as f64;
    let eta = |r: f64| -> f64 {
        let f = lj_force_scalar(p, r).unwrap_or(f64::INFINITY);
        let lap = lj_laplacian(p, r, d).unwrap_or(0.0);
        f * f / (nf * nf) - c_n * (1.0 + f.abs()) - sigma * sigma / nf * lap
    };

    let lo = R_STAR_FLOOR_FRAC * r_bar;
    if eta(lo) <= 0.0 {
        return None;
    }
    const GRID: usize = 512;
    let ratio = (r_bar / lo).powf(1.0 / GRID as f64);
    let mut prev = lo;
    let mut bracket = None;
    let mut r = lo;
    for _ in 0..GRID {
        r *= ratio;
        if eta(r) <= 0.0 {
            bracket = Some((prev, r));
            break;
        }
        prev = r;
    }
    let (mut a, mut b) = match bracket {
        Some(ab) => ab,
        // positive on the whole certified range
        None => return Some(r_bar),
    };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if eta(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) <= 1e-14 * r_bar {
            break;
        }
    }
    Some(a)
}

// ---------------------------------------------------------------------------
// Random sweeps (the operational oracles behind `verify-lemmas`)
// ---------------------------------------------------------------------------

fn unit_dir(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng))
            .collect();
        let n = norm3(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// A random triple in d = 3 with all three pair distances in
/// `[lo_frac, hi_frac] * r0`.
pub fn sample_triple(
    p: &LJParams,
    rng: &mut ChaCha8Rng,
    lo_frac: f64,
    hi_frac: f64,
) -> [Vec<f64>; 3] {
    let r0 = p.r_bar().expect("triple sampler needs r_bar");
    let (lo, hi) = (lo_frac * r0, hi_frac * r0);
    let xi = vec![0.0; 3];
    let rj = rng.gen_range(lo..hi);
    let xj: Vec<f64> = unit_dir(rng, 3).into_iter().map(|c| c * rj).collect();
    loop {
        let rk = rng.gen_range(lo..hi);
        let xk: Vec<f64> = unit_dir(rng, 3).into_iter().map(|c| c * rk).collect();
        let djk = xk
            .iter()
            .zip(&xj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if (lo..=hi).contains(&djk) {
            return [xi, xj, xk];
        }
    }
}

/// A random N-particle configuration (d = 3) with every pair distance in
/// `[lo_frac, hi_frac] * r0`.
pub fn sample_config_in_range(
    p: &LJParams,
    n: usize,
    rng: &mut ChaCha8Rng,
    lo_frac: f64,
    hi_frac: f64,
) -> Configuration {
    let r0 = p.r_bar().expect("config sampler needs r_bar");
    let (lo, hi) = (lo_frac * r0, hi_frac * r0);
    let radius = 1.45 * r0 * (n as f64).cbrt();
    'outer: loop {
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            // uniform in the ball: radius ~ R * U^(1/3)
            let u: f64 = rng.gen::<f64>();
            let r = radius * u.cbrt();
            let dir = unit_dir(rng, 3);
            pts.push(vec![dir[0] * r, dir[1] * r, dir[2] * r]);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = pts[i]
                    .iter()
                    .zip(&pts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dij < lo || dij > hi {
                    continue 'outer;
                }
            }
        }
        return Configuration::from_rows(&pts).expect("sampled rows are finite");
    }
}

/// Per-case tallies of a triple sweep; `slack = lhs + M >= 0` required.
#[derive(Debug, Clone)]
pub struct CaseTally {
    pub tag: CaseTag,
    pub samples: usize,
    pub violations: usize,
    /// Worst (most negative) slack seen in this case.
    pub worst_slack: f64,
}

#[derive(Debug, Clone)]
pub struct TripleSweepReport {
    pub samples: usize,
    pub violations: usize,
    pub per_case: Vec<CaseTally>,
    /// A violating triple's positions, if any were found.
    pub first_violation: Option<[Vec<f64>; 3]>,
}

/// Sweep [`triple_check`] over random triples with a fixed seed.
pub fn triple_bound_sweep(
    p: &LJParams,
    consts: &BoundConstants,
    samples: usize,
    seed: u64,
    lo_frac: f64,
    hi_frac: f64,
) -> Result<TripleSweepReport> {
    let mut rng = crate::rng::seeded_rng(seed);
    let mut violations = 0;
    let mut counts = [0usize; 4];
    let mut case_violations = [0usize; 4];
    let mut worst = [f64::INFINITY; 4];
    let mut first_violation = None;
    for _ in 0..samples {
        let [xi, xj, xk] = sample_triple(p, &mut rng, lo_frac, hi_frac);
        let rep = triple_check_with(p, consts, &xi, &xj, &xk)?;
        let idx = CaseTag::ALL
            .iter()
            .position(|t| *t == rep.case_tag)
            .expect("tag in table");
        counts[idx] += 1;
        let slack = rep.lhs + rep.m_bound;
        worst[idx] = worst[idx].min(slack);
        if !rep.holds {
            violations += 1;
            case_violations[idx] += 1;
            if first_violation.is_none() {
                first_violation = Some([xi, xj, xk]);
            }
        }
    }
    let per_case = CaseTag::ALL
        .iter()
        .enumerate()
        .map(|(i, t)| CaseTally {
            tag: *t,
            samples: counts[i],
            violations: case_violations[i],
            worst_slack: worst[i],
        })
        .collect();
    Ok(TripleSweepReport {
        samples,
        violations,
        per_case,
        first_violation,
    })
}

/// Worst slack of a sum-of-squares sweep; `slack = lhs - rhs >= 0` required.
#[derive(Debug, Clone)]
pub struct SumSweepReport {
    pub n: usize,
    pub samples: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

/// Sweep [`sum_squares_check`] over random configurations with a fixed seed.
pub fn sum_squares_bound_sweep(
    p: &LJParams,
    consts: &BoundConstants,
    n: usize,
    samples: usize,
    seed: u64,
    lo_frac: f64,
    hi_frac: f64,
) -> Result<SumSweepReport> {
    let mut rng = crate::rng::seeded_rng(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let c = sample_config_in_range(p, n, &mut rng, lo_frac, hi_frac);
        let rep = sum_squares_check_with(p, consts, &c)?;
        worst = worst.min(rep.lhs - rep.rhs);
        if !rep.holds {
            violations += 1;
        }
    }
    Ok(SumSweepReport {
        n,
        samples,
        violations,
        worst_slack: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::ExtraDrift;

    const R_BAR: f64 = 1.122_462_048_309_373;

    fn classical() -> LJParams {
        LJParams::classical()
    }

    fn equilateral(side: f64) -> [Vec<f64>; 3] {
        [
            vec![0.0, 0.0, 0.0],
            vec![side, 0.0, 0.0],
            vec![side / 2.0, side * 3.0_f64.sqrt() / 2.0, 0.0],
        ]
    }

    #[test]
    fn triple_equilateral_at_equilibrium() {
        let p = classical();
        let [xi, xj, xk] = equilateral(R_BAR);
        let rep = triple_check(&p, &xi, &xj, &xk).unwrap();
        let h = attractive_bound(&p).h;
        assert!(rep.lhs.abs() < 1e-18);
        assert!((rep.m_bound - h * h).abs() < 1e-9);
        assert!(rep.holds);
    }

    #[test]
    fn triple_collinear_attractive() {
        // all three bonds attractive; the bound holds with large slack, but
        // the scalar product itself is slightly negative for this geometry
        let p = classical();
        let xi = vec![0.0, 0.0, 0.0];
        let xj = vec![2.0 * R_BAR, 0.0, 0.0];
        let xk = vec![4.0 * R_BAR, 0.0, 0.0];
        let rep = triple_check(&p, &xi, &xj, &xk).unwrap();
        assert_eq!(rep.case_tag, CaseTag::AllAttractive);
        assert!(rep.holds);
        assert!(rep.lhs >= -rep.m_bound);
        assert!(rep.lhs < 0.0, "frozen finding: lhs = {} < 0", rep.lhs);
        assert!((rep.lhs - (-4.19e-4)).abs() < 1e-5);
    }

    #[test]
    fn triple_bound_violated_by_deep_collinear_repulsion() {
        // Frozen counterexample: collinear i-j-k at spacings 0.45 r0 puts two
        // bonds above the F(r0/2) force cap in M, and the check must report
        // the violation. Verified against an independent evaluation:
        // lhs ~ -7.30e9, M ~ 1.84e9.
        let p = classical();
        let xi = vec![0.0, 0.0, 0.0];
        let xj = vec![0.45 * R_BAR, 0.0, 0.0];
        let xk = vec![0.9 * R_BAR, 0.0, 0.0];
        let rep = triple_check(&p, &xi, &xj, &xk).unwrap();
        assert_eq!(rep.case_tag, CaseTag::AllRepulsive);
        assert!(!rep.holds);
        assert!((rep.lhs / -7.2964e9 - 1.0).abs() < 1e-3);
        assert!((rep.m_bound / 1.8411e9 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn triple_sweep_detects_the_violating_region() {
        // at the stated floor 0.4 r0 the sweep finds violations; raising the
        // floor above r0/2 clears them
        let p = classical();
        let consts = BoundConstants::from_params(&p).unwrap();
        let rep = triple_bound_sweep(&p, &consts, 20_000, 91, 0.4, 4.0).unwrap();
        assert!(
            rep.violations > 0,
            "expected the deep-overlap violations to appear"
        );
        assert!(rep.first_violation.is_some());
        let rep_safe = triple_bound_sweep(&p, &consts, 20_000, 91, 0.55, 4.0).unwrap();
        assert_eq!(rep_safe.violations, 0, "floor 0.55 r0 must be clean");
    }

    #[test]
    fn sum_squares_base_cases() {
        let p = classical();
        // N = 2: lhs = 2 F^2, rhs = F^2
        let c = Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![0.9, 0.0, 0.0]]).unwrap();
        let rep = sum_squares_check(&p, &c).unwrap();
        let f = lj_force_scalar(&p, 0.9).unwrap();
        assert!((rep.lhs - 2.0 * f * f).abs() < 1e-9 * f * f);
        assert!((rep.rhs - f * f).abs() < 1e-9 * f * f);
        assert!(rep.holds);

        // N = 3 equilateral at r_bar: lhs = 0, rhs = -2 H^2
        let c = Configuration::from_rows(&equilateral(R_BAR)).unwrap();
        let rep = sum_squares_check(&p, &c).unwrap();
        let h = attractive_bound(&p).h;
        assert!(rep.lhs.abs() < 1e-18);
        assert!((rep.rhs + 2.0 * h * h).abs() < 1e-9);
        assert!(rep.holds);
    }

    #[test]
    fn sum_squares_sweep_small() {
        let p = classical();
        let consts = BoundConstants::from_params(&p).unwrap();
        for n in 2..=5 {
            let rep = sum_squares_bound_sweep(&p, &consts, n, 2_000, 37 + n as u64, 0.4, 4.0).unwrap();
            assert_eq!(rep.violations, 0, "n={n}");
            assert!(rep.worst_slack >= 0.0);
        }
    }

    #[test]
    fn h3_expression_examples() {
        let p = classical();
        let c = Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![R_BAR, 0.0, 0.0]]).unwrap();
        // gradient vanishes at equilibrium: expression = (sigma^2/2) * lap Phi
        let e = h3_expression(&p, &c, 1.0).unwrap();
        let lap = lj_laplacian(&p, R_BAR, 3).unwrap();
        assert!((e - 0.5 * (2.0 / 2.0) * lap).abs() < 1e-9);
        assert!(e > 0.0);

        // near-singular pair: the squared force dominates
        let c = Configuration::from_rows(&[vec![0.0, 0.0, 0.0], vec![0.3, 0.0, 0.0]]).unwrap();
        let e = h3_expression(&p, &c, 1.0).unwrap();
        assert!(e < -1e14, "e = {e}");

        // sigma = 0: non-positive by construction
        let mut rng = crate::rng::seeded_rng(5);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect())
                .collect();
            let c = Configuration::from_rows(&rows).unwrap();
            if crate::system::min_pair_distance(&c).unwrap() < 0.3 {
                continue;
            }
            assert!(h3_expression(&p, &c, 0.0).unwrap() <= 0.0);
        }
    }

    #[test]
    fn h3_scan_reports() {
        let p = classical();
        let s = SystemSpec::new(2, 3, 1.0, p, ExtraDrift::None).unwrap();
        let mut rng = crate::rng::seeded_rng(41);
        let rep = h3_scan(&p, &s, 64, &mut rng).unwrap();
        assert!(rep.eta_estimate.is_finite());
        assert!(rep.eta_estimate > 0.0); // attained at moderate separation
        assert!(rep.near_singular_monotone);
        // stratified means decrease toward the singularity
        assert!(rep.strata[0].mean < rep.strata[2].mean);

        let s0 = SystemSpec::new(2, 3, 0.0, p, ExtraDrift::None).unwrap();
        let mut rng = crate::rng::seeded_rng(42);
        let rep0 = h3_scan(&p, &s0, 64, &mut rng).unwrap();
        assert!(rep0.eta_estimate <= 0.0);
    }

    #[test]
    fn find_r_star_examples() {
        let p = classical();
        // sigma = 0, C_N = 0: eta = F^2/N^2 > 0 up to the equilibrium radius
        let r = find_r_star(&p, 0.0, 2, 3, 0.0).unwrap();
        assert!((r - R_BAR).abs() < 1e-6);

        // sigma = 1: the Laplacian term bites before r_bar
        let r = find_r_star(&p, 1.0, 2, 3, 0.0).unwrap();
        assert!(r < R_BAR && r > 0.5 * R_BAR, "r = {r}");

        // huge C_N: nothing positive in the certified range
        assert!(find_r_star(&p, 1.0, 2, 3, 1e10).is_none());
    }

    #[test]
    fn singularity_dominance() {
        let p = classical();
        for n in [2usize, 5, 10] {
            for sigma in [0.5, 1.0, 2.0] {
                for frac in [1e-2, 1e-3] {
                    let r = frac * R_BAR;
                    let f = lj_force_scalar(&p, r).unwrap();
                    let lap = lj_laplacian(&p, r, 3).unwrap();
                    let nf = n as f64;
                    assert!(f * f / (nf * nf) > sigma * sigma / nf * lap.abs());
                }
            }
        }
    }
}
