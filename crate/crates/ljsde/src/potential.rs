//! Closed-form Lennard-Jones quantities (value, force, Laplacian, minimum),
//! the quadratic Taylor splice that removes the origin singularity, and the
//! scalar bounds (H, delta') used by the inequality oracles.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Pair potential `V(r) = A/r^alpha - B/r^beta`, `alpha > beta >= 0`.
///
/// `A` is the repulsion amplitude, `B` the attraction amplitude. Integer
/// exponents get a `powi` fast path; construction rejects anything outside
/// `A > 0`, `B >= 0`, `alpha > beta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LJParams {
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    #[serde(skip)]
    alpha_int: Option<i32>,
    #[serde(skip)]
    beta_int: Option<i32>,
}

fn int_exponent(e: f64) -> Option<i32> {
    (e.fract() == 0.0 && e.abs() <= 60.0).then_some(e as i32)
}

/// `r^-e` with a `powi` fast path for integer exponents.
#[inline(always)]
fn inv_pow(r: f64, e: f64, e_int: Option<i32>) -> f64 {
    match e_int {
        Some(k) => r.powi(-k),
        None => r.powf(-e),
    }
}

impl LJParams {
    pub fn new(a: f64, b: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("A must be > 0, got {a}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParams(format!("B must be >= 0, got {b}")));
        }
        if !(beta >= 0.0 && alpha > beta && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "exponents must satisfy alpha > beta >= 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            a,
            b,
            alpha,
            beta,
            alpha_int: int_exponent(alpha),
            beta_int: int_exponent(beta),
        })
    }

    /// The classical 12-6 pair with unit amplitudes.
    pub fn classical() -> Self {
        Self::new(1.0, 1.0, 12.0, 6.0).expect("12-6 parameters are valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when the attractive branch exists (`B > 0` and `beta > 0`).
    pub fn has_attraction(&self) -> bool {
        self.b > 0.0 && self.beta > 0.0
    }

    /// `(r^-alpha, r^-beta)` — the two powers everything else is built from.
    #[inline(always)]
    pub(crate) fn powers(&self, r: f64) -> (f64, f64) {
        (
            inv_pow(r, self.alpha, self.alpha_int),
            inv_pow(r, self.beta, self.beta_int),
        )
    }

    /// Characteristic length used for evaluation floors: the equilibrium
    /// radius when the minimum exists, `A^(1/alpha)` otherwise.
    pub fn length_scale(&self) -> f64 {
        match self.r_bar() {
            Some(r) => r,
            None => self.a.powf(1.0 / self.alpha),
        }
    }

    /// Hard floor below which unregularized force evaluation is refused.
    pub fn force_floor(&self) -> f64 {
        1e-12 * self.length_scale()
    }

    /// Equilibrium radius `(A alpha / (B beta))^(1/(alpha-beta))`, absent for
    /// pure repulsion.
    pub fn r_bar(&self) -> Option<f64> {
        self.has_attraction()
            .then(|| ((self.a * self.alpha) / (self.b * self.beta)).powf(1.0 / (self.alpha - self.beta)))
    }
}

/// Location and depth of the potential minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LJMinimum {
    /// Equilibrium distance; `None` when the potential has no attractive
    /// branch (then it is decreasing and bounded below by `-B`).
    pub r_bar: Option<f64>,
    /// Value at the minimum (negative when the minimum exists, else 0).
    pub v_min: f64,
    /// `-v_min`; the per-pair depth constant.
    pub delta_prime: f64,
}

/// `V(r)`.
pub fn lj_value(p: &LJParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("lj_value requires r > 0, got {r}")));
    }
    let (ra, rb) = p.powers(r);
    Ok(p.a * ra - p.b * rb)
}

/// Signed radial force `-V'(r) = alpha A / r^(alpha+1) - beta B / r^(beta+1)`.
///
/// Positive is repulsive (pushes the pair apart), negative attractive.
pub fn lj_force_scalar(p: &LJParams, r: f64) -> Result<f64> {
    let floor = p.force_floor();
    if !(r > 0.0) || r < floor {
        return Err(Error::Domain(format!(
            "lj_force requires r >= {floor:e}, got {r:e}"
        )));
    }
    let (ra, rb) = p.powers(r);
    Ok((p.alpha * p.a * ra - p.beta * p.b * rb) / r)
}

/// Force vector `-grad V` at separation `x` (any dimension).
pub fn lj_force(p: &LJParams, x: &[f64]) -> Result<Vec<f64>> {
    let r = norm(x);
    let s = lj_force_scalar(p, r)?;
    Ok(x.iter().map(|&c| s * c / r).collect())
}

/// Radial Laplacian of `V(|x|)` in dimension `d`:
/// `alpha A (alpha - d + 2)/r^(alpha+2) - beta B (beta - d + 2)/r^(beta+2)`.
pub fn lj_laplacian(p: &LJParams, r: f64, d: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "lj_laplacian requires r > 0, got {r}"
        )));
    }
    if d == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let dd = d as f64;
    let (ra, rb) = p.powers(r);
    Ok(p.alpha * p.a * (p.alpha - dd + 2.0) * ra / (r * r)
        - p.beta * p.b * (p.beta - dd + 2.0) * rb / (r * r))
}

/// Closed-form minimum of `V`.
///
/// `r_bar = (A alpha/(B beta))^(1/(alpha-beta))`,
/// `v_min = (B/alpha) (beta B/(alpha A))^(beta/(alpha-beta)) (beta - alpha)`.
pub fn lj_minimum(p: &LJParams) -> LJMinimum {
    match p.r_bar() {
        Some(r_bar) => {
            let v_min = (p.b / p.alpha)
                * ((p.beta * p.b) / (p.alpha * p.a)).powf(p.beta / (p.alpha - p.beta))
                * (p.beta - p.alpha);
            LJMinimum {
                r_bar: Some(r_bar),
                v_min,
                delta_prime: -v_min,
            }
        }
        None => LJMinimum {
            r_bar: None,
            v_min: 0.0,
            delta_prime: 0.0,
        },
    }
}

/// Cap on the attractive force magnitude: `|F(r)| <= H` for all `r >= r_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractiveBound {
    /// Maximal attractive force magnitude (0 for pure repulsion).
    pub h: f64,
    /// Radius attaining the maximum, absent without an attractive branch.
    pub r_at_max: Option<f64>,
}

/// `H = max_{r > r_bar} |F(r)|` from the closed-form stationary radius of `F`,
/// `r_max = (alpha A (alpha+1) / (beta B (beta+1)))^(1/(alpha-beta))`.
///
/// No numeric optimization: this quantity feeds inequality oracles and must
/// not carry a tolerance knob.
pub fn attractive_bound(p: &LJParams) -> AttractiveBound {
    if !p.has_attraction() {
        return AttractiveBound {
            h: 0.0,
            r_at_max: None,
        };
    }
    let r_max = ((p.alpha * p.a * (p.alpha + 1.0)) / (p.beta * p.b * (p.beta + 1.0)))
        .powf(1.0 / (p.alpha - p.beta));
    let h = lj_force_scalar(p, r_max)
        .expect("r_max is strictly positive")
        .abs();
    AttractiveBound {
        h,
        r_at_max: Some(r_max),
    }
}

/// `V` spliced with its second-order Taylor polynomial on `[0, epsilon]`.
///
/// The spliced potential is quadratic in `r` below the splice radius, matches
/// `V` (value and first derivative) at `r = epsilon`, and is identical to `V`
/// beyond it. The spliced force is globally Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedLJ {
    pub params: LJParams,
    pub epsilon: f64,
    // Taylor coefficients at the splice radius.
    #[serde(skip)]
    v_eps: f64,
    #[serde(skip)]
    vp_eps: f64,
    #[serde(skip)]
    vpp_eps: f64,
}

impl RegularizedLJ {
    pub fn new(params: LJParams, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "splice radius must be > 0, got {epsilon}"
            )));
        }
        let (ra, rb) = params.powers(epsilon);
        let v_eps = params.a * ra - params.b * rb;
        let vp_eps = -(params.alpha * params.a * ra - params.beta * params.b * rb) / epsilon;
        let vpp_eps = params.alpha * (params.alpha + 1.0) * params.a * ra / (epsilon * epsilon)
            - params.beta * (params.beta + 1.0) * params.b * rb / (epsilon * epsilon);
        Ok(Self {
            params,
            epsilon,
            v_eps,
            vp_eps,
            vpp_eps,
        })
    }

    /// Rebuild the skipped Taylor coefficients after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        Self::new(self.params, self.epsilon)
    }

    /// Spliced potential, total on `r >= 0`.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.epsilon {
            let (ra, rb) = self.params.powers(r);
            self.params.a * ra - self.params.b * rb
        } else {
            let dr = r - self.epsilon;
            self.v_eps + self.vp_eps * dr + 0.5 * self.vpp_eps * dr * dr
        }
    }

    /// Signed radial spliced force `-V_eps'(r)`; linear in `r` below the
    /// splice, bounded at the origin.
    #[inline(always)]
    pub fn force_scalar(&self, r: f64) -> f64 {
        if r >= self.epsilon {
            let (ra, rb) = self.params.powers(r);
            (self.params.alpha * self.params.a * ra - self.params.beta * self.params.b * rb) / r
        } else {
            -self.vp_eps - self.vpp_eps * (r - self.epsilon)
        }
    }

    /// Spliced force vector; returns the zero vector at `x = 0` (the radial
    /// direction is undefined there and the magnitude is finite).
    pub fn force(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let s = self.force_scalar(r);
        x.iter().map(|&c| s * c / r).collect()
    }

    /// Radial Laplacian of the spliced potential in dimension `d`; requires
    /// `r > 0` (as a function on R^d the splice is not twice differentiable
    /// at the origin).
    pub fn laplacian(&self, r: f64, d: usize) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "regularized laplacian requires r > 0, got {r}"
            )));
        }
        if r >= self.epsilon {
            lj_laplacian(&self.params, r, d)
        } else {
            let vp = self.vp_eps + self.vpp_eps * (r - self.epsilon);
            Ok(self.vpp_eps + (d as f64 - 1.0) * vp / r)
        }
    }

    /// `(value, radial force, Laplacian)` at `r > 0` with the `r^-alpha`,
    /// `r^-beta` powers computed once; the integrator's pair loop lives on
    /// this.
    #[inline(always)]
    pub fn pair_quantities(&self, r: f64, lap_dim: usize) -> (f64, f64, f64) {
        debug_assert!(r > 0.0);
        let p = &self.params;
        if r >= self.epsilon {
            let (ra, rb) = p.powers(r);
            let v = p.a * ra - p.b * rb;
            let f = (p.alpha * p.a * ra - p.beta * p.b * rb) / r;
            let dd = lap_dim as f64;
            let lap = (p.alpha * p.a * (p.alpha - dd + 2.0) * ra
                - p.beta * p.b * (p.beta - dd + 2.0) * rb)
                / (r * r);
            (v, f, lap)
        } else {
            let dr = r - self.epsilon;
            let v = self.v_eps + self.vp_eps * dr + 0.5 * self.vpp_eps * dr * dr;
            let vp = self.vp_eps + self.vpp_eps * dr;
            let lap = self.vpp_eps + (lap_dim as f64 - 1.0) * vp / r;
            (v, -vp, lap)
        }
    }
}

#[inline(always)]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}
