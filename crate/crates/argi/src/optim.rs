//! Box- and stationarity-constrained local optimization in transformed
//! coordinates.
//!
//! theta maps to an unconstrained 4-vector z: log offsets from the lower
//! bounds for `omega_g` and `alpha_g`, and a double logistic for the
//! `(gamma, beta_g)` pair — one coordinate sets the joint mass
//! `gamma + beta_g` inside `(lo, 1 - margin)` and one splits it — so the
//! stationarity constraint holds by construction. Upper box bounds on the
//! log-transformed coordinates are enforced by projection with a zero
//! subgradient beyond the bound. Frozen coordinates (lower == upper) are held
//! fixed. The search itself is BFGS with backtracking Armijo line search.

use crate::model::{GarchParams, ParamSpace};

const Z_CAP: f64 = 30.0; // |z| beyond this saturates exp/logistic anyway

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

/// The reparameterization for a given space.
pub struct Transform<'a> {
    space: &'a ParamSpace,
}

impl<'a> Transform<'a> {
    pub fn new(space: &'a ParamSpace) -> Self {
        Transform { space }
    }

    fn budget(&self) -> f64 {
        1.0 - self.space.stationarity_margin
    }

    fn pair_lo(&self) -> f64 {
        self.space.lower[1] + self.space.lower[3]
    }

    /// z -> theta, with upper-bound projection on the log coordinates.
    /// Also returns whether the projection clipped anything.
    pub fn to_theta(&self, z: &[f64; 4]) -> (GarchParams, bool) {
        let s = self.space;
        let mut clipped = false;
        let mut out = [0.0f64; 4];
        for (i, oi) in out.iter_mut().enumerate() {
            if s.is_frozen(i) {
                *oi = s.lower[i];
            }
        }
        // log-offset coordinates
        for i in [0usize, 2] {
            if s.is_frozen(i) {
                continue;
            }
            let v = s.lower[i] + z[i].min(Z_CAP).exp();
            if v > s.upper[i] {
                out[i] = s.upper[i];
                clipped = true;
            } else {
                out[i] = v;
            }
        }
        // (gamma, beta_g) via mass and split
        let lo = self.pair_lo();
        let span = self.budget() - lo;
        let mass = lo + span * sigmoid(z[1]);
        let split = sigmoid(z[3]);
        let mut gamma = s.lower[1] + (mass - lo) * split;
        let mut beta = mass - gamma; // = lower[3] + (mass-lo)(1-split)
        if gamma > s.upper[1] {
            gamma = s.upper[1];
            clipped = true;
        }
        if beta > s.upper[3] {
            beta = s.upper[3];
            clipped = true;
        }
        if s.is_frozen(1) {
            gamma = s.lower[1];
        }
        if s.is_frozen(3) {
            beta = s.lower[3];
        }
        out[1] = gamma;
        out[3] = beta;
        (GarchParams::from_array(out), clipped)
    }

    /// theta -> z; the inverse map on the interior.
    pub fn to_z(&self, theta: &GarchParams) -> [f64; 4] {
        let s = self.space;
        let t = theta.as_array();
        let mut z = [0.0f64; 4];
        for i in [0usize, 2] {
            if s.is_frozen(i) {
                continue;
            }
            z[i] = (t[i] - s.lower[i]).max(1e-12).ln();
        }
        let lo = self.pair_lo();
        let span = self.budget() - lo;
        let mass = (t[1] + t[3]).clamp(lo + 1e-12, self.budget() - 1e-12);
        z[1] = logit((mass - lo) / span);
        z[3] = logit((t[1] - s.lower[1]).max(1e-12) / (mass - lo).max(1e-12));
        z[3] = z[3].clamp(-Z_CAP, Z_CAP);
        z[1] = z[1].clamp(-Z_CAP, Z_CAP);
        z
    }

    /// Jacobian d theta / d z at z (4x4, column j = d theta / d z_j). Clipped
    /// or frozen coordinates carry zero rows.
    pub fn jacobian(&self, z: &[f64; 4]) -> [[f64; 4]; 4] {
        let s = self.space;
        let mut jac = [[0.0f64; 4]; 4];
        let (theta, _) = self.to_theta(z);
        let t = theta.as_array();
        for i in [0usize, 2] {
            if s.is_frozen(i) || t[i] >= s.upper[i] {
                continue;
            }
            jac[i][i] = z[i].min(Z_CAP).exp();
        }
        let lo = self.pair_lo();
        let span = self.budget() - lo;
        let s1 = sigmoid(z[1]);
        let s2 = sigmoid(z[3]);
        let dmass_dz1 = span * s1 * (1.0 - s1);
        let mass_excess = span * s1; // mass - lo
        let dsplit_dz3 = s2 * (1.0 - s2);
        let gamma_free = !s.is_frozen(1) && t[1] < s.upper[1];
        let beta_free = !s.is_frozen(3) && t[3] < s.upper[3];
        if gamma_free {
            jac[1][1] = dmass_dz1 * s2;
            jac[1][3] = mass_excess * dsplit_dz3;
        }
        if beta_free {
            jac[3][1] = dmass_dz1 * (1.0 - s2);
            jac[3][3] = -mass_excess * dsplit_dz3;
        }
        jac
    }
}

/// Result of one BFGS run.
pub struct OptimResult {
    pub z: [f64; 4],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` (value and z-gradient) from `z0` by BFGS with backtracking.
/// Convergence: relative objective change below `tol_obj` or gradient norm
/// below `tol_grad`.
pub fn bfgs<F>(
    f: &F,
    z0: [f64; 4],
    max_iterations: usize,
    tol_obj: f64,
    tol_grad: f64,
) -> OptimResult
where
    F: Fn(&[f64; 4]) -> (f64, [f64; 4]),
{
    let mut z = z0;
    let (mut fval, mut grad) = f(&z);
    let mut hinv = [[0.0f64; 4]; 4];
    for (i, row) in hinv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut converged = false;
    let mut iter = 0;
    while iter < max_iterations {
        iter += 1;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < tol_grad {
            converged = true;
            break;
        }
        // direction d = -Hinv * grad
        let mut dir = [0.0f64; 4];
        for i in 0..4 {
            for j in 0..4 {
                dir[i] -= hinv[i][j] * grad[j];
            }
        }
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if !(slope < 0.0) {
            // reset curvature if the direction is not a descent direction
            hinv = [[0.0; 4]; 4];
            for (i, row) in hinv.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            for (d, g) in dir.iter_mut().zip(&grad) {
                *d = -g;
            }
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }

        // backtracking Armijo search
        let mut step = 1.0f64;
        let mut accepted = false;
        let mut z_new = z;
        let mut f_new = fval;
        let mut g_new = grad;
        for _ in 0..60 {
            for i in 0..4 {
                z_new[i] = (z[i] + step * dir[i]).clamp(-Z_CAP, Z_CAP);
            }
            let (fv, gv) = f(&z_new);
            if fv.is_finite() && fv <= fval + 1e-4 * step * slope {
                f_new = fv;
                g_new = gv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no further progress along any step size
        }

        // BFGS inverse update
        let mut s = [0.0f64; 4];
        let mut y = [0.0f64; 4];
        for i in 0..4 {
            s[i] = z_new[i] - z[i];
            y[i] = g_new[i] - grad[i];
        }
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // Hinv = (I - rho s y^T) Hinv (I - rho y s^T) + rho s s^T
            let mut hy = [0.0f64; 4];
            for i in 0..4 {
                for j in 0..4 {
                    hy[i] += hinv[i][j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..4 {
                for j in 0..4 {
                    hinv[i][j] += rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        let rel_change = (fval - f_new).abs() / fval.abs().max(1.0);
        z = z_new;
        grad = g_new;
        let prev = fval;
        fval = f_new;
        if rel_change < tol_obj && prev.is_finite() {
            converged = true;
            break;
        }
    }
    OptimResult {
        z,
        value: fval,
        iterations: iter,
        converged,
    }
}
