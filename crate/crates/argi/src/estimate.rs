//! Parameter estimation over the constrained space: OLS, adaptively truncated
//! Huber, its bias-adjusted variant, and Gaussian QMLE, all sharing the same
//! filter, initializer, and multi-start local optimizer.

use crate::error::{ArgiError, Result};
use crate::filter::{filter_path, FilterPath};
use crate::linalg;
use crate::model::{GarchParams, ParamSpace};
use crate::optim::{bfgs, Transform};
use crate::realized::DailySeries;
use crate::tail::{select_tuning, TuningConfig, TuningRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ols,
    Huber,
    AdjHuber,
    Qmle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Huber => "huber",
            Method::AdjHuber => "adjhuber",
            Method::Qmle => "qmle",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "ols" => Ok(Method::Ols),
            "huber" => Ok(Method::Huber),
            "adjhuber" => Ok(Method::AdjHuber),
            "qmle" => Ok(Method::Qmle),
            other => Err(ArgiError::Config(format!(
                "unknown method '{other}' (expected ols, huber, adjhuber, qmle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative objective-change tolerance.
    pub tol_obj: f64,
    /// Gradient-norm tolerance.
    pub tol_grad: f64,
    /// Initial conditional variance; default is the mean positive part of V_hat.
    pub h1: Option<f64>,
    pub tuning: TuningConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            tol_obj: 1e-10,
            tol_grad: 1e-8,
            h1: None,
            tuning: TuningConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: GarchParams,
    pub method: Method,
    /// Truncation tuning; present for the Huber family.
    pub tuning: Option<TuningRecord>,
    pub objective_value: f64,
    pub n_iterations: usize,
    pub converged: bool,
    /// Plug-in curvature `(1/n) sum (dh/dtheta)(dh/dtheta)^T` at theta_hat.
    pub v2_hat: [[f64; 4]; 4],
    /// Truncated second moment of the residuals (Huber family).
    pub v1_hat: Option<f64>,
    pub floor_events: usize,
    pub h1: f64,
    /// Whether a projection back into the box was required.
    pub projected: bool,
}

/// Huber loss: `x^2` inside the band, `2a|x| - a^2` outside.
pub fn huber_loss(x: f64, a: f64) -> f64 {
    if x.abs() < a {
        x * x
    } else {
        2.0 * a * x.abs() - a * a
    }
}

/// First derivative of the Huber loss (C^1 across the knee).
pub fn huber_loss_deriv(x: f64, a: f64) -> f64 {
    if x.abs() < a {
        2.0 * x
    } else {
        2.0 * a * x.signum()
    }
}

/// Second derivative away from the knee: 2 inside, 0 outside.
pub fn huber_loss_second_deriv(x: f64, a: f64) -> f64 {
    if x.abs() < a {
        2.0
    } else {
        0.0
    }
}

/// Default initializer: mean positive part of the total-variation series.
pub fn default_h1(data: &DailySeries) -> Result<f64> {
    let n = data.n_days();
    if n == 0 {
        return Err(ArgiError::InsufficientData("empty series".into()));
    }
    let h1 = data.v_hat.iter().map(|v| v.max(0.0)).sum::<f64>() / n as f64;
    if !(h1 > 0.0) {
        return Err(ArgiError::Degenerate(
            "total-variation series has no positive mass".into(),
        ));
    }
    Ok(h1)
}

fn check_data(data: &DailySeries) -> Result<()> {
    data.validate()?;
    if data.n_days() < 10 {
        return Err(ArgiError::InsufficientData(format!(
            "estimation needs at least 10 days, got {}",
            data.n_days()
        )));
    }
    let (min, max) = data
        .v_hat
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        return Err(ArgiError::Degenerate(
            "constant total-variation series".into(),
        ));
    }
    Ok(())
}

/// Objective value and theta-gradient over the theta-dependent residuals
/// (days 2..n).
fn objective(
    method: Method,
    theta: &GarchParams,
    data: &DailySeries,
    h1: f64,
    tau: Option<f64>,
) -> Result<(f64, [f64; 4], FilterPath)> {
    let path = filter_path(theta, data, h1)?;
    let n = data.n_days();
    let mut value = 0.0;
    let mut grad = [0.0f64; 4];
    for i in 1..n {
        let st = &path.states[i];
        let res = data.v_hat[i] - st.h;
        match method {
            Method::Ols => {
                value += res * res;
                for j in 0..4 {
                    grad[j] -= 2.0 * res * st.grad[j];
                }
            }
            Method::Huber | Method::AdjHuber => {
                let a = tau.expect("huber objective requires tau");
                value += huber_loss(res, a);
                let lp = huber_loss_deriv(res, a);
                for j in 0..4 {
                    grad[j] -= lp * st.grad[j];
                }
            }
            Method::Qmle => {
                value += data.v_hat[i] / st.h + st.h.ln();
                let w = (st.h - data.v_hat[i]) / (st.h * st.h);
                for j in 0..4 {
                    grad[j] += w * st.grad[j];
                }
            }
        }
    }
    Ok((value, grad, path))
}

/// Objective value, gradient, and Hessian in theta (active coordinates only
/// contribute; floored filter steps carry zero derivatives).
fn objective_with_hessian(
    method: Method,
    theta: &GarchParams,
    data: &DailySeries,
    h1: f64,
    tau: Option<f64>,
) -> Result<(f64, [f64; 4], [[f64; 4]; 4])> {
    let path = filter_path(theta, data, h1)?;
    let n = data.n_days();
    let mut value = 0.0;
    let mut grad = [0.0f64; 4];
    let mut hess = [[0.0f64; 4]; 4];
    for i in 1..n {
        let st = &path.states[i];
        let res = data.v_hat[i] - st.h;
        let (v, w1, w2) = match method {
            Method::Ols => (res * res, -2.0 * res, 2.0),
            Method::Huber | Method::AdjHuber => {
                let a = tau.expect("huber objective requires tau");
                (
                    huber_loss(res, a),
                    -huber_loss_deriv(res, a),
                    huber_loss_second_deriv(res, a),
                )
            }
            Method::Qmle => {
                let h = st.h;
                (
                    data.v_hat[i] / h + h.ln(),
                    (h - data.v_hat[i]) / (h * h),
                    (2.0 * data.v_hat[i] - h) / (h * h * h),
                )
            }
        };
        value += v;
        for j in 0..4 {
            grad[j] += w1 * st.grad[j];
            for k in 0..4 {
                hess[j][k] += w2 * st.grad[j] * st.grad[k] + w1 * st.hess[j][k];
            }
        }
    }
    Ok((value, grad, hess))
}

/// Damped-Newton refinement in theta space with projection onto the space;
/// drives the gradient to the first-order condition once BFGS has located the
/// basin.
fn newton_polish(
    method: Method,
    data: &DailySeries,
    h1: f64,
    tau: Option<f64>,
    space: &ParamSpace,
    start: GarchParams,
) -> Result<(GarchParams, bool)> {
    let active: Vec<usize> = (0..4).filter(|&i| !space.is_frozen(i)).collect();
    let dim = active.len();
    let mut theta = start;
    let mut projected_any = false;
    let (mut f, mut grad, mut hess) = objective_with_hessian(method, &theta, data, h1, tau)?;
    let mut lambda = 1e-8;
    for _ in 0..60 {
        let gnorm: f64 = active
            .iter()
            .map(|&i| grad[i] * grad[i])
            .sum::<f64>()
            .sqrt();
        if gnorm < 1e-10 * (1.0 + f.abs()) {
            break;
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut a = vec![vec![0.0f64; dim]; dim];
            let mut b = vec![0.0f64; dim];
            for (aj, &j) in active.iter().enumerate() {
                b[aj] = -grad[j];
                for (ak, &k) in active.iter().enumerate() {
                    a[aj][ak] = hess[j][k];
                }
                a[aj][aj] += lambda * (1.0 + hess[j][j].abs());
            }
            let step = match linalg::solve(&a, &b) {
                Ok(s) => s,
                Err(_) => {
                    lambda = (lambda * 10.0).min(1e12);
                    continue;
                }
            };
            let mut cand = theta.as_array();
            for (aj, &j) in active.iter().enumerate() {
                cand[j] += step[aj];
            }
            let (cand, clipped) = space.project(&GarchParams::from_array(cand));
            match objective_with_hessian(method, &cand, data, h1, tau) {
                Ok((fc, gc, hc)) if fc.is_finite() && fc <= f => {
                    let stalled = (f - fc).abs() <= 1e-16 * f.abs().max(1.0);
                    theta = cand;
                    f = fc;
                    grad = gc;
                    hess = hc;
                    projected_any |= clipped;
                    lambda = (lambda / 5.0).max(1e-12);
                    improved = !stalled;
                    break;
                }
                _ => {
                    lambda = (lambda * 10.0).min(1e12);
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((theta, projected_any))
}

/// Deterministic multi-start points: the unconditional-moment seed
/// (omega_g = 0.5 Vbar (1 - 0.3 - 0.3), gamma = beta_g = 0.3, alpha_g near 0)
/// plus four fixed perturbations.
fn start_points(data: &DailySeries, space: &ParamSpace) -> Vec<GarchParams> {
    let vbar = data.v_hat.iter().sum::<f64>() / data.n_days() as f64;
    let vbar = vbar.max(1e-6);
    let raw = [
        [0.2 * vbar, 0.3, 1e-3, 0.3],
        [0.1 * vbar, 0.1, 0.05, 0.5],
        [0.4 * vbar, 0.5, 0.05, 0.1],
        [0.8 * vbar, 0.2, 0.2, 0.2],
        [0.1 * vbar, 0.45, 0.01, 0.45],
    ];
    raw.iter()
        .map(|p| space.project(&GarchParams::from_array(*p)).0)
        .collect()
}

/// Fits theta by the requested method. `AdjHuber` fits Huber first and then
/// applies [`bias_adjust`].
pub fn fit(
    method: Method,
    data: &DailySeries,
    space: &ParamSpace,
    opts: &FitOptions,
) -> Result<FitResult> {
    if method == Method::AdjHuber {
        let base = fit(Method::Huber, data, space, opts)?;
        return bias_adjust(&base, data, space);
    }
    check_data(data)?;
    space.validate()?;
    let h1 = match opts.h1 {
        Some(v) if v > 0.0 => v,
        Some(v) => {
            return Err(ArgiError::Domain(format!("h1 must be positive, got {v}")));
        }
        None => default_h1(data)?,
    };
    let tuning = if matches!(method, Method::Huber) {
        Some(select_tuning(&data.v_hat, &opts.tuning)?)
    } else {
        None
    };
    let tau = tuning.as_ref().map(|t| t.tau_n);

    let transform = Transform::new(space);
    let f = |z: &[f64; 4]| -> (f64, [f64; 4]) {
        let (theta, _) = transform.to_theta(z);
        match objective(method, &theta, data, h1, tau) {
            Ok((v, g_theta, _)) => {
                let jac = transform.jacobian(z);
                let mut gz = [0.0f64; 4];
                for (j, gj) in gz.iter_mut().enumerate() {
                    for i in 0..4 {
                        *gj += g_theta[i] * jac[i][j];
                    }
                }
                (v, gz)
            }
            Err(_) => (f64::INFINITY, [0.0; 4]),
        }
    };

    let mut best: Option<(f64, [f64; 4], usize, bool)> = None;
    let mut total_iterations = 0usize;
    for start in start_points(data, space) {
        let z0 = transform.to_z(&start);
        let res = bfgs(&f, z0, opts.max_iterations, opts.tol_obj, opts.tol_grad);
        total_iterations += res.iterations;
        let better = match &best {
            Some((v, ..)) => res.value < *v,
            None => true,
        };
        if better {
            best = Some((res.value, res.z, res.iterations, res.converged));
        }
    }
    let (value, z_hat, _, converged) =
        best.ok_or_else(|| ArgiError::Estimation("no start point succeeded".into()))?;
    if !value.is_finite() {
        return Err(ArgiError::Estimation(
            "objective non-finite at every start".into(),
        ));
    }
    let (theta_bfgs, projected_bfgs) = transform.to_theta(&z_hat);
    // Newton refinement drives the first-order condition to full precision
    let (theta_hat, projected_polish) =
        newton_polish(method, data, h1, tau, space, theta_bfgs)?;
    let projected = projected_bfgs || projected_polish;

    let (value, _, path) = objective(method, &theta_hat, data, h1, tau)?;
    let (v2_hat, v1_hat, floor_events) = diagnostics(&theta_hat, data, &path, tau);
    Ok(FitResult {
        theta_hat,
        method,
        tuning,
        objective_value: value,
        n_iterations: total_iterations,
        converged,
        v2_hat,
        v1_hat,
        floor_events,
        h1,
        projected,
    })
}

fn diagnostics(
    _theta: &GarchParams,
    data: &DailySeries,
    path: &FilterPath,
    tau: Option<f64>,
) -> ([[f64; 4]; 4], Option<f64>, usize) {
    let n = data.n_days();
    let mut v2 = [[0.0f64; 4]; 4];
    let mut v1 = 0.0f64;
    let count = (n - 1) as f64;
    for i in 1..n {
        let st = &path.states[i];
        for j in 0..4 {
            for k in 0..4 {
                v2[j][k] += st.grad[j] * st.grad[k] / count;
            }
        }
        if let Some(a) = tau {
            let res = data.v_hat[i] - st.h;
            v1 += if res.abs() <= a { res * res } else { a * a } / count;
        }
    }
    (v2, tau.map(|_| v1), path.floor_events)
}

/// One-step least-squares correction of a converged Huber fit:
/// `theta_adj = theta_hat + [sum g g^T]^{-1} sum g (V_i - h_i)` with all
/// quantities at `theta_hat`, projected back into the space if the step exits
/// it. Frozen coordinates are left untouched.
pub fn bias_adjust(
    fit: &FitResult,
    data: &DailySeries,
    space: &ParamSpace,
) -> Result<FitResult> {
    if fit.method != Method::Huber {
        return Err(ArgiError::Estimation(
            "bias adjustment applies to a Huber fit".into(),
        ));
    }
    if !fit.converged {
        return Err(ArgiError::Estimation(
            "bias adjustment requires a converged Huber fit".into(),
        ));
    }
    let path = filter_path(&fit.theta_hat, data, fit.h1)?;
    let n = data.n_days();
    let active: Vec<usize> = (0..4).filter(|&i| !space.is_frozen(i)).collect();
    let dim = active.len();
    let mut a = vec![vec![0.0f64; dim]; dim];
    let mut b = vec![0.0f64; dim];
    for i in 1..n {
        let st = &path.states[i];
        let res = data.v_hat[i] - st.h;
        for (aj, &j) in active.iter().enumerate() {
            b[aj] += st.grad[j] * res;
            for (ak, &k) in active.iter().enumerate() {
                a[aj][ak] += st.grad[j] * st.grad[k];
            }
        }
    }
    let cond = linalg::cond1(&a);
    if !cond.is_finite() || cond > 1e12 {
        return Err(ArgiError::Singular(format!(
            "gradient outer-product matrix is numerically singular (cond ~ {cond:.3e})"
        )));
    }
    let step = linalg::solve(&a, &b)?;
    let mut theta = fit.theta_hat.as_array();
    for (aj, &j) in active.iter().enumerate() {
        theta[j] += step[aj];
    }
    let (theta_adj, projected) = space.project(&GarchParams::from_array(theta));

    let (value, _, path_adj) = objective(Method::Ols, &theta_adj, data, fit.h1, None)?;
    let (v2_hat, _, floor_events) = diagnostics(&theta_adj, data, &path_adj, None);
    Ok(FitResult {
        theta_hat: theta_adj,
        method: Method::AdjHuber,
        tuning: fit.tuning,
        objective_value: value,
        n_iterations: fit.n_iterations,
        converged: fit.converged,
        v2_hat,
        v1_hat: fit.v1_hat,
        floor_events,
        h1: fit.h1,
        projected,
    })
}

/// Projected-gradient norm at theta: gradient components pointing outside the
/// active box faces are dropped. Used by the first-order-condition checks.
pub fn projected_gradient_norm(
    method: Method,
    theta: &GarchParams,
    data: &DailySeries,
    space: &ParamSpace,
    h1: f64,
    tau: Option<f64>,
) -> Result<f64> {
    let (_, grad, _) = objective(method, theta, data, h1, tau)?;
    let t = theta.as_array();
    let eps = 1e-9;
    let mut norm2 = 0.0;
    let budget_active = theta.gamma + theta.beta_g >= 1.0 - space.stationarity_margin - eps;
    for i in 0..4 {
        if space.is_frozen(i) {
            continue;
        }
        let mut g = grad[i];
        if t[i] <= space.lower[i] + eps && g > 0.0 {
            g = 0.0;
        }
        if t[i] >= space.upper[i] - eps && g < 0.0 {
            g = 0.0;
        }
        if budget_active && (i == 1 || i == 3) && g < 0.0 {
            g = 0.0;
        }
        norm2 += g * g;
    }
    Ok(norm2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::forecast_next;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn synthetic_series(theta: &GarchParams, n: usize, seed: u64, noise: f64) -> DailySeries {
        // innovations drawn first, then V set from the recursion plus noise
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rv: Vec<f64> = (0..n).map(|_| 0.8 + 0.6 * rng.random::<f64>()).collect();
        let ret: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let h1 = 1.0;
        let mut h = h1;
        let mut v_hat = vec![0.0; n];
        v_hat[0] = h1;
        for i in 1..n {
            h = theta.omega_g + theta.gamma * h + theta.beta_g * rv[i - 1]
                - theta.alpha_g * ret[i - 1];
            let eps: f64 = rng.random::<f64>() - 0.5;
            v_hat[i] = h + noise * eps;
        }
        DailySeries {
            v_hat,
            rv,
            ret,
            negative_days: vec![],
        }
    }

    fn truth() -> GarchParams {
        GarchParams {
            omega_g: 0.9412,
            gamma: 0.2474,
            alpha_g: 0.2774,
            beta_g: 0.2053,
        }
    }

    #[test]
    fn huber_loss_values() {
        assert_eq!(huber_loss(1.0, 2.0), 1.0);
        assert_eq!(huber_loss(3.0, 2.0), 8.0);
        assert_eq!(huber_loss(-3.0, 2.0), 8.0);
        assert_eq!(huber_loss_deriv(1.0, 2.0), 2.0);
        assert_eq!(huber_loss_deriv(3.0, 2.0), 4.0);
        assert_eq!(huber_loss_deriv(-3.0, 2.0), -4.0);
        assert_eq!(huber_loss_second_deriv(1.0, 2.0), 2.0);
        assert_eq!(huber_loss_second_deriv(3.0, 2.0), 0.0);
    }

    #[test]
    fn zero_residual_data_recovered_by_all_methods() {
        let theta = truth();
        let data = synthetic_series(&theta, 200, 7, 0.0);
        let space = ParamSpace::default();
        let opts = FitOptions {
            h1: Some(1.0),
            ..FitOptions::default()
        };
        for method in [Method::Ols, Method::Huber, Method::AdjHuber, Method::Qmle] {
            let fit_res = fit(method, &data, &space, &opts).unwrap();
            let got = fit_res.theta_hat.as_array();
            let want = theta.as_array();
            for i in 0..4 {
                assert!(
                    (got[i] - want[i]).abs() < 1e-6,
                    "{method:?} coord {i}: {} vs {}",
                    got[i],
                    want[i]
                );
            }
            assert!(fit_res.converged);
        }
    }

    #[test]
    fn huber_equals_ols_when_threshold_dominates() {
        let data = synthetic_series(&truth(), 150, 11, 0.2);
        let space = ParamSpace::default();
        let opts = FitOptions {
            h1: Some(1.0),
            ..FitOptions::default()
        };
        let ols = fit(Method::Ols, &data, &space, &opts).unwrap();

        // residuals at the OLS solution bound tau from below
        let path = filter_path(&ols.theta_hat, &data, 1.0).unwrap();
        let max_res = (1..data.n_days())
            .map(|i| (data.v_hat[i] - path.states[i].h).abs())
            .fold(0.0f64, f64::max);
        let tau = max_res * 20.0;

        let f = |z: &[f64; 4]| -> (f64, [f64; 4]) {
            let space = ParamSpace::default();
            let tr = Transform::new(&space);
            let (theta, _) = tr.to_theta(z);
            let (v, g_theta, _) = objective(Method::Huber, &theta, &data, 1.0, Some(tau)).unwrap();
            let jac = tr.jacobian(z);
            let mut gz = [0.0; 4];
            for (j, gj) in gz.iter_mut().enumerate() {
                for i in 0..4 {
                    *gj += g_theta[i] * jac[i][j];
                }
            }
            (v, gz)
        };
        let tr = Transform::new(&space);
        let res = bfgs(
            &f,
            tr.to_z(&ols.theta_hat),
            500,
            1e-12,
            1e-10,
        );
        let (theta_h, _) = tr.to_theta(&res.z);
        for (a, b) in theta_h.as_array().iter().zip(ols.theta_hat.as_array()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        // objective values coincide on the quadratic branch
        let (v_ols, _, _) = objective(Method::Ols, &ols.theta_hat, &data, 1.0, None).unwrap();
        let (v_hub, _, _) =
            objective(Method::Huber, &ols.theta_hat, &data, 1.0, Some(tau)).unwrap();
        assert!((v_ols - v_hub).abs() < 1e-10 * v_ols.max(1.0));
    }

    #[test]
    fn first_order_condition_at_optimum() {
        let data = synthetic_series(&truth(), 180, 13, 0.15);
        let space = ParamSpace::default();
        let opts = FitOptions {
            h1: Some(1.0),
            ..FitOptions::default()
        };
        for method in [Method::Ols, Method::Qmle] {
            let res = fit(method, &data, &space, &opts).unwrap();
            let g = projected_gradient_norm(method, &res.theta_hat, &data, &space, 1.0, None)
                .unwrap();
            assert!(g < 1e-6, "{method:?} projected gradient {g}");
        }
    }

    #[test]
    fn bias_adjust_identities() {
        let theta = truth();
        let space = ParamSpace::default();
        let opts = FitOptions {
            h1: Some(1.0),
            ..FitOptions::default()
        };

        // zero residuals: adjustment vanishes
        let clean = synthetic_series(&theta, 120, 17, 0.0);
        let hub = fit(Method::Huber, &clean, &space, &opts).unwrap();
        let adj = bias_adjust(&hub, &clean, &space).unwrap();
        for (a, b) in adj.theta_hat.as_array().iter().zip(hub.theta_hat.as_array()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(adj.method, Method::AdjHuber);

        // at the OLS solution the normal equations already hold: the
        // correction is zero within numerical precision
        let noisy = synthetic_series(&theta, 160, 19, 0.3);
        let ols = fit(Method::Ols, &noisy, &space, &opts).unwrap();
        let pseudo_huber = FitResult {
            method: Method::Huber,
            ..ols.clone()
        };
        let adj = bias_adjust(&pseudo_huber, &noisy, &space).unwrap();
        for (a, b) in adj.theta_hat.as_array().iter().zip(ols.theta_hat.as_array()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn scalar_intercept_adjustment_is_mean_residual() {
        // freeze gamma, alpha_g, beta_g: the correction reduces to adding the
        // mean residual to omega_g
        let mut space = ParamSpace::default();
        space.lower[1] = 0.0;
        space.upper[1] = 0.0;
        space.lower[2] = 0.0;
        space.upper[2] = 0.0;
        space.lower[3] = 0.0;
        space.upper[3] = 0.0;
        let data = synthetic_series(&truth(), 100, 23, 0.4);
        let theta = GarchParams {
            omega_g: 1.3,
            gamma: 0.0,
            alpha_g: 0.0,
            beta_g: 0.0,
        };
        let path = filter_path(&theta, &data, 1.0).unwrap();
        let n = data.n_days();
        let mean_res: f64 = (1..n)
            .map(|i| data.v_hat[i] - path.states[i].h)
            .sum::<f64>()
            / (n - 1) as f64;
        let fitres = FitResult {
            theta_hat: theta,
            method: Method::Huber,
            tuning: None,
            objective_value: 0.0,
            n_iterations: 0,
            converged: true,
            v2_hat: [[0.0; 4]; 4],
            v1_hat: None,
            floor_events: 0,
            h1: 1.0,
            projected: false,
        };
        let adj = bias_adjust(&fitres, &data, &space).unwrap();
        assert!(
            (adj.theta_hat.omega_g - (1.3 + mean_res)).abs() < 1e-10,
            "{} vs {}",
            adj.theta_hat.omega_g,
            1.3 + mean_res
        );
        assert_eq!(adj.theta_hat.gamma, 0.0);
    }

    #[test]
    fn rgi_space_produces_zero_leverage() {
        let data = synthetic_series(&truth(), 150, 29, 0.2);
        let space = ParamSpace::default().rgi();
        let opts = FitOptions::default();
        let res = fit(Method::Huber, &data, &space, &opts).unwrap();
        assert_eq!(res.theta_hat.alpha_g, 0.0);
        assert!(space.contains(&res.theta_hat));
        let adj = bias_adjust(&res, &data, &space).unwrap();
        assert_eq!(adj.theta_hat.alpha_g, 0.0);
    }

    #[test]
    fn deterministic_fits() {
        let data = synthetic_series(&truth(), 140, 31, 0.25);
        let space = ParamSpace::default();
        let opts = FitOptions::default();
        for method in [Method::Ols, Method::Huber, Method::AdjHuber, Method::Qmle] {
            let a = fit(method, &data, &space, &opts).unwrap();
            let b = fit(method, &data, &space, &opts).unwrap();
            assert_eq!(a.theta_hat.as_array(), b.theta_hat.as_array());
            assert_eq!(a.objective_value, b.objective_value);
            assert_eq!(a.n_iterations, b.n_iterations);
        }
    }

    #[test]
    fn degenerate_data_rejected() {
        let data = DailySeries {
            v_hat: vec![2.0; 50],
            rv: vec![1.0; 50],
            ret: vec![0.0; 50],
            negative_days: vec![],
        };
        let err = fit(
            Method::Ols,
            &data,
            &ParamSpace::default(),
            &FitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ArgiError::Degenerate(_)));

        let short = DailySeries {
            v_hat: vec![1.0, 2.0],
            rv: vec![1.0, 1.0],
            ret: vec![0.0, 0.0],
            negative_days: vec![],
        };
        assert!(fit(
            Method::Ols,
            &short,
            &ParamSpace::default(),
            &FitOptions::default()
        )
        .is_err());
    }

    #[test]
    fn v2_is_symmetric_psd_and_forecast_positive() {
        let data = synthetic_series(&truth(), 150, 37, 0.2);
        let res = fit(
            Method::Qmle,
            &data,
            &ParamSpace::default(),
            &FitOptions::default(),
        )
        .unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert!((res.v2_hat[j][k] - res.v2_hat[k][j]).abs() < 1e-12);
            }
            assert!(res.v2_hat[j][j] >= 0.0);
        }
        let f = forecast_next(&res.theta_hat, &data, res.h1).unwrap();
        assert!(f > 0.0);
    }
}
