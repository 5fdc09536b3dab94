//! Parameter types, the constrained parameter space, and the mapping from the
//! continuous-time structural parameters to the daily GARCH recursion
//! parameters `theta = (omega_g, gamma, alpha_g, beta_g)`.

use crate::error::{ArgiError, Result};

/// Distribution of the compound-Poisson jump sizes.
///
/// Under the mixed law a jump is `-c_j * T^2` or `+c_j * Z^2` with equal
/// probability, where `T` is a standardized Student-t with `df` degrees of
/// freedom and `Z` is standard normal. The law has mean zero by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpLaw {
    /// Expected jumps per day.
    pub intensity: f64,
    /// Jump scale.
    pub c_j: f64,
    /// Degrees of freedom of the t branch; must exceed 4 so the fourth moment
    /// of the standardized t (and hence E(J^2)) is finite.
    pub df: f64,
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(ArgiError::InvalidParameter(format!(
                "jump intensity must be >= 0, got {}",
                self.intensity
            )));
        }
        if !(self.c_j > 0.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "jump scale c_j must be > 0, got {}",
                self.c_j
            )));
        }
        if !(self.df > 4.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "jump df must be > 4, got {}",
                self.df
            )));
        }
        Ok(())
    }

    /// Mean jump size; zero under the mixed law.
    pub fn mean_omega_l(&self) -> f64 {
        0.0
    }

    /// E(J^2): half the fourth moment of the standardized t plus half the
    /// standard-normal fourth moment, each scaled by c_j^2.
    pub fn second_moment(&self) -> f64 {
        0.5 * self.c_j * self.c_j * ((3.0 + 6.0 / (self.df - 4.0)) + 3.0)
    }
}

/// Continuous-time model parameters of the volatility diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralParams {
    /// Drift per day.
    pub mu: f64,
    /// Level parameter of the intra-day quadratic term.
    pub omega1: f64,
    /// Level parameter of the intra-day linear term.
    pub omega2: f64,
    /// Persistence weight, in (0, 1).
    pub gamma: f64,
    /// Leverage coefficient on the price increment.
    pub alpha: f64,
    /// Integrated-volatility feedback, > 0.
    pub beta: f64,
    /// Scale of the random fluctuation term.
    pub nu: f64,
    pub jump: JumpLaw,
    /// Microstructure-noise standard deviation.
    pub noise_sd: f64,
    /// Initial log-price.
    pub x0: f64,
    /// Initial spot variance, > 0.
    pub sigma0_sq: f64,
}

impl StructuralParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "gamma must lie in (0,1), got {}",
                self.gamma
            )));
        }
        if !(self.beta > 0.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("alpha", self.alpha),
            ("nu", self.nu),
            ("noise_sd", self.noise_sd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ArgiError::InvalidParameter(format!(
                    "{name} must be >= 0 and finite, got {v}"
                )));
            }
        }
        if !(self.sigma0_sq > 0.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "sigma0_sq must be > 0, got {}",
                self.sigma0_sq
            )));
        }
        if !self.mu.is_finite() || !self.x0.is_finite() {
            return Err(ArgiError::InvalidParameter(
                "mu and x0 must be finite".into(),
            ));
        }
        self.jump.validate()
    }

    /// The configuration of the published simulation design: intra-day
    /// U-shape levels, moderate leverage, t(6) jumps at 20 per day, and
    /// 0.01 noise.
    pub fn section4() -> Self {
        StructuralParams {
            mu: 0.02,
            omega1: 3.9527,
            omega2: 0.1000,
            gamma: 0.2474,
            alpha: 0.3972,
            beta: 0.2939,
            nu: 0.01,
            jump: JumpLaw {
                intensity: 20.0,
                c_j: 0.04,
                df: 6.0,
            },
            noise_sd: 0.01,
            x0: 10.0,
            sigma0_sq: 1.7462,
        }
    }
}

/// The estimable GARCH parameter vector, ordered (omega_g, gamma, alpha_g, beta_g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams {
    pub omega_g: f64,
    pub gamma: f64,
    pub alpha_g: f64,
    pub beta_g: f64,
}

impl GarchParams {
    pub fn as_array(&self) -> [f64; 4] {
        [self.omega_g, self.gamma, self.alpha_g, self.beta_g]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        GarchParams {
            omega_g: a[0],
            gamma: a[1],
            alpha_g: a[2],
            beta_g: a[3],
        }
    }

    /// Coordinate names in vector order, used by result files and reports.
    pub const NAMES: [&'static str; 4] = ["omega_g", "gamma", "alpha_g", "beta_g"];
}

/// Box bounds for theta plus the stationarity slack enforcing
/// `gamma + beta_g <= 1 - stationarity_margin`.
///
/// A coordinate with `lower == upper` is frozen at that value; this is how the
/// RGI restriction (`alpha_g = 0`) is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpace {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub stationarity_margin: f64,
}

impl Default for ParamSpace {
    fn default() -> Self {
        ParamSpace {
            lower: [1e-8; 4],
            upper: [10.0; 4],
            stationarity_margin: 1e-4,
        }
    }
}

impl ParamSpace {
    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            if !(self.lower[i] >= 0.0) || !self.lower[i].is_finite() || !self.upper[i].is_finite()
            {
                return Err(ArgiError::InvalidParameter(format!(
                    "bounds for {} must be finite and non-negative",
                    GarchParams::NAMES[i]
                )));
            }
            if self.lower[i] > self.upper[i] {
                return Err(ArgiError::InvalidParameter(format!(
                    "lower bound exceeds upper bound for {}",
                    GarchParams::NAMES[i]
                )));
            }
        }
        if !(self.stationarity_margin > 0.0 && self.stationarity_margin < 1.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "stationarity_margin must lie in (0,1), got {}",
                self.stationarity_margin
            )));
        }
        Ok(())
    }

    /// The RGI restriction: same box with the leverage loading frozen at zero.
    pub fn rgi(mut self) -> Self {
        self.lower[2] = 0.0;
        self.upper[2] = 0.0;
        self
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn contains(&self, theta: &GarchParams) -> bool {
        let t = theta.as_array();
        for i in 0..4 {
            if t[i] < self.lower[i] || t[i] > self.upper[i] {
                return false;
            }
        }
        theta.gamma + theta.beta_g <= 1.0 - self.stationarity_margin
    }

    /// Projects theta onto the closed box and the stationarity constraint.
    /// Returns the projected point and whether any clipping occurred.
    pub fn project(&self, theta: &GarchParams) -> (GarchParams, bool) {
        let mut t = theta.as_array();
        let mut clipped = false;
        for i in 0..4 {
            let c = t[i].clamp(self.lower[i], self.upper[i]);
            if c != t[i] {
                clipped = true;
                t[i] = c;
            }
        }
        let budget = 1.0 - self.stationarity_margin;
        let mass = t[1] + t[3];
        if mass > budget {
            // shrink the (gamma, beta_g) pair toward its lower bounds; the
            // tiny extra factor absorbs rounding so the result stays feasible
            let lo = self.lower[1] + self.lower[3];
            let scale = if mass > lo {
                (budget - lo) / (mass - lo) * (1.0 - 1e-12)
            } else {
                0.0
            };
            t[1] = self.lower[1] + (t[1] - self.lower[1]) * scale;
            t[3] = self.lower[3] + (t[3] - self.lower[3]) * scale;
            clipped = true;
        }
        (GarchParams::from_array(t), clipped)
    }
}

/// Switch point below which the exponential-difference ratios are evaluated by
/// Taylor series. The direct form of rho_3 subtracts the first three Taylor
/// terms of e^b and keeps only O(b^3), so it loses roughly 16 + 3*log10(b)
/// digits; the series is exact to rounding well past this point.
const RHO_SERIES_CUTOFF: f64 = 0.02;

/// The ratios rho_1 = (e^b - 1)/b, rho_2 = (e^b - 1 - b)/b^2,
/// rho_3 = (e^b - 1 - b - b^2/2)/b^3 appearing in the parameter map.
pub fn rho123(beta: f64) -> Result<(f64, f64, f64)> {
    if !(beta > 0.0) {
        return Err(ArgiError::Domain(format!(
            "rho terms require beta > 0, got {beta}"
        )));
    }
    if beta < RHO_SERIES_CUTOFF {
        // rho_k = sum_{j>=0} b^j / (j+k)!
        let mut r = [0.0f64; 3];
        for (k, rk) in r.iter_mut().enumerate() {
            let mut term = 1.0 / FACTORIALS[k + 1];
            let mut sum = term;
            for j in 1..8 {
                term *= beta / (j + k + 1) as f64;
                sum += term;
            }
            *rk = sum;
        }
        return Ok((r[0], r[1], r[2]));
    }
    let e = beta.exp();
    let r1 = (e - 1.0) / beta;
    let r2 = (e - 1.0 - beta) / (beta * beta);
    let r3 = (e - 1.0 - beta - beta * beta / 2.0) / (beta * beta * beta);
    Ok((r1, r2, r3))
}

const FACTORIALS: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// Maps the structural parameters to the daily GARCH parameters.
pub fn structural_to_garch(p: &StructuralParams) -> Result<GarchParams> {
    p.validate()?;
    let (r1, r2, r3) = rho123(p.beta)?;
    let factor = r1 - r2 + 2.0 * p.gamma * r3;
    let alpha_g = factor * p.alpha;
    let beta_g = factor * p.beta;
    let lam = p.jump.intensity;
    let ej2 = if lam > 0.0 { p.jump.second_moment() } else { 0.0 };
    let omega_g = p.gamma * (r1 - r2 + 2.0 * r3) * p.omega1
        - (r1 - p.gamma * r2 + 2.0 * p.gamma * r3) * p.omega2
        - (1.0 - p.gamma) * (r2 * p.alpha * (p.mu + lam * p.jump.mean_omega_l()) - lam * ej2);
    Ok(GarchParams {
        omega_g,
        gamma: p.gamma,
        alpha_g,
        beta_g,
    })
}

/// Stationary mean of the conditional-variance recursion,
/// `omega_g / (1 - gamma - beta_g)`, with the innovation means set to zero.
pub fn unconditional_h(theta: &GarchParams) -> Result<f64> {
    let denom = 1.0 - theta.gamma - theta.beta_g;
    if !(denom > 0.0) {
        return Err(ArgiError::Domain(format!(
            "unconditional mean requires gamma + beta_g < 1, got {}",
            theta.gamma + theta.beta_g
        )));
    }
    Ok(theta.omega_g / denom)
}
