//! Euler simulation of the ARGI sample path: spot variance with the intra-day
//! deterministic shape, jump-diffusion log-prices, and noisy tick observations
//! on a subsampled grid.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal, StudentT};

use crate::derive_seed;
use crate::error::{ArgiError, Result};
use crate::model::{structural_to_garch, unconditional_h, GarchParams, StructuralParams};

/// Spot-variance floor; clamp events are counted per run.
pub const SIGMA_SQ_FLOOR: f64 = 1e-10;

/// One trading day of observed ticks. Times are absolute (day `d` spans
/// `[d-1, d]`); the first entry is the day's open at time `d-1` and the last
/// is the close at time `d`. Interior ticks carry microstructure noise, the
/// endpoints are true prices.
#[derive(Debug, Clone, PartialEq)]
pub struct TickDay {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
}

impl TickDay {
    /// Number of return increments in the day.
    pub fn n_increments(&self) -> usize {
        self.prices.len().saturating_sub(1)
    }
}

/// Observed log-prices for a span of days plus the true opens at integer times.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    pub days: Vec<TickDay>,
    /// True log-prices at integer times 0..=n; length `days.len() + 1`.
    pub opens: Vec<f64>,
}

impl TickSeries {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.opens.len() != self.days.len() + 1 {
            return Err(ArgiError::InvalidParameter(format!(
                "opens length {} does not match {} days",
                self.opens.len(),
                self.days.len()
            )));
        }
        for (d, day) in self.days.iter().enumerate() {
            if day.times.len() != day.prices.len() {
                return Err(ArgiError::InvalidParameter(format!(
                    "day {}: times/prices length mismatch",
                    d + 1
                )));
            }
            if day.times.len() < 2 {
                return Err(ArgiError::InsufficientData(format!(
                    "day {}: needs at least 2 ticks",
                    d + 1
                )));
            }
            if day.times[0] != d as f64 {
                return Err(ArgiError::InvalidParameter(format!(
                    "day {}: first time must equal {}, got {}",
                    d + 1,
                    d,
                    day.times[0]
                )));
            }
            if !day
                .times
                .windows(2)
                .all(|w| w[1] > w[0] && w[1] <= (d + 1) as f64)
            {
                return Err(ArgiError::InvalidParameter(format!(
                    "day {}: times must be strictly increasing within the day",
                    d + 1
                )));
            }
            if day.prices.iter().any(|p| !p.is_finite()) {
                return Err(ArgiError::InvalidParameter(format!(
                    "day {}: non-finite price",
                    d + 1
                )));
            }
        }
        Ok(())
    }

    /// Daily integer-time returns `r_d = X_d - X_{d-1}`.
    pub fn returns(&self) -> Vec<f64> {
        self.opens.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Simulation grid and model parameters.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub n_days: usize,
    /// Fine-grid steps per day.
    pub m_all: usize,
    /// Observed ticks per day; must divide `m_all`.
    pub m_obs: usize,
    pub seed: u64,
    pub params: StructuralParams,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_days < 2 {
            return Err(ArgiError::InvalidParameter(format!(
                "n_days must be >= 2, got {}",
                self.n_days
            )));
        }
        if self.m_obs < 2 || self.m_all < self.m_obs {
            return Err(ArgiError::InvalidParameter(format!(
                "need m_all >= m_obs >= 2, got m_all={} m_obs={}",
                self.m_all, self.m_obs
            )));
        }
        if self.m_all % self.m_obs != 0 {
            return Err(ArgiError::InvalidParameter(format!(
                "m_obs={} must divide m_all={}",
                self.m_obs, self.m_all
            )));
        }
        self.params.validate()
    }
}

/// Simulation output: observed ticks plus per-day ground truth.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub ticks: TickSeries,
    /// True log-prices at integer times, length `n_days + 1`.
    pub true_x: Vec<f64>,
    /// Integrated variance per day (trapezoid on the fine grid).
    pub true_iv: Vec<f64>,
    /// Sum of squared jump sizes per day.
    pub true_jv: Vec<f64>,
    /// One-day-ahead conditional variance `h_{n+1}(theta_0)` from the true
    /// recursion on true integrated variances and returns.
    pub true_h_next: f64,
    /// Fine-grid spot variance, length `n_days * m_all + 1`, when requested.
    pub spot_var: Option<Vec<f64>>,
    /// Number of times the spot variance hit the floor.
    pub clamp_events: u64,
}

/// Draws one jump size from the mixed law.
fn draw_jump(rng: &mut ChaCha8Rng, t_dist: &StudentT<f64>, t_scale: f64, c_j: f64) -> f64 {
    if rng.random::<bool>() {
        let t: f64 = t_dist.sample(rng) / t_scale;
        -c_j * t * t
    } else {
        let z: f64 = rng.sample(StandardNormal);
        c_j * z * z
    }
}

/// Runs the Euler scheme. Within a day the spot variance is evaluated in
/// solution form: the deterministic quadratic/linear terms at the current
/// intra-day time, the running left-Riemann integral for the feedback term,
/// and the fluctuation carried exactly through its Ito-integral identity
/// `int (W_s - W_d) dW = ((W_t - W_d)^2 - (t - d)) / 2`. At each integer time
/// the variance resets to `omega + gamma * sigma_{d-1}^2 + beta * IV_d -
/// alpha * (X_d - X_{d-1})` with `omega = gamma * omega1 - omega2`, the
/// fluctuation term dropping out.
///
/// Path randomness and observation noise come from separate RNG streams
/// derived from the seed, so the true path is unchanged when only `m_obs`
/// varies.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutput> {
    simulate_impl(cfg, false)
}

/// As [`simulate`], additionally retaining the fine-grid spot-variance trace.
pub fn simulate_with_trace(cfg: &SimConfig) -> Result<SimOutput> {
    simulate_impl(cfg, true)
}

fn simulate_impl(cfg: &SimConfig, keep_trace: bool) -> Result<SimOutput> {
    cfg.validate()?;
    let p = &cfg.params;
    let n = cfg.n_days;
    let m_all = cfg.m_all;
    let dt = 1.0 / m_all as f64;
    let sqrt_dt = dt.sqrt();
    let stride = m_all / cfg.m_obs;
    let omega = p.gamma * p.omega1 - p.omega2;

    let mut path_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));

    let poisson = if p.jump.intensity > 0.0 {
        Some(Poisson::new(p.jump.intensity * dt).map_err(|e| {
            ArgiError::InvalidParameter(format!("invalid jump intensity: {e}"))
        })?)
    } else {
        None
    };
    let t_dist = StudentT::new(p.jump.df)
        .map_err(|e| ArgiError::InvalidParameter(format!("invalid jump df: {e}")))?;
    let t_scale = (p.jump.df / (p.jump.df - 2.0)).sqrt();

    let mut x = p.x0;
    let mut sig2_day = p.sigma0_sq; // sigma^2 at the current day's open
    let mut clamp_events = 0u64;

    let mut opens = Vec::with_capacity(n + 1);
    opens.push(x);
    let mut true_iv = Vec::with_capacity(n);
    let mut true_jv = Vec::with_capacity(n);
    let mut days = Vec::with_capacity(n);
    let mut trace = if keep_trace {
        let mut t = Vec::with_capacity(n * m_all + 1);
        t.push(sig2_day);
        Some(t)
    } else {
        None
    };

    let mut fine = vec![0.0f64; m_all + 1];
    for d in 0..n {
        let x_day = x;
        let mut sig2_prev = sig2_day;
        let mut w_cum = 0.0f64;
        let mut iv_left = 0.0f64;
        let mut iv_trap = 0.0f64;
        let mut jv_day = 0.0f64;
        fine[0] = x;

        for k in 1..=m_all {
            let u = k as f64 * dt;
            let db: f64 = path_rng.sample::<f64, _>(StandardNormal) * sqrt_dt;
            let dw: f64 = path_rng.sample::<f64, _>(StandardNormal) * sqrt_dt;
            let mut jump_sum = 0.0f64;
            if let Some(ref pois) = poisson {
                let n_jumps = pois.sample(&mut path_rng) as u64;
                for _ in 0..n_jumps {
                    let j = draw_jump(&mut path_rng, &t_dist, t_scale, p.jump.c_j);
                    jump_sum += j;
                    jv_day += j * j;
                }
            }
            let sig_prev = sig2_prev.max(0.0).sqrt();
            x += p.mu * dt + sig_prev * db + jump_sum;
            fine[k] = x;
            w_cum += dw;
            iv_left += sig2_prev * dt;

            let sig2_next = if k < m_all {
                let fluct = p.nu * (1.0 - u) * (w_cum * w_cum - u) / 2.0;
                let v = sig2_day + p.gamma * u * u * (p.omega1 + sig2_day)
                    - u * (p.omega2 + sig2_day)
                    + p.beta * iv_left
                    - p.alpha * (x - x_day)
                    + fluct;
                if v < SIGMA_SQ_FLOOR {
                    clamp_events += 1;
                    SIGMA_SQ_FLOOR
                } else {
                    v
                }
            } else {
                // left limit at the day boundary; the fluctuation factor (1-u) is zero
                sig2_day + p.gamma * (p.omega1 + sig2_day) - (p.omega2 + sig2_day)
                    + p.beta * iv_left
                    - p.alpha * (x - x_day)
            };
            if !sig2_next.is_finite() || !x.is_finite() {
                return Err(ArgiError::Simulation {
                    day: d + 1,
                    step: k,
                    message: "state became non-finite".into(),
                });
            }
            iv_trap += dt * (sig2_prev + sig2_next) / 2.0;
            sig2_prev = sig2_next;
            if let Some(ref mut t) = trace {
                if k < m_all {
                    t.push(sig2_next);
                }
            }
        }

        // integer-time reset using the day's trapezoid integrated variance
        let reset = omega + p.gamma * sig2_day + p.beta * iv_trap - p.alpha * (x - x_day);
        sig2_day = if reset < SIGMA_SQ_FLOOR {
            clamp_events += 1;
            SIGMA_SQ_FLOOR
        } else {
            reset
        };
        if let Some(ref mut t) = trace {
            t.push(sig2_day);
        }

        // observed subgrid: endpoints exact, interior ticks with noise
        let n_ticks = cfg.m_obs + 1;
        let mut times = Vec::with_capacity(n_ticks);
        let mut prices = Vec::with_capacity(n_ticks);
        for j in 0..n_ticks {
            let t_abs = d as f64 + j as f64 / cfg.m_obs as f64;
            let mut price = fine[j * stride];
            if j > 0 && j < cfg.m_obs && p.noise_sd > 0.0 {
                price += noise_rng.sample::<f64, _>(StandardNormal) * p.noise_sd;
            }
            times.push(t_abs);
            prices.push(price);
        }
        days.push(TickDay { times, prices });

        opens.push(x);
        true_iv.push(iv_trap);
        true_jv.push(jv_day);
    }

    let true_x = opens.clone();
    let ticks = TickSeries { days, opens };
    let theta0 = structural_to_garch(p)?;
    let mut out = SimOutput {
        ticks,
        true_x,
        true_iv,
        true_jv,
        true_h_next: 0.0,
        spot_var: trace,
        clamp_events,
    };
    let h_path = true_h_path(&out, &theta0)?;
    out.true_h_next = *h_path.last().expect("n_days >= 2");
    Ok(out)
}

/// Thins each day's ticks to `m_obs` increments by uniform subsampling.
/// Endpoints are kept; `m_obs` must divide every day's increment count.
pub fn thin_ticks(ticks: &TickSeries, m_obs: usize) -> Result<TickSeries> {
    if m_obs < 2 {
        return Err(ArgiError::InvalidParameter(format!(
            "m_obs must be >= 2, got {m_obs}"
        )));
    }
    let mut days = Vec::with_capacity(ticks.days.len());
    for (d, day) in ticks.days.iter().enumerate() {
        let m = day.n_increments();
        if m % m_obs != 0 {
            return Err(ArgiError::InvalidParameter(format!(
                "day {}: m_obs={m_obs} does not divide {m} increments",
                d + 1
            )));
        }
        let stride = m / m_obs;
        let times = day.times.iter().step_by(stride).copied().collect();
        let prices = day.prices.iter().step_by(stride).copied().collect();
        days.push(TickDay { times, prices });
    }
    Ok(TickSeries {
        days,
        opens: ticks.opens.clone(),
    })
}

/// Evaluates the true conditional-variance recursion
/// `h_d = omega_g + gamma h_{d-1} + beta_g IV_{d-1} - alpha_g r_{d-1}`
/// on the simulated integrated variances and integer-time returns, seeded at
/// the unconditional mean. Returns `h_2 .. h_{n+1}`; the last entry is the
/// one-day-ahead forecast target.
pub fn true_h_path(out: &SimOutput, theta: &GarchParams) -> Result<Vec<f64>> {
    let n = out.true_iv.len();
    if n < 2 {
        return Err(ArgiError::InsufficientData(
            "true_h_path needs at least 2 days".into(),
        ));
    }
    if out.true_x.len() != n + 1 {
        return Err(ArgiError::InvalidParameter(
            "true_x length must be n_days + 1".into(),
        ));
    }
    let mut h = unconditional_h(theta)?;
    let mut path = Vec::with_capacity(n);
    for d in 0..n {
        let r = out.true_x[d + 1] - out.true_x[d];
        h = theta.omega_g + theta.gamma * h + theta.beta_g * out.true_iv[d] - theta.alpha_g * r;
        path.push(h);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpLaw;

    #[test]
    fn deterministic_linear_decay_day() {
        // nu = alpha = lambda = noise = omega1 = omega2 = 0 with gamma and
        // beta taken to the validation boundary: sigma_t^2 decays linearly to
        // zero intra-day and the day-1 integrated variance is 1/2.
        let p = StructuralParams {
            mu: 0.0,
            omega1: 0.0,
            omega2: 0.0,
            gamma: 1e-12,
            alpha: 0.0,
            beta: 1e-12,
            nu: 0.0,
            jump: JumpLaw {
                intensity: 0.0,
                c_j: 0.04,
                df: 6.0,
            },
            noise_sd: 0.0,
            x0: 0.0,
            sigma0_sq: 1.0,
        };
        let cfg = SimConfig {
            n_days: 2,
            m_all: 1000,
            m_obs: 10,
            seed: 1,
            params: p,
        };
        let out = simulate_with_trace(&cfg).unwrap();
        assert!((out.true_iv[0] - 0.5).abs() < 1e-9);
        let trace = out.spot_var.as_ref().unwrap();
        // quarter through day 1: sigma^2 = 3/4
        assert!((trace[250] - 0.75).abs() < 1e-9);
        assert!((out.true_jv[0]).abs() == 0.0);
    }

    #[test]
    fn no_jumps_means_zero_jump_variation() {
        let cfg = SimConfig {
            n_days: 4,
            m_all: 200,
            m_obs: 50,
            seed: 7,
            params: StructuralParams {
                jump: JumpLaw {
                    intensity: 0.0,
                    c_j: 0.04,
                    df: 6.0,
                },
                noise_sd: 0.0,
                ..StructuralParams::section4()
            },
        };
        let out = simulate(&cfg).unwrap();
        assert!(out.true_jv.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeds_reproduce_and_differ() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 120,
            m_obs: 30,
            seed: 99,
            params: StructuralParams::section4(),
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.ticks, b.ticks);
        assert_eq!(a.true_iv, b.true_iv);
        let c = simulate(&SimConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.ticks, c.ticks);
    }

    #[test]
    fn true_path_independent_of_observation_grid() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 240,
            m_obs: 240,
            seed: 5,
            params: StructuralParams::section4(),
        };
        let fine = simulate(&cfg).unwrap();
        let coarse = simulate(&SimConfig { m_obs: 24, ..cfg }).unwrap();
        assert_eq!(fine.true_x, coarse.true_x);
        assert_eq!(fine.true_iv, coarse.true_iv);
        assert_eq!(fine.true_jv, coarse.true_jv);
        // coarse observed ticks subsample the fine ones in time
        assert_eq!(coarse.ticks.days[0].times[1], 1.0 / 24.0);
    }

    #[test]
    fn opens_match_last_fine_price_exactly() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 60,
            m_obs: 20,
            seed: 11,
            params: StructuralParams::section4(),
        };
        let out = simulate(&cfg).unwrap();
        for d in 0..3 {
            let day = &out.ticks.days[d];
            assert_eq!(*day.prices.first().unwrap(), out.true_x[d]);
            assert_eq!(*day.prices.last().unwrap(), out.true_x[d + 1]);
        }
        out.ticks.validate().unwrap();
    }

    #[test]
    fn riemann_sum_matches_reported_iv_without_jumps() {
        let p = StructuralParams {
            jump: JumpLaw {
                intensity: 0.0,
                c_j: 0.04,
                df: 6.0,
            },
            noise_sd: 0.0,
            ..StructuralParams::section4()
        };
        let m_all = 2000;
        let cfg = SimConfig {
            n_days: 2,
            m_all,
            m_obs: 100,
            seed: 3,
            params: p,
        };
        let out = simulate_with_trace(&cfg).unwrap();
        let trace = out.spot_var.as_ref().unwrap();
        let dt = 1.0 / m_all as f64;
        let sum: f64 = trace[..m_all].iter().map(|s| s * dt).sum();
        assert!(
            (sum - out.true_iv[0]).abs() < 5.0 / m_all as f64,
            "{} vs {}",
            sum,
            out.true_iv[0]
        );
    }

    #[test]
    fn true_h_path_collapsed_recursions() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 100,
            m_obs: 20,
            seed: 21,
            params: StructuralParams::section4(),
        };
        let out = simulate(&cfg).unwrap();
        // theta = (1, 0, 0, 0): h == 1
        let theta = GarchParams {
            omega_g: 1.0,
            gamma: 0.0,
            alpha_g: 0.0,
            beta_g: 0.0,
        };
        let h = true_h_path(&out, &theta).unwrap();
        assert!(h.iter().all(|&v| v == 1.0));

        // gamma = 0: h_d = omega + beta*IV_{d-1} - alpha*r_{d-1} elementwise
        let theta = GarchParams {
            omega_g: 0.3,
            gamma: 0.0,
            alpha_g: 0.2,
            beta_g: 0.4,
        };
        let h = true_h_path(&out, &theta).unwrap();
        for d in 0..3 {
            let r = out.true_x[d + 1] - out.true_x[d];
            let want = 0.3 + 0.4 * out.true_iv[d] - 0.2 * r;
            assert!((h[d] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn true_h_path_matches_hand_unrolled_recursion() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 100,
            m_obs: 20,
            seed: 33,
            params: StructuralParams::section4(),
        };
        let out = simulate(&cfg).unwrap();
        let theta = GarchParams {
            omega_g: 0.7,
            gamma: 0.25,
            alpha_g: 0.15,
            beta_g: 0.35,
        };
        let h = true_h_path(&out, &theta).unwrap();
        // independent unroll
        let r1 = out.true_x[1] - out.true_x[0];
        let r2 = out.true_x[2] - out.true_x[1];
        let r3 = out.true_x[3] - out.true_x[2];
        let h1 = 0.7 / (1.0 - 0.25 - 0.35);
        let h2 = 0.7 + 0.25 * h1 + 0.35 * out.true_iv[0] - 0.15 * r1;
        let h3 = 0.7 + 0.25 * h2 + 0.35 * out.true_iv[1] - 0.15 * r2;
        let h4 = 0.7 + 0.25 * h3 + 0.35 * out.true_iv[2] - 0.15 * r3;
        assert!((h[0] - h2).abs() < 1e-14);
        assert!((h[1] - h3).abs() < 1e-14);
        assert!((h[2] - h4).abs() < 1e-14);
        assert_eq!(out.true_h_next, {
            let theta0 = structural_to_garch(&cfg.params).unwrap();
            *true_h_path(&out, &theta0).unwrap().last().unwrap()
        });
    }

    #[test]
    fn rejects_bad_grid() {
        let cfg = SimConfig {
            n_days: 3,
            m_all: 100,
            m_obs: 30, // does not divide
            seed: 1,
            params: StructuralParams::section4(),
        };
        assert!(simulate(&cfg).is_err());
        let cfg = SimConfig {
            n_days: 1,
            m_all: 100,
            m_obs: 20,
            seed: 1,
            params: StructuralParams::section4(),
        };
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn section4_mean_spot_variance_after_one_day() {
        // E(sigma_1^2) = 1.7462 under the published configuration; checked
        // statistically over 200 replications at 1000 fine steps.
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let reps = 200;
        for rep in 0..reps {
            let cfg = SimConfig {
                n_days: 2,
                m_all: 1000,
                m_obs: 10,
                seed: 9000 + rep,
                params: StructuralParams::section4(),
            };
            let out = simulate_with_trace(&cfg).unwrap();
            let s1 = out.spot_var.as_ref().unwrap()[1000];
            sum += s1;
            sumsq += s1 * s1;
        }
        let mean = sum / reps as f64;
        let var = (sumsq / reps as f64 - mean * mean) * reps as f64 / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - 1.7462).abs() < 3.0 * se,
            "mean {mean} se {se} vs 1.7462"
        );
    }

    #[test]
    fn clamps_are_rare_in_section4_configuration() {
        let mut clamp_free = 0;
        let seeds = 40;
        for s in 0..seeds {
            let cfg = SimConfig {
                n_days: 2,
                m_all: 1000,
                m_obs: 10,
                seed: 40_000 + s,
                params: StructuralParams::section4(),
            };
            let out = simulate(&cfg).unwrap();
            if out.clamp_events == 0 {
                clamp_free += 1;
            }
        }
        assert!(
            clamp_free * 100 >= 95 * seeds,
            "only {clamp_free}/{seeds} clamp-free runs"
        );
    }
}
