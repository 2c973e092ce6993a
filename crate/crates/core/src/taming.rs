//! The taming function `g_N`.
//!
//! `g_N(r) = G(r − N)/ν` where `G(s) = ∫₀^s θ(t) dt` for `s ∈ [0, 1]`,
//! `G(s) = s − 1/2` for `s ≥ 1` and `G = 0` below zero. The ramp
//! `θ(s) = σ(s)/(σ(s) + σ(1−s))`, `σ(x) = e^{-1/x}` for `x > 0`, is the
//! standard C∞ transition from 0 to 1 with `θ(s) + θ(1−s) = 1`, so
//! `∫₀¹ θ = 1/2` and the two branches join smoothly at `r = N + 1`.
//!
//! Consequences used throughout the crate:
//! - `g_N = 0` on `[0, N]` and `g_N(r) = (r − N − 1/2)/ν` on `[N+1, ∞)`;
//! - `0 ≤ g'_N = θ(r − N)/ν ≤ 1/ν`;
//! - `g_N(r) ≥ (r − N − 1/2)/ν` because `G(s) − (s − 1/2) = ∫_s^1 (1 − θ) ≥ 0`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of nodes in the blend-region lookup table.
pub const TABLE_POINTS: usize = 4096;

const GAUSS_POINTS: usize = 20;

/// The C∞ ramp `θ` on the real line (0 below 0, 1 above 1).
pub fn ramp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        // σ(s)/(σ(s)+σ(1−s)) = 1/(1 + exp(1/s − 1/(1−s)))
        1.0 / (1.0 + (1.0 / s - 1.0 / (1.0 - s)).exp())
    }
}

fn gauss_legendre() -> &'static ([f64; GAUSS_POINTS], [f64; GAUSS_POINTS]) {
    static RULE: OnceLock<([f64; GAUSS_POINTS], [f64; GAUSS_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut nodes = [0.0; GAUSS_POINTS];
        let mut weights = [0.0; GAUSS_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // three-term recurrence for P_n and P_{n-1}
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn gauss_integral(a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * ramp(mid + half * x))
        .sum::<f64>()
        * half
}

/// `G(s) = ∫₀^s θ` by composite 20-point Gauss–Legendre quadrature,
/// using `G(1−s) = G(s) + 1/2 − s` above `s = 1/2`.
pub fn ramp_integral_quadrature(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return s - 0.5;
    }
    if s > 0.5 {
        let t = 1.0 - s;
        return ramp_integral_quadrature(t) + 0.5 - t;
    }
    let panels = ((s * 64.0).ceil() as usize).max(1);
    let h = s / panels as f64;
    (0..panels)
        .map(|p| gauss_integral(p as f64 * h, (p + 1) as f64 * h))
        .sum()
}

struct RampTable {
    values: Vec<f64>,
    slopes: Vec<f64>,
    h: f64,
}

fn table() -> &'static RampTable {
    static TABLE: OnceLock<RampTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TABLE_POINTS;
        let h = 1.0 / (n - 1) as f64;
        let node = |i: usize| i as f64 / (n - 1) as f64;
        let mut values = vec![0.0; n];
        for i in 0..n / 2 {
            values[i + 1] = values[i] + gauss_integral(node(i), node(i + 1));
        }
        for i in 0..n / 2 {
            values[n - 1 - i] = values[i] + 0.5 - node(i);
        }
        values[n - 1] = 0.5;
        let slopes = (0..n).map(|i| ramp(node(i))).collect();
        RampTable { values, slopes, h }
    })
}

/// `G(s)` from the lookup table with monotone cubic Hermite interpolation.
fn ramp_integral_table(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return s - 0.5;
    }
    let t = table();
    let pos = s / t.h;
    let i = (pos.floor() as usize).min(TABLE_POINTS - 2);
    let u = pos - i as f64;
    let (y0, y1) = (t.values[i], t.values[i + 1]);
    let delta = (y1 - y0) / t.h;
    if delta <= 0.0 {
        return y0;
    }
    let (mut m0, mut m1) = (t.slopes[i], t.slopes[i + 1]);
    // Fritsch–Carlson limiter keeps the interpolant monotone
    let (a, b) = (m0 / delta, m1 / delta);
    let r = a * a + b * b;
    if r > 9.0 {
        let tau = 3.0 / r.sqrt();
        m0 *= tau;
        m1 *= tau;
    }
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let v = h00 * y0 + h10 * t.h * m0 + h01 * y1 + h11 * t.h * m1;
    v.clamp(y0, y1)
}

/// Taming profile `g_N` for level `N` and viscosity `ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamingProfile {
    level: f64,
    nu: f64,
    enabled: bool,
}

impl TamingProfile {
    pub fn new(level: f64, nu: f64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::config(format!("taming.N must be finite and >= 0, got {level}")));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::config(format!("physics.nu must be positive, got {nu}")));
        }
        Ok(Self {
            level,
            nu,
            enabled: true,
        })
    }

    /// Untamed profile: `g ≡ 0`.
    pub fn disabled(nu: f64) -> Self {
        Self {
            level: f64::INFINITY,
            nu,
            enabled: false,
        }
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Level above which `|u|²` can switch the taming term on
    /// (`∞` when disabled).
    pub fn activation_level(&self) -> f64 {
        if self.enabled {
            self.level
        } else {
            f64::INFINITY
        }
    }

    fn check(r: f64) -> Result<()> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!("g_N evaluated at negative argument {r}")));
        }
        Ok(())
    }

    pub fn eval_g(&self, r: f64) -> Result<f64> {
        Self::check(r)?;
        Ok(self.g_unchecked(r))
    }

    pub fn eval_g_prime(&self, r: f64) -> Result<f64> {
        Self::check(r)?;
        if !self.enabled {
            return Ok(0.0);
        }
        Ok(ramp(r - self.level) / self.nu)
    }

    /// `g_N` through direct quadrature instead of the lookup table.
    pub fn eval_g_quadrature(&self, r: f64) -> Result<f64> {
        Self::check(r)?;
        if !self.enabled || r <= self.level {
            return Ok(0.0);
        }
        let s = r - self.level;
        if s >= 1.0 {
            return Ok((r - self.level - 0.5) / self.nu);
        }
        Ok(ramp_integral_quadrature(s) / self.nu)
    }

    /// Hot-path evaluation; negative arguments are treated as zero.
    #[inline]
    pub fn g_unchecked(&self, r: f64) -> f64 {
        if !self.enabled || r <= self.level {
            return 0.0;
        }
        let s = r - self.level;
        if s >= 1.0 {
            (r - self.level - 0.5) / self.nu
        } else {
            ramp_integral_table(s) / self.nu
        }
    }

    /// Pointwise `g_N` over a grid of `|u|²` values. Round-off negatives are clamped to 0.
    pub fn eval_g_field(&self, speed_sq: &[f64]) -> Vec<f64> {
        speed_sq.iter().map(|&r| self.g_unchecked(r.max(0.0))).collect()
    }
}
