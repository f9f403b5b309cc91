use serde::{Deserialize, Serialize};

const LN_2: f64 = std::f64::consts::LN_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// How the second argument of `Normal(0, 2)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalReading {
    StdDev,
    Variance,
}

/// How the second argument of `Gamma(1, 1/2)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaReading {
    Rate,
    Scale,
}

/// Prior constants. Defaults: half-Normal(0, 1) on `a_t` and `sigma_rw`,
/// Gamma(shape 1, rate 1/2) on `gamma_t`, Normal(0, sd 2) on `log_b` and `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub a_scale: f64,
    pub sigma_rw_scale: f64,
    pub gamma_shape: f64,
    pub gamma_second: f64,
    pub gamma_reading: GammaReading,
    pub normal_second: f64,
    pub normal_reading: NormalReading,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            a_scale: 1.0,
            sigma_rw_scale: 1.0,
            gamma_shape: 1.0,
            gamma_second: 0.5,
            gamma_reading: GammaReading::Rate,
            normal_second: 2.0,
            normal_reading: NormalReading::StdDev,
        }
    }
}

impl PriorConfig {
    pub fn normal_sd(&self) -> f64 {
        match self.normal_reading {
            NormalReading::StdDev => self.normal_second,
            NormalReading::Variance => self.normal_second.sqrt(),
        }
    }

    pub fn gamma_rate(&self) -> f64 {
        match self.gamma_reading {
            GammaReading::Rate => self.gamma_second,
            GammaReading::Scale => 1.0 / self.gamma_second,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("a_scale", self.a_scale),
            ("sigma_rw_scale", self.sigma_rw_scale),
            ("gamma_shape", self.gamma_shape),
            ("gamma_second", self.gamma_second),
            ("normal_second", self.normal_second),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("priors.{name} must be > 0, got {v}"));
            }
        }
        Ok(())
    }

    pub fn ln_a(&self, a: f64) -> f64 {
        half_normal_logpdf(a, self.a_scale)
    }

    pub fn ln_sigma_rw(&self, s: f64) -> f64 {
        half_normal_logpdf(s, self.sigma_rw_scale)
    }

    pub fn ln_gamma_t(&self, g: f64) -> f64 {
        if !(g > 0.0) {
            return f64::NEG_INFINITY;
        }
        let k = self.gamma_shape;
        let rate = self.gamma_rate();
        k * rate.ln() - statrs::function::gamma::ln_gamma(k) + (k - 1.0) * g.ln() - rate * g
    }

    pub fn ln_log_b(&self, x: f64) -> f64 {
        normal_logpdf(x, self.normal_sd())
    }

    pub fn ln_beta(&self, x: f64) -> f64 {
        normal_logpdf(x, self.normal_sd())
    }
}

/// Half-normal on `[0, inf)`; `-inf` below zero.
pub fn half_normal_logpdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 || x.is_nan() {
        return f64::NEG_INFINITY;
    }
    LN_2 - LN_SQRT_2PI - scale.ln() - 0.5 * (x / scale).powi(2)
}

pub fn normal_logpdf(x: f64, sd: f64) -> f64 {
    -LN_SQRT_2PI - sd.ln() - 0.5 * (x / sd).powi(2)
}
