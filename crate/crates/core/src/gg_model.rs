//! Gamma-Gompertz hazard, survival-free marginal hazard and expected deaths.
//!
//! Ages are offsets in years from [`AgeGrid::start_age`]; the Poisson rate for
//! the one-year interval `[x, x + 1)` is the marginal hazard at its midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this value of `b * x` the hazard is evaluated with `e^{bx}` factored out.
const STABLE_FORM_THRESHOLD: f64 = 30.0;

/// Ages with sanctioned selection rules.
pub const STANDARD_START_AGES: [u32; 4] = [50, 60, 70, 80];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GompertzCohortParams {
    a: f64,
    b: f64,
    gamma: f64,
}

impl GompertzCohortParams {
    pub fn new(a: f64, b: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite gamma-Gompertz parameters a={a}, b={b}, gamma={gamma}"
            )));
        }
        if a <= 0.0 || b <= 0.0 || gamma < 0.0 {
            return Err(Error::Domain(format!(
                "require a > 0, b > 0, gamma >= 0 (got a={a}, b={b}, gamma={gamma})"
            )));
        }
        Ok(Self { a, b, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// One-year age groups starting at `start_age`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeGrid {
    pub start_age: u32,
    pub n_ages: usize,
}

impl AgeGrid {
    pub fn new(start_age: u32, n_ages: usize) -> Result<Self> {
        if n_ages == 0 {
            return Err(Error::Argument("age grid needs at least one age group".into()));
        }
        Ok(Self { start_age, n_ages })
    }

    /// Whether the start age is one of 50, 60, 70, 80.
    pub fn is_standard(&self) -> bool {
        STANDARD_START_AGES.contains(&self.start_age)
    }

    /// Interval midpoints `x + 0.5` as offsets from the start age.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_ages).map(|x| x as f64 + 0.5)
    }

    pub fn ages(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n_ages as u32).map(move |x| self.start_age + x)
    }
}

/// Hazard of an individual with frailty `z`: `z a e^{bx}`.
pub fn individual_hazard(z: f64, p: &GompertzCohortParams, x: f64) -> Result<f64> {
    if !z.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!("non-finite input z={z}, x={x}")));
    }
    if z < 0.0 || x < 0.0 {
        return Err(Error::Domain(format!("require z >= 0 and x >= 0 (z={z}, x={x})")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(z * p.a * (p.b * x).exp())
}

/// Marginal (cohort) hazard under gamma frailty with mean 1 and variance `gamma`.
pub fn cohort_hazard(p: &GompertzCohortParams, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("age offset must be finite and >= 0, got {x}")));
    }
    Ok(cohort_hazard_unchecked(p.a, p.b, p.gamma, x))
}

/// Same as [`cohort_hazard`] without validation; callers guarantee the domain.
#[inline]
pub(crate) fn cohort_hazard_unchecked(a: f64, b: f64, gamma: f64, x: f64) -> f64 {
    let bx = b * x;
    if bx > STABLE_FORM_THRESHOLD {
        let decay = (-bx).exp();
        a / (decay - gamma * (a / b) * (-bx).exp_m1())
    } else {
        a * bx.exp() / (1.0 + gamma * (a / b) * bx.exp_m1())
    }
}

/// Marginal hazard and its log at each interval midpoint `x + 0.5` of a grid
/// with `h.len()` age groups. `e^{bx} - 1` is carried by recurrence, so the
/// loop costs one `ln_1p` per age.
#[inline]
pub(crate) fn hazard_midpoints(a: f64, b: f64, gamma: f64, h: &mut [f64], ln_h: &mut [f64]) {
    debug_assert_eq!(h.len(), ln_h.len());
    let ln_a = a.ln();
    let ratio = gamma * a / b;
    let step_m1 = b.exp_m1();
    let mut em1 = (0.5 * b).exp_m1();
    for (x, (hx, lx)) in h.iter_mut().zip(ln_h.iter_mut()).enumerate() {
        let bx = b * (x as f64 + 0.5);
        if bx > STABLE_FORM_THRESHOLD {
            let decay = (-bx).exp();
            let den = decay - ratio * (-bx).exp_m1();
            *hx = a / den;
            *lx = ln_a - den.ln();
        } else {
            let l1p = (ratio * em1).ln_1p();
            *hx = a * (1.0 + em1) / (1.0 + ratio * em1);
            *lx = ln_a + bx - l1p;
            em1 = em1 * step_m1 + em1 + step_m1;
        }
    }
}

/// Expected deaths `hazard(x + 0.5) * exposure` for every age group of the grid.
pub fn expected_deaths(
    p: &GompertzCohortParams,
    grid: &AgeGrid,
    exposures: &[f64],
) -> Result<Vec<f64>> {
    if exposures.len() != grid.n_ages {
        return Err(Error::Argument(format!(
            "{} exposures for a grid of {} ages",
            exposures.len(),
            grid.n_ages
        )));
    }
    if let Some(bad) = exposures.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(Error::Argument(format!("exposure must be finite and >= 0, got {bad}")));
    }
    Ok(grid
        .midpoints()
        .zip(exposures)
        .map(|(x, &e)| {
            if e == 0.0 {
                0.0
            } else {
                cohort_hazard_unchecked(p.a, p.b, p.gamma, x) * e
            }
        })
        .collect())
}
