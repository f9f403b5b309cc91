//! Unit-root (ADF) and stationarity (KPSS) tests for slope series.
//!
//! The two tests have opposite nulls: ADF assumes a unit root, KPSS assumes
//! level stationarity. P-values are reported as brackets read off the
//! critical-value tables.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_OBS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "ADF")]
    Adf,
    #[serde(rename = "KPSS")]
    Kpss,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Adf => "ADF",
            TestKind::Kpss => "KPSS",
        })
    }
}

/// Where the p-value falls relative to the tabulated levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueBracket {
    #[serde(rename = "<=0.01")]
    AtMost01,
    #[serde(rename = "0.01-0.05")]
    From01To05,
    #[serde(rename = "0.05-0.10")]
    From05To10,
    #[serde(rename = ">=0.10")]
    AtLeast10,
}

impl PValueBracket {
    fn of(p: f64) -> Self {
        if p <= 0.01 {
            Self::AtMost01
        } else if p < 0.05 {
            Self::From01To05
        } else if p < 0.10 {
            Self::From05To10
        } else {
            Self::AtLeast10
        }
    }
}

impl fmt::Display for PValueBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AtMost01 => "<=0.01",
            Self::From01To05 => "0.01-0.05",
            Self::From05To10 => "0.05-0.10",
            Self::AtLeast10 => ">=0.10",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityResult {
    pub test: TestKind,
    pub statistic: f64,
    /// ADF: augmentation lags; KPSS: Bartlett bandwidth.
    pub lags: usize,
    pub n_obs: usize,
    /// Interpolated between tabulated levels and clamped to [0.01, 0.10].
    pub p_value: f64,
    pub bracket: PValueBracket,
    pub reject_5pct: bool,
    /// Constant (or otherwise rank-deficient) input.
    pub degenerate: bool,
}

/// Linear interpolation of a p-value between tabulated (critical value, level)
/// pairs ordered from least to most extreme; clamps at the ends.
fn interpolate_p(stat: f64, table: &[(f64, f64)], extreme_is_low: bool) -> f64 {
    let beyond = |s: f64, c: f64| if extreme_is_low { s <= c } else { s >= c };
    if !beyond(stat, table[0].0) {
        return table[0].1;
    }
    for w in table.windows(2) {
        let ((c0, p0), (c1, p1)) = (w[0], w[1]);
        if !beyond(stat, c1) {
            return p0 + (stat - c0) / (c1 - c0) * (p1 - p0);
        }
    }
    table[table.len() - 1].1
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.len() < MIN_OBS {
        return Err(Error::Diagnostic(format!(
            "stationarity tests need at least {MIN_OBS} observations, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diagnostic("series contains non-finite values".into()));
    }
    Ok(())
}

/// `floor(12 (n / 100)^(1/4))`.
pub fn adf_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Constant-only MacKinnon (2010) response surface: (level, tau_inf, b1, b2, b3).
const ADF_SURFACE: [(f64, [f64; 4]); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

/// ADF critical value at level 0.01, 0.05 or 0.10 for `n_obs` regression rows.
pub fn adf_critical_value(level: f64, n_obs: usize) -> Option<f64> {
    let t = n_obs as f64;
    ADF_SURFACE
        .iter()
        .find(|(l, _)| (*l - level).abs() < 1e-12)
        .map(|(_, c)| c[0] + c[1] / t + c[2] / (t * t) + c[3] / (t * t * t))
}

struct Ols {
    coef: DVector<f64>,
    se0: f64,
    rss: f64,
    rows: usize,
}

/// OLS with a standard error for the first coefficient; `None` when the
/// design is rank-deficient or the fit is exact.
fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<Ols> {
    let (rows, k) = x.shape();
    if rows <= k {
        return None;
    }
    let xtx = x.transpose() * x;
    let chol = xtx.cholesky()?;
    let coef = chol.solve(&(x.transpose() * y));
    let resid = y - x * &coef;
    let rss = resid.dot(&resid);
    let s2 = rss / (rows - k) as f64;
    let inv = chol.inverse();
    let se0 = (s2 * inv[(0, 0)]).sqrt();
    (se0 > 0.0 && se0.is_finite()).then_some(Ols { coef, se0, rss, rows })
}

/// Rows `t` in `start..n` of `dy_t = rho y_{t-1} + c + sum_j phi_j dy_{t-j}`,
/// with the lagged level in column 0.
fn adf_design(y: &[f64], lags: usize, start: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = y.len();
    let rows = n - start;
    let dy = |t: usize| y[t] - y[t - 1];
    let x = DMatrix::from_fn(rows, 2 + lags, |r, c| {
        let t = start + r;
        match c {
            0 => y[t - 1],
            1 => 1.0,
            j => dy(t - (j - 1)),
        }
    });
    let target = DVector::from_fn(rows, |r, _| dy(start + r));
    (x, target)
}

fn degenerate(test: TestKind, n_obs: usize, lags: usize) -> StationarityResult {
    let p_value = 0.10;
    StationarityResult {
        test,
        statistic: 0.0,
        lags,
        n_obs,
        p_value,
        bracket: PValueBracket::of(p_value),
        reject_5pct: false,
        degenerate: true,
    }
}

/// Augmented Dickey-Fuller test with a constant and no trend. The lag order
/// minimises AIC over `0..=max_lag` on a common sample; the chosen model is
/// then refitted on all available rows.
pub fn adf_test(series: &[f64], max_lag: Option<usize>) -> Result<StationarityResult> {
    check_series(series)?;
    let n = series.len();
    let pmax = max_lag.unwrap_or_else(|| adf_max_lag(n)).min(n.saturating_sub(MIN_OBS / 2).max(1) - 1);
    if series.iter().all(|v| *v == series[0]) {
        return Ok(degenerate(TestKind::Adf, n - 1, 0));
    }

    let common_start = pmax + 1;
    let mut best: Option<(usize, f64)> = None;
    for p in 0..=pmax {
        let (x, y) = adf_design(series, p, common_start);
        if let Some(fit) = ols(&x, &y) {
            let rows = fit.rows as f64;
            let aic = rows * (fit.rss / rows).ln() + 2.0 * (p + 2) as f64;
            if best.is_none_or(|(_, a)| aic < a) {
                best = Some((p, aic));
            }
        }
    }
    let Some((lags, _)) = best else {
        return Ok(degenerate(TestKind::Adf, n - 1, 0));
    };
    let (x, y) = adf_design(series, lags, lags + 1);
    let Some(fit) = ols(&x, &y) else {
        return Ok(degenerate(TestKind::Adf, n - 1, lags));
    };
    let stat = fit.coef[0] / fit.se0;
    let table: Vec<(f64, f64)> = [0.10, 0.05, 0.01]
        .iter()
        .map(|&l| (adf_critical_value(l, fit.rows).expect("tabulated level"), l))
        .collect();
    let p_value = interpolate_p(stat, &table, true);
    Ok(StationarityResult {
        test: TestKind::Adf,
        statistic: stat,
        lags,
        n_obs: fit.rows,
        p_value,
        bracket: PValueBracket::of(p_value),
        reject_5pct: stat <= table[1].0,
        degenerate: false,
    })
}

/// Bandwidth rule for the KPSS long-run variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpssBandwidth {
    /// `floor(n^(2/9))`.
    #[default]
    PowerRule,
    /// Newey-West automatic selection (Hobijn, Franses and Ooms).
    NeweyWestAuto,
    Fixed(usize),
}

/// Level KPSS critical values: (statistic, level).
const KPSS_TABLE: [(f64, f64); 4] = [(0.347, 0.10), (0.463, 0.05), (0.574, 0.025), (0.739, 0.01)];

fn autocov(e: &[f64], lag: usize) -> f64 {
    e[lag..].iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / e.len() as f64
}

fn kpss_lags(e: &[f64], rule: KpssBandwidth) -> usize {
    let n = e.len();
    let lags = match rule {
        KpssBandwidth::Fixed(l) => l,
        KpssBandwidth::PowerRule => (n as f64).powf(2.0 / 9.0).floor() as usize,
        KpssBandwidth::NeweyWestAuto => {
            let pilot = (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize;
            let g: Vec<f64> = (0..=pilot).map(|j| autocov(e, j)).collect();
            let s0 = g[0] + 2.0 * g[1..].iter().sum::<f64>();
            let s1 = 2.0 * g.iter().enumerate().skip(1).map(|(j, v)| j as f64 * v).sum::<f64>();
            let gamma = 1.1447 * ((s1 / s0).powi(2)).powf(1.0 / 3.0);
            let l = gamma * (n as f64).powf(1.0 / 3.0);
            if l.is_finite() { l.floor() as usize } else { 0 }
        }
    };
    lags.min(n - 1)
}

/// KPSS test of level stationarity with a Bartlett-kernel long-run variance.
pub fn kpss_test(series: &[f64], bandwidth: KpssBandwidth) -> Result<StationarityResult> {
    check_series(series)?;
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let g0 = autocov(&e, 0);
    if g0 <= 0.0 {
        return Ok(degenerate(TestKind::Kpss, n, 0));
    }
    let lags = kpss_lags(&e, bandwidth);
    let lrv = g0
        + 2.0 * (1..=lags).map(|s| (1.0 - s as f64 / (lags + 1) as f64) * autocov(&e, s)).sum::<f64>();
    if !(lrv > 0.0) {
        return Ok(degenerate(TestKind::Kpss, n, lags));
    }
    let mut partial = 0.0;
    let mut ssq = 0.0;
    for v in &e {
        partial += v;
        ssq += partial * partial;
    }
    let stat = ssq / ((n * n) as f64 * lrv);
    let p_value = interpolate_p(stat, &KPSS_TABLE, false);
    Ok(StationarityResult {
        test: TestKind::Kpss,
        statistic: stat,
        lags,
        n_obs: n,
        p_value,
        bracket: PValueBracket::of(p_value),
        reject_5pct: stat >= KPSS_TABLE[1].0,
        degenerate: false,
    })
}

/// First differences.
pub fn difference(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Differences of logs, e.g. cohort-to-cohort changes in log slope.
pub fn log_difference(series: &[f64]) -> Result<Vec<f64>> {
    if series.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log differences need positive values".into()));
    }
    Ok(series.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

/// Writes one row per result: label, test, statistic, lags, n, p, bracket, reject, degenerate.
pub fn write_results_csv<W: Write>(writer: W, rows: &[(String, StationarityResult)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["series", "test", "statistic", "lags", "n_obs", "p_value", "bracket", "reject_5pct", "degenerate"])?;
    for (label, r) in rows {
        w.write_record([
            label.clone(),
            r.test.to_string(),
            format!("{:.6}", r.statistic),
            r.lags.to_string(),
            r.n_obs.to_string(),
            format!("{:.4}", r.p_value),
            r.bracket.to_string(),
            r.reject_5pct.to_string(),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    fn walk(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        noise(n, rng)
            .into_iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    #[test]
    fn critical_values_at_large_n() {
        assert!((adf_critical_value(0.05, 100_000).unwrap() + 2.86157).abs() < 1e-4);
        assert!(adf_critical_value(0.2, 100).is_none());
        assert_eq!(adf_max_lag(200), 14);
        assert_eq!(adf_max_lag(100), 12);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let adf = adf_test(&[1.5; 50], None).unwrap();
        assert!(adf.degenerate && !adf.reject_5pct);
        let kpss = kpss_test(&[1.5; 50], KpssBandwidth::default()).unwrap();
        assert!(kpss.degenerate && !kpss.reject_5pct);
        assert_eq!(kpss.statistic, 0.0);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(adf_test(&[1.0; 19], None), Err(Error::Diagnostic(_))));
        assert!(matches!(kpss_test(&[1.0; 5], KpssBandwidth::default()), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn brackets_follow_tables() {
        let p = interpolate_p(0.40, &KPSS_TABLE, false);
        assert!(p < 0.10 && p > 0.05);
        assert_eq!(PValueBracket::of(p), PValueBracket::From05To10);
        assert_eq!(interpolate_p(0.1, &KPSS_TABLE, false), 0.10);
        assert_eq!(interpolate_p(2.0, &KPSS_TABLE, false), 0.01);
        assert_eq!(PValueBracket::of(0.01).to_string(), "<=0.01");
    }

    #[test]
    fn kpss_matches_hand_computation() {
        // lag 0: eta = sum S_t^2 / (n^2 * mean(e^2))
        let y: Vec<f64> = (0..25).map(|i| ((i * 7) % 11) as f64).collect();
        let n = y.len() as f64;
        let m = y.iter().sum::<f64>() / n;
        let e: Vec<f64> = y.iter().map(|v| v - m).collect();
        let mut s = 0.0;
        let ssq: f64 = e.iter().map(|v| { s += v; s * s }).sum();
        let g0 = e.iter().map(|v| v * v).sum::<f64>() / n;
        let r = kpss_test(&y, KpssBandwidth::Fixed(0)).unwrap();
        assert!((r.statistic - ssq / (n * n * g0)).abs() < 1e-12);
    }

    #[test]
    fn adf_matches_dickey_fuller_by_hand() {
        // lag 0 regression on a short AR(1)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut y = vec![0.0];
        for e in noise(59, &mut rng) {
            let last = *y.last().unwrap();
            y.push(0.5 * last + e);
        }
        let r = adf_test(&y, Some(0)).unwrap();
        let (xs, dys): (Vec<f64>, Vec<f64>) = y.windows(2).map(|w| (w[0], w[1] - w[0])).unzip();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, dys.iter().sum::<f64>() / n);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&dys).map(|(x, d)| (x - mx) * (d - my)).sum();
        let rho = sxy / sxx;
        let rss: f64 = xs.iter().zip(&dys).map(|(x, d)| (d - my - rho * (x - mx)).powi(2)).sum();
        let t = rho / (rss / (n - 2.0) / sxx).sqrt();
        assert!((r.statistic - t).abs() < 1e-9, "{} vs {t}", r.statistic);
        assert_eq!(r.lags, 0);
    }

    #[test]
    fn random_walk_versus_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut adf_rw, mut adf_noise, mut kpss_rw, mut kpss_noise) = (0, 0, 0, 0);
        let reps = 200;
        for _ in 0..reps {
            let rw = walk(200, &mut rng);
            let e = noise(200, &mut rng);
            adf_rw += adf_test(&rw, None).unwrap().reject_5pct as u32;
            adf_noise += adf_test(&e, None).unwrap().reject_5pct as u32;
            kpss_rw += kpss_test(&rw, KpssBandwidth::default()).unwrap().reject_5pct as u32;
            kpss_noise += (kpss_test(&e, KpssBandwidth::default()).unwrap().p_value >= 0.10) as u32;
        }
        assert!(adf_rw < 25, "ADF rejects on random walks {adf_rw}/{reps}");
        assert!(adf_noise > 190, "ADF power {adf_noise}/{reps}");
        assert!(kpss_rw > 185, "KPSS power {kpss_rw}/{reps}");
        assert!(kpss_noise >= 170, "KPSS fails to reject at 10% on noise {kpss_noise}/{reps}");
    }

    #[test]
    fn log_difference_checks_domain() {
        assert!(log_difference(&[1.0, 0.0]).is_err());
        let d = log_difference(&[1.0, std::f64::consts::E]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert_eq!(difference(&[1.0, 4.0, 2.0]), vec![3.0, -2.0]);
    }

    #[test]
    fn csv_export() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = kpss_test(&noise(50, &mut rng), KpssBandwidth::NeweyWestAuto).unwrap();
        let mut out = Vec::new();
        write_results_csv(&mut out, &[("x".into(), r)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("series,test,statistic"));
        assert!(text.lines().nth(1).unwrap().starts_with("x,KPSS,"));
    }
}
