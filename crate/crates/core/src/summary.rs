//! Posterior summaries: KDE modes, HPD intervals, direction and MAP indices,
//! and the minimum detectable drift.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{effective_sample_size, split_rhat, PosteriorDraws};

/// Kernel-density settings shared by [`posterior_mode`] and [`p_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdeSettings {
    pub grid_points: usize,
    /// Multiplies the Silverman bandwidth.
    pub bandwidth_adjust: f64,
}

impl Default for KdeSettings {
    fn default() -> Self {
        Self { grid_points: 512, bandwidth_adjust: 1.0 }
    }
}

const MIN_MODE_DRAWS: usize = 100;
const MIN_HPD_DRAWS: usize = 20;
/// Kernel contributions beyond this many bandwidths are dropped (phi(8) ~ 5e-15).
const KERNEL_CUTOFF: f64 = 8.0;

fn sorted(draws: &[f64]) -> Result<Vec<f64>> {
    if draws.iter().any(|d| !d.is_finite()) {
        return Err(Error::Summary("draws contain non-finite values".into()));
    }
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Linear-interpolated quantile of sorted data (type 7).
fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Silverman's rule of thumb `0.9 min(sd, IQR/1.34) n^-0.2`, with the usual
/// fallbacks when the IQR or the sd vanishes.
pub fn silverman_bandwidth(draws: &[f64]) -> Result<f64> {
    let s = sorted(draws)?;
    if s.len() < 2 {
        return Err(Error::Summary("bandwidth needs at least 2 draws".into()));
    }
    Ok(silverman_sorted(&s))
}

fn silverman_sorted(s: &[f64]) -> f64 {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    let mut lo = sd.min(iqr / 1.34);
    if lo <= 0.0 {
        lo = if sd > 0.0 { sd } else if s[0] != 0.0 { s[0].abs() } else { 1.0 };
    }
    0.9 * lo * n.powf(-0.2)
}

/// Gaussian KDE over sorted draws; each evaluation only visits draws within
/// the kernel cutoff.
struct Kde<'a> {
    s: &'a [f64],
    h: f64,
}

impl Kde<'_> {
    fn density(&self, x: f64) -> f64 {
        let reach = KERNEL_CUTOFF * self.h;
        let start = self.s.partition_point(|v| *v < x - reach);
        let mut acc = 0.0;
        for v in &self.s[start..] {
            if *v > x + reach {
                break;
            }
            let z = (x - v) / self.h;
            acc += (-0.5 * z * z).exp();
        }
        acc / (self.s.len() as f64 * self.h * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// (argmax, max) over an evenly spaced grid spanning the draw range.
    fn grid_max(&self, points: usize) -> (f64, f64) {
        let (lo, hi) = (self.s[0], self.s[self.s.len() - 1]);
        let step = (hi - lo) / (points - 1) as f64;
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 0..points {
            let x = lo + step * i as f64;
            let d = self.density(x);
            if d > best.1 {
                best = (x, d);
            }
        }
        best
    }
}

fn kde_setup<'a>(s: &'a [f64], settings: &KdeSettings) -> Result<Kde<'a>> {
    if settings.grid_points < 2 {
        return Err(Error::Summary("KDE grid needs at least 2 points".into()));
    }
    if !(settings.bandwidth_adjust > 0.0) || !settings.bandwidth_adjust.is_finite() {
        return Err(Error::Summary("KDE bandwidth_adjust must be > 0".into()));
    }
    Ok(Kde { s, h: silverman_sorted(s) * settings.bandwidth_adjust })
}

/// Mode as the argmax of a Gaussian KDE on a grid over the draw range.
/// Constant draws return their common value.
pub fn posterior_mode(draws: &[f64], settings: &KdeSettings) -> Result<f64> {
    if draws.len() < MIN_MODE_DRAWS {
        return Err(Error::Summary(format!(
            "posterior mode needs at least {MIN_MODE_DRAWS} draws, got {}",
            draws.len()
        )));
    }
    let s = sorted(draws)?;
    if s[0] == s[s.len() - 1] {
        return Ok(s[0]);
    }
    Ok(kde_setup(&s, settings)?.grid_max(settings.grid_points).0)
}

/// Shortest window of sorted draws holding `ceil(mass * N)` of them; ties go
/// to the lowest start.
pub fn hpd_interval(draws: &[f64], mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Summary(format!("HPD mass must lie in (0, 1), got {mass}")));
    }
    if draws.len() < MIN_HPD_DRAWS {
        return Err(Error::Summary(format!(
            "HPD needs at least {MIN_HPD_DRAWS} draws, got {}",
            draws.len()
        )));
    }
    let s = sorted(draws)?;
    Ok(hpd_sorted(&s, mass))
}

fn hpd_sorted(s: &[f64], mass: f64) -> (f64, f64) {
    let n = s.len();
    // guard against mass * n landing a hair above an integer
    let k = ((mass * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let k = k.min(n);
    let mut best = 0;
    let mut width = f64::INFINITY;
    for i in 0..=(n - k) {
        let w = s[i + k - 1] - s[i];
        if w < width {
            width = w;
            best = i;
        }
    }
    (s[best], s[best + k - 1])
}

/// Share of draws on the median's side of zero; exact zeros count on that side.
pub fn p_direction(draws: &[f64]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Summary("P-direction of an empty sample".into()));
    }
    let s = sorted(draws)?;
    let median = quantile_sorted(&s, 0.5);
    let pos = s.iter().filter(|v| **v > 0.0).count();
    let neg = s.iter().filter(|v| **v < 0.0).count();
    let zero = s.len() - pos - neg;
    let positive_side = if median != 0.0 { median > 0.0 } else { pos >= neg };
    let on_side = if positive_side { pos } else { neg } + zero;
    Ok(on_side as f64 / s.len() as f64)
}

/// Two-sided tail-area analogue `2 (1 - pd)`.
pub fn p_two_sided(pd: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&pd) {
        return Err(Error::Argument(format!("P-direction must lie in [0.5, 1], got {pd}")));
    }
    Ok(2.0 * (1.0 - pd))
}

/// KDE density at zero relative to the largest grid density, in [0, 1].
pub fn p_map(draws: &[f64], settings: &KdeSettings) -> Result<f64> {
    if draws.len() < MIN_MODE_DRAWS {
        return Err(Error::Summary(format!(
            "P-MAP needs at least {MIN_MODE_DRAWS} draws, got {}",
            draws.len()
        )));
    }
    let s = sorted(draws)?;
    if s[0] == s[s.len() - 1] {
        return Ok(if s[0] == 0.0 { 1.0 } else { 0.0 });
    }
    let kde = kde_setup(&s, settings)?;
    let (_, max) = kde.grid_max(settings.grid_points);
    Ok((kde.density(0.0) / max).clamp(0.0, 1.0))
}

/// Drift per cohort that a two-sided 5% test would detect, given the
/// innovation scale and the number of cohorts: `1.96 sqrt(2) sigma / sqrt(T - 1)`.
pub fn mdd_beta(sigma_rw: f64, n_cohorts: usize) -> Result<f64> {
    if n_cohorts < 2 {
        return Err(Error::Argument(format!("MDD needs at least 2 cohorts, got {n_cohorts}")));
    }
    if !(sigma_rw >= 0.0) || !sigma_rw.is_finite() {
        return Err(Error::Argument(format!("sigma_rw must be finite and >= 0, got {sigma_rw}")));
    }
    Ok(1.96 * std::f64::consts::SQRT_2 * sigma_rw / ((n_cohorts - 1) as f64).sqrt())
}

/// Percent change per cohort implied by a log-slope drift.
pub fn drift_percent(beta: f64) -> f64 {
    100.0 * beta.exp_m1()
}

/// MDD in percent from a single sigma_rw value.
pub fn mdd_plugin(sigma_rw: f64, n_cohorts: usize) -> Result<f64> {
    Ok(drift_percent(mdd_beta(sigma_rw, n_cohorts)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddReport {
    /// Mode of the per-draw MDD, in percent.
    pub mdd_percent: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    /// MDD evaluated at the sigma_rw mode.
    pub plugin_percent: f64,
    pub sigma_rw_mode: f64,
    pub n_draws: usize,
    pub n_cohorts: usize,
}

/// MDD per posterior draw of sigma_rw, summarised by KDE mode and HPD.
pub fn mdd(sigma_rw_draws: &[f64], n_cohorts: usize, settings: &KdeSettings, mass: f64) -> Result<MddReport> {
    if sigma_rw_draws.is_empty() {
        return Err(Error::Argument("no sigma_rw draws".into()));
    }
    let percents = sigma_rw_draws
        .iter()
        .map(|s| mdd_plugin(*s, n_cohorts))
        .collect::<Result<Vec<f64>>>()?;
    let sigma_mode = posterior_mode(sigma_rw_draws, settings)?;
    let (hpd_low, hpd_high) = hpd_interval(&percents, mass)?;
    Ok(MddReport {
        mdd_percent: posterior_mode(&percents, settings)?,
        hpd_low,
        hpd_high,
        plugin_percent: mdd_plugin(sigma_mode, n_cohorts)?,
        sigma_rw_mode: sigma_mode,
        n_draws: sigma_rw_draws.len(),
        n_cohorts,
    })
}

/// One row of a summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mode: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub p_direction: f64,
    pub p_two_sided: f64,
    pub p_map: f64,
    pub rhat: f64,
    pub ess: f64,
}

impl ParameterSummary {
    /// Summarise one scalar quantity given per-chain draws.
    pub fn from_chains(name: &str, chains: &[Vec<f64>], settings: &SummarySettings) -> Result<Self> {
        let pooled: Vec<f64> = chains.concat();
        let s = sorted(&pooled)?;
        if s.len() < MIN_MODE_DRAWS {
            return Err(Error::Summary(format!("{name}: need at least {MIN_MODE_DRAWS} draws, got {}", s.len())));
        }
        let (hpd_low, hpd_high) = hpd_sorted(&s, settings.hpd_mass);
        let pd = p_direction(&pooled)?;
        let (rhat, ess) = if chains.len() >= 2 && chains.iter().all(|c| c.len() >= 4) {
            (split_rhat(chains)?.value, effective_sample_size(chains)?.value)
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self {
            name: name.to_string(),
            mode: posterior_mode(&pooled, &settings.kde)?,
            hpd_low,
            hpd_high,
            p_direction: pd,
            p_two_sided: p_two_sided(pd)?,
            p_map: p_map(&pooled, &settings.kde)?,
            rhat,
            ess,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummarySettings {
    pub hpd_mass: f64,
    pub kde: KdeSettings,
    /// Add per-cohort rows for b_t, a_t and gamma_t.
    pub include_cohorts: bool,
}

impl Default for SummarySettings {
    fn default() -> Self {
        Self { hpd_mass: 0.95, kde: KdeSettings::default(), include_cohorts: true }
    }
}

/// Summary table plus the MDD report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub rows: Vec<ParameterSummary>,
    pub mdd: MddReport,
}

pub const SUMMARY_CSV_HEADER: [&str; 9] =
    ["Parameter", "Estimate", "Lower C.I.", "Upper C.I.", "P-direction", "p", "P-MAP", "R-hat", "ESS"];

impl SummaryReport {
    pub fn row(&self, name: &str) -> Option<&ParameterSummary> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn max_rhat(&self) -> f64 {
        self.rows.iter().map(|r| r.rhat).filter(|r| !r.is_nan()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SUMMARY_CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                format!("{:.6}", r.mode),
                format!("{:.6}", r.hpd_low),
                format!("{:.6}", r.hpd_high),
                format!("{:.3}", r.p_direction),
                format!("{:.3}", r.p_two_sided),
                format!("{:.3}", r.p_map),
                format!("{:.4}", r.rhat),
                format!("{:.0}", r.ess),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Rows for `b = exp(log_b)`, `beta` and `sigma_rw` (and per-cohort rows when
/// asked), all on the natural scale, plus the MDD report.
pub fn summarize(draws: &PosteriorDraws, settings: &SummarySettings) -> Result<SummaryReport> {
    let mut rows = vec![
        ParameterSummary::from_chains("b", &draws.map_chains(|r| r[draws.log_b_index()].exp()), settings)?,
        ParameterSummary::from_chains("beta", &draws.column(draws.beta_index()), settings)?,
        ParameterSummary::from_chains("sigma_rw", &draws.column(draws.sigma_index()), settings)?,
    ];
    if settings.include_cohorts {
        let n = draws.n_cohorts();
        for t in 0..n {
            let b_t: Vec<Vec<f64>> =
                draws.log_slope_column(t).into_iter().map(|c| c.into_iter().map(f64::exp).collect()).collect();
            rows.push(ParameterSummary::from_chains(&format!("b[{}]", draws.cohorts()[t]), &b_t, settings)?);
        }
        let names = draws.param_names();
        for (j, name) in names.iter().enumerate().take(2 * n) {
            rows.push(ParameterSummary::from_chains(name, &draws.column(j), settings)?);
        }
    }
    let sigma = draws.column(draws.sigma_index()).concat();
    let mdd = mdd(&sigma, draws.n_cohorts(), &settings.kde, settings.hpd_mass)?;
    Ok(SummaryReport { rows, mdd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{Continuous, ContinuousCDF};
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, Normal};

    fn normal_draws(mean: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(mean, sd).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    fn brute_force_hpd(draws: &[f64], mass: f64) -> (f64, f64) {
        let mut s = draws.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let k = ((mass * n as f64) - 1e-9).ceil() as usize;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n {
            for j in i..n {
                if j - i + 1 >= k {
                    let cand = (s[i], s[j]);
                    if best.is_none_or(|b| cand.1 - cand.0 < b.1 - b.0) {
                        best = Some(cand);
                    }
                    break;
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn hpd_on_a_grid() {
        let d: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(hpd_interval(&d, 0.95).unwrap(), (1.0, 95.0));
    }

    #[test]
    fn hpd_standard_normal() {
        let (lo, hi) = hpd_interval(&normal_draws(0.0, 1.0, 100_000, 1), 0.95).unwrap();
        assert!((lo + 1.96).abs() < 0.05 && (hi - 1.96).abs() < 0.05, "{lo} {hi}");
    }

    #[test]
    fn hpd_constant() {
        assert_eq!(hpd_interval(&[2.5; 50], 0.95).unwrap(), (2.5, 2.5));
    }

    #[test]
    fn hpd_preconditions() {
        assert!(matches!(hpd_interval(&[1.0; 19], 0.95), Err(Error::Summary(_))));
        assert!(hpd_interval(&[1.0; 50], 1.0).is_err());
        assert!(hpd_interval(&[1.0; 50], 0.0).is_err());
    }

    #[test]
    fn mode_examples() {
        // A single KDE mode at this bandwidth has sampling sd near 0.07, so the
        // 0.05 tolerance is applied to the average over 20 samples, and each
        // sample gets a 3-sd bound.
        let modes: Vec<f64> = (0..20)
            .map(|k| posterior_mode(&normal_draws(0.0, 1.0, 100_000, 100 + k), &KdeSettings::default()).unwrap())
            .collect();
        assert!(modes.iter().all(|m| m.abs() < 0.21), "{modes:?}");
        let avg = modes.iter().sum::<f64>() / 20.0;
        assert!(avg.abs() < 0.05, "{avg}");
        assert_eq!(posterior_mode(&[3.0; 200], &KdeSettings::default()).unwrap(), 3.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = Exp::new(1.0).unwrap();
        let d: Vec<f64> = (0..100_000).map(|_| e.sample(&mut rng)).collect();
        let h = silverman_bandwidth(&d).unwrap();
        let m = posterior_mode(&d, &KdeSettings::default()).unwrap();
        // Exp(1) smoothed by N(0, h^2) peaks where phi(u) / Phi(u) = h, x = h (u + h)
        let std = statrs::distribution::Normal::standard();
        let (mut lo, mut hi) = (-5.0f64, 10.0f64);
        for _ in 0..200 {
            let u = 0.5 * (lo + hi);
            if std.pdf(u) / std.cdf(u) > h { lo = u } else { hi = u }
        }
        let smoothed_peak = h * (lo + h);
        assert!((m - smoothed_peak).abs() < h, "mode {m} smoothed peak {smoothed_peak} bandwidth {h}");
        assert!(posterior_mode(&d[..99], &KdeSettings::default()).is_err());
    }

    #[test]
    fn direction_examples() {
        assert_eq!(p_direction(&[0.1, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(p_direction(&[-1.0, -2.0, 1.0, 2.0]).unwrap(), 0.5);
        let pd = p_direction(&normal_draws(1.0, 1.0, 1_000_000, 4)).unwrap();
        assert!((pd - 0.841_344_746).abs() < 0.002, "{pd}");
        // zeros join the median's side
        assert_eq!(p_direction(&[-1.0, 0.0, 0.0, 1.0, 2.0]).unwrap(), 0.8);
        assert!(p_direction(&[]).is_err());
    }

    #[test]
    fn two_sided_examples() {
        assert_eq!(format!("{:.3}", p_two_sided(0.669).unwrap()), "0.662");
        assert_eq!(p_two_sided(1.0).unwrap(), 0.0);
        assert_eq!(format!("{:.3}", p_two_sided(0.936).unwrap()), "0.128");
        assert!(matches!(p_two_sided(0.4), Err(Error::Argument(_))));
        assert!(p_two_sided(1.01).is_err());
    }

    #[test]
    fn p_map_examples() {
        let s = KdeSettings::default();
        let centred: Vec<f64> = normal_draws(0.0, 1.0, 20_000, 5).into_iter().flat_map(|v| [v, -v]).collect();
        assert!(p_map(&centred, &s).unwrap() > 0.99);
        assert!(p_map(&normal_draws(10.0, 0.1, 10_000, 6), &s).unwrap() < 1e-12);
        let v = p_map(&normal_draws(1.0, 1.0, 1_000_000, 7), &s).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 0.02, "{v}");
        assert_eq!(p_map(&[0.0; 100], &s).unwrap(), 1.0);
        assert_eq!(p_map(&[0.3; 100], &s).unwrap(), 0.0);
    }

    #[test]
    fn mdd_examples() {
        let fra = mdd_plugin(0.1064, 195).unwrap();
        assert!((fra - 2.1546).abs() < 0.05, "{fra}");
        let swe = mdd_plugin(0.0423, 257).unwrap();
        assert!((swe - 0.7555).abs() < 0.05, "{swe}");
        assert!(mdd_plugin(1e-12, 100).unwrap() < 1e-9);
        assert!(matches!(mdd_beta(0.1, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn mdd_monotone_on_grids() {
        for t in [2usize, 10, 60, 257] {
            let mut prev = -1.0;
            for i in 0..50 {
                let v = mdd_plugin(0.002 * i as f64, t).unwrap();
                assert!(v > prev || (i == 0 && v == 0.0));
                prev = v;
            }
        }
        for s in [0.01, 0.05, 0.2] {
            let vals: Vec<f64> = (2..300).map(|t| mdd_plugin(s, t).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn mdd_report_from_draws() {
        let draws: Vec<f64> = normal_draws(0.05, 0.005, 4000, 8);
        let r = mdd(&draws, 86, &KdeSettings::default(), 0.95).unwrap();
        assert!(r.mdd_percent > 0.0 && r.hpd_low < r.mdd_percent && r.mdd_percent < r.hpd_high);
        assert_relative_eq!(r.plugin_percent, mdd_plugin(r.sigma_rw_mode, 86).unwrap());
        assert!((r.plugin_percent - r.mdd_percent).abs() < 0.05);
        assert!(mdd(&draws, 1, &KdeSettings::default(), 0.95).is_err());
    }

    #[test]
    fn csv_header_is_stable() {
        let row = ParameterSummary::from_chains(
            "beta",
            &[normal_draws(0.0, 1.0, 200, 9), normal_draws(0.0, 1.0, 200, 10)],
            &SummarySettings::default(),
        )
        .unwrap();
        let report = SummaryReport {
            rows: vec![row],
            mdd: mdd(&normal_draws(0.05, 0.005, 400, 11), 60, &KdeSettings::default(), 0.95).unwrap(),
        };
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "Parameter,Estimate,Lower C.I.,Upper C.I.,P-direction,p,P-MAP,R-hat,ESS");
        assert!(text.lines().nth(1).unwrap().starts_with("beta,"));
        let mut json = Vec::new();
        report.write_json(&mut json).unwrap();
        let back: SummaryReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back.rows[0].name, "beta");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hpd_matches_brute_force(seed in 0u64..10_000, n in 20usize..150, mass in 0.5f64..0.99) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = Exp::new(1.0).unwrap();
            let d: Vec<f64> = (0..n).map(|_| e.sample(&mut rng)).collect();
            let (lo, hi) = hpd_interval(&d, mass).unwrap();
            let (blo, bhi) = brute_force_hpd(&d, mass);
            prop_assert!((hi - lo) <= (bhi - blo) + 1e-12);
            let inside = d.iter().filter(|v| **v >= lo && **v <= hi).count();
            prop_assert!(inside as f64 >= (mass * n as f64).floor());
            // never wider than the equal-tail interval with the same count
            let mut s = d.clone();
            s.sort_by(f64::total_cmp);
            let k = ((mass * n as f64) - 1e-9).ceil() as usize;
            let tail = (n - k) / 2;
            prop_assert!(hi - lo <= s[tail + k - 1] - s[tail] + 1e-12);
        }

        #[test]
        fn summaries_ignore_draw_order(seed in 0u64..10_000) {
            let mut d = normal_draws(0.3, 1.0, 300, seed);
            let s = KdeSettings::default();
            let before = (posterior_mode(&d, &s).unwrap(), hpd_interval(&d, 0.95).unwrap(), p_direction(&d).unwrap(), p_map(&d, &s).unwrap());
            d.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 1));
            let after = (posterior_mode(&d, &s).unwrap(), hpd_interval(&d, 0.95).unwrap(), p_direction(&d).unwrap(), p_map(&d, &s).unwrap());
            prop_assert_eq!(before, after);
        }
    }
}
