//! Fits one simulated desk-scale dataset and reports timing and convergence.

use std::time::Instant;

use aging_rate::{generate_dataset, run_chains, split_rhat, effective_sample_size, PriorConfig, SamplerConfig, TruthScenario};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let iter: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(6000);
    let warm: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let (data_seed, chain_seed) = if std::env::var("SCAN").is_ok() { (1000 + seed, 7 + seed) } else { (seed, seed) };
    let sim = generate_dataset(&TruthScenario { seed: data_seed, ..TruthScenario::default() }).unwrap();
    let env = |k: &str, d: usize| std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(d);
    let base = SamplerConfig::default();
    let cfg = SamplerConfig {
        n_iter: iter,
        n_warmup: warm,
        seed: chain_seed,
        cohort_sweeps_per_iter: env("SWEEPS", base.cohort_sweeps_per_iter),
            log_cohort_sweeps_per_iter: env("LOG_SWEEPS", base.log_cohort_sweeps_per_iter),
        ..base
    };
    let t0 = Instant::now();
    let draws = run_chains(&sim.dataset, &cfg, &PriorConfig::default()).unwrap();
    println!("elapsed {:.2?}", t0.elapsed());
    if let Ok(path) = std::env::var("DRAWS_OUT") {
        draws.write_csv(std::fs::File::create(path).unwrap()).unwrap();
    }
    let names = draws.param_names();
    let mut worst = (0.0, String::new());
    let mut min_ess = (f64::INFINITY, String::new());
    for (j, name) in names.iter().enumerate() {
        let chains = draws.column(j);
        let r = split_rhat(&chains).unwrap().value;
        let e = effective_sample_size(&chains).unwrap().value;
        if r > worst.0 { worst = (r, name.clone()); }
        if r > 1.02 { println!("  {name}: rhat {r:.4} ess {e:.0}"); }
        if e < min_ess.0 { min_ess = (e, name.clone()); }
    }
    let mut worst_b = 0.0f64;
    for t in 0..draws.n_cohorts() {
        worst_b = worst_b.max(split_rhat(&draws.log_slope_column(t)).unwrap().value);
    }
    println!("max rhat log b_t {worst_b:.4}");
    for t in [0usize, 30, 59] {
        let col: Vec<f64> = draws.log_slope_column(t).concat();
        let m = col.iter().sum::<f64>() / col.len() as f64;
        println!("log b[{t}] mean {:.4} truth {:.4}", m, sim.truth.slopes()[t].ln());
    }
    let s = draws.column(draws.sigma_index()).concat();
    println!("sigma mean {:.4}", s.iter().sum::<f64>() / s.len() as f64);
    println!("max rhat {:.4} ({}) min ess {:.0} ({})", worst.0, worst.1, min_ess.0, min_ess.1);
    if std::env::var("DUMP").is_ok() {
        let j: usize = draws.column_index(&worst.1).unwrap();
        let n = draws.n_cohorts();
        let t = j % n;
        for (label, idx) in [("a", t), ("gamma", n + t), ("w", 2 * n + t)] {
            let cols = draws.column(idx);
            for (c, col) in cols.iter().enumerate() {
                let m = col.iter().sum::<f64>() / col.len() as f64;
                let mn = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let mx = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                println!("{label}[{t}] chain {c}: mean {m:.5} min {mn:.5} max {mx:.5}");
            }
        }
        for c in 0..draws.n_chains() {
            let lp: Vec<f64> = (0..draws.draws_per_chain())
                .map(|i| aging_rate::log_posterior(&draws.parameters(c, i), &sim.dataset, &PriorConfig::default()).unwrap())
                .collect();
            let m = lp.iter().sum::<f64>() / lp.len() as f64;
            let mx = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!("chain {c}: mean logpost {m:.2} max {mx:.2}");
        }
        for t in 0..n {
            let v: Vec<f64> = (0..draws.n_chains())
                .map(|c| aging_rate::posterior::cohort_log_likelihood(&draws.parameters(c, draws.draws_per_chain() - 1), &sim.dataset, t).unwrap())
                .collect();
            let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread > 5.0 { println!("cohort {t}: {v:.1?}"); }
        }
        {
            let last = draws.draws_per_chain() - 1;
            let p0 = draws.parameters(0, last);
            let p1 = draws.parameters(1, last);
            let (s0, s1) = (p0.slopes(), p1.slopes());
            for k in 0..=10 {
                let f = k as f64 / 10.0;
                let mix = |x: f64, y: f64| (x.ln() * (1.0 - f) + y.ln() * f).exp();
                let mut q = p0.clone();
                q.a[t] = mix(p0.a[t], p1.a[t]);
                q.gamma[t] = mix(p0.gamma[t], p1.gamma[t]);
                let b = mix(s0[t], s1[t]);
                let dw = b.ln() - s0[t].ln();
                q.walk.w[t] += dw;
                if t + 1 < n { q.walk.w[t + 1] -= dw; }
                let ll = aging_rate::log_posterior(&q, &sim.dataset, &PriorConfig::default()).unwrap();
                println!("f={f:.1} a={:.5} g={:.4} b={:.5} ll={ll:.2}", q.a[t], q.gamma[t], b);
            }
        }
        println!("truth a {:.5} gamma {:.5} w {:.5}", sim.truth.a[t], sim.truth.gamma[t], sim.truth.walk.w[t]);
    }
}

#[allow(dead_code)]
fn unused() {}
