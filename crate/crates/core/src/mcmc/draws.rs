use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::LatentWalk;
use crate::posterior::ModelParameters;

/// Post-warm-up acceptance rates of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainAcceptance {
    pub cohort_blocks: Vec<f64>,
    pub walk_block: f64,
    pub sigma_rw: f64,
    /// Level-and-trend moves with fixed innovations; `None` when disabled.
    pub trend: Option<f64>,
}

/// Retained draws of every chain on the constrained scale.
///
/// Each draw is a row `a[1..T], gamma[1..T], w[1..T], log_b, beta, sigma_rw`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    cohorts: Vec<i32>,
    chains: Vec<Vec<f64>>,
    draws_per_chain: usize,
    acceptance: Vec<ChainAcceptance>,
    seeds: Vec<u64>,
    late_adaptations: u64,
}

impl PosteriorDraws {
    pub(crate) fn new(
        cohorts: Vec<i32>,
        chains: Vec<Vec<f64>>,
        acceptance: Vec<ChainAcceptance>,
        seeds: Vec<u64>,
        late_adaptations: u64,
    ) -> Self {
        let width = 3 * cohorts.len() + 3;
        let draws_per_chain = chains.first().map_or(0, |c| c.len() / width);
        Self { cohorts, chains, draws_per_chain, acceptance, seeds, late_adaptations }
    }

    /// Assemble draws from explicit parameter values, one inner vector per chain.
    pub fn from_parameters(cohorts: Vec<i32>, chains: &[Vec<ModelParameters>]) -> Result<Self> {
        let t = cohorts.len();
        let lengths: Vec<usize> = chains.iter().map(Vec::len).collect();
        if chains.is_empty() || lengths.iter().any(|&n| n != lengths[0] || n == 0) {
            return Err(Error::Argument("chains must be non-empty and of equal length".into()));
        }
        let mut flat = Vec::with_capacity(chains.len());
        for chain in chains {
            let mut rows = Vec::with_capacity(chain.len() * (3 * t + 3));
            for p in chain {
                p.validate()?;
                if p.n_cohorts() != t {
                    return Err(Error::Argument(format!("draw has {} cohorts, expected {t}", p.n_cohorts())));
                }
                push_row(&mut rows, p);
            }
            flat.push(rows);
        }
        Ok(Self::new(cohorts, flat, Vec::new(), Vec::new(), 0))
    }

    pub fn cohorts(&self) -> &[i32] {
        &self.cohorts
    }

    pub fn n_cohorts(&self) -> usize {
        self.cohorts.len()
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.draws_per_chain
    }

    pub fn total_draws(&self) -> usize {
        self.draws_per_chain * self.chains.len()
    }

    pub fn width(&self) -> usize {
        3 * self.cohorts.len() + 3
    }

    pub fn acceptance(&self) -> &[ChainAcceptance] {
        &self.acceptance
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    /// Adaptation calls that reached a frozen adapter; zero for a valid run.
    pub fn late_adaptations(&self) -> u64 {
        self.late_adaptations
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for prefix in ["a", "gamma", "w"] {
            names.extend(self.cohorts.iter().map(|c| format!("{prefix}[{c}]")));
        }
        names.extend(["log_b", "beta", "sigma_rw"].map(String::from));
        names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|n| n == name)
    }

    pub fn log_b_index(&self) -> usize {
        3 * self.cohorts.len()
    }

    pub fn beta_index(&self) -> usize {
        3 * self.cohorts.len() + 1
    }

    pub fn sigma_index(&self) -> usize {
        3 * self.cohorts.len() + 2
    }

    fn row(&self, chain: usize, i: usize) -> &[f64] {
        let w = self.width();
        &self.chains[chain][i * w..(i + 1) * w]
    }

    /// Per-chain series of column `j`.
    pub fn column(&self, j: usize) -> Vec<Vec<f64>> {
        (0..self.n_chains())
            .map(|c| (0..self.draws_per_chain).map(|i| self.row(c, i)[j]).collect())
            .collect()
    }

    pub fn map_chains(&self, f: impl Fn(&[f64]) -> f64) -> Vec<Vec<f64>> {
        (0..self.n_chains())
            .map(|c| (0..self.draws_per_chain).map(|i| f(self.row(c, i))).collect())
            .collect()
    }

    /// Per-chain series of `log b_t` for cohort index `t` (0-based).
    pub fn log_slope_column(&self, t: usize) -> Vec<Vec<f64>> {
        let n = self.cohorts.len();
        self.map_chains(|row| {
            let (log_b, beta) = (row[3 * n], row[3 * n + 1]);
            log_b + (t + 1) as f64 * beta + row[2 * n..2 * n + t + 1].iter().sum::<f64>()
        })
    }

    pub fn parameters(&self, chain: usize, i: usize) -> ModelParameters {
        let n = self.cohorts.len();
        let row = self.row(chain, i);
        ModelParameters {
            a: row[..n].to_vec(),
            gamma: row[n..2 * n].to_vec(),
            walk: LatentWalk {
                log_b: row[3 * n],
                beta: row[3 * n + 1],
                sigma_rw: row[3 * n + 2],
                w: row[2 * n..3 * n].to_vec(),
            },
        }
    }

    /// Parameters of the draw at pooled position `k` (chain-major order).
    pub fn pooled_parameters(&self, k: usize) -> ModelParameters {
        self.parameters(k / self.draws_per_chain, k % self.draws_per_chain)
    }

    /// CSV with columns `chain, draw` followed by the parameter names.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["chain".to_string(), "draw".to_string()];
        header.extend(self.param_names());
        out.write_record(&header)?;
        for c in 0..self.n_chains() {
            for i in 0..self.draws_per_chain {
                let mut record = vec![c.to_string(), i.to_string()];
                record.extend(self.row(c, i).iter().map(|v| format!("{v:e}")));
                out.write_record(&record)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Read draws written by [`PosteriorDraws::write_csv`]; cohort labels come
    /// from the `a[...]` columns.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let n_params = header.len().saturating_sub(2);
        if n_params < 6 || (n_params - 3) % 3 != 0 || &header[0] != "chain" || &header[1] != "draw" {
            return Err(Error::Parse { line: 1, message: "unexpected draws header".into() });
        }
        let t = (n_params - 3) / 3;
        let cohorts = (0..t)
            .map(|i| {
                header[2 + i]
                    .strip_prefix("a[")
                    .and_then(|h| h.strip_suffix(']'))
                    .and_then(|c| c.parse::<i32>().ok())
                    .ok_or_else(|| Error::Parse { line: 1, message: format!("bad column {:?}", &header[2 + i]) })
            })
            .collect::<Result<Vec<i32>>>()?;
        let mut chains: Vec<Vec<f64>> = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            let chain: usize = rec[0]
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("bad chain index {:?}", &rec[0]) })?;
            while chains.len() <= chain {
                chains.push(Vec::new());
            }
            for field in rec.iter().skip(2) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse { line, message: format!("bad value {field:?}") })?;
                chains[chain].push(v);
            }
        }
        if chains.is_empty() || chains.iter().any(|c| c.len() != chains[0].len() || c.is_empty()) {
            return Err(Error::Argument("draws file needs equal-length, non-empty chains".into()));
        }
        Ok(Self::new(cohorts, chains, Vec::new(), Vec::new(), 0))
    }
}

pub(crate) fn push_row(rows: &mut Vec<f64>, p: &ModelParameters) {
    rows.extend_from_slice(&p.a);
    rows.extend_from_slice(&p.gamma);
    rows.extend_from_slice(&p.walk.w);
    rows.extend_from_slice(&[p.walk.log_b, p.walk.beta, p.walk.sigma_rw]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64) -> ModelParameters {
        ModelParameters {
            a: vec![0.05 + k, 0.04],
            gamma: vec![0.1, 0.2 + k],
            walk: LatentWalk { log_b: -2.2, beta: k, sigma_rw: 0.03, w: vec![0.0, 0.01 - k] },
        }
    }

    #[test]
    fn csv_round_trip_keeps_labels_and_values() {
        let chains = vec![vec![params(0.0), params(1e-3)], vec![params(2e-3), params(1.0 / 3.0)]];
        let d = PosteriorDraws::from_parameters(vec![1901, 1902], &chains).unwrap();
        assert_eq!(d.param_names()[..2], ["a[1901]".to_string(), "a[1902]".to_string()]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = PosteriorDraws::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.cohorts(), &[1901, 1902]);
        assert_eq!(back.parameters(1, 1), params(1.0 / 3.0));
        assert_eq!(back.column(back.beta_index()), d.column(d.beta_index()));
    }

    #[test]
    fn bad_headers_rejected() {
        let text = "chain,draw,a[x],gamma[x],w[x],log_b,beta,sigma_rw\n0,0,1,1,1,1,1,1\n";
        assert!(matches!(PosteriorDraws::read_csv(text.as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(PosteriorDraws::read_csv("foo,bar\n".as_bytes()).is_err());
    }
}
