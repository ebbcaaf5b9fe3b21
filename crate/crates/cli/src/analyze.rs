//! SA-factor reports and partition rankings for a bundle.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Result};
use serde::{Deserialize, Serialize};
use stochascope_core::safactor::DEFAULT_DELTAS;
use stochascope_core::{make_partition, SAReport, SaAnalyzer, Scheme};

use crate::bundle::ProblemBundle;
use crate::io::{atomic_write, csv_bytes, num, write_json};
use crate::Format;

pub const ANALYSIS_SCHEMA: &str = "stochascope.analysis.v1";
pub const RANKING_SCHEMA: &str = "stochascope.ranking.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub k_list: Vec<usize>,
    pub schemes: Vec<String>,
    pub deltas: Vec<f64>,
    pub format: Format,
    /// Seed of the random scheme.
    pub seed: u64,
}

impl AnalysisRequest {
    pub fn new(k_list: Vec<usize>) -> Self {
        AnalysisRequest {
            k_list,
            schemes: vec!["interleaved".into()],
            deltas: DEFAULT_DELTAS.to_vec(),
            format: Format::Csv,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.k_list.is_empty(), "the K list is empty");
        ensure!(!self.schemes.is_empty(), "no partition scheme given");
        ensure!(!self.deltas.is_empty(), "no δ given");
        for s in &self.schemes {
            Scheme::parse(s, self.seed)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct AnalysisDoc<'a> {
    schema: &'static str,
    bundle: &'a str,
    seed: u64,
    reports: &'a [SAReport],
}

fn delta_label(d: f64) -> String {
    format!("alpha_r_d{}", num(d)).replace('.', "p")
}

fn beta_text(r: &SAReport) -> String {
    r.beta.map(num).unwrap_or_else(|| "inf".into())
}

/// Computes every bound for each scheme and `K` and writes
/// `analysis.csv` or `analysis.json` into `out_dir`.
pub fn cmd_analyze(bundle: &ProblemBundle, req: &AnalysisRequest, out_dir: &Path) -> Result<(PathBuf, Vec<SAReport>)> {
    req.validate()?;
    let a = bundle.problem.matrix();
    let n = a.nrows();
    if let Some(k) = req.k_list.iter().find(|&&k| k == 0 || k > n) {
        bail!("K = {k} is outside 1..={n}");
    }
    let an = SaAnalyzer::new(a)?.with_deltas(&req.deltas)?;
    let mut reports = Vec::new();
    for s in &req.schemes {
        let scheme = Scheme::parse(s, req.seed)?;
        for &k in &req.k_list {
            reports.push(an.report(&make_partition(scheme, n, k)?)?);
            log::info!("analyzed {s} K={k}");
        }
    }
    let path = match req.format {
        Format::Json => {
            let path = out_dir.join("analysis.json");
            write_json(
                &path,
                &AnalysisDoc {
                    schema: ANALYSIS_SCHEMA,
                    bundle: &bundle.manifest.label,
                    seed: req.seed,
                    reports: &reports,
                },
            )?;
            path
        }
        Format::Csv => {
            let mut header: Vec<String> =
                ["K", "scheme", "L_f", "L_b", "upsilon", "mu_ell", "alpha_ell", "alpha_u", "alpha_s"]
                    .map(String::from)
                    .to_vec();
            header.extend(req.deltas.iter().map(|&d| delta_label(d)));
            header.extend(["alpha_sigma", "beta", "rho"].map(String::from));
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let mut row = vec![
                        r.k.to_string(),
                        r.scheme.clone(),
                        num(r.l_f),
                        num(r.l_b),
                        num(r.upsilon),
                        num(r.mu_ell),
                        num(r.alpha_ell),
                        num(r.alpha_u),
                        num(r.alpha_s),
                    ];
                    row.extend(r.random_partition.iter().map(|b| num(b.alpha_r)));
                    row.extend([num(r.random_partition[0].alpha_sigma), beta_text(r), num(r.rho)]);
                    row
                })
                .collect();
            let path = out_dir.join("analysis.csv");
            atomic_write(&path, &csv_bytes(ANALYSIS_SCHEMA, &header, &rows)?)?;
            path
        }
    };
    Ok((path, reports))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub scheme: String,
    pub alpha_ell: f64,
    pub upsilon: f64,
    pub mu_ell: f64,
    pub l_b: f64,
}

#[derive(Serialize)]
struct RankingDoc<'a> {
    schema: &'static str,
    bundle: &'a str,
    k: usize,
    seed: u64,
    ranking: &'a [RankEntry],
}

/// Ranks schemes by `α_ℓ` (larger first), ties broken by scheme name, and
/// writes `ranking.csv` or `ranking.json` into `out_dir`.
pub fn cmd_compare_partitions(
    bundle: &ProblemBundle,
    k: usize,
    schemes: &[String],
    seed: u64,
    format: Format,
    out_dir: &Path,
) -> Result<(PathBuf, Vec<RankEntry>)> {
    let a = bundle.problem.matrix();
    let n = a.nrows();
    ensure!(k >= 1 && k <= n, "K = {k} is outside 1..={n}");
    ensure!(!schemes.is_empty(), "no partition scheme given");
    let an = SaAnalyzer::new(a)?.with_deltas(&DEFAULT_DELTAS)?;
    let mut entries = Vec::new();
    for s in schemes {
        let r = an.report(&make_partition(Scheme::parse(s, seed)?, n, k)?)?;
        entries.push(RankEntry {
            rank: 0,
            scheme: s.clone(),
            alpha_ell: r.alpha_ell,
            upsilon: r.upsilon,
            mu_ell: r.mu_ell,
            l_b: r.l_b,
        });
    }
    entries.sort_by(|x, y| y.alpha_ell.total_cmp(&x.alpha_ell).then_with(|| x.scheme.cmp(&y.scheme)));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    let path = match format {
        Format::Json => {
            let path = out_dir.join("ranking.json");
            write_json(
                &path,
                &RankingDoc {
                    schema: RANKING_SCHEMA,
                    bundle: &bundle.manifest.label,
                    k,
                    seed,
                    ranking: &entries,
                },
            )?;
            path
        }
        Format::Csv => {
            let header = ["rank", "scheme", "alpha_ell", "upsilon", "mu_ell", "L_b"].map(String::from);
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| {
                    vec![
                        e.rank.to_string(),
                        e.scheme.clone(),
                        num(e.alpha_ell),
                        num(e.upsilon),
                        num(e.mu_ell),
                        num(e.l_b),
                    ]
                })
                .collect();
            let path = out_dir.join("ranking.csv");
            atomic_write(&path, &csv_bytes(RANKING_SCHEMA, &header, &rows)?)?;
            path
        }
    };
    Ok((path, entries))
}
