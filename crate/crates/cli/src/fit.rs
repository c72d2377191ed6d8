use robcov::mcd::{cov_mcd, McdConfig};
use robcov::ogk::{ogk_fit, OgkConfig};
use robcov::pairwise::{pairwise_matrix, PairwiseKind, RankMethod};
use robcov::{Data64, Estimate64, ScaleEstimator, SymMatrix64};
use serde::Serialize;

use crate::args::{EstimatorArgs, EstimatorKind};
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct McdSummary {
    pub h: usize,
    pub subset: Vec<String>,
    pub raw_determinant: f64,
    pub exhaustive: bool,
    pub seed: u64,
    pub reweighted: bool,
    pub rows_kept: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OgkSummary {
    pub iterations: usize,
    pub reweighted: bool,
    pub beta: f64,
    pub rows_kept: usize,
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub kind: EstimatorKind,
    pub scale: ScaleEstimator,
    pub estimate: Estimate64,
    pub mcd: Option<McdSummary>,
    pub ogk: Option<OgkSummary>,
}

/// Estimate with its settings, laid out for JSON.
#[derive(Debug, Serialize)]
pub struct EstimateJson<'a> {
    pub estimator: &'a str,
    pub scale: Option<String>,
    pub tag: &'a str,
    pub n_used: usize,
    pub positive_definite: bool,
    pub columns: &'a [String],
    pub location: &'a [f64],
    pub covariance: Vec<Vec<f64>>,
    pub correlation: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcd: Option<&'a McdSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ogk: Option<&'a OgkSummary>,
}

pub fn rows_of(m: &SymMatrix64) -> Vec<Vec<f64>> {
    m.as_matrix().to_rows()
}

impl Fitted {
    pub fn to_json<'a>(&'a self, columns: &'a [String]) -> EstimateJson<'a> {
        EstimateJson {
            estimator: self.kind.name(),
            scale: (self.kind != EstimatorKind::Mcd).then(|| self.scale.to_string()),
            tag: &self.estimate.estimator_tag,
            n_used: self.estimate.n_used,
            positive_definite: self.estimate.positive_definite,
            columns,
            location: &self.estimate.location,
            covariance: rows_of(&self.estimate.matrix),
            correlation: self.estimate.correlation_matrix().ok().map(|c| rows_of(&c)),
            mcd: self.mcd.as_ref(),
            ogk: self.ogk.as_ref(),
        }
    }
}

pub fn default_scale(kind: EstimatorKind) -> ScaleEstimator {
    match kind {
        EstimatorKind::Ogk => ScaleEstimator::tau(),
        EstimatorKind::Classical => ScaleEstimator::ClassicalSd,
        _ => ScaleEstimator::Made,
    }
}

pub fn fit(m: &Data64, kind: EstimatorKind, args: &EstimatorArgs) -> CliResult<Fitted> {
    let scale = args.scale.unwrap_or_else(|| default_scale(kind));
    let pairwise = |k: PairwiseKind| pairwise_matrix(k, scale, m);
    let (estimate, mcd, ogk) = match kind {
        EstimatorKind::Classical => (pairwise(PairwiseKind::Classical)?, None, None),
        EstimatorKind::RankSpearman => (pairwise(PairwiseKind::Rank(RankMethod::Spearman))?, None, None),
        EstimatorKind::RankKendall => (pairwise(PairwiseKind::Rank(RankMethod::Kendall))?, None, None),
        EstimatorKind::Gk => (pairwise(PairwiseKind::Gk)?, None, None),
        EstimatorKind::Rgk => (pairwise(PairwiseKind::Rgk)?, None, None),
        EstimatorKind::Ogk => {
            let cfg = OgkConfig {
                scale,
                reweight: args.ogk_reweight,
                ..OgkConfig::default()
            };
            let res = ogk_fit(m, &cfg)?;
            let summary = OgkSummary {
                iterations: cfg.iterations,
                reweighted: cfg.reweight,
                beta: cfg.beta,
                rows_kept: res.kept.iter().filter(|&&k| k).count(),
            };
            (res.estimate, None, Some(summary))
        }
        EstimatorKind::Mcd => {
            let cfg = McdConfig {
                h_fraction: args.h_fraction,
                n_starts: args.n_starts,
                seed: args.seed,
                reweight: !args.mcd_raw,
                ..McdConfig::default()
            };
            let res = cov_mcd(m, &cfg)?;
            let summary = McdSummary {
                h: res.subset.len(),
                subset: res.subset.iter().map(|&i| m.row_ids()[i].clone()).collect(),
                raw_determinant: res.raw_determinant,
                exhaustive: res.exhaustive,
                seed: cfg.seed,
                reweighted: cfg.reweight,
                rows_kept: res.kept.iter().filter(|&&k| k).count(),
            };
            (res.estimate, Some(summary), None)
        }
    };
    Ok(Fitted {
        kind,
        scale,
        estimate,
        mcd,
        ogk,
    })
}
