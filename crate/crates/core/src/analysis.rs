//! Ranking and cross-model comparison of efficiency scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dea::{EfficiencyRecord, SolverConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("rank vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("rank correlation needs at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("tied ranks present; the d² rank-correlation formula requires tie-free ranks")]
    TiesPresent,
    #[error("DMU sets differ between models: {0}")]
    DmuSetMismatch(String),
    #[error("record for DMU {0} lacks a score required by the report")]
    MissingScore(String),
}

/// Dense descending ranks: the largest score gets rank 1, scores within
/// `tie_tol` of their predecessor in sorted order share its rank, and the
/// next distinct score gets the following integer.
pub fn dense_rank(scores: &[f64], tie_tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0; scores.len()];
    let mut rank = 0;
    let mut previous: Option<f64> = None;
    for i in order {
        let score = scores[i];
        match previous {
            Some(p) if p - score <= tie_tol => {}
            _ => rank += 1,
        }
        ranks[i] = rank;
        previous = Some(score);
    }
    ranks
}

/// Spearman's ρ = 1 − 6Σd² / (n(n² − 1)) for two tie-free rank vectors.
pub fn spearman_rank_correlation(ranks_a: &[usize], ranks_b: &[usize]) -> Result<f64, AnalysisError> {
    if ranks_a.len() != ranks_b.len() {
        return Err(AnalysisError::LengthMismatch {
            left: ranks_a.len(),
            right: ranks_b.len(),
        });
    }
    let n = ranks_a.len();
    if n < 2 {
        return Err(AnalysisError::TooFew(n));
    }
    if has_ties(ranks_a) || has_ties(ranks_b) {
        return Err(AnalysisError::TiesPresent);
    }
    let sum_sq: u128 = ranks_a
        .iter()
        .zip(ranks_b)
        .map(|(&a, &b)| {
            let d = a.abs_diff(b) as u128;
            d * d
        })
        .sum();
    let n = n as u128;
    Ok(1.0 - (6 * sum_sq) as f64 / (n * (n * n - 1)) as f64)
}

fn has_ties(ranks: &[usize]) -> bool {
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Score column with its dense ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub dmu_ids: Vec<String>,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl RankTable {
    pub fn new(dmu_ids: Vec<String>, scores: Vec<f64>, tie_tol: f64) -> Self {
        let ranks = dense_rank(&scores, tie_tol);
        Self { dmu_ids, scores, ranks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationalRow {
    pub id: String,
    pub name: String,
    pub overall: f64,
    pub stage1: f64,
    pub stage2: f64,
    pub rank_overall: usize,
    pub rank_stage1: usize,
    pub rank_stage2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcrRow {
    pub id: String,
    pub name: String,
    pub score: f64,
    pub rank: usize,
}

/// Ranked score tables for the relational and CCR models.
///
/// Either table may be empty when only one model was run. `spearman_rho`
/// is present when both tables exist and their overall ranks are tie-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub relational_table: Vec<RelationalRow>,
    pub ccr_table: Vec<CcrRow>,
    pub spearman_rho: Option<f64>,
    pub config_echo: SolverConfig,
}

fn score(record: &EfficiencyRecord, value: Option<f64>) -> Result<f64, AnalysisError> {
    value.ok_or_else(|| AnalysisError::MissingScore(record.dmu_id.clone()))
}

/// Assembles ranked tables and the rank correlation of overall scores.
///
/// CCR rows are reordered to follow the relational records when both are
/// given.
pub fn build_report(
    relational: &[EfficiencyRecord],
    ccr: &[EfficiencyRecord],
    cfg: &SolverConfig,
) -> Result<AnalysisReport, AnalysisError> {
    let tol = cfg.rank_tie_tol;

    let mut ccr: Vec<&EfficiencyRecord> = ccr.iter().collect();
    if !relational.is_empty() && !ccr.is_empty() {
        let position: HashMap<&str, usize> = relational
            .iter()
            .enumerate()
            .map(|(i, r)| (r.dmu_id.as_str(), i))
            .collect();
        let mismatch = ccr.len() != relational.len()
            || ccr.iter().any(|r| !position.contains_key(r.dmu_id.as_str()))
            || position.len() != relational.len();
        if mismatch {
            return Err(AnalysisError::DmuSetMismatch(format!(
                "{} relational records vs {} CCR records",
                relational.len(),
                ccr.len()
            )));
        }
        ccr.sort_by_key(|r| position[r.dmu_id.as_str()]);
        if ccr.windows(2).any(|w| w[0].dmu_id == w[1].dmu_id) {
            return Err(AnalysisError::DmuSetMismatch("duplicate CCR ids".into()));
        }
    }

    let overall = relational
        .iter()
        .map(|r| score(r, r.overall))
        .collect::<Result<Vec<_>, _>>()?;
    let stage1 = relational
        .iter()
        .map(|r| score(r, r.stage1))
        .collect::<Result<Vec<_>, _>>()?;
    let stage2 = relational
        .iter()
        .map(|r| score(r, r.stage2))
        .collect::<Result<Vec<_>, _>>()?;
    let ccr_scores = ccr.iter().map(|r| score(r, r.overall)).collect::<Result<Vec<_>, _>>()?;

    let rank_overall = dense_rank(&overall, tol);
    let rank_stage1 = dense_rank(&stage1, tol);
    let rank_stage2 = dense_rank(&stage2, tol);
    let ccr_ranks = dense_rank(&ccr_scores, tol);

    let relational_table = relational
        .iter()
        .enumerate()
        .map(|(i, r)| RelationalRow {
            id: r.dmu_id.clone(),
            name: r.dmu_name.clone(),
            overall: overall[i],
            stage1: stage1[i],
            stage2: stage2[i],
            rank_overall: rank_overall[i],
            rank_stage1: rank_stage1[i],
            rank_stage2: rank_stage2[i],
        })
        .collect();
    let ccr_table = ccr
        .iter()
        .enumerate()
        .map(|(i, r)| CcrRow {
            id: r.dmu_id.clone(),
            name: r.dmu_name.clone(),
            score: ccr_scores[i],
            rank: ccr_ranks[i],
        })
        .collect();

    let spearman_rho = if relational.is_empty() || ccr.is_empty() {
        None
    } else {
        match spearman_rank_correlation(&rank_overall, &ccr_ranks) {
            Ok(rho) => Some(rho),
            Err(AnalysisError::TiesPresent) | Err(AnalysisError::TooFew(_)) => None,
            Err(e) => return Err(e),
        }
    };

    Ok(AnalysisReport {
        relational_table,
        ccr_table,
        spearman_rho,
        config_echo: cfg.clone(),
    })
}
