//! Multiplier-form DEA models for a two-stage series process.
//!
//! Stage 1 turns inputs `x` into intermediate products `z`; stage 2 turns
//! `z` into outputs `y`. The relational model evaluates both stages in
//! one LP with shared intermediate weights, so the overall score factors
//! as `overall = stage1 × stage2`.

mod dataset;
mod models;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LpStatus, ToleranceSettings};

pub use dataset::{CellLocation, ColumnRole, Dataset, DatasetError};
pub use models::{
    decompose_efficiency, run_full_analysis, solve_all_ccr, solve_all_relational, solve_ccr, solve_relational_overall,
    solve_stage_independent, solve_stage_priority, FullAnalysis,
};

/// Which stage's efficiency is maximized first when the relational
/// optimum admits several decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagePriority {
    FirstStage,
    SecondStage,
}

impl fmt::Display for StagePriority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FirstStage => "first",
            Self::SecondStage => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Lower bound on every multiplier, applied to the (normalized) problem.
    pub epsilon: f64,
    /// Divide every data column by its maximum before solving.
    pub normalize_columns: bool,
    pub stage_priority: StagePriority,
    pub tolerances: ToleranceSettings,
    /// Decimal places used by table rendering.
    pub score_decimals: usize,
    /// Scores closer than this share a rank.
    pub rank_tie_tol: f64,
}

pub const DEFAULT_EPSILON: f64 = 1e-6;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            normalize_columns: true,
            stage_priority: StagePriority::SecondStage,
            tolerances: ToleranceSettings::default(),
            score_decimals: 4,
            rank_tie_tol: 5e-5,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_stage_priority(self, stage_priority: StagePriority) -> Self {
        Self { stage_priority, ..self }
    }

    pub fn validate(&self) -> Result<(), DeaError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(DeaError::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.rank_tie_tol >= 0.0) {
            return Err(DeaError::InvalidConfig(format!(
                "rank_tie_tol must be non-negative, got {}",
                self.rank_tie_tol
            )));
        }
        Ok(())
    }
}

/// A block of dataset columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    Inputs,
    Intermediates,
    Outputs,
}

/// Which block plays the input role and which the output role in a
/// single-stage CCR evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoSpec {
    pub inputs: Block,
    pub outputs: Block,
}

impl IoSpec {
    pub const WHOLE_PROCESS: IoSpec = IoSpec {
        inputs: Block::Inputs,
        outputs: Block::Outputs,
    };
    pub const FIRST_STAGE: IoSpec = IoSpec {
        inputs: Block::Inputs,
        outputs: Block::Intermediates,
    };
    pub const SECOND_STAGE: IoSpec = IoSpec {
        inputs: Block::Intermediates,
        outputs: Block::Outputs,
    };
}

/// Optimal weights: `u` on inputs, `v` on outputs, `w` on intermediate
/// products. Blocks not used by a model are left empty. Values refer to
/// the data the LP saw, i.e. column-normalized data when normalization is on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Ccr,
    RelationalTwoStage,
    IndependentStages,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRecord {
    pub dmu_id: String,
    pub dmu_name: String,
    pub overall: Option<f64>,
    pub stage1: Option<f64>,
    pub stage2: Option<f64>,
    pub multipliers: Multipliers,
    pub model_kind: ModelKind,
}

/// Identifies the LP that failed in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpModel {
    Ccr(IoSpec),
    RelationalOverall,
    FirstStagePriority,
    SecondStagePriority,
}

impl fmt::Display for LpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ccr(IoSpec::WHOLE_PROCESS) => f.write_str("CCR whole process"),
            Self::Ccr(IoSpec::FIRST_STAGE) => f.write_str("CCR first stage"),
            Self::Ccr(IoSpec::SECOND_STAGE) => f.write_str("CCR second stage"),
            Self::Ccr(io) => write!(f, "CCR {:?} -> {:?}", io.inputs, io.outputs),
            Self::RelationalOverall => f.write_str("relational overall"),
            Self::FirstStagePriority => f.write_str("relational first-stage priority"),
            Self::SecondStagePriority => f.write_str("relational second-stage priority"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("stage quotient {overall} / {fixed_stage} is not a valid efficiency")]
pub struct DecompositionError {
    pub overall: f64,
    pub fixed_stage: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeaError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("DMU index {index} out of range for {n} DMUs")]
    DmuIndex { index: usize, n: usize },
    #[error("DMU {dmu}: {model} LP is infeasible; epsilon = {epsilon} is too large for this data")]
    Configuration { dmu: String, model: LpModel, epsilon: f64 },
    #[error("DMU {dmu}: {model} LP ended with status {status}")]
    Numerical {
        dmu: String,
        model: LpModel,
        status: LpStatus,
    },
    #[error("DMU {dmu}: {model} produced score {value} outside (0, 1]")]
    ScoreOutOfRange { dmu: String, model: LpModel, value: f64 },
    #[error("DMU {dmu}: {detail}")]
    Decomposition { dmu: String, detail: String },
}

impl DeaError {
    /// Id of the DMU the failure belongs to, if any.
    pub fn dmu(&self) -> Option<&str> {
        match self {
            Self::Configuration { dmu, .. }
            | Self::Numerical { dmu, .. }
            | Self::ScoreOutOfRange { dmu, .. }
            | Self::Decomposition { dmu, .. } => Some(dmu),
            _ => None,
        }
    }
}
