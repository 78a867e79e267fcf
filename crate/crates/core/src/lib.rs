//! Two-stage relational network Data Envelopment Analysis.
//!
//! - [`lp`]: dense two-phase simplex used by every model.
//! - [`dea`]: CCR, independent-stage, and relational two-stage models.
//! - [`analysis`]: dense ranks, Spearman's ρ, and report assembly.
//! - [`io`]: dataset parsing and report rendering.
//! - [`fixtures`]: the bundled IIM research-production dataset.

pub mod analysis;
pub mod dea;
pub mod fixtures;
pub mod io;
pub mod lp;

pub use analysis::{build_report, dense_rank, spearman_rank_correlation, AnalysisError, AnalysisReport};
pub use dea::{
    decompose_efficiency, run_full_analysis, solve_all_ccr, solve_all_relational, solve_ccr, solve_relational_overall,
    solve_stage_independent, solve_stage_priority, Dataset, DatasetError, DeaError, EfficiencyRecord, FullAnalysis,
    IoSpec, SolverConfig, Stage, StagePriority,
};
pub use io::{parse_dataset, render_dataset, render_ranks, render_report, ReportFormat};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, ToleranceSettings};
