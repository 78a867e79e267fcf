use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    Block, Dataset, DeaError, DecompositionError, EfficiencyRecord, IoSpec, LpModel, ModelKind, Multipliers,
    SolverConfig, Stage, StagePriority,
};
use crate::lp::{solve_lp, ConstraintSense, LinearProgram, LpSolution, LpStatus};

/// Slack allowed on quotients before a stage score counts as exceeding 1.
const QUOTIENT_TOL: f64 = 1e-9;

fn block(data: &Dataset, block: Block) -> &[Vec<f64>] {
    match block {
        Block::Inputs => &data.inputs,
        Block::Intermediates => &data.intermediates,
        Block::Outputs => &data.outputs,
    }
}

fn prepare<'a>(data: &'a Dataset, cfg: &SolverConfig) -> Result<Cow<'a, Dataset>, DeaError> {
    cfg.validate()?;
    data.validate()?;
    Ok(if cfg.normalize_columns {
        Cow::Owned(data.normalized())
    } else {
        Cow::Borrowed(data)
    })
}

fn check_index(data: &Dataset, k: usize) -> Result<(), DeaError> {
    if k >= data.num_dmus() {
        return Err(DeaError::DmuIndex {
            index: k,
            n: data.num_dmus(),
        });
    }
    Ok(())
}

fn run(
    lp: &LinearProgram,
    data: &Dataset,
    k: usize,
    model: LpModel,
    cfg: &SolverConfig,
) -> Result<LpSolution, DeaError> {
    let solution = solve_lp(lp, &cfg.tolerances).expect("DEA programs are well-formed by construction");
    match solution.status {
        LpStatus::Optimal => Ok(solution),
        LpStatus::Infeasible => Err(DeaError::Configuration {
            dmu: data.dmu_ids[k].clone(),
            model,
            epsilon: cfg.epsilon,
        }),
        status => Err(DeaError::Numerical {
            dmu: data.dmu_ids[k].clone(),
            model,
            status,
        }),
    }
}

/// Checks an LP-derived score lies in (0, 1], absorbing round-off above 1.
fn unit_score(value: f64, data: &Dataset, k: usize, model: LpModel, cfg: &SolverConfig) -> Result<f64, DeaError> {
    let slack = 10.0 * cfg.tolerances.feasibility_tol;
    if value > 0.0 && value <= 1.0 + slack {
        Ok(value.min(1.0))
    } else {
        Err(DeaError::ScoreOutOfRange {
            dmu: data.dmu_ids[k].clone(),
            model,
            value,
        })
    }
}

/// Returns `overall / fixed_stage`, the efficiency of the other stage.
///
/// Quotients up to `1 + 1e-9` are clamped to 1; anything larger means the
/// inputs do not come from one consistent relational solution.
pub fn decompose_efficiency(overall: f64, fixed_stage: f64) -> Result<f64, DecompositionError> {
    let err = DecompositionError { overall, fixed_stage };
    if !(fixed_stage > 0.0 && fixed_stage <= 1.0 + QUOTIENT_TOL) || !(overall > 0.0) {
        return Err(err);
    }
    let quotient = overall / fixed_stage;
    if quotient > 1.0 + QUOTIENT_TOL {
        return Err(err);
    }
    Ok(quotient.min(1.0))
}

fn ccr_on(data: &Dataset, k: usize, io: IoSpec, cfg: &SolverConfig) -> Result<EfficiencyRecord, DeaError> {
    let model = LpModel::Ccr(io);
    let ins = block(data, io.inputs);
    let outs = block(data, io.outputs);
    let m = ins[0].len();
    let s = outs[0].len();

    // Variables: [input weights (m), output weights (s)].
    let mut objective = vec![0.0; m];
    objective.extend_from_slice(&outs[k]);
    let mut lp = LinearProgram::maximize(objective).with_lower_bounds(vec![cfg.epsilon; m + s]);

    let mut normalization = ins[k].clone();
    normalization.resize(m + s, 0.0);
    lp.add_constraint(normalization, ConstraintSense::Equal, 1.0);
    for j in 0..data.num_dmus() {
        let mut row: Vec<f64> = ins[j].iter().map(|v| -v).collect();
        row.extend_from_slice(&outs[j]);
        lp.add_constraint(row, ConstraintSense::LessEqual, 0.0);
    }

    let solution = run(&lp, data, k, model, cfg)?;
    let score = unit_score(solution.objective_value, data, k, model, cfg)?;
    let (in_weights, out_weights) = solution.variable_values.split_at(m);

    let mut multipliers = Multipliers::default();
    for (b, weights) in [(io.inputs, in_weights), (io.outputs, out_weights)] {
        let slot = match b {
            Block::Inputs => &mut multipliers.u,
            Block::Intermediates => &mut multipliers.w,
            Block::Outputs => &mut multipliers.v,
        };
        *slot = weights.to_vec();
    }

    Ok(EfficiencyRecord {
        dmu_id: data.dmu_ids[k].clone(),
        dmu_name: data.dmu_names[k].clone(),
        overall: Some(score),
        stage1: None,
        stage2: None,
        multipliers,
        model_kind: ModelKind::Ccr,
    })
}

/// CCR efficiency of DMU `k`, with `io` choosing which blocks act as inputs
/// and outputs. The score is reported in `overall`.
pub fn solve_ccr(data: &Dataset, k: usize, io: IoSpec, cfg: &SolverConfig) -> Result<EfficiencyRecord, DeaError> {
    let data = prepare(data, cfg)?;
    check_index(&data, k)?;
    ccr_on(&data, k, io, cfg)
}

fn independent_on(data: &Dataset, k: usize, stage: Stage, cfg: &SolverConfig) -> Result<EfficiencyRecord, DeaError> {
    let io = match stage {
        Stage::First => IoSpec::FIRST_STAGE,
        Stage::Second => IoSpec::SECOND_STAGE,
    };
    let mut record = ccr_on(data, k, io, cfg)?;
    let score = record.overall.take();
    match stage {
        Stage::First => record.stage1 = score,
        Stage::Second => record.stage2 = score,
    }
    record.model_kind = ModelKind::IndependentStages;
    Ok(record)
}

/// Efficiency of one stage evaluated on its own (stage 1: `x → z`,
/// stage 2: `z → y`), ignoring the other stage.
pub fn solve_stage_independent(
    data: &Dataset,
    k: usize,
    stage: Stage,
    cfg: &SolverConfig,
) -> Result<EfficiencyRecord, DeaError> {
    let data = prepare(data, cfg)?;
    check_index(&data, k)?;
    independent_on(&data, k, stage, cfg)
}

/// Variable layout shared by the relational programs: `[u (m), v (s), w (p)]`.
struct RelationalLayout {
    m: usize,
    s: usize,
    p: usize,
}

impl RelationalLayout {
    fn of(data: &Dataset) -> Self {
        Self {
            m: data.num_inputs(),
            s: data.num_outputs(),
            p: data.num_intermediates(),
        }
    }

    fn width(&self) -> usize {
        self.m + self.s + self.p
    }

    fn row(&self, u: Option<(&[f64], f64)>, v: Option<(&[f64], f64)>, w: Option<(&[f64], f64)>) -> Vec<f64> {
        let mut row = vec![0.0; self.width()];
        let mut place = |offset: usize, part: Option<(&[f64], f64)>| {
            if let Some((values, sign)) = part {
                for (slot, value) in row[offset..].iter_mut().zip(values) {
                    *slot = sign * value;
                }
            }
        };
        place(0, u);
        place(self.m, v);
        place(self.m + self.s, w);
        row
    }

    fn split(&self, values: &[f64]) -> Multipliers {
        Multipliers {
            u: values[..self.m].to_vec(),
            v: values[self.m..self.m + self.s].to_vec(),
            w: values[self.m + self.s..].to_vec(),
        }
    }
}

/// Objective plus the three ratio-constraint families for every DMU and
/// multiplier lower bounds. Normalization rows are added by callers.
fn relational_base(data: &Dataset, objective: Vec<f64>, cfg: &SolverConfig) -> LinearProgram {
    let layout = RelationalLayout::of(data);
    let mut lp = LinearProgram::maximize(objective).with_lower_bounds(vec![cfg.epsilon; layout.width()]);
    for j in 0..data.num_dmus() {
        let (x, y, z) = (&data.inputs[j], &data.outputs[j], &data.intermediates[j]);
        // Whole process: y·v - x·u <= 0.
        lp.add_constraint(
            layout.row(Some((x, -1.0)), Some((y, 1.0)), None),
            ConstraintSense::LessEqual,
            0.0,
        );
        // Stage 1: z·w - x·u <= 0.
        lp.add_constraint(
            layout.row(Some((x, -1.0)), None, Some((z, 1.0))),
            ConstraintSense::LessEqual,
            0.0,
        );
        // Stage 2: y·v - z·w <= 0.
        lp.add_constraint(
            layout.row(None, Some((y, 1.0)), Some((z, -1.0))),
            ConstraintSense::LessEqual,
            0.0,
        );
    }
    lp
}

fn relational_overall_on(data: &Dataset, k: usize, cfg: &SolverConfig) -> Result<(f64, Multipliers), DeaError> {
    let model = LpModel::RelationalOverall;
    let layout = RelationalLayout::of(data);
    let (x, y) = (&data.inputs[k], &data.outputs[k]);
    let mut lp = relational_base(data, layout.row(None, Some((y, 1.0)), None), cfg);
    lp.add_constraint(layout.row(Some((x, 1.0)), None, None), ConstraintSense::Equal, 1.0);
    let solution = run(&lp, data, k, model, cfg)?;
    let score = unit_score(solution.objective_value, data, k, model, cfg)?;
    Ok((score, layout.split(&solution.variable_values)))
}

/// Overall efficiency of DMU `k` under the relational two-stage model.
pub fn solve_relational_overall(data: &Dataset, k: usize, cfg: &SolverConfig) -> Result<f64, DeaError> {
    let data = prepare(data, cfg)?;
    check_index(&data, k)?;
    relational_overall_on(&data, k, cfg).map(|(score, _)| score)
}

/// Slacks, in multiples of the LP feasibility tolerance, subtracted from the
/// pinned overall score on successive retries.
const PIN_SLACKS: [f64; 3] = [0.0, 4.0, 32.0];

fn stage_priority_on(
    data: &Dataset,
    k: usize,
    overall: f64,
    priority: StagePriority,
    cfg: &SolverConfig,
) -> Result<EfficiencyRecord, DeaError> {
    let dmu = data.dmu_ids[k].clone();
    if !(overall > 0.0 && overall <= 1.0) {
        return Err(DeaError::Decomposition {
            dmu,
            detail: format!("overall efficiency {overall} is outside (0, 1]"),
        });
    }
    let layout = RelationalLayout::of(data);
    let (x, y, z) = (&data.inputs[k], &data.outputs[k], &data.intermediates[k]);

    let (model, objective, normalization) = match priority {
        StagePriority::FirstStage => (
            LpModel::FirstStagePriority,
            layout.row(None, None, Some((z, 1.0))),
            layout.row(Some((x, 1.0)), None, None),
        ),
        StagePriority::SecondStage => (
            LpModel::SecondStagePriority,
            layout.row(None, Some((y, 1.0)), None),
            layout.row(None, None, Some((z, 1.0))),
        ),
    };
    // `overall` is itself an LP optimum, accurate only to the feasibility
    // tolerance, so pinning it exactly can leave the program marginally
    // infeasible. Retries lower the pin by a few tolerances.
    let mut solution = None;
    for slack in PIN_SLACKS {
        let pin = overall - slack * cfg.tolerances.feasibility_tol;
        let mut lp = relational_base(data, objective.clone(), cfg);
        lp.add_constraint(normalization.clone(), ConstraintSense::Equal, 1.0);
        // Hold the overall score: y·v - E·x·u = 0.
        lp.add_constraint(
            layout.row(Some((x, -pin)), Some((y, 1.0)), None),
            ConstraintSense::Equal,
            0.0,
        );
        match run(&lp, data, k, model, cfg) {
            Err(DeaError::Configuration { .. }) => continue,
            other => {
                solution = Some(other?);
                break;
            }
        }
    }
    let Some(solution) = solution else {
        return Err(DeaError::Decomposition {
            dmu,
            detail: format!("overall efficiency {overall} is not attainable by the {model} program"),
        });
    };
    let fixed = unit_score(solution.objective_value, data, k, model, cfg)?;
    let other = decompose_efficiency(overall, fixed).map_err(|e| DeaError::Decomposition {
        dmu: dmu.clone(),
        detail: e.to_string(),
    })?;
    let (stage1, stage2) = match priority {
        StagePriority::FirstStage => (fixed, other),
        StagePriority::SecondStage => (other, fixed),
    };

    Ok(EfficiencyRecord {
        dmu_id: dmu,
        dmu_name: data.dmu_names[k].clone(),
        overall: Some(overall),
        stage1: Some(stage1),
        stage2: Some(stage2),
        multipliers: layout.split(&solution.variable_values),
        model_kind: ModelKind::RelationalTwoStage,
    })
}

/// Splits a relational overall score into stage scores.
///
/// The prioritized stage is maximized while the overall score is held at
/// `overall`; the other stage follows as `overall / prioritized`. `overall`
/// must be the optimum of [`solve_relational_overall`] for the same DMU and
/// configuration.
pub fn solve_stage_priority(
    data: &Dataset,
    k: usize,
    overall: f64,
    priority: StagePriority,
    cfg: &SolverConfig,
) -> Result<EfficiencyRecord, DeaError> {
    let data = prepare(data, cfg)?;
    check_index(&data, k)?;
    stage_priority_on(&data, k, overall, priority, cfg)
}

fn per_dmu<T, F>(data: &Dataset, solve: F) -> Result<Vec<T>, DeaError>
where
    T: Send,
    F: Fn(usize) -> Result<T, DeaError> + Sync + Send,
{
    let results: Vec<Result<T, DeaError>> = (0..data.num_dmus()).into_par_iter().map(solve).collect();
    results.into_iter().collect()
}

/// Relational records for every DMU: overall score plus the stage split
/// chosen by `cfg.stage_priority`.
///
/// DMUs are solved in parallel; on failure the error of the first failing
/// DMU in dataset order is returned.
pub fn solve_all_relational(data: &Dataset, cfg: &SolverConfig) -> Result<Vec<EfficiencyRecord>, DeaError> {
    let prepared = prepare(data, cfg)?;
    let data = prepared.as_ref();
    per_dmu(data, |k| {
        let (overall, _) = relational_overall_on(data, k, cfg)?;
        stage_priority_on(data, k, overall, cfg.stage_priority, cfg)
    })
}

/// Whole-process CCR records for every DMU.
pub fn solve_all_ccr(data: &Dataset, cfg: &SolverConfig) -> Result<Vec<EfficiencyRecord>, DeaError> {
    let prepared = prepare(data, cfg)?;
    let data = prepared.as_ref();
    per_dmu(data, |k| ccr_on(data, k, IoSpec::WHOLE_PROCESS, cfg))
}

/// Relational and CCR records for every DMU, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullAnalysis {
    pub relational: Vec<EfficiencyRecord>,
    pub ccr: Vec<EfficiencyRecord>,
}

pub fn run_full_analysis(data: &Dataset, cfg: &SolverConfig) -> Result<FullAnalysis, DeaError> {
    Ok(FullAnalysis {
        relational: solve_all_relational(data, cfg)?,
        ccr: solve_all_ccr(data, cfg)?,
    })
}
