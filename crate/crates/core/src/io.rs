//! Delimited-text datasets and report rendering.
//!
//! Input files are comma separated with a header row. Column roles come
//! from the header: `id`, optional `name`, and any number of columns
//! starting with `x` (inputs), `z` (intermediate products) and `y`
//! (outputs), e.g. `id,name,x1,x2,x3,z1,y1`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::AnalysisReport;
use crate::dea::{CellLocation, ColumnRole, Dataset, DatasetError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub role: ColumnRole,
    pub index: usize,
    pub label: String,
}

/// Role of a header by naming convention.
pub fn role_from_header(label: &str) -> Option<ColumnRole> {
    let lower = label.trim().to_ascii_lowercase();
    match lower.as_str() {
        "id" => Some(ColumnRole::Id),
        "name" => Some(ColumnRole::Name),
        _ => match lower.chars().next()? {
            'x' => Some(ColumnRole::Input),
            'z' => Some(ColumnRole::Intermediate),
            'y' => Some(ColumnRole::Output),
            _ => None,
        },
    }
}

/// Infers a column spec for every header field.
pub fn infer_columns(headers: &[&str]) -> Result<Vec<ColumnSpec>, DatasetError> {
    headers
        .iter()
        .enumerate()
        .map(|(index, label)| {
            let role = role_from_header(label).ok_or_else(|| DatasetError::UnknownColumn {
                column: index,
                label: label.to_string(),
            })?;
            Ok(ColumnSpec {
                role,
                index,
                label: label.trim().to_string(),
            })
        })
        .collect()
}

fn check_spec(columns: &[ColumnSpec]) -> Result<(), DatasetError> {
    let count = |role| columns.iter().filter(|c| c.role == role).count();
    match count(ColumnRole::Id) {
        0 => return Err(DatasetError::MissingRole(ColumnRole::Id)),
        1 => {}
        _ => return Err(DatasetError::DuplicateRole(ColumnRole::Id)),
    }
    if count(ColumnRole::Name) > 1 {
        return Err(DatasetError::DuplicateRole(ColumnRole::Name));
    }
    for role in [ColumnRole::Input, ColumnRole::Intermediate, ColumnRole::Output] {
        if count(role) == 0 {
            return Err(DatasetError::MissingRole(role));
        }
    }
    Ok(())
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn malformed(e: csv::Error) -> DatasetError {
    DatasetError::Malformed(e.to_string())
}

/// Parses a dataset, inferring column roles from the header.
pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(malformed)?.clone();
    let labels: Vec<&str> = headers.iter().collect();
    let columns = infer_columns(&labels)?;
    parse_dataset_with(text, &columns)
}

/// Parses a dataset using explicit column roles. File columns not named
/// in `columns` are ignored.
pub fn parse_dataset_with(text: &str, columns: &[ColumnSpec]) -> Result<Dataset, DatasetError> {
    check_spec(columns)?;
    let mut rdr = reader(text);
    let width = rdr.headers().map_err(malformed)?.len();
    if let Some(c) = columns.iter().find(|c| c.index >= width) {
        return Err(DatasetError::Malformed(format!(
            "column {} ({:?}) is beyond the {width} header fields",
            c.index, c.label
        )));
    }

    let of_role = |role| columns.iter().filter(move |c: &&ColumnSpec| c.role == role);
    let id_col = of_role(ColumnRole::Id).next().expect("checked").index;
    let name_col = of_role(ColumnRole::Name).next().map(|c| c.index);
    let label_list = |role| of_role(role).map(|c| c.label.clone()).collect::<Vec<_>>();

    let mut ids = Vec::new();
    let mut names = Vec::new();
    let mut blocks: [Vec<Vec<f64>>; 3] = Default::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let roles = [ColumnRole::Input, ColumnRole::Intermediate, ColumnRole::Output];

    for record in rdr.records() {
        let record = record.map_err(malformed)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(DatasetError::RowLength {
                line,
                expected: width,
                found: record.len(),
            });
        }
        let id = record[id_col].to_string();
        if let Some(first_line) = seen.insert(id.clone(), line) {
            return Err(DatasetError::DuplicateId { id, line, first_line });
        }
        for (block, role) in blocks.iter_mut().zip(roles) {
            let mut row = Vec::new();
            for spec in of_role(role) {
                let raw = &record[spec.index];
                let location = CellLocation {
                    line,
                    column: spec.index,
                    label: spec.label.clone(),
                    role,
                };
                let value: f64 = raw.parse().map_err(|_| DatasetError::Parse {
                    location: location.clone(),
                    value: raw.to_string(),
                })?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(DatasetError::NonPositive { location, value });
                }
                row.push(value);
            }
            block.push(row);
        }
        names.push(name_col.map_or_else(|| id.clone(), |c| record[c].to_string()));
        ids.push(id);
    }

    let [inputs, intermediates, outputs] = blocks;
    let dataset = Dataset {
        dmu_ids: ids,
        dmu_names: names,
        input_labels: label_list(ColumnRole::Input),
        intermediate_labels: label_list(ColumnRole::Intermediate),
        output_labels: label_list(ColumnRole::Output),
        inputs,
        intermediates,
        outputs,
    };
    dataset.validate()?;
    Ok(dataset)
}

fn write_csv(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(wtr.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

/// Writes a dataset in the canonical `id,name,x..,z..,y..` layout with
/// full-precision values.
pub fn render_dataset(data: &Dataset) -> String {
    let header = ["id", "name"]
        .into_iter()
        .map(String::from)
        .chain(data.input_labels.iter().cloned())
        .chain(data.intermediate_labels.iter().cloned())
        .chain(data.output_labels.iter().cloned())
        .collect::<Vec<_>>();
    let rows = (0..data.num_dmus()).map(|j| {
        [data.dmu_ids[j].clone(), data.dmu_names[j].clone()]
            .into_iter()
            .chain(
                data.inputs[j]
                    .iter()
                    .chain(&data.intermediates[j])
                    .chain(&data.outputs[j])
                    .map(|v| v.to_string()),
            )
            .collect::<Vec<_>>()
    });
    write_csv(std::iter::once(header).chain(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

/// Score rounded for display, with exact efficiency shown as `1`.
pub fn format_score(score: f64, decimals: usize) -> String {
    let text = format!("{score:.decimals$}");
    if text == format!("{:.decimals$}", 1.0) {
        "1".to_string()
    } else {
        text
    }
}

fn aligned(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect::<Vec<_>>()
            .join("  ");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn rho_line(report: &AnalysisReport) -> Option<String> {
    if report.relational_table.is_empty() || report.ccr_table.is_empty() {
        return None;
    }
    Some(match report.spearman_rho {
        Some(rho) => format!("Spearman rank correlation (relational vs CCR): rho = {rho:.5}"),
        None => "Spearman rank correlation (relational vs CCR): n/a (tied ranks)".to_string(),
    })
}

fn render_table(report: &AnalysisReport) -> String {
    let d = report.config_echo.score_decimals;
    let cell = |score: f64, rank: usize| format!("{}({rank})", format_score(score, d));
    let mut sections = Vec::new();

    if !report.relational_table.is_empty() {
        let mut rows = vec![["DMU", "Name", "E_k", "E_k^1", "E_k^2"].map(String::from).to_vec()];
        rows.extend(report.relational_table.iter().map(|r| {
            vec![
                r.id.clone(),
                r.name.clone(),
                cell(r.overall, r.rank_overall),
                cell(r.stage1, r.rank_stage1),
                cell(r.stage2, r.rank_stage2),
            ]
        }));
        sections.push(format!("Two-stage relational network DEA\n{}", aligned(&rows)));
    }
    if !report.ccr_table.is_empty() {
        let mut header = vec!["DMU".to_string(), "Name".to_string()];
        if !report.relational_table.is_empty() {
            header.push("E_k".to_string());
        }
        header.push("E_k^CCR".to_string());
        let mut rows = vec![header];
        for (i, c) in report.ccr_table.iter().enumerate() {
            let mut row = vec![c.id.clone(), c.name.clone()];
            if let Some(r) = report.relational_table.get(i) {
                row.push(cell(r.overall, r.rank_overall));
            }
            row.push(cell(c.score, c.rank));
            rows.push(row);
        }
        sections.push(format!("Conventional CCR DEA\n{}", aligned(&rows)));
    }
    if let Some(line) = rho_line(report) {
        sections.push(format!("{line}\n"));
    }
    sections.join("\n")
}

/// Rows of the combined CSV layout, aligned by position.
fn csv_rows(report: &AnalysisReport, ranks_only: bool) -> Vec<Vec<String>> {
    let rel = !report.relational_table.is_empty();
    let ccr = !report.ccr_table.is_empty();
    let mut header = vec!["id".to_string(), "name".to_string()];
    if rel {
        let cols: &[&str] = if ranks_only {
            &["rank_overall", "rank_stage1", "rank_stage2"]
        } else {
            &[
                "overall",
                "rank_overall",
                "stage1",
                "rank_stage1",
                "stage2",
                "rank_stage2",
            ]
        };
        header.extend(cols.iter().map(|s| s.to_string()));
    }
    if ccr {
        let cols: &[&str] = if ranks_only {
            &["ccr_rank"]
        } else {
            &["ccr_score", "ccr_rank"]
        };
        header.extend(cols.iter().map(|s| s.to_string()));
    }

    let n = report.relational_table.len().max(report.ccr_table.len());
    let mut rows = vec![header];
    for i in 0..n {
        let (id, name) = match (report.relational_table.get(i), report.ccr_table.get(i)) {
            (Some(r), _) => (r.id.clone(), r.name.clone()),
            (None, Some(c)) => (c.id.clone(), c.name.clone()),
            (None, None) => unreachable!(),
        };
        let mut row = vec![id, name];
        if let Some(r) = report.relational_table.get(i) {
            if ranks_only {
                row.extend([r.rank_overall, r.rank_stage1, r.rank_stage2].map(|v| v.to_string()));
            } else {
                row.extend([
                    r.overall.to_string(),
                    r.rank_overall.to_string(),
                    r.stage1.to_string(),
                    r.rank_stage1.to_string(),
                    r.stage2.to_string(),
                    r.rank_stage2.to_string(),
                ]);
            }
        }
        if let Some(c) = report.ccr_table.get(i) {
            if !ranks_only {
                row.push(c.score.to_string());
            }
            row.push(c.rank.to_string());
        }
        rows.push(row);
    }
    rows
}

fn render_json(report: &AnalysisReport) -> String {
    let relational: Vec<_> = report
        .relational_table
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "overall": r.overall,
                "stage1": r.stage1,
                "stage2": r.stage2,
                "rank_overall": r.rank_overall,
                "rank_stage1": r.rank_stage1,
                "rank_stage2": r.rank_stage2,
            })
        })
        .collect();
    let ccr: Vec<_> = report
        .ccr_table
        .iter()
        .map(|c| json!({ "id": c.id, "score": c.score, "rank": c.rank }))
        .collect();
    let value = json!({
        "config": report.config_echo,
        "relational": relational,
        "ccr": ccr,
        "spearman_rho": report.spearman_rho,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

/// Renders a report. Table output rounds scores to `score_decimals` and
/// shows ranks in parentheses; CSV and JSON carry full-precision scores.
pub fn render_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Csv => write_csv(csv_rows(report, false)),
        ReportFormat::Json => render_json(report),
    }
}

/// Renders only the rank columns of a report.
pub fn render_ranks(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => {
            let rows = csv_rows(report, true);
            let mut out = aligned(&rows);
            if let Some(line) = rho_line(report) {
                out.push('\n');
                out.push_str(&line);
                out.push('\n');
            }
            out
        }
        ReportFormat::Csv => write_csv(csv_rows(report, true)),
        ReportFormat::Json => {
            let relational: Vec<_> = report
                .relational_table
                .iter()
                .map(|r| {
                    json!({
                        "id": r.id,
                        "rank_overall": r.rank_overall,
                        "rank_stage1": r.rank_stage1,
                        "rank_stage2": r.rank_stage2,
                    })
                })
                .collect();
            let ccr: Vec<_> = report
                .ccr_table
                .iter()
                .map(|c| json!({ "id": c.id, "rank": c.rank }))
                .collect();
            let mut text = serde_json::to_string_pretty(&json!({
                "relational": relational,
                "ccr": ccr,
                "spearman_rho": report.spearman_rho,
            }))
            .expect("report serializes");
            text.push('\n');
            text
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_schema() {
        let d = parse_dataset("id,x1,z1,y1\nA,1,2,3\nB,4,5,6\n").unwrap();
        assert_eq!(d.num_dmus(), 2);
        assert_eq!((d.num_inputs(), d.num_intermediates(), d.num_outputs()), (1, 1, 1));
        assert_eq!(d.dmu_names, vec!["A", "B"]);
        assert_eq!(d.outputs, vec![vec![3.0], vec![6.0]]);
    }

    #[test]
    fn zero_cell_names_location() {
        let err = parse_dataset("id,name,x1,z1,y1\nA,a,1,2,3\nB,b,4,0,6\n").unwrap_err();
        match err {
            DatasetError::NonPositive { location, value } => {
                assert_eq!(value, 0.0);
                assert_eq!(location.line, 3);
                assert_eq!(location.column, 3);
                assert_eq!(location.label, "z1");
                assert_eq!(location.role, ColumnRole::Intermediate);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell() {
        let err = parse_dataset("id,x1,z1,y1\nA,1,2,3\nB,4,five,6\n").unwrap_err();
        assert!(
            matches!(err, DatasetError::Parse { ref location, ref value } if location.line == 3 && location.column == 2 && value == "five")
        );
    }

    #[test]
    fn schema_errors() {
        assert_eq!(
            parse_dataset("id,x1,y1\nA,1,2\nB,3,4\n").unwrap_err(),
            DatasetError::MissingRole(ColumnRole::Intermediate)
        );
        assert!(matches!(
            parse_dataset("id,x1,z1,y1\nA,1,2,3\nA,4,5,6\n").unwrap_err(),
            DatasetError::DuplicateId {
                line: 3,
                first_line: 2,
                ..
            }
        ));
        assert!(matches!(
            parse_dataset("id,x1,z1,y1,state\nA,1,2,3,KA\n").unwrap_err(),
            DatasetError::UnknownColumn { column: 4, .. }
        ));
        assert!(matches!(
            parse_dataset("id,x1,z1,y1\nA,1,2\nB,4,5,6\n").unwrap_err(),
            DatasetError::RowLength {
                line: 2,
                expected: 4,
                found: 3
            }
        ));
        assert_eq!(
            parse_dataset("id,x1,z1,y1\nA,1,2,3\n").unwrap_err(),
            DatasetError::TooFewDmus(1)
        );
    }

    #[test]
    fn explicit_columns_skip_extra_fields() {
        let text = "code,state,cost,papers,grants\nA,KA,1,2,3\nB,GJ,4,5,6\n";
        let spec = |role, index: usize, label: &str| ColumnSpec {
            role,
            index,
            label: label.into(),
        };
        let columns = [
            spec(ColumnRole::Id, 0, "code"),
            spec(ColumnRole::Input, 2, "cost"),
            spec(ColumnRole::Intermediate, 3, "papers"),
            spec(ColumnRole::Output, 4, "grants"),
        ];
        let d = parse_dataset_with(text, &columns).unwrap();
        assert_eq!(d.dmu_ids, vec!["A", "B"]);
        assert_eq!(d.input_labels, vec!["cost"]);
        assert_eq!(d.intermediates, vec![vec![2.0], vec![5.0]]);
    }

    #[test]
    fn score_formatting() {
        assert_eq!(format_score(0.49734, 4), "0.4973");
        assert_eq!(format_score(1.0, 4), "1");
        assert_eq!(format_score(0.99999, 4), "1");
        assert_eq!(format_score(0.000666, 4), "0.0007");
    }
}
