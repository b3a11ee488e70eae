//! CSV and JSON rendering. Both carry a schema tag; CSV puts it on a leading
//! `#` line.

use serde::Serialize;

use crate::commands::{
    RateRow, ReportRow, TrajectoryRow, RATE_HEADER, RATE_SCHEMA, TRAJECTORY_HEADER, TRAJECTORY_SCHEMA,
    VALIDATE_HEADER, VALIDATE_SCHEMA,
};
use crate::CliError;

pub struct Table {
    pub command: &'static str,
    pub schema: &'static str,
    pub header: &'static [&'static str],
    records: Vec<Vec<String>>,
    json_rows: Vec<serde_json::Value>,
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn json_rows<T: Serialize>(rows: &[T]) -> Result<Vec<serde_json::Value>, CliError> {
    rows.iter()
        .map(|r| serde_json::to_value(r).map_err(|e| CliError::Io(e.to_string())))
        .collect()
}

impl Table {
    pub fn rate(rows: &[RateRow]) -> Result<Self, CliError> {
        let records = rows
            .iter()
            .map(|r| {
                vec![
                    r.theorem.clone(),
                    r.kind.to_string(),
                    cell(r.epsilon),
                    cell(r.lambda),
                    r.index.to_string(),
                    cell(r.value),
                    r.provenance.clone(),
                ]
            })
            .collect();
        Ok(Table { command: "rate", schema: RATE_SCHEMA, header: &RATE_HEADER, records, json_rows: json_rows(rows)? })
    }

    pub fn validate(rows: &[ReportRow]) -> Result<Self, CliError> {
        let records = rows
            .iter()
            .map(|r| {
                vec![
                    r.theorem.clone(),
                    r.kind.to_string(),
                    cell(r.epsilon),
                    cell(r.lambda),
                    r.index.to_string(),
                    r.horizon.to_string(),
                    cell(r.mean),
                    cell(r.std_err),
                    cell(r.trials),
                    r.bound.to_string(),
                    r.ci_multiplier.to_string(),
                    serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                ]
            })
            .collect();
        Ok(Table {
            command: "validate",
            schema: VALIDATE_SCHEMA,
            header: &VALIDATE_HEADER,
            records,
            json_rows: json_rows(rows)?,
        })
    }

    pub fn trajectory(rows: &[TrajectoryRow]) -> Result<Self, CliError> {
        let records = rows
            .iter()
            .map(|r| vec![r.trial.to_string(), r.n.to_string(), r.functional.to_string(), r.dist.to_string()])
            .collect();
        Ok(Table {
            command: "trajectory",
            schema: TRAJECTORY_SCHEMA,
            header: &TRAJECTORY_HEADER,
            records,
            json_rows: json_rows(rows)?,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let io = |e: csv::Error| CliError::Io(e.to_string());
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(self.header).map_err(io)?;
        for r in &self.records {
            w.write_record(r).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(format!("# schema={}\n{}", self.schema, String::from_utf8_lossy(&body)))
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let doc = serde_json::json!({ "schema": self.schema, "rows": self.json_rows });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}
