//! Pareto front CSV export.

use std::path::Path;

use mosr_core::benchmarks::lossless;
use mosr_core::scalar::format_exact;
use mosr_core::Model;
use serde::{Deserialize, Serialize};

use crate::dataset::write_file;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    #[serde(with = "lossless")]
    pub c_train: f64,
    #[serde(with = "lossless")]
    pub c_constr: f64,
    /// Infix text with the coefficients inlined.
    pub expression: String,
}

/// One row per model, by increasing training error (ties keep model order).
pub fn front_rows(models: &[Model<f64>]) -> Vec<FrontRow> {
    let mut rows: Vec<FrontRow> = models
        .iter()
        .map(|m| {
            let s = m.scores_or_sentinel();
            FrontRow { c_train: s.c_train, c_constr: s.c_constr, expression: m.to_infix() }
        })
        .collect();
    rows.sort_by(|a, b| a.c_train.total_cmp(&b.c_train));
    rows
}

pub fn front_csv(rows: &[FrontRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["c_train", "c_constr", "expression"]).expect("in-memory write");
    for r in rows {
        w.write_record([format_exact(r.c_train), format_exact(r.c_constr), r.expression.clone()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Writes `c_train,c_constr,expression` rows sorted by training error.
pub fn export_front(models: &[Model<f64>], path: &Path) -> Result<()> {
    if models.is_empty() {
        return Err(CliError::Config("no models to export".into()));
    }
    write_file(path, front_csv(&front_rows(models)).as_bytes())
}
