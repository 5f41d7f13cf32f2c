//! Validation grid over the joint-objective weight and the Adam step size.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sparsegen::Generator;

use crate::error::{HarnessError, Result};
use crate::experiment::{run_grid, Algorithm, ExperimentGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub lambda: f64,
    pub step_size: f64,
    pub mean_l2_err: f64,
    pub mean_measurement_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub algorithm: String,
    pub m_values: Vec<usize>,
    pub images: usize,
    pub points: Vec<SearchPoint>,
    /// Point with the lowest mean l2 error; ties keep the earlier point.
    pub best: SearchPoint,
}

/// Runs `base` once per `(lambda, step)` pair with a single algorithm and
/// averages the errors over every cell.
pub fn grid_search(
    base: &ExperimentGrid,
    algorithm: Algorithm,
    generator: Option<&Generator>,
    lambdas: &[f64],
    steps: &[f64],
) -> Result<SearchReport> {
    if lambdas.is_empty() || steps.is_empty() {
        return Err(HarnessError::Invalid("grid search needs at least one lambda and one step".into()));
    }
    let mut points = Vec::new();
    for &lambda in lambdas {
        for &step_size in steps {
            let mut grid = base.clone();
            grid.algorithms = vec![algorithm];
            grid.solver.lambda = lambda;
            grid.solver.step_size = step_size;
            let rows = run_grid(&grid, generator)?.rows;
            let k = rows.len() as f64;
            points.push(SearchPoint {
                lambda,
                step_size,
                mean_l2_err: rows.iter().map(|r| r.l2_err).sum::<f64>() / k,
                mean_measurement_err: rows.iter().map(|r| r.measurement_err).sum::<f64>() / k,
            });
        }
    }
    let best = *points
        .iter()
        .reduce(|a, b| if b.mean_l2_err < a.mean_l2_err { b } else { a })
        .expect("nonempty grid");
    Ok(SearchReport {
        algorithm: algorithm.name().into(),
        m_values: base.m_values.clone(),
        images: base.dataset.len(),
        points,
        best,
    })
}

pub fn write_search_csv<W: Write>(report: &SearchReport, w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for p in &report.points {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}
