use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::TaskPartition;
use crate::error::{Error, Result};
use crate::eval::rank::{mrr_with_sides, FilterIndex, RankSides};
use crate::transe::TransEModel;

/// Lower-triangular `M[i][j]`: MRR on task `j` after training task `i`, `j <= i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionMatrix {
    num_tasks: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl RetentionMatrix {
    pub fn new(num_tasks: usize) -> Self {
        Self {
            num_tasks,
            rows: vec![None; num_tasks],
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    /// Fills row `i` with `i + 1` values. Each row can be written once.
    pub fn set_row(&mut self, i: usize, values: Vec<f64>) -> Result<()> {
        if i >= self.num_tasks {
            return Err(Error::OutOfBounds {
                kind: "task",
                id: i,
                size: self.num_tasks,
            });
        }
        if self.rows[i].is_some() {
            return Err(Error::RetentionRowFilled(i));
        }
        if values.len() != i + 1 {
            return Err(Error::ShapeMismatch(format!(
                "row {i} needs {} values, got {}",
                i + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("MRR value {v} outside [0, 1]")));
        }
        self.rows[i] = Some(values);
        Ok(())
    }

    pub fn is_row_filled(&self, i: usize) -> bool {
        self.rows.get(i).is_some_and(Option::is_some)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rows.get(i)?.as_ref()?.get(j).copied()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }

    pub fn populated_cells(&self) -> usize {
        self.rows.iter().flatten().map(Vec::len).sum()
    }

    /// CSV with header `after_task,task_0,..,task_{T-1}`; cells above the
    /// diagonal are left empty.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["after_task".to_string()];
        header.extend((0..self.num_tasks).map(|j| format!("task_{j}")));
        w.write_record(&header)?;
        for i in 0..self.num_tasks {
            let mut record = vec![i.to_string()];
            for j in 0..self.num_tasks {
                record.push(self.get(i, j).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Evaluates tasks `0..=i` on their eval sets and writes row `i`.
pub fn retention_update(
    matrix: &mut RetentionMatrix,
    i: usize,
    model: &TransEModel,
    partition: &TaskPartition,
    filter: &FilterIndex,
    sides: RankSides,
) -> Result<()> {
    if matrix.is_row_filled(i) {
        return Err(Error::RetentionRowFilled(i));
    }
    if i >= partition.num_tasks() {
        return Err(Error::OutOfBounds {
            kind: "task",
            id: i,
            size: partition.num_tasks(),
        });
    }
    let row = partition.eval_tasks[..=i]
        .iter()
        .map(|eval| mrr_with_sides(model, eval, filter, sides))
        .collect::<Result<Vec<_>>>()?;
    matrix.set_row(i, row)
}

/// Forgetting after the final task. Fractions are MRR differences; the `_pp`
/// fields are the same numbers times 100. Negative values (backward
/// transfer) are reported as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingReport {
    /// `M[j][j] - M[T-1][j]` for each task `j < T-1`.
    pub per_task: Vec<f64>,
    pub average: f64,
    pub per_task_pp: Vec<f64>,
    pub average_pp: f64,
    /// Mean of the last row, including the final task.
    pub final_mrr: f64,
}

pub fn forgetting_report(matrix: &RetentionMatrix) -> Result<ForgettingReport> {
    let t = matrix.num_tasks();
    if t < 2 {
        return Err(Error::IncompleteRetention("need at least 2 tasks".into()));
    }
    if !matrix.is_complete() {
        let missing: Vec<usize> = (0..t).filter(|&i| !matrix.is_row_filled(i)).collect();
        return Err(Error::IncompleteRetention(format!(
            "rows {missing:?} missing"
        )));
    }
    let last = t - 1;
    let per_task: Vec<f64> = (0..last)
        .map(|j| matrix.get(j, j).unwrap() - matrix.get(last, j).unwrap())
        .collect();
    let average = per_task.iter().sum::<f64>() / per_task.len() as f64;
    let final_mrr = (0..t).map(|j| matrix.get(last, j).unwrap()).sum::<f64>() / t as f64;
    Ok(ForgettingReport {
        per_task_pp: per_task.iter().map(|f| f * 100.0).collect(),
        average_pp: average * 100.0,
        per_task,
        average,
        final_mrr,
    })
}

/// Final MRR pooled over all eval triples rather than averaged per task.
pub fn pooled_final_mrr(matrix: &RetentionMatrix, eval_sizes: &[usize]) -> Result<f64> {
    let t = matrix.num_tasks();
    if eval_sizes.len() != t {
        return Err(Error::ShapeMismatch(
            "one eval size per task required".into(),
        ));
    }
    let last = t.checked_sub(1).ok_or(Error::EmptyEvalSet)?;
    let mut num = 0.0;
    for (j, &n) in eval_sizes.iter().enumerate() {
        let m = matrix
            .get(last, j)
            .ok_or_else(|| Error::IncompleteRetention(format!("row {last} missing")))?;
        num += m * n as f64;
    }
    let total: usize = eval_sizes.iter().sum();
    if total == 0 {
        return Err(Error::EmptyEvalSet);
    }
    Ok(num / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(rows: &[&[f64]]) -> RetentionMatrix {
        let mut m = RetentionMatrix::new(rows.len());
        for (i, r) in rows.iter().enumerate() {
            m.set_row(i, r.to_vec()).unwrap();
        }
        m
    }

    #[test]
    fn no_forgetting() {
        let m = filled(&[&[0.3], &[0.3, 0.2], &[0.3, 0.2, 0.4]]);
        let r = forgetting_report(&m).unwrap();
        assert_eq!(r.average, 0.0);
        assert!((r.final_mrr - 0.3).abs() < 1e-15);
    }

    #[test]
    fn single_prior_task() {
        let m = filled(&[&[0.30], &[0.25, 0.40]]);
        let r = forgetting_report(&m).unwrap();
        assert!((r.average - 0.05).abs() < 1e-12);
        assert!((r.average_pp - 5.0).abs() < 1e-10);
        assert_eq!(r.per_task.len(), 1);
    }

    #[test]
    fn negative_forgetting_is_kept() {
        let m = filled(&[&[0.2], &[0.3, 0.5]]);
        assert!(forgetting_report(&m).unwrap().average < 0.0);
    }

    #[test]
    fn row_written_once() {
        let mut m = RetentionMatrix::new(3);
        m.set_row(0, vec![0.5]).unwrap();
        assert_eq!(m.populated_cells(), 1);
        assert!(matches!(
            m.set_row(0, vec![0.5]),
            Err(Error::RetentionRowFilled(0))
        ));
        assert!(m.set_row(1, vec![0.5]).is_err(), "wrong width");
        assert!(m.set_row(1, vec![0.5, 1.5]).is_err(), "out of range");
        assert!(matches!(
            forgetting_report(&m),
            Err(Error::IncompleteRetention(_))
        ));
    }

    #[test]
    fn full_run_cell_count_and_csv() {
        let m = filled(&[&[0.1], &[0.1, 0.2], &[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3, 0.4]]);
        assert_eq!(m.populated_cells(), 10);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "after_task,task_0,task_1,task_2,task_3");
        assert_eq!(lines[1], "0,0.1,,,");
        assert_eq!(lines[4], "3,0.1,0.2,0.3,0.4");
    }

    #[test]
    fn pooled_weights_by_size() {
        let m = filled(&[&[0.5], &[0.2, 0.6]]);
        assert!((pooled_final_mrr(&m, &[1, 3]).unwrap() - (0.2 + 1.8) / 4.0).abs() < 1e-15);
    }
}
