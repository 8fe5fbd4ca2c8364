//! Error measurement and student-teacher overlaps.

use std::borrow::Borrow;

use crate::error::{Result, ScmError};
use crate::linalg;
use crate::model::{CommitteeMachine, InputVector};

/// Mean of `0.5 * (target - prediction)^2` over a dataset.
///
/// The 1/2 is kept so that on fresh data this estimates the generalization
/// error directly.
pub fn mse<P>(predictor: P, dataset: &[(InputVector, f64)]) -> Result<f64>
where
    P: FnMut(&InputVector) -> Result<f64>,
{
    mse_iter(predictor, dataset.iter().map(|(x, t)| (x, *t)))
}

/// [`mse`] over any sequence of `(input, target)` pairs, summed in order.
pub fn mse_iter<P, I, X>(mut predictor: P, samples: I) -> Result<f64>
where
    P: FnMut(&InputVector) -> Result<f64>,
    I: IntoIterator<Item = (X, f64)>,
    X: Borrow<InputVector>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for (x, target) in samples {
        let err = target - predictor(x.borrow())?;
        total += 0.5 * err * err;
        count += 1;
    }
    if count == 0 {
        return Err(ScmError::EmptyDataset);
    }
    Ok(total / count as f64)
}

/// One measurement on a learning curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorPoint {
    /// `t = m / N`.
    pub t_time: f64,
    pub mse_learn: f64,
    pub mse_test: f64,
}

/// Gram matrices between student rows (`q`) and between student and
/// teacher rows (`r`).
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapSnapshot {
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub t_time: f64,
}

/// `q[k][l] = J_k . J_l`, `r[k][j] = J_k . B_j`.
pub fn overlaps(
    student: &CommitteeMachine,
    teacher: &CommitteeMachine,
    t_time: f64,
) -> Result<OverlapSnapshot> {
    if student.n_inputs() != teacher.n_inputs() {
        return Err(ScmError::DimensionMismatch {
            expected: teacher.n_inputs(),
            found: student.n_inputs(),
        });
    }
    let k = student.n_hidden();
    let mut q = vec![vec![0.0; k]; k];
    #[allow(clippy::needless_range_loop)]
    for a in 0..k {
        for b in a..k {
            let v = linalg::dot(student.row(a), student.row(b));
            q[a][b] = v;
            q[b][a] = v;
        }
    }
    let r = student
        .rows()
        .map(|j| teacher.rows().map(|b| linalg::dot(j, b)).collect())
        .collect();
    Ok(OverlapSnapshot { q, r, t_time })
}
