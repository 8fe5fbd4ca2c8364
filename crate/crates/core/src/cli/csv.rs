//! Learning-curve CSV: `t,mse_learn,mse_test,trial`.
//!
//! Rows are sorted by trial (integer trials first, then `mean`) and by `t`
//! within a trial. Reals are written with 17 significant digits so that
//! reading the file back reproduces every value exactly.

use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, ScmError};
use crate::harness::{ExperimentResult, LearningCurve};

pub const HEADER: &str = "t,mse_learn,mse_test,trial";

/// Which curve a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TrialTag {
    Trial(usize),
    Mean,
}

impl fmt::Display for TrialTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialTag::Trial(i) => write!(f, "{i}"),
            TrialTag::Mean => f.write_str("mean"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub mse_learn: f64,
    pub mse_test: f64,
    pub trial: TrialTag,
}

fn push_rows(out: &mut String, curve: &LearningCurve, tag: TrialTag) {
    for p in &curve.points {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{tag}\n",
            p.t_time, p.mse_learn, p.mse_test
        ));
    }
}

/// The CSV text for an experiment result.
pub fn render_csv(result: &ExperimentResult) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (i, curve) in result.trials.iter().enumerate() {
        push_rows(&mut out, curve, TrialTag::Trial(i));
    }
    push_rows(&mut out, &result.mean, TrialTag::Mean);
    out
}

/// Writes [`render_csv`] to `path`.
pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| ScmError::io(path, e))?;
    file.write_all(render_csv(result).as_bytes())
        .map_err(|e| ScmError::io(path, e))
}

/// Reads CSV text produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, HEADER)) => {}
        _ => {
            return Err(ScmError::Csv {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            })
        }
    }
    lines
        .map(|(idx, line)| {
            let err = |message: String| ScmError::Csv {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            let [t, learn, test, trial] = fields[..] else {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            };
            let real = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(format!("bad number `{s}`")))
            };
            let trial = match trial {
                "mean" => TrialTag::Mean,
                other => TrialTag::Trial(
                    other
                        .parse()
                        .map_err(|_| err(format!("bad trial `{other}`")))?,
                ),
            };
            Ok(CsvRow {
                t: real(t)?,
                mse_learn: real(learn)?,
                mse_test: real(test)?,
                trial,
            })
        })
        .collect()
}
