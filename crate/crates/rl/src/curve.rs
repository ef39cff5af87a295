use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CSV_HEADER: &str = "Step,Value";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub value: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("learning curve must start with header `{CSV_HEADER}`")]
    BadHeader,
    #[error("line {line}: expected `step,value`")]
    BadRow { line: usize },
    #[error("line {line}: step {step} does not increase")]
    NotIncreasing { line: usize, step: u64 },
}

/// Windowed mean episode reward against environment steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn new() -> Self {
        LearningCurve::default()
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<CurveRow> {
        self.rows.last().copied()
    }

    /// Appends a row; steps must strictly increase.
    pub fn push(&mut self, step: u64, value: f64) -> Result<(), CurveError> {
        if let Some(last) = self.rows.last() {
            if step <= last.step {
                return Err(CurveError::NotIncreasing {
                    line: self.rows.len() + 2,
                    step,
                });
            }
        }
        self.rows.push(CurveRow { step, value });
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.step, r.value));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CurveError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(CurveError::BadHeader);
        }
        let mut curve = LearningCurve::new();
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let (s, v) = line.split_once(',').ok_or(CurveError::BadRow { line: line_no })?;
            let step: u64 = s.trim().parse().map_err(|_| CurveError::BadRow { line: line_no })?;
            let value: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or(CurveError::BadRow { line: line_no })?;
            curve
                .push(step, value)
                .map_err(|_| CurveError::NotIncreasing { line: line_no, step })?;
        }
        Ok(curve)
    }
}
