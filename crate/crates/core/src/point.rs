use crate::error::{Error, Result};
use crate::statement::GlobalStatement;

/// Whether `statement` holds at the single ability vector `truth`.
///
/// Each member's local statement is checked against its own failure budget
/// and the global budget is then applied across members. Ties between an
/// entity and one it is compared with make the ordering undefined.
pub fn evaluate_at_point(statement: &GlobalStatement, truth: &[f64]) -> Result<bool> {
    let mut failing_locals = 0usize;
    for local in &statement.locals {
        let l = local.sets.entity;
        let check = |other: usize| -> Result<f64> {
            let len = truth.len();
            if l >= len || other >= len {
                return Err(Error::IndexOutOfRange {
                    index: l.max(other),
                    len,
                });
            }
            if truth[other] == truth[l] {
                return Err(Error::TieInTruth(l.min(other), l.max(other)));
            }
            Ok(truth[other])
        };
        let mut failures = 0usize;
        for &other in &local.sets.above {
            failures += (check(other)? < truth[l]) as usize;
        }
        for &other in &local.sets.below {
            failures += (check(other)? > truth[l]) as usize;
        }
        if failures > local.allowed_failures() {
            failing_locals += 1;
        }
    }
    Ok(failing_locals <= statement.allowed_failures())
}
