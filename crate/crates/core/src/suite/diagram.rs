//! The implication diagram between the conditions, evaluated in
//! three-valued logic.

use crate::verdict::{Condition, Status};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use Condition::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// `lhs ⇔ ∧ rhs`
    Equivalent,
    /// `lhs ⇒ ∧ rhs`
    Implies,
}

#[derive(Clone, Copy, Debug)]
pub struct Rule {
    pub kind: RuleKind,
    pub lhs: Condition,
    pub rhs: &'static [Condition],
}

impl Rule {
    pub fn name(&self) -> String {
        let arrow = match self.kind {
            RuleKind::Equivalent => "⇔",
            RuleKind::Implies => "⇒",
        };
        let rhs: Vec<&str> = self.rhs.iter().map(|c| c.label()).collect();
        format!("{} {arrow} {}", self.lhs, rhs.join("∧"))
    }

    /// Three-valued truth of the rule: `Some(false)` only when it fails
    /// for every way of resolving the inconclusive entries.
    pub fn evaluate(&self, verdicts: &BTreeMap<Condition, Status>) -> Option<bool> {
        let get = |c: &Condition| verdicts.get(c).copied().unwrap_or(Status::Inconclusive);
        let lhs = get(&self.lhs).definite();
        let rhs = self.rhs.iter().map(get).fold(Status::Holds, Status::and).definite();
        match self.kind {
            RuleKind::Equivalent => Some(lhs? == rhs?),
            RuleKind::Implies => match (lhs, rhs) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            },
        }
    }
}

const fn eq(lhs: Condition, rhs: &'static [Condition]) -> Rule {
    Rule { kind: RuleKind::Equivalent, lhs, rhs }
}

const fn imp(lhs: Condition, rhs: &'static [Condition]) -> Rule {
    Rule { kind: RuleKind::Implies, lhs, rhs }
}

pub const RULES: [Rule; 13] = [
    eq(IV, &[I, II]),
    eq(III, &[I, PClosed]),
    eq(V, &[III, PClosed, PUsc]),
    eq(VI, &[V, II]),
    eq(VI, &[IV, PClosed, PUsc]),
    eq(VI, &[IV, B, S]),
    eq(U, &[V]),
    imp(V, &[B]),
    imp(VI, &[IV]),
    imp(IV, &[II]),
    imp(IV, &[III]),
    imp(V, &[III]),
    imp(III, &[I]),
];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub consistent: bool,
    pub violations: Vec<String>,
    /// rules whose truth depends on how inconclusive entries resolve
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

pub fn diagram_consistency(verdicts: &BTreeMap<Condition, Status>) -> DiagramReport {
    let mut report = DiagramReport { consistent: true, ..Default::default() };
    for rule in &RULES {
        match rule.evaluate(verdicts) {
            Some(true) => {}
            Some(false) => report.violations.push(rule.name()),
            None => report.skipped.push(rule.name()),
        }
    }
    report.consistent = report.violations.is_empty();
    report
}
