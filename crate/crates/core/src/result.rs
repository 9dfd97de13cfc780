//! Test outcomes and the reject/accept convention.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Nominal levels, in the order every critical-value triple is stored.
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Reject when the statistic is at or below the critical value.
    Left,
    /// Reject when the statistic is at or above the critical value.
    Right,
    /// Reject when the absolute statistic is at or above the critical value.
    Both,
}

impl Tail {
    pub fn as_str(self) -> &'static str {
        match self {
            Tail::Left => "left",
            Tail::Right => "right",
            Tail::Both => "two_sided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    Accept,
}

impl Decision {
    pub fn from_reject(reject: bool) -> Self {
        if reject {
            Decision::Reject
        } else {
            Decision::Accept
        }
    }

    pub fn is_reject(self) -> bool {
        self == Decision::Reject
    }

    /// Table convention: TRUE when the null is *not* rejected.
    pub fn as_true_false(self) -> &'static str {
        match self {
            Decision::Accept => "TRUE",
            Decision::Reject => "FALSE",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Reject => "reject",
            Decision::Accept => "accept",
        })
    }
}

pub fn decide(statistic: f64, critical: f64, tail: Tail) -> Decision {
    Decision::from_reject(match tail {
        Tail::Left => statistic <= critical,
        Tail::Right => statistic >= critical,
        Tail::Both => statistic.abs() >= critical,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDiagnostic {
    pub unit: String,
    pub t_stat: f64,
    pub lag: usize,
    pub p_value: Option<f64>,
    pub rho2: Option<f64>,
}

/// Which combination rule a dependence-aware p-value test applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationBranch {
    /// No cross-dependence detected: plain inverse-normal combination.
    Choi,
    /// Cross-dependence detected: correlation-corrected combination.
    Hartung,
}

impl CombinationBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            CombinationBranch::Choi => "choi",
            CombinationBranch::Hartung => "hartung",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationInfo {
    pub branch: CombinationBranch,
    pub cd_stat: f64,
    pub cd_p_value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub critical_values: [f64; 3],
    pub decisions: [Decision; 3],
    pub tail: Tail,
    pub per_unit: Vec<UnitDiagnostic>,
    pub combination: Option<CombinationInfo>,
}

impl TestResult {
    pub fn new(
        test_name: impl Into<String>,
        statistic: f64,
        p_value: Option<f64>,
        critical_values: [f64; 3],
        tail: Tail,
    ) -> Self {
        let decisions = critical_values.map(|c| decide(statistic, c, tail));
        Self {
            test_name: test_name.into(),
            statistic,
            p_value,
            critical_values,
            decisions,
            tail,
            per_unit: Vec::new(),
            combination: None,
        }
    }

    pub fn with_units(mut self, per_unit: Vec<UnitDiagnostic>) -> Self {
        self.per_unit = per_unit;
        self
    }

    pub fn rejects_at(&self, level: f64) -> bool {
        LEVELS
            .iter()
            .position(|&l| (l - level).abs() < 1e-12)
            .map(|k| self.decisions[k].is_reject())
            .unwrap_or_else(|| panic!("unsupported level {level}"))
    }

    /// Decisions recomputed from the statistic, critical values and tail agree
    /// with the stored ones.
    pub fn is_consistent(&self) -> bool {
        self.critical_values
            .iter()
            .zip(&self.decisions)
            .all(|(&c, &d)| decide(self.statistic, c, self.tail) == d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_and_right_tails() {
        let l = TestResult::new("x", -2.0, None, [-2.3263, -1.6449, -1.2816], Tail::Left);
        assert_eq!(
            l.decisions,
            [Decision::Accept, Decision::Reject, Decision::Reject]
        );
        let r = TestResult::new("x", 30.0, None, [37.566, 31.410, 28.412], Tail::Right);
        assert_eq!(
            r.decisions,
            [Decision::Accept, Decision::Accept, Decision::Reject]
        );
        assert!(l.is_consistent() && r.is_consistent());
    }

    #[test]
    fn true_means_not_rejected() {
        assert_eq!(Decision::Accept.as_true_false(), "TRUE");
        assert_eq!(Decision::Reject.as_true_false(), "FALSE");
    }
}
