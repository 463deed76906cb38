//! Structured outcomes of the certification checks.
//!
//! Every check distinguishes three outcomes. The underlying criteria are
//! one-way implications, so a check that cannot confirm its property reports
//! [`Verdict::Inconclusive`] rather than collapsing to a failure.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Verdict {
    Certified,
    Inconclusive,
    Violated,
}

impl Verdict {
    /// Conjunction: a violation dominates, then an inconclusive entry.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Certified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
        }
    }
}

/// Where a check was bound: the degree, composition and times involved.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Witness {
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub n: Option<usize>,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub composition: Option<Vec<usize>>,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub s: Option<f64>,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub t: Option<f64>,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub u: Option<f64>,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub r: Option<f64>,
}

/// One checked inequality `lhs ≤ rhs` (plus any slack already folded into
/// `rhs`). `margin = rhs − lhs`; `scale` normalizes margins across rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CheckRow {
    pub check: String,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub scale: f64,
    pub witness: Witness,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub note: Option<String>,
}

impl CheckRow {
    /// Row for `lhs ≤ rhs`; certified when the inequality holds.
    pub fn inequality(check: impl Into<String>, lhs: f64, rhs: f64, scale: f64) -> Self {
        let margin = rhs - lhs;
        let verdict = if margin >= 0.0 {
            Verdict::Certified
        } else {
            Verdict::Violated
        };
        CheckRow {
            check: check.into(),
            verdict,
            lhs,
            rhs,
            margin,
            scale: if scale > 0.0 { scale } else { 1.0 },
            witness: Witness::default(),
            note: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn normalized_margin(&self) -> f64 {
        self.margin / self.scale
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VerificationReport {
    pub subject: String,
    pub verdict: Verdict,
    pub rows: Vec<CheckRow>,
    /// Row with the smallest normalized margin.
    pub worst: Option<CheckRow>,
    /// First violated row in insertion order.
    pub first_violation: Option<CheckRow>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        VerificationReport {
            subject: subject.into(),
            verdict: Verdict::Certified,
            rows: Vec::new(),
            worst: None,
            first_violation: None,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.verdict = self.verdict.and(row.verdict);
        if row.verdict == Verdict::Violated && self.first_violation.is_none() {
            self.first_violation = Some(row.clone());
        }
        let replace = match &self.worst {
            None => true,
            Some(w) => row.normalized_margin() < w.normalized_margin(),
        };
        if replace {
            self.worst = Some(row.clone());
        }
        self.rows.push(row);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Folds another report's rows into this one.
    pub fn absorb(&mut self, other: VerificationReport) {
        for row in other.rows {
            self.push(row);
        }
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}
