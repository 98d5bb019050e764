use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::equilibria::{find_equilibria, EquilibriumKind, EquilibriumSet, Stability};
use super::isocline::{isocline, IsoclineBranch};
use crate::reduction::ReducedParams;
use crate::scalar::{rel_eq, Scalar};

/// Relative tolerance under which two intercepts count as equal.
const INTERCEPT_RTOL: f64 = 1e-9;

/// Generic asymptotic scenario of the reduced map.
///
/// Letters encode the relative position of the isocline intercepts, the
/// digit the number of positive equilibria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Both `φ_i(0,0) ≤ 1`: everything tends to the origin.
    Ext00,
    /// Only species 1 persists.
    Ext1,
    /// Only species 2 persists.
    Ext2,
    /// `R₁₁ < R₂₁`, `R₁₂ > R₂₂`.
    A1,
    A3,
    /// `R₁₁ > R₂₁`, `R₁₂ < R₂₂`.
    B1,
    B3,
    /// `R₁₁ > R₂₁`, `R₁₂ > R₂₂`.
    C0,
    C2,
    /// `R₁₁ < R₂₁`, `R₁₂ < R₂₂`.
    D0,
    D2,
    NonGeneric,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 12] = [
        CaseLabel::Ext00,
        CaseLabel::Ext1,
        CaseLabel::Ext2,
        CaseLabel::A1,
        CaseLabel::A3,
        CaseLabel::B1,
        CaseLabel::B3,
        CaseLabel::C0,
        CaseLabel::C2,
        CaseLabel::D0,
        CaseLabel::D2,
        CaseLabel::NonGeneric,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Ext00 => "Ext00",
            CaseLabel::Ext1 => "Ext1",
            CaseLabel::Ext2 => "Ext2",
            CaseLabel::A1 => "A1",
            CaseLabel::A3 => "A3",
            CaseLabel::B1 => "B1",
            CaseLabel::B3 => "B3",
            CaseLabel::C0 => "C0",
            CaseLabel::C2 => "C2",
            CaseLabel::D0 => "D0",
            CaseLabel::D2 => "D2",
            CaseLabel::NonGeneric => "NonGeneric",
        }
    }

    /// Number of positive equilibria of a generic A/B/C/D case.
    pub fn positive_count(self) -> Option<usize> {
        match self {
            CaseLabel::C0 | CaseLabel::D0 => Some(0),
            CaseLabel::A1 | CaseLabel::B1 => Some(1),
            CaseLabel::C2 | CaseLabel::D2 => Some(2),
            CaseLabel::A3 | CaseLabel::B3 => Some(3),
            _ => None,
        }
    }

    /// Stability of `E₁*`, `E₂*` and of the positive equilibria (in
    /// K-order) that the classification theorem attaches to this case.
    pub fn expected_pattern(self) -> Option<ExpectedPattern> {
        use Stability::{Attracting as At, Saddle as Sa};
        let (semi, pos): ([Stability; 2], &[Stability]) = match self {
            CaseLabel::A1 => ([Sa, Sa], &[At]),
            CaseLabel::A3 => ([Sa, Sa], &[At, Sa, At]),
            CaseLabel::B1 => ([At, At], &[Sa]),
            CaseLabel::B3 => ([At, At], &[Sa, At, Sa]),
            CaseLabel::C0 => ([At, Sa], &[]),
            CaseLabel::C2 => ([At, Sa], &[At, Sa]),
            CaseLabel::D0 => ([Sa, At], &[]),
            CaseLabel::D2 => ([Sa, At], &[Sa, At]),
            _ => return None,
        };
        Some(ExpectedPattern {
            semitrivial: semi,
            positive: pos.to_vec(),
        })
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case label {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedPattern {
    /// `[E₁*, E₂*]`.
    pub semitrivial: [Stability; 2],
    pub positive: Vec<Stability>,
}

impl ExpectedPattern {
    pub fn matches<T: Scalar>(&self, set: &EquilibriumSet<T>) -> bool {
        let semi = [EquilibriumKind::Semitrivial1, EquilibriumKind::Semitrivial2]
            .map(|k| set.by_kind(k).map(|e| e.stability));
        let pos: Vec<Stability> = set.positive().map(|e| e.stability).collect();
        semi == self.semitrivial.map(Some) && pos == self.positive
    }
}

/// Case label together with what it was derived from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification<T> {
    pub label: CaseLabel,
    pub isoclines: [IsoclineBranch<T>; 2],
    pub equilibria: EquilibriumSet<T>,
}

pub fn classify<T: Scalar>(rp: &ReducedParams<T>) -> Classification<T> {
    let isoclines = [isocline(rp, 0), isocline(rp, 1)];
    let equilibria = find_equilibria(rp);
    let label = label_from(&isoclines, &equilibria);
    Classification {
        label,
        isoclines,
        equilibria,
    }
}

pub fn classify_case<T: Scalar>(rp: &ReducedParams<T>) -> CaseLabel {
    classify(rp).label
}

fn label_from<T: Scalar>(iso: &[IsoclineBranch<T>; 2], set: &EquilibriumSet<T>) -> CaseLabel {
    let (r1, r2) = match (iso[0].intercepts, iso[1].intercepts) {
        (None, None) => return CaseLabel::Ext00,
        (Some(_), None) => return CaseLabel::Ext1,
        (None, Some(_)) => return CaseLabel::Ext2,
        (Some(a), Some(b)) => (a, b),
    };
    let tol = T::of(INTERCEPT_RTOL);
    if rel_eq(r1[0], r2[0], tol) || rel_eq(r1[1], r2[1], tol) || set.non_generic {
        return CaseLabel::NonGeneric;
    }
    let letter = match (r1[0] < r2[0], r1[1] > r2[1]) {
        (true, true) => 'A',
        (false, false) => 'B',
        (false, true) => 'C',
        (true, false) => 'D',
    };
    match (letter, set.positive_count()) {
        ('A', 1) => CaseLabel::A1,
        ('A', 3) => CaseLabel::A3,
        ('B', 1) => CaseLabel::B1,
        ('B', 3) => CaseLabel::B3,
        ('C', 0) => CaseLabel::C0,
        ('C', 2) => CaseLabel::C2,
        ('D', 0) => CaseLabel::D0,
        ('D', 2) => CaseLabel::D2,
        _ => CaseLabel::NonGeneric,
    }
}
