//! Parameter lists of a Kampé de Fériet series and their validation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KdfError, Result};
use crate::gamma::nonpositive_integer;

/// Maximum length of any single parameter list.
pub const MAX_LIST_LEN: usize = 8;

/// The six parameter lists `(a_p); (b_q); (c_k) / (α_l); (β_m); (γ_n)`.
///
/// Joint lists carry Pochhammer symbols indexed by `r + s`, the `x` lists by `r`
/// and the `y` lists by `s`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdFShape {
    #[serde(default)]
    pub upper_joint: Vec<f64>,
    #[serde(default)]
    pub upper_x: Vec<f64>,
    #[serde(default)]
    pub upper_y: Vec<f64>,
    #[serde(default)]
    pub lower_joint: Vec<f64>,
    #[serde(default)]
    pub lower_x: Vec<f64>,
    #[serde(default)]
    pub lower_y: Vec<f64>,
}

/// Identifies one of the six lists of a [`KdFShape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamList {
    UpperJoint,
    UpperX,
    UpperY,
    LowerJoint,
    LowerX,
    LowerY,
}

impl ParamList {
    pub const ALL: [ParamList; 6] = [
        ParamList::UpperJoint,
        ParamList::UpperX,
        ParamList::UpperY,
        ParamList::LowerJoint,
        ParamList::LowerX,
        ParamList::LowerY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamList::UpperJoint => "upper_joint",
            ParamList::UpperX => "upper_x",
            ParamList::UpperY => "upper_y",
            ParamList::LowerJoint => "lower_joint",
            ParamList::LowerX => "lower_x",
            ParamList::LowerY => "lower_y",
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(
            self,
            ParamList::UpperJoint | ParamList::UpperX | ParamList::UpperY
        )
    }

    /// Summation index the list's Pochhammer symbols follow.
    pub fn index(self) -> SeriesIndex {
        match self {
            ParamList::UpperJoint | ParamList::LowerJoint => SeriesIndex::Joint,
            ParamList::UpperX | ParamList::LowerX => SeriesIndex::R,
            ParamList::UpperY | ParamList::LowerY => SeriesIndex::S,
        }
    }
}

/// Which summation index a Pochhammer symbol follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesIndex {
    R,
    S,
    Joint,
}

impl fmt::Display for SeriesIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesIndex::R => "r",
            SeriesIndex::S => "s",
            SeriesIndex::Joint => "r+s",
        })
    }
}

/// The list lengths `(p, q, k; l, m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShapeOrders {
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl KdFShape {
    /// Builds a shape, checking list lengths and finiteness.
    pub fn new(
        upper_joint: Vec<f64>,
        upper_x: Vec<f64>,
        upper_y: Vec<f64>,
        lower_joint: Vec<f64>,
        lower_x: Vec<f64>,
        lower_y: Vec<f64>,
    ) -> Result<Self> {
        let shape = KdFShape {
            upper_joint,
            upper_x,
            upper_y,
            lower_joint,
            lower_x,
            lower_y,
        };
        shape.check_structure()?;
        Ok(shape)
    }

    pub fn list(&self, which: ParamList) -> &[f64] {
        match which {
            ParamList::UpperJoint => &self.upper_joint,
            ParamList::UpperX => &self.upper_x,
            ParamList::UpperY => &self.upper_y,
            ParamList::LowerJoint => &self.lower_joint,
            ParamList::LowerX => &self.lower_x,
            ParamList::LowerY => &self.lower_y,
        }
    }

    pub fn list_mut(&mut self, which: ParamList) -> &mut Vec<f64> {
        match which {
            ParamList::UpperJoint => &mut self.upper_joint,
            ParamList::UpperX => &mut self.upper_x,
            ParamList::UpperY => &mut self.upper_y,
            ParamList::LowerJoint => &mut self.lower_joint,
            ParamList::LowerX => &mut self.lower_x,
            ParamList::LowerY => &mut self.lower_y,
        }
    }

    pub fn orders(&self) -> ShapeOrders {
        ShapeOrders {
            p: self.upper_joint.len(),
            q: self.upper_x.len(),
            k: self.upper_y.len(),
            l: self.lower_joint.len(),
            m: self.lower_x.len(),
            n: self.lower_y.len(),
        }
    }

    /// Length and finiteness checks; does not look for poles.
    pub fn check_structure(&self) -> Result<()> {
        for which in ParamList::ALL {
            let list = self.list(which);
            if list.len() > MAX_LIST_LEN {
                return Err(KdfError::shape(
                    which.name(),
                    format!("{} entries exceed the limit of {MAX_LIST_LEN}", list.len()),
                ));
            }
            if let Some(i) = list.iter().position(|v| !v.is_finite()) {
                return Err(KdfError::shape(
                    format!("{}[{i}]", which.name()),
                    "parameter is not finite",
                ));
            }
        }
        Ok(())
    }
}

/// One finding of [`validate_shape`].
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeIssue {
    /// A lower parameter `-k`; its Pochhammer symbol vanishes from order `k+1`.
    /// `reachable` is false when termination of the numerator keeps every
    /// needed order at or below `k`.
    DenominatorPole {
        list: ParamList,
        index: usize,
        value: f64,
        reachable: bool,
    },
    /// An upper parameter `-k`, truncating the series at index `order = k`.
    Terminates {
        list: ParamList,
        index: usize,
        value: f64,
        direction: SeriesIndex,
        order: u64,
    },
}

impl fmt::Display for ShapeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeIssue::DenominatorPole {
                list,
                index,
                value,
                reachable: true,
            } => write!(
                f,
                "undefined: denominator pole at {}[{index}] = {value}",
                list.name()
            ),
            ShapeIssue::DenominatorPole {
                list, index, value, ..
            } => write!(
                f,
                "denominator {}[{index}] = {value} is shielded by termination",
                list.name()
            ),
            ShapeIssue::Terminates {
                list,
                index,
                direction,
                order,
                ..
            } => write!(
                f,
                "terminates in {direction} at order {order} ({}[{index}])",
                list.name()
            ),
        }
    }
}

/// Outcome of [`validate_shape`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ShapeIssue>,
    /// Largest `r` with a nonzero term, if the series terminates in `r`.
    pub r_max: Option<u64>,
    /// Largest `s` with a nonzero term, if the series terminates in `s`.
    pub s_max: Option<u64>,
    /// Largest `r + s` with a nonzero term, if bounded.
    pub diagonal_max: Option<u64>,
}

impl ValidationReport {
    /// No reachable denominator pole.
    pub fn is_valid(&self) -> bool {
        !self.issues.iter().any(|issue| {
            matches!(
                issue,
                ShapeIssue::DenominatorPole {
                    reachable: true,
                    ..
                }
            )
        })
    }

    pub fn is_terminating(&self) -> bool {
        self.r_max.is_some() || self.s_max.is_some() || self.diagonal_max.is_some()
    }

    /// Terminates in both directions, i.e. the series is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.reachable_diagonal().is_some()
    }

    /// Bound on `r + s` implied by all terminations together.
    pub fn reachable_diagonal(&self) -> Option<u64> {
        let from_parts = match (self.r_max, self.s_max) {
            (Some(r), Some(s)) => Some(r + s),
            _ => None,
        };
        match (self.diagonal_max, from_parts) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn reachable_r(&self) -> Option<u64> {
        min_opt(self.r_max, self.diagonal_max)
    }

    fn reachable_s(&self) -> Option<u64> {
        min_opt(self.s_max, self.diagonal_max)
    }

    /// First reachable pole, as an error.
    pub fn first_pole(&self) -> Option<KdfError> {
        self.issues.iter().find_map(|issue| match issue {
            ShapeIssue::DenominatorPole {
                list,
                index,
                value,
                reachable: true,
            } => Some(KdfError::Pole {
                parameter: format!("{}[{index}]", list.name()),
                value: *value,
            }),
            _ => None,
        })
    }

    /// Human-readable one-line summary.
    pub fn summary(&self) -> String {
        if self.issues.is_empty() {
            return "valid, non-terminating".to_string();
        }
        let parts: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        parts.join("; ")
    }
}

fn min_opt(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Flags denominator poles and terminating numerators of a shape.
pub fn validate_shape(shape: &KdFShape) -> ValidationReport {
    let mut report = ValidationReport::default();

    for which in [ParamList::UpperJoint, ParamList::UpperX, ParamList::UpperY] {
        for (index, &value) in shape.list(which).iter().enumerate() {
            if let Some(k) = nonpositive_integer(value) {
                let direction = which.index();
                let slot = match direction {
                    SeriesIndex::R => &mut report.r_max,
                    SeriesIndex::S => &mut report.s_max,
                    SeriesIndex::Joint => &mut report.diagonal_max,
                };
                *slot = Some(slot.map_or(k, |old| old.min(k)));
                report.issues.push(ShapeIssue::Terminates {
                    list: which,
                    index,
                    value,
                    direction,
                    order: k,
                });
            }
        }
    }

    for which in [ParamList::LowerJoint, ParamList::LowerX, ParamList::LowerY] {
        for (index, &value) in shape.list(which).iter().enumerate() {
            if let Some(k) = nonpositive_integer(value) {
                let needed = match which.index() {
                    SeriesIndex::R => report.reachable_r(),
                    SeriesIndex::S => report.reachable_s(),
                    SeriesIndex::Joint => report.reachable_diagonal(),
                };
                let reachable = needed.is_none_or(|top| top > k);
                report.issues.push(ShapeIssue::DenominatorPole {
                    list: which,
                    index,
                    value,
                    reachable,
                });
            }
        }
    }

    report
}
