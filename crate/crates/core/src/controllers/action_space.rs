use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Parallel,
    Admittance,
}

/// The eight policy models: six pose actions plus a scalar (1) or
/// per-axis (6) action for each controller gain group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionSpaceModel {
    P9,
    P14,
    P19,
    P24,
    A8,
    A13,
    A13pd,
    A18,
}

impl ActionSpaceModel {
    pub const ALL: [ActionSpaceModel; 8] = [
        Self::P9,
        Self::P14,
        Self::P19,
        Self::P24,
        Self::A8,
        Self::A13,
        Self::A13pd,
        Self::A18,
    ];

    pub fn scheme(self) -> Scheme {
        match self {
            Self::P9 | Self::P14 | Self::P19 | Self::P24 => Scheme::Parallel,
            _ => Scheme::Admittance,
        }
    }

    /// Per-group action counts after the six pose actions:
    /// parallel `[PD, PI, S]`, admittance `[PD, stiffness]`.
    pub fn group_counts(self) -> &'static [usize] {
        match self {
            Self::P9 => &[1, 1, 1],
            Self::P14 => &[1, 1, 6],
            Self::P19 => &[6, 6, 1],
            Self::P24 => &[6, 6, 6],
            Self::A8 => &[1, 1],
            Self::A13 => &[1, 6],
            Self::A13pd => &[6, 1],
            Self::A18 => &[6, 6],
        }
    }

    pub fn dim(self) -> usize {
        6 + self.group_counts().iter().sum::<usize>()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::P9 => "P-9",
            Self::P14 => "P-14",
            Self::P19 => "P-19",
            Self::P24 => "P-24",
            Self::A8 => "A-8",
            Self::A13 => "A-13",
            Self::A13pd => "A-13pd",
            Self::A18 => "A-18",
        }
    }
}

impl fmt::Display for ActionSpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionSpaceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

impl Serialize for ActionSpaceModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ActionSpaceModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A policy action split into the pose command and broadcast gain groups,
/// all still in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedAction {
    pub a_x: Vec6,
    /// One 6-vector per gain group, in the order of `group_counts`.
    pub groups: Vec<Vec6>,
}

pub fn expand_action(model: ActionSpaceModel, a: &[f64]) -> Result<ExpandedAction> {
    if a.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: a.len(),
        });
    }
    let clamp = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
    let a_x = Vec6::from_fn(|i, _| clamp(a[i]));
    let mut offset = 6;
    let groups = model
        .group_counts()
        .iter()
        .map(|&n| {
            let g = if n == 1 {
                Vec6::repeat(clamp(a[offset]))
            } else {
                Vec6::from_fn(|i, _| clamp(a[offset + i]))
            };
            offset += n;
            g
        })
        .collect();
    Ok(ExpandedAction { a_x, groups })
}
