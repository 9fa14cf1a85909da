//! Two-group right-censored observations.
//!
//! Group 1 is the treatment arm and group 0 the control arm; status 1 marks an
//! observed event and status 0 a right-censored follow-up time.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    Control,
    Treatment,
}

impl Group {
    pub fn from_code(code: i64) -> Option<Group> {
        match code {
            0 => Some(Group::Control),
            1 => Some(Group::Treatment),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Group::Control => 0,
            Group::Treatment => 1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::Control => Group::Treatment,
            Group::Treatment => Group::Control,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Control => f.write_str("control"),
            Group::Treatment => f.write_str("treatment"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub event: bool,
    pub group: Group,
}

impl Observation {
    pub fn new(time: f64, event: bool, group: Group) -> Self {
        Observation { time, event, group }
    }

    pub fn status(&self) -> u8 {
        u8::from(self.event)
    }
}

/// An unvalidated input row, exactly as parsed from external input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub time: f64,
    pub status: i64,
    pub group: i64,
}

impl From<(f64, i64, i64)> for RawRecord {
    fn from((time, status, group): (f64, i64, i64)) -> Self {
        RawRecord { time, status, group }
    }
}

/// Ordered collection of observations. Iteration order is the input order,
/// which keeps bootstrap resampling reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
}

impl Dataset {
    /// Builds a dataset without requiring both groups to be present.
    ///
    /// Used for resamples and simulations, where a missing group is an
    /// estimation failure rather than an input error. Observations must still
    /// have positive finite times.
    pub fn from_observations(observations: Vec<Observation>) -> Result<Dataset> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (idx, obs) in observations.iter().enumerate() {
            check_time(obs.time, idx + 1)?;
        }
        Ok(Dataset { observations })
    }

    pub(crate) fn from_observations_unchecked(observations: Vec<Observation>) -> Dataset {
        Dataset { observations }
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.observations.iter()
    }

    pub fn group_size(&self, group: Group) -> usize {
        self.observations.iter().filter(|o| o.group == group).count()
    }

    pub fn event_count(&self, group: Group) -> usize {
        self.observations
            .iter()
            .filter(|o| o.group == group && o.event)
            .count()
    }

    /// Largest observed time in `group`, if the group is non-empty.
    pub fn max_time(&self, group: Group) -> Option<f64> {
        self.observations
            .iter()
            .filter(|o| o.group == group)
            .map(|o| o.time)
            .reduce(f64::max)
    }

    /// Same rows with the treatment and control labels exchanged.
    pub fn swap_groups(&self) -> Dataset {
        Dataset {
            observations: self
                .observations
                .iter()
                .map(|o| Observation { group: o.group.other(), ..*o })
                .collect(),
        }
    }
}

fn check_time(time: f64, row: usize) -> Result<()> {
    if !time.is_finite() {
        return Err(Error::Validation { row, message: "nonfinite time".into() });
    }
    if time <= 0.0 {
        return Err(Error::Validation { row, message: "nonpositive time".into() });
    }
    Ok(())
}

/// Validates raw records into a [`Dataset`] suitable for estimation.
///
/// Every row needs a positive finite time, status in {0, 1} and group in
/// {0, 1}; both groups must be represented.
pub fn validate_dataset<R>(rows: impl IntoIterator<Item = R>) -> Result<Dataset>
where
    R: Into<RawRecord>,
{
    let mut observations = Vec::new();
    for (idx, raw) in rows.into_iter().enumerate() {
        let raw = raw.into();
        let row = idx + 1;
        check_time(raw.time, row)?;
        let event = match raw.status {
            0 => false,
            1 => true,
            _ => {
                return Err(Error::Validation { row, message: "status must be 0 or 1".into() })
            }
        };
        let group = Group::from_code(raw.group)
            .ok_or_else(|| Error::Validation { row, message: "group must be 0 or 1".into() })?;
        observations.push(Observation { time: raw.time, event, group });
    }
    if observations.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for group in [Group::Treatment, Group::Control] {
        if !observations.iter().any(|o| o.group == group) {
            return Err(Error::EmptyGroup(group));
        }
    }
    Ok(Dataset { observations })
}
