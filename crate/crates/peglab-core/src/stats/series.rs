//! Date-indexed observation series and inner-join alignment.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::deviation::Target;
use super::StatsError;

/// Daily observations sorted by date with unique dates. When an input lists
/// a date twice, the later entry wins (revisions overwrite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl Series {
    pub fn from_pairs(pairs: Vec<(NaiveDate, f64)>) -> Result<Series, StatsError> {
        if pairs.is_empty() {
            return Err(StatsError::EmptySeries);
        }
        if let Some((_, v)) = pairs.iter().find(|(_, v)| !v.is_finite()) {
            return Err(StatsError::NonFinite { value: *v });
        }
        let mut map = std::collections::BTreeMap::new();
        for (d, v) in pairs {
            map.insert(d, v);
        }
        let (dates, values) = map.into_iter().unzip();
        Ok(Series { dates, values })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        *self.dates.last().expect("non-empty by construction")
    }
}

/// A price series tied to the peg definition it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub series: Series,
    pub target: Target,
}

impl PriceSeries {
    pub fn new(series: Series, target: Target) -> Result<PriceSeries, StatsError> {
        target.validate()?;
        Ok(PriceSeries { series, target })
    }
}

/// Two series restricted to their shared dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub dates: Vec<NaiveDate>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Inner join of two series on their dates. Errors when no date overlaps.
pub fn align(a: &Series, b: &Series) -> Result<Aligned, StatsError> {
    let mut out = Aligned { dates: Vec::new(), a: Vec::new(), b: Vec::new() };
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a.dates[i].cmp(&b.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.dates.push(a.dates[i]);
                out.a.push(a.values[i]);
                out.b.push(b.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if out.dates.is_empty() {
        return Err(StatsError::InsufficientOverlap);
    }
    Ok(out)
}
