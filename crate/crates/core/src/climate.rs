//! Monthly meteorological records: CSV ingest, validation and the interval
//! summaries the fuzzy model is fitted to.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Interval, Scalar};

/// Header every climate CSV must carry, verbatim.
pub const CLIMATE_HEADER: [&str; 7] = [
    "month",
    "temp_max",
    "temp_min",
    "temp_avg",
    "insol_max",
    "insol_min",
    "insol_avg",
];

/// Maximum number of fractional digits accepted in a numeric field.
pub const MAX_FRACTION_DIGITS: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum ClimateError {
    #[error("line {line}: header must be `{expected}`, found `{found}`")]
    BadHeader {
        line: u64,
        expected: String,
        found: String,
    },
    #[error("expected exactly 12 monthly rows (months 1-12 once each): {detail}")]
    MissingMonth { detail: String },
    #[error("line {line}: malformed number `{text}` in column `{column}`")]
    MalformedNumber {
        line: u64,
        column: &'static str,
        text: String,
    },
    #[error("line {line}: expected 7 fields, found {found}")]
    MalformedRow { line: u64, found: usize },
    #[error("month {month}: {factor} values violate min <= avg <= max")]
    OrderViolation { month: u8, factor: Factor },
    #[error("month {month}: {factor} value outside physical domain ({detail})")]
    OutOfDomain {
        month: u8,
        factor: Factor,
        detail: &'static str,
    },
    #[error("month {0} outside 1..=12")]
    MonthOutOfRange(i64),
    #[error("csv: {0}")]
    Csv(String),
}

/// The two environmental noise factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    /// Ambient temperature, kelvin.
    Temperature,
    /// Insolation, W/m².
    Insolation,
}

impl Factor {
    pub const ALL: [Factor; 2] = [Factor::Temperature, Factor::Insolation];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Temperature => "temperature",
            Factor::Insolation => "insolation",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Factor::Temperature => "K",
            Factor::Insolation => "W/m^2",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "temperature" | "temp" | "za" | "z_a" => Ok(Factor::Temperature),
            "insolation" | "insol" | "zb" | "z_b" => Ok(Factor::Insolation),
            other => Err(format!("unknown factor `{other}`")),
        }
    }
}

/// One month of the table: temperature in K, insolation in W/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MonthlyClimateRecord<T> {
    pub month_index: u8,
    pub temp_max: T,
    pub temp_min: T,
    pub temp_avg: T,
    pub insol_max: T,
    pub insol_min: T,
    pub insol_avg: T,
}

impl<T: Scalar> MonthlyClimateRecord<T> {
    /// `(min, avg, max)` for one factor.
    pub fn triple(&self, factor: Factor) -> (T, T, T) {
        match factor {
            Factor::Temperature => (self.temp_min, self.temp_avg, self.temp_max),
            Factor::Insolation => (self.insol_min, self.insol_avg, self.insol_max),
        }
    }

    pub fn interval(&self, factor: Factor) -> Interval<T> {
        let (lo, _, hi) = self.triple(factor);
        Interval::new(lo, hi)
    }

    pub fn validate(&self) -> Result<(), ClimateError> {
        let month = self.month_index;
        if !(1..=12).contains(&month) {
            return Err(ClimateError::MonthOutOfRange(i64::from(month)));
        }
        for factor in Factor::ALL {
            let (lo, avg, hi) = self.triple(factor);
            if !(lo.is_finite() && avg.is_finite() && hi.is_finite()) {
                return Err(ClimateError::OutOfDomain {
                    month,
                    factor,
                    detail: "non-finite value",
                });
            }
            match factor {
                Factor::Temperature if lo <= T::zero() => {
                    return Err(ClimateError::OutOfDomain {
                        month,
                        factor,
                        detail: "temperatures must be > 0 K",
                    })
                }
                Factor::Insolation if lo < T::zero() => {
                    return Err(ClimateError::OutOfDomain {
                        month,
                        factor,
                        detail: "insolation must be >= 0",
                    })
                }
                _ => {}
            }
            if !(lo <= avg && avg <= hi) {
                return Err(ClimateError::OrderViolation { month, factor });
            }
        }
        Ok(())
    }
}

/// Twelve validated monthly records, stored in month order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ClimateTable<T> {
    records: Vec<MonthlyClimateRecord<T>>,
}

impl<T: Scalar> ClimateTable<T> {
    /// Validates each record and the 1..=12 permutation, then sorts by month.
    pub fn new(mut records: Vec<MonthlyClimateRecord<T>>) -> Result<Self, ClimateError> {
        if records.len() != 12 {
            return Err(ClimateError::MissingMonth {
                detail: format!("found {} rows", records.len()),
            });
        }
        for r in &records {
            r.validate()?;
        }
        records.sort_by_key(|r| r.month_index);
        for (i, r) in records.iter().enumerate() {
            let expected = i as u8 + 1;
            if r.month_index != expected {
                return Err(ClimateError::MissingMonth {
                    detail: format!("month {expected} absent or duplicated"),
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[MonthlyClimateRecord<T>] {
        &self.records
    }

    pub fn month(&self, month: i64) -> Result<&MonthlyClimateRecord<T>, ClimateError> {
        if !(1..=12).contains(&month) {
            return Err(ClimateError::MonthOutOfRange(month));
        }
        Ok(&self.records[(month - 1) as usize])
    }

    /// Writes the table back out in canonical CSV form (months ascending).
    pub fn to_csv(&self) -> String {
        let mut out = CLIMATE_HEADER.join(",");
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.month_index,
                r.temp_max,
                r.temp_min,
                r.temp_avg,
                r.insol_max,
                r.insol_min,
                r.insol_avg
            ));
        }
        out
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ClimateTable<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T> {
            records: Vec<MonthlyClimateRecord<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        ClimateTable::new(raw.records).map_err(serde::de::Error::custom)
    }
}

/// Plain decimal: optional sign, digits, optional fraction of at most
/// [`MAX_FRACTION_DIGITS`] digits. No exponents, no grouping separators.
fn is_plain_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let int_ok = int.bytes().all(|b| b.is_ascii_digit());
    let frac_ok = frac.is_none_or(|f| {
        !f.is_empty() && f.len() <= MAX_FRACTION_DIGITS && f.bytes().all(|b| b.is_ascii_digit())
    });
    int_ok && frac_ok && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()))
}

fn parse_number<T: Scalar>(
    text: &str,
    line: u64,
    column: &'static str,
) -> Result<T, ClimateError> {
    let malformed = || ClimateError::MalformedNumber {
        line,
        column,
        text: text.to_string(),
    };
    if !is_plain_decimal(text) {
        return Err(malformed());
    }
    text.parse::<T>().map_err(|_| malformed())
}

/// Monthly extremes and averages for Santa Rosa, 2014, in the expected
/// CSV layout.
pub const BUNDLED_CLIMATE_CSV: &str = include_str!("../data/climate_santa_rosa_2014.csv");

/// Parses the seven-column climate CSV. Surrounding whitespace and blank
/// lines are ignored; rows may appear in any month order.
pub fn parse_climate_csv<T: Scalar>(text: &str) -> Result<ClimateTable<T>, ClimateError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut header_seen = false;
    let mut records = Vec::with_capacity(12);
    for row in reader.records() {
        let row = row.map_err(|e| ClimateError::Csv(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        if !header_seen {
            let found: Vec<&str> = row.iter().collect();
            if found != CLIMATE_HEADER {
                return Err(ClimateError::BadHeader {
                    line,
                    expected: CLIMATE_HEADER.join(","),
                    found: found.join(","),
                });
            }
            header_seen = true;
            continue;
        }
        if row.len() != CLIMATE_HEADER.len() {
            return Err(ClimateError::MalformedRow {
                line,
                found: row.len(),
            });
        }
        let month_text = &row[0];
        let month: u8 = month_text
            .parse()
            .map_err(|_| ClimateError::MalformedNumber {
                line,
                column: "month",
                text: month_text.to_string(),
            })?;
        let field = |i: usize| parse_number::<T>(&row[i], line, CLIMATE_HEADER[i]);
        records.push(MonthlyClimateRecord {
            month_index: month,
            temp_max: field(1)?,
            temp_min: field(2)?,
            temp_avg: field(3)?,
            insol_max: field(4)?,
            insol_min: field(5)?,
            insol_avg: field(6)?,
        });
    }
    if !header_seen {
        return Err(ClimateError::BadHeader {
            line: 1,
            expected: CLIMATE_HEADER.join(","),
            found: String::new(),
        });
    }
    ClimateTable::new(records)
}

/// Annual envelope: minimum of the monthly minima and maximum of the monthly
/// maxima.
pub fn annual_extrema<T: Scalar>(table: &ClimateTable<T>, factor: Factor) -> Interval<T> {
    let mut it = table.records().iter().map(|r| r.interval(factor));
    let first = it.next().expect("table holds 12 records");
    it.fold(first, |acc, iv| Interval::new(acc.lo.min(iv.lo), acc.hi.max(iv.hi)))
}

/// The `(min, max)` of one month for one factor.
pub fn monthly_interval<T: Scalar>(
    table: &ClimateTable<T>,
    month: i64,
    factor: Factor,
) -> Result<Interval<T>, ClimateError> {
    Ok(table.month(month)?.interval(factor))
}
