//! TOML department profiles.
//!
//! Durations are triangular `{ min, mode, max }` tables in minutes, opening
//! hours are `"HH:MM-HH:MM"` or `"closed"`, and footfall is given either
//! inline as 24 hourly rates per weekday or as a CSV file with columns
//! `weekday,hour,footfall` (path relative to the config file).

use std::fs;
use std::path::{Path, PathBuf};

use manprasim_core::agents::SatisfactionWeights;
use manprasim_core::department::{
    AdjustRules, Distributions, FootfallTable, OpeningHours, Probabilities, WEEKDAYS,
};
use manprasim_core::stochastics::{AdjustRule, EventProbability, TriangularDist};
use manprasim_core::{DepartmentConfig, Staffing};
use serde::{Deserialize, Serialize};

use crate::error::ConfigLoadError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularFile {
    pub min: f64,
    pub mode: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionsFile {
    pub browse: TriangularFile,
    pub normal_help: TriangularFile,
    pub expert_help: TriangularFile,
    pub pay_service: TriangularFile,
    pub refund_service: TriangularFile,
    pub patience: TriangularFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilitiesFile {
    pub buy_after_browse: f64,
    pub need_help: f64,
    pub buy_after_help: f64,
    pub need_refund: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjustRulesFile {
    pub buy: String,
    pub help: String,
    pub refund: String,
}

impl Default for AdjustRulesFile {
    fn default() -> Self {
        let d = AdjustRules::default();
        Self {
            buy: d.buy.name().into(),
            help: d.help.name().into(),
            refund: d.refund.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffingFile {
    pub normal_sellers: u32,
    pub expert_sellers: u32,
    pub cashiers: u32,
    #[serde(default)]
    pub managers: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeekFile<T> {
    pub monday: T,
    pub tuesday: T,
    pub wednesday: T,
    pub thursday: T,
    pub friday: T,
    pub saturday: T,
    pub sunday: T,
}

impl<T> WeekFile<T> {
    fn days(&self) -> [&T; 7] {
        [
            &self.monday,
            &self.tuesday,
            &self.wednesday,
            &self.thursday,
            &self.friday,
            &self.saturday,
            &self.sunday,
        ]
    }

    fn from_days(d: [T; 7]) -> Self {
        let [monday, tuesday, wednesday, thursday, friday, saturday, sunday] = d;
        Self {
            monday,
            tuesday,
            wednesday,
            thursday,
            friday,
            saturday,
            sunday,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootfallCsv {
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, expecting = "a `csv` path or 24 hourly values for each weekday")]
pub enum FootfallFile {
    Csv(FootfallCsv),
    Inline(WeekFile<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub served_help_completed: i32,
    pub purchase_completed: i32,
    pub refund_completed: i32,
    pub reneged_help_queue: i32,
    pub reneged_pay_queue: i32,
    pub reneged_refund_queue: i32,
    pub left_empty_handed: i32,
    pub forced_egress_at_close: i32,
}

impl Default for WeightsFile {
    fn default() -> Self {
        weights_file(&SatisfactionWeights::default())
    }
}

fn default_egress() -> f64 {
    15.0
}

/// On-disk form of a [`DepartmentConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepartmentFile {
    pub name: String,
    /// Share of help seekers who need an expert.
    pub expert_share: f64,
    /// Share of sellers made experts in staffing sweeps.
    pub expert_fraction: f64,
    #[serde(default = "default_egress")]
    pub egress_minutes: f64,
    pub distributions: DistributionsFile,
    pub probabilities: ProbabilitiesFile,
    #[serde(default)]
    pub adjust_rules: AdjustRulesFile,
    pub staffing: StaffingFile,
    pub opening_hours: WeekFile<String>,
    #[serde(default)]
    pub weights: WeightsFile,
    pub footfall: FootfallFile,
}

fn tri_file(d: &TriangularDist) -> TriangularFile {
    TriangularFile {
        min: d.min(),
        mode: d.mode(),
        max: d.max(),
    }
}

fn weights_file(w: &SatisfactionWeights) -> WeightsFile {
    WeightsFile {
        served_help_completed: w.served_help_completed,
        purchase_completed: w.purchase_completed,
        refund_completed: w.refund_completed,
        reneged_help_queue: w.reneged_help_queue,
        reneged_pay_queue: w.reneged_pay_queue,
        reneged_refund_queue: w.reneged_refund_queue,
        left_empty_handed: w.left_empty_handed,
        forced_egress_at_close: w.forced_egress_at_close,
    }
}

fn clock(minutes: u32) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

impl DepartmentFile {
    /// Serialisable form with footfall inlined.
    pub fn from_config(c: &DepartmentConfig) -> Self {
        let d = &c.distributions;
        let p = &c.probabilities;
        let hours = c.opening_hours.0.map(|w| match w {
            Some((open, close)) => format!("{}-{}", clock(open), clock(close)),
            None => "closed".to_string(),
        });
        let footfall = c.footfall.0.map(|row| row.to_vec());
        Self {
            name: c.name.clone(),
            expert_share: c.expert_share.value(),
            expert_fraction: c.expert_fraction,
            egress_minutes: c.egress_minutes,
            distributions: DistributionsFile {
                browse: tri_file(&d.browse),
                normal_help: tri_file(&d.normal_help),
                expert_help: tri_file(&d.expert_help),
                pay_service: tri_file(&d.pay_service),
                refund_service: tri_file(&d.refund_service),
                patience: tri_file(&d.patience),
            },
            probabilities: ProbabilitiesFile {
                buy_after_browse: p.buy_after_browse.value(),
                need_help: p.need_help.value(),
                buy_after_help: p.buy_after_help.value(),
                need_refund: p.need_refund.value(),
            },
            adjust_rules: AdjustRulesFile {
                buy: c.adjust_rules.buy.name().into(),
                help: c.adjust_rules.help.name().into(),
                refund: c.adjust_rules.refund.name().into(),
            },
            staffing: StaffingFile {
                normal_sellers: c.staffing.normal_sellers,
                expert_sellers: c.staffing.expert_sellers,
                cashiers: c.staffing.cashiers,
                managers: c.staffing.managers,
            },
            opening_hours: WeekFile::from_days(hours),
            weights: weights_file(&c.weights),
            footfall: FootfallFile::Inline(WeekFile::from_days(footfall)),
        }
    }

    /// Resolve into a validated configuration. `base` is the directory
    /// relative footfall CSV paths are taken from.
    pub fn into_config(self, base: &Path) -> Result<DepartmentConfig, FieldError> {
        let tri = |field: &str, t: &TriangularFile| {
            TriangularDist::new(t.min, t.mode, t.max)
                .map_err(|e| FieldError::new(format!("distributions.{field}"), e.to_string()))
        };
        let d = &self.distributions;
        let distributions = Distributions {
            browse: tri("browse", &d.browse)?,
            normal_help: tri("normal_help", &d.normal_help)?,
            expert_help: tri("expert_help", &d.expert_help)?,
            pay_service: tri("pay_service", &d.pay_service)?,
            refund_service: tri("refund_service", &d.refund_service)?,
            patience: tri("patience", &d.patience)?,
        };
        let prob = |field: &str, p: f64| {
            EventProbability::new(p).map_err(|e| FieldError::new(field, e.to_string()))
        };
        let p = &self.probabilities;
        let probabilities = Probabilities {
            buy_after_browse: prob("probabilities.buy_after_browse", p.buy_after_browse)?,
            need_help: prob("probabilities.need_help", p.need_help)?,
            buy_after_help: prob("probabilities.buy_after_help", p.buy_after_help)?,
            need_refund: prob("probabilities.need_refund", p.need_refund)?,
        };
        let rule = |field: &str, name: &str| match name {
            "midpoint" => Ok(AdjustRule::Midpoint),
            "ratio" => Ok(AdjustRule::Ratio),
            other => Err(FieldError::new(
                format!("adjust_rules.{field}"),
                format!("unknown rule {other:?}, expected \"midpoint\" or \"ratio\""),
            )),
        };
        let adjust_rules = AdjustRules {
            buy: rule("buy", &self.adjust_rules.buy)?,
            help: rule("help", &self.adjust_rules.help)?,
            refund: rule("refund", &self.adjust_rules.refund)?,
        };
        let mut hours = [None; 7];
        for (i, text) in self.opening_hours.days().iter().enumerate() {
            hours[i] = parse_window(text)
                .map_err(|m| FieldError::new(format!("opening_hours.{}", WEEKDAYS[i]), m))?;
        }
        let footfall = match &self.footfall {
            FootfallFile::Inline(week) => {
                let mut table = [[0.0; 24]; 7];
                for (i, row) in week.days().iter().enumerate() {
                    if row.len() != 24 {
                        return Err(FieldError::new(
                            format!("footfall.{}", WEEKDAYS[i]),
                            format!("expected 24 hourly values, got {}", row.len()),
                        ));
                    }
                    table[i].copy_from_slice(row);
                }
                FootfallTable(table)
            }
            FootfallFile::Csv(f) => read_footfall_csv(&base.join(&f.csv))?,
        };
        let w = &self.weights;
        let config = DepartmentConfig {
            name: self.name,
            distributions,
            probabilities,
            adjust_rules,
            expert_share: prob("expert_share", self.expert_share)?,
            expert_fraction: self.expert_fraction,
            staffing: Staffing {
                normal_sellers: self.staffing.normal_sellers,
                expert_sellers: self.staffing.expert_sellers,
                cashiers: self.staffing.cashiers,
                managers: self.staffing.managers,
            },
            opening_hours: OpeningHours(hours),
            footfall,
            egress_minutes: self.egress_minutes,
            weights: SatisfactionWeights {
                served_help_completed: w.served_help_completed,
                purchase_completed: w.purchase_completed,
                refund_completed: w.refund_completed,
                reneged_help_queue: w.reneged_help_queue,
                reneged_pay_queue: w.reneged_pay_queue,
                reneged_refund_queue: w.reneged_refund_queue,
                left_empty_handed: w.left_empty_handed,
                forced_egress_at_close: w.forced_egress_at_close,
            },
        };
        config
            .validate()
            .map_err(|e| FieldError::new(e.field, e.message))?;
        Ok(config)
    }
}

/// A semantic error tied to a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn parse_clock(s: &str) -> Option<u32> {
    let (h, m) = s.trim().split_once(':')?;
    let (h, m): (u32, u32) = (h.parse().ok()?, m.parse().ok()?);
    (h <= 24 && m < 60 && h * 60 + m <= 1440).then_some(h * 60 + m)
}

fn parse_window(s: &str) -> Result<Option<(u32, u32)>, String> {
    if s.trim() == "closed" {
        return Ok(None);
    }
    let bad = || format!("expected \"HH:MM-HH:MM\" or \"closed\", got {s:?}");
    let (open, close) = s.split_once('-').ok_or_else(bad)?;
    Ok(Some((
        parse_clock(open).ok_or_else(bad)?,
        parse_clock(close).ok_or_else(bad)?,
    )))
}

#[derive(Debug, Deserialize)]
struct FootfallRow {
    weekday: String,
    hour: usize,
    footfall: f64,
}

/// Read a `weekday,hour,footfall` table. Missing cells are zero; repeated
/// cells are an error.
pub fn read_footfall_csv(path: &Path) -> Result<FootfallTable, FieldError> {
    let field = || format!("footfall.csv ({})", path.display());
    let mut reader = csv::Reader::from_path(path).map_err(|e| FieldError::new(field(), e.to_string()))?;
    let mut table = [[0.0; 24]; 7];
    let mut seen = [[false; 24]; 7];
    for (i, row) in reader.deserialize::<FootfallRow>().enumerate() {
        let row_field = || format!("{} row {}", field(), i + 2);
        let row = row.map_err(|e| FieldError::new(row_field(), e.to_string()))?;
        let day = WEEKDAYS
            .iter()
            .position(|d| d.eq_ignore_ascii_case(row.weekday.trim()))
            .ok_or_else(|| FieldError::new(row_field(), format!("unknown weekday {:?}", row.weekday)))?;
        if row.hour > 23 {
            return Err(FieldError::new(row_field(), format!("hour {} outside 0..=23", row.hour)));
        }
        if std::mem::replace(&mut seen[day][row.hour], true) {
            return Err(FieldError::new(
                row_field(),
                format!("duplicate cell {} hour {}", WEEKDAYS[day], row.hour),
            ));
        }
        table[day][row.hour] = row.footfall;
    }
    Ok(FootfallTable(table))
}

/// Serialise a footfall table in the `weekday,hour,footfall` CSV form,
/// listing non-zero cells only.
pub fn footfall_csv(table: &FootfallTable) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["weekday", "hour", "footfall"]).expect("in-memory write");
    for (day, row) in table.0.iter().enumerate() {
        for (hour, &rate) in row.iter().enumerate() {
            if rate != 0.0 {
                w.write_record([WEEKDAYS[day].to_string(), hour.to_string(), rate.to_string()])
                    .expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory write")
}

pub fn to_toml(config: &DepartmentConfig) -> String {
    toml::to_string(&DepartmentFile::from_config(config)).expect("department config serialises")
}

/// Parse a department from TOML text. `origin` names the source in error
/// messages and `base` resolves relative footfall paths.
pub fn parse_department(
    text: &str,
    origin: &str,
    base: &Path,
) -> Result<DepartmentConfig, ConfigLoadError> {
    let file: DepartmentFile = toml::from_str(text).map_err(|e| parse_error(origin, text, &e))?;
    file.into_config(base)
        .map_err(|e| field_error(origin, text, e))
}

pub fn load_department(path: &Path) -> Result<DepartmentConfig, ConfigLoadError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigLoadError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_department(&text, &path.display().to_string(), &base)
}

pub(crate) fn parse_error(origin: &str, text: &str, e: &toml::de::Error) -> ConfigLoadError {
    let (line, column) = match e.span() {
        Some(span) => line_col(text, span.start),
        None => (0, 0),
    };
    ConfigLoadError::Parse {
        origin: origin.to_string(),
        line,
        column,
        message: e.message().to_string(),
    }
}

pub(crate) fn field_error(origin: &str, text: &str, e: FieldError) -> ConfigLoadError {
    ConfigLoadError::Invalid {
        origin: origin.to_string(),
        line: locate(text, &e.field),
        field: e.field,
        message: e.message,
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Best-effort line of a dotted field such as `distributions.normal_help`
/// or `footfall.monday[3]`: the key's line inside its table, else the
/// table header.
pub(crate) fn locate(text: &str, field: &str) -> Option<usize> {
    let path = field.split(' ').next().unwrap_or(field);
    let mut parts: Vec<&str> = path.split('.').map(|p| p.split('[').next().unwrap_or(p)).collect();
    let key = parts.pop()?;
    let table = parts.join(".");
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim_matches(['[', ']']).trim().to_string();
            if current == path {
                header = Some(i + 1);
            }
            continue;
        }
        let Some((k, _)) = line.split_once('=') else {
            continue;
        };
        let k = k.trim().trim_matches('"');
        if current == table && k == key {
            return Some(i + 1);
        }
        // dotted keys at top level or inside a parent table
        let dotted = if current.is_empty() {
            k.to_string()
        } else {
            format!("{current}.{k}")
        };
        if dotted == path {
            return Some(i + 1);
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_parse() {
        assert_eq!(parse_window("09:00-18:00"), Ok(Some((540, 1080))));
        assert_eq!(parse_window("closed"), Ok(None));
        assert!(parse_window("9-18").is_err());
        assert!(parse_window("09:00-25:00").is_err());
    }

    #[test]
    fn locate_finds_keys() {
        let text = "name = \"x\"\n[distributions]\nbrowse = 1\nnormal_help = 2\n[footfall]\nmonday = []\n";
        assert_eq!(locate(text, "name"), Some(1));
        assert_eq!(locate(text, "distributions.normal_help"), Some(4));
        assert_eq!(locate(text, "footfall.monday[3]"), Some(6));
        assert_eq!(locate(text, "opening_hours.monday"), None);
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
