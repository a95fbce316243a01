//! CSV schemas.
//!
//! | file                 | columns                                                                                  |
//! |----------------------|------------------------------------------------------------------------------------------|
//! | `ratings.csv`        | user_id, age, gender, is_caregiver, condition, drug_name, overall_rating, effectiveness, side_effect_severity, comment |
//! | `drugs.csv`          | drug_name, category_1..C, side_effect_1..S, benefit_1..B                                 |
//! | `interactions.csv`   | drug_a, drug_b, severity                                                                 |
//! | `adverse_events.csv` | drug_name, age, gender, reaction, events, other_drugs                                    |
//!
//! Multi-valued cells (`events`, `other_drugs`) are `;`-separated. Row
//! numbers in errors count data rows from 1.

use super::{
    AdverseEvent, AdverseEventRecord, DatasetBundle, DrugProfile, Gender, InteractionRecord,
    RatingRecord, Severity,
};
use crate::error::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

pub const RATINGS_FILE: &str = "ratings.csv";
pub const DRUGS_FILE: &str = "drugs.csv";
pub const INTERACTIONS_FILE: &str = "interactions.csv";
pub const ADVERSE_FILE: &str = "adverse_events.csv";

const RATING_COLUMNS: [&str; 10] = [
    "user_id",
    "age",
    "gender",
    "is_caregiver",
    "condition",
    "drug_name",
    "overall_rating",
    "effectiveness",
    "side_effect_severity",
    "comment",
];
const INTERACTION_COLUMNS: [&str; 3] = ["drug_a", "drug_b", "severity"];
const ADVERSE_COLUMNS: [&str; 6] = [
    "drug_name",
    "age",
    "gender",
    "reaction",
    "events",
    "other_drugs",
];

const CATEGORY_PREFIX: &str = "category_";
const SIDE_EFFECT_PREFIX: &str = "side_effect_";
const BENEFIT_PREFIX: &str = "benefit_";

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, row: usize, err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Row {
            file: file_label(path),
            row,
            message: format!("{other:?}"),
        },
    }
}

/// Maps required column names to their header positions.
struct Columns {
    file: String,
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(path: &Path, headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let file = file_label(path);
        let index: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_ascii_lowercase(), i))
            .collect();
        for col in required {
            if !index.contains_key(*col) {
                return Err(Error::Schema {
                    file,
                    column: (*col).to_string(),
                });
            }
        }
        Ok(Columns { file, index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, col: &str) -> &'r str {
        self.index
            .get(col)
            .and_then(|&i| record.get(i))
            .unwrap_or("")
    }

    fn row_err(&self, row: usize, message: impl Into<String>) -> Error {
        Error::Row {
            file: self.file.clone(),
            row,
            message: message.into(),
        }
    }

    fn bounded(&self, record: &csv::StringRecord, row: usize, col: &str, max: u32) -> Result<u32> {
        let raw = self.get(record, col);
        let value: u32 = raw
            .parse()
            .map_err(|_| self.row_err(row, format!("{col} `{raw}` is not a non-negative integer")))?;
        if value > max {
            return Err(self.row_err(row, format!("{col} out of range [0,{max}]")));
        }
        Ok(value)
    }

    fn age(&self, record: &csv::StringRecord, row: usize) -> Result<u32> {
        let raw = self.get(record, "age");
        raw.parse()
            .map_err(|_| self.row_err(row, format!("age `{raw}` is not a non-negative integer")))
    }

    fn non_empty(&self, record: &csv::StringRecord, row: usize, col: &str) -> Result<String> {
        let v = self.get(record, col);
        if v.is_empty() {
            return Err(self.row_err(row, format!("{col} is empty")));
        }
        Ok(v.to_string())
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

fn split_multi(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty() && *s != "-")
}

pub fn load_ratings(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let cols = Columns::new(path, &headers, &RATING_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, row, e))?;
        let caregiver_raw = cols.get(&rec, "is_caregiver");
        out.push(RatingRecord {
            user_id: cols.get(&rec, "user_id").to_string(),
            age: cols.age(&rec, row)?,
            gender: Gender::parse(cols.get(&rec, "gender")),
            is_caregiver: parse_bool(caregiver_raw).ok_or_else(|| {
                cols.row_err(row, format!("is_caregiver `{caregiver_raw}` is not a boolean"))
            })?,
            condition_text: cols.get(&rec, "condition").to_string(),
            drug_name: cols.non_empty(&rec, row, "drug_name")?,
            overall_rating: cols.bounded(&rec, row, "overall_rating", 10)? as u8,
            effectiveness: cols.bounded(&rec, row, "effectiveness", 4)? as u8,
            side_effect_severity: cols.bounded(&rec, row, "side_effect_severity", 4)? as u8,
            comment: cols.get(&rec, "comment").to_string(),
        });
    }
    Ok(out)
}

/// Drug profiles plus the names that appeared more than once (the last row
/// for a name wins, keeping the position of its first appearance).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DrugLoad {
    pub drugs: Vec<DrugProfile>,
    pub duplicates: Vec<String>,
}

pub fn load_drugs(path: impl AsRef<Path>) -> Result<DrugLoad> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let cols = Columns::new(path, &headers, &["drug_name"])?;

    let group = |prefix: &str| -> Vec<usize> {
        headers
            .iter()
            .enumerate()
            .filter(|(_, h)| h.trim().to_ascii_lowercase().starts_with(prefix))
            .map(|(i, _)| i)
            .collect()
    };
    let categories = group(CATEGORY_PREFIX);
    let side_effects = group(SIDE_EFFECT_PREFIX);
    let benefits = group(BENEFIT_PREFIX);

    let mut load = DrugLoad::default();
    let mut position: HashMap<String, usize> = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, row, e))?;
        let bits = |idx: &[usize]| -> Result<Vec<u8>> {
            idx.iter()
                .map(|&c| match rec.get(c).unwrap_or("") {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(cols.row_err(
                        row,
                        format!("column `{}` has non-binary value `{other}`", &headers[c]),
                    )),
                })
                .collect()
        };
        let profile = DrugProfile {
            name: cols.non_empty(&rec, row, "drug_name")?,
            categories: bits(&categories)?,
            side_effects: bits(&side_effects)?,
            benefits: bits(&benefits)?,
        };
        match position.get(&profile.name) {
            Some(&p) => {
                load.duplicates.push(profile.name.clone());
                load.drugs[p] = profile;
            }
            None => {
                position.insert(profile.name.clone(), load.drugs.len());
                load.drugs.push(profile);
            }
        }
    }
    Ok(load)
}

pub fn load_interactions(path: impl AsRef<Path>) -> Result<Vec<InteractionRecord>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let cols = Columns::new(path, &headers, &INTERACTION_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, row, e))?;
        let drug_a = cols.non_empty(&rec, row, "drug_a")?;
        let drug_b = cols.non_empty(&rec, row, "drug_b")?;
        if drug_a == drug_b {
            return Err(cols.row_err(row, format!("drug `{drug_a}` interacts with itself")));
        }
        let raw = cols.get(&rec, "severity");
        let severity = Severity::parse(raw).ok_or_else(|| {
            cols.row_err(
                row,
                format!("severity `{raw}` not in {{major, moderate, minor}}"),
            )
        })?;
        out.push(InteractionRecord {
            drug_a,
            drug_b,
            severity,
        });
    }
    Ok(out)
}

pub fn load_adverse_events(path: impl AsRef<Path>) -> Result<Vec<AdverseEventRecord>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let cols = Columns::new(path, &headers, &ADVERSE_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, row, e))?;
        let mut events = BTreeSet::new();
        for label in split_multi(cols.get(&rec, "events")) {
            let event = AdverseEvent::parse(label)
                .ok_or_else(|| cols.row_err(row, format!("unknown adverse event `{label}`")))?;
            events.insert(event);
        }
        if events.is_empty() {
            return Err(cols.row_err(row, "events is empty"));
        }
        out.push(AdverseEventRecord {
            drug_name: cols.non_empty(&rec, row, "drug_name")?,
            age: cols.age(&rec, row)?,
            gender: Gender::parse(cols.get(&rec, "gender")),
            reaction: cols.get(&rec, "reaction").to_string(),
            events,
            other_drugs: split_multi(cols.get(&rec, "other_drugs"))
                .map(str::to_string)
                .collect(),
        });
    }
    Ok(out)
}

/// Loads the four tables from a directory using the canonical file names.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<(DatasetBundle, Vec<String>)> {
    let dir = dir.as_ref();
    let drugs = load_drugs(dir.join(DRUGS_FILE))?;
    let bundle = DatasetBundle {
        ratings: load_ratings(dir.join(RATINGS_FILE))?,
        drugs: drugs.drugs,
        interactions: load_interactions(dir.join(INTERACTIONS_FILE))?,
        adverse_events: load_adverse_events(dir.join(ADVERSE_FILE))?,
    };
    let warnings = drugs
        .duplicates
        .into_iter()
        .map(|d| format!("duplicate drug `{d}`: last row wins"))
        .collect();
    Ok((bundle, warnings))
}

fn create_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| csv_error(path, 0, e)
}

pub fn write_ratings(path: impl AsRef<Path>, ratings: &[RatingRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    w.write_record(RATING_COLUMNS).map_err(write_err(path))?;
    for r in ratings {
        w.write_record([
            r.user_id.as_str(),
            &r.age.to_string(),
            r.gender.as_str(),
            if r.is_caregiver { "true" } else { "false" },
            &r.condition_text,
            &r.drug_name,
            &r.overall_rating.to_string(),
            &r.effectiveness.to_string(),
            &r.side_effect_severity.to_string(),
            &r.comment,
        ])
        .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_drugs(path: impl AsRef<Path>, drugs: &[DrugProfile]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    let (nc, ns, nb) = drugs
        .first()
        .map(|d| (d.categories.len(), d.side_effects.len(), d.benefits.len()))
        .unwrap_or((0, 0, 0));
    let mut header = vec!["drug_name".to_string()];
    header.extend((1..=nc).map(|i| format!("{CATEGORY_PREFIX}{i}")));
    header.extend((1..=ns).map(|i| format!("{SIDE_EFFECT_PREFIX}{i}")));
    header.extend((1..=nb).map(|i| format!("{BENEFIT_PREFIX}{i}")));
    w.write_record(&header).map_err(write_err(path))?;
    for d in drugs {
        let mut row = vec![d.name.clone()];
        row.extend(d.feature_bits().iter().map(|b| b.to_string()));
        w.write_record(&row).map_err(write_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_interactions(path: impl AsRef<Path>, interactions: &[InteractionRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    w.write_record(INTERACTION_COLUMNS).map_err(write_err(path))?;
    for i in interactions {
        w.write_record([i.drug_a.as_str(), &i.drug_b, i.severity.as_str()])
            .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_adverse_events(path: impl AsRef<Path>, events: &[AdverseEventRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    w.write_record(ADVERSE_COLUMNS).map_err(write_err(path))?;
    for a in events {
        let labels: Vec<&str> = a.events.iter().map(|e| e.label()).collect();
        w.write_record([
            a.drug_name.as_str(),
            &a.age.to_string(),
            a.gender.as_str(),
            &a.reaction,
            &labels.join(";"),
            &a.other_drugs.join(";"),
        ])
        .map_err(write_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the four tables into `dir` under their canonical names.
pub fn write_bundle(dir: impl AsRef<Path>, bundle: &DatasetBundle) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_ratings(dir.join(RATINGS_FILE), &bundle.ratings)?;
    write_drugs(dir.join(DRUGS_FILE), &bundle.drugs)?;
    write_interactions(dir.join(INTERACTIONS_FILE), &bundle.interactions)?;
    write_adverse_events(dir.join(ADVERSE_FILE), &bundle.adverse_events)
}
