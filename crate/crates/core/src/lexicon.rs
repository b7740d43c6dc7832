//! The contextual emoji sensitivity matrix: per-emoji usual meaning,
//! self-harm contextual meaning and casual-mention / serious-intent chance
//! levels.
//!
//! Two on-disk formats are supported:
//!
//! * JSON: an array of objects with keys `emoji`, `usual_meaning`,
//!   `contextual_meaning`, `cm_chance`, `si_chance`;
//! * TSV: a header line `emoji\tusual_meaning\tcontextual_meaning\tcm_chance\tsi_chance`
//!   followed by one five-column row per entry.
//!
//! Lookups normalise glyphs to NFC and drop one trailing U+FE0F, so `❤` and
//! `❤️` resolve to the same entry. The stored glyph is kept as written.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::emojitext;
use crate::util::sha256_hex;

/// Number of entries in the reference matrix.
pub const CANONICAL_ENTRY_COUNT: usize = 100;

pub const TSV_HEADER: &str = "emoji\tusual_meaning\tcontextual_meaning\tcm_chance\tsi_chance";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ChanceLevel {
    Low,
    Medium,
    High,
}

impl ChanceLevel {
    pub const ALL: [ChanceLevel; 3] = [ChanceLevel::Low, ChanceLevel::Medium, ChanceLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            ChanceLevel::Low => "Low",
            ChanceLevel::Medium => "Medium",
            ChanceLevel::High => "High",
        }
    }
}

impl fmt::Display for ChanceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChanceLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("low") {
            Ok(ChanceLevel::Low)
        } else if t.eq_ignore_ascii_case("medium") {
            Ok(ChanceLevel::Medium)
        } else if t.eq_ignore_ascii_case("high") {
            Ok(ChanceLevel::High)
        } else {
            Err(s.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for ChanceLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse()
            .map_err(|v| serde::de::Error::custom(format!("invalid chance level {v:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiEntry {
    #[serde(rename = "emoji")]
    pub glyph: String,
    pub usual_meaning: String,
    pub contextual_meaning: String,
    pub cm_chance: ChanceLevel,
    pub si_chance: ChanceLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconFormat {
    Json,
    Tsv,
}

impl LexiconFormat {
    /// Guess from the file extension; anything but `.tsv`/`.tab` is JSON.
    pub fn from_path(path: &Path) -> LexiconFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") || ext.eq_ignore_ascii_case("tab") => LexiconFormat::Tsv,
            _ => LexiconFormat::Json,
        }
    }
}

/// Where in a source file a row came from. TSV rows carry their line number;
/// JSON rows carry their 1-based position in the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Line(usize),
    Entry(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Entry(n) => write!(f, "entry {n}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("reading {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{location}: {reason}")]
    Parse { location: Location, reason: String },
    #[error("{location}: duplicate glyph {glyph:?}")]
    DuplicateGlyph { glyph: String, location: Location },
    #[error("{location}: invalid chance level {value:?} (expected Low, Medium or High)")]
    InvalidChance { value: String, location: Location },
    #[error("{location}: invalid glyph {glyph:?}: {reason}")]
    InvalidGlyph {
        glyph: String,
        location: Location,
        reason: String,
    },
    #[error("{location}: field {field} is empty")]
    EmptyField { field: &'static str, location: Location },
    #[error("lookup key {input:?} is {clusters} grapheme clusters, expected exactly one")]
    MultiGrapheme { input: String, clusters: usize },
    #[error("cannot serialise entry {glyph:?} as TSV: field contains a tab or newline")]
    UnrepresentableTsv { glyph: String },
}

/// Key used for glyph equality: NFC with one trailing U+FE0F removed.
pub fn lookup_key(glyph: &str) -> String {
    let mut key: String = glyph.nfc().collect();
    if key.ends_with('\u{FE0F}') {
        key.pop();
    }
    key
}

/// An immutable, validated matrix.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<EmojiEntry>,
    index: HashMap<String, usize>,
    pub source_path: String,
    pub version: String,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Lexicon {
    /// Build from already-parsed entries, enforcing every entry invariant.
    pub fn from_entries(entries: Vec<EmojiEntry>, source_path: impl Into<String>) -> Result<Lexicon, LexiconError> {
        let rows: Vec<RawRow> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| RawRow {
                location: Location::Entry(i + 1),
                glyph: e.glyph.clone(),
                usual_meaning: e.usual_meaning.clone(),
                contextual_meaning: e.contextual_meaning.clone(),
                cm_chance: e.cm_chance.as_str().to_string(),
                si_chance: e.si_chance.as_str().to_string(),
            })
            .collect();
        let version = format!("entries:{}", entries.len());
        build(rows, source_path.into(), version)
    }

    pub fn entries(&self) -> &[EmojiEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn glyphs(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.glyph.as_str())
    }

    /// Look up one grapheme cluster. Unknown glyphs give `Ok(None)`.
    pub fn lookup(&self, glyph: &str) -> Result<Option<&EmojiEntry>, LexiconError> {
        let clusters = emojitext::graphemes(glyph).count();
        if clusters != 1 {
            return Err(LexiconError::MultiGrapheme {
                input: glyph.to_string(),
                clusters,
            });
        }
        Ok(self.get(glyph))
    }

    /// Lookup without the single-grapheme precondition check.
    pub fn get(&self, glyph: &str) -> Option<&EmojiEntry> {
        self.index.get(&lookup_key(glyph)).map(|&i| &self.entries[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("entries serialise")
    }

    pub fn to_tsv(&self) -> Result<String, LexiconError> {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let fields = [
                e.glyph.as_str(),
                e.usual_meaning.as_str(),
                e.contextual_meaning.as_str(),
                e.cm_chance.as_str(),
                e.si_chance.as_str(),
            ];
            if fields.iter().any(|f| f.contains(['\t', '\n', '\r'])) {
                return Err(LexiconError::UnrepresentableTsv { glyph: e.glyph.clone() });
            }
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn serialize(&self, format: LexiconFormat) -> Result<String, LexiconError> {
        match format {
            LexiconFormat::Json => Ok(self.to_json()),
            LexiconFormat::Tsv => self.to_tsv(),
        }
    }

    pub fn save(&self, path: &Path, format: LexiconFormat) -> Result<(), LexiconError> {
        let text = self.serialize(format)?;
        fs::write(path, text).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// One row as read from disk, before any semantic checks.
#[derive(Debug, Clone)]
struct RawRow {
    location: Location,
    glyph: String,
    usual_meaning: String,
    contextual_meaning: String,
    cm_chance: String,
    si_chance: String,
}

fn read_file(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            LexiconError::FileNotFound(path.to_path_buf())
        } else {
            LexiconError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn read_rows(text: &str, format: LexiconFormat) -> Result<Vec<RawRow>, LexiconError> {
    match format {
        LexiconFormat::Json => read_json_rows(text),
        LexiconFormat::Tsv => read_tsv_rows(text),
    }
}

fn read_json_rows(text: &str) -> Result<Vec<RawRow>, LexiconError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| LexiconError::Parse {
        location: Location::Line(e.line()),
        reason: e.to_string(),
    })?;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let location = Location::Entry(i + 1);
            let obj = v.as_object().ok_or_else(|| LexiconError::Parse {
                location,
                reason: "expected an object".into(),
            })?;
            let field = |name: &str| -> Result<String, LexiconError> {
                match obj.get(name) {
                    Some(serde_json::Value::String(s)) => Ok(s.clone()),
                    Some(other) => Err(LexiconError::Parse {
                        location,
                        reason: format!("field {name} must be a string, got {other}"),
                    }),
                    None => Err(LexiconError::Parse {
                        location,
                        reason: format!("missing field {name}"),
                    }),
                }
            };
            Ok(RawRow {
                location,
                glyph: field("emoji")?,
                usual_meaning: field("usual_meaning")?,
                contextual_meaning: field("contextual_meaning")?,
                cm_chance: field("cm_chance")?,
                si_chance: field("si_chance")?,
            })
        })
        .collect()
}

fn read_tsv_rows(text: &str) -> Result<Vec<RawRow>, LexiconError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let header = header.trim_start_matches('\u{FEFF}').trim_end_matches('\r');
    if header.trim().is_empty() && text.trim().is_empty() {
        return Ok(Vec::new());
    }
    if header != TSV_HEADER {
        return Err(LexiconError::Parse {
            location: Location::Line(1),
            reason: format!("expected header {TSV_HEADER:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let location = Location::Line(idx + 1);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(LexiconError::Parse {
                location,
                reason: format!("expected 5 tab-separated columns, found {}", cols.len()),
            });
        }
        rows.push(RawRow {
            location,
            glyph: cols[0].to_string(),
            usual_meaning: cols[1].to_string(),
            contextual_meaning: cols[2].to_string(),
            cm_chance: cols[3].to_string(),
            si_chance: cols[4].to_string(),
        });
    }
    Ok(rows)
}

fn check_glyph(glyph: &str, location: Location) -> Result<(), LexiconError> {
    let clusters = emojitext::graphemes(glyph).count();
    if clusters != 1 {
        return Err(LexiconError::InvalidGlyph {
            glyph: glyph.to_string(),
            location,
            reason: format!("{clusters} grapheme clusters, expected exactly one"),
        });
    }
    if !emojitext::all_emoji_code_points(glyph) {
        return Err(LexiconError::InvalidGlyph {
            glyph: glyph.to_string(),
            location,
            reason: "contains a code point without an emoji property".into(),
        });
    }
    Ok(())
}

/// Every per-row check, each as a separate error.
fn row_findings(row: &RawRow) -> (Option<EmojiEntry>, Vec<LexiconError>) {
    let mut errs = Vec::new();
    if let Err(e) = check_glyph(&row.glyph, row.location) {
        errs.push(e);
    }
    if row.usual_meaning.trim().is_empty() {
        errs.push(LexiconError::EmptyField {
            field: "usual_meaning",
            location: row.location,
        });
    }
    if row.contextual_meaning.trim().is_empty() {
        errs.push(LexiconError::EmptyField {
            field: "contextual_meaning",
            location: row.location,
        });
    }
    let mut chance = |value: &str| match value.parse::<ChanceLevel>() {
        Ok(c) => Some(c),
        Err(v) => {
            errs.push(LexiconError::InvalidChance {
                value: v,
                location: row.location,
            });
            None
        }
    };
    let cm = chance(&row.cm_chance);
    let si = chance(&row.si_chance);
    let entry = match (cm, si, errs.is_empty()) {
        (Some(cm_chance), Some(si_chance), true) => Some(EmojiEntry {
            glyph: row.glyph.clone(),
            usual_meaning: row.usual_meaning.clone(),
            contextual_meaning: row.contextual_meaning.clone(),
            cm_chance,
            si_chance,
        }),
        _ => None,
    };
    (entry, errs)
}

fn build(rows: Vec<RawRow>, source_path: String, version: String) -> Result<Lexicon, LexiconError> {
    let mut entries = Vec::with_capacity(rows.len());
    let mut index = HashMap::with_capacity(rows.len());
    for row in &rows {
        let (entry, mut errs) = row_findings(row);
        if !errs.is_empty() {
            return Err(errs.remove(0));
        }
        let entry = entry.expect("no findings implies an entry");
        let key = lookup_key(&entry.glyph);
        if index.insert(key, entries.len()).is_some() {
            return Err(LexiconError::DuplicateGlyph {
                glyph: entry.glyph,
                location: row.location,
            });
        }
        entries.push(entry);
    }
    if entries.len() != CANONICAL_ENTRY_COUNT {
        log::warn!(
            "lexicon {source_path} has {} entries (reference matrix has {CANONICAL_ENTRY_COUNT})",
            entries.len()
        );
    }
    Ok(Lexicon {
        entries,
        index,
        source_path,
        version,
    })
}

/// Parse lexicon text. The first invariant violation aborts the load.
pub fn parse_lexicon(
    text: &str,
    format: LexiconFormat,
    source_path: impl Into<String>,
) -> Result<Lexicon, LexiconError> {
    let rows = read_rows(text, format)?;
    let version = format!("sha256:{}", &sha256_hex(text.as_bytes())[..16]);
    build(rows, source_path.into(), version)
}

pub fn load_lexicon(path: &Path, format: LexiconFormat) -> Result<Lexicon, LexiconError> {
    let text = read_file(path)?;
    parse_lexicon(&text, format, path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    Parse,
    InvalidChance,
    DuplicateGlyph,
    InvalidGlyph,
    EmptyField,
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub location: Option<Location>,
    pub message: String,
}

impl From<&LexiconError> for Finding {
    fn from(e: &LexiconError) -> Finding {
        let (kind, location) = match e {
            LexiconError::Parse { location, .. } => (FindingKind::Parse, Some(*location)),
            LexiconError::InvalidChance { location, .. } => (FindingKind::InvalidChance, Some(*location)),
            LexiconError::DuplicateGlyph { location, .. } => (FindingKind::DuplicateGlyph, Some(*location)),
            LexiconError::InvalidGlyph { location, .. } => (FindingKind::InvalidGlyph, Some(*location)),
            LexiconError::EmptyField { location, .. } => (FindingKind::EmptyField, Some(*location)),
            _ => (FindingKind::Parse, None),
        };
        Finding {
            kind,
            location,
            message: e.to_string(),
        }
    }
}

/// Entry count, invariant violations and chance-level distribution.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub entry_count: usize,
    pub violations: Vec<Finding>,
    pub warnings: Vec<String>,
    pub cm_distribution: BTreeMap<ChanceLevel, usize>,
    pub si_distribution: BTreeMap<ChanceLevel, usize>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn new() -> ValidationReport {
        let zero: BTreeMap<ChanceLevel, usize> = ChanceLevel::ALL.iter().map(|&c| (c, 0)).collect();
        ValidationReport {
            entry_count: 0,
            violations: Vec::new(),
            warnings: Vec::new(),
            cm_distribution: zero.clone(),
            si_distribution: zero,
        }
    }

    fn count(&mut self, entry: &EmojiEntry) {
        self.entry_count += 1;
        *self.cm_distribution.entry(entry.cm_chance).or_default() += 1;
        *self.si_distribution.entry(entry.si_chance).or_default() += 1;
    }

    fn finish(mut self) -> ValidationReport {
        if self.entry_count != CANONICAL_ENTRY_COUNT {
            self.warnings.push(format!(
                "entry count {} differs from the reference matrix size {CANONICAL_ENTRY_COUNT}",
                self.entry_count
            ));
        }
        self
    }
}

/// Re-check a loaded lexicon. A lexicon built through this module never has
/// violations, so the interesting parts are the count and distributions.
pub fn validate_lexicon(lexicon: &Lexicon) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut seen = HashMap::new();
    for (i, entry) in lexicon.entries().iter().enumerate() {
        let location = Location::Entry(i + 1);
        if let Err(e) = check_glyph(&entry.glyph, location) {
            report.violations.push((&e).into());
        }
        for (field, value) in [
            ("usual_meaning", &entry.usual_meaning),
            ("contextual_meaning", &entry.contextual_meaning),
        ] {
            if value.trim().is_empty() {
                report
                    .violations
                    .push((&LexiconError::EmptyField { field, location }).into());
            }
        }
        if seen.insert(lookup_key(&entry.glyph), i).is_some() {
            report.violations.push(
                (&LexiconError::DuplicateGlyph {
                    glyph: entry.glyph.clone(),
                    location,
                })
                    .into(),
            );
        }
        report.count(entry);
    }
    report.finish()
}

/// Validate raw lexicon text, collecting every finding instead of stopping at
/// the first. Rows with findings do not count towards `entry_count`.
pub fn validate_lexicon_source(text: &str, format: LexiconFormat) -> ValidationReport {
    let mut report = ValidationReport::new();
    let rows = match read_rows(text, format) {
        Ok(rows) => rows,
        Err(e) => {
            report.violations.push((&e).into());
            return report.finish();
        }
    };
    let mut seen: HashMap<String, Location> = HashMap::new();
    for row in &rows {
        let (entry, errs) = row_findings(row);
        report.violations.extend(errs.iter().map(Finding::from));
        if let Some(entry) = entry {
            if seen.insert(lookup_key(&entry.glyph), row.location).is_some() {
                report.violations.push(
                    (&LexiconError::DuplicateGlyph {
                        glyph: entry.glyph.clone(),
                        location: row.location,
                    })
                        .into(),
                );
            } else {
                report.count(&entry);
            }
        }
    }
    report.finish()
}

pub fn validate_lexicon_file(path: &Path, format: LexiconFormat) -> Result<ValidationReport, LexiconError> {
    Ok(validate_lexicon_source(&read_file(path)?, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BROKEN_HEART_TSV: &str = "emoji\tusual_meaning\tcontextual_meaning\tcm_chance\tsi_chance\n\u{1F494}\tBroken Heart\tRepresents intense emotional pain, often related to feelings of hopelessness.\tMedium\tHigh\n";

    fn entry(glyph: &str) -> EmojiEntry {
        EmojiEntry {
            glyph: glyph.into(),
            usual_meaning: "u".into(),
            contextual_meaning: "c".into(),
            cm_chance: ChanceLevel::Low,
            si_chance: ChanceLevel::High,
        }
    }

    #[test]
    fn chance_order_and_parsing() {
        assert!(ChanceLevel::Low < ChanceLevel::Medium && ChanceLevel::Medium < ChanceLevel::High);
        assert_eq!("HIGH".parse::<ChanceLevel>(), Ok(ChanceLevel::High));
        assert_eq!(" medium ".parse::<ChanceLevel>(), Ok(ChanceLevel::Medium));
        assert!("very high".parse::<ChanceLevel>().is_err());
        assert!("".parse::<ChanceLevel>().is_err());
    }

    #[test]
    fn loads_tsv_row() {
        let lex = parse_lexicon(BROKEN_HEART_TSV, LexiconFormat::Tsv, "mem").unwrap();
        let e = lex.lookup("\u{1F494}").unwrap().unwrap();
        assert_eq!(e.usual_meaning, "Broken Heart");
        assert!(e.contextual_meaning.starts_with("Represents intense emotional pain"));
        assert_eq!((e.cm_chance, e.si_chance), (ChanceLevel::Medium, ChanceLevel::High));
    }

    #[test]
    fn empty_files_load_with_count_warning() {
        for format in [LexiconFormat::Tsv, LexiconFormat::Json] {
            let lex = parse_lexicon("", format, "mem").unwrap();
            assert!(lex.is_empty());
            let report = validate_lexicon(&lex);
            assert_eq!(report.entry_count, 0);
            assert!(report.is_clean());
            assert_eq!(report.warnings.len(), 1);
        }
        assert!(parse_lexicon("[]", LexiconFormat::Json, "mem").unwrap().is_empty());
    }

    #[test]
    fn duplicate_glyph_reports_line() {
        let text = format!("{BROKEN_HEART_TSV}\u{1F494}\tdup\tdup\tLow\tLow\n");
        match parse_lexicon(&text, LexiconFormat::Tsv, "mem") {
            Err(LexiconError::DuplicateGlyph { location, .. }) => {
                assert_eq!(location, Location::Line(3))
            }
            other => panic!("expected DuplicateGlyph, got {other:?}"),
        }
    }

    #[test]
    fn variation_selector_variants_are_duplicates() {
        let err = Lexicon::from_entries(vec![entry("\u{2764}"), entry("\u{2764}\u{FE0F}")], "mem").unwrap_err();
        assert!(matches!(err, LexiconError::DuplicateGlyph { .. }));
    }

    #[test]
    fn invalid_chance_aborts_load() {
        let text = "[{\"emoji\":\"\u{1F52A}\",\"usual_meaning\":\"Kitchen Knife\",\"contextual_meaning\":\"x\",\"cm_chance\":\"very high\",\"si_chance\":\"High\"}]";
        match parse_lexicon(text, LexiconFormat::Json, "mem") {
            Err(LexiconError::InvalidChance { value, location }) => {
                assert_eq!(value, "very high");
                assert_eq!(location, Location::Entry(1));
            }
            other => panic!("expected InvalidChance, got {other:?}"),
        }
        let report = validate_lexicon_source(text, LexiconFormat::Json);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, FindingKind::InvalidChance);
    }

    #[test]
    fn rejects_non_emoji_and_multi_cluster_glyphs() {
        for bad in ["a", "\u{1F494}\u{1F494}", ""] {
            let err = Lexicon::from_entries(vec![entry(bad)], "mem").unwrap_err();
            assert!(matches!(err, LexiconError::InvalidGlyph { .. }), "{bad:?}: {err:?}");
        }
        let mut e = entry("\u{1F494}");
        e.usual_meaning = " ".into();
        assert!(matches!(
            Lexicon::from_entries(vec![e], "mem"),
            Err(LexiconError::EmptyField {
                field: "usual_meaning",
                ..
            })
        ));
    }

    #[test]
    fn bad_header_and_column_count() {
        assert!(matches!(
            parse_lexicon("glyph\tmeaning\n", LexiconFormat::Tsv, "mem"),
            Err(LexiconError::Parse {
                location: Location::Line(1),
                ..
            })
        ));
        let text = format!("{TSV_HEADER}\n\u{1F494}\tBroken Heart\tpain\tLow\n");
        assert!(matches!(
            parse_lexicon(&text, LexiconFormat::Tsv, "mem"),
            Err(LexiconError::Parse {
                location: Location::Line(2),
                ..
            })
        ));
    }

    #[test]
    fn json_syntax_error_carries_line() {
        let err = parse_lexicon("[\n{\"emoji\": }\n]", LexiconFormat::Json, "mem").unwrap_err();
        assert!(
            matches!(
                err,
                LexiconError::Parse {
                    location: Location::Line(2),
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn lookup_normalises_fe0f_and_rejects_sequences() {
        let lex = Lexicon::from_entries(vec![entry("\u{2764}\u{FE0F}"), entry("\u{1F52A}")], "mem").unwrap();
        let bare = lex.lookup("\u{2764}").unwrap().unwrap();
        let qualified = lex.lookup("\u{2764}\u{FE0F}").unwrap().unwrap();
        assert_eq!(bare, qualified);
        assert_eq!(bare.glyph, "\u{2764}\u{FE0F}");
        assert!(lex.lookup("\u{1F480}").unwrap().is_none());
        assert!(matches!(
            lex.lookup("\u{1F52A}\u{1F52A}"),
            Err(LexiconError::MultiGrapheme { clusters: 2, .. })
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_lexicon(Path::new("/nonexistent/lexicon.tsv"), LexiconFormat::Tsv).unwrap_err();
        assert!(matches!(err, LexiconError::FileNotFound(_)));
    }

    #[test]
    fn single_entry_report() {
        let lex = Lexicon::from_entries(vec![entry("\u{1F52A}")], "mem").unwrap();
        let report = validate_lexicon(&lex);
        assert_eq!(report.entry_count, 1);
        assert!(report.is_clean());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.si_distribution[&ChanceLevel::High], 1);
    }

    #[test]
    fn hundred_entries_no_warning() {
        // emoticons block (80) plus the first 20 transport symbols
        let entries: Vec<_> = (0x1F600u32..0x1F650)
            .chain(0x1F680..0x1F694)
            .map(|cp| entry(&char::from_u32(cp).unwrap().to_string()))
            .collect();
        let lex = Lexicon::from_entries(entries, "mem").unwrap();
        let report = validate_lexicon(&lex);
        assert_eq!(report.entry_count, 100);
        assert!(report.is_clean() && report.warnings.is_empty());
    }

    #[test]
    fn tsv_refuses_tabs_in_fields() {
        let mut e = entry("\u{1F52A}");
        e.contextual_meaning = "a\tb".into();
        let lex = Lexicon::from_entries(vec![e], "mem").unwrap();
        assert!(matches!(lex.to_tsv(), Err(LexiconError::UnrepresentableTsv { .. })));
        assert!(lex.to_json().contains("a\\tb"));
    }
}
