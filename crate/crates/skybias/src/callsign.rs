//! ICAO callsign parsing and verbalization.
//!
//! A written callsign like `DLH72W` is spoken in several ways: with the
//! airline telephony name ("lufthansa seven two whiskey") or fully spelled
//! ("delta lima hotel seven two whiskey"), with "nine" or "niner", and so
//! on. [`verbalize`] produces the closed, deterministic set of variants used
//! for biasing: telephony or NATO spelling for the airline designator,
//! digit-by-digit words for digits, NATO words for letters. Digit grouping
//! ("seventy two", "triple seven") is deliberately not generated; every
//! emitted token stays inside the closed vocabulary of telephony words, the
//! NATO alphabet, and digit words.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

/// ICAO standard spellings, including "alfa" and "juliett".
pub const NATO_ALPHABET: [&str; 26] = [
    "alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett",
    "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
    "uniform", "victor", "whiskey", "x-ray", "yankee", "zulu",
];

pub const DIGIT_WORDS: [&str; 10] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
];

/// Alternative spoken form of 9, generated when [`VerbalizeOptions::niner`] is set.
pub const NINER: &str = "niner";

fn nato_word(c: char) -> &'static str {
    NATO_ALPHABET[(c as u8 - b'A') as usize]
}

fn digit_word(c: char) -> &'static str {
    DIGIT_WORDS[(c as u8 - b'0') as usize]
}

#[derive(Debug, Error)]
pub enum CallsignError {
    #[error("callsign {raw:?} contains invalid character {ch:?}")]
    InvalidCharacter { raw: String, ch: char },
    #[error("callsign {raw:?} has invalid length {len} (expected 2..=8)")]
    InvalidLength { raw: String, len: usize },
    #[error("line {line}: expected `DESIGNATOR<TAB>telephony words`")]
    MalformedTableLine { line: usize },
    #[error("line {line}: malformed designator {designator:?} (expected three uppercase letters)")]
    MalformedDesignator { line: usize, designator: String },
    #[error("line {line}: empty telephony for designator {designator:?}")]
    EmptyTelephony { line: usize, designator: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A callsign in compact ICAO form, e.g. `DLH72W` or a registration like `N123AB`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IcaoCallsign {
    raw: String,
    designator: Option<String>,
    suffix: String,
}

impl IcaoCallsign {
    /// Normalized form: trimmed and uppercased.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Three-letter airline designator, absent for registrations and other
    /// non-airline callsigns.
    pub fn designator(&self) -> Option<&str> {
        self.designator.as_deref()
    }

    /// Everything after the designator, or the whole callsign without one.
    pub fn suffix(&self) -> &str {
        &self.suffix
    }
}

impl std::fmt::Display for IcaoCallsign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Parses a raw callsign string, normalizing case and whitespace.
///
/// A three-letter airline designator is recognized iff the first three
/// characters are letters and at least one character follows. Anything else
/// (registrations like `N123AB`, bare designators, short codes) is kept as a
/// designator-less suffix and will be fully spelled during verbalization.
pub fn parse_icao(raw: &str) -> Result<IcaoCallsign, CallsignError> {
    let raw = raw.trim().to_uppercase();
    if let Some(ch) = raw.chars().find(|c| !c.is_ascii_alphanumeric()) {
        return Err(CallsignError::InvalidCharacter { raw, ch });
    }
    let len = raw.chars().count();
    if !(2..=8).contains(&len) {
        return Err(CallsignError::InvalidLength { raw, len });
    }
    let bytes = raw.as_bytes();
    let has_designator = len >= 4 && bytes[..3].iter().all(u8::is_ascii_alphabetic);
    let (designator, suffix) = if has_designator {
        (Some(raw[..3].to_string()), raw[3..].to_string())
    } else {
        (None, raw.clone())
    };
    Ok(IcaoCallsign {
        raw,
        designator,
        suffix,
    })
}

/// Map from three-letter ICAO airline designator to its telephony words.
#[derive(Debug, Clone, Default)]
pub struct AirlineTable {
    entries: HashMap<String, Vec<String>>,
}

/// Non-fatal observation made while loading an airline table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableWarning {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for TableWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl AirlineTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads TSV lines `DESIGNATOR<TAB>telephony words`. Later duplicates
    /// override earlier entries and are reported as warnings. Telephony is
    /// lowercased; blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<(Self, Vec<TableWarning>), CallsignError> {
        let mut table = AirlineTable::new();
        let mut warnings = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let Some((designator, telephony)) = line.split_once('\t') else {
                return Err(CallsignError::MalformedTableLine { line: line_no });
            };
            let designator = designator.trim();
            if designator.len() != 3 || !designator.bytes().all(|b| b.is_ascii_uppercase()) {
                return Err(CallsignError::MalformedDesignator {
                    line: line_no,
                    designator: designator.to_string(),
                });
            }
            let words: Vec<String> = telephony
                .split_whitespace()
                .map(str::to_lowercase)
                .collect();
            if words.is_empty() {
                return Err(CallsignError::EmptyTelephony {
                    line: line_no,
                    designator: designator.to_string(),
                });
            }
            if table
                .entries
                .insert(designator.to_string(), words)
                .is_some()
            {
                warnings.push(TableWarning {
                    line: line_no,
                    message: format!("duplicate designator {designator}, later entry wins"),
                });
            }
        }
        Ok((table, warnings))
    }

    /// Inserts an entry programmatically (telephony is lowercased).
    pub fn insert(&mut self, designator: &str, telephony: &str) {
        self.entries.insert(
            designator.to_uppercase(),
            telephony
                .split_whitespace()
                .map(str::to_lowercase)
                .collect(),
        );
    }

    pub fn get(&self, designator: &str) -> Option<&[String]> {
        self.entries.get(designator).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One spoken expansion of a callsign: a non-empty lowercase word sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VerbalizedPhrase {
    words: Vec<String>,
}

impl VerbalizedPhrase {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }
}

impl std::fmt::Display for VerbalizedPhrase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerbalizeOptions {
    /// Also generate "niner" alternatives for the digit 9.
    pub niner: bool,
}

/// Per-character spoken options, cartesian-expanded in input order so that
/// "nine" variants precede "niner" variants.
fn expand_chars(chars: &str, options: &VerbalizeOptions) -> Vec<Vec<String>> {
    let mut variants: Vec<Vec<String>> = vec![Vec::new()];
    for c in chars.chars() {
        let choices: Vec<&str> = if c.is_ascii_digit() {
            if c == '9' && options.niner {
                vec![digit_word(c), NINER]
            } else {
                vec![digit_word(c)]
            }
        } else {
            vec![nato_word(c)]
        };
        let mut next = Vec::with_capacity(variants.len() * choices.len());
        for prefix in &variants {
            for choice in &choices {
                let mut words = prefix.clone();
                words.push((*choice).to_string());
                next.push(words);
            }
        }
        variants = next;
    }
    variants
}

/// Expands a callsign into its spoken variants, deduplicated, in
/// deterministic order: telephony-name variants first, then the fully
/// spelled variant; digit alternatives vary "nine" before "niner".
///
/// Unknown or absent designators fall back to spelling, so the result is
/// never empty.
pub fn verbalize(
    callsign: &IcaoCallsign,
    table: &AirlineTable,
    options: &VerbalizeOptions,
) -> Vec<VerbalizedPhrase> {
    let mut seen = indexmap::IndexSet::new();
    match callsign.designator() {
        Some(designator) => {
            let suffix_variants = expand_chars(callsign.suffix(), options);
            if let Some(telephony) = table.get(designator) {
                for suffix in &suffix_variants {
                    let mut words = telephony.to_vec();
                    words.extend(suffix.iter().cloned());
                    seen.insert(words);
                }
            }
            let spelled: Vec<String> = designator
                .chars()
                .map(|c| nato_word(c).to_string())
                .collect();
            for suffix in &suffix_variants {
                let mut words = spelled.clone();
                words.extend(suffix.iter().cloned());
                seen.insert(words);
            }
        }
        None => {
            for words in expand_chars(callsign.raw(), options) {
                seen.insert(words);
            }
        }
    }
    seen.into_iter()
        .map(|words| VerbalizedPhrase { words })
        .collect()
}

/// Union of [`verbalize`] over several callsigns, deduplicated, in stable
/// order (callsign order, then variant order). Duplicate callsigns are
/// expanded once.
pub fn build_context_phrases(
    callsigns: &[IcaoCallsign],
    table: &AirlineTable,
    options: &VerbalizeOptions,
) -> Vec<VerbalizedPhrase> {
    let mut seen_callsigns = indexmap::IndexSet::new();
    let mut phrases = indexmap::IndexSet::new();
    for callsign in callsigns {
        if !seen_callsigns.insert(callsign.raw().to_string()) {
            continue;
        }
        for phrase in verbalize(callsign, table, options) {
            phrases.insert(phrase);
        }
    }
    phrases.into_iter().collect()
}
