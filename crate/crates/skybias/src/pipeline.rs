//! Batch orchestration: context retrieval, rescoring, scoring, and the
//! discount sweep, as driven by the `skybias` command-line tool.
//!
//! All functions write data to `out` and human diagnostics to `diag`, so
//! outputs can be piped while progress notes go to stderr. Per-utterance
//! work runs on a bounded worker pool and results are re-sequenced to input
//! order before emission: identical inputs and configuration produce
//! byte-identical outputs regardless of the worker count.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rayon::prelude::*;
use thiserror::Error;

use crate::biasing::{collect_ngrams, BiasingAutomaton, BiasingError, MaxOrder};
use crate::callsign::{parse_icao, verbalize, AirlineTable, CallsignError, VerbalizeOptions};
use crate::lattice::{parse_lattices, serialize_lattices, LatticeError, ParseError, WordLattice};
use crate::metrics::{aggregate, score_utterance, MetricsError, ScoreReport};
use crate::surveillance::{
    build_utterance_contexts, load_utterance_meta, read_contexts, write_contexts, ContextOptions,
    ContextRecord, SurveillanceError, SurveillanceStore,
};

/// Default per-occurrence discount applied when rescoring lattices.
pub const DEFAULT_DISCOUNT: f64 = 2.0;
/// Discount that has given the best callsign recovery in practice; use the
/// `sweep` subcommand to confirm the choice on your own data.
pub const RECOMMENDED_DISCOUNT: f64 = 5.0;
pub const DEFAULT_ACOUSTIC_SCALE: f64 = 1.0;
pub const DEFAULT_MIN_ORDER: usize = 1;
pub const DEFAULT_HALF_WINDOW_S: i64 = 60;
pub const DEFAULT_RADIUS_DEG: f64 = 0.5;

/// What `rescore` emits: best-path text or full rescored lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Emit {
    #[default]
    Text,
    Lattices,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("missing required input: {0}")]
    MissingInput(&'static str),
    #[error("cannot open {path}: {source}")]
    OpenInput { path: PathBuf, source: io::Error },
    #[error("utterance {utt_id:?} has a lattice but no context entry")]
    MissingContext { utt_id: String },
    #[error("utterance ids differ between references and hypotheses: missing from hypotheses [{}], absent from references [{}]",
        missing.join(", "), extra.join(", "))]
    UttIdMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("{file} line {line}: duplicate utterance id {utt_id:?}")]
    DuplicateTranscript {
        file: &'static str,
        line: usize,
        utt_id: String,
    },
    #[error("utterance {utt_id:?}: {source}")]
    Bias {
        utt_id: String,
        source: BiasingError,
    },
    #[error("scoring utterance {utt_id:?}: {source}")]
    Score {
        utt_id: String,
        source: MetricsError,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    LatticeParse(#[from] ParseError),
    #[error(transparent)]
    Callsign(#[from] CallsignError),
    #[error(transparent)]
    Surveillance(#[from] SurveillanceError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit status: 1 for input/validation problems, 2 for internal
    /// invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Internal(_) => 2,
            _ => 1,
        }
    }
}

/// Knobs and input paths for the batch commands. Fields default to the
/// documented values; paths stay unset until provided.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub discount: f64,
    pub min_order: usize,
    pub max_order: MaxOrder,
    pub acoustic_scale: f64,
    pub niner: bool,
    pub half_window_s: i64,
    pub radius_deg: f64,
    /// Worker threads for per-utterance work; 0 picks the machine default.
    pub workers: usize,
    pub emit: Emit,
    pub lattices: Option<PathBuf>,
    pub surveillance: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub airlines: Option<PathBuf>,
    pub contexts: Option<PathBuf>,
    pub refs: Option<PathBuf>,
    pub hyps: Option<PathBuf>,
    pub callsigns: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            discount: DEFAULT_DISCOUNT,
            min_order: DEFAULT_MIN_ORDER,
            max_order: MaxOrder::All,
            acoustic_scale: DEFAULT_ACOUSTIC_SCALE,
            niner: false,
            half_window_s: DEFAULT_HALF_WINDOW_S,
            radius_deg: DEFAULT_RADIUS_DEG,
            workers: 0,
            emit: Emit::Text,
            lattices: None,
            surveillance: None,
            meta: None,
            airlines: None,
            contexts: None,
            refs: None,
            hyps: None,
            callsigns: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.discount.is_finite() || self.discount < 0.0 {
            return Err(PipelineError::InvalidConfig(format!(
                "discount must be a finite value >= 0, got {}",
                self.discount
            )));
        }
        if !self.acoustic_scale.is_finite() || self.acoustic_scale < 0.0 {
            return Err(PipelineError::InvalidConfig(format!(
                "acoustic scale must be a finite value >= 0, got {}",
                self.acoustic_scale
            )));
        }
        if self.min_order < 1 {
            return Err(PipelineError::InvalidConfig(
                "min n-gram order must be >= 1".into(),
            ));
        }
        if let MaxOrder::Limit(max) = self.max_order {
            if max < self.min_order {
                return Err(PipelineError::InvalidConfig(format!(
                    "max n-gram order {max} is below min order {}",
                    self.min_order
                )));
            }
        }
        if self.half_window_s < 0 {
            return Err(PipelineError::InvalidConfig(
                "context window must be >= 0".into(),
            ));
        }
        if !self.radius_deg.is_finite() || self.radius_deg < 0.0 {
            return Err(PipelineError::InvalidConfig(
                "context radius must be >= 0".into(),
            ));
        }
        Ok(())
    }

    fn require<'a>(
        path: &'a Option<PathBuf>,
        what: &'static str,
    ) -> Result<&'a Path, PipelineError> {
        path.as_deref().ok_or(PipelineError::MissingInput(what))
    }
}

fn open_buf(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| PipelineError::OpenInput {
            path: path.to_path_buf(),
            source,
        })
}

fn load_airlines(
    config: &PipelineConfig,
    diag: &mut dyn Write,
) -> Result<AirlineTable, PipelineError> {
    let path = PipelineConfig::require(&config.airlines, "airline table (--airlines)")?;
    let (table, warnings) = AirlineTable::from_reader(open_buf(path)?)?;
    for warning in &warnings {
        writeln!(diag, "airline table {warning}")?;
    }
    Ok(table)
}

/// Builds per-utterance contexts from surveillance data and writes them as
/// line-delimited JSON.
pub fn run_context(
    config: &PipelineConfig,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), PipelineError> {
    config.validate()?;
    let table = load_airlines(config, diag)?;
    let surveillance_path =
        PipelineConfig::require(&config.surveillance, "surveillance CSV (--surveillance)")?;
    let store = SurveillanceStore::from_csv(open_buf(surveillance_path)?)?;
    let meta_path = PipelineConfig::require(&config.meta, "utterance metadata CSV (--meta)")?;
    let meta = load_utterance_meta(open_buf(meta_path)?)?;

    let options = ContextOptions {
        half_window_s: config.half_window_s,
        radius_deg: config.radius_deg,
        verbalize: VerbalizeOptions {
            niner: config.niner,
        },
    };
    let contexts = build_utterance_contexts(&store, &meta, &table, &options);
    write_contexts(&contexts, out)?;

    let empty = contexts.iter().filter(|c| c.is_empty()).count();
    writeln!(
        diag,
        "context: {} sightings, {} utterances, {} with empty context",
        store.len(),
        contexts.len(),
        empty
    )?;
    Ok(())
}

/// Expands raw callsigns and prints one variant per line, prefixed by the
/// normalized callsign.
pub fn run_verbalize(
    config: &PipelineConfig,
    raw_callsigns: &[String],
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), PipelineError> {
    let table = load_airlines(config, diag)?;
    let options = VerbalizeOptions {
        niner: config.niner,
    };
    for raw in raw_callsigns {
        let callsign = parse_icao(raw)?;
        for phrase in verbalize(&callsign, &table, &options) {
            writeln!(out, "{} {}", callsign.raw(), phrase)?;
        }
    }
    Ok(())
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Internal(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Builds the biasing automaton for one context and rescoring the lattice;
/// `None` means the utterance passes through unchanged (empty context, or no
/// n-grams survive the order bounds).
fn rescored_lattice(
    lattice: &WordLattice,
    record: &ContextRecord,
    config: &PipelineConfig,
) -> Result<Option<WordLattice>, PipelineError> {
    if record.phrases.is_empty() {
        return Ok(None);
    }
    let ngrams = collect_ngrams(
        record.phrases.iter().map(Vec::as_slice),
        config.min_order,
        config.max_order,
    )
    .map_err(|source| PipelineError::Bias {
        utt_id: lattice.utt_id().to_string(),
        source,
    })?;
    if ngrams.is_empty() {
        return Ok(None);
    }
    let automaton = BiasingAutomaton::build(&ngrams, config.discount);
    Ok(Some(automaton.rescore(lattice)?))
}

fn hypothesis_line(utt_id: &str, words: &[String]) -> String {
    let mut line = utt_id.to_string();
    for word in words {
        line.push(' ');
        line.push_str(word);
    }
    line.push('\n');
    line
}

/// Best-path words per utterance after rescoring, in lattice file order.
fn rescore_corpus_text(
    lattices: &IndexMap<String, WordLattice>,
    contexts: &IndexMap<String, ContextRecord>,
    config: &PipelineConfig,
) -> Result<IndexMap<String, Vec<String>>, PipelineError> {
    let jobs: Vec<(&String, &WordLattice)> = lattices.iter().collect();
    let results: Vec<Result<Vec<String>, PipelineError>> = with_pool(config.workers, || {
        jobs.par_iter()
            .map(|(utt_id, lattice)| {
                let rescored = rescored_lattice(lattice, &contexts[utt_id.as_str()], config)?;
                let target = rescored.as_ref().unwrap_or(lattice);
                Ok(target.best_path(config.acoustic_scale)?.words)
            })
            .collect()
    })?;
    let mut out = IndexMap::with_capacity(jobs.len());
    for ((utt_id, _), words) in jobs.into_iter().zip(results) {
        out.insert(utt_id.clone(), words?);
    }
    Ok(out)
}

fn check_contexts_cover_lattices(
    lattices: &IndexMap<String, WordLattice>,
    contexts: &IndexMap<String, ContextRecord>,
) -> Result<(), PipelineError> {
    for utt_id in lattices.keys() {
        if !contexts.contains_key(utt_id) {
            return Err(PipelineError::MissingContext {
                utt_id: utt_id.clone(),
            });
        }
    }
    Ok(())
}

/// Rescoring over a lattice file: emits best-path text or rescored lattices
/// per the configuration, in input order.
pub fn run_rescore(
    config: &PipelineConfig,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), PipelineError> {
    config.validate()?;
    let lattices_path = PipelineConfig::require(&config.lattices, "lattice file (--lattices)")?;
    let lattices = parse_lattices(open_buf(lattices_path)?)?;
    let contexts_path = PipelineConfig::require(&config.contexts, "context file (--contexts)")?;
    let contexts = read_contexts(open_buf(contexts_path)?)?;
    check_contexts_cover_lattices(&lattices, &contexts)?;

    let passthrough = lattices
        .keys()
        .filter(|id| contexts[id.as_str()].phrases.is_empty())
        .count();

    match config.emit {
        Emit::Text => {
            let hyps = rescore_corpus_text(&lattices, &contexts, config)?;
            for (utt_id, words) in &hyps {
                out.write_all(hypothesis_line(utt_id, words).as_bytes())?;
            }
        }
        Emit::Lattices => {
            let jobs: Vec<(&String, &WordLattice)> = lattices.iter().collect();
            let results: Vec<Result<Vec<u8>, PipelineError>> = with_pool(config.workers, || {
                jobs.par_iter()
                    .map(|(utt_id, lattice)| {
                        let rescored =
                            rescored_lattice(lattice, &contexts[utt_id.as_str()], config)?;
                        let target = rescored.as_ref().unwrap_or(lattice);
                        let mut buf = Vec::new();
                        serialize_lattices([target], &mut buf)?;
                        Ok(buf)
                    })
                    .collect()
            })?;
            for chunk in results {
                out.write_all(&chunk?)?;
            }
        }
    }
    writeln!(
        diag,
        "rescore: {} utterances at discount {}, {} passed through with empty context",
        lattices.len(),
        config.discount,
        passthrough
    )?;
    Ok(())
}

/// Reads `<utt_id> <word> ...` lines, lowercasing words, in file order.
fn read_transcripts<R: BufRead>(
    reader: R,
    file: &'static str,
) -> Result<IndexMap<String, Vec<String>>, PipelineError> {
    let mut out = IndexMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(utt_id) = tokens.next() else {
            continue;
        };
        let words: Vec<String> = tokens.map(str::to_lowercase).collect();
        if out.insert(utt_id.to_string(), words).is_some() {
            return Err(PipelineError::DuplicateTranscript {
                file,
                line: idx + 1,
                utt_id: utt_id.to_string(),
            });
        }
    }
    Ok(out)
}

fn score_corpus(
    refs: &IndexMap<String, Vec<String>>,
    hyps: &IndexMap<String, Vec<String>>,
    callsigns: Option<&IndexMap<String, Vec<String>>>,
) -> Result<(ScoreReport, Vec<(String, ScoreReport)>), PipelineError> {
    let missing: Vec<String> = refs
        .keys()
        .filter(|id| !hyps.contains_key(*id))
        .cloned()
        .collect();
    let extra: Vec<String> = hyps
        .keys()
        .filter(|id| !refs.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(PipelineError::UttIdMismatch { missing, extra });
    }

    let mut per_utterance = Vec::with_capacity(refs.len());
    for (utt_id, ref_words) in refs {
        let hyp_words = &hyps[utt_id.as_str()];
        let callsign: Option<&[String]> = callsigns
            .and_then(|map| map.get(utt_id.as_str()))
            .filter(|words| !words.is_empty())
            .map(Vec::as_slice);
        let report = score_utterance(ref_words, hyp_words, callsign).map_err(|source| {
            PipelineError::Score {
                utt_id: utt_id.clone(),
                source,
            }
        })?;
        per_utterance.push((utt_id.clone(), report));
    }
    let total = aggregate(per_utterance.iter().map(|(_, r)| r));
    Ok((total, per_utterance))
}

/// Scores hypotheses against references: WER always, CA-WER when a callsign
/// file is configured. Emits a JSON report on `out` and a summary table on
/// `diag`, and returns the pooled report.
pub fn run_score(
    config: &PipelineConfig,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<ScoreReport, PipelineError> {
    config.validate()?;
    let refs_path = PipelineConfig::require(&config.refs, "reference transcripts (--refs)")?;
    let refs = read_transcripts(open_buf(refs_path)?, "references")?;
    let hyps_path = PipelineConfig::require(&config.hyps, "hypothesis transcripts (--hyps)")?;
    let hyps = read_transcripts(open_buf(hyps_path)?, "hypotheses")?;
    let callsigns = match &config.callsigns {
        Some(path) => Some(read_transcripts(open_buf(path)?, "callsigns")?),
        None => None,
    };

    let (total, per_utterance) = score_corpus(&refs, &hyps, callsigns.as_ref())?;

    let mut per_json = Vec::with_capacity(per_utterance.len());
    for (utt_id, report) in &per_utterance {
        let mut obj = report.to_json();
        obj["utt_id"] = serde_json::json!(utt_id);
        per_json.push(obj);
    }
    let json = serde_json::json!({
        "aggregate": total.to_json(),
        "per_utterance": per_json,
    });
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&json)
            .map_err(|e| { PipelineError::Internal(format!("report serialization: {e}")) })?
    )?;
    write!(diag, "{}", total.render_table())?;
    Ok(total)
}

fn format_rate(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r:.6}"),
        None => "NA".to_string(),
    }
}

/// Rescoring + scoring across several discounts, one plot-ready TSV row per
/// discount: `discount  wer  ca_wer  skipped`.
pub fn run_sweep(
    config: &PipelineConfig,
    discounts: &[f64],
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), PipelineError> {
    config.validate()?;
    if discounts.is_empty() {
        return Err(PipelineError::InvalidConfig(
            "sweep needs at least one discount".into(),
        ));
    }
    let mut unique: Vec<f64> = Vec::with_capacity(discounts.len());
    for &d in discounts {
        if !d.is_finite() || d < 0.0 {
            return Err(PipelineError::InvalidConfig(format!(
                "discount must be a finite value >= 0, got {d}"
            )));
        }
        if unique.contains(&d) {
            writeln!(diag, "sweep: duplicate discount {d} ignored")?;
        } else {
            unique.push(d);
        }
    }

    let lattices_path = PipelineConfig::require(&config.lattices, "lattice file (--lattices)")?;
    let lattices = parse_lattices(open_buf(lattices_path)?)?;
    let contexts_path = PipelineConfig::require(&config.contexts, "context file (--contexts)")?;
    let contexts = read_contexts(open_buf(contexts_path)?)?;
    check_contexts_cover_lattices(&lattices, &contexts)?;
    let refs_path = PipelineConfig::require(&config.refs, "reference transcripts (--refs)")?;
    let refs = read_transcripts(open_buf(refs_path)?, "references")?;
    let callsigns_path = PipelineConfig::require(&config.callsigns, "callsign file (--callsigns)")?;
    let callsigns = read_transcripts(open_buf(callsigns_path)?, "callsigns")?;

    writeln!(out, "discount\twer\tca_wer\tskipped")?;
    for discount in unique {
        let sweep_config = PipelineConfig {
            discount,
            ..config.clone()
        };
        let raw_hyps = rescore_corpus_text(&lattices, &contexts, &sweep_config)?;
        let hyps: IndexMap<String, Vec<String>> = raw_hyps
            .into_iter()
            .map(|(id, words)| (id, words.into_iter().map(|w| w.to_lowercase()).collect()))
            .collect();
        let (total, _) = score_corpus(&refs, &hyps, Some(&callsigns))?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            discount,
            format_rate(total.wer()),
            format_rate(total.ca_wer()),
            total.skipped_callsign_absent
        )?;
        writeln!(
            diag,
            "sweep: discount {} -> wer {} ca_wer {}",
            discount,
            format_rate(total.wer()),
            format_rate(total.ca_wer())
        )?;
    }
    Ok(())
}
