//! Shared helpers for integration tests: seeded random instances, naive
//! reference implementations kept separate from the library code paths, and
//! a synthetic confusable-callsign corpus.

// Each integration test binary compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use skybias::biasing::PhraseSet;
use skybias::lattice::{LatticeArc, WordLattice};

pub const VOCAB: [&str; 6] = ["alpha", "bravo", "one", "two", "zero", "contact"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

/// Cost grid of quarter steps keeps every floating-point sum exact.
fn dyadic(rng: &mut ChaCha8Rng, steps: u32) -> f64 {
    f64::from(rng.random_range(0..steps)) * 0.25
}

fn vocab_word(rng: &mut ChaCha8Rng) -> String {
    VOCAB[rng.random_range(0..VOCAB.len())].to_string()
}

/// Random DAG lattice with <= 8 states and <= 14 arcs: a 0..n-1 backbone
/// plus forward extra arcs, dyadic costs, final state n-1 (plus sometimes
/// one more).
pub fn random_lattice(rng: &mut ChaCha8Rng, utt_id: &str) -> WordLattice {
    let n: u32 = rng.random_range(2..=8);
    let mut arcs = Vec::new();
    for i in 0..n - 1 {
        arcs.push(LatticeArc {
            src: i,
            dst: i + 1,
            word: vocab_word(rng),
            graph_cost: dyadic(rng, 32),
            acoustic_cost: dyadic(rng, 32),
        });
    }
    let extra = rng.random_range(0..=(14 - arcs.len()).min(8));
    for _ in 0..extra {
        let src = rng.random_range(0..n - 1);
        let dst = rng.random_range(src + 1..=n - 1);
        arcs.push(LatticeArc {
            src,
            dst,
            word: vocab_word(rng),
            graph_cost: dyadic(rng, 32),
            acoustic_cost: dyadic(rng, 32),
        });
    }
    let mut finals = vec![(n - 1, (0.0, 0.0))];
    if rng.random_bool(0.3) {
        finals.push((rng.random_range(1..n), (dyadic(rng, 16), 0.0)));
    }
    WordLattice::build(utt_id, arcs, finals).expect("generated lattice is valid")
}

/// Random phrase set of at most `max_phrases` n-grams over [`VOCAB`].
pub fn random_phrase_set(rng: &mut ChaCha8Rng, max_phrases: usize) -> PhraseSet {
    let mut set = PhraseSet::new();
    for _ in 0..rng.random_range(0..=max_phrases) {
        let len = rng.random_range(1..=3);
        let phrase: Vec<String> = (0..len).map(|_| vocab_word(rng)).collect();
        let _ = set.insert(phrase);
    }
    set
}

/// Counts (phrase, end position) occurrences by scanning windows; the slow
/// reference the automaton is checked against.
pub fn naive_occurrences<'a>(
    phrases: impl IntoIterator<Item = &'a [String]>,
    words: &[String],
) -> u64 {
    let mut occ = 0;
    for phrase in phrases {
        if phrase.is_empty() || phrase.len() > words.len() {
            continue;
        }
        for window in words.windows(phrase.len()) {
            if window == phrase {
                occ += 1;
            }
        }
    }
    occ
}

pub fn naive_occurrences_in_set(set: &PhraseSet, words: &[String]) -> u64 {
    naive_occurrences(set.iter(), words)
}

// ---------------------------------------------------------------------------
// Synthetic confusable-callsign corpus
// ---------------------------------------------------------------------------

const AIRLINES: [(&str, &str); 5] = [
    ("DLH", "lufthansa"),
    ("RYR", "ryanair"),
    ("BAW", "speedbird"),
    ("AUA", "austrian"),
    ("SWR", "swiss"),
];

const NATO: [&str; 26] = [
    "alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett",
    "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
    "uniform", "victor", "whiskey", "x-ray", "yankee", "zulu",
];

const DIGITS: [&str; 10] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
];

/// Words that never occur in any verbalization; used for wrong branches.
const CALLSIGN_JUNK: [&str; 4] = ["tree", "fife", "sefen", "too"];
const COMMAND_JUNK: [&str; 3] = ["roger", "wilco", "standby"];

const COMMANDS: [&str; 4] = [
    "descend flight level one two zero",
    "contact tower on one one eight decimal one",
    "climb flight level three four zero",
    "reduce speed two one zero",
];

/// Margins are `t * gain` with `t` on this grid: every utterance flips from
/// the wrong branch to the right one as soon as the discount exceeds its
/// `t`, and every `t` is below 5.
const THRESHOLDS: [f64; 10] = [0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.25, 3.75, 4.25, 4.75];

fn spell_char(c: char) -> &'static str {
    if c.is_ascii_digit() {
        DIGITS[(c as u8 - b'0') as usize]
    } else {
        NATO[(c as u8 - b'A') as usize]
    }
}

fn expand(suffix: &str) -> Vec<String> {
    suffix.chars().map(|c| spell_char(c).to_string()).collect()
}

/// All contiguous subsequences of the given phrases (orders 1..=len),
/// deduplicated: the n-gram set the rescoring pipeline will boost.
fn ngram_set(phrases: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for phrase in phrases {
        for order in 1..=phrase.len() {
            for window in phrase.windows(order) {
                if seen.insert(window.to_vec()) {
                    out.push(window.to_vec());
                }
            }
        }
    }
    out
}

/// The file contents of a generated corpus.
pub struct SyntheticCorpus {
    pub lattices: String,
    pub contexts: String,
    pub refs: String,
    pub callsigns: String,
    /// span-error words at risk per utterance, for sanity checks
    pub utterances: usize,
}

pub struct CorpusPaths {
    pub lattices: std::path::PathBuf,
    pub contexts: std::path::PathBuf,
    pub refs: std::path::PathBuf,
    pub callsigns: std::path::PathBuf,
}

impl SyntheticCorpus {
    pub fn write_to(&self, dir: &Path) -> CorpusPaths {
        let paths = CorpusPaths {
            lattices: dir.join("lattices.txt"),
            contexts: dir.join("contexts.ndjson"),
            refs: dir.join("refs.txt"),
            callsigns: dir.join("callsigns.txt"),
        };
        fs::write(&paths.lattices, &self.lattices).unwrap();
        fs::write(&paths.contexts, &self.contexts).unwrap();
        fs::write(&paths.refs, &self.refs).unwrap();
        fs::write(&paths.callsigns, &self.callsigns).unwrap();
        paths
    }
}

fn json_phrase_list(phrases: &[Vec<String>]) -> String {
    let items: Vec<String> = phrases
        .iter()
        .map(|p| {
            let words: Vec<String> = p.iter().map(|w| format!("\"{w}\"")).collect();
            format!("[{}]", words.join(","))
        })
        .collect();
    format!("[{}]", items.join(","))
}

/// Generates `n` utterances whose lattices each contain the true callsign
/// path and a cheaper confusable branch (substitution, deletion, or
/// insertion inside the callsign span). The wrong branch is cheaper by
/// `t * occ_gain` for a per-utterance `t` drawn from [`THRESHOLDS`], so the
/// right branch wins exactly when the discount exceeds `t`. A quarter of
/// utterances also carry a command-word confusion that no discount repairs.
pub fn synthetic_corpus(n: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = rng(seed);
    let mut lattices = String::new();
    let mut contexts = String::new();
    let mut refs = String::new();
    let mut callsigns = String::new();

    for i in 0..n {
        let utt_id = format!("utt{i:04}");
        let (designator, telephony) = AIRLINES[rng.random_range(0..AIRLINES.len())];

        // Suffix: two or three digits, sometimes a trailing letter.
        let mut suffix = String::new();
        for _ in 0..rng.random_range(2..=3) {
            suffix.push((b'0' + rng.random_range(0..10u8)) as char);
        }
        if rng.random_bool(0.5) {
            suffix.push((b'A' + rng.random_range(0..26u8)) as char);
        }
        let raw = format!("{designator}{suffix}");

        let mut callsign_words = vec![telephony.to_string()];
        callsign_words.extend(expand(&suffix));
        let spelled: Vec<String> = designator
            .chars()
            .map(|c| spell_char(c).to_string())
            .chain(expand(&suffix))
            .collect();

        let command = toks(COMMANDS[rng.random_range(0..COMMANDS.len())]);
        let mut ref_words = callsign_words.clone();
        ref_words.extend(command.iter().cloned());

        // Context: the true callsign plus two distractors from other airlines.
        let mut phrases = vec![callsign_words.clone(), spelled.clone()];
        let mut context_raws = vec![raw.clone()];
        for _ in 0..2 {
            let (d_des, d_tel) = AIRLINES[rng.random_range(0..AIRLINES.len())];
            if d_des == designator {
                continue;
            }
            let d_suffix: String = (0..2)
                .map(|_| (b'0' + rng.random_range(0..10u8)) as char)
                .collect();
            context_raws.push(format!("{d_des}{d_suffix}"));
            let mut d_words = vec![d_tel.to_string()];
            d_words.extend(expand(&d_suffix));
            phrases.push(d_words);
            phrases.push(
                d_des
                    .chars()
                    .map(|c| spell_char(c).to_string())
                    .chain(expand(&d_suffix))
                    .collect(),
            );
        }
        let grams = ngram_set(&phrases);

        // Confusion inside the callsign span (never position 0).
        let span_len = callsign_words.len();
        let p = 1 + (i % (span_len - 1));
        let junk = CALLSIGN_JUNK[i % CALLSIGN_JUNK.len()].to_string();
        let kind = i % 3; // 0 = substitution, 1 = deletion, 2 = insertion

        let mut wrong_words = ref_words.clone();
        match kind {
            0 => wrong_words[p] = junk.clone(),
            1 => {
                wrong_words.remove(p);
            }
            _ => wrong_words.insert(p, junk.clone()),
        }

        let gram_slices = grams.iter().map(Vec::as_slice);
        let occ_correct = naive_occurrences(gram_slices.clone(), &ref_words);
        let occ_wrong = naive_occurrences(gram_slices, &wrong_words);
        assert!(
            occ_correct > occ_wrong,
            "corpus construction must lose occurrences on the wrong branch"
        );
        let gain = (occ_correct - occ_wrong) as f64;
        let threshold = THRESHOLDS[i % THRESHOLDS.len()];
        let margin = threshold * gain;

        // Linear chain with the confusable branch; costs are dyadic.
        let total = ref_words.len() as u32;
        let mut block = format!("UTT {utt_id}\n");
        let command_confusion = i % 4 == 0;
        for (j, word) in ref_words.iter().enumerate() {
            let j = j as u32;
            let mut graph = 0.0;
            if j as usize == p {
                graph = margin;
            }
            if command_confusion && j as usize == span_len {
                graph = 0.5;
            }
            block.push_str(&format!("{} {} {} {} 0\n", j, j + 1, word, graph));
        }
        match kind {
            0 => block.push_str(&format!("{} {} {} 0 0\n", p, p + 1, junk)),
            1 => block.push_str(&format!("{} {} {} 0 0\n", p, p + 2, ref_words[p + 1])),
            _ => {
                let extra = total + 1;
                block.push_str(&format!("{p} {extra} {junk} 0 0\n"));
                block.push_str(&format!("{} {} {} 0 0\n", extra, p + 1, ref_words[p]));
            }
        }
        if command_confusion {
            let q = span_len as u32;
            let junk2 = COMMAND_JUNK[i % COMMAND_JUNK.len()];
            block.push_str(&format!("{} {} {} 0 0\n", q, q + 1, junk2));
        }
        block.push_str(&format!("{total}\n\n"));
        lattices.push_str(&block);

        let callsign_json: Vec<String> = context_raws.iter().map(|r| format!("\"{r}\"")).collect();
        contexts.push_str(&format!(
            "{{\"utt_id\":\"{utt_id}\",\"callsigns\":[{}],\"phrases\":{}}}\n",
            callsign_json.join(","),
            json_phrase_list(&phrases)
        ));
        refs.push_str(&format!("{utt_id} {}\n", ref_words.join(" ")));
        callsigns.push_str(&format!("{utt_id} {}\n", callsign_words.join(" ")));
    }

    SyntheticCorpus {
        lattices,
        contexts,
        refs,
        callsigns,
        utterances: n,
    }
}
