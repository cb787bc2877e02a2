//! Word alignment, WER, and callsign WER (CA-WER).
//!
//! CA-WER restricts scoring to the reference span holding the expanded
//! callsign: substitutions and deletions of span tokens count, as do
//! insertions strictly inside the span; insertions at the span edges belong
//! to the surrounding command words and are excluded. Corpus rates pool
//! error counts and pool span lengths; they are never averages of
//! per-utterance rates.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty reference")]
    EmptyReference,
    #[error("empty callsign")]
    EmptyCallsign,
}

/// Alignment column operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EditOp {
    Match,
    Sub,
    Del,
    Ins,
}

/// One column of an alignment: the operation and the reference/hypothesis
/// token it touches (absent for the side an insertion/deletion skips).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignColumn {
    pub op: EditOp,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

/// Minimum-edit-distance word alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub columns: Vec<AlignColumn>,
}

impl Alignment {
    /// Total edit cost: substitutions + deletions + insertions.
    pub fn cost(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.op != EditOp::Match)
            .count()
    }
}

/// Aligns `hypothesis` to `reference` with unit costs (matches are free).
///
/// Among minimal alignments the result is canonical: walking left to right,
/// ties prefer Match over Sub over Del over Ins.
pub fn align<A: AsRef<str>, B: AsRef<str>>(reference: &[A], hypothesis: &[B]) -> Alignment {
    let m = reference.len();
    let n = hypothesis.len();
    // dist[i][j] = edit distance between reference[i..] and hypothesis[j..].
    let mut dist = vec![vec![0usize; n + 1]; m + 1];
    for i in (0..=m).rev() {
        for j in (0..=n).rev() {
            dist[i][j] = if i == m {
                n - j
            } else if j == n {
                m - i
            } else {
                let eq = reference[i].as_ref() == hypothesis[j].as_ref();
                let diag = dist[i + 1][j + 1] + usize::from(!eq);
                diag.min(dist[i + 1][j] + 1).min(dist[i][j + 1] + 1)
            };
        }
    }

    let mut columns = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (0usize, 0usize);
    while i < m || j < n {
        let here = dist[i][j];
        let eq = i < m && j < n && reference[i].as_ref() == hypothesis[j].as_ref();
        if eq && dist[i + 1][j + 1] == here {
            columns.push(AlignColumn {
                op: EditOp::Match,
                ref_index: Some(i),
                hyp_index: Some(j),
            });
            i += 1;
            j += 1;
        } else if i < m && j < n && dist[i + 1][j + 1] + 1 == here && !eq {
            columns.push(AlignColumn {
                op: EditOp::Sub,
                ref_index: Some(i),
                hyp_index: Some(j),
            });
            i += 1;
            j += 1;
        } else if i < m && dist[i + 1][j] + 1 == here {
            columns.push(AlignColumn {
                op: EditOp::Del,
                ref_index: Some(i),
                hyp_index: None,
            });
            i += 1;
        } else {
            columns.push(AlignColumn {
                op: EditOp::Ins,
                ref_index: None,
                hyp_index: Some(j),
            });
            j += 1;
        }
    }
    Alignment { columns }
}

/// Error tallies over some reference span.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_length: usize,
}

impl Counts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// `(S + D + I) / ref_length`, absent when the denominator is zero.
    /// May exceed 1.0 through insertions.
    pub fn rate(&self) -> Option<f64> {
        if self.ref_length == 0 {
            None
        } else {
            Some(self.errors() as f64 / self.ref_length as f64)
        }
    }

    fn add(&mut self, other: &Counts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.ref_length += other.ref_length;
    }
}

/// Scoring tallies for one utterance or a pooled corpus.
///
/// `full` covers whole-utterance WER; `callsign` covers the tokens inside
/// the located callsign span. Utterances whose reference does not contain
/// the expected callsign are counted in `skipped_callsign_absent` and
/// contribute nothing to the callsign tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScoreReport {
    pub utterances: usize,
    pub full: Counts,
    pub callsign: Counts,
    /// Utterances that contributed to the callsign tallies.
    pub callsign_scored: usize,
    pub skipped_callsign_absent: usize,
}

impl ScoreReport {
    pub fn wer(&self) -> Option<f64> {
        self.full.rate()
    }

    pub fn ca_wer(&self) -> Option<f64> {
        self.callsign.rate()
    }

    /// Field-wise accumulation; rates are recomputed from the pooled counts.
    pub fn merge(&mut self, other: &ScoreReport) {
        self.utterances += other.utterances;
        self.full.add(&other.full);
        self.callsign.add(&other.callsign);
        self.callsign_scored += other.callsign_scored;
        self.skipped_callsign_absent += other.skipped_callsign_absent;
    }

    /// JSON object with counts and the derived rates; undefined rates are
    /// omitted rather than written as null.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("utterances".into(), self.utterances.into());
        obj.insert(
            "full".into(),
            serde_json::to_value(self.full).expect("counts serialize"),
        );
        if let Some(rate) = self.wer() {
            obj.insert("wer".into(), rate.into());
        }
        obj.insert(
            "callsign".into(),
            serde_json::to_value(self.callsign).expect("counts serialize"),
        );
        if let Some(rate) = self.ca_wer() {
            obj.insert("ca_wer".into(), rate.into());
        }
        obj.insert("callsign_scored".into(), self.callsign_scored.into());
        obj.insert(
            "skipped_callsign_absent".into(),
            self.skipped_callsign_absent.into(),
        );
        serde_json::Value::Object(obj)
    }

    /// Small fixed-width summary for terminals.
    pub fn render_table(&self) -> String {
        fn rate_cell(rate: Option<f64>) -> String {
            match rate {
                Some(r) => format!("{:8.2}%", 100.0 * r),
                None => format!("{:>9}", "-"),
            }
        }
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>9} {:>6} {:>6} {:>6} {:>8}\n",
            "", "rate", "sub", "del", "ins", "ref"
        ));
        out.push_str(&format!(
            "{:<10} {} {:>6} {:>6} {:>6} {:>8}\n",
            "WER",
            rate_cell(self.wer()),
            self.full.substitutions,
            self.full.deletions,
            self.full.insertions,
            self.full.ref_length
        ));
        out.push_str(&format!(
            "{:<10} {} {:>6} {:>6} {:>6} {:>8}\n",
            "CA-WER",
            rate_cell(self.ca_wer()),
            self.callsign.substitutions,
            self.callsign.deletions,
            self.callsign.insertions,
            self.callsign.ref_length
        ));
        out.push_str(&format!(
            "utterances: {} (callsign scored: {}, skipped callsign-absent: {})\n",
            self.utterances, self.callsign_scored, self.skipped_callsign_absent
        ));
        out
    }
}

fn edit_counts(alignment: &Alignment) -> (usize, usize, usize) {
    let mut s = 0;
    let mut d = 0;
    let mut i = 0;
    for col in &alignment.columns {
        match col.op {
            EditOp::Sub => s += 1,
            EditOp::Del => d += 1,
            EditOp::Ins => i += 1,
            EditOp::Match => {}
        }
    }
    (s, d, i)
}

/// Whole-utterance WER report for one reference/hypothesis pair.
pub fn wer<A: AsRef<str>, B: AsRef<str>>(
    reference: &[A],
    hypothesis: &[B],
) -> Result<ScoreReport, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let (substitutions, deletions, insertions) = edit_counts(&align(reference, hypothesis));
    Ok(ScoreReport {
        utterances: 1,
        full: Counts {
            substitutions,
            deletions,
            insertions,
            ref_length: reference.len(),
        },
        ..ScoreReport::default()
    })
}

/// Locates the first contiguous occurrence of `needle` in `haystack`.
fn find_span<A: AsRef<str>, C: AsRef<str>>(haystack: &[A], needle: &[C]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    (0..=haystack.len() - needle.len()).find(|&s| {
        needle
            .iter()
            .zip(&haystack[s..])
            .all(|(n, h)| n.as_ref() == h.as_ref())
    })
}

/// Callsign-span WER report for one utterance.
///
/// The span is the first exact occurrence of `callsign` in `reference`; when
/// absent the utterance is marked skipped and contributes no callsign
/// counts. Substitutions and deletions of span tokens count; insertions
/// count only strictly inside the span.
pub fn ca_wer<A: AsRef<str>, B: AsRef<str>, C: AsRef<str>>(
    reference: &[A],
    hypothesis: &[B],
    callsign: &[C],
) -> Result<ScoreReport, MetricsError> {
    if callsign.is_empty() {
        return Err(MetricsError::EmptyCallsign);
    }
    let Some(start) = find_span(reference, callsign) else {
        return Ok(ScoreReport {
            utterances: 1,
            skipped_callsign_absent: 1,
            ..ScoreReport::default()
        });
    };
    let end = start + callsign.len();

    let mut counts = Counts {
        ref_length: callsign.len(),
        ..Counts::default()
    };
    let mut consumed = 0usize;
    for col in &align(reference, hypothesis).columns {
        match col.op {
            EditOp::Match => consumed += 1,
            EditOp::Sub => {
                let r = col.ref_index.expect("sub column has a reference token");
                if (start..end).contains(&r) {
                    counts.substitutions += 1;
                }
                consumed += 1;
            }
            EditOp::Del => {
                let r = col.ref_index.expect("del column has a reference token");
                if (start..end).contains(&r) {
                    counts.deletions += 1;
                }
                consumed += 1;
            }
            EditOp::Ins => {
                if consumed > start && consumed < end {
                    counts.insertions += 1;
                }
            }
        }
    }
    Ok(ScoreReport {
        utterances: 1,
        callsign: counts,
        callsign_scored: 1,
        ..ScoreReport::default()
    })
}

/// Scores one utterance: whole-utterance WER plus, when a callsign is
/// given, the span-restricted callsign tallies.
pub fn score_utterance<A: AsRef<str>, B: AsRef<str>, C: AsRef<str>>(
    reference: &[A],
    hypothesis: &[B],
    callsign: Option<&[C]>,
) -> Result<ScoreReport, MetricsError> {
    let mut report = wer(reference, hypothesis)?;
    if let Some(callsign) = callsign {
        let ca = ca_wer(reference, hypothesis, callsign)?;
        report.callsign = ca.callsign;
        report.callsign_scored = ca.callsign_scored;
        report.skipped_callsign_absent = ca.skipped_callsign_absent;
    }
    Ok(report)
}

/// Pools reports field-wise; rates derive from the pooled counts.
pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a ScoreReport>) -> ScoreReport {
    let mut total = ScoreReport::default();
    for report in reports {
        total.merge(report);
    }
    total
}
