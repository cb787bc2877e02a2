//! Per-utterance word lattices and path search.
//!
//! A [`WordLattice`] is an acyclic weighted word acceptor: the compact
//! encoding of a recognizer's first-pass search results for one utterance.
//! Arcs carry a word plus a `(graph_cost, acoustic_cost)` pair in the
//! negative-log domain; the costs stay separate so that rescoring can touch
//! the graph component while leaving acoustic evidence untouched.
//!
//! The text format is line oriented, one blank-line-terminated block per
//! utterance:
//!
//! ```text
//! UTT <utt_id>
//! <src> <dst> <word> <graph_cost> <acoustic_cost>
//! <state>                      # final with zero final costs
//! <state> <graph_cost> <acoustic_cost>
//! ```
//!
//! State 0 is always the start state. The reserved token `<eps>` is rejected:
//! lattices here are word acceptors with no epsilon transitions.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use indexmap::IndexMap;
use thiserror::Error;

/// Lattice state identifier. States are contiguous and 0 is the start state.
pub type StateId = u32;

/// Reserved epsilon spelling, rejected by the parser.
pub const EPSILON_TOKEN: &str = "<eps>";

/// A weighted word transition between two lattice states.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeArc {
    pub src: StateId,
    pub dst: StateId,
    pub word: String,
    pub graph_cost: f64,
    pub acoustic_cost: f64,
}

/// Error raised while reading the lattice text format.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed lattice line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: arc lies on a cycle")]
    Cycle { line: usize },
    #[error("line {line}: epsilon word token {EPSILON_TOKEN:?} is not allowed")]
    EpsilonWord { line: usize },
    #[error("line {line}: final state {state} is not referenced by any arc")]
    UnknownState { line: usize, state: StateId },
    #[error("line {line}: duplicate utterance id {utt_id:?}")]
    DuplicateUttId { line: usize, utt_id: String },
    #[error("line {line}: utterance {utt_id:?} has no final state")]
    MissingFinal { line: usize, utt_id: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Error raised by lattice construction and search.
#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("lattice {utt_id:?} contains a cycle")]
    Cyclic { utt_id: String },
    #[error("lattice {utt_id:?} contains an epsilon word arc")]
    EpsilonWord { utt_id: String },
    #[error("lattice {utt_id:?} has no final state")]
    NoFinalState { utt_id: String },
    #[error("lattice {utt_id:?} references undefined state {state}")]
    UnknownState { utt_id: String, state: StateId },
    #[error("lattice {utt_id:?} has a non-finite cost")]
    NonFiniteCost { utt_id: String },
    #[error("lattice {utt_id:?} has no complete path from the start state to a final state")]
    NoCompletePath { utt_id: String },
    #[error("lattice {utt_id:?} has more than {limit} complete paths")]
    TooManyPaths { utt_id: String, limit: usize },
}

/// Acyclic weighted word acceptor for one utterance.
///
/// Instances are immutable once built; every constructor validates the
/// structural invariants (acyclic, no epsilon arcs, at least one final state,
/// finite costs), so any `WordLattice` you can hold is well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct WordLattice {
    utt_id: String,
    num_states: u32,
    arcs: Vec<LatticeArc>,
    finals: BTreeMap<StateId, (f64, f64)>,
}

/// One complete lattice path: a transcript hypothesis with its summed costs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathHypothesis {
    pub words: Vec<String>,
    pub graph_cost: f64,
    pub acoustic_cost: f64,
    /// `graph_cost + acoustic_scale * acoustic_cost` for the scale the path
    /// was extracted with.
    pub combined_cost: f64,
}

impl PathHypothesis {
    fn new(words: Vec<String>, graph_cost: f64, acoustic_cost: f64, acoustic_scale: f64) -> Self {
        PathHypothesis {
            words,
            graph_cost,
            acoustic_cost,
            combined_cost: graph_cost + acoustic_scale * acoustic_cost,
        }
    }

    /// Ordering used to pick the best path: lowest combined cost, then
    /// lexicographically smallest word sequence, then fewest arcs.
    pub fn cmp_by_cost(&self, other: &Self) -> std::cmp::Ordering {
        self.combined_cost
            .partial_cmp(&other.combined_cost)
            .expect("lattice costs are finite")
            .then_with(|| self.words.cmp(&other.words))
            .then_with(|| self.words.len().cmp(&other.words.len()))
    }
}

/// Returns the index of the first arc whose source state never becomes free
/// in a Kahn elimination, i.e. an arc at or downstream of a cycle.
fn first_cyclic_arc(num_states: u32, arcs: &[LatticeArc]) -> Option<usize> {
    let n = num_states as usize;
    let mut indegree = vec![0usize; n];
    for arc in arcs {
        indegree[arc.dst as usize] += 1;
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, arc) in arcs.iter().enumerate() {
        out[arc.src as usize].push(i);
    }
    let mut queue: Vec<StateId> = (0..num_states)
        .filter(|&s| indegree[s as usize] == 0)
        .collect();
    let mut removed = vec![false; n];
    while let Some(s) = queue.pop() {
        removed[s as usize] = true;
        for &i in &out[s as usize] {
            let d = arcs[i].dst as usize;
            indegree[d] -= 1;
            if indegree[d] == 0 {
                queue.push(arcs[i].dst);
            }
        }
    }
    arcs.iter().position(|a| !removed[a.src as usize])
}

/// Best-known suffix from a state to some final state.
#[derive(Debug, Clone, Copy)]
struct SuffixBest {
    graph: f64,
    acoustic: f64,
    combined: f64,
    narcs: usize,
    /// `None` stops at this state's final weight; `Some(i)` takes `arcs[i]`.
    choice: Option<usize>,
}

/// Lazily walks the word sequence spelled by chained suffix choices.
struct SuffixWords<'a> {
    lattice: &'a WordLattice,
    best: &'a [Option<SuffixBest>],
    state: StateId,
}

impl<'a> Iterator for SuffixWords<'a> {
    type Item = &'a str;

    fn next(&mut self) -> Option<&'a str> {
        let entry = self.best[self.state as usize].as_ref()?;
        match entry.choice {
            None => None,
            Some(i) => {
                let arc = &self.lattice.arcs[i];
                self.state = arc.dst;
                Some(arc.word.as_str())
            }
        }
    }
}

impl WordLattice {
    /// Builds a lattice from parts, validating every structural invariant.
    ///
    /// The state count is derived from the highest state id referenced by an
    /// arc; state 0 always exists. Final states must be within that range.
    pub fn build(
        utt_id: impl Into<String>,
        arcs: Vec<LatticeArc>,
        finals: impl IntoIterator<Item = (StateId, (f64, f64))>,
    ) -> Result<Self, LatticeError> {
        let utt_id = utt_id.into();
        let finals: BTreeMap<StateId, (f64, f64)> = finals.into_iter().collect();
        let num_states = arcs
            .iter()
            .map(|a| a.src.max(a.dst) + 1)
            .max()
            .unwrap_or(1)
            .max(1);
        if finals.is_empty() {
            return Err(LatticeError::NoFinalState { utt_id });
        }
        for (&s, &(g, a)) in &finals {
            if s >= num_states {
                return Err(LatticeError::UnknownState { utt_id, state: s });
            }
            if !g.is_finite() || !a.is_finite() {
                return Err(LatticeError::NonFiniteCost { utt_id });
            }
        }
        for arc in &arcs {
            if arc.word == EPSILON_TOKEN {
                return Err(LatticeError::EpsilonWord { utt_id });
            }
            if !arc.graph_cost.is_finite() || !arc.acoustic_cost.is_finite() {
                return Err(LatticeError::NonFiniteCost { utt_id });
            }
        }
        if first_cyclic_arc(num_states, &arcs).is_some() {
            return Err(LatticeError::Cyclic { utt_id });
        }
        Ok(WordLattice {
            utt_id,
            num_states,
            arcs,
            finals,
        })
    }

    pub fn utt_id(&self) -> &str {
        &self.utt_id
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn arcs(&self) -> &[LatticeArc] {
        &self.arcs
    }

    /// Final states with their `(graph_cost, acoustic_cost)` weights.
    pub fn finals(&self) -> &BTreeMap<StateId, (f64, f64)> {
        &self.finals
    }

    /// Arc indices leaving each state, in arc order.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.num_states as usize];
        for (i, arc) in self.arcs.iter().enumerate() {
            adj[arc.src as usize].push(i);
        }
        adj
    }

    /// Cheapest complete path under `combined = graph + acoustic_scale * acoustic`.
    ///
    /// Ties are broken by the lexicographically smallest word sequence, then
    /// by fewest arcs, so the result is deterministic.
    pub fn best_path(&self, acoustic_scale: f64) -> Result<PathHypothesis, LatticeError> {
        let adj = self.adjacency();
        let order = self.topological_order();
        let mut best: Vec<Option<SuffixBest>> = vec![None; self.num_states as usize];

        for &state in order.iter().rev() {
            let mut current: Option<SuffixBest> =
                self.finals.get(&state).map(|&(g, a)| SuffixBest {
                    graph: g,
                    acoustic: a,
                    combined: g + acoustic_scale * a,
                    narcs: 0,
                    choice: None,
                });
            for &i in &adj[state as usize] {
                let arc = &self.arcs[i];
                let Some(tail) = best[arc.dst as usize] else {
                    continue;
                };
                let cand = SuffixBest {
                    graph: arc.graph_cost + tail.graph,
                    acoustic: arc.acoustic_cost + tail.acoustic,
                    combined: (arc.graph_cost + tail.graph)
                        + acoustic_scale * (arc.acoustic_cost + tail.acoustic),
                    narcs: 1 + tail.narcs,
                    choice: Some(i),
                };
                current = Some(match current {
                    None => cand,
                    Some(cur) => self.pick_suffix(&best, cur, cand),
                });
            }
            best[state as usize] = current;
        }

        let Some(start) = best[0] else {
            return Err(LatticeError::NoCompletePath {
                utt_id: self.utt_id.clone(),
            });
        };
        let words: Vec<String> = SuffixWords {
            lattice: self,
            best: &best,
            state: 0,
        }
        .map(str::to_owned)
        .collect();
        Ok(PathHypothesis::new(
            words,
            start.graph,
            start.acoustic,
            acoustic_scale,
        ))
    }

    /// Chooses between the incumbent suffix and a candidate, comparing
    /// (combined cost, word sequence, arc count) without materializing the
    /// word sequences.
    fn pick_suffix(
        &self,
        best: &[Option<SuffixBest>],
        cur: SuffixBest,
        cand: SuffixBest,
    ) -> SuffixBest {
        use std::cmp::Ordering;
        let ord = cand
            .combined
            .partial_cmp(&cur.combined)
            .expect("lattice costs are finite")
            .then_with(|| {
                let cand_words = self.suffix_words_via(best, &cand);
                let cur_words = self.suffix_words_via(best, &cur);
                cand_words.cmp(cur_words)
            })
            .then_with(|| cand.narcs.cmp(&cur.narcs));
        if ord == Ordering::Less {
            cand
        } else {
            cur
        }
    }

    /// Word sequence of a suffix candidate: its own first step (if any)
    /// followed by the recorded best choices downstream.
    fn suffix_words_via<'a>(
        &'a self,
        best: &'a [Option<SuffixBest>],
        suffix: &SuffixBest,
    ) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match suffix.choice {
            None => Box::new(std::iter::empty()),
            Some(i) => {
                let arc = &self.arcs[i];
                Box::new(std::iter::once(arc.word.as_str()).chain(SuffixWords {
                    lattice: self,
                    best,
                    state: arc.dst,
                }))
            }
        }
    }

    /// States in a topological order (validated lattices are acyclic).
    fn topological_order(&self) -> Vec<StateId> {
        let n = self.num_states as usize;
        let mut indegree = vec![0usize; n];
        for arc in &self.arcs {
            indegree[arc.dst as usize] += 1;
        }
        let adj = self.adjacency();
        let mut queue: std::collections::VecDeque<StateId> = (0..self.num_states)
            .filter(|&s| indegree[s as usize] == 0)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &i in &adj[s as usize] {
                let d = self.arcs[i].dst as usize;
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    queue.push_back(self.arcs[i].dst);
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    /// Exhaustively enumerates complete paths in depth-first arc order.
    ///
    /// Fails with [`LatticeError::TooManyPaths`] once more than `limit`
    /// complete paths are found, so callers are protected from combinatorial
    /// blowup. Intended as the brute-force reference for tests and small
    /// diagnostics rather than a production search.
    pub fn enumerate_paths(
        &self,
        acoustic_scale: f64,
        limit: usize,
    ) -> Result<Vec<PathHypothesis>, LatticeError> {
        let adj = self.adjacency();
        let mut paths = Vec::new();
        // Explicit stack: frames of (state, next arc position in adj[state]).
        let mut frames: Vec<(StateId, usize)> = vec![(0, 0)];
        let mut words: Vec<String> = Vec::new();
        let mut graph = 0.0f64;
        let mut acoustic = 0.0f64;

        while let Some(&mut (state, ref mut pos)) = frames.last_mut() {
            if *pos == 0 {
                if let Some(&(gf, af)) = self.finals.get(&state) {
                    if paths.len() >= limit {
                        return Err(LatticeError::TooManyPaths {
                            utt_id: self.utt_id.clone(),
                            limit,
                        });
                    }
                    paths.push(PathHypothesis::new(
                        words.clone(),
                        graph + gf,
                        acoustic + af,
                        acoustic_scale,
                    ));
                }
            }
            match adj[state as usize].get(*pos) {
                Some(&i) => {
                    *pos += 1;
                    let arc = &self.arcs[i];
                    words.push(arc.word.clone());
                    graph += arc.graph_cost;
                    acoustic += arc.acoustic_cost;
                    frames.push((arc.dst, 0));
                }
                None => {
                    frames.pop();
                    if let Some(&(prev_state, prev_pos)) = frames.last() {
                        let i = adj[prev_state as usize][prev_pos - 1];
                        let arc = &self.arcs[i];
                        words.pop();
                        graph -= arc.graph_cost;
                        acoustic -= arc.acoustic_cost;
                    }
                }
            }
        }
        Ok(paths)
    }

    /// Drops states that are not on any complete path and renumbers the
    /// survivors in ascending order (the start state stays 0).
    pub fn trim(&self) -> Result<WordLattice, LatticeError> {
        let n = self.num_states as usize;
        let adj = self.adjacency();

        let mut forward = vec![false; n];
        let mut stack = vec![0 as StateId];
        forward[0] = true;
        while let Some(s) = stack.pop() {
            for &i in &adj[s as usize] {
                let d = self.arcs[i].dst;
                if !forward[d as usize] {
                    forward[d as usize] = true;
                    stack.push(d);
                }
            }
        }

        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for arc in &self.arcs {
            rev[arc.dst as usize].push(arc.src);
        }
        let mut backward = vec![false; n];
        let mut stack: Vec<StateId> = self.finals.keys().copied().collect();
        for &s in &stack {
            backward[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &rev[s as usize] {
                if !backward[p as usize] {
                    backward[p as usize] = true;
                    stack.push(p);
                }
            }
        }

        let keep: Vec<bool> = (0..n).map(|s| forward[s] && backward[s]).collect();
        if !keep[0] {
            return Err(LatticeError::NoCompletePath {
                utt_id: self.utt_id.clone(),
            });
        }
        let mut renumber = vec![StateId::MAX; n];
        let mut next: StateId = 0;
        for (s, &k) in keep.iter().enumerate() {
            if k {
                renumber[s] = next;
                next += 1;
            }
        }
        let arcs: Vec<LatticeArc> = self
            .arcs
            .iter()
            .filter(|a| keep[a.src as usize] && keep[a.dst as usize])
            .map(|a| LatticeArc {
                src: renumber[a.src as usize],
                dst: renumber[a.dst as usize],
                word: a.word.clone(),
                graph_cost: a.graph_cost,
                acoustic_cost: a.acoustic_cost,
            })
            .collect();
        let finals: BTreeMap<StateId, (f64, f64)> = self
            .finals
            .iter()
            .filter(|(&s, _)| keep[s as usize])
            .map(|(&s, &w)| (renumber[s as usize], w))
            .collect();
        if finals.is_empty() {
            return Err(LatticeError::NoCompletePath {
                utt_id: self.utt_id.clone(),
            });
        }
        Ok(WordLattice {
            utt_id: self.utt_id.clone(),
            num_states: next.max(1),
            arcs,
            finals,
        })
    }
}

/// Formats a cost with six decimal places when that representation parses
/// back exactly, falling back to the shortest exact form otherwise.
fn fmt_cost(v: f64) -> String {
    let fixed = format!("{v:.6}");
    if fixed.parse::<f64>() == Ok(v) {
        fixed
    } else {
        format!("{v}")
    }
}

/// Reads lattices from the text format, keyed and ordered by utterance id.
pub fn parse_lattices<R: BufRead>(reader: R) -> Result<IndexMap<String, WordLattice>, ParseError> {
    let mut lattices: IndexMap<String, WordLattice> = IndexMap::new();
    // In-flight block: (header line, utt_id, arcs with lines, finals with lines).
    let mut block: Option<Block> = None;

    struct Block {
        header_line: usize,
        utt_id: String,
        arcs: Vec<LatticeArc>,
        arc_lines: Vec<usize>,
        finals: Vec<(usize, StateId, f64, f64)>,
    }

    fn finish(
        block: Block,
        lattices: &mut IndexMap<String, WordLattice>,
    ) -> Result<(), ParseError> {
        let num_states = block
            .arcs
            .iter()
            .map(|a| a.src.max(a.dst) + 1)
            .max()
            .unwrap_or(1)
            .max(1);
        if block.finals.is_empty() {
            return Err(ParseError::MissingFinal {
                line: block.header_line,
                utt_id: block.utt_id,
            });
        }
        let mut finals = BTreeMap::new();
        for &(line, state, g, a) in &block.finals {
            if state >= num_states {
                return Err(ParseError::UnknownState { line, state });
            }
            if finals.insert(state, (g, a)).is_some() {
                return Err(ParseError::MalformedLine {
                    line,
                    reason: format!("duplicate final state {state}"),
                });
            }
        }
        if let Some(i) = first_cyclic_arc(num_states, &block.arcs) {
            return Err(ParseError::Cycle {
                line: block.arc_lines[i],
            });
        }
        lattices.insert(
            block.utt_id.clone(),
            WordLattice {
                utt_id: block.utt_id,
                num_states,
                arcs: block.arcs,
                finals,
            },
        );
        Ok(())
    }

    fn parse_state(tok: &str, line: usize) -> Result<StateId, ParseError> {
        tok.parse::<StateId>()
            .map_err(|_| ParseError::MalformedLine {
                line,
                reason: format!("invalid state id {tok:?}"),
            })
    }

    fn parse_cost(tok: &str, line: usize) -> Result<f64, ParseError> {
        let v: f64 = tok.parse().map_err(|_| ParseError::MalformedLine {
            line,
            reason: format!("invalid cost {tok:?}"),
        })?;
        if !v.is_finite() {
            return Err(ParseError::MalformedLine {
                line,
                reason: format!("non-finite cost {tok:?}"),
            });
        }
        Ok(v)
    }

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();

        if tokens.is_empty() {
            if let Some(b) = block.take() {
                finish(b, &mut lattices)?;
            }
            continue;
        }

        match &mut block {
            None => {
                if tokens.len() == 2 && tokens[0] == "UTT" {
                    let utt_id = tokens[1].to_string();
                    if lattices.contains_key(&utt_id) {
                        return Err(ParseError::DuplicateUttId {
                            line: line_no,
                            utt_id,
                        });
                    }
                    block = Some(Block {
                        header_line: line_no,
                        utt_id,
                        arcs: Vec::new(),
                        arc_lines: Vec::new(),
                        finals: Vec::new(),
                    });
                } else {
                    return Err(ParseError::MalformedLine {
                        line: line_no,
                        reason: "expected `UTT <utt_id>` header".to_string(),
                    });
                }
            }
            Some(b) => match tokens.len() {
                5 => {
                    let src = parse_state(tokens[0], line_no)?;
                    let dst = parse_state(tokens[1], line_no)?;
                    let word = tokens[2];
                    if word == EPSILON_TOKEN {
                        return Err(ParseError::EpsilonWord { line: line_no });
                    }
                    let graph_cost = parse_cost(tokens[3], line_no)?;
                    let acoustic_cost = parse_cost(tokens[4], line_no)?;
                    b.arcs.push(LatticeArc {
                        src,
                        dst,
                        word: word.to_string(),
                        graph_cost,
                        acoustic_cost,
                    });
                    b.arc_lines.push(line_no);
                }
                1 => {
                    let state = parse_state(tokens[0], line_no)?;
                    b.finals.push((line_no, state, 0.0, 0.0));
                }
                3 => {
                    let state = parse_state(tokens[0], line_no)?;
                    let g = parse_cost(tokens[1], line_no)?;
                    let a = parse_cost(tokens[2], line_no)?;
                    b.finals.push((line_no, state, g, a));
                }
                n => {
                    return Err(ParseError::MalformedLine {
                        line: line_no,
                        reason: format!(
                            "expected a 5-token arc line or a 1-/3-token final line, got {n} tokens"
                        ),
                    });
                }
            },
        }
    }
    if let Some(b) = block.take() {
        finish(b, &mut lattices)?;
    }
    Ok(lattices)
}

/// Writes lattices in the text format, one blank-line-terminated block each.
///
/// `parse_lattices(serialize_lattices(x)) == x` structurally: costs are
/// printed so they read back to the identical `f64`.
pub fn serialize_lattices<'a, W: Write>(
    lattices: impl IntoIterator<Item = &'a WordLattice>,
    writer: &mut W,
) -> io::Result<()> {
    for lattice in lattices {
        writeln!(writer, "UTT {}", lattice.utt_id)?;
        for arc in &lattice.arcs {
            writeln!(
                writer,
                "{} {} {} {} {}",
                arc.src,
                arc.dst,
                arc.word,
                fmt_cost(arc.graph_cost),
                fmt_cost(arc.acoustic_cost)
            )?;
        }
        for (&state, &(g, a)) in &lattice.finals {
            if g == 0.0 && a == 0.0 {
                writeln!(writer, "{state}")?;
            } else {
                writeln!(writer, "{} {} {}", state, fmt_cost(g), fmt_cost(a))?;
            }
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use proptest::prelude::*;

    prop_compose! {
        /// Random small DAG lattice with a guaranteed 0 -> n-1 backbone and
        /// dyadic costs, so floating-point sums are exact.
        pub(crate) fn small_lattice()(
            n in 2u32..=8,
        )(
            n in Just(n),
            extra in prop::collection::vec(
                (0u32..8, 1u32..8, 0usize..6, 0i32..32, 0i32..32),
                0..=8
            ),
            backbone in prop::collection::vec((0usize..6, 0i32..32, 0i32..32), 8),
            extra_finals in prop::collection::vec((1u32..8, 0i32..16), 0..=2),
        ) -> WordLattice {
            const VOCAB: [&str; 6] = ["alpha", "bravo", "one", "two", "zero", "contact"];
            let mut arcs = Vec::new();
            for (i, &(w, g, a)) in backbone.iter().take(n as usize - 1).enumerate() {
                arcs.push(LatticeArc {
                    src: i as u32,
                    dst: i as u32 + 1,
                    word: VOCAB[w].to_string(),
                    graph_cost: f64::from(g) * 0.25,
                    acoustic_cost: f64::from(a) * 0.25,
                });
            }
            for &(src, span, w, g, a) in &extra {
                let src = src % (n - 1);
                let dst = src + 1 + span % (n - 1 - src);
                arcs.push(LatticeArc {
                    src,
                    dst,
                    word: VOCAB[w].to_string(),
                    graph_cost: f64::from(g) * 0.25,
                    acoustic_cost: f64::from(a) * 0.25,
                });
            }
            let mut finals = vec![(n - 1, (0.0, 0.0))];
            for &(s, g) in &extra_finals {
                finals.push((s % n, (f64::from(g) * 0.25, 0.0)));
            }
            WordLattice::build("prop", arcs, finals).unwrap()
        }
    }
}
