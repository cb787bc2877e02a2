//! Weighted n-gram biasing automaton and lattice rescoring.
//!
//! Context phrases (verbalized callsigns) are broken into n-grams and
//! compiled into a multi-pattern matcher over word tokens: a token trie with
//! failure links in the classic goto/failure construction, where every state
//! knows how many tracked n-grams end at it (`out_count`). Matching is total:
//! failure links make the induced transition function defined for every
//! token, and occurrences are counted with full overlap and suffix semantics.
//!
//! Rescoring composes a lattice with the matcher: lattice states are paired
//! with matcher states, and every arc's graph cost is reduced by
//! `discount * out_count(target matcher state)`, i.e. by the discount once
//! for every tracked n-gram that ends at the word just consumed. The path
//! set and acoustic costs are untouched; only graph costs move, so a path's
//! total bonus is exactly `discount * (number of n-gram occurrences in it)`.

use std::collections::HashMap;

use indexmap::IndexSet;
use thiserror::Error;

use crate::lattice::{LatticeArc, LatticeError, StateId, WordLattice};

/// Error raised while assembling phrase sets.
#[derive(Debug, Error)]
pub enum BiasingError {
    #[error("empty phrase in input")]
    EmptyPhrase,
    #[error("empty token in phrase")]
    EmptyToken,
    #[error("invalid n-gram order range: min_order {min} must be >= 1 and <= max_order {max:?}")]
    InvalidOrderRange { min: usize, max: MaxOrder },
}

/// Upper bound on collected n-gram length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxOrder {
    /// No bound: up to each phrase's full length.
    #[default]
    All,
    Limit(usize),
}

impl std::fmt::Display for MaxOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxOrder::All => f.write_str("all"),
            MaxOrder::Limit(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for MaxOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(MaxOrder::All);
        }
        s.parse::<usize>()
            .map(MaxOrder::Limit)
            .map_err(|_| format!("expected a positive integer or \"all\", got {s:?}"))
    }
}

/// Deduplicated set of token sequences to boost, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseSet {
    phrases: IndexSet<Vec<String>>,
}

impl PhraseSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a phrase; returns `false` if it was already present.
    pub fn insert(&mut self, phrase: Vec<String>) -> Result<bool, BiasingError> {
        if phrase.is_empty() {
            return Err(BiasingError::EmptyPhrase);
        }
        if phrase.iter().any(String::is_empty) {
            return Err(BiasingError::EmptyToken);
        }
        Ok(self.phrases.insert(phrase))
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &[String]) -> bool {
        self.phrases.contains(phrase)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[String]> {
        self.phrases.iter().map(Vec::as_slice)
    }

    /// Total token count over all phrases; bounds the matcher state count.
    pub fn total_tokens(&self) -> usize {
        self.phrases.iter().map(Vec::len).sum()
    }
}

/// Collects every contiguous sub-sequence with length in
/// `[min_order, max_order]` from each phrase, deduplicated across phrases.
pub fn collect_ngrams<'a, I>(
    phrases: I,
    min_order: usize,
    max_order: MaxOrder,
) -> Result<PhraseSet, BiasingError>
where
    I: IntoIterator<Item = &'a [String]>,
{
    if min_order < 1 {
        return Err(BiasingError::InvalidOrderRange {
            min: min_order,
            max: max_order,
        });
    }
    if let MaxOrder::Limit(max) = max_order {
        if max < min_order {
            return Err(BiasingError::InvalidOrderRange {
                min: min_order,
                max: max_order,
            });
        }
    }
    let mut set = PhraseSet::new();
    for phrase in phrases {
        if phrase.is_empty() {
            return Err(BiasingError::EmptyPhrase);
        }
        let longest = match max_order {
            MaxOrder::All => phrase.len(),
            MaxOrder::Limit(max) => max.min(phrase.len()),
        };
        for order in min_order..=longest {
            for window in phrase.windows(order) {
                set.insert(window.to_vec())?;
            }
        }
    }
    Ok(set)
}

/// Weighted multi-pattern matcher over word tokens.
///
/// States form the trie of the tracked phrases; state 0 is the root. Failure
/// links point to the longest proper suffix state, and `out_count(q)` is the
/// number of tracked phrases that are suffixes of the string spelled by `q`.
#[derive(Debug, Clone)]
pub struct BiasingAutomaton {
    discount: f64,
    goto: Vec<HashMap<String, StateId>>,
    fail: Vec<StateId>,
    out_count: Vec<u32>,
}

impl BiasingAutomaton {
    /// Compiles a phrase set with the classic goto/failure construction.
    ///
    /// `discount` is the graph-cost bonus granted per matched occurrence.
    pub fn build(phrases: &PhraseSet, discount: f64) -> Self {
        let mut goto: Vec<HashMap<String, StateId>> = vec![HashMap::new()];
        let mut out_base: Vec<u32> = vec![0];

        for phrase in phrases.iter() {
            let mut state: StateId = 0;
            for token in phrase {
                state = match goto[state as usize].get(token) {
                    Some(&next) => next,
                    None => {
                        let next = goto.len() as StateId;
                        goto[state as usize].insert(token.clone(), next);
                        goto.push(HashMap::new());
                        out_base.push(0);
                        next
                    }
                };
            }
            out_base[state as usize] += 1;
        }

        // Failure links and suffix-count propagation, level by level.
        let mut fail: Vec<StateId> = vec![0; goto.len()];
        let mut out_count = out_base;
        let mut queue: std::collections::VecDeque<StateId> = std::collections::VecDeque::new();
        for &child in goto[0].values() {
            queue.push_back(child);
        }
        while let Some(state) = queue.pop_front() {
            for (token, &child) in &goto[state as usize] {
                let mut f = fail[state as usize];
                loop {
                    if let Some(&next) = goto[f as usize].get(token) {
                        if next != child {
                            fail[child as usize] = next;
                        }
                        break;
                    }
                    if f == 0 {
                        break;
                    }
                    f = fail[f as usize];
                }
                queue.push_back(child);
            }
            out_count[state as usize] += out_count[fail[state as usize] as usize];
        }

        BiasingAutomaton {
            discount,
            goto,
            fail,
            out_count,
        }
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn num_states(&self) -> usize {
        self.goto.len()
    }

    /// Number of tracked phrases that end exactly at `state`, counting
    /// suffix matches through failure links.
    pub fn out_count(&self, state: StateId) -> u32 {
        self.out_count[state as usize]
    }

    /// Longest-proper-suffix link; the root points at itself.
    pub fn fail_state(&self, state: StateId) -> StateId {
        self.fail[state as usize]
    }

    /// Total transition function: trie edge if present, otherwise the first
    /// edge found along failure links, otherwise the root.
    pub fn step(&self, mut state: StateId, token: &str) -> StateId {
        loop {
            if let Some(&next) = self.goto[state as usize].get(token) {
                return next;
            }
            if state == 0 {
                return 0;
            }
            state = self.fail[state as usize];
        }
    }

    /// Counts tracked-phrase occurrences in `words` and the resulting bonus.
    ///
    /// `occ` is the number of (phrase, end position) pairs such that the
    /// phrase occurs in `words` ending at that position; the bonus is
    /// `-discount * occ`.
    pub fn score_sequence<S: AsRef<str>>(&self, words: &[S]) -> (u64, f64) {
        let mut state: StateId = 0;
        let mut occ: u64 = 0;
        for word in words {
            state = self.step(state, word.as_ref());
            occ += u64::from(self.out_count[state as usize]);
        }
        let bonus = -self.discount * occ as f64;
        // normalize -0.0 at zero discount or zero occurrences
        (occ, if bonus == 0.0 { 0.0 } else { bonus })
    }

    /// Composes a lattice with the matcher and applies the per-occurrence
    /// discount to graph costs.
    ///
    /// States of the result are reachable `(lattice state, matcher state)`
    /// pairs; an arc consuming `w` from pair `(s, q)` goes to
    /// `(t, step(q, w))` with its graph cost reduced by
    /// `discount * out_count(step(q, w))`. Final weights are inherited from
    /// the lattice at every matcher state, and the result is trimmed. The
    /// multiset of (word sequence, acoustic cost) over complete paths is
    /// preserved; each path's graph cost drops by `discount * occ(words)`.
    pub fn rescore(&self, lattice: &WordLattice) -> Result<WordLattice, LatticeError> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); lattice.num_states() as usize];
        for (i, arc) in lattice.arcs().iter().enumerate() {
            adj[arc.src as usize].push(i);
        }

        let mut pair_ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs: Vec<(StateId, StateId)> = vec![(0, 0)];
        pair_ids.insert((0, 0), 0);
        let mut arcs: Vec<LatticeArc> = Vec::new();

        // Pairs are discovered breadth-first in lattice arc order, so the
        // output numbering is deterministic.
        let mut cursor = 0;
        while cursor < pairs.len() {
            let (ls, qs) = pairs[cursor];
            let src_pair = cursor as StateId;
            cursor += 1;
            for &i in &adj[ls as usize] {
                let arc = &lattice.arcs()[i];
                let q_next = self.step(qs, &arc.word);
                let dst_pair = *pair_ids.entry((arc.dst, q_next)).or_insert_with(|| {
                    pairs.push((arc.dst, q_next));
                    (pairs.len() - 1) as StateId
                });
                arcs.push(LatticeArc {
                    src: src_pair,
                    dst: dst_pair,
                    word: arc.word.clone(),
                    graph_cost: arc.graph_cost
                        - self.discount * f64::from(self.out_count[q_next as usize]),
                    acoustic_cost: arc.acoustic_cost,
                });
            }
        }

        let finals = pairs
            .iter()
            .enumerate()
            .filter_map(|(id, &(ls, _))| lattice.finals().get(&ls).map(|&w| (id as StateId, w)));
        WordLattice::build(lattice.utt_id(), arcs, finals)?.trim()
    }

    /// Debug dump: goto arcs as `src dst token weight` (the weight the arc
    /// contributes during rescoring) followed by `FAIL src dst` lines.
    /// Format is for inspection only, not a stability contract.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut arcs: Vec<(StateId, StateId, &str)> = Vec::new();
        for (src, edges) in self.goto.iter().enumerate() {
            for (token, &dst) in edges {
                arcs.push((src as StateId, dst, token));
            }
        }
        arcs.sort_by(|a, b| (a.0, a.2).cmp(&(b.0, b.2)));
        let mut out = String::new();
        for (src, dst, token) in arcs {
            let weight = -self.discount * f64::from(self.out_count[dst as usize]);
            let _ = writeln!(out, "{src} {dst} {token} {weight}");
        }
        for (src, &dst) in self.fail.iter().enumerate().skip(1) {
            let _ = writeln!(out, "FAIL {src} {dst}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(phrases: &[&str]) -> PhraseSet {
        let mut s = PhraseSet::new();
        for p in phrases {
            s.insert(p.split_whitespace().map(str::to_owned).collect())
                .unwrap();
        }
        s
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    /// Scans for every (phrase, end position) occurrence the slow way.
    fn naive_occurrences(phrases: &PhraseSet, words: &[String]) -> u64 {
        let mut occ = 0;
        for phrase in phrases.iter() {
            if phrase.len() > words.len() {
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

    #[test]
    fn collect_all_orders() {
        let got =
            collect_ngrams([toks("a b")].iter().map(Vec::as_slice), 1, MaxOrder::All).unwrap();
        let want = set(&["a", "b", "a b"]);
        assert_eq!(got, want);
    }

    #[test]
    fn collect_bigrams_only() {
        let got = collect_ngrams(
            [toks("a b c")].iter().map(Vec::as_slice),
            2,
            MaxOrder::Limit(2),
        )
        .unwrap();
        assert_eq!(got, set(&["a b", "b c"]));
    }

    #[test]
    fn collect_deduplicates_across_phrases() {
        let phrases = [toks("a b"), toks("a c")];
        let got = collect_ngrams(phrases.iter().map(Vec::as_slice), 1, MaxOrder::Limit(1)).unwrap();
        assert_eq!(got, set(&["a", "b", "c"]));
    }

    #[test]
    fn collect_rejects_bad_input() {
        assert!(matches!(
            collect_ngrams([Vec::new()].iter().map(Vec::as_slice), 1, MaxOrder::All),
            Err(BiasingError::EmptyPhrase)
        ));
        assert!(matches!(
            collect_ngrams([toks("a")].iter().map(Vec::as_slice), 0, MaxOrder::All),
            Err(BiasingError::InvalidOrderRange { .. })
        ));
        assert!(matches!(
            collect_ngrams([toks("a")].iter().map(Vec::as_slice), 3, MaxOrder::Limit(2)),
            Err(BiasingError::InvalidOrderRange { .. })
        ));
    }

    #[test]
    fn max_order_parses() {
        assert_eq!("all".parse::<MaxOrder>().unwrap(), MaxOrder::All);
        assert_eq!("ALL".parse::<MaxOrder>().unwrap(), MaxOrder::All);
        assert_eq!("3".parse::<MaxOrder>().unwrap(), MaxOrder::Limit(3));
        assert!("x".parse::<MaxOrder>().is_err());
    }

    #[test]
    fn empty_set_builds_root_only() {
        let a = BiasingAutomaton::build(&PhraseSet::new(), 2.0);
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.step(0, "anything"), 0);
        let (occ, bonus) = a.score_sequence(&toks("a b c"));
        assert_eq!(occ, 0);
        assert_eq!(bonus, 0.0);
    }

    #[test]
    fn shared_prefix_counts() {
        // "a" and "a b": 3 states, and the deeper state also matches "a b".
        let a = BiasingAutomaton::build(&set(&["a", "a b"]), 1.0);
        assert_eq!(a.num_states(), 3);
        let s_a = a.step(0, "a");
        let s_ab = a.step(s_a, "b");
        assert_eq!(a.out_count(s_a), 1);
        assert_eq!(a.out_count(s_ab), 1);
    }

    #[test]
    fn suffix_match_counts_through_failure() {
        // Reading "a b" must fire both "a b" and the suffix "b" at the same position.
        let a = BiasingAutomaton::build(&set(&["a b", "b"]), 1.0);
        let s_a = a.step(0, "a");
        let s_ab = a.step(s_a, "b");
        assert_eq!(a.out_count(s_ab), 2);
        let (occ, _) = a.score_sequence(&toks("a b"));
        assert_eq!(occ, 2);
    }

    #[test]
    fn score_callsign_example() {
        let a = BiasingAutomaton::build(&set(&["ryanair", "one", "ryanair one"]), 2.0);
        let (occ, bonus) = a.score_sequence(&toks("ryanair one"));
        assert_eq!(occ, 3);
        assert_eq!(bonus, -6.0);
    }

    #[test]
    fn score_empty_sequence() {
        let a = BiasingAutomaton::build(&set(&["x"]), 2.0);
        let (occ, bonus) = a.score_sequence::<String>(&[]);
        assert_eq!(occ, 0);
        assert_eq!(bonus, 0.0);
    }

    #[test]
    fn zero_discount_means_zero_bonus() {
        let a = BiasingAutomaton::build(&set(&["a"]), 0.0);
        let (occ, bonus) = a.score_sequence(&toks("a a a"));
        assert_eq!(occ, 3);
        assert_eq!(bonus, 0.0);
    }

    #[test]
    fn state_count_is_bounded() {
        let phrases = set(&["a b c", "a b d", "b c"]);
        let a = BiasingAutomaton::build(&phrases, 1.0);
        assert!(a.num_states() <= 1 + phrases.total_tokens());
    }

    #[test]
    fn failure_links_strictly_decrease_depth() {
        let a = BiasingAutomaton::build(&set(&["a b c", "b c d", "c", "a b"]), 1.0);
        // Recover trie depths from the goto arcs listed in the dump.
        let mut depth = vec![usize::MAX; a.num_states()];
        depth[0] = 0;
        let edges: Vec<(usize, usize)> = a
            .dump()
            .lines()
            .filter(|l| !l.starts_with("FAIL"))
            .map(|l| {
                let mut it = l.split_whitespace();
                let src = it.next().unwrap().parse().unwrap();
                let dst = it.next().unwrap().parse().unwrap();
                (src, dst)
            })
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for &(src, dst) in &edges {
                if depth[src] != usize::MAX && depth[dst] > depth[src] + 1 {
                    depth[dst] = depth[src] + 1;
                    changed = true;
                }
            }
        }
        assert_eq!(a.fail_state(0), 0);
        for state in 1..a.num_states() as StateId {
            let f = a.fail_state(state);
            assert!(
                depth[f as usize] < depth[state as usize],
                "fail({state}) = {f} does not decrease depth"
            );
        }
    }

    fn diamond() -> WordLattice {
        let arcs = vec![
            LatticeArc {
                src: 0,
                dst: 1,
                word: "alpha".into(),
                graph_cost: 1.0,
                acoustic_cost: 0.0,
            },
            LatticeArc {
                src: 0,
                dst: 1,
                word: "bravo".into(),
                graph_cost: 2.0,
                acoustic_cost: 0.0,
            },
            LatticeArc {
                src: 1,
                dst: 2,
                word: "out".into(),
                graph_cost: 0.0,
                acoustic_cost: 0.0,
            },
        ];
        WordLattice::build("diamond", arcs, [(2, (0.0, 0.0))]).unwrap()
    }

    #[test]
    fn rescore_with_empty_set_is_identity_on_costs() {
        let lat = diamond();
        let rescored = BiasingAutomaton::build(&PhraseSet::new(), 5.0)
            .rescore(&lat)
            .unwrap();
        let before = lat.enumerate_paths(1.0, 100).unwrap();
        let after = rescored.enumerate_paths(1.0, 100).unwrap();
        assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b.words, a.words);
            assert_eq!(b.graph_cost, a.graph_cost);
            assert_eq!(b.acoustic_cost, a.acoustic_cost);
        }
    }

    #[test]
    fn rescore_boosts_matching_branch() {
        let lat = diamond();
        let a = BiasingAutomaton::build(&set(&["bravo"]), 2.0);
        let rescored = a.rescore(&lat).unwrap();
        let mut paths = rescored.enumerate_paths(1.0, 100).unwrap();
        paths.sort_by(|x, y| x.words.cmp(&y.words));
        assert_eq!(paths[0].words, vec!["alpha", "out"]);
        assert_eq!(paths[0].graph_cost, 1.0);
        assert_eq!(paths[1].words, vec!["bravo", "out"]);
        assert_eq!(paths[1].graph_cost, 0.0);
        // The boosted branch now wins.
        assert_eq!(rescored.best_path(1.0).unwrap().words, vec!["bravo", "out"]);
    }

    #[test]
    fn rescore_at_zero_discount_preserves_arc_weights() {
        let lat = diamond();
        let a = BiasingAutomaton::build(&set(&["alpha", "out"]), 0.0);
        let rescored = a.rescore(&lat).unwrap();
        for arc in rescored.arcs() {
            assert!(lat.arcs().iter().any(|orig| {
                orig.word == arc.word
                    && orig.graph_cost == arc.graph_cost
                    && orig.acoustic_cost == arc.acoustic_cost
            }));
        }
    }

    #[test]
    fn dump_lists_goto_and_fail_lines() {
        let a = BiasingAutomaton::build(&set(&["a b", "b"]), 2.0);
        let dump = a.dump();
        assert!(dump
            .lines()
            .any(|l| l.starts_with("0 ") && l.contains(" a ")));
        assert!(dump.lines().filter(|l| l.starts_with("FAIL")).count() == a.num_states() - 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        const VOCAB: [&str; 4] = ["alpha", "bravo", "one", "two"];

        fn vocab_words(max_len: usize) -> impl Strategy<Value = Vec<String>> {
            prop::collection::vec(0usize..VOCAB.len(), 0..=max_len)
                .prop_map(|ids| ids.into_iter().map(|i| VOCAB[i].to_string()).collect())
        }

        fn phrase_set(max_phrases: usize) -> impl Strategy<Value = PhraseSet> {
            prop::collection::vec(
                prop::collection::vec(0usize..VOCAB.len(), 1..=3),
                0..=max_phrases,
            )
            .prop_map(|phrases| {
                let mut set = PhraseSet::new();
                for ids in phrases {
                    let phrase: Vec<String> =
                        ids.into_iter().map(|i| VOCAB[i].to_string()).collect();
                    let _ = set.insert(phrase);
                }
                set
            })
        }

        proptest! {
            #[test]
            fn matcher_agrees_with_naive_scan(
                set in phrase_set(6),
                words in vocab_words(24),
            ) {
                let a = BiasingAutomaton::build(&set, 2.0);
                let (occ, bonus) = a.score_sequence(&words);
                let want = naive_occurrences(&set, &words);
                prop_assert_eq!(occ, want);
                prop_assert_eq!(bonus, -2.0 * want as f64);
            }

            #[test]
            fn state_bound_holds(set in phrase_set(8)) {
                let a = BiasingAutomaton::build(&set, 1.0);
                prop_assert!(a.num_states() <= 1 + set.total_tokens());
            }

            #[test]
            fn rescore_matches_per_path_naive_deltas(
                lat in crate::lattice::tests_support::small_lattice(),
                set in phrase_set(6),
            ) {
                let discount = 3.0;
                let a = BiasingAutomaton::build(&set, discount);
                let rescored = a.rescore(&lat).unwrap();

                let key = |p: &crate::lattice::PathHypothesis| {
                    (p.words.clone(), p.acoustic_cost.to_bits())
                };
                let mut before = lat.enumerate_paths(1.0, 100_000).unwrap();
                let mut after = rescored.enumerate_paths(1.0, 100_000).unwrap();
                before.sort_by(|x, y| key(x).cmp(&key(y)).then(x.cmp_by_cost(y)));
                after.sort_by(|x, y| key(x).cmp(&key(y)).then(x.cmp_by_cost(y)));
                prop_assert_eq!(before.len(), after.len());
                for (b, a_path) in before.iter().zip(&after) {
                    prop_assert_eq!(&b.words, &a_path.words);
                    prop_assert_eq!(b.acoustic_cost, a_path.acoustic_cost);
                    let delta = discount * naive_occurrences(&set, &b.words) as f64;
                    prop_assert!((a_path.graph_cost - (b.graph_cost - delta)).abs() < 1e-9);
                }
            }
        }
    }
}
