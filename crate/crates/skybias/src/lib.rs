//! Contextual biasing and lattice rescoring for air-traffic-control speech.
//!
//! ATC voice transmissions open with a callsign, and surveillance feeds
//! (ADS-B / Mode S) tell us which aircraft were in the air near a recording.
//! This crate turns that side channel into recognition accuracy: it retrieves
//! candidate callsigns around an utterance, expands them into the word
//! sequences a speaker would actually say, compiles those into a weighted
//! multi-pattern matcher, and composes the matcher with the recognizer's word
//! lattices so that hypotheses containing a plausible callsign get cheaper.
//! A callsign-aware scoring module (WER and callsign WER) measures the effect.
//!
//! The pieces are usable on their own:
//!
//! - [`lattice`]: word lattice representation, text I/O, best-path and
//!   exhaustive path search.
//! - [`biasing`]: n-gram collection, the weighted matching automaton, and
//!   lattice rescoring by composition.
//! - [`callsign`]: ICAO callsign parsing and verbalization (telephony names,
//!   NATO alphabet, digit words).
//! - [`surveillance`]: a file-backed store of callsign sightings with
//!   time/area context queries.
//! - [`metrics`]: word alignment, WER, and callsign WER (CA-WER).
//! - [`pipeline`]: batch orchestration of the above, used by the `skybias`
//!   command-line tool.
//!
//! ```
//! use skybias::biasing::{collect_ngrams, BiasingAutomaton, MaxOrder};
//! use skybias::lattice::parse_lattices;
//!
//! let text = "UTT example\n0 1 ryanair 0.0 0.0\n1 2 one 1.5 0.0\n1 2 two 1.0 0.0\n2\n";
//! let mut lattices = parse_lattices(text.as_bytes())?;
//! let lattice = lattices.shift_remove("example").unwrap();
//!
//! // Without context the cheaper (wrong) arc wins.
//! assert_eq!(lattice.best_path(1.0)?.words, ["ryanair", "two"]);
//!
//! // Boosting the expected callsign flips the decision.
//! let phrases = vec![vec!["ryanair".to_string(), "one".to_string()]];
//! let ngrams = collect_ngrams(phrases.iter().map(|p| p.as_slice()), 1, MaxOrder::All)?;
//! let matcher = BiasingAutomaton::build(&ngrams, 2.0);
//! let rescored = matcher.rescore(&lattice)?;
//! assert_eq!(rescored.best_path(1.0)?.words, ["ryanair", "one"]);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod biasing;
pub mod callsign;
pub mod lattice;
pub mod metrics;
pub mod pipeline;
pub mod surveillance;

pub use biasing::{BiasingAutomaton, MaxOrder, PhraseSet};
pub use callsign::{AirlineTable, IcaoCallsign, VerbalizedPhrase};
pub use lattice::{PathHypothesis, WordLattice};
pub use metrics::{Alignment, ScoreReport};
pub use pipeline::PipelineConfig;
pub use surveillance::{ContextQuery, SurveillanceStore, UtteranceContext};
