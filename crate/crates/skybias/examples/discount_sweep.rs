//! Sweep the discount over a small confusable corpus and watch CA-WER fall
//! once the boost outweighs each utterance's error margin.
//!
//! Every lattice holds the true callsign on a branch that is cheaper to get
//! wrong; the margin varies per utterance, so the sweep recovers utterances
//! gradually as the discount grows.
//!
//! ```bash
//! cargo run -p skybias --example discount_sweep
//! ```

use skybias::biasing::{collect_ngrams, BiasingAutomaton, MaxOrder};
use skybias::callsign::{parse_icao, verbalize, AirlineTable, VerbalizeOptions};
use skybias::lattice::{LatticeArc, WordLattice};
use skybias::metrics::{aggregate, score_utterance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (table, _) =
        AirlineTable::from_reader("DLH\tlufthansa\nRYR\tryanair\nBAW\tspeedbird\n".as_bytes())?;
    let options = VerbalizeOptions::default();
    let raws = ["DLH72", "RYR11", "BAW904", "DLH380", "RYR86", "BAW52"];
    let junk = ["too", "sefen", "tree"];

    // One utterance per callsign: `<callsign words> descend`, with the
    // second callsign word also offered as junk that is cheaper by a
    // per-utterance margin.
    let mut corpus = Vec::new();
    for (i, raw) in raws.iter().enumerate() {
        let callsign = parse_icao(raw)?;
        let words = verbalize(&callsign, &table, &options)[0].words().to_vec();
        let mut reference = words.clone();
        reference.push("descend".to_string());

        let margin = 2.0 + 2.5 * (i as f64); // flips between discount 1 and 6
        let mut arcs = Vec::new();
        for (j, word) in reference.iter().enumerate() {
            let cost = if j == 1 { margin } else { 0.0 };
            arcs.push(LatticeArc {
                src: j as u32,
                dst: j as u32 + 1,
                word: word.clone(),
                graph_cost: cost,
                acoustic_cost: 0.0,
            });
        }
        arcs.push(LatticeArc {
            src: 1,
            dst: 2,
            word: junk[i % junk.len()].to_string(),
            graph_cost: 0.0,
            acoustic_cost: 0.0,
        });
        let lattice = WordLattice::build(
            format!("utt{i}"),
            arcs,
            [(reference.len() as u32, (0.0, 0.0))],
        )?;

        let phrases = verbalize(&callsign, &table, &options);
        corpus.push((lattice, reference, words, phrases));
    }

    println!("discount\twer\tca_wer");
    for discount in [0.0, 1.0, 2.0, 4.0, 5.0, 6.0] {
        let mut reports = Vec::new();
        for (lattice, reference, callsign_words, phrases) in &corpus {
            let ngrams = collect_ngrams(phrases.iter().map(|p| p.words()), 1, MaxOrder::All)?;
            let automaton = BiasingAutomaton::build(&ngrams, discount);
            let hypothesis = automaton.rescore(lattice)?.best_path(1.0)?.words;
            reports.push(score_utterance(
                reference,
                &hypothesis,
                Some(callsign_words),
            )?);
        }
        let total = aggregate(reports.iter());
        println!(
            "{discount}\t{:.6}\t{:.6}",
            total.wer().unwrap(),
            total.ca_wer().unwrap()
        );
    }
    Ok(())
}
