//! Compile context phrases into a biasing automaton and rescore a lattice
//! where the expected callsign sits on the more expensive branch.
//!
//! ```bash
//! cargo run -p skybias --example bias_and_rescore
//! ```

use skybias::biasing::{collect_ngrams, BiasingAutomaton, MaxOrder};
use skybias::lattice::parse_lattices;

const LATTICE: &str = "\
UTT demo
0 1 ryanair 0.0 0.0
1 2 one 1.0 0.0
1 2 two 0.0 0.0
2 3 lima 0.0 0.0
3 4 descend 0.0 0.0
4
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lattices = parse_lattices(LATTICE.as_bytes())?;
    let lattice = &lattices["demo"];

    // Surveillance said RYR1L is overhead; the speaker says "ryanair one lima".
    let phrases = [vec![
        "ryanair".to_string(),
        "one".to_string(),
        "lima".to_string(),
    ]];
    let ngrams = collect_ngrams(phrases.iter().map(Vec::as_slice), 1, MaxOrder::All)?;
    println!("boosted n-grams ({}):", ngrams.len());
    for phrase in ngrams.iter() {
        println!("  {}", phrase.join(" "));
    }

    for discount in [0.0, 2.0] {
        let automaton = BiasingAutomaton::build(&ngrams, discount);
        let rescored = automaton.rescore(lattice)?;
        let best = rescored.best_path(1.0)?;
        let (occ, bonus) = automaton.score_sequence(&best.words);
        println!(
            "\ndiscount {discount}: best path {:?} (combined {:.2}, {occ} occurrences, bonus {bonus})",
            best.words.join(" "),
            best.combined_cost,
        );
    }

    let automaton = BiasingAutomaton::build(&ngrams, 2.0);
    println!("\nautomaton dump ({} states):", automaton.num_states());
    print!("{}", automaton.dump());
    Ok(())
}
