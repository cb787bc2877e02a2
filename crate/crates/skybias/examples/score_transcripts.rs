//! Score hypotheses against references with WER and callsign WER, showing
//! how CA-WER isolates errors inside the callsign span.
//!
//! ```bash
//! cargo run -p skybias --example score_transcripts
//! ```

use skybias::metrics::{aggregate, align, score_utterance};

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let utterances = [
        (
            "ryanair one lima delta descend flight level one zero zero",
            "ryanair one lima bravo descend flight level one zero zero",
            Some("ryanair one lima delta"),
        ),
        (
            "lufthansa seven two whiskey contact tower",
            "lufthansa seven two whiskey contact ground",
            Some("lufthansa seven two whiskey"),
        ),
        (
            "wind calm runway two four cleared to land",
            "wind calm runway two four cleared to land",
            None,
        ),
    ];

    let mut reports = Vec::new();
    for (reference, hypothesis, callsign) in &utterances {
        let reference = toks(reference);
        let hypothesis = toks(hypothesis);
        let callsign = callsign.map(toks);

        let alignment = align(&reference, &hypothesis);
        let edits: Vec<String> = alignment
            .columns
            .iter()
            .map(|c| format!("{:?}", c.op).chars().next().unwrap().to_string())
            .collect();
        println!("{}\n  edits: {}", reference.join(" "), edits.join(""));

        reports.push(score_utterance(
            &reference,
            &hypothesis,
            callsign.as_deref(),
        )?);
    }

    let total = aggregate(reports.iter());
    println!("\n{}", total.render_table());
    println!("JSON: {}", total.to_json());
    Ok(())
}
