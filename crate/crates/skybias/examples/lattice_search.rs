//! Parse a word lattice from text, list its hypotheses, and pick the best
//! path at different acoustic scales.
//!
//! ```bash
//! cargo run -p skybias --example lattice_search
//! ```

use skybias::lattice::parse_lattices;

const LATTICE: &str = "\
UTT demo
0 1 ryanair 0.0 0.4
1 2 one 1.5 0.2
1 2 triple 1.0 1.6
2 3 descend 0.0 0.1
3
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lattices = parse_lattices(LATTICE.as_bytes())?;
    let lattice = &lattices["demo"];
    println!(
        "lattice {:?}: {} states, {} arcs, {} final state(s)",
        lattice.utt_id(),
        lattice.num_states(),
        lattice.arcs().len(),
        lattice.finals().len()
    );

    println!("\nall complete paths (acoustic scale 1.0):");
    for path in lattice.enumerate_paths(1.0, 100)? {
        println!(
            "  {:<24} graph {:>5.2}  acoustic {:>5.2}  combined {:>5.2}",
            path.words.join(" "),
            path.graph_cost,
            path.acoustic_cost,
            path.combined_cost
        );
    }

    for scale in [0.0, 1.0] {
        let best = lattice.best_path(scale)?;
        println!(
            "\nbest path at acoustic scale {scale}: {:?} (combined {:.2})",
            best.words.join(" "),
            best.combined_cost
        );
    }
    Ok(())
}
