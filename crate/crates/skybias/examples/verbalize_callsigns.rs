//! Expand ICAO callsigns into the word sequences a speaker might say.
//!
//! ```bash
//! cargo run -p skybias --example verbalize_callsigns
//! ```

use skybias::callsign::{parse_icao, verbalize, AirlineTable, VerbalizeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tsv = "DLH\tlufthansa\nRYR\tryanair\nBAW\tspeedbird\nWZZ\twizz air\n";
    let (table, warnings) = AirlineTable::from_reader(tsv.as_bytes())?;
    assert!(warnings.is_empty());

    for raw in ["DLH72W", "RYR909", "N123AB", "XXX42"] {
        let callsign = parse_icao(raw)?;
        println!(
            "{} (designator {:?}, suffix {:?}):",
            callsign.raw(),
            callsign.designator(),
            callsign.suffix()
        );
        for options in [
            VerbalizeOptions { niner: false },
            VerbalizeOptions { niner: true },
        ] {
            let variants = verbalize(&callsign, &table, &options);
            println!("  niner={}:", options.niner);
            for phrase in variants {
                println!("    {phrase}");
            }
        }
    }
    Ok(())
}
