//! Query a surveillance dump for the callsigns near each utterance and emit
//! the per-utterance context records used by rescoring.
//!
//! ```bash
//! cargo run -p skybias --example context_from_surveillance
//! ```

use skybias::callsign::AirlineTable;
use skybias::surveillance::{
    build_utterance_contexts, load_utterance_meta, write_contexts, ContextOptions,
    SurveillanceStore,
};

const SIGHTINGS: &str = "\
callsign,time,lat,lon
DLH72W,995,50.08,14.26
RYR1LD,1005,50.11,14.31
BAW9X,1010,52.40,9.70
DLH72W,1055,50.09,14.27
";

const META: &str = "\
utt_id,time,lat,lon
prague_0001,1000,50.10,14.26
prague_0002,4000,50.10,14.26
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = SurveillanceStore::from_csv(SIGHTINGS.as_bytes())?;
    let meta = load_utterance_meta(META.as_bytes())?;
    let (table, _) = AirlineTable::from_reader("DLH\tlufthansa\nRYR\tryanair\n".as_bytes())?;

    let options = ContextOptions::default(); // +/- 60 s, 0.5 degree box
    let contexts = build_utterance_contexts(&store, &meta, &table, &options);

    for context in &contexts {
        println!(
            "{}: {} callsign(s), {} phrase(s){}",
            context.utt_id,
            context.callsigns.len(),
            context.phrases.len(),
            if context.is_empty() {
                "  [empty context]"
            } else {
                ""
            }
        );
    }

    println!("\nline-delimited JSON records:");
    let mut buf = Vec::new();
    write_contexts(&contexts, &mut buf)?;
    print!("{}", String::from_utf8(buf)?);
    Ok(())
}
