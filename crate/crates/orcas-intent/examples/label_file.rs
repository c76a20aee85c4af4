//! Stream a click-log TSV through the labeller and print the run summary.
//!
//! Reads the bundled 40-row sample by default; pass a path to label your
//! own log (columns: query id, query, doc id, url).
//!
//! ```text
//! cargo run --example label_file [-- /path/to/log.tsv]
//! ```

use std::env;
use std::io;

use orcas_intent::ingest::LabeledTsvWriter;
use orcas_intent::{read_orcas_tsv, Labeler, StreamOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/data/sample.tsv", env!("CARGO_MANIFEST_DIR")));

    let labeler = Labeler::default_majority();
    let source = read_orcas_tsv(&path)?;
    let mut sink = LabeledTsvWriter::new(io::BufWriter::new(io::stdout()), false);

    let summary = labeler.label_stream(source, &mut sink, &StreamOptions::default())?;
    sink.flush()?;

    eprintln!();
    summary.write_human(io::stderr())?;
    Ok(())
}
