//! Corpus-level statistics: row counts, unique queries/URLs/domains, and
//! the label distribution the labeller produces over the same rows.
//!
//! ```text
//! cargo run --example corpus_stats [-- /path/to/log.tsv]
//! ```

use std::env;
use std::io;

use orcas_intent::stats::CountingMode;
use orcas_intent::{corpus_stats, label_distribution, read_orcas_tsv, Labeler};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/data/sample.tsv", env!("CARGO_MANIFEST_DIR")));

    let labeler = Labeler::default_majority();
    let stats = corpus_stats(
        read_orcas_tsv(&path)?,
        &labeler.lexicons().tld_suffixes,
        CountingMode::Exact,
    )?;
    println!("corpus:");
    stats.write_human(io::stdout())?;

    let labels = read_orcas_tsv(&path)?
        .filter_map(Result::ok)
        .map(|record| labeler.label_record(record).final_label);
    let distribution = label_distribution(labels)?;
    println!("\nlabel distribution:");
    distribution.write_human(io::stdout())?;
    Ok(())
}
