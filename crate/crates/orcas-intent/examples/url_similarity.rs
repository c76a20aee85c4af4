//! Inspect the query↔domain similarity signal on a TSV of query/URL pairs.
//!
//! The navigational rule fires when the compacted query reads like the
//! clicked site's name. This example prints the exact ratio for every row
//! so you can see how close each pair sits to the decision threshold:
//!
//! ```text
//! cargo run --example url_similarity -- crates/orcas-intent/data/mini_gold.tsv
//! ```

use std::env;
use std::fs::File;
use std::io::{BufRead, BufReader};

use orcas_intent::rules::RuleParams;
use orcas_intent::url::{compact, navigational_similarity, parse_url};
use orcas_intent::LexiconSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/data/mini_gold.tsv", env!("CARGO_MANIFEST_DIR")));
    let lexicons = LexiconSet::bundled();
    let threshold = RuleParams::default().nav_threshold;

    println!(
        "{:>6}  {:<28} {:<24} {:>6}  fires",
        "ratio", "compacted query", "domain core", "thr"
    );
    let reader = BufReader::new(File::open(&path)?);
    for line in reader.lines() {
        let line = line?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 4 {
            continue;
        }
        let (query, url) = (cols[1], cols[3]);
        let parsed = match parse_url(url, &lexicons.tld_suffixes) {
            Ok(p) => p,
            Err(e) => {
                println!("     -  {e}");
                continue;
            }
        };
        let ratio = navigational_similarity(query, &parsed).unwrap_or(0.0);
        println!(
            "{:>6.3}  {:<28} {:<24} {:>6.2}  {}",
            ratio,
            compact(query),
            parsed.domain_core,
            threshold,
            if ratio >= threshold { "YES" } else { "no" }
        );
    }
    Ok(())
}
