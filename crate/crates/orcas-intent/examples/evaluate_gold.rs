//! Score the labeller against the bundled hand-labelled gold set.
//!
//! Labels the 100 gold query/URL pairs, then prints per-class precision,
//! recall and F1 for the five leaf labels and for the three-way top level.
//!
//! ```text
//! cargo run --example evaluate_gold
//! ```

use std::io;

use orcas_intent::{evaluate, evaluate_top_level, read_gold_tsv, IntentLabel, Labeler};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!("{}/data/mini_gold.tsv", env!("CARGO_MANIFEST_DIR"));
    let gold = read_gold_tsv(&path)?;

    let labeler = Labeler::default_majority();
    let predicted: Vec<IntentLabel> = gold
        .iter()
        .map(|g| labeler.label_record(g.record.clone()).final_label)
        .collect();
    let expected: Vec<IntentLabel> = gold.iter().map(|g| g.gold_label).collect();

    println!("full five-way labels:\n");
    let report = evaluate(&predicted, &expected, &IntentLabel::ALL)?;
    report.write_table(io::stdout())?;

    println!("\ntop level only:\n");
    let top = evaluate_top_level(&predicted, &expected)?;
    top.write_table(io::stdout())?;
    Ok(())
}
