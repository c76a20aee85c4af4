//! Chance-corrected agreement between two labellings of the same rows.
//!
//! Labels the gold set twice — once with the full rule set, once with the
//! similarity threshold raised — and reports raw agreement and Cohen's
//! kappa between the two runs, plus each run's kappa against the gold
//! labels.
//!
//! ```text
//! cargo run --example annotator_agreement
//! ```

use orcas_intent::rules::RuleParams;
use orcas_intent::{
    cohen_kappa, read_gold_tsv, IntentLabel, Labeler, LexiconSet, Registry, VoteCombiner,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!("{}/data/mini_gold.tsv", env!("CARGO_MANIFEST_DIR"));
    let gold = read_gold_tsv(&path)?;
    let gold_labels: Vec<IntentLabel> = gold.iter().map(|g| g.gold_label).collect();

    let relaxed = Labeler::default_majority();
    let strict = Labeler::new(
        Registry::default_set(),
        LexiconSet::bundled(),
        RuleParams {
            nav_threshold: 0.75,
        },
        VoteCombiner::Majority,
        false,
    )?;

    let label_all = |labeler: &Labeler| -> Vec<IntentLabel> {
        gold.iter()
            .map(|g| labeler.label_record(g.record.clone()).final_label)
            .collect()
    };
    let a = label_all(&relaxed);
    let b = label_all(&strict);

    let raw = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64;
    println!("threshold 0.55 vs threshold 0.75 on {} records", a.len());
    println!("  raw agreement  {raw:.3}");
    println!("  cohen's kappa  {:.3}", cohen_kappa(&a, &b)?);
    println!();
    println!("against the hand labels:");
    println!(
        "  threshold 0.55 kappa  {:.3}",
        cohen_kappa(&a, &gold_labels)?
    );
    println!(
        "  threshold 0.75 kappa  {:.3}",
        cohen_kappa(&b, &gold_labels)?
    );
    Ok(())
}
