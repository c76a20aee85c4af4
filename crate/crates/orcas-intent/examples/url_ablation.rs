//! What the URL buys you: label the gold set with and without the three
//! URL-dependent rules and compare navigational recall.
//!
//! The similarity rule is the main navigational detector, so removing it
//! costs recall; precision recovers because the similarity rule is also
//! the one that misfires on queries that merely contain a site's name.
//!
//! ```text
//! cargo run --example url_ablation
//! ```

use orcas_intent::rules::RuleParams;
use orcas_intent::{
    evaluate, read_gold_tsv, IntentLabel, Labeler, LexiconSet, Registry, VoteCombiner,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!("{}/data/mini_gold.tsv", env!("CARGO_MANIFEST_DIR"));
    let gold = read_gold_tsv(&path)?;
    let expected: Vec<IntentLabel> = gold.iter().map(|g| g.gold_label).collect();

    let mut muted_registry = Registry::default_set();
    muted_registry.mute_url_functions();
    let muted = Labeler::new(
        muted_registry,
        LexiconSet::bundled(),
        RuleParams::default(),
        VoteCombiner::Majority,
        false,
    )?;

    for (name, labeler) in [
        ("full rule set", Labeler::default_majority()),
        ("query-only rules", muted),
    ] {
        let predicted: Vec<IntentLabel> = gold
            .iter()
            .map(|g| labeler.label_record(g.record.clone()).final_label)
            .collect();
        let report = evaluate(&predicted, &expected, &IntentLabel::ALL)?;
        let nav = report
            .class_metrics(IntentLabel::Navigational)
            .expect("navigational is always reported");
        println!(
            "{name:<18} navigational precision {:.3}  recall {:.3}  f1 {:.3}",
            nav.precision, nav.recall, nav.f1
        );
    }
    Ok(())
}
