//! Fit agreement weights from unlabelled data and compare weighted voting
//! against plain majority voting.
//!
//! Each rule's weight is how often its vote agrees with the majority of
//! its co-voters, so noisy rules are discounted without any gold labels.
//! On a corpus this small many rules never share a record, leaving them
//! at the neutral weight of 0.5 (zero log-odds), which is why several
//! records below fall through to level two or to abstain: fit weights on
//! tens of thousands of rows before trusting them.
//!
//! ```text
//! cargo run --example weighted_votes
//! ```

use orcas_intent::aggregate::fit_agreement_weights;
use orcas_intent::ingest::QueryRecord;
use orcas_intent::rules::{QueryContext, RuleParams, VoteVector};
use orcas_intent::taxonomy::Level;
use orcas_intent::url::parse_url;
use orcas_intent::{read_orcas_tsv, Labeler, LexiconSet, Registry, VoteCombiner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!("{}/data/sample.tsv", env!("CARGO_MANIFEST_DIR"));
    let records: Vec<QueryRecord> = read_orcas_tsv(&path)?.collect::<Result<_, _>>()?;

    // Collect every rule's votes on every record, both levels.
    let registry = Registry::default_set();
    let lexicons = LexiconSet::bundled();
    let params = RuleParams::default();
    let mut matrix: Vec<VoteVector> = Vec::new();
    for record in &records {
        let url = parse_url(&record.url, &lexicons.tld_suffixes).ok();
        let ctx = QueryContext::new(&record.query, url.as_ref());
        for level in [Level::One, Level::Two] {
            matrix.push(registry.apply_level(&record.query_id, &ctx, level, &lexicons, &params));
        }
    }

    // The bundled sample is tiny, so accept it instead of demanding the
    // usual thousand-record minimum.
    let weights = fit_agreement_weights(&matrix, 1)?;
    println!("fitted agreement weights:");
    for (id, w) in &weights {
        println!("  {id:<32} {w:.3}");
    }

    let majority = Labeler::default_majority();
    let weighted = Labeler::new(
        Registry::default_set(),
        LexiconSet::bundled(),
        RuleParams::default(),
        VoteCombiner::Weighted(weights),
        false,
    )?;

    println!("\nrecords where the two schemes disagree:");
    let mut disagreements = 0;
    for record in records {
        let a = majority.label_record(record.clone()).final_label;
        let b = weighted.label_record(record.clone()).final_label;
        if a != b {
            disagreements += 1;
            println!("  {:<34} majority={a}  weighted={b}", record.query);
        }
    }
    if disagreements == 0 {
        println!("  none: with near-uniform weights both schemes pick the same labels");
    }
    Ok(())
}
