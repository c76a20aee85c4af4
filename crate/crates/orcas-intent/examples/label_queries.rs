//! Label a few query/URL pairs in memory and show which rules voted.
//!
//! ```text
//! cargo run --example label_queries
//! ```

use orcas_intent::ingest::QueryRecord;
use orcas_intent::Labeler;

fn main() {
    let labeler = Labeler::default_majority().keep_votes(true);

    let pairs = [
        ("espn", "https://www.espn.com/"),
        ("watch free movies online", "https://www.putlocker9.com/"),
        (
            "how many ounces in a pound",
            "https://www.rapidtables.com/convert/weight/ounce-to-pound.html",
        ),
        ("how to tie a tie", "https://www.wikihow.com/Tie-a-Tie"),
        (
            "boston red sox schedule",
            "https://www.mlb.com/redsox/schedule",
        ),
    ];

    for (i, (query, url)) in pairs.iter().enumerate() {
        let record = QueryRecord {
            query_id: format!("q{i}"),
            query: query.to_string(),
            doc_id: format!("d{i}"),
            url: url.to_string(),
        };
        let labeled = labeler.label_record(record);
        println!(
            "{query:<28} -> {} (top level: {})",
            labeled.final_label, labeled.top_level
        );
        for votes in [&labeled.votes_l1, &labeled.votes_l2].into_iter().flatten() {
            for (rule, vote) in votes.fired() {
                println!("    {rule:<28} voted {vote}");
            }
        }
    }
}
