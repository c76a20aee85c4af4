//! End-to-end checks, one test per numbered criterion. Each prints a
//! single `acceptance N (...): PASS/SKIP` line; run with `--nocapture`
//! to see them on success:
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```
//!
//! Two criteria depend on data that cannot ship with the repository and
//! degrade as documented:
//! * criterion 4 uses the hand-labelled gold file named by `ORCAS_GOLD_TSV`
//!   (five columns, label in the last) when present, and otherwise pins the
//!   bundled 100-row mini-gold set against its checked-in golden output;
//! * criterion 5 needs a large random click-log sample named by
//!   `ORCAS_SAMPLE_TSV` and skips cleanly without it.

use std::collections::BTreeMap;
use std::io;
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use orcas_intent::aggregate::{majority_vote, weighted_vote, TiePolicy};
use orcas_intent::ingest::{read_labeled_tsv, QueryRecord, RowError};
use orcas_intent::rules::VoteVector;
use orcas_intent::taxonomy::{Level, LevelVote};
use orcas_intent::url::{levenshtein_distance, levenshtein_ratio};
use orcas_intent::{
    evaluate, evaluate_top_level, read_gold_tsv, IntentLabel, Labeler, StreamOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock-sensitive tests take this lock so the default parallel test
/// runner cannot make them contend for cores.
static HEAVY: Mutex<()> = Mutex::new(());

fn heavy() -> std::sync::MutexGuard<'static, ()> {
    HEAVY
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn data_path(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

// ---------------------------------------------------------------- 1

/// Textbook full-matrix edit distance, kept deliberately independent of
/// the two-row implementation under test.
fn oracle_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in m[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            m[i][j] = (m[i - 1][j] + 1)
                .min(m[i][j - 1] + 1)
                .min(m[i - 1][j - 1] + sub);
        }
    }
    m[a.len()][b.len()]
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: [char; 20] = [
        'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'o', 'r', 's', 't', '0', '1', '.', '-', ' ', 'é',
        'ß', '中',
    ];
    let len = rng.gen_range(0..=30);
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())])
        .collect()
}

#[test]
fn criterion_1_levenshtein_matches_independent_oracle() {
    let _guard = heavy();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ed1_7a8c);
    for _ in 0..1_000 {
        let a = random_string(&mut rng);
        let b = random_string(&mut rng);
        let expected = oracle_levenshtein(&a, &b);
        let got = levenshtein_distance(&a, &b);
        assert_eq!(got, expected, "distance mismatch on {a:?} vs {b:?}");

        let total = a.chars().count() + b.chars().count();
        if total == 0 {
            assert!(levenshtein_ratio(&a, &b).is_err());
        } else {
            let want = (total - expected) as f64 / total as f64;
            let got = levenshtein_ratio(&a, &b).unwrap();
            assert!(
                (got - want).abs() <= 1e-12,
                "ratio mismatch on {a:?} vs {b:?}: {got} vs {want}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "oracle sweep took {elapsed:?}, budget 5s"
    );
    println!(
        "acceptance 1 (levenshtein oracle, 1000 pairs): PASS in {:.2}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------- 2

/// Deterministic synthetic click log cycling through all cascade paths.
fn synthetic_record(i: u64) -> QueryRecord {
    let (query, url) = match i % 10 {
        0 => (format!("portal{i}"), format!("https://portal{i}.com/")),
        1 => (
            format!("www site{i} login"),
            format!("https://site{i}.com/login"),
        ),
        2 => (
            format!("download tool {i}"),
            format!("https://example{i}.org/get"),
        ),
        3 => (
            format!("buy gadget {i}"),
            format!("https://shop{i}.example.com/"),
        ),
        4 => (
            format!("what is the population of region {i}"),
            format!("https://example{i}.org/wiki"),
        ),
        5 => (
            format!("typical salary of profession {i}"),
            format!("https://example{i}.org/facts"),
        ),
        6 => (
            format!("how to assemble widget model {i}"),
            format!("https://example{i}.org/guide"),
        ),
        7 => (
            format!("installing replacement part {i}"),
            format!("https://example{i}.org/howto"),
        ),
        8 => (
            format!("neighborhood gossip volume {i}"),
            format!("https://example{i}.org/misc"),
        ),
        _ => (
            format!("official website of club {i}"),
            format!("https://club{i}.example.org/"),
        ),
    };
    QueryRecord {
        query_id: format!("q{i}"),
        query,
        doc_id: format!("D{i}"),
        url,
    }
}

fn synthetic_source(n: u64) -> impl Iterator<Item = Result<QueryRecord, RowError>> {
    (0..n).map(|i| Ok(synthetic_record(i)))
}

#[test]
fn criterion_2_cascade_invariants_hold_on_synthetic_corpus() {
    let _guard = heavy();
    const N: u64 = 10_000;

    // One pass with votes kept: every record gets exactly one leaf label
    // and level-2 votes exist only where level 1 declined.
    let labeler = Labeler::default_majority().keep_votes(true);
    let mut labeled = Vec::new();
    labeler
        .label_stream(synthetic_source(N), &mut labeled, &StreamOptions::default())
        .expect("synthetic corpus labels cleanly");
    assert_eq!(labeled.len() as u64, N);
    for record in &labeled {
        assert!(
            IntentLabel::ALL.contains(&record.final_label),
            "leaf label expected, got {:?}",
            record.final_label
        );
        match record.level1 {
            LevelVote::Label(_) => assert!(
                record.votes_l2.is_none(),
                "level-2 votes recorded although level 1 decided ({})",
                record.record.query_id
            ),
            LevelVote::NoVote => assert!(
                record.votes_l2.is_some(),
                "level-2 votes missing on a level-1 fallthrough ({})",
                record.record.query_id
            ),
        }
    }

    // Multiset equality across worker counts.
    let mut baseline: Option<Vec<(String, IntentLabel)>> = None;
    for workers in [1, 4, 8] {
        let mut sink = Vec::new();
        let options = StreamOptions {
            workers,
            ..StreamOptions::default()
        };
        Labeler::default_majority()
            .label_stream(synthetic_source(N), &mut sink, &options)
            .expect("synthetic corpus labels cleanly");
        let mut labels: Vec<(String, IntentLabel)> = sink
            .into_iter()
            .map(|r| (r.record.query_id, r.final_label))
            .collect();
        labels.sort();
        match &baseline {
            None => baseline = Some(labels),
            Some(expected) => assert_eq!(
                expected, &labels,
                "label multiset changed between worker counts (workers={workers})"
            ),
        }
    }
    println!("acceptance 2 (cascade invariants, 10k rows, workers 1/4/8): PASS");
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_3_metrics_match_hand_computed_oracles() {
    use IntentLabel::{Abstain, Factual, Instrumental, Navigational as A, Transactional as B};
    let close = |got: f64, want: f64| (got - want).abs() <= 1e-9;

    // Matrix 1: the worked two-class example.
    let report = evaluate(&[A, B, B, B], &[A, A, B, B], &[A, B]).unwrap();
    assert!(close(report.accuracy, 0.75));
    let a = report.class_metrics(A).unwrap();
    assert!(close(a.precision, 1.0) && close(a.recall, 0.5) && close(a.f1, 2.0 / 3.0));
    let b = report.class_metrics(B).unwrap();
    assert!(close(b.precision, 2.0 / 3.0) && close(b.recall, 1.0) && close(b.f1, 0.8));

    // Matrix 2: perfect three-class agreement.
    let report = evaluate(&[A, B, Factual, A], &[A, B, Factual, A], &[A, B, Factual]).unwrap();
    assert!(close(report.accuracy, 1.0));
    assert!(close(report.macro_avg.f1, 1.0) && close(report.weighted_avg.f1, 1.0));

    // Matrix 3: everything wrong.
    let report = evaluate(&[B, A], &[A, B], &[A, B]).unwrap();
    assert!(close(report.accuracy, 0.0));
    for class in [A, B] {
        let m = report.class_metrics(class).unwrap();
        assert!(close(m.precision, 0.0) && close(m.recall, 0.0) && close(m.f1, 0.0));
    }

    // Matrix 4: three classes, uneven supports.
    // gold A A A B B C / pred A B A B C C:
    //   A: P 1, R 2/3, F1 4/5 · B: P 1/2, R 1/2, F1 1/2 · C: P 1/2, R 1, F1 2/3
    let report = evaluate(
        &[A, B, A, B, Factual, Factual],
        &[A, A, A, B, B, Factual],
        &[A, B, Factual],
    )
    .unwrap();
    assert!(close(report.accuracy, 4.0 / 6.0));
    let a = report.class_metrics(A).unwrap();
    assert!(close(a.precision, 1.0) && close(a.recall, 2.0 / 3.0) && close(a.f1, 0.8));
    let b = report.class_metrics(B).unwrap();
    assert!(close(b.precision, 0.5) && close(b.recall, 0.5) && close(b.f1, 0.5));
    let c = report.class_metrics(Factual).unwrap();
    assert!(close(c.precision, 0.5) && close(c.recall, 1.0) && close(c.f1, 2.0 / 3.0));
    assert!(close(report.macro_avg.precision, 2.0 / 3.0));
    assert!(close(report.macro_avg.recall, 13.0 / 18.0));
    assert!(close(report.macro_avg.f1, 59.0 / 90.0));
    assert!(close(report.weighted_avg.precision, 0.75));
    assert!(close(report.weighted_avg.recall, 2.0 / 3.0));
    assert!(close(report.weighted_avg.f1, 61.0 / 90.0));
    assert_eq!(
        report.confusion,
        vec![vec![2, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]
    );

    // Matrix 5: zero-division guards and classes seen only on one side.
    let report = evaluate(&[B, B], &[A, A], &[A, B]).unwrap();
    assert!(close(report.accuracy, 0.0));
    let a = report.class_metrics(A).unwrap();
    assert!(close(a.precision, 0.0) && close(a.recall, 0.0) && close(a.f1, 0.0));
    assert_eq!(a.support, 2);
    let b = report.class_metrics(B).unwrap();
    assert_eq!(b.support, 0);
    assert!(close(b.precision, 0.0) && close(b.recall, 0.0) && close(b.f1, 0.0));
    let report = evaluate(&[Instrumental], &[Abstain], &[Abstain]).unwrap();
    assert_eq!(report.classes, vec![Abstain, Instrumental]);

    // Kappa hand cases.
    use orcas_intent::cohen_kappa;
    let zero = cohen_kappa(&[A, B, A, B], &[A, A, B, B]).unwrap();
    assert!(
        close(zero, 0.0),
        "independent raters should give kappa 0, got {zero}"
    );
    let half = cohen_kappa(&[A, A, A, B], &[A, A, B, B]).unwrap();
    assert!(
        close(half, 0.5),
        "hand case should give kappa 0.5, got {half}"
    );
    println!("acceptance 3 (metric oracle, 5 matrices + kappa): PASS");
}

// ---------------------------------------------------------------- 4

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orcas-intent"))
}

#[test]
fn criterion_4_gold_accuracy_or_golden_file() {
    if let Ok(path) = std::env::var("ORCAS_GOLD_TSV") {
        let gold = read_gold_tsv(&path).expect("readable gold file");
        let labeler = Labeler::default_majority();
        let predicted: Vec<IntentLabel> = gold
            .iter()
            .map(|g| labeler.label_record(g.record.clone()).final_label)
            .collect();
        let expected: Vec<IntentLabel> = gold.iter().map(|g| g.gold_label).collect();
        let full = evaluate(&predicted, &expected, &IntentLabel::ALL).unwrap();
        let top = evaluate_top_level(&predicted, &expected).unwrap();
        let mut table = Vec::new();
        full.write_table(&mut table).unwrap();
        assert!(
            (top.accuracy - 0.902).abs() <= 0.05,
            "top-level accuracy {:.3} outside 0.902±0.05; per-class report for triage:\n{}",
            top.accuracy,
            String::from_utf8_lossy(&table)
        );
        assert!(
            (full.accuracy - 0.783).abs() <= 0.05,
            "full accuracy {:.3} outside 0.783±0.05; per-class report for triage:\n{}",
            full.accuracy,
            String::from_utf8_lossy(&table)
        );
        println!(
            "acceptance 4 (gold reproduction, {} rows): PASS top {:.3} full {:.3}",
            gold.len(),
            top.accuracy,
            full.accuracy
        );
        return;
    }

    // Golden-file fallback: labelling the bundled mini-gold must reproduce
    // the checked-in output byte for byte.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mini_4col.tsv");
    let gold_text = std::fs::read_to_string(data_path("mini_gold.tsv")).unwrap();
    let four_col: String = gold_text
        .lines()
        .map(|l| {
            let (rest, _label) = l.rsplit_once('\t').expect("five columns");
            format!("{rest}\n")
        })
        .collect();
    std::fs::write(&input, four_col).unwrap();

    let out = dir.path().join("labeled.tsv");
    let status = cli()
        .args(["label", "-i"])
        .arg(&input)
        .arg("-o")
        .arg(&out)
        .status()
        .expect("label run");
    assert!(status.success(), "label exited with {status}");
    let got = std::fs::read_to_string(&out).unwrap();
    let want = std::fs::read_to_string(data_path("mini_gold_expected.tsv")).unwrap();
    for (line_no, (got_line, want_line)) in got.lines().zip(want.lines()).enumerate() {
        assert_eq!(
            got_line,
            want_line,
            "golden mismatch on line {}",
            line_no + 1
        );
    }
    assert_eq!(got.lines().count(), want.lines().count());
    println!("acceptance 4 (mini-gold golden file, 100 rows): PASS (set ORCAS_GOLD_TSV for the full check)");
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_5_corpus_distribution_when_sample_available() {
    let Ok(path) = std::env::var("ORCAS_SAMPLE_TSV") else {
        println!(
            "acceptance 5 (corpus distribution): SKIP — set ORCAS_SAMPLE_TSV to a ≥100k-row sample"
        );
        return;
    };
    let _guard = heavy();
    let source = orcas_intent::read_orcas_tsv(&path).expect("readable sample");
    let mut sink = orcas_intent::ingest::LabeledTsvWriter::new(io::sink(), false);
    let summary = Labeler::default_majority()
        .label_stream(
            source,
            &mut sink,
            &StreamOptions {
                workers: 4,
                ..Default::default()
            },
        )
        .expect("sample labels cleanly");
    let total = summary.total() as f64;
    assert!(
        total >= 100_000.0,
        "sample has only {total} rows; need at least 100k for a stable distribution"
    );
    let frac = |l: IntentLabel| summary.count(l) as f64 / total;
    let nav = frac(IntentLabel::Navigational);
    let trans = frac(IntentLabel::Transactional);
    let info =
        frac(IntentLabel::Factual) + frac(IntentLabel::Instrumental) + frac(IntentLabel::Abstain);
    assert!(
        (nav - 0.145).abs() <= 0.03,
        "navigational fraction {nav:.3} outside 0.145±0.03"
    );
    assert!(
        (trans - 0.042).abs() <= 0.02,
        "transactional fraction {trans:.3} outside 0.042±0.02"
    );
    assert!(
        (info - 0.813).abs() <= 0.04,
        "informational fraction {info:.3} outside 0.813±0.04"
    );
    println!(
        "acceptance 5 (corpus distribution, {} rows): PASS nav {nav:.3} trans {trans:.3} info {info:.3}",
        total as u64
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_muting_url_rules_strictly_drops_navigational_recall() {
    let gold = read_gold_tsv(&data_path("mini_gold.tsv")).expect("bundled gold");
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mini_4col.tsv");
    let gold_text = std::fs::read_to_string(data_path("mini_gold.tsv")).unwrap();
    let four_col: String = gold_text
        .lines()
        .map(|l| format!("{}\n", l.rsplit_once('\t').unwrap().0))
        .collect();
    std::fs::write(&input, four_col).unwrap();

    let mut recalls = Vec::new();
    for mute in [false, true] {
        let out = dir.path().join(if mute { "muted.tsv" } else { "full.tsv" });
        let mut cmd = cli();
        cmd.args(["label", "-i"]).arg(&input).arg("-o").arg(&out);
        if mute {
            cmd.arg("--mute-url-lfs");
        }
        let status = cmd.status().expect("label run");
        assert!(status.success());

        let rows = read_labeled_tsv(out.to_str().unwrap()).unwrap();
        assert_eq!(rows.len(), gold.len());
        let predicted: Vec<IntentLabel> = rows.iter().map(|r| r.final_label).collect();
        let expected: Vec<IntentLabel> = gold.iter().map(|g| g.gold_label).collect();
        let report = evaluate(&predicted, &expected, &IntentLabel::ALL).unwrap();
        recalls.push(
            report
                .class_metrics(IntentLabel::Navigational)
                .unwrap()
                .recall,
        );
    }
    assert!(
        recalls[1] < recalls[0],
        "muting URL rules should strictly drop navigational recall, got {:.3} -> {:.3}",
        recalls[0],
        recalls[1]
    );
    println!(
        "acceptance 6 (url ablation): PASS nav recall {:.3} -> {:.3}",
        recalls[0], recalls[1]
    );
}

// ---------------------------------------------------------------- 7

#[cfg(target_os = "linux")]
fn peak_resident_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[test]
fn criterion_7_two_million_rows_within_time_and_memory_budget() {
    let _guard = heavy();
    const N: u64 = 2_000_000;
    let start = Instant::now();
    let mut sink = orcas_intent::ingest::LabeledTsvWriter::new(io::sink(), false);
    let summary = Labeler::default_majority()
        .label_stream(
            synthetic_source(N),
            &mut sink,
            &StreamOptions {
                workers: 1,
                ..Default::default()
            },
        )
        .expect("synthetic corpus labels cleanly");
    let elapsed = start.elapsed();
    assert_eq!(summary.total(), N);
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "2M rows took {elapsed:?}, budget is five minutes"
    );

    #[cfg(target_os = "linux")]
    if let Some(kb) = peak_resident_kb() {
        assert!(
            kb < 1_048_576,
            "peak resident memory {kb} kB exceeds the 1 GB budget"
        );
        println!(
            "acceptance 7 (throughput): PASS 2M rows in {:.1}s ({:.0} rows/s), peak rss {} MB",
            elapsed.as_secs_f64(),
            N as f64 / elapsed.as_secs_f64(),
            kb / 1024
        );
        return;
    }
    println!(
        "acceptance 7 (throughput): PASS 2M rows in {:.1}s ({:.0} rows/s)",
        elapsed.as_secs_f64(),
        N as f64 / elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_uniform_weights_reduce_to_majority() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57_ab1e);
    const FN_IDS: [&str; 8] = ["r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7"];
    let uniform: BTreeMap<String, f64> = FN_IDS.iter().map(|id| (id.to_string(), 0.8)).collect();

    let mut decided = 0u32;
    for i in 0..10_000 {
        let votes: Vec<(&'static str, LevelVote)> = FN_IDS
            .iter()
            .map(|id| {
                let vote = if rng.gen_bool(0.55) {
                    LevelVote::Label(IntentLabel::ALL[rng.gen_range(0..IntentLabel::ALL.len())])
                } else {
                    LevelVote::NoVote
                };
                (*id, vote)
            })
            .collect();
        let vector = VoteVector {
            record_id: format!("r{i}"),
            level: Level::Two,
            votes,
        };
        let majority = majority_vote(&vector, TiePolicy::AbstainOnTie);
        let weighted = weighted_vote(&vector, &uniform).expect("all ids weighted");
        if let LevelVote::Label(label) = majority.label {
            decided += 1;
            assert_eq!(
                weighted.label,
                LevelVote::Label(label),
                "uniform weights disagreed with majority on vector {i}: {vector:?}"
            );
        }
    }
    assert!(
        decided > 2_000,
        "too few decided vectors ({decided}) for the check to be meaningful"
    );
    println!("acceptance 8 (uniform weights ≡ majority on {decided} decided vectors): PASS");
}
