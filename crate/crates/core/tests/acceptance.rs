//! End-to-end acceptance checks. Each test prints one summary line (visible
//! under `--nocapture`): the fixture gauntlet, the script deobfuscation
//! oracle, generator/detector closure on a 1,600-page corpus, prevalence
//! arithmetic, and the cost-sensitive threshold sweep. Check 6 records what
//! a desk-scale run deliberately does not reproduce.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use linkveil::corpus::{generate_corpus, nb_filter, nb_train, CaseKind, Class, CorpusSpec};
use linkveil::detect::NoStylesheets;
use linkveil::report::{aggregate_prevalence, percentage_occurrence, ScanReport};
use linkveil::scan::scan_paths;
use linkveil::script::{collect_scripts, evaluate_decoder_idioms, fold_string_expressions};
use linkveil::{
    classify_page, parse_document, Confidence, DetectorConfig, Finding, Hyperlink, NodeId,
    PageResult, TechniqueLabel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn classify_fixture(name: &str) -> PageResult {
    let path = fixture_path(name);
    let bytes = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    classify_page(&bytes, name, None, &NoStylesheets, &DetectorConfig::default())
}

/// Every hand-written fixture page, the one anchor it hides, and the single
/// technique that anchor must carry. Fixtures transcribe real-world hiding
/// idioms: color match, near match, four tiny-size shapes, plain-text
/// disguise, fast marquee, three off-screen moves, stylesheet hiding, four
/// script obfuscation styles, and both layer burials.
const GAUNTLET: &[(&str, &str, TechniqueLabel)] = &[
    ("a-color-match.html", "target.html", TechniqueLabel::A),
    ("b-near-match.html", "target.html", TechniqueLabel::B),
    ("c-font0-anchor.html", "target.html", TechniqueLabel::C),
    ("c-font0-div.html", "target.html", TechniqueLabel::C),
    ("c-tiny-div.html", "target.html", TechniqueLabel::C),
    ("c-tiny-marquee.html", "target.html", TechniqueLabel::C),
    (
        "d-disguise.html",
        "http://www.seomarketleaders.com",
        TechniqueLabel::D,
    ),
    ("e-fast-marquee.html", "target.html", TechniqueLabel::E),
    ("f-offscreen-class.html", "target.html", TechniqueLabel::F),
    ("f-offscreen-inline.html", "target.html", TechniqueLabel::F),
    ("f-text-indent.html", "target.html", TechniqueLabel::F),
    ("g-visibility-class.html", "target.html", TechniqueLabel::G),
    ("h-docwrite.html", "target.html", TechniqueLabel::H),
    ("h-hex-array.html", "target.html", TechniqueLabel::H),
    ("h-concat.html", "target.html", TechniqueLabel::H),
    ("h-hextostring.html", "target.html", TechniqueLabel::H),
    ("l-zindex.html", "target.html", TechniqueLabel::L),
    ("l-overflow.html", "target.html", TechniqueLabel::L),
];

#[test]
fn check_1_listing_gauntlet() {
    let started = Instant::now();
    for &(file, planted, expected) in GAUNTLET {
        let r = classify_fixture(file);
        assert!(
            !r.findings.is_empty(),
            "{file}: planted anchor {planted} missed entirely"
        );
        for f in &r.findings {
            assert_eq!(
                f.link.href_raw, planted,
                "{file}: stray finding on {} ({})",
                f.link.href_raw, f.technique
            );
        }
        let labels: BTreeSet<TechniqueLabel> =
            r.findings.iter().map(|f| f.technique).collect();
        let want: BTreeSet<TechniqueLabel> = [expected].into_iter().collect();
        assert_eq!(labels, want, "{file}: wrong label set");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "gauntlet took {elapsed:?}, budget is 1s"
    );
    println!(
        "acceptance 1 (listing gauntlet): PASS — {} fixtures, each planted anchor \
         labeled exactly its technique, no stray findings, {}ms",
        GAUNTLET.len(),
        elapsed.as_millis()
    );
}

#[test]
fn check_2_deobfuscation_oracle() {
    // The escaped-array page: all five element strings must fold out.
    let doc = parse_document(&fs::read(fixture_path("h-hex-array.html")).unwrap(), None);
    let (programs, _) = collect_scripts(&doc);
    assert_eq!(programs.len(), 1);
    let folded = fold_string_expressions(&programs[0]);
    for (slot, want) in [
        ("_xa[0]", "display"),
        ("_xa[1]", "none"),
        ("_xa[2]", "ql1000"),
        ("_xa[3]", "style"),
        ("_xa[4]", "getElementById"),
    ] {
        assert_eq!(
            folded.get(slot).map(String::as_str),
            Some(want),
            "array slot {slot}"
        );
    }

    // The hex-decoder page: the eval payload must decode byte-for-byte.
    let doc = parse_document(&fs::read(fixture_path("h-hextostring.html")).unwrap(), None);
    let (programs, _) = collect_scripts(&doc);
    assert_eq!(programs.len(), 1);
    let (decoded, _) = evaluate_decoder_idioms(&programs[0]);
    assert_eq!(
        decoded,
        vec![r#"document.getElementById("ql1000").style.display = "none""#.to_string()]
    );

    println!(
        "acceptance 2 (deobfuscation oracle): PASS — escaped array folds to \
         display/none/ql1000/style/getElementById; eval payload decodes byte-exactly"
    );
}

#[test]
fn check_3_generator_closure() {
    let dir = std::env::temp_dir().join(format!("lv-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let spec = CorpusSpec::uniform(100, 400);
    let entries = generate_corpus(&spec, 42, &dir).unwrap();
    assert_eq!(entries.len(), 1600);

    // Three scans with different worker counts must agree byte-for-byte.
    let cfg = DetectorConfig::default();
    let runs: Vec<ScanReport> = [1usize, 4, 0]
        .iter()
        .map(|&w| scan_paths(std::slice::from_ref(&dir), &cfg, w).unwrap())
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    let serialized: Vec<String> = runs
        .iter()
        .map(|r| serde_json::to_string(r).unwrap())
        .collect();
    assert_eq!(serialized[0], serialized[1]);
    assert_eq!(serialized[1], serialized[2]);

    let report = &runs[0];
    assert_eq!(report.totals.pages_scanned, 1600);
    let by_name: BTreeMap<&str, &PageResult> = report
        .pages
        .iter()
        .map(|p| {
            let name = Path::new(&p.url_or_path).file_name().unwrap();
            (name.to_str().unwrap(), p)
        })
        .collect();

    let mut hits: BTreeMap<TechniqueLabel, usize> = BTreeMap::new();
    let mut control_findings = 0usize;
    let mut controls = 0usize;
    for entry in &entries {
        let page = by_name[entry.path.as_str()];
        match entry.technique {
            CaseKind::Control => {
                controls += 1;
                control_findings += page.findings.len();
            }
            CaseKind::Technique(t) => {
                for planted in &entry.planted {
                    let got: BTreeSet<TechniqueLabel> = page
                        .findings
                        .iter()
                        .filter(|f| f.link.href_raw == planted.href)
                        .map(|f| f.technique)
                        .collect();
                    let want: BTreeSet<TechniqueLabel> =
                        planted.expected.iter().copied().collect();
                    assert_eq!(got, want, "{}: planted {}", entry.path, planted.href);
                }
                *hits.entry(t).or_insert(0) += 1;
            }
        }
    }
    assert_eq!(controls, 400);
    assert_eq!(control_findings, 0, "false positives on control pages");
    for t in TechniqueLabel::ALL {
        assert_eq!(hits.get(&t), Some(&100), "recall shortfall for {t}");
    }

    let _ = fs::remove_dir_all(&dir);
    println!(
        "acceptance 3 (generator closure): PASS — 1,200 planted pages recalled \
         100/100 per technique, 0 findings on 400 controls, 3 scans (workers 1/4/auto) identical"
    );
}

// --- check 4: the survey-shaped synthetic report ---------------------------

fn finding(node: u32, technique: TechniqueLabel, href: &str, text: &str) -> Finding {
    Finding {
        link: Hyperlink {
            href_raw: href.to_string(),
            href_resolved: href.to_string(),
            anchor_text: text.to_string(),
            anchor_node: NodeId(node),
            title_attr: None,
            unresolved: false,
        },
        technique,
        evidence: vec![format!("evidence for {technique}")],
        confidence: Confidence::High,
    }
}

/// 278 flagged pages whose per-technique page and distinct-target counts
/// match the survey row shape used across the report tests: pages may carry
/// several techniques, and one technique's links may repeat across pages.
fn survey_shaped_pages() -> Vec<PageResult> {
    let counts: [(TechniqueLabel, usize, usize); 12] = [
        (TechniqueLabel::A, 6, 39),
        (TechniqueLabel::B, 3, 29),
        (TechniqueLabel::C, 8, 33),
        (TechniqueLabel::D, 19, 21),
        (TechniqueLabel::E, 8, 117),
        (TechniqueLabel::F, 68, 4333),
        (TechniqueLabel::G, 30, 1876),
        (TechniqueLabel::H, 111, 3210),
        (TechniqueLabel::I, 5, 122),
        (TechniqueLabel::J, 9, 31),
        (TechniqueLabel::K, 15, 6),
        (TechniqueLabel::L, 3, 47),
    ];
    let total_pages = 278;
    let mut findings: Vec<Vec<Finding>> = vec![Vec::new(); total_pages];
    let mut cursor = 0usize;
    let mut node = 1u32;
    for (technique, page_count, link_count) in counts {
        for i in 0..link_count.max(page_count) {
            let p = (cursor + i % page_count) % total_pages;
            findings[p].push(finding(
                node,
                technique,
                &format!("http://t{technique}-{}.example/", i % link_count),
                &format!("anchor {technique} {i}"),
            ));
            node += 1;
        }
        cursor += page_count;
    }
    findings
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let techniques_present = f.iter().map(|x| x.technique).collect();
            PageResult {
                url_or_path: format!("survey/page-{i:03}.html"),
                link_total: f.len() + 2,
                techniques_present,
                findings: f,
                notes: Vec::new(),
            }
        })
        .collect()
}

#[test]
fn check_4_table_arithmetic() {
    let report = ScanReport::new(survey_shaped_pages(), &DetectorConfig::default());
    let table = aggregate_prevalence(&report);

    let expected_rows: [(TechniqueLabel, &str, usize); 12] = [
        (TechniqueLabel::A, "6 (2.2%)", 39),
        (TechniqueLabel::B, "3 (1.1%)", 29),
        (TechniqueLabel::C, "8 (2.9%)", 33),
        (TechniqueLabel::D, "19 (6.8%)", 21),
        (TechniqueLabel::E, "8 (2.9%)", 117),
        (TechniqueLabel::F, "68 (24.5%)", 4333),
        (TechniqueLabel::G, "30 (10.8%)", 1876),
        (TechniqueLabel::H, "111 (39.9%)", 3210),
        (TechniqueLabel::I, "5 (1.8%)", 122),
        (TechniqueLabel::J, "9 (3.2%)", 31),
        (TechniqueLabel::K, "15 (5.4%)", 6),
        (TechniqueLabel::L, "3 (1.1%)", 47),
    ];
    assert_eq!(table.spam_pages, 278);
    for (row, (technique, cell, links)) in table.rows.iter().zip(expected_rows) {
        assert_eq!(row.technique, technique);
        assert_eq!(table.cell(row.pages), cell, "{technique} page cell");
        assert_eq!(row.hidden_links, links, "{technique} link count");
    }
    assert_eq!(table.aggregate_occurrences, 285);
    assert_eq!(table.cell(table.aggregate_occurrences), "285 (102.5%)");
    assert_eq!(table.aggregate_hidden_links, 9864);

    let gov = percentage_occurrence(994, 41_405).unwrap();
    assert_eq!(gov.percentage, "2.4");
    assert_eq!(gov.reciprocal, "1/42");
    let com = percentage_occurrence(81_765, 5_583_451 - 41_405).unwrap();
    assert_eq!(com.percentage, "1.48");
    assert_eq!(com.reciprocal, "1/68");

    println!(
        "acceptance 4 (table arithmetic): PASS — aggregate row \"285 (102.5%)\" with \
         9,864 distinct targets; occurrence lines 2.4% (1/42) and 1.48% (1/68)"
    );
}

/// 63 spam-leaning and 181 plain documents with overlapping vocabulary, so
/// posterior scores spread across (0, 1) instead of clumping at the ends.
fn cost_sweep_docs() -> Vec<(Vec<String>, Class)> {
    const SPAMMY: [&str; 8] = [
        "casino", "viagra", "loans", "winner", "jackpot", "pills", "betting", "prize",
    ];
    const PLAIN: [&str; 16] = [
        "weather", "library", "garden", "recipe", "cycling", "museum", "harbor", "lecture",
        "market", "violin", "bakery", "trail", "chess", "pottery", "estuary", "almanac",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut docs = Vec::new();
    for n in 0..244 {
        let spam = n < 63;
        let spam_share = if spam {
            rng.random_range(30..=90)
        } else {
            rng.random_range(0..=35)
        };
        let len = rng.random_range(20..=60);
        let tokens = (0..len)
            .map(|_| {
                if rng.random_range(0..100) < spam_share {
                    SPAMMY[rng.random_range(0..SPAMMY.len())].to_string()
                } else {
                    PLAIN[rng.random_range(0..PLAIN.len())].to_string()
                }
            })
            .collect();
        docs.push((tokens, if spam { Class::Spam } else { Class::Normal }));
    }
    docs
}

#[test]
fn check_5_cost_threshold_sweep() {
    let docs = cost_sweep_docs();
    assert_eq!(docs.iter().filter(|d| d.1 == Class::Spam).count(), 63);
    assert_eq!(docs.iter().filter(|d| d.1 == Class::Normal).count(), 181);
    let pages: Vec<Vec<String>> = docs.iter().map(|d| d.0.clone()).collect();

    let mut previous: Vec<usize> = Vec::new();
    let mut first_count = None;
    let mut last_count = 0;
    for cost_fn in 1..=100u32 {
        let model = nb_train(&docs, 1.0, f64::from(cost_fn), 1.0).unwrap();
        let want = 1.0 / (1.0 + f64::from(cost_fn));
        assert!(
            (model.threshold() - want).abs() <= 1e-12,
            "threshold at cost_fn={cost_fn}"
        );
        let flagged = nb_filter(&model, &pages);
        let prev_set: BTreeSet<usize> = previous.iter().copied().collect();
        let next_set: BTreeSet<usize> = flagged.iter().copied().collect();
        assert!(
            prev_set.is_subset(&next_set),
            "flagged set shrank at cost_fn={cost_fn}"
        );
        first_count.get_or_insert(flagged.len());
        last_count = flagged.len();
        previous = flagged;
    }
    let first_count = first_count.unwrap();
    assert!(
        first_count < last_count,
        "sweep never widened the flagged set ({first_count} → {last_count})"
    );

    println!(
        "acceptance 5 (cost threshold sweep): PASS — 244 docs (63 spam / 181 normal), \
         flagged set grew {first_count} → {last_count} as cost_fn swept 1→100, \
         threshold = cost_fp/(cost_fp+cost_fn) within 1e-12"
    );
}

#[test]
fn check_6_field_study_note() {
    println!(
        "acceptance 6 (field-scale study): N/A — a multi-million-page crawl, third-party \
         rank measurements, and a manually verified field sample are out of desk-scale \
         scope; checks 1–5 plus the per-module property suites stand in for them"
    );
}
