//! Page classification: which links are hidden, and by which techniques.
//!
//! The twelve technique labels A through L name the hiding families this
//! tool recognizes: color match (A) and near-match (B), tiny text or boxes
//! (C), plain-text disguise (D), high-speed marquees (E), offscreen
//! placement (F), display/visibility tricks (G), script-driven hiding (H),
//! cloaking or redirection (I), menu burial (J), title/meta stuffing (K),
//! and layer burial (L). Every finding carries evidence strings naming node
//! ids and decoded statements so a label can be audited without re-running
//! the scan.

mod rules;

pub use rules::{
    detect_color_hiding, detect_geometric_hiding, detect_menu_burial, detect_metadata_links,
    detect_script_hiding, detect_style_hiding, detect_text_disguise,
};

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::config::DetectorConfig;
use crate::dom::{extract_links, parse_document, Hyperlink, NodeId};
use crate::script::{collect_scripts, detect_redirection, extract_hide_effects};
use crate::style::{
    compute_style, hover_reveals, inline_rules, layout_boxes, parse_stylesheet, Origin,
};

/// One letter per hiding technique. The ordering is the report ordering.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum TechniqueLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
}

impl TechniqueLabel {
    pub const ALL: [TechniqueLabel; 12] = [
        TechniqueLabel::A,
        TechniqueLabel::B,
        TechniqueLabel::C,
        TechniqueLabel::D,
        TechniqueLabel::E,
        TechniqueLabel::F,
        TechniqueLabel::G,
        TechniqueLabel::H,
        TechniqueLabel::I,
        TechniqueLabel::J,
        TechniqueLabel::K,
        TechniqueLabel::L,
    ];

    pub fn letter(self) -> char {
        match self {
            TechniqueLabel::A => 'A',
            TechniqueLabel::B => 'B',
            TechniqueLabel::C => 'C',
            TechniqueLabel::D => 'D',
            TechniqueLabel::E => 'E',
            TechniqueLabel::F => 'F',
            TechniqueLabel::G => 'G',
            TechniqueLabel::H => 'H',
            TechniqueLabel::I => 'I',
            TechniqueLabel::J => 'J',
            TechniqueLabel::K => 'K',
            TechniqueLabel::L => 'L',
        }
    }

    /// Short human name for table output.
    pub fn name(self) -> &'static str {
        match self {
            TechniqueLabel::A => "color match",
            TechniqueLabel::B => "color near-match",
            TechniqueLabel::C => "tiny text or box",
            TechniqueLabel::D => "plain-text disguise",
            TechniqueLabel::E => "fast marquee",
            TechniqueLabel::F => "offscreen placement",
            TechniqueLabel::G => "display/visibility off",
            TechniqueLabel::H => "script hiding",
            TechniqueLabel::I => "cloaking or redirection",
            TechniqueLabel::J => "menu burial",
            TechniqueLabel::K => "title/meta stuffing",
            TechniqueLabel::L => "layer burial",
        }
    }
}

impl fmt::Display for TechniqueLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for TechniqueLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        TechniqueLabel::ALL
            .into_iter()
            .find(|t| t.letter().to_string() == s.to_ascii_uppercase())
            .ok_or_else(|| format!("unknown technique label {s:?} (expected A..L)"))
    }
}

/// High when the evidence is direct (computed style, decoded script, token
/// match); low when it leans on approximated layout or a background image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    Low,
}

/// One (link, technique) verdict with its audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub link: Hyperlink,
    pub technique: TechniqueLabel,
    pub evidence: Vec<String>,
    pub confidence: Confidence,
}

/// Everything the scanner records about one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageResult {
    pub url_or_path: String,
    pub findings: Vec<Finding>,
    /// Anchors with an href on the page, hidden or not.
    pub link_total: usize,
    pub techniques_present: BTreeSet<TechniqueLabel>,
    pub notes: Vec<String>,
}

/// Supplies the text of stylesheets referenced by `<link rel="stylesheet">`.
/// Unresolvable sheets are skipped with a note; nothing is fetched remotely.
pub trait StylesheetResolver {
    fn resolve(&self, href: &str) -> Option<String>;
}

/// Resolver for standalone documents: every external sheet is unavailable.
pub struct NoStylesheets;

impl StylesheetResolver for NoStylesheets {
    fn resolve(&self, _href: &str) -> Option<String> {
        None
    }
}

/// Runs every rule over one document and folds the results into a
/// deterministic `PageResult`. Pure: same bytes and config, same output.
pub fn classify_page(
    bytes: &[u8],
    url_or_path: &str,
    base: Option<&Url>,
    resolver: &dyn StylesheetResolver,
    cfg: &DetectorConfig,
) -> PageResult {
    let doc = parse_document(bytes, None);
    let mut notes: Vec<String> = doc.notes().to_vec();

    // Stylesheet rules in document order, then inline style attributes,
    // which outrank them in the cascade regardless of order.
    let mut rule_set = Vec::new();
    let mut order = 0u32;
    for (id, el) in doc.elements() {
        if el.tag == "style" {
            if let Some(text) = &el.raw_text {
                let parsed = parse_stylesheet(text, Origin::Stylesheet, order);
                order += parsed.len() as u32;
                rule_set.extend(parsed);
            }
        } else if el.tag == "link" {
            let is_sheet = el
                .attr("rel")
                .is_some_and(|r| r.trim().eq_ignore_ascii_case("stylesheet"));
            if !is_sheet {
                continue;
            }
            let Some(href) = el.attr("href") else { continue };
            match resolver.resolve(href) {
                Some(text) => {
                    let parsed = parse_stylesheet(&text, Origin::Stylesheet, order);
                    order += parsed.len() as u32;
                    rule_set.extend(parsed);
                }
                None => notes.push(format!("stylesheet not resolved (node {id}): {href}")),
            }
        }
    }
    rule_set.extend(inline_rules(&doc, 1_000_000));

    let styles = compute_style(&doc, &rule_set, false);
    let hovered = compute_style(&doc, &rule_set, true);
    let reveals = hover_reveals(&doc, &rule_set, &styles, &hovered);
    let boxes = layout_boxes(&doc, &styles, (cfg.viewport_w, cfg.viewport_h));
    notes.extend(styles.notes.iter().cloned());

    let (programs, script_notes) = collect_scripts(&doc);
    notes.extend(script_notes);
    let hide = extract_hide_effects(&doc, &programs);
    notes.extend(hide.notes.iter().cloned());
    let redirects = detect_redirection(&doc, &programs);

    let links = extract_links(&doc, base);
    let mut found = Vec::new();
    for link in &links {
        found.extend(detect_color_hiding(&doc, &styles, link, cfg));
        found.extend(detect_geometric_hiding(&doc, &styles, &boxes, link, cfg));
        found.extend(detect_style_hiding(&doc, &styles, link, cfg));
        found.extend(detect_text_disguise(&doc, &styles, link, cfg));
        found.extend(detect_menu_burial(&doc, &styles, &boxes, &reveals, link, cfg));
    }
    found.extend(detect_script_hiding(&doc, &links, &hide, &redirects, base));
    found.extend(detect_metadata_links(&doc, cfg));

    let findings = dedup_and_sort(found);
    let techniques_present = findings.iter().map(|f| f.technique).collect();
    PageResult {
        url_or_path: url_or_path.to_string(),
        findings,
        link_total: links.len(),
        techniques_present,
        notes,
    }
}

/// One finding per (anchor, technique, href), ordered by anchor node id then
/// technique letter. Merged duplicates keep every distinct evidence line and
/// the stronger confidence.
fn dedup_and_sort(found: Vec<Finding>) -> Vec<Finding> {
    let mut merged: BTreeMap<(NodeId, TechniqueLabel, String), Finding> = BTreeMap::new();
    for f in found {
        let key = (f.link.anchor_node, f.technique, f.link.href_raw.clone());
        match merged.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(f);
            }
            Entry::Occupied(mut slot) => {
                let kept = slot.get_mut();
                if f.confidence == Confidence::High {
                    kept.confidence = Confidence::High;
                }
                for line in f.evidence {
                    if !kept.evidence.contains(&line) {
                        kept.evidence.push(line);
                    }
                }
            }
        }
    }
    merged.into_values().collect()
}

/// Cloaking check over two snapshots of one URL. Links served to the crawler
/// but missing from the browser copy are hidden (technique I); links only in
/// the browser copy are ordinary dynamic content and report nothing.
pub fn compare_snapshots(
    spider_bytes: &[u8],
    browser_bytes: &[u8],
    base: Option<&Url>,
) -> Vec<Finding> {
    let spider = parse_document(spider_bytes, None);
    let browser = parse_document(browser_bytes, None);
    let shown: BTreeSet<String> = extract_links(&browser, base)
        .into_iter()
        .map(|l| l.href_resolved)
        .collect();
    let mut found = Vec::new();
    for link in extract_links(&spider, base) {
        if shown.contains(&link.href_resolved) {
            continue;
        }
        found.push(Finding {
            evidence: vec![format!(
                "cloaking-diff: {:?} served to the crawler only",
                link.href_resolved
            )],
            technique: TechniqueLabel::I,
            confidence: Confidence::High,
            link,
        });
    }
    dedup_and_sort(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn classify(html: &str) -> PageResult {
        classify_page(
            html.as_bytes(),
            "mem.html",
            None,
            &NoStylesheets,
            &DetectorConfig::default(),
        )
    }

    fn with_cfg(html: &str, cfg: &DetectorConfig) -> PageResult {
        classify_page(html.as_bytes(), "mem.html", None, &NoStylesheets, cfg)
    }

    fn letters(result: &PageResult) -> String {
        result
            .techniques_present
            .iter()
            .map(|t| t.letter())
            .collect()
    }

    #[test]
    fn white_on_white_is_a() {
        let page = r#"<span style="background:white;">
  <a href="target.html" style="color:white">anchor text</a>
</span>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "A");
        assert_eq!(r.findings.len(), 1);
        let f = &r.findings[0];
        assert_eq!(f.confidence, Confidence::High);
        assert!(f.evidence[0].contains("#ffffff equals effective background #ffffff"));
        assert_eq!(r.link_total, 1);
    }

    #[test]
    fn near_match_is_b_with_distance() {
        let page = r#"<div style="background-color:white;">
    <a href="target.html" style="color:#FEFFEE">
        anchor text with similar color with background
    </a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "B");
        assert!(r.findings[0].evidence[0].contains("distance 17.03"));
        assert_eq!(r.findings[0].confidence, Confidence::High);
    }

    #[test]
    fn background_image_drops_color_confidence() {
        let page = r#"<div style="background:url(tile.png) white;">
  <a href="x.html" style="color:white">pale</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "A");
        assert_eq!(r.findings[0].confidence, Confidence::Low);
        assert!(r.findings[0].evidence.iter().any(|e| e.contains("background image")));
    }

    #[test]
    fn dark_on_light_is_clean() {
        let r = classify(r#"<body><a href="x.html">plain blue link</a></body>"#);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
        assert_eq!(r.link_total, 1);
    }

    #[test]
    fn zero_font_anchor_is_c() {
        let r = classify(r#"<a href="target.html" style="font-size:0px">keyword</a>"#);
        assert_eq!(letters(&r), "C");
        assert_eq!(r.findings.len(), 1);
        // Zero type also collapses the box, so both C rules merge into one
        // finding that keeps the direct-style confidence.
        assert_eq!(r.findings[0].confidence, Confidence::High);
        assert!(r.findings[0].evidence[0].contains("font-size 0px"));
    }

    #[test]
    fn inherited_zero_font_is_c() {
        let page = r#"<div style="font-size:0px;">
    <a href="target.html" >invisible anchor text</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "C");
    }

    #[test]
    fn one_pixel_div_is_c() {
        let page = r#"<div style="width:1px;height:1px;">
    <a href="target.html">invisible anchor text</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "C");
        assert_eq!(r.findings[0].confidence, Confidence::Low);
        assert!(r.findings[0].evidence[0].contains("1x1px"));
    }

    #[test]
    fn tiny_slow_marquee_is_c_only() {
        let page = r#"<MARQUEE scrollAmount=1 width=1 height=1>
    <a href="target.html">keywords</a>
</MARQUEE>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "C");
    }

    #[test]
    fn seo_paragraph_disguise_is_d() {
        let page = r#"The <a href="http://www.seomarketleaders.com"
onMouseOver="window.status='';return true;"
style="cursor:text;color:black;text-decoration:none;">
SEO company</a> follows strict rules to insure the clients
website reach the top of search engines and stay there."#;
        let r = classify(page);
        assert_eq!(letters(&r), "D");
        let f = &r.findings[0];
        assert_eq!(f.confidence, Confidence::High);
        // Color gate plus all three disguise signals.
        assert_eq!(f.evidence.len(), 4);
        assert!(f.evidence[0].contains("distance 0.00"));
    }

    #[test]
    fn one_disguise_signal_is_not_d() {
        // Ordinary nav styling: same color, underline removed, nothing else.
        let r = classify(
            r#"<p style="color:#222">See <a href="x.html" style="color:#222;text-decoration:none">docs</a>.</p>"#,
        );
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn fast_marquee_is_e_only() {
        let page = r#"<marquee height=1 width=8 scrollamount=3000>
    <a href="target.html">keywords</a>
</marquee>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "E");
        assert_eq!(r.findings[0].confidence, Confidence::High);
        assert!(r.findings[0].evidence[0].contains("scrollamount 3000"));
    }

    #[test]
    fn default_marquee_speed_is_not_e() {
        let r = classify(r#"<marquee><a href="x.html">news ticker</a></marquee>"#);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn offscreen_class_is_f() {
        let page = r#"<style>
.hiddenclass {
    position : absolute;
    left : -977px;
}
</style>
<div class="hiddenclass">
    <a href="target.html">keywords</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "F");
        assert_eq!(r.findings[0].confidence, Confidence::Low);
    }

    #[test]
    fn inline_absolute_offsets_are_f() {
        let page = r#"<div style="left: -977px; position: absolute; top: -977px">
    <a href="target.html">keywords</a>
</div>"#;
        assert_eq!(letters(&classify(page)), "F");
    }

    #[test]
    fn negative_text_indent_is_f() {
        let page = r#"<div style="text-indent: -9999px; ">
    <a href="target.html" >keywords</a>
</div>"#;
        assert_eq!(letters(&classify(page)), "F");
    }

    #[test]
    fn below_the_fold_is_not_hidden() {
        let page = r#"<div style="height:3000px">filler</div><a href="x.html">late link</a>"#;
        let r = classify(page);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn hidden_class_visibility_is_g() {
        let page = r#"<style>
.hiddenclass {
    visibility : hidden;
}
</style>
<div class="hiddenclass">
    <a href="target.html">keywords</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "G");
        assert_eq!(r.findings[0].confidence, Confidence::High);
        assert!(r.findings[0].evidence[0].contains("visibility:hidden"));
    }

    #[test]
    fn display_none_ancestor_is_g() {
        let page = r#"<div style="display:none"><p><a href="x.html">gone</a></p></div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "G");
        assert!(r.findings[0].evidence[0].contains("display:none"));
    }

    #[test]
    fn visibility_overridden_back_on_is_not_g() {
        let page = r#"<div style="visibility:hidden">
  <a href="x.html" style="visibility:visible">still shown</a>
</div>"#;
        let r = classify(page);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    const ARRAY_SCRIPT: &str = r#"var _xa= ["\x64\69\x73\x70\x6C\x61\x79", "\x6E\x6F\x6E\x65",
"\x71\x6c\x31\x30\x30\x30", "\x73\x74\x79\x6C\x65",
"\x67\x65\x74\x45\x6C\x65\x6D\x65\x6E\x74\x42\x79\x49\x64"];
document[_xa[4]](_xa[2])[_xa[3]][_xa[0]]=_xa[1];"#;

    const CANONICAL_HIDE: &str =
        r#"document.getElementById("ql1000").style.display = "none""#;

    #[test]
    fn obfuscated_array_script_is_h() {
        let page = format!(
            r#"<div id="ql1000">
    <a href="target.html" title="keyword">keyword</a>
</div>
<script language="JavaScript">
{ARRAY_SCRIPT}
</script>"#
        );
        let r = classify(&page);
        assert_eq!(letters(&r), "H");
        let f = &r.findings[0];
        assert_eq!(f.confidence, Confidence::High);
        assert!(f.evidence[0].contains(CANONICAL_HIDE), "{:?}", f.evidence);
        assert!(f.evidence[1].contains("#ql1000"));
        assert!(f.evidence[2].contains("hex_escape"));
        assert!(f.evidence[2].contains("array_indexing"));
    }

    #[test]
    fn written_wrapper_is_h_not_g() {
        let page = r#"<script language="JavaScript" type="text/javascript">
    document.write( "<div style='visibility:hidden'>" );
</script>
<a href="target.html">keywords</a>
<script language="JavaScript" type="text/javascript">
    document.write( "</div>" );
</script>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "H");
        let f = &r.findings[0];
        assert!(f.evidence[1].contains("between wrapper-writing scripts"));
    }

    #[test]
    fn concat_and_eval_variants_match_the_canonical_statement() {
        let concat = r#"document.getElementById("q" + "l" + "1000").style.display = "n" + "o" + "ne";"#;
        let eval = r#"function HexTostring(s){
var r='';
for(var i=0;i<s.length;i+=2){
var sxx=parseInt(s.substring(i,i+2),16);
r+=String.fromCharCode(sxx);}
return r;}
eval(HexTostring("646f63756d656e742e676574456c656d656e74427949642822716c3130303022292e7374796c652e646973706c6179203d20226e6f6e6522"));"#;
        for script in [concat, eval] {
            let page = format!(
                r#"<div id="ql1000"><a href="target.html" title="keyword">keyword</a></div>
<script type="text/javascript">{script}</script>"#
            );
            let r = classify(&page);
            assert_eq!(letters(&r), "H", "script: {script}");
            assert!(r.findings[0].evidence[0].contains(CANONICAL_HIDE));
        }
    }

    #[test]
    fn hide_target_missing_from_page_is_not_h() {
        let page = r#"<a href="x.html">visible</a>
<script>document.getElementById("ghost").style.display = "none";</script>"#;
        let r = classify(page);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
        assert!(r.notes.iter().any(|n| n.contains("ghost")));
    }

    #[test]
    fn meta_refresh_flags_every_other_link_as_i() {
        let page = r#"<meta http-equiv="refresh" content="0;url=http://b.cn">
<a href="http://a.com/page">kept for crawlers</a>
<a href="http://b.cn">where you land</a>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "I");
        assert_eq!(r.findings.len(), 1);
        let f = &r.findings[0];
        assert_eq!(f.link.href_raw, "http://a.com/page");
        assert!(f.evidence[0].contains("meta refresh"));
        // The redirect destination is never reported as hidden.
        assert!(r.findings.iter().all(|f| f.link.href_raw != "http://b.cn"));
    }

    #[test]
    fn script_location_flags_links_as_i() {
        let page = r#"<a href="http://a.com">held link</a>
<script>location.href = "http://b.cn";</script>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "I");
        assert!(r.findings[0].evidence[0].contains("location"));
    }

    #[test]
    fn hover_revealed_menu_is_j() {
        let page = r#"<style>
#nav ul { display:none }
#nav:hover ul { display:block }
</style>
<div id="nav">Products
  <ul><li><a href="http://x.cn/1">buried</a></li></ul>
</div>"#;
        let r = classify(page);
        assert!(r.techniques_present.contains(&TechniqueLabel::J));
        let j = r
            .findings
            .iter()
            .find(|f| f.technique == TechniqueLabel::J)
            .unwrap();
        assert_eq!(j.confidence, Confidence::High);
        assert!(j.evidence[0].contains("#nav:hover ul"));
        // The resting state hides it outright too.
        assert!(r.techniques_present.contains(&TechniqueLabel::G));
    }

    #[test]
    fn deep_entries_of_clipped_list_are_j_and_l() {
        let mut items = String::new();
        for i in 0..25 {
            items.push_str(&format!(r#"<li><a href="http://x.cn/{i}">entry {i}</a></li>"#));
        }
        let page = format!(
            r#"<div style="overflow:hidden;height:20px;width:200px"><ul>{items}</ul></div>"#
        );
        let r = classify(&page);
        let by_href: BTreeMap<&str, BTreeSet<TechniqueLabel>> =
            r.findings.iter().fold(BTreeMap::new(), |mut m, f| {
                m.entry(f.link.href_raw.as_str()).or_default().insert(f.technique);
                m
            });
        assert!(!by_href.contains_key("http://x.cn/0"), "{by_href:?}");
        let buried = by_href.get("http://x.cn/20").unwrap();
        assert!(buried.contains(&TechniqueLabel::J));
        assert!(buried.contains(&TechniqueLabel::L));
        let j = r
            .findings
            .iter()
            .find(|f| f.technique == TechniqueLabel::J)
            .unwrap();
        assert!(j.evidence[0].contains("25-item menu"));
        assert_eq!(j.confidence, Confidence::Low);
    }

    #[test]
    fn visible_long_list_is_not_j() {
        let mut items = String::new();
        for i in 0..25 {
            items.push_str(&format!(r#"<li><a href="http://x.cn/{i}">entry {i}</a></li>"#));
        }
        let r = classify(&format!("<ul>{items}</ul>"));
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn url_past_title_prefix_is_k() {
        let pad = "Antique furniture restoration tips and tricks for beginners, collectors and pros";
        assert!(pad.chars().count() >= 80, "{}", pad.chars().count());
        let page = format!("<title>{pad} www.spam-depot.cn</title><body>hello</body>");
        let r = classify(&page);
        assert_eq!(letters(&r), "K");
        let f = &r.findings[0];
        assert_eq!(f.link.href_raw, "www.spam-depot.cn");
        assert_eq!(f.link.href_resolved, "http://www.spam-depot.cn");
        assert_eq!(f.link.anchor_text, "www.spam-depot.cn");
        assert!(f.evidence[0].contains("title"));
        assert_eq!(r.link_total, 0);
    }

    #[test]
    fn url_inside_title_prefix_is_not_k() {
        let r = classify("<title>Visit www.example.com for news</title>");
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn meta_keyword_urls_are_k_at_any_offset() {
        let page = r#"<meta name="keywords" content="casino, www.win.cn, poker">
<meta name="description" content="The best odds at big-casino.com today">
<meta name="author" content="www.ignored.cn">"#;
        let r = classify(page);
        assert_eq!(r.findings.len(), 2);
        assert!(letters(&r) == "K");
        assert_eq!(r.findings[0].link.href_raw, "www.win.cn");
        assert_eq!(r.findings[1].link.href_raw, "big-casino.com");
    }

    #[test]
    fn zindex_cover_is_l() {
        let page = r#"<div id="front" style="position:absolute; z-index:1">
    <img src="image.gif" >
</div>
<div id="back" style="position:absolute; z-index:-1">
    <a href="target.html" target="_blank">keywords</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "L");
        let f = &r.findings[0];
        assert_eq!(f.confidence, Confidence::Low);
        assert!(f.evidence[0].contains("stack level 1 over -1"));
    }

    #[test]
    fn overflow_menu_hides_second_entry_as_l() {
        let page = r#"<style type="text/css">
#spam{width:99px;height:20px;overflow:hidden;position:absolute;}
#spam a{display:block;line-height:20px;text-decoration:none;}
</style>
<div id="spam">
    <a href="/">&#160;</a>
    <a href="target.html" title="keywords">keywords</a>
</div>"#;
        let r = classify(page);
        assert_eq!(letters(&r), "L");
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].link.href_raw, "target.html");
        assert!(r.findings[0].evidence[0].contains("overflow-clipped"));
    }

    #[test]
    fn empty_cover_layer_is_not_l() {
        let page = r#"<div style="position:absolute; z-index:1; width:500px; height:300px"></div>
<div style="position:absolute; z-index:-1">
    <a href="x.html">text</a>
</div>"#;
        let r = classify(page);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn multi_technique_page_sorts_by_anchor_then_letter() {
        let page = r#"<div id="ql1000"><a href="one.html">first</a></div>
<div style="position:absolute;left:-977px"><a href="two.html">second</a></div>
<script>document.getElementById("ql1000").style.display="none";</script>"#;
        let r = classify(page);
        let got: Vec<(NodeId, char)> = r
            .findings
            .iter()
            .map(|f| (f.link.anchor_node, f.technique.letter()))
            .collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].1, 'H');
        assert_eq!(got[1].1, 'F');
        assert!(got[0].0 < got[1].0);
        assert_eq!(letters(&r), "FH");
    }

    #[test]
    fn classify_is_deterministic() {
        let page = r#"<title>x</title><a href="a.html" style="color:#fff">a</a>"#;
        assert_eq!(classify(page), classify(page));
    }

    #[test]
    fn garbage_bytes_still_produce_a_result() {
        let bytes: Vec<u8> = (0u8..=255).cycle().take(2048).collect();
        let r = classify_page(
            &bytes,
            "junk.bin",
            None,
            &NoStylesheets,
            &DetectorConfig::default(),
        );
        assert_eq!(r.url_or_path, "junk.bin");
    }

    struct MapResolver(BTreeMap<String, String>);

    impl StylesheetResolver for MapResolver {
        fn resolve(&self, href: &str) -> Option<String> {
            self.0.get(href).cloned()
        }
    }

    #[test]
    fn sidecar_stylesheet_feeds_the_cascade() {
        let page = r#"<link rel="stylesheet" href="site.css">
<div class="hiddenclass"><a href="x.html">gone</a></div>"#;
        let css = ".hiddenclass { visibility: hidden; }".to_string();
        let resolver = MapResolver(BTreeMap::from([("site.css".to_string(), css)]));
        let cfg = DetectorConfig::default();
        let r = classify_page(page.as_bytes(), "mem.html", None, &resolver, &cfg);
        assert_eq!(letters(&r), "G");

        let bare = classify(page);
        assert!(bare.findings.is_empty());
        assert!(bare.notes.iter().any(|n| n.contains("site.css")));
    }

    #[test]
    fn snapshot_diff_reports_spider_only_links() {
        let spider = r#"<a href="http://a.cn">a</a><a href="http://b.cn">b</a><a href="http://c.cn">c</a>"#;
        let browser = r#"<a href="http://b.cn">b</a><a href="http://d.cn">browser-only</a>"#;
        let found = compare_snapshots(spider.as_bytes(), browser.as_bytes(), None);
        let hrefs: Vec<&str> = found.iter().map(|f| f.link.href_raw.as_str()).collect();
        assert_eq!(hrefs, vec!["http://a.cn", "http://c.cn"]);
        assert!(found.iter().all(|f| f.technique == TechniqueLabel::I));
        assert!(found[0].evidence[0].contains("cloaking-diff"));
        // Browser-only links are dynamic content, not hiding.
        let reverse = compare_snapshots(browser.as_bytes(), spider.as_bytes(), None);
        let hrefs: Vec<&str> = reverse.iter().map(|f| f.link.href_raw.as_str()).collect();
        assert_eq!(hrefs, vec!["http://d.cn"]);
    }

    #[test]
    fn technique_labels_round_trip() {
        for t in TechniqueLabel::ALL {
            assert_eq!(t.to_string().parse::<TechniqueLabel>().unwrap(), t);
        }
        assert!("Z".parse::<TechniqueLabel>().is_err());
        let json = serde_json::to_string(&TechniqueLabel::K).unwrap();
        assert_eq!(json, "\"K\"");
    }

    proptest! {
        // Raising tau_color only widens the near-match band: no A or B
        // finding may disappear.
        #[test]
        fn raising_tau_color_never_removes_a_or_b(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let page = format!(
                r##"<a href="x.html" style="color:#{r:02x}{g:02x}{b:02x}">text</a>"##
            );
            let narrow = classify(&page);
            let wide_cfg = DetectorConfig { tau_color: 64.0, ..Default::default() };
            let wide = with_cfg(&page, &wide_cfg);
            for f in &narrow.findings {
                if matches!(f.technique, TechniqueLabel::A | TechniqueLabel::B) {
                    prop_assert!(
                        wide.findings.iter().any(|w| w.technique == f.technique
                            && w.link.anchor_node == f.link.anchor_node),
                        "lost {:?} when widening tau_color", f.technique
                    );
                }
            }
        }

        // Lowering tau_scroll only makes the fast-marquee rule stricter about
        // nothing: every E keeps firing.
        #[test]
        fn lowering_tau_scroll_never_removes_e(amount in 0u32..200) {
            let page = format!(
                r#"<marquee scrollamount={amount}><a href="x.html">k</a></marquee>"#
            );
            let base = classify(&page);
            let low_cfg = DetectorConfig { tau_scroll: 25.0, ..Default::default() };
            let low = with_cfg(&page, &low_cfg);
            if base.techniques_present.contains(&TechniqueLabel::E) {
                prop_assert!(low.techniques_present.contains(&TechniqueLabel::E));
            }
        }

        // A redirect target never shows up as a finding's link.
        #[test]
        fn redirect_target_is_never_a_finding(idx in 0usize..4) {
            let hrefs = ["http://a.cn", "http://b.cn", "http://c.cn", "http://d.cn"];
            let target = hrefs[idx];
            let links: String = hrefs
                .iter()
                .map(|h| format!(r#"<a href="{h}">x</a>"#))
                .collect();
            let page = format!(
                r#"<meta http-equiv="refresh" content="0;url={target}">{links}"#
            );
            let r = classify(&page);
            prop_assert_eq!(
                r.findings.iter().filter(|f| f.technique == TechniqueLabel::I).count(),
                hrefs.len() - 1
            );
            prop_assert!(r.findings.iter().all(|f| f.link.href_raw != target));
        }
    }
}
