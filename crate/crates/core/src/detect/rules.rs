//! One rule per hiding family. Rules are independent: a link can carry
//! several labels and no rule consults another's output, so dropping or
//! loosening one never shifts the rest.

use std::collections::BTreeSet;

use url::Url;

use crate::config::DetectorConfig;
use crate::dom::{resolve_url, Document, Hyperlink, NodeId};
use crate::script::{HideAnalysis, HideTarget, RedirectionSignal};
use crate::style::{
    color_distance, effective_background, overflow_clipped_fraction, BoxMap, Display, HoverReveal,
    Position, StyleMap, Visibility,
};

use super::{Confidence, Finding, TechniqueLabel};

fn finding(
    link: &Hyperlink,
    technique: TechniqueLabel,
    evidence: Vec<String>,
    confidence: Confidence,
) -> Finding {
    Finding {
        link: link.clone(),
        technique,
        evidence,
        confidence,
    }
}

/// Color tricks only hide text; an image-only anchor stays visible no
/// matter what color its (absent) text computes to.
fn has_visible_text(doc: &Document, id: NodeId) -> bool {
    !doc.text_content(id).trim().is_empty()
}

/// A (exact match with the effective background) and B (within `tau_color`).
/// A background image makes the comparison approximate, so confidence drops.
pub fn detect_color_hiding(
    doc: &Document,
    styles: &StyleMap,
    link: &Hyperlink,
    cfg: &DetectorConfig,
) -> Option<Finding> {
    if !has_visible_text(doc, link.anchor_node) {
        return None;
    }
    let fg = styles.get(link.anchor_node).color;
    let (bg, image) = effective_background(link.anchor_node, styles, doc);
    let distance = color_distance(fg, bg);
    let technique = if distance == 0.0 {
        TechniqueLabel::A
    } else if distance <= cfg.tau_color {
        TechniqueLabel::B
    } else {
        return None;
    };
    let mut evidence = vec![if technique == TechniqueLabel::A {
        format!(
            "anchor color {} equals effective background {} (node {})",
            fg.to_hex(),
            bg.to_hex(),
            link.anchor_node
        )
    } else {
        format!(
            "anchor color {} within {} of background {} (distance {:.2}, node {})",
            fg.to_hex(),
            cfg.tau_color,
            bg.to_hex(),
            distance,
            link.anchor_node
        )
    }];
    let confidence = if image {
        evidence.push("background image present; rendered color may differ".to_string());
        Confidence::Low
    } else {
        Confidence::High
    };
    Some(finding(link, technique, evidence, confidence))
}

/// C (tiny type or tiny enclosing box), F (parked offscreen), and L
/// (overflow-clipped away or covered by a higher layer).
pub fn detect_geometric_hiding(
    doc: &Document,
    styles: &StyleMap,
    boxes: &BoxMap,
    link: &Hyperlink,
    cfg: &DetectorConfig,
) -> Vec<Finding> {
    let mut out = Vec::new();
    let anchor = link.anchor_node;
    let font = styles.get(anchor).font_size;
    if font <= cfg.tau_tiny_font && has_visible_text(doc, anchor) {
        out.push(finding(
            link,
            TechniqueLabel::C,
            vec![format!(
                "anchor font-size {}px at or below {}px (node {})",
                font, cfg.tau_tiny_font, anchor
            )],
            Confidence::High,
        ));
    }
    for id in doc.ancestors_or_self(anchor) {
        if doc.element(id).is_none() {
            continue;
        }
        let Some(b) = boxes.get(id) else { continue };
        if b.w <= cfg.tau_tiny_px && b.h <= cfg.tau_tiny_px {
            out.push(finding(
                link,
                TechniqueLabel::C,
                vec![format!(
                    "enclosing box {}x{}px at node {} (both sides at or below {}px)",
                    b.w, b.h, id, cfg.tau_tiny_px
                )],
                Confidence::Low,
            ));
            break;
        }
    }
    if let Some(b) = boxes.get(anchor) {
        if b.offscreen {
            out.push(finding(
                link,
                TechniqueLabel::F,
                vec![format!(
                    "anchor box at ({}, {}) size {}x{} lies entirely outside the viewport (node {})",
                    b.x, b.y, b.w, b.h, anchor
                )],
                Confidence::Low,
            ));
        }
        let fraction = overflow_clipped_fraction(b);
        if fraction >= cfg.clip_cutoff {
            out.push(finding(
                link,
                TechniqueLabel::L,
                vec![format!(
                    "anchor box {:.2} overflow-clipped, at or above {} (node {})",
                    fraction, cfg.clip_cutoff, anchor
                )],
                Confidence::Low,
            ));
        }
    }
    if let Some(f) = z_cover(doc, styles, boxes, link) {
        out.push(f);
    }
    out
}

/// Stack order from the nearest positioned ancestor-or-self with an explicit
/// z-index; statically positioned content sits at level 0.
fn stacking_level(doc: &Document, styles: &StyleMap, id: NodeId) -> i32 {
    for n in doc.ancestors_or_self(id) {
        let s = styles.get(n);
        if s.position != Position::Static {
            if let Some(z) = s.z_index {
                return z;
            }
        }
    }
    0
}

/// Whether anything in the subtree would actually paint over a lower layer:
/// an image, a painted background, or visible text.
fn paints_content(doc: &Document, styles: &StyleMap, boxes: &BoxMap, root: NodeId) -> bool {
    for n in doc.descendants(root) {
        let Some(b) = boxes.get(n) else { continue };
        if b.w <= 0.0 || b.h <= 0.0 {
            continue;
        }
        if styles.get(n).visibility == Visibility::Hidden {
            continue;
        }
        match doc.element(n) {
            Some(el) => {
                if el.tag == "img"
                    || styles.get(n).background_color.is_some()
                    || styles.get(n).background_image_present
                {
                    return true;
                }
            }
            None => {
                if doc
                    .node(n)
                    .text()
                    .is_some_and(|t| !t.trim().is_empty())
                {
                    return true;
                }
            }
        }
    }
    false
}

/// L by covering: some element outside the anchor's own chain fully overlaps
/// its box from a higher stack level and actually paints there.
fn z_cover(
    doc: &Document,
    styles: &StyleMap,
    boxes: &BoxMap,
    link: &Hyperlink,
) -> Option<Finding> {
    let anchor = link.anchor_node;
    let ab = boxes.get(anchor)?;
    if ab.w <= 0.0 || ab.h <= 0.0 {
        return None;
    }
    let anchor_level = stacking_level(doc, styles, anchor);
    let chain: BTreeSet<NodeId> = doc.ancestors_or_self(anchor).collect();
    for (id, _) in doc.elements() {
        if chain.contains(&id) || doc.ancestors(id).any(|p| p == anchor) {
            continue;
        }
        let Some(pb) = boxes.get(id) else { continue };
        if pb.w <= 0.0 || pb.h <= 0.0 || !pb.rect().contains_rect(&ab.rect()) {
            continue;
        }
        let level = stacking_level(doc, styles, id);
        if level <= anchor_level {
            continue;
        }
        if !paints_content(doc, styles, boxes, id) {
            continue;
        }
        return Some(finding(
            link,
            TechniqueLabel::L,
            vec![format!(
                "anchor box covered by node {} (stack level {} over {})",
                id, level, anchor_level
            )],
            Confidence::Low,
        ));
    }
    None
}

/// G (display:none / visibility:hidden in the normal, non-hover state) and
/// E (anchor inside an unreadably fast marquee).
pub fn detect_style_hiding(
    doc: &Document,
    styles: &StyleMap,
    link: &Hyperlink,
    cfg: &DetectorConfig,
) -> Vec<Finding> {
    let mut out = Vec::new();
    let anchor = link.anchor_node;
    let mut hidden = Vec::new();
    if styles.get(anchor).visibility == Visibility::Hidden {
        hidden.push(format!("anchor computes visibility:hidden (node {})", anchor));
    }
    if let Some(off) = doc
        .ancestors_or_self(anchor)
        .find(|&id| styles.get(id).display == Display::None)
    {
        hidden.push(format!("display:none at node {} removes the anchor", off));
    }
    if !hidden.is_empty() {
        out.push(finding(link, TechniqueLabel::G, hidden, Confidence::High));
    }
    for id in doc.ancestors_or_self(anchor) {
        let Some(el) = doc.element(id) else { continue };
        if el.tag != "marquee" {
            continue;
        }
        // Missing or unparseable scrollamount scrolls at the default speed.
        let amount = el
            .attr("scrollamount")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .unwrap_or(6.0);
        if amount >= cfg.tau_scroll {
            out.push(finding(
                link,
                TechniqueLabel::E,
                vec![format!(
                    "marquee node {} scrollamount {} at or above {}",
                    id, amount, cfg.tau_scroll
                )],
                Confidence::High,
            ));
            break;
        }
    }
    out
}

/// D: anchor styled to pass as the prose around it. The color gate alone is
/// what every ordinary link in body text satisfies, so at least two of the
/// three disguise signals must also hold.
pub fn detect_text_disguise(
    doc: &Document,
    styles: &StyleMap,
    link: &Hyperlink,
    cfg: &DetectorConfig,
) -> Option<Finding> {
    let anchor = link.anchor_node;
    if !has_visible_text(doc, anchor) {
        return None;
    }
    let parent = doc.parent(anchor)?;
    let a = styles.get(anchor);
    let p = styles.get(parent);
    let distance = color_distance(a.color, p.color);
    if distance > cfg.tau_color {
        return None;
    }
    let mut signals = Vec::new();
    if !a.text_decoration.underline && !p.text_decoration.underline {
        signals.push("underline removed amid non-underlined text".to_string());
    }
    if a.cursor == "text" {
        signals.push("cursor forced to \"text\"".to_string());
    }
    if doc
        .element(anchor)
        .and_then(|el| el.attr("onmouseover"))
        .is_some_and(suppresses_status)
    {
        signals.push("onmouseover handler blanks window.status".to_string());
    }
    if signals.len() < 2 {
        return None;
    }
    let mut evidence = vec![format!(
        "anchor color {} blends into surrounding text color {} (distance {:.2}, node {})",
        a.color.to_hex(),
        p.color.to_hex(),
        distance,
        anchor
    )];
    evidence.extend(signals);
    Some(finding(link, TechniqueLabel::D, evidence, Confidence::High))
}

/// An assignment to window.status (or self.status) hides the href preview.
fn suppresses_status(handler: &str) -> bool {
    for key in ["window.status", "self.status"] {
        let mut from = 0;
        while let Some(pos) = handler[from..].find(key) {
            let rest = handler[from + pos + key.len()..].trim_start();
            if rest.starts_with('=') && !rest.starts_with("==") {
                return true;
            }
            from += pos + key.len();
        }
    }
    false
}

/// H (anchor inside a region a script hides) and I (any link on a page that
/// carries a redirection signal, except the redirect target itself).
pub fn detect_script_hiding(
    doc: &Document,
    links: &[Hyperlink],
    hide: &HideAnalysis,
    redirects: &[RedirectionSignal],
    base: Option<&Url>,
) -> Vec<Finding> {
    let mut out = Vec::new();
    for effect in &hide.effects {
        for link in links {
            let inside = match &effect.target {
                HideTarget::ById(name) => doc
                    .element_by_id_attr(name)
                    .filter(|t| doc.ancestors_or_self(link.anchor_node).any(|n| n == *t))
                    .map(|t| format!("anchor sits inside hidden element #{} (node {})", name, t)),
                HideTarget::ByClass(name) => doc
                    .elements_by_class(name)
                    .into_iter()
                    .find(|t| doc.ancestors_or_self(link.anchor_node).any(|n| n == *t))
                    .map(|t| format!("anchor sits inside hidden element .{} (node {})", name, t)),
                HideTarget::WrittenWrapper {
                    open_script,
                    close_script,
                } => (link.anchor_node > *open_script && link.anchor_node < *close_script)
                    .then(|| {
                        format!(
                            "anchor sits between wrapper-writing scripts (nodes {} and {})",
                            open_script, close_script
                        )
                    }),
            };
            let Some(where_line) = inside else { continue };
            let mut evidence = vec![format!("script hides it: {}", effect.evidence), where_line];
            if !effect.obfuscation.is_empty() {
                evidence.push(format!(
                    "obfuscation: {}",
                    effect.obfuscation.labels().join(", ")
                ));
            }
            out.push(finding(link, TechniqueLabel::H, evidence, Confidence::High));
        }
    }
    if !redirects.is_empty() {
        // The redirect target is where visitors actually land; it is the one
        // link on the page that is not hidden from them.
        let mut targets = BTreeSet::new();
        for signal in redirects {
            let Some(t) = &signal.target else { continue };
            let t = t.trim();
            targets.insert(t.to_string());
            if let Ok(u) = Url::parse(t) {
                targets.insert(u.to_string());
            }
            if let Some(b) = base {
                let r = resolve_url(t, b);
                if !r.unresolved {
                    targets.insert(r.url);
                }
            }
        }
        let mut evidence = Vec::new();
        for signal in redirects {
            let line = format!("page redirects elsewhere: {}", signal.evidence);
            if !evidence.contains(&line) {
                evidence.push(line);
            }
        }
        for link in links {
            if targets.contains(link.href_raw.trim()) || targets.contains(&link.href_resolved) {
                continue;
            }
            out.push(finding(
                link,
                TechniqueLabel::I,
                evidence.clone(),
                Confidence::High,
            ));
        }
    }
    out
}

const LIST_TAGS: &[&str] = &["ul", "ol", "dl", "select", "menu"];
const ITEM_TAGS: &[&str] = &["li", "option", "dt", "dd"];

/// J: anchor buried in a menu — revealed only on hover, or one entry among
/// `tau_menu`-plus in a list whose collapsed state keeps it out of sight.
pub fn detect_menu_burial(
    doc: &Document,
    styles: &StyleMap,
    boxes: &BoxMap,
    reveals: &[HoverReveal],
    link: &Hyperlink,
    cfg: &DetectorConfig,
) -> Option<Finding> {
    let anchor = link.anchor_node;
    for id in doc.ancestors_or_self(anchor) {
        if let Some(r) = reveals.iter().find(|r| r.node_id == id) {
            return Some(finding(
                link,
                TechniqueLabel::J,
                vec![format!(
                    "menu entry appears only on hover via {:?} (node {})",
                    r.revealed_by_selector, r.node_id
                )],
                Confidence::High,
            ));
        }
    }
    let reason = collapsed_reason(doc, styles, boxes, anchor, cfg)?;
    for id in doc.ancestors(anchor) {
        let Some(el) = doc.element(id) else { continue };
        let entries = if LIST_TAGS.contains(&el.tag.as_str()) {
            doc.descendants(id)
                .iter()
                .filter(|&&n| {
                    doc.element(n)
                        .is_some_and(|e| ITEM_TAGS.contains(&e.tag.as_str()))
                })
                .count()
        } else {
            // A link column: direct anchor children, as menus built from bare
            // divs have.
            doc.children(id)
                .iter()
                .filter(|&&n| doc.element(n).is_some_and(|e| e.tag == "a"))
                .count()
        };
        if entries >= cfg.tau_menu {
            return Some(finding(
                link,
                TechniqueLabel::J,
                vec![format!(
                    "entry in a {}-item menu under node {}, {}",
                    entries, id, reason
                )],
                Confidence::Low,
            ));
        }
    }
    None
}

/// Why the anchor is out of sight in the menu's resting state, if it is.
fn collapsed_reason(
    doc: &Document,
    styles: &StyleMap,
    boxes: &BoxMap,
    anchor: NodeId,
    cfg: &DetectorConfig,
) -> Option<String> {
    if let Some(b) = boxes.get(anchor) {
        let fraction = overflow_clipped_fraction(b);
        if fraction >= cfg.clip_cutoff {
            return Some(format!("collapsed by overflow (fraction {:.2})", fraction));
        }
    }
    if styles.get(anchor).visibility == Visibility::Hidden {
        return Some("hidden by default (visibility)".to_string());
    }
    if doc
        .ancestors_or_self(anchor)
        .any(|n| styles.get(n).display == Display::None)
    {
        return Some("hidden by default (display:none)".to_string());
    }
    None
}

/// K: URL-shaped tokens past the displayed title prefix or anywhere in meta
/// keywords/description. Each token becomes a synthetic link anchored at the
/// title/meta node.
pub fn detect_metadata_links(doc: &Document, cfg: &DetectorConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for (id, el) in doc.elements() {
        if el.tag == "title" {
            let text = doc.text_content(id);
            for (offset, token) in url_tokens(&text) {
                if offset < cfg.tau_title {
                    continue;
                }
                out.push(metadata_finding(
                    id,
                    &token,
                    format!(
                        "url-shaped token {:?} at character {} of the title (node {})",
                        token, offset, id
                    ),
                ));
            }
        } else if el.tag == "meta" {
            let name = el
                .attr("name")
                .map(|n| n.trim().to_ascii_lowercase())
                .unwrap_or_default();
            if name != "keywords" && name != "description" {
                continue;
            }
            let Some(content) = el.attr("content") else { continue };
            for (_, token) in url_tokens(content) {
                out.push(metadata_finding(
                    id,
                    &token,
                    format!("url-shaped token {:?} in meta {} (node {})", token, name, id),
                ));
            }
        }
    }
    out
}

fn metadata_finding(node: NodeId, token: &str, why: String) -> Finding {
    let href_resolved = if token.contains("://") {
        token.to_string()
    } else {
        format!("http://{}", token)
    };
    Finding {
        link: Hyperlink {
            href_raw: token.to_string(),
            href_resolved,
            anchor_text: token.to_string(),
            anchor_node: node,
            title_attr: None,
            unresolved: false,
        },
        technique: TechniqueLabel::K,
        evidence: vec![why],
        confidence: Confidence::High,
    }
}

/// (char offset, cleaned token) for every URL-shaped word. Offsets count
/// characters, matching how much of a title a browser tab shows.
fn url_tokens(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut token = String::new();
    let mut start = 0usize;
    for (cursor, ch) in text.chars().chain(std::iter::once(' ')).enumerate() {
        if ch.is_whitespace() || matches!(ch, ',' | ';' | '|') {
            if !token.is_empty() {
                if let Some(t) = urlish(&token) {
                    out.push((start, t));
                }
                token.clear();
            }
        } else {
            if token.is_empty() {
                start = cursor;
            }
            token.push(ch);
        }
    }
    out
}

const URL_TLDS: &[&str] = &[
    "biz", "br", "cc", "cn", "co", "com", "de", "edu", "es", "fr", "gov", "in", "info", "io",
    "it", "jp", "me", "net", "nl", "org", "pl", "ru", "tv", "uk", "us",
];

/// The cleaned token when it reads as a URL: explicit scheme, www prefix, or
/// a bare registrable domain with a recognized TLD.
fn urlish(raw: &str) -> Option<String> {
    let t = raw.trim_matches(|c: char| {
        matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | ')' | '(' | '"' | '\'' | '<' | '>')
    });
    if t.is_empty() {
        return None;
    }
    if let Some(pos) = t.find("://") {
        let scheme = &t[..pos];
        if !scheme.is_empty()
            && scheme.chars().all(|c| c.is_ascii_alphabetic())
            && t.len() > pos + 3
        {
            return Some(t.to_string());
        }
        return None;
    }
    let host = t.split(['/', '?', '#']).next().unwrap_or("");
    let host = host.to_ascii_lowercase();
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() < 2 {
        return None;
    }
    let well_formed = labels.iter().all(|l| {
        !l.is_empty()
            && l.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
            && !l.starts_with('-')
            && !l.ends_with('-')
    });
    if !well_formed {
        return None;
    }
    if host.starts_with("www.") {
        return Some(t.to_string());
    }
    let tld = labels.last().unwrap();
    let second = labels[labels.len() - 2];
    if URL_TLDS.contains(tld) && second.chars().any(|c| c.is_ascii_alphabetic()) {
        return Some(t.to_string());
    }
    None
}
