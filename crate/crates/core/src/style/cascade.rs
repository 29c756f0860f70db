//! Cascade resolution: matched rules + inheritance + defaults → ComputedStyle.

use super::color::ColorValue;
use super::parse::{
    parse_declarations, parse_font_size, parse_length, Compound, Declaration, LengthParse, Origin,
    Selector, SelectorKind, StyleRule,
};
use crate::dom::{Document, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Display {
    Block,
    Inline,
    None,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Visible,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Static,
    Relative,
    Absolute,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overflow {
    Visible,
    Hidden,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TextDecoration {
    pub underline: bool,
    pub overline: bool,
    pub line_through: bool,
}

/// Fully-resolved visual properties of one node. Lengths are px; None means
/// auto (or "normal" for line_height, "transparent" for background_color).
#[derive(Debug, Clone, PartialEq)]
pub struct ComputedStyle {
    pub color: ColorValue,
    pub background_color: Option<ColorValue>,
    pub background_image_present: bool,
    pub font_size: f64,
    pub display: Display,
    pub visibility: Visibility,
    pub position: Position,
    pub left: Option<f64>,
    pub top: Option<f64>,
    pub text_indent: Option<f64>,
    pub margin_left: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub z_index: Option<i32>,
    pub overflow: Overflow,
    pub text_decoration: TextDecoration,
    pub cursor: String,
    pub line_height: Option<f64>,
}

const BLOCK_TAGS: &[&str] = &[
    "#document", "html", "body", "head", "div", "p", "ul", "ol", "li", "dl", "dt", "dd",
    "marquee", "title", "h1", "h2", "h3", "h4", "h5", "h6", "form", "table", "blockquote", "pre",
    "center", "hr", "address", "fieldset", "section", "article", "header", "footer", "nav",
    "aside",
];

fn default_style(tag: &str) -> ComputedStyle {
    let display = if BLOCK_TAGS.contains(&tag) {
        Display::Block
    } else if tag == "script" || tag == "style" {
        Display::None
    } else {
        Display::Inline
    };
    ComputedStyle {
        color: ColorValue::BLACK,
        background_color: None,
        background_image_present: false,
        font_size: 16.0,
        display,
        visibility: Visibility::Visible,
        position: Position::Static,
        left: None,
        top: None,
        text_indent: Some(0.0),
        margin_left: Some(0.0),
        width: None,
        height: None,
        z_index: None,
        overflow: Overflow::Visible,
        text_decoration: TextDecoration {
            underline: tag == "a",
            ..TextDecoration::default()
        },
        cursor: "auto".to_string(),
        line_height: None,
    }
}

fn inherit(style: &mut ComputedStyle, parent: &ComputedStyle) {
    style.color = parent.color;
    style.font_size = parent.font_size;
    style.visibility = parent.visibility;
    style.cursor = parent.cursor.clone();
    style.line_height = parent.line_height;
}

/// Computed styles for every node, indexed by NodeId. Text nodes carry a
/// copy of their parent's style.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleMap {
    styles: Vec<ComputedStyle>,
    pub notes: Vec<String>,
}

impl StyleMap {
    pub fn get(&self, id: NodeId) -> &ComputedStyle {
        &self.styles[id.index()]
    }
}

/// Converts `style` attributes into highest-precedence rules that match only
/// their own element, in document order after `base_order`.
pub fn inline_rules(doc: &Document, base_order: u32) -> Vec<StyleRule> {
    let mut rules = Vec::new();
    for id in doc.ids() {
        let Some(el) = doc.element(id) else { continue };
        let Some(text) = el.attr("style") else { continue };
        let declarations = parse_declarations(text);
        if declarations.is_empty() {
            continue;
        }
        rules.push(StyleRule {
            selector: Selector {
                raw: format!("style attribute of node {id}"),
                kind: SelectorKind::InlineNode(id),
            },
            declarations,
            origin: Origin::Inline,
            source_order: base_order + rules.len() as u32,
        });
    }
    rules
}

/// Resolves the cascade for every node. With `hover` set, `:hover` selector
/// parts are treated as active on every element.
pub fn compute_style(doc: &Document, rules: &[StyleRule], hover: bool) -> StyleMap {
    let mut styles: Vec<ComputedStyle> = Vec::with_capacity(doc.len());
    let mut notes = Vec::new();
    for id in doc.ids() {
        let node = doc.node(id);
        let Some(el) = node.element() else {
            let parent = node.parent.expect("text node has a parent");
            styles.push(styles[parent.index()].clone());
            continue;
        };
        let mut style = default_style(&el.tag);
        if let Some(parent) = node.parent {
            let parent_style = styles[parent.index()].clone();
            inherit(&mut style, &parent_style);
        }
        let mut matched: Vec<&StyleRule> = rules
            .iter()
            .filter(|r| selector_matches(doc, id, &r.selector, hover))
            .collect();
        matched.sort_by_key(|r| {
            (
                matches!(r.origin, Origin::Inline) as u8,
                r.selector.specificity(),
                r.source_order,
            )
        });
        for rule in matched {
            for decl in &rule.declarations {
                apply_declaration(&mut style, decl, id, &mut notes);
            }
        }
        styles.push(style);
    }
    StyleMap { styles, notes }
}

fn selector_matches(doc: &Document, node: NodeId, selector: &Selector, hover: bool) -> bool {
    match &selector.kind {
        SelectorKind::Opaque => false,
        SelectorKind::InlineNode(target) => *target == node,
        SelectorKind::Chain(compounds) => {
            let Some(subject) = compounds.last() else {
                return false;
            };
            if !compound_matches(doc, node, subject, hover) {
                return false;
            }
            // Remaining compounds must match ancestors, bottom-up. Ancestors
            // form a chain, so nearest-first greedy search is exact.
            let mut idx = compounds.len() - 1;
            let mut cursor = node;
            while idx > 0 {
                let mut anc = doc.parent(cursor);
                loop {
                    match anc {
                        Some(p) => {
                            if compound_matches(doc, p, &compounds[idx - 1], hover) {
                                cursor = p;
                                idx -= 1;
                                break;
                            }
                            anc = doc.parent(p);
                        }
                        None => return false,
                    }
                }
            }
            true
        }
    }
}

fn compound_matches(doc: &Document, node: NodeId, compound: &Compound, hover: bool) -> bool {
    let Some(el) = doc.element(node) else {
        return false;
    };
    if compound.hover && !hover {
        return false;
    }
    if let Some(tag) = &compound.tag {
        if &el.tag != tag {
            return false;
        }
    }
    if let Some(id) = &compound.id {
        if el.attr("id") != Some(id.as_str()) {
            return false;
        }
    }
    compound.classes.iter().all(|c| el.has_class(c))
}

fn apply_declaration(
    style: &mut ComputedStyle,
    decl: &Declaration,
    node: NodeId,
    notes: &mut Vec<String>,
) {
    let value = decl.value.as_str();
    let lower = value.to_ascii_lowercase();
    match decl.property.as_str() {
        "color" => {
            if let Some(c) = ColorValue::parse(value) {
                style.color = c;
            }
        }
        "background-color" => {
            if lower == "transparent" {
                style.background_color = None;
            } else if let Some(c) = ColorValue::parse(value) {
                style.background_color = Some(c);
            }
        }
        "background" => apply_background_shorthand(style, value),
        "background-image" => {
            if lower.contains("url(") {
                style.background_image_present = true;
            } else if lower == "none" {
                style.background_image_present = false;
            }
        }
        "font-size" => {
            if let Some(px) = parse_font_size(value) {
                style.font_size = px;
            }
        }
        "display" => {
            style.display = match lower.as_str() {
                "block" => Display::Block,
                "inline" => Display::Inline,
                "none" => Display::None,
                "" => return,
                _ => Display::Other,
            };
        }
        "visibility" => {
            style.visibility = match lower.as_str() {
                "visible" => Visibility::Visible,
                "hidden" | "collapse" => Visibility::Hidden,
                _ => return,
            };
        }
        "position" => {
            style.position = match lower.as_str() {
                "static" => Position::Static,
                "relative" => Position::Relative,
                "absolute" => Position::Absolute,
                "fixed" => Position::Fixed,
                _ => return,
            };
        }
        "left" => apply_offset(&mut style.left, value, decl, node, notes),
        "top" => apply_offset(&mut style.top, value, decl, node, notes),
        "text-indent" => apply_offset(&mut style.text_indent, value, decl, node, notes),
        "margin-left" => apply_offset(&mut style.margin_left, value, decl, node, notes),
        "width" => apply_size(&mut style.width, value, decl, node, notes),
        "height" => apply_size(&mut style.height, value, decl, node, notes),
        "z-index" => {
            if lower == "auto" {
                style.z_index = None;
            } else if let Ok(z) = lower.parse::<f64>() {
                style.z_index = Some(z as i32);
            }
        }
        "overflow" => {
            style.overflow = match lower.as_str() {
                "visible" => Overflow::Visible,
                "hidden" => Overflow::Hidden,
                _ => Overflow::Other,
            };
        }
        "text-decoration" | "text-decoration-line" => {
            for word in lower.split_whitespace() {
                match word {
                    "none" => style.text_decoration = TextDecoration::default(),
                    "underline" => style.text_decoration.underline = true,
                    "overline" => style.text_decoration.overline = true,
                    "line-through" => style.text_decoration.line_through = true,
                    _ => {}
                }
            }
        }
        "cursor" => {
            if let Some(word) = lower.split_whitespace().next() {
                style.cursor = word.to_string();
            }
        }
        "line-height" => {
            if lower == "normal" {
                style.line_height = None;
            } else {
                match parse_length(value) {
                    LengthParse::Px(n) if n >= 0.0 => style.line_height = Some(n),
                    LengthParse::UnevaluatedExpression => {
                        notes.push(unevaluated_note(decl, node));
                    }
                    _ => {}
                }
            }
        }
        _ => {}
    }
}

fn apply_offset(
    slot: &mut Option<f64>,
    value: &str,
    decl: &Declaration,
    node: NodeId,
    notes: &mut Vec<String>,
) {
    match parse_length(value) {
        LengthParse::Px(n) => *slot = Some(n),
        LengthParse::Auto => *slot = None,
        LengthParse::UnevaluatedExpression => {
            *slot = None;
            notes.push(unevaluated_note(decl, node));
        }
    }
}

fn apply_size(
    slot: &mut Option<f64>,
    value: &str,
    decl: &Declaration,
    node: NodeId,
    notes: &mut Vec<String>,
) {
    match parse_length(value) {
        LengthParse::Px(n) if n >= 0.0 => *slot = Some(n),
        LengthParse::Px(_) => {}
        LengthParse::Auto => *slot = None,
        LengthParse::UnevaluatedExpression => {
            *slot = None;
            notes.push(unevaluated_note(decl, node));
        }
    }
}

fn unevaluated_note(decl: &Declaration, node: NodeId) -> String {
    format!(
        "unevaluated-expression: {} on node {} ({})",
        decl.property, node, decl.value
    )
}

/// Splits a `background` shorthand on top-level whitespace (parentheses kept
/// together) and picks out color, image, and transparency components.
fn apply_background_shorthand(style: &mut ComputedStyle, value: &str) {
    let mut tokens = Vec::new();
    let mut depth = 0;
    let mut start = None;
    for (i, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if let Some(s) = start.take() {
                tokens.push(&value[s..i]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(&value[s..]);
    }
    for token in tokens {
        let lower = token.to_ascii_lowercase();
        if lower.starts_with("url(") {
            style.background_image_present = true;
        } else if lower == "none" {
            style.background_image_present = false;
        } else if lower == "transparent" {
            style.background_color = None;
        } else if let Some(c) = ColorValue::parse(token) {
            style.background_color = Some(c);
        }
    }
}

/// Nearest ancestor-or-self non-transparent background; document default is
/// white. The flag reports any background image declared along that chain.
pub fn effective_background(
    node: NodeId,
    styles: &StyleMap,
    doc: &Document,
) -> (ColorValue, bool) {
    let mut image = false;
    for id in doc.ancestors_or_self(node) {
        let s = styles.get(id);
        image |= s.background_image_present;
        if let Some(c) = s.background_color {
            return (c, image);
        }
    }
    (ColorValue::WHITE, image)
}

/// A node hidden in the normal state that a `:hover` rule makes visible.
#[derive(Debug, Clone, PartialEq)]
pub struct HoverReveal {
    pub node_id: NodeId,
    pub revealed_by_selector: String,
}

/// Diffs the hover and non-hover cascades.
pub fn hover_reveals(
    doc: &Document,
    rules: &[StyleRule],
    normal: &StyleMap,
    hovered: &StyleMap,
) -> Vec<HoverReveal> {
    let mut out = Vec::new();
    for id in doc.ids() {
        if doc.element(id).is_none() {
            continue;
        }
        let n = normal.get(id);
        let h = hovered.get(id);
        let hidden_normal = n.display == Display::None || n.visibility == Visibility::Hidden;
        let visible_hover = h.display != Display::None && h.visibility != Visibility::Hidden;
        if !(hidden_normal && visible_hover) {
            continue;
        }
        out.push(HoverReveal {
            node_id: id,
            revealed_by_selector: revealing_selector(doc, id, rules),
        });
    }
    out
}

/// The hover rule that shows the node: the highest-precedence hover-requiring
/// rule touching display/visibility on the node or an ancestor.
fn revealing_selector(doc: &Document, node: NodeId, rules: &[StyleRule]) -> String {
    for id in doc.ancestors_or_self(node) {
        let mut candidates: Vec<&StyleRule> = rules
            .iter()
            .filter(|r| {
                r.selector.requires_hover()
                    && selector_matches(doc, id, &r.selector, true)
                    && r.declarations
                        .iter()
                        .any(|d| d.property == "display" || d.property == "visibility")
            })
            .collect();
        candidates.sort_by_key(|r| (r.selector.specificity(), r.source_order));
        if let Some(rule) = candidates.last() {
            return rule.selector.raw.clone();
        }
    }
    "(inherited hover reveal)".to_string()
}
