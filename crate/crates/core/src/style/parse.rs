//! Stylesheet and selector parsing for the supported CSS subset.

use crate::dom::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Stylesheet,
    Inline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    /// Lowercased property name.
    pub property: String,
    /// Verbatim trimmed value.
    pub value: String,
}

/// One simple-selector group: `ul.menu:hover`, `#spam`, `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Compound {
    pub tag: Option<String>,
    pub id: Option<String>,
    pub classes: Vec<String>,
    pub hover: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectorKind {
    /// Descendant chain; the last compound is the subject.
    Chain(Vec<Compound>),
    /// Outside the supported grammar. Retained, never matches.
    Opaque,
    /// Internal selector for a `style` attribute: matches one node exactly.
    InlineNode(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub raw: String,
    pub kind: SelectorKind,
}

impl Selector {
    pub fn parse(raw: &str) -> Selector {
        let kind = parse_chain(raw).map_or(SelectorKind::Opaque, SelectorKind::Chain);
        Selector {
            raw: raw.trim().to_string(),
            kind,
        }
    }

    /// (id count, class+pseudo count, tag count) over all compounds.
    pub fn specificity(&self) -> (u32, u32, u32) {
        let mut spec = (0, 0, 0);
        if let SelectorKind::Chain(compounds) = &self.kind {
            for c in compounds {
                spec.0 += c.id.is_some() as u32;
                spec.1 += c.classes.len() as u32 + c.hover as u32;
                spec.2 += c.tag.is_some() as u32;
            }
        }
        spec
    }

    pub fn requires_hover(&self) -> bool {
        matches!(&self.kind, SelectorKind::Chain(cs) if cs.iter().any(|c| c.hover))
    }
}

fn parse_chain(raw: &str) -> Option<Vec<Compound>> {
    let mut compounds = Vec::new();
    for part in raw.split_whitespace() {
        compounds.push(parse_compound(part)?);
    }
    if compounds.is_empty() {
        None
    } else {
        Some(compounds)
    }
}

fn parse_compound(part: &str) -> Option<Compound> {
    let b = part.as_bytes();
    let mut i = 0;
    let mut compound = Compound {
        tag: None,
        id: None,
        classes: Vec::new(),
        hover: false,
    };
    let ident = |i: &mut usize| -> Option<String> {
        let start = *i;
        while *i < b.len() && (b[*i].is_ascii_alphanumeric() || b[*i] == b'-' || b[*i] == b'_') {
            *i += 1;
        }
        if *i == start {
            None
        } else {
            Some(part[start..*i].to_string())
        }
    };
    if i < b.len() && b[i].is_ascii_alphabetic() {
        compound.tag = Some(ident(&mut i)?.to_ascii_lowercase());
    }
    while i < b.len() {
        match b[i] {
            b'.' => {
                i += 1;
                compound.classes.push(ident(&mut i)?);
            }
            b'#' => {
                i += 1;
                compound.id = Some(ident(&mut i)?);
            }
            b':' => {
                i += 1;
                let name = ident(&mut i)?;
                if !name.eq_ignore_ascii_case("hover") {
                    return None;
                }
                compound.hover = true;
            }
            _ => return None,
        }
    }
    if compound.tag.is_none() && compound.id.is_none() && compound.classes.is_empty() && !compound.hover
    {
        return None;
    }
    Some(compound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleRule {
    pub selector: Selector,
    pub declarations: Vec<Declaration>,
    pub origin: Origin,
    pub source_order: u32,
}

/// Parses a stylesheet into rules. Unparseable declarations and at-rules are
/// skipped, never fatal. Comma selector lists split into one rule each.
pub fn parse_stylesheet(text: &str, origin: Origin, base_order: u32) -> Vec<StyleRule> {
    let src = strip_comments(text);
    let b = src.as_bytes();
    let mut rules = Vec::new();
    let mut order = base_order;
    let mut i = 0;
    while i < b.len() {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= b.len() {
            break;
        }
        if b[i] == b'@' {
            i = skip_at_rule(&src, i);
            continue;
        }
        let sel_start = i;
        while i < b.len() && b[i] != b'{' {
            i += 1;
        }
        if i >= b.len() {
            break;
        }
        let selector_text = &src[sel_start..i];
        i += 1;
        let block_start = i;
        while i < b.len() && b[i] != b'}' {
            i += 1;
        }
        let block = &src[block_start..i];
        if i < b.len() {
            i += 1;
        }
        let declarations = parse_declarations(block);
        if declarations.is_empty() {
            continue;
        }
        for sel in selector_text.split(',') {
            if sel.trim().is_empty() {
                continue;
            }
            rules.push(StyleRule {
                selector: Selector::parse(sel),
                declarations: declarations.clone(),
                origin,
                source_order: order,
            });
            order += 1;
        }
    }
    rules
}

/// Parses a `prop: value; prop: value` list (rule blocks and style attributes).
pub fn parse_declarations(text: &str) -> Vec<Declaration> {
    let mut out = Vec::new();
    for piece in text.split(';') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let Some(colon) = piece.find(':') else {
            continue;
        };
        let property = piece[..colon].trim().to_ascii_lowercase();
        let value = piece[colon + 1..].trim().to_string();
        if property.is_empty() || value.is_empty() {
            continue;
        }
        out.push(Declaration { property, value });
    }
    out
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("/*") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("*/") {
            Some(end) => rest = &rest[start + 2 + end + 2..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

/// Skips `@media { ... }` style blocks (balanced braces) or `@import ...;`.
fn skip_at_rule(src: &str, from: usize) -> usize {
    let b = src.as_bytes();
    let mut i = from;
    while i < b.len() && b[i] != b'{' && b[i] != b';' {
        i += 1;
    }
    if i >= b.len() || b[i] == b';' {
        return (i + 1).min(b.len());
    }
    let mut depth = 0;
    while i < b.len() {
        match b[i] {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    b.len()
}

/// Outcome of parsing one length value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LengthParse {
    Px(f64),
    Auto,
    /// `expression(...)` that could not be constant-folded.
    UnevaluatedExpression,
}

/// Parses a non-font-size length: px and unitless numbers resolve, `auto`
/// and unsupported units stay auto, constant `expression(...)` arithmetic is
/// evaluated.
pub(crate) fn parse_length(value: &str) -> LengthParse {
    let v = value.trim().to_ascii_lowercase();
    if v == "auto" {
        return LengthParse::Auto;
    }
    if let Some(body) = v.strip_prefix("expression(").and_then(|r| r.strip_suffix(')')) {
        return match eval_const_expression(body) {
            Some(n) => LengthParse::Px(n),
            None => LengthParse::UnevaluatedExpression,
        };
    }
    if let Some(n) = v.strip_suffix("px").map(str::trim).and_then(|n| n.parse().ok()) {
        return LengthParse::Px(n);
    }
    match v.parse::<f64>() {
        Ok(n) => LengthParse::Px(n),
        Err(_) => LengthParse::Auto,
    }
}

/// Font-size gets the documented unit conversions: 1em=16px, 100%=16px,
/// 1pt=4/3px. Unparseable values return None (declaration ignored).
pub(crate) fn parse_font_size(value: &str) -> Option<f64> {
    let v = value.trim().to_ascii_lowercase();
    if let Some(n) = v.strip_suffix("px").map(str::trim).and_then(|n| n.parse::<f64>().ok()) {
        return Some(n.max(0.0));
    }
    if let Some(n) = v.strip_suffix("em").map(str::trim).and_then(|n| n.parse::<f64>().ok()) {
        return Some((n * 16.0).max(0.0));
    }
    if let Some(n) = v.strip_suffix('%').map(str::trim).and_then(|n| n.parse::<f64>().ok()) {
        return Some((n / 100.0 * 16.0).max(0.0));
    }
    if let Some(n) = v.strip_suffix("pt").map(str::trim).and_then(|n| n.parse::<f64>().ok()) {
        return Some((n * 4.0 / 3.0).max(0.0));
    }
    v.parse::<f64>().ok().map(|n| n.max(0.0))
}

/// Evaluates constant integer/float arithmetic: + - * / and parentheses.
/// Anything else (identifiers, calls) yields None.
pub(crate) fn eval_const_expression(body: &str) -> Option<f64> {
    let tokens = lex_arith(body)?;
    let mut pos = 0;
    let v = parse_sum(&tokens, &mut pos)?;
    if pos == tokens.len() {
        Some(v)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ArithTok {
    Num(f64),
    Op(u8),
}

fn lex_arith(s: &str) -> Option<Vec<ArithTok>> {
    let b = s.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            toks.push(ArithTok::Num(s[start..i].parse().ok()?));
        } else if matches!(c, b'+' | b'-' | b'*' | b'/' | b'(' | b')') {
            toks.push(ArithTok::Op(c));
            i += 1;
        } else {
            return None;
        }
    }
    Some(toks)
}

fn parse_sum(toks: &[ArithTok], pos: &mut usize) -> Option<f64> {
    let mut acc = parse_product(toks, pos)?;
    while let Some(ArithTok::Op(op @ (b'+' | b'-'))) = toks.get(*pos) {
        let op = *op;
        *pos += 1;
        let rhs = parse_product(toks, pos)?;
        acc = if op == b'+' { acc + rhs } else { acc - rhs };
    }
    Some(acc)
}

fn parse_product(toks: &[ArithTok], pos: &mut usize) -> Option<f64> {
    let mut acc = parse_atom(toks, pos)?;
    while let Some(ArithTok::Op(op @ (b'*' | b'/'))) = toks.get(*pos) {
        let op = *op;
        *pos += 1;
        let rhs = parse_atom(toks, pos)?;
        if op == b'*' {
            acc *= rhs;
        } else {
            if rhs == 0.0 {
                return None;
            }
            acc /= rhs;
        }
    }
    Some(acc)
}

fn parse_atom(toks: &[ArithTok], pos: &mut usize) -> Option<f64> {
    match toks.get(*pos)? {
        ArithTok::Num(n) => {
            *pos += 1;
            Some(*n)
        }
        ArithTok::Op(b'-') => {
            *pos += 1;
            Some(-parse_atom(toks, pos)?)
        }
        ArithTok::Op(b'+') => {
            *pos += 1;
            parse_atom(toks, pos)
        }
        ArithTok::Op(b'(') => {
            *pos += 1;
            let v = parse_sum(toks, pos)?;
            match toks.get(*pos) {
                Some(ArithTok::Op(b')')) => {
                    *pos += 1;
                    Some(v)
                }
                _ => None,
            }
        }
        _ => None,
    }
}
