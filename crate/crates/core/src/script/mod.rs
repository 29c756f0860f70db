//! Static analysis of inline scripts: recovers element-hiding effects and
//! redirection signals through string obfuscation (hex escapes, concatenation,
//! array indexing, eval decoders, document.write wrappers) without executing
//! anything unbounded.

mod ast;
mod interp;
mod lexer;

use crate::dom::{Document, NodeId};
use crate::style::parse_declarations;
use interp::{analyze_source, Action, StyleProp, StyleTarget};
use std::collections::BTreeMap;

pub use lexer::{decode_string_escapes, decode_string_escapes_checked, DecodeFlags};

/// One inline script, byte-identical to the element content.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptProgram {
    pub source: String,
    pub source_node: NodeId,
}

/// How an obfuscated statement was disguised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Obfuscation {
    pub hex_escape: bool,
    pub concat: bool,
    pub array_indexing: bool,
    pub eval_decoder: bool,
    pub doc_write: bool,
}

impl Obfuscation {
    pub(crate) fn union(self, o: Self) -> Self {
        Obfuscation {
            hex_escape: self.hex_escape | o.hex_escape,
            concat: self.concat | o.concat,
            array_indexing: self.array_indexing | o.array_indexing,
            eval_decoder: self.eval_decoder | o.eval_decoder,
            doc_write: self.doc_write | o.doc_write,
        }
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.hex_escape {
            out.push("hex_escape");
        }
        if self.concat {
            out.push("concat");
        }
        if self.array_indexing {
            out.push("array_indexing");
        }
        if self.eval_decoder {
            out.push("eval_decoder");
        }
        if self.doc_write {
            out.push("doc_write");
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.labels().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HideTarget {
    ById(String),
    ByClass(String),
    /// Hidden wrapper opened by one script and closed by a later one; the
    /// nodes between the two scripts are inside it.
    WrittenWrapper {
        open_script: NodeId,
        close_script: NodeId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HideProperty {
    DisplayNone,
    VisibilityHidden,
}

/// A script-driven display/visibility mutation that hides content.
#[derive(Debug, Clone, PartialEq)]
pub struct HideEffect {
    pub target: HideTarget,
    pub property: HideProperty,
    /// Fully decoded canonical statement, never the raw source.
    pub evidence: String,
    pub obfuscation: Obfuscation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedirectionKind {
    MetaRefresh,
    ScriptLocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedirectionSignal {
    pub kind: RedirectionKind,
    pub target: Option<String>,
    pub evidence: String,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct HideAnalysis {
    pub effects: Vec<HideEffect>,
    pub notes: Vec<String>,
}

/// Gathers inline scripts in document order. Scripts with a `src` attribute
/// are skipped with a note (no network).
pub fn collect_scripts(doc: &Document) -> (Vec<ScriptProgram>, Vec<String>) {
    let mut programs = Vec::new();
    let mut notes = Vec::new();
    for (id, el) in doc.elements() {
        if el.tag != "script" {
            continue;
        }
        if let Some(src) = el.attr("src") {
            notes.push(format!("external script ignored (node {id}): {src}"));
            continue;
        }
        let source = el.raw_text.clone().unwrap_or_default();
        if source.trim().is_empty() {
            continue;
        }
        programs.push(ScriptProgram {
            source,
            source_node: id,
        });
    }
    (programs, notes)
}

/// Constant-folds string variables (array elements appear as `name[i]`).
pub fn fold_string_expressions(program: &ScriptProgram) -> BTreeMap<String, String> {
    analyze_source(&program.source).folded_strings
}

/// Canonical statements recovered by running eval() payloads under the
/// bounded interpreter, plus analysis notes (budget, unfoldable arguments).
pub fn evaluate_decoder_idioms(program: &ScriptProgram) -> (Vec<String>, Vec<String>) {
    let a = analyze_source(&program.source);
    (a.decoded, a.notes)
}

/// All hide effects across the page's scripts: direct style assignments
/// (targets must exist in the document) and written hidden wrappers whose
/// open and close come from different scripts.
pub fn extract_hide_effects(doc: &Document, programs: &[ScriptProgram]) -> HideAnalysis {
    let mut out = HideAnalysis::default();
    struct Write {
        program_idx: usize,
        node: NodeId,
        content: String,
        flags: Obfuscation,
        evidence: String,
        consumed: bool,
    }
    let mut writes: Vec<Write> = Vec::new();

    for (idx, program) in programs.iter().enumerate() {
        let analysis = analyze_source(&program.source);
        for note in analysis.notes {
            out.notes
                .push(format!("script node {}: {note}", program.source_node));
        }
        for action in analysis.actions {
            match action {
                Action::StyleAssign {
                    target,
                    property,
                    evidence,
                    flags,
                } => {
                    let target = match target {
                        StyleTarget::ById(name) => {
                            if doc.element_by_id_attr(&name).is_none() {
                                out.notes.push(format!(
                                    "script node {}: hide target id \"{name}\" not in document; dropped",
                                    program.source_node
                                ));
                                continue;
                            }
                            HideTarget::ById(name)
                        }
                        StyleTarget::ByClass(name) => {
                            if doc.elements_by_class(&name).is_empty() {
                                out.notes.push(format!(
                                    "script node {}: hide target class \"{name}\" not in document; dropped",
                                    program.source_node
                                ));
                                continue;
                            }
                            HideTarget::ByClass(name)
                        }
                    };
                    let property = match property {
                        StyleProp::Display => HideProperty::DisplayNone,
                        StyleProp::Visibility => HideProperty::VisibilityHidden,
                    };
                    out.effects.push(HideEffect {
                        target,
                        property,
                        evidence,
                        obfuscation: flags,
                    });
                }
                Action::Write {
                    content,
                    content_flags,
                    evidence,
                } => writes.push(Write {
                    program_idx: idx,
                    node: program.source_node,
                    content,
                    flags: content_flags,
                    evidence,
                    consumed: false,
                }),
                Action::Location { .. } => {}
            }
        }
    }

    // Pair a written hidden open-wrapper with the first later-script write
    // containing its close tag; the region between the scripts is hidden.
    for i in 0..writes.len() {
        let Some((tag, property)) = written_open_wrapper(&writes[i].content) else {
            continue;
        };
        let close_marker = format!("</{tag}");
        let close = (0..writes.len()).find(|&j| {
            writes[j].program_idx > writes[i].program_idx
                && !writes[j].consumed
                && writes[j].content.to_ascii_lowercase().contains(&close_marker)
        });
        if let Some(j) = close {
            writes[j].consumed = true;
            out.effects.push(HideEffect {
                target: HideTarget::WrittenWrapper {
                    open_script: writes[i].node,
                    close_script: writes[j].node,
                },
                property,
                evidence: writes[i].evidence.clone(),
                obfuscation: writes[i].flags,
            });
        }
    }
    out
}

/// Parses written markup; Some when it opens (and does not close) an element
/// whose style attribute hides content.
fn written_open_wrapper(content: &str) -> Option<(String, HideProperty)> {
    let frag = crate::dom::parse_document(content.as_bytes(), None);
    let el_id = frag
        .ids()
        .find(|&id| id != frag.root() && frag.element(id).is_some())?;
    let el = frag.element(el_id)?;
    let style = el.attr("style")?;
    let mut property = None;
    for decl in parse_declarations(style) {
        let value = decl.value.trim().to_ascii_lowercase();
        if decl.property == "display" && value == "none" {
            property = Some(HideProperty::DisplayNone);
        }
        if decl.property == "visibility" && (value == "hidden" || value == "collapse") {
            property = Some(HideProperty::VisibilityHidden);
        }
    }
    let property = property?;
    let close_marker = format!("</{}", el.tag);
    if content.to_ascii_lowercase().contains(&close_marker) {
        return None; // self-contained; nothing in the real DOM is wrapped
    }
    Some((el.tag.clone(), property))
}

/// Meta-refresh tags and constant-target location assignments.
pub fn detect_redirection(doc: &Document, programs: &[ScriptProgram]) -> Vec<RedirectionSignal> {
    let mut out = Vec::new();
    for (_, el) in doc.elements() {
        if el.tag != "meta" {
            continue;
        }
        let refresh = el
            .attr("http-equiv")
            .is_some_and(|v| v.trim().eq_ignore_ascii_case("refresh"));
        if !refresh {
            continue;
        }
        let Some(content) = el.attr("content") else {
            continue;
        };
        if let Some(url) = parse_meta_refresh_url(content) {
            out.push(RedirectionSignal {
                kind: RedirectionKind::MetaRefresh,
                target: Some(url),
                evidence: format!("meta refresh: {}", content.trim()),
            });
        }
    }
    for program in programs {
        let analysis = analyze_source(&program.source);
        for action in analysis.actions {
            if let Action::Location { target, evidence } = action {
                out.push(RedirectionSignal {
                    kind: RedirectionKind::ScriptLocation,
                    target: Some(target),
                    evidence,
                });
            }
        }
    }
    out
}

/// The url= part of a refresh content attribute, unquoted.
fn parse_meta_refresh_url(content: &str) -> Option<String> {
    for part in content.split(';') {
        let part = part.trim();
        let Some(eq) = part.find('=') else { continue };
        if !part[..eq].trim().eq_ignore_ascii_case("url") {
            continue;
        }
        let value = part[eq + 1..]
            .trim()
            .trim_matches(|c| c == '"' || c == '\'');
        if !value.is_empty() {
            return Some(value.to_string());
        }
    }
    None
}
