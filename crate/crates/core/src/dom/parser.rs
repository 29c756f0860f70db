//! Tokenizer and tree builder with the recovery rules spam pages need.

use super::entities::decode_entities;
use super::{Document, ElementData, Node, NodeId, NodeKind};

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

/// Elements whose content is captured verbatim and never tokenized.
const RAW_TEXT: &[&str] = &["script", "style"];

/// Elements whose content is text-only but entity-decoded.
const RCDATA: &[&str] = &["title", "textarea"];

/// Parses raw octets into a tree. Never fails: malformed markup is repaired
/// (unclosed elements auto-close, stray close tags are dropped), undecodable
/// bytes become replacement characters.
///
/// `encoding_hint` overrides charset detection. Without it, a `charset=`
/// declaration inside the first 1024 bytes is honored; the fallback is UTF-8.
pub fn parse_document(bytes: &[u8], encoding_hint: Option<&str>) -> Document {
    let mut notes = Vec::new();
    let text = decode_bytes(bytes, encoding_hint, &mut notes);
    let mut builder = TreeBuilder::new();
    builder.run(&text);
    Document::from_parts(builder.nodes, notes)
}

fn decode_bytes(bytes: &[u8], hint: Option<&str>, notes: &mut Vec<String>) -> String {
    let encoding = match hint {
        Some(label) => match encoding_rs::Encoding::for_label(label.as_bytes()) {
            Some(e) => e,
            None => {
                notes.push(format!("unknown encoding label {label:?}, using utf-8"));
                encoding_rs::UTF_8
            }
        },
        None => sniff_meta_charset(bytes, notes).unwrap_or(encoding_rs::UTF_8),
    };
    let (decoded, _, _) = encoding.decode(bytes);
    decoded.into_owned()
}

/// Looks for `charset=<label>` within the first 1024 bytes.
fn sniff_meta_charset(
    bytes: &[u8],
    notes: &mut Vec<String>,
) -> Option<&'static encoding_rs::Encoding> {
    let window = &bytes[..bytes.len().min(1024)];
    let lower: Vec<u8> = window.iter().map(|b| b.to_ascii_lowercase()).collect();
    let at = find_subslice(&lower, b"charset")?;
    let mut i = at + "charset".len();
    while i < window.len() && (window[i] == b' ' || window[i] == b'\t') {
        i += 1;
    }
    if i >= window.len() || window[i] != b'=' {
        return None;
    }
    i += 1;
    while i < window.len() && matches!(window[i], b' ' | b'\t' | b'"' | b'\'') {
        i += 1;
    }
    let start = i;
    while i < window.len()
        && (window[i].is_ascii_alphanumeric() || matches!(window[i], b'-' | b'_' | b'.'))
    {
        i += 1;
    }
    if start == i {
        return None;
    }
    let label = &window[start..i];
    match encoding_rs::Encoding::for_label(label) {
        Some(e) => Some(e),
        None => {
            notes.push(format!(
                "unknown declared charset {:?}, using utf-8",
                String::from_utf8_lossy(label)
            ));
            None
        }
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .position(|w| w == needle)
}

struct TreeBuilder {
    nodes: Vec<Node>,
    /// Open-element stack; index 0 is the synthetic root.
    stack: Vec<NodeId>,
    text_buf: String,
}

impl TreeBuilder {
    fn new() -> Self {
        let root = Node {
            id: NodeId(0),
            parent: None,
            children: Vec::new(),
            kind: NodeKind::Element(ElementData {
                tag: "#document".to_string(),
                attrs: Vec::new(),
                raw_text: None,
            }),
        };
        TreeBuilder {
            nodes: vec![root],
            stack: vec![NodeId(0)],
            text_buf: String::new(),
        }
    }

    fn run(&mut self, src: &str) {
        let b = src.as_bytes();
        let mut pos = 0;
        while pos < b.len() {
            if b[pos] == b'<' {
                if src[pos..].starts_with("<!--") {
                    self.flush_text();
                    pos = match find_from(src, pos + 4, "-->") {
                        Some(end) => end + 3,
                        None => b.len(),
                    };
                } else if src[pos..].starts_with("</") {
                    self.flush_text();
                    pos = self.close_tag(src, pos);
                } else if pos + 1 < b.len() && b[pos + 1].is_ascii_alphabetic() {
                    self.flush_text();
                    pos = self.open_tag(src, pos);
                } else if pos + 1 < b.len() && (b[pos + 1] == b'!' || b[pos + 1] == b'?') {
                    self.flush_text();
                    pos = match find_from(src, pos + 2, ">") {
                        Some(end) => end + 1,
                        None => b.len(),
                    };
                } else {
                    self.text_buf.push('<');
                    pos += 1;
                }
            } else {
                let next = find_from(src, pos, "<").unwrap_or(b.len());
                self.text_buf.push_str(&src[pos..next]);
                pos = next;
            }
        }
        self.flush_text();
    }

    fn flush_text(&mut self) {
        if self.text_buf.is_empty() {
            return;
        }
        let decoded = decode_entities(&self.text_buf);
        self.text_buf.clear();
        if decoded.is_empty() {
            return;
        }
        let parent = *self.stack.last().expect("stack holds root");
        self.append(parent, NodeKind::Text(decoded));
    }

    fn append(&mut self, parent: NodeId, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            parent: Some(parent),
            children: Vec::new(),
            kind,
        });
        self.nodes[parent.index()].children.push(id);
        id
    }

    /// Parses an open tag starting at `pos` (which points at `<`). Returns
    /// the position just past the tag and any raw content it owns.
    fn open_tag(&mut self, src: &str, pos: usize) -> usize {
        let b = src.as_bytes();
        let mut i = pos + 1;
        let name_start = i;
        while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'-' || b[i] == b':') {
            i += 1;
        }
        let tag = src[name_start..i].to_ascii_lowercase();
        let mut attrs: Vec<(String, String)> = Vec::new();
        let mut self_closing = false;
        loop {
            while i < b.len() && b[i].is_ascii_whitespace() {
                i += 1;
            }
            if i >= b.len() {
                break;
            }
            if b[i] == b'>' {
                i += 1;
                break;
            }
            if b[i] == b'/' {
                if i + 1 < b.len() && b[i + 1] == b'>' {
                    self_closing = true;
                    i += 2;
                    break;
                }
                i += 1;
                continue;
            }
            let attr_start = i;
            while i < b.len() && !b[i].is_ascii_whitespace() && !matches!(b[i], b'=' | b'>' | b'/')
            {
                i += 1;
            }
            if i == attr_start {
                i += 1;
                continue;
            }
            let name = src[attr_start..i].to_ascii_lowercase();
            while i < b.len() && b[i].is_ascii_whitespace() {
                i += 1;
            }
            let value = if i < b.len() && b[i] == b'=' {
                i += 1;
                while i < b.len() && b[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'"' || b[i] == b'\'') {
                    let quote = b[i];
                    i += 1;
                    let v_start = i;
                    while i < b.len() && b[i] != quote {
                        i += 1;
                    }
                    let v = src[v_start..i].to_string();
                    if i < b.len() {
                        i += 1;
                    }
                    v
                } else {
                    let v_start = i;
                    while i < b.len() && !b[i].is_ascii_whitespace() && b[i] != b'>' {
                        i += 1;
                    }
                    src[v_start..i].to_string()
                }
            } else {
                String::new()
            };
            attrs.push((name, value));
        }

        let parent = *self.stack.last().expect("stack holds root");
        if RAW_TEXT.contains(&tag.as_str()) {
            let (content, after) = take_until_close(src, i, &tag);
            let id = self.append(
                parent,
                NodeKind::Element(ElementData {
                    tag,
                    attrs,
                    raw_text: Some(content.to_string()),
                }),
            );
            let _ = id;
            return after;
        }
        if RCDATA.contains(&tag.as_str()) {
            let (content, after) = take_until_close(src, i, &tag);
            let id = self.append(
                parent,
                NodeKind::Element(ElementData {
                    tag,
                    attrs,
                    raw_text: None,
                }),
            );
            let decoded = decode_entities(content);
            if !decoded.is_empty() {
                self.append(id, NodeKind::Text(decoded));
            }
            return after;
        }

        let void = VOID_ELEMENTS.contains(&tag.as_str());
        let id = self.append(
            parent,
            NodeKind::Element(ElementData {
                tag,
                attrs,
                raw_text: None,
            }),
        );
        if !void && !self_closing {
            self.stack.push(id);
        }
        i
    }

    /// Handles `</name ...>`. A close tag with no matching open element on
    /// the stack is dropped.
    fn close_tag(&mut self, src: &str, pos: usize) -> usize {
        let b = src.as_bytes();
        let mut i = pos + 2;
        let name_start = i;
        while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'-' || b[i] == b':') {
            i += 1;
        }
        let tag = src[name_start..i].to_ascii_lowercase();
        let end = match find_from(src, i, ">") {
            Some(e) => e + 1,
            None => b.len(),
        };
        if let Some(depth) = self
            .stack
            .iter()
            .skip(1)
            .rposition(|&id| self.nodes[id.index()].element().map(|e| e.tag.as_str()) == Some(&tag))
        {
            self.stack.truncate(depth + 1);
        }
        end
    }
}

/// Scans for `</tag` (ASCII case-insensitive) and returns the content before
/// it plus the position after the close tag's `>`. Missing close tag takes
/// everything to end of input.
fn take_until_close<'a>(src: &'a str, from: usize, tag: &str) -> (&'a str, usize) {
    let b = src.as_bytes();
    let needle: Vec<u8> = format!("</{tag}").bytes().collect();
    let mut i = from;
    while i + needle.len() <= b.len() {
        if b[i] == b'<'
            && b[i..i + needle.len()]
                .iter()
                .zip(&needle)
                .all(|(a, n)| a.to_ascii_lowercase() == *n)
        {
            let content = &src[from..i];
            let after = match find_from(src, i + needle.len(), ">") {
                Some(e) => e + 1,
                None => b.len(),
            };
            return (content, after);
        }
        i += 1;
    }
    (&src[from..], b.len())
}

fn find_from(src: &str, from: usize, needle: &str) -> Option<usize> {
    src[from..].find(needle).map(|i| from + i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::extract_links;

    #[test]
    fn stray_close_tags_are_dropped() {
        let doc = parse_document(b"</div><p>x</p></span>", None);
        let kids = doc.children(doc.root());
        assert_eq!(kids.len(), 1);
        assert_eq!(doc.element(kids[0]).unwrap().tag, "p");
    }

    #[test]
    fn close_tag_pops_through_unclosed_children() {
        let doc = parse_document(b"<div><span><a href=x>t</div>after", None);
        let root_kids = doc.children(doc.root());
        let div = root_kids[0];
        assert_eq!(doc.element(div).unwrap().tag, "div");
        // "after" lands back at root level, not inside the span
        assert_eq!(doc.node(root_kids[1]).text(), Some("after"));
        let links = extract_links(&doc, None);
        assert_eq!(links.len(), 1);
    }

    #[test]
    fn attribute_quoting_variants() {
        let doc = parse_document(br#"<a href="d" id='s' rel=bare data-x>t</a>"#, None);
        let a = doc.children(doc.root())[0];
        let el = doc.element(a).unwrap();
        assert_eq!(el.attr("href"), Some("d"));
        assert_eq!(el.attr("id"), Some("s"));
        assert_eq!(el.attr("rel"), Some("bare"));
        assert_eq!(el.attr("data-x"), Some(""));
    }

    #[test]
    fn attribute_names_lowercased_values_verbatim() {
        let doc = parse_document(
            br#"<a HREF="X.html" onMouseOver="window.status='';return true;">t</a>"#,
            None,
        );
        let a = doc.children(doc.root())[0];
        let el = doc.element(a).unwrap();
        assert_eq!(el.attr("href"), Some("X.html"));
        assert_eq!(
            el.attr("onmouseover"),
            Some("window.status='';return true;")
        );
    }

    #[test]
    fn script_content_is_raw_and_not_decoded() {
        let doc = parse_document(
            b"<script type=\"text/javascript\">if (a < b) { x = \"&amp;\"; }</script>",
            None,
        );
        let s = doc.children(doc.root())[0];
        let el = doc.element(s).unwrap();
        assert_eq!(el.tag, "script");
        assert_eq!(el.raw_text.as_deref(), Some("if (a < b) { x = \"&amp;\"; }"));
        assert!(doc.children(s).is_empty());
    }

    #[test]
    fn script_close_is_case_insensitive_and_eof_tolerant() {
        let doc = parse_document(b"<script>var x=1;</SCRIPT><p>y</p>", None);
        assert_eq!(doc.children(doc.root()).len(), 2);
        let doc2 = parse_document(b"<script>var x=1;", None);
        let s = doc2.children(doc2.root())[0];
        assert_eq!(doc2.element(s).unwrap().raw_text.as_deref(), Some("var x=1;"));
    }

    #[test]
    fn title_is_text_only_markup_inert() {
        let doc = parse_document(b"<title>hello <a href=x>world</a>&#160;</title>", None);
        let t = doc.children(doc.root())[0];
        assert_eq!(doc.element(t).unwrap().tag, "title");
        assert_eq!(
            doc.text_content(t),
            "hello <a href=x>world</a>\u{a0}"
        );
        assert!(extract_links(&doc, None).is_empty());
    }

    #[test]
    fn void_and_self_closing_elements_do_not_nest() {
        let doc = parse_document(b"<div><br><img src=i.gif><meta x=y/><p>t</p></div>", None);
        let div = doc.children(doc.root())[0];
        let kids = doc.children(div);
        assert_eq!(kids.len(), 4);
        assert!(doc.children(kids[0]).is_empty());
        assert_eq!(doc.element(kids[3]).unwrap().tag, "p");
    }

    #[test]
    fn comments_and_doctype_are_skipped() {
        let doc = parse_document(b"<!DOCTYPE html><!-- hidden --><p>x</p>", None);
        let kids = doc.children(doc.root());
        assert_eq!(kids.len(), 1);
        assert_eq!(doc.element(kids[0]).unwrap().tag, "p");
    }

    #[test]
    fn meta_charset_sniffing_within_window() {
        let latin = b"<meta charset=\"windows-1252\"><p>caf\xe9</p>".to_vec();
        let doc = parse_document(&latin, None);
        let p = doc.children(doc.root())[1];
        assert_eq!(doc.text_content(p), "café");
    }

    #[test]
    fn encoding_hint_overrides_sniffing() {
        let bytes = b"<p>caf\xe9</p>".to_vec();
        let doc = parse_document(&bytes, Some("latin1"));
        assert_eq!(doc.text_content(doc.children(doc.root())[0]), "café");
        let lossy = parse_document(&bytes, None);
        assert!(lossy
            .text_content(lossy.children(lossy.root())[0])
            .contains('\u{fffd}'));
    }

    #[test]
    fn parse_is_deterministic() {
        let bytes = br#"<div><a href=x>one</a><span>two</span></div><p>tail"#;
        let a = parse_document(bytes, None);
        let b = parse_document(bytes, None);
        assert_eq!(a, b);
    }

    #[test]
    fn arbitrary_bytes_never_panic() {
        let junk: Vec<u8> = (0..=255u8).cycle().take(4096).collect();
        let doc = parse_document(&junk, None);
        assert!(!doc.is_empty());
        parse_document(b"<", None);
        parse_document(b"<a href=", None);
        parse_document(b"<!--", None);
        parse_document(b"</", None);
    }
}
