//! HTML parsing into an element tree, plus hyperlink extraction.
//!
//! The parser is deliberately forgiving: spam pages are routinely malformed,
//! so parsing never fails. Unclosed elements auto-close when their parent
//! closes or at end of input, stray close tags are dropped, and attribute
//! values may be double-quoted, single-quoted, or bare.

mod entities;
mod parser;

pub use entities::decode_entities;
pub use parser::parse_document;

use url::Url;

/// Index of a node within its document. Assignment order is document order,
/// stable for identical input bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Element payload: lowercase tag name and attributes in source order with
/// names lowercased and values kept verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementData {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    /// Unparsed contents of `script` and `style` elements. Entity decoding
    /// would corrupt code, so these bypass the text pipeline.
    pub raw_text: Option<String>,
}

impl ElementData {
    /// First attribute with the given (lowercase) name.
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    /// Whether the space-separated `class` attribute contains `name`.
    pub fn has_class(&self, name: &str) -> bool {
        self.attr("class")
            .map(|v| v.split_ascii_whitespace().any(|c| c == name))
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Element(ElementData),
    /// Decoded character data (entity references resolved).
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub kind: NodeKind,
}

impl Node {
    pub fn element(&self) -> Option<&ElementData> {
        match &self.kind {
            NodeKind::Element(e) => Some(e),
            NodeKind::Text(_) => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Text(t) => Some(t),
            NodeKind::Element(_) => None,
        }
    }
}

/// Immutable parse result. Node storage order is document order; the root is
/// a synthetic `#document` element holding all top-level content.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    nodes: Vec<Node>,
    notes: Vec<String>,
}

impl Document {
    pub(crate) fn from_parts(nodes: Vec<Node>, notes: Vec<String>) -> Self {
        Document { nodes, notes }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parse-time warnings (unknown encodings and the like).
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn element(&self, id: NodeId) -> Option<&ElementData> {
        self.node(id).element()
    }

    /// All nodes in document order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Element nodes in document order.
    pub fn elements(&self) -> impl Iterator<Item = (NodeId, &ElementData)> + '_ {
        self.nodes.iter().filter_map(|n| match &n.kind {
            NodeKind::Element(e) => Some((n.id, e)),
            NodeKind::Text(_) => None,
        })
    }

    /// Walks from `id` up to the root, excluding `id` itself.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    /// `id` followed by its ancestors.
    pub fn ancestors_or_self(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(id).chain(self.ancestors(id))
    }

    /// Preorder walk of the subtree rooted at `id`, including `id`.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in self.children(n).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Concatenated descendant text runs (raw script/style text excluded).
    pub fn text_content(&self, id: NodeId) -> String {
        let mut out = String::new();
        for n in self.descendants(id) {
            if let NodeKind::Text(t) = &self.node(n).kind {
                out.push_str(t);
            }
        }
        out
    }

    /// First element whose `id` attribute equals `name`.
    pub fn element_by_id_attr(&self, name: &str) -> Option<NodeId> {
        self.elements()
            .find(|(_, e)| e.attr("id") == Some(name))
            .map(|(id, _)| id)
    }

    /// All elements whose `class` attribute contains `name`.
    pub fn elements_by_class(&self, name: &str) -> Vec<NodeId> {
        self.elements()
            .filter(|(_, e)| e.has_class(name))
            .map(|(id, _)| id)
            .collect()
    }
}

/// One anchor occurrence with an `href` attribute.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hyperlink {
    pub href_raw: String,
    /// Absolute form when a base URL was supplied, otherwise `href_raw`.
    pub href_resolved: String,
    pub anchor_text: String,
    pub anchor_node: NodeId,
    pub title_attr: Option<String>,
    /// Set when a base URL was supplied but the href did not parse relative
    /// to it; `href_resolved` then holds the verbatim value.
    pub unresolved: bool,
}

impl serde::Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> serde::Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        u32::deserialize(d).map(NodeId)
    }
}

/// Outcome of resolving an href against a base URL.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedHref {
    pub url: String,
    /// True when the href could not be parsed; `url` is then the verbatim
    /// input.
    pub unresolved: bool,
}

/// Standard relative-reference resolution. Unparseable hrefs come back
/// verbatim with the `unresolved` flag set.
pub fn resolve_url(href: &str, base: &Url) -> ResolvedHref {
    match base.join(href.trim()) {
        Ok(u) => ResolvedHref {
            url: u.to_string(),
            unresolved: false,
        },
        Err(_) => ResolvedHref {
            url: href.to_string(),
            unresolved: true,
        },
    }
}

/// One [`Hyperlink`] per `a` element bearing `href`, in document order.
/// Anchors without `href` are skipped.
pub fn extract_links(doc: &Document, base: Option<&Url>) -> Vec<Hyperlink> {
    let mut out = Vec::new();
    for (id, el) in doc.elements() {
        if el.tag != "a" {
            continue;
        }
        let Some(href) = el.attr("href") else {
            continue;
        };
        let (href_resolved, unresolved) = match base {
            Some(b) => {
                let r = resolve_url(href, b);
                (r.url, r.unresolved)
            }
            None => (href.to_string(), false),
        };
        out.push(Hyperlink {
            href_raw: href.to_string(),
            href_resolved,
            anchor_text: doc.text_content(id),
            anchor_node: id,
            title_attr: el.attr("title").map(str::to_string),
            unresolved,
        });
    }
    out
}
