//! Approximate box geometry: vertical block stacking, fixed-ratio text
//! measurement, viewport-coordinate positioning, and overflow clip tracking.

use super::cascade::{ComputedStyle, Display, Overflow, Position, StyleMap};
use crate::dom::{Document, NodeId};

/// Stand-in for an unconstrained clip edge when an overflow:hidden box has
/// auto height.
const UNBOUNDED: f64 = 1.0e9;

const CHAR_WIDTH_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    /// Intersection, normalized to zero-size when disjoint.
    pub fn intersect(&self, other: &Rect) -> Rect {
        let x = self.x.max(other.x);
        let y = self.y.max(other.y);
        let r = (self.x + self.w).min(other.x + other.w);
        let b = (self.y + self.h).min(other.y + other.h);
        Rect {
            x,
            y,
            w: (r - x).max(0.0),
            h: (b - y).max(0.0),
        }
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x <= other.x
            && self.y <= other.y
            && self.x + self.w >= other.x + other.w
            && self.y + self.h >= other.y + other.h
    }
}

/// Resolved geometry of one rendered node, in viewport coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGeometry {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    /// Intersection of ancestor overflow:hidden boxes, when any.
    pub clip: Option<Rect>,
    /// Entirely in negative coordinate space (left of or above the origin).
    pub offscreen: bool,
    /// 1 - area(box ∩ clip ∩ viewport) / area(box); zero-area boxes count as
    /// fully clipped.
    pub clipped_fraction: f64,
}

impl BoxGeometry {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }
}

/// Fraction of the box removed by ancestor overflow clips alone (viewport
/// ignored). Zero when no clip applies.
pub fn overflow_clipped_fraction(geom: &BoxGeometry) -> f64 {
    let Some(clip) = geom.clip else { return 0.0 };
    let area = geom.rect().area();
    if area <= 0.0 {
        return 1.0;
    }
    1.0 - geom.rect().intersect(&clip).area() / area
}

/// Box geometry per node; display:none subtrees and whitespace-only text
/// carry no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMap {
    boxes: Vec<Option<BoxGeometry>>,
}

impl BoxMap {
    pub fn get(&self, id: NodeId) -> Option<&BoxGeometry> {
        self.boxes.get(id.index()).and_then(|b| b.as_ref())
    }
}

pub fn layout_boxes(doc: &Document, styles: &StyleMap, viewport: (f64, f64)) -> BoxMap {
    let mut engine = Engine {
        doc,
        styles,
        viewport,
        boxes: vec![None; doc.len()],
    };
    engine.flow(doc.root(), 0.0, 0.0, viewport.0, None);
    BoxMap {
        boxes: engine.boxes,
    }
}

struct Engine<'a> {
    doc: &'a Document,
    styles: &'a StyleMap,
    viewport: (f64, f64),
    boxes: Vec<Option<BoxGeometry>>,
}

impl Engine<'_> {
    /// Lays out `id` with its top-left flow position at (x, y); returns the
    /// height consumed in the parent's flow.
    fn flow(&mut self, id: NodeId, x: f64, y: f64, avail_w: f64, clip: Option<Rect>) -> f64 {
        let style = self.styles.get(id).clone();
        let Some(el) = self.doc.element(id) else {
            return self.flow_text(id, &style, x, y, clip);
        };
        if style.display == Display::None {
            return 0.0;
        }
        if matches!(style.position, Position::Absolute | Position::Fixed) {
            self.place_out_of_flow(id, &style, clip);
            return 0.0;
        }
        let (mut bx, mut by) = (x, y);
        if style.position == Position::Relative {
            bx += style.left.unwrap_or(0.0);
            by += style.top.unwrap_or(0.0);
        }
        let is_img = el.tag == "img";
        let attr_w = attr_px(self.doc, id, "width");
        let attr_h = attr_px(self.doc, id, "height");
        let honors_attrs = is_img || el.tag == "marquee";
        if style.display == Display::Inline {
            let w = style
                .width
                .or(if honors_attrs { attr_w } else { None })
                .unwrap_or_else(|| {
                    if is_img {
                        300.0
                    } else {
                        self.measure(id)
                    }
                });
            let line = style.line_height.unwrap_or(style.font_size);
            let h = style
                .height
                .or(if honors_attrs { attr_h } else { None })
                .unwrap_or(if is_img { 150.0 } else { line });
            self.set_box(id, Rect::new(bx, by, w, h), clip);
            if !is_img {
                let mut cx = bx;
                for &child in self.doc.children(id) {
                    let cw = self.measure(child);
                    self.flow(child, cx, by, avail_w, clip);
                    cx += cw;
                }
            }
            return h;
        }
        // Block (and other non-inline displays): children stack vertically.
        bx += style.margin_left.unwrap_or(0.0) + style.text_indent.unwrap_or(0.0);
        let w = style
            .width
            .or(if honors_attrs { attr_w } else { None })
            .unwrap_or(avail_w.max(0.0));
        let explicit_h = style.height.or(if honors_attrs { attr_h } else { None });
        let child_clip = self.child_clip(&style, bx, by, w, explicit_h, clip);
        let mut cy = by;
        for &child in self.doc.children(id) {
            cy += self.flow(child, bx, cy, w, child_clip);
        }
        let h = explicit_h.unwrap_or(cy - by);
        self.set_box(id, Rect::new(bx, by, w, h), clip);
        h
    }

    fn flow_text(&mut self, id: NodeId, style: &ComputedStyle, x: f64, y: f64, clip: Option<Rect>) -> f64 {
        let text = self.doc.node(id).text().unwrap_or("");
        let chars = collapsed_char_count(text);
        if chars == 0 {
            return 0.0;
        }
        let w = chars as f64 * style.font_size * CHAR_WIDTH_RATIO;
        let h = style.line_height.unwrap_or(style.font_size);
        self.set_box(id, Rect::new(x, y, w, h), clip);
        h
    }

    /// Absolute/fixed: positioned at (left, top) in viewport coordinates
    /// (auto offsets resolve to 0), shrink-to-fit sizing, no flow footprint.
    fn place_out_of_flow(&mut self, id: NodeId, style: &ComputedStyle, clip: Option<Rect>) {
        let el_tag = self.doc.element(id).map(|e| e.tag.clone()).unwrap_or_default();
        let honors_attrs = el_tag == "img" || el_tag == "marquee";
        let attr_w = attr_px(self.doc, id, "width");
        let attr_h = attr_px(self.doc, id, "height");
        let bx = style.left.unwrap_or(0.0);
        let by = style.top.unwrap_or(0.0);
        let w = style
            .width
            .or(if honors_attrs { attr_w } else { None })
            .unwrap_or_else(|| self.measure(id));
        let explicit_h = style.height.or(if honors_attrs { attr_h } else { None });
        let child_clip = self.child_clip(style, bx, by, w, explicit_h, clip);
        let mut cy = by;
        for &child in self.doc.children(id) {
            cy += self.flow(child, bx, cy, w, child_clip);
        }
        let h = explicit_h.unwrap_or(cy - by);
        self.set_box(id, Rect::new(bx, by, w, h), clip);
    }

    fn child_clip(
        &self,
        style: &ComputedStyle,
        bx: f64,
        by: f64,
        w: f64,
        explicit_h: Option<f64>,
        clip: Option<Rect>,
    ) -> Option<Rect> {
        if style.overflow != Overflow::Hidden {
            return clip;
        }
        let own = Rect::new(bx, by, w, explicit_h.unwrap_or(UNBOUNDED));
        Some(match clip {
            Some(c) => c.intersect(&own),
            None => own,
        })
    }

    /// Shrink-to-fit width: text at the character ratio, inline runs sum,
    /// blocks take their widest child.
    fn measure(&self, id: NodeId) -> f64 {
        let style = self.styles.get(id);
        let Some(el) = self.doc.element(id) else {
            let text = self.doc.node(id).text().unwrap_or("");
            return collapsed_char_count(text) as f64 * style.font_size * CHAR_WIDTH_RATIO;
        };
        if style.display == Display::None {
            return 0.0;
        }
        if let Some(w) = style.width {
            return w;
        }
        if el.tag == "img" {
            return attr_px(self.doc, id, "width").unwrap_or(300.0);
        }
        if el.tag == "marquee" {
            if let Some(w) = attr_px(self.doc, id, "width") {
                return w;
            }
        }
        let children = self.doc.children(id);
        if style.display == Display::Inline {
            children.iter().map(|&c| self.measure(c)).sum()
        } else {
            children
                .iter()
                .map(|&c| self.measure(c))
                .fold(0.0, f64::max)
        }
    }

    fn set_box(&mut self, id: NodeId, rect: Rect, clip: Option<Rect>) {
        let viewport = Rect::new(0.0, 0.0, self.viewport.0, self.viewport.1);
        let area = rect.area();
        let clipped_fraction = if area <= 0.0 {
            1.0
        } else {
            let mut visible = rect.intersect(&viewport);
            if let Some(c) = clip {
                visible = visible.intersect(&c);
            }
            1.0 - visible.area() / area
        };
        let offscreen =
            rect.w > 0.0 && rect.h > 0.0 && (rect.x + rect.w <= 0.0 || rect.y + rect.h <= 0.0);
        self.boxes[id.index()] = Some(BoxGeometry {
            x: rect.x,
            y: rect.y,
            w: rect.w,
            h: rect.h,
            clip,
            offscreen,
            clipped_fraction,
        });
    }
}

/// Presentational width/height attributes: bare pixel numbers only.
fn attr_px(doc: &Document, id: NodeId, name: &str) -> Option<f64> {
    let value = doc.element(id)?.attr(name)?.trim();
    let value = value.strip_suffix("px").unwrap_or(value).trim();
    value.parse::<f64>().ok().filter(|n| *n >= 0.0)
}

/// Characters after trimming ASCII whitespace at both ends and collapsing
/// internal ASCII whitespace runs to a single position. Non-ASCII spacing
/// such as U+00A0 counts as a regular character.
fn collapsed_char_count(text: &str) -> usize {
    let mut count = 0usize;
    let mut pending_ws = false;
    for c in text.chars() {
        if c.is_ascii_whitespace() {
            pending_ws = count > 0;
        } else {
            if pending_ws {
                count += 1;
                pending_ws = false;
            }
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_document;
    use crate::style::cascade::{compute_style, inline_rules};
    use crate::style::parse::{parse_stylesheet, Origin};
    use proptest::prelude::*;

    const VIEWPORT: (f64, f64) = (1024.0, 768.0);

    fn lay(html: &str, css: &str) -> (crate::dom::Document, BoxMap) {
        let doc = parse_document(html.as_bytes(), None);
        let mut rules = parse_stylesheet(css, Origin::Stylesheet, 0);
        rules.extend(inline_rules(&doc, 10_000));
        let styles = compute_style(&doc, &rules, false);
        let boxes = layout_boxes(&doc, &styles, VIEWPORT);
        (doc, boxes)
    }

    fn anchors(doc: &crate::dom::Document) -> Vec<NodeId> {
        doc.ids()
            .filter(|&id| doc.element(id).is_some_and(|e| e.tag == "a"))
            .collect()
    }

    #[test]
    fn single_block_with_text() {
        let (doc, boxes) = lay("<div>hello</div>", "");
        let div = doc.children(doc.root())[0];
        let b = boxes.get(div).unwrap();
        assert_eq!((b.x, b.y, b.w, b.h), (0.0, 0.0, 1024.0, 16.0));
        let text = doc.children(div)[0];
        let t = boxes.get(text).unwrap();
        // 5 chars * 16px * 0.5
        assert_eq!((t.x, t.y, t.w, t.h), (0.0, 0.0, 40.0, 16.0));
        assert_eq!(t.clipped_fraction, 0.0);
        assert!(!t.offscreen);
    }

    #[test]
    fn collapse_counts_ascii_whitespace_only() {
        assert_eq!(collapsed_char_count("hello"), 5);
        assert_eq!(collapsed_char_count("anchor text"), 11);
        assert_eq!(collapsed_char_count("  a \t\n b  "), 3);
        assert_eq!(collapsed_char_count(" \n\t "), 0);
        // U+00A0 is content, not collapsible whitespace
        assert_eq!(collapsed_char_count("\u{a0}"), 1);
        assert_eq!(collapsed_char_count(" \u{a0} \u{a0} "), 3);
    }

    #[test]
    fn whitespace_only_text_has_no_box_and_no_height() {
        let (doc, boxes) = lay("<div>\n   \n</div><div>x</div>", "");
        let kids = doc.children(doc.root());
        let first = boxes.get(kids[0]).unwrap();
        assert_eq!(first.h, 0.0);
        let ws_text = doc.children(kids[0])[0];
        assert!(boxes.get(ws_text).is_none());
        // second block starts immediately below the empty one
        assert_eq!(boxes.get(kids[1]).unwrap().y, 0.0);
    }

    #[test]
    fn blocks_stack_vertically() {
        let (doc, boxes) = lay("<p>one</p><p>two two</p><p>3</p>", "");
        let kids = doc.children(doc.root());
        let ys: Vec<f64> = kids.iter().map(|&k| boxes.get(k).unwrap().y).collect();
        assert_eq!(ys, vec![0.0, 16.0, 32.0]);
    }

    #[test]
    fn absolute_negative_left_is_offscreen() {
        let (doc, boxes) = lay(
            r#"<div style="left: -977px; position: absolute; top: -977px"> <a href="target.html">keywords</a> </div>"#,
            "",
        );
        let a = anchors(&doc)[0];
        let b = boxes.get(a).unwrap();
        assert_eq!((b.x, b.y), (-977.0, -977.0));
        assert_eq!(b.w, 64.0); // 8 chars * 16 * 0.5
        assert!(b.offscreen);
        assert_eq!(b.clipped_fraction, 1.0);
    }

    #[test]
    fn absolute_class_rule_left_only_top_defaults_to_zero() {
        let (doc, boxes) = lay(
            r#"<div class="hiddenclass"><a href="target.html">keywords</a></div>"#,
            ".hiddenclass { position : absolute; left : -977px; }",
        );
        let a = anchors(&doc)[0];
        let b = boxes.get(a).unwrap();
        assert_eq!((b.x, b.y), (-977.0, 0.0));
        assert!(b.offscreen, "x + w = {} must be <= 0", b.x + b.w);
    }

    #[test]
    fn negative_text_indent_pushes_content_offscreen() {
        let (doc, boxes) = lay(
            r#"<div style="text-indent: -9999px; "><a href="target.html">keywords</a></div>"#,
            "",
        );
        let a = anchors(&doc)[0];
        let b = boxes.get(a).unwrap();
        assert_eq!(b.x, -9999.0);
        assert!(b.offscreen);
    }

    #[test]
    fn below_fold_is_clipped_by_viewport_but_not_offscreen() {
        let mut html = String::new();
        for _ in 0..100 {
            html.push_str("<p>filler text</p>");
        }
        html.push_str(r#"<p><a href="x.html">deep link</a></p>"#);
        let (doc, boxes) = lay(&html, "");
        let a = *anchors(&doc).last().unwrap();
        let b = boxes.get(a).unwrap();
        assert!(b.y >= VIEWPORT.1);
        assert!(!b.offscreen);
        assert_eq!(b.clipped_fraction, 1.0);
        assert_eq!(overflow_clipped_fraction(b), 0.0);
    }

    #[test]
    fn marquee_honors_size_attrs_and_does_not_clip() {
        let (doc, boxes) = lay(
            r#"<marquee height=1 width=8 scrollamount=3000><a href="target.html">keywords</a></marquee>"#,
            "",
        );
        let m = doc.children(doc.root())[0];
        let mb = boxes.get(m).unwrap();
        assert_eq!((mb.w, mb.h), (8.0, 1.0));
        let a = anchors(&doc)[0];
        let ab = boxes.get(a).unwrap();
        assert_eq!((ab.x, ab.y, ab.w, ab.h), (0.0, 0.0, 64.0, 16.0));
        assert_eq!(ab.clip, None);
        assert_eq!(ab.clipped_fraction, 0.0);
        assert!(!ab.offscreen);
    }

    #[test]
    fn tiny_marquee_box_is_one_by_one() {
        let (doc, boxes) = lay(
            r#"<MARQUEE scrollAmount=1 width=1 height=1><a href="target.html">keywords</a></MARQUEE>"#,
            "",
        );
        let m = doc.children(doc.root())[0];
        let mb = boxes.get(m).unwrap();
        assert_eq!((mb.w, mb.h), (1.0, 1.0));
    }

    #[test]
    fn img_defaults_and_attr_override() {
        let (doc, boxes) = lay(r#"<img src="a.gif"><img src="b.gif" width=10 height=20>"#, "");
        let kids = doc.children(doc.root());
        let first = boxes.get(kids[0]).unwrap();
        assert_eq!((first.w, first.h), (300.0, 150.0));
        let second = boxes.get(kids[1]).unwrap();
        assert_eq!((second.w, second.h), (10.0, 20.0));
    }

    #[test]
    fn display_none_subtree_gets_no_boxes() {
        let (doc, boxes) = lay(
            r#"<div style="display:none"><a href="x.html">gone</a></div><p>after</p>"#,
            "",
        );
        let kids = doc.children(doc.root());
        assert!(boxes.get(kids[0]).is_none());
        assert!(boxes.get(anchors(&doc)[0]).is_none());
        assert_eq!(boxes.get(kids[1]).unwrap().y, 0.0);
    }

    #[test]
    fn style_element_content_is_not_laid_out() {
        let (doc, boxes) = lay(
            "<style>#x{color:red}</style><p>visible</p>",
            "",
        );
        let kids = doc.children(doc.root());
        assert!(boxes.get(kids[0]).is_none());
        assert_eq!(boxes.get(kids[1]).unwrap().y, 0.0);
    }

    #[test]
    fn overflow_hidden_menu_clips_second_row() {
        let html = r#"<style type="text/css">#spam{width:99px;height:20px;overflow:hidden;position:absolute;}#spam a{display:block;line-height:20px;text-decoration:none;}</style><div id="spam"><a href="/">&#160;</a><a href="target.html" title="keywords">keywords</a></div>"#;
        let doc = parse_document(html.as_bytes(), None);
        let style_node = doc.children(doc.root())[0];
        let css = doc
            .element(style_node)
            .unwrap()
            .raw_text
            .clone()
            .unwrap_or_default();
        let mut rules = parse_stylesheet(&css, Origin::Stylesheet, 0);
        rules.extend(inline_rules(&doc, 10_000));
        let styles = compute_style(&doc, &rules, false);
        let boxes = layout_boxes(&doc, &styles, VIEWPORT);
        let links = anchors(&doc);
        assert_eq!(links.len(), 2);
        let a1 = boxes.get(links[0]).unwrap();
        assert_eq!((a1.x, a1.y, a1.w, a1.h), (0.0, 0.0, 99.0, 20.0));
        assert_eq!(a1.clip, Some(Rect::new(0.0, 0.0, 99.0, 20.0)));
        assert_eq!(overflow_clipped_fraction(a1), 0.0);
        assert_eq!(a1.clipped_fraction, 0.0);
        let a2 = boxes.get(links[1]).unwrap();
        assert_eq!((a2.x, a2.y, a2.w, a2.h), (0.0, 20.0, 99.0, 20.0));
        assert_eq!(overflow_clipped_fraction(a2), 1.0);
        assert_eq!(a2.clipped_fraction, 1.0);
    }

    #[test]
    fn zindex_cover_geometry() {
        let html = r#"<div id="front" style="position:absolute; z-index:1"><img src="image.gif" ></div><div id="back" style="position:absolute; z-index:-1"><a href="target.html" target="_blank">keywords</a></div>"#;
        let (doc, boxes) = lay(html, "");
        let front = doc.element_by_id_attr("front").unwrap();
        let back = doc.element_by_id_attr("back").unwrap();
        let fb = boxes.get(front).unwrap();
        assert_eq!((fb.x, fb.y, fb.w, fb.h), (0.0, 0.0, 300.0, 150.0));
        let bb = boxes.get(back).unwrap();
        assert_eq!((bb.x, bb.y, bb.w, bb.h), (0.0, 0.0, 64.0, 16.0));
        let a = anchors(&doc)[0];
        assert!(fb.rect().contains_rect(&boxes.get(a).unwrap().rect()));
    }

    #[test]
    fn zero_area_box_counts_fully_clipped_only_under_a_clip() {
        let (doc, boxes) = lay(
            r#"<a href="target.html" style="font-size:0px">keyword</a>"#,
            "",
        );
        let a = anchors(&doc)[0];
        let b = boxes.get(a).unwrap();
        assert_eq!((b.w, b.h), (0.0, 0.0));
        assert_eq!(b.clipped_fraction, 1.0);
        assert_eq!(overflow_clipped_fraction(b), 0.0);
        assert!(!b.offscreen);

        let (doc2, boxes2) = lay(
            r#"<div style="overflow:hidden;width:50px;height:50px"><a href="x" style="font-size:0">k</a></div>"#,
            "",
        );
        let a2 = anchors(&doc2)[0];
        assert_eq!(overflow_clipped_fraction(boxes2.get(a2).unwrap()), 1.0);
    }

    #[test]
    fn offscreen_flag_is_independent_of_clip() {
        let (doc, boxes) = lay(
            r#"<div style="overflow:hidden;width:10px;height:10px"><div style="position:absolute;left:-500px"><a href="x">link</a></div></div>"#,
            "",
        );
        let a = anchors(&doc)[0];
        let b = boxes.get(a).unwrap();
        assert!(b.offscreen);
    }

    #[test]
    fn relative_offset_moves_box_but_not_flow() {
        let (doc, boxes) = lay(
            r#"<div style="position:relative;left:30px;top:5px">moved</div><div>next</div>"#,
            "",
        );
        let kids = doc.children(doc.root());
        let first = boxes.get(kids[0]).unwrap();
        assert_eq!((first.x, first.y), (30.0, 5.0));
        // following flow ignores the relative shift
        assert_eq!(boxes.get(kids[1]).unwrap().y, 16.0);
    }

    proptest! {
        /// Shrinking an overflow:hidden ancestor's height never reveals more
        /// of a descendant: clipped fraction is monotone non-increasing in
        /// the clip height.
        #[test]
        fn clip_fraction_monotone_in_ancestor_height(h1 in 0u32..200, h2 in 0u32..200) {
            let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
            let frac = |h: u32| {
                let html = format!(
                    r#"<div style="overflow:hidden;width:120px;height:{h}px"><p>row one</p><p>row two</p><p><a href="x.html">target row</a></p></div>"#
                );
                let (doc, boxes) = lay(&html, "");
                let a = anchors(&doc)[0];
                overflow_clipped_fraction(boxes.get(a).unwrap())
            };
            prop_assert!(frac(lo) >= frac(hi) - 1e-12);
        }

        /// Geometry never produces NaN and clipped_fraction stays in [0, 1].
        #[test]
        fn fractions_stay_in_unit_interval(
            w in 0u32..300, h in 0u32..100, left in -1200i32..1200, top in -1200i32..1200
        ) {
            let html = format!(
                r#"<div style="overflow:hidden;width:{w}px;height:{h}px"><div style="position:absolute;left:{left}px;top:{top}px"><a href="x">probe link</a></div></div>"#
            );
            let (doc, boxes) = lay(&html, "");
            for id in doc.ids() {
                if let Some(b) = boxes.get(id) {
                    prop_assert!(b.clipped_fraction >= 0.0 && b.clipped_fraction <= 1.0);
                    prop_assert!(!b.clipped_fraction.is_nan());
                    let ocf = overflow_clipped_fraction(b);
                    prop_assert!((0.0..=1.0).contains(&ocf));
                }
            }
        }
    }
}
