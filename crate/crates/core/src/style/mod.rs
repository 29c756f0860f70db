//! CSS subset: parsing, cascade resolution, and approximate box layout.
//!
//! The subset covers what hidden-link spam manipulates: colors, font size,
//! display/visibility, absolute positioning, negative offsets, z-index, and
//! overflow clipping. Selectors are limited to tag/class/id compounds,
//! descendant chains, and `:hover`; anything richer is kept opaque and never
//! matches.

mod cascade;
mod color;
mod layout;
mod parse;

pub use cascade::{
    compute_style, effective_background, hover_reveals, inline_rules, ComputedStyle, Display,
    HoverReveal, Overflow, Position, StyleMap, TextDecoration, Visibility,
};
pub use color::{color_distance, ColorValue};
pub use layout::{layout_boxes, overflow_clipped_fraction, BoxGeometry, BoxMap, Rect};
pub use parse::{
    parse_declarations, parse_stylesheet, Declaration, Origin, Selector, SelectorKind, StyleRule,
};
