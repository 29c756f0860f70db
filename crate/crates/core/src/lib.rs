//! Static analysis of hidden-hyperlink spam in HTML documents.
//!
//! The library parses HTML with error recovery, resolves a CSS subset to
//! computed styles and approximate box geometry, statically deobfuscates
//! inline scripts, and classifies every hyperlink against a twelve-technique
//! taxonomy of link hiding (labels A through L). It also ships a ground-truth
//! corpus generator, a cost-sensitive naive-Bayes prefilter for large-corpus
//! triage, and report aggregation in prevalence-table form.
//!
//! Typical flow: [`detect::classify_page`] runs the whole pipeline on one
//! document; [`scan::scan_paths`] fans that out over files and directories;
//! [`report`] aggregates the results.

pub mod config;
pub mod corpus;
pub mod detect;
pub mod report;
pub mod scan;
pub mod dom;
pub mod script;
pub mod style;

pub use config::DetectorConfig;
pub use detect::{classify_page, Confidence, Finding, PageResult, TechniqueLabel};
pub use dom::{parse_document, Document, Hyperlink, NodeId};
