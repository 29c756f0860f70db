//! Filesystem scanning: walk the inputs, classify each page in a bounded
//! worker pool, and assemble a deterministic report.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::config::DetectorConfig;
use crate::detect::{classify_page, PageResult, StylesheetResolver};
use crate::report::ScanReport;

/// Resolves stylesheet hrefs against the page's own directory, the only
/// root that exists when scanning files. Scheme or site-absolute hrefs stay
/// unresolved and surface as page notes.
pub struct FileResolver {
    dir: PathBuf,
}

impl FileResolver {
    pub fn for_page(page: &Path) -> FileResolver {
        FileResolver {
            dir: page.parent().unwrap_or(Path::new(".")).to_path_buf(),
        }
    }
}

impl StylesheetResolver for FileResolver {
    fn resolve(&self, href: &str) -> Option<String> {
        if href.contains("://") || href.starts_with('/') || href.starts_with("//") {
            return None;
        }
        fs::read_to_string(self.dir.join(href)).ok()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("no readable inputs under the given paths")]
    NoInputs,
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn is_page(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"))
}

/// Expands the argument list: explicit files are taken as-is, directories
/// are walked for .html/.htm. The result is sorted by path and deduplicated,
/// so output order never depends on walk or worker scheduling.
pub fn collect_inputs(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for arg in paths {
        if arg.is_dir() {
            for entry in WalkDir::new(arg).into_iter().filter_map(|e| e.ok()) {
                if entry.file_type().is_file() && is_page(entry.path()) {
                    files.push(entry.path().to_path_buf());
                }
            }
        } else {
            // Files regardless of extension, and missing paths so the
            // failure is recorded rather than silently dropped.
            files.push(arg.clone());
        }
    }
    files.sort();
    files.dedup();
    files
}

fn scan_one(path: &Path, cfg: &DetectorConfig) -> PageResult {
    let shown = path.display().to_string();
    match fs::read(path) {
        Ok(bytes) => classify_page(&bytes, &shown, None, &FileResolver::for_page(path), cfg),
        Err(e) => PageResult {
            url_or_path: shown,
            findings: Vec::new(),
            link_total: 0,
            techniques_present: Default::default(),
            notes: vec![format!("could not read: {e}")],
        },
    }
}

/// Scans every page under `paths` with `workers` threads (0 = one per core).
pub fn scan_paths(
    paths: &[PathBuf],
    cfg: &DetectorConfig,
    workers: usize,
) -> Result<ScanReport, ScanError> {
    let files = collect_inputs(paths);
    if files.is_empty() {
        return Err(ScanError::NoInputs);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let pages: Vec<PageResult> =
        pool.install(|| files.par_iter().map(|p| scan_one(p, cfg)).collect());
    if pages
        .iter()
        .all(|p| p.notes.iter().any(|n| n.starts_with("could not read:")))
    {
        return Err(ScanError::NoInputs);
    }
    Ok(ScanReport::new(pages, cfg))
}
