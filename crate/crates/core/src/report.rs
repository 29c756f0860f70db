//! Scan reports: totals, prevalence tables, term frequencies, and a pair of
//! lossless on-disk formats (JSON and an escaped delimited table).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::DetectorConfig;
use crate::detect::{PageResult, TechniqueLabel};
use crate::dom::NodeId;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTotals {
    pub pages_scanned: usize,
    pub pages_with_findings: usize,
    /// Finding counts, not page counts: a page with three G findings adds 3.
    pub findings_per_technique: BTreeMap<TechniqueLabel, usize>,
    /// Distinct (page, link) pairs carrying at least one finding.
    pub hidden_links_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_echo: BTreeMap<String, String>,
    pub totals: ReportTotals,
    pub pages: Vec<PageResult>,
}

impl ScanReport {
    pub fn new(pages: Vec<PageResult>, cfg: &DetectorConfig) -> ScanReport {
        ScanReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo: cfg
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            totals: compute_totals(&pages),
            pages,
        }
    }
}

pub fn compute_totals(pages: &[PageResult]) -> ReportTotals {
    let mut totals = ReportTotals {
        pages_scanned: pages.len(),
        ..ReportTotals::default()
    };
    for page in pages {
        if !page.findings.is_empty() {
            totals.pages_with_findings += 1;
        }
        let mut links: BTreeSet<(NodeId, &str)> = BTreeSet::new();
        for f in &page.findings {
            *totals.findings_per_technique.entry(f.technique).or_insert(0) += 1;
            links.insert((f.link.anchor_node, f.link.href_raw.as_str()));
        }
        totals.hidden_links_total += links.len();
    }
    totals
}

/// Combines two reports into one; the result does not depend on the argument
/// order. Conflicting config echoes keep the lexicographically smaller value.
pub fn merge(a: ScanReport, b: ScanReport) -> ScanReport {
    let mut config_echo = a.config_echo;
    for (k, v) in b.config_echo {
        config_echo
            .entry(k)
            .and_modify(|old| {
                if v < *old {
                    *old = v.clone();
                }
            })
            .or_insert(v);
    }
    let mut pages = a.pages;
    pages.extend(b.pages);
    pages.sort_by_cached_key(|p| {
        (
            p.url_or_path.clone(),
            serde_json::to_string(p).expect("pages serialize"),
        )
    });
    ScanReport {
        schema_version: SCHEMA_VERSION,
        tool_version: a.tool_version.max(b.tool_version),
        config_echo,
        totals: compute_totals(&pages),
        pages,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub technique: TechniqueLabel,
    /// Pages carrying at least one finding of this technique.
    pub pages: usize,
    /// Distinct target URLs flagged with this technique, report-wide — a
    /// target stuffed into many pages counts once.
    pub hidden_links: usize,
}

/// Per-technique prevalence over a scanned corpus. Percentages are taken
/// against pages-with-findings, so the aggregate row can exceed 100% when
/// pages mix techniques.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub rows: Vec<PrevalenceRow>,
    /// The percentage denominator: pages with at least one finding.
    pub spam_pages: usize,
    pub aggregate_occurrences: usize,
    pub aggregate_hidden_links: usize,
}

impl PrevalenceTable {
    pub fn percentage_of(&self, count: usize) -> f64 {
        if self.spam_pages == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.spam_pages as f64
        }
    }

    /// `"285 (102.5%)"` — count plus one-decimal percentage.
    pub fn cell(&self, count: usize) -> String {
        format!("{count} ({:.1}%)", self.percentage_of(count))
    }

    /// Plain-text rows, one technique per line plus the aggregate.
    pub fn render(&self) -> String {
        let mut out = String::from("technique\tpages (percent)\thidden links\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                row.technique,
                self.cell(row.pages),
                row.hidden_links
            ));
        }
        out.push_str(&format!(
            "all\t{}\t{}\n",
            self.cell(self.aggregate_occurrences),
            self.aggregate_hidden_links
        ));
        out
    }
}

pub fn aggregate_prevalence(report: &ScanReport) -> PrevalenceTable {
    let mut pages_per: BTreeMap<TechniqueLabel, usize> = BTreeMap::new();
    let mut targets: BTreeSet<(TechniqueLabel, &str)> = BTreeSet::new();
    let mut spam_pages = 0;
    for page in &report.pages {
        if page.findings.is_empty() {
            continue;
        }
        spam_pages += 1;
        for &t in &page.techniques_present {
            *pages_per.entry(t).or_insert(0) += 1;
        }
        for f in &page.findings {
            targets.insert((f.technique, f.link.href_resolved.as_str()));
        }
    }
    let rows: Vec<PrevalenceRow> = TechniqueLabel::ALL
        .into_iter()
        .map(|technique| PrevalenceRow {
            technique,
            pages: pages_per.get(&technique).copied().unwrap_or(0),
            hidden_links: targets.iter().filter(|(t, _)| *t == technique).count(),
        })
        .collect();
    PrevalenceTable {
        aggregate_occurrences: rows.iter().map(|r| r.pages).sum(),
        aggregate_hidden_links: rows.iter().map(|r| r.hidden_links).sum(),
        rows,
        spam_pages,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    /// Two decimals with trailing zeros trimmed: `"2.4"`, `"1.48"`, `"0"`.
    pub percentage: String,
    /// `"1/N"` with N the rounded reciprocal, or `"0"` when nothing hit.
    pub reciprocal: String,
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}% ({})", self.percentage, self.reciprocal)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("total page count must be positive")]
pub struct ZeroTotal;

/// How often spam occurs in a crawl, in the two printed forms.
pub fn percentage_occurrence(spam_pages: u64, total_pages: u64) -> Result<Occurrence, ZeroTotal> {
    if total_pages == 0 {
        return Err(ZeroTotal);
    }
    let mut percentage = format!("{:.2}", 100.0 * spam_pages as f64 / total_pages as f64);
    while percentage.ends_with('0') {
        percentage.pop();
    }
    if percentage.ends_with('.') {
        percentage.pop();
    }
    let reciprocal = if spam_pages == 0 {
        "0".to_string()
    } else {
        format!("1/{}", (total_pages as f64 / spam_pages as f64).round() as u64)
    };
    Ok(Occurrence {
        percentage,
        reciprocal,
    })
}

/// Case-folded term counts over the anchor texts of all hidden links, top-k
/// by count with ties broken alphabetically. Each flagged link contributes
/// its terms once, however many findings it carries.
pub fn anchor_term_frequencies(report: &ScanReport, k: usize) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for page in &report.pages {
        let mut links: BTreeMap<(NodeId, &str), &str> = BTreeMap::new();
        for f in &page.findings {
            links
                .entry((f.link.anchor_node, f.link.href_raw.as_str()))
                .or_insert(f.link.anchor_text.as_str());
        }
        for text in links.values() {
            for term in text
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
            {
                *counts.entry(term.to_lowercase()).or_insert(0) += 1;
            }
        }
    }
    let mut terms: Vec<(String, usize)> = counts.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(k);
    terms
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "table" | "tsv" => Ok(ReportFormat::Table),
            other => Err(format!("unknown format {other:?} (expected json or table)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("not a scan report: {0}")]
    BadHeader(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

const TABLE_MAGIC: &str = "linkveil-report";

fn escape_cell(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape_cell(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape \\{}", other.unwrap_or(' '))),
        }
    }
    Ok(out)
}

/// Serializes a report. Both formats are deterministic and read back without
/// loss via [`read_report`].
pub fn emit_report(report: &ScanReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("reports serialize");
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Table => emit_table(report).into_bytes(),
    }
}

fn emit_table(report: &ScanReport) -> String {
    let mut out = format!(
        "{TABLE_MAGIC}\t{}\t{}\n",
        report.schema_version,
        escape_cell(&report.tool_version)
    );
    for (k, v) in &report.config_echo {
        out.push_str(&format!("config\t{}\t{}\n", escape_cell(k), escape_cell(v)));
    }
    out.push_str(&format!(
        "totals\t{}\t{}\t{}\n",
        report.totals.pages_scanned,
        report.totals.pages_with_findings,
        report.totals.hidden_links_total
    ));
    for (t, n) in &report.totals.findings_per_technique {
        out.push_str(&format!("technique-total\t{t}\t{n}\n"));
    }
    for page in &report.pages {
        out.push_str(&format!(
            "page\t{}\t{}\t{}\n",
            escape_cell(&page.url_or_path),
            page.link_total,
            escape_cell(&serde_json::to_string(&page.notes).expect("notes serialize")),
        ));
        for f in &page.findings {
            out.push_str(&format!(
                "finding\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                f.technique,
                escape_cell(&serde_json::to_string(&f.confidence).expect("serializes")),
                escape_cell(&f.link.href_raw),
                escape_cell(&f.link.href_resolved),
                f.link.anchor_node,
                escape_cell(&f.link.anchor_text),
                escape_cell(&serde_json::to_string(&f.link.title_attr).expect("serializes")),
                f.link.unresolved,
                escape_cell(&serde_json::to_string(&f.evidence).expect("serializes")),
            ));
        }
    }
    out
}

/// Parses either emitted format (sniffed from the first byte).
pub fn read_report(bytes: &[u8]) -> Result<ScanReport, ReadError> {
    if bytes.first() == Some(&b'{') {
        return Ok(serde_json::from_slice(bytes)?);
    }
    read_table(std::str::from_utf8(bytes).map_err(|e| ReadError::BadHeader(e.to_string()))?)
}

fn read_table(text: &str) -> Result<ScanReport, ReadError> {
    let bad = |n: usize, msg: &str| ReadError::Line(n, msg.to_string());
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| ReadError::BadHeader("empty input".into()))?;
    let head: Vec<&str> = header.split('\t').collect();
    if head.len() != 3 || head[0] != TABLE_MAGIC {
        return Err(ReadError::BadHeader(header.to_string()));
    }
    let schema: u32 = head[1]
        .parse()
        .map_err(|_| ReadError::BadHeader(header.to_string()))?;
    if schema != SCHEMA_VERSION {
        return Err(ReadError::Schema(schema));
    }
    let mut report = ScanReport {
        schema_version: schema,
        tool_version: unescape_cell(head[2]).map_err(|e| bad(1, &e))?,
        config_echo: BTreeMap::new(),
        totals: ReportTotals::default(),
        pages: Vec::new(),
    };
    for (idx, line) in lines {
        let n = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let want = |count: usize| -> Result<(), ReadError> {
            if cells.len() != count {
                Err(bad(n, &format!("expected {count} cells, got {}", cells.len())))
            } else {
                Ok(())
            }
        };
        let uncell = |i: usize| unescape_cell(cells[i]).map_err(|e| bad(n, &e));
        let num = |i: usize| -> Result<usize, ReadError> {
            cells[i].parse().map_err(|_| bad(n, "bad number"))
        };
        match cells[0] {
            "config" => {
                want(3)?;
                report.config_echo.insert(uncell(1)?, uncell(2)?);
            }
            "totals" => {
                want(4)?;
                report.totals.pages_scanned = num(1)?;
                report.totals.pages_with_findings = num(2)?;
                report.totals.hidden_links_total = num(3)?;
            }
            "technique-total" => {
                want(3)?;
                let t: TechniqueLabel = cells[1].parse().map_err(|e: String| bad(n, &e))?;
                report.totals.findings_per_technique.insert(t, num(2)?);
            }
            "page" => {
                want(4)?;
                report.pages.push(PageResult {
                    url_or_path: uncell(1)?,
                    findings: Vec::new(),
                    link_total: num(2)?,
                    techniques_present: BTreeSet::new(),
                    notes: serde_json::from_str(&uncell(3)?)?,
                });
            }
            "finding" => {
                want(10)?;
                let page = report
                    .pages
                    .last_mut()
                    .ok_or_else(|| bad(n, "finding before any page"))?;
                let technique: TechniqueLabel =
                    cells[1].parse().map_err(|e: String| bad(n, &e))?;
                let finding = crate::detect::Finding {
                    link: crate::dom::Hyperlink {
                        href_raw: uncell(3)?,
                        href_resolved: uncell(4)?,
                        anchor_node: NodeId(
                            cells[5].parse().map_err(|_| bad(n, "bad node id"))?,
                        ),
                        anchor_text: uncell(6)?,
                        title_attr: serde_json::from_str(&uncell(7)?)?,
                        unresolved: cells[8]
                            .parse()
                            .map_err(|_| bad(n, "bad bool"))?,
                    },
                    technique,
                    evidence: serde_json::from_str(&uncell(9)?)?,
                    confidence: serde_json::from_str(&uncell(2)?)?,
                };
                page.techniques_present.insert(technique);
                page.findings.push(finding);
            }
            other => return Err(bad(n, &format!("unknown row kind {other:?}"))),
        }
    }
    Ok(report)
}
