//! `linkveil` — scan pages for hyperlinks hidden from human readers.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use url::Url;

use linkveil::config::{DetectorConfig, SetError};
use linkveil::corpus::{
    self, generate_corpus, nb_score, nb_train, page_tokens, read_manifest, CaseKind, Class,
    CorpusSpec, NBModel,
};
use linkveil::detect::compare_snapshots;
use linkveil::report::{
    aggregate_prevalence, anchor_term_frequencies, emit_report, percentage_occurrence,
    read_report, ReportFormat,
};
use linkveil::scan::{collect_inputs, scan_paths, ScanError};

#[derive(Parser)]
#[command(
    name = "linkveil",
    version,
    about = "Finds hyperlinks hidden from human readers",
    disable_help_subcommand = true
)]
struct Cli {
    /// Threshold override, key=value (repeatable). Keys: tau_color,
    /// tau_tiny_font, tau_tiny_px, tau_scroll, tau_menu, tau_title,
    /// clip_cutoff, viewport_w, viewport_h
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Config file of key=value lines, applied before --set
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,

    /// Viewport in pixels, e.g. 1024x768
    #[arg(long, value_name = "WxH", global = true)]
    viewport: Option<String>,

    /// Output format for reports and tables
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: FormatArg,

    /// Worker threads for scanning (0 = one per core)
    #[arg(long, default_value_t = 0, global = true)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> ReportFormat {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Table => ReportFormat::Table,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scan pages for hidden links and emit a report
    Scan {
        /// Files, or directories recursed for .html/.htm (sidecar .css
        /// resolves relative stylesheet links)
        paths: Vec<PathBuf>,
        /// Write the report to a file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Generate a labeled corpus of spam and control pages
    Gen {
        /// Directory to fill (created if missing)
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Cases per technique A..L
        #[arg(long, default_value_t = 10, value_name = "N")]
        per_technique: usize,
        /// Clean control pages
        #[arg(long, default_value_t = 50, value_name = "N")]
        controls: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Summarize a scan report into a prevalence table
    Aggregate {
        /// Report file in either emitted format
        report: PathBuf,
        /// Also list the top K anchor-text terms
        #[arg(long, value_name = "K")]
        terms: Option<usize>,
        /// Crawl size: adds an occurrence line (flagged pages / N)
        #[arg(long, value_name = "N")]
        total_crawled: Option<u64>,
    },
    /// Train or apply the cost-sensitive page prefilter
    Prefilter {
        #[command(subcommand)]
        action: Prefilter,
    },
    /// Report links served to the crawler but absent from the browser view
    Diff {
        /// Page as fetched by a crawler
        spider: PathBuf,
        /// The same page as a browser renders it
        browser: PathBuf,
        /// Base URL for resolving hrefs in both snapshots
        #[arg(long, value_name = "URL")]
        base: Option<String>,
    },
}

#[derive(Subcommand)]
enum Prefilter {
    /// Fit a model from a generated corpus manifest
    Train {
        /// manifest.jsonl written by `gen`
        #[arg(long, value_name = "FILE")]
        manifest: PathBuf,
        /// Where to write the model (JSON)
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Cost of flagging a clean page
        #[arg(long, default_value_t = 1.0)]
        cost_fp: f64,
        /// Cost of missing a spam page
        #[arg(long, default_value_t = 10.0)]
        cost_fn: f64,
        /// Additive smoothing
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Score pages and mark those past the cost threshold
    Score {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        paths: Vec<PathBuf>,
    },
}

enum Fail {
    Usage(String),
    Internal(String),
}

fn usage(e: impl Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn internal(e: impl Display) -> Fail {
    Fail::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn build_config(cli: &Cli) -> Result<DetectorConfig, Fail> {
    let mut cfg = DetectorConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        cfg.apply_lines(&text)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    }
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("--set needs key=value, got {pair:?}")))?;
        cfg.set(key.trim(), value.trim()).map_err(|e| {
            usage(match e {
                SetError::UnknownKey => format!("--set: unknown key {key:?}"),
                SetError::BadValue => format!("--set {key}: bad value {value:?}"),
            })
        })?;
    }
    if let Some(vp) = &cli.viewport {
        let dims = vp
            .split_once(['x', 'X'])
            .and_then(|(w, h)| Some((w.trim().parse::<f64>().ok()?, h.trim().parse::<f64>().ok()?)))
            .filter(|(w, h)| *w > 0.0 && *h > 0.0)
            .ok_or_else(|| usage(format!("--viewport expects WxH in pixels, got {vp:?}")))?;
        (cfg.viewport_w, cfg.viewport_h) = dims;
    }
    Ok(cfg)
}

fn write_out(bytes: &[u8], out: Option<&Path>) -> Result<(), Fail> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| internal(format!("writing {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| internal(format!("writing stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    let cfg = build_config(&cli)?;
    let format = cli.format;
    match cli.command {
        Command::Scan { paths, out } => {
            if paths.is_empty() {
                return Err(usage("scan needs at least one file or directory"));
            }
            let report = scan_paths(&paths, &cfg, cli.workers).map_err(|e| match e {
                ScanError::NoInputs => usage(e),
                ScanError::Pool(_) => internal(e),
            })?;
            write_out(&emit_report(&report, format.into()), out.as_deref())
        }
        Command::Gen {
            out,
            per_technique,
            controls,
            seed,
        } => {
            let spec = CorpusSpec::uniform(per_technique, controls);
            let entries = generate_corpus(&spec, seed, &out)
                .map_err(|e| internal(format!("writing {}: {e}", out.display())))?;
            println!(
                "wrote {} cases and {} under {}",
                entries.len(),
                corpus::MANIFEST_NAME,
                out.display()
            );
            Ok(())
        }
        Command::Aggregate {
            report,
            terms,
            total_crawled,
        } => {
            let bytes =
                fs::read(&report).map_err(|e| usage(format!("{}: {e}", report.display())))?;
            let parsed =
                read_report(&bytes).map_err(|e| usage(format!("{}: {e}", report.display())))?;
            let table = aggregate_prevalence(&parsed);
            let top = terms.map(|k| anchor_term_frequencies(&parsed, k));
            let occurrence = total_crawled
                .map(|total| percentage_occurrence(table.spam_pages as u64, total))
                .transpose()
                .map_err(usage)?;
            if format == FormatArg::Json {
                let mut doc = serde_json::json!({ "prevalence": table });
                if let Some(t) = &top {
                    doc["anchor_terms"] = serde_json::json!(t);
                }
                if let Some(o) = &occurrence {
                    doc["occurrence"] = serde_json::json!(o);
                }
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
            } else {
                print!("{}", table.render());
                if let Some(t) = &top {
                    println!();
                    println!("term\tcount");
                    for (term, count) in t {
                        println!("{term}\t{count}");
                    }
                }
                if let Some(o) = &occurrence {
                    println!();
                    println!("occurrence\t{o}");
                }
            }
            Ok(())
        }
        Command::Prefilter { action } => prefilter(action, format),
        Command::Diff {
            spider,
            browser,
            base,
        } => {
            let read =
                |p: &Path| fs::read(p).map_err(|e| usage(format!("{}: {e}", p.display())));
            let spider_bytes = read(&spider)?;
            let browser_bytes = read(&browser)?;
            let base = base
                .map(|b| Url::parse(&b).map_err(|e| usage(format!("--base {b:?}: {e}"))))
                .transpose()?;
            let findings = compare_snapshots(&spider_bytes, &browser_bytes, base.as_ref());
            if format == FormatArg::Json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&findings).expect("serializes")
                );
            } else {
                println!("technique\ttarget\tevidence");
                for f in &findings {
                    println!(
                        "{}\t{}\t{}",
                        f.technique,
                        f.link.href_resolved,
                        f.evidence.join("; ")
                    );
                }
            }
            Ok(())
        }
    }
}

fn prefilter(action: Prefilter, format: FormatArg) -> Result<(), Fail> {
    match action {
        Prefilter::Train {
            manifest,
            out,
            cost_fp,
            cost_fn,
            alpha,
        } => {
            let entries =
                read_manifest(&manifest).map_err(|e| usage(format!("manifest: {e}")))?;
            if entries.is_empty() {
                return Err(usage("manifest lists no cases"));
            }
            let dir = manifest.parent().unwrap_or(Path::new("."));
            let mut docs = Vec::with_capacity(entries.len());
            for entry in &entries {
                let path = dir.join(&entry.path);
                let text = fs::read_to_string(&path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let class = if entry.technique == CaseKind::Control {
                    Class::Normal
                } else {
                    Class::Spam
                };
                docs.push((page_tokens(&text), class));
            }
            let model = nb_train(&docs, cost_fp, cost_fn, alpha).map_err(usage)?;
            let spam = docs.iter().filter(|(_, c)| *c == Class::Spam).count();
            fs::write(
                &out,
                serde_json::to_vec_pretty(&model).expect("models serialize"),
            )
            .map_err(|e| internal(format!("writing {}: {e}", out.display())))?;
            println!(
                "trained on {} pages ({spam} spam, {} normal); vocabulary {}, threshold {:.6}",
                docs.len(),
                docs.len() - spam,
                model.vocabulary.len(),
                model.threshold()
            );
            Ok(())
        }
        Prefilter::Score { model, paths } => {
            let bytes =
                fs::read(&model).map_err(|e| usage(format!("{}: {e}", model.display())))?;
            let model: NBModel = serde_json::from_slice(&bytes)
                .map_err(|e| usage(format!("model: {e}")))?;
            let files = collect_inputs(&paths);
            if files.is_empty() {
                return Err(usage("no pages to score under the given paths"));
            }
            let threshold = model.threshold();
            let mut rows = Vec::new();
            for path in &files {
                let text = fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let score = nb_score(&model, &page_tokens(&text));
                rows.push((path.display().to_string(), score, score >= threshold));
            }
            if format == FormatArg::Json {
                let doc: Vec<_> = rows
                    .iter()
                    .map(|(path, score, flagged)| {
                        serde_json::json!({ "path": path, "score": score, "flagged": flagged })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
            } else {
                println!("page\tscore\tverdict");
                for (path, score, flagged) in &rows {
                    println!(
                        "{path}\t{score:.6}\t{}",
                        if *flagged { "flag" } else { "pass" }
                    );
                }
            }
            Ok(())
        }
    }
}
