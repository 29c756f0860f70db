//! Ground-truth page generator and the naive-Bayes prefilter.
//!
//! Every generated case regenerates byte-identically from (kind, seed,
//! params), so a corpus directory is disposable: the manifest is enough to
//! rebuild it. Spam cases plant exactly one anchor whose expected labels are
//! recorded; control cases have links but plant nothing.

mod nb;

pub use nb::{nb_filter, nb_score, nb_train, page_tokens, Class, NBModel, TrainError};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detect::TechniqueLabel;

/// What a generated page exercises: one hiding technique, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseKind {
    Technique(TechniqueLabel),
    Control,
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseKind::Technique(t) => write!(f, "{t}"),
            CaseKind::Control => write!(f, "control"),
        }
    }
}

impl FromStr for CaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("control") {
            return Ok(CaseKind::Control);
        }
        s.parse::<TechniqueLabel>().map(CaseKind::Technique)
    }
}

impl Serialize for CaseKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CaseKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One planted anchor and the labels the detector must report for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedLink {
    pub href: String,
    pub expected: Vec<TechniqueLabel>,
}

/// A generated page with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthCase {
    pub kind: CaseKind,
    pub page_bytes: Vec<u8>,
    pub planted_links: Vec<PlantedLink>,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("unknown parameter {0:?} for {1}")]
    UnknownParam(String, CaseKind),
    #[error("bad value {value:?} for parameter {key:?}")]
    BadParam { key: String, value: String },
}

const WORDS: &[&str] = &[
    "river", "garden", "autumn", "recipe", "ticket", "travel", "window", "guitar", "harbor",
    "lantern", "meadow", "orchard", "pepper", "quartz", "saddle", "timber", "velvet", "walnut",
    "yonder", "zephyr", "marble", "copper", "forest", "island",
];

const TLDS: &[&str] = &["com", "net", "org", "cn", "ru", "info"];

// Domain-fold of the identifying inputs into rng seed material; stable by
// construction, unlike the stdlib hasher.
fn fnv64(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn case_rng(kind: CaseKind, seed: u64, params: &BTreeMap<String, String>) -> ChaCha8Rng {
    let canonical: String = params
        .iter()
        .map(|(k, v)| format!("{k}={v};"))
        .collect();
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&fnv64(&kind.to_string()).to_le_bytes());
    bytes[16..24].copy_from_slice(&fnv64(&canonical).to_le_bytes());
    bytes[24..32].copy_from_slice(b"linkveil");
    ChaCha8Rng::from_seed(bytes)
}

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS[rng.random_range(0..WORDS.len())]
}

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

fn ident(rng: &mut ChaCha8Rng) -> String {
    format!("{}{}", word(rng), rng.random_range(100..1000))
}

fn href(rng: &mut ChaCha8Rng) -> String {
    format!(
        "http://{}{}.{}/{}",
        word(rng),
        rng.random_range(10..100),
        TLDS[rng.random_range(0..TLDS.len())],
        word(rng)
    )
}

/// A light page background and its hex form: every channel at or above 200,
/// far from any dark decoy text.
fn light_color(rng: &mut ChaCha8Rng) -> String {
    format!(
        "#{:02x}{:02x}{:02x}",
        rng.random_range(200..=255u16) as u8,
        rng.random_range(200..=255u16) as u8,
        rng.random_range(200..=255u16) as u8
    )
}

fn dark_color(rng: &mut ChaCha8Rng) -> String {
    format!(
        "#{:02x}{:02x}{:02x}",
        rng.random_range(0..=90u16) as u8,
        rng.random_range(0..=90u16) as u8,
        rng.random_range(0..=90u16) as u8
    )
}

/// Nudges one channel of `#rrggbb` by 1..=delta_max, clamped to stay a
/// valid channel; the result differs from the input.
fn near_color(rng: &mut ChaCha8Rng, hex: &str, delta_max: u8) -> String {
    let mut ch = [
        u8::from_str_radix(&hex[1..3], 16).unwrap(),
        u8::from_str_radix(&hex[3..5], 16).unwrap(),
        u8::from_str_radix(&hex[5..7], 16).unwrap(),
    ];
    let i = rng.random_range(0..3);
    let delta = rng.random_range(1..=delta_max.max(1));
    ch[i] = if ch[i] >= 128 {
        ch[i] - delta
    } else {
        ch[i] + delta
    };
    format!("#{:02x}{:02x}{:02x}", ch[0], ch[1], ch[2])
}

struct PageParts {
    head_extra: String,
    body: String,
    planted: Vec<PlantedLink>,
}

/// Builds the deterministic page for one case.
pub fn generate_case(
    kind: CaseKind,
    seed: u64,
    params: &BTreeMap<String, String>,
) -> Result<GroundTruthCase, CaseError> {
    for key in params.keys() {
        if key != "variant" && key != "extra" {
            return Err(CaseError::UnknownParam(key.clone(), kind));
        }
    }
    let mut rng = case_rng(kind, seed, params);
    let mut parts = match kind {
        CaseKind::Control => control_parts(&mut rng),
        CaseKind::Technique(t) => technique_parts(t, &mut rng, params)?,
    };
    if let Some(extra) = params.get("extra") {
        let t: TechniqueLabel = extra
            .parse()
            .map_err(|_| CaseError::BadParam {
                key: "extra".to_string(),
                value: extra.clone(),
            })?;
        if !matches!(
            t,
            TechniqueLabel::A
                | TechniqueLabel::B
                | TechniqueLabel::C
                | TechniqueLabel::E
                | TechniqueLabel::F
                | TechniqueLabel::G
        ) {
            return Err(CaseError::BadParam {
                key: "extra".to_string(),
                value: extra.clone(),
            });
        }
        let second = technique_parts(t, &mut rng, &BTreeMap::new())?;
        parts.head_extra.push_str(&second.head_extra);
        parts.body.push_str(&second.body);
        parts.planted.extend(second.planted);
    }
    let title = words(&mut rng, 3);
    let page = format!(
        "<html>\n<head>\n<title>{title}</title>\n{}</head>\n<body>\n<h1>{}</h1>\n<p>{}.</p>\n{}\n<p>{}.</p>\n</body>\n</html>\n",
        parts.head_extra,
        words(&mut rng, 2),
        words(&mut rng, 7),
        parts.body,
        words(&mut rng, 6),
    );
    Ok(GroundTruthCase {
        kind,
        page_bytes: page.into_bytes(),
        planted_links: parts.planted,
        seed,
        params: params.clone(),
    })
}

fn plain(href: &str, text: &str) -> String {
    format!(r#"<a href="{href}">{text}</a>"#)
}

fn planted_one(href: String, expected: Vec<TechniqueLabel>) -> Vec<PlantedLink> {
    vec![PlantedLink { href, expected }]
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn chosen_variant(
    rng: &mut ChaCha8Rng,
    params: &BTreeMap<String, String>,
    options: &[&'static str],
) -> Result<&'static str, CaseError> {
    match params.get("variant") {
        None => Ok(pick(rng, options)),
        Some(v) => options
            .iter()
            .copied()
            .find(|o| o == v)
            .ok_or_else(|| CaseError::BadParam {
                key: "variant".to_string(),
                value: v.clone(),
            }),
    }
}

fn technique_parts(
    t: TechniqueLabel,
    rng: &mut ChaCha8Rng,
    params: &BTreeMap<String, String>,
) -> Result<PageParts, CaseError> {
    let target = href(rng);
    let text = words(rng, 2);
    let mut head_extra = String::new();
    let body;
    let mut planted = planted_one(target.clone(), vec![t]);
    match t {
        TechniqueLabel::A => {
            let bg = light_color(rng);
            body = format!(
                r#"<div style="background-color:{bg}"><a href="{target}" style="color:{bg}">{text}</a></div>"#
            );
        }
        TechniqueLabel::B => {
            let bg = light_color(rng);
            let fg = near_color(rng, &bg, 18);
            body = format!(
                r#"<div style="background-color:{bg}"><a href="{target}" style="color:{fg}">{text}</a></div>"#
            );
        }
        TechniqueLabel::C => {
            let variant = chosen_variant(rng, params, &["font", "font-div", "box", "marquee"])?;
            let px = rng.random_range(0..=1);
            let side = rng.random_range(1..=2);
            body = match variant {
                "font" => format!(
                    r#"<a href="{target}" style="font-size:{px}px">{text}</a>"#
                ),
                "font-div" => format!(
                    r#"<div style="font-size:{px}px"><a href="{target}">{text}</a></div>"#
                ),
                "box" => format!(
                    r#"<div style="width:{side}px;height:{side}px"><a href="{target}">{text}</a></div>"#
                ),
                _ => format!(
                    r#"<marquee scrollamount={} width={side} height={side}><a href="{target}">{text}</a></marquee>"#,
                    rng.random_range(1..=5)
                ),
            };
        }
        TechniqueLabel::D => {
            let color = dark_color(rng);
            // Two of the three disguise signals always on; the third by coin.
            let handler = if rng.random_range(0..2) == 0 {
                r#" onmouseover="window.status='';return true;""#
            } else {
                ""
            };
            body = format!(
                r#"<p style="color:{color}">{} <a href="{target}" style="color:{color};text-decoration:none;cursor:text"{handler}>{text}</a> {}.</p>"#,
                words(rng, 4),
                words(rng, 5),
            );
        }
        TechniqueLabel::E => {
            let amount = rng.random_range(50..=5000);
            body = format!(
                r#"<marquee scrollamount={amount}><a href="{target}">{text}</a></marquee>"#
            );
        }
        TechniqueLabel::F => {
            let variant = chosen_variant(rng, params, &["left", "top", "indent", "margin"])?;
            let off = -rng.random_range(500..=5000);
            body = match variant {
                "left" => format!(
                    r#"<div style="position:absolute;left:{off}px">{}</div>"#,
                    plain(&target, &text)
                ),
                "top" => format!(
                    r#"<div style="position:absolute;top:{off}px;left:0">{}</div>"#,
                    plain(&target, &text)
                ),
                "indent" => format!(
                    r#"<div style="text-indent:{}px">{}</div>"#,
                    off - 5000,
                    plain(&target, &text)
                ),
                _ => format!(
                    r#"<div style="margin-left:{}px">{}</div>"#,
                    off - 5000,
                    plain(&target, &text)
                ),
            };
        }
        TechniqueLabel::G => {
            let variant = chosen_variant(rng, params, &["visibility", "display", "class"])?;
            match variant {
                "visibility" => {
                    body = format!(
                        r#"<div style="visibility:hidden">{}</div>"#,
                        plain(&target, &text)
                    );
                }
                "display" => {
                    body = format!(
                        r#"<div style="display:none">{}</div>"#,
                        plain(&target, &text)
                    );
                }
                _ => {
                    let class = ident(rng);
                    head_extra = format!(
                        "<style>.{class} {{ visibility: hidden; }}</style>\n"
                    );
                    body = format!(
                        r#"<div class="{class}">{}</div>"#,
                        plain(&target, &text)
                    );
                }
            }
        }
        TechniqueLabel::H => {
            let variant = chosen_variant(rng, params, &["plain", "concat", "hex-eval", "array"])?;
            let id = ident(rng);
            let script = hide_script(rng, variant, &id);
            body = format!(
                "<div id=\"{id}\">{}</div>\n<script type=\"text/javascript\">\n{script}\n</script>",
                plain(&target, &text)
            );
        }
        TechniqueLabel::I => {
            let away = href(rng);
            let variant = chosen_variant(rng, params, &["meta", "href", "replace"])?;
            match variant {
                "meta" => {
                    head_extra = format!(
                        "<meta http-equiv=\"refresh\" content=\"0;url={away}\">\n"
                    );
                    body = plain(&target, &text);
                }
                "href" => {
                    body = format!(
                        "{}\n<script>location.href = \"{away}\";</script>",
                        plain(&target, &text)
                    );
                }
                _ => {
                    body = format!(
                        "{}\n<script>window.location.replace(\"{away}\");</script>",
                        plain(&target, &text)
                    );
                }
            }
        }
        TechniqueLabel::J => {
            let variant = chosen_variant(rng, params, &["hover", "clip"])?;
            let id = ident(rng);
            match variant {
                "hover" => {
                    head_extra = format!(
                        "<style>#{id} ul {{ display:none }} #{id}:hover ul {{ display:block }}</style>\n"
                    );
                    let mut items = String::new();
                    for _ in 0..rng.random_range(2..=5) {
                        items.push_str(&format!("<li>{}</li>", words(rng, 2)));
                    }
                    body = format!(
                        "<div id=\"{id}\">{}<ul>{items}<li>{}</li></ul></div>",
                        word(rng),
                        plain(&target, &text)
                    );
                    // Resting state is display:none, so the style rule fires
                    // alongside the menu rule.
                    planted = planted_one(target.clone(), vec![TechniqueLabel::G, t]);
                }
                _ => {
                    let total = rng.random_range(20..=30);
                    let planted_at = rng.random_range(3..total);
                    let mut items = String::new();
                    for i in 0..total {
                        if i == planted_at {
                            items.push_str(&format!("<li>{}</li>", plain(&target, &text)));
                        } else {
                            items.push_str(&format!("<li>{}</li>", words(rng, 2)));
                        }
                    }
                    body = format!(
                        r#"<div style="overflow:hidden;height:20px;width:240px"><ul>{items}</ul></div>"#
                    );
                    // The buried entry is also fully overflow-clipped, which
                    // is layer burial in its own right.
                    planted = planted_one(target.clone(), vec![t, TechniqueLabel::L]);
                }
            }
        }
        TechniqueLabel::K => {
            let variant = chosen_variant(rng, params, &["title", "keywords", "description"])?;
            let token = format!(
                "www.{}{}.{}",
                word(rng),
                rng.random_range(10..100),
                TLDS[rng.random_range(0..TLDS.len())]
            );
            planted = planted_one(token.clone(), vec![t]);
            match variant {
                "title" => {
                    // Second title on the page; every title is scanned, and
                    // the skeleton's own stays short and token-free.
                    let mut pad = words(rng, 3);
                    while pad.chars().count() < 85 {
                        pad.push(' ');
                        pad.push_str(word(rng));
                    }
                    head_extra = format!("<title>{pad} {token}</title>\n");
                    body = format!("<p>{}.</p>", words(rng, 5));
                }
                "keywords" => {
                    head_extra = format!(
                        "<meta name=\"keywords\" content=\"{}, {token}, {}\">\n",
                        words(rng, 2),
                        word(rng)
                    );
                    body = format!("<p>{}.</p>", words(rng, 5));
                }
                _ => {
                    head_extra = format!(
                        "<meta name=\"description\" content=\"{} {token} {}\">\n",
                        words(rng, 3),
                        words(rng, 2)
                    );
                    body = format!("<p>{}.</p>", words(rng, 5));
                }
            }
        }
        TechniqueLabel::L => {
            let variant = chosen_variant(rng, params, &["cover", "clip"])?;
            match variant {
                "cover" => {
                    let z = rng.random_range(1..=5);
                    let shade = light_color(rng);
                    body = format!(
                        "<div style=\"position:absolute;z-index:{z};width:420px;height:220px;background-color:{shade}\"><p>{}</p></div>\n<div style=\"position:absolute;z-index:{}\">{}</div>",
                        words(rng, 3),
                        -rng.random_range(1..=3),
                        plain(&target, &text)
                    );
                }
                _ => {
                    let id = ident(rng);
                    head_extra = format!(
                        "<style>#{id}{{width:99px;height:20px;overflow:hidden;}} #{id} a{{display:block;line-height:20px;}}</style>\n"
                    );
                    body = format!(
                        "<div id=\"{id}\"><span style=\"display:block;line-height:20px\">&#160;</span>{}</div>",
                        plain(&target, &text)
                    );
                }
            }
        }
    }
    Ok(PageParts {
        head_extra,
        body,
        planted,
    })
}

/// The four script shapes that end in the same hide statement.
fn hide_script(rng: &mut ChaCha8Rng, variant: &str, id: &str) -> String {
    let statement = format!(
        "document.getElementById(\"{id}\").style.display = \"none\";"
    );
    match variant {
        "plain" => statement,
        "concat" => {
            let cut1 = 1 + rng.random_range(0..id.len() - 1);
            let (a, b) = id.split_at(cut1);
            format!(
                "document.getElementById(\"{a}\" + \"{b}\").style.display = \"no\" + \"ne\";"
            )
        }
        "hex-eval" => {
            let payload: String = statement
                .trim_end_matches(';')
                .bytes()
                .map(|b| format!("{b:02x}"))
                .collect();
            let func = format!("decode{}", word(rng));
            format!(
                "function {func}(s){{\nvar r='';\nfor(var i=0;i<s.length;i+=2){{\nvar c=parseInt(s.substring(i,i+2),16);\nr+=String.fromCharCode(c);}}\nreturn r;}}\neval({func}(\"{payload}\"));"
            )
        }
        _ => {
            let parts = ["display", "none", id, "style", "getElementById"];
            let quoted: Vec<String> = parts
                .iter()
                .map(|p| {
                    let hex: String = p.bytes().map(|b| format!("\\x{b:02x}")).collect();
                    format!("\"{hex}\"")
                })
                .collect();
            format!(
                "var _xa= [{}];\ndocument[_xa[4]](_xa[2])[_xa[3]][_xa[0]]=_xa[1];",
                quoted.join(",\n")
            )
        }
    }
}

/// Ordinary page: visible links, a short list, below-the-fold content, and a
/// fitted overflow box — the shapes a detector must not trip on.
fn control_parts(rng: &mut ChaCha8Rng) -> PageParts {
    let mut body = String::new();
    for _ in 0..rng.random_range(2..=4) {
        body.push_str(&format!(
            "<p>{} {} {}.</p>\n",
            words(rng, 5),
            plain(&href(rng), word(rng)),
            words(rng, 4)
        ));
    }
    let mut items = String::new();
    for _ in 0..rng.random_range(3..=8) {
        items.push_str(&format!("<li>{}</li>", plain(&href(rng), word(rng))));
    }
    body.push_str(&format!("<ul>{items}</ul>\n"));
    body.push_str(&format!(
        r#"<div style="overflow:hidden;height:40px"><p>{}</p></div>"#,
        words(rng, 3)
    ));
    body.push_str(&format!(
        "\n<div style=\"height:{}px\">{}</div>\n<p>{}</p>",
        rng.random_range(1500..3000),
        words(rng, 4),
        plain(&href(rng), word(rng))
    ));
    let head_extra = format!(
        "<meta name=\"description\" content=\"{}\">\n",
        words(rng, 6)
    );
    PageParts {
        head_extra,
        body,
        planted: Vec::new(),
    }
}

/// How many cases of each kind a corpus holds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusSpec {
    pub counts: BTreeMap<CaseKind, usize>,
}

impl CorpusSpec {
    /// `per_technique` cases for each of A..L plus `controls` clean pages.
    pub fn uniform(per_technique: usize, controls: usize) -> CorpusSpec {
        let mut counts = BTreeMap::new();
        for t in TechniqueLabel::ALL {
            counts.insert(CaseKind::Technique(t), per_technique);
        }
        counts.insert(CaseKind::Control, controls);
        CorpusSpec { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// One manifest line per generated file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub technique: CaseKind,
    pub planted: Vec<PlantedLink>,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// Writes every case under `out_dir` plus a manifest; deterministic from
/// `seed`. Returns the manifest entries in written order.
pub fn generate_corpus(
    spec: &CorpusSpec,
    seed: u64,
    out_dir: &Path,
) -> io::Result<Vec<ManifestEntry>> {
    fs::create_dir_all(out_dir)?;
    let mut entries = Vec::new();
    for (&kind, &count) in &spec.counts {
        for i in 0..count {
            let case_seed = seed
                .wrapping_mul(1_000_003)
                .wrapping_add(fnv64(&kind.to_string()))
                .wrapping_add(i as u64);
            let case = generate_case(kind, case_seed, &BTreeMap::new())
                .expect("fixed kinds and empty params cannot fail");
            let name = format!("{kind}-{i:04}.html");
            fs::write(out_dir.join(&name), &case.page_bytes)?;
            entries.push(ManifestEntry {
                path: name,
                technique: kind,
                planted: case.planted_links,
                seed: case_seed,
                params: case.params,
            });
        }
    }
    let mut manifest = fs::File::create(out_dir.join(MANIFEST_NAME))?;
    for entry in &entries {
        let line = serde_json::to_string(entry).expect("manifest entries serialize");
        writeln!(manifest, "{line}")?;
    }
    Ok(entries)
}

/// Reads back a manifest written by [`generate_corpus`].
pub fn read_manifest(path: &Path) -> io::Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), idx + 1),
            )
        })?;
        out.push(entry);
    }
    Ok(out)
}

/// Case paths for a scan, resolved against the manifest's directory.
pub fn manifest_paths(manifest_path: &Path, entries: &[ManifestEntry]) -> Vec<PathBuf> {
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    entries.iter().map(|e| dir.join(&e.path)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DetectorConfig;
    use crate::detect::{classify_page, NoStylesheets, PageResult};
    use crate::dom::{extract_links, parse_document};

    fn classify_case(case: &GroundTruthCase) -> PageResult {
        classify_page(
            &case.page_bytes,
            "case.html",
            None,
            &NoStylesheets,
            &DetectorConfig::default(),
        )
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let params = BTreeMap::new();
        for t in TechniqueLabel::ALL {
            let a = generate_case(CaseKind::Technique(t), 42, &params).unwrap();
            let b = generate_case(CaseKind::Technique(t), 42, &params).unwrap();
            assert_eq!(a.page_bytes, b.page_bytes, "technique {t}");
            let c = generate_case(CaseKind::Technique(t), 43, &params).unwrap();
            assert_ne!(a.page_bytes, c.page_bytes, "seed must matter for {t}");
        }
    }

    #[test]
    fn every_technique_case_recalls() {
        for t in TechniqueLabel::ALL {
            for seed in 0..8 {
                let case = generate_case(CaseKind::Technique(t), seed, &BTreeMap::new()).unwrap();
                let result = classify_case(&case);
                for planted in &case.planted_links {
                    for expected in &planted.expected {
                        let hit = result.findings.iter().any(|f| {
                            f.technique == *expected && f.link.href_raw == planted.href
                        });
                        assert!(
                            hit,
                            "technique {t} seed {seed}: expected {expected} on {:?}\nfindings: {:#?}\npage:\n{}",
                            planted.href,
                            result.findings,
                            String::from_utf8_lossy(&case.page_bytes)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn controls_are_clean() {
        for seed in 0..25 {
            let case = generate_case(CaseKind::Control, seed, &BTreeMap::new()).unwrap();
            assert!(case.planted_links.is_empty());
            let result = classify_case(&case);
            assert!(
                result.findings.is_empty(),
                "control seed {seed} misfired: {:#?}\npage:\n{}",
                result.findings,
                String::from_utf8_lossy(&case.page_bytes)
            );
        }
    }

    #[test]
    fn planted_links_round_trip_through_extraction() {
        for t in TechniqueLabel::ALL {
            if t == TechniqueLabel::K {
                continue; // K plants metadata tokens, not anchors
            }
            let case = generate_case(CaseKind::Technique(t), 5, &BTreeMap::new()).unwrap();
            let doc = parse_document(&case.page_bytes, None);
            let extracted: Vec<String> = extract_links(&doc, None)
                .into_iter()
                .map(|l| l.href_raw)
                .collect();
            let planted: Vec<String> =
                case.planted_links.iter().map(|p| p.href.clone()).collect();
            assert_eq!(extracted, planted, "technique {t}");
        }
    }

    #[test]
    fn h_variants_all_recall_and_differ() {
        let mut sources = Vec::new();
        for variant in ["plain", "concat", "hex-eval", "array"] {
            let params =
                BTreeMap::from([("variant".to_string(), variant.to_string())]);
            let case = generate_case(CaseKind::Technique(TechniqueLabel::H), 9, &params).unwrap();
            let result = classify_case(&case);
            assert!(
                result.techniques_present.contains(&TechniqueLabel::H),
                "variant {variant}: {:#?}",
                result.findings
            );
            sources.push(String::from_utf8(case.page_bytes).unwrap());
        }
        for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                assert_ne!(sources[i], sources[j]);
            }
        }
    }

    #[test]
    fn extra_param_stacks_a_second_technique() {
        let params = BTreeMap::from([("extra".to_string(), "F".to_string())]);
        let case = generate_case(CaseKind::Technique(TechniqueLabel::A), 3, &params).unwrap();
        assert_eq!(case.planted_links.len(), 2);
        let result = classify_case(&case);
        assert!(result.techniques_present.contains(&TechniqueLabel::A));
        assert!(result.techniques_present.contains(&TechniqueLabel::F));
    }

    #[test]
    fn bad_params_are_rejected() {
        let bogus = BTreeMap::from([("flavor".to_string(), "x".to_string())]);
        assert!(matches!(
            generate_case(CaseKind::Control, 0, &bogus),
            Err(CaseError::UnknownParam(..))
        ));
        let bad_variant = BTreeMap::from([("variant".to_string(), "zzz".to_string())]);
        assert!(matches!(
            generate_case(CaseKind::Technique(TechniqueLabel::H), 0, &bad_variant),
            Err(CaseError::BadParam { .. })
        ));
        assert!("Q".parse::<CaseKind>().is_err());
        assert_eq!("control".parse::<CaseKind>().unwrap(), CaseKind::Control);
    }

    #[test]
    fn corpus_writes_files_and_manifest() {
        let dir = std::env::temp_dir().join(format!("lv-corpus-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let spec = CorpusSpec::uniform(2, 5);
        let entries = generate_corpus(&spec, 77, &dir).unwrap();
        assert_eq!(entries.len(), 12 * 2 + 5);
        let files: Vec<_> = fs::read_dir(&dir).unwrap().collect();
        assert_eq!(files.len(), entries.len() + 1); // + manifest
        let manifest = read_manifest(&dir.join(MANIFEST_NAME)).unwrap();
        assert_eq!(manifest, entries);
        for path in manifest_paths(&dir.join(MANIFEST_NAME), &manifest) {
            assert!(path.exists(), "{}", path.display());
        }

        // Same seed, fresh directory: identical bytes everywhere.
        let dir2 = dir.with_extension("again");
        let _ = fs::remove_dir_all(&dir2);
        let entries2 = generate_corpus(&spec, 77, &dir2).unwrap();
        assert_eq!(entries, entries2);
        for e in &entries {
            assert_eq!(
                fs::read(dir.join(&e.path)).unwrap(),
                fs::read(dir2.join(&e.path)).unwrap()
            );
        }
        let _ = fs::remove_dir_all(&dir);
        let _ = fs::remove_dir_all(&dir2);
    }

    #[test]
    fn zero_spec_writes_manifest_only() {
        let dir = std::env::temp_dir().join(format!("lv-empty-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let entries = generate_corpus(&CorpusSpec::default(), 1, &dir).unwrap();
        assert!(entries.is_empty());
        let names: Vec<_> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from(MANIFEST_NAME)]);
        let _ = fs::remove_dir_all(&dir);
    }
}
