//! Token stream for the analyzed JavaScript subset. HTML comment guards
//! (`<!--`, `-->`) inside script bodies are skipped like whitespace.

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    Keyword(&'static str),
    Str { value: String, had_hex: bool },
    Num(f64),
    Punct(&'static str),
}

const KEYWORDS: &[&str] = &["var", "let", "const", "function", "return", "for", "if", "else"];

const PUNCTS: &[&str] = &[
    "===", "!==", "==", "!=", "<=", ">=", "++", "--", "+=", "-=", "*=", "/=", "&&", "||", "(",
    ")", "[", "]", "{", "}", ";", ",", ".", "=", "+", "-", "*", "/", "%", "<", ">", "!", "?",
    ":",
];

/// Flags reported alongside a decoded string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeFlags {
    pub had_hex: bool,
    pub malformed: bool,
}

/// Decodes `\xNN` and two-hex-digit `\NN` escapes (plus the ordinary
/// single-character ones); anything malformed is left verbatim and flagged.
pub fn decode_string_escapes(s: &str) -> String {
    decode_string_escapes_checked(s).0
}

pub fn decode_string_escapes_checked(s: &str) -> (String, DecodeFlags) {
    let mut out = String::with_capacity(s.len());
    let mut flags = DecodeFlags::default();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c != '\\' || i + 1 >= chars.len() {
            out.push(c);
            i += 1;
            continue;
        }
        let next = chars[i + 1];
        match next {
            'n' => {
                out.push('\n');
                i += 2;
            }
            't' => {
                out.push('\t');
                i += 2;
            }
            'r' => {
                out.push('\r');
                i += 2;
            }
            '0' if i + 2 >= chars.len() || !chars[i + 2].is_ascii_hexdigit() => {
                out.push('\0');
                i += 2;
            }
            '\\' | '\'' | '"' | '/' => {
                out.push(next);
                i += 2;
            }
            'x' => match hex_pair(&chars, i + 2) {
                Some(b) => {
                    out.push(b as char);
                    flags.had_hex = true;
                    i += 4;
                }
                None => {
                    out.push('\\');
                    out.push('x');
                    flags.malformed = true;
                    i += 2;
                }
            },
            'u' => match hex_quad(&chars, i + 2) {
                Some(cp) => {
                    out.push(cp);
                    flags.had_hex = true;
                    i += 6;
                }
                None => {
                    out.push('\\');
                    out.push('u');
                    flags.malformed = true;
                    i += 2;
                }
            },
            d if d.is_ascii_digit() => match hex_pair(&chars, i + 1) {
                // digit-led \NN with two hex digits, e.g. the \69 spelling of 'i'
                Some(b) => {
                    out.push(b as char);
                    flags.had_hex = true;
                    i += 3;
                }
                None => {
                    out.push('\\');
                    out.push(d);
                    flags.malformed = true;
                    i += 2;
                }
            },
            other => {
                out.push('\\');
                out.push(other);
                flags.malformed = true;
                i += 2;
            }
        }
    }
    (out, flags)
}

fn hex_pair(chars: &[char], at: usize) -> Option<u8> {
    if at + 1 >= chars.len() {
        return None;
    }
    let hi = chars[at].to_digit(16)?;
    let lo = chars[at + 1].to_digit(16)?;
    Some((hi * 16 + lo) as u8)
}

fn hex_quad(chars: &[char], at: usize) -> Option<char> {
    if at + 3 >= chars.len() {
        return None;
    }
    let mut v = 0u32;
    for c in &chars[at..at + 4] {
        v = v * 16 + c.to_digit(16)?;
    }
    char::from_u32(v)
}

pub(super) fn lex(src: &str) -> Vec<Tok> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    'outer: while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            i = src[i + 2..].find("*/").map_or(b.len(), |p| i + 2 + p + 2);
            continue;
        }
        if src[i..].starts_with("<!--") {
            i += 4;
            continue;
        }
        if src[i..].starts_with("-->") {
            i += 3;
            continue;
        }
        if c == b'"' || c == b'\'' {
            let quote = c;
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j] != quote {
                if b[j] == b'\\' && j + 1 < b.len() {
                    j += 1;
                }
                j += 1;
            }
            let (value, flags) = decode_string_escapes_checked(&src[start..j.min(b.len())]);
            toks.push(Tok::Str {
                value,
                had_hex: flags.had_hex,
            });
            i = (j + 1).min(b.len());
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            if src[i..].starts_with("0x") || src[i..].starts_with("0X") {
                let start = i + 2;
                let mut j = start;
                while j < b.len() && b[j].is_ascii_hexdigit() {
                    j += 1;
                }
                let v = u64::from_str_radix(&src[start..j], 16).unwrap_or(0);
                toks.push(Tok::Num(v as f64));
                i = j;
                continue;
            }
            let start = i;
            let mut j = i;
            let mut seen_dot = false;
            while j < b.len() && (b[j].is_ascii_digit() || (b[j] == b'.' && !seen_dot)) {
                seen_dot |= b[j] == b'.';
                j += 1;
            }
            let v: f64 = src[start..j].parse().unwrap_or(0.0);
            toks.push(Tok::Num(v));
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            let start = i;
            let mut j = i;
            while j < b.len()
                && (b[j].is_ascii_alphanumeric() || b[j] == b'_' || b[j] == b'$')
            {
                j += 1;
            }
            let word = &src[start..j];
            if let Some(kw) = KEYWORDS.iter().find(|k| **k == word) {
                toks.push(Tok::Keyword(kw));
            } else {
                toks.push(Tok::Ident(word.to_string()));
            }
            i = j;
            continue;
        }
        for p in PUNCTS {
            if src[i..].starts_with(p) {
                toks.push(Tok::Punct(p));
                i += p.len();
                continue 'outer;
            }
        }
        // unknown byte: skip, statement-level recovery handles the rest
        i += 1;
    }
    toks
}
