//! Detection thresholds and scan-wide settings.
//!
//! Every cutoff the detector relies on lives here so a scan can be tuned
//! without touching rule code. The config is echoed verbatim into every
//! report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thresholds and viewport used by the detection rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Maximum RGB distance at which a font color "almost matches" the
    /// background (technique B). Exact match (distance 0) is technique A.
    pub tau_color: f64,
    /// Font sizes at or below this many pixels count as invisible text.
    pub tau_tiny_font: f64,
    /// Boxes with both width and height at or below this count as tiny.
    pub tau_tiny_px: f64,
    /// Marquee scrollamount at or above this is too fast to read.
    pub tau_scroll: f64,
    /// Entry count at or above which a collapsed list is a buried menu.
    pub tau_menu: usize,
    /// Title characters beyond this offset are outside the displayed prefix.
    pub tau_title: usize,
    /// Overflow-clipped fraction at or above which a link counts as covered.
    pub clip_cutoff: f64,
    /// Viewport width in CSS pixels.
    pub viewport_w: f64,
    /// Viewport height in CSS pixels.
    pub viewport_h: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            tau_color: 32.0,
            tau_tiny_font: 1.0,
            tau_tiny_px: 2.0,
            tau_scroll: 50.0,
            tau_menu: 20,
            tau_title: 80,
            clip_cutoff: 0.99,
            viewport_w: 1024.0,
            viewport_h: 768.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {value:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
}

impl DetectorConfig {
    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_lines(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: trimmed.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            self.set(key, value).map_err(|bad| match bad {
                SetError::UnknownKey => ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                },
                SetError::BadValue => ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                },
            })?;
        }
        Ok(())
    }

    /// Sets a single threshold by key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        fn f64_of(value: &str) -> Result<f64, SetError> {
            value.parse::<f64>().map_err(|_| SetError::BadValue)
        }
        fn usize_of(value: &str) -> Result<usize, SetError> {
            value.parse::<usize>().map_err(|_| SetError::BadValue)
        }
        match key {
            "tau_color" => self.tau_color = f64_of(value)?,
            "tau_tiny_font" => self.tau_tiny_font = f64_of(value)?,
            "tau_tiny_px" => self.tau_tiny_px = f64_of(value)?,
            "tau_scroll" => self.tau_scroll = f64_of(value)?,
            "tau_menu" => self.tau_menu = usize_of(value)?,
            "tau_title" => self.tau_title = usize_of(value)?,
            "clip_cutoff" => self.clip_cutoff = f64_of(value)?,
            "viewport_w" => self.viewport_w = f64_of(value)?,
            "viewport_h" => self.viewport_h = f64_of(value)?,
            _ => return Err(SetError::UnknownKey),
        }
        Ok(())
    }

    /// Every threshold as a `(key, value)` pair, in the order [`set`] knows
    /// them; values round-trip through `set`.
    ///
    /// [`set`]: DetectorConfig::set
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tau_color", self.tau_color.to_string()),
            ("tau_tiny_font", self.tau_tiny_font.to_string()),
            ("tau_tiny_px", self.tau_tiny_px.to_string()),
            ("tau_scroll", self.tau_scroll.to_string()),
            ("tau_menu", self.tau_menu.to_string()),
            ("tau_title", self.tau_title.to_string()),
            ("clip_cutoff", self.clip_cutoff.to_string()),
            ("viewport_w", self.viewport_w.to_string()),
            ("viewport_h", self.viewport_h.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetError {
    UnknownKey,
    BadValue,
}
