//! Color values and the RGB distance metric.

/// An sRGB color. Alpha is carried but ignored by the distance metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorValue {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: f64,
}

impl ColorValue {
    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        ColorValue { r, g, b, a: 1.0 }
    }

    pub const WHITE: ColorValue = ColorValue::rgb(255, 255, 255);
    pub const BLACK: ColorValue = ColorValue::rgb(0, 0, 0);

    /// Parses `#rgb`, `#rrggbb`, `rgb()/rgba()`, and common color names.
    /// Returns None for `transparent` and anything unrecognized.
    pub fn parse(input: &str) -> Option<ColorValue> {
        let s = input.trim().to_ascii_lowercase();
        if let Some(hex) = s.strip_prefix('#') {
            return parse_hex(hex);
        }
        if let Some(args) = s
            .strip_prefix("rgba(")
            .or_else(|| s.strip_prefix("rgb("))
            .and_then(|rest| rest.strip_suffix(')'))
        {
            return parse_rgb_args(args);
        }
        named(&s)
    }

    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

fn parse_hex(hex: &str) -> Option<ColorValue> {
    let digits: Vec<u8> = hex
        .chars()
        .map(|c| c.to_digit(16).map(|d| d as u8))
        .collect::<Option<Vec<u8>>>()?;
    match digits.len() {
        3 => Some(ColorValue::rgb(
            digits[0] * 17,
            digits[1] * 17,
            digits[2] * 17,
        )),
        6 => Some(ColorValue::rgb(
            digits[0] * 16 + digits[1],
            digits[2] * 16 + digits[3],
            digits[4] * 16 + digits[5],
        )),
        _ => None,
    }
}

fn parse_rgb_args(args: &str) -> Option<ColorValue> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if parts.len() != 3 && parts.len() != 4 {
        return None;
    }
    let chan = |s: &str| -> Option<u8> {
        let v: f64 = s.parse().ok()?;
        Some(v.clamp(0.0, 255.0).round() as u8)
    };
    let (r, g, b) = (chan(parts[0])?, chan(parts[1])?, chan(parts[2])?);
    let a = if parts.len() == 4 {
        parts[3].parse::<f64>().ok()?.clamp(0.0, 1.0)
    } else {
        1.0
    };
    Some(ColorValue { r, g, b, a })
}

fn named(name: &str) -> Option<ColorValue> {
    let (r, g, b) = match name {
        "aqua" | "cyan" => (0, 255, 255),
        "black" => (0, 0, 0),
        "blue" => (0, 0, 255),
        "fuchsia" | "magenta" => (255, 0, 255),
        "gray" | "grey" => (128, 128, 128),
        "green" => (0, 128, 0),
        "lime" => (0, 255, 0),
        "maroon" => (128, 0, 0),
        "navy" => (0, 0, 128),
        "olive" => (128, 128, 0),
        "orange" => (255, 165, 0),
        "purple" => (128, 0, 128),
        "red" => (255, 0, 0),
        "silver" => (192, 192, 192),
        "teal" => (0, 128, 128),
        "white" => (255, 255, 255),
        "yellow" => (255, 255, 0),
        "beige" => (245, 245, 220),
        "ivory" => (255, 255, 240),
        "snow" => (255, 250, 250),
        "whitesmoke" => (245, 245, 245),
        "ghostwhite" => (248, 248, 255),
        "linen" => (250, 240, 230),
        "lightgray" | "lightgrey" => (211, 211, 211),
        "darkgray" | "darkgrey" => (169, 169, 169),
        _ => return None,
    };
    Some(ColorValue::rgb(r, g, b))
}

/// Euclidean distance in RGB space: √((Δr)²+(Δg)²+(Δb)²).
pub fn color_distance(c1: ColorValue, c2: ColorValue) -> f64 {
    let dr = c1.r as f64 - c2.r as f64;
    let dg = c1.g as f64 - c2.g as f64;
    let db = c1.b as f64 - c2.b as f64;
    (dr * dr + dg * dg + db * db).sqrt()
}
