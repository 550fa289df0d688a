use std::fmt;

use super::viridis_data::VIRIDIS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn from_unit(c: [f64; 3]) -> Self {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgb(q(c[0]), q(c[1]), q(c[2]))
    }

    /// Relative luminance, used to pick a readable text colour.
    pub fn luma(self) -> f64 {
        (0.2126 * self.0 as f64 + 0.7152 * self.1 as f64 + 0.0722 * self.2 as f64) / 255.0
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }
}

/// Class 0 / outcome S.
pub const TEAL: Rgb = Rgb(0x00, 0x80, 0x80);
/// Class 1 / outcome NR.
pub const MAGENTA: Rgb = Rgb(0xFF, 0x00, 0xFF);
/// Outcome F.
pub const CYAN: Rgb = Rgb(0x00, 0xFF, 0xFF);

/// Viridis at `t` in [0, 1], linearly interpolated between the 256 table
/// entries. Values outside the range are clamped.
pub fn viridis(t: f64) -> [f64; 3] {
    let pos = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) * 255.0 };
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(255);
    let f = pos - lo as f64;
    let (a, b) = (VIRIDIS[lo], VIRIDIS[hi]);
    [0, 1, 2].map(|k| a[k] + (b[k] - a[k]) * f)
}
