use std::fmt::Write;

use super::color::Rgb;

/// Two decimals, never `-0.00`.
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub(crate) struct Svg {
    buf: String,
}

impl Svg {
    pub fn new(width: u32, height: u32, comment: Option<&str>) -> Self {
        let mut buf = String::new();
        buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        );
        if let Some(c) = comment {
            let _ = writeln!(buf, "<!-- {} -->", c.replace("--", "- -"));
        }
        let _ = writeln!(buf, "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#FFFFFF\"/>");
        Svg { buf }
    }

    pub fn open_group(&mut self, attrs: &str) {
        let _ = writeln!(self.buf, "<g {attrs}>");
    }

    pub fn close_group(&mut self) {
        self.buf.push_str("</g>\n");
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: Rgb, extra: &str) {
        let _ = writeln!(
            self.buf,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"{extra}/>",
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: Rgb, extra: &str) {
        let _ = writeln!(
            self.buf,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"{extra}/>",
            num(cx),
            num(cy),
            num(r)
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: Rgb, width: f64) {
        let _ = writeln!(
            self.buf,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(width)
        );
    }

    /// `anchor` is start, middle or end.
    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, fill: Rgb, s: &str) {
        let _ = writeln!(
            self.buf,
            "<text x=\"{}\" y=\"{}\" font-family=\"Times New Roman, serif\" font-size=\"{}\" text-anchor=\"{anchor}\" fill=\"{fill}\">{}</text>",
            num(x),
            num(y),
            num(size),
            escape(s)
        );
    }

    pub fn rotated_text(&mut self, x: f64, y: f64, size: f64, s: &str) {
        let _ = writeln!(
            self.buf,
            "<text x=\"{0}\" y=\"{1}\" font-family=\"Times New Roman, serif\" font-size=\"{2}\" text-anchor=\"middle\" fill=\"#000000\" transform=\"rotate(-90 {0} {1})\">{3}</text>",
            num(x),
            num(y),
            num(size),
            escape(s)
        );
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_escaping() {
        assert_eq!(num(-0.001), "0.00");
        assert_eq!(num(1.005), "1.00");
        assert_eq!(num(2.5), "2.50");
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn comment_cannot_close_early() {
        let s = Svg::new(10, 10, Some("x --> y")).finish();
        assert!(s.contains("<!-- x - -> y -->"));
    }
}
