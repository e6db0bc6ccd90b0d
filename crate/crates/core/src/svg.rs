//! Minimal SVG writer and a strict reader for the same dialect.
//!
//! A document is a header line, one `<path>` line per wall and a closing
//! `</svg>` line, all LF-terminated:
//!
//! ```text
//! <svg xmlns="http://www.w3.org/2000/svg" width="W" height="H" viewBox="0 0 W H">
//! <path d="M x0 y0 H x1 V y1 H x0 Z" fill="#000000"/>
//! </svg>
//! ```

use std::fmt::Write as _;

use crate::error::SvgParseError;
use crate::postprocess::VectorPlan;
use crate::wallfit::WallRect;

const SVG_NS: &str = "http://www.w3.org/2000/svg";

/// Serialized SVG text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SvgDocument {
    pub text: String,
}

impl SvgDocument {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Number of `<path` elements in the document.
    pub fn path_count(&self) -> usize {
        self.text.matches("<path").count()
    }
}

pub fn to_svg(plan: &VectorPlan) -> SvgDocument {
    let (w, h) = (plan.canvas_width, plan.canvas_height);
    let mut text = String::with_capacity(96 + 56 * plan.walls.len());
    let _ = writeln!(text, r#"<svg xmlns="{SVG_NS}" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for r in &plan.walls {
        let _ = writeln!(text, r##"<path d="M {} {} H {} V {} H {} Z" fill="#000000"/>"##, r.x0, r.y0, r.x1, r.y1, r.x0);
    }
    text.push_str("</svg>\n");
    SvgDocument { text }
}

fn error(line: usize, message: impl Into<String>) -> SvgParseError {
    SvgParseError { line, message: message.into() }
}

fn number(tok: Option<&str>, line: usize) -> Result<u32, SvgParseError> {
    let tok = tok.ok_or_else(|| error(line, "truncated path data"))?;
    tok.parse().map_err(|_| error(line, format!("expected a non-negative integer, found `{tok}`")))
}

fn parse_header(text: &str) -> Result<(u32, u32), SvgParseError> {
    let rest = text
        .strip_prefix(&format!(r#"<svg xmlns="{SVG_NS}" width=""#))
        .ok_or_else(|| error(1, "expected the <svg> header"))?;
    let (w, rest) = rest.split_once('"').ok_or_else(|| error(1, "unterminated width"))?;
    let rest = rest.strip_prefix(r#" height=""#).ok_or_else(|| error(1, "expected height attribute"))?;
    let (h, rest) = rest.split_once('"').ok_or_else(|| error(1, "unterminated height"))?;
    let w: u32 = w.parse().map_err(|_| error(1, format!("invalid width `{w}`")))?;
    let h: u32 = h.parse().map_err(|_| error(1, format!("invalid height `{h}`")))?;
    if rest != format!(r#" viewBox="0 0 {w} {h}">"#) {
        return Err(error(1, "viewBox must be `0 0 width height` and close the header"));
    }
    Ok((w, h))
}

fn parse_path(text: &str, line: usize, canvas: (u32, u32)) -> Result<WallRect, SvgParseError> {
    let body = text
        .strip_prefix(r#"<path d=""#)
        .and_then(|s| s.strip_suffix(r##"" fill="#000000"/>"##))
        .ok_or_else(|| error(line, "expected `<path d=\"...\" fill=\"#000000\"/>`"))?;
    let mut tokens = body.split(' ');
    if tokens.next() != Some("M") {
        return Err(error(line, "path data must start with `M`"));
    }
    let x0 = number(tokens.next(), line)?;
    let y0 = number(tokens.next(), line)?;
    if tokens.next() != Some("H") {
        return Err(error(line, "expected `H` after the start point"));
    }
    let x1 = number(tokens.next(), line)?;
    if tokens.next() != Some("V") {
        return Err(error(line, "expected `V`"));
    }
    let y1 = number(tokens.next(), line)?;
    if tokens.next() != Some("H") {
        return Err(error(line, "expected closing `H`"));
    }
    let back = number(tokens.next(), line)?;
    if tokens.next() != Some("Z") || tokens.next().is_some() {
        return Err(error(line, "path must end with `Z`"));
    }
    if back != x0 {
        return Err(error(line, "path does not return to its starting x"));
    }
    let rect = WallRect::new(x0, y0, x1, y1);
    if !rect.fits_in(canvas.0 as usize, canvas.1 as usize) {
        return Err(error(line, "wall is empty or lies outside the canvas"));
    }
    Ok(rect)
}

/// Reads a document written by [`to_svg`]. Anything outside that dialect
/// (other elements, attributes such as `transform`, reversed rectangles) is
/// rejected with the offending line number.
pub fn parse_svg(doc: &SvgDocument) -> Result<VectorPlan, SvgParseError> {
    let mut lines = doc.text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| error(1, "empty document"))?;
    let (w, h) = parse_header(header)?;
    let mut walls = Vec::new();
    let mut last = 1;
    for (n, text) in lines.by_ref() {
        last = n;
        if text == "</svg>" {
            for (n, rest) in lines {
                if !rest.is_empty() {
                    return Err(error(n, "content after </svg>"));
                }
            }
            return Ok(VectorPlan::new(w, h, walls));
        }
        walls.push(parse_path(text, n, (w, h))?);
    }
    Err(error(last, "missing </svg>"))
}
