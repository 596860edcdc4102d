//! Static cascade over inline `style` attributes and user-agent defaults.
//! There are no stylesheets in exported notebooks, so the computed style
//! of an element depends only on its ancestors.

use std::collections::HashMap;

use ego_tree::NodeId;
use scraper::{ElementRef, Html};

use super::color::{parse_css_color, Rgb, Rgba};
use crate::htmlexport::Palette;

pub const ROOT_FONT_PX: f64 = 16.0;
const LARGE_PX: f64 = 24.0;
const LARGE_BOLD_PX: f64 = 18.66;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Computed {
    /// Inherited text colour, possibly translucent.
    pub color: Rgba,
    /// Opaque colour painted behind the element.
    pub backdrop: Rgb,
    /// Some ancestor (or the element) paints a background image, so the
    /// backdrop colour is only a guess.
    pub over_image: bool,
    pub font_px: f64,
    pub bold: bool,
    pub underlined: bool,
    /// The element draws a bottom border, a non-colour link cue.
    pub border_cue: bool,
    pub hidden: bool,
    pub aria_hidden: bool,
}

impl Computed {
    pub fn root(palette: &Palette) -> Self {
        Computed {
            color: Rgba::opaque(palette.fg_text),
            backdrop: palette.page_bg,
            over_image: false,
            font_px: ROOT_FONT_PX,
            bold: false,
            underlined: false,
            border_cue: false,
            hidden: false,
            aria_hidden: false,
        }
    }

    pub fn text_color(&self) -> Rgb {
        self.color.over(self.backdrop)
    }

    pub fn is_large_text(&self) -> bool {
        self.font_px >= LARGE_PX || (self.bold && self.font_px >= LARGE_BOLD_PX)
    }

    /// WCAG AA minimum for text of this size.
    pub fn required_ratio(&self) -> f64 {
        if self.is_large_text() {
            3.0
        } else {
            4.5
        }
    }
}

/// `(property, value)` pairs of a `style` attribute, properties lowercased.
pub fn declarations(style: &str) -> Vec<(String, String)> {
    style
        .split(';')
        .filter_map(|decl| {
            let (p, v) = decl.split_once(':')?;
            let v = v.trim().trim_end_matches("!important").trim();
            Some((p.trim().to_ascii_lowercase(), v.to_string()))
        })
        .filter(|(p, v)| !p.is_empty() && !v.is_empty())
        .collect()
}

fn font_size(value: &str, parent: f64) -> Option<f64> {
    let v = value.trim().to_ascii_lowercase();
    let keyword = match v.as_str() {
        "xx-small" => Some(9.0),
        "x-small" => Some(10.0),
        "small" => Some(13.0),
        "medium" => Some(16.0),
        "large" => Some(18.0),
        "x-large" => Some(24.0),
        "xx-large" => Some(32.0),
        "smaller" => Some(parent / 1.2),
        "larger" => Some(parent * 1.2),
        _ => None,
    };
    if keyword.is_some() {
        return keyword;
    }
    let units: [(&str, f64); 5] = [("rem", ROOT_FONT_PX), ("px", 1.0), ("pt", 4.0 / 3.0), ("em", parent), ("%", parent / 100.0)];
    units.iter().find_map(|(unit, scale)| {
        let n: f64 = v.strip_suffix(unit)?.trim().parse().ok()?;
        (n.is_finite() && n >= 0.0).then_some(n * scale)
    })
}

fn font_weight_bold(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "bold" | "bolder" => Some(true),
        "normal" | "lighter" => Some(false),
        n => n.parse::<f64>().ok().map(|w| w >= 600.0),
    }
}

fn border_visible(value: &str) -> bool {
    let v = value.to_ascii_lowercase();
    !(v.contains("none") || v.contains("hidden") || v.split_whitespace().any(|t| t == "0" || t == "0px"))
}

fn default_font_scale(tag: &str) -> f64 {
    match tag {
        "h1" => 2.0,
        "h2" => 1.5,
        "h3" => 1.17,
        "h5" => 0.83,
        "h6" => 0.67,
        "pre" | "code" | "kbd" | "samp" | "tt" => 0.8125,
        "small" => 1.0 / 1.2,
        _ => 1.0,
    }
}

fn default_bold(tag: &str) -> bool {
    matches!(tag, "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "b" | "strong" | "th")
}

const NEVER_RENDERED: &[&str] = &["head", "script", "style", "template", "noscript", "title", "meta", "link"];

/// The style of `el` given its parent's computed style.
pub fn compute(el: ElementRef<'_>, parent: &Computed, palette: &Palette) -> Computed {
    let e = el.value();
    let tag = e.name();
    let mut c = Computed {
        border_cue: false,
        font_px: parent.font_px * default_font_scale(tag),
        bold: parent.bold || default_bold(tag),
        ..*parent
    };
    if tag == "a" && e.attr("href").is_some() {
        c.color = Rgba::opaque(palette.link);
        c.underlined = true;
    }
    if matches!(tag, "u" | "ins") {
        c.underlined = true;
    }
    if NEVER_RENDERED.contains(&tag) || e.attr("hidden").is_some() {
        c.hidden = true;
    }
    if e.attr("aria-hidden").is_some_and(|v| v.trim().eq_ignore_ascii_case("true")) {
        c.aria_hidden = true;
    }
    let Some(style) = e.attr("style") else {
        return c;
    };
    for (prop, value) in declarations(style) {
        match prop.as_str() {
            "color" => {
                if let Some(col) = parse_css_color(&value) {
                    c.color = col;
                } else if value.eq_ignore_ascii_case("inherit") {
                    c.color = parent.color;
                }
            }
            "background-color" => {
                if let Some(col) = parse_css_color(&value) {
                    c.backdrop = col.over(c.backdrop);
                }
            }
            "background" => {
                let lower = value.to_ascii_lowercase();
                if lower.contains("url(") || lower.contains("gradient(") {
                    c.over_image = true;
                }
                let col = parse_css_color(&value)
                    .or_else(|| value.split_whitespace().find_map(parse_css_color));
                if let Some(col) = col {
                    c.backdrop = col.over(c.backdrop);
                }
            }
            "background-image" => {
                if !value.eq_ignore_ascii_case("none") {
                    c.over_image = true;
                }
            }
            "font-size" => {
                if let Some(px) = font_size(&value, parent.font_px) {
                    c.font_px = px;
                }
            }
            "font-weight" => {
                if let Some(b) = font_weight_bold(&value) {
                    c.bold = b;
                }
            }
            "font" => {
                for tok in value.split_whitespace() {
                    if let Some(b) = font_weight_bold(tok) {
                        c.bold = b;
                    } else if let Some(px) = font_size(tok.split('/').next().unwrap_or(tok), parent.font_px) {
                        c.font_px = px;
                    }
                }
            }
            "text-decoration" | "text-decoration-line" => {
                let v = value.to_ascii_lowercase();
                if v.contains("underline") {
                    c.underlined = true;
                } else if v.split_whitespace().next() == Some("none") {
                    // Decorations propagate from ancestors and cannot be
                    // removed by descendants; `none` only drops our own.
                    c.underlined = parent.underlined;
                }
            }
            "border-bottom" | "border" => c.border_cue = border_visible(&value),
            "display" if value.eq_ignore_ascii_case("none") => c.hidden = true,
            "visibility" if value.eq_ignore_ascii_case("hidden") => c.hidden = true,
            _ => {}
        }
    }
    c
}

/// Computed styles for every element, plus each element's preorder rank.
pub struct StyleMap {
    pub styles: HashMap<NodeId, Computed>,
    pub order: HashMap<NodeId, usize>,
}

impl StyleMap {
    pub fn build(doc: &Html, palette: &Palette) -> StyleMap {
        let mut styles = HashMap::new();
        let mut order = HashMap::new();
        let root = doc.root_element();
        let mut stack = vec![(root, Computed::root(palette))];
        let mut rank = 0usize;
        // Depth-first with children pushed in reverse gives preorder.
        while let Some((el, parent)) = stack.pop() {
            let c = compute(el, &parent, palette);
            styles.insert(el.id(), c);
            order.insert(el.id(), rank);
            rank += 1;
            let children: Vec<ElementRef> = el.children().filter_map(ElementRef::wrap).collect();
            for child in children.into_iter().rev() {
                stack.push((child, c));
            }
        }
        StyleMap { styles, order }
    }

    pub fn get(&self, el: ElementRef<'_>) -> Computed {
        self.styles[&el.id()]
    }

    pub fn rank(&self, el: ElementRef<'_>) -> usize {
        self.order[&el.id()]
    }
}
