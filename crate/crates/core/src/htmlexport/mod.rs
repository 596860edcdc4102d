//! Standalone themed HTML export.
//!
//! Documents use inline styles only, so the scanner can resolve every
//! color without a stylesheet engine. The DOM produced for a notebook
//! does not depend on the theme; only color values inside `style`
//! attributes change.

mod corpus;
mod highlight;
mod theme;

use std::collections::HashMap;
use std::path::PathBuf;

use base64::Engine;
use pulldown_cmark::{Event, Tag};
use serde::{Deserialize, Serialize};

use crate::htmlutil::{escape_attr, escape_text, sanitize_fragment_styled};
use crate::markdown;
use crate::nbmodel::{
    extract_images, Cell, CellKind, ImageArtifact, MimePayload, Notebook, OutputBundle, OutputKind,
    Provenance,
};

pub use corpus::{export_corpus, sha1_hex, write_manifest, ManifestEntry};
pub use highlight::{highlight_python, tokenize, TokenClass};
pub use theme::{Palette, Theme, ThemeError, THEME_DIR_ENV, THEME_NAMES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlDocument {
    pub html: String,
    pub theme: String,
    pub source_notebook: PathBuf,
}

impl HtmlDocument {
    pub fn as_bytes(&self) -> &[u8] {
        self.html.as_bytes()
    }
}

/// Removes ANSI escape sequences (CSI, OSC and two-byte escapes).
pub fn strip_ansi(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\u{1b}' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('[') => {
                for d in chars.by_ref() {
                    if ('\u{40}'..='\u{7e}').contains(&d) {
                        break;
                    }
                }
            }
            Some(']') => {
                while let Some(d) = chars.next() {
                    if d == '\u{7}' {
                        break;
                    }
                    if d == '\u{1b}' && chars.peek() == Some(&'\\') {
                        chars.next();
                        break;
                    }
                }
            }
            _ => {}
        }
    }
    out
}

struct Renderer<'a> {
    palette: &'a Palette,
    images: HashMap<(usize, usize, &'a str), &'a ImageArtifact>,
}

impl Renderer<'_> {
    fn style_for(&self, tag: &str) -> Option<String> {
        let p = self.palette;
        match tag {
            "a" => Some(format!("color:{};text-decoration:none", p.link)),
            "table" => Some(format!("border-collapse:collapse;border:1px solid {}", p.table_border)),
            "th" => Some(format!(
                "background-color:{};border:1px solid {};padding:4px 8px",
                p.table_header_bg, p.table_border
            )),
            "td" => Some(format!("border:1px solid {};padding:4px 8px", p.table_border)),
            _ => None,
        }
    }

    fn html_fragment(&self, html: &str, out: &mut String) {
        out.push_str(&sanitize_fragment_styled(html, &|tag| self.style_for(tag)));
    }

    fn markdown(&self, src: &str, cell: Option<&Cell>, out: &mut String) {
        let events = markdown::parser(src).map(|ev| match ev {
            Event::Start(Tag::Image { link_type, dest_url, title, id }) => {
                let resolved = dest_url
                    .strip_prefix("attachment:")
                    .and_then(|name| cell?.attachments.get(name))
                    .and_then(|bundle| bundle.iter().find(|(m, _)| m.starts_with("image/")))
                    .map(|(mime, data)| {
                        let data: String = data.chars().filter(|c| !c.is_whitespace()).collect();
                        format!("data:{mime};base64,{data}").into()
                    });
                Event::Start(Tag::Image {
                    link_type,
                    dest_url: resolved.unwrap_or(dest_url),
                    title,
                    id,
                })
            }
            other => other,
        });
        let mut html = String::new();
        pulldown_cmark::html::push_html(&mut html, events);
        self.html_fragment(&html, out);
    }

    fn pre(&self, text: &str, out: &mut String) {
        out.push_str("<pre style=\"margin:0;padding:4px 8px;white-space:pre-wrap\">");
        escape_text(&strip_ansi(text), out);
        out.push_str("</pre>");
    }

    fn placeholder(&self, label: &str, out: &mut String) {
        out.push_str("<div class=\"output-placeholder\" style=\"font-style:italic;padding:4px 8px\">[");
        escape_text(label, out);
        out.push_str("]</div>");
    }

    fn image(&self, artifact: &ImageArtifact, out: &mut String) {
        if artifact.decode_error.is_some() || artifact.bytes.is_empty() {
            self.placeholder("image could not be decoded", out);
            return;
        }
        let data = base64::engine::general_purpose::STANDARD.encode(&artifact.bytes);
        out.push_str("<img src=\"data:");
        out.push_str(artifact.mime.as_deref().unwrap_or(artifact.format.mime()));
        out.push_str(";base64,");
        out.push_str(&data);
        out.push('"');
        if let Some(alt) = &artifact.alt_text {
            out.push_str(" alt=\"");
            escape_attr(alt, out);
            out.push('"');
        }
        out.push_str(" style=\"max-width:100%\">");
    }

    fn output(&self, cell: &Cell, index: usize, bundle: &OutputBundle, out: &mut String) {
        match bundle.output_kind {
            OutputKind::Stream => return self.pre(bundle.text.as_deref().unwrap_or_default(), out),
            OutputKind::Error => {
                let text = bundle
                    .error
                    .as_ref()
                    .map(|e| {
                        if e.traceback.is_empty() {
                            format!("{}: {}", e.ename, e.evalue)
                        } else {
                            e.traceback.join("\n")
                        }
                    })
                    .unwrap_or_default();
                return self.pre(&text, out);
            }
            OutputKind::ExecuteResult | OutputKind::DisplayData => {}
        }
        let images: Vec<&str> = bundle
            .mime_payloads
            .keys()
            .filter(|m| m.starts_with("image/"))
            .map(String::as_str)
            .collect();
        if !images.is_empty() {
            for mime in images {
                match self.images.get(&(cell.index, index, mime)) {
                    Some(a) => self.image(a, out),
                    None => self.placeholder("image could not be decoded", out),
                }
            }
            return;
        }
        let text = |m: &str| bundle.mime_payloads.get(m).map(|p| match p {
            MimePayload::Text(s) => s.clone(),
            MimePayload::Json(v) => v.to_string(),
        });
        if let Some(html) = text("text/html") {
            self.html_fragment(&html, out);
        } else if let Some(md) = text("text/markdown") {
            self.markdown(&md, None, out);
        } else if let Some(latex) = text("text/latex") {
            self.pre(&latex, out);
        } else if let Some(plain) = text("text/plain") {
            self.pre(&plain, out);
        } else if let Some(mime) = bundle.mime_payloads.keys().next() {
            self.placeholder(&format!("{mime} output not rendered"), out);
        }
    }

    fn cell(&self, cell: &Cell, out: &mut String) {
        let kind = match cell.kind {
            CellKind::Code => "code",
            CellKind::Markdown => "markdown",
            CellKind::Raw => "raw",
        };
        out.push_str(&format!(
            "<div class=\"cell cell-{kind}\" id=\"cell-{}\" style=\"padding:8px\">",
            cell.index
        ));
        match cell.kind {
            CellKind::Markdown => self.markdown(&cell.source, Some(cell), out),
            CellKind::Code => {
                out.push_str(&format!(
                    "<pre style=\"background-color:{};color:{};margin:0;padding:8px;overflow-x:auto\"><code>",
                    self.palette.cell_bg, self.palette.fg_text
                ));
                highlight_python(&cell.source, self.palette, out);
                out.push_str("</code></pre>");
                if !cell.outputs.is_empty() {
                    out.push_str("<div class=\"outputs\">");
                    for (i, bundle) in cell.outputs.iter().enumerate() {
                        self.output(cell, i, bundle, out);
                    }
                    out.push_str("</div>");
                }
            }
            // Raw cells are not rendered, matching common converters.
            CellKind::Raw => {}
        }
        out.push_str("</div>\n");
    }
}

/// Renders a notebook as one standalone HTML document.
pub fn export_html(nb: &Notebook, theme: &Theme) -> HtmlDocument {
    let artifacts = extract_images(nb);
    let images = artifacts
        .iter()
        .filter(|a| a.provenance == Provenance::Programmatic)
        .filter_map(|a| Some(((a.cell_index, a.output_index?, a.mime.as_deref()?), a)))
        .collect();
    let r = Renderer { palette: &theme.palette, images };
    let p = &theme.palette;

    let mut out = String::with_capacity(nb.raw_size_bytes as usize + 1024);
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>");
    escape_text(&nb.stem(), &mut out);
    out.push_str("</title>\n</head>\n");
    out.push_str(&format!(
        "<body style=\"margin:0;padding:16px;background-color:{};color:{};font-family:sans-serif;font-size:16px;line-height:1.5\">\n<main>\n",
        p.page_bg, p.fg_text
    ));
    for cell in &nb.cells {
        r.cell(cell, &mut out);
    }
    out.push_str("</main>\n</body>\n</html>\n");
    HtmlDocument {
        html: out,
        theme: theme.name.clone(),
        source_notebook: nb.path.clone(),
    }
}
