use std::path::PathBuf;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Cell, MimePayload, Notebook, OutputBundle};
use crate::{altpng, markdown};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Png,
    Jpeg,
    Gif,
    Bmp,
    Svg,
    /// Markdown references whose format cannot be told from the path.
    Unknown,
}

impl ImageFormat {
    pub fn from_mime(mime: &str) -> Option<ImageFormat> {
        match mime.to_ascii_lowercase().as_str() {
            "image/png" => Some(ImageFormat::Png),
            "image/jpeg" | "image/jpg" => Some(ImageFormat::Jpeg),
            "image/gif" => Some(ImageFormat::Gif),
            "image/bmp" => Some(ImageFormat::Bmp),
            "image/svg+xml" => Some(ImageFormat::Svg),
            _ => None,
        }
    }

    pub fn from_path(path: &str) -> ImageFormat {
        let path = path.split(['?', '#']).next().unwrap_or(path);
        let ext = path.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("png") => ImageFormat::Png,
            Some("jpg") | Some("jpeg") => ImageFormat::Jpeg,
            Some("gif") => ImageFormat::Gif,
            Some("bmp") => ImageFormat::Bmp,
            Some("svg") => ImageFormat::Svg,
            _ => ImageFormat::Unknown,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Jpeg => "jpg",
            ImageFormat::Gif => "gif",
            ImageFormat::Bmp => "bmp",
            ImageFormat::Svg => "svg",
            ImageFormat::Unknown => "bin",
        }
    }

    pub fn mime(self) -> &'static str {
        match self {
            ImageFormat::Png => "image/png",
            ImageFormat::Jpeg => "image/jpeg",
            ImageFormat::Gif => "image/gif",
            ImageFormat::Bmp => "image/bmp",
            ImageFormat::Svg => "image/svg+xml",
            ImageFormat::Unknown => "application/octet-stream",
        }
    }

    /// Whether `bytes` start with this raster format's signature. SVG and
    /// unknown formats always match.
    pub fn matches_magic(self, bytes: &[u8]) -> bool {
        match self {
            ImageFormat::Png => bytes.starts_with(b"\x89PNG\r\n\x1a\n"),
            ImageFormat::Jpeg => bytes.starts_with(&[0xFF, 0xD8, 0xFF]),
            ImageFormat::Gif => bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a"),
            ImageFormat::Bmp => bytes.starts_with(b"BM"),
            ImageFormat::Svg | ImageFormat::Unknown => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Programmatic,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageArtifact {
    pub notebook_path: PathBuf,
    pub cell_index: usize,
    pub format: ImageFormat,
    /// Decoded image (UTF-8 text for SVG). Empty for unresolved markdown
    /// references.
    #[serde(skip)]
    pub bytes: Vec<u8>,
    pub provenance: Provenance,
    pub alt_text: Option<String>,
    /// MIME key of the payload (programmatic images only).
    pub mime: Option<String>,
    /// Output position inside the cell (programmatic images only).
    pub output_index: Option<usize>,
    /// Markdown destination (markdown images only).
    pub reference: Option<String>,
    /// Markdown image pointing at an external path that was not fetched.
    pub unresolved: bool,
    pub decode_error: Option<String>,
}

impl ImageArtifact {
    pub fn has_alt(&self) -> bool {
        self.alt_text.as_deref().is_some_and(|a| !a.trim().is_empty())
    }
}

pub(crate) fn decode_base64(payload: &str) -> Result<Vec<u8>, base64::DecodeError> {
    let compact: String = payload.chars().filter(|c| !c.is_ascii_whitespace()).collect();
    base64::engine::general_purpose::STANDARD.decode(compact)
}

/// Alt text supplied through output metadata: either a top-level `alt`
/// key or an `alt` key inside the per-MIME metadata.
pub(crate) fn metadata_alt(out: &OutputBundle, mime: &str) -> Option<String> {
    let direct = out.metadata.get("alt").and_then(Value::as_str);
    let nested = out
        .metadata
        .get(mime)
        .and_then(|m| m.get("alt"))
        .and_then(Value::as_str);
    nested.or(direct).map(str::to_string)
}

/// Decoded bytes of one image payload and any error met on the way.
pub(crate) fn decode_image_payload(
    format: ImageFormat,
    payload: &MimePayload,
) -> (Vec<u8>, Option<String>) {
    let text = match payload {
        MimePayload::Text(t) => t.as_str(),
        MimePayload::Json(_) => return (Vec::new(), Some("image payload is not a string".into())),
    };
    if format == ImageFormat::Svg {
        return (text.as_bytes().to_vec(), None);
    }
    match decode_base64(text) {
        Ok(bytes) if bytes.is_empty() => (bytes, Some("empty image payload".into())),
        Ok(bytes) => {
            let err = (!format.matches_magic(&bytes))
                .then(|| format!("payload is not a valid {}", format.mime()));
            (bytes, err)
        }
        Err(e) => (Vec::new(), Some(format!("base64 decode failure: {e}"))),
    }
}

fn programmatic_images(nb: &Notebook, cell: &Cell, out: &mut Vec<ImageArtifact>) {
    for (output_index, bundle) in cell.outputs.iter().enumerate() {
        for (mime, payload) in &bundle.mime_payloads {
            let Some(format) = ImageFormat::from_mime(mime).or_else(|| {
                mime.starts_with("image/").then_some(ImageFormat::Unknown)
            }) else {
                continue;
            };
            let (bytes, decode_error) = decode_image_payload(format, payload);
            let mut alt_text = metadata_alt(bundle, mime);
            if alt_text.is_none() && format == ImageFormat::Png && decode_error.is_none() {
                alt_text = altpng::extract_alt(&bytes).ok().flatten();
            }
            out.push(ImageArtifact {
                notebook_path: nb.path.clone(),
                cell_index: cell.index,
                format,
                bytes,
                provenance: Provenance::Programmatic,
                alt_text,
                mime: Some(mime.clone()),
                output_index: Some(output_index),
                reference: None,
                unresolved: false,
                decode_error,
            });
        }
    }
}

fn markdown_images(nb: &Notebook, cell: &Cell, out: &mut Vec<ImageArtifact>) {
    for img in markdown::summarize(&cell.source).images {
        let mut artifact = ImageArtifact {
            notebook_path: nb.path.clone(),
            cell_index: cell.index,
            format: ImageFormat::from_path(&img.dest),
            bytes: Vec::new(),
            provenance: Provenance::Markdown,
            alt_text: Some(img.alt),
            mime: None,
            output_index: None,
            reference: Some(img.dest.clone()),
            unresolved: false,
            decode_error: None,
        };
        if let Some(name) = img.dest.strip_prefix("attachment:") {
            match cell.attachments.get(name).and_then(|b| {
                b.iter().find(|(m, _)| m.starts_with("image/"))
            }) {
                Some((mime, data)) => {
                    artifact.format = ImageFormat::from_mime(mime).unwrap_or(ImageFormat::Unknown);
                    let (bytes, err) =
                        decode_image_payload(artifact.format, &MimePayload::Text(data.clone()));
                    artifact.bytes = bytes;
                    artifact.decode_error = err;
                }
                None => artifact.unresolved = true,
            }
        } else if let Some((mime, data)) = parse_data_uri(&img.dest) {
            artifact.format = ImageFormat::from_mime(&mime).unwrap_or(ImageFormat::Unknown);
            let (bytes, err) = decode_image_payload(artifact.format, &MimePayload::Text(data));
            artifact.bytes = bytes;
            artifact.decode_error = err;
        } else {
            artifact.unresolved = true;
        }
        out.push(artifact);
    }
}

/// `data:<mime>;base64,<payload>` → (mime, payload).
pub(crate) fn parse_data_uri(uri: &str) -> Option<(String, String)> {
    let rest = uri.strip_prefix("data:")?;
    let (head, data) = rest.split_once(',')?;
    let mime = head.strip_suffix(";base64")?;
    Some((mime.to_string(), data.to_string()))
}

/// One artifact per image MIME payload in code-cell outputs, followed in
/// cell order by one per markdown image reference.
pub fn extract_images(nb: &Notebook) -> Vec<ImageArtifact> {
    let mut out = Vec::new();
    for cell in &nb.cells {
        match cell.kind {
            super::CellKind::Code => programmatic_images(nb, cell, &mut out),
            super::CellKind::Markdown => markdown_images(nb, cell, &mut out),
            super::CellKind::Raw => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbmodel::{CellKind, OutputKind};

    const TINY_PNG: &str = "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8DwHwAFBQIAX8jx0gAAAABJRU5ErkJggg==";

    fn code_cell_with(index: usize, payloads: &[(&str, &str)]) -> Cell {
        let mut cell = Cell::new(index, CellKind::Code, "plot()");
        let mut out = OutputBundle::new(OutputKind::DisplayData);
        for (m, p) in payloads {
            out.mime_payloads.insert(m.to_string(), MimePayload::Text(p.to_string()));
        }
        cell.outputs.push(out);
        cell
    }

    #[test]
    fn png_output_without_alt() {
        let nb = Notebook::new("n.ipynb", vec![code_cell_with(1, &[("image/png", TINY_PNG)])]);
        let imgs = extract_images(&nb);
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].provenance, Provenance::Programmatic);
        assert_eq!(imgs[0].format, ImageFormat::Png);
        assert!(imgs[0].alt_text.is_none());
        assert!(imgs[0].decode_error.is_none());
        assert!(!imgs[0].bytes.is_empty());
    }

    #[test]
    fn each_image_payload_is_one_artifact() {
        let nb = Notebook::new(
            "n.ipynb",
            vec![code_cell_with(
                1,
                &[("image/png", TINY_PNG), ("image/svg+xml", "<svg/>"), ("text/plain", "<Figure>")],
            )],
        );
        assert_eq!(extract_images(&nb).len(), 2);
    }

    #[test]
    fn metadata_alt_is_used() {
        let mut cell = code_cell_with(1, &[("image/png", TINY_PNG)]);
        cell.outputs[0]
            .metadata
            .insert("image/png".into(), serde_json::json!({"alt": "a bar chart"}));
        let nb = Notebook::new("n.ipynb", vec![cell]);
        assert_eq!(extract_images(&nb)[0].alt_text.as_deref(), Some("a bar chart"));
    }

    #[test]
    fn markdown_badge_alt() {
        let nb = Notebook::new(
            "n.ipynb",
            vec![Cell::new(1, CellKind::Markdown, "![Open In Colab](badge.svg)")],
        );
        let imgs = extract_images(&nb);
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].provenance, Provenance::Markdown);
        assert_eq!(imgs[0].alt_text.as_deref(), Some("Open In Colab"));
        assert_eq!(imgs[0].format, ImageFormat::Svg);
        assert!(imgs[0].unresolved);
        assert!(imgs[0].bytes.is_empty());
    }

    #[test]
    fn attachment_images_resolve() {
        let mut cell = Cell::new(1, CellKind::Markdown, "![dot](attachment:dot.png)");
        cell.attachments.insert(
            "dot.png".into(),
            [("image/png".to_string(), TINY_PNG.to_string())].into_iter().collect(),
        );
        let imgs = extract_images(&Notebook::new("n.ipynb", vec![cell]));
        assert!(!imgs[0].unresolved);
        assert_eq!(imgs[0].format, ImageFormat::Png);
        assert!(imgs[0].bytes.starts_with(b"\x89PNG"));
    }

    #[test]
    fn bad_base64_is_recorded_not_fatal() {
        let nb = Notebook::new(
            "n.ipynb",
            vec![
                code_cell_with(1, &[("image/png", "!!!not base64!!!")]),
                code_cell_with(2, &[("image/png", TINY_PNG)]),
            ],
        );
        let imgs = extract_images(&nb);
        assert_eq!(imgs.len(), 2);
        assert!(imgs[0].decode_error.is_some());
        assert!(imgs[1].decode_error.is_none());
    }

    #[test]
    fn no_outputs_no_images() {
        let nb = Notebook::new("n.ipynb", vec![Cell::new(1, CellKind::Code, "x = 1")]);
        assert!(extract_images(&nb).is_empty());
    }
}
