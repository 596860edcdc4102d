use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MimeCategory {
    Application,
    Image,
    Text,
}

impl MimeCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            MimeCategory::Application => "Application",
            MimeCategory::Image => "Image",
            MimeCategory::Text => "Text",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MimeClass {
    pub category: MimeCategory,
    pub label: String,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MimeError {
    #[error("invalid MIME type `{0}`")]
    InvalidMime(String),
}

/// The output types observed in notebook corpora, with their display labels.
/// The two Bokeh bundles share a label, as do the two JPEG spellings.
const KNOWN: &[(&str, MimeCategory, &str)] = &[
    ("text/plain", MimeCategory::Text, "Plain"),
    ("image/png", MimeCategory::Image, "PNG"),
    ("text/html", MimeCategory::Text, "HTML"),
    ("application/javascript", MimeCategory::Application, "Javascript"),
    ("application/vnd.jupyter.widget-view+json", MimeCategory::Application, "Jupyter JSON Widget"),
    ("text/markdown", MimeCategory::Text, "Markdown"),
    ("image/svg+xml", MimeCategory::Image, "SVG"),
    ("application/vnd.plotly.v1+json", MimeCategory::Application, "Plotly v1 + JSON"),
    ("text/latex", MimeCategory::Text, "LaTeX"),
    ("text/vnd.plotly.v1+html", MimeCategory::Text, "Plotly v1 + HTML"),
    ("image/jpeg", MimeCategory::Image, "JPEG/JPG"),
    ("image/jpg", MimeCategory::Image, "JPEG/JPG"),
    ("application/vnd.bokehjs_exec.v0+json", MimeCategory::Application, "BokehJS + JSON"),
    ("application/pdf", MimeCategory::Application, "PDF"),
    ("application/vdom.v1+json", MimeCategory::Application, "VDOM.v1 + JSON"),
    ("application/vnd.bokehjs_load.v0+json", MimeCategory::Application, "BokehJS + JSON"),
    ("application/papermill.record+json", MimeCategory::Application, "Papermill + JSON"),
    ("application/vnd.holoviews_load.v0+json", MimeCategory::Application, "Holoviews Load + JSON"),
    ("application/vnd.holoviews_exec.v0+json", MimeCategory::Application, "Holoviews Exec + JSON"),
    ("application/json", MimeCategory::Application, "JSON"),
    (
        "application/vnd.google.colaboratory.intrinsic+json",
        MimeCategory::Application,
        "Colaboratory Intrinsic",
    ),
];

pub const OTHER_LABEL: &str = "Other";

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes().all(|b| {
            b.is_ascii_alphanumeric() || b"!#$&^_.+-".contains(&b)
        })
}

/// `type "/" subtype`, both RFC 6838 restricted names.
pub fn is_valid_mime(s: &str) -> bool {
    match s.split_once('/') {
        Some((ty, sub)) => is_token(ty) && is_token(sub),
        None => false,
    }
}

/// Maps a MIME type onto the (category, label) taxonomy. Unknown subtypes
/// fall into the `Other` bucket of the category implied by their prefix;
/// prefixes other than `image/` and `text/` count as application types.
pub fn classify_mime(mime: &str) -> Result<MimeClass, MimeError> {
    let mime = mime.trim();
    if !is_valid_mime(mime) {
        return Err(MimeError::InvalidMime(mime.to_string()));
    }
    let lower = mime.to_ascii_lowercase();
    if let Some((_, category, label)) = KNOWN.iter().find(|(m, _, _)| *m == lower) {
        return Ok(MimeClass {
            category: *category,
            label: (*label).to_string(),
        });
    }
    let category = match lower.split('/').next() {
        Some("image") => MimeCategory::Image,
        Some("text") => MimeCategory::Text,
        _ => MimeCategory::Application,
    };
    Ok(MimeClass {
        category,
        label: OTHER_LABEL.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_types() {
        let c = classify_mime("text/plain").unwrap();
        assert_eq!((c.category, c.label.as_str()), (MimeCategory::Text, "Plain"));
        let c = classify_mime("image/png").unwrap();
        assert_eq!((c.category, c.label.as_str()), (MimeCategory::Image, "PNG"));
        let c = classify_mime("application/javascript").unwrap();
        assert_eq!((c.category, c.label.as_str()), (MimeCategory::Application, "Javascript"));
    }

    #[test]
    fn unknown_types_bucket_by_prefix() {
        assert_eq!(classify_mime("image/gif").unwrap().label, OTHER_LABEL);
        assert_eq!(classify_mime("image/gif").unwrap().category, MimeCategory::Image);
        assert_eq!(classify_mime("text/vnd.graphviz").unwrap().category, MimeCategory::Text);
        assert_eq!(
            classify_mime("application/x-foo").unwrap().category,
            MimeCategory::Application
        );
    }

    #[test]
    fn strings_without_slash_are_invalid() {
        assert!(classify_mime("png").is_err());
        assert!(classify_mime("").is_err());
        assert!(classify_mime("/plain").is_err());
        assert!(classify_mime("text/").is_err());
    }
}
