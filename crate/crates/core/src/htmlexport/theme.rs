use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::a11y::color::Rgb;

pub const THEME_NAMES: [&str; 6] = ["light", "dark", "solarized", "darcula", "horizon", "material-darker"];

/// Environment variable naming a directory of `<theme>.toml` palette files
/// that replace the built-in ones.
pub const THEME_DIR_ENV: &str = "NBAUDIT_THEME_DIR";

const BUILTIN: [(&str, &str); 6] = [
    ("light", include_str!("../../themes/light.toml")),
    ("dark", include_str!("../../themes/dark.toml")),
    ("solarized", include_str!("../../themes/solarized.toml")),
    ("darcula", include_str!("../../themes/darcula.toml")),
    ("horizon", include_str!("../../themes/horizon.toml")),
    ("material-darker", include_str!("../../themes/material-darker.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Palette {
    pub page_bg: Rgb,
    pub cell_bg: Rgb,
    pub fg_text: Rgb,
    pub link: Rgb,
    pub visited_link: Rgb,
    pub code_keyword: Rgb,
    pub code_string: Rgb,
    pub code_comment: Rgb,
    pub code_number: Rgb,
    pub table_border: Rgb,
    pub table_header_bg: Rgb,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theme {
    pub name: String,
    pub palette: Palette,
}

#[derive(Debug, thiserror::Error)]
pub enum ThemeError {
    #[error("unknown theme `{0}` (known: light, dark, solarized, darcula, horizon, material-darker)")]
    ThemeUnknown(String),
    #[error("cannot read palette {path}: {message}")]
    BadPalette { path: PathBuf, message: String },
}

impl Theme {
    /// Parses a palette file. Every role must be present as `#RRGGBB`.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Theme, ThemeError> {
        toml::from_str(text).map_err(|e| ThemeError::BadPalette {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// The checked-in palette for one of the six theme names.
    pub fn builtin(name: &str) -> Result<Theme, ThemeError> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ThemeError::ThemeUnknown(name.to_string()))?;
        Theme::from_toml(text, Path::new(&format!("<builtin>/{name}.toml")))
    }

    /// Reads `<dir>/<name>.toml`. Any name is accepted here, which is how
    /// custom palettes are audited.
    pub fn from_dir(dir: &Path, name: &str) -> Result<Theme, ThemeError> {
        let path = dir.join(format!("{name}.toml"));
        let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ThemeError::ThemeUnknown(name.to_string()),
            _ => ThemeError::BadPalette { path: path.clone(), message: e.to_string() },
        })?;
        Theme::from_toml(&text, &path)
    }

    /// Palette from `NBAUDIT_THEME_DIR` when set, else the built-in one.
    pub fn load(name: &str) -> Result<Theme, ThemeError> {
        match std::env::var_os(THEME_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Theme::from_dir(Path::new(&dir), name),
            _ => Theme::builtin(name),
        }
    }

    pub fn all_builtin() -> Vec<Theme> {
        THEME_NAMES
            .iter()
            .map(|n| Theme::builtin(n).expect("built-in palettes parse"))
            .collect()
    }
}
