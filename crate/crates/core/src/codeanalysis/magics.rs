use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    CellMagic,
    LineMagic,
    Shell,
    Help,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedLine {
    /// 1-based line number in the original source.
    pub line: usize,
    pub reason: RemovalReason,
}

/// Cell source with kernel-only lines blanked out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedSource {
    pub text: String,
    pub removed_lines: Vec<RemovedLine>,
}

fn classify(line: &str) -> Option<RemovalReason> {
    let trimmed = line.trim();
    if trimmed.starts_with("%%") {
        Some(RemovalReason::CellMagic)
    } else if trimmed.starts_with('%') {
        Some(RemovalReason::LineMagic)
    } else if trimmed.starts_with('!') {
        Some(RemovalReason::Shell)
    } else if trimmed.ends_with('?') {
        Some(RemovalReason::Help)
    } else {
        None
    }
}

/// Blanks every line that starts with `%` or `!` or ends with `?` (ignoring
/// surrounding whitespace, so indented magics go too). Line terminators
/// are kept, so line numbers in the result match the original.
pub fn strip_magics(source: &str) -> CleanedSource {
    let mut text = String::with_capacity(source.len());
    let mut removed_lines = Vec::new();
    for (i, segment) in source.split_inclusive('\n').enumerate() {
        let body = segment.trim_end_matches(['\n', '\r']);
        match classify(body) {
            Some(reason) => {
                removed_lines.push(RemovedLine { line: i + 1, reason });
                text.push_str(&segment[body.len()..]);
            }
            None => text.push_str(segment),
        }
    }
    CleanedSource { text, removed_lines }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_magic() {
        let c = strip_magics("%matplotlib inline\nimport numpy");
        assert_eq!(c.text, "\nimport numpy");
        assert_eq!(c.removed_lines, vec![RemovedLine { line: 1, reason: RemovalReason::LineMagic }]);
    }

    #[test]
    fn shell_and_help() {
        let c = strip_magics("!pip install x\nlen?\nx = 1");
        assert_eq!(c.text, "\n\nx = 1");
        let reasons: Vec<_> = c.removed_lines.iter().map(|r| r.reason).collect();
        assert_eq!(reasons, vec![RemovalReason::Shell, RemovalReason::Help]);
    }

    #[test]
    fn modulo_survives() {
        let c = strip_magics("y = a % b");
        assert_eq!(c.text, "y = a % b");
        assert!(c.removed_lines.is_empty());
    }

    #[test]
    fn cell_magic_header_only() {
        let c = strip_magics("%%time\nx = 1\n");
        assert_eq!(c.text, "\nx = 1\n");
        assert_eq!(c.removed_lines[0].reason, RemovalReason::CellMagic);
    }

    #[test]
    fn indented_and_crlf() {
        let c = strip_magics("def f():\r\n    %time g()\r\n    return 1\r\n");
        assert_eq!(c.text, "def f():\r\n\r\n    return 1\r\n");
        assert_eq!(c.removed_lines[0].line, 2);
    }
}
