//! Static accessibility checks over exported HTML, in two rulesets that
//! mirror the codes reported by common automated checkers.

pub mod color;
pub mod compare;
pub mod rules;
pub mod scan;
pub mod style;

pub use compare::{compare_scans, error_counts, theme_comparison, ThemeComparison, ThemeErrorStats, ThemeTally};
pub use rules::{Impact, RuleCode, RuleSelection, Ruleset, Severity, UnknownRule};
pub use scan::{css_path, scan, scan_bytes, scan_html, scan_with, A11yFinding, ScanError, ScanResult};
