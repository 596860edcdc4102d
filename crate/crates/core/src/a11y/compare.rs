use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rules::RuleCode;
use super::scan::ScanResult;

/// Raw counts behind the theme comparison. Sums of counts, so two
/// tallies over disjoint documents merge exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeTally {
    /// theme → (errors in a document → number of documents)
    pub errors_per_document: BTreeMap<String, BTreeMap<u64, u64>>,
    /// theme → rule → error findings
    pub errors_per_rule: BTreeMap<String, BTreeMap<RuleCode, u64>>,
}

impl ThemeTally {
    pub fn add(&mut self, scan: &ScanResult) {
        self.add_counts(&scan.theme, &error_counts(scan));
    }

    /// Adds one document given its error findings per rule.
    pub fn add_counts(&mut self, theme: &str, errors: &BTreeMap<RuleCode, u64>) {
        let total: u64 = errors.values().sum();
        *self
            .errors_per_document
            .entry(theme.to_string())
            .or_default()
            .entry(total)
            .or_insert(0) += 1;
        let per_rule = self.errors_per_rule.entry(theme.to_string()).or_default();
        for (r, n) in errors {
            *per_rule.entry(*r).or_insert(0) += n;
        }
    }

    pub fn merge(&mut self, other: &ThemeTally) {
        for (theme, hist) in &other.errors_per_document {
            let mine = self.errors_per_document.entry(theme.clone()).or_default();
            for (k, n) in hist {
                *mine.entry(*k).or_insert(0) += n;
            }
        }
        for (theme, rules) in &other.errors_per_rule {
            let mine = self.errors_per_rule.entry(theme.clone()).or_default();
            for (r, n) in rules {
                *mine.entry(*r).or_insert(0) += n;
            }
        }
    }
}

/// Error-severity findings per rule; warnings and notices are not counted.
pub fn error_counts(scan: &ScanResult) -> BTreeMap<RuleCode, u64> {
    let mut m = BTreeMap::new();
    for f in scan.findings.iter().filter(|f| f.severity == super::Severity::Error) {
        *m.entry(f.rule_code).or_insert(0) += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeErrorStats {
    pub theme: String,
    pub n_documents: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    /// `(error count, fraction of documents with at most that many)`.
    pub cdf: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeComparison {
    pub themes: Vec<ThemeErrorStats>,
    /// theme → rule → count divided by that rule's maximum over themes.
    pub rule_heatmap: BTreeMap<String, BTreeMap<RuleCode, f64>>,
}

fn stats(theme: &str, hist: &BTreeMap<u64, u64>) -> ThemeErrorStats {
    let n: u64 = hist.values().sum();
    let nf = n.max(1) as f64;
    let mean = hist.iter().map(|(k, c)| *k as f64 * *c as f64).sum::<f64>() / nf;
    let var = hist.iter().map(|(k, c)| (*k as f64 - mean).powi(2) * *c as f64).sum::<f64>() / nf;
    let mut running = 0u64;
    let cdf = hist
        .iter()
        .map(|(k, c)| {
            running += c;
            (*k, running as f64 / nf)
        })
        .collect();
    ThemeErrorStats { theme: theme.to_string(), n_documents: n, mean, std_dev: var.sqrt(), cdf }
}

pub fn theme_comparison(tally: &ThemeTally) -> ThemeComparison {
    let themes = tally.errors_per_document.iter().map(|(t, h)| stats(t, h)).collect();
    let mut max: BTreeMap<RuleCode, u64> = BTreeMap::new();
    for rules in tally.errors_per_rule.values() {
        for (r, n) in rules {
            let m = max.entry(*r).or_insert(0);
            *m = (*m).max(*n);
        }
    }
    let rule_heatmap = tally
        .errors_per_document
        .keys()
        .map(|theme| {
            let rules = tally.errors_per_rule.get(theme);
            let row = max
                .iter()
                .map(|(r, m)| {
                    let n = rules.and_then(|x| x.get(r)).copied().unwrap_or(0);
                    let v = if *m == 0 { 0.0 } else { n as f64 / *m as f64 };
                    (*r, v)
                })
                .collect();
            (theme.clone(), row)
        })
        .collect();
    ThemeComparison { themes, rule_heatmap }
}

/// Convenience wrapper for a flat list of scans.
pub fn compare_scans(scans: &[ScanResult]) -> ThemeComparison {
    let mut tally = ThemeTally::default();
    for s in scans {
        tally.add(s);
    }
    theme_comparison(&tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn scan_with_errors(theme: &str, n: usize) -> ScanResult {
        use super::super::{A11yFinding, Severity};
        let findings = (0..n)
            .map(|_| A11yFinding {
                document: PathBuf::from("d"),
                theme: theme.into(),
                ruleset: RuleCode::AxeE1.ruleset(),
                rule_code: RuleCode::AxeE1,
                severity: Severity::Error,
                impact: RuleCode::AxeE1.impact(),
                selector: "html".into(),
                snippet: String::new(),
                message: String::new(),
            })
            .collect();
        ScanResult { document: PathBuf::from("d"), theme: theme.into(), findings, counts: BTreeMap::new() }
    }

    #[test]
    fn mean_and_population_sigma() {
        // Errors 2, 4, 4, 4, 5, 5, 7, 9: mean 5, population sigma 2.
        let scans: Vec<_> = [2, 4, 4, 4, 5, 5, 7, 9].iter().map(|n| scan_with_errors("dark", *n)).collect();
        let c = compare_scans(&scans);
        assert_eq!(c.themes.len(), 1);
        assert!((c.themes[0].mean - 5.0).abs() < 1e-12);
        assert!((c.themes[0].std_dev - 2.0).abs() < 1e-12);
        let last = c.themes[0].cdf.last().unwrap();
        assert_eq!(*last, (9, 1.0));
    }

    #[test]
    fn all_zero_is_a_unit_step() {
        let scans: Vec<_> = (0..4).map(|_| scan_with_errors("light", 0)).collect();
        let c = compare_scans(&scans);
        assert_eq!(c.themes[0].cdf, vec![(0, 1.0)]);
        assert_eq!(c.themes[0].std_dev, 0.0);
    }

    #[test]
    fn heatmap_normalizes_by_rule_max() {
        let scans = vec![scan_with_errors("a", 2), scan_with_errors("b", 4), scan_with_errors("c", 0)];
        let c = compare_scans(&scans);
        assert_eq!(c.rule_heatmap["a"][&RuleCode::AxeE1], 0.5);
        assert_eq!(c.rule_heatmap["b"][&RuleCode::AxeE1], 1.0);
        assert_eq!(c.rule_heatmap["c"][&RuleCode::AxeE1], 0.0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let scans: Vec<_> = (0..6).map(|i| scan_with_errors(if i % 2 == 0 { "x" } else { "y" }, i)).collect();
        let mut whole = ThemeTally::default();
        scans.iter().for_each(|s| whole.add(s));
        let (mut a, mut b) = (ThemeTally::default(), ThemeTally::default());
        scans[..2].iter().for_each(|s| a.add(s));
        scans[2..].iter().for_each(|s| b.add(s));
        a.merge(&b);
        assert_eq!(a, whole);
    }
}
