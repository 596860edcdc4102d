use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{is_builtin, is_stdlib_module, CallRecord, ImportRecord};

/// Mergeable usage counts: top-level module → imports, call target →
/// invocations.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageCounts {
    pub modules: BTreeMap<String, u64>,
    pub calls: BTreeMap<String, u64>,
}

/// The package an import is attributed to: the first dotted segment, or
/// the whole path for relative imports.
pub fn top_level_module(module: &str) -> &str {
    if module.starts_with('.') {
        module
    } else {
        module.split('.').next().unwrap_or(module)
    }
}

impl UsageCounts {
    pub fn add_imports<'a>(&mut self, imports: impl IntoIterator<Item = &'a ImportRecord>) {
        for i in imports {
            *self.modules.entry(top_level_module(&i.module).to_string()).or_default() += 1;
        }
    }

    pub fn add_calls<'a>(&mut self, calls: impl IntoIterator<Item = &'a CallRecord>) {
        for c in calls {
            *self.calls.entry(c.target.clone()).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: &UsageCounts) {
        for (k, v) in &other.modules {
            *self.modules.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.calls {
            *self.calls.entry(k.clone()).or_default() += v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedRow {
    pub name: String,
    pub count: u64,
}

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTables {
    pub modules: Vec<RankedRow>,
    /// Third-party modules only.
    pub modules_excluding_stdlib: Vec<RankedRow>,
    pub calls: Vec<RankedRow>,
    pub calls_excluding_builtins: Vec<RankedRow>,
}

/// Descending count, ties by name ascending.
pub fn rank(counts: &BTreeMap<String, u64>) -> Vec<RankedRow> {
    let mut rows: Vec<RankedRow> = counts
        .iter()
        .map(|(name, &count)| RankedRow { name: name.clone(), count })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    rows
}

pub fn rank_usage(counts: &UsageCounts) -> RankTables {
    let modules = rank(&counts.modules);
    let calls = rank(&counts.calls);
    RankTables {
        modules_excluding_stdlib: modules
            .iter()
            .filter(|r| !is_stdlib_module(&r.name))
            .cloned()
            .collect(),
        calls_excluding_builtins: calls.iter().filter(|r| !is_builtin(&r.name)).cloned().collect(),
        modules,
        calls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn import(module: &str) -> ImportRecord {
        ImportRecord {
            module: module.into(),
            imported_name: None,
            alias: None,
            cell_index: 1,
        }
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(rank_usage(&UsageCounts::default()), RankTables::default());
    }

    #[test]
    fn numpy_three_os_one() {
        let records = [import("numpy"), import("numpy"), import("os"), import("numpy")];
        let mut counts = UsageCounts::default();
        counts.add_imports(&records);
        let t = rank_usage(&counts);
        assert_eq!(t.modules[0], RankedRow { name: "numpy".into(), count: 3 });
        assert_eq!(t.modules[1], RankedRow { name: "os".into(), count: 1 });
        assert_eq!(t.modules_excluding_stdlib.len(), 1);
    }

    #[test]
    fn ties_are_lexicographic() {
        let counts: BTreeMap<String, u64> =
            [("b".to_string(), 2), ("a".to_string(), 2), ("c".to_string(), 5)].into();
        let names: Vec<_> = rank(&counts).into_iter().map(|r| r.name).collect();
        assert_eq!(names, vec!["c", "a", "b"]);
    }

    #[test]
    fn submodules_count_towards_package() {
        assert_eq!(top_level_module("matplotlib.pyplot"), "matplotlib");
        assert_eq!(top_level_module("..pkg.mod"), "..pkg.mod");
    }
}
