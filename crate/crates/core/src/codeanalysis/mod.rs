//! Static analysis of code cells: kernel magics are blanked out, each cell
//! is parsed on its own with a Python 3 grammar (rustpython-parser 0.4),
//! and imports and call targets are collected from the syntax tree.

mod extract;
mod magics;
mod rank;

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::nbmodel::Notebook;

pub use extract::{call_target, parse_and_extract, CallRecord, ImportRecord, ParseFailure};
pub use magics::{strip_magics, CleanedSource, RemovalReason, RemovedLine};
pub use rank::{rank, rank_usage, top_level_module, RankTables, RankedRow, UsageCounts};

const BUILTINS_LIST: &str = include_str!("../../data/python_builtins.txt");
const STDLIB_LIST: &str = include_str!("../../data/python_stdlib_modules.txt");

fn load_names(list: &'static str) -> HashSet<&'static str> {
    list.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn builtins() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| load_names(BUILTINS_LIST))
}

fn stdlib() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| load_names(STDLIB_LIST))
}

/// True for a bare built-in function name such as `print`.
pub fn is_builtin(target: &str) -> bool {
    builtins().contains(target)
}

pub fn is_stdlib_module(top_level: &str) -> bool {
    stdlib().contains(top_level)
}

/// Everything the analysis found in one notebook.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotebookCode {
    pub imports: Vec<ImportRecord>,
    pub calls: Vec<CallRecord>,
    pub parse_failures: Vec<ParseFailure>,
    pub n_cells_parsed: usize,
    pub removed_lines: usize,
}

fn leading_name(target: &str) -> &str {
    let end = target.find(['.', '(', '[']).unwrap_or(target.len());
    &target[..end]
}

/// Strips, parses and extracts every code cell, then resolves call
/// targets through the import aliases bound so far. Bindings are tracked
/// per cell: a cell's imports are visible to all calls in that cell.
pub fn analyze_notebook(nb: &Notebook) -> NotebookCode {
    let mut out = NotebookCode::default();
    let mut bindings: BTreeMap<String, String> = BTreeMap::new();
    for cell in nb.code_cells() {
        let cleaned = strip_magics(&cell.source);
        out.removed_lines += cleaned.removed_lines.len();
        match parse_and_extract(&cleaned, cell.index) {
            Ok((imports, mut calls)) => {
                out.n_cells_parsed += 1;
                for i in &imports {
                    if let Some(alias) = &i.alias {
                        if alias != "*" {
                            bindings.insert(alias.clone(), i.bound_path());
                        }
                    }
                }
                for c in &mut calls {
                    let head = leading_name(&c.target);
                    if let Some(path) = bindings.get(head) {
                        c.resolved = Some(format!("{path}{}", &c.target[head.len()..]));
                    }
                }
                out.imports.extend(imports);
                out.calls.extend(calls);
            }
            Err(e) => out.parse_failures.push(e),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbmodel::{Cell, CellKind};

    #[test]
    fn data_lists_load() {
        assert!(is_builtin("print"));
        assert!(is_builtin("len"));
        assert!(!is_builtin("plt.plot"));
        assert!(!is_builtin("# Python 3.10 built-in callables (exceptions excluded), one per line."));
        assert!(is_stdlib_module("os"));
        assert!(!is_stdlib_module("numpy"));
    }

    #[test]
    fn aliases_resolve_across_cells() {
        let nb = Notebook::new(
            "n.ipynb",
            vec![
                Cell::new(1, CellKind::Code, "import matplotlib.pyplot as plt\nfrom numpy import zeros as z"),
                Cell::new(2, CellKind::Markdown, "# plot"),
                Cell::new(3, CellKind::Code, "plt.plot(z(3))\nprint(1)\ndef (:"),
                Cell::new(4, CellKind::Code, "import os.path\nos.path.join('a')"),
            ],
        );
        let code = analyze_notebook(&nb);
        assert_eq!(code.parse_failures.len(), 1);
        assert_eq!(code.parse_failures[0].cell_index, 3);
        assert_eq!(code.n_cells_parsed, 2);
        let resolved: Vec<_> = code.calls.iter().map(|c| c.resolved.as_deref()).collect();
        assert_eq!(resolved, vec![Some("os.path.join")]);

        let nb = Notebook::new(
            "n.ipynb",
            vec![
                Cell::new(1, CellKind::Code, "import matplotlib.pyplot as plt\nfrom numpy import zeros as z"),
                Cell::new(2, CellKind::Code, "plt.plot(z(3))\nprint(1)"),
            ],
        );
        let code = analyze_notebook(&nb);
        let resolved: Vec<_> = code.calls.iter().map(|c| c.resolved.as_deref()).collect();
        assert_eq!(
            resolved,
            vec![Some("matplotlib.pyplot.plot"), Some("numpy.zeros"), None]
        );
    }
}
