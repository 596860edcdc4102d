use rustpython_ast::Visitor;
use rustpython_parser::{ast, Parse};
use serde::{Deserialize, Serialize};

use super::{is_builtin, CleanedSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportRecord {
    /// Dotted module path; relative imports keep their leading dots.
    pub module: String,
    /// Member named by `from m import name`.
    pub imported_name: Option<String>,
    /// The name bound in the namespace (explicit `as` name or the default).
    pub alias: Option<String>,
    pub cell_index: usize,
}

impl ImportRecord {
    /// Dotted path the bound name refers to.
    pub fn bound_path(&self) -> String {
        if let Some(name) = &self.imported_name {
            return format!("{}.{}", self.module.trim_end_matches('.'), name);
        }
        let top = self.module.split('.').next().unwrap_or_default();
        // `import a.b` binds `a`; `import a.b as c` binds `a.b`
        if self.alias.as_deref() == Some(top) {
            top.to_string()
        } else {
            self.module.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    /// Surface dotted call target, e.g. `plt.plot`.
    pub target: String,
    pub cell_index: usize,
    /// Target with its leading name replaced by the imported path it is
    /// bound to, e.g. `matplotlib.pyplot.plot`.
    pub resolved: Option<String>,
    /// Target is a bare built-in function name.
    pub builtin: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("cell {cell_index}: {message}")]
pub struct ParseFailure {
    pub cell_index: usize,
    pub message: String,
}

/// Text of a call's callee. Names and attribute chains are spelled out;
/// a call in the chain shows as `()` and a subscript as `[]`; any other
/// expression collapses to `()`.
pub fn call_target(func: &ast::Expr) -> String {
    match func {
        ast::Expr::Name(n) => n.id.to_string(),
        ast::Expr::Attribute(a) => format!("{}.{}", call_target(&a.value), a.attr.as_str()),
        ast::Expr::Call(c) => format!("{}()", call_target(&c.func)),
        ast::Expr::Subscript(s) => format!("{}[]", call_target(&s.value)),
        _ => "()".to_string(),
    }
}

struct Collector {
    cell_index: usize,
    imports: Vec<ImportRecord>,
    calls: Vec<CallRecord>,
}

impl Visitor for Collector {
    fn visit_stmt_import(&mut self, node: ast::StmtImport) {
        for alias in node.names {
            let module = alias.name.to_string();
            let bound = match alias.asname {
                Some(a) => a.to_string(),
                None => module.split('.').next().unwrap_or_default().to_string(),
            };
            self.imports.push(ImportRecord {
                module,
                imported_name: None,
                alias: Some(bound),
                cell_index: self.cell_index,
            });
        }
    }

    fn visit_stmt_import_from(&mut self, node: ast::StmtImportFrom) {
        let level = node.level.map(|l| l.to_usize()).unwrap_or(0);
        let mut module = ".".repeat(level);
        if let Some(m) = &node.module {
            module.push_str(m.as_str());
        }
        for alias in node.names {
            let name = alias.name.to_string();
            let bound = alias.asname.map(|a| a.to_string()).unwrap_or_else(|| name.clone());
            self.imports.push(ImportRecord {
                module: module.clone(),
                imported_name: Some(name),
                alias: Some(bound),
                cell_index: self.cell_index,
            });
        }
    }

    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        let target = call_target(&node.func);
        let builtin = is_builtin(&target);
        self.calls.push(CallRecord {
            target,
            cell_index: self.cell_index,
            resolved: None,
            builtin,
        });
        self.generic_visit_expr_call(node);
    }

    // The generated visitor stops at these nodes; calls can hide below them.
    fn visit_comprehension(&mut self, node: ast::Comprehension) {
        self.visit_expr(node.target);
        self.visit_expr(node.iter);
        for e in node.ifs {
            self.visit_expr(e);
        }
    }

    fn visit_arguments(&mut self, node: ast::Arguments) {
        let with_defaults = node
            .posonlyargs
            .into_iter()
            .chain(node.args)
            .chain(node.kwonlyargs);
        for a in with_defaults {
            self.visit_arg(a.def);
            if let Some(d) = a.default {
                self.visit_expr(*d);
            }
        }
        for a in node.vararg.into_iter().chain(node.kwarg) {
            self.visit_arg(*a);
        }
    }

    fn visit_arg(&mut self, node: ast::Arg) {
        if let Some(ann) = node.annotation {
            self.visit_expr(*ann);
        }
    }

    fn visit_keyword(&mut self, node: ast::Keyword) {
        self.visit_expr(node.value);
    }

    fn visit_withitem(&mut self, node: ast::WithItem) {
        self.visit_expr(node.context_expr);
        if let Some(v) = node.optional_vars {
            self.visit_expr(*v);
        }
    }

    fn visit_match_case(&mut self, node: ast::MatchCase) {
        self.visit_pattern(node.pattern);
        if let Some(g) = node.guard {
            self.visit_expr(*g);
        }
        for s in node.body {
            self.visit_stmt(s);
        }
    }
}

/// Parses one cleaned cell and lists its imports and calls in source
/// order. `resolved` is left empty; see [`super::analyze_notebook`].
pub fn parse_and_extract(
    cleaned: &CleanedSource,
    cell_index: usize,
) -> Result<(Vec<ImportRecord>, Vec<CallRecord>), ParseFailure> {
    let suite = ast::Suite::parse(&cleaned.text, "<cell>").map_err(|e| ParseFailure {
        cell_index,
        message: e.to_string(),
    })?;
    let mut c = Collector {
        cell_index,
        imports: Vec::new(),
        calls: Vec::new(),
    };
    for stmt in suite {
        c.visit_stmt(stmt);
    }
    Ok((c.imports, c.calls))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codeanalysis::strip_magics;

    fn run(src: &str) -> (Vec<ImportRecord>, Vec<CallRecord>) {
        parse_and_extract(&strip_magics(src), 1).unwrap()
    }

    fn targets(src: &str) -> Vec<String> {
        run(src).1.into_iter().map(|c| c.target).collect()
    }

    #[test]
    fn import_as() {
        let (imports, calls) = run("import numpy as np");
        assert_eq!(imports.len(), 1);
        assert_eq!(imports[0].module, "numpy");
        assert_eq!(imports[0].imported_name, None);
        assert_eq!(imports[0].alias.as_deref(), Some("np"));
        assert!(calls.is_empty());
    }

    #[test]
    fn pyplot_example() {
        let (imports, calls) = run("import matplotlib.pyplot as plt\nplt.plot(x)");
        assert_eq!(imports[0].module, "matplotlib.pyplot");
        assert_eq!(imports[0].alias.as_deref(), Some("plt"));
        assert_eq!(calls.len(), 1);
        assert_eq!(calls[0].target, "plt.plot");
        assert!(!calls[0].builtin);
    }

    #[test]
    fn empty_function() {
        let (i, c) = run("def f():\n  return");
        assert!(i.is_empty() && c.is_empty());
    }

    #[test]
    fn from_import_forms() {
        let (imports, _) = run("from os import path as p, sep\nfrom . import util\nfrom x import *");
        let summary: Vec<_> = imports
            .iter()
            .map(|i| (i.module.as_str(), i.imported_name.as_deref(), i.alias.as_deref()))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("os", Some("path"), Some("p")),
                ("os", Some("sep"), Some("sep")),
                (".", Some("util"), Some("util")),
                ("x", Some("*"), Some("*")),
            ]
        );
    }

    #[test]
    fn dotted_import_binds_top_name() {
        let (imports, _) = run("import os.path");
        assert_eq!(imports[0].alias.as_deref(), Some("os"));
        assert_eq!(imports[0].bound_path(), "os");
    }

    #[test]
    fn chained_and_nested_calls() {
        assert_eq!(
            targets("df.groupby('a').mean()"),
            vec!["df.groupby().mean", "df.groupby"]
        );
        assert_eq!(targets("print(len(x))"), vec!["print", "len"]);
        assert_eq!(targets("x[0].f()"), vec!["x[].f"]);
    }

    #[test]
    fn calls_in_hidden_positions() {
        let src = "def f(a=g(), *, b: h() = k()):\n    pass\n\
                   y = [m(v) for v in n() if p(v)]\n\
                   z = q(key=r())\n\
                   with s() as t:\n    pass\n";
        let mut t = targets(src);
        t.sort();
        assert_eq!(t, vec!["g", "h", "k", "m", "n", "p", "q", "r", "s"]);
    }

    #[test]
    fn builtins_are_flagged() {
        let (_, calls) = run("print(1)\nnp.sum(2)");
        assert!(calls[0].builtin);
        assert!(!calls[1].builtin);
    }

    #[test]
    fn syntax_error_is_a_parse_failure() {
        let err = parse_and_extract(&strip_magics("def (:"), 4).unwrap_err();
        assert_eq!(err.cell_index, 4);
    }

    #[test]
    fn magics_parse_after_stripping() {
        let src = "%matplotlib inline\n%%capture\n!ls\nimport os\nos.getcwd?\nfor i in range(3):\n    %time f(i)\n    y = i % 2\n";
        let (imports, calls) = run(src);
        assert_eq!(imports.len(), 1);
        assert_eq!(calls.iter().map(|c| c.target.as_str()).collect::<Vec<_>>(), vec!["range"]);
    }
}
