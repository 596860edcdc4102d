//! Small helpers over html5ever DOM fragments shared by metrics and export.

use ego_tree::NodeRef;
use scraper::{Html, Node};

pub(crate) const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr",
];

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub(crate) struct FragmentFacts {
    /// Heading levels in document order.
    pub headings: Vec<u8>,
    /// (rows, cols) per `<table>` in document order.
    pub tables: Vec<(usize, usize)>,
    /// Anchors carrying an `href`.
    pub links: usize,
}

pub(crate) fn heading_level(name: &str) -> Option<u8> {
    match name {
        "h1" => Some(1),
        "h2" => Some(2),
        "h3" => Some(3),
        "h4" => Some(4),
        "h5" => Some(5),
        "h6" => Some(6),
        _ => None,
    }
}

fn element_name<'a>(node: &NodeRef<'a, Node>) -> Option<&'a str> {
    node.value().as_element().map(|e| e.name())
}

/// Rows and columns of a table element; nested tables are not counted
/// towards their parent.
pub(crate) fn table_shape(table: NodeRef<'_, Node>) -> (usize, usize) {
    let mut rows = 0;
    let mut cols = 0;
    let mut stack: Vec<NodeRef<'_, Node>> = table.children().collect();
    stack.reverse();
    while let Some(node) = stack.pop() {
        match element_name(&node) {
            Some("table") => continue,
            Some("tr") => {
                rows += 1;
                let cells = node
                    .children()
                    .filter(|c| matches!(element_name(c), Some("td") | Some("th")))
                    .count();
                cols = cols.max(cells);
            }
            _ => {
                let mut kids: Vec<_> = node.children().collect();
                kids.reverse();
                stack.extend(kids);
            }
        }
    }
    (rows, cols)
}

pub(crate) fn fragment_facts(html: &str) -> FragmentFacts {
    let doc = Html::parse_fragment(html);
    let mut facts = FragmentFacts::default();
    for node in doc.tree.root().descendants() {
        let Some(el) = node.value().as_element() else {
            continue;
        };
        if let Some(level) = heading_level(el.name()) {
            facts.headings.push(level);
        } else if el.name() == "table" {
            facts.tables.push(table_shape(node));
        } else if el.name() == "a" && el.attr("href").is_some() {
            facts.links += 1;
        }
    }
    facts
}

pub(crate) fn escape_text(s: &str, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
}

pub(crate) fn escape_attr(s: &str, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
}

/// Elements removed with their content: anything that runs script, loads
/// external resources into the page or restyles it.
const DROPPED_ELEMENTS: &[&str] = &[
    "script", "style", "noscript", "template", "iframe", "object", "embed", "link", "meta", "base",
];

/// Re-serialises an HTML fragment through the parser so it nests cleanly
/// inside a container. Scripts, styles and comments are dropped. Each
/// element's inline style is prefixed with `style_for(tag)` when that
/// returns a value; existing declarations come last so they keep
/// precedence.
pub(crate) fn sanitize_fragment_styled(
    html: &str,
    style_for: &dyn Fn(&str) -> Option<String>,
) -> String {
    let doc = Html::parse_fragment(html);
    let mut out = String::with_capacity(html.len());
    // parse_fragment wraps content in a synthetic <html> element.
    for child in doc.root_element().children() {
        serialize_node(child, style_for, &mut out);
    }
    out
}

fn serialize_node(
    node: NodeRef<'_, Node>,
    style_for: &dyn Fn(&str) -> Option<String>,
    out: &mut String,
) {
    match node.value() {
        Node::Text(t) => escape_text(t, out),
        Node::Element(el) => {
            let name = el.name();
            if DROPPED_ELEMENTS.contains(&name) {
                return;
            }
            let mut attrs: Vec<(&str, String)> = el
                .attrs()
                .filter(|(k, v)| {
                    // event handlers and script URLs would smuggle script back in
                    !k.starts_with("on")
                        && !(matches!(*k, "href" | "src")
                            && v.trim_start().to_ascii_lowercase().starts_with("javascript:"))
                })
                .map(|(k, v)| (k, v.to_string()))
                .collect();
            if let Some(extra) = style_for(name) {
                match attrs.iter_mut().find(|(k, _)| *k == "style") {
                    Some((_, v)) => *v = format!("{extra};{v}"),
                    None => attrs.push(("style", extra)),
                }
            }
            attrs.sort_by(|a, b| a.0.cmp(b.0));
            out.push('<');
            out.push_str(name);
            for (k, v) in attrs {
                out.push(' ');
                out.push_str(k);
                out.push_str("=\"");
                escape_attr(&v, out);
                out.push('"');
            }
            out.push('>');
            if VOID_ELEMENTS.contains(&name) {
                return;
            }
            for child in node.children() {
                serialize_node(child, style_for, out);
            }
            out.push_str("</");
            out.push_str(name);
            out.push('>');
        }
        _ => {
            for child in node.children() {
                serialize_node(child, style_for, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_rows_including_header() {
        let html = "<table><thead><tr><th>a</th><th>b</th><th>c</th><th>d</th></tr></thead><tbody>\
            <tr><td>1</td><td>2</td><td>3</td><td>4</td></tr>\
            <tr><td>1</td><td>2</td><td>3</td><td>4</td></tr>\
            <tr><td>1</td><td>2</td><td>3</td><td>4</td></tr>\
            <tr><td>1</td><td>2</td><td>3</td><td>4</td></tr>\
            <tr><td>1</td><td>2</td><td>3</td><td>4</td></tr></tbody></table>";
        assert_eq!(fragment_facts(html).tables, vec![(6, 4)]);
    }

    #[test]
    fn nested_tables_are_separate() {
        let html = "<table><tr><td><table><tr><td>x</td></tr><tr><td>y</td></tr></table></td><td>z</td></tr></table>";
        assert_eq!(fragment_facts(html).tables, vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn sanitize_drops_scripts_and_closes_tags() {
        let out = sanitize_fragment_styled("<div onclick=\"x()\"><script>alert(1)</script><p>hi", &|_| None);
        assert_eq!(out, "<div><p>hi</p></div>");
    }

    #[test]
    fn styles_are_prefixed_and_script_urls_dropped() {
        let style = |tag: &str| (tag == "a").then(|| "color:#000000".to_string());
        let out = sanitize_fragment_styled(
            "<a href=\"javascript:x()\" style=\"color:red\">a</a><a href=\"#y\">b</a>",
            &style,
        );
        assert_eq!(
            out,
            "<a style=\"color:#000000;color:red\">a</a><a href=\"#y\" style=\"color:#000000\">b</a>"
        );
    }

    #[test]
    fn headings_and_links() {
        let f = fragment_facts("<h2>a</h2><p><a href='#x'>x</a><a>no</a></p><h5>b</h5>");
        assert_eq!(f.headings, vec![2, 5]);
        assert_eq!(f.links, 1);
    }
}
