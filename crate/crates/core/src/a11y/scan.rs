use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use ego_tree::NodeId;
use scraper::{ElementRef, Html, Node};
use serde::{Deserialize, Serialize};

use super::color::contrast_ratio;
use super::rules::{Impact, RuleCode, RuleSelection, Ruleset, Severity};
use super::style::StyleMap;
use crate::htmlexport::{HtmlDocument, Theme};

const ARIA_TABLE: &str = include_str!("../../data/aria_required_parents.txt");
const SNIPPET_CHARS: usize = 160;
const LINK_DISTINCTION_RATIO: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A11yFinding {
    pub document: PathBuf,
    pub theme: String,
    pub ruleset: Ruleset,
    pub rule_code: RuleCode,
    pub severity: Severity,
    pub impact: Impact,
    pub selector: String,
    pub snippet: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub document: PathBuf,
    pub theme: String,
    pub findings: Vec<A11yFinding>,
    pub counts: BTreeMap<RuleCode, u64>,
}

impl ScanResult {
    pub fn error_count(&self) -> u64 {
        self.findings.iter().filter(|f| f.severity == Severity::Error).count() as u64
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("unparseable document {path}: {reason}")]
    UnparseableDocument { path: PathBuf, reason: String },
}

/// Role name to its required context roles. Every known role has an entry.
fn aria_roles() -> &'static HashMap<&'static str, Vec<&'static str>> {
    static ROLES: OnceLock<HashMap<&'static str, Vec<&'static str>>> = OnceLock::new();
    ROLES.get_or_init(|| {
        ARIA_TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let (role, parents) = l.split_once(':')?;
                Some((role.trim(), parents.split_whitespace().collect()))
            })
            .collect()
    })
}

const ARIA_INPUT_ROLES: &[&str] = &["combobox", "listbox", "searchbox", "slider", "spinbutton", "textbox"];
const LANDMARK_ROLES: &[&str] = &["banner", "complementary", "contentinfo", "form", "main", "navigation", "region", "search"];
const CONTENT_TAGS: &[&str] = &[
    "img", "svg", "video", "audio", "canvas", "iframe", "object", "embed", "input", "button", "select", "textarea",
];
const INLINE_TAGS: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "cite", "code", "data", "dfn", "em", "font", "i", "kbd", "label", "mark", "q",
    "s", "samp", "small", "span", "strong", "sub", "sup", "time", "tt", "u", "var",
];

fn attr<'a>(el: ElementRef<'a>, name: &str) -> Option<&'a str> {
    el.value().attr(name)
}

fn tag<'a>(el: ElementRef<'a>) -> &'a str {
    el.value().name()
}

fn explicit_role(el: ElementRef<'_>) -> Option<String> {
    attr(el, "role")
        .and_then(|r| r.split_whitespace().next())
        .map(str::to_ascii_lowercase)
}

fn implicit_role(el: ElementRef<'_>) -> Option<&'static str> {
    Some(match tag(el) {
        "a" | "area" if attr(el, "href").is_some() => "link",
        "article" => "article",
        "aside" => "complementary",
        "button" => "button",
        "datalist" => "listbox",
        "details" | "fieldset" | "optgroup" => "group",
        "dialog" => "dialog",
        "figure" => "figure",
        "footer" => "contentinfo",
        "form" => "form",
        "h1" | "h2" | "h3" | "h4" | "h5" | "h6" => "heading",
        "header" => "banner",
        "hr" => "separator",
        "img" if attr(el, "alt") == Some("") => "presentation",
        "img" => "img",
        "li" => "listitem",
        "main" => "main",
        "menu" | "ol" | "ul" => "list",
        "nav" => "navigation",
        "option" => "option",
        "progress" => "progressbar",
        "section" => "region",
        "select" => "listbox",
        "table" => "table",
        "tbody" | "thead" | "tfoot" => "rowgroup",
        "tr" => "row",
        "td" => "cell",
        "th" => "columnheader",
        "textarea" => "textbox",
        _ => return None,
    })
}

/// The role exposed to assistive technology, explicit roles winning when
/// they are known.
fn effective_role(el: ElementRef<'_>) -> Option<String> {
    match explicit_role(el) {
        Some(r) if aria_roles().contains_key(r.as_str()) => Some(r),
        _ => implicit_role(el).map(str::to_string),
    }
}

fn is_true(v: Option<&str>) -> bool {
    v.is_some_and(|v| v.trim().eq_ignore_ascii_case("true"))
}

fn is_focusable(el: ElementRef<'_>) -> bool {
    if attr(el, "disabled").is_some() {
        return false;
    }
    if let Some(t) = attr(el, "tabindex").and_then(|t| t.trim().parse::<i64>().ok()) {
        return t >= 0;
    }
    match tag(el) {
        "a" | "area" => attr(el, "href").is_some(),
        "input" => !attr(el, "type").is_some_and(|t| t.eq_ignore_ascii_case("hidden")),
        "button" | "select" | "textarea" | "iframe" | "summary" => true,
        "audio" | "video" => attr(el, "controls").is_some(),
        _ => is_true(attr(el, "contenteditable")) || attr(el, "contenteditable") == Some(""),
    }
}

fn is_skip_link(el: ElementRef<'_>) -> bool {
    tag(el) == "a" && attr(el, "href").is_some_and(|h| h.starts_with('#') && h.len() > 1)
}

/// CSS path from the root, e.g. `html > body:nth-child(2) > main:nth-child(1)`.
pub fn css_path(el: ElementRef<'_>) -> String {
    let mut parts = Vec::new();
    let mut cur = Some(el);
    while let Some(e) = cur {
        let parent = e.parent().and_then(ElementRef::wrap);
        match parent {
            None => parts.push(tag(e).to_string()),
            Some(p) => {
                let k = p
                    .children()
                    .filter_map(ElementRef::wrap)
                    .position(|c| c.id() == e.id())
                    .map_or(1, |i| i + 1);
                parts.push(format!("{}:nth-child({k})", tag(e)));
            }
        }
        cur = parent;
    }
    parts.reverse();
    parts.join(" > ")
}

fn snippet(el: ElementRef<'_>) -> String {
    let html = if tag(el) == "html" || tag(el) == "body" {
        // The whole document is not a useful snippet; show the start tag.
        let mut s = format!("<{}", tag(el));
        for (k, v) in el.value().attrs() {
            s.push_str(&format!(" {k}=\"{v}\""));
        }
        s.push('>');
        s
    } else {
        el.html()
    };
    let mut out: String = html.chars().take(SNIPPET_CHARS).collect();
    if html.chars().count() > SNIPPET_CHARS {
        out.push('…');
    }
    out
}

fn own_text(el: ElementRef<'_>) -> String {
    el.children()
        .filter_map(|n| match n.value() {
            Node::Text(t) => Some(&**t),
            _ => None,
        })
        .collect()
}

/// All descendant text plus image alt text, ignoring visibility. This is
/// the notion of "link content" a static checker without a renderer uses.
fn raw_content(el: ElementRef<'_>) -> String {
    let mut s: String = el.text().collect();
    for d in el.descendants().filter_map(ElementRef::wrap) {
        if tag(d) == "img" {
            if let Some(alt) = attr(d, "alt") {
                s.push(' ');
                s.push_str(alt);
            }
        }
    }
    s
}

struct Scanner<'a> {
    doc: &'a Html,
    styles: StyleMap,
    ids: HashMap<&'a str, ElementRef<'a>>,
    labels_for: HashMap<&'a str, Vec<ElementRef<'a>>>,
    has_landmark_below: HashSet<NodeId>,
    rules: &'a RuleSelection,
    hits: Vec<(usize, RuleCode, Severity, ElementRef<'a>, String)>,
}

impl<'a> Scanner<'a> {
    fn new(doc: &'a Html, theme: &Theme, rules: &'a RuleSelection) -> Self {
        let mut ids = HashMap::new();
        let mut labels_for: HashMap<&str, Vec<ElementRef>> = HashMap::new();
        for el in doc.root_element().descendants().filter_map(ElementRef::wrap) {
            if let Some(id) = attr(el, "id").filter(|s| !s.is_empty()) {
                ids.entry(id).or_insert(el);
            }
            if tag(el) == "label" {
                if let Some(f) = attr(el, "for") {
                    labels_for.entry(f).or_default().push(el);
                }
            }
        }
        let mut s = Scanner {
            doc,
            styles: StyleMap::build(doc, &theme.palette),
            ids,
            labels_for,
            has_landmark_below: HashSet::new(),
            rules,
            hits: Vec::new(),
        };
        let landmarks: Vec<ElementRef> = doc
            .root_element()
            .descendants()
            .filter_map(ElementRef::wrap)
            .filter(|e| s.is_landmark(*e))
            .collect();
        for l in landmarks {
            for a in l.ancestors() {
                s.has_landmark_below.insert(a.id());
            }
        }
        s
    }

    fn emit(&mut self, el: ElementRef<'a>, code: RuleCode, severity: Severity, message: String) {
        if self.rules.contains(code) {
            self.hits.push((self.styles.rank(el), code, severity, el, message));
        }
    }

    fn emit_pair(&mut self, el: ElementRef<'a>, codes: [RuleCode; 2], severity: Severity, message: String) {
        for code in codes {
            self.emit(el, code, severity, message.clone());
        }
    }

    fn is_landmark(&self, el: ElementRef<'_>) -> bool {
        if let Some(r) = explicit_role(el).filter(|r| aria_roles().contains_key(r.as_str())) {
            return LANDMARK_ROLES.contains(&r.as_str());
        }
        let named = ["aria-label", "aria-labelledby", "title"]
            .iter()
            .any(|a| attr(el, a).is_some_and(|v| !v.trim().is_empty()));
        match tag(el) {
            "main" | "nav" | "aside" => true,
            "header" | "footer" => !el.ancestors().filter_map(ElementRef::wrap).any(|a| {
                matches!(tag(a), "article" | "aside" | "main" | "nav" | "section")
            }),
            "form" | "section" => named,
            _ => false,
        }
    }

    /// Text of a subtree as assistive technology would read it: hidden
    /// and `aria-hidden` parts skipped, image alt text included.
    fn exposed_text(&self, el: ElementRef<'_>) -> String {
        let mut out = String::new();
        for child in el.children() {
            match child.value() {
                Node::Text(t) => out.push_str(t),
                Node::Element(_) => {
                    let ce = ElementRef::wrap(child).expect("element node");
                    let c = self.styles.get(ce);
                    if c.hidden || c.aria_hidden {
                        continue;
                    }
                    if tag(ce) == "img" {
                        out.push_str(attr(ce, "alt").unwrap_or(""));
                    } else {
                        out.push(' ');
                        out.push_str(&self.exposed_text(ce));
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn label_text(&self, el: ElementRef<'_>) -> String {
        let mut out = String::new();
        if let Some(id) = attr(el, "id") {
            for l in self.labels_for.get(id).into_iter().flatten() {
                out.push_str(&self.exposed_text(*l));
            }
        }
        if let Some(l) = el.ancestors().filter_map(ElementRef::wrap).find(|a| tag(*a) == "label") {
            out.push_str(&self.exposed_text(l));
        }
        out
    }

    /// A simplified accessible-name computation. `from_content` allows
    /// the subtree's own text to name the element.
    fn accessible_name(&self, el: ElementRef<'_>, from_content: bool) -> String {
        if let Some(refs) = attr(el, "aria-labelledby") {
            let text: Vec<String> = refs
                .split_whitespace()
                .filter_map(|id| self.ids.get(id))
                .map(|r| self.exposed_text(*r))
                .collect();
            let joined = text.join(" ");
            if !joined.trim().is_empty() {
                return joined.trim().to_string();
            }
        }
        if let Some(l) = attr(el, "aria-label").filter(|l| !l.trim().is_empty()) {
            return l.trim().to_string();
        }
        let input_type = attr(el, "type").unwrap_or("text").to_ascii_lowercase();
        let native = match tag(el) {
            "img" | "area" => attr(el, "alt").unwrap_or("").to_string(),
            "input" => match input_type.as_str() {
                "image" => attr(el, "alt").unwrap_or("").to_string(),
                "submit" => attr(el, "value").unwrap_or("Submit").to_string(),
                "reset" => attr(el, "value").unwrap_or("Reset").to_string(),
                "button" => attr(el, "value").unwrap_or("").to_string(),
                _ => self.label_text(el),
            },
            "select" | "textarea" | "meter" | "progress" => self.label_text(el),
            "button" => {
                let l = self.label_text(el);
                if l.trim().is_empty() {
                    String::new()
                } else {
                    l
                }
            }
            _ => String::new(),
        };
        if !native.trim().is_empty() {
            return native.trim().to_string();
        }
        if from_content {
            let t = self.exposed_text(el);
            if !t.trim().is_empty() {
                return t.split_whitespace().collect::<Vec<_>>().join(" ");
            }
        }
        attr(el, "title").unwrap_or("").trim().to_string()
    }

    fn run(&mut self) {
        let root = self.doc.root_element();
        self.check_duplicate_ids(root);
        let Some(body) = root.children().filter_map(ElementRef::wrap).find(|e| tag(*e) == "body") else {
            return;
        };
        for el in body.descendants().filter_map(ElementRef::wrap) {
            let c = self.styles.get(el);
            if c.hidden {
                continue;
            }
            self.check_contrast(el);
            match tag(el) {
                "img" => self.check_image_alt(el),
                "a" => self.check_link(el),
                "audio" => self.check_audio(el),
                "table" => self.check_table(el),
                "button" | "input" | "select" | "textarea" => self.check_control_name(el),
                _ => {}
            }
            if is_true(attr(el, "aria-hidden")) && !self.parent_style(el).is_some_and(|p| p.aria_hidden) {
                self.check_aria_hidden_focus(el);
            }
            if explicit_role(el).is_some() {
                self.check_role(el);
            }
        }
        self.check_bypass(root, body);
        let mut reported = Vec::new();
        self.region_walk(body, &mut reported);
        for el in reported {
            self.emit(el, RuleCode::AxeE10, Severity::Error, "content is not contained by a landmark".into());
        }
    }

    fn parent_style(&self, el: ElementRef<'_>) -> Option<super::style::Computed> {
        el.parent().and_then(ElementRef::wrap).map(|p| self.styles.get(p))
    }

    fn check_duplicate_ids(&mut self, root: ElementRef<'a>) {
        let mut seen = HashSet::new();
        for el in root.descendants().filter_map(ElementRef::wrap) {
            if let Some(id) = attr(el, "id").filter(|s| !s.is_empty()) {
                if !seen.insert(id) {
                    self.emit(el, RuleCode::HtmlcsE3, Severity::Error, format!("duplicate id \"{id}\""));
                }
            }
        }
    }

    fn check_contrast(&mut self, el: ElementRef<'a>) {
        if own_text(el).trim().is_empty() {
            return;
        }
        let c = self.styles.get(el);
        let (fg, bg) = (c.text_color(), c.backdrop);
        let ratio = contrast_ratio(fg, bg);
        let codes = [RuleCode::AxeE1, RuleCode::HtmlcsE1];
        if c.over_image {
            let msg = format!("text over a background image; contrast against {bg} cannot be determined");
            self.emit_pair(el, codes, Severity::Warning, msg);
        } else if ratio < c.required_ratio() {
            let msg = format!(
                "contrast {:.2}:1 is below {}:1 (foreground {fg}, background {bg})",
                ratio,
                c.required_ratio()
            );
            self.emit_pair(el, codes, Severity::Error, msg);
        }
    }

    fn check_image_alt(&mut self, el: ElementRef<'a>) {
        let c = self.styles.get(el);
        let labelled = ["aria-label", "aria-labelledby"].iter().any(|a| attr(el, a).is_some());
        if attr(el, "alt").is_none() && !labelled && !c.aria_hidden {
            self.emit_pair(el, [RuleCode::AxeE2, RuleCode::HtmlcsE2], Severity::Error, "image has no alt attribute".into());
        }
    }

    fn check_link(&mut self, el: ElementRef<'a>) {
        let c = self.styles.get(el);
        let has_href = attr(el, "href").is_some();
        let content_empty = raw_content(el).trim().is_empty();
        if !has_href {
            let anchored = attr(el, "id").is_some() || attr(el, "name").is_some();
            if !anchored && content_empty {
                self.emit(el, RuleCode::HtmlcsE6, Severity::Error, "anchor has no href, id or content".into());
            }
            return;
        }
        if content_empty {
            self.emit(el, RuleCode::HtmlcsE8, Severity::Error, "link has an href but no text content".into());
        }
        if !c.aria_hidden && self.accessible_name(el, true).is_empty() {
            self.emit(el, RuleCode::AxeE4, Severity::Error, "link has no accessible name".into());
        }
        if !c.underlined && !c.border_cue && !self.exposed_text(el).trim().is_empty() {
            self.check_link_distinction(el);
        }
    }

    fn check_link_distinction(&mut self, link: ElementRef<'a>) {
        let Some(block) = link
            .ancestors()
            .filter_map(ElementRef::wrap)
            .find(|a| !INLINE_TAGS.contains(&tag(*a)))
        else {
            return;
        };
        let surrounding: String = block
            .descendants()
            .filter(|n| !n.ancestors().any(|a| a.id() == link.id()))
            .filter_map(|n| match n.value() {
                Node::Text(t) => Some(&**t),
                _ => None,
            })
            .collect();
        if surrounding.trim().is_empty() {
            return;
        }
        let link_color = self.styles.get(link).text_color();
        let text_color = self.styles.get(block).text_color();
        let ratio = contrast_ratio(link_color, text_color);
        if ratio < LINK_DISTINCTION_RATIO {
            let msg = format!(
                "link relies on colour alone: {link_color} vs surrounding {text_color} is {ratio:.2}:1, below 3:1"
            );
            self.emit_pair(link, [RuleCode::AxeE3, RuleCode::HtmlcsE7], Severity::Error, msg);
        }
    }

    fn check_audio(&mut self, el: ElementRef<'a>) {
        let captioned = el.children().filter_map(ElementRef::wrap).any(|t| {
            tag(t) == "track" && attr(t, "kind").is_some_and(|k| k.trim().eq_ignore_ascii_case("captions"))
        });
        if !captioned {
            self.emit(el, RuleCode::AxeE6, Severity::Error, "audio has no captions track".into());
        }
    }

    fn check_table(&mut self, table: ElementRef<'a>) {
        if explicit_role(table).is_some_and(|r| r == "presentation" || r == "none") {
            return;
        }
        let rows: Vec<ElementRef> = table
            .descendants()
            .filter_map(ElementRef::wrap)
            .filter(|e| tag(*e) == "tr")
            .filter(|tr| {
                tr.ancestors()
                    .filter_map(ElementRef::wrap)
                    .find(|a| tag(*a) == "table")
                    .is_some_and(|t| t.id() == table.id())
            })
            .collect();
        let mut column_headers = 0;
        let mut row_headers = 0;
        let mut all_th_scoped = true;
        let mut all_td_headed = true;
        let mut any_td = false;
        for tr in &rows {
            let cells: Vec<ElementRef> = tr.children().filter_map(ElementRef::wrap).collect();
            let has_td = cells.iter().any(|c| tag(*c) == "td");
            for cell in cells {
                match tag(cell) {
                    "th" => {
                        if has_td {
                            row_headers += 1;
                        } else {
                            column_headers += 1;
                        }
                        all_th_scoped &= attr(cell, "scope").is_some();
                    }
                    "td" => {
                        any_td = true;
                        all_td_headed &= attr(cell, "headers").is_some();
                    }
                    _ => {}
                }
            }
        }
        if column_headers + row_headers == 0 {
            self.emit(table, RuleCode::HtmlcsE5, Severity::Error, "table has no th header cells".into());
        } else if column_headers > 0 && row_headers > 0 && !all_th_scoped && !(any_td && all_td_headed) {
            self.emit(
                table,
                RuleCode::HtmlcsE4,
                Severity::Error,
                "table has row and column headers but no scope or headers attributes".into(),
            );
        }
    }

    fn check_control_name(&mut self, el: ElementRef<'a>) {
        if tag(el) == "input" && attr(el, "type").is_some_and(|t| t.eq_ignore_ascii_case("hidden")) {
            return;
        }
        if self.styles.get(el).aria_hidden {
            return;
        }
        if self.accessible_name(el, tag(el) == "button").is_empty() {
            let msg = format!("{} has no accessible name", tag(el));
            self.emit(el, RuleCode::HtmlcsE9, Severity::Error, msg);
        }
    }

    fn check_aria_hidden_focus(&mut self, el: ElementRef<'a>) {
        let focusable = el
            .descendants()
            .filter_map(ElementRef::wrap)
            .any(|d| !self.styles.get(d).hidden && is_focusable(d));
        if focusable {
            self.emit(el, RuleCode::AxeE7, Severity::Error, "aria-hidden subtree contains focusable elements".into());
        }
    }

    fn check_role(&mut self, el: ElementRef<'a>) {
        let role = explicit_role(el).expect("caller checked");
        let c = self.styles.get(el);
        let Some(parents) = aria_roles().get(role.as_str()) else {
            self.emit(el, RuleCode::AxeE9, Severity::Notice, format!("unknown role \"{role}\" ignored"));
            return;
        };
        if c.aria_hidden {
            return;
        }
        if ARIA_INPUT_ROLES.contains(&role.as_str()) && self.accessible_name(el, false).is_empty() {
            self.emit(el, RuleCode::AxeE8, Severity::Error, format!("{role} has no accessible name"));
        }
        if tag(el) != "button" && role == "button" && self.accessible_name(el, true).is_empty() {
            self.emit(el, RuleCode::HtmlcsE9, Severity::Error, "button has no accessible name".into());
        }
        if parents.is_empty() {
            return;
        }
        let context = el
            .ancestors()
            .filter_map(ElementRef::wrap)
            .filter_map(effective_role)
            .find(|r| !matches!(r.as_str(), "generic" | "none" | "presentation"));
        if !context.as_deref().is_some_and(|r| parents.contains(&r)) {
            let msg = format!(
                "role \"{role}\" must be contained by {}; found {}",
                parents.join(", "),
                context.as_deref().unwrap_or("none")
            );
            self.emit(el, RuleCode::AxeE9, Severity::Error, msg);
        }
    }

    fn check_bypass(&mut self, root: ElementRef<'a>, body: ElementRef<'a>) {
        let mut bypass = false;
        for el in body.descendants().filter_map(ElementRef::wrap) {
            if self.styles.get(el).hidden {
                continue;
            }
            let heading = effective_role(el).is_some_and(|r| r == "heading");
            let skip = is_skip_link(el)
                && attr(el, "href").is_some_and(|h| self.ids.contains_key(&h[1..]));
            if heading || skip || self.is_landmark(el) {
                bypass = true;
                break;
            }
        }
        if !bypass {
            self.emit(root, RuleCode::AxeE5, Severity::Error, "page has no heading, landmark or skip link".into());
        }
    }

    fn has_content(&self, el: ElementRef<'_>) -> bool {
        if CONTENT_TAGS.contains(&tag(el)) {
            return true;
        }
        el.descendants().any(|n| match n.value() {
            Node::Text(t) => !t.trim().is_empty(),
            Node::Element(e) => CONTENT_TAGS.contains(&e.name()),
            _ => false,
        })
    }

    /// Collects the outermost elements holding content outside landmarks.
    fn region_walk(&self, el: ElementRef<'a>, reported: &mut Vec<ElementRef<'a>>) {
        for child in el.children() {
            match child.value() {
                Node::Text(t) if !t.trim().is_empty() => {
                    if !reported.iter().any(|r| r.id() == el.id()) {
                        reported.push(el);
                    }
                }
                Node::Element(_) => {
                    let ce = ElementRef::wrap(child).expect("element node");
                    let c = self.styles.get(ce);
                    if c.hidden || c.aria_hidden || self.is_landmark(ce) || is_skip_link(ce) {
                        continue;
                    }
                    if self.has_landmark_below.contains(&ce.id()) {
                        self.region_walk(ce, reported);
                    } else if self.has_content(ce) {
                        reported.push(ce);
                    }
                }
                _ => {}
            }
        }
    }
}

fn assemble(document: &Path, theme: &Theme, mut scanner: Scanner<'_>) -> ScanResult {
    scanner.run();
    let mut hits = std::mem::take(&mut scanner.hits);
    hits.sort_by_key(|h| (h.0, h.1));
    let findings: Vec<A11yFinding> = hits
        .into_iter()
        .map(|(_, code, severity, el, message)| A11yFinding {
            document: document.to_path_buf(),
            theme: theme.name.clone(),
            ruleset: code.ruleset(),
            rule_code: code,
            severity,
            impact: code.impact(),
            selector: css_path(el),
            snippet: snippet(el),
            message,
        })
        .collect();
    let mut counts = BTreeMap::new();
    for f in &findings {
        *counts.entry(f.rule_code).or_insert(0) += 1;
    }
    ScanResult {
        document: document.to_path_buf(),
        theme: theme.name.clone(),
        findings,
        counts,
    }
}

/// Scans HTML text. `theme` supplies the root colours the cascade starts
/// from.
pub fn scan_html(html: &str, document: &Path, theme: &Theme, rules: &RuleSelection) -> ScanResult {
    let doc = Html::parse_document(html);
    let scanner = Scanner::new(&doc, theme, rules);
    assemble(document, theme, scanner)
}

pub fn scan_bytes(bytes: &[u8], document: &Path, theme: &Theme, rules: &RuleSelection) -> Result<ScanResult, ScanError> {
    let html = std::str::from_utf8(bytes).map_err(|e| ScanError::UnparseableDocument {
        path: document.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(scan_html(html, document, theme, rules))
}

pub fn scan(doc: &HtmlDocument, theme: &Theme) -> ScanResult {
    scan_with(doc, theme, &RuleSelection::all())
}

pub fn scan_with(doc: &HtmlDocument, theme: &Theme, rules: &RuleSelection) -> ScanResult {
    scan_html(&doc.html, &doc.source_notebook, theme, rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scraper::Selector;

    fn light() -> Theme {
        Theme::builtin("light").unwrap()
    }

    fn page(body: &str) -> String {
        format!("<!DOCTYPE html><html lang=\"en\"><head><title>t</title></head><body><main><h1>Title</h1>{body}</main></body></html>")
    }

    fn codes(html: &str) -> Vec<&'static str> {
        scan_html(html, Path::new("t.html"), &light(), &RuleSelection::all())
            .findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .map(|f| f.rule_code.as_str())
            .collect()
    }

    #[test]
    fn aria_table_parses() {
        let roles = aria_roles();
        assert_eq!(roles["listitem"], vec!["list"]);
        assert!(roles["button"].is_empty());
        assert!(!roles.contains_key("banana"));
    }

    #[test]
    fn clean_page_is_clean() {
        let html = page(r#"<p>Read <a href="/x">this</a>.</p><img src="a.png" alt="chart">"#);
        assert!(codes(&html).is_empty(), "{:?}", codes(&html));
    }

    #[test]
    fn contrast_boundary() {
        // #767676 on white is 4.54:1 and passes; #777777 is 4.48:1.
        assert!(codes(&page(r#"<p style="color:#767676">x</p>"#)).is_empty());
        assert_eq!(codes(&page(r#"<p style="color:#777777">x</p>"#)), vec!["AXE-E1", "HTMLCS-E1"]);
        // Large text only needs 3:1.
        assert!(codes(&page(r#"<p style="color:#777777;font-size:24px">x</p>"#)).is_empty());
    }

    #[test]
    fn background_image_is_a_warning() {
        let html = page(r#"<p style="background-image:url(a.png)">x</p>"#);
        let r = scan_html(&html, Path::new("t"), &light(), &RuleSelection::all());
        assert_eq!(r.findings.len(), 2);
        assert!(r.findings.iter().all(|f| f.severity == Severity::Warning));
    }

    #[test]
    fn selectors_resolve_to_the_element() {
        let html = page(r#"<div><p>a</p><p><img src="x.png"></p></div>"#);
        let r = scan_html(&html, Path::new("t"), &light(), &RuleSelection::all());
        let f = r.findings.iter().find(|f| f.rule_code == RuleCode::AxeE2).unwrap();
        let doc = Html::parse_document(&html);
        let hits: Vec<_> = doc.select(&Selector::parse(&f.selector).unwrap()).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].value().name(), "img");
    }

    #[test]
    fn findings_are_in_document_order() {
        let html = page(r#"<img src="b.png"><p id="d">x</p><p id="d">y</p><table><tr><td>1</td></tr></table>"#);
        assert_eq!(codes(&html), vec!["AXE-E2", "HTMLCS-E2", "HTMLCS-E3", "HTMLCS-E5"]);
    }

    #[test]
    fn unknown_role_is_a_notice() {
        let html = page(r#"<div role="banana">x</div>"#);
        let r = scan_html(&html, Path::new("t"), &light(), &RuleSelection::all());
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].severity, Severity::Notice);
    }

    #[test]
    fn required_parent_satisfied_through_generic_wrappers() {
        assert!(codes(&page(r#"<div role="list"><div><div role="listitem">a</div></div></div>"#)).is_empty());
        assert_eq!(codes(&page(r#"<div role="listitem">a</div>"#)), vec!["AXE-E9"]);
    }

    #[test]
    fn pandas_style_table_needs_scope() {
        let t = "<table><thead><tr><th></th><th>a</th></tr></thead><tbody><tr><th>0</th><td>1</td></tr></tbody></table>";
        assert_eq!(codes(&page(t)), vec!["HTMLCS-E4"]);
        let scoped = t.replace("<th>", "<th scope=\"col\">");
        assert!(codes(&page(&scoped)).is_empty());
    }

    #[test]
    fn labelled_controls_have_names() {
        assert!(codes(&page(r#"<label for="q">Query</label><input id="q">"#)).is_empty());
        assert!(codes(&page(r#"<label>Query <input></label>"#)).is_empty());
        assert!(codes(&page(r#"<input type="submit">"#)).is_empty());
        assert_eq!(codes(&page(r#"<input>"#)), vec!["HTMLCS-E9"]);
    }

    #[test]
    fn rule_selection_filters() {
        let html = page(r#"<img src="b.png">"#);
        let only = RuleSelection::parse("HTMLCS-E2").unwrap();
        let r = scan_html(&html, Path::new("t"), &light(), &only);
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.counts[&RuleCode::HtmlcsE2], 1);
    }

    #[test]
    fn invalid_utf8_is_unparseable() {
        let err = scan_bytes(&[0xff, 0xfe, b'<'], Path::new("x.html"), &light(), &RuleSelection::all());
        assert!(matches!(err, Err(ScanError::UnparseableDocument { .. })));
    }
}
