//! CommonMark analysis of markdown cells.
//!
//! The same parser options are used for measuring cells and for rendering
//! them, so headings and tables found here are exactly the ones the HTML
//! export contains.

use pulldown_cmark::{Event, Options, Parser, Tag, TagEnd};

use crate::htmlutil;

pub fn options() -> Options {
    Options::ENABLE_TABLES | Options::ENABLE_STRIKETHROUGH
}

pub fn parser(src: &str) -> Parser<'_> {
    Parser::new_ext(src, options())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkdownImage {
    pub dest: String,
    pub alt: String,
    pub title: String,
}

/// Landmark-relevant content of one rendered markdown cell.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct MarkdownSummary {
    /// Heading levels in document order (ATX, setext and raw `<hN>`).
    pub headings: Vec<u8>,
    /// (rows, cols) per table, pipe tables and raw HTML tables alike.
    /// Rows include the header row.
    pub tables: Vec<(usize, usize)>,
    /// Markdown image syntax occurrences.
    pub images: Vec<MarkdownImage>,
    pub links: usize,
    /// True when the cell renders nothing but images (and whitespace).
    pub image_only: bool,
}

struct TableAcc {
    rows: usize,
    cols: usize,
    current: usize,
}

pub fn summarize(src: &str) -> MarkdownSummary {
    let mut summary = MarkdownSummary::default();
    let mut html_buf = String::new();
    let mut tables: Vec<TableAcc> = Vec::new();
    let mut image_depth = 0usize;
    let mut alt_buf = String::new();
    let mut pending_image: Option<(String, String)> = None;
    let mut saw_non_image_text = false;

    let flush_html = |buf: &mut String, summary: &mut MarkdownSummary| {
        if buf.trim().is_empty() {
            buf.clear();
            return;
        }
        let facts = htmlutil::fragment_facts(buf);
        summary.headings.extend(facts.headings);
        summary.tables.extend(facts.tables);
        summary.links += facts.links;
        buf.clear();
    };

    for event in parser(src) {
        match event {
            Event::Html(s) | Event::InlineHtml(s) => {
                html_buf.push_str(&s);
                saw_non_image_text |= !s.trim().is_empty();
            }
            Event::Start(Tag::Heading { level, .. }) => {
                flush_html(&mut html_buf, &mut summary);
                summary.headings.push(level as u8);
            }
            Event::Start(Tag::Table(_)) => {
                flush_html(&mut html_buf, &mut summary);
                tables.push(TableAcc { rows: 0, cols: 0, current: 0 });
            }
            Event::Start(Tag::TableHead) | Event::Start(Tag::TableRow) => {
                if let Some(t) = tables.last_mut() {
                    t.current = 0;
                }
            }
            Event::Start(Tag::TableCell) => {
                if let Some(t) = tables.last_mut() {
                    t.current += 1;
                }
            }
            Event::End(TagEnd::TableHead) | Event::End(TagEnd::TableRow) => {
                if let Some(t) = tables.last_mut() {
                    t.rows += 1;
                    t.cols = t.cols.max(t.current);
                }
            }
            Event::End(TagEnd::Table) => {
                if let Some(t) = tables.pop() {
                    summary.tables.push((t.rows, t.cols));
                }
            }
            Event::Start(Tag::Link { .. }) => summary.links += 1,
            Event::Start(Tag::Image { dest_url, title, .. }) => {
                if image_depth == 0 {
                    alt_buf.clear();
                    pending_image = Some((dest_url.to_string(), title.to_string()));
                }
                image_depth += 1;
            }
            Event::End(TagEnd::Image) => {
                image_depth = image_depth.saturating_sub(1);
                if image_depth == 0 {
                    if let Some((dest, title)) = pending_image.take() {
                        summary.images.push(MarkdownImage {
                            dest,
                            alt: std::mem::take(&mut alt_buf),
                            title,
                        });
                    }
                }
            }
            Event::Text(t) | Event::Code(t) => {
                if image_depth > 0 {
                    alt_buf.push_str(&t);
                } else if !t.trim().is_empty() {
                    saw_non_image_text = true;
                }
            }
            Event::End(TagEnd::HtmlBlock) | Event::End(TagEnd::Paragraph) => {
                flush_html(&mut html_buf, &mut summary);
            }
            Event::Rule | Event::Start(Tag::CodeBlock(_)) => saw_non_image_text = true,
            _ => {}
        }
    }
    flush_html(&mut html_buf, &mut summary);
    summary.image_only = !summary.images.is_empty() && !saw_non_image_text;
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atx_setext_and_html_headings() {
        let s = summarize("# One\n\nTwo\n---\n\n<h4>Four</h4>\n\n###### Six");
        assert_eq!(s.headings, vec![1, 2, 4, 6]);
    }

    #[test]
    fn pipe_table_shape_counts_header_row() {
        let s = summarize("| a | b |\n|---|---|\n| 1 | 2 |\n| 3 | 4 |\n");
        assert_eq!(s.tables, vec![(3, 2)]);
    }

    #[test]
    fn image_alt_from_description() {
        let s = summarize("[![Open In Colab](https://colab.research.google.com/assets/colab-badge.svg)](https://x)");
        assert_eq!(s.images.len(), 1);
        assert_eq!(s.images[0].alt, "Open In Colab");
        assert!(s.images[0].dest.ends_with("colab-badge.svg"));
        assert_eq!(s.links, 1);
        assert!(s.image_only);
    }

    #[test]
    fn reference_images_and_nested_brackets() {
        let s = summarize("![a [nested] alt][ref]\n\n[ref]: pic.png \"T\"\n");
        assert_eq!(s.images.len(), 1);
        assert_eq!(s.images[0].alt, "a [nested] alt");
        assert_eq!(s.images[0].dest, "pic.png");
        assert_eq!(s.images[0].title, "T");
    }

    #[test]
    fn text_cells_are_not_image_only() {
        assert!(!summarize("Look: ![x](a.png)").image_only);
        assert!(!summarize("plain").image_only);
    }

    #[test]
    fn code_fences_hide_headings() {
        let s = summarize("```\n# not a heading\n```\n");
        assert!(s.headings.is_empty());
    }
}
