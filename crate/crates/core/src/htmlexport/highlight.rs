//! A small Python lexer for code-cell colouring. It only needs to find
//! keywords, strings, comments and numbers; everything else is plain text.

use super::theme::Palette;
use crate::htmlutil::escape_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Plain,
    Keyword,
    String,
    Comment,
    Number,
}

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

fn string_end(chars: &[char], start: usize) -> usize {
    let quote = chars[start];
    let triple = chars.get(start + 1) == Some(&quote) && chars.get(start + 2) == Some(&quote);
    let mut i = start + if triple { 3 } else { 1 };
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            '\n' if !triple => return i,
            c if c == quote => {
                if !triple {
                    return i + 1;
                }
                if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                    return i + 3;
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    chars.len()
}

fn is_prefix(word: &str) -> bool {
    word.len() <= 2 && word.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'u' | 'f'))
}

/// Splits source into classified spans that concatenate back to `src`.
pub fn tokenize(src: &str) -> Vec<(TokenClass, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out: Vec<(TokenClass, String)> = Vec::new();
    let mut push = |class: TokenClass, text: &[char]| {
        match out.last_mut() {
            Some((c, s)) if *c == class && class == TokenClass::Plain => s.extend(text),
            _ => out.push((class, text.iter().collect())),
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            let end = chars[i..].iter().position(|&c| c == '\n').map_or(chars.len(), |p| i + p);
            push(TokenClass::Comment, &chars[i..end]);
            i = end;
        } else if c == '"' || c == '\'' {
            let end = string_end(&chars, i);
            push(TokenClass::String, &chars[i..end]);
            i = end;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut end = i + 1;
            while end < chars.len() {
                let d = chars[end];
                let exp_sign = (d == '+' || d == '-') && matches!(chars[end - 1], 'e' | 'E')
                    && !chars[i..end].iter().any(|c| matches!(c, 'x' | 'X'));
                if d.is_ascii_alphanumeric() || d == '_' || d == '.' || exp_sign {
                    end += 1;
                } else {
                    break;
                }
            }
            push(TokenClass::Number, &chars[i..end]);
            i = end;
        } else if c.is_alphabetic() || c == '_' {
            let mut end = i + 1;
            while end < chars.len() && (chars[end].is_alphanumeric() || chars[end] == '_') {
                end += 1;
            }
            let word: String = chars[i..end].iter().collect();
            if is_prefix(&word) && matches!(chars.get(end), Some('"') | Some('\'')) {
                let close = string_end(&chars, end);
                push(TokenClass::String, &chars[i..close]);
                i = close;
                continue;
            }
            let class = if KEYWORDS.contains(&word.as_str()) {
                TokenClass::Keyword
            } else {
                TokenClass::Plain
            };
            push(class, &chars[i..end]);
            i = end;
        } else {
            push(TokenClass::Plain, &chars[i..i + 1]);
            i += 1;
        }
    }
    out
}

/// HTML for the inside of a `<code>` element.
pub fn highlight_python(src: &str, palette: &Palette, out: &mut String) {
    for (class, text) in tokenize(src) {
        let color = match class {
            TokenClass::Plain => {
                escape_text(&text, out);
                continue;
            }
            TokenClass::Keyword => palette.code_keyword,
            TokenClass::String => palette.code_string,
            TokenClass::Comment => palette.code_comment,
            TokenClass::Number => palette.code_number,
        };
        out.push_str("<span style=\"color:");
        out.push_str(&color.to_hex());
        out.push_str("\">");
        escape_text(&text, out);
        out.push_str("</span>");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(src: &str) -> Vec<(TokenClass, String)> {
        tokenize(src).into_iter().filter(|(c, _)| *c != TokenClass::Plain).collect()
    }

    #[test]
    fn roundtrips_text() {
        let src = "def f(x='a#b', y=1e-3):  # note\n    return f\"{x}\" + r'\\d' + \"\"\"doc\n\"\"\"\n";
        let joined: String = tokenize(src).into_iter().map(|(_, s)| s).collect();
        assert_eq!(joined, src);
    }

    #[test]
    fn classifies() {
        let got = classes("import numpy as np  # arrays\nx = 0x1F + 2.5e-3 + rb'raw'");
        let want = vec![
            (TokenClass::Keyword, "import".to_string()),
            (TokenClass::Keyword, "as".to_string()),
            (TokenClass::Comment, "# arrays".to_string()),
            (TokenClass::Number, "0x1F".to_string()),
            (TokenClass::Number, "2.5e-3".to_string()),
            (TokenClass::String, "rb'raw'".to_string()),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn identifiers_with_digits_are_plain() {
        assert!(classes("x1 = y2").is_empty());
    }

    #[test]
    fn unterminated_string_stops_at_newline() {
        let got = classes("'abc\nif");
        assert_eq!(got[0], (TokenClass::String, "'abc".to_string()));
        assert_eq!(got[1], (TokenClass::Keyword, "if".to_string()));
    }
}
