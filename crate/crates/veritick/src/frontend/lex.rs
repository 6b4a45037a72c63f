//! Tokenizer for the Verilog subset. Annotation comments are lexed into
//! dedicated tokens instead of being discarded.

use super::ast::SourceSpan;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Integer literal; sized literals carry their declared width.
    Number { value: u64, width: Option<u8> },
    Punct(&'static str),
    /// One `key(arg...)` annotation from a comment.
    Annotation { key: String, body: String },
}

pub type SpannedTok = (SourceSpan, Tok);

const PUNCTS: &[&str] = &[
    "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "@*", "(", ")", "[", "]", "{", "}", ";", ",",
    ":", "?", "=", "<", ">", "+", "-", "*", "&", "|", "^", "~", "!", "@", ".",
];

const ANNOTATION_KEYS: &[&str] = &["source", "sink", "assume", "init_eq", "always_eq"];

pub fn lex(text: &str) -> Result<Vec<SpannedTok>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let span = |line, col| SourceSpan { line, col };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let comment: String = chars[start..end].iter().collect();
            lex_annotations(&comment, span(line, col), &mut toks)?;
            i = end;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let mut j = i + 2;
            while j + 1 < chars.len() && !(chars[j] == '*' && chars[j + 1] == '/') {
                if chars[j] == '\n' {
                    line += 1;
                    col = 1;
                }
                j += 1;
            }
            if j + 1 >= chars.len() {
                return Err(SyntaxError::new(span(line, col), "unterminated block comment"));
            }
            i = j + 2;
            continue;
        }
        if c == '#' {
            return Err(SyntaxError::new(
                span(line, col),
                "non-synthesizable construct: delay `#`",
            ));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let here = span(line, col);
            col += i - start;
            toks.push((here, Tok::Ident(word)));
            continue;
        }
        if c.is_ascii_digit() {
            let here = span(line, col);
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                i += 1;
            }
            let digits: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            if i < chars.len() && chars[i] == '\'' {
                // Sized literal: <width>'<base><digits>
                i += 1;
                let base = chars.get(i).copied().ok_or_else(|| {
                    SyntaxError::new(here, "unterminated sized literal")
                })?;
                i += 1;
                let radix = match base.to_ascii_lowercase() {
                    'b' => 2,
                    'd' => 10,
                    'h' => 16,
                    other => {
                        return Err(SyntaxError::new(
                            here,
                            format!("unsupported literal base `{other}`"),
                        ))
                    }
                };
                let vstart = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                let vdigits: String = chars[vstart..i].iter().filter(|c| **c != '_').collect();
                if vdigits.chars().any(|c| matches!(c, 'x' | 'X' | 'z' | 'Z')) {
                    return Err(SyntaxError::new(
                        here,
                        "x/z literals are outside the two-state subset",
                    ));
                }
                let width: u8 = digits.parse().map_err(|_| {
                    SyntaxError::new(here, format!("bad literal width `{digits}`"))
                })?;
                let value = u64::from_str_radix(&vdigits, radix).map_err(|_| {
                    SyntaxError::new(here, format!("bad literal digits `{vdigits}`"))
                })?;
                if width == 0 || width > 64 {
                    return Err(SyntaxError::new(here, "literal width must be in 1..=64"));
                }
                col += i - start;
                toks.push((
                    here,
                    Tok::Number {
                        value,
                        width: Some(width),
                    },
                ));
            } else {
                let value: u64 = digits.parse().map_err(|_| {
                    SyntaxError::new(here, format!("integer literal `{digits}` out of range"))
                })?;
                col += i - start;
                toks.push((here, Tok::Number { value, width: None }));
            }
            continue;
        }
        let mut matched = false;
        for p in PUNCTS {
            let pc: Vec<char> = p.chars().collect();
            if chars[i..].starts_with(&pc) {
                toks.push((span(line, col), Tok::Punct(p)));
                i += pc.len();
                col += pc.len();
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(SyntaxError::new(
                span(line, col),
                format!("unexpected character `{c}`"),
            ));
        }
    }
    Ok(toks)
}

/// Extracts `key(arg); key(arg); ...` annotations from a line comment.
/// Comments that do not look like annotations are ignored.
fn lex_annotations(
    comment: &str,
    at: SourceSpan,
    toks: &mut Vec<SpannedTok>,
) -> Result<(), SyntaxError> {
    let mut rest = comment.trim();
    while !rest.is_empty() {
        let Some((key, tail)) = rest.split_once('(') else {
            return Ok(());
        };
        let key = key.trim();
        if !ANNOTATION_KEYS.contains(&key) {
            return Ok(());
        }
        let Some((body, tail)) = tail.split_once(')') else {
            return Err(SyntaxError::new(
                at,
                format!("unterminated annotation `{key}(...`"),
            ));
        };
        toks.push((
            at,
            Tok::Annotation {
                key: key.to_string(),
                body: body.trim().to_string(),
            },
        ));
        rest = tail.trim_start_matches([';', ' ', '\t']).trim();
    }
    Ok(())
}
