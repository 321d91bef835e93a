//! Tokenizer and s-expression reader.
//!
//! `( ... )` builds a list and `[ ... ]` builds an agent group. Symbols are
//! lowercased. `;` starts a comment running to the end of the line.

use crate::diagnostic::{Code, Diagnostic};
use crate::span::{FileId, Pos, Span};

/// Nesting beyond this is rejected so that later recursive passes stay bounded.
pub const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Span),
    List(Vec<SExpr>, Span),
    Group(Vec<SExpr>, Span),
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Symbol(_, s) | SExpr::List(_, s) | SExpr::Group(_, s) => *s,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v, _) => Some(v),
            _ => None,
        }
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ';')
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (off, c) = self.chars.next()?;
        self.pos.offset = off + c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

pub fn tokenize(file: FileId, text: &str) -> Vec<Token> {
    let mut cur = Cursor {
        chars: text.char_indices().peekable(),
        pos: Pos::default(),
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == ';' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let kind = match c {
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            _ => {
                let mut s = String::new();
                while let Some(c) = cur.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    s.push(c);
                    cur.bump();
                }
                tokens.push(Token {
                    kind: TokenKind::Symbol(s.to_lowercase()),
                    span: Span::new(file, start, cur.pos),
                });
                continue;
            }
        };
        cur.bump();
        tokens.push(Token {
            kind,
            span: Span::new(file, start, cur.pos),
        });
    }
    tokens
}

/// Position just past the last character of `text`.
pub fn end_pos(text: &str) -> Pos {
    let mut pos = Pos::default();
    for c in text.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    }
    pos.offset = text.len();
    pos
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(file: FileId, text: &str) -> Result<Vec<SExpr>, Diagnostic> {
    let tokens = tokenize(file, text);
    // (is_bracket, open span, children)
    let mut stack: Vec<(bool, Span, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok.kind {
            TokenKind::LParen | TokenKind::LBracket => {
                if stack.len() >= MAX_NESTING {
                    return Err(Diagnostic::error(
                        Code::E_SYNTAX,
                        tok.span,
                        format!("nesting deeper than {MAX_NESTING} levels"),
                    ));
                }
                stack.push((tok.kind == TokenKind::LBracket, tok.span, Vec::new()));
            }
            TokenKind::RParen | TokenKind::RBracket => {
                let closing_bracket = tok.kind == TokenKind::RBracket;
                let Some((bracket, open, children)) = stack.pop() else {
                    return Err(Diagnostic::error(
                        Code::E_UNBALANCED,
                        tok.span,
                        format!("unmatched `{}`", if closing_bracket { ']' } else { ')' }),
                    ));
                };
                if bracket != closing_bracket {
                    return Err(Diagnostic::error(
                        Code::E_UNBALANCED,
                        tok.span,
                        format!(
                            "`{}` opened at {} closed by `{}`",
                            if bracket { '[' } else { '(' },
                            open,
                            if closing_bracket { ']' } else { ')' }
                        ),
                    ));
                }
                let span = open.to(tok.span);
                let node = if bracket {
                    SExpr::Group(children, span)
                } else {
                    SExpr::List(children, span)
                };
                match stack.last_mut() {
                    Some((_, _, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
            TokenKind::Symbol(s) => {
                let node = SExpr::Symbol(s, tok.span);
                match stack.last_mut() {
                    Some((_, _, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((bracket, open, _)) = stack.last() {
        let end = end_pos(text);
        return Err(Diagnostic::error(
            Code::E_UNBALANCED,
            Span::new(file, end, end),
            format!(
                "unbalanced parenthesis: `{}` opened at {} is never closed",
                if *bracket { '[' } else { '(' },
                open
            ),
        ));
    }
    Ok(top)
}
