use super::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Keyword(&'static str),
    /// Digits with an optional fractional part, kept verbatim.
    Number(String),
    Slash,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Arrow,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Keyword(k) => format!("keyword `{k}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Slash => "`/`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Arrow => "`=>`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool, into: &mut String) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            into.push(c);
            self.bump();
        }
    }
}

/// Splits `source` into tokens. Unrecognized characters become error
/// diagnostics and are skipped; the token stream always ends with `Eof`.
pub(crate) fn tokenize(source: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    loop {
        let (line, column) = (cur.line, cur.column);
        let span = |length| SourceSpan {
            line,
            column,
            length,
        };
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: span(0),
            });
            break;
        };
        let single = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            ',' => Some(TokenKind::Comma),
            ';' => Some(TokenKind::Semi),
            '/' => Some(TokenKind::Slash),
            _ => None,
        };
        if let Some(kind) = single {
            cur.bump();
            tokens.push(Token {
                kind,
                span: span(1),
            });
            continue;
        }
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            '=' => {
                cur.bump();
                if cur.peek() == Some('>') {
                    cur.bump();
                    tokens.push(Token {
                        kind: TokenKind::Arrow,
                        span: span(2),
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Eq,
                        span: span(1),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut word = String::new();
                cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_', &mut word);
                let length = word.chars().count();
                let kind = match crate::id::KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                };
                tokens.push(Token {
                    kind,
                    span: span(length),
                });
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                cur.take_while(|c| c.is_ascii_digit(), &mut text);
                if cur.peek() == Some('.') {
                    text.push('.');
                    cur.bump();
                    let before = text.len();
                    cur.take_while(|c| c.is_ascii_digit(), &mut text);
                    if text.len() == before {
                        errors.push(ParseDiagnostic::error(
                            span(text.len()),
                            format!("malformed number `{text}`: expected digits after `.`"),
                        ));
                        continue;
                    }
                }
                let length = text.len();
                tokens.push(Token {
                    kind: TokenKind::Number(text),
                    span: span(length),
                });
            }
            other => {
                cur.bump();
                errors.push(ParseDiagnostic::error(
                    span(1),
                    format!("unexpected character {other:?}"),
                ));
            }
        }
    }
    (tokens, errors)
}
