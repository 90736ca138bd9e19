use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseDiagnostic, SourceSpan};
use crate::algebra::{EntityNode, Level, RelationshipNode, Role, StructureOfLevels, Violation};
use crate::id::ElementId;
use crate::probability::{self, Denotation};
use crate::value::{parse_ratio, ProbabilityValue};

#[derive(Debug)]
struct Spanned<T> {
    value: T,
    span: SourceSpan,
}

#[derive(Debug)]
enum Attr {
    In,
    Out,
    Opaque,
    Alt(Spanned<String>),
    P(Spanned<String>),
}

impl Attr {
    fn key(&self) -> &'static str {
        match self {
            Attr::In => "in",
            Attr::Out => "out",
            Attr::Opaque => "opaque",
            Attr::Alt(_) => "alt",
            Attr::P(_) => "p",
        }
    }
}

#[derive(Debug)]
struct Member {
    is_rel: bool,
    name: Spanned<String>,
    parent: Option<Spanned<String>>,
    attrs: Vec<Spanned<Attr>>,
}

#[derive(Debug)]
struct LevelBlock {
    number: Spanned<String>,
    members: Vec<Member>,
}

#[derive(Debug)]
struct Denote {
    outcome: Spanned<String>,
    relation: Spanned<String>,
    span: SourceSpan,
}

#[derive(Debug)]
struct StructureBlock {
    name: Spanned<String>,
    levels: Vec<LevelBlock>,
    denotes: Vec<Denote>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type Syntax<T> = std::result::Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if token.kind != TokenKind::Eof {
            self.pos += 1;
        }
        token
    }

    fn unexpected(&self, expected: &str) -> ParseDiagnostic {
        let token = self.peek();
        ParseDiagnostic::error(
            token.span,
            format!("expected {expected}, found {}", token.kind.describe()),
        )
    }

    fn expect(&mut self, kind: TokenKind) -> Syntax<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&kind.describe()))
        }
    }

    fn at_keyword(&self, keyword: &'static str) -> bool {
        self.peek().kind == TokenKind::Keyword(keyword)
    }

    fn expect_keyword(&mut self, keyword: &'static str) -> Syntax<Token> {
        self.expect(TokenKind::Keyword(keyword))
    }

    fn ident(&mut self, what: &str) -> Syntax<Spanned<String>> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let value = name.clone();
                let span = self.advance().span;
                Ok(Spanned { value, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn file(&mut self) -> Syntax<Vec<StructureBlock>> {
        let mut out = Vec::new();
        loop {
            if self.peek().kind == TokenKind::Eof {
                if out.is_empty() {
                    return Err(self.unexpected("`structure`"));
                }
                return Ok(out);
            }
            out.push(self.structure()?);
        }
    }

    fn structure(&mut self) -> Syntax<StructureBlock> {
        self.expect_keyword("structure")?;
        let name = self.ident("structure name")?;
        self.expect(TokenKind::LBrace)?;
        let mut levels = Vec::new();
        while self.at_keyword("level") {
            levels.push(self.level()?);
        }
        if levels.is_empty() {
            return Err(self.unexpected("`level`"));
        }
        let mut denotes = Vec::new();
        while self.at_keyword("denote") {
            let start = self.advance().span;
            let outcome = self.ident("outcome name")?;
            self.expect(TokenKind::Arrow)?;
            let relation = self.ident("relationship name")?;
            self.expect(TokenKind::Semi)?;
            denotes.push(Denote {
                outcome,
                relation,
                span: start,
            });
        }
        if self.peek().kind != TokenKind::RBrace {
            let expected = if denotes.is_empty() {
                "`level`, `denote` or `}`"
            } else {
                "`denote` or `}`"
            };
            return Err(self.unexpected(expected));
        }
        self.advance();
        Ok(StructureBlock {
            name,
            levels,
            denotes,
        })
    }

    fn level(&mut self) -> Syntax<LevelBlock> {
        self.expect_keyword("level")?;
        let number = match &self.peek().kind {
            TokenKind::Number(text) => {
                let value = text.clone();
                let span = self.advance().span;
                Spanned { value, span }
            }
            _ => return Err(self.unexpected("level number")),
        };
        self.expect(TokenKind::LBrace)?;
        let mut members = Vec::new();
        while self.at_keyword("entity") || self.at_keyword("rel") {
            members.push(self.member()?);
        }
        if members.is_empty() {
            return Err(self.unexpected("`entity` or `rel`"));
        }
        if self.peek().kind != TokenKind::RBrace {
            return Err(self.unexpected("`entity`, `rel` or `}`"));
        }
        self.advance();
        Ok(LevelBlock { number, members })
    }

    fn member(&mut self) -> Syntax<Member> {
        let is_rel = self.at_keyword("rel");
        self.advance();
        let name = self.ident("element name")?;
        let parent = if self.at_keyword("of") {
            self.advance();
            Some(self.ident("parent name")?)
        } else {
            None
        };
        let mut attrs = Vec::new();
        if self.peek().kind == TokenKind::LBracket {
            self.advance();
            loop {
                attrs.push(self.attr()?);
                match self.peek().kind {
                    TokenKind::Comma => {
                        self.advance();
                    }
                    TokenKind::RBracket => {
                        self.advance();
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `]`")),
                }
            }
        }
        self.expect(TokenKind::Semi)?;
        Ok(Member {
            is_rel,
            name,
            parent,
            attrs,
        })
    }

    fn attr(&mut self) -> Syntax<Spanned<Attr>> {
        let token = self.peek().clone();
        let attr = match token.kind {
            TokenKind::Keyword("in") => {
                self.advance();
                Attr::In
            }
            TokenKind::Keyword("out") => {
                self.advance();
                Attr::Out
            }
            TokenKind::Keyword("opaque") => {
                self.advance();
                Attr::Opaque
            }
            TokenKind::Keyword("alt") => {
                self.advance();
                self.expect(TokenKind::Eq)?;
                Attr::Alt(self.ident("group tag")?)
            }
            TokenKind::Keyword("p") => {
                self.advance();
                self.expect(TokenKind::Eq)?;
                Attr::P(self.number()?)
            }
            _ => return Err(self.unexpected("attribute (`in`, `out`, `opaque`, `alt=`, `p=`)")),
        };
        Ok(Spanned {
            value: attr,
            span: token.span,
        })
    }

    fn number(&mut self) -> Syntax<Spanned<String>> {
        let TokenKind::Number(first) = self.peek().kind.clone() else {
            return Err(self.unexpected("probability"));
        };
        let start = self.advance().span;
        if self.peek().kind != TokenKind::Slash {
            return Ok(Spanned {
                value: first,
                span: start,
            });
        }
        self.advance();
        let TokenKind::Number(second) = self.peek().kind.clone() else {
            return Err(self.unexpected("denominator"));
        };
        let end = self.advance().span;
        let span = if end.line == start.line {
            SourceSpan {
                length: end.column + end.length - start.column,
                ..start
            }
        } else {
            start
        };
        Ok(Spanned {
            value: format!("{first}/{second}"),
            span,
        })
    }
}

/// Result of parsing one file: structures that passed every check, plus all
/// diagnostics (errors and warnings).
#[derive(Debug, Clone, Default)]
pub struct ParseOutput {
    pub structures: Vec<StructureOfLevels>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutput {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }
}

pub fn parse_with_warnings(source: &str) -> ParseOutput {
    let (tokens, lex_errors) = tokenize(source);
    if !lex_errors.is_empty() {
        return ParseOutput {
            structures: Vec::new(),
            diagnostics: lex_errors,
        };
    }
    let mut parser = Parser { tokens, pos: 0 };
    let blocks = match parser.file() {
        Ok(blocks) => blocks,
        Err(diagnostic) => {
            return ParseOutput {
                structures: Vec::new(),
                diagnostics: vec![diagnostic],
            }
        }
    };

    let mut output = ParseOutput::default();
    let mut names: HashSet<String> = HashSet::new();
    for block in blocks {
        if !names.insert(block.name.value.clone()) {
            output.diagnostics.push(ParseDiagnostic::error(
                block.name.span,
                format!("structure `{}` is declared more than once", block.name.value),
            ));
            continue;
        }
        let mut diagnostics = Vec::new();
        let built = build(block, &mut diagnostics);
        let failed = diagnostics.iter().any(ParseDiagnostic::is_error);
        output.diagnostics.extend(diagnostics);
        if let (Some(s), false) = (built, failed) {
            output.structures.push(s);
        }
    }
    if output.has_errors() {
        output.structures.clear();
    }
    output
}

fn build(block: StructureBlock, diags: &mut Vec<ParseDiagnostic>) -> Option<StructureOfLevels> {
    // Level headers must read 1, 2, ..., n.
    for (index, level) in block.levels.iter().enumerate() {
        let expected = index as u64 + 1;
        let number: Option<u64> = if level.number.value.contains('.') {
            None
        } else {
            level.number.value.parse().ok()
        };
        match number {
            Some(n) if n == expected => {}
            Some(n) if n > expected => {
                diags.push(ParseDiagnostic::error(
                    level.number.span,
                    format!("level {expected} missing"),
                ));
                return None;
            }
            Some(n) => {
                diags.push(ParseDiagnostic::error(
                    level.number.span,
                    format!("level {n} is out of order; expected level {expected}"),
                ));
                return None;
            }
            None => {
                diags.push(ParseDiagnostic::error(
                    level.number.span,
                    format!("invalid level number `{}`", level.number.value),
                ));
                return None;
            }
        }
    }

    let name = ElementId::new(block.name.value.as_str()).ok()?;
    let mut spans: HashMap<String, SourceSpan> = HashMap::new();
    let mut levels = Vec::with_capacity(block.levels.len());
    for (index, block_level) in block.levels.into_iter().enumerate() {
        let number = index as u32 + 1;
        let mut level = Level::default();
        for member in block_level.members {
            if let Some(first) = spans.get(&member.name.value) {
                diags.push(ParseDiagnostic::error(
                    member.name.span,
                    format!(
                        "duplicate element `{}` (first declared at line {}, column {})",
                        member.name.value, first.line, first.column
                    ),
                ));
                continue;
            }
            spans.insert(member.name.value.clone(), member.name.span);
            let id = ElementId::new(member.name.value.as_str()).ok()?;
            let parent = match member.parent {
                Some(p) => Some(ElementId::new(p.value.as_str()).ok()?),
                None => None,
            };
            let mut role = Role::Plain;
            let mut opaque = false;
            let mut alt_group = None;
            let mut probability = None;
            let mut seen_keys: HashSet<&'static str> = HashSet::new();
            for attr in member.attrs {
                let key = attr.value.key();
                let role_key = matches!(attr.value, Attr::In | Attr::Out);
                if !seen_keys.insert(if role_key { "role" } else { key }) {
                    let message = if role_key {
                        format!("`{}` has more than one role", id)
                    } else {
                        format!("attribute `{key}` repeated on `{id}`")
                    };
                    diags.push(ParseDiagnostic::error(attr.span, message));
                    continue;
                }
                if role_key == member.is_rel {
                    let message = if member.is_rel {
                        format!("`{key}` applies to entities only")
                    } else {
                        format!("`{key}` applies to relationships only")
                    };
                    diags.push(ParseDiagnostic::error(attr.span, message));
                    continue;
                }
                match attr.value {
                    Attr::In => role = Role::Input,
                    Attr::Out => role = Role::Output,
                    Attr::Opaque => opaque = true,
                    Attr::Alt(tag) => alt_group = ElementId::new(tag.value).ok(),
                    Attr::P(number) => match parse_ratio(&number.value)
                        .and_then(|r| ProbabilityValue::from_ratio(r).ok())
                    {
                        Some(p) => probability = Some(p),
                        None => diags.push(ParseDiagnostic::error(
                            number.span,
                            format!("probability `{}` is not a value in [0, 1]", number.value),
                        )),
                    },
                }
            }
            if member.is_rel {
                level.relationships.push(RelationshipNode {
                    opaque,
                    alt_group,
                    probability,
                    ..RelationshipNode::new(id, number, parent)
                });
            } else {
                level.entities.push(EntityNode {
                    id,
                    level: number,
                    parent,
                    role,
                });
            }
        }
        levels.push(level);
    }

    let mut denote_spans: HashMap<String, SourceSpan> = HashMap::new();
    let mut denotations = Vec::new();
    for d in block.denotes {
        denote_spans.entry(d.outcome.value.clone()).or_insert(d.span);
        denote_spans.entry(d.relation.value.clone()).or_insert(d.span);
        denotations.push(Denotation {
            outcome: ElementId::new(d.outcome.value).ok()?,
            relation: ElementId::new(d.relation.value).ok()?,
        });
    }

    let mut s = StructureOfLevels::from_parts(name, levels, denotations);
    for violation in s.validate() {
        let span = match &violation {
            Violation::DenotationNotAnOutcome { .. }
            | Violation::DenotationNotARelationship { .. }
            | Violation::NonUnivocal { .. } => violation
                .element()
                .and_then(|id| denote_spans.get(id.as_str()))
                .copied(),
            Violation::UnnormalizedAlternatives { group, .. } => s
                .alt_group_members(group.as_str())
                .first()
                .and_then(|m| spans.get(m.id.as_str()))
                .copied(),
            _ => violation
                .element()
                .and_then(|id| spans.get(id.as_str()))
                .copied(),
        }
        .unwrap_or(block.name.span);
        diags.push(ParseDiagnostic::error(span, violation.to_string()));
    }
    if diags.iter().any(ParseDiagnostic::is_error) {
        return None;
    }

    let groups: Vec<ElementId> = s.alt_groups().into_iter().cloned().collect();
    for tag in &groups {
        let before = s.audit().len();
        if let Err(err) = probability::reconcile_group(&mut s, tag) {
            diags.push(ParseDiagnostic::error(block.name.span, err.to_string()));
            return None;
        }
        for note in &s.audit()[before..] {
            let span = s
                .alt_group_members(tag.as_str())
                .iter()
                .find(|m| m.inferred)
                .and_then(|m| spans.get(m.id.as_str()))
                .copied()
                .unwrap_or(block.name.span);
            diags.push(ParseDiagnostic::warning(span, note.clone()));
        }
    }
    Some(s)
}
