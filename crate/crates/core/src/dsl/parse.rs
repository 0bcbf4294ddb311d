//! Lexer and recursive-descent parser for the CAO text format.

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::{
    validate, CaoSpec, IssueKind, OperatorForm, RawCao, RawEntity, RawOperator, Role, Subject, ValidateOptions,
};

/// Half-open byte range plus the 1-based line/column of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    Semantic(IssueKind),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiagnosticKind::Syntax => write!(f, "{}: syntax error: {}", self.span, self.message),
            DiagnosticKind::Semantic(kind) => write!(f, "{}: {}: {}", self.span, kind.code(), self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}", render(.diagnostics))]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

fn render(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "number {s}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceSpan)>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let mut span = self.here();
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, span));
                return Ok(out);
            };
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                Tok::Ident(self.src[span.start..self.pos].to_string())
            } else if c.is_ascii_digit() {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
                Tok::Number(self.src[span.start..self.pos].to_string())
            } else {
                match c {
                    '{' => Tok::Punct("{"),
                    '}' => Tok::Punct("}"),
                    '(' => Tok::Punct("("),
                    ')' => Tok::Punct(")"),
                    ':' => Tok::Punct(":"),
                    ';' => Tok::Punct(";"),
                    ',' => Tok::Punct(","),
                    '=' => Tok::Punct("="),
                    '-' if self.peek() == Some('>') => {
                        self.bump();
                        Tok::Punct("->")
                    }
                    other => {
                        span.end = self.pos;
                        return Err(Diagnostic {
                            kind: DiagnosticKind::Syntax,
                            span,
                            message: format!("unexpected character `{other}`"),
                        });
                    }
                }
            };
            span.end = self.pos;
            out.push((tok, span));
        }
    }
}

/// Where each raw item came from, for mapping validation issues to spans.
#[derive(Default)]
struct SpanTable {
    name: Option<SourceSpan>,
    entities: Vec<SourceSpan>,
    operators: Vec<SourceSpan>,
    initial: Vec<SourceSpan>,
}

struct Parser {
    tokens: Vec<(Tok, SourceSpan)>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> (Tok, SourceSpan) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> PResult<T> {
        Err(Diagnostic {
            kind: DiagnosticKind::Syntax,
            span: self.span(),
            message,
        })
    }

    fn expect(&mut self, punct: &'static str) -> PResult<SourceSpan> {
        if *self.peek() == Tok::Punct(punct) {
            Ok(self.advance().1)
        } else {
            self.error(format!("expected `{punct}`, found {}", self.peek()))
        }
    }

    fn is_punct(&self, punct: &str) -> bool {
        matches!(self.peek(), Tok::Punct(p) if *p == punct)
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.advance().1;
                Ok((s, span))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.advance().1),
            other => self.error(format!("expected `{kw}`, found {other}")),
        }
    }

    fn number(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let span = self.advance().1;
                Ok((s, span))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn small_number(&mut self, what: &str) -> PResult<u64> {
        let (digits, span) = self.number(what)?;
        digits.parse().map_err(|_| Diagnostic {
            kind: DiagnosticKind::Syntax,
            span,
            message: format!("{what} {digits} does not fit in 64 bits"),
        })
    }

    /// Skips past the next `;`, or up to a `}` / end of input.
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Punct("}") => return,
                Tok::Punct(";") => {
                    self.advance();
                    return;
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn file(&mut self, raw: &mut RawCao, spans: &mut SpanTable) -> PResult<()> {
        self.keyword("cao")?;
        let (name, span) = self.ident("CAO name")?;
        raw.name = name;
        spans.name = Some(span);
        self.expect("{")?;
        loop {
            match self.peek().clone() {
                Tok::Punct("}") => {
                    self.advance();
                    break;
                }
                Tok::Eof => return self.error("expected `}` to close the CAO body".into()),
                _ => {
                    let start = self.pos;
                    if let Err(d) = self.item(raw, spans) {
                        self.diagnostics.push(d);
                        if self.pos == start {
                            self.advance();
                        }
                        self.recover();
                    }
                }
            }
        }
        match self.peek() {
            Tok::Eof => Ok(()),
            other => self.error(format!("unexpected {other} after the CAO body")),
        }
    }

    fn item(&mut self, raw: &mut RawCao, spans: &mut SpanTable) -> PResult<()> {
        let start = self.span();
        let (kw, _) = self.ident("`entity`, `operator` or `init`")?;
        match kw.as_str() {
            "entity" => {
                let (name, name_span) = self.ident("entity name")?;
                let role = match self.peek().clone() {
                    Tok::Ident(word) => {
                        let role = word.parse::<Role>().map_err(|e| Diagnostic {
                            kind: DiagnosticKind::Syntax,
                            span: self.span(),
                            message: e.to_string(),
                        })?;
                        self.advance();
                        Some(role)
                    }
                    _ => None,
                };
                self.expect(";")?;
                raw.entities.push(RawEntity { name, role });
                spans.entities.push(name_span);
            }
            "operator" => {
                let form = match self.peek().clone() {
                    Tok::Ident(word) => {
                        let form = word.parse::<OperatorForm>().map_err(|e| Diagnostic {
                            kind: DiagnosticKind::Syntax,
                            span: self.span(),
                            message: e.to_string(),
                        })?;
                        self.advance();
                        Some(form)
                    }
                    _ => None,
                };
                let inputs = self.terms("radix")?;
                self.expect("->")?;
                let outputs = self.terms("coefficient")?;
                let end = self.expect(";")?;
                raw.operators.push(RawOperator { form, inputs, outputs });
                spans.operators.push(join(start, end));
            }
            "init" => loop {
                let (name, name_span) = self.ident("entity name")?;
                self.expect("=")?;
                let (digits, value_span) = self.number("initial cardinal")?;
                let value: BigUint = digits.parse().expect("lexer only yields digits");
                raw.initial.push((name, value));
                spans.initial.push(join(name_span, value_span));
                if self.is_punct(",") {
                    self.advance();
                } else {
                    self.expect(";")?;
                    break;
                }
            },
            other => {
                return Err(Diagnostic {
                    kind: DiagnosticKind::Syntax,
                    span: start,
                    message: format!("unknown statement `{other}` (expected entity, operator or init)"),
                })
            }
        }
        Ok(())
    }

    fn terms(&mut self, what: &str) -> PResult<Vec<(String, u64)>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.is_punct(")") {
            self.advance();
            return Ok(out);
        }
        loop {
            let (name, _) = self.ident("entity name")?;
            self.expect(":")?;
            let value = self.small_number(what)?;
            out.push((name, value));
            if self.is_punct(",") {
                self.advance();
            } else {
                self.expect(")")?;
                return Ok(out);
            }
        }
    }
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan {
        start: a.start,
        end: b.end,
        line: a.line,
        column: a.column,
    }
}

/// Parses without validating.
fn parse_raw(text: &str) -> Result<(RawCao, SpanTable), ParseError> {
    let tokens = Lexer::new(text).tokenize().map_err(|d| ParseError { diagnostics: vec![d] })?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        diagnostics: Vec::new(),
    };
    let mut raw = RawCao::default();
    let mut spans = SpanTable::default();
    if let Err(d) = parser.file(&mut raw, &mut spans) {
        parser.diagnostics.push(d);
    }
    if parser.diagnostics.is_empty() {
        Ok((raw, spans))
    } else {
        Err(ParseError {
            diagnostics: parser.diagnostics,
        })
    }
}

pub fn parse(text: &str) -> Result<CaoSpec, ParseError> {
    parse_with(text, ValidateOptions::default())
}

/// Parses and validates; every diagnostic points into `text`.
pub fn parse_with(text: &str, options: ValidateOptions) -> Result<CaoSpec, ParseError> {
    let (raw, spans) = parse_raw(text)?;
    validate(&raw, options).map_err(|report| {
        let whole = SourceSpan {
            start: 0,
            end: text.len(),
            line: 1,
            column: 1,
        };
        let diagnostics = report
            .issues
            .into_iter()
            .map(|issue| {
                let span = match issue.subject {
                    Subject::Cao => spans.name,
                    Subject::Entity(i) => spans.entities.get(i).copied(),
                    Subject::Operator(k) => spans.operators.get(k).copied(),
                    Subject::InitialValue(n) => spans.initial.get(n).copied(),
                }
                .unwrap_or(whole);
                Diagnostic {
                    kind: DiagnosticKind::Semantic(issue.kind),
                    span,
                    message: issue.message,
                }
            })
            .collect();
        ParseError { diagnostics }
    })
}
