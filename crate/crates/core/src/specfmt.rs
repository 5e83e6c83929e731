//! Text format for algebras.
//!
//! ```text
//! algebra NAME
//! sorts nat int
//! subsorts nat < int
//! op s : nat -> nat
//! eq f(A:nat) = A:nat
//! rule g(0) => 0
//! ```
//!
//! Identifiers are runs of non-whitespace characters other than
//! `( ) , : ; #`. The runs `<`, `->`, `=>` and `=` are punctuation and the
//! item keywords are reserved. `#` starts a comment that runs to the end of
//! the line.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::terms::{
    side_sorts, Equation, GroundTerm, MSAlgebra, MSSignature, OSAlgebra, OSSignature, Operator, PatternTerm,
    Rule, SignatureError, Sort, SortDiscipline, Symbol, TermError,
};

const KEYWORDS: [&str; 6] = ["algebra", "sorts", "subsorts", "op", "eq", "rule"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate declaration: {0}")]
    DuplicateDeclaration(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("constructor `{0}` uses the reserved cast name shape Cast_<sort>_to_<sort>")]
    CastNameReserved(String),
    #[error("subsort declarations are not allowed in a many-sorted spec")]
    SubsortsInManySorted,
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("{0}")]
    Sides(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct SpecError {
    pub span: Span,
    pub kind: SpecErrorKind,
}

impl SpecError {
    fn new(span: Span, kind: SpecErrorKind) -> Self {
        Self { span, kind }
    }

    fn syntax(span: Span, msg: impl Into<String>) -> Self {
        Self::new(span, SpecErrorKind::Syntax(msg.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Lt,
    Arrow,
    Implies,
    Equals,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_special(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | ':' | ';' | '#')
}

fn lex(text: &str) -> Vec<(Tok, Span)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<(usize, char)> = line.chars().enumerate().collect();
        let mut i = 0;
        while i < chars.len() {
            let (col, c) = chars[i];
            let span = Span { line: ln + 1, col: col + 1 };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            if let Some(t) = single {
                out.push((t, span));
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && !chars[i].1.is_whitespace() && !is_special(chars[i].1) {
                i += 1;
            }
            let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            let tok = match word.as_str() {
                "<" => Tok::Lt,
                "->" => Tok::Arrow,
                "=>" => Tok::Implies,
                "=" => Tok::Equals,
                _ => Tok::Ident(word),
            };
            out.push((tok, span));
        }
    }
    let end = Span {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, end));
    out
}

/// A term as written, before sort checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermAst {
    Var { name: String, sort: String, span: Span, sort_span: Span },
    App { head: String, args: Vec<TermAst>, span: Span },
}

impl TermAst {
    pub fn span(&self) -> Span {
        match self {
            TermAst::Var { span, .. } | TermAst::App { span, .. } => *span,
        }
    }
}

/// An identifier with its source span.
pub type Spanned = (String, Span);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Sorts(Vec<Spanned>),
    Subsorts(Vec<(Spanned, Spanned)>),
    Op {
        name: String,
        args: Vec<Spanned>,
        target: Spanned,
    },
    Eq(TermAst, TermAst),
    Rule(TermAst, TermAst),
}

/// A parsed but not yet elaborated spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub name: String,
    pub name_span: Span,
    pub items: Vec<(Item, Span)>,
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn at_any_keyword(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if KEYWORDS.contains(&s.as_str()))
    }

    fn expect(&mut self, want: Tok) -> Result<Span, SpecError> {
        let (t, span) = self.bump();
        if t == want {
            Ok(span)
        } else {
            Err(SpecError::syntax(span, format!("expected {want}, found {t}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Spanned, SpecError> {
        let (t, span) = self.bump();
        match t {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok((s, span)),
            Tok::Ident(s) => Err(SpecError::syntax(span, format!("expected {what}, found keyword `{s}`"))),
            t => Err(SpecError::syntax(span, format!("expected {what}, found {t}"))),
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) && !self.at_any_keyword()
    }

    fn document(&mut self) -> Result<SpecDocument, SpecError> {
        if !self.at_keyword("algebra") {
            return Err(SpecError::syntax(self.span(), format!("expected `algebra`, found {}", self.peek())));
        }
        self.bump();
        let (name, name_span) = self.ident("algebra name")?;
        let mut items = Vec::new();
        while *self.peek() != Tok::Eof {
            let span = self.span();
            items.push((self.item()?, span));
        }
        Ok(SpecDocument { name, name_span, items })
    }

    fn item(&mut self) -> Result<Item, SpecError> {
        let (t, span) = self.bump();
        let kw = match &t {
            Tok::Ident(s) => s.as_str(),
            _ => return Err(SpecError::syntax(span, format!("expected a declaration, found {t}"))),
        };
        match kw {
            "sorts" => {
                let mut names = vec![self.ident("sort name")?];
                while self.is_ident() {
                    names.push(self.ident("sort name")?);
                }
                Ok(Item::Sorts(names))
            }
            "subsorts" => {
                let mut pairs = vec![self.pair()?];
                while *self.peek() == Tok::Semi {
                    self.bump();
                    pairs.push(self.pair()?);
                }
                Ok(Item::Subsorts(pairs))
            }
            "op" => {
                let (name, _) = self.ident("constructor name")?;
                self.expect(Tok::Colon)?;
                let mut args = Vec::new();
                while self.is_ident() {
                    args.push(self.ident("sort name")?);
                }
                self.expect(Tok::Arrow)?;
                let target = self.ident("target sort")?;
                Ok(Item::Op { name, args, target })
            }
            "eq" => {
                let l = self.term()?;
                self.expect(Tok::Equals)?;
                Ok(Item::Eq(l, self.term()?))
            }
            "rule" => {
                let l = self.term()?;
                self.expect(Tok::Implies)?;
                Ok(Item::Rule(l, self.term()?))
            }
            other => Err(SpecError::syntax(span, format!("expected a declaration, found `{other}`"))),
        }
    }

    fn pair(&mut self) -> Result<(Spanned, Spanned), SpecError> {
        let a = self.ident("sort name")?;
        self.expect(Tok::Lt)?;
        Ok((a, self.ident("sort name")?))
    }

    fn term(&mut self) -> Result<TermAst, SpecError> {
        let (head, span) = self.ident("term")?;
        match self.peek() {
            Tok::Colon => {
                self.bump();
                let (sort, sort_span) = self.ident("variable sort")?;
                Ok(TermAst::Var {
                    name: head,
                    sort,
                    span,
                    sort_span,
                })
            }
            Tok::LParen => {
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                Ok(TermAst::App { head, args, span })
            }
            _ => Ok(TermAst::App {
                head,
                args: Vec::new(),
                span,
            }),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    Parser { toks: lex(text), pos: 0 }.document()
}

/// Parses a single term; variables are written `NAME:SORT`.
pub fn parse_term_ast(text: &str) -> Result<TermAst, SpecError> {
    let mut p = Parser { toks: lex(text), pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(SpecError::syntax(p.span(), format!("unexpected {} after term", p.peek())));
    }
    Ok(t)
}

/// Whether `name` has the shape `Cast_<a>_to_<b>`.
pub fn is_cast_shaped(name: &str) -> bool {
    name.strip_prefix("Cast_")
        .and_then(|rest| rest.find("_to_").map(|i| i > 0 && i + 4 < rest.len()))
        .unwrap_or(false)
}

pub fn cast_name(from: &Sort, to: &Sort) -> Symbol {
    Symbol::new(format!("Cast_{from}_to_{to}"))
}

fn pattern(ast: &TermAst, known_sorts: &HashSet<&str>, known_heads: &HashSet<&str>) -> Result<PatternTerm, SpecError> {
    match ast {
        TermAst::Var {
            name, sort, sort_span, ..
        } => {
            if !known_sorts.contains(sort.as_str()) {
                return Err(SpecError::new(*sort_span, SpecErrorKind::UnknownSort(sort.clone())));
            }
            Ok(PatternTerm::var(name.as_str(), sort.as_str()))
        }
        TermAst::App { head, args, span } => {
            if !known_heads.contains(head.as_str()) {
                return Err(SpecError::new(*span, SpecErrorKind::UnknownOperator(head.clone())));
            }
            Ok(PatternTerm::node(
                head.as_str(),
                args.iter()
                    .map(|a| pattern(a, known_sorts, known_heads))
                    .collect::<Result<_, _>>()?,
            ))
        }
    }
}

struct Collected {
    sorts: Vec<Sort>,
    pairs: Vec<(Sort, Sort)>,
    pair_span: Option<Span>,
    ops: Vec<(Operator, Span)>,
    eqs: Vec<(TermAst, TermAst, Span)>,
    rules: Vec<(TermAst, TermAst, Span)>,
}

fn collect(doc: &SpecDocument) -> Result<Collected, SpecError> {
    let mut c = Collected {
        sorts: Vec::new(),
        pairs: Vec::new(),
        pair_span: None,
        ops: Vec::new(),
        eqs: Vec::new(),
        rules: Vec::new(),
    };
    let mut seen_sorts = HashSet::new();
    for (item, _) in &doc.items {
        if let Item::Sorts(names) = item {
            for (n, span) in names {
                if !seen_sorts.insert(n.clone()) {
                    return Err(SpecError::new(*span, SpecErrorKind::DuplicateDeclaration(format!("sort `{n}`"))));
                }
                c.sorts.push(Sort::new(n));
            }
        }
    }
    let check_sort = |(n, span): &Spanned| -> Result<Sort, SpecError> {
        if seen_sorts.contains(n) {
            Ok(Sort::new(n))
        } else {
            Err(SpecError::new(*span, SpecErrorKind::UnknownSort(n.clone())))
        }
    };
    let mut seen_pairs = HashSet::new();
    let mut seen_ops = HashSet::new();
    for (item, span) in &doc.items {
        match item {
            Item::Sorts(_) => {}
            Item::Subsorts(ps) => {
                c.pair_span.get_or_insert(*span);
                for (a, b) in ps {
                    let pair = (check_sort(a)?, check_sort(b)?);
                    if !seen_pairs.insert(pair.clone()) {
                        return Err(SpecError::new(
                            a.1,
                            SpecErrorKind::DuplicateDeclaration(format!("subsort `{} < {}`", pair.0, pair.1)),
                        ));
                    }
                    c.pairs.push(pair);
                }
            }
            Item::Op { name, args, target } => {
                let op = Operator::new(
                    name.as_str(),
                    args.iter().map(check_sort).collect::<Result<_, _>>()?,
                    check_sort(target)?,
                );
                if !seen_ops.insert(op.clone()) {
                    return Err(SpecError::new(*span, SpecErrorKind::DuplicateDeclaration(format!("operator `{op}`"))));
                }
                c.ops.push((op, *span));
            }
            Item::Eq(l, r) => c.eqs.push((l.clone(), r.clone(), *span)),
            Item::Rule(l, r) => c.rules.push((l.clone(), r.clone(), *span)),
        }
    }
    Ok(c)
}

fn elaborate_sides<S: SortDiscipline>(
    sig: &S,
    sides: &[(TermAst, TermAst, Span)],
    sorts: &HashSet<&str>,
    heads: &HashSet<&str>,
    what: &str,
) -> Result<Vec<(PatternTerm, PatternTerm, Span)>, SpecError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (l, r, span) in sides {
        let lp = pattern(l, sorts, heads)?;
        let rp = pattern(r, sorts, heads)?;
        side_sorts(sig, &lp, &rp).map_err(|e| SpecError::new(*span, e.into()))?;
        if !seen.insert((lp.clone(), rp.clone())) {
            return Err(SpecError::new(
                *span,
                SpecErrorKind::DuplicateDeclaration(format!("{what} `{lp}` / `{rp}`")),
            ));
        }
        out.push((lp, rp, *span));
    }
    Ok(out)
}

/// Elaborates a document into an order-sorted algebra.
pub fn elaborate_os(doc: &SpecDocument) -> Result<OSAlgebra, SpecError> {
    let c = collect(doc)?;
    for (op, span) in &c.ops {
        if is_cast_shaped(op.constructor.as_str()) {
            return Err(SpecError::new(
                *span,
                SpecErrorKind::CastNameReserved(op.constructor.to_string()),
            ));
        }
    }
    let sig = OSSignature::new(
        c.sorts.clone(),
        c.pairs.clone(),
        c.ops.iter().map(|(o, _)| o.clone()).collect(),
    )
    .map_err(|e| SpecError::new(c.pair_span.unwrap_or(doc.name_span), e.into()))?;
    let sorts: HashSet<&str> = c.sorts.iter().map(Sort::as_str).collect();
    let heads: HashSet<&str> = c.ops.iter().map(|(o, _)| o.constructor.as_str()).collect();
    let eqs = elaborate_sides(&sig, &c.eqs, &sorts, &heads, "equation")?;
    let rules = elaborate_sides(&sig, &c.rules, &sorts, &heads, "rule")?;
    OSAlgebra::new(
        doc.name.as_str(),
        sig,
        eqs.into_iter().map(|(l, r, _)| Equation::new(l, r)).collect(),
        rules.into_iter().map(|(l, r, _)| Rule::new(l, r)).collect(),
    )
    .map_err(|e| SpecError::new(doc.name_span, SpecErrorKind::Sides(e.to_string())))
}

/// The sort sequence of a cast chain `Cast(...Cast(x:s)...)` over a
/// variable, read bottom-up, together with the variable.
fn cast_chain_over_var(sig: &MSSignature, p: &PatternTerm) -> Option<(Symbol, Vec<Sort>)> {
    let mut sorts = Vec::new();
    let mut cur = p;
    loop {
        match cur {
            PatternTerm::Var { name, sort } => {
                sorts.push(sort.clone());
                sorts.reverse();
                return Some((name.clone(), sorts));
            }
            PatternTerm::Node { head, args } => {
                let op = sig.cast(head)?;
                sorts.push(op.target.clone());
                cur = &args[0];
            }
        }
    }
}

/// Whether an equation equates two distinct non-empty cast chains over one
/// variable, which is the shape of every generated core equation and of no
/// translated user equation.
pub fn is_core_equation(sig: &MSSignature, e: &Equation) -> bool {
    match (cast_chain_over_var(sig, &e.lhs), cast_chain_over_var(sig, &e.rhs)) {
        (Some((x, a)), Some((y, b))) => x == y && a.len() > 1 && b.len() > 1 && a != b,
        _ => false,
    }
}

/// Elaborates a document into a many-sorted algebra. Unary operators named
/// `Cast_<a>_to_<b>` with profile `a -> b` are the generated casts.
pub fn elaborate_ms(doc: &SpecDocument) -> Result<MSAlgebra, SpecError> {
    let c = collect(doc)?;
    if let Some(span) = c.pair_span {
        return Err(SpecError::new(span, SpecErrorKind::SubsortsInManySorted));
    }
    let mut non_core = Vec::new();
    for (op, span) in &c.ops {
        let name = op.constructor.as_str();
        let is_cast = op.arity() == 1 && cast_name(&op.arg_sorts[0], &op.target).as_str() == name;
        if is_cast_shaped(name) && !is_cast {
            return Err(SpecError::new(*span, SpecErrorKind::CastNameReserved(name.to_string())));
        }
        non_core.push(is_cast);
    }
    let sig = MSSignature::new(c.sorts.clone(), c.ops.iter().map(|(o, _)| o.clone()).collect(), non_core)
        .map_err(|e| SpecError::new(doc.name_span, e.into()))?;
    let sorts: HashSet<&str> = c.sorts.iter().map(Sort::as_str).collect();
    let heads: HashSet<&str> = c.ops.iter().map(|(o, _)| o.constructor.as_str()).collect();
    let mut equations = Vec::new();
    let mut core = Vec::new();
    for (l, r, span) in elaborate_sides(&sig, &c.eqs, &sorts, &heads, "equation")? {
        let (ls, rs) = side_sorts(&sig, &l, &r).map_err(|e| SpecError::new(span, e.into()))?;
        if ls != rs {
            return Err(SpecError::new(
                span,
                SpecErrorKind::Sides(format!("equation sides have sorts {ls} and {rs}")),
            ));
        }
        let e = Equation::new(l, r);
        if is_core_equation(&sig, &e) {
            core.push(e);
        } else {
            equations.push(e);
        }
    }
    let mut rules = Vec::new();
    for (l, r, span) in elaborate_sides(&sig, &c.rules, &sorts, &heads, "rule")? {
        let (ls, rs) = side_sorts(&sig, &l, &r).map_err(|e| SpecError::new(span, e.into()))?;
        if ls != rs {
            return Err(SpecError::new(
                span,
                SpecErrorKind::Sides(format!("rule sides have sorts {ls} and {rs}")),
            ));
        }
        rules.push(Rule::new(l, r));
    }
    MSAlgebra::new(doc.name.as_str(), sig, equations, core, rules)
        .map_err(|e| SpecError::new(doc.name_span, SpecErrorKind::Sides(e.to_string())))
}

pub fn parse_os(text: &str) -> Result<OSAlgebra, SpecError> {
    elaborate_os(&parse_spec(text)?)
}

pub fn parse_ms(text: &str) -> Result<MSAlgebra, SpecError> {
    elaborate_ms(&parse_spec(text)?)
}

/// Parses a pattern against a signature's sorts and constructors.
pub fn parse_pattern<S: SortDiscipline>(
    sig: &S,
    sorts: &[Sort],
    constructors: impl IntoIterator<Item = Symbol>,
    text: &str,
) -> Result<PatternTerm, SpecError> {
    let ast = parse_term_ast(text)?;
    let sort_names: HashSet<&str> = sorts.iter().map(Sort::as_str).collect();
    let cons: Vec<Symbol> = constructors.into_iter().collect();
    let heads: HashSet<&str> = cons.iter().map(Symbol::as_str).collect();
    let p = pattern(&ast, &sort_names, &heads)?;
    p.variables().map_err(|e| SpecError::new(ast.span(), e.into()))?;
    sig.pattern_sort(&p).map_err(|e| SpecError::new(ast.span(), e.into()))?;
    Ok(p)
}

/// Parses a ground term; variables are rejected.
pub fn parse_ground<S: SortDiscipline>(
    sig: &S,
    sorts: &[Sort],
    constructors: impl IntoIterator<Item = Symbol>,
    text: &str,
) -> Result<GroundTerm, SpecError> {
    let ast = parse_term_ast(text)?;
    let p = parse_pattern(sig, sorts, constructors, text)?;
    p.to_ground()
        .ok_or_else(|| SpecError::syntax(ast.span(), "expected a ground term, found a variable"))
}

fn print_header(out: &mut String, name: &str, sorts: &[Sort]) {
    out.push_str(&format!("algebra {name}\n"));
    if !sorts.is_empty() {
        out.push_str("sorts");
        for s in sorts {
            out.push(' ');
            out.push_str(s.as_str());
        }
        out.push('\n');
    }
}

fn print_ops(out: &mut String, ops: &[Operator]) {
    for op in ops {
        out.push_str(&format!("op {op}\n"));
    }
}

pub fn print_os(alg: &OSAlgebra) -> String {
    let sig = &alg.signature;
    let mut out = String::new();
    print_header(&mut out, &alg.name, sig.sorts());
    if !sig.subsort_pairs().is_empty() {
        let pairs: Vec<String> = sig.subsort_pairs().iter().map(|(a, b)| format!("{a} < {b}")).collect();
        out.push_str(&format!("subsorts {}\n", pairs.join(" ; ")));
    }
    print_ops(&mut out, sig.operators());
    for e in &alg.equations {
        out.push_str(&format!("eq {e}\n"));
    }
    for r in &alg.rules {
        out.push_str(&format!("rule {r}\n"));
    }
    out
}

pub fn print_ms(alg: &MSAlgebra) -> String {
    let mut out = String::new();
    print_header(&mut out, &alg.name, alg.signature.sorts());
    print_ops(&mut out, alg.signature.operators());
    for e in &alg.equations {
        out.push_str(&format!("eq {e}\n"));
    }
    if !alg.core_equations.is_empty() {
        out.push_str("# core equality\n");
        for e in &alg.core_equations {
            out.push_str(&format!("eq {e}\n"));
        }
    }
    for r in &alg.rules {
        out.push_str(&format!("rule {r}\n"));
    }
    out
}
