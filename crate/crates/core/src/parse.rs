//! Parser for the expression DSL and the line-oriented model-file format.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expression, FieldSymbol, Idx, Kind, Rat, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolClass {
    /// Phase-space field or momentum.
    Field,
    /// Smearing function or gauge parameter.
    Smearing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub kinds: Vec<Kind>,
    pub antisym: Option<(u8, u8)>,
    pub class: SymbolClass,
}

/// Names the parser may resolve.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub symbols: BTreeMap<String, SymbolInfo>,
    pub constants: BTreeSet<String>,
}

impl SymbolTable {
    pub fn with_default_constants() -> Self {
        let mut t = SymbolTable::default();
        t.constants.insert("Xi".into());
        t.constants.insert("Omega".into());
        t
    }

    pub fn declare(&mut self, name: &str, kinds: Vec<Kind>, antisym: Option<(u8, u8)>, class: SymbolClass) {
        self.symbols.insert(name.to_string(), SymbolInfo { kinds, antisym, class });
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, pos: &[(usize, usize)]) -> Result<Vec<Token>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (byte, c) = chars[k];
        let (line, col) = pos[byte];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            let s: String = chars[start..k].iter().map(|x| x.1).collect();
            out.push(Token { tok: Tok::Num(s.parse().expect("digits")), line, col });
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..k].iter().map(|x| x.1).collect()), line, col });
        } else if "+-*/^()[]{},=@".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            k += 1;
        } else {
            return Err(Error::Parse { line, col, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    table: &'a SymbolTable,
    line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<Token>, table: &'a SymbolTable, line: usize, end_col: usize) -> Self {
        Parser { toks, pos: 0, table, line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.line, self.end_col),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn wrap<T>(&self, r: Result<T>, at: (usize, usize)) -> Result<T> {
        r.map_err(|e| match e {
            Error::Parse { .. } => e,
            Error::Structural(m) | Error::IndexKind(m) => Error::Parse { line: at.0, col: at.1, msg: m },
            Error::UndeclaredSymbol(s) => {
                Error::Parse { line: at.0, col: at.1, msg: format!("undeclared symbol `{s}`") }
            }
            other => other,
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn index(&mut self, kind: Option<Kind>, what: &str) -> Result<Idx> {
        let at = self.here();
        let s = self.ident()?;
        let idx = Idx::parse(&s).ok_or_else(|| Error::Parse {
            line: at.0,
            col: at.1,
            msg: format!("`{s}` is not an index label"),
        })?;
        if let Some(k) = kind {
            if idx.kind != k {
                return Err(Error::Parse {
                    line: at.0,
                    col: at.1,
                    msg: format!("index-kind mismatch: `{s}` in {what} must be {k:?}").to_lowercase(),
                });
            }
        }
        Ok(idx)
    }

    fn index_list(&mut self, kinds: Option<&[Kind]>, what: &str) -> Result<Vec<Idx>> {
        let mut out = Vec::new();
        loop {
            let k = kinds.and_then(|ks| ks.get(out.len()).copied());
            out.push(self.index(k, what)?);
            if !self.eat(',') {
                break;
            }
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut neg = false;
        if self.eat('-') {
            neg = true;
        } else {
            self.eat('+');
        }
        let at = self.here();
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            let sign = if self.eat('+') {
                1
            } else if self.eat('-') {
                -1
            } else {
                break;
            };
            let at2 = self.here();
            let mut t = self.term()?;
            if sign < 0 {
                t = t.neg();
            }
            acc = self.wrap(acc.add(&t), at2)?;
        }
        let _ = at;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut acc = self.unary()?;
        loop {
            let at = self.here();
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = self.wrap(acc.mul(&rhs), at)?;
            } else if self.eat('/') {
                let rhs = self.unary()?;
                let inv = self.invert(&rhs)?;
                acc = self.wrap(acc.mul(&inv), at)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn invert(&self, e: &Expression) -> Result<Expression> {
        if e.terms.len() != 1 {
            return self.err("division only by a single scalar factor");
        }
        let t = &e.terms[0];
        let scalar = t.eps.is_empty()
            && t.eta.is_empty()
            && t.deltas.is_empty()
            && t.fields.is_empty()
            && t.smearings.is_empty()
            && t.dists.is_empty();
        if !scalar || t.coeff.is_zero() {
            return self.err("division only by a nonzero number or constant");
        }
        let mut inv = Term::scalar(t.coeff.recip());
        inv.consts = t.consts.iter().map(|(n, p)| (n.clone(), -p)).collect();
        Ok(Expression::from_term(inv))
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let n = match self.peek() {
                Some(Tok::Num(n)) => {
                    let n: i32 = n.try_into().map_err(|_| Error::Parse {
                        line: self.here().0,
                        col: self.here().1,
                        msg: "exponent too large".into(),
                    })?;
                    self.pos += 1;
                    if neg {
                        -n
                    } else {
                        n
                    }
                }
                _ => return self.err("expected integer exponent"),
            };
            let scalar_only = base.terms.len() == 1 && {
                let t = &base.terms[0];
                t.fields.is_empty()
                    && t.smearings.is_empty()
                    && t.eps.is_empty()
                    && t.eta.is_empty()
                    && t.deltas.is_empty()
                    && t.dists.is_empty()
            };
            if !scalar_only {
                return self.err("powers are allowed only on numbers and constants");
            }
            let t = &base.terms[0];
            let mut out = Term::scalar(pow_rat(&t.coeff, n));
            out.consts = t.consts.iter().map(|(s, p)| (s.clone(), p * n)).collect();
            out.consts.retain(|(_, p)| *p != 0);
            return Ok(Expression::from_term(out));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expression::scalar(Rat::from_integer(n)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "eps" | "eta" => {
                        let kind = if name == "eps" { Kind::Internal } else { Kind::Spatial };
                        self.expect('(')?;
                        let ls = self.index_list(Some(&[kind, kind, kind]), &name)?;
                        self.expect(')')?;
                        if ls.len() != 3 {
                            return Err(Error::Parse { line: at.0, col: at.1, msg: format!("{name} takes 3 indices") });
                        }
                        let e = if name == "eps" {
                            Expression::eps(ls[0], ls[1], ls[2])
                        } else {
                            Expression::eta(ls[0], ls[1], ls[2])
                        };
                        self.wrap(e.validate().map(|_| e.clone()), at)
                    }
                    "delta" => {
                        self.expect('(')?;
                        let ls = self.index_list(None, "delta")?;
                        self.expect(')')?;
                        if ls.len() != 2 {
                            return Err(Error::Parse { line: at.0, col: at.1, msg: "delta takes 2 indices".into() });
                        }
                        if ls[0].kind != ls[1].kind {
                            return Err(Error::Parse {
                                line: at.0,
                                col: at.1,
                                msg: "index-kind mismatch: delta mixes spatial and internal indices".into(),
                            });
                        }
                        let e = Expression::delta(ls[0], ls[1]);
                        self.wrap(e.validate().map(|_| e.clone()), at)
                    }
                    "D3" => {
                        self.expect('(')?;
                        let p = self.ident()?;
                        self.expect(',')?;
                        let q = self.ident()?;
                        self.expect(')')?;
                        if p != "x" || q != "y" {
                            return Err(Error::Parse { line: at.0, col: at.1, msg: "only D3(x,y) is supported".into() });
                        }
                        Ok(Expression::dist())
                    }
                    "d" if self.peek() == Some(&Tok::Sym('(')) => {
                        self.expect('(')?;
                        let a = self.index(Some(Kind::Spatial), "a derivative")?;
                        self.expect(')')?;
                        self.expect('@')?;
                        let inner = self.power()?;
                        self.wrap(inner.spatial_derivative(a), at)
                    }
                    _ => self.symbol(&name, at),
                }
            }
            _ => self.err("expected a factor"),
        }
    }

    fn symbol(&mut self, name: &str, at: (usize, usize)) -> Result<Expression> {
        if self.table.constants.contains(name) {
            return Ok(Expression::constant(name, 1));
        }
        let Some(info) = self.table.symbols.get(name) else {
            return Err(Error::Parse { line: at.0, col: at.1, msg: format!("undeclared symbol `{name}`") });
        };
        let info = info.clone();
        let slots = if self.eat('[') {
            let ls = self.index_list(Some(&info.kinds), &format!("`{name}`"))?;
            self.expect(']')?;
            ls
        } else {
            Vec::new()
        };
        if slots.len() != info.kinds.len() {
            return Err(Error::Parse {
                line: at.0,
                col: at.1,
                msg: format!("`{name}` takes {} indices, got {}", info.kinds.len(), slots.len()),
            });
        }
        let f = FieldSymbol::new(name, slots).with_antisym(info.antisym);
        let e = match info.class {
            SymbolClass::Field => Expression::field(f),
            SymbolClass::Smearing => Expression::smearing(f),
        };
        self.wrap(e.validate().map(|_| e.clone()), at)
    }
}

fn pow_rat(r: &Rat, n: i32) -> Rat {
    let mut out = Rat::one();
    let base = if n < 0 { r.recip() } else { r.clone() };
    for _ in 0..n.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Source text with the (line, column) of every byte, so that errors in
/// continuation lines point at the right place.
#[derive(Clone, Debug)]
pub(crate) struct Span {
    pub text: String,
    pub pos: Vec<(usize, usize)>,
    pub end: (usize, usize),
}

impl Span {
    fn single(text: &str, line: usize) -> Span {
        let pos = (0..text.len()).map(|k| (line, k + 1)).collect();
        Span { text: text.to_string(), pos, end: (line, text.len() + 1) }
    }

    /// Position of the first non-blank byte.
    pub(crate) fn at_start(&self) -> (usize, usize) {
        let k = self.text.len() - self.text.trim_start().len();
        self.at(k)
    }

    fn at(&self, k: usize) -> (usize, usize) {
        self.pos.get(k).copied().unwrap_or(self.end)
    }

    fn slice(&self, a: usize, b: usize) -> Span {
        Span { text: self.text[a..b].to_string(), pos: self.pos[a..b].to_vec(), end: self.at(b) }
    }

    fn trim(&self) -> Span {
        let start = self.text.len() - self.text.trim_start().len();
        let end = self.text.trim_end().len().max(start);
        self.slice(start, end)
    }

    fn err<T>(&self, k: usize, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.at(k);
        Err(Error::Parse { line, col, msg: msg.into() })
    }
}

/// Parses a single expression.
pub fn parse_expression(src: &str, table: &SymbolTable) -> Result<Expression> {
    parse_span(&Span::single(src, 1), table)
}

pub(crate) fn parse_span(span: &Span, table: &SymbolTable) -> Result<Expression> {
    let toks = lex(&span.text, &span.pos)?;
    let mut p = Parser::new(toks, table, span.end.0, span.end.1);
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// model files

/// One model-file directive.
#[derive(Clone, Debug)]
pub(crate) enum Directive {
    Model(String),
    Const(String),
    Field { name: String, kinds: Vec<Kind>, antisym: Option<(u8, u8)>, role: String, momentum: String },
    Bracket { left: (String, Vec<Idx>), right: (String, Vec<Idx>), rhs: Span },
    Hamiltonian { name: String, free: Vec<Idx>, rhs: Span, flags: Vec<String>, param: Option<String> },
    Kinetic { field: (String, Vec<Idx>), rhs: Span },
    Secondary { name: String, parent: String, param: String, flip: bool },
    Tex { name: String, template: String },
    Note(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Located {
    pub line: usize,
    pub col: usize,
    pub directive: Directive,
}

/// Joins physical lines into logical ones: a line that starts with
/// whitespace continues the previous directive. `#` starts a comment
/// outside of quotes.
fn logical_lines(src: &str) -> Vec<Span> {
    let mut out: Vec<Span> = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = ln + 1;
        let mut in_quote = false;
        let mut cut = raw.len();
        for (k, c) in raw.char_indices() {
            match c {
                '"' => in_quote = !in_quote,
                '#' if !in_quote => {
                    cut = k;
                    break;
                }
                _ => {}
            }
        }
        let text = &raw[..cut];
        if text.trim().is_empty() {
            continue;
        }
        let pos: Vec<(usize, usize)> = (0..text.len()).map(|k| (line, k + 1)).collect();
        let continues = text.starts_with(char::is_whitespace) && !out.is_empty();
        if continues {
            let last = out.last_mut().expect("non-empty");
            let gap = last.end;
            last.text.push(' ');
            last.pos.push(gap);
            last.text.push_str(text);
            last.pos.extend(pos);
            last.end = (line, text.len() + 1);
        } else {
            out.push(Span { text: text.to_string(), pos, end: (line, text.len() + 1) });
        }
    }
    out
}

fn find_top(s: &str, target: char) -> Option<usize> {
    let mut depth = 0i32;
    for (k, c) in s.char_indices() {
        match c {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => depth -= 1,
            c if c == target && depth == 0 => return Some(k),
            _ => {}
        }
    }
    None
}

/// `key=value` options; values may be parenthesized lists.
fn options(span: &Span) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let s = &span.text;
    let mut k = 0;
    while k < s.len() {
        let rest = &s[k..];
        let skip = rest.len() - rest.trim_start().len();
        k += skip;
        if k >= s.len() {
            break;
        }
        let rest = &s[k..];
        let Some(eq) = rest.find('=') else {
            return span.err(k, format!("expected key=value, found `{}`", rest.trim()));
        };
        let key = rest[..eq].trim().to_string();
        if key.contains(char::is_whitespace) || key.is_empty() {
            return span.err(k, format!("expected key=value, found `{}`", rest.trim()));
        }
        let after = &rest[eq + 1..];
        let (val, used) = if let Some(stripped) = after.strip_prefix('(') {
            let Some(close) = stripped.find(')') else {
                return span.err(k + eq + 1, "unclosed `(`");
            };
            (stripped[..close].to_string(), close + 2)
        } else {
            let end = after.find(char::is_whitespace).unwrap_or(after.len());
            (after[..end].to_string(), end)
        };
        out.insert(key, val);
        k += eq + 1 + used;
    }
    Ok(out)
}

fn symbol_head(span: &Span) -> Result<(String, Vec<Idx>)> {
    let t = span.trim();
    let s = t.text.as_str();
    if let Some(open) = s.find('[') {
        if !s.ends_with(']') {
            return t.err(0, format!("malformed symbol `{s}`"));
        }
        let name = s[..open].trim().to_string();
        let mut ls = Vec::new();
        let mut off = open + 1;
        for part in s[open + 1..s.len() - 1].split(',') {
            let p = part.trim();
            match Idx::parse(p) {
                Some(l) => ls.push(l),
                None => return t.err(off, format!("`{p}` is not an index label")),
            }
            off += part.len() + 1;
        }
        Ok((name, ls))
    } else {
        Ok((s.to_string(), Vec::new()))
    }
}

/// Splits a model file into directives without resolving symbols.
pub(crate) fn parse_directives(src: &str) -> Result<Vec<Located>> {
    let mut out = Vec::new();
    for logical in logical_lines(src) {
        let body = logical.trim();
        let (line, col) = body.at(0);
        let s = body.text.clone();
        let kw_end = s.find(char::is_whitespace).unwrap_or(s.len());
        let kw = &s[..kw_end];
        let rest = body.slice(kw_end, s.len());
        let rest_t = rest.trim();
        let d = match kw {
            "model" => Directive::Model(rest_t.text.clone()),
            "const" => Directive::Const(rest_t.text.clone()),
            "note" => Directive::Note(rest_t.text.clone()),
            "field" => {
                let r = &rest_t.text;
                let name_end = r.find(char::is_whitespace).unwrap_or(r.len());
                let name = r[..name_end].to_string();
                let o = options(&rest_t.slice(name_end, r.len()))?;
                let mut kinds = Vec::new();
                for k in o.get("slots").map(String::as_str).unwrap_or("").split(',').map(str::trim) {
                    match k {
                        "" => {}
                        "spatial" => kinds.push(Kind::Spatial),
                        "internal" => kinds.push(Kind::Internal),
                        other => return body.err(0, format!("unknown slot kind `{other}`")),
                    }
                }
                let antisym = match o.get("antisym") {
                    None => None,
                    Some(v) => {
                        let ps: Vec<Option<u8>> =
                            v.split(',').map(|x| x.trim().parse::<u8>().ok().filter(|&n| n >= 1)).collect();
                        match ps.as_slice() {
                            [Some(p), Some(q)] if p != q && (*p.max(q) as usize) <= kinds.len() => {
                                let (p, q) = (p.min(q) - 1, p.max(q) - 1);
                                if kinds[p as usize] != kinds[q as usize] {
                                    return body.err(0, "index-kind mismatch: antisymmetric slots differ in kind");
                                }
                                Some((p, q))
                            }
                            _ => return body.err(0, format!("bad antisym=({v})")),
                        }
                    }
                };
                let Some(role) = o.get("role").cloned() else { return body.err(0, "field needs role=") };
                let Some(momentum) = o.get("momentum").cloned() else {
                    return body.err(0, "field needs momentum=");
                };
                Directive::Field { name, kinds, antisym, role, momentum }
            }
            "bracket" => {
                let r = &rest.text;
                let Some(open) = r.find('{') else { return rest.err(0, "expected `{`") };
                let Some(close) = r.find('}') else { return rest.err(open, "expected `}`") };
                let inner = rest.slice(open + 1, close);
                let Some(comma) = find_top(&inner.text, ',') else {
                    return inner.err(0, "expected `{FIELD, MOMENTUM}`");
                };
                let left = symbol_head(&inner.slice(0, comma))?;
                let right = symbol_head(&inner.slice(comma + 1, inner.text.len()))?;
                let after = rest.slice(close + 1, r.len());
                let Some(eq) = after.text.find('=') else { return after.err(0, "expected `=`") };
                let rhs = after.slice(eq + 1, after.text.len());
                Directive::Bracket { left, right, rhs }
            }
            "hamiltonian" | "kinetic" => {
                let r = &rest.text;
                let Some(eq) = find_top(r, '=') else { return rest.err(0, "expected `=`") };
                let head = rest.slice(0, eq).trim();
                let rhs = rest.slice(eq + 1, r.len());
                if kw == "kinetic" {
                    Directive::Kinetic { field: symbol_head(&head)?, rhs }
                } else {
                    let h = &head.text;
                    let (name, free) = match h.find('[') {
                        Some(open) => {
                            let inner = head.slice(open + 1, h.len().saturating_sub(1).max(open + 1));
                            let o = options(&inner)?;
                            let mut free = Vec::new();
                            if let Some(v) = o.get("free") {
                                for p in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                                    match Idx::parse(p) {
                                        Some(l) => free.push(l),
                                        None => return inner.err(0, format!("`{p}` is not an index label")),
                                    }
                                }
                            }
                            (h[..open].trim().to_string(), free)
                        }
                        None => (h.clone(), Vec::new()),
                    };
                    let (cut, flags, param) = split_trailing_flags(&rhs.text);
                    Directive::Hamiltonian { name, free, rhs: rhs.slice(0, cut), flags, param }
                }
            }
            "secondary" => {
                let ws: Vec<&str> = rest_t.text.split_whitespace().collect();
                if ws.len() < 4 || ws[1] != "from" {
                    return rest_t.err(0, "expected `secondary NAME from PARENT param=P [flip]`");
                }
                let mut param = None;
                let mut flip = false;
                for w in &ws[3..] {
                    if let Some(p) = w.strip_prefix("param=") {
                        param = Some(p.to_string());
                    } else if *w == "flip" {
                        flip = true;
                    } else {
                        return rest_t.err(0, format!("unknown option `{w}`"));
                    }
                }
                let Some(param) = param else { return rest_t.err(0, "secondary needs param=") };
                Directive::Secondary { name: ws[0].into(), parent: ws[2].into(), param, flip }
            }
            "tex" => {
                let r = &rest_t.text;
                let Some(eq) = r.find('=') else { return rest_t.err(0, "expected `=`") };
                let name = r[..eq].trim().to_string();
                let v = r[eq + 1..].trim();
                let Some(template) = v.strip_prefix('"').and_then(|v| v.strip_suffix('"')) else {
                    return rest_t.err(eq + 1, "expected a quoted template");
                };
                Directive::Tex { name, template: template.to_string() }
            }
            other => return body.err(0, format!("unknown directive `{other}`")),
        };
        out.push(Located { line, col, directive: d });
    }
    Ok(out)
}

/// Peels `primary`, `canonical` and `param=NAME` words off the end of a
/// hamiltonian right-hand side. Returns the byte length of the expression.
fn split_trailing_flags(rhs: &str) -> (usize, Vec<String>, Option<String>) {
    let mut spans: Vec<(usize, &str)> = Vec::new();
    let mut start = None;
    for (k, c) in rhs.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s0)) => {
                spans.push((s0, &rhs[s0..k]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s0) = start {
        spans.push((s0, &rhs[s0..]));
    }
    let mut flags = Vec::new();
    let mut param = None;
    let mut cut = spans.len();
    while cut > 0 {
        let w = spans[cut - 1].1;
        if w == "primary" || w == "canonical" {
            flags.push(w.to_string());
        } else if let Some(p) = w.strip_prefix("param=") {
            param = Some(p.to_string());
        } else {
            break;
        }
        cut -= 1;
    }
    flags.reverse();
    let end = if cut == 0 { 0 } else { spans[cut - 1].0 + spans[cut - 1].1.len() };
    (end, flags, param)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::canonicalize;

    fn table() -> SymbolTable {
        let mut t = SymbolTable::with_default_constants();
        t.declare("A", vec![Kind::Spatial, Kind::Internal], None, SymbolClass::Field);
        t.declare("B", vec![Kind::Spatial, Kind::Spatial, Kind::Internal], Some((0, 1)), SymbolClass::Field);
        t.declare("T", vec![Kind::Internal], None, SymbolClass::Field);
        t
    }

    #[test]
    fn parses_and_displays_round_trip() {
        let src = "1/2*Xi^-1*eps(i,j,k)*A[a,j]*d(b)@B[a,b,k] - Omega*T[i]";
        let e = canonicalize(&parse_expression(src, &table()).unwrap());
        let again = canonicalize(&parse_expression(&e.to_string(), &table()).unwrap());
        assert_eq!(e, again);
    }

    #[test]
    fn division_by_constant() {
        let e = canonicalize(&parse_expression("Xi/Omega*T[i]", &table()).unwrap());
        assert_eq!(e.terms[0].consts.len(), 2);
        assert_eq!(e.terms[0].const_power("Omega"), -1);
    }

    #[test]
    fn undeclared_symbol_reports_position() {
        match parse_expression("T[i] + Q[i]", &table()) {
            Err(Error::Parse { line: 1, col: 8, msg }) => assert!(msg.contains("undeclared")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kind_mismatch() {
        assert!(matches!(parse_expression("T[a]", &table()), Err(Error::Parse { .. })));
        assert!(matches!(parse_expression("eps(a,b,c)", &table()), Err(Error::Parse { .. })));
    }

    #[test]
    fn unbalanced_sum_rejected() {
        assert!(parse_expression("T[i] + T[j]", &table()).is_err());
    }

    #[test]
    fn trailing_flags() {
        let src = " p0[a,i] + T[i]  primary param=rho";
        let (e, f, p) = split_trailing_flags(src);
        assert_eq!(src[..e].trim(), "p0[a,i] + T[i]");
        assert_eq!(f, vec!["primary".to_string()]);
        assert_eq!(p.as_deref(), Some("rho"));
    }

    #[test]
    fn continuation_lines_join_and_keep_positions() {
        let src = "model m\nhamiltonian H = T[i]*T[i]  # comment\n  + Q[i]*T[i]\n  canonical\n";
        let ds = parse_directives(src).unwrap();
        assert_eq!(ds.len(), 2);
        let Directive::Hamiltonian { rhs, flags, .. } = &ds[1].directive else { panic!("not a hamiltonian") };
        assert_eq!(flags, &["canonical".to_string()]);
        let err = parse_span(rhs, &table()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, col: 5, .. }), "{err:?}");
    }
}
