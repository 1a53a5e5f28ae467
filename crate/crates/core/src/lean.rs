//! Lexical helpers for Lean 4 source fragments.
//!
//! The engine never type-checks terms; it only needs to find identifiers,
//! split theorem headers into binders and goal, and locate top-level
//! keywords inside opaque expression text.

use std::collections::BTreeSet;

/// Lean's `isLetterLike`: Greek (minus λ, Π, Σ), coptic, letterlike symbols
/// such as ℕ ℤ ℝ, and mathematical script letters.
fn is_letter_like(c: char) -> bool {
    let u = c as u32;
    (0x3b1..=0x3c9).contains(&u) && u != 0x3bb
        || (0x391..=0x3a9).contains(&u) && u != 0x3a0 && u != 0x3a3
        || (0x3ca..=0x3fb).contains(&u)
        || (0x1f00..=0x1ffe).contains(&u)
        || (0x2100..=0x214f).contains(&u)
        || (0x1d49c..=0x1d59f).contains(&u)
}

fn is_subscript_alnum(c: char) -> bool {
    let u = c as u32;
    (0x2080..=0x2089).contains(&u) || (0x2090..=0x209c).contains(&u) || (0x1d62..=0x1d6a).contains(&u)
}

pub fn is_id_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || is_letter_like(c)
}

pub fn is_id_rest(c: char) -> bool {
    is_id_start(c) || c.is_ascii_digit() || c == '\'' || c == '!' || c == '?' || is_subscript_alnum(c)
}

/// True when `s` is a (possibly dotted) Lean identifier.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.split('.').all(|seg| {
            let mut chars = seg.chars();
            matches!(chars.next(), Some(c) if is_id_start(c)) && chars.all(is_id_rest)
        })
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token<'a> {
    Ident(&'a str),
    Number(&'a str),
    Open(char),
    Close(char),
    Symbol(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned<'a> {
    pub token: Token<'a>,
    pub start: usize,
    pub end: usize,
}

pub fn closing_for(open: char) -> Option<char> {
    Some(match open {
        '(' => ')',
        '[' => ']',
        '{' => '}',
        '⟨' => '⟩',
        '⦃' => '⦄',
        '⟦' => '⟧',
        _ => return None,
    })
}

fn is_close(c: char) -> bool {
    matches!(c, ')' | ']' | '}' | '⟩' | '⦄' | '⟧')
}

/// Tokenizes Lean text, skipping whitespace, comments and string literals.
pub fn tokenize(src: &str) -> Vec<Spanned<'_>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);
    let off = |i: usize| bytes.get(i).map(|&(o, _)| o).unwrap_or(src.len());
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i].1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && at(i + 1) == Some('-') {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
        } else if c == '/' && at(i + 1) == Some('-') {
            let mut depth = 0usize;
            while i < bytes.len() {
                if bytes[i].1 == '/' && at(i + 1) == Some('-') {
                    depth += 1;
                    i += 2;
                } else if bytes[i].1 == '-' && at(i + 1) == Some('/') {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += 1;
                }
            }
        } else if c == '"' {
            i += 1;
            while i < bytes.len() && bytes[i].1 != '"' {
                if bytes[i].1 == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
        } else if c == '«' {
            let start = i;
            while i < bytes.len() && bytes[i].1 != '»' {
                i += 1;
            }
            i += 1;
            let (s, e) = (off(start), off(i.min(bytes.len())));
            out.push(Spanned { token: Token::Ident(&src[s..e]), start: s, end: e });
        } else if is_id_start(c) {
            let start = i;
            loop {
                while i < bytes.len() && is_id_rest(bytes[i].1) {
                    i += 1;
                }
                if at(i) == Some('.') && at(i + 1).is_some_and(is_id_start) {
                    i += 1;
                } else {
                    break;
                }
            }
            let (s, e) = (off(start), off(i));
            out.push(Spanned { token: Token::Ident(&src[s..e]), start: s, end: e });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len()
                && (bytes[i].1.is_ascii_alphanumeric()
                    || bytes[i].1 == '.' && at(i + 1).is_some_and(|d| d.is_ascii_digit()))
            {
                i += 1;
            }
            let (s, e) = (off(start), off(i));
            out.push(Spanned { token: Token::Number(&src[s..e]), start: s, end: e });
        } else if closing_for(c).is_some() {
            let s = off(i);
            i += 1;
            out.push(Spanned { token: Token::Open(c), start: s, end: off(i) });
        } else if is_close(c) {
            let s = off(i);
            i += 1;
            out.push(Spanned { token: Token::Close(c), start: s, end: off(i) });
        } else {
            let start = i;
            // Multi-character operators that matter for binder analysis.
            let two: String = bytes[i..bytes.len().min(i + 2)].iter().map(|&(_, c)| c).collect();
            i += if two == "=>" || two == ":=" { 2 } else { 1 };
            let (s, e) = (off(start), off(i));
            out.push(Spanned { token: Token::Symbol(&src[s..e]), start: s, end: e });
        }
    }
    out
}

/// First segment of a dotted identifier (`h.le` → `h`).
pub fn head_segment(id: &str) -> &str {
    if id.starts_with('«') {
        return id;
    }
    id.split('.').next().unwrap_or(id)
}

const BINDER_SYMBOLS: &[&str] = &["∀", "∃", "λ", "∑", "∏", "⋃", "⋂", "∃!", "Π", "Σ"];
const BINDER_WORDS: &[&str] = &["fun", "forall", "exists"];
const BINDER_STOPS: &[&str] = &[":", "∈", "∉", "<", "≤", ">", "≥", "≠", "⊆", "⊂", "|"];

/// Identifiers that occur free in `expr`, in first-occurrence order, with
/// binders introduced inside the expression (`∀ x,`, `fun x =>`, `∑ i in s,`,
/// `{x | p x}`) removed. Only the head segment of dotted names is reported.
pub fn free_identifiers(expr: &str) -> Vec<String> {
    let toks = tokenize(expr);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut bound: Vec<String> = Vec::new();
    scan_free(&toks, &mut bound, &mut |id| {
        if seen.insert(id.to_string()) {
            out.push(id.to_string());
        }
    });
    out
}

/// Identifiers (full dotted form) that occur free in `expr`.
pub fn free_full_identifiers(expr: &str) -> Vec<String> {
    let toks = tokenize(expr);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut bound: Vec<String> = Vec::new();
    scan_free_full(&toks, &mut bound, &mut |id| {
        if seen.insert(id.to_string()) {
            out.push(id.to_string());
        }
    });
    out
}

fn scan_free(toks: &[Spanned<'_>], bound: &mut Vec<String>, emit: &mut dyn FnMut(&str)) {
    scan_free_full(toks, bound, &mut |id| emit(head_segment(id)))
}

fn is_binder_head(t: &Token<'_>) -> bool {
    match t {
        Token::Symbol(s) => BINDER_SYMBOLS.contains(s),
        Token::Ident(s) => BINDER_WORDS.contains(s),
        _ => false,
    }
}

fn matching_close(toks: &[Spanned<'_>], open_idx: usize) -> usize {
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate().skip(open_idx) {
        match t.token {
            Token::Open(_) => depth += 1,
            Token::Close(_) => {
                depth -= 1;
                if depth == 0 {
                    return k;
                }
            }
            _ => {}
        }
    }
    toks.len()
}

fn scan_free_full(toks: &[Spanned<'_>], bound: &mut Vec<String>, emit: &mut dyn FnMut(&str)) {
    let mark = bound.len();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i].token;
        if is_binder_head(t) {
            // Binder region ends at the first top-level `,`, `=>` or `↦`.
            let mut j = i + 1;
            let mut depth = 0i32;
            while j < toks.len() {
                match toks[j].token {
                    Token::Open(_) => depth += 1,
                    Token::Close(_) => {
                        if depth == 0 {
                            break;
                        }
                        depth -= 1
                    }
                    Token::Symbol(s) if depth == 0 && (s == "," || s == "=>" || s == "↦") => break,
                    _ => {}
                }
                j += 1;
            }
            let names = binder_region(&toks[i + 1..j], bound, emit);
            bound.extend(names);
            i = if j < toks.len() && matches!(toks[j].token, Token::Symbol(_)) { j + 1 } else { j };
            continue;
        }
        match t {
            Token::Open('{') => {
                // Set-builder `{x | p x}` or `{x : T | p x}`.
                let close = matching_close(toks, i);
                let inner = &toks[i + 1..close.min(toks.len())];
                let bar = inner.iter().position(|s| matches!(s.token, Token::Symbol("|")));
                let simple_head = bar.is_some_and(|b| {
                    b > 0 && matches!(inner[0].token, Token::Ident(_) | Token::Open('⟨') | Token::Open('('))
                });
                if let (true, Some(b)) = (simple_head, bar) {
                    let names = binder_region(&inner[..b], bound, emit);
                    let m = bound.len();
                    bound.extend(names);
                    scan_free_full(&inner[b + 1..], bound, emit);
                    bound.truncate(m);
                } else {
                    scan_free_full(inner, bound, emit);
                }
                i = close + 1;
                continue;
            }
            Token::Open(_) => {
                let close = matching_close(toks, i);
                scan_free_full(&toks[i + 1..close.min(toks.len())], bound, emit);
                i = close + 1;
                continue;
            }
            Token::Ident(id) => {
                let head = head_segment(id);
                if !bound.iter().any(|b| b == head) && !is_keyword(id) {
                    emit(id);
                }
            }
            _ => {}
        }
        i += 1;
    }
    bound.truncate(mark);
}

/// Splits a binder region into bound names, emitting free identifiers found
/// in type annotations.
fn binder_region(region: &[Spanned<'_>], bound: &mut Vec<String>, emit: &mut dyn FnMut(&str)) -> Vec<String> {
    let mut names = Vec::new();
    let mut i = 0;
    while i < region.len() {
        match region[i].token {
            Token::Open(c) => {
                let close = matching_close(region, i);
                let inner = &region[i + 1..close.min(region.len())];
                if c == '⟨' {
                    for t in inner {
                        if let Token::Ident(id) = t.token {
                            names.push(id.to_string());
                        }
                    }
                } else {
                    let stop = inner
                        .iter()
                        .position(|t| matches!(t.token, Token::Symbol(s) if BINDER_STOPS.contains(&s)))
                        .unwrap_or(inner.len());
                    for t in &inner[..stop] {
                        if let Token::Ident(id) = t.token {
                            names.push(id.to_string());
                        }
                    }
                    if stop < inner.len() {
                        scan_free_full(&inner[stop + 1..], bound, emit);
                    }
                }
                i = close + 1;
            }
            Token::Ident("in") => {
                scan_free_full(&region[i + 1..], bound, emit);
                break;
            }
            Token::Ident(id) => {
                names.push(id.to_string());
                i += 1;
            }
            Token::Symbol(s) if BINDER_STOPS.contains(&s) => {
                scan_free_full(&region[i + 1..], bound, emit);
                break;
            }
            _ => i += 1,
        }
    }
    names
}

fn is_keyword(id: &str) -> bool {
    matches!(
        id,
        "fun"
            | "forall"
            | "exists"
            | "in"
            | "if"
            | "then"
            | "else"
            | "let"
            | "have"
            | "show"
            | "from"
            | "by"
            | "at"
            | "with"
            | "match"
            | "do"
            | "Type"
            | "Prop"
            | "Sort"
    )
}

/// Byte offsets of `word` occurrences that sit outside every delimiter pair
/// and are delimited by whitespace or the string ends.
pub fn top_level_word(src: &str, word: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for t in top_level_tokens(src) {
        if let Token::Ident(id) = t.token {
            if id == word {
                out.push(t.start);
            }
        }
    }
    out
}

/// Tokens not nested inside any delimiter.
pub fn top_level_tokens(src: &str) -> Vec<Spanned<'_>> {
    let mut depth = 0i32;
    let mut out = Vec::new();
    for t in tokenize(src) {
        match t.token {
            Token::Open(_) => depth += 1,
            Token::Close(_) => depth -= 1,
            _ if depth == 0 => out.push(t),
            _ => {}
        }
    }
    out
}

/// Net delimiter depth of `src` (positive when unclosed groups remain).
pub fn delimiter_depth(src: &str) -> i32 {
    tokenize(src).iter().fold(0, |d, t| match t.token {
        Token::Open(_) => d + 1,
        Token::Close(_) => d - 1,
        _ => d,
    })
}

/// Whether any placeholder token (`sorry`, `admit`) appears in tactic text.
pub fn contains_placeholder(src: &str) -> bool {
    tokenize(src).iter().any(|t| matches!(t.token, Token::Ident("sorry") | Token::Ident("admit")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    /// Full text including delimiters, e.g. `(a b : ℤ)`.
    pub text: String,
    pub open: char,
    pub names: Vec<String>,
    pub ty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub keyword: Option<String>,
    pub name: String,
    pub binders: Vec<Binder>,
    pub goal: String,
}

impl Header {
    /// All names bound by the header's binders, in order.
    pub fn bound_names(&self) -> Vec<String> {
        self.binders.iter().flat_map(|b| b.names.iter().cloned()).collect()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} {}", self.keyword.as_deref().unwrap_or("theorem"), self.name);
        for b in &self.binders {
            s.push(' ');
            s.push_str(&b.text);
        }
        s.push_str(" : ");
        s.push_str(&self.goal);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeaderError {
    #[error("expected a theorem name")]
    MissingName,
    #[error("invalid theorem name `{0}`")]
    InvalidName(String),
    #[error("unbalanced binder group")]
    UnbalancedBinder,
    #[error("expected `:` before the goal")]
    MissingColon,
    #[error("empty goal")]
    EmptyGoal,
}

/// Parses `[theorem|lemma] name binders* : goal [:= proof]`.
pub fn parse_header(src: &str) -> Result<Header, HeaderError> {
    let mut rest = src.trim();
    let mut keyword = None;
    for kw in ["theorem", "lemma"] {
        if let Some(r) = rest.strip_prefix(kw) {
            if r.starts_with(char::is_whitespace) {
                keyword = Some(kw.to_string());
                rest = r.trim_start();
                break;
            }
        }
    }
    let name_end = rest.find(|c: char| c.is_whitespace() || c == ':' || closing_for(c).is_some()).unwrap_or(rest.len());
    let name = &rest[..name_end];
    if name.is_empty() {
        return Err(HeaderError::MissingName);
    }
    if !is_identifier(name) {
        return Err(HeaderError::InvalidName(name.to_string()));
    }
    rest = rest[name_end..].trim_start();
    let mut binders = Vec::new();
    while let Some(open) = rest.chars().next().filter(|c| closing_for(*c).is_some()) {
        let close = closing_for(open).unwrap();
        let mut depth = 0i32;
        let mut end = None;
        for t in tokenize(rest) {
            match t.token {
                Token::Open(_) => depth += 1,
                Token::Close(c) => {
                    depth -= 1;
                    if depth == 0 {
                        if c != close {
                            return Err(HeaderError::UnbalancedBinder);
                        }
                        end = Some(t.end);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or(HeaderError::UnbalancedBinder)?;
        let text = normalize_ws(&rest[..end]);
        let inner = &rest[open.len_utf8()..end - close.len_utf8()];
        let (names, ty) = split_binder(inner);
        binders.push(Binder { text, open, names, ty });
        rest = rest[end..].trim_start();
    }
    let Some(goal) = rest.strip_prefix(':') else {
        return Err(HeaderError::MissingColon);
    };
    if goal.starts_with('=') {
        return Err(HeaderError::MissingColon);
    }
    let mut goal = goal.trim();
    if let Some(t) = top_level_tokens(goal).into_iter().find(|t| t.token == Token::Symbol(":=")) {
        goal = goal[..t.start].trim();
    }
    if goal.is_empty() {
        return Err(HeaderError::EmptyGoal);
    }
    Ok(Header { keyword, name: name.to_string(), binders, goal: normalize_ws(goal) })
}

fn split_binder(inner: &str) -> (Vec<String>, Option<String>) {
    let colon = top_level_tokens(inner).into_iter().find(|t| t.token == Token::Symbol(":"));
    match colon {
        Some(t) => {
            let names = inner[..t.start].split_whitespace().map(str::to_string).collect();
            (names, Some(normalize_ws(&inner[t.end..])))
        }
        // `[Fintype α]`: anonymous instance binder.
        None => (Vec::new(), Some(normalize_ws(inner))),
    }
}

/// Splits `premise → rest` at the first top-level arrow.
pub fn split_implication(goal: &str) -> Option<(String, String)> {
    let t = top_level_tokens(goal).into_iter().find(|t| t.token == Token::Symbol("→"))?;
    Some((normalize_ws(&goal[..t.start]), normalize_ws(&goal[t.end..])))
}

/// Splits `∀ x : T, rest` (or `∀ x y : T, rest`) into the first variable,
/// its type annotation, and the remaining goal.
pub fn split_forall(goal: &str) -> Option<(String, Option<String>, String)> {
    let g = goal.trim();
    let body = g.strip_prefix('∀').or_else(|| g.strip_prefix("forall "))?;
    let comma = top_level_tokens(body).into_iter().find(|t| t.token == Token::Symbol(","))?;
    let region = body[..comma.start].trim();
    let rest = normalize_ws(&body[comma.end..]);
    let region = region.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(region);
    let (names, ty) = match top_level_tokens(region).into_iter().find(|t| t.token == Token::Symbol(":")) {
        Some(t) => (region[..t.start].split_whitespace().collect::<Vec<_>>(), Some(normalize_ws(&region[t.end..]))),
        None => (region.split_whitespace().collect(), None),
    };
    let first = names.first()?.to_string();
    if !is_identifier(&first) {
        return None;
    }
    let remaining = &names[1..];
    let rest = if remaining.is_empty() {
        rest
    } else {
        match &ty {
            Some(ty) => format!("∀ {} : {}, {}", remaining.join(" "), ty, rest),
            None => format!("∀ {}, {}", remaining.join(" "), rest),
        }
    };
    Some((first, ty, rest))
}
