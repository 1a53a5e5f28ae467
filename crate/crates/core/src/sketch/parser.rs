use std::fmt;

use crate::lean::{self, HeaderError, Token};
use crate::verifier::FormalStatement;

use super::{ShowBody, SketchAst, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub require_conclude: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { require_conclude: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    Header(HeaderError),
    MissingHeader,
    NameMismatch { sketch: String, theorem: String },
    DuplicateLabel(String),
    ForwardReference { label: String, target: String },
    UnknownLabel { label: String, target: String },
    NotAShowStep { label: String, target: String },
    NoShowSteps,
    ConcludeBeforeShow,
    MissingConclude,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax { expected, found } => {
                write!(
                    f,
                    "expected {}, found {}",
                    expected.join(" or "),
                    if found.is_empty() { "end of input" } else { found }
                )
            }
            Self::Header(e) => write!(f, "theorem header: {e}"),
            Self::MissingHeader => write!(f, "no theorem header before `sketch`"),
            Self::NameMismatch { sketch, theorem } => write!(f, "sketch `{sketch}` does not match theorem `{theorem}`"),
            Self::DuplicateLabel(l) => write!(f, "duplicate label `{l}`"),
            Self::ForwardReference { label, target } => write!(f, "step `{label}` refers to later step `{target}`"),
            Self::UnknownLabel { label, target } => write!(f, "step `{label}` depends on unknown label `{target}`"),
            Self::NotAShowStep { label, target } => {
                write!(f, "step `{label}` depends on `{target}`, which is not a show step")
            }
            Self::NoShowSteps => write!(f, "sketch has no show steps"),
            Self::ConcludeBeforeShow => write!(f, "conclude before any show step"),
            Self::MissingConclude => write!(f, "sketch is not concluded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub kind: ParseErrorKind,
}

fn expected(items: &[&str], found: &str) -> ParseErrorKind {
    let found = found.chars().take(40).collect::<String>();
    ParseErrorKind::Syntax { expected: items.iter().map(|s| s.to_string()).collect(), found }
}

#[derive(Clone, Copy)]
struct Line<'a> {
    no: u32,
    indent: u32,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.no, column: self.indent, kind }
    }

    fn skippable(&self) -> bool {
        let t = self.text.trim();
        t.is_empty() || t.starts_with("--")
    }
}

fn split_lines(src: &str) -> Vec<Line<'_>> {
    src.lines()
        .enumerate()
        .map(|(i, l)| {
            let trimmed = l.trim_start();
            Line { no: i as u32 + 1, indent: (l.len() - trimmed.len()) as u32, text: l.trim_end() }
        })
        .collect()
}

fn first_word(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}

pub fn parse(source: &str) -> Result<SketchAst, ParseError> {
    parse_with(source, None, ParseOptions::default())
}

/// Parses a sketch for a known statement; the header may be omitted.
pub fn parse_for(source: &str, statement: &FormalStatement) -> Result<SketchAst, ParseError> {
    parse_with(source, Some(statement), ParseOptions::default())
}

pub fn parse_with(
    source: &str,
    statement: Option<&FormalStatement>,
    opts: ParseOptions,
) -> Result<SketchAst, ParseError> {
    let lines = split_lines(source);
    let mut i = 0;
    let mut imports = Vec::new();
    let mut header_lines: Vec<Line> = Vec::new();
    while i < lines.len() {
        let l = lines[i];
        if l.skippable() {
            i += 1;
            continue;
        }
        match first_word(l.text) {
            "sketch" => break,
            "import" if header_lines.is_empty() => {
                let rest: Vec<&str> = l.text.split_whitespace().skip(1).collect();
                if rest.is_empty() {
                    return Err(l.err(expected(&["module name"], "")));
                }
                imports.extend(rest.iter().map(|s| s.to_string()));
            }
            _ => header_lines.push(l),
        }
        i += 1;
    }
    let eof = ParseError { line: lines.len() as u32 + 1, column: 0, kind: expected(&["sketch"], "") };
    let sketch_line = *lines.get(i).ok_or(eof)?;

    let theorem_ref = if header_lines.is_empty() {
        let mut st = statement.cloned().ok_or_else(|| sketch_line.err(ParseErrorKind::MissingHeader))?;
        if !imports.is_empty() {
            st.imports = imports;
        }
        st
    } else {
        let text = header_lines.iter().map(|l| l.text).collect::<Vec<_>>().join("\n");
        let header = lean::parse_header(&text).map_err(|e| header_lines[0].err(ParseErrorKind::Header(e)))?;
        let imports =
            if imports.is_empty() { statement.map(|s| s.imports.clone()).unwrap_or_default() } else { imports };
        FormalStatement { name: header.name.clone(), source: header.render(), imports }
    };

    let mut words = sketch_line.text.split_whitespace().skip(1);
    let name = words.next().ok_or_else(|| sketch_line.err(expected(&["theorem name"], "")))?;
    if let Some(extra) = words.next() {
        return Err(sketch_line.err(expected(&["end of line"], extra)));
    }
    if name != theorem_ref.name {
        return Err(
            sketch_line.err(ParseErrorKind::NameMismatch { sketch: name.into(), theorem: theorem_ref.name.clone() })
        );
    }
    i += 1;

    let mut steps: Vec<(Line, Step)> = Vec::new();
    let mut concluded = false;
    let mut closed = false;
    while i < lines.len() {
        let l = lines[i];
        if l.skippable() {
            i += 1;
            continue;
        }
        let head = l.text.trim();
        if head == "end" {
            closed = true;
            i += 1;
            break;
        }
        // Gather continuation lines: deeper indentation, or open delimiters.
        let mut block = vec![l];
        let mut depth = lean::delimiter_depth(head);
        let mut j = i + 1;
        while j < lines.len() {
            let c = lines[j];
            if c.text.trim().is_empty() {
                j += 1;
                continue;
            }
            if depth > 0 || c.indent > l.indent {
                depth += lean::delimiter_depth(c.text);
                block.push(c);
                j += 1;
            } else {
                break;
            }
        }
        i = j;
        if concluded {
            return Err(l.err(expected(&["end"], head)));
        }
        match first_word(head) {
            "conclude" => {
                if head != "conclude" || block.len() > 1 {
                    let found = if head != "conclude" { &head["conclude".len()..] } else { block[1].text.trim() };
                    return Err(l.err(expected(&["end of line"], found.trim())));
                }
                if !steps.iter().any(|(_, s)| s.is_show()) {
                    return Err(l.err(ParseErrorKind::ConcludeBeforeShow));
                }
                concluded = true;
            }
            "suppose" | "define" | "show" => steps.push((l, parse_step(&block)?)),
            other => return Err(l.err(expected(&["suppose", "define", "show", "conclude", "end"], other))),
        }
    }
    if !closed {
        return Err(ParseError { line: lines.len() as u32 + 1, column: 0, kind: expected(&["end"], "") });
    }
    if let Some(l) = lines[i..].iter().find(|l| !l.skippable()) {
        return Err(l.err(expected(&["end of input"], l.text.trim())));
    }

    validate(&theorem_ref, &steps)?;
    if !steps.iter().any(|(_, s)| s.is_show()) {
        return Err(sketch_line.err(ParseErrorKind::NoShowSteps));
    }
    if opts.require_conclude && !concluded {
        let last = lines.iter().rev().find(|l| !l.skippable()).copied().unwrap_or(sketch_line);
        return Err(last.err(ParseErrorKind::MissingConclude));
    }
    Ok(SketchAst { theorem_ref, steps: steps.into_iter().map(|(_, s)| s).collect(), concluded })
}

/// Removes the common leading indentation and surrounding blank lines.
fn dedent(lines: &[&str]) -> String {
    let min = lines.iter().filter(|l| !l.trim().is_empty()).map(|l| l.len() - l.trim_start().len()).min().unwrap_or(0);
    let body: Vec<&str> = lines.iter().map(|l| if l.trim().is_empty() { "" } else { &l[min..] }).collect();
    body.join("\n").trim_matches('\n').to_string()
}

fn label_and_colon<'a>(l: &Line, rest: &'a str, what: &str) -> Result<(String, &'a str), ParseError> {
    let toks = lean::tokenize(rest);
    let label = match toks.first() {
        Some(t) => match t.token {
            Token::Ident(id) if !id.contains('.') => id,
            _ => return Err(l.err(expected(&[what], &rest[t.start..]))),
        },
        None => return Err(l.err(expected(&[what], ""))),
    };
    match toks.get(1) {
        Some(t) if t.token == Token::Symbol(":") => Ok((label.to_string(), &rest[t.end..])),
        Some(t) => Err(l.err(expected(&[":"], &rest[t.start..]))),
        None => Err(l.err(expected(&[":"], ""))),
    }
}

fn parse_step(block: &[Line]) -> Result<Step, ParseError> {
    let l = block[0];
    let mut text = l.text.trim_start().to_string();
    for c in &block[1..] {
        text.push('\n');
        text.push_str(c.text);
    }
    let kw = first_word(&text).to_string();
    let rest = &text[kw.len()..];
    match kw.as_str() {
        "suppose" => {
            let (label, ty) = label_and_colon(&l, rest, "hypothesis label")?;
            let ty = lean::normalize_ws(ty);
            if ty.is_empty() {
                return Err(l.err(expected(&["proposition"], "")));
            }
            Ok(Step::Suppose { label, type_expr: ty })
        }
        "define" => {
            let toks = lean::top_level_tokens(rest);
            let assign =
                toks.iter().find(|t| t.token == Token::Symbol(":=")).ok_or_else(|| l.err(expected(&[":="], "")))?;
            let lhs = rest[..assign.start].trim();
            let body = lean::normalize_ws(&rest[assign.end..]);
            if body.is_empty() {
                return Err(l.err(expected(&["expression"], "")));
            }
            let (name, ty) = match lhs.split_once(':') {
                Some((n, t)) => (n.trim(), Some(lean::normalize_ws(t))),
                None => (lhs, None),
            };
            if !lean::is_identifier(name) || name.contains('.') {
                return Err(l.err(expected(&["definition name"], name)));
            }
            if ty.as_deref() == Some("") {
                return Err(l.err(expected(&["type"], ":=")));
            }
            Ok(Step::Define { name: name.to_string(), ty, body_expr: body })
        }
        _ => {
            let (label, after_colon) = label_and_colon(&l, rest, "step label")?;
            let top = lean::top_level_tokens(after_colon);
            let by =
                top.iter().position(|t| t.token == Token::Ident("by")).ok_or_else(|| l.err(expected(&["by"], "")))?;
            let by_tok = &top[by];
            let after = top[..by].iter().rposition(|t| t.token == Token::Ident("after"));
            let goal_end = after.map(|a| top[a].start).unwrap_or(by_tok.start);
            let goal = lean::normalize_ws(&after_colon[..goal_end]);
            if goal.is_empty() {
                return Err(l.err(expected(&["proposition"], "by")));
            }
            let depends_on = match after {
                Some(a) => {
                    let list = &after_colon[top[a].end..by_tok.start];
                    let mut deps = Vec::new();
                    // A bare `after` means the step uses no earlier facts.
                    for d in list.split(',').filter(|_| !list.trim().is_empty()) {
                        let d = d.trim();
                        if !lean::is_identifier(d) {
                            return Err(l.err(expected(&["step label"], d)));
                        }
                        deps.push(d.to_string());
                    }
                    Some(deps)
                }
                None => None,
            };
            let proof_text = &after_colon[by_tok.end..];
            let (first, more) = match proof_text.split_once('\n') {
                Some((f, m)) => (f.trim(), m.lines().collect::<Vec<_>>()),
                None => (proof_text.trim(), Vec::new()),
            };
            let rest_body = dedent(&more);
            let body = match (first.is_empty(), rest_body.is_empty()) {
                (true, true) => return Err(l.err(expected(&["?", "tactic proof"], ""))),
                (true, false) => rest_body,
                (false, true) => first.to_string(),
                (false, false) => format!("{first}\n{rest_body}"),
            };
            let body = if body == "?" || body == "sorry" { ShowBody::Hole } else { ShowBody::Proof(body) };
            Ok(Step::ShowBy { label, goal_expr: goal, body, depends_on })
        }
    }
}

fn validate(theorem: &FormalStatement, steps: &[(Line, Step)]) -> Result<(), ParseError> {
    let binder_names = theorem.header().map(|h| h.bound_names()).unwrap_or_default();
    for (idx, (l, step)) in steps.iter().enumerate() {
        let label = step.label();
        if steps[..idx].iter().any(|(_, s)| s.label() == label) {
            return Err(l.err(ParseErrorKind::DuplicateLabel(label.to_string())));
        }
        let exprs: Vec<&str> = match step {
            Step::Suppose { type_expr, .. } => vec![type_expr],
            Step::Define { ty, body_expr, .. } => ty.iter().map(String::as_str).chain([body_expr.as_str()]).collect(),
            Step::ShowBy { goal_expr, .. } => vec![goal_expr],
        };
        for e in exprs {
            for id in lean::free_identifiers(e) {
                if binder_names.contains(&id) || steps[..idx].iter().any(|(_, s)| s.label() == id) {
                    continue;
                }
                if steps[idx..].iter().any(|(_, s)| s.label() == id) {
                    return Err(l.err(ParseErrorKind::ForwardReference { label: label.into(), target: id }));
                }
            }
        }
        if let Step::ShowBy { depends_on: Some(deps), .. } = step {
            for d in deps {
                let err = match steps.iter().position(|(_, s)| s.label() == d) {
                    Some(p) if p >= idx => ParseErrorKind::ForwardReference { label: label.into(), target: d.clone() },
                    Some(p) if !steps[p].1.is_show() => {
                        ParseErrorKind::NotAShowStep { label: label.into(), target: d.clone() }
                    }
                    Some(_) => continue,
                    None => ParseErrorKind::UnknownLabel { label: label.into(), target: d.clone() },
                };
                return Err(l.err(err));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "theorem th (a : ℤ) : a > 0 → a ≥ 0\n\nsketch th\n  suppose h : a > 0\n  show s1 : a ≥ 0 by ?\n  conclude\nend\n";

    #[test]
    fn minimal_sketch() {
        let ast = parse(MINIMAL).unwrap();
        assert!(ast.concluded);
        assert_eq!(ast.theorem_ref.name, "th");
        assert_eq!(
            ast.steps,
            vec![
                Step::Suppose { label: "h".into(), type_expr: "a > 0".into() },
                Step::ShowBy {
                    label: "s1".into(), goal_expr: "a ≥ 0".into(), body: ShowBody::Hole, depends_on: None
                },
            ]
        );
    }

    #[test]
    fn define_after_and_inline_proofs() {
        let src = "import Mathlib\ntheorem t (x : ℝ) : x ^ 2 ≥ 0\nsketch t\n  define y : ℝ := x *\n      x\n  define z := y + 0\n  show s1 : y ≥ 0 by positivity\n  show s2 : x ^ 2 ≥ 0 after s1 by\n    rw [sq]\n    exact s1\n  conclude\nend";
        let ast = parse(src).unwrap();
        assert_eq!(ast.theorem_ref.imports, vec!["Mathlib"]);
        assert_eq!(ast.steps[0], Step::Define { name: "y".into(), ty: Some("ℝ".into()), body_expr: "x * x".into() });
        assert_eq!(ast.steps[1], Step::Define { name: "z".into(), ty: None, body_expr: "y + 0".into() });
        assert_eq!(
            ast.steps[3],
            Step::ShowBy {
                label: "s2".into(),
                goal_expr: "x ^ 2 ≥ 0".into(),
                body: ShowBody::Proof("rw [sq]\nexact s1".into()),
                depends_on: Some(vec!["s1".into()]),
            }
        );
    }

    #[test]
    fn header_can_come_from_statement() {
        let st = FormalStatement::from_header("th (a : ℤ) : a > 0 → a ≥ 0", vec![]).unwrap();
        let ast = parse_for("sketch th\n  suppose h : a > 0\n  show s1 : a ≥ 0 by ?\n  conclude\nend", &st).unwrap();
        assert_eq!(ast.theorem_ref, st);
        let err = parse("sketch th\n  show s1 : True by ?\n  conclude\nend").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingHeader);
    }

    fn kind(src: &str) -> ParseErrorKind {
        parse(src).unwrap_err().kind
    }

    #[test]
    fn error_kinds() {
        let h = "theorem th (a : ℤ) : a ≥ 0\nsketch th\n";
        assert!(matches!(
            kind(&format!("{h}  show s1 : a ≥ 0 after s2 by ?\n  show s2 : a ≥ 0 by ?\n  conclude\nend")),
            ParseErrorKind::ForwardReference { .. }
        ));
        assert!(matches!(
            kind(&format!("{h}  show s1 : a ≥ 1 by ?\n  show s1 : a ≥ 0 by ?\n  conclude\nend")),
            ParseErrorKind::DuplicateLabel(l) if l == "s1"
        ));
        assert_eq!(kind(&format!("{h}  show s1 : a ≥ 0 by ?\nend")), ParseErrorKind::MissingConclude);
        assert_eq!(kind(&format!("{h}  suppose h : a > 0\n  conclude\nend")), ParseErrorKind::ConcludeBeforeShow);
        assert_eq!(kind(&format!("{h}  suppose h : a > 0\nend")), ParseErrorKind::NoShowSteps);
        assert!(matches!(
            kind(&format!("{h}  define y := z + 1\n  define z := 1\n  show s1 : a ≥ 0 by ?\n  conclude\nend")),
            ParseErrorKind::ForwardReference { target, .. } if target == "z"
        ));
        assert!(matches!(
            kind(&format!("{h}  suppose h : a > 0\n  show s1 : a ≥ 0 after h by ?\n  conclude\nend")),
            ParseErrorKind::NotAShowStep { .. }
        ));
        assert!(matches!(
            kind("theorem th : True\nsketch other\n  show s : True by ?\n  conclude\nend"),
            ParseErrorKind::NameMismatch { .. }
        ));
    }

    #[test]
    fn syntax_errors_carry_position_and_expectations() {
        let e = parse("theorem th : True\nsketch th\n  show s1 : True\n  conclude\nend").unwrap_err();
        assert_eq!((e.line, e.column), (3, 2));
        assert_eq!(e.kind, ParseErrorKind::Syntax { expected: vec!["by".into()], found: String::new() });
        let e = parse("theorem th : True\nsketch th\n  prove s1 : True by ?\nend").unwrap_err();
        assert!(
            matches!(&e.kind, ParseErrorKind::Syntax { expected, found } if expected.len() == 5 && found == "prove")
        );
        let e = parse("theorem th : True\nsketch th\n  show s1 : True by ?\n  conclude\n").unwrap_err();
        assert!(matches!(&e.kind, ParseErrorKind::Syntax { expected, .. } if expected == &["end"]));
        let e = parse("theorem th : True\nsketch th\n  show s1 : True by ?\n  conclude\n  show s2 : True by ?\nend")
            .unwrap_err();
        assert_eq!(e.line, 5);
    }

    #[test]
    fn conclude_optional_when_not_required() {
        let ast = parse_with(
            "theorem th : True\nsketch th\n  show s1 : True by ?\nend",
            None,
            ParseOptions { require_conclude: false },
        )
        .unwrap();
        assert!(!ast.concluded);
    }

    #[test]
    fn by_inside_parentheses_is_part_of_goal() {
        let ast = parse("theorem th : True\nsketch th\n  show s1 : (by exact True : Prop) by trivial\n  conclude\nend")
            .unwrap();
        assert!(matches!(&ast.steps[0], Step::ShowBy { goal_expr, .. } if goal_expr == "(by exact True : Prop)"));
    }
}
