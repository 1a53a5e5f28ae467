use std::fmt::Write as _;

use super::{ShowBody, SketchAst, Step};

const INDENT: &str = "  ";

/// Canonical text: imports, the theorem header, a blank line, then the
/// sketch block.
pub fn print(ast: &SketchAst) -> String {
    let mut out = String::new();
    for import in &ast.theorem_ref.imports {
        let _ = writeln!(out, "import {import}");
    }
    if !ast.theorem_ref.imports.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "{}", ast.theorem_ref.source.trim());
    out.push('\n');
    out.push_str(&print_block(ast));
    out
}

/// Only the `sketch ... end` block.
pub fn print_block(ast: &SketchAst) -> String {
    let mut out = format!("sketch {}\n", ast.theorem_ref.name);
    for step in &ast.steps {
        match step {
            Step::Suppose { label, type_expr } => {
                let _ = writeln!(out, "{INDENT}suppose {label} : {type_expr}");
            }
            Step::Define { name, ty: Some(ty), body_expr } => {
                let _ = writeln!(out, "{INDENT}define {name} : {ty} := {body_expr}");
            }
            Step::Define { name, ty: None, body_expr } => {
                let _ = writeln!(out, "{INDENT}define {name} := {body_expr}");
            }
            Step::ShowBy { label, goal_expr, body, depends_on } => {
                let _ = write!(out, "{INDENT}show {label} : {goal_expr}");
                match depends_on {
                    Some(deps) if deps.is_empty() => out.push_str(" after"),
                    Some(deps) => {
                        let _ = write!(out, " after {}", deps.join(", "));
                    }
                    None => {}
                }
                match body {
                    ShowBody::Hole => out.push_str(" by ?\n"),
                    ShowBody::Proof(p) if !p.contains('\n') => {
                        let _ = writeln!(out, " by {p}");
                    }
                    ShowBody::Proof(p) => {
                        out.push_str(" by\n");
                        // Blank lines inside a step are not preserved by the parser.
                        for line in p.lines().filter(|l| !l.trim().is_empty()) {
                            let _ = writeln!(out, "{INDENT}{INDENT}{line}");
                        }
                    }
                }
            }
        }
    }
    if ast.concluded {
        let _ = writeln!(out, "{INDENT}conclude");
    }
    out.push_str("end\n");
    out
}
