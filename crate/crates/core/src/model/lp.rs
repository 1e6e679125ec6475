use std::collections::HashMap;
use std::fmt::Write as _;

use super::{fmt_num, kind_of, MipInstance, ModelError, Row, Sense, Variable};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (idx, (c, name)) in terms.enumerate() {
        if idx > 0 && idx % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if idx == 0 && c >= 0.0 {
            let _ = write!(out, " {} {}", fmt_num(c), name);
        } else {
            let _ = write!(out, " {} {} {}", sign, fmt_num(c.abs()), name);
        }
    }
}

/// CPLEX LP text of `instance`. All variables are declared binary.
pub fn write_lp(instance: &MipInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", instance.name);
    out.push_str("Maximize\n obj:");
    let mut objective: Vec<(f64, String)> =
        instance.variables.iter().filter(|v| v.objective != 0.0).map(|v| (v.objective, v.name.clone())).collect();
    if objective.is_empty() {
        objective.push((0.0, instance.variables[0].name.clone()));
    }
    write_terms(&mut out, objective.into_iter());
    out.push_str("\nSubject To\n");
    for row in &instance.rows {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, row.terms.iter().map(|&(v, c)| (c, instance.variables[v].name.clone())));
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {} {}", sense, fmt_num(row.rhs));
    }
    out.push_str("Binary\n");
    for chunk in instance.variables.chunks(TERMS_PER_LINE) {
        let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Pending {
    name: String,
    line: usize,
    tokens: Vec<String>,
}

type Terms = Vec<(String, f64)>;

fn parse_expr(tokens: &[String], line: usize) -> Result<(Terms, Option<(Sense, f64)>), ModelError> {
    let err = |message: String| ModelError::Parse { format: "lp", line, message };
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i].as_str();
        match t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            ">=" | "=>" | "<=" | "=<" => {
                let sense = if t.contains('>') { Sense::Ge } else { Sense::Le };
                let rhs_tokens = &tokens[i + 1..];
                let rhs: f64 = match rhs_tokens {
                    [v] => v.parse().map_err(|_| err(format!("bad right-hand side `{v}`")))?,
                    [s, v] if s == "-" => -v.parse::<f64>().map_err(|_| err(format!("bad right-hand side `{v}`")))?,
                    _ => return Err(err("expected one right-hand-side value".into())),
                };
                return Ok((terms, Some((sense, rhs))));
            }
            _ => {
                if let Ok(c) = t.parse::<f64>() {
                    coef = Some(c);
                } else {
                    terms.push((t.to_string(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
        i += 1;
    }
    if coef.is_some() {
        return Err(err("coefficient without variable".into()));
    }
    Ok((terms, None))
}

/// Reads LP text produced by [`write_lp`] (or any LP file using the same
/// subset: one objective, `>=`/`<=` rows, a Binary section).
pub fn parse_lp(text: &str) -> Result<MipInstance, ModelError> {
    let mut name = String::from("lp");
    let mut section = Section::Preamble;
    let mut objective: Option<Pending> = None;
    let mut rows: Vec<Pending> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('\\') {
            if section == Section::Preamble {
                name = comment.trim().to_string();
            }
            continue;
        }
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        let tokens = line.split_whitespace().map(str::to_string);
        match section {
            Section::Objective | Section::Constraints => {
                for tok in tokens {
                    if let Some(label) = tok.strip_suffix(':') {
                        let p = Pending { name: label.to_string(), line: line_no, tokens: Vec::new() };
                        if section == Section::Objective {
                            objective = Some(p);
                        } else {
                            rows.push(p);
                        }
                        continue;
                    }
                    let target = if section == Section::Objective { objective.as_mut() } else { rows.last_mut() };
                    match target {
                        Some(p) => p.tokens.push(tok),
                        None => {
                            return Err(ModelError::Parse {
                                format: "lp",
                                line: line_no,
                                message: "expression without a `name:` label".into(),
                            })
                        }
                    }
                }
            }
            Section::Binary => binaries.extend(tokens),
            Section::Bounds => {}
            Section::Preamble => {
                return Err(ModelError::Parse {
                    format: "lp",
                    line: line_no,
                    message: "content before Maximize".into(),
                })
            }
            Section::End => break,
        }
    }

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut intern = |name: &str, variables: &mut Vec<Variable>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            variables.push(Variable { name: name.to_string(), kind: kind_of(name), objective: 0.0 });
            variables.len() - 1
        })
    };
    for b in &binaries {
        intern(b, &mut variables);
    }
    if let Some(obj) = objective {
        let (terms, rel) = parse_expr(&obj.tokens, obj.line)?;
        if rel.is_some() {
            return Err(ModelError::Parse { format: "lp", line: obj.line, message: "objective has a relation".into() });
        }
        for (var, c) in terms {
            let v = intern(&var, &mut variables);
            variables[v].objective += c;
        }
    }
    let mut out_rows = Vec::with_capacity(rows.len());
    for p in rows {
        let (terms, rel) = parse_expr(&p.tokens, p.line)?;
        let (sense, rhs) = rel.ok_or_else(|| ModelError::Parse {
            format: "lp",
            line: p.line,
            message: format!("row `{}` has no relation", p.name),
        })?;
        let terms = terms.into_iter().map(|(var, c)| (intern(&var, &mut variables), c)).collect();
        out_rows.push(Row { name: p.name, terms, sense, rhs });
    }
    Ok(MipInstance { name, variables, rows: out_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_full, VarKind};
    use crate::sampling::ScenarioSet;
    use crate::DiffusionModel;

    #[test]
    fn single_variable_declares_one_binary() {
        let m = MipInstance {
            name: "one".into(),
            variables: vec![Variable { name: "y_0".into(), kind: VarKind::Seed, objective: 1.0 }],
            rows: vec![Row { name: "card".into(), terms: vec![(0, 1.0)], sense: Sense::Le, rhs: 1.0 }],
        };
        let text = write_lp(&m);
        let binary = text.split("Binary\n").nth(1).unwrap();
        assert_eq!(binary, " y_0\nEnd\n");
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    #[test]
    fn round_trip_preserves_model() {
        let s = ScenarioSet::from_arc_lists(
            DiffusionModel::Icm,
            10,
            vec![(0..9).map(|i| (i, i + 1)).collect(), vec![(3, 2)], vec![]],
        );
        let m = build_full(&s, 3, None).unwrap();
        let mut back = parse_lp(&write_lp(&m)).unwrap();
        for (a, b) in m.variables.iter().zip(&back.variables) {
            assert!((a.objective - b.objective).abs() < 1e-9);
        }
        back.variables.iter_mut().zip(&m.variables).for_each(|(b, a)| b.objective = a.objective);
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "Maximize\n obj: y_0\nSubject To\n c1: y_0 +\n";
        match parse_lp(text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
