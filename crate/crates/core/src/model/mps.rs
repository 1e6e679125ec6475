use std::collections::HashMap;
use std::fmt::Write as _;

use super::{fmt_num, kind_of, MipInstance, ModelError, Row, Sense, Variable};

const OBJECTIVE_ROW: &str = "obj";

/// Free-format MPS text of `instance` with `OBJSENSE MAX` and `BV` bounds.
pub fn write_mps(instance: &MipInstance) -> String {
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.variable_count()];
    for (r, row) in instance.rows.iter().enumerate() {
        for &(v, c) in &row.terms {
            columns[v].push((r, c));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", instance.name);
    out.push_str("OBJSENSE\n    MAX\nROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for row in &instance.rows {
        let tag = match row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {}  {}", tag, row.name);
    }
    out.push_str("COLUMNS\n");
    for (v, var) in instance.variables.iter().enumerate() {
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if var.objective != 0.0 || columns[v].is_empty() {
            entries.push((OBJECTIVE_ROW, var.objective));
        }
        entries.extend(columns[v].iter().map(|&(r, c)| (instance.rows[r].name.as_str(), c)));
        for (row, c) in entries {
            let _ = writeln!(out, "    {:<12} {:<12} {}", var.name, row, fmt_num(c));
        }
    }
    out.push_str("RHS\n");
    for row in instance.rows.iter().filter(|r| r.rhs != 0.0) {
        let _ = writeln!(out, "    {:<12} {:<12} {}", "RHS", row.name, fmt_num(row.rhs));
    }
    out.push_str("BOUNDS\n");
    for var in &instance.variables {
        let _ = writeln!(out, " BV BND       {}", var.name);
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Reads free-format MPS text produced by [`write_mps`].
pub fn parse_mps(text: &str) -> Result<MipInstance, ModelError> {
    let mut name = String::from("mps");
    let mut section = Section::Header;
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<Row> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| ModelError::Parse { format: "mps", line: line_no, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            match tokens[0] {
                "NAME" => name = tokens.get(1).map(|s| s.to_string()).unwrap_or_default(),
                "OBJSENSE" => {
                    section = Section::ObjSense;
                    if let Some(sense) = tokens.get(1) {
                        if !sense.eq_ignore_ascii_case("MAX") {
                            return Err(err(format!("only maximisation is supported, found `{sense}`")));
                        }
                    }
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "BOUNDS" => section = Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(format!("unknown section `{other}`"))),
            }
            continue;
        }
        match section {
            Section::Header => return Err(err("data before a section header".into())),
            Section::ObjSense => {
                if !tokens[0].eq_ignore_ascii_case("MAX") {
                    return Err(err(format!("only maximisation is supported, found `{}`", tokens[0])));
                }
            }
            Section::Rows => {
                let [tag, row] = tokens[..] else { return Err(err("expected `<type> <name>`".into())) };
                let sense = match tag {
                    "N" => {
                        objective_row = Some(row.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    other => return Err(err(format!("unsupported row type `{other}`"))),
                };
                row_index.insert(row.to_string(), rows.len());
                rows.push(Row { name: row.to_string(), terms: Vec::new(), sense, rhs: 0.0 });
            }
            Section::Columns => {
                if tokens.contains(&"'MARKER'") {
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("expected `<column> <row> <value> [<row> <value>]`".into()));
                }
                let col = tokens[0];
                let v = *var_index.entry(col.to_string()).or_insert_with(|| {
                    variables.push(Variable { name: col.to_string(), kind: kind_of(col), objective: 0.0 });
                    variables.len() - 1
                });
                for pair in tokens[1..].chunks(2) {
                    let c: f64 = pair[1].parse().map_err(|_| err(format!("bad value `{}`", pair[1])))?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        variables[v].objective += c;
                    } else {
                        let r = *row_index.get(pair[0]).ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                        rows[r].terms.push((v, c));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("expected `<set> <row> <value> [<row> <value>]`".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let c: f64 = pair[1].parse().map_err(|_| err(format!("bad value `{}`", pair[1])))?;
                    let r = *row_index.get(pair[0]).ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                    rows[r].rhs = c;
                }
            }
            Section::Bounds => {
                if tokens.first() != Some(&"BV") || tokens.len() != 3 {
                    return Err(err("only `BV <set> <column>` bounds are supported".into()));
                }
                if !var_index.contains_key(tokens[2]) {
                    return Err(err(format!("bound on unknown column `{}`", tokens[2])));
                }
            }
        }
    }
    Ok(MipInstance { name, variables, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_reduced, write_lp, ExportFormat};
    use crate::presolve::{presolve, PresolveLevel};
    use crate::sampling::ScenarioSet;
    use crate::DiffusionModel;

    fn sample_model() -> MipInstance {
        let s = ScenarioSet::from_arc_lists(
            DiffusionModel::Icm,
            6,
            vec![vec![(0, 1), (1, 0), (1, 2)], vec![(3, 4), (4, 5)], vec![(0, 1), (1, 0), (1, 2)]],
        );
        let r = presolve(&s, &PresolveLevel::Ina.options(DiffusionModel::Icm)).unwrap();
        build_reduced(&r, 2, None).unwrap()
    }

    #[test]
    fn column_count_equals_variable_count() {
        let m = sample_model();
        let text = write_mps(&m);
        let cols = text.split("COLUMNS\n").nth(1).unwrap().split("RHS\n").next().unwrap();
        let mut names: Vec<&str> = cols.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
        names.dedup();
        assert_eq!(names.len(), m.variable_count());
        assert_eq!(text.matches(" BV ").count(), m.variable_count());
    }

    #[test]
    fn round_trip_preserves_model() {
        let m = sample_model();
        let back = parse_mps(&write_mps(&m)).unwrap();
        assert_eq!(back.variables.len(), m.variables.len());
        for (a, b) in m.variables.iter().zip(&back.variables) {
            assert_eq!(a.name, b.name);
            assert!((a.objective - b.objective).abs() < 1e-9);
        }
        assert_eq!(back.rows, m.rows);
        assert_eq!(m.export(ExportFormat::Lp), write_lp(&m));
    }

    #[test]
    fn min_sense_is_rejected() {
        let text = "NAME x\nOBJSENSE\n    MIN\n";
        assert!(matches!(parse_mps(text), Err(ModelError::Parse { line: 3, .. })));
    }
}
