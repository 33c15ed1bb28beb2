//! Fixed-format MPS export and import.
//!
//! Names longer than the 8-character MPS field are deterministically mangled
//! (`X<base36 index>` for columns, `R<base36>` for rows); a clash between a
//! mangled name and any other name is an error. Values are written with 17
//! significant digits so coefficients survive a write/parse round trip with
//! zero drift.

use super::{LpProblem, RowSense};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

const OBJ_NAME: &str = "COST";
const MAX_NAME: usize = 8;

fn base36(mut v: usize) -> String {
    const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if v == 0 {
        return "0".into();
    }
    let mut out = Vec::new();
    while v > 0 {
        out.push(DIGITS[v % 36]);
        v /= 36;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

fn mangle(names: &[String], prefix: char) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(names.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        let short = if name.len() <= MAX_NAME {
            name.clone()
        } else {
            format!("{prefix}{}", base36(i))
        };
        if let Some(&prev) = seen.get(&short) {
            return Err(Error::MpsNameCollision {
                a: names[prev].clone(),
                b: name.clone(),
                mangled: short,
            });
        }
        seen.insert(short.clone(), i);
        out.push(short);
    }
    Ok(out)
}

fn fmt_val(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize a problem as fixed-format MPS text.
pub fn to_mps(p: &LpProblem) -> Result<String> {
    let col_names = mangle(p.col_names(), 'X')?;
    let row_name_list: Vec<String> = p.rows().iter().map(|r| r.name.clone()).collect();
    let row_names = mangle(&row_name_list, 'R')?;
    if row_names.iter().any(|n| n == OBJ_NAME) {
        return Err(Error::MpsNameCollision {
            a: OBJ_NAME.into(),
            b: OBJ_NAME.into(),
            mangled: OBJ_NAME.into(),
        });
    }

    let mut s = String::new();
    writeln!(s, "NAME          {}", p.name).unwrap();
    writeln!(s, "ROWS").unwrap();
    writeln!(s, " N  {OBJ_NAME}").unwrap();
    for (row, name) in p.rows().iter().zip(&row_names) {
        let t = match row.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        writeln!(s, " {t}  {name}").unwrap();
    }

    // Column-major view of the row coefficients, preserving row order.
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_cols()];
    for (i, row) in p.rows().iter().enumerate() {
        for &(j, v) in &row.coeffs {
            per_col[j].push((i, v));
        }
    }

    writeln!(s, "COLUMNS").unwrap();
    for j in 0..p.num_cols() {
        // Objective entry always written, so empty columns survive round trips.
        writeln!(
            s,
            "    {:<10}{:<10}{}",
            col_names[j],
            OBJ_NAME,
            fmt_val(p.objective_coeffs()[j])
        )
        .unwrap();
        for &(i, v) in &per_col[j] {
            writeln!(s, "    {:<10}{:<10}{}", col_names[j], row_names[i], fmt_val(v)).unwrap();
        }
    }

    writeln!(s, "RHS").unwrap();
    for (i, row) in p.rows().iter().enumerate() {
        if row.rhs != 0.0 {
            writeln!(s, "    {:<10}{:<10}{}", "RHS", row_names[i], fmt_val(row.rhs)).unwrap();
        }
    }

    writeln!(s, "BOUNDS").unwrap();
    for j in 0..p.num_cols() {
        let (l, u) = (p.lower_bounds()[j], p.upper_bounds()[j]);
        let name = &col_names[j];
        if l == 0.0 && u == f64::INFINITY {
            continue;
        }
        if l == u {
            writeln!(s, " FX {:<10}{:<10}{}", "BND", name, fmt_val(l)).unwrap();
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            writeln!(s, " FR {:<10}{:<10}", "BND", name).unwrap();
            continue;
        }
        if l == f64::NEG_INFINITY {
            writeln!(s, " MI {:<10}{:<10}", "BND", name).unwrap();
        } else if l != 0.0 {
            writeln!(s, " LO {:<10}{:<10}{}", "BND", name, fmt_val(l)).unwrap();
        }
        if u != f64::INFINITY {
            writeln!(s, " UP {:<10}{:<10}{}", "BND", name, fmt_val(u)).unwrap();
        }
    }
    writeln!(s, "ENDATA").unwrap();
    Ok(s)
}

#[derive(PartialEq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Done,
}

/// Parse MPS text (the subset emitted by [`to_mps`]: no RANGES, no integers).
pub fn parse_mps(text: &str) -> Result<LpProblem> {
    let mut p = LpProblem::new("");
    let mut section = Section::Start;
    let mut obj_row: Option<String> = None;
    // Column bounds are patched at the end; LpProblem validates order then.
    let mut bounds: HashMap<usize, (f64, f64)> = HashMap::new();

    let err = |line: usize, msg: &str| Error::MpsParse {
        line,
        msg: msg.into(),
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let is_header = !line.starts_with(' ');
        if is_header {
            let mut it = line.split_whitespace();
            let head = it.next().unwrap();
            section = match head {
                "NAME" => {
                    p.name = it.next().unwrap_or("").to_string();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                "RANGES" => return Err(err(lineno, "RANGES section is not supported")),
                other => return Err(err(lineno, &format!("unknown section `{other}`"))),
            };
            if section == Section::Done {
                break;
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(err(lineno, "expected `<type> <name>`"));
                }
                match fields[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(err(lineno, "multiple N (objective) rows"));
                        }
                        obj_row = Some(fields[1].to_string());
                    }
                    t @ ("L" | "G" | "E") => {
                        let sense = match t {
                            "L" => RowSense::Le,
                            "G" => RowSense::Ge,
                            _ => RowSense::Eq,
                        };
                        p.add_row(fields[1], sense, 0.0, &[])
                            .map_err(|e| err(lineno, &e.to_string()))?;
                    }
                    other => return Err(err(lineno, &format!("unknown row type `{other}`"))),
                }
            }
            Section::Columns => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(lineno, "expected `<col> (<row> <value>)+`"));
                }
                if fields.contains(&"'MARKER'") {
                    return Err(err(lineno, "integer markers are not supported"));
                }
                let col = match p.col_by_name(fields[0]) {
                    Some(c) => c,
                    None => p
                        .add_col(fields[0], 0.0, f64::INFINITY, 0.0)
                        .map_err(|e| err(lineno, &e.to_string()))?,
                };
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(lineno, &format!("bad number `{}`", pair[1])))?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        p.add_objective(col, value);
                    } else {
                        let row = p
                            .row_by_name(pair[0])
                            .ok_or_else(|| err(lineno, &format!("unknown row `{}`", pair[0])))?;
                        p.add_term(row, col, value);
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(lineno, "expected `<set> (<row> <value>)+`"));
                }
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(lineno, &format!("bad number `{}`", pair[1])))?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        return Err(err(lineno, "objective RHS is not supported"));
                    }
                    let row = p
                        .row_by_name(pair[0])
                        .ok_or_else(|| err(lineno, &format!("unknown row `{}`", pair[0])))?;
                    p.rows_mut()[row.0].rhs = value;
                }
            }
            Section::Bounds => {
                let kind = fields[0];
                let needs_value = !matches!(kind, "FR" | "MI" | "PL");
                let expect = if needs_value { 4 } else { 3 };
                if fields.len() != expect {
                    return Err(err(lineno, "malformed BOUNDS line"));
                }
                let col = p
                    .col_by_name(fields[2])
                    .ok_or_else(|| err(lineno, &format!("unknown column `{}`", fields[2])))?;
                let entry = bounds.entry(col.0).or_insert((0.0, f64::INFINITY));
                let value = if needs_value {
                    fields[3]
                        .parse::<f64>()
                        .map_err(|_| err(lineno, &format!("bad number `{}`", fields[3])))?
                } else {
                    0.0
                };
                match kind {
                    "UP" => entry.1 = value,
                    "LO" => entry.0 = value,
                    "FX" => *entry = (value, value),
                    "FR" => *entry = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => entry.0 = f64::NEG_INFINITY,
                    "PL" => entry.1 = f64::INFINITY,
                    other => return Err(err(lineno, &format!("unsupported bound `{other}`"))),
                }
            }
            Section::Start => return Err(err(lineno, "data before any section header")),
            Section::Done => break,
        }
    }

    for (j, (l, u)) in bounds {
        if l > u {
            return Err(Error::BoundsOrder {
                name: p.col_names()[j].clone(),
                lower: l,
                upper: u,
            });
        }
        p.set_bounds_unchecked(j, l, u);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::ColId;

    fn coeff_set(p: &LpProblem) -> Vec<(usize, usize, f64)> {
        let mut v = Vec::new();
        for (i, row) in p.rows().iter().enumerate() {
            for &(j, c) in &row.coeffs {
                v.push((i, j, c));
            }
        }
        v
    }

    #[test]
    fn min_x_ge_one_structure() {
        let mut p = LpProblem::new("tiny");
        let x = p.add_col("x", 0.0, f64::INFINITY, 1.0).unwrap();
        p.add_row("lb", RowSense::Ge, 1.0, &[(x, 1.0)]).unwrap();
        let text = to_mps(&p).unwrap();
        assert!(text.contains(" N  COST"));
        assert!(text.contains(" G  lb"));
        assert!(text.lines().any(|l| l.trim_start().starts_with("RHS") && l.contains("lb")));
    }

    #[test]
    fn empty_problem_is_valid() {
        let p = LpProblem::new("empty");
        let text = to_mps(&p).unwrap();
        let back = parse_mps(&text).unwrap();
        assert_eq!(back.num_cols(), 0);
        assert_eq!(back.num_rows(), 0);
    }

    #[test]
    fn round_trip_exact() {
        let mut p = LpProblem::new("rt");
        let a = p.add_col("alpha", 0.25, 7.5, 1.0 / 3.0).unwrap();
        let b = p
            .add_col("a_rather_long_variable_name", f64::NEG_INFINITY, 2.0, -0.1)
            .unwrap();
        let c = p.add_col("free", f64::NEG_INFINITY, f64::INFINITY, 0.0).unwrap();
        p.add_row("r1", RowSense::Le, 10.0 / 7.0, &[(a, 1.0e-13), (b, -3.3)])
            .unwrap();
        p.add_row("some_long_row_name_here", RowSense::Eq, -2.0, &[(b, 0.1), (c, 9.9)])
            .unwrap();
        let text = to_mps(&p).unwrap();
        let back = parse_mps(&text).unwrap();
        assert_eq!(coeff_set(&p), coeff_set(&back));
        assert_eq!(p.objective_coeffs(), back.objective_coeffs());
        assert_eq!(p.lower_bounds(), back.lower_bounds());
        assert_eq!(p.upper_bounds(), back.upper_bounds());
        for (ra, rb) in p.rows().iter().zip(back.rows()) {
            assert_eq!(ra.sense, rb.sense);
            assert_eq!(ra.rhs, rb.rhs);
        }
    }

    #[test]
    fn mangled_name_collision_is_detected() {
        let mut p = LpProblem::new("clash");
        // `X0` collides with the mangled name of the long first column.
        p.add_col("very_long_column_name_zero", 0.0, 1.0, 0.0).unwrap();
        let long = ColId(0);
        let _ = long;
        p.add_col("X0", 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(to_mps(&p), Err(Error::MpsNameCollision { .. })));
    }
}
