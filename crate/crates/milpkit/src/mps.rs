//! MPS reading and writing.
//!
//! Free-form, whitespace-delimited dialect: sections
//! `NAME/ROWS/COLUMNS/RHS/BOUNDS/ENDATA`, row senses `N/L/G/E`, integrality
//! via `'MARKER'` `'INTORG'`/`'INTEND'` lines, bound codes `UP/LO/FX/BV/MI`.
//! `RANGES` is rejected. Section headers start at column zero, data lines are
//! indented. Numbers are written with 17 significant digits so that
//! `parse_mps(write_mps(inst))` reproduces the instance exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Constraint, MilpInstance, Sense};

#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: section {found} out of order")]
    SectionOrder { line: usize, found: String },
    #[error("line {line}: unknown row reference '{name}'")]
    UnknownRow { line: usize, name: String },
    #[error("line {line}: unknown column reference '{name}'")]
    UnknownColumn { line: usize, name: String },
    #[error("line {line}: duplicate entry for column '{col}' in row '{row}'")]
    DuplicateEntry { line: usize, col: String, row: String },
    #[error("line {line}: non-numeric field '{field}'")]
    NonNumeric { line: usize, field: String },
    #[error("line {line}: unsupported section '{what}'")]
    Unsupported { line: usize, what: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("instance construction failed: {0}")]
    Model(#[from] crate::model::ModelError),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    Rows,
    Columns,
    Rhs,
    Bounds,
    EndData,
}

fn parse_number(tok: &str, line: usize) -> Result<f64, MpsError> {
    tok.parse::<f64>().map_err(|_| MpsError::NonNumeric {
        line,
        field: tok.to_string(),
    })
}

/// Parses an MPS document into a [`MilpInstance`].
pub fn parse_mps(text: &str) -> Result<MilpInstance, MpsError> {
    let mut section = Section::Start;
    let mut name = String::new();

    // Row bookkeeping: objective row name, plus constraint rows in file order.
    let mut obj_row: Option<String> = None;
    let mut row_names: Vec<String> = Vec::new();
    let mut row_sense: Vec<Sense> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();

    // Column bookkeeping in order of first appearance.
    let mut var_names: Vec<String> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut is_integer: Vec<bool> = Vec::new();
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new(); // (row, col) -> coeff
    let mut entry_order: Vec<(usize, usize)> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut lower: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();
    let mut in_integer_block = false;
    let mut saw_endata = false;
    let mut last_line = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let indented = raw.starts_with(|c: char| c.is_whitespace());
        let tokens: Vec<&str> = raw.split_whitespace().collect();

        if !indented {
            let header = tokens[0].to_uppercase();
            let new_section = match header.as_str() {
                "NAME" => {
                    if tokens.len() > 1 {
                        name = tokens[1].to_string();
                    }
                    Section::Name
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::EndData,
                "RANGES" | "OBJSENSE" | "SOS" => {
                    return Err(MpsError::Unsupported { line, what: header })
                }
                other => {
                    return Err(MpsError::Malformed {
                        line,
                        msg: format!("unrecognized section header '{other}'"),
                    })
                }
            };
            if new_section <= section {
                return Err(MpsError::SectionOrder {
                    line,
                    found: header,
                });
            }
            section = new_section;
            if section == Section::EndData {
                saw_endata = true;
                break;
            }
            continue;
        }

        match section {
            Section::Rows => {
                if tokens.len() < 2 {
                    return Err(MpsError::Malformed {
                        line,
                        msg: "row line needs sense and name".into(),
                    });
                }
                let sense = tokens[0].to_uppercase();
                let rname = tokens[1].to_string();
                match sense.as_str() {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(MpsError::Malformed {
                                line,
                                msg: "second objective (N) row".into(),
                            });
                        }
                        obj_row = Some(rname);
                    }
                    "L" | "G" | "E" => {
                        if row_index.contains_key(&rname) {
                            return Err(MpsError::Malformed {
                                line,
                                msg: format!("duplicate row name '{rname}'"),
                            });
                        }
                        row_index.insert(rname.clone(), row_names.len());
                        row_names.push(rname);
                        row_sense.push(match sense.as_str() {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        });
                    }
                    other => {
                        return Err(MpsError::Malformed {
                            line,
                            msg: format!("unknown row sense '{other}'"),
                        })
                    }
                }
            }
            Section::Columns => {
                // Marker lines toggle the integer block.
                if tokens.iter().any(|t| t.contains("'MARKER'")) {
                    if tokens.iter().any(|t| t.contains("'INTORG'")) {
                        in_integer_block = true;
                    } else if tokens.iter().any(|t| t.contains("'INTEND'")) {
                        in_integer_block = false;
                    } else {
                        return Err(MpsError::Malformed {
                            line,
                            msg: "marker line without INTORG/INTEND".into(),
                        });
                    }
                    continue;
                }
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(MpsError::Malformed {
                        line,
                        msg: "column line needs name plus (row, value) pairs".into(),
                    });
                }
                let cname = tokens[0];
                let col = *var_index.entry(cname.to_string()).or_insert_with(|| {
                    var_names.push(cname.to_string());
                    objective.push(0.0);
                    is_integer.push(false);
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                    var_names.len() - 1
                });
                if in_integer_block {
                    is_integer[col] = true;
                }
                for pair in tokens[1..].chunks(2) {
                    let rname = pair[0];
                    let value = parse_number(pair[1], line)?;
                    if obj_row.as_deref() == Some(rname) {
                        objective[col] = value;
                    } else if let Some(&r) = row_index.get(rname) {
                        if entries.insert((r, col), value).is_some() {
                            return Err(MpsError::DuplicateEntry {
                                line,
                                col: cname.to_string(),
                                row: rname.to_string(),
                            });
                        }
                        entry_order.push((r, col));
                    } else {
                        return Err(MpsError::UnknownRow {
                            line,
                            name: rname.to_string(),
                        });
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(MpsError::Malformed {
                        line,
                        msg: "rhs line needs vector name plus (row, value) pairs".into(),
                    });
                }
                rhs.resize(row_names.len(), 0.0);
                for pair in tokens[1..].chunks(2) {
                    let rname = pair[0];
                    let value = parse_number(pair[1], line)?;
                    if obj_row.as_deref() == Some(rname) {
                        return Err(MpsError::Malformed {
                            line,
                            msg: "objective constants are unsupported".into(),
                        });
                    }
                    let &r = row_index.get(rname).ok_or_else(|| MpsError::UnknownRow {
                        line,
                        name: rname.to_string(),
                    })?;
                    rhs[r] = value;
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(MpsError::Malformed {
                        line,
                        msg: "bound line needs code, set name, and column".into(),
                    });
                }
                let code = tokens[0].to_uppercase();
                let cname = tokens[2];
                let &col = var_index
                    .get(cname)
                    .ok_or_else(|| MpsError::UnknownColumn {
                        line,
                        name: cname.to_string(),
                    })?;
                match code.as_str() {
                    "UP" | "LO" | "FX" => {
                        let tok = tokens.get(3).ok_or_else(|| MpsError::Malformed {
                            line,
                            msg: format!("bound code {code} needs a value"),
                        })?;
                        let value = parse_number(tok, line)?;
                        match code.as_str() {
                            "UP" => upper[col] = value,
                            "LO" => lower[col] = value,
                            _ => {
                                lower[col] = value;
                                upper[col] = value;
                            }
                        }
                    }
                    "BV" => {
                        lower[col] = 0.0;
                        upper[col] = 1.0;
                        is_integer[col] = true;
                    }
                    "MI" => lower[col] = f64::NEG_INFINITY,
                    other => {
                        return Err(MpsError::Malformed {
                            line,
                            msg: format!("unsupported bound code '{other}'"),
                        })
                    }
                }
            }
            _ => {
                return Err(MpsError::Malformed {
                    line,
                    msg: "data line outside of any section".into(),
                })
            }
        }
    }

    if !saw_endata {
        return Err(MpsError::Malformed {
            line: last_line,
            msg: "missing ENDATA".into(),
        });
    }

    rhs.resize(row_names.len(), 0.0);
    let mut coeffs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); row_names.len()];
    for (r, c) in entry_order {
        coeffs[r].push((c, entries[&(r, c)]));
    }
    let constraints = coeffs
        .into_iter()
        .zip(row_sense)
        .zip(&rhs)
        .map(|((cs, sense), &b)| Constraint::new(cs, sense, b))
        .collect();

    Ok(MilpInstance::new(
        name,
        objective,
        constraints,
        lower,
        upper,
        is_integer,
        var_names,
        row_names,
    )?)
}

/// 17 significant digits; round-trips any finite f64 exactly.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes an instance to the MPS dialect read by [`parse_mps`].
///
/// Every variable gets an explicit objective entry (zero included) so the
/// column order and count survive the round trip.
pub fn write_mps(inst: &MilpInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", inst.name);
    out.push_str("ROWS\n N  OBJ\n");
    for (con, cname) in inst.constraints.iter().zip(&inst.con_names) {
        let tag = match con.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {tag}  {cname}");
    }

    // Row memberships per column.
    let mut col_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.num_vars()];
    for (r, con) in inst.constraints.iter().enumerate() {
        for &(j, a) in &con.coeffs {
            col_rows[j].push((r, a));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for j in 0..inst.num_vars() {
        if inst.is_integer[j] != in_int {
            let marker = if inst.is_integer[j] { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MK{j}  'MARKER'  '{marker}'");
            in_int = inst.is_integer[j];
        }
        let vname = &inst.var_names[j];
        let _ = writeln!(out, "    {vname}  OBJ  {}", fmt_num(inst.objective[j]));
        for &(r, a) in &col_rows[j] {
            let _ = writeln!(out, "    {vname}  {}  {}", inst.con_names[r], fmt_num(a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    MKEND  'MARKER'  'INTEND'");
    }

    out.push_str("RHS\n");
    for (con, cname) in inst.constraints.iter().zip(&inst.con_names) {
        let _ = writeln!(out, "    RHS  {cname}  {}", fmt_num(con.rhs));
    }

    out.push_str("BOUNDS\n");
    for j in 0..inst.num_vars() {
        let vname = &inst.var_names[j];
        let (lo, hi) = (inst.lower[j], inst.upper[j]);
        if inst.is_integer[j] && lo == 0.0 && hi == 1.0 {
            let _ = writeln!(out, " BV BND  {vname}");
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " FX BND  {vname}  {}", fmt_num(lo));
            continue;
        }
        if lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI BND  {vname}");
        } else if lo != 0.0 {
            let _ = writeln!(out, " LO BND  {vname}  {}", fmt_num(lo));
        }
        if hi != f64::INFINITY {
            let _ = writeln!(out, " UP BND  {vname}  {}", fmt_num(hi));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimal_binary_instance() {
        let text = "NAME          tiny\nROWS\n N  OBJ\nCOLUMNS\n    x  OBJ  1.0\nBOUNDS\n BV BND  x\nENDATA\n";
        let inst = parse_mps(text).unwrap();
        assert_eq!(inst.num_vars(), 1);
        assert_eq!(inst.num_int(), 1);
        assert_eq!(inst.objective, vec![1.0]);
        assert!(inst.is_binary(0));
    }

    #[test]
    fn single_constraint_transcription() {
        let text = "NAME t\nROWS\n N  obj\n L  c1\nCOLUMNS\n    x  obj  1.0  c1  2.0\nRHS\n    RHS  c1  4.0\nENDATA\n";
        let inst = parse_mps(text).unwrap();
        assert_eq!(inst.num_constraints(), 1);
        let con = &inst.constraints[0];
        assert_eq!(con.coeffs, vec![(0, 2.0)]);
        assert_eq!(con.sense, Sense::Le);
        assert_eq!(con.rhs, 4.0);
    }

    #[test]
    fn marker_block_sets_integrality() {
        let text = "NAME t\nROWS\n N  OBJ\nCOLUMNS\n    M1  'MARKER'  'INTORG'\n    x  OBJ  1.0\n    M2  'MARKER'  'INTEND'\n    y  OBJ  2.0\nBOUNDS\n UP BND  x  5.0\nENDATA\n";
        let inst = parse_mps(text).unwrap();
        assert!(inst.is_integer[0]);
        assert!(!inst.is_integer[1]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        // Section out of order.
        let err = parse_mps("NAME t\nCOLUMNS\nROWS\nENDATA\n").unwrap_err();
        assert_eq!(err, MpsError::SectionOrder { line: 3, found: "ROWS".into() });

        // Unknown row reference.
        let err =
            parse_mps("NAME t\nROWS\n N  OBJ\nCOLUMNS\n    x  nope  1.0\nENDATA\n").unwrap_err();
        assert_eq!(err, MpsError::UnknownRow { line: 5, name: "nope".into() });

        // Duplicate column entry in the same row.
        let err = parse_mps(
            "NAME t\nROWS\n N  OBJ\n L  c\nCOLUMNS\n    x  c  1.0\n    x  c  2.0\nENDATA\n",
        )
        .unwrap_err();
        assert!(matches!(err, MpsError::DuplicateEntry { line: 7, .. }));

        // Non-numeric field.
        let err = parse_mps("NAME t\nROWS\n N  OBJ\nCOLUMNS\n    x  OBJ  abc\nENDATA\n")
            .unwrap_err();
        assert_eq!(err, MpsError::NonNumeric { line: 5, field: "abc".into() });

        // RANGES rejected.
        let err = parse_mps("NAME t\nROWS\n N  OBJ\nRANGES\nENDATA\n").unwrap_err();
        assert!(matches!(err, MpsError::Unsupported { line: 4, .. }));
    }

    #[test]
    fn writer_emits_sections_in_order() {
        let inst = MilpInstance::new(
            "one",
            vec![1.0],
            vec![],
            vec![0.0],
            vec![f64::INFINITY],
            vec![false],
            vec!["x".into()],
            vec![],
        )
        .unwrap();
        let text = write_mps(&inst);
        let pos = |s: &str| text.find(s).unwrap();
        assert!(pos("NAME") < pos("ROWS"));
        assert!(pos("ROWS") < pos("COLUMNS"));
        assert!(pos("COLUMNS") < pos("RHS"));
        assert!(pos("RHS") < pos("BOUNDS"));
        assert!(pos("BOUNDS") < pos("ENDATA"));
    }

    #[test]
    fn writer_places_integer_markers() {
        let inst = MilpInstance::new(
            "m",
            vec![1.0, 2.0, 3.0],
            vec![],
            vec![0.0; 3],
            vec![1.0, 5.0, 1.0],
            vec![true, true, false],
            vec!["a".into(), "b".into(), "c".into()],
            vec![],
        )
        .unwrap();
        let text = write_mps(&inst);
        let intorg = text.find("'INTORG'").unwrap();
        let intend = text.find("'INTEND'").unwrap();
        let a = text.find("\n    a  OBJ").unwrap();
        let b = text.find("\n    b  OBJ").unwrap();
        let c = text.find("\n    c  OBJ").unwrap();
        assert!(intorg < a && a < b && b < intend && intend < c);
    }

    pub(crate) fn random_instance(seed: u64, max_vars: usize, max_rows: usize) -> MilpInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_vars);
        let m = rng.gen_range(0..=max_rows);
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let is_integer: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for j in 0..n {
            if is_integer[j] {
                let lo = rng.gen_range(-3..=0) as f64;
                lower.push(lo);
                upper.push(lo + rng.gen_range(1..=5) as f64);
            } else {
                let lo = if rng.gen_bool(0.2) {
                    f64::NEG_INFINITY
                } else {
                    rng.gen_range(-5.0..0.0)
                };
                lower.push(lo);
                upper.push(if rng.gen_bool(0.2) {
                    f64::INFINITY
                } else {
                    rng.gen_range(0.0..8.0)
                });
            }
        }
        let constraints = (0..m)
            .map(|_| {
                let nnz = rng.gen_range(1..=n.min(4));
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let coeffs = idx[..nnz]
                    .iter()
                    .map(|&j| (j, rng.gen_range(-4.0..4.0)))
                    .collect();
                let sense = match rng.gen_range(0..3) {
                    0 => Sense::Le,
                    1 => Sense::Ge,
                    _ => Sense::Eq,
                };
                Constraint::new(coeffs, sense, rng.gen_range(-10.0..10.0))
            })
            .collect();
        MilpInstance::new(
            format!("rand{seed}"),
            objective,
            constraints,
            lower,
            upper,
            is_integer,
            (0..n).map(|j| format!("x{j}")).collect(),
            (0..m).map(|r| format!("c{r}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_100_seeded_instances() {
        for seed in 0..100 {
            let inst = random_instance(seed, 20, 12);
            let reparsed = parse_mps(&write_mps(&inst)).unwrap();
            assert_eq!(inst, reparsed, "round trip mismatch at seed {seed}");
        }
    }
}
