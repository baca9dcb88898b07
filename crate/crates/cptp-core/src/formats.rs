//! Deterministic text and JSON codecs.
//!
//! * tensors: `symtensor d n` header, then one line per nonzero canonical
//!   entry (indices then `p/q`), lexicographic;
//! * polynomials: one term per line, `p/q : e1 e2 ... en`;
//! * problems: JSON with rationals as `p/q` strings;
//! * program and dual exports: sectioned text files with a leading format
//!   tag.
//!
//! Serialization order is fully determined by the data, so identical inputs
//! produce identical bytes.

use serde::{Deserialize, Serialize};

use crate::builder::{CopositiveProgram, CpTensorProgram, DualScalar, MultiplierSlot};
use crate::error::{Error, Result};
use crate::oracle::CopositivityVerdict;
use crate::poly::Polynomial;
use crate::pop::{FeasibleSet, FiniteSet, PolyhedralSet, PopInstance, PopKind};
use crate::rat::{format_f64, format_rat, parse_rat, Rat};
use crate::tensor::{DenseMatrix, SymmetricTensor};

pub const PROGRAM_TAG: &str = "cptp-program v1";
pub const DUAL_TAG: &str = "cptp-dual v1";

// ---------------------------------------------------------------------------
// line cursor

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if !line.is_empty() {
                return Some((self.pos, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| {
            Error::parse_at(
                self.pos + 1,
                1,
                format!("expected {what}, found end of input"),
            )
        })
    }
}

// ---------------------------------------------------------------------------
// tensors

pub fn serialize_tensor(t: &SymmetricTensor) -> String {
    let mut out = format!("symtensor {} {}\n", t.order(), t.dim());
    for (key, value) in t.entries() {
        for index in key.indices() {
            out.push_str(&index.to_string());
            out.push(' ');
        }
        out.push_str(&format_rat(value));
        out.push('\n');
    }
    out
}

fn parse_tensor_block(cursor: &mut Lines) -> Result<SymmetricTensor> {
    let (line_no, header) = cursor.expect("tensor header")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "symtensor" {
        return Err(Error::parse_at(
            line_no,
            1,
            "expected `symtensor <order> <dim>`",
        ));
    }
    let order: usize = parts[1]
        .parse()
        .map_err(|_| Error::parse_at(line_no, 11, "bad tensor order"))?;
    let dim: usize = parts[2]
        .parse()
        .map_err(|_| Error::parse_at(line_no, 13, "bad tensor dimension"))?;
    let mut tensor = SymmetricTensor::zero(order, dim)
        .map_err(|e| Error::parse_at(line_no, 1, e.to_string()))?;
    while let Some((entry_line, line)) = cursor.next() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != order + 1 {
            // not an entry line; hand it back to the caller
            cursor.pos -= 1;
            break;
        }
        let mut indices = Vec::with_capacity(order);
        let mut is_entry = true;
        for token in &tokens[..order] {
            match token.parse::<usize>() {
                Ok(i) => indices.push(i),
                Err(_) => {
                    is_entry = false;
                    break;
                }
            }
        }
        if !is_entry {
            cursor.pos -= 1;
            break;
        }
        let value = parse_rat(tokens[order]).map_err(|_| {
            Error::parse_at(entry_line, 1, format!("bad rational {:?}", tokens[order]))
        })?;
        tensor
            .add_to_entry(indices, value)
            .map_err(|e| Error::parse_at(entry_line, 1, e.to_string()))?;
    }
    Ok(tensor)
}

pub fn parse_tensor(text: &str) -> Result<SymmetricTensor> {
    let mut cursor = Lines::new(text);
    let tensor = parse_tensor_block(&mut cursor)?;
    if let Some((line_no, line)) = cursor.next() {
        return Err(Error::parse_at(
            line_no,
            1,
            format!("unexpected trailing content {line:?}"),
        ));
    }
    Ok(tensor)
}

// ---------------------------------------------------------------------------
// polynomials

pub fn serialize_polynomial(p: &Polynomial) -> String {
    let mut out = String::new();
    for (exponents, coeff) in p.terms() {
        out.push_str(&format_rat(coeff));
        out.push_str(" :");
        for e in exponents {
            out.push(' ');
            out.push_str(&e.to_string());
        }
        out.push('\n');
    }
    out
}

/// Parses `p/q : e1 e2 ... en` lines. `nvars` disambiguates the empty
/// polynomial and is enforced when given.
pub fn parse_polynomial(text: &str, nvars: Option<usize>) -> Result<Polynomial> {
    let mut terms: Vec<(Vec<usize>, Rat)> = Vec::new();
    let mut seen_nvars = nvars;
    let mut cursor = Lines::new(text);
    while let Some((line_no, line)) = cursor.next() {
        let Some((coeff_text, exps_text)) = line.split_once(':') else {
            return Err(Error::parse_at(line_no, 1, "expected `coeff : exponents`"));
        };
        let coeff = parse_rat(coeff_text)
            .map_err(|_| Error::parse_at(line_no, 1, format!("bad rational {coeff_text:?}")))?;
        let exponents: Vec<usize> = exps_text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse_at(line_no, 1, format!("bad exponent {t:?}")))
            })
            .collect::<Result<_>>()?;
        match seen_nvars {
            None => seen_nvars = Some(exponents.len()),
            Some(n) if n != exponents.len() => {
                return Err(Error::parse_at(
                    line_no,
                    1,
                    format!("term has {} exponents, expected {n}", exponents.len()),
                ));
            }
            _ => {}
        }
        terms.push((exponents, coeff));
    }
    let nvars = seen_nvars
        .ok_or_else(|| Error::parse("cannot infer the variable count of an empty polynomial"))?;
    Polynomial::from_terms(nvars, terms)
}

// ---------------------------------------------------------------------------
// problems (JSON)

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    exps: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ConstraintsJson {
    Polyhedral {
        #[serde(rename = "B")]
        b_matrix: Vec<Vec<String>>,
        b: Vec<String>,
    },
    Finite {
        points: Vec<Vec<String>>,
    },
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    nvars: usize,
    kind: String,
    objective: Vec<TermJson>,
    constraints: ConstraintsJson,
}

pub fn parse_problem(text: &str) -> Result<PopInstance> {
    let wire: ProblemJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let kind = match wire.kind.as_str() {
        "homogeneous" => PopKind::Homogeneous,
        "inhomogeneous" => PopKind::Inhomogeneous,
        other => {
            return Err(Error::parse(format!(
                "kind must be `homogeneous` or `inhomogeneous`, got {other:?}"
            )))
        }
    };
    let mut objective = Polynomial::zero(wire.nvars);
    for term in &wire.objective {
        objective.add_term(term.exps.clone(), parse_rat(&term.coeff)?)?;
    }
    let feasible = match wire.constraints {
        ConstraintsJson::Polyhedral { b_matrix, b } => {
            let rows = b_matrix.len();
            let mut data = Vec::with_capacity(rows * wire.nvars);
            for row in &b_matrix {
                if row.len() != wire.nvars {
                    return Err(Error::parse(format!(
                        "B row has {} entries, expected {}",
                        row.len(),
                        wire.nvars
                    )));
                }
                for cell in row {
                    data.push(parse_rat(cell)?);
                }
            }
            let b_rhs = b.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
            FeasibleSet::Polyhedral(PolyhedralSet::new(
                DenseMatrix::new(rows, wire.nvars, data)?,
                b_rhs,
            )?)
        }
        ConstraintsJson::Finite { points } => {
            let parsed = points
                .iter()
                .map(|p| p.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            FeasibleSet::Finite(FiniteSet::new(parsed)?)
        }
    };
    PopInstance::new(objective, feasible, kind)
}

pub fn serialize_problem(p: &PopInstance) -> String {
    let objective: Vec<TermJson> = p
        .objective()
        .terms()
        .map(|(exps, coeff)| TermJson {
            coeff: format_rat(coeff),
            exps: exps.clone(),
        })
        .collect();
    let constraints = match p.feasible() {
        FeasibleSet::Polyhedral(set) => ConstraintsJson::Polyhedral {
            b_matrix: set
                .b_matrix()
                .row_iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect(),
            b: set.b_rhs().iter().map(format_rat).collect(),
        },
        FeasibleSet::Finite(set) => ConstraintsJson::Finite {
            points: set
                .points()
                .iter()
                .map(|p| p.iter().map(format_rat).collect())
                .collect(),
        },
    };
    let wire = ProblemJson {
        nvars: p.nvars(),
        kind: match p.kind() {
            PopKind::Homogeneous => "homogeneous".into(),
            PopKind::Inhomogeneous => "inhomogeneous".into(),
        },
        objective,
        constraints,
    };
    serde_json::to_string_pretty(&wire).expect("serializable") + "\n"
}

// ---------------------------------------------------------------------------
// matrices (text blocks)

fn write_matrix_block(out: &mut String, m: &DenseMatrix) {
    out.push_str(&format!("matrix {} {}\n", m.rows(), m.cols()));
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(format_rat).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
}

fn parse_matrix_block(cursor: &mut Lines) -> Result<DenseMatrix> {
    let (line_no, header) = cursor.expect("matrix header")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "matrix" {
        return Err(Error::parse_at(
            line_no,
            1,
            "expected `matrix <rows> <cols>`",
        ));
    }
    let rows: usize = parts[1]
        .parse()
        .map_err(|_| Error::parse_at(line_no, 8, "bad row count"))?;
    let cols: usize = parts[2]
        .parse()
        .map_err(|_| Error::parse_at(line_no, 10, "bad column count"))?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (row_line, line) = cursor.expect("matrix row")?;
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != cols {
            return Err(Error::parse_at(
                row_line,
                1,
                format!("row has {} entries, expected {cols}", cells.len()),
            ));
        }
        for cell in cells {
            data.push(
                parse_rat(cell)
                    .map_err(|_| Error::parse_at(row_line, 1, format!("bad rational {cell:?}")))?,
            );
        }
    }
    DenseMatrix::new(rows, cols, data)
}

// ---------------------------------------------------------------------------
// program exports

/// Builder parameters carried alongside an exported program so the dual can
/// be reconstructed without the original constraint data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramMeta {
    pub alpha: Vec<Rat>,
    pub coupling_count: usize,
}

pub fn serialize_program(prog: &CpTensorProgram, meta: &ProgramMeta) -> String {
    let mut out = String::new();
    out.push_str(PROGRAM_TAG);
    out.push('\n');
    out.push_str("meta\n");
    out.push_str(&format!("order {}\n", prog.order));
    out.push_str(&format!("base_dim {}\n", prog.base_dim));
    out.push_str(&format!(
        "kind {}\n",
        match prog.kind {
            PopKind::Homogeneous => "homogeneous",
            PopKind::Inhomogeneous => "inhomogeneous",
        }
    ));
    out.push_str(&format!("t {}\n", meta.coupling_count));
    let alpha: Vec<String> = meta.alpha.iter().map(format_rat).collect();
    out.push_str(&format!("alpha {}\n", alpha.join(" ")));
    out.push_str("end\n");

    out.push_str("objective\n");
    out.push_str(&serialize_tensor(&prog.objective));
    out.push_str("end\n");

    for (tensor, rhs) in &prog.eq_constraints {
        out.push_str("eq\n");
        out.push_str(&format!("rhs {}\n", format_rat(rhs)));
        out.push_str(&serialize_tensor(tensor));
        out.push_str("end\n");
    }
    for map in &prog.membership_maps {
        out.push_str("map\n");
        out.push_str(&format!("image_dim {}\n", map.rows()));
        write_matrix_block(&mut out, map);
        out.push_str("end\n");
    }
    out
}

fn expect_end(cursor: &mut Lines) -> Result<()> {
    let (line_no, line) = cursor.expect("`end`")?;
    if line != "end" {
        return Err(Error::parse_at(
            line_no,
            1,
            format!("expected `end`, got {line:?}"),
        ));
    }
    Ok(())
}

fn parse_meta_line<'a>(line: &'a str, key: &str, line_no: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .filter(|rest| rest.is_empty() || rest.starts_with([' ', '\t']))
        .map(str::trim)
        .ok_or_else(|| Error::parse_at(line_no, 1, format!("expected `{key} ...`, got {line:?}")))
}

pub fn parse_program(text: &str) -> Result<(CpTensorProgram, ProgramMeta)> {
    let mut cursor = Lines::new(text);
    let (line_no, tag) = cursor.expect("format tag")?;
    if tag != PROGRAM_TAG {
        return Err(Error::parse_at(
            line_no,
            1,
            format!("expected `{PROGRAM_TAG}`, got {tag:?}"),
        ));
    }

    let (line_no, section) = cursor.expect("`meta`")?;
    if section != "meta" {
        return Err(Error::parse_at(line_no, 1, "expected `meta` section first"));
    }
    let (n1, order_line) = cursor.expect("order")?;
    let order: usize = parse_meta_line(order_line, "order", n1)?
        .parse()
        .map_err(|_| Error::parse_at(n1, 7, "bad order"))?;
    let (n2, dim_line) = cursor.expect("base_dim")?;
    let base_dim: usize = parse_meta_line(dim_line, "base_dim", n2)?
        .parse()
        .map_err(|_| Error::parse_at(n2, 10, "bad base_dim"))?;
    let (n3, kind_line) = cursor.expect("kind")?;
    let kind = match parse_meta_line(kind_line, "kind", n3)? {
        "homogeneous" => PopKind::Homogeneous,
        "inhomogeneous" => PopKind::Inhomogeneous,
        other => return Err(Error::parse_at(n3, 6, format!("bad kind {other:?}"))),
    };
    let (n4, t_line) = cursor.expect("t")?;
    let coupling_count: usize = parse_meta_line(t_line, "t", n4)?
        .parse()
        .map_err(|_| Error::parse_at(n4, 3, "bad t"))?;
    let (n5, alpha_line) = cursor.expect("alpha")?;
    let alpha = parse_meta_line(alpha_line, "alpha", n5)?
        .split_whitespace()
        .map(parse_rat)
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::parse_at(n5, 7, "bad alpha vector"))?;
    expect_end(&mut cursor)?;

    let (line_no, section) = cursor.expect("`objective`")?;
    if section != "objective" {
        return Err(Error::parse_at(line_no, 1, "expected `objective` section"));
    }
    let objective = parse_tensor_block(&mut cursor)?;
    expect_end(&mut cursor)?;

    let mut eq_constraints = Vec::new();
    let mut membership_maps = Vec::new();
    while let Some((line_no, section)) = cursor.next() {
        match section {
            "eq" => {
                let (rhs_line, line) = cursor.expect("rhs")?;
                let rhs = parse_rat(parse_meta_line(line, "rhs", rhs_line)?)?;
                let tensor = parse_tensor_block(&mut cursor)?;
                expect_end(&mut cursor)?;
                eq_constraints.push((tensor, rhs));
            }
            "map" => {
                let (dim_line, line) = cursor.expect("image_dim")?;
                let image_dim: usize = parse_meta_line(line, "image_dim", dim_line)?
                    .parse()
                    .map_err(|_| Error::parse_at(dim_line, 11, "bad image_dim"))?;
                let map = parse_matrix_block(&mut cursor)?;
                if map.rows() != image_dim {
                    return Err(Error::parse_at(
                        dim_line,
                        1,
                        format!(
                            "image_dim {image_dim} does not match matrix rows {}",
                            map.rows()
                        ),
                    ));
                }
                expect_end(&mut cursor)?;
                membership_maps.push(map);
            }
            other => {
                return Err(Error::parse_at(
                    line_no,
                    1,
                    format!("unexpected section {other:?}"),
                ))
            }
        }
    }

    let prog = CpTensorProgram {
        order,
        base_dim,
        kind,
        objective,
        eq_constraints,
        membership_maps,
    };
    if prog.objective.order() != order || prog.objective.dim() != base_dim {
        return Err(Error::parse("objective tensor shape does not match meta"));
    }
    Ok((
        prog,
        ProgramMeta {
            alpha,
            coupling_count,
        },
    ))
}

// ---------------------------------------------------------------------------
// dual exports

pub fn serialize_dual(dual: &CopositiveProgram) -> String {
    let mut out = String::new();
    out.push_str(DUAL_TAG);
    out.push('\n');
    out.push_str("meta\n");
    out.push_str(&format!("order {}\n", dual.order));
    out.push_str(&format!("base_dim {}\n", dual.base_dim));
    out.push_str(&format!(
        "kind {}\n",
        match dual.kind {
            PopKind::Homogeneous => "homogeneous",
            PopKind::Inhomogeneous => "inhomogeneous",
        }
    ));
    let normalization: Vec<String> = dual.normalization.iter().map(format_rat).collect();
    out.push_str(&format!("normalization {}\n", normalization.join(" ")));
    out.push_str("end\n");

    out.push_str("base\n");
    out.push_str(&serialize_tensor(&dual.base));
    out.push_str("end\n");

    for scalar in &dual.scalars {
        out.push_str("scalar\n");
        out.push_str(&format!("name {}\n", scalar.name));
        out.push_str(&serialize_tensor(&scalar.coeff));
        out.push_str("end\n");
    }
    for slot in &dual.slots {
        out.push_str("slot\n");
        out.push_str(&format!("dim {}\n", slot.dim));
        write_matrix_block(&mut out, &slot.adjoint);
        out.push_str("end\n");
    }
    out
}

pub fn parse_dual(text: &str) -> Result<CopositiveProgram> {
    let mut cursor = Lines::new(text);
    let (line_no, tag) = cursor.expect("format tag")?;
    if tag != DUAL_TAG {
        return Err(Error::parse_at(
            line_no,
            1,
            format!("expected `{DUAL_TAG}`, got {tag:?}"),
        ));
    }
    let (line_no, section) = cursor.expect("`meta`")?;
    if section != "meta" {
        return Err(Error::parse_at(line_no, 1, "expected `meta` section first"));
    }
    let (n1, order_line) = cursor.expect("order")?;
    let order: usize = parse_meta_line(order_line, "order", n1)?
        .parse()
        .map_err(|_| Error::parse_at(n1, 7, "bad order"))?;
    let (n2, dim_line) = cursor.expect("base_dim")?;
    let base_dim: usize = parse_meta_line(dim_line, "base_dim", n2)?
        .parse()
        .map_err(|_| Error::parse_at(n2, 10, "bad base_dim"))?;
    let (n3, kind_line) = cursor.expect("kind")?;
    let kind = match parse_meta_line(kind_line, "kind", n3)? {
        "homogeneous" => PopKind::Homogeneous,
        "inhomogeneous" => PopKind::Inhomogeneous,
        other => return Err(Error::parse_at(n3, 6, format!("bad kind {other:?}"))),
    };
    let (n4, norm_line) = cursor.expect("normalization")?;
    let normalization = parse_meta_line(norm_line, "normalization", n4)?
        .split_whitespace()
        .map(parse_rat)
        .collect::<Result<Vec<_>>>()?;
    expect_end(&mut cursor)?;

    let (line_no, section) = cursor.expect("`base`")?;
    if section != "base" {
        return Err(Error::parse_at(line_no, 1, "expected `base` section"));
    }
    let base = parse_tensor_block(&mut cursor)?;
    expect_end(&mut cursor)?;

    let mut scalars = Vec::new();
    let mut slots = Vec::new();
    while let Some((line_no, section)) = cursor.next() {
        match section {
            "scalar" => {
                let (name_line, line) = cursor.expect("name")?;
                let name = parse_meta_line(line, "name", name_line)?.to_string();
                let coeff = parse_tensor_block(&mut cursor)?;
                expect_end(&mut cursor)?;
                scalars.push(DualScalar { name, coeff });
            }
            "slot" => {
                let (dim_line, line) = cursor.expect("dim")?;
                let dim: usize = parse_meta_line(line, "dim", dim_line)?
                    .parse()
                    .map_err(|_| Error::parse_at(dim_line, 5, "bad dim"))?;
                let adjoint = parse_matrix_block(&mut cursor)?;
                expect_end(&mut cursor)?;
                if adjoint.cols() != dim || adjoint.rows() != base_dim {
                    return Err(Error::parse_at(
                        dim_line,
                        1,
                        "adjoint matrix shape does not match slot",
                    ));
                }
                slots.push(MultiplierSlot { dim, adjoint });
            }
            other => {
                return Err(Error::parse_at(
                    line_no,
                    1,
                    format!("unexpected section {other:?}"),
                ))
            }
        }
    }
    Ok(CopositiveProgram {
        order,
        base_dim,
        kind,
        base,
        scalars,
        slots,
        normalization,
    })
}

// ---------------------------------------------------------------------------
// verdict reports (JSON)

pub fn verdict_to_json(verdict: &CopositivityVerdict) -> serde_json::Value {
    let mut object = serde_json::json!({
        "status": verdict.status.as_str(),
        "margin": format_f64(verdict.margin),
        "depth": verdict.depth,
        "tol": format_f64(verdict.tol),
        "evaluations": verdict.evaluations,
    });
    if let Some(witness) = &verdict.witness {
        object["witness"] = serde_json::json!(witness.iter().map(format_rat).collect::<Vec<_>>());
    }
    object
}

/// JSON value of a tensor, used inside reports.
pub fn tensor_to_json(t: &SymmetricTensor) -> serde_json::Value {
    serde_json::json!({
        "order": t.order(),
        "dim": t.dim(),
        "entries": t.entries().map(|(key, value)| {
            serde_json::json!({
                "idx": key.indices(),
                "value": format_rat(value),
            })
        }).collect::<Vec<_>>(),
    })
}
