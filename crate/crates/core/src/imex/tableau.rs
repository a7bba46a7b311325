//! Double Butcher tableaux: builtins, validation, classification and a small
//! text format for user-supplied pairs.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SldgError};

/// Zero threshold for diagonal entries when testing invertibility.
pub const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButcherPair {
    pub name: String,
    /// Explicit matrix, strictly lower triangular.
    pub a: Vec<Vec<f64>>,
    /// Implicit matrix, lower triangular.
    pub at: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub bt: Vec<f64>,
    pub c: Vec<f64>,
    pub ct: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    FBEuler,
    DP2A242,
    ARS443,
}

impl FromStr for Builtin {
    type Err = SldgError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbeuler" => Ok(Builtin::FBEuler),
            "dp2a242" => Ok(Builtin::DP2A242),
            "ars443" => Ok(Builtin::ARS443),
            _ => invalid(format!("unknown tableau '{s}'")),
        }
    }
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::FBEuler => "FBEuler",
            Builtin::DP2A242 => "DP2A242",
            Builtin::ARS443 => "ARS443",
        }
    }

    pub fn all() -> [Builtin; 3] {
        [Builtin::FBEuler, Builtin::DP2A242, Builtin::ARS443]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableauClass {
    pub is_type_a: bool,
    pub is_type_ck: bool,
    pub is_ars: bool,
    pub is_gsa: bool,
}

impl ButcherPair {
    /// Validates shapes and triangularity and derives c, c~ as row sums.
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        at: Vec<Vec<f64>>,
        bt: Vec<f64>,
    ) -> Result<Self> {
        let s = a.len();
        if s == 0 {
            return invalid("tableau needs at least one stage");
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == s && m.iter().all(|r| r.len() == s);
        if !square(&a) || !square(&at) || b.len() != s || bt.len() != s {
            return invalid(format!("tableau shapes inconsistent with {s} stages"));
        }
        let finite = |m: &Vec<Vec<f64>>| m.iter().flatten().all(|x| x.is_finite());
        if !finite(&a) || !finite(&at) || !b.iter().chain(&bt).all(|x| x.is_finite()) {
            return invalid("tableau entries must be finite");
        }
        for i in 0..s {
            for j in i..s {
                if a[i][j] != 0.0 {
                    return invalid(format!(
                        "explicit matrix must be strictly lower triangular (entry {},{})",
                        i + 1,
                        j + 1
                    ));
                }
                if j > i && at[i][j] != 0.0 {
                    return invalid(format!(
                        "implicit matrix must be lower triangular (entry {},{})",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
        let c = a.iter().map(|r| r.iter().sum()).collect();
        let ct = at.iter().map(|r| r.iter().sum()).collect();
        Ok(ButcherPair {
            name: name.into(),
            a,
            at,
            b,
            bt,
            c,
            ct,
        })
    }

    pub fn builtin(which: Builtin) -> Self {
        let (a, at): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match which {
            Builtin::FBEuler => (
                vec![vec![0.0, 0.0], vec![1.0, 0.0]],
                vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            ),
            Builtin::DP2A242 => (
                vec![
                    vec![0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0],
                    vec![0.0, 0.5, 0.5, 0.0],
                ],
                vec![
                    vec![2.0, 0.0, 0.0, 0.0],
                    vec![-2.0, 2.0, 0.0, 0.0],
                    vec![0.0, -1.0, 2.0, 0.0],
                    vec![0.0, 0.5, -1.5, 2.0],
                ],
            ),
            Builtin::ARS443 => (
                vec![
                    vec![0.0; 5],
                    vec![0.5, 0.0, 0.0, 0.0, 0.0],
                    vec![11.0 / 18.0, 1.0 / 18.0, 0.0, 0.0, 0.0],
                    vec![5.0 / 6.0, -5.0 / 6.0, 0.5, 0.0, 0.0],
                    vec![0.25, 1.75, 0.75, -1.75, 0.0],
                ],
                vec![
                    vec![0.0; 5],
                    vec![0.0, 0.5, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0 / 6.0, 0.5, 0.0, 0.0],
                    vec![0.0, -0.5, 0.5, 0.5, 0.0],
                    vec![0.0, 1.5, -1.5, 0.5, 0.5],
                ],
            ),
        };
        // All builtins are GSA: the weights are the last rows.
        let b = a.last().cloned().unwrap_or_default();
        let bt = at.last().cloned().unwrap_or_default();
        ButcherPair::new(which.name(), a, b, at, bt).expect("builtin tableaux are well formed")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::builtin(name.parse()?))
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn classify(&self) -> TableauClass {
        let s = self.stages();
        let diag_nonzero = |from: usize| (from..s).all(|i| self.at[i][i].abs() > SINGULAR_TOL);
        let is_type_a = diag_nonzero(0);
        let first_row_zero = self.at[0].iter().all(|&x| x == 0.0);
        let is_type_ck = !is_type_a && s >= 2 && first_row_zero && diag_nonzero(1);
        let is_ars =
            is_type_ck && (1..s).all(|i| self.at[i][0] == 0.0) && self.bt[0] == 0.0;
        let is_gsa = self.a[s - 1] == self.b && self.at[s - 1] == self.bt;
        TableauClass {
            is_type_a,
            is_type_ck,
            is_ars,
            is_gsa,
        }
    }

    /// Parses the text format documented in the README.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Block {
            None,
            Explicit,
            Implicit,
        }
        let err = |line: usize, message: String| SldgError::Parse { line, message };
        let numbers = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| parse_number(t).ok_or_else(|| err(line, format!("bad number '{t}'"))))
                .collect()
        };
        let mut name = String::from("custom");
        let (mut a, mut at) = (Vec::new(), Vec::new());
        let (mut b, mut bt, mut c, mut ct) = (None, None, None, None);
        let mut block = Block::None;
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            if let Some((key, rest)) = l.split_once(':') {
                let rest = rest.trim();
                block = Block::None;
                match key.trim() {
                    "name" => name = rest.to_string(),
                    "explicit" | "implicit" => {
                        if !rest.is_empty() {
                            return Err(err(line, "matrix rows start on the next line".into()));
                        }
                        block = if key.trim() == "explicit" {
                            Block::Explicit
                        } else {
                            Block::Implicit
                        };
                    }
                    "explicit_b" => b = Some((line, numbers(line, rest)?)),
                    "implicit_b" => bt = Some((line, numbers(line, rest)?)),
                    "explicit_c" => c = Some((line, numbers(line, rest)?)),
                    "implicit_c" => ct = Some((line, numbers(line, rest)?)),
                    k => return Err(err(line, format!("unknown key '{k}'"))),
                }
                continue;
            }
            let row = numbers(line, l)?;
            match block {
                Block::Explicit => a.push((line, row)),
                Block::Implicit => at.push((line, row)),
                Block::None => return Err(err(line, "matrix row outside a matrix block".into())),
            }
        }
        let s = a.len();
        if s == 0 {
            return Err(err(last_line, "missing explicit matrix".into()));
        }
        if at.len() != s {
            return Err(err(last_line, format!("implicit matrix has {} rows, expected {s}", at.len())));
        }
        for (line, r) in a.iter().chain(&at) {
            if r.len() != s {
                return Err(err(*line, format!("row has {} entries, expected {s}", r.len())));
            }
        }
        let vec_or = |v: Option<(usize, Vec<f64>)>, what: &str| -> Result<Vec<f64>> {
            match v {
                Some((line, x)) if x.len() != s => {
                    Err(err(line, format!("{what} has {} entries, expected {s}", x.len())))
                }
                Some((_, x)) => Ok(x),
                None => Err(err(last_line, format!("missing {what}"))),
            }
        };
        let b = vec_or(b, "explicit_b")?;
        let bt = vec_or(bt, "implicit_b")?;
        let t = ButcherPair::new(
            name,
            a.into_iter().map(|x| x.1).collect(),
            b,
            at.into_iter().map(|x| x.1).collect(),
            bt,
        )
        .map_err(|e| err(last_line, e.to_string()))?;
        for (given, derived, what) in [(c, &t.c, "explicit_c"), (ct, &t.ct, "implicit_c")] {
            if let Some((line, g)) = given {
                if g.len() != s || g.iter().zip(derived).any(|(x, y)| (x - y).abs() > 1e-14) {
                    return Err(err(line, format!("{what} does not match the row sums")));
                }
            }
        }
        Ok(t)
    }
}

/// Decimal or `p/q` rational.
fn parse_number(t: &str) -> Option<f64> {
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.parse().ok()?;
        let q: f64 = q.parse().ok()?;
        if q == 0.0 {
            return None;
        }
        Some(p / q)
    } else {
        t.parse().ok()
    }
}

/// Leading `n`x`n` block of a square matrix.
pub(crate) fn leading(m: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    m[..n].iter().map(|r| r[..n].to_vec()).collect()
}

/// Row vector times the inverse of a lower triangular matrix: solves x L = r.
pub(crate) fn solve_row_lower(r: &[f64], l: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = r.len();
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let d = l[j][j];
        if d.abs() <= SINGULAR_TOL {
            return Err(SldgError::SingularTableau(format!(
                "zero diagonal entry {} in a block that must be inverted",
                j + 1
            )));
        }
        let s: f64 = (j + 1..n).map(|k| x[k] * l[k][j]).sum();
        x[j] = (r[j] - s) / d;
    }
    Ok(x)
}
