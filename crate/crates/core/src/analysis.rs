//! Checkers for the tableau conditions behind the scheme: order of the limiting
//! moment scheme, first-order consistency of the SL stage recursion, and the
//! stage-three positivity constraints in z = beta dt / eps.

use serde::Serialize;

use crate::error::{invalid, Result, SldgError};
use crate::imex::{shu_osher_coeffs, ButcherPair, ShuOsherCoeffs, SINGULAR_TOL};

pub const CONDITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub b_star: Vec<f64>,
    pub b_2star: Vec<f64>,
    pub b_3star: Vec<f64>,
    /// Explicit abscissa of the last stage, reported next to C_s.
    pub c_explicit_last: f64,
    pub verdict: u8,
}

impl OrderReport {
    pub fn last(&self) -> [f64; 8] {
        let s = self.c.len() - 1;
        [
            self.c[s],
            self.d[s],
            self.b[s],
            self.g[s],
            self.h[s],
            self.b_star[s],
            self.b_2star[s],
            self.b_3star[s],
        ]
    }

    pub fn third_order_conditions(&self) -> bool {
        let [_, _, _, g, h, b1, b2, b3] = self.last();
        let sixth = 1.0 / 6.0;
        (g - sixth).abs() <= CONDITION_TOL
            && (h - sixth).abs() <= CONDITION_TOL
            && [b1, b2, b3].iter().all(|x| x.abs() <= CONDITION_TOL)
    }
}

pub fn limiting_order_coeffs(t: &ButcherPair) -> Result<OrderReport> {
    let s = t.stages();
    let at = &t.at;
    let ct = &t.ct;
    // Only the first stage may have a vanishing diagonal (CK structure).
    for j in 1..s {
        if at[j][j].abs() <= SINGULAR_TOL {
            return Err(SldgError::SingularTableau(format!(
                "implicit diagonal entry {} vanishes",
                j + 1
            )));
        }
    }
    let active = |j: usize| at[j][j].abs() > SINGULAR_TOL;
    let mut bt = vec![vec![0.0; s]; s];
    for k in 0..s {
        for j in 0..k {
            if !active(j) {
                continue;
            }
            let mut v = at[k][j] / at[j][j];
            for l in j + 1..k {
                v -= at[k][l] * bt[l][j] / at[l][l];
            }
            bt[k][j] = v;
        }
    }
    let mut r = OrderReport {
        c: ct.clone(),
        d: vec![0.0; s],
        b: vec![0.0; s],
        g: vec![0.0; s],
        h: vec![0.0; s],
        b_star: vec![0.0; s],
        b_2star: vec![0.0; s],
        b_3star: vec![0.0; s],
        c_explicit_last: t.c[s - 1],
        verdict: 0,
    };
    for k in 0..s {
        let js: Vec<usize> = (0..k).filter(|&j| active(j)).collect();
        let sum_b: f64 = js.iter().map(|&j| bt[k][j]).sum();
        let (mut d, mut b, mut g, mut h, mut b1, mut b2, mut b3) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for &j in &js {
            let w = bt[k][j];
            let dc = ct[k] - ct[j];
            d += w * (r.d[j] + dc * ct[j]);
            b += w * (r.b[j] + dc * dc);
            g += w * (r.g[j] + 0.5 * dc * dc * ct[j]);
            h += w * (r.h[j] + dc * r.d[j]);
            b1 += w * (r.b_star[j] + dc * r.b[j]);
            b2 += w * (r.b_2star[j] + dc * dc * ct[j]);
            b3 += w * (r.b_3star[j] + dc * dc * dc);
        }
        r.d[k] = d;
        r.b[k] = (1.0 - sum_b) * ct[k] * ct[k] + b;
        r.g[k] = g;
        r.h[k] = h;
        r.b_star[k] = b1;
        r.b_2star[k] = b2;
        r.b_3star[k] = (1.0 - sum_b) * ct[k].powi(3) + b3;
    }
    let [c, d, b, ..] = r.last();
    let first = (c - 1.0).abs() <= CONDITION_TOL;
    let second = first && (d - 0.5).abs() <= CONDITION_TOL && b.abs() <= CONDITION_TOL;
    let third = second && r.third_order_conditions();
    r.verdict = u8::from(first) + u8::from(second) + u8::from(third);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhReport {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub verdict: bool,
}

pub fn first_order_gh(t: &ButcherPair) -> Result<GhReport> {
    let class = t.classify();
    if !(class.is_type_ck && class.is_ars && class.is_gsa) {
        return invalid("first-order recursion needs a CK, ARS, GSA tableau");
    }
    let ShuOsherCoeffs::Ck(st) = shu_osher_coeffs(t)? else {
        return invalid("expected CK Shu-Osher coefficients");
    };
    let s = t.stages();
    let mut g = vec![0.0; s];
    let mut h = vec![0.0; s];
    for i in 1..s {
        let c = &st[i];
        g[i] = c.b.iter().enumerate().map(|(k, w)| w * g[k + 1]).sum::<f64>() + c.implicit;
        h[i] = c
            .b
            .iter()
            .zip(&c.d_vec)
            .enumerate()
            .map(|(k, (w, d))| w * h[k + 1] + d)
            .sum::<f64>()
            + c.d;
    }
    let verdict =
        (g[s - 1] - 1.0).abs() <= CONDITION_TOL && (h[s - 1] - 1.0).abs() <= CONDITION_TOL;
    Ok(GhReport { g, h, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub z_dependent: bool,
    /// Margin at z = 0 for z-dependent conditions, or the value checked.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub conditions: Vec<Condition>,
    /// Supremum of admissible z; infinite when unconditional.
    pub z_max: f64,
    pub violated: Vec<&'static str>,
    /// Only the first three stages are covered for longer tableaux.
    pub partial_coverage: bool,
}

impl PositivityReport {
    pub fn unconditional(&self) -> bool {
        self.z_max.is_infinite()
    }
}

struct PosCoeffs {
    a1: f64,
    a2: f64,
    ah21: f64,
    ath11: f64,
    ath21: f64,
    ath22: f64,
}

impl PosCoeffs {
    fn z_margins(&self, z: f64, s: usize) -> Vec<(&'static str, f64)> {
        if s < 3 {
            return Vec::new();
        }
        let q = z * self.ath21 / (1.0 + z * self.ath11);
        vec![
            ("1 - z*at21/(1 + z*at11) >= 0", 1.0 - q),
            ("a2 - z*at21*a1/(1 + z*at11) >= 0", self.a2 - q * self.a1),
            ("-ah21 + at21 - z*at21*at11/(1 + z*at11) >= 0", -self.ah21 + self.ath21 - q * self.ath11),
        ]
    }
}

pub const Z_CAP: f64 = 1e12;

/// Margins of the z-dependent conditions at a given z.
pub fn positivity_margins(t: &ButcherPair, z: f64) -> Result<Vec<(&'static str, f64)>> {
    let p = pos_coeffs(t)?;
    Ok(p.z_margins(z, t.stages()))
}

fn pos_coeffs(t: &ButcherPair) -> Result<PosCoeffs> {
    let class = t.classify();
    if !(class.is_type_ck && class.is_ars && class.is_gsa) {
        return invalid("positivity conditions need a CK, ARS, GSA tableau");
    }
    let get = |m: &Vec<Vec<f64>>, i: usize, j: usize| {
        if i < m.len() {
            m[i][j]
        } else {
            0.0
        }
    };
    Ok(PosCoeffs {
        a1: get(&t.a, 1, 0),
        a2: get(&t.a, 2, 0),
        ah21: get(&t.a, 2, 1),
        ath11: get(&t.at, 1, 1),
        ath21: get(&t.at, 2, 1),
        ath22: get(&t.at, 2, 2),
    })
}

pub fn positivity_zmax(t: &ButcherPair) -> Result<PositivityReport> {
    let p = pos_coeffs(t)?;
    let s = t.stages();
    let mut conditions = vec![
        Condition {
            name: "a1 >= 0",
            z_dependent: false,
            margin: p.a1,
            holds: p.a1 >= 0.0,
        },
        Condition {
            name: "at11 > 0",
            z_dependent: false,
            margin: p.ath11,
            holds: p.ath11 > 0.0,
        },
    ];
    if s >= 3 {
        conditions.push(Condition {
            name: "ah21 >= 0",
            z_dependent: false,
            margin: p.ah21,
            holds: p.ah21 >= 0.0,
        });
        conditions.push(Condition {
            name: "at22 > 0",
            z_dependent: false,
            margin: p.ath22,
            holds: p.ath22 > 0.0,
        });
    }
    for (name, m) in p.z_margins(0.0, s) {
        conditions.push(Condition {
            name,
            z_dependent: true,
            margin: m,
            holds: m >= 0.0,
        });
    }
    let violated_static: Vec<&'static str> = conditions
        .iter()
        .filter(|c| !c.z_dependent && !c.holds)
        .map(|c| c.name)
        .collect();
    let ok = |z: f64| p.z_margins(z, s).iter().all(|(_, m)| *m >= 0.0);
    let z_max = if !violated_static.is_empty() {
        0.0
    } else {
        // Log-spaced scan for the first failure, then bisection.
        let n = 1024;
        let mut lo = 0.0;
        let mut hi = None;
        for i in 0..n {
            let z = 10f64.powf(-12.0 + 24.0 * i as f64 / (n - 1) as f64);
            if ok(z) {
                lo = z;
            } else {
                hi = Some(z);
                break;
            }
        }
        match hi {
            None if ok(Z_CAP) => f64::INFINITY,
            None => Z_CAP,
            Some(mut hi) => {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if ok(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    };
    let mut violated = violated_static;
    if z_max == 0.0 {
        violated.extend(conditions.iter().filter(|c| c.z_dependent && !c.holds).map(|c| c.name));
    }
    Ok(PositivityReport {
        conditions,
        z_max,
        violated,
        partial_coverage: s > 3,
    })
}
