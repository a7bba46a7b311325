//! Shu-Osher coefficients of the IMEX scheme. Stage indices are 0-based here;
//! "hatted" quantities drop the first stage (CK tableaux).

use serde::Serialize;

use super::tableau::{leading, solve_row_lower, ButcherPair};
use crate::error::{invalid, Result};

/// One stage of a CK tableau, stage `i >= 1`:
///
/// f^(i) = (1 - sum B) S_{i,0} f^n + sum_k B_k S_{i,k+1} f^(k+1)
///       + dt sum_k D_k S_{i,k+1}[G_P(f^(k+1))/eps] + dt d S_{i,0}[G_P(f^n)/eps]
///       + dt e S_{i,0}[Q_P(f^n)/eps] + (dt/eps) implicit Q_P(f^(i)).
///
/// `e` vanishes for ARS tableaux.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkStage {
    pub b: Vec<f64>,
    pub d_vec: Vec<f64>,
    pub d: f64,
    pub e: f64,
    pub implicit: f64,
}

/// One stage of a type-A tableau:
///
/// f^(i) = (1 - sum B) S~_{i,0} f^n + sum_j B_j S~_{i,j} f^(j) + dt E^i
///       + (dt/eps) a~_ii Q_P(f^(i)),
/// E^i = sum_j a_ij S_{i,j}[G_P(f^(j))/eps] - sum_j (a~_ij / a~_jj) S~_{i,j}[E^j].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AStage {
    pub b: Vec<f64>,
    pub e_coef: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ShuOsherCoeffs {
    Ck(Vec<CkStage>),
    TypeA(Vec<AStage>),
}

impl ShuOsherCoeffs {
    /// Weights of the earlier stage values in the moments update of stage
    /// `i`, as (stage index, weight) pairs, plus the weight of S_{i,0} f^n.
    pub fn moment_weights(&self, i: usize) -> (f64, Vec<(usize, f64)>) {
        let pairs: Vec<(usize, f64)> = match self {
            ShuOsherCoeffs::Ck(st) => {
                if i == 0 {
                    Vec::new()
                } else {
                    st[i].b.iter().enumerate().map(|(k, &w)| (k + 1, w)).collect()
                }
            }
            ShuOsherCoeffs::TypeA(st) => st[i].b.iter().copied().enumerate().collect(),
        };
        let pre = 1.0 - pairs.iter().map(|p| p.1).sum::<f64>();
        (pre, pairs)
    }
}

pub fn shu_osher_coeffs(t: &ButcherPair) -> Result<ShuOsherCoeffs> {
    let class = t.classify();
    let s = t.stages();
    if class.is_type_a {
        let mut stages = Vec::with_capacity(s);
        for i in 0..s {
            let b = solve_row_lower(&t.at[i][..i], &leading(&t.at, i))?;
            let e_coef = (0..i).map(|j| t.at[i][j] / t.at[j][j]).collect();
            stages.push(AStage { b, e_coef });
        }
        return Ok(ShuOsherCoeffs::TypeA(stages));
    }
    if !class.is_type_ck {
        return invalid(format!(
            "tableau '{}' is neither type A nor type CK",
            t.name
        ));
    }
    // Hatted blocks: drop the first row and column.
    let ah: Vec<Vec<f64>> = t.a[1..].iter().map(|r| r[1..].to_vec()).collect();
    let ath: Vec<Vec<f64>> = t.at[1..].iter().map(|r| r[1..].to_vec()).collect();
    let a_col: Vec<f64> = t.a[1..].iter().map(|r| r[0]).collect();
    let at_col: Vec<f64> = t.at[1..].iter().map(|r| r[0]).collect();
    let mut stages = vec![CkStage {
        b: vec![],
        d_vec: vec![],
        d: 0.0,
        e: 0.0,
        implicit: 0.0,
    }];
    for i in 1..s {
        let r = i - 1; // hatted row
        let b = solve_row_lower(&ath[r][..r], &leading(&ath, r))?;
        let d_vec = (0..r)
            .map(|k| ah[r][k] - (0..r).map(|m| b[m] * ah[m][k]).sum::<f64>())
            .collect();
        let d = a_col[r] - (0..r).map(|m| b[m] * a_col[m]).sum::<f64>();
        let e = at_col[r] - (0..r).map(|m| b[m] * at_col[m]).sum::<f64>();
        stages.push(CkStage {
            b,
            d_vec,
            d,
            e,
            implicit: ath[r][r],
        });
    }
    Ok(ShuOsherCoeffs::Ck(stages))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imex::tableau::Builtin;

    #[test]
    fn fbeuler_stage_two() {
        let ShuOsherCoeffs::Ck(st) = shu_osher_coeffs(&ButcherPair::builtin(Builtin::FBEuler)).unwrap()
        else {
            panic!("FBEuler is CK")
        };
        assert!(st[1].b.is_empty() && st[1].d_vec.is_empty());
        assert_eq!((st[1].d, st[1].e, st[1].implicit), (1.0, 0.0, 1.0));
    }

    #[test]
    fn ars443_stage_three_weight() {
        let ShuOsherCoeffs::Ck(st) = shu_osher_coeffs(&ButcherPair::builtin(Builtin::ARS443)).unwrap()
        else {
            panic!("ARS443 is CK")
        };
        assert_eq!(st[2].b.len(), 1);
        assert!((st[2].b[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dp2a242_is_type_a() {
        let c = shu_osher_coeffs(&ButcherPair::builtin(Builtin::DP2A242)).unwrap();
        let ShuOsherCoeffs::TypeA(st) = c else {
            panic!("DP2A242 is type A")
        };
        // Stage 2: -2/2 on stage 1.
        assert!((st[1].b[0] + 1.0).abs() < 1e-15);
        assert_eq!(st[0].b.len(), 0);
    }
}
