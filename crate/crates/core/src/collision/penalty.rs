//! BGK penalization: Q_P = beta (M - f), G_P = Q - Q_P.

use rayon::prelude::*;

use crate::error::{Result, SldgError};
use crate::velocity::{maxwellian_slice, DistributionField, MacroField, PhaseSpace};

/// Per-node penalty parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyField {
    pub beta: Vec<f64>,
}

/// For the constant kernel the loss frequency is rho everywhere, so beta = rho.
pub fn penalty_beta(u: &MacroField) -> Result<PenaltyField> {
    u.check_admissible()?;
    Ok(PenaltyField {
        beta: u.values.iter().map(|c| c.rho).collect(),
    })
}

pub fn q_p(
    f: &DistributionField,
    u: &MacroField,
    beta: &PenaltyField,
    space: &PhaseSpace,
) -> Result<DistributionField> {
    f.check_space(space)?;
    if u.len() != f.n_nodes() || beta.beta.len() != f.n_nodes() {
        return Err(SldgError::ShapeMismatch(
            "moments/penalty do not match the distribution".into(),
        ));
    }
    u.check_admissible()?;
    let mut out = DistributionField::zeros(space);
    let nv2 = space.grid.size();
    out.data_mut()
        .par_chunks_mut(nv2)
        .zip(f.data().par_chunks(nv2))
        .enumerate()
        .try_for_each(|(n, (o, fv))| {
            maxwellian_slice(&u.values[n], &space.grid, o)?;
            let b = beta.beta[n];
            o.iter_mut().zip(fv).for_each(|(m, f)| *m = b * (*m - f));
            Ok(())
        })?;
    Ok(out)
}

pub fn g_p(q: &DistributionField, qp: &DistributionField) -> Result<DistributionField> {
    q.check_same(qp)?;
    let mut g = q.clone();
    g.axpy(-1.0, qp);
    Ok(g)
}
