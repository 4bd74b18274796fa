use super::{WaveletBasis, WaveletTransform};
use crate::data::ReturnSeries;
use crate::{Error, Result};

/// Reconstructs the mean-removed series from the real part of the
/// coefficients:
///
/// x(t) = dj·sqrt(dt) / (C_δ·ψ(0)) · Σ_j Re W(t, s_j) / sqrt(s_j)
///
/// The reconstruction is only meaningful for grids with dj ≤ 1/4 that span
/// the smallest to the largest resolvable scale.
pub fn inverse_cwt(transform: &WaveletTransform, basis: &WaveletBasis) -> Result<ReturnSeries> {
    let grid = transform.grid();
    if grid.dj() > 0.25 {
        return Err(Error::GridTooCoarse { dj: grid.dj() });
    }
    if basis.params() != transform.params() {
        return Err(Error::InvalidParams(format!(
            "basis omega0 {} does not match transform omega0 {}",
            basis.params().omega0(),
            transform.params().omega0()
        )));
    }
    let factor = grid.dj() * grid.dt().sqrt() / (basis.delta_constant() * basis.mother_at_zero());
    let inv_sqrt: Vec<f64> = grid.scales().iter().map(|s| 1.0 / s.sqrt()).collect();
    let c = transform.coefficients();
    let values = (0..c.rows())
        .map(|t| {
            let row = c.row(t);
            factor
                * row
                    .iter()
                    .zip(&inv_sqrt)
                    .map(|(w, k)| w.re * k)
                    .sum::<f64>()
        })
        .collect();
    ReturnSeries::new(
        values,
        transform.timestamps().to_vec(),
        transform.source_symbol(),
    )
}
