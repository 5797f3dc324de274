//! Dirichlet-Neumann bracketing and decoupling at the eigenvalue level:
//! inserting a Neumann interface lowers every eigenvalue, a Dirichlet
//! interface raises it, and a direct sum carries exactly the merged spectrum.

use super::CheckReport;
use crate::fields::FieldRealization;
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge, HermitianOperator};
use crate::spectral;
use crate::Result;
use serde_json::json;

/// Eigenvalue chain lambda_k(N, split) <= lambda_k(N) <= lambda_k(D)
/// <= lambda_k(D, split) for every k, where the split operator is the
/// decoupled direct sum across the interface.
pub fn check_bracketing(
    grid: &GridSpec,
    axis: usize,
    cells_left: usize,
    gauge: &ConstantFieldGauge,
    potential: Option<&FieldRealization>,
) -> Result<CheckReport> {
    let (left, right) = grid.bisect(axis, cells_left)?;
    let pot_left = potential.map(|p| p.restrict(&left));
    let pot_right = potential.map(|p| p.restrict(&right));

    let spectrum_of = |bc: BoundaryCondition, split: bool| -> Result<Vec<f64>> {
        if split {
            let hl = HermitianOperator::assemble(&left.grid, bc, gauge, pot_left.as_ref())?;
            let hr = HermitianOperator::assemble(&right.grid, bc, gauge, pot_right.as_ref())?;
            let sum = HermitianOperator::decouple(&hl, &hr)?;
            Ok(spectral::eigenvalues(&sum)?.eigenvalues().to_vec())
        } else {
            let h = HermitianOperator::assemble(grid, bc, gauge, potential)?;
            Ok(spectral::eigenvalues(&h)?.eigenvalues().to_vec())
        }
    };

    let n_split = spectrum_of(BoundaryCondition::Neumann, true)?;
    let n_full = spectrum_of(BoundaryCondition::Neumann, false)?;
    let d_full = spectrum_of(BoundaryCondition::Dirichlet, false)?;
    let d_split = spectrum_of(BoundaryCondition::Dirichlet, true)?;

    let mut worst = f64::NEG_INFINITY;
    for k in 0..n_full.len() {
        worst = worst.max(n_split[k] - n_full[k]);
        worst = worst.max(n_full[k] - d_full[k]);
        worst = worst.max(d_full[k] - d_split[k]);
    }
    Ok(CheckReport::new(
        "bracketing",
        json!({
            "grid": grid.shape()[..grid.dim()].to_vec(),
            "spacing": grid.spacing(),
            "axis": axis,
            "cells_left": cells_left,
            "potential": potential.map(|p| p.model_tag().to_string()),
            "seed": potential.map(|p| p.seed()),
        }),
        worst,
        1e-10,
    ))
}

/// Spectrum of a direct sum equals the sorted merge of the parts' spectra.
pub fn check_decoupling(a: &HermitianOperator, b: &HermitianOperator) -> Result<CheckReport> {
    let sum = HermitianOperator::decouple(a, b)?;
    let mut merged: Vec<f64> = spectral::eigenvalues(a)?
        .eigenvalues()
        .iter()
        .chain(spectral::eigenvalues(b)?.eigenvalues())
        .copied()
        .collect();
    merged.sort_by(f64::total_cmp);
    let joint = spectral::eigenvalues(&sum)?;
    let worst = joint
        .eigenvalues()
        .iter()
        .zip(&merged)
        .map(|(x, y)| (x - y).abs())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckReport::new(
        "decoupling",
        json!({
            "dim_a": a.dim(),
            "dim_b": b.dim(),
        }),
        worst,
        1e-10,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_gaussian, CovarianceModel};
    use crate::operator::BoundaryCondition;

    #[test]
    fn free_chain_on_four_node_path() {
        // n = 4, h = 1, split 2 + 2: all four spectra are known in closed
        // form, and the chain holds with equality margins visible by hand:
        // N-split {0, 0, 1, 1}, N {0, 1 - 1/sqrt(2), 1, 1 + 1/sqrt(2)},
        // D {1 - 1/sqrt(2), 1, 1 + 1/sqrt(2), 2}, D-split {1, 1, 2, 2}.
        let grid = GridSpec::cube(1, 4, 1.0).unwrap();
        let r = check_bracketing(&grid, 0, 2, &ConstantFieldGauge::zero(1), None).unwrap();
        assert!(r.pass);
        assert!(r.margin <= 1e-12, "margin {}", r.margin);
    }

    #[test]
    fn neumann_ground_state_below_dirichlet() {
        let grid = GridSpec::cube(2, 4, 0.5).unwrap();
        let g = ConstantFieldGauge::zero(2);
        let n = HermitianOperator::assemble(&grid, BoundaryCondition::Neumann, &g, None).unwrap();
        let d = HermitianOperator::assemble(&grid, BoundaryCondition::Dirichlet, &g, None).unwrap();
        let ln = spectral::eigenvalues(&n).unwrap().min_eigenvalue();
        let ld = spectral::eigenvalues(&d).unwrap().min_eigenvalue();
        assert!(ln.abs() < 1e-12);
        assert!(ld > 0.0);
    }

    #[test]
    fn chain_on_disordered_magnetic_box() {
        let grid = GridSpec::cube(2, 6, 1.0).unwrap();
        let model = CovarianceModel::gaussian(2, 0.25, 1.0).unwrap();
        let field = sample_gaussian(&model, &grid, 3).unwrap();
        let r = check_bracketing(
            &grid,
            0,
            3,
            &ConstantFieldGauge::perpendicular(1.0),
            Some(&field),
        )
        .unwrap();
        assert!(r.pass, "margin {}", r.margin);
    }

    #[test]
    fn decoupling_trivial_and_random_instances() {
        // one-node blocks: spectrum {a, b}
        let a = HermitianOperator::diagonal(vec![3.0], BoundaryCondition::Neumann);
        let b = HermitianOperator::diagonal(vec![-1.0], BoundaryCondition::Neumann);
        let r = check_decoupling(&a, &b).unwrap();
        assert!(r.pass && r.margin.abs() < 1e-15);

        // free Neumann blocks: zero is doubly degenerate in the sum
        let grid = GridSpec::cube(1, 4, 1.0).unwrap();
        let (l, rr) = grid.bisect(0, 2).unwrap();
        let g = ConstantFieldGauge::zero(1);
        let hl = HermitianOperator::assemble(&l.grid, BoundaryCondition::Neumann, &g, None).unwrap();
        let hr = HermitianOperator::assemble(&rr.grid, BoundaryCondition::Neumann, &g, None).unwrap();
        let sum = HermitianOperator::decouple(&hl, &hr).unwrap();
        let ev = spectral::eigenvalues(&sum).unwrap();
        assert!(ev.eigenvalues()[0].abs() < 1e-12);
        assert!(ev.eigenvalues()[1].abs() < 1e-12);

        // random blocks against separately computed spectra
        let grid = GridSpec::cube(2, 4, 0.5).unwrap();
        let (l, rr) = grid.bisect(1, 2).unwrap();
        let model = CovarianceModel::gaussian(2, 1.0, 0.8).unwrap();
        let field = sample_gaussian(&model, &grid, 17).unwrap();
        let gauge = ConstantFieldGauge::perpendicular(0.7);
        let hl = HermitianOperator::assemble(
            &l.grid,
            BoundaryCondition::Dirichlet,
            &gauge,
            Some(&field.restrict(&l)),
        )
        .unwrap();
        let hr = HermitianOperator::assemble(
            &rr.grid,
            BoundaryCondition::Dirichlet,
            &gauge,
            Some(&field.restrict(&rr)),
        )
        .unwrap();
        let r = check_decoupling(&hl, &hr).unwrap();
        assert!(r.pass, "margin {}", r.margin);
    }
}
