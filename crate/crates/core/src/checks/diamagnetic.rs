//! Diamagnetic domination checks: the zero-field semigroup dominates the
//! magnetic one componentwise, the same for resolvent powers, and the
//! partition function can only decrease when the field is switched on.

use super::CheckReport;
use crate::fields::FieldRealization;
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge, HermitianOperator};
use crate::seed::{stream, StreamTag};
use crate::spectral::{self, Spectrum};
use crate::Result;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

const BCS: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];

fn random_state(dim: usize, seed: u64, trial: u64) -> DVector<Complex64> {
    let mut rng = stream(seed, StreamTag::CheckInstance, trial);
    DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn abs_vector(v: &DVector<Complex64>) -> DVector<Complex64> {
    v.map(|z| Complex64::new(z.norm(), 0.0))
}

struct SpectraPair {
    magnetic: Spectrum,
    zero_field: Spectrum,
}

fn spectra_pair(
    grid: &GridSpec,
    bc: BoundaryCondition,
    gauge: &ConstantFieldGauge,
    potential: Option<&FieldRealization>,
) -> Result<SpectraPair> {
    let h_a = HermitianOperator::assemble(grid, bc, gauge, potential)?;
    let h_0 = HermitianOperator::assemble(grid, bc, &ConstantFieldGauge::zero(grid.dim()), potential)?;
    Ok(SpectraPair {
        magnetic: spectral::eigen_full(&h_a)?,
        zero_field: spectral::eigen_full(&h_0)?,
    })
}

/// |exp(-t H(A,v)) psi| <= exp(-t H(0,v)) |psi| componentwise, both boundary
/// conditions, for `trials` random complex states. The margin is the worst
/// componentwise violation relative to the comparison scale.
pub fn check_diamagnetic_semigroup(
    grid: &GridSpec,
    gauge: &ConstantFieldGauge,
    potential: Option<&FieldRealization>,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    for bc in BCS {
        let pair = spectra_pair(grid, bc, gauge, potential)?;
        for trial in 0..trials {
            let psi = random_state(grid.node_count(), seed, trial as u64);
            let lhs = spectral::semigroup_apply(&pair.magnetic, t, &psi)?;
            let rhs = spectral::semigroup_apply(&pair.zero_field, t, &abs_vector(&psi))?;
            let scale = rhs.iter().fold(1.0f64, |m, z| m.max(z.re.abs()));
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                worst = worst.max((l.norm() - r.re) / scale);
            }
        }
    }
    Ok(CheckReport::new(
        "diamagnetic-semigroup",
        json!({
            "grid": grid.shape()[..grid.dim()].to_vec(),
            "spacing": grid.spacing(),
            "t": t,
            "trials": trials,
            "seed": seed,
            "potential": potential.map(|p| p.model_tag().to_string()),
        }),
        worst,
        1e-10,
    ))
}

/// Tr exp(-beta H(A,v)) <= Tr exp(-beta H(0,v)), both boundary conditions;
/// margin relative to the zero-field trace.
pub fn check_diamagnetic_partition(
    grid: &GridSpec,
    gauge: &ConstantFieldGauge,
    potential: Option<&FieldRealization>,
    beta: f64,
) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    for bc in BCS {
        let pair = spectra_pair(grid, bc, gauge, potential)?;
        let lhs = spectral::heat_trace(&pair.magnetic, beta)?;
        let rhs = spectral::heat_trace(&pair.zero_field, beta)?;
        worst = worst.max((lhs - rhs) / rhs.max(1.0));
    }
    Ok(CheckReport::new(
        "diamagnetic-partition",
        json!({
            "grid": grid.shape()[..grid.dim()].to_vec(),
            "spacing": grid.spacing(),
            "beta": beta,
            "potential": potential.map(|p| p.model_tag().to_string()),
        }),
        worst,
        1e-10,
    ))
}

/// |(H(A,v) - z)^{-alpha} psi| <= (H(0,v) - Re z)^{-alpha} |psi|
/// componentwise for each requested power.
pub fn check_resolvent_power(
    grid: &GridSpec,
    gauge: &ConstantFieldGauge,
    potential: Option<&FieldRealization>,
    z: Complex64,
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let mut worst = f64::NEG_INFINITY;
    for bc in BCS {
        let pair = spectra_pair(grid, bc, gauge, potential)?;
        for &alpha in alphas {
            for trial in 0..trials {
                let psi = random_state(grid.node_count(), seed, trial as u64);
                let lhs = spectral::resolvent_power_apply(&pair.magnetic, z, alpha, &psi)?;
                let rhs = spectral::resolvent_power_apply(
                    &pair.zero_field,
                    Complex64::new(z.re, 0.0),
                    alpha,
                    &abs_vector(&psi),
                )?;
                let scale = rhs.iter().fold(1.0f64, |m, w| m.max(w.re.abs()));
                for (l, r) in lhs.iter().zip(rhs.iter()) {
                    worst = worst.max((l.norm() - r.re) / scale);
                }
            }
        }
    }
    Ok(CheckReport::new(
        "resolvent-power",
        json!({
            "grid": grid.shape()[..grid.dim()].to_vec(),
            "spacing": grid.spacing(),
            "z": [z.re, z.im],
            "alphas": alphas,
            "trials": trials,
            "seed": seed,
        }),
        worst,
        1e-9,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_alloy, AlloyModel, CouplingLaw};

    fn alloy_field(grid: &GridSpec, seed: u64) -> FieldRealization {
        let model =
            AlloyModel::indicator(2, 1.0, CouplingLaw::Uniform { support: (0.0, 1.0) }).unwrap();
        sample_alloy(&model, grid, seed).unwrap()
    }

    #[test]
    fn semigroup_domination_at_t_zero_is_equality() {
        let grid = GridSpec::cube(2, 4, 0.5).unwrap();
        let gauge = ConstantFieldGauge::perpendicular(1.0);
        let r = check_diamagnetic_semigroup(&grid, &gauge, None, 0.0, 4, 1).unwrap();
        // both sides equal |psi| exactly at t = 0
        assert!(r.pass);
        assert!(r.margin.abs() < 1e-14, "margin {}", r.margin);
    }

    #[test]
    fn semigroup_domination_without_field_is_equality_for_nonnegative_states() {
        // B = 0 and psi >= 0: the positivity-preserving semigroup gives
        // equality up to floating point
        let grid = GridSpec::cube(2, 4, 0.5).unwrap();
        let gauge = ConstantFieldGauge::zero(2);
        let field = alloy_field(&grid, 3);
        let h = HermitianOperator::assemble(&grid, BoundaryCondition::Neumann, &gauge, Some(&field))
            .unwrap();
        let spec = spectral::eigen_full(&h).unwrap();
        let psi = DVector::from_element(grid.node_count(), Complex64::new(1.0, 0.0));
        let result = spectral::semigroup_apply(&spec, 1.0, &psi).unwrap();
        let scale = result.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for z in result.iter() {
            assert!((z.norm() - z.re).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn semigroup_domination_on_disordered_magnetic_instance() {
        let grid = GridSpec::cube(2, 5, 1.0).unwrap();
        let gauge = ConstantFieldGauge::perpendicular(1.0);
        let field = alloy_field(&grid, 7);
        let r =
            check_diamagnetic_semigroup(&grid, &gauge, Some(&field), 1.0, 50, 7).unwrap();
        assert!(r.pass, "margin {}", r.margin);
        assert!(r.margin <= 1e-10);
    }

    #[test]
    fn partition_domination_and_field_sweep() {
        let grid = GridSpec::cube(2, 6, 1.0).unwrap();
        let r = check_diamagnetic_partition(
            &grid,
            &ConstantFieldGauge::perpendicular(2.0),
            None,
            1.0,
        )
        .unwrap();
        assert!(r.pass);
        assert!(r.margin < 0.0, "slack must be strictly positive for B > 0");

        // B = 0 gives equality
        let r0 = check_diamagnetic_partition(&grid, &ConstantFieldGauge::zero(2), None, 1.0).unwrap();
        assert!(r0.margin.abs() < 1e-12);

        // slack shrinks as the field is switched off
        let mut slacks = Vec::new();
        for b in [1.0, 0.1, 0.01] {
            let r = check_diamagnetic_partition(
                &grid,
                &ConstantFieldGauge::perpendicular(b),
                None,
                1.0,
            )
            .unwrap();
            slacks.push(-r.margin);
        }
        assert!(slacks[0] > slacks[1] && slacks[1] > slacks[2], "{slacks:?}");
    }

    #[test]
    fn resolvent_domination_cases() {
        // scalar case: no field effect possible, both sides 1/2
        let grid1 = GridSpec::cube(1, 1, 1.0).unwrap();
        let field = FieldRealization::from_values(grid1.clone(), vec![2.0], 0, "const").unwrap();
        // kinetic part of a single Neumann node is zero
        let h = HermitianOperator::assemble(
            &grid1,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::zero(1),
            Some(&field),
        )
        .unwrap();
        let spec = spectral::eigen_full(&h).unwrap();
        let psi = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let r = spectral::resolvent_power_apply(&spec, Complex64::new(0.0, 0.0), 1.0, &psi).unwrap();
        assert!((r[0].re - 0.5).abs() < 1e-15);

        // 2-D disordered magnetic instance, alpha in {1/2, 1, 2}
        let grid = GridSpec::cube(2, 5, 1.0).unwrap();
        let gauge = ConstantFieldGauge::perpendicular(1.0);
        let field = alloy_field(&grid, 11);
        let h0 = HermitianOperator::assemble(
            &grid,
            BoundaryCondition::Neumann,
            &ConstantFieldGauge::zero(2),
            Some(&field),
        )
        .unwrap();
        let min_eig = spectral::eigenvalues(&h0).unwrap().min_eigenvalue();
        let z = Complex64::new(min_eig - 1.0, 0.4);
        let r = check_resolvent_power(&grid, &gauge, Some(&field), z, &[0.5, 1.0, 2.0], 50, 11)
            .unwrap();
        assert!(r.pass, "margin {}", r.margin);
    }
}
