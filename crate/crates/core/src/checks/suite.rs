//! Named standard instances of every check, for the verification CLI. Each
//! entry aggregates its instances into one report carrying the worst margin.
//! All instances are seeded, so reports are byte-stable across runs and
//! worker counts.

use super::*;
use crate::estimators::{EnsembleSpec, FieldModel};
use crate::fields::{sample_alloy, sample_gaussian, AlloyModel, CouplingLaw, CovarianceModel};
use crate::grid::GridSpec;
use crate::operator::{BoundaryCondition, ConstantFieldGauge, HermitianOperator};
use crate::spectral::{self, EnergyInterval};
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteOptions {
    /// Reduced trial and realization counts.
    pub quick: bool,
    /// Replace every report's tolerance (forces failures when set to 0).
    pub tolerance_override: Option<f64>,
}

pub const CHECK_NAMES: [&str; 9] = [
    "diamagnetic-semigroup",
    "diamagnetic-partition",
    "resolvent-power",
    "bracketing",
    "decoupling",
    "spectral-averaging",
    "golden-thompson",
    "neumann-trace-bound",
    "wegner-mc",
];

/// Run one named check on its standard instances.
pub fn run_check(name: &str, opts: SuiteOptions) -> Result<CheckReport> {
    let mut report = match name {
        "diamagnetic-semigroup" => semigroup_standard(opts),
        "diamagnetic-partition" => partition_standard(),
        "resolvent-power" => resolvent_standard(opts),
        "bracketing" => bracketing_standard(opts),
        "decoupling" => decoupling_standard(),
        "spectral-averaging" => averaging_standard(opts),
        "golden-thompson" => golden_thompson_standard(opts),
        "neumann-trace-bound" => neumann_standard(),
        "wegner-mc" => wegner_mc_standard(opts).map(|o| o.report),
        other => Err(Error::Config(format!("unknown check '{other}'"))),
    }?;
    if let Some(tol) = opts.tolerance_override {
        report.tolerance = tol;
        report.pass = report.margin <= tol;
    }
    Ok(report)
}

/// Run every check in declaration order.
pub fn run_all(opts: SuiteOptions) -> Result<Vec<CheckReport>> {
    CHECK_NAMES.iter().map(|name| run_check(name, opts)).collect()
}

fn worst_of(name: &str, reports: Vec<CheckReport>) -> CheckReport {
    let worst = reports
        .iter()
        .max_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("at least one instance");
    CheckReport::new(
        name,
        serde_json::json!({
            "instances": reports.len(),
            "worst_instance": worst.instance,
        }),
        worst.margin,
        worst.tolerance,
    )
}

fn alloy_unit() -> AlloyModel {
    AlloyModel::indicator(2, 1.0, CouplingLaw::Uniform { support: (0.0, 1.0) })
        .expect("valid builtin model")
}

fn semigroup_standard(opts: SuiteOptions) -> Result<CheckReport> {
    let grid = GridSpec::cube(2, 5, 1.0)?;
    let gauge = ConstantFieldGauge::perpendicular(1.0);
    let field = sample_alloy(&alloy_unit(), &grid, 7)?;
    let trials = if opts.quick { 10 } else { 50 };
    check_diamagnetic_semigroup(&grid, &gauge, Some(&field), 1.0, trials, 7)
}

fn partition_standard() -> Result<CheckReport> {
    let grid = GridSpec::cube(2, 6, 1.0)?;
    let free = check_diamagnetic_partition(&grid, &ConstantFieldGauge::perpendicular(2.0), None, 1.0)?;
    let field = sample_alloy(&alloy_unit(), &grid, 5)?;
    let disordered = check_diamagnetic_partition(
        &grid,
        &ConstantFieldGauge::perpendicular(2.0),
        Some(&field),
        1.0,
    )?;
    Ok(worst_of("diamagnetic-partition", vec![free, disordered]))
}

fn resolvent_standard(opts: SuiteOptions) -> Result<CheckReport> {
    let grid = GridSpec::cube(2, 5, 1.0)?;
    let gauge = ConstantFieldGauge::perpendicular(1.0);
    let field = sample_alloy(&alloy_unit(), &grid, 11)?;
    let h0 = HermitianOperator::assemble(
        &grid,
        BoundaryCondition::Neumann,
        &ConstantFieldGauge::zero(2),
        Some(&field),
    )?;
    let min_eig = spectral::eigenvalues(&h0)?.min_eigenvalue();
    let trials = if opts.quick { 10 } else { 50 };
    check_resolvent_power(
        &grid,
        &gauge,
        Some(&field),
        Complex64::new(min_eig - 1.0, 0.3),
        &[0.5, 1.0, 2.0],
        trials,
        11,
    )
}

fn bracketing_standard(opts: SuiteOptions) -> Result<CheckReport> {
    let mut reports = Vec::new();
    // free reference split
    let grid = GridSpec::cube(1, 4, 1.0)?;
    reports.push(check_bracketing(&grid, 0, 2, &ConstantFieldGauge::zero(1), None)?);
    // disordered magnetic boxes over a seed sweep
    let sweeps = if opts.quick { 3 } else { 20 };
    let grid = GridSpec::cube(2, 6, 1.0)?;
    let model = CovarianceModel::gaussian(2, 0.25, 1.0)?;
    for seed in 0..sweeps {
        let field = sample_gaussian(&model, &grid, 3 + seed)?;
        reports.push(check_bracketing(
            &grid,
            (seed % 2) as usize,
            3,
            &ConstantFieldGauge::perpendicular(1.0),
            Some(&field),
        )?);
    }
    Ok(worst_of("bracketing", reports))
}

fn decoupling_standard() -> Result<CheckReport> {
    let grid = GridSpec::cube(2, 4, 0.5)?;
    let (l, r) = grid.bisect(0, 2)?;
    let model = CovarianceModel::gaussian(2, 1.0, 0.8)?;
    let field = sample_gaussian(&model, &grid, 17)?;
    let gauge = ConstantFieldGauge::perpendicular(0.7);
    let hl = HermitianOperator::assemble(
        &l.grid,
        BoundaryCondition::Neumann,
        &gauge,
        Some(&field.restrict(&l)),
    )?;
    let hr = HermitianOperator::assemble(
        &r.grid,
        BoundaryCondition::Neumann,
        &gauge,
        Some(&field.restrict(&r)),
    )?;
    check_decoupling(&hl, &hr)
}

fn averaging_standard(opts: SuiteOptions) -> Result<CheckReport> {
    let mut reports = vec![check_spectral_averaging(&SpectralAveragingInstance::scalar())?];
    let instances = if opts.quick { 5 } else { 20 };
    for seed in 0..instances {
        reports.push(check_spectral_averaging(&SpectralAveragingInstance::random(
            6, seed,
        ))?);
    }
    Ok(worst_of("spectral-averaging", reports))
}

fn golden_thompson_standard(opts: SuiteOptions) -> Result<CheckReport> {
    let spec = EnsembleSpec {
        model: FieldModel::Gaussian(CovarianceModel::gaussian(2, 0.25, 1.0)?),
        grid: GridSpec::cube(2, 5, 1.0)?,
        gauge: ConstantFieldGauge::perpendicular(1.0),
        bc: BoundaryCondition::Neumann,
        realizations: if opts.quick { 100 } else { 500 },
        base_seed: 12,
    };
    check_golden_thompson_avg(&spec, 1.0)
}

fn neumann_standard() -> Result<CheckReport> {
    let mut reports = Vec::new();
    for dim in 1..=3usize {
        for &l in &[1.0, 2.0] {
            for &beta in &[0.1, 1.0, 10.0] {
                reports.push(check_neumann_partition_bound(l, beta, dim)?);
            }
        }
    }
    Ok(worst_of("neumann-trace-bound", reports))
}

/// Standard dominance instance: 6x6 unit cells at h = 1/2, uniform alloy on
/// [0, 1], a ladder of ten intervals in [0, 3].
pub fn wegner_mc_standard(opts: SuiteOptions) -> Result<WegnerMcOutcome> {
    let spec = wegner_mc_ensemble(1.0, if opts.quick { 200 } else { 2000 });
    check_wegner_mc(&spec, &wegner_mc_ladder())
}

pub fn wegner_mc_ensemble(b: f64, realizations: usize) -> EnsembleSpec {
    EnsembleSpec {
        model: FieldModel::Alloy(alloy_unit()),
        grid: GridSpec::cube(2, 12, 0.5).expect("valid grid"),
        gauge: if b == 0.0 {
            ConstantFieldGauge::zero(2)
        } else {
            ConstantFieldGauge::perpendicular(b)
        },
        bc: BoundaryCondition::Neumann,
        realizations,
        base_seed: 1,
    }
}

pub fn wegner_mc_ladder() -> Vec<EnergyInterval> {
    (0..10)
        .map(|k| EnergyInterval::half_open(0.3 * k as f64, 0.3 * (k + 1) as f64).expect("ladder"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let opts = SuiteOptions {
            quick: true,
            tolerance_override: None,
        };
        for report in run_all(opts).unwrap() {
            assert!(report.pass, "{}: margin {}", report.name, report.margin);
        }
    }

    #[test]
    fn zero_tolerance_forces_failures() {
        let opts = SuiteOptions {
            quick: true,
            tolerance_override: Some(-1.0),
        };
        let report = run_check("decoupling", opts).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn unknown_check_is_a_config_error() {
        assert!(matches!(
            run_check("no-such-check", SuiteOptions::default()),
            Err(Error::Config(_))
        ));
    }
}
