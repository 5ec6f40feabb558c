use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use twistlab_core::asymptotics::{
    approx_var_zprime, fit_scaling, scaling_sweep, Prefactors, ScalingFit, APPROX_MINIMUM_PREFACTORS,
    ASYMPTOTIC_PREFACTORS, IDEAL_ZETA_MIN_EXPONENT, IDEAL_ZETA_MIN_PREFACTOR,
};
use twistlab_core::feasibility::{analyze, required_pulse, FeasibilityReport, OpticalSetup, PulsePlan};
use twistlab_core::observables::max_relative_deviation;
use twistlab_core::oracle::{coherent_branch_evolve, convergence_study, fock_evolve, is_monotone, FockStatus};
use twistlab_core::spin::DEFAULT_MAX_DIM;
use twistlab_core::{
    closed_form_report, evolve_train, matrix_report, qpd, PulseTrain, QpdGridSpec, QpdNormalization, SpinDensityMatrix,
    SpinMagnitude, SqueezingReport, TwistParameters,
};

use crate::config::{
    parse_grid, EvolveConfig, FeasibilityConfig, Normalization, QpdConfig, Range, Spacing, SweepMuConfig, SweepSConfig,
    VerifyOracleConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_json, Cell, Provenance};

pub const QPD_HEADER: [&str; 3] = ["theta", "phi", "q_normalized"];
pub const SWEEP_MU_HEADER: [&str; 7] = [
    "mu",
    "var_zprime_norm",
    "var_yprime_norm",
    "approx_var_zprime_norm",
    "mean_x",
    "zeta",
    "delta",
];
pub const SWEEP_S_HEADER: [&str; 7] = [
    "spin",
    "mu_half_exact",
    "mu_min_exact",
    "mu_half_approx",
    "mu_min_approx",
    "zeta_min_exact",
    "zeta_min_approx",
];
pub const ORACLE_HEADER: [&str; 3] = ["case_id", "max_abs_deviation", "leakage"];
pub const MATRIX_HEADER: [&str; 4] = ["two_m", "two_m_prime", "re", "im"];

/// Tolerances checked by `verify-oracle`.
pub const FOCK_TOLERANCE: f64 = 1e-6;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

fn pulse(mu: f64, mu_prime: Option<f64>) -> CliResult<TwistParameters> {
    Ok(match mu_prime {
        Some(mp) => TwistParameters::from_mu(mu, mp)?,
        None => TwistParameters::symmetric(mu)?,
    })
}

fn note(path: &Path, rows: usize) {
    eprintln!("wrote {rows} rows to {}", path.display());
}

fn require_finite(report: &SqueezingReport) -> CliResult<()> {
    if let Some((name, v)) = report.fields().iter().find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Numeric(format!("{name} is {v}")));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    Matrix,
    ClosedForm,
}

#[derive(Serialize)]
struct EvolveOutput {
    method: Method,
    report: SqueezingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<SqueezingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_relative_deviation: Option<f64>,
}

pub fn evolve(cfg: &EvolveConfig) -> CliResult<()> {
    let spin = SpinMagnitude::from_f64(cfg.spin)?;
    let train = PulseTrain::repeated(pulse(cfg.mu, cfg.mu_prime)?, cfg.pulses)?;
    let total = train.total();
    let closed = closed_form_report(spin, &total).ok();

    let output = if spin.dim() <= DEFAULT_MAX_DIM {
        let initial = SpinDensityMatrix::x_polarized(spin)?;
        let rho = evolve_train(&initial, &train);
        rho.check_invariants()?;
        if rho.diagonal() != initial.diagonal() {
            return Err(CliError::Numeric("populations changed during evolution".into()));
        }
        if let Some(path) = &cfg.matrix_output {
            let prov = Provenance::new("evolve", cfg)?;
            let n = spin.dim();
            let rows = (0..n * n).map(|k| {
                let z = rho.elements()[k];
                vec![
                    Cell::Int(spin.two_m_at(k / n)),
                    Cell::Int(spin.two_m_at(k % n)),
                    Cell::Float(z.re),
                    Cell::Float(z.im),
                ]
            });
            note(path, write_csv(path, &prov, &MATRIX_HEADER, rows)?);
        }
        let report = matrix_report(&rho)?;
        let deviation = closed
            .as_ref()
            .map(|c| max_relative_deviation(&report, c, spin).relative);
        EvolveOutput {
            method: Method::Matrix,
            report,
            closed_form: closed,
            max_relative_deviation: deviation,
        }
    } else {
        if cfg.matrix_output.is_some() {
            return Err(CliError::Usage(format!("S = {spin} is too large for a matrix dump")));
        }
        let report = closed_form_report(spin, &total)?;
        EvolveOutput {
            method: Method::ClosedForm,
            report,
            closed_form: None,
            max_relative_deviation: None,
        }
    };
    require_finite(&output.report)?;
    write_json(cfg.output.as_deref(), &Provenance::new("evolve", cfg)?, &output)
}

#[derive(Serialize)]
struct QpdReport {
    report: SqueezingReport,
    peak_theta: f64,
    peak_phi: f64,
    raw_max: f64,
}

pub fn qpd_cmd(cfg: &QpdConfig) -> CliResult<()> {
    let spin = SpinMagnitude::from_f64(cfg.spin)?;
    let params = pulse(cfg.mu, cfg.mu_prime)?;
    let rho = twistlab_core::evolve(&SpinDensityMatrix::x_polarized(spin)?, &params);
    rho.check_invariants()?;
    let (n_theta, n_phi) = parse_grid(&cfg.grid)?;
    let norm = match cfg.normalization {
        Normalization::Raw => QpdNormalization::Raw,
        Normalization::Max => QpdNormalization::Max,
    };
    let grid = qpd(&rho, &QpdGridSpec::uniform(n_theta, n_phi, norm)?)?;
    if let Some(v) = grid.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(CliError::Numeric(format!("QPD value {v} is negative or not finite")));
    }
    let prov = Provenance::new("qpd", cfg)?;
    let rows = grid
        .rows()
        .map(|(t, p, q)| vec![Cell::Float(t), Cell::Float(p), Cell::Float(q)]);
    note(&cfg.output, write_csv(&cfg.output, &prov, &QPD_HEADER, rows)?);

    if let Some(path) = &cfg.report {
        let (peak_theta, peak_phi, _) = grid.argmax();
        let body = QpdReport {
            report: matrix_report(&rho)?,
            peak_theta,
            peak_phi,
            raw_max: grid.raw_max,
        };
        write_json(Some(path), &prov, &body)?;
    }
    Ok(())
}

pub fn sweep_mu(cfg: &SweepMuConfig) -> CliResult<()> {
    let spin = SpinMagnitude::from_f64(cfg.spin)?;
    let range = Range::parse(&cfg.mu_grid)?;
    let mut mus = match cfg.spacing {
        Spacing::Linear => range.linear(),
        Spacing::Log => range.log()?,
    };
    let mu_prime = match (cfg.equal_mu_prime, cfg.mu_prime) {
        (true, None) => None,
        (false, Some(mp)) => Some(mp),
        (true, Some(_)) => {
            return Err(CliError::Usage(
                "give either --equal-mu-prime or --mu-prime, not both".into(),
            ))
        }
        (false, None) => return Err(CliError::Usage("give --equal-mu-prime or --mu-prime".into())),
    };
    mus.sort_by(f64::total_cmp);

    let half = spin.value() / 2.0;
    let rows: Vec<Vec<Cell>> = mus
        .par_iter()
        .map(|&mu| {
            let p = pulse(mu, mu_prime)?;
            let r = closed_form_report(spin, &p)?;
            require_finite(&r)?;
            Ok(vec![
                Cell::Float(mu),
                Cell::Float(r.var_zprime / half),
                Cell::Float(r.var_yprime / half),
                Cell::Float(approx_var_zprime(spin, &p).normalized),
                Cell::Float(r.mean_x),
                Cell::Float(r.zeta),
                Cell::Float(r.delta),
            ])
        })
        .collect::<CliResult<_>>()?;
    let prov = Provenance::new("sweep-mu", cfg)?;
    note(&cfg.output, write_csv(&cfg.output, &prov, &SWEEP_MU_HEADER, rows)?);
    Ok(())
}

#[derive(Serialize)]
struct IdealReference {
    prefactor: f64,
    exponent: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    points: usize,
    fit: ScalingFit,
    asymptotic_prefactors: Prefactors,
    approx_minimum_prefactors: Prefactors,
    ideal_reference: IdealReference,
}

pub fn sweep_s(cfg: &SweepSConfig) -> CliResult<()> {
    let values = Range::parse(&cfg.log_range)?.log()?;
    let mut spins = values
        .into_iter()
        .map(SpinMagnitude::nearest)
        .collect::<Result<Vec<_>, _>>()?;
    spins.sort();
    spins.dedup();
    let rows = scaling_sweep(&spins)?;

    let prov = Provenance::new("sweep-s", cfg)?;
    let csv_rows = rows.iter().map(|r| {
        vec![
            Cell::Float(r.exact.spin.value()),
            Cell::Float(r.exact.mu_half),
            Cell::Float(r.exact.mu_min),
            Cell::Float(r.approx.mu_half),
            Cell::Float(r.approx.mu_min),
            Cell::Float(r.exact.zeta_min),
            Cell::Float(r.approx.zeta_min),
        ]
    });
    note(&cfg.output, write_csv(&cfg.output, &prov, &SWEEP_S_HEADER, csv_rows)?);

    let summary = SweepSummary {
        points: rows.len(),
        fit: fit_scaling(&rows)?,
        asymptotic_prefactors: ASYMPTOTIC_PREFACTORS,
        approx_minimum_prefactors: APPROX_MINIMUM_PREFACTORS,
        ideal_reference: IdealReference {
            prefactor: IDEAL_ZETA_MIN_PREFACTOR,
            exponent: IDEAL_ZETA_MIN_EXPONENT,
        },
    };
    write_json(cfg.summary.as_deref(), &prov, &summary)
}

fn build_setup(cfg: &FeasibilityConfig) -> CliResult<OpticalSetup> {
    let base = match cfg.preset.as_deref() {
        Some("yb171") => Some(OpticalSetup::yb171()),
        Some(other) => return Err(CliError::Usage(format!("unknown preset '{other}' (known: yb171)"))),
        None => None,
    };
    let pick = |name: &str, flag: Option<f64>, preset: Option<f64>| {
        flag.or(preset)
            .ok_or_else(|| CliError::Schema(format!("missing field `{name}` (no preset given)")))
    };
    Ok(OpticalSetup {
        lambda0: pick("lambda0", cfg.lambda0, base.map(|b| b.lambda0))?,
        gamma_natural: pick("gamma_natural", cfg.gamma_natural, base.map(|b| b.gamma_natural))?,
        detuning: pick("detuning", cfg.detuning, base.map(|b| b.detuning))?,
        power: pick("power", cfg.power, base.map(|b| b.power))?,
        duration: pick("duration", cfg.duration, base.map(|b| b.duration))?,
        waist: pick("waist", cfg.waist, base.map(|b| b.waist))?,
        total_spin: pick("total_spin", cfg.total_spin, base.map(|b| b.total_spin))?,
        sample_length: cfg.sample_length.or(base.and_then(|b| b.sample_length)),
    })
}

#[derive(Serialize)]
struct FeasibilityOutput {
    setup: OpticalSetup,
    report: FeasibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<PulsePlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan_error: Option<String>,
}

pub fn feasibility(cfg: &FeasibilityConfig) -> CliResult<()> {
    let setup = build_setup(cfg)?;
    let report = analyze(&setup)?;
    let (plan, plan_error) = match cfg.target_mu.map(|mu| required_pulse(&setup.apparatus(), mu)) {
        None => (None, None),
        Some(Ok(plan)) => (Some(plan), None),
        Some(Err(twistlab_core::Error::Infeasible {
            target_mu,
            flag,
            detail,
        })) => (
            None,
            Some(format!(
                "target mu = {target_mu} is infeasible: flag {flag} fails ({detail})"
            )),
        ),
        Some(Err(e)) => return Err(e.into()),
    };
    let body = FeasibilityOutput {
        setup,
        report,
        plan,
        plan_error: plan_error.clone(),
    };
    write_json(cfg.output.as_deref(), &Provenance::new("feasibility", cfg)?, &body)?;
    match plan_error {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}

pub fn verify_oracle(cfg: &VerifyOracleConfig) -> CliResult<()> {
    let s1 = SpinMagnitude::from_twice(2)?;
    let s2 = SpinMagnitude::from_twice(4)?;
    let alpha_t = 1e-2;
    let fock = fock_evolve(s1, cfg.mean_photons, cfg.n_cut, alpha_t, alpha_t)?;
    let branch = coherent_branch_evolve(s1, cfg.mean_photons / 2.0, alpha_t, alpha_t)?;
    let fock_dev = fock.rho.max_abs_diff(&branch);
    let study = convergence_study(s2, 0.1, &[1e-1, 1e-2, 1e-3])?;

    let mut rows = vec![vec![
        Cell::Text("fock_vs_branch_s1".into()),
        Cell::Float(fock_dev),
        Cell::Float(fock.leakage),
    ]];
    for p in &study {
        rows.push(vec![
            Cell::Text(format!("branch_vs_reduced_s2_at{:e}", p.alpha_t)),
            Cell::Float(p.max_abs_deviation),
            Cell::Float(0.0),
        ]);
    }
    let prov = Provenance::new("verify-oracle", cfg)?;
    note(&cfg.output, write_csv(&cfg.output, &prov, &ORACLE_HEADER, rows)?);

    if fock.status != FockStatus::Ok {
        return Err(CliError::Numeric(format!(
            "Fock truncation leakage {:.3e} is too large",
            fock.leakage
        )));
    }
    if fock_dev > FOCK_TOLERANCE {
        return Err(CliError::Numeric(format!(
            "Fock and coherent-branch oracles differ by {fock_dev:.3e}"
        )));
    }
    let last = study.last().map(|p| p.max_abs_deviation).unwrap_or(f64::INFINITY);
    if !is_monotone(&study) || last > CONVERGENCE_TOLERANCE {
        return Err(CliError::Numeric(format!(
            "no monotone convergence to the reduced map: {study:?}"
        )));
    }
    Ok(())
}
