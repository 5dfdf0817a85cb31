use std::f64::consts::{FRAC_PI_4, LN_2};
use std::path::Path;
use std::time::Instant;

use fsgeo::analytic::{
    de_dtheta, ds_geo_de, e_of_theta, omega_reduced, s_geo_reduced, schmidt_chart, trace_w,
    SchmidtChart,
};
use fsgeo::chart::{divergence_xi, EntanglementField, FdSteps};
use fsgeo::microcanonical::{
    average_trace_w, ds_geo_de_quadrature, estimate_omega, s_geo_curve, sample_entanglement,
    spin_chain_scan, Binning, LevelFamily, OmegaEstimate, MAX_QUBITS,
};
use fsgeo::state_space::{Bipartition, SeededSampler};

use crate::output::{num, opt_num, write_csv, RunManifest};
use crate::{BinsArg, CliError, Command, SampleOmegaArgs};

fn binning(bins: BinsArg) -> Binning {
    match bins {
        BinsArg::FreedmanDiaconis => Binning::FreedmanDiaconis,
        BinsArg::Count(n) => Binning::Count(n),
    }
}

fn write_manifest(
    command: &Command,
    out: &Path,
    seed: u64,
    n_samples: usize,
    started: Instant,
) -> Result<(), CliError> {
    let (name, parameters) = command.parameters();
    RunManifest {
        command: name.to_string(),
        parameters,
        seed,
        n_samples,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
    }
    .write(&out.join("manifest.json"))?;
    Ok(())
}

fn write_omega(path: &Path, omega: &OmegaEstimate) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = (0..omega.n_bins())
        .map(|k| {
            vec![
                num(omega.bin_edges[k]),
                num(omega.bin_edges[k + 1]),
                num(omega.density[k]),
                num(omega.std_error[k]),
                omega.counts[k].to_string(),
            ]
        })
        .collect();
    write_csv(path, &["e_lo", "e_hi", "density", "std_error", "count"], &rows)?;
    Ok(())
}

fn write_sgeo(path: &Path, omega: &OmegaEstimate) -> Result<(), CliError> {
    let curve = s_geo_curve(omega)?;
    let rows: Vec<Vec<String>> = (0..curve.e_centers.len())
        .map(|k| {
            vec![
                num(curve.e_centers[k]),
                opt_num(curve.s_geo[k]),
                opt_num(curve.ds_de[k]),
            ]
        })
        .collect();
    write_csv(path, &["e_center", "s_geo", "ds_de"], &rows)?;
    Ok(())
}

fn check_chain(n_qubits: usize) -> Result<(), CliError> {
    if n_qubits > MAX_QUBITS {
        return Err(fsgeo::Error::TooLarge {
            qubits: n_qubits,
            cap: MAX_QUBITS,
        }
        .into());
    }
    Ok(())
}

pub fn sample_omega(command: &Command, args: &SampleOmegaArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let bip = match (args.da, args.db, args.n_qubits, args.block) {
        (Some(da), Some(db), None, None) => Bipartition::new(da, db)?,
        (None, None, Some(n), Some(l)) => {
            check_chain(n)?;
            Bipartition::spin_chain(n, l)?
        }
        _ => return Err(CliError::Usage("give --da/--db or --n-qubits/--block".into())),
    };
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let samples = sample_entanglement(bip, args.samples, &mut SeededSampler::new(args.seed))?;
    let omega = estimate_omega(&samples, &binning(args.bins))?.with_seed(args.seed);
    write_omega(&args.out.join("omega.csv"), &omega)?;
    write_manifest(command, &args.out, args.seed, args.samples, started)
}

pub fn two_qubit_analytic(command: &Command, args: &crate::AnalyticArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (lo, hi) = (args.theta_min, args.theta_max);
    if !(lo > 0.0 && hi < FRAC_PI_4 && lo < hi) {
        return Err(fsgeo::Error::OutOfRange {
            value: if lo > 0.0 { hi } else { lo },
            lo: 0.0,
            hi: FRAC_PI_4,
        }
        .into());
    }
    if args.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    let mut rows = Vec::with_capacity(args.steps);
    for k in 0..args.steps {
        let theta = lo + (hi - lo) * k as f64 / (args.steps - 1) as f64;
        rows.push(vec![
            num(theta),
            num(e_of_theta(theta)),
            num(de_dtheta(theta)),
            num(trace_w(theta)?),
            num(omega_reduced(theta)?),
            num(s_geo_reduced(theta)?),
            num(ds_geo_de(theta)?),
        ]);
    }
    write_csv(
        &args.out.join("analytic.csv"),
        &["theta", "e", "de_dtheta", "trace_w", "omega", "s_geo", "ds_geo_de"],
        &rows,
    )?;
    write_manifest(command, &args.out, 0, 0, started)
}

/// Parses `start:stop:count` or `a,b,c`.
pub fn parse_theta_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("bad --theta-grid `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        return match count {
            0 => Err(bad()),
            1 => Ok(vec![start]),
            _ => Ok((0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect()),
        };
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

pub type SchmidtFamily = LevelFamily<SchmidtChart, EntanglementField<SchmidtChart>>;

/// The two-qubit Schmidt family as a level family of the entanglement entropy.
pub fn schmidt_family() -> SchmidtFamily {
    LevelFamily::new(
        schmidt_chart(),
        EntanglementField::new(schmidt_chart(), Bipartition::new(2, 2).expect("2x2 cut")),
        (0.0, FRAC_PI_4),
    )
}

/// Entropy step for differentiating `ln ω` at `e`: small relative to the
/// distance from both ends of `[0, ln 2]`, where `S_geo` is singular.
pub fn entropy_step(e: f64) -> f64 {
    (0.01 * e.min(LN_2 - e)).min(1e-3)
}

/// One row of the identity check.
#[derive(Debug, Clone, PartialEq)]
pub enum IdentityRow {
    /// The stencil reaches a critical point of the entanglement.
    Singular { theta: f64, reason: String },
    Evaluated {
        theta: f64,
        e: f64,
        div_xi: f64,
        trace_w: f64,
        avg_trace_w: f64,
        ds_geo_de: f64,
    },
}

impl IdentityRow {
    /// Relative deviations: chart divergence vs closed form, orbit average vs
    /// closed form, and entropy slope vs orbit average.
    pub fn deviations(&self) -> Option<[f64; 3]> {
        match *self {
            IdentityRow::Singular { .. } => None,
            IdentityRow::Evaluated {
                div_xi,
                trace_w,
                avg_trace_w,
                ds_geo_de,
                ..
            } => Some([
                ((div_xi - trace_w) / trace_w).abs(),
                ((avg_trace_w - trace_w) / trace_w).abs(),
                ((ds_geo_de - avg_trace_w) / avg_trace_w).abs(),
            ]),
        }
    }
}

pub fn identity_row(family: &SchmidtFamily, theta: f64, n_phi: usize) -> Result<IdentityRow, CliError> {
    let steps = FdSteps::default();
    let reach = steps.h1 + steps.h2;
    if !(theta - reach > 0.0 && theta + reach < FRAC_PI_4) {
        return Ok(IdentityRow::Singular {
            theta,
            reason: format!(
                "stencil [{:.6}, {:.6}] leaves the open Schmidt interval (0, pi/4)",
                theta - reach,
                theta + reach
            ),
        });
    }
    let exact = match trace_w(theta) {
        Ok(v) => v,
        Err(e) => {
            return Ok(IdentityRow::Singular {
                theta,
                reason: e.to_string(),
            })
        }
    };
    let e = e_of_theta(theta);
    let div_xi = divergence_xi(&family.chart, &[theta, 0.0], &family.field, &steps)?;
    let avg = average_trace_w(family, e, n_phi)?;
    let slope = ds_geo_de_quadrature(family, e, entropy_step(e), n_phi)?;
    Ok(IdentityRow::Evaluated {
        theta,
        e,
        div_xi,
        trace_w: exact,
        avg_trace_w: avg,
        ds_geo_de: slope,
    })
}

pub fn verify_identity(command: &Command, args: &crate::VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let grid = parse_theta_grid(&args.theta_grid)?;
    if !(args.tolerance > 0.0) || args.quadrature_points == 0 {
        return Err(CliError::Usage("--tolerance and --quadrature-points must be positive".into()));
    }
    let family = schmidt_family();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut evaluated = 0;
    for &theta in &grid {
        let row = identity_row(&family, theta, args.quadrature_points)?;
        match &row {
            IdentityRow::Singular { theta, reason } => {
                eprintln!("theta={theta}: skipped (singular): {reason}");
                rows.push(vec![
                    num(*theta),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "singular".into(),
                ]);
            }
            IdentityRow::Evaluated {
                theta,
                e,
                div_xi,
                trace_w,
                avg_trace_w,
                ds_geo_de,
            } => {
                evaluated += 1;
                let dev = row.deviations().expect("evaluated row");
                let pass = dev.iter().all(|d| *d < args.tolerance);
                if !pass {
                    let msg = format!(
                        "theta={theta}: div_xi={div_xi} trace_w={trace_w} avg={avg_trace_w} \
                         ds_de={ds_geo_de} deviations={dev:?} tolerance={}",
                        args.tolerance
                    );
                    eprintln!("{msg}");
                    failures.push(msg);
                }
                rows.push(vec![
                    num(*theta),
                    num(*e),
                    num(*div_xi),
                    num(*trace_w),
                    num(*avg_trace_w),
                    num(*ds_geo_de),
                    num(dev[0]),
                    num(dev[1]),
                    num(dev[2]),
                    if pass { "pass" } else { "fail" }.into(),
                ]);
            }
        }
    }
    write_csv(
        &args.out.join("identity.csv"),
        &[
            "theta",
            "e",
            "div_xi",
            "trace_w",
            "avg_trace_w",
            "ds_geo_de",
            "rel_dev_div",
            "rel_dev_avg",
            "rel_dev_identity",
            "status",
        ],
        &rows,
    )?;
    write_manifest(command, &args.out, 0, 0, started)?;
    if evaluated == 0 {
        return Err(CliError::Numerical("every grid point is singular".into()));
    }
    if !failures.is_empty() {
        return Err(CliError::Tolerance(format!(
            "{} of {evaluated} rows exceed tolerance {}",
            failures.len(),
            args.tolerance
        )));
    }
    eprintln!("{evaluated} rows within tolerance {}", args.tolerance);
    Ok(())
}

pub fn spin_chain(command: &Command, args: &crate::SpinChainArgs) -> Result<(), CliError> {
    let started = Instant::now();
    check_chain(args.n_qubits)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let blocks: Vec<usize> = if args.block_sweep {
        (1..=args.n_qubits / 2).collect()
    } else {
        vec![args.block.expect("clap requires --block without --block-sweep")]
    };
    if blocks.is_empty() {
        return Err(CliError::Usage("--block-sweep needs at least 2 qubits".into()));
    }
    let mut summary = Vec::new();
    for &block in &blocks {
        // Each block length restarts the stream, so a single-block run and the
        // matching sweep entry agree.
        let omega = spin_chain_scan(
            args.n_qubits,
            block,
            args.samples,
            &mut SeededSampler::new(args.seed),
            &binning(args.bins),
        )?;
        let (omega_name, sgeo_name) = if args.block_sweep {
            (format!("omega_l{block}.csv"), format!("sgeo_l{block}.csv"))
        } else {
            ("omega.csv".to_string(), "sgeo.csv".to_string())
        };
        write_omega(&args.out.join(omega_name), &omega)?;
        write_sgeo(&args.out.join(sgeo_name), &omega)?;
        summary.push(vec![
            block.to_string(),
            num(omega.sample_mean),
            num(omega.sample_std_error),
            args.samples.to_string(),
        ]);
    }
    if args.block_sweep {
        write_csv(
            &args.out.join("sweep.csv"),
            &["block", "mean_e", "std_error", "n_samples"],
            &summary,
        )?;
    }
    write_manifest(command, &args.out, args.seed, args.samples, started)
}
