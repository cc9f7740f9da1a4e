//! Experiment orchestration and CSV/JSON output.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Experiment, RunConfig};
use super::snapshot::write_snapshot;
use crate::analysis::catalog::{catalog_entry, TheoremId};
use crate::analysis::fit::{fit_decay, log_spaced};
use crate::analysis::oracle::linear_decay_oracle;
use crate::analysis::probes::{decay_report, default_fit_window, waiting_time_index};
use crate::analysis::splitting::splitting_report;
use crate::evolution::{critical_exponent, picard_iterate, simulate, SimConfig, Trajectory};
use crate::initial_data::{generate, slow_decay_sweep};
use crate::kernels::{kernel_norm_scaling_probe, smoothing_estimate_probe, KernelProbeReport};
use crate::spectral::{lp_norm, SpectralField};
use crate::{Result, SqgError};

/// `α` grid tabulated by the rate-catalog experiment.
pub const CATALOG_ALPHAS: [f64; 4] = [0.6, 0.75, 0.9, 1.0];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines, one per fitted quantity.
    pub lines: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: String,
    version: &'static str,
    config: &'a RunConfig,
    files: Vec<String>,
    wall_time_seconds: f64,
}

struct Output {
    dir: PathBuf,
    summary: RunSummary,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            summary: RunSummary::default(),
        })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(std::io::Error::from)?;
        w.write_record(header).map_err(std::io::Error::from)?;
        for r in rows {
            w.write_record(r).map_err(std::io::Error::from)?;
        }
        w.flush()?;
        self.summary.files.push(path);
        Ok(())
    }

    fn snapshot(&mut self, name: &str, field: &SpectralField, alpha: f64, t: f64) -> Result<()> {
        let path = self.dir.join(name);
        write_snapshot(BufWriter::new(File::create(&path)?), field, alpha, t)?;
        self.summary.files.push(path);
        Ok(())
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().copied().map(num).collect()
}

fn initial_field(cfg: &RunConfig) -> Result<SpectralField> {
    generate(cfg.profile()?, &cfg.grid()?)
}

fn write_trajectory(out: &mut Output, traj: &Trajectory) -> Result<()> {
    let rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .zip(&traj.norms)
        .map(|((t, _), n)| row(&[*t, n[0], n[1], n[2]]))
        .collect();
    out.csv(
        "timeseries.csv",
        &["t", "norm_l2", "norm_l4", "norm_linf"],
        &rows,
    )?;
    let m = &traj.monitor;
    let rows: Vec<Vec<String>> = (0..m.times.len())
        .map(|i| row(&[m.times[i], m.energy[i], m.dissipated[i]]))
        .collect();
    out.csv("energy.csv", &["t", "energy", "dissipated"], &rows)?;
    fs::create_dir_all(out.dir.join("snapshots"))?;
    for (i, (t, f)) in traj.samples.iter().enumerate() {
        out.snapshot(
            &format!("snapshots/snap_{i:04}.sqgd"),
            f,
            traj.config.alpha,
            *t,
        )?;
    }
    Ok(())
}

fn probe_rows(rep: &KernelProbeReport) -> Vec<Vec<String>> {
    let (t0, m0) = (rep.times[0], rep.measured_norms[0]);
    rep.times
        .iter()
        .zip(&rep.measured_norms)
        .map(|(t, m)| {
            let predicted = m0 * (t / t0).powf(rep.predicted_exponent);
            vec![rep.probe_id.clone(), num(*t), num(*m), num(predicted)]
        })
        .collect()
}

fn run_simulate(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let traj = simulate(&initial_field(cfg)?, cfg.sim()?)?;
    write_trajectory(out, &traj)?;
    let v = traj.max_principle_violation();
    out.summary.lines.push(format!(
        "energy_balance_residual={}, max_increase_l2={}, max_increase_l4={}, max_increase_linf={}",
        traj.monitor.balance_residual(),
        v[0],
        v[1],
        v[2]
    ));
    Ok(())
}

fn run_linear_oracle(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let a = &cfg.analysis;
    let alpha = cfg.alpha().expect("validated");
    let spec = a.spectrum.expect("validated");
    let lt = a.times.expect("validated");
    let times = log_spaced(lt.lo, lt.hi, lt.count);
    let norms = linear_decay_oracle(&spec, alpha, &times)?;
    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(&norms)
        .map(|(t, n)| row(&[*t, *n]))
        .collect();
    out.csv("linear_oracle.csv", &["t", "norm_l2"], &rows)?;
    let window = a.fit_window.unwrap_or((lt.lo, lt.hi));
    let (fitted, r2) = fit_decay(&times, &norms, window)?;
    let predicted = -(spec.origin_order + 1.0) / (2.0 * alpha);
    out.csv(
        "linear_oracle_fit.csv",
        &["fitted_exponent", "predicted_exponent", "r_squared"],
        &[row(&[fitted, predicted, r2])],
    )?;
    out.summary.lines.push(format!(
        "{fitted}, {predicted}, {}",
        (fitted - predicted).abs() / predicted.abs()
    ));
    Ok(())
}

fn run_kernel_probe(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let a = &cfg.analysis;
    let alpha = cfg.alpha().expect("validated");
    let lt = a.times.expect("validated");
    let times = log_spaced(lt.lo, lt.hi, lt.count);
    let mut reports = Vec::new();
    for r in &a.kernel_scaling {
        reports.push(kernel_norm_scaling_probe(
            r.gamma, r.beta, r.j, r.p, alpha, &times,
        )?);
    }
    for r in &a.smoothing {
        reports.push(smoothing_estimate_probe(
            r.p,
            r.q,
            alpha,
            &a.test_functions,
            &times,
        )?);
    }
    let rows: Vec<Vec<String>> = reports.iter().flat_map(probe_rows).collect();
    out.csv(
        "kernel_probes.csv",
        &["probe_id", "t", "measured", "predicted"],
        &rows,
    )?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let variation = if r.ratios.is_empty() {
                f64::NAN
            } else {
                r.last_decade_variation()
            };
            let mut v = vec![r.probe_id.clone()];
            v.extend(row(&[
                r.predicted_exponent,
                r.fitted_exponent,
                r.max_ratio,
                variation,
            ]));
            v
        })
        .collect();
    out.csv(
        "kernel_probe_summary.csv",
        &[
            "probe_id",
            "predicted_exponent",
            "fitted_exponent",
            "max_ratio",
            "last_decade_variation",
        ],
        &rows,
    )?;
    for r in &reports {
        out.summary.lines.push(format!(
            "{}: {}, {}",
            r.probe_id, r.fitted_exponent, r.predicted_exponent
        ));
    }
    Ok(())
}

fn run_splitting(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let traj = simulate(&initial_field(cfg)?, cfg.sim()?)?;
    let rep = splitting_report(&traj, cfg.analysis.k.expect("validated"))?;
    let rows: Vec<Vec<String>> = (0..rep.times.len())
        .map(|i| {
            row(&[
                rep.times[i],
                rep.energy[i],
                rep.low_energy[i],
                rep.high_energy[i],
                rep.term_i[i],
                rep.term_ii[i],
                rep.term_ii_raw[i],
                rep.term_iii[i],
                rep.term_iv[i],
            ])
        })
        .collect();
    out.csv(
        "splitting.csv",
        &[
            "t",
            "energy",
            "low_energy",
            "high_energy",
            "term_i",
            "term_ii",
            "term_ii_raw",
            "term_iii",
            "term_iv",
        ],
        &rows,
    )?;
    out.summary.lines.push(format!(
        "triangle_excess={}, identity_excess={}",
        rep.triangle_excess(),
        rep.identity_excess()
    ));
    Ok(())
}

fn run_decay_fit(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let sim = cfg.sim()?;
    let traj = simulate(&initial_field(cfg)?, sim)?;
    let a = &cfg.analysis;
    let times = traj.times();
    let mut qs: Vec<f64> = Vec::new();
    for f in &a.fits {
        if !qs.contains(&f.q) {
            qs.push(f.q);
        }
    }
    // the box conserves the mean, so decay is measured on the fluctuation
    let fluct: Vec<SpectralField> = traj.samples.iter().map(|(_, f)| f.without_mean()).collect();
    let series: Vec<Vec<f64>> = qs
        .iter()
        .map(|&q| fluct.iter().map(|f| lp_norm(f, q)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut header = vec!["t".to_string()];
    header.extend(qs.iter().map(|q| format!("fluct_norm_l{q}")));
    let rows: Vec<Vec<String>> = (0..times.len())
        .map(|i| {
            let mut r = vec![num(times[i])];
            r.extend(series.iter().map(|s| num(s[i])));
            r
        })
        .collect();
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("timeseries.csv", &header_ref, &rows)?;

    let base = a.fit_window.unwrap_or_else(|| {
        let (lo, hi) = default_fit_window(sim.t_end);
        (lo.max(times[0]), hi.min(times[times.len() - 1]))
    });
    let m = critical_exponent(sim.alpha);
    let mut fit_rows = Vec::new();
    for f in &a.fits {
        let norms = &series[qs.iter().position(|q| *q == f.q).expect("q listed")];
        let mut window = base;
        if let (TheoremId::Thm15, Some(kappa)) = (f.theorem, a.kappa) {
            let nm: Vec<f64> = fluct.iter().map(|x| lp_norm(x, m)).collect::<Result<_>>()?;
            let idx = waiting_time_index(&nm, kappa).ok_or_else(|| {
                SqgError::invalid(format!("L^m norm never drops below kappa = {kappa}"))
            })?;
            window.0 = window.0.max(times[idx]);
        }
        let pq = f.p.unwrap_or(f.q);
        let rep = decay_report(&times, norms, f.q, window, f.theorem, pq, sim.alpha)?;
        out.summary.lines.push(format!(
            "{}, {}, {}",
            rep.fitted_exponent, rep.catalog_exponent, rep.relative_error
        ));
        let mut r = vec![num(f.q), f.theorem.name().to_string()];
        r.extend(row(&[
            pq,
            rep.fitted_exponent,
            rep.catalog_exponent,
            rep.relative_error,
            rep.r_squared,
            window.0,
            window.1,
        ]));
        fit_rows.push(r);
    }
    out.csv(
        "decay_fit.csv",
        &[
            "q",
            "theorem",
            "catalog_pq",
            "fitted_exponent",
            "catalog_exponent",
            "relative_error",
            "r_squared",
            "t_lo",
            "t_hi",
        ],
        &fit_rows,
    )
}

fn run_slow_decay(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let sim = cfg.sim()?;
    let res = slow_decay_sweep(&initial_field(cfg)?, &cfg.analysis.lambdas, sim.t_end, sim)?;
    let rows: Vec<Vec<String>> = res
        .iter()
        .map(|p| {
            row(&[
                p.lambda,
                p.ratio,
                1.0 - p.ratio,
                p.deviation,
                p.scale,
                p.deviation / p.scale,
            ])
        })
        .collect();
    out.csv(
        "slow_decay.csv",
        &[
            "lambda",
            "ratio",
            "gap",
            "nonlinear_deviation",
            "nonlinear_scale",
            "constant",
        ],
        &rows,
    )?;
    for p in &res {
        out.summary.lines.push(format!(
            "lambda={}, ratio={}, nonlinear_deviation={}",
            p.lambda, p.ratio, p.deviation
        ));
    }
    Ok(())
}

fn run_picard(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let sim = cfg.sim()?;
    let theta0 = initial_field(cfg)?;
    let q = cfg
        .analysis
        .q
        .unwrap_or_else(|| 2.0 * critical_exponent(sim.alpha));
    let iterates = picard_iterate(&theta0, sim, cfg.analysis.iterations.expect("validated"), q)?;
    let reference = SimConfig {
        record_times: vec![sim.t_end],
        ..sim.clone()
    };
    let exact = simulate(&theta0, &reference)?;
    let target = exact.final_field().expect("one record time");
    let rows: Vec<Vec<String>> = iterates
        .iter()
        .map(|(traj, rec)| {
            let gap = traj
                .final_field()
                .expect("non-empty")
                .sub(target)
                .energy()
                .sqrt();
            row(&[
                rec.n as f64,
                rec.k_n,
                rec.kp_n,
                rec.q,
                rec.increment.unwrap_or(f64::NAN),
                gap,
            ])
        })
        .collect();
    out.csv(
        "picard.csv",
        &["n", "k_n", "kp_n", "q", "increment", "final_gap_l2"],
        &rows,
    )?;
    if let Some(last) = rows.last() {
        out.summary.lines.push(format!("final_gap_l2={}", last[5]));
    }
    Ok(())
}

fn run_rate_catalog(out: &mut Output) -> Result<()> {
    let mut rows = Vec::new();
    for alpha in CATALOG_ALPHAS {
        for id in TheoremId::ALL {
            let e = catalog_entry(id, alpha, id.sample_exponent(alpha))?;
            let base = match e.base {
                crate::analysis::catalog::RateBase::Time => "t",
                crate::analysis::catalog::RateBase::LogTime => "ln(e+t)",
            };
            rows.push(vec![
                id.name().to_string(),
                num(alpha),
                num(e.pq),
                num(e.exponent),
                base.to_string(),
                e.squared.to_string(),
            ]);
        }
    }
    out.csv(
        "rate_catalog.csv",
        &["theorem", "alpha", "pq", "exponent", "base", "squared"],
        &rows,
    )
}

/// Execute `exp` and write its outputs plus `manifest.json` into `dir`.
pub fn run(cfg: &RunConfig, exp: Experiment, dir: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    let mut out = Output::new(dir)?;
    match exp {
        Experiment::Simulate => run_simulate(cfg, &mut out)?,
        Experiment::LinearOracle => run_linear_oracle(cfg, &mut out)?,
        Experiment::KernelProbe => run_kernel_probe(cfg, &mut out)?,
        Experiment::Splitting => run_splitting(cfg, &mut out)?,
        Experiment::DecayFit => run_decay_fit(cfg, &mut out)?,
        Experiment::SlowDecay => run_slow_decay(cfg, &mut out)?,
        Experiment::Picard => run_picard(cfg, &mut out)?,
        Experiment::RateCatalog => run_rate_catalog(&mut out)?,
    }
    let manifest = Manifest {
        experiment: exp.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        files: out
            .summary
            .files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &manifest)
        .map_err(std::io::Error::from)?;
    out.summary.files.push(path);
    Ok(out.summary)
}
