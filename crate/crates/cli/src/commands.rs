use gravmodes::fd_oracle::oracle;
use gravmodes::liouville::LiouvilleChart;
use gravmodes::spectrum::{dispersion_of, eigenfunction, eigenvalues, ModeSolution, Spectrum};
use gravmodes::wavefield::{surface, uniform_grid};
use gravmodes::Equilibrium;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigSummary, Format, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, to_json, Csv, Num};

pub struct Solved {
    pub eq: Equilibrium,
    pub chart: LiouvilleChart,
    pub spectrum: Spectrum,
}

pub fn solve(cfg: &RunConfig, n_max: usize) -> Result<Solved, CliError> {
    cfg.validate()?;
    let eq = cfg.equilibrium()?;
    let chart = LiouvilleChart::new(&eq, cfg.l)?;
    let spectrum = eigenvalues(&chart, n_max, cfg.tol)?;
    Ok(Solved { eq, chart, spectrum })
}

pub fn build_modes(solved: &Solved) -> Result<Vec<ModeSolution>, CliError> {
    let lambdas = solved.spectrum.eigenvalues();
    let modes = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lam)| eigenfunction(&solved.chart, i + 1, lam))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(modes)
}

#[derive(Serialize)]
struct SpectrumRecord {
    n: usize,
    lambda: Num,
    frequency: Num,
    phase_speed: Num,
    zero_count: usize,
    residual_norm: Num,
    oracle_value: Num,
    oracle_rel_err: Num,
}

#[derive(Serialize)]
struct SpectrumReport {
    config: ConfigSummary,
    zeta_plus: Num,
    oracle_cells: usize,
    modes: Vec<SpectrumRecord>,
}

pub fn spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let solved = solve(cfg, cfg.n_max)?;
    let modes = build_modes(&solved)?;
    let fd = oracle(&solved.eq, cfg.l, cfg.oracle_cells, cfg.n_max)?;
    let records: Vec<SpectrumRecord> = modes
        .iter()
        .zip(&fd.values)
        .map(|(m, &big)| {
            let (f, c) = dispersion_of(m.lambda_n, m.l);
            let oracle_lambda = 1.0 / big;
            SpectrumRecord {
                n: m.n,
                lambda: m.lambda_n.into(),
                frequency: f.into(),
                phase_speed: c.into(),
                zero_count: m.zero_count,
                residual_norm: m.residual_norm.into(),
                oracle_value: oracle_lambda.into(),
                oracle_rel_err: ((m.lambda_n - oracle_lambda).abs() / oracle_lambda).into(),
            }
        })
        .collect();
    Ok(match cfg.format {
        Format::Json => to_json(&SpectrumReport {
            config: cfg.summary(),
            zeta_plus: solved.chart.zeta_plus().into(),
            oracle_cells: cfg.oracle_cells,
            modes: records,
        }),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "n",
                "lambda",
                "frequency",
                "phase_speed",
                "zero_count",
                "residual_norm",
                "oracle_value",
                "oracle_rel_err",
            ]);
            for r in &records {
                csv.row(&[
                    r.n.to_string(),
                    fmt_f64(r.lambda.0),
                    fmt_f64(r.frequency.0),
                    fmt_f64(r.phase_speed.0),
                    r.zero_count.to_string(),
                    fmt_f64(r.residual_norm.0),
                    fmt_f64(r.oracle_value.0),
                    fmt_f64(r.oracle_rel_err.0),
                ]);
            }
            csv.finish()
        }
    })
}

fn selected_mode(cfg: &RunConfig) -> Result<(Solved, ModeSolution), CliError> {
    let solved = solve(cfg, cfg.n_max)?;
    let lam = solved.spectrum.eigenvalues()[cfg.n - 1];
    let mode = eigenfunction(&solved.chart, cfg.n, lam)?;
    Ok((solved, mode))
}

#[derive(Serialize)]
struct ProfileRow {
    z: Num,
    zeta: Num,
    upsilon: Num,
    w: Num,
    u: Num,
    #[serde(rename = "deltaP")]
    delta_p: Num,
}

#[derive(Serialize)]
struct ModeReport {
    config: ConfigSummary,
    n: usize,
    lambda: Num,
    zero_count: usize,
    residual_norm: Num,
    kappa_used: Num,
    kappa_formula: Num,
    samples: Vec<ProfileRow>,
}

pub fn mode(cfg: &RunConfig) -> Result<String, CliError> {
    let (_, m) = selected_mode(cfg)?;
    let samples = m.sample(cfg.samples)?;
    Ok(match cfg.format {
        Format::Json => to_json(&ModeReport {
            config: cfg.summary(),
            n: m.n,
            lambda: m.lambda_n.into(),
            zero_count: m.zero_count,
            residual_norm: m.residual_norm.into(),
            kappa_used: m.kappa_used.into(),
            kappa_formula: m.kappa_formula.into(),
            samples: samples
                .iter()
                .map(|s| ProfileRow {
                    z: s.z.into(),
                    zeta: s.zeta.into(),
                    upsilon: s.upsilon.into(),
                    w: s.w.into(),
                    u: s.u.into(),
                    delta_p: s.delta_p.into(),
                })
                .collect(),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["z", "zeta", "upsilon", "w", "u", "deltaP"]);
            for s in &samples {
                csv.row(&[s.z, s.zeta, s.upsilon, s.w, s.u, s.delta_p].map(fmt_f64));
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct SurfaceReport {
    config: ConfigSummary,
    kind: &'static str,
    eps: Num,
    n: usize,
    lambda: Num,
    t: Vec<Num>,
    x: Vec<Num>,
    z_exact: Vec<Vec<Num>>,
    z_first_order: Vec<Vec<Num>>,
    static_profile: Option<Vec<Num>>,
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

pub fn surface_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let kind = cfg
        .kind
        .ok_or_else(|| CliError::Config("`kind` is required for surfaces (1 or 2)".into()))?;
    let (_, m) = selected_mode(cfg)?;
    let ts = uniform_grid(cfg.nt, cfg.t_max(m.lambda_n));
    let xs = uniform_grid(cfg.nx, cfg.x_max());
    let s = surface(&m, kind, cfg.eps, &ts, &xs)?;
    Ok(match cfg.format {
        Format::Json => to_json(&SurfaceReport {
            config: cfg.summary(),
            kind: kind.label(),
            eps: cfg.eps.into(),
            n: m.n,
            lambda: m.lambda_n.into(),
            t: nums(&s.t_grid),
            x: nums(&s.x_grid),
            z_exact: s.z.iter().map(|r| nums(r)).collect(),
            z_first_order: s.approx.iter().map(|r| nums(r)).collect(),
            static_profile: s.static_profile.as_deref().map(nums),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["t", "x", "z_exact", "z_first_order"]);
            for (i, &t) in s.t_grid.iter().enumerate() {
                for (j, &x) in s.x_grid.iter().enumerate() {
                    csv.row(&[t, x, s.z[i][j], s.approx[i][j]].map(fmt_f64));
                }
            }
            csv.finish()
        }
    })
}
