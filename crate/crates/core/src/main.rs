//! Command-line front end: builds a profile from a TOML config (or inline
//! flags), dispatches to the library, and writes JSON/CSV reports.
//!
//! Exit codes: 0 clean / no conjugate points, 1 conjugate points found,
//! 2 inconclusive, 3 profile rejected, 4 parse or config error, 5 numeric
//! failure.

use clap::{Args, Parser, Subcommand};
use lorcp::certifier::{certify_point, torus_verdict, Overall};
use lorcp::charts::saddle_chart;
use lorcp::conditions::{
    check_famille, check_lambda_obstruction, check_necessary, check_stability_inequalities,
};
use lorcp::config::RunConfig;
use lorcp::geodesic::{launch_tangent, Classification, LaunchSpec, Side};
use lorcp::jacobi::fundamental_basis;
use lorcp::profile::{build_profile, Band, FProfile, ProfileFlag};
use lorcp::report::{CsvWriter, Meta, Report};
use lorcp::Error;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "lorcp", version, about = "Conjugate-point certification for Lorentzian tori with a Killing field")]
struct Cli {
    /// TOML run configuration (see docs/config.md)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// profile expression, overrides the config
    #[arg(long, global = true)]
    expr: Option<String>,
    /// period hint, required with --expr
    #[arg(long, global = true)]
    period: Option<f64>,
    /// output path; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads for sweeps (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct LaunchArgs {
    /// causal type: +1 or -1
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<i8>,
    /// squared Clairaut constant
    #[arg(long)]
    c2: Option<f64>,
    /// band index
    #[arg(long)]
    band: Option<usize>,
    /// left or right of the band's critical point
    #[arg(long)]
    side: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the profile and report its zero/band structure
    Bands,
    /// Necessary conditions, lambda-obstruction, famille membership, stability
    Conditions,
    /// Certify the whole torus; exit 0 = no conjugate points, 1 = found, 2 = inconclusive
    Certify {
        /// C^2 samples per band and side
        #[arg(long)]
        samples: Option<usize>,
        /// skip the brute-force witness scan
        #[arg(long)]
        no_oracle: bool,
        /// also write per-certificate (C^2, Z0, Z1) rows to this CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Trace one tangent geodesic to CSV
    Geodesic {
        #[command(flatten)]
        launch: LaunchArgs,
        /// CSV sample count
        #[arg(long)]
        samples: Option<usize>,
        /// append Jacobi basis columns s, c, s', c', beta
        #[arg(long)]
        jacobi: bool,
    },
    /// Metric components on a saddle chart grid
    Saddle {
        /// zero index anchoring the chart
        #[arg(long)]
        k: Option<usize>,
        /// grid points per axis
        #[arg(long)]
        grid: Option<usize>,
        /// half-width of the (u, v) box
        #[arg(long)]
        half_width: Option<f64>,
    },
    /// Randomized cross-check of the sign criteria against the witness scan
    Oracle {
        /// instances per band and side
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// Effective configuration: file contents if given, else a minimal document
/// synthesized from --expr/--period so the report hash stays meaningful.
fn load_config(cli: &Cli) -> Result<(RunConfig, Vec<u8>), Error> {
    let text = match (&cli.config, &cli.expr) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(expr)) => {
            let period = cli.period.ok_or_else(|| {
                Error::Config("--expr requires --period".to_string())
            })?;
            format!("[profile]\nexpr = {expr:?}\nperiod_hint = {period}\n")
        }
        (None, None) => {
            return Err(Error::Config(
                "provide --config FILE or --expr EXPR --period P".to_string(),
            ))
        }
    };
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(expr) = &cli.expr {
        cfg.profile.expr = expr.clone();
    }
    if let Some(p) = cli.period {
        cfg.profile.period_hint = p;
    }
    Ok((cfg, text.into_bytes()))
}

fn build(cfg: &RunConfig) -> Result<FProfile, Error> {
    let expr = lorcp::expr::parser::parse(&cfg.profile.expr)?;
    build_profile(expr, &cfg.profile.expr, cfg.profile.period_hint, cfg.profile.tolerances)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("stdout write failed: {e}")))
        }
    }
}

fn parse_side(s: &str) -> Result<Side, Error> {
    match s {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        other => Err(Error::Config(format!("side must be left or right, got {other:?}"))),
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (mut cfg, raw) = load_config(&cli)?;
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if cfg.jobs > 0 {
        // ignore the error when a pool already exists (tests share a process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    let meta = Meta::new(&raw, &cfg.profile.tolerances);
    let p = build(&cfg)?;

    match cli.cmd {
        Cmd::Bands => {
            #[derive(Serialize)]
            struct Body<'a> {
                source: &'a str,
                period: f64,
                zeros: &'a [f64],
                zero_slopes: &'a [f64],
                bands: &'a [Band],
                critical_points: &'a [f64],
                symmetry_axis: Option<f64>,
                n_bands: usize,
                flag: &'a Option<ProfileFlag>,
                certifiable: bool,
            }
            let body = Body {
                source: &p.source,
                period: p.period,
                zeros: &p.zeros,
                zero_slopes: &p.zero_slopes,
                bands: &p.bands,
                critical_points: &p.critical_points,
                symmetry_axis: p.symmetry_axis,
                n_bands: p.n_bands,
                flag: &p.flag,
                certifiable: p.certifiable(),
            };
            emit(&cli.out, &Report::new(meta, body).to_json()?)?;
            Ok(0)
        }
        Cmd::Conditions => {
            let necessary = check_necessary(&p);
            let obstruction = check_lambda_obstruction(&p, p.tol.tol_sign);
            let famille = check_famille(&p);
            let stability = check_stability_inequalities(&p);
            let all_pass =
                necessary.pass && obstruction.pass && famille.pass && stability.pass;
            #[derive(Serialize)]
            struct Body {
                necessary: lorcp::conditions::NecessaryReport,
                obstruction: lorcp::conditions::ObstructionReport,
                famille: lorcp::conditions::FamilleReport,
                stability: lorcp::conditions::StabilityReport,
                all_pass: bool,
            }
            let body = Body { necessary, obstruction, famille, stability, all_pass };
            emit(&cli.out, &Report::new(meta, body).to_json()?)?;
            Ok(if all_pass { 0 } else { 1 })
        }
        Cmd::Certify { samples, no_oracle, csv } => {
            let n = samples.unwrap_or(cfg.certify.samples);
            let with_oracle = cfg.certify.oracle && !no_oracle;
            let verdict = torus_verdict(&p, n, with_oracle);
            if let Some(path) = csv {
                let mut w = CsvWriter::new();
                w.comment(&format!("profile: {}", p.source));
                w.header(&["band", "eps", "side", "c2", "z0", "z1", "margin"]);
                for sweep in &verdict.sweeps {
                    for cert in &sweep.certificates {
                        w.row(&[
                            cert.spec.band_idx as f64,
                            cert.spec.eps as f64,
                            cert.spec.side.direction(),
                            cert.spec.c2,
                            cert.z0_criterion,
                            cert.z1_criterion.unwrap_or(f64::NAN),
                            cert.margin,
                        ]);
                    }
                }
                fs::write(&path, w.finish())
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            }
            let code = match verdict.overall {
                Overall::CertifiedNoConjugate => 0,
                Overall::ConjugateFound => 1,
                Overall::Inconclusive => 2,
            };
            emit(&cli.out, &Report::new(meta, verdict).to_json()?)?;
            Ok(code)
        }
        Cmd::Geodesic { launch, samples, jacobi } => {
            let g = &cfg.geodesic;
            let spec = LaunchSpec {
                eps: launch.eps.unwrap_or(g.eps),
                c2: launch.c2.unwrap_or(g.c2),
                band_idx: launch.band.unwrap_or(g.band),
                side: parse_side(launch.side.as_deref().unwrap_or(&g.side))?,
            };
            let n = samples.unwrap_or(g.samples).max(2);
            let trace = launch_tangent(&p, spec)?;
            let horizon = match trace.classification {
                Some(Classification::Periodic { omega }) => (4.0 * omega).min(trace.t_end),
                _ => trace.t_end,
            };
            let basis = if jacobi {
                Some(fundamental_basis(&p, &trace, horizon * 1.0001)?)
            } else {
                None
            };
            let mut w = CsvWriter::new();
            w.comment(&format!("profile: {}", p.source));
            w.comment(&format!(
                "eps: {} c2: {} band: {} side: {:?}",
                spec.eps, spec.c2, spec.band_idx, spec.side
            ));
            w.comment(&format!("z0: {} signed_c: {}", trace.z0, trace.signed_c));
            w.comment(&format!(
                "events: t0: {:?} t1: {:?} t_turn: {:?} omega: {:?}",
                trace.t0, trace.t1, trace.t_turn, trace.omega
            ));
            w.comment(&format!("classification: {:?}", trace.classification));
            let mut cols = vec!["t", "x", "xprime", "f_of_x", "kappa_of_t"];
            if basis.is_some() {
                cols.extend(["s", "c", "sprime", "cprime", "beta"]);
            }
            w.header(&cols);
            for i in 0..n {
                let t = horizon * i as f64 / (n - 1) as f64;
                let x = trace.x(t);
                let mut row = vec![t, x, trace.x_prime(t), p.f(x), trace.kappa(&p, t)];
                if let Some(b) = &basis {
                    row.extend([b.s(t), b.c(t), b.s_prime(t), b.c_prime(t), b.beta(t)]);
                }
                w.row(&row);
            }
            emit(&cli.out, &w.finish())?;
            Ok(0)
        }
        Cmd::Saddle { k, grid, half_width } => {
            let s = &cfg.saddle;
            let k = k.unwrap_or(s.k);
            let grid = grid.unwrap_or(s.grid).max(2);
            let hw = half_width.or(s.half_width);
            let chart = saddle_chart(&p, k, hw)?;
            // stay strictly inside the chart's validity box unless overridden
            let w_box = hw.unwrap_or(chart.j_halfwidth * 0.95);
            let mut w = CsvWriter::new();
            w.comment(&format!("profile: {}", p.source));
            w.comment(&format!(
                "x_k: {} lambda: {} j_halfwidth: {}",
                chart.x_k, chart.lambda, chart.j_halfwidth
            ));
            w.header(&["u", "v", "g_uu", "g_uv", "g_vv"]);
            for i in 0..grid {
                for jdx in 0..grid {
                    let u = -w_box + 2.0 * w_box * i as f64 / (grid - 1) as f64;
                    let v = -w_box + 2.0 * w_box * jdx as f64 / (grid - 1) as f64;
                    let (guu, guv, gvv) = chart.metric_at(u, v)?;
                    w.row(&[u, v, guu, guv, gvv]);
                }
            }
            emit(&cli.out, &w.finish())?;
            Ok(0)
        }
        Cmd::Oracle { samples, seed } => {
            let n = samples.unwrap_or(cfg.oracle.samples);
            let seed = seed.unwrap_or(cfg.oracle.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            #[derive(Serialize)]
            struct Instance {
                band: usize,
                eps: i8,
                side: Side,
                c2: f64,
                verdict: lorcp::certifier::Verdict,
                oracle_agrees: bool,
            }
            #[derive(Serialize)]
            struct Body {
                instances: usize,
                degenerate: usize,
                errors: usize,
                disagreements: usize,
                agreement: bool,
                details: Vec<Instance>,
            }
            let mut details = Vec::new();
            let mut degenerate = 0usize;
            let mut errors = 0usize;
            for (idx, band) in p.bands.iter().enumerate() {
                for side in [Side::Left, Side::Right] {
                    for _ in 0..n {
                        let frac: f64 = rng.gen_range(1e-3..1.0 - 1e-3);
                        let spec = LaunchSpec {
                            eps: band.sign,
                            c2: band.sup_abs * frac,
                            band_idx: idx,
                            side,
                        };
                        match certify_point(&p, spec, true) {
                            Ok(cert) => {
                                if matches!(cert.verdict, lorcp::certifier::Verdict::Degenerate) {
                                    degenerate += 1;
                                }
                                details.push(Instance {
                                    band: idx,
                                    eps: spec.eps,
                                    side,
                                    c2: spec.c2,
                                    verdict: cert.verdict,
                                    oracle_agrees: cert.oracle_agrees.unwrap_or(true),
                                });
                            }
                            Err(_) => errors += 1,
                        }
                    }
                }
            }
            let disagreements = details.iter().filter(|d| !d.oracle_agrees).count();
            let body = Body {
                instances: details.len(),
                degenerate,
                errors,
                disagreements,
                agreement: disagreements == 0,
                details,
            };
            let code = if disagreements == 0 { 0 } else { 1 };
            emit(&cli.out, &Report::new(meta, body).to_json()?)?;
            Ok(code)
        }
    }
}
