//! torus-sobolev: tables, curves and reports for sharp constants of critical
//! Sobolev / Gagliardo-Nirenberg inequalities on tori.

mod config;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;
use torus_sobolev::algebraic::{deviation, remainder_constant};
use torus_sobolev::bounds::{alpha_constant, first_method_bound, mode_splitting_bound};
use torus_sobolev::curve::{find_l, theta_model, ThetaModel};
use torus_sobolev::field::{extremal_field, verify_inequality, FourierInput, Inequality};
use torus_sobolev::largen::{scaled_point, Order};
use torus_sobolev::lattice::beta_constant;
use torus_sobolev::specfun::{catalan, dirichlet_beta_prime_at_1};
use torus_sobolev::{CaseDN, Error, PrecisionConfig};

const THREADS_ENV: &str = "TORUS_SOBOLEV_THREADS";

#[derive(Parser)]
#[command(name = "torus-sobolev", version, about = "Sharp constants for critical Sobolev inequalities on tori")]
struct Cli {
    /// `key = value` precision config (flags below override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// target absolute tolerance for lattice sums
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// relative tolerance for delta(mu) = delta solves
    #[arg(long, global = true)]
    root_tol: Option<f64>,
    /// write the main output here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// write a JSON run manifest here
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// write a gnuplot script for the CSV given by --output
    #[arg(long, global = true)]
    gnuplot: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Theta(delta) under a chosen model: CSV delta,theta,mu,err_bound
    Theta(ThetaArgs),
    /// Named constants as a JSON report
    Constants,
    /// Remainder constant K_d(n) (JSON) and optional deviation curve (CSV)
    Kdn(KdnArgs),
    /// Scaled large-n deviation or its limit: CSV z,value
    Limit(LimitArgs),
    /// Extremal field on a grid: CSV x,y,value
    Field(FieldArgs),
    /// Check an inequality on Fourier data: JSON {lhs, rhs, margin, holds}
    Verify(VerifyArgs),
    /// Elementary bounds: CSV delta,theta_exact,P_modesplit,first_method_bound
    Bounds(BoundsArgs),
}

#[derive(Args, Serialize)]
struct ThetaArgs {
    /// exact | theta0 | exp | loglog
    #[arg(long, default_value = "exact")]
    model: String,
    #[arg(long, default_value = "1:4:4")]
    delta_grid: String,
}

#[derive(Args, Serialize)]
struct KdnArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    n: u32,
    /// add 2n/((2pi)^d (2n-d)) back to the deviation curve
    #[arg(long)]
    shifted_convention: bool,
    /// deviation curve CSV destination
    #[arg(long)]
    #[serde(skip)]
    curve: Option<PathBuf>,
    #[arg(long, default_value = "1:1000:200,log")]
    delta_grid: String,
}

#[derive(Args, Serialize)]
struct LimitArgs {
    #[arg(long)]
    d: u32,
    /// positive integer or `inf`
    #[arg(long)]
    n: String,
    #[arg(long, default_value = "1.01:10:900")]
    z_grid: String,
}

#[derive(Args, Serialize)]
struct FieldArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 128)]
    resolution: usize,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// log0 | loglog | alg:D:N
    #[arg(long)]
    inequality: String,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long, default_value = "1:1000:31,log")]
    delta_grid: String,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct OutputRecord {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command_line: Vec<String>,
    config: &'a PrecisionConfig,
    tool_version: &'static str,
    input_sha256: String,
    wall_time_s: f64,
    outputs: Vec<OutputRecord>,
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

struct Outputs {
    input_sha: String,
    records: Vec<OutputRecord>,
}

impl Outputs {
    fn csv(&self, header: &str, rows: &[Vec<f64>]) -> String {
        let mut s = format!("# manifest-sha256 {}\n{header}\n", self.input_sha);
        for r in rows {
            s.push_str(&r.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    fn emit(&mut self, dest: Option<&PathBuf>, body: &str) -> Res<()> {
        let name = dest.map(|p| p.display().to_string()).unwrap_or_else(|| "<stdout>".into());
        self.records.push(OutputRecord { name, sha256: sha_hex(body.as_bytes()) });
        match dest {
            Some(p) => std::fs::write(p, body)?,
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

fn build_config(cli: &Cli) -> Res<PrecisionConfig> {
    let mut cfg = PrecisionConfig::default();
    if let Some(p) = &cli.config {
        let text = std::fs::read_to_string(p).map_err(|e| Error::MalformedInput(format!("{}: {e}", p.display())))?;
        cfg = config::apply_config_text(cfg, &text)?;
    }
    if let Some(t) = cli.tol {
        cfg.target_abs_tol = t;
    }
    if let Some(t) = cli.root_tol {
        cfg.root_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> Res<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Domain(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

fn gnuplot_script(csv: &str, cmd: &Command) -> String {
    let body = match cmd {
        Command::Field(_) => format!("set view map\nsplot '{csv}' using 1:2:3 with pm3d notitle\n"),
        Command::Bounds(_) => format!(
            "set logscale x\nplot '{csv}' using 1:2 with lines title 'theta', '' using 1:3 with lines title 'P', '' using 1:4 with lines title 'first method'\n"
        ),
        _ => format!("plot '{csv}' using 1:2 with lines notitle\n"),
    };
    format!("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n{body}")
}

fn run(cli: &Cli, cfg: &PrecisionConfig, out: &mut Outputs) -> Res<()> {
    let dest = cli.output.as_ref();
    match &cli.cmd {
        Command::Theta(a) => {
            let model: ThetaModel = a.model.parse()?;
            let grid = config::parse_grid(&a.delta_grid)?;
            let rows = grid
                .par_iter()
                .map(|&d| theta_model(model, d, cfg).map(|s| vec![d, s.theta, s.mu, s.theta_err]))
                .collect::<torus_sobolev::Result<Vec<_>>>()?;
            let body = out.csv("delta,theta,mu,err_bound", &rows);
            out.emit(dest, &body)?;
        }
        Command::Constants => {
            let b = beta_constant();
            let bp = dirichlet_beta_prime_at_1();
            let l = find_l(cfg)?;
            let pi = std::f64::consts::PI;
            let entry = |v: f64, m: &str| serde_json::json!({ "value": v, "method": m });
            let report = serde_json::json!({
                "beta": entry(b.value, "closed form pi(2 gamma + 2 ln 2 + 3 ln pi - 4 ln Gamma(1/4)), cross-checked against pi gamma + 4 beta'(1)"),
                "beta_prime_1": entry(bp.value, "derivative of the Dirichlet beta function at 1 from its Gamma(1/4) closed form"),
                "beta_plus_pi_over_pi": entry((b.value + pi) / pi, "arithmetic from beta"),
                "L": entry(l.l, "max over delta of 4 pi Theta - ln delta - ln(1 + ln delta): grid on [1, 100] then golden refinement on the exact curve"),
                "delta_star": entry(l.delta_star, "maximiser of the L objective"),
                "mu_star": entry(l.mu_star, "curve parameter at delta_star"),
                "L_tail_max": entry(l.tail_max, "largest objective value on a log grid over [100, 1e6]"),
                "alpha": entry(alpha_constant(), "(e^g - 1)/g^2 at g = 2 + W0(-2 e^-2)"),
                "catalan": entry(catalan(), "Dirichlet beta(2)"),
            });
            out.emit(dest, &json(&report))?;
        }
        Command::Kdn(a) => {
            let case = CaseDN::new(a.d, a.n)?;
            let rep = remainder_constant(case, cfg)?;
            if let Some(path) = &a.curve {
                let grid = config::parse_grid(&a.delta_grid)?;
                let rows = grid
                    .par_iter()
                    .map(|&d| deviation(case, d, a.shifted_convention, cfg).map(|f| vec![d, f]))
                    .collect::<torus_sobolev::Result<Vec<_>>>()?;
                let body = out.csv("delta,F", &rows);
                out.emit(Some(path), &body)?;
            }
            out.emit(dest, &json(&rep))?;
        }
        Command::Limit(a) => {
            let order: Order = a.n.parse()?;
            let grid = config::parse_grid(&a.z_grid)?;
            let rows = grid
                .par_iter()
                .map(|&z| scaled_point(a.d, order, z, cfg).map(|p| vec![z, p.map_or(f64::NAN, |p| p.value)]))
                .collect::<torus_sobolev::Result<Vec<_>>>()?;
            let body = out.csv("z,value", &rows);
            out.emit(dest, &body)?;
        }
        Command::Field(a) => {
            let g = extremal_field(a.mu, a.resolution, cfg)?;
            let mut buf = Vec::new();
            writeln!(buf, "# manifest-sha256 {}", out.input_sha)?;
            g.write_csv(&mut buf)?;
            out.emit(dest, &String::from_utf8(buf).expect("ascii csv"))?;
        }
        Command::Verify(a) => {
            let input = FourierInput::from_path(&a.input)?;
            let which: Inequality = a.inequality.parse()?;
            let r = verify_inequality(&input, which, cfg)?;
            out.emit(dest, &json(&r))?;
        }
        Command::Bounds(a) => {
            let grid = config::parse_grid(&a.delta_grid)?;
            let rows = grid
                .par_iter()
                .map(|&d| -> torus_sobolev::Result<Vec<f64>> {
                    let t = theta_model(ThetaModel::Exact, d, cfg)?.theta;
                    let p = mode_splitting_bound(d, cfg)?.p;
                    let f = if d > 1.0 { first_method_bound(d, cfg)? } else { f64::NAN };
                    Ok(vec![d, t, p, f])
                })
                .collect::<torus_sobolev::Result<Vec<_>>>()?;
            let body = out.csv("delta,theta_exact,P_modesplit,first_method_bound", &rows);
            out.emit(dest, &body)?;
        }
    }
    if let Some(g) = &cli.gnuplot {
        let csv = cli
            .output
            .as_ref()
            .ok_or_else(|| Error::Domain("--gnuplot needs --output to name the CSV".into()))?;
        let script = gnuplot_script(&csv.display().to_string(), &cli.cmd);
        out.emit(Some(g), &script)?;
    }
    Ok(())
}

fn main() {
    let start = Instant::now();
    let cli = Cli::parse();
    let result = (|| -> Res<()> {
        init_threads()?;
        let cfg = build_config(&cli)?;
        let invocation = serde_json::json!({ "invocation": &cli.cmd, "config": &cfg, "version": env!("CARGO_PKG_VERSION") });
        let mut out = Outputs { input_sha: sha_hex(invocation.to_string().as_bytes()), records: Vec::new() };
        run(&cli, &cfg, &mut out)?;
        if let Some(m) = &cli.manifest {
            let man = RunManifest {
                command_line: std::env::args().collect(),
                config: &cfg,
                tool_version: env!("CARGO_PKG_VERSION"),
                input_sha256: out.input_sha.clone(),
                wall_time_s: start.elapsed().as_secs_f64(),
                outputs: std::mem::take(&mut out.records),
            };
            std::fs::write(m, json(&man))?;
        }
        Ok(())
    })();
    if let Err(f) = result {
        let (kind, code, msg) = match &f {
            Failure::Lib(e) => (e.kind(), e.exit_code(), e.to_string()),
            Failure::Io(m) => ("io", 1, m.clone()),
        };
        eprintln!("error kind={kind} exit={code} message={msg:?}");
        std::process::exit(code);
    }
}
