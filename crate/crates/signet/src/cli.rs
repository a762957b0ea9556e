//! The `signet` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use signet_core::basis::{biorthogonal_family, gram_matrix, gram_report, riesz_transform, GramReport, Weight};
use signet_core::evolution::{evolve_heat, evolve_pseudo_schrodinger, evolve_schrodinger, reconstruct_complex, SpectralState, SubspaceX};
use signet_core::func::{uniform_grid, PiecewiseFunction, EXPORT_POINTS};
use signet_core::graph::{build_star, build_tadpole2, Boundary, Network, Topology};
use signet_core::spectra::{Family, Operator, Spectrum};
use signet_core::stationary::{solve_stationary, solve_stationary_unchecked, SourceTerm};
use signet_core::wellposed::{resonance_verdict, two_phase_equilateral, ResonanceVerdict};
use signet_core::Error as CoreError;

use crate::analysis::spectrum_of;
use crate::csvio::{self, EigenfunctionRow, OracleRow, SpectrumRow, StationaryRow, TrajectoryRow};
use crate::error::Error;
use crate::format::read_network;
use crate::oracle::{fd_assemble, fd_lowest, fd_solve, sample_source};

pub const EXIT_RESONANT: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "signet", version, about = "Sign-changing conductivity problems on star and tadpole networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Well-posedness verdict of the stationary problem
    Resonance(NetArg),
    /// Closed-form eigenvalues and eigenfunctions
    Spectrum(SpectrumArgs),
    /// Stationary solution for a constant source
    Solve(SolveArgs),
    /// Spectral time evolution of a truncated state
    Evolve(EvolveArgs),
    /// Finite-difference eigenvalues
    Oracle(OracleArgs),
    /// Gram, oracle and stationary cross-checks with PASS/FAIL lines
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct NetArg {
    /// Network description file
    #[arg(short = 'f', long = "file")]
    pub file: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorArg {
    Standard,
    Pseudo,
}

impl From<OperatorArg> for Operator {
    fn from(o: OperatorArg) -> Self {
        match o {
            OperatorArg::Standard => Operator::Standard,
            OperatorArg::Pseudo => Operator::Pseudo,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Schrodinger,
    Heat,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub net: NetArg,
    #[arg(long, value_enum, default_value = "standard")]
    pub operator: OperatorArg,
    /// Roots per family
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=10_000))]
    pub n_max: u32,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub net: NetArg,
    /// Constant source value
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub source: f64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Solve even when the network is resonant
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub net: NetArg,
    #[arg(long, value_enum, default_value = "standard")]
    pub operator: OperatorArg,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=10_000))]
    pub n_max: u32,
    /// Number of modes in the state; at most 20 by default
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub truncation: Option<u32>,
    /// Output times, comma separated
    #[arg(long = "t", value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub t: Vec<f64>,
    #[arg(long, value_enum, default_value = "schrodinger")]
    pub flow: Flow,
    /// Negative modes allowed in the heat-flow state
    #[arg(long, default_value_t = 0)]
    pub nf: usize,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub net: NetArg,
    #[arg(long, value_enum, default_value = "standard")]
    pub operator: OperatorArg,
    /// Mesh width
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Eigenvalues of smallest modulus to report
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=2000))]
    pub count: u32,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Network to check; a built-in panel of stars and a tadpole otherwise
    #[arg(short = 'f', long = "file")]
    pub file: Option<PathBuf>,
    /// Oracle mesh width
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Relative tolerance of the oracle eigenvalue comparison
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Eigenvalues compared per operator
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=200))]
    pub count: u32,
}

/// Failure carried to the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Error::Core(e).into()
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::MeshTooCoarse { .. } => EXIT_INPUT,
        Error::Core(c) => match c {
            CoreError::ResonantConductivity { .. } | CoreError::ResonantNetwork { .. } => EXIT_RESONANT,
            CoreError::EmptyGraph
            | CoreError::ZeroConductivity(_)
            | CoreError::NonpositiveLength(_)
            | CoreError::Validation(_)
            | CoreError::BadPartition { .. }
            | CoreError::DegeneratePartition
            | CoreError::UnsupportedTopology
            | CoreError::TruncationTooLarge { .. }
            | CoreError::InvalidArgument(_) => EXIT_INPUT,
            _ => EXIT_NUMERICAL,
        },
        _ => EXIT_NUMERICAL,
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(path: &Path) -> std::result::Result<Network, Failure> {
    read_network(path).map_err(|e| match e {
        Error::Io(io) => Failure { code: EXIT_INPUT, message: format!("{}: {io}", path.display()) },
        other => other.into(),
    })
}

fn out_file(dir: &Path, name: &str) -> std::result::Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    Ok(dir.join(name))
}

/// One-line reason for a resonant refusal.
fn resonance_message(net: &Network, v: &ResonanceVerdict) -> String {
    match two_phase_equilateral(net) {
        Some((d, n, kp, km)) => format!(
            "resonant: |k-|/k+ = {} equals the threshold D/(N-D) = {d}/{} = {} (D = {d}, N = {n})",
            -km / kp,
            n - d,
            d as f64 / (n - d) as f64
        ),
        None => format!("resonant: {:?} criterion vanishes (critical value {:e}, margin {:e})", v.criterion, v.critical_value.unwrap_or(0.0), v.margin),
    }
}

fn refusal(net: &Network) -> Failure {
    let message = match resonance_verdict(net) {
        Ok(v) => resonance_message(net, &v),
        Err(e) => e.to_string(),
    };
    Failure { code: EXIT_RESONANT, message }
}

/// Maps resonance errors of the closed forms to a refusal naming the threshold.
fn with_refusal<T>(net: &Network, r: crate::error::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| if exit_code(&e) == EXIT_RESONANT { refusal(net) } else { e.into() })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| format!("{:.12e}", v + 0.0))
}

pub fn resonance_report(net: &Network, v: &ResonanceVerdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16}{:?}", "topology", net.topology);
    let _ = writeln!(s, "{:<16}{:?}", "criterion", v.criterion);
    let _ = writeln!(s, "{:<16}{}", "well_posed", v.well_posed);
    let _ = writeln!(s, "{:<16}{}", "critical_value", fmt_opt(v.critical_value));
    let _ = writeln!(s, "{:<16}{}", "forbidden_ratio", fmt_opt(v.forbidden_ratio));
    let _ = writeln!(s, "{:<16}{:.12e}", "margin", v.margin + 0.0);
    let _ = writeln!(s, "{:<16}{:.12e}", "determinant", v.determinant + 0.0);
    s
}

pub fn gram_block(label: &str, g: &GramReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{label}.size          {}", g.size);
    let _ = writeln!(s, "{label}.max_offdiag   {:.6e}", g.max_offdiag);
    let _ = writeln!(s, "{label}.max_diag_dev  {:.6e}", g.max_diag_dev);
    let _ = writeln!(s, "{label}.condition     {:.6e}", g.condition_estimate);
    s
}

/// The transform only orthogonalizes the integer family of an equilateral
/// Dirichlet star, whose members vanish at the center.
fn riesz_applies(s: &Spectrum) -> bool {
    two_phase_equilateral(&s.network).is_some() && s.pairs().any(|p| p.family == Family::PseudoInteger)
}

fn resonance(a: &NetArg) -> Outcome {
    let net = load(&a.file)?;
    let v = resonance_verdict(&net)?;
    print!("{}", resonance_report(&net, &v));
    if v.well_posed { Ok(()) } else { Err(Failure { code: EXIT_RESONANT, message: resonance_message(&net, &v) }) }
}

fn sampled_rows(f: &PiecewiseFunction, net: &Network, mut row: impl FnMut(u32, f64, f64)) {
    for (e, edge) in net.edges.iter().enumerate() {
        for x in uniform_grid(edge.length, EXPORT_POINTS) {
            row(edge.id, x, f.eval(e, x));
        }
    }
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let net = load(&a.net.file)?;
    let an = with_refusal(&net, spectrum_of(&net, a.operator.into(), a.n_max as usize))?;
    let s = &an.spectrum;
    let mut rows = Vec::new();
    let mut fns = Vec::new();
    for (i, p) in s.pairs().enumerate() {
        rows.push(SpectrumRow { index: i + 1, family: p.family.name(), lambda: p.lambda, multiplicity: p.multiplicity });
        for (b, f) in p.functions.iter().enumerate() {
            sampled_rows(f, &net, |edge_id, x, value| fns.push(EigenfunctionRow { pair_index: i + 1, basis_index: b + 1, edge_id, x, value }));
        }
    }
    csvio::write_file(&out_file(&a.output_dir, "spectrum.csv")?, &rows)?;
    csvio::write_file(&out_file(&a.output_dir, "eigenfunctions.csv")?, &fns)?;
    let mut text = format!("{:<16}{}\n{:<16}{}\n{:<16}{}\n", "operator", s.operator.name(), "pairs", s.num_pairs(), "modes", s.modes().len());
    text += &gram_block("gram", &gram_report(s, &Weight::Plain)?);
    if s.operator == Operator::Pseudo && riesz_applies(s) {
        text += &gram_block("riesz", &gram_report(&riesz_transform(s, an.ratio)?, &Weight::Plain)?);
    }
    for w in &s.warnings {
        let _ = writeln!(text, "warning         {w}");
    }
    print!("{text}");
    Ok(())
}

fn solve(a: &SolveArgs) -> Outcome {
    let net = load(&a.net.file)?;
    let src = SourceTerm::constant(net.num_edges(), a.source);
    let psi = match solve_stationary(&net, &src) {
        Err(CoreError::ResonantNetwork { .. }) if a.force => {
            eprintln!("warning: solving a resonant network");
            solve_stationary_unchecked(&net, &src).map_err(|e| match e {
                CoreError::ResonantNetwork { .. } => Failure { code: EXIT_NUMERICAL, message: "transmission matrix is exactly singular".into() },
                e => e.into(),
            })?
        }
        Err(CoreError::ResonantNetwork { .. }) => return Err(refusal(&net)),
        r => r?,
    };
    let mut rows = Vec::new();
    sampled_rows(&psi, &net, |edge_id, x, v| rows.push(StationaryRow { edge_id, x, psi: v }));
    csvio::write_file(&out_file(&a.output_dir, "stationary.csv")?, &rows)?;
    Ok(())
}

/// `c_j = 1/(j+1)`; the heat flow on a standard basis keeps only the first
/// `nf` negative modes.
fn initial_state(s: &Spectrum, truncation: usize, flow: Flow, nf: usize) -> std::result::Result<SpectralState, Failure> {
    let st = SpectralState::zero(s, truncation)?;
    let mut rank = 0;
    let c = st
        .lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let keep = if l < 0.0 && flow == Flow::Heat && s.operator == Operator::Standard {
                rank += 1;
                rank <= nf
            } else {
                true
            };
            Complex64::new(if keep { 1.0 / (j + 1) as f64 } else { 0.0 }, 0.0)
        })
        .collect();
    Ok(st.with_coefficients(c)?)
}

fn evolve(a: &EvolveArgs) -> Outcome {
    let net = load(&a.net.file)?;
    let an = with_refusal(&net, spectrum_of(&net, a.operator.into(), a.n_max as usize))?;
    let s = &an.spectrum;
    let truncation = a.truncation.map_or_else(|| s.modes().len().min(20), |t| t as usize);
    let st = initial_state(s, truncation, a.flow, a.nf)?;
    let x = SubspaceX::new(a.nf);
    let mut rows = Vec::new();
    let mut text = format!("{:<24}{:<24}\n", "t", "norm");
    for &t in &a.t {
        let out = match (a.flow, s.operator) {
            (Flow::Schrodinger, Operator::Standard) => evolve_schrodinger(&st, t)?,
            (Flow::Schrodinger, Operator::Pseudo) => evolve_pseudo_schrodinger(&st, t)?,
            (Flow::Heat, _) => evolve_heat(&st, t, Some(&x))?,
        };
        let _ = writeln!(text, "{:<24}{:<24.15e}", t, out.norm());
        let (re, im) = reconstruct_complex(&out);
        for (e, edge) in net.edges.iter().enumerate() {
            for xv in uniform_grid(edge.length, EXPORT_POINTS) {
                rows.push(TrajectoryRow { t, edge_id: edge.id, x: xv, re_value: re.eval(e, xv), im_value: im.eval(e, xv) });
            }
        }
    }
    csvio::write_file(&out_file(&a.output_dir, "trajectory.csv")?, &rows)?;
    print!("{text}");
    Ok(())
}

fn oracle(a: &OracleArgs) -> Outcome {
    let net = load(&a.net.file)?;
    let disc = fd_assemble(&net, a.h, a.operator.into())?;
    let eig = fd_lowest(&disc, a.count as usize)?;
    let rows: Vec<OracleRow> = eig.iter().enumerate().map(|(i, e)| OracleRow { index: i + 1, lambda: e.lambda, multiplicity: e.multiplicity }).collect();
    csvio::write_file(&out_file(&a.output_dir, "oracle.csv")?, &rows)?;
    let mut text = String::new();
    for r in &rows {
        let _ = writeln!(text, "{:<6}{:<26.15e}{}", r.index, r.lambda, r.multiplicity);
    }
    print!("{text}");
    Ok(())
}

/// Result of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` when the check does not apply.
    pub pass: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: String) -> Self {
        Check { name: name.into(), pass: Some(pass), detail }
    }

    fn skip(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check { name: name.into(), pass: None, detail: why.into() }
    }

    pub fn line(&self) -> String {
        let tag = match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub h: f64,
    pub tol: f64,
    pub count: usize,
}

const GRAM_TOL: f64 = 1e-9;
const BIORTHO_TOL: f64 = 1e-8;
const STATIONARY_TOL: f64 = 1e-6;
const TRUNCATION: usize = 30;

fn gram_checks(label: &str, s: &Spectrum, ratio: f64) -> Vec<Check> {
    let modes = s.modes();
    let n = modes.len().min(TRUNCATION);
    let fs: Vec<&PiecewiseFunction> = modes[..n].iter().map(|m| m.function).collect();
    let mut out = Vec::new();
    match s.operator {
        Operator::Standard => {
            let r = gram_matrix(&fs, &Weight::Plain).map(|g| GramReport::from_matrix(&g));
            out.push(match r {
                Ok(g) => Check::new(format!("{label} standard gram"), g.max_deviation() < GRAM_TOL, format!("size {} deviation {:.3e}", g.size, g.max_deviation())),
                Err(e) => Check::new(format!("{label} standard gram"), false, e.to_string()),
            });
        }
        Operator::Pseudo => {
            if riesz_applies(s) {
                let r = riesz_transform(s, ratio).and_then(|t| {
                    let tm = t.modes();
                    let tf: Vec<&PiecewiseFunction> = tm[..n].iter().map(|m| m.function).collect();
                    gram_matrix(&tf, &Weight::Plain).map(|g| GramReport::from_matrix(&g))
                });
                out.push(match r {
                    Ok(g) => Check::new(format!("{label} riesz gram"), g.max_deviation() < GRAM_TOL, format!("size {} deviation {:.3e}", g.size, g.max_deviation())),
                    Err(e) => Check::new(format!("{label} riesz gram"), false, e.to_string()),
                });
            } else {
                out.push(Check::skip(format!("{label} riesz gram"), "not an equilateral Dirichlet star"));
            }
            out.push(match biorthogonal_family(s, n) {
                Ok(b) => Check::new(format!("{label} biorthogonal"), b.residual < BIORTHO_TOL, format!("truncation {n} residual {:.3e}", b.residual)),
                Err(e) => Check::new(format!("{label} biorthogonal"), false, e.to_string()),
            });
        }
    }
    out
}

fn oracle_check(label: &str, net: &Network, s: &Spectrum, o: &VerifyOptions) -> Check {
    let name = format!("{label} {} oracle", s.operator.name());
    let modes = s.modes();
    let count = o.count.min(modes.len());
    let fd = match fd_assemble(net, o.h, s.operator).and_then(|d| fd_lowest(&d, count)) {
        Ok(v) => v,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    let mut mult_ok = true;
    let mut seen = Vec::new();
    for m in &modes[..count] {
        if seen.contains(&m.pair) {
            continue;
        }
        seen.push(m.pair);
        let near = fd.iter().min_by(|a, b| (a.lambda - m.lambda).abs().partial_cmp(&(b.lambda - m.lambda).abs()).unwrap()).unwrap();
        worst = worst.max((near.lambda - m.lambda).abs() / m.lambda.abs().max(1.0));
        let want = s.pairs().nth(m.pair).unwrap().multiplicity;
        // a cluster cut off by `count` can only look smaller
        let expect_full = modes[..count].iter().filter(|x| x.pair == m.pair).count() == want;
        if expect_full && near.multiplicity != want {
            mult_ok = false;
        }
    }
    Check::new(name, worst < o.tol && mult_ok, format!("{count} eigenvalues at h = {} max rel err {worst:.3e} multiplicities {}", o.h, if mult_ok { "ok" } else { "differ" }))
}

fn stationary_check(label: &str, net: &Network, o: &VerifyOptions) -> Check {
    let name = format!("{label} stationary");
    match resonance_verdict(net) {
        Ok(v) if v.well_posed => {}
        Ok(_) => return Check::skip(name, "resonant network"),
        Err(e) => return Check::skip(name, e.to_string()),
    }
    let h = o.h / 10.0;
    let psi = match solve_stationary(net, &SourceTerm::constant(net.num_edges(), 1.0)) {
        Ok(p) => p,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let fd = match fd_assemble(net, h, Operator::Standard).and_then(|d| {
        let f = sample_source(&d, |_, _| 1.0);
        fd_solve(&d, &f)
    }) {
        Ok(v) => v,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let dist = fd.l2_distance(|e, x| psi.eval(e, x));
    let rel = dist / fd.l2_norm().max(1e-300);
    Check::new(name, rel < STATIONARY_TOL, format!("f = 1 at h = {h} relative L2 discrepancy {rel:.3e}"))
}

fn checks_for(label: &str, net: &Network, o: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for op in [Operator::Standard, Operator::Pseudo] {
        match spectrum_of(net, op, 30) {
            Ok(an) => {
                out.extend(gram_checks(label, &an.spectrum, an.ratio));
                out.push(oracle_check(label, net, &an.spectrum, o));
            }
            Err(e) if exit_code(&e) == EXIT_RESONANT => out.push(Check::skip(format!("{label} {}", op.name()), "resonant network")),
            Err(e) => out.push(Check::new(format!("{label} {}", op.name()), false, e.to_string())),
        }
    }
    out.push(stationary_check(label, net, o));
    out
}

/// Stars and a tadpole covering every closed-form family.
pub fn builtin_panel() -> Vec<(String, Network)> {
    use Boundary::*;
    let r2 = 2f64.sqrt();
    vec![
        ("star(2,3,-0.5)".into(), build_star(&[1.0; 3], &[1.0, 1.0, -0.5], &[Dirichlet; 3]).unwrap()),
        ("star(1,3,-0.25)".into(), build_star(&[1.0; 3], &[1.0, -0.25, -0.25], &[Dirichlet; 3]).unwrap()),
        ("star-irrational".into(), build_star(&[1.0, r2, 3f64.sqrt()], &[1.0, 1.0, -0.5], &[Dirichlet; 3]).unwrap()),
        ("star-mixed".into(), build_star(&[1.0; 4], &[1.0, 1.0, -2.0, -2.0], &[Dirichlet, Neumann, Dirichlet, Neumann]).unwrap()),
        ("tadpole(1,sqrt2,-0.5)".into(), build_tadpole2(1.0, r2, 1.0, -0.5).unwrap()),
    ]
}

/// Runs every check; parallel over networks, output in panel order.
pub fn verify_networks(nets: &[(String, Network)], o: &VerifyOptions) -> Vec<Check> {
    nets.par_iter().map(|(label, net)| checks_for(label, net, o)).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn verify(a: &VerifyArgs) -> Outcome {
    let nets = match &a.file {
        Some(p) => vec![(p.file_name().map_or("network".into(), |n| n.to_string_lossy().into_owned()), load(p)?)],
        None => builtin_panel(),
    };
    if let Some((_, net)) = nets.first().filter(|_| a.file.is_some()) {
        if net.topology == Topology::General {
            return Err(CoreError::UnsupportedTopology.into());
        }
    }
    let o = VerifyOptions { h: a.h, tol: a.tol, count: a.count as usize };
    let checks = verify_networks(&nets, &o);
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(text, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| c.pass == Some(false)).count();
    let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
    print!("{text}");
    if failed > 0 { Err(Failure { code: EXIT_NUMERICAL, message: format!("{failed} checks failed") }) } else { Ok(()) }
}

/// Caps the global rayon pool when SIGNET_THREADS is set.
fn init_threads() {
    if let Some(n) = std::env::var("SIGNET_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run(cli: Cli) -> Outcome {
    init_threads();
    match &cli.command {
        Command::Resonance(a) => resonance(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Solve(a) => solve(a),
        Command::Evolve(a) => evolve(a),
        Command::Oracle(a) => oracle(a),
        Command::Verify(a) => verify(a),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("signet: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
