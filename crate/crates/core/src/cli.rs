//! Command line surface. All reports are deterministic given the inputs and
//! flags; exit codes are 0 for success or a passing suite, 1 for a failing
//! suite, 2 for any validation or parse error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::form::ScalarForm;
use crate::io::{parse_bundle_spec, parse_connection_spec};
use crate::operator::{cov_big_d, cov_small_d, OperatorExpr};
use crate::poly::rat_int;
use crate::suite::{render_report, verify_suite};

#[derive(Parser, Debug)]
#[command(
    name = "gradform",
    version,
    about = "Exact calculus of connections and graded derivations on charts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Curvature, cocurvature and the covariant-derivative table of a connection
    Curvature {
        /// Connection spec file (JSON: dim, coords, phi)
        spec: PathBuf,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brackets of the connection's projections against 2(R + Rbar)
    Bracket {
        spec: PathBuf,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose [d, h*] into its Lie part and its algebraic part
    Decompose {
        spec: PathBuf,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Induced connection and horizontal lifts of a product bundle
    Lift {
        /// Bundle spec file (JSON: base_coords, fiber_coords, gamma)
        spec: PathBuf,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a registered identity suite
    Verify {
        /// One of: bianchi, fn-axioms, lemma23, prop24, prop25, thm26,
        /// cor27, thm28, thm29, thm31
        suite: String,
        /// Chart dimensions, cycled over the trials (ignored by thm31)
        #[arg(long, value_delimiter = ',', default_value = "3")]
        dims: Vec<usize>,
        /// Total number of trials
        #[arg(long, default_value_t = 10)]
        trials: u32,
        /// Root seed; per-trial seeds are derived by counter
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_connection(path: &Path) -> Result<Connection> {
    parse_connection_spec(&read_file(path)?)
}

/// The worked report behind `gradform curvature`: rank, curvature data and
/// the covariant-derivative table on every coordinate.
pub fn curvature_report(conn: &Connection) -> String {
    let chart = conn.chart();
    let mut out = String::new();
    let _ = writeln!(out, "chart: {chart}");
    let _ = writeln!(out, "rank: {}", conn.rank());
    let _ = writeln!(out, "R = {}", conn.curvature());
    let _ = writeln!(out, "Rbar = {}", conn.cocurvature());
    let dh = cov_big_d(conn);
    let dsh = cov_small_d(conn);
    let ir = OperatorExpr::insert_h(&conn.curvature(), conn).expect("degree 2");
    let coord_diffs: Vec<ScalarForm> = (0..chart.dim())
        .map(|i| ScalarForm::coord_diff(chart, i).expect("in range"))
        .collect();
    for (i, dxi) in coord_diffs.iter().enumerate() {
        let _ = writeln!(
            out,
            "h*(d{}) = {}",
            chart.name(i),
            conn.h_star(dxi).expect("one chart")
        );
    }
    for i in 0..chart.dim() {
        let f = ScalarForm::coord_fn(chart, i).expect("in range");
        let _ = writeln!(
            out,
            "Dh({}) = {}",
            chart.name(i),
            dh.apply(&f).expect("one chart")
        );
    }
    for (i, dxi) in coord_diffs.iter().enumerate() {
        let _ = writeln!(
            out,
            "dh(d{}) = {}",
            chart.name(i),
            dsh.apply(dxi).expect("one chart")
        );
    }
    for (i, dxi) in coord_diffs.iter().enumerate() {
        let diff = &dsh.apply(dxi).expect("one chart") - &dh.apply(dxi).expect("one chart");
        let _ = writeln!(out, "(dh - Dh)(d{}) = {}", chart.name(i), diff);
    }
    for (i, dxi) in coord_diffs.iter().enumerate() {
        let _ = writeln!(
            out,
            "ih(R)(d{}) = {}",
            chart.name(i),
            ir.apply(dxi).expect("one chart")
        );
    }
    out
}

/// The report behind `gradform bracket`.
pub fn bracket_report(conn: &Connection) -> Result<String> {
    let chart = conn.chart();
    let mut out = String::new();
    let _ = writeln!(out, "chart: {chart}");
    let phi = conn.phi();
    let h = conn.h();
    let _ = writeln!(out, "[phi,phi] = {}", crate::form::fn_bracket(phi, phi)?);
    let _ = writeln!(out, "[h,h] = {}", crate::form::fn_bracket(h, h)?);
    let _ = writeln!(out, "[phi,h] = {}", crate::form::fn_bracket(phi, h)?);
    let _ = writeln!(out, "R = {}", conn.curvature());
    let _ = writeln!(out, "Rbar = {}", conn.cocurvature());
    let two = (&conn.curvature() + &conn.cocurvature()).scale(&rat_int(2));
    let _ = writeln!(out, "2(R+Rbar) = {two}");
    Ok(out)
}

/// The report behind `gradform decompose`.
pub fn decompose_report(conn: &Connection) -> Result<String> {
    let chart = conn.chart();
    let d = OperatorExpr::d(chart);
    let hs = OperatorExpr::h_star(conn);
    let com = crate::operator::graded_commutator(&d, &hs)?;
    let (k, l) = crate::operator::decompose(&com, conn)?;
    let mut out = String::new();
    let _ = writeln!(out, "chart: {chart}");
    let _ = writeln!(out, "D = [d, h*]");
    let _ = writeln!(out, "K = {k}");
    let _ = writeln!(out, "L = {l}");
    Ok(out)
}

/// The report behind `gradform lift`.
pub fn lift_report(pb: &crate::bundle::ProductBundle) -> Result<String> {
    let conn = pb.induced_connection();
    let mut out = String::new();
    let _ = writeln!(out, "base: {}", pb.base());
    let _ = writeln!(out, "fiber: {}", pb.fiber());
    let _ = writeln!(out, "total: {}", pb.total());
    let _ = writeln!(out, "rank: {}", conn.rank());
    for i in 0..pb.base().dim() {
        let x = crate::form::VectorForm::coord_field(pb.base(), i)?;
        let _ = writeln!(out, "chi(d/{}) = {}", pb.base().name(i), pb.chi_lift(&x)?);
    }
    let _ = writeln!(out, "R = {}", conn.curvature());
    let _ = writeln!(out, "Rbar = {}", conn.cocurvature());
    Ok(out)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Run a parsed command line; the returned code is the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Curvature { spec, out } => {
            let conn = load_connection(&spec)?;
            emit(&curvature_report(&conn), &out)?;
            Ok(0)
        }
        Command::Bracket { spec, out } => {
            let conn = load_connection(&spec)?;
            emit(&bracket_report(&conn)?, &out)?;
            Ok(0)
        }
        Command::Decompose { spec, out } => {
            let conn = load_connection(&spec)?;
            emit(&decompose_report(&conn)?, &out)?;
            Ok(0)
        }
        Command::Lift { spec, out } => {
            let pb = parse_bundle_spec(&read_file(&spec)?)?;
            emit(&lift_report(&pb)?, &out)?;
            Ok(0)
        }
        Command::Verify {
            suite,
            dims,
            trials,
            seed,
            out,
        } => {
            let report = verify_suite(&suite, &dims, trials, seed)?;
            emit(&render_report(&report), &out)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
