//! Subcommands: hilbert, norm-twist, sieve, construct, compose, verify.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use torsor_core::cert::{self, Node};
use torsor_core::construct::{self, Certificate, Context, Route};
use torsor_core::cyclo::{Cyclo, CycloElem};
use torsor_core::kummer::{self, GaloisRep, KummerPair};
use torsor_core::localfield::{self, FactoredElem};
use torsor_core::sieve::Sieve;

use crate::config::{parse_config, parse_mode, RunConfig};
use crate::{certio, CliError};

#[derive(Parser)]
#[command(name = "torsor", version, about = "Period and index certificates for torsors under elliptic curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Local Hilbert symbols of two elements of Q(ζ_N).
    Hilbert {
        /// Symbol level.
        #[arg(long)]
        n: u32,
        /// Field level N (defaults to n).
        #[arg(long)]
        level: Option<u32>,
        /// A rational such as -3/2, or coordinates such as [3,1].
        #[arg(short = 'a', allow_hyphen_values = true)]
        a: String,
        #[arg(short = 'b', allow_hyphen_values = true)]
        b: String,
        /// Also report every place above this prime.
        #[arg(long = "place")]
        places: Vec<u64>,
    },
    /// Twisted norm of a Kummer pair under the Galois action on the torsion basis.
    NormTwist {
        #[command(flatten)]
        run: RunArgs,
        #[arg(short = 'a', allow_hyphen_values = true)]
        a: String,
        #[arg(short = 'b', allow_hyphen_values = true)]
        b: String,
    },
    /// Search for a prime pair (v, v′).
    Sieve {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build and certify a class of period n and index nℓ.
    Construct {
        #[command(flatten)]
        run: RunArgs,
        /// Take the level-2n route and pass to 2η.
        #[arg(long)]
        even_adjust: bool,
    },
    /// Combine two certificates with coprime periods.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a certificate from its witnesses.
    Verify { certificate: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long, value_parser = ["A", "B", "a", "b"])]
    mode: Option<String>,
    #[arg(long)]
    prime_bound: Option<u64>,
    #[arg(long)]
    coeff_bound: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.config.display())))?;
        let mut c = parse_config(&text)?;
        if let Some(n) = self.n {
            c.n = Some(n);
        }
        if let Some(l) = self.ell {
            c.ell = Some(l);
        }
        if let Some(m) = &self.mode {
            c.mode = parse_mode(m).unwrap();
        }
        if let Some(p) = self.prime_bound {
            c.bounds.prime_bound = p;
        }
        if let Some(b) = self.coeff_bound {
            c.bounds.coeff_bound = b;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }
}

/// Runs one command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Verify { certificate } => return verify(&certificate, out, err),
        Cmd::Hilbert { n, level, a, b, places } => hilbert(n, level.unwrap_or(n), &a, &b, &places, out),
        Cmd::NormTwist { run, a, b } => norm_twist(&run, &a, &b, out),
        Cmd::Sieve { run } => sieve(&run, out),
        Cmd::Construct { run, even_adjust } => build(&run, even_adjust, out),
        Cmd::Compose { first, second, out: dest } => compose(&first, &second, dest.as_deref(), out),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn parse_elem_arg(k: &Cyclo, s: &str) -> Result<CycloElem, CliError> {
    let s = s.trim();
    let node = match s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) => Node::list(inner.split(',').map(|c| Node::s(c.trim()))),
        None => Node::s(s),
    };
    let x = cert::parse_elem(k, &node)?;
    if x.is_zero() {
        return Err(CliError::Usage(format!("{s:?} is zero")));
    }
    Ok(x)
}

fn show(x: &FactoredElem) -> String {
    if x.is_one() {
        return String::from("1");
    }
    x.factors()
        .iter()
        .map(|(b, e)| format!("{}^{e}", b.to_string_poly()))
        .collect::<Vec<_>>()
        .join(" * ")
}

fn hilbert(n: u32, level: u32, a: &str, b: &str, extra: &[u64], out: &mut dyn Write) -> Result<(), CliError> {
    let k = Cyclo::new(level)?;
    let fa = FactoredElem::from_base(parse_elem_arg(&k, a)?)?;
    let fb = FactoredElem::from_base(parse_elem_arg(&k, b)?)?;
    let mut support = localfield::support_of(&fa, &fb)?;
    for &p in extra {
        support.extend(k.places_above(p)?);
    }
    let r = localfield::global_symbol(&fa, &fb, &support, n)?;
    writeln!(out, "{:<16} {:<8} source", "place", "inv").map_err(io)?;
    for e in &r.entries {
        writeln!(out, "{:<16} {:<8} {}", e.place.label(), e.inv.to_string(), e.source.name()).map_err(io)?;
    }
    writeln!(out, "global order: {}", r.global_order).map_err(io)?;
    let ok = localfield::product_formula_check(&r);
    writeln!(out, "product formula: {}", if ok { "ok" } else { "FAILS" }).map_err(io)?;
    Ok(())
}

fn level_of(c: &RunConfig) -> u32 {
    c.n.unwrap_or(c.curve.level())
}

fn norm_twist(run: &RunArgs, a: &str, b: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let c = run.load()?;
    let n = level_of(&c);
    let k = Cyclo::new(c.curve.level())?;
    let x = KummerPair::new(
        FactoredElem::from_base(parse_elem_arg(&k, a)?)?,
        FactoredElem::from_base(parse_elem_arg(&k, b)?)?,
        n,
    )?;
    let rep = GaloisRep::from_torsion(&c.curve, n)?;
    for (t, m) in &rep.mats {
        writeln!(out, "M_{t} = [[{}, {}], [{}, {}]]", m.i, m.j, m.k, m.l).map_err(io)?;
    }
    let (nm, f) = kummer::twisted_norm(&rep, &x)?;
    for (name, v) in [("c", &f.c), ("d", &f.d), ("c'", &f.c_prime), ("d'", &f.d_prime)] {
        writeln!(out, "{name} = {}", show(v)).map_err(io)?;
    }
    writeln!(out, "Nm = ({}, {})", show(&nm.a), show(&nm.b)).map_err(io)?;
    Ok(())
}

fn sieve(run: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let c = run.load()?;
    let n = level_of(&c);
    let pair = Sieve::new(&c.curve, n, c.mode, c.bounds)?.find_pair()?;
    for (name, pc) in [("v", &pair.v), ("v'", &pair.vp)] {
        writeln!(
            out,
            "{name} = {}:{} generator {}",
            pc.place.p,
            pc.place.omega,
            pc.pi.to_string_poly()
        )
        .map_err(io)?;
    }
    writeln!(out, "E(F_p) = Z/{} x Z/{}", pair.group.0, pair.group.1).map_err(io)?;
    Ok(())
}

fn context_of(c: &RunConfig, even: bool) -> Result<Context, CliError> {
    let n = c.n.ok_or_else(|| CliError::Usage(String::from("n is not set (use --n or params.n)")))?;
    let ell = c.ell.ok_or_else(|| CliError::Usage(String::from("ℓ is not set (use --ell or params.ell)")))?;
    Ok(Context {
        n,
        ell,
        mode: c.mode,
        route: if even { Route::Doubled } else { c.route },
        bounds: c.bounds,
        seed: c.seed,
    })
}

fn emit(cert: &Certificate, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let places: Vec<String> = cert.places().iter().map(|(p, q)| format!("({p}, {q})")).collect();
    writeln!(
        out,
        "period={} index={} places={}",
        cert.period(),
        cert.index(),
        places.join(" ")
    )
    .map_err(io)?;
    let text = certio::render(&cert.to_node());
    match dest {
        Some(p) => certio::write_atomic(p, &text),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn build(run: &RunArgs, even: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let c = run.load()?;
    let ctx = context_of(&c, even)?;
    let cert = construct::certify(&c.curve, &ctx)?;
    emit(&Certificate::Single(Box::new(cert)), c.out.as_deref(), out)
}

fn compose(a: &Path, b: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let ca = construct::certificate_from_node(&certio::read(a)?)?;
    let cb = construct::certificate_from_node(&certio::read(b)?)?;
    let c = construct::compose_coprime(&ca, &cb)?;
    emit(&c, dest, out)
}

fn verify(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let node = match certio::read(path) {
        Ok(n) => n,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let v = construct::verify_certificate(&node);
    if v.ok() {
        let _ = writeln!(out, "ok");
        0
    } else {
        for t in &v.trace {
            let _ = writeln!(err, "{t}");
        }
        1
    }
}
