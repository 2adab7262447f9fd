//! Command-line front end: argument parsing, report rendering and exit codes.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation hits a limit, 2 on usage or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bounds::{f_closed, frak_m, m_threshold, Kind, RecursiveBounds, DEFAULT_DEPTH_CAP};
use crate::coeffs::{ExactRational, PrimeContext};
use crate::error::{Error, Result};
use crate::gamma_action::{scalar_for, GroupElement};
use crate::homology::{build_cube, condition_c0_check, Iota, KoszulComplex, ModuleSpec, SemilinearModule};
use crate::phi_psi::{psi, psi_window};
use crate::series::{SeriesContext, TruncatedSeries};
use crate::verify::{default_guard, order_histogram, run_all};

#[derive(Debug, Parser)]
#[command(name = "phigamma", version, about = "Truncated period rings, psi, bounds and Koszul cohomology")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args, Clone)]
pub struct RingArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,
    /// Truncation in both variables.
    #[arg(long = "M", default_value_t = 9)]
    pub m: usize,
    #[arg(long = "Mx")]
    pub mx: Option<usize>,
    #[arg(long = "My")]
    pub my: Option<usize>,
}

impl RingArgs {
    fn sctx(&self) -> Result<SeriesContext> {
        let ctx = PrimeContext::new(self.p, self.n)?;
        SeriesContext::new(ctx, self.mx.unwrap_or(self.m), self.my.unwrap_or(self.m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    #[value(name = "M")]
    M,
    #[value(name = "frakM")]
    FrakM,
    #[value(name = "M1")]
    M1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelSide {
    Lateral,
    Vertical,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suites.
    Verify {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long = "guard-degree")]
        guard_degree: Option<usize>,
    },
    /// Tables of the valuation bounds.
    Bounds {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, value_enum, default_value_t = Table::M)]
        table: Table,
        #[arg(long = "max-n", default_value_t = 8)]
        max_n: u64,
        #[arg(long = "depth-cap", default_value_t = DEFAULT_DEPTH_CAP)]
        depth_cap: u32,
    },
    /// Apply `tau^m gamma_a` to a series.
    Act {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        expr: String,
        /// Exponent of `tau`.
        #[arg(long = "m", id = "tau_exponent", default_value_t = 0, allow_hyphen_values = true)]
        m: i64,
        /// Index of `gamma_a`; must be prime to `p`.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
    },
    /// Apply `psi` to a series.
    Psi {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        expr: String,
        /// Also print the projection to the window where `psi` is well defined.
        #[arg(long)]
        window: bool,
    },
    /// Build the cube of a module and run the requested checks.
    Complex {
        /// Module file; the trivial rank-1 module of the given ring when absent.
        module: Option<PathBuf>,
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long = "check-d2")]
        check_d2: bool,
        #[arg(long)]
        cohomology: Vec<usize>,
        #[arg(long, value_enum)]
        kernel: Option<KernelSide>,
        #[arg(long = "psi-complex")]
        psi_complex: bool,
        #[arg(long = "phi-map")]
        phi_map: bool,
    },
    /// Triple kernel `psi = 0, gamma = 1, tau = 1` of a module.
    Kernel {
        module: Option<PathBuf>,
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long = "guard-degree", default_value_t = 2)]
        guard_degree: usize,
    },
}

/// A finished command: pass/fail, structured data and its text rendering.
struct Outcome {
    passed: bool,
    data: Value,
    text: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{e}");
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            let _ = match cli.format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&o.data).unwrap_or_default()),
                Format::Text => write!(out, "{}", o.text),
            };
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidContext(..) | Error::InvalidModule(_) | Error::Dimension(_) => 2,
        _ => 1,
    }
}

/// Reads and validates a module file.
pub fn load_module_spec(path: &Path) -> Result<SemilinearModule> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { position: 0, message: format!("{}: {e}", path.display()) })?;
    let spec: ModuleSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { position: e.column(), message: format!("{}: {e}", path.display()) })?;
    SemilinearModule::from_spec(&spec)
}

fn module_or_trivial(path: &Option<PathBuf>, ring: &RingArgs) -> Result<SemilinearModule> {
    match path {
        Some(p) => load_module_spec(p),
        None => {
            let s = ring.sctx()?;
            SemilinearModule::trivial(s, 1, scalar_for(&s, 1 + s.p() as i64))
        }
    }
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Verify { ring, seed, trials, guard_degree } => verify(ring, *seed, *trials, *guard_degree),
        Command::Bounds { p, table, max_n, depth_cap } => bounds(*p, *table, *max_n, *depth_cap),
        Command::Act { ring, expr, m, a } => act(ring, expr, *m, *a),
        Command::Psi { ring, expr, window } => psi_cmd(ring, expr, *window),
        Command::Complex { module, ring, check_d2, cohomology, kernel, psi_complex, phi_map } => {
            let d = module_or_trivial(module, ring)?;
            complex(&d, *check_d2, cohomology, *kernel, *psi_complex, *phi_map)
        }
        Command::Kernel { module, ring, guard_degree } => {
            let d = module_or_trivial(module, ring)?;
            let r = condition_c0_check(&d, *guard_degree)?;
            let text = format!(
                "guard {}: guarded triple kernel {} [{}]\nfull triple kernel {}\nker(gamma - 1) {}\nker(tau - 1) {}\n",
                r.guard,
                order_histogram(&r.guarded_kernel),
                pass_word(r.passed()),
                order_histogram(&r.full_kernel),
                order_histogram(&r.gamma_kernel),
                order_histogram(&r.tau_kernel)
            );
            let passed = r.passed();
            Ok(Outcome { passed, data: json!({ "passed": passed, "report": r }), text })
        }
    }
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify(ring: &RingArgs, seed: u64, trials: usize, guard: Option<usize>) -> Result<Outcome> {
    let sctx = ring.sctx()?;
    let guard = guard.unwrap_or_else(|| default_guard(&sctx));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = run_all(&mut rng, sctx, trials, guard)?;
    let passed = reports.iter().all(|r| r.passed);
    let mut text = format!("seed {seed}, guard {guard}\n");
    for r in &reports {
        text.push_str(&format!("{} {} ({} cases)\n", pass_word(r.passed), r.name, r.cases));
        for f in &r.failures {
            text.push_str(&format!("  counterexample: {f}\n"));
        }
        for n in &r.notes {
            text.push_str(&format!("  note: {n}\n"));
        }
    }
    let data = json!({ "seed": seed, "guard": guard, "passed": passed, "suites": reports });
    Ok(Outcome { passed, data, text })
}

fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([headers[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        format!("{}\n", parts.join("  ").trim_end())
    };
    let mut s = line(headers.to_vec());
    for r in rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    s
}

fn bounds(p: u64, table: Table, max_n: u64, depth_cap: u32) -> Result<Outcome> {
    let ctx = PrimeContext::new(p, 1)?;
    let mut passed = true;
    let (headers, rows): (Vec<&str>, Vec<Vec<String>>) = match table {
        Table::M => (vec!["n", "M(n)"], (0..=max_n).map(|n| vec![n.to_string(), m_threshold(n, &ctx).to_string()]).collect()),
        Table::FrakM => {
            let mut rows = Vec::new();
            for k in 0..=2 * max_n {
                let t = ExactRational::new(k, 2u64);
                rows.push(vec![t.to_string(), frak_m(&t, &ctx)?.to_string()]);
            }
            (vec!["t", "frakM(t)"], rows)
        }
        Table::M1 => {
            let c = ExactRational::new(p, p - 1);
            let mut memo = RecursiveBounds::new(ctx, depth_cap);
            let mut rows = Vec::new();
            for i in 0..=max_n {
                let m1 = memo.eval(Kind::One, i as u32, &c)?;
                let f1 = f_closed(Kind::One, i, &c, &ctx);
                passed &= m1 <= f1;
                rows.push(vec![i.to_string(), c.to_string(), m1.to_string(), f1.to_string()]);
            }
            (vec!["i", "c", "M1", "F1"], rows)
        }
    };
    let data = json!({
        "p": p,
        "table": headers,
        "rows": rows,
        "passed": passed,
    });
    Ok(Outcome { passed, data, text: render_table(&headers, &rows) })
}

fn act(ring: &RingArgs, expr: &str, m: i64, a: i64) -> Result<Outcome> {
    let sctx = ring.sctx()?;
    let f = TruncatedSeries::parse(sctx, expr)?;
    let g = GroupElement::from_integers(sctx.p(), m, a, GroupElement::required_precision(&sctx))?;
    let v = g.act(&f)?;
    let data = json!({ "element": g.to_string(), "input": f.to_json(), "output": v.to_json(), "text": v.render() });
    Ok(Outcome { passed: true, data, text: format!("{}\n", v.render()) })
}

fn psi_cmd(ring: &RingArgs, expr: &str, window: bool) -> Result<Outcome> {
    let sctx = ring.sctx()?;
    let f = TruncatedSeries::parse(sctx, expr)?;
    let v = psi(&f);
    let (wx, wy) = psi_window(&sctx);
    let mut text = format!("{}\n", v.render());
    let mut data = json!({ "output": v.to_json(), "text": v.render(), "window": [wx, wy] });
    if window {
        let w = v.project(wx, wy);
        text.push_str(&format!("window ({wx}, {wy}): {}\n", w.render()));
        data["projected"] = json!(w.render());
    }
    Ok(Outcome { passed: true, data, text })
}

fn complex_summary(c: &KoszulComplex, degrees: &[usize]) -> Result<Value> {
    let mut h = serde_json::Map::new();
    for &d in degrees {
        h.insert(d.to_string(), json!(c.cohomology(d)?));
    }
    Ok(json!({ "dims": c.dims(), "cohomology": h }))
}

fn complex(
    d: &SemilinearModule,
    check_d2: bool,
    cohomology: &[usize],
    kernel: Option<KernelSide>,
    psi_complex: bool,
    phi_map: bool,
) -> Result<Outcome> {
    let cube = build_cube(d)?;
    let mut passed = true;
    let mut text = format!("cube dims {:?}\n", cube.complex.dims());
    let mut data = json!({ "rank": d.rank(), "dims": cube.complex.dims() });
    if check_d2 {
        let ok = cube.complex.check_d2().is_ok();
        passed &= ok;
        text.push_str(&format!("d^2 = 0: {}\n", pass_word(ok)));
        data["d2"] = json!(ok);
    }
    if !cohomology.is_empty() {
        let summary = complex_summary(&cube.complex, cohomology)?;
        for &i in cohomology {
            text.push_str(&format!("H^{i}: {}\n", summary["cohomology"][i.to_string()]));
        }
        data["cohomology"] = summary["cohomology"].clone();
    }
    if let Some(side) = kernel {
        let which = match side {
            KernelSide::Lateral => Iota::PInfinity,
            KernelSide::Vertical => Iota::Infinity,
        };
        let (sub, iota) = cube.iota(which)?;
        let d2 = sub.check_d2().is_ok();
        let law = iota.check_chain_law(&sub, &cube.complex, None)?;
        let inj = iota.is_injective(&sub)?;
        passed &= d2 && law && inj;
        let summary = complex_summary(&sub, cohomology)?;
        text.push_str(&format!(
            "kernel complex: d^2 = 0 {}, chain map {}, injective {}\n",
            pass_word(d2),
            pass_word(law),
            pass_word(inj)
        ));
        for &i in cohomology {
            text.push_str(&format!("  H^{i}: {}\n", summary["cohomology"][i.to_string()]));
        }
        data["kernel"] = json!({ "d2": d2, "chain_map": law, "injective": inj, "summary": summary });
    }
    let rows = cube.window_rows();
    if psi_complex {
        let ok = cube.psi_complex()?.check_d2_on_rows(Some(&rows)).is_ok();
        passed &= ok;
        text.push_str(&format!("psi-complex d^2 = 0 on the window: {}\n", pass_word(ok)));
        data["psi_complex_d2"] = json!(ok);
    }
    if phi_map {
        let target = cube.psi_complex()?;
        let phi = cube.phi_map()?;
        let law = phi.check_chain_law(&cube.complex, &target, Some(&rows))?;
        let onto = cube.phi_map_onto_window()?;
        passed &= law && onto;
        text.push_str(&format!("Phi chain map on the window: {}\nPhi onto the window: {}\n", pass_word(law), pass_word(onto)));
        data["phi_map"] = json!({ "chain_map": law, "onto_window": onto });
    }
    data["passed"] = json!(passed);
    Ok(Outcome { passed, data, text })
}
