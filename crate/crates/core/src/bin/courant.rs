//! Command-line front end.
//!
//! Exit status: 0 when the checked statement holds, 2 when a run finds a
//! violation, 1 on usage, configuration or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use courant::capacity::{self, DEFAULT_SOLVE_TOL};
use courant::counting::{NumericSpectrum, Spectrum};
use courant::eigensolver::{assemble_free, discrete_oracle, smallest_k, DEFAULT_TOL};
use courant::exact_spectra::{enumerate, ExactSpectrum, RectSpec, Scale};
use courant::fixtures::{self, Fixture};
use courant::grid::{rasterize, BBox, Shape};
use courant::lattice::{self, EllipseCount, DEFICIT_CSV_HEADER};
use courant::nodal::{self, AuditOptions, DEFAULT_ZERO_TOL};
use courant::partition_check as pc;
use courant::{image, rational, Error, VERSION};

#[derive(Debug, Parser, Serialize)]
#[command(name = "courant", version, about = "Dirichlet spectra, counting functions and nodal domains")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat `key=value` file; its entries act as flags given before the command line ones.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for PGM/PBM pictures.
    #[arg(long, global = true)]
    image: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Exact Dirichlet spectrum of a rectangle, κ(p1 m² + p2 n²) ≤ κ q_max.
    Spectrum(SpectrumArgs),
    /// Counting-function inequalities for a family of subdomains.
    Check(CheckArgs),
    /// Lowest eigenpairs on a grid fixture.
    Solve(SolveArgs),
    /// Nodal domains and the Courant bound on a grid fixture.
    Nodal(NodalArgs),
    /// Discrete capacities.
    Capacity(CapacityArgs),
    /// Lattice points in ellipses.
    Lattice(LatticeArgs),
    /// Equality cases of the split of the long rectangle into two squares.
    SharpScan(SharpScanArgs),
}

#[derive(Debug, Args, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    p1: String,
    #[arg(long)]
    p2: String,
    #[arg(long, default_value = "unit")]
    scale: String,
    #[arg(long)]
    qmax: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CheckMode {
    Main,
    Weak,
    Converse,
    Subset,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    #[arg(long)]
    lambda: String,
    #[arg(long, value_enum, default_value_t = CheckMode::Main)]
    mode: CheckMode,
    /// Built-in family; only `sec61-halves` carries one.
    #[arg(long)]
    fixture: Option<String>,
    /// Spectrum file of the ambient domain (exact or numeric JSON).
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Spectrum file of one member; repeat for each.
    #[arg(long = "sub")]
    subs: Vec<PathBuf>,
    /// Spectrum file of the reconstituted domain for `--mode subset`.
    #[arg(long)]
    star: Option<PathBuf>,
    /// Zero-based member indices for `--mode subset`, comma separated.
    #[arg(long, value_delimiter = ',')]
    subset: Vec<usize>,
    /// Check the subset identity rather than the inequality.
    #[arg(long)]
    equality: bool,
}

#[derive(Debug, Args, Serialize)]
struct SolveArgs {
    #[arg(long)]
    fixture: String,
    /// Cells per reference length.
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct NodalArgs {
    #[arg(long)]
    fixture: String,
    #[arg(long)]
    h: Option<usize>,
    /// Eigenvector to decompose (1-based).
    #[arg(long)]
    k: usize,
    /// Audit every eigenvector up to `k` instead.
    #[arg(long)]
    audit: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = courant::counting::DEFAULT_CLUSTER_TOL)]
    cluster_tol: f64,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CapacityMode {
    /// Inner disk relative to a concentric outer disk.
    Annulus,
    /// Single node at the centre of the unit disk along a spacing ladder.
    Polar,
    /// Regular boundary points of the split long rectangle at λ = 5.
    Capreg,
}

#[derive(Debug, Args, Serialize)]
struct CapacityArgs {
    #[arg(long, value_enum)]
    mode: CapacityMode,
    /// Cells per unit length for the annulus (default 128), per π for capreg (default 32).
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    outer: f64,
    #[arg(long, default_value_t = 0.125)]
    inner: f64,
    /// Cells per unit length for each rung.
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
    ladder: Vec<usize>,
    /// Probe radii in grid cells for capreg.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    radii: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
struct LatticeArgs {
    #[arg(long, default_value = "1/4")]
    a: String,
    #[arg(long, default_value = "1")]
    b: String,
    /// One or more energies, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
struct SharpScanArgs {
    #[arg(long)]
    lmax: String,
}

/// A finished run: the JSON result, its CSV and table renderings, and
/// whether the checked statement held.
struct Report {
    result: Value,
    csv: String,
    table: String,
    holds: bool,
}

impl Report {
    fn plain(result: Value, csv: String, table: String) -> Self {
        Report { result, csv, table, holds: true }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let args: Vec<String> = std::env::args().collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(holds) => ExitCode::from(if holds { 0 } else { 2 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Splices `--key value` pairs from a `--config` file in right after the
/// subcommand name, so explicit flags that follow take precedence.
fn with_config(args: Vec<String>) -> courant::Result<Vec<String>> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(args);
    };
    let path = match args[pos].split_once('=') {
        Some((_, p)) => p.to_string(),
        None => args
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Error::Parse("--config needs a file".into()))?,
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Parse(format!("cannot read config file {path}: {e}")))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{path}:{}: expected key=value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "config" {
            return Err(Error::Parse(format!("{path}:{}: config files cannot nest", n + 1)));
        }
        extra.push(format!("--{k}"));
        if !v.is_empty() && v != "true" {
            extra.push(v.to_string());
        }
    }
    let commands = ["spectrum", "check", "solve", "nodal", "capacity", "lattice", "sharp-scan"];
    let Some(cmd) = args.iter().skip(1).position(|a| commands.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut out = args[..cmd + 2].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[cmd + 2..]);
    Ok(out)
}

fn run(cli: &Cli) -> courant::Result<bool> {
    let (name, report) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", cmd_spectrum(a)?),
        Command::Check(a) => ("check", cmd_check(a)?),
        Command::Solve(a) => ("solve", cmd_solve(a, cli)?),
        Command::Nodal(a) => ("nodal", cmd_nodal(a, cli)?),
        Command::Capacity(a) => ("capacity", cmd_capacity(a)?),
        Command::Lattice(a) => ("lattice", cmd_lattice(a)?),
        Command::SharpScan(a) => ("sharp-scan", cmd_sharp_scan(a)?),
    };
    let config = serde_json::to_value(cli)?;
    let text = match cli.format {
        Format::Json => {
            let envelope = json!({
                "tool": "courant",
                "version": VERSION,
                "command": name,
                "config": config,
                "result": report.result,
            });
            serde_json::to_string_pretty(&envelope)? + "\n"
        }
        Format::Csv => format!("# courant {VERSION} {name}\n# config {config}\n{}", report.csv),
        Format::Table => format!("courant {VERSION} {name}\nconfig {config}\n\n{}", report.table),
    };
    match &cli.output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report.holds)
}

fn cmd_spectrum(a: &SpectrumArgs) -> courant::Result<Report> {
    let scale: Scale = a.scale.parse()?;
    let spec = RectSpec::new(rational::parse(&a.p1)?, rational::parse(&a.p2)?, scale)?;
    let s = enumerate(&spec, &rational::parse(&a.qmax)?)?;
    // index is that of the first eigenvalue of each cluster, counted with multiplicity
    let mut csv = String::from("index,q,multiplicity,modes\n");
    let mut first = 1;
    for e in s.entries() {
        let modes: Vec<String> = e.modes.iter().map(|m| format!("({} {})", m.m, m.n)).collect();
        csv.push_str(&format!("{},{},{},{}\n", first, rational::format(&e.q), e.multiplicity(), modes.join(" ")));
        first += e.multiplicity();
    }
    Ok(Report::plain(s.to_json(), csv, s.to_string()))
}

fn read_json(path: &Path) -> courant::Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read spectrum file {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

enum Loaded {
    Exact(ExactSpectrum),
    Numeric(NumericSpectrum),
}

fn load_spectrum(path: &Path) -> courant::Result<Loaded> {
    let v = read_json(path)?;
    if v.get("entries").is_some() {
        Ok(Loaded::Exact(ExactSpectrum::from_json(&v)?))
    } else if v.get("values").is_some() {
        Ok(Loaded::Numeric(NumericSpectrum::from_json(&v)?))
    } else {
        Err(Error::Parse(format!("{} is neither an exact nor a numeric spectrum", path.display())))
    }
}

fn cmd_check(a: &CheckArgs) -> courant::Result<Report> {
    if let Some(name) = &a.fixture {
        let fixture: Fixture = name.parse()?;
        if fixture != Fixture::Sec61Halves {
            return Err(Error::InvalidSpec(format!("fixture {} carries no subdomain family", fixture.name())));
        }
        let lambda = rational::parse(&a.lambda)?;
        let q_max = rational::to_f64(&lambda).max(0.0).ceil() as i64 + 1;
        let (big, subs) = fixtures::sec61_exact(q_max)?;
        let star = match a.subset.as_slice() {
            [_] => Some(subs[0].clone()),
            _ => Some(big.clone()),
        };
        return check_family(a, &big, &subs, star.as_ref(), &lambda);
    }
    let domain = a
        .domain
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("give --fixture or --domain with --sub files".into()))?;
    let spec0 = load_spectrum(domain)?;
    let subs: Vec<Loaded> = a.subs.iter().map(|p| load_spectrum(p)).collect::<courant::Result<_>>()?;
    let star = a.star.as_ref().map(|p| load_spectrum(p)).transpose()?;
    let mixed = || Error::Precondition("exact and numeric spectra cannot be mixed".into());
    match spec0 {
        Loaded::Exact(s0) => {
            let subs: Vec<ExactSpectrum> = subs
                .into_iter()
                .map(|l| if let Loaded::Exact(s) = l { Ok(s) } else { Err(mixed()) })
                .collect::<courant::Result<_>>()?;
            let star = match star {
                None => None,
                Some(Loaded::Exact(s)) => Some(s),
                Some(_) => return Err(mixed()),
            };
            check_family(a, &s0, &subs, star.as_ref(), &rational::parse(&a.lambda)?)
        }
        Loaded::Numeric(s0) => {
            let subs: Vec<NumericSpectrum> = subs
                .into_iter()
                .map(|l| if let Loaded::Numeric(s) = l { Ok(s) } else { Err(mixed()) })
                .collect::<courant::Result<_>>()?;
            let star = match star {
                None => None,
                Some(Loaded::Numeric(s)) => Some(s),
                Some(_) => return Err(mixed()),
            };
            let lambda: f64 = a
                .lambda
                .parse()
                .map_err(|_| Error::Parse(format!("bad energy {:?}", a.lambda)))?;
            check_family(a, &s0, &subs, star.as_ref(), &lambda)
        }
    }
}

fn check_family<S: Spectrum>(
    a: &CheckArgs,
    spec0: &S,
    subs: &[S],
    star: Option<&S>,
    lambda: &S::Energy,
) -> courant::Result<Report> {
    let (value, holds, banner) = match a.mode {
        CheckMode::Main => {
            let r = pc::check_main(spec0, subs, lambda)?;
            let banner = match (r.holds, r.equality) {
                (false, _) => "VIOLATION",
                (true, true) => "EQUALITY",
                (true, false) => "holds",
            };
            (serde_json::to_value(&r)?, r.holds, banner)
        }
        CheckMode::Weak => {
            let r = pc::check_weak(spec0, subs, lambda)?;
            (serde_json::to_value(&r)?, r.holds, if r.holds { "holds" } else { "VIOLATION" })
        }
        CheckMode::Converse => {
            let r = pc::check_converse(spec0, subs, lambda)?;
            (serde_json::to_value(&r)?, r.holds, if r.holds { "holds" } else { "VIOLATION" })
        }
        CheckMode::Subset => {
            let star = star.ok_or_else(|| Error::InvalidSpec("--mode subset needs --star".into()))?;
            let r = pc::check_subset(spec0, subs, &a.subset, star, lambda, a.equality)?;
            (serde_json::to_value(&r)?, r.holds, if r.holds { "holds" } else { "VIOLATION" })
        }
    };
    info!("{banner}");
    let mut table = format!("{banner}\n");
    let mut csv = String::from("key,value\n");
    if let Value::Object(map) = &value {
        for (k, v) in map {
            table.push_str(&format!("{k:>20}  {v}\n"));
            csv.push_str(&format!("{k},\"{}\"\n", v.to_string().replace('"', "'")));
        }
    }
    let mut value = value;
    value["banner"] = json!(banner);
    Ok(Report { result: value, csv, table, holds })
}

fn fixture_grid(name: &str, h: Option<usize>) -> courant::Result<(Fixture, courant::grid::GridGeometry, usize)> {
    let f: Fixture = name.parse()?;
    let res = h.unwrap_or_else(|| f.default_resolution());
    Ok((f, f.grid(res)?, res))
}

fn image_dir(cli: &Cli) -> courant::Result<Option<&Path>> {
    if let Some(dir) = &cli.image {
        fs::create_dir_all(dir)?;
    }
    Ok(cli.image.as_deref())
}

fn cmd_solve(a: &SolveArgs, cli: &Cli) -> courant::Result<Report> {
    let (f, g, res) = fixture_grid(&a.fixture, a.h)?;
    info!("{}: {} unknowns at {} cells per reference length", f.name(), g.count(), res);
    let op = assemble_free(&g)?;
    let pairs = smallest_k(&op, a.k, a.tol, cli.seed)?;
    // rectangles have a closed-form discrete spectrum
    let oracle = match f {
        Fixture::LShape => None,
        _ => {
            let nodes = g.nodes();
            let (i0, j0) = g.ij(nodes[0]);
            let (i1, j1) = g.ij(*nodes.last().unwrap_or(&0));
            Some(discrete_oracle(i1 - i0 + 1, j1 - j0 + 1, g.h(), a.k))
        }
    };
    if let Some(dir) = image_dir(cli)? {
        for (i, p) in pairs.iter().enumerate() {
            fs::write(dir.join(format!("{}-u{}.pgm", f.name(), i + 1)), image::amplitude_pgm(&g, &p.vector))?;
        }
        image::save_geometry(&g, &dir.join(f.name()))?;
    }
    let mut csv = String::from("k,value,residual,oracle\n");
    let mut table = format!("{:>3}  {:>22}  {:>10}  {:>22}\n", "k", "value", "residual", "oracle");
    for (i, p) in pairs.iter().enumerate() {
        let o = oracle.as_ref().map(|o| o[i].to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{:e},{}\n", i + 1, p.value, p.residual, o));
        table.push_str(&format!("{:>3}  {:>22}  {:>10.3e}  {:>22}\n", i + 1, p.value, p.residual, o));
    }
    let result = json!({
        "fixture": f.name(),
        "resolution": res,
        "h": g.h(),
        "unknowns": g.count(),
        "values": pairs.iter().map(|p| p.value).collect::<Vec<_>>(),
        "residuals": pairs.iter().map(|p| p.residual).collect::<Vec<_>>(),
        "oracle": oracle,
    });
    Ok(Report::plain(result, csv, table))
}

fn cmd_nodal(a: &NodalArgs, cli: &Cli) -> courant::Result<Report> {
    let (f, g, res) = fixture_grid(&a.fixture, a.h)?;
    let op = assemble_free(&g)?;
    let opts = AuditOptions { tol: a.tol, seed: cli.seed, cluster_tol: a.cluster_tol, zero_tol: a.zero_tol };
    let (audit, pairs) = nodal::courant_audit_with_pairs(&op, a.k, opts)?;
    let mut csv = String::from("k,value,mu,n_lower,n,n_upper,cluster_size,holds,sharp\n");
    let mut table = format!("{:>3}  {:>14}  {:>3}  {:>3}  {:>5}  {:>5}\n", "k", "value", "mu", "n", "holds", "sharp");
    let shown: Vec<_> = if a.audit { audit.entries.iter().collect() } else { audit.entries.last().into_iter().collect() };
    for e in &shown {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            e.k, e.value, e.mu, e.n_lower, e.n_mid, e.n_upper, e.cluster_size, e.holds, e.sharp
        ));
        table.push_str(&format!("{:>3}  {:>14.8}  {:>3}  {:>3}  {:>5}  {:>5}\n", e.k, e.value, e.mu, e.n_mid, e.holds, e.sharp));
    }

    // nodal lines of the requested eigenvector along the middle row
    let u = &pairs[a.k - 1];
    let decomp = nodal::extract(&u.vector, &g, a.zero_tol)?;
    let mid_row = g.ij(g.nodes()[g.count() / 2]).1;
    let abscissas = decomp.nodal_abscissas_on_row(mid_row);
    if let Some(dir) = image_dir(cli)? {
        fs::write(dir.join(format!("{}-nodal{}.pgm", f.name(), a.k)), decomp.to_pgm())?;
        fs::write(dir.join(format!("{}-u{}.pgm", f.name(), a.k)), image::amplitude_pgm(&g, &u.vector))?;
    }
    let holds = if a.audit { audit.holds } else { shown.iter().all(|e| e.holds) };
    let result = json!({
        "fixture": f.name(),
        "resolution": res,
        "h": g.h(),
        "k": a.k,
        "mu": decomp.mu(),
        "nodal_nodes": decomp.nodal_nodes().len(),
        "mid_row_y": g.xy(g.index(0, mid_row)).1,
        "mid_row_nodal_abscissas": abscissas,
        "audit": if a.audit { serde_json::to_value(&audit)? } else { serde_json::to_value(shown)? },
        "holds": holds,
    });
    Ok(Report { result, csv, table, holds })
}

fn cmd_capacity(a: &CapacityArgs) -> courant::Result<Report> {
    match a.mode {
        CapacityMode::Annulus => {
            if !(a.inner > 0.0 && a.inner < a.outer) {
                return Err(Error::InvalidSpec("need 0 < inner < outer".into()));
            }
            let h = 1.0 / a.h.unwrap_or(128) as f64;
            let r = a.outer;
            let g = rasterize(&Shape::disk(0.0, 0.0, r), BBox { x0: -r - h, y0: -r - h, x1: r + h, y1: r + h }, h)?;
            let set: Vec<bool> = (0..g.len())
                .map(|i| {
                    let (x, y) = g.xy(i);
                    g.mask()[i] && x.hypot(y) < a.inner
                })
                .collect();
            let c = capacity::capacity(&g, &set, DEFAULT_SOLVE_TOL)?;
            let exact = 2.0 * std::f64::consts::PI / (a.outer / a.inner).ln();
            let rel = (c.capacity - exact) / exact;
            let csv = format!("h,capacity,flux,continuum,relative_error\n{h},{},{},{exact},{rel}\n", c.capacity, c.flux);
            let table = format!("capacity {}\nflux     {}\ncontinuum {exact}\nrelative error {rel:.3e}\n", c.capacity, c.flux);
            let result = json!({ "h": h, "result": c, "continuum": exact, "relative_error": rel });
            Ok(Report::plain(result, csv, table))
        }
        CapacityMode::Polar => {
            let ladder: Vec<f64> = a.ladder.iter().map(|&n| 1.0 / n as f64).collect();
            let p = capacity::polar_scaling(&ladder)?;
            let mut csv = String::from("h,capacity\n");
            let mut table = String::new();
            for pt in &p.points {
                csv.push_str(&format!("{},{}\n", pt.h, pt.capacity));
                table.push_str(&format!("{:>12}  {}\n", pt.h, pt.capacity));
            }
            table.push_str(&format!(
                "c/ln(1/h): c = {:.6}, R² = {:.6} (uncentred {:.6})\n1/Cap = α ln(1/h) + β: α = {:.6}, β = {:.6}, R² = {:.8}\n",
                p.c, p.r_squared, p.r_squared_uncentered, p.alpha, p.beta, p.r_squared_offset
            ));
            let holds = p.strictly_decreasing;
            Ok(Report { result: serde_json::to_value(&p)?, csv, table, holds })
        }
        CapacityMode::Capreg => {
            let family = fixtures::sec61_halves_grid(a.h.unwrap_or(32))?;
            let g = family.parent().clone();
            let op = assemble_free(&g)?;
            // λ = 5 is the 5th and 6th eigenvalue of the long rectangle
            let pairs = smallest_k(&op, 6, 1e-12, 0)?;
            let u = &pairs[4].vector;
            let decomp = nodal::extract(u, &g, DEFAULT_ZERO_TOL)?;
            let radii: Vec<f64> = a.radii.iter().map(|&r| r as f64 * g.h()).collect();
            let r = capacity::verify_capreg(u, &decomp, &family, &radii)?;
            let table = format!(
                "checked {}  regular {}  violations {}  domains {} / {}  mismatches {}\n",
                r.checked,
                r.regular,
                r.violations.len(),
                r.domains_of_u,
                r.domains_of_members,
                r.corollary_mismatches
            );
            let csv = format!(
                "checked,regular,violations,domains_of_u,domains_of_members,mismatches\n{},{},{},{},{},{}\n",
                r.checked,
                r.regular,
                r.violations.len(),
                r.domains_of_u,
                r.domains_of_members,
                r.corollary_mismatches
            );
            let holds = r.holds;
            Ok(Report { result: serde_json::to_value(&r)?, csv, table, holds })
        }
    }
}

fn cmd_lattice(a: &LatticeArgs) -> courant::Result<Report> {
    let (ea, eb) = (rational::parse(&a.a)?, rational::parse(&a.b)?);
    let mut counts = Vec::new();
    let mut deficits = Vec::new();
    let mut csv = format!("{DEFICIT_CSV_HEADER}\n");
    let mut table = String::new();
    for l in &a.lambda {
        let lambda = rational::parse(l)?;
        let c = EllipseCount::new(&ea, &eb, &lambda)?;
        let d = lattice::deficit(&lambda);
        csv.push_str(&d.csv_row());
        csv.push('\n');
        table.push_str(&format!(
            "λ = {}: A = {}, A+ = {}; deficit {} (ratio {:.4})\n",
            c.lambda, c.full.0, c.positive.0, d.deficit.0, d.ratio
        ));
        counts.push(c);
        deficits.push(d);
    }
    let result = json!({ "counts": counts, "deficits": deficits });
    Ok(Report::plain(result, csv, table))
}

fn cmd_sharp_scan(a: &SharpScanArgs) -> courant::Result<Report> {
    let s = lattice::sharpness_scan(&rational::parse(&a.lmax)?)?;
    let csv = format!("lambda\n{}\n", s.equalities.join("\n"));
    let table = format!(
        "{} eigenvalues checked up to {}; equality at {}; last equality {}; top half quiet: {}\n",
        s.checked,
        s.lambda_max,
        s.equalities.join(", "),
        s.cutoff.as_deref().unwrap_or("none"),
        s.top_half_quiet
    );
    Ok(Report::plain(serde_json::to_value(&s)?, csv, table))
}
