//! `revring` command-line front end.
//!
//! Exit codes: 0 success, 1 mathematical failure, 2 usage or I/O error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use revring::curves::{CurveFamily, FamilyKind, DEFAULT_RESOLUTION, DEFAULT_TOLERANCE};
use revring::modulus::{
    admissibility_report, analytic_modulus, numeric_modulus, restricted_oracle, AdmissibilitySummary, Density,
    ModulusReport, OracleSummary, RevolutionRing, DEFAULT_SLACK,
};
use revring::profile::{catalog, parse_profile, validate, CatalogName, ConditionCheck, ProfileCurve, ValidationReport};
use revring::surface::SurfacePatch;
use revring::Error;

const DEFAULT_CURVES: &str = "200";
const DEFAULT_VALIDATION_GRID: usize = 4096;
const DEFAULT_GEOMETRY_GRID: usize = 256;
const DEFAULT_MESH_GRID: usize = 128;
const DEFAULT_ORACLE_BINS: usize = 64;
const AREA_PANELS: usize = 16;
/// Fraction of the profile domain trimmed from each end for flow curves.
const FLOW_TRIM: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(name = "revring", version, about = "Surfaces of revolution, revolution rings and their modulus in the Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a profile curve against the ring conditions.
    Validate(Common),
    /// Compare the numerical modulus of a revolution ring with the closed form.
    Modulus(ModulusArgs),
    /// Profile table, horizontal area and optional Legendrian flow curve.
    Geometry(GeometryArgs),
    /// Triangulated surface as Wavefront OBJ plus per-vertex CSV.
    ExportMesh(MeshArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SurfaceArg {
    Koranyi,
    Bubble,
    Cc,
}

impl From<SurfaceArg> for CatalogName {
    fn from(s: SurfaceArg) -> Self {
        match s {
            SurfaceArg::Koranyi => CatalogName::KoranyiSphere,
            SurfaceArg::Bubble => CatalogName::BubbleSet,
            SurfaceArg::Cc => CatalogName::CcSphere,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Catalog surface.
    #[arg(long, value_enum, conflicts_with = "profile", required_unless_present = "profile")]
    surface: Option<SurfaceArg>,
    /// Size parameter of the catalog surface.
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
    /// Profile file (`f = …; g = …; domain = (…, …)`).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Sample count for grids.
    #[arg(long)]
    grid: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Machine-readable JSON instead of the table.
    #[arg(long)]
    json: bool,
    /// CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModulusArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Random boundary-connecting curves for the admissibility check.
    #[arg(long, num_args = 0..=1, default_missing_value = DEFAULT_CURVES)]
    curves: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per curve (even).
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Also run the restricted minimisation over radial profiles.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[command(flatten)]
    common: Common,
    /// Start of a flow curve as `s0,phi0`.
    #[arg(long, value_parser = parse_pair)]
    flow: Option<(f64, f64)>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct MeshArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `s0,phi0`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Math(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Math(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Math(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

type Outcome = Result<bool, Failure>;

fn load_profile(c: &Common) -> Result<ProfileCurve, Failure> {
    if !(c.r > 0.0 && c.r.is_finite()) {
        return Err(Failure::Usage(format!("--R must be positive, got {}", c.r)));
    }
    match (&c.profile, c.surface) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "custom".into());
            let p = parse_profile(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok(p.with_name(name))
        }
        (None, Some(s)) => Ok(catalog(s.into(), c.r)?),
        (None, None) => Err(Failure::Usage("one of --surface or --profile is required".into())),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path).map_err(|e| io_failure(path, e))?))
}

fn header(cmd: &str, profile: &ProfileCurve, settings: &[(&str, String)]) {
    let params: Vec<String> = profile.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("revring {cmd}: surface {} ({})", profile.name(), params.join(", "));
    let s: Vec<String> = settings.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("settings: {}", s.join(" "));
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn check_row(name: &str, c: &ConditionCheck) {
    let verdict = if c.pass { "pass" } else { "FAIL" };
    let witness = c.witness.map(|w| format!("{w:.12e}")).unwrap_or_else(|| "-".into());
    println!("  {name:<20} {verdict:<6} {witness:<22} {}", c.detail);
}

#[derive(Serialize)]
struct ValidateJson<'a> {
    settings: Settings,
    all_pass: bool,
    report: &'a ValidationReport,
}

#[derive(Serialize)]
struct Settings {
    tol: f64,
    curves: Option<usize>,
    resolution: usize,
    seed: u64,
    grid: usize,
}

fn cmd_validate(c: &Common) -> Outcome {
    let profile = load_profile(c)?;
    let grid = c.grid.unwrap_or(DEFAULT_VALIDATION_GRID);
    let rep = validate(&profile, grid)?;
    if c.json {
        let settings = Settings {
            tol: c.tol,
            curves: None,
            resolution: DEFAULT_RESOLUTION,
            seed: 0,
            grid,
        };
        print_json(&ValidateJson {
            settings,
            all_pass: rep.all_pass(),
            report: &rep,
        })?;
    } else {
        header("validate", &profile, &[("grid", grid.to_string()), ("tol", format!("{:e}", c.tol))]);
        println!("  {:<20} {:<6} {:<22} detail", "condition", "result", "witness");
        check_row("regularity", &rep.regular);
        check_row("(A1) f > 0", &rep.a1);
        check_row("(A2) g decreasing", &rep.a2);
        check_row("arg p* increasing", &rep.beta_monotone);
        println!("  min f {:.6e}  min -g' {:.6e}  min beta' {:.6e}", rep.min_f, rep.min_neg_dg, rep.min_beta_dot);
        println!(
            "  end limits f {:.3e} {:.3e}  g {:.6e} {:.6e}",
            rep.f_limits[0], rep.f_limits[1], rep.g_limits[0], rep.g_limits[1]
        );
        println!("result: {}", if rep.all_pass() { "pass" } else { "fail" });
    }
    Ok(rep.all_pass())
}

#[derive(Serialize)]
struct ModulusJson {
    settings: Settings,
    #[serde(flatten)]
    report: ModulusReport,
    pass: bool,
}

fn cmd_modulus(m: &ModulusArgs) -> Outcome {
    let c = &m.common;
    if !(m.a > 0.0 && m.a < m.b && m.b.is_finite()) {
        return Err(Failure::Usage(format!("need 0 < --a < --b, got a = {}, b = {}", m.a, m.b)));
    }
    if !(c.tol > 0.0) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", c.tol)));
    }
    let profile = load_profile(c)?;
    let ring = RevolutionRing::new(&profile, m.a, m.b)?;
    let analytic = analytic_modulus(m.a, m.b)?;
    let numeric = numeric_modulus(&ring, c.tol)?.value;
    let rel_err = (numeric - analytic).abs() / analytic;
    let mut pass = rel_err <= c.tol;

    let admissibility = match m.curves {
        Some(n) => {
            let fam = CurveFamily::generate(&ring, FamilyKind::RandomSeeds { first_seed: m.seed, count: n }, m.resolution)?;
            let rep = admissibility_report(&fam, &Density::rho0(&ring), DEFAULT_SLACK)?;
            pass &= rep.pass;
            Some(AdmissibilitySummary {
                n: rep.n,
                min: rep.min,
                mean: rep.mean,
            })
        }
        None => None,
    };
    let bins = c.grid.unwrap_or(DEFAULT_ORACLE_BINS);
    let oracle = if m.oracle {
        let o = restricted_oracle(&ring, bins, m.seed)?;
        Some(OracleSummary {
            value: o.value,
            max_dev_from_uniform: o.max_dev_from_uniform,
        })
    } else {
        None
    };
    let report = ModulusReport {
        surface: profile.name().to_string(),
        a: m.a,
        b: m.b,
        analytic,
        numeric,
        rel_err,
        admissibility,
        oracle,
    };
    let settings = Settings {
        tol: c.tol,
        curves: m.curves,
        resolution: m.resolution,
        seed: m.seed,
        grid: bins,
    };
    if c.json {
        print_json(&ModulusJson { settings, report, pass })?;
    } else {
        let curves = m.curves.map_or_else(|| "off".to_string(), |n| n.to_string());
        header(
            "modulus",
            &profile,
            &[
                ("a", m.a.to_string()),
                ("b", m.b.to_string()),
                ("tol", format!("{:e}", c.tol)),
                ("curves", curves),
                ("resolution", m.resolution.to_string()),
                ("seed", m.seed.to_string()),
            ],
        );
        println!("  {:<28} {:>22}", "analytic pi^2/log(b/a)^3", format!("{analytic:.12}"));
        println!("  {:<28} {:>22}", "numeric", format!("{numeric:.12}"));
        println!("  {:<28} {:>22}", "relative error", format!("{rel_err:.3e}"));
        if let Some(a) = &report.admissibility {
            println!("  {:<28} {:>22}", "curves", a.n);
            println!("  {:<28} {:>22}", "min line integral", format!("{:.9}", a.min));
            println!("  {:<28} {:>22}", "mean line integral", format!("{:.9}", a.mean));
        }
        if let Some(o) = &report.oracle {
            println!("  {:<28} {:>22}", format!("oracle ({bins} bins)"), format!("{:.12}", o.value));
            println!("  {:<28} {:>22}", "oracle max |hL - 1|", format!("{:.3e}", o.max_dev_from_uniform));
        }
        println!("result: {}", if pass { "pass" } else { "fail" });
    }
    Ok(pass)
}

fn cmd_geometry(g: &GeometryArgs) -> Outcome {
    let c = &g.common;
    let profile = load_profile(c)?;
    let patch = SurfacePatch::new(profile.clone(), g.scale)?;
    let area = patch.horizontal_area(AREA_PANELS)?;
    let grid = c.grid.unwrap_or(DEFAULT_GEOMETRY_GRID);
    let mut indeterminate = 0usize;
    if let Some(path) = &c.csv {
        let mut w = create(path)?;
        let io = |e| io_failure(path, e);
        writeln!(w, "s,f,g,nh_norm,hh,status").map_err(io)?;
        for s in patch.s_grid(grid) {
            let j = profile.jet(s)?;
            let nh = patch.horizontal_normal(s, 0.0)?.norm();
            let (hh, status) = match patch.mean_curvature(s) {
                Ok(h) => (format!("{h:.17e}"), "ok"),
                Err(Error::IndeterminateCurvature { .. }) => {
                    indeterminate += 1;
                    ("nan".to_string(), "indeterminate")
                }
                Err(e) => return Err(e.into()),
            };
            writeln!(w, "{s:.17e},{:.17e},{:.17e},{nh:.17e},{hh},{status}", j.f, j.g).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    let mut flow_info = None;
    if let Some((s0, phi0)) = g.flow {
        let (lo, hi) = profile.domain();
        let trim = FLOW_TRIM * (hi - lo);
        let span = (lo + trim, hi - trim);
        if !(span.0 <= s0 && s0 <= span.1) {
            return Err(Failure::Usage(format!("--flow s0 = {s0} must lie in [{}, {}]", span.0, span.1)));
        }
        let curve = patch.flow_curve(s0, phi0, span, g.resolution)?;
        let path = c.out.clone().unwrap_or_else(|| PathBuf::from("flow.csv"));
        let mut w = create(&path)?;
        curve.write_csv(&mut w)?;
        w.flush().map_err(|e| io_failure(&path, e))?;
        flow_info = Some((path, curve.residual(), curve.len()));
    }
    #[derive(Serialize)]
    struct GeometryJson {
        surface: String,
        scale: f64,
        horizontal_area: f64,
        area_error: f64,
        grid: usize,
        indeterminate_points: usize,
        flow_residual: Option<f64>,
    }
    if c.json {
        print_json(&GeometryJson {
            surface: profile.name().to_string(),
            scale: g.scale,
            horizontal_area: area.value,
            area_error: area.error,
            grid,
            indeterminate_points: indeterminate,
            flow_residual: flow_info.as_ref().map(|f| f.1),
        })?;
    } else {
        header(
            "geometry",
            &profile,
            &[
                ("scale", g.scale.to_string()),
                ("grid", grid.to_string()),
                ("resolution", g.resolution.to_string()),
            ],
        );
        println!("  {:<28} {:>22}", "horizontal area A^h", format!("{:.10}", area.value));
        println!("  {:<28} {:>22}", "quadrature error", format!("{:.3e}", area.error));
        if let Some(path) = &c.csv {
            println!("  table written to {} ({indeterminate} indeterminate H^h)", path.display());
        }
        if let Some((path, res, n)) = &flow_info {
            println!("  flow curve ({n} samples, max residual {res:.3e}) written to {}", path.display());
        }
    }
    Ok(true)
}

fn cmd_export_mesh(m: &MeshArgs) -> Outcome {
    let c = &m.common;
    let profile = load_profile(c)?;
    let patch = SurfacePatch::new(profile.clone(), m.scale)?;
    let n_s = c.grid.unwrap_or(DEFAULT_MESH_GRID);
    let n_phi = (n_s / 2).max(3);
    let mesh = patch.mesh(n_s, n_phi)?;
    let obj = c.out.clone().unwrap_or_else(|| PathBuf::from("surface.obj"));
    let csv = c.csv.clone().unwrap_or_else(|| obj.with_extension("csv"));
    let mut w = create(&obj)?;
    mesh.write_obj(&mut w)?;
    w.flush().map_err(|e| io_failure(&obj, e))?;
    let mut w = create(&csv)?;
    mesh.write_vertex_csv(&mut w)?;
    w.flush().map_err(|e| io_failure(&csv, e))?;
    #[derive(Serialize)]
    struct MeshJson {
        surface: String,
        scale: f64,
        n_s: usize,
        n_phi: usize,
        vertices: usize,
        faces: usize,
        obj: String,
        csv: String,
    }
    let info = MeshJson {
        surface: profile.name().to_string(),
        scale: m.scale,
        n_s,
        n_phi,
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        obj: obj.display().to_string(),
        csv: csv.display().to_string(),
    };
    if c.json {
        print_json(&info)?;
    } else {
        header("export-mesh", &profile, &[("scale", m.scale.to_string()), ("grid", format!("{n_s}x{n_phi}"))]);
        println!("  {} vertices, {} faces -> {}", info.vertices, info.faces, info.obj);
        println!("  per-vertex data -> {}", info.csv);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(c) => cmd_validate(c),
        Command::Modulus(m) => cmd_modulus(m),
        Command::Geometry(g) => cmd_geometry(g),
        Command::ExportMesh(m) => cmd_export_mesh(m),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let msg = match &f {
                Failure::Math(m) | Failure::Usage(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
