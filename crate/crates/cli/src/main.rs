use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ellipse_contact::analysis::{contact_locus, excluded_area, excluded_boundary, LocusCurve};
use ellipse_contact::{
    closest_approach, overlap, EllipseShape, Error, MCConfig, OverlapVerdict, PairConfiguration, QuadratureScheme,
    QuadratureSpec, Simulation, UnitVec2, Vec2,
};
use serde_json::json;

mod batch;
mod verify;

/// Distance of closest approach, contact point and overlap of two ellipses.
#[derive(Parser)]
#[command(name = "ellipse-contact", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contact distance along a direction, with the full solution record
    Distance(PairArgs),
    /// Point of contact and contact normal
    Contact(PairArgs),
    /// Whether two placed ellipses overlap
    Overlap(OverlapArgs),
    /// Evaluate many configurations from a CSV or JSON-lines file
    Batch(batch::BatchArgs),
    /// Excluded area, at one angle or over a sweep of angles
    ExcludedArea(ExcludedAreaArgs),
    /// Boundary of the excluded region as a point list
    Boundary(BoundaryArgs),
    /// Path of the contact point as ellipse 1 turns
    Locus(LocusArgs),
    /// Compare the closed form against the brute-force oracle
    Verify(verify::VerifyArgs),
    /// Run a hard-ellipse Monte Carlo simulation
    Simulate(SimulateArgs),
}

#[derive(Args, Clone, Copy)]
struct ShapeArgs {
    #[arg(long, default_value_t = 2.0)]
    a1: f64,
    #[arg(long, default_value_t = 1.0)]
    b1: f64,
    #[arg(long, default_value_t = 2.0)]
    a2: f64,
    #[arg(long, default_value_t = 1.0)]
    b2: f64,
}

impl ShapeArgs {
    fn shapes(&self) -> Result<(EllipseShape, EllipseShape), CliError> {
        Ok((
            EllipseShape::new(self.a1, self.b1)?,
            EllipseShape::new(self.a2, self.b2)?,
        ))
    }
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    a1: f64,
    #[arg(long)]
    b1: f64,
    #[arg(long)]
    a2: f64,
    #[arg(long)]
    b2: f64,
    /// Major axis of ellipse 1, degrees
    #[arg(long, allow_hyphen_values = true)]
    theta1: f64,
    /// Major axis of ellipse 2, degrees
    #[arg(long, allow_hyphen_values = true)]
    theta2: f64,
    /// Direction from center 1 to center 2, degrees
    #[arg(long = "theta-d", allow_hyphen_values = true)]
    theta_d: f64,
    #[arg(long)]
    json: bool,
}

impl PairArgs {
    fn configuration(&self) -> Result<PairConfiguration, CliError> {
        Ok(PairConfiguration::from_degrees(
            (self.a1, self.b1),
            (self.a2, self.b2),
            self.theta1,
            self.theta2,
            self.theta_d,
        )?)
    }
}

#[derive(Args)]
struct OverlapArgs {
    #[arg(long)]
    a1: f64,
    #[arg(long)]
    b1: f64,
    #[arg(long)]
    a2: f64,
    #[arg(long)]
    b2: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta1: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta2: f64,
    /// Center of ellipse 2 relative to ellipse 1, x component
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    /// Center of ellipse 2 relative to ellipse 1, y component
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Trapezoid,
    Gauss,
    Simpson,
}

impl From<Scheme> for QuadratureScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Trapezoid => QuadratureScheme::FixedTrapezoid,
            Scheme::Gauss => QuadratureScheme::GaussLegendrePanels,
            Scheme::Simpson => QuadratureScheme::AdaptiveSimpson,
        }
    }
}

#[derive(Args)]
struct ExcludedAreaArgs {
    #[command(flatten)]
    shapes: ShapeArgs,
    /// Angle between the major axes, degrees
    #[arg(long, allow_hyphen_values = true, conflicts_with = "sweep")]
    angle: Option<f64>,
    /// start:end:step in degrees; prints angle,area CSV
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value_t = 2048)]
    panels: usize,
    #[arg(long, value_enum, default_value_t = Scheme::Trapezoid)]
    scheme: Scheme,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CurveOutput {
    /// Number of points on the curve
    #[arg(long, short, default_value_t = 720)]
    n: usize,
    /// Write here instead of stdout
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    shapes: ShapeArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta1: f64,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    theta2: f64,
    #[command(flatten)]
    output: CurveOutput,
}

#[derive(Args)]
struct LocusArgs {
    #[command(flatten)]
    shapes: ShapeArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta2: f64,
    #[arg(long = "theta-d", default_value_t = 0.0, allow_hyphen_values = true)]
    theta_d: f64,
    #[command(flatten)]
    output: CurveOutput,
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration, JSON or key = value
    #[arg(long, short)]
    config: PathBuf,
    /// Trajectory file (JSON lines); stdout when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Check every pair and the cell list after each sweep
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit code 2 for bad input, 1 for failed checks.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn vec_json(v: Vec2) -> serde_json::Value {
    json!([v.x, v.y])
}

fn distance(args: &PairArgs) -> Result<(), CliError> {
    let cfg = args.configuration()?;
    let sol = closest_approach(&cfg)?;
    let res = sol.residuals(&cfg);
    if args.json {
        let record = json!({
            "d": sol.d,
            "d_prime": sol.d_prime,
            "q": sol.q,
            "branch": sol.branch.name(),
            "contact_point": vec_json(sol.contact_point),
            "contact_normal": vec_json(sol.contact_normal.vec()),
            "residuals": res,
        });
        println!("{record}");
    } else {
        println!("d            {}", sol.d);
        println!("d_prime      {}", sol.d_prime);
        println!("q            {}", sol.q);
        println!("branch       {}", sol.branch.name());
        println!("contact      {} {}", sol.contact_point.x, sol.contact_point.y);
        println!("on_ellipse1  {:e}", res.on_ellipse1);
        println!("on_ellipse2  {:e}", res.on_ellipse2);
        println!("normal_cross {:e}", res.normal_cross);
        println!("normal_dot   {}", res.normal_dot);
    }
    Ok(())
}

fn contact(args: &PairArgs) -> Result<(), CliError> {
    let cfg = args.configuration()?;
    let sol = closest_approach(&cfg)?;
    let (p, n) = (sol.contact_point, sol.contact_normal.vec());
    if args.json {
        let record = json!({
            "contact_point": vec_json(p),
            "contact_normal": vec_json(n),
            "d": sol.d,
            "branch": sol.branch.name(),
        });
        println!("{record}");
    } else {
        println!("contact      {} {}", p.x, p.y);
        println!("normal       {} {}", n.x, n.y);
        println!("d            {}", sol.d);
        println!("branch       {}", sol.branch.name());
    }
    Ok(())
}

fn overlap_cmd(args: &OverlapArgs) -> Result<(), CliError> {
    let s1 = EllipseShape::new(args.a1, args.b1)?;
    let s2 = EllipseShape::new(args.a2, args.b2)?;
    let (k1, k2) = (UnitVec2::from_degrees(args.theta1), UnitVec2::from_degrees(args.theta2));
    let r = Vec2::try_new(args.x, args.y)?;
    let (verdict, d) = match overlap(s1, s2, k1, k2, r) {
        Ok(v) => {
            let dhat = UnitVec2::new(r)?;
            (
                verdict_name(v),
                Some(closest_approach(&PairConfiguration::new(s1, s2, k1, k2, dhat))?.d),
            )
        }
        Err(Error::ConcentricCenters(_)) => ("overlapping (concentric centers)", None),
        Err(e) => return Err(e.into()),
    };
    if args.json {
        println!("{}", json!({"verdict": verdict, "separation": r.norm(), "d": d}));
    } else {
        println!("{verdict}");
        if let Some(d) = d {
            println!("separation   {}", r.norm());
            println!("d            {d}");
        }
    }
    Ok(())
}

fn verdict_name(v: OverlapVerdict) -> &'static str {
    match v {
        OverlapVerdict::Disjoint => "disjoint",
        OverlapVerdict::Tangent => "tangent",
        OverlapVerdict::Overlapping => "overlapping",
    }
}

fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("--sweep expects start:end:step, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, end, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(bad());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn excluded_area_cmd(args: &ExcludedAreaArgs) -> Result<(), CliError> {
    let (s1, s2) = args.shapes.shapes()?;
    let spec = QuadratureSpec {
        scheme: args.scheme.into(),
        panels: args.panels,
        abs_tol: args.abs_tol,
    };
    let x = UnitVec2::from_degrees(0.0);
    let mut out = io::stdout().lock();
    match &args.sweep {
        Some(sweep) => {
            let angles = parse_sweep(sweep)?;
            if !args.json {
                writeln!(out, "angle_deg,excluded_area")?;
            }
            for t in angles {
                let a = excluded_area(s1, s2, x, UnitVec2::from_degrees(t), &spec)?;
                if args.json {
                    writeln!(out, "{}", json!({"angle_deg": t, "excluded_area": a}))?;
                } else {
                    writeln!(out, "{t},{a}")?;
                }
            }
        }
        None => {
            let t = args.angle.unwrap_or(0.0);
            let a = excluded_area(s1, s2, x, UnitVec2::from_degrees(t), &spec)?;
            if args.json {
                writeln!(out, "{}", json!({"angle_deg": t, "excluded_area": a}))?;
            } else {
                writeln!(out, "{a}")?;
            }
        }
    }
    Ok(())
}

fn write_curve(curve: &LocusCurve, angle_name: &str, output: &CurveOutput) -> Result<(), CliError> {
    let mut out = open_output(output.out.as_ref())?;
    if output.json {
        let points: Vec<_> = curve
            .samples
            .iter()
            .map(|s| json!({angle_name: s.angle.to_degrees(), "x": s.point.x, "y": s.point.y}))
            .collect();
        let area = curve.shoelace_area();
        writeln!(
            out,
            "{}",
            json!({"closed": curve.closed, "enclosed_area": area, "points": points})
        )?;
    } else {
        writeln!(out, "{angle_name},x,y")?;
        for s in &curve.samples {
            writeln!(out, "{},{},{}", s.angle.to_degrees(), s.point.x, s.point.y)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn boundary_cmd(args: &BoundaryArgs) -> Result<(), CliError> {
    let (s1, s2) = args.shapes.shapes()?;
    let curve = excluded_boundary(
        s1,
        s2,
        UnitVec2::from_degrees(args.theta1),
        UnitVec2::from_degrees(args.theta2),
        args.output.n,
    )?;
    write_curve(&curve, "theta_deg", &args.output)
}

fn locus_cmd(args: &LocusArgs) -> Result<(), CliError> {
    let (s1, s2) = args.shapes.shapes()?;
    let curve = contact_locus(
        s1,
        s2,
        UnitVec2::from_degrees(args.theta2),
        UnitVec2::from_degrees(args.theta_d),
        args.output.n,
    )?;
    write_curve(&curve, "theta1_deg", &args.output)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = MCConfig::load(&args.config)?;
    if let Some(s) = args.sweeps {
        cfg.sweeps = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let mut sim = Simulation::new(cfg)?;
    let mut out = open_output(args.out.as_ref())?;
    let summary = sim.run(args.audit, Some(&mut *out))?;
    out.flush()?;
    eprintln!(
        "{} sweeps, acceptance {:.4} (translation {:.4}, rotation {:.4}), S {:.4}",
        summary.sweeps,
        summary.acceptance,
        summary.stats.translation.ratio(),
        summary.stats.rotation.ratio(),
        summary.s
    );
    if args.audit {
        eprintln!(
            "audit: {} sweeps checked, {} failures",
            summary.audits, summary.audit_failures
        );
        if summary.audit_failures > 0 {
            return Err(CliError::Failed(format!("{} audit failures", summary.audit_failures)));
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("ELLIPSE_CONTACT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("ELLIPSE_CONTACT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Distance(a) => distance(&a),
        Command::Contact(a) => contact(&a),
        Command::Overlap(a) => overlap_cmd(&a),
        Command::Batch(a) => batch::run(&a),
        Command::ExcludedArea(a) => excluded_area_cmd(&a),
        Command::Boundary(a) => boundary_cmd(&a),
        Command::Locus(a) => locus_cmd(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Simulate(a) => simulate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
