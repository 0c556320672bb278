//! Command-line front end: norm validation, horofunction computation,
//! boundary projection, fiber exploration, level-set export, and the
//! verification suite.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use minkhoro::boundary::{
    classify_space_regularity, explore_fiber, project_coarse_to_weak, CoarsePoint, WeakPoint,
    DEFAULT_RADII,
};
use minkhoro::config::RunConfig;
use minkhoro::flags::project_to_horofunction;
use minkhoro::gauss::Direction;
use minkhoro::horo::{horosphere_sample, Horofunction};
use minkhoro::norm::{validate_norm, Ray, SingularNorm};
use minkhoro::space::{BoundingBox, Point, PointGrid, Vector};
use minkhoro::verify::{run_all_with, VerifyOptions};
use minkhoro::Error;

/// Built-in configuration: the planar norm with two singular directions
/// and the standard probe sequences.
const BUILTIN_CONFIG: &str = r#"[norm]
dimension = 2
family = "sqrt-quadratic-plus-abs"
quadratic_form = [[1.0, 0.0], [0.0, 2.0]]
abs_index = 1
singular_directions = [[1.0, 0.0], [-1.0, 0.0]]

[[sequence]]
id = "axis"
coords = ["1*k^1", "0"]
level = 1

[[sequence]]
id = "s-plus"
coords = ["1*k^2", "-1*k^1"]
level = 2

[[sequence]]
id = "s-minus"
coords = ["1*k^2", "1*k^1"]
level = 2

[grid]
half_width = 5.0
step = 0.5

[schedule]
max_steps = 40
tolerance = 1e-8
"#;

const VALIDATION_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Report,
}

#[derive(Parser)]
#[command(name = "minkhoro", version, about = "Horofunction boundaries of singular Minkowski planes")]
struct Cli {
    /// Run configuration (TOML); the built-in singular plane when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized battery.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Overrides the probe-grid step from the configuration.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Overrides the default accuracy tolerance of the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for tabular and graphic files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Output format for file-producing subcommands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the norm invariant battery on the configured gauge.
    Validate,
    /// Computes the horofunction of a configured sequence on the probe
    /// grid and writes (point, value) rows.
    Horofunction {
        /// Sequence id from the configuration, or a built-in function id.
        id: String,
    },
    /// Projects a horofunction to the weak boundary and reports the
    /// direction.
    Project {
        /// Built-in function id or configured sequence id.
        id: String,
    },
    /// Extracts a level set of a horofunction inside the probe box.
    Levelset {
        id: String,
        #[arg(long, default_value_t = 0.0)]
        level: f64,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Projects candidate horofunctions over one weak point and groups
    /// the fiber into equivalence classes.
    Fiber {
        /// Candidate ids; the five standard candidates when omitted.
        ids: Vec<String>,
        /// Weak point as `x,y`; the first singular direction by default.
        #[arg(long)]
        direction: Option<String>,
    },
    /// Sweeps the unit sphere and reports the singular direction set.
    Classify {
        #[arg(long, default_value_t = 3600)]
        resolution: usize,
    },
    /// Runs the full verification suite and prints one line per
    /// criterion.
    VerifyPaper,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(s) = std::env::var("MH_THREADS") {
        if let Ok(n) = s.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::NonConvergence { .. } => 3,
        Error::Validation(msg) if msg.contains("not flag-directed") => 3,
        Error::EmptyLevelSet(_) => 4,
        _ => 1,
    }
}

struct Ctx {
    config_hash: String,
    cfg: RunConfig,
    nm: SingularNorm,
    seed: u64,
    tol: Option<f64>,
    grid_step: Option<f64>,
    out_dir: PathBuf,
    format: Format,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self, Error> {
        let config_text = match &cli.config {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => BUILTIN_CONFIG.to_string(),
        };
        let cfg = RunConfig::parse(&config_text)?;
        let nm = cfg.build_norm(VALIDATION_SAMPLES, cli.seed)?;
        let config_hash = hex::encode(Sha256::digest(config_text.as_bytes()));
        Ok(Ctx {
            config_hash,
            cfg,
            nm,
            seed: cli.seed,
            tol: cli.tol,
            grid_step: cli.grid_step,
            out_dir: cli.out.clone(),
            format: cli.format,
        })
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn half_width(&self) -> f64 {
        self.cfg
            .grid
            .as_ref()
            .and_then(|g| g.half_width)
            .unwrap_or(5.0)
    }

    fn grid(&self) -> Result<PointGrid, Error> {
        match self.grid_step {
            Some(step) => PointGrid::regular(
                &BoundingBox::cube(self.nm.dim(), self.half_width()),
                step,
            ),
            None => self.cfg.grid(),
        }
    }

    /// Every machine-readable report opens with the reproduction header.
    fn report_header(&self, tolerances: &[(&str, f64)]) -> String {
        let mut s = String::new();
        s.push_str(&format!("config_sha256 = {}\n", self.config_hash));
        s.push_str(&format!("seed = {}\n", self.seed));
        for (name, v) in tolerances {
            s.push_str(&format!("tolerance.{name} = {}\n", fmt17(*v)));
        }
        s
    }

    fn write_out(&self, name: &str, contents: &str) -> Result<PathBuf, Error> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| Error::Config(format!("{}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        let mut f = std::fs::File::create(&path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// Resolves a horofunction id: built-in closed forms (`beta0`,
    /// `beta0-prime:<a>`, `phi-plus`, `phi-minus`), `busemann:<x>,<y>`,
    /// `linear:<x>,<y>`, or a configured sequence id.
    fn resolve(&self, id: &str) -> Result<Horofunction, Error> {
        match id {
            "beta0" => return Ok(Horofunction::beta0()),
            "phi-plus" => return Ok(Horofunction::phi_plus()),
            "phi-minus" => return Ok(Horofunction::phi_minus()),
            _ => {}
        }
        if let Some(a) = id.strip_prefix("beta0-prime:") {
            let a: f64 = a
                .parse()
                .map_err(|_| Error::Config(format!("bad beta0-prime parameter '{a}'")))?;
            return Ok(Horofunction::beta0_prime(a));
        }
        if let Some(rest) = id.strip_prefix("busemann:") {
            let dir = parse_vector(rest, self.nm.dim())?;
            let ray = Ray::from_unnormalized(&self.nm, Point::origin(self.nm.dim()), &dir)?;
            return Horofunction::busemann(&self.nm, &ray, &self.cfg.schedule());
        }
        if let Some(rest) = id.strip_prefix("linear:") {
            let cov = parse_vector(rest, self.nm.dim())?;
            return Horofunction::linear(&self.nm, &cov, id);
        }
        // fall through to the configured sequences
        let seq = self.cfg.build_sequence(id)?;
        let probe = PointGrid::regular(&BoundingBox::cube(self.nm.dim(), self.half_width()), 1.0)?;
        project_to_horofunction(&self.nm, &seq, &probe, &self.cfg.schedule())
    }
}

fn parse_vector(s: &str, dim: usize) -> Result<Vector, Error> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad vector '{s}', expected comma-separated reals")))?;
    if coords.len() != dim {
        return Err(Error::Config(format!(
            "vector '{s}' has {} coordinates, expected {dim}",
            coords.len()
        )));
    }
    Vector::new(coords)
}

/// 17 significant digits, the round-trip-exact float format.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let ctx = Ctx::new(cli)?;
    match &cli.command {
        Command::Validate => cmd_validate(&ctx),
        Command::Horofunction { id } => cmd_horofunction(&ctx, id),
        Command::Project { id } => cmd_project(&ctx, id),
        Command::Levelset {
            id,
            level,
            resolution,
        } => cmd_levelset(&ctx, id, *level, *resolution),
        Command::Fiber { ids, direction } => cmd_fiber(&ctx, ids, direction.as_deref()),
        Command::Classify { resolution } => cmd_classify(&ctx, *resolution),
        Command::VerifyPaper => cmd_verify_paper(&ctx),
    }
}

fn cmd_validate(ctx: &Ctx) -> Result<ExitCode, Error> {
    let report = validate_norm(&ctx.nm, VALIDATION_SAMPLES, ctx.seed);
    print!("{}", ctx.report_header(&[("strict_convexity", 1e-12)]));
    println!("samples = {}", report.samples);
    println!("symmetry_max_dev = {}", fmt17(report.symmetry_max_dev));
    println!(
        "homogeneity_max_rel_dev = {}",
        fmt17(report.homogeneity_max_rel_dev)
    );
    println!(
        "triangle_max_violation = {}",
        fmt17(report.triangle_max_violation)
    );
    println!(
        "strict_convexity_min_margin = {}",
        fmt17(report.strict_convexity_min_margin)
    );
    println!("zero_at_origin = {}", report.zero_at_origin);
    for f in &report.findings {
        println!("finding = {f}");
    }
    println!("passed = {}", report.passed);
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_horofunction(ctx: &Ctx, id: &str) -> Result<ExitCode, Error> {
    let f = ctx.resolve(id)?;
    let grid = ctx.grid()?;
    let dim = ctx.nm.dim();
    let mut csv = String::new();
    for i in 1..=dim {
        csv.push_str(&format!("x{i},"));
    }
    csv.push_str("value\n");
    for p in &grid.points {
        for c in p.coords() {
            csv.push_str(&fmt17(*c));
            csv.push(',');
        }
        csv.push_str(&fmt17(f.eval(p)?));
        csv.push('\n');
    }
    let path = ctx.write_out(&format!("horofunction-{}.csv", sanitize(id)), &csv)?;
    print!(
        "{}",
        ctx.report_header(&[("schedule", ctx.cfg.schedule().tolerance)])
    );
    println!("id = {id}");
    println!("provenance = {:?}", f.provenance);
    println!("rows = {}", grid.points.len());
    println!("file = {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_project(ctx: &Ctx, id: &str) -> Result<ExitCode, Error> {
    let f = ctx.resolve(id)?;
    let wp = project_coarse_to_weak(&ctx.nm, &CoarsePoint::new(id, f), &DEFAULT_RADII)?;
    print!("{}", ctx.report_header(&[("minimum_law", 1e-6)]));
    println!("id = {id}");
    let coords: Vec<String> = wp
        .direction
        .vector()
        .coords()
        .iter()
        .map(|c| fmt17(*c))
        .collect();
    println!("direction = {}", coords.join(","));
    println!(
        "radii = {}",
        DEFAULT_RADII
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_levelset(ctx: &Ctx, id: &str, level: f64, resolution: usize) -> Result<ExitCode, Error> {
    let f = ctx.resolve(id)?;
    let bbox = BoundingBox::cube(ctx.nm.dim(), ctx.half_width());
    let sample = horosphere_sample(&ctx.nm, &f, level, &bbox, resolution)?;
    let dim = ctx.nm.dim();
    let mut csv = String::new();
    for i in 1..=dim {
        csv.push_str(&format!("x{i},"));
    }
    csv.push_str("level\n");
    for p in &sample.points {
        for c in p.coords() {
            csv.push_str(&fmt17(*c));
            csv.push(',');
        }
        csv.push_str(&fmt17(level));
        csv.push('\n');
    }
    let base = format!("levelset-{}-{level}", sanitize(id));
    let csv_path = ctx.write_out(&format!("{base}.csv"), &csv)?;
    print!("{}", ctx.report_header(&[("level_bisection", 1e-6)]));
    println!("id = {id}");
    println!("level = {}", fmt17(level));
    println!("points = {}", sample.points.len());
    println!("file = {}", csv_path.display());
    if ctx.format == Format::Svg {
        if dim != 2 {
            return Err(Error::Domain("svg rendering needs a planar space".into()));
        }
        let svg = render_svg(&sample.points, &sample.segments, &bbox);
        let svg_path = ctx.write_out(&format!("{base}.svg"), &svg)?;
        println!("svg = {}", svg_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn render_svg(points: &[Point], segments: &[(usize, usize)], bbox: &BoundingBox) -> String {
    let w = 640.0;
    let sx = |x: f64| (x - bbox.min[0]) / (bbox.max[0] - bbox.min[0]) * w;
    let sy = |y: f64| w - (y - bbox.min[1]) / (bbox.max[1] - bbox.min[1]) * w;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {w}\">\n\
         <rect width=\"{w}\" height=\"{w}\" fill=\"white\"/>\n"
    );
    for &(a, b) in segments {
        let (p, q) = (&points[a], &points[b]);
        s.push_str(&format!(
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" \
             stroke=\"black\" stroke-width=\"1.5\"/>\n",
            sx(p.coords()[0]),
            sy(p.coords()[1]),
            sx(q.coords()[0]),
            sy(q.coords()[1])
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_fiber(ctx: &Ctx, ids: &[String], direction: Option<&str>) -> Result<ExitCode, Error> {
    let xi = match direction {
        Some(s) => WeakPoint {
            direction: Direction::from_unnormalized(&ctx.nm, &parse_vector(s, ctx.nm.dim())?)?,
        },
        None => {
            let mut e = vec![0.0; ctx.nm.dim()];
            e[0] = 1.0;
            WeakPoint {
                direction: Direction::new(&ctx.nm, Vector::new(e)?)?,
            }
        }
    };
    let default_ids = [
        "beta0".to_string(),
        "beta0-prime:1".to_string(),
        "beta0-prime:-2".to_string(),
        "phi-plus".to_string(),
        "phi-minus".to_string(),
    ];
    let ids: Vec<String> = if ids.is_empty() {
        default_ids.to_vec()
    } else {
        ids.to_vec()
    };
    let candidates: Vec<CoarsePoint> = ids
        .iter()
        .map(|id| Ok(CoarsePoint::new(id, ctx.resolve(id)?)))
        .collect::<Result<_, Error>>()?;
    let grid = ctx.grid()?;
    let report = explore_fiber(&ctx.nm, &xi, &candidates, &grid, ctx.tol(1e-6))?;
    print!("{}", ctx.report_header(&[("equivalence", ctx.tol(1e-6))]));
    for e in &report.entries {
        match &e.excluded {
            Some(reason) => println!("candidate {} excluded: {reason}", e.id),
            None => println!(
                "candidate {} class {} verdict {:?}",
                e.id,
                e.class.map(|c| c.to_string()).unwrap_or_default(),
                e.verdict
            ),
        }
    }
    println!("classes = {}", report.class_count);
    println!(
        "min_class_separation = {}",
        fmt17(report.min_class_separation)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(ctx: &Ctx, resolution: usize) -> Result<ExitCode, Error> {
    let report = classify_space_regularity(&ctx.nm, resolution)?;
    print!("{}", ctx.report_header(&[("angular_width", 1e-6)]));
    println!("resolution = {}", report.resolution);
    println!("regular_space = {}", report.regular_space);
    let mut csv = String::from("x1,x2\n");
    for d in &report.singular_directions {
        let c = d.vector().coords();
        println!("singular = {},{}", fmt17(c[0]), fmt17(c[1]));
        csv.push_str(&format!("{},{}\n", fmt17(c[0]), fmt17(c[1])));
    }
    if ctx.format == Format::Csv {
        let path = ctx.write_out("singular-directions.csv", &csv)?;
        println!("file = {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_paper(ctx: &Ctx) -> Result<ExitCode, Error> {
    // the singular-direction criteria need the corner: run them only when
    // the configured norm declares singular directions
    let singular_applicable = !ctx.nm.declared_singular().is_empty()
        || ctx.cfg.norm.family == "paper";
    let opts = VerifyOptions {
        tolerance_override: ctx.tol,
        singular_applicable,
    };
    let outcomes = run_all_with(&opts)?;
    match ctx.tol {
        Some(t) => print!("{}", ctx.report_header(&[("override", t)])),
        None => print!("{}", ctx.report_header(&[])),
    }
    let mut all = true;
    for o in &outcomes {
        all &= o.passed;
        println!(
            "criterion {:2} [{}] {} — {}",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    println!("passed = {all}");
    Ok(if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}
