use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pilab::constants::rca_kappa;
use pilab::covering::{expand_covering, kappa_decomposition, validate_covering};
use pilab::gallery::{self, GalleryKind, GallerySpec};
use pilab::graph::{build_covering_graph, isoperimetric_constant_seeded, poincare_constant};
use pilab::render::render_svg;
use pilab::report::{to_csv, to_json, Provenance};
use pilab::riesz::{ball_chain, chain_invariants, measured_poincare_constant, poincare_candidates, poincare_sample_balls};
use pilab::tolerances::{le_rel, EMPIRICAL_REL};
use pilab::space::{
    ahlfors_fit, doubling_profile, growth_exponent, load_space, reverse_doubling_fit, save_space, SampleSpec,
};
use pilab::verify::{
    ahlfors_sobolev_check, annulus_piece_check, default_family, hardy_check, local_sobolev_check, make_family,
    weighted_sobolev_check, AnnulusFlavor, CheckConfig, FamilySpec, InequalityReport,
};
use pilab::Space;
use serde_json::json;

#[derive(Parser)]
#[command(name = "pilab", version, about = "Coverings and weighted Sobolev/Hardy checks on discrete metric measure spaces")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "PILAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a gallery space.
    Gen(GenArgs),
    /// Doubling, reverse doubling and Ahlfors fits.
    Profile(ProfileArgs),
    /// κ-decomposition and covering validation.
    Decompose(DecomposeArgs),
    /// Covering graph with isoperimetric and Poincaré constants.
    Graph(GraphArgs),
    /// Run an inequality check and print its report.
    Verify(VerifyArgs),
    /// SVG of a 2D space, pieces colored when a κ is given.
    Render(RenderArgs),
    /// Ball chain from a center toward a point.
    Chain(ChainArgs),
}

#[derive(Args)]
struct SpaceArgs {
    /// Space JSON file.
    #[arg(long, conflicts_with = "gallery", required_unless_present = "gallery")]
    space: Option<PathBuf>,
    /// Gallery spec, e.g. `grid_quadrant:64` or `radial_profile:512:2`.
    #[arg(long)]
    gallery: Option<String>,
}

impl SpaceArgs {
    fn load(&self) -> Result<Space> {
        match (&self.space, &self.gallery) {
            (Some(p), _) => load_space(p).with_context(|| format!("reading {}", p.display())),
            (None, Some(g)) => Ok(gallery::generate(&g.parse::<GallerySpec>()?)?),
            (None, None) => bail!("one of --space or --gallery is required"),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: String,
    /// Truncation size (grid side, path length, rings, or sector radius).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Lattice spacing for `sector_union`.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Base point.
    #[arg(long = "o", default_value_t = 0)]
    base: usize,
    #[arg(long, default_value_t = 64)]
    centers: usize,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Dot,
    Svg,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long = "o", default_value_t = 0)]
    base: usize,
    /// κ > 1, or `auto`.
    #[arg(long, default_value = "2")]
    kappa: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long = "o", default_value_t = 0)]
    base: usize,
    #[arg(long, default_value = "2")]
    kappa: String,
    /// Exponent of the discrete Poincaré constant.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Outer levels marked as boundary.
    #[arg(long, default_value_t = 1)]
    boundary_levels: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Ineq {
    WeightedSobolev,
    Hardy,
    LocalSobolev,
    Ahlfors,
    Annulus,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum)]
    ineq: Ineq,
    #[arg(long = "o", default_value_t = 0)]
    base: usize,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Defaults to `s`.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value = "2")]
    kappa: String,
    /// Family size.
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Ball radius (local-sobolev) or inner annulus radius (annulus).
    #[arg(long)]
    radius: Option<f64>,
    /// Ball center for local-sobolev; defaults to the base point.
    #[arg(long)]
    center: Option<usize>,
    /// Annulus ratio α > 1.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// `ρ = δ R` for the annulus check.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Which connected component of the annulus, largest first.
    #[arg(long, default_value_t = 0)]
    piece: usize,
    /// Annulus inequality flavor.
    #[arg(long, default_value = "sobolev")]
    flavor: String,
    /// Use the alternative Ahlfors exponent `Q(t/s-1)-1`.
    #[arg(long)]
    printed_exponent: bool,
    /// Record wall-clock seconds in the report.
    #[arg(long)]
    timing: bool,
    /// Compare against this constant instead of the assembled one.
    #[arg(long)]
    claim: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long = "o", default_value_t = 0)]
    base: usize,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Ball center.
    #[arg(long)]
    a: usize,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    x: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

/// A κ argument checked before any computation.
enum Kappa {
    Value(f64),
    Auto,
}

fn parse_kappa(s: &str) -> Result<Kappa> {
    if s == "auto" {
        return Ok(Kappa::Auto);
    }
    let k: f64 = s.parse().with_context(|| format!("--kappa expects a number or `auto`, got `{s}`"))?;
    if !(k > 1.0 && k.is_finite()) {
        bail!("--kappa must be > 1, got {k}");
    }
    Ok(Kappa::Value(k))
}

/// `rca_kappa` from fitted inputs, capped at a quarter of the diameter.
fn resolve_kappa(kappa: Kappa, space: &Space, o: usize, p: f64) -> Result<f64> {
    if let Kappa::Value(k) = kappa {
        return Ok(k);
    }
    let q = doubling_profile(space, &SampleSpec::interior(space, 64))?.q;
    let eta = growth_exponent(space, o);
    let c_o = reverse_doubling_fit(space, o, eta)?.c_o;
    let balls = poincare_sample_balls(space, 12, 6);
    let c_p = measured_poincare_constant(space, p, 1.0, &balls, &poincare_candidates(space, 12)).max(1e-12);
    let k = rca_kappa(q, p, 1.0, c_p, eta, c_o)?;
    let cap = space.diameter() / 4.0;
    if k > cap {
        if cap <= 1.0 {
            bail!("--kappa auto: formula gives {k:.4e} and diameter/4 = {cap} is not above 1");
        }
        eprintln!("warning: --kappa auto gives {k:.4e} (Q {q:.3}, eta {eta:.3}, C_o {c_o:.3}, C_P {c_p:.3}); capped at diameter/4 = {cap}");
        return Ok(cap);
    }
    eprintln!("--kappa auto = {k}");
    Ok(k)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn check_base(space: &Space, o: usize) -> Result<()> {
    if o >= space.n() {
        bail!("--o {o} is not a vertex (space has {} vertices)", space.n());
    }
    Ok(())
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Command::Gen(a) => {
            let kind: GalleryKind = a.kind.parse()?;
            let spec = match kind {
                GalleryKind::GridQuadrant => GallerySpec::grid_quadrant(a.n.unwrap_or(64)),
                GalleryKind::RadialProfile => GallerySpec::radial_profile(a.n.unwrap_or(512), a.eta.unwrap_or(2.0)),
                GalleryKind::ConeGrid => GallerySpec::cone_grid(a.n.unwrap_or(128), a.eta.unwrap_or(2.0)),
                GalleryKind::SectorUnion => {
                    let mut s = GallerySpec::sector_union(a.resolution.unwrap_or(0.25));
                    if let Some(n) = a.n {
                        s.size = n;
                    }
                    s
                }
            };
            let space = gallery::generate(&spec)?;
            match &a.out {
                Some(p) => save_space(&space, p).with_context(|| format!("writing {}", p.display()))?,
                None => println!("{}", pilab::space::space_to_json(&space)),
            }
            Ok(true)
        }
        Command::Profile(a) => {
            let space = a.space.load()?;
            check_base(&space, a.base)?;
            let prof = doubling_profile(&space, &SampleSpec::interior(&space, a.centers))?;
            let eta = growth_exponent(&space, a.base);
            let rev = reverse_doubling_fit(&space, a.base, eta)?;
            let ahl = ahlfors_fit(&space).ok();
            let v = json!({
                "vertices": space.n(),
                "hash": space.hash(),
                "resolution": space.resolution(),
                "diameter": space.diameter(),
                "doubling": { "c_d": prof.c_d, "q": prof.q, "pairs": prof.pairs },
                "reverse_doubling": { "o": a.base, "eta": eta, "c_o": rev.c_o },
                "ahlfors": ahl.map(|f| json!({ "q": f.q, "c_a": f.c_a })),
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Command::Decompose(a) => {
            let kappa = parse_kappa(&a.kappa)?;
            if a.format != Format::Json && a.format != Format::Dot {
                bail!("decompose writes json or dot");
            }
            let space = a.space.load()?;
            check_base(&space, a.base)?;
            let kappa = resolve_kappa(kappa, &space, a.base, 1.0)?;
            let d = kappa_decomposition(&space, a.base, kappa)?;
            let cov = expand_covering(&space, &d);
            let ones = vec![1.0; space.n()];
            let val = validate_covering(&cov, &space, &ones, None);
            let text = match a.format {
                Format::Dot => cov.to_dot(),
                _ => {
                    let v = json!({
                        "decomposition": serde_json::from_str::<serde_json::Value>(&d.to_json())?,
                        "validation": val,
                    });
                    serde_json::to_string_pretty(&v)?
                }
            };
            emit(&a.out, &text)?;
            Ok(val.all_pass())
        }
        Command::Graph(a) => {
            let kappa = parse_kappa(&a.kappa)?;
            if a.t < 1.0 {
                bail!("--t must be >= 1");
            }
            let space = a.space.load()?;
            check_base(&space, a.base)?;
            let kappa = resolve_kappa(kappa, &space, a.base, 1.0)?;
            let d = kappa_decomposition(&space, a.base, kappa)?;
            let cov = expand_covering(&space, &d);
            let ones = vec![1.0; space.n()];
            let g = build_covering_graph(&cov, &space, &ones, a.boundary_levels)?;
            let text = match a.format {
                Format::Dot => g.to_dot(),
                Format::Json => {
                    let iso = isoperimetric_constant_seeded(&g, cli.seed)?;
                    let pc = poincare_constant(&g, a.t, cli.seed)?;
                    let v = json!({
                        "vertices": g.n(),
                        "edges": g.edges.len(),
                        "isoperimetric": { "value": iso.value, "witness": iso.witness, "heuristic": iso.heuristic },
                        "poincare": { "t": a.t, "value": pc.value, "exact": pc.exact },
                    });
                    serde_json::to_string_pretty(&v)?
                }
                _ => bail!("graph writes json or dot"),
            };
            emit(&a.out, &text)?;
            Ok(true)
        }
        Command::Verify(a) => verify(a, cli.seed),
        Command::Render(a) => {
            let kappa = a.kappa.as_deref().map(parse_kappa).transpose()?;
            let space = a.space.load()?;
            check_base(&space, a.base)?;
            let d = match kappa {
                Some(k) => Some(kappa_decomposition(&space, a.base, resolve_kappa(k, &space, a.base, 1.0)?)?),
                None => None,
            };
            emit(&a.out, &render_svg(&space, d.as_ref())?)?;
            Ok(true)
        }
        Command::Chain(a) => {
            let space = a.space.load()?;
            let ch = ball_chain(&space, a.a, a.radius, a.x, a.lambda)?;
            let inv = chain_invariants(&space, &ch);
            let v = json!({
                "chain": serde_json::from_str::<serde_json::Value>(&ch.to_json())?,
                "invariants": inv,
            });
            emit(&a.out, &serde_json::to_string_pretty(&v)?)?;
            Ok(true)
        }
    }
}

fn verify(a: VerifyArgs, seed: u64) -> Result<bool> {
    let kappa = parse_kappa(&a.kappa)?;
    let t = a.t.unwrap_or(a.s);
    if a.s < 1.0 || t < a.s {
        bail!("need 1 <= s <= t, got s = {}, t = {t}", a.s);
    }
    let flavor = match a.flavor.as_str() {
        "sobolev" => AnnulusFlavor::Sobolev,
        "poincare" => AnnulusFlavor::Poincare,
        other => bail!("--flavor expects sobolev or poincare, got `{other}`"),
    };
    if a.claim.is_some_and(|c| c.is_nan() || c < 0.0) {
        bail!("--claim must be a nonnegative number");
    }
    if !matches!(a.format, Format::Csv | Format::Json) {
        bail!("verify writes csv or json");
    }
    if matches!(a.ineq, Ineq::LocalSobolev | Ineq::Annulus) && a.radius.is_none() {
        bail!("--radius is required for {}", if a.ineq == Ineq::Annulus { "annulus" } else { "local-sobolev" });
    }
    let space = a.space.load()?;
    check_base(&space, a.base)?;
    let kappa = resolve_kappa(kappa, &space, a.base, a.s)?;
    let cfg = CheckConfig {
        kappa,
        seed,
        timing: a.timing,
        printed_ahlfors_exponent: a.printed_exponent,
        ..CheckConfig::default()
    };
    let report: InequalityReport = match a.ineq {
        Ineq::WeightedSobolev | Ineq::Hardy | Ineq::Ahlfors => {
            let fam = default_family(&space, a.base, kappa, seed, a.count)?;
            match a.ineq {
                Ineq::WeightedSobolev => weighted_sobolev_check(&space, a.base, a.s, t, &fam, &cfg)?,
                Ineq::Hardy => hardy_check(&space, a.base, a.s, &fam, &cfg)?,
                _ => ahlfors_sobolev_check(&space, a.base, a.s, t, &fam, &cfg)?,
            }
        }
        Ineq::LocalSobolev => {
            let c = a.center.unwrap_or(a.base);
            check_base(&space, c)?;
            let fam = make_family(&space, c, &FamilySpec { seed, count: a.count, zero_set: vec![] });
            local_sobolev_check(&space, c, a.radius.unwrap(), a.s, t, &fam, &cfg)?
        }
        Ineq::Annulus => {
            let r = a.radius.unwrap();
            let mut pieces = space.components(&space.annulus(a.base, r, a.alpha * r));
            pieces.sort_by(|x, y| y.len().cmp(&x.len()).then(x.cmp(y)));
            let Some(piece) = pieces.get(a.piece) else {
                bail!("annulus has {} components, --piece {} is out of range", pieces.len(), a.piece);
            };
            let fam = make_family(&space, a.base, &FamilySpec { seed, count: a.count, zero_set: vec![] });
            annulus_piece_check(&space, a.base, r, a.alpha, a.delta, piece, a.s, t, &fam, flavor, &cfg)?
        }
    };
    let mut report = report;
    if let Some(c) = a.claim {
        report.notes.push(format!("assembled constant {} replaced by --claim", report.theoretical));
        report.theoretical = c;
        report.pass = le_rel(report.empirical_best, c, EMPIRICAL_REL);
    }
    let pass = report.pass;
    let reports = [report];
    let text = match a.format {
        Format::Csv => to_csv(&reports)?,
        _ => {
            let prov = Provenance::new(seed, space.hash())
                .with("o", a.base)
                .with("kappa", kappa)
                .with("count", a.count);
            to_json(&reports, &prov)
        }
    };
    emit(&a.out, &text)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
