use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use normforge::catalog;
use normforge::embedding;
use normforge::interpolation::InterpolationSpec;
use normforge::renorming::{self, Which};
use normforge::space::{BasisSpace, NormValue};
use normforge::suite::{self, Artifact, SuiteConfig, Verdict};
use normforge::treespace::FiniteTree;
use normforge::{Error, PolytopeBall, Rat, RatVec, Result};

#[derive(Parser)]
#[command(name = "normforge", version, about = "Exact and certified norm computations and verification suites")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,
    #[arg(long = "max-dim", global = true, default_value_t = 4)]
    max_dim: usize,
    /// Enclosure width as a rational `p/q`.
    #[arg(long, global = true, default_value = "1/1000000000000")]
    eps: String,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a vector in a space.
    Norm {
        #[command(subcommand)]
        cmd: NormCmd,
    },
    /// Monotone rational norms in enumeration order.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Build an embedding frame over a base space.
    Embed {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Renormed norms over a frame.
    Renorm {
        #[command(subcommand)]
        cmd: RenormCmd,
    },
    /// Tree-space norms.
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    /// 2-interpolation norms.
    Interp {
        #[command(subcommand)]
        cmd: InterpCmd,
    },
    /// Run a verification suite (or `all`).
    Verify {
        suite: String,
        /// Directory for failing artifacts.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
    /// Re-run a single artifact.
    Replay { artifact: PathBuf },
}

#[derive(Subcommand)]
enum NormCmd {
    Eval {
        #[arg(long)]
        space: String,
        #[arg(long)]
        vec: String,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum RenormCmd {
    Eval {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        vec: String,
        /// `I` or `II`.
        #[arg(long, default_value = "I")]
        which: String,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    Eval {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        vec: String,
    },
}

#[derive(Subcommand)]
enum InterpCmd {
    Eval {
        /// Spec `{x, w}` or a tree (built into `A`).
        #[arg(long)]
        spec: String,
        #[arg(long)]
        vec: String,
    },
    Verify {
        #[arg(long)]
        spec: String,
        /// `identity`, `coords:i,j,...` or `branch:<leaf path>`.
        #[arg(long)]
        proj: String,
    },
}

/// Inline JSON or a path to a JSON file.
fn load(arg: &str) -> Result<Value> {
    let t = arg.trim_start();
    let text = if t.starts_with('[') || t.starts_with('{') || t.starts_with('"') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn load_vec(arg: &str) -> Result<RatVec> {
    Ok(serde_json::from_value(load(arg)?)?)
}

/// A `BasisSpace` document or a bare ball `{dim, generators}`.
fn load_space(arg: &str) -> Result<BasisSpace> {
    let v = load(arg)?;
    if v.get("norm").is_some() {
        let s: BasisSpace = serde_json::from_value(v)?;
        s.validate()?;
        Ok(s)
    } else {
        let ball: PolytopeBall = serde_json::from_value(v)?;
        Ok(BasisSpace::polytope(ball))
    }
}

fn load_spec(arg: &str) -> Result<(InterpolationSpec, Option<FiniteTree>)> {
    let v = load(arg)?;
    if v.get("labels").is_some() {
        let tree: FiniteTree = serde_json::from_value(v)?;
        Ok(((*suite::tree_spec(&tree)?).clone(), Some(tree)))
    } else {
        Ok((serde_json::from_value(v)?, None))
    }
}

fn value_json(v: &NormValue) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn value_text(v: &NormValue) -> String {
    match v {
        NormValue::Exact(r) => r.to_string(),
        other => match other.exact() {
            Some(r) => r.to_string(),
            None => {
                let iv = other.enclose(&Rat::pow2(-40));
                format!("[{}, {}]", iv.lo, iv.hi)
            }
        },
    }
}

fn emit(json_mode: bool, value: Value, text: String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        println!("{text}");
    }
}

fn config(g: &Global) -> Result<SuiteConfig> {
    let cfg = SuiteConfig { seed: g.seed, samples: g.samples, max_dim: g.max_dim, eps: g.eps.parse()? };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    let eps: Rat = g.eps.parse()?;
    match cli.command {
        Command::Norm { cmd: NormCmd::Eval { space, vec } } => {
            let s = load_space(&space)?;
            let x = load_vec(&vec)?;
            let v = s.norm.eval_eps(&x, &eps)?;
            emit(g.json, json!({ "value": value_json(&v) }), value_text(&v));
        }
        Command::Catalog { cmd: CatalogCmd::List { dim, count } } => {
            if dim > g.max_dim {
                return Err(Error::InvalidArgument(format!("dimension {dim} exceeds --max-dim {}", g.max_dim)));
            }
            let balls = catalog::catalog_prefix(dim, count)?;
            let text = balls
                .iter()
                .enumerate()
                .map(|(i, b)| format!("{:>4}  {}", i + 1, serde_json::to_string(b).expect("json")))
                .collect::<Vec<_>>()
                .join("\n");
            emit(g.json, serde_json::to_value(&balls)?, text);
        }
        Command::Embed { space, depth } => {
            let x = load_space(&space)?;
            let frame = embedding::cached_frame(&x, depth)?;
            let fs = frame.f_sandwich_certificate()?;
            let levels: Vec<Value> = frame
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "d": l.d,
                        "l": l.position,
                        "source": l.source,
                        "generators": l.ball.generators().len(),
                        "certificate": l.certificate,
                    })
                })
                .collect();
            let mut text = String::new();
            for l in &frame.levels {
                text.push_str(&format!(
                    "d = {}  l_d = {}  {:?}  generators {}  certified {}\n",
                    l.d,
                    l.position,
                    l.source,
                    l.ball.generators().len(),
                    l.certificate.holds()
                ));
            }
            text.push_str(&format!("F sandwich 7/8: {}", fs.holds));
            emit(g.json, json!({ "depth": depth, "levels": levels, "f_sandwich": fs }), text);
        }
        Command::Renorm { cmd: RenormCmd::Eval { space, depth, vec, which } } => {
            let x = load_space(&space)?;
            let frame = suite::frame(&x, depth)?;
            let f = load_vec(&vec)?;
            let which: Which = which.parse()?;
            let norm = frame.f_norm(&f)?;
            let (value, text) = match which {
                Which::I => {
                    let sq = renorming::norm_i_sq(&frame, &f)?;
                    let v = NormValue::from_square(sq.clone());
                    (json!({ "norm": norm, "norm_i": value_json(&v), "norm_i_sq": sq }), value_text(&v))
                }
                Which::II => {
                    let iv = renorming::norm_ii(&frame, &f, &eps)?;
                    (json!({ "norm": norm, "norm_ii": iv }), format!("[{}, {}]", iv.lo, iv.hi))
                }
            };
            emit(g.json, value, text);
        }
        Command::Tree { cmd: TreeCmd::Eval { tree, vec } } => {
            let t: FiniteTree = serde_json::from_value(load(&tree)?)?;
            let x = load_vec(&vec)?;
            let e = t.e_norm(&x)?;
            let text = if t.constants().is_empty() {
                format!("E: {}", value_text(&e))
            } else {
                let b = t.b_norm(&x)?;
                format!("E: {}\nB: {} (leaf {})", value_text(&e), value_text(&b.value), b.leaf)
            };
            let b = if t.constants().is_empty() { None } else { Some(t.b_norm(&x)?) };
            emit(g.json, json!({ "e": value_json(&e), "b": b }), text);
        }
        Command::Interp { cmd: InterpCmd::Eval { spec, vec } } => {
            let (s, _) = load_spec(&spec)?;
            let x = load_vec(&vec)?;
            let r = s.interpolation_norm_report(&x, &eps)?;
            let text = format!("[{}, {}]  ({} levels)", r.value.lo, r.value.hi, r.levels);
            emit(g.json, serde_json::to_value(&r)?, text);
        }
        Command::Interp { cmd: InterpCmd::Verify { spec, proj } } => {
            let (s, tree) = load_spec(&spec)?;
            let coords: Vec<usize> = if proj == "identity" {
                (0..s.dim()).collect()
            } else if let Some(list) = proj.strip_prefix("coords:") {
                list.split(',')
                    .map(|c| c.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                    .collect::<Result<_>>()?
            } else if let Some(leaf) = proj.strip_prefix("branch:") {
                let t = tree.as_ref().ok_or_else(|| Error::InvalidArgument("branch projections need a tree spec".into()))?;
                let node = t.node_index(leaf).ok_or_else(|| Error::InvalidArgument(format!("unknown node {leaf}")))?;
                let pos = t
                    .leaves()
                    .iter()
                    .position(|&l| l == node)
                    .ok_or_else(|| Error::InvalidArgument(format!("{leaf} is not a leaf")))?;
                t.chain(pos)
            } else {
                return Err(Error::Parse(format!("unknown projection {proj:?}")));
            };
            if coords.iter().any(|&c| c >= s.dim()) {
                return Err(Error::OutOfRange("projection coordinate".into()));
            }
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(g.seed);
            let samples: Vec<RatVec> = (0..g.samples).map(|_| suite::random_vec(&mut rng, s.dim())).collect();
            let report = s.verify_interpproj(&coords, &samples, 6, &eps)?;
            let ok = report.preconditions
                && report.contraction_failures.is_empty()
                && report.scale_law != Some(false)
                && report.ratios_match();
            let text = format!(
                "preconditions {}\ncontraction failures {}\nscale law {:?}\nconstant [{}, {}]\nratios match {}",
                report.preconditions,
                report.contraction_failures.len(),
                report.scale_law,
                report.constant.lo,
                report.constant.hi,
                report.ratios_match()
            );
            emit(g.json, serde_json::to_value(&report)?, text);
            return Ok(ok);
        }
        Command::Verify { suite: name, artifacts } => {
            let cfg = config(g)?;
            let report = suite::run(&name, &cfg)?;
            if let Some(dir) = artifacts {
                std::fs::create_dir_all(&dir)?;
                for s in &report.suites {
                    for (i, c) in s.checks.iter().enumerate() {
                        if let Some(w) = &c.witness {
                            let path = dir.join(format!("{}-{i}.json", s.suite));
                            std::fs::write(path, serde_json::to_string_pretty(w)?)?;
                        }
                    }
                }
            }
            let mut text = String::new();
            for s in &report.suites {
                for c in &s.checks {
                    let tag = match c.verdict {
                        Verdict::Pass => "PASS",
                        Verdict::Fail => "FAIL",
                        Verdict::Undecided => "UNDECIDED",
                    };
                    let slack = c.min_slack.as_ref().map(|r| format!(" min slack {r}")).unwrap_or_default();
                    text.push_str(&format!("{tag} {}: {} ({} samples){slack}\n", s.suite, c.name, c.evaluated));
                    if c.verdict != Verdict::Pass {
                        text.push_str(&format!("     {}\n", c.detail));
                    }
                }
            }
            text.push_str(&format!(
                "summary: {} pass, {} fail, {} undecided; digest {}",
                report.summary.pass, report.summary.fail, report.summary.undecided, report.digest
            ));
            emit(g.json, serde_json::to_value(&report)?, text);
            return Ok(report.passed());
        }
        Command::Replay { artifact } => {
            let a: Artifact = serde_json::from_str(&std::fs::read_to_string(&artifact)?)?;
            let o = suite::evaluate(&a);
            let text = format!("{:?}: {}", o.verdict, o.detail);
            let ok = o.verdict == Verdict::Pass;
            emit(g.json, serde_json::to_value(&o)?, text);
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
