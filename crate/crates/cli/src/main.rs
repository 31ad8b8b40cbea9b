mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use symconv::polycert::{
    classify, run_counterexample, Certify3dOptions, ClassifyOptions, CounterexampleOptions,
};
use symconv::quadform::{catalog, QuadForm};
use symconv::roc::{compute_eta, ConeSearch, EtaOptions};
use symconv::translate::{
    translation_bound_2d, two_well, two_well_axes, Axis, TranslationBound, Wells, DEFAULT_ALPHAS,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] symconv::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "symconv",
    version,
    about = "Generalized convexity of energies on symmetric matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Seed of every randomized search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Azimuth resolution of the compatible-cone grid (multiple of 4).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a quadratic form: convex, symmetric polyconvex, symmetric
    /// rank-one convex or none.
    Classify {
        #[arg(long)]
        dim: usize,
        /// Form JSON file, or `builtin:<name>`.
        #[arg(long)]
        form: String,
        /// Supergradient restarts of the 3d translator search.
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compute η, the minimum of f0 over unit compatible strains.
    Eta {
        /// Random restarts of the independent cross-check.
        #[arg(long, default_value_t = 1000)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full pipeline on f0 - η|ε|².
    Counterexample {
        /// Random restarts of the η cross-check.
        #[arg(long, default_value_t = 1000)]
        restarts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Translation lower bound of a 2d multi-well energy on a strain grid.
    Translate {
        /// Wells JSON `{wells, moduli}`, or `builtin:two_well`.
        #[arg(long = "f")]
        wells: String,
        /// `lo,hi` for all axes or `lo1,hi1,lo2,hi2,lo3,hi3`, in embedded
        /// coordinates (ε11, ε22, √2 ε12). Defaults to the two-well fixture
        /// box for `builtin:two_well`.
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: Option<String>,
        /// Nodes per axis.
        #[arg(long, default_value_t = 64)]
        res: usize,
        /// Comma-separated translator weights; 0 is always added.
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

/// A finished command: the rendered output and whether it is flagged.
struct Outcome {
    body: String,
    summary: String,
    flagged: bool,
}

fn load_form(source: &str, dim: usize) -> CliResult<QuadForm> {
    if !(dim == 2 || dim == 3) {
        return Err(CliError::Input(format!(
            "field `dim`: must be 2 or 3, got {dim}"
        )));
    }
    let form = if let Some(name) = source.strip_prefix("builtin:") {
        if name == "counterexample" {
            let eta = compute_eta(&EtaOptions {
                restarts: 0,
                ..Default::default()
            })?;
            catalog::f_eta(eta.eta)
        } else {
            catalog::builtin(name).ok_or_else(|| {
                CliError::Input(format!(
                    "field `form`: unknown builtin `{name}`; known: {}, counterexample",
                    catalog::BUILTIN_NAMES.join(", ")
                ))
            })?
        }
    } else {
        let text = std::fs::read_to_string(source)
            .map_err(|e| CliError::Input(format!("field `form`: cannot read {source}: {e}")))?;
        QuadForm::from_json(&text)?
    };
    if form.dim() != dim {
        return Err(CliError::Input(format!(
            "field `dim`: --dim {dim} but the form has dim {}",
            form.dim()
        )));
    }
    Ok(form)
}

fn search(grid: usize) -> CliResult<ConeSearch> {
    if grid < 16 || grid % 4 != 0 {
        return Err(CliError::Input(format!(
            "field `grid`: must be a multiple of 4 and at least 16, got {grid}"
        )));
    }
    Ok(ConeSearch::with_grid(grid))
}

fn require_json(format: Format) -> CliResult<()> {
    if format != Format::Json {
        return Err(CliError::Input(
            "field `format`: this command only writes json".into(),
        ));
    }
    Ok(())
}

fn config(common: &Common, extra: Value) -> Value {
    let mut cfg = json!({
        "seed": common.seed,
        "grid": common.grid,
        "format": common.format.as_str(),
        "output_path": common.out.as_ref().map(|p| p.display().to_string()),
        "tolerances": report::tolerances(),
    });
    if let (Value::Object(c), Value::Object(e)) = (&mut cfg, extra) {
        c.extend(e);
    }
    cfg
}

fn envelope(command: &str, config: Value, result: Value) -> String {
    let doc = json!({
        "tool": "symconv",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

fn cmd_classify(dim: usize, form: &str, restarts: usize, common: &Common) -> CliResult<Outcome> {
    require_json(common.format)?;
    if restarts == 0 {
        return Err(CliError::Input("field `restarts`: must be positive".into()));
    }
    let f = load_form(form, dim)?;
    let opts = ClassifyOptions {
        search: search(common.grid)?,
        certify: Certify3dOptions {
            restarts,
            seed: common.seed,
            ..Default::default()
        },
    };
    let c = classify(&f, &opts)?;
    let result = json!({ "form": report::form(&f), "classification": report::classification(&c) });
    let cfg = config(
        common,
        json!({ "dim": dim, "form": form, "restarts": restarts }),
    );
    let mut summary = format!("{}: {}", f.label(), c.class.as_str());
    if c.inconclusive {
        summary.push_str(" (translator margin inconclusive)");
    }
    Ok(Outcome {
        body: envelope("classify", cfg, result),
        summary,
        flagged: c.inconclusive,
    })
}

fn cmd_eta(restarts: usize, common: &Common) -> CliResult<Outcome> {
    require_json(common.format)?;
    let opts = EtaOptions {
        search: search(common.grid)?,
        seed: common.seed,
        restarts,
    };
    let r = compute_eta(&opts)?;
    let cfg = config(common, json!({ "restarts": restarts }));
    let summary = format!(
        "eta = {:.15} (restarts: {}), structure check {}",
        r.eta,
        r.restarts_eta
            .map_or("skipped".to_string(), |e| format!("{e:.15}")),
        if r.structure.passed {
            "passed"
        } else {
            "failed"
        }
    );
    Ok(Outcome {
        body: envelope("eta", cfg, report::eta(&r)),
        summary,
        flagged: r.flagged,
    })
}

fn cmd_counterexample(restarts: usize, common: &Common) -> CliResult<Outcome> {
    require_json(common.format)?;
    let s = search(common.grid)?;
    let opts = CounterexampleOptions {
        eta: EtaOptions {
            search: s,
            seed: common.seed,
            restarts,
        },
        search: s,
        certify: Certify3dOptions {
            seed: common.seed,
            ..Default::default()
        },
    };
    let r = run_counterexample(&opts)?;
    let cfg = config(common, json!({ "restarts": restarts }));
    let mut summary = String::new();
    let _ = writeln!(summary, "eta                         {:.15}", r.eta.eta);
    let _ = writeln!(
        summary,
        "min over compatible set     {:.3e}",
        r.rank_one.search.min_value()
    );
    let _ = writeln!(summary, "symmetric rank-one convex   {}", r.sr1c);
    let _ = writeln!(
        summary,
        "best translator margin      {:.3e}",
        r.certify.best_phi
    );
    let _ = writeln!(summary, "symmetric polyconvex        {}", r.spc);
    let _ = writeln!(
        summary,
        "linear system ranks         L: {}, [L|c]: {}",
        r.linear_system.rank_l, r.linear_system.rank_aug
    );
    let _ = writeln!(
        summary,
        "linear system inconsistent  {}",
        r.linear_system_inconsistent
    );
    let _ = write!(
        summary,
        "{}",
        if r.flagged {
            "FLAGGED: the pipeline does not separate the two classes"
        } else {
            "separation confirmed"
        }
    );
    Ok(Outcome {
        body: envelope("counterexample", cfg, report::counterexample(&r)),
        summary,
        flagged: r.flagged,
    })
}

fn parse_list(field: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| {
                CliError::Input(format!(
                    "field `{field}`: `{}` is not a number: {e}",
                    t.trim()
                ))
            })
        })
        .collect()
}

fn parse_box(text: &str, res: usize) -> CliResult<[Axis; 3]> {
    let v = parse_list("box", text)?;
    let pairs: Vec<(f64, f64)> = match v.len() {
        2 => vec![(v[0], v[1]); 3],
        6 => v.chunks(2).map(|c| (c[0], c[1])).collect(),
        n => {
            return Err(CliError::Input(format!(
                "field `box`: expected 2 or 6 numbers, got {n}"
            )))
        }
    };
    let mut axes = Vec::with_capacity(3);
    for (lo, hi) in pairs {
        axes.push(
            Axis::new(lo, hi, res).map_err(|e| CliError::Input(format!("field `box`: {e}")))?,
        );
    }
    Ok([axes[0], axes[1], axes[2]])
}

fn translation_csv(tb: &TranslationBound) -> String {
    let mut out = String::from("eps11,eps22,eps12,f,envelope,bound,best_alpha\n");
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..tb.len() {
        let [x, y, z] = tb.point(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            x,
            y,
            z / r2,
            tb.f[i],
            tb.envelope[i],
            tb.bound[i],
            tb.best_alpha[i]
        );
    }
    out
}

fn cmd_translate(
    wells: &str,
    bounds: Option<&str>,
    res: usize,
    alphas: Option<&str>,
    out: Option<&PathBuf>,
    format: Format,
) -> CliResult<Outcome> {
    if res < 2 {
        return Err(CliError::Input(format!(
            "field `res`: must be at least 2, got {res}"
        )));
    }
    let (energy, default_axes) = match wells.strip_prefix("builtin:") {
        Some("two_well") => (two_well(), Some(two_well_axes(res.max(4))?)),
        Some(name) => {
            return Err(CliError::Input(format!(
                "field `f`: unknown builtin `{name}`; known: two_well"
            )))
        }
        None => {
            let w =
                Wells::from_file(wells).map_err(|e| CliError::Input(format!("field `f`: {e}")))?;
            (w, None)
        }
    };
    let axes = match (bounds, default_axes) {
        (Some(b), _) => parse_box(b, res)?,
        (None, Some(a)) if res >= 4 => a,
        _ => {
            return Err(CliError::Input(
                "field `box`: required for wells files".into(),
            ))
        }
    };
    let alphas = match alphas {
        Some(a) => parse_list("alphas", a)?,
        None => DEFAULT_ALPHAS.to_vec(),
    };
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(CliError::Input(format!(
            "field `alphas`: must be nonnegative, got {a}"
        )));
    }
    let tb = translation_bound_2d(|e| energy.eval(e), axes, &alphas, &Default::default())?;
    let gap =
        tb.f.iter()
            .zip(&tb.bound)
            .fold(0.0f64, |m, (f, b)| m.max(f - b));
    let summary = format!(
        "{} nodes, alphas {:?}, largest f - bound {:.3e}",
        tb.len(),
        tb.alphas,
        gap
    );
    let body = match format {
        Format::Csv => translation_csv(&tb),
        Format::Json => {
            let cfg = json!({
                "f": wells,
                "box": axes.iter().map(|a| [a.start, a.end()]).collect::<Vec<_>>(),
                "res": res,
                "alphas": tb.alphas,
                "format": format.as_str(),
                "output_path": out.map(|p| p.display().to_string()),
            });
            let points: Vec<[f64; 3]> = (0..tb.len()).map(|i| tb.point(i)).collect();
            let result = json!({
                "wells": energy,
                "points": points,
                "f": tb.f,
                "envelope": tb.envelope,
                "bound": tb.bound,
                "best_alpha": tb.best_alpha,
            });
            envelope("translate", cfg, result)
        }
    };
    Ok(Outcome {
        body,
        summary,
        flagged: false,
    })
}

fn run(cli: &Cli) -> CliResult<(Outcome, Option<PathBuf>)> {
    Ok(match &cli.command {
        Command::Classify {
            dim,
            form,
            restarts,
            common,
        } => (
            cmd_classify(*dim, form, *restarts, common)?,
            common.out.clone(),
        ),
        Command::Eta { restarts, common } => (cmd_eta(*restarts, common)?, common.out.clone()),
        Command::Counterexample { restarts, common } => {
            (cmd_counterexample(*restarts, common)?, common.out.clone())
        }
        Command::Translate {
            wells,
            bounds,
            res,
            alphas,
            out,
            format,
        } => (
            cmd_translate(
                wells,
                bounds.as_deref(),
                *res,
                alphas.as_deref(),
                out.as_ref(),
                *format,
            )?,
            out.clone(),
        ),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (outcome, out) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match out {
        Some(path) => {
            if let Err(source) = std::fs::write(&path, &outcome.body) {
                eprintln!(
                    "error: {}",
                    CliError::Write {
                        path: path.display().to_string(),
                        source
                    }
                );
                return ExitCode::from(1);
            }
        }
        None => {
            // A closed pipe (`| head`) is not an error worth reporting.
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout
                .write_all(outcome.body.as_bytes())
                .and_then(|_| stdout.flush())
            {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: cannot write to stdout: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    eprintln!("{}", outcome.summary);
    ExitCode::from(if outcome.flagged { 2 } else { 0 })
}
