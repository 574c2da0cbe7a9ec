use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use graph_selftest::bell::{
    build_inequality, experimental_frame, optimal_settings, quantum_bound_search, BellInequality,
    ConstructionSpec, Family, Preset, DEFAULT_GRID_RESOLUTION,
};
use graph_selftest::experiment::{
    bell_value_from_counts, noisy_state, required_settings, setting_label, simulate_bell_counts,
    CountsRecord, FidelityInput, NoiseSpec, SimulationConfig, StateFile,
};
use graph_selftest::graph::{generators, CanonicalState, Graph};
use graph_selftest::linalg::{expectation, StateVector};
use graph_selftest::report::{format_uncertain, round_json};
use graph_selftest::robustness::{
    bound_curve, cached_coefficients, certify, published_coefficients, RobustnessCoefficients,
    RobustnessProblem, Verdict,
};
use graph_selftest::{Error, Result};

const JSON_DIGITS: usize = 6;

#[derive(Parser, Debug)]
#[command(
    name = "graph-selftest",
    version,
    about = "Bell inequalities and robust self-testing for graph states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an inequality and report its terms, bounds and settings.
    Bell(BellArgs),
    /// Compute (s, mu) robustness coefficients and the fidelity bound curve.
    Robustness(RobustnessArgs),
    /// Simulate counts for every setting of an inequality.
    Simulate(SimulateArgs),
    /// Turn a Bell value or counts into a fidelity certificate.
    Certify(CertifyArgs),
    /// Direct fidelity estimate from GHZ or cluster measurement data.
    Fidelity(FidelityArgs),
}

#[derive(Args, Debug)]
struct BellArgs {
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<Preset>,
    /// ConstructionSpec JSON file.
    #[arg(long, requires = "graph")]
    spec: Option<PathBuf>,
    /// `star4`, `line4`, or an edge-list / graph JSON file.
    #[arg(long)]
    graph: Option<String>,
    /// Also run the angle-grid search at this resolution.
    #[arg(long)]
    search_grid: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct RobustnessArgs {
    #[arg(long)]
    preset: Preset,
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid: usize,
    /// Coefficients JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bound curve CSV output.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    preset: Preset,
    /// JSON simulation config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `ghz4`, `cluster4` or a state JSON file. Defaults to the preset's
    /// lab state.
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    noise_p: Option<f64>,
    #[arg(long)]
    events: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the computational-basis diagonal of the pair noise.
    #[arg(long)]
    dephased: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    preset: Preset,
    #[arg(long, conflicts_with_all = ["counts", "counts_dir"])]
    bell_value: Option<f64>,
    #[arg(long, default_value_t = 0.0, requires = "bell_value")]
    sigma: f64,
    /// Counts record files, one per setting.
    #[arg(long, num_args = 1.., conflicts_with = "counts_dir")]
    counts: Vec<PathBuf>,
    /// Directory of `counts_*.json` files.
    #[arg(long)]
    counts_dir: Option<PathBuf>,
    /// `cached`, `published`, `recompute`, or a coefficients JSON file.
    #[arg(long, default_value = "cached")]
    coefficients: String,
    /// Grid resolution for `--coefficients recompute`.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid: usize,
    /// Certificate JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Bell(a) => cmd_bell(a),
        Command::Robustness(a) => cmd_robustness(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Fidelity(a) => cmd_fidelity(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{} is not a readable file",
            path.display()
        )))
    }
}

fn require_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::InvalidArgument(
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

fn to_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_json(&mut v, JSON_DIGITS);
    v
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value prints") + "\n"
}

fn load_graph(arg: &str) -> Result<Graph> {
    match arg {
        "star4" => Ok(Graph::star(4)),
        "line4" => Ok(Graph::line(4)),
        path => {
            let text = read(Path::new(path))?;
            if text.trim_start().starts_with('{') {
                Graph::from_json(&text)
            } else {
                Graph::parse_edge_list(&text)
            }
        }
    }
}

fn sites(set: &BTreeSet<usize>) -> String {
    let items: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn cmd_bell(a: BellArgs) -> Result<ExitCode> {
    let (ineq, family): (BellInequality, Option<Family>) = match (a.preset, &a.spec) {
        (Some(p), _) => (p.build()?, Some(p.family())),
        (None, Some(path)) => {
            require_file(path)?;
            let spec = ConstructionSpec::from_json(&read(path)?)?;
            let graph = load_graph(a.graph.as_deref().unwrap_or_default())?;
            (
                build_inequality(&generators(&graph), &spec, "custom")?,
                None,
            )
        }
        (None, None) => unreachable!("clap requires one of --preset/--spec"),
    };
    let graph_settings = optimal_settings(&ineq).describe();
    let lab = match family {
        Some(f) => Some((f, experimental_frame(&ineq)?.1.describe())),
        None => None,
    };
    let search = a
        .search_grid
        .map(|res| quantum_bound_search(&ineq, res))
        .transpose()?;

    if a.json {
        let mut report = json!({
            "inequality": ineq.name,
            "terms": ineq.term_strings(),
            "ac": ineq.ac_set,
            "beta_c": ineq.classical_bound,
            "beta_q": ineq.quantum_bound,
            "graph_frame_settings": graph_settings,
        });
        if let Some((f, lines)) = &lab {
            report["experimental_frame_settings"] = json!(lines);
            report["hadamard_sites"] = json!(f.hadamard_sites());
        }
        if let Some(s) = &search {
            report["search"] = json!(s);
        }
        round_json(&mut report, JSON_DIGITS);
        print!("{}", pretty(&report));
        return Ok(ExitCode::SUCCESS);
    }

    println!("{}: {}", ineq.name, ineq.term_strings().join(" + "));
    println!("AC = {}", sites(&ineq.ac_set));
    println!("beta_C = {}", ineq.classical_bound);
    println!("beta_Q = {:.6}", ineq.quantum_bound);
    println!("optimal settings, graph frame:");
    for line in &graph_settings {
        println!("  {line}");
    }
    if let Some((f, lines)) = &lab {
        println!(
            "optimal settings, experimental frame (H on {}):",
            sites(&f.hadamard_sites())
        );
        for line in lines {
            println!("  {line}");
        }
    }
    if let Some(s) = &search {
        let angles: Vec<String> = s.angles.iter().map(|t| format!("{t:.4}")).collect();
        println!(
            "grid search ({} per axis): {:.6} at theta = [{}]",
            s.grid_resolution,
            s.value,
            angles.join(", ")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_robustness(a: RobustnessArgs) -> Result<ExitCode> {
    for path in a.out.iter().chain(a.curve.iter()) {
        require_parent(path)?;
    }
    let coeffs = RobustnessProblem::for_preset(a.preset)?.optimize_s(a.grid)?;
    let curve = bound_curve(&coeffs, a.points)?;
    let report = to_json(&coeffs);
    match &a.out {
        Some(path) => write(path, &pretty(&report))?,
        None => print!("{}", pretty(&report)),
    }
    if let Some(path) = &a.curve {
        write(path, &curve.to_csv())?;
    }
    eprintln!(
        "{}: s = {:.4}, mu = {:.4}, F = 1/2 at Bell value {}",
        coeffs.inequality,
        coeffs.s,
        coeffs.mu,
        curve.crossing.map_or_else(
            || "outside [beta_C, beta_Q]".to_string(),
            |b| format!("{b:.4}")
        )
    );
    Ok(ExitCode::SUCCESS)
}

fn load_state(name: &str) -> Result<StateVector> {
    match name.parse::<CanonicalState>() {
        Ok(c) => Ok(graph_selftest::graph::canonical_state(c)),
        Err(_) if Path::new(name).is_file() => StateFile::from_json(&read(Path::new(name))?),
        Err(_) => Err(Error::UnknownState(name.to_string())),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let base = match &a.config {
        Some(path) => {
            require_file(path)?;
            serde_json::from_str::<SimulationConfig>(&read(path)?)?
        }
        None => SimulationConfig {
            state: a.preset.family().canonical_state().name().to_string(),
            noise_p: 0.0,
            events_per_setting: 100_000,
            seed: 0,
            dephased: false,
        },
    };
    let config = SimulationConfig {
        state: a.state.clone().unwrap_or(base.state),
        noise_p: a.noise_p.unwrap_or(base.noise_p),
        events_per_setting: a.events.unwrap_or(base.events_per_setting),
        seed: a.seed.unwrap_or(base.seed),
        dephased: a.dephased || base.dephased,
    };
    if config.events_per_setting == 0 {
        return Err(Error::InvalidArgument(
            "events per setting must be positive".into(),
        ));
    }
    let family = a.preset.family();
    let pure = load_state(&config.state)?;
    let rho = noisy_state(
        &pure,
        &NoiseSpec::preset(family, config.noise_p, config.dephased)?,
    )?;
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.out_dir.display())))?;

    let ineq = a.preset.build()?;
    let (_, settings) = experimental_frame(&ineq)?;
    let records = simulate_bell_counts(
        &rho,
        &ineq,
        &settings,
        config.events_per_setting as f64,
        config.seed,
    )?;
    let mut files = Vec::new();
    for r in &records {
        let name = format!("counts_{}.json", r.setting.replace(' ', "_"));
        write(&a.out_dir.join(&name), &(r.to_json() + "\n"))?;
        files.push(name);
    }
    let (value, sigma) = bell_value_from_counts(&records, &ineq)?;
    let exact = expectation(
        &rho,
        &graph_selftest::bell::bell_operator_for(&ineq, &settings)?,
    )?;
    let summary = to_json(&json!({
        "config": config,
        "inequality": ineq.name,
        "settings": required_settings(&ineq).iter().map(|s| setting_label(s)).collect::<Vec<_>>(),
        "files": files,
        "bell_value": value,
        "bell_sigma": sigma,
        "expected_value": exact,
        "beta_q": ineq.quantum_bound,
    }));
    write(&a.out_dir.join("summary.json"), &pretty(&summary))?;
    println!(
        "{}: <B> = {} (exact {:.4}, beta_Q = {:.4}), {} settings written to {}",
        ineq.name,
        format_uncertain(value, sigma),
        exact,
        ineq.quantum_bound,
        records.len(),
        a.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn counts_files(a: &CertifyArgs) -> Result<Vec<PathBuf>> {
    if let Some(dir) = &a.counts_dir {
        let entries = fs::read_dir(dir)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("counts_") && n.ends_with(".json"))
            })
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no counts_*.json files in {}",
                dir.display()
            )));
        }
        Ok(files)
    } else {
        Ok(a.counts.clone())
    }
}

fn resolve_coefficients(
    source: &str,
    preset: Preset,
    grid: usize,
) -> Result<RobustnessCoefficients> {
    match source {
        "cached" => Ok(cached_coefficients(preset)),
        "published" => Ok(published_coefficients(preset)),
        "recompute" => RobustnessProblem::for_preset(preset)?.optimize_s(grid),
        path => {
            let file = Path::new(path);
            if !file.is_file() {
                return Err(Error::InvalidArgument(format!(
                    "coefficients must be cached, published, recompute or a file; got {path:?}"
                )));
            }
            let c = RobustnessCoefficients::from_json(&read(file)?)?;
            if c.inequality != preset.name() {
                return Err(Error::InvalidArgument(format!(
                    "coefficients are for {}, not {preset}",
                    c.inequality
                )));
            }
            Ok(c)
        }
    }
}

fn cmd_certify(a: CertifyArgs) -> Result<ExitCode> {
    let files = counts_files(&a)?;
    for f in &files {
        require_file(f)?;
    }
    if let Some(path) = &a.out {
        require_parent(path)?;
    }
    let (value, sigma, input) = match a.bell_value {
        Some(v) => (v, a.sigma, json!({"bell_value": v, "sigma": a.sigma})),
        None if files.is_empty() => {
            return Err(Error::InvalidArgument(
                "one of --bell-value, --counts or --counts-dir is required".into(),
            ))
        }
        None => {
            let records = files
                .iter()
                .map(|f| CountsRecord::from_json(&read(f)?))
                .collect::<Result<Vec<_>>>()?;
            let (v, s) = bell_value_from_counts(&records, &a.preset.build()?)?;
            let names: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
            (v, s, json!({ "counts": names }))
        }
    };
    let coeffs = resolve_coefficients(&a.coefficients, a.preset, a.grid)?;
    let cert = certify(value, sigma, &coeffs)?;
    let mut report = to_json(&cert);
    report["config"] = json!({
        "preset": a.preset.name(),
        "coefficients": a.coefficients,
        "input": input,
    });
    round_json(&mut report, JSON_DIGITS);
    if let Some(path) = &a.out {
        write(path, &pretty(&report))?;
    }
    if a.json {
        print!("{}", pretty(&report));
    } else {
        println!("{}: {}", cert.inequality, cert.summary());
    }
    Ok(match cert.verdict {
        Verdict::GenuineEntanglement => ExitCode::SUCCESS,
        Verdict::Inconclusive => ExitCode::from(2),
    })
}

fn cmd_fidelity(a: FidelityArgs) -> Result<ExitCode> {
    require_file(&a.input)?;
    let input = FidelityInput::from_json(&read(&a.input)?)?;
    let (f, s) = input.estimate()?;
    let kind = match input {
        FidelityInput::Ghz { .. } | FidelityInput::GhzCounts { .. } => "ghz",
        FidelityInput::Cluster { .. } => "cluster",
    };
    if a.json {
        print!(
            "{}",
            pretty(&to_json(&json!({"kind": kind, "fidelity": f, "sigma": s})))
        );
    } else {
        println!("{kind} fidelity F = {} ({f:.6})", format_uncertain(f, s));
    }
    Ok(ExitCode::SUCCESS)
}
