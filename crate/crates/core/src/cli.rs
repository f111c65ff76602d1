//! Command line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bounds::{
    berlekamp_bound, best_curve, blahut_search, circ_sym_point, elias_binary_curve,
    eps_capacity_bound, general_elias_point, info_measures, min_distance_is_finite, piret_bound,
    plotkin_exponential, umbrella_p_point, umbrella_point, BlahutOptions, BoundCurve, BoundPoint,
    CurveOptions, Method,
};
use crate::channels::{
    additive_chernoff_matrix, blahut_counterexample, chernoff_distance, pairwise_reversible,
    reliability_upper, sequence_chernoff, ternary_unilateral, Channel,
};
use crate::distances::{
    build_bhattacharyya, build_hamming, build_lee, build_pentagon, build_qpsk, build_square,
    code_min_distance, to_similarity, Code, DistanceMatrix, WeightedGraph,
};
use crate::embedding::{classify, classify_blocks, euclidean_embed, DEFAULT_EMBED_TOL};
use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, Infinity};
use crate::format::round_json;
use crate::oracle::{kronecker_power, max_stable_set, optimal_min_distance, DEFAULT_VERTEX_BUDGET};
use crate::simplex::{Composition, StochasticMatrix};
use crate::theta::{
    lovasz_classical, solve_theta, solve_theta_graph, solve_theta_p, solve_theta_vf, SolverOptions,
};

/// Seed used whenever `--seed` is not given.
pub const DEFAULT_CLI_SEED: u64 = 0x7e7a;

const USAGE_EXIT: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "distbound",
    version,
    about = "Minimum-distance bounds via generalized theta functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a built-in or file distance matrix and its similarity graph.
    Distance(DistanceArgs),
    /// Check the squared-Euclidean conditions of a distance.
    CheckEmbedding(EmbeddingArgs),
    /// Solve a theta function.
    Theta(ThetaArgs),
    /// Evaluate one bound family.
    Bound(BoundArgs),
    /// Exhaustive ground truth for short block lengths.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Channel distances and reliability bounds.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Best-of upper bound curve over all applicable methods.
    Curve(CurveArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Solver {
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = DEFAULT_CLI_SEED)]
    seed: u64,
    #[arg(long = "max-iter", default_value_t = 50_000)]
    max_iter: usize,
    #[arg(long = "gap-tol", default_value_t = 1e-9)]
    gap_tol: f64,
}

impl Solver {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            starts: self.starts,
            seed: self.seed,
            max_iter: self.max_iter,
            gap_tol: self.gap_tol,
        }
    }
}

#[derive(Args, Debug)]
struct DistanceArgs {
    /// hamming:K, lee:K, pentagon, square, qpsk, example1, ternary-unilateral:ε, bsc:p or a JSON file.
    #[arg(long)]
    distance: String,
    /// Also print the similarity graph `e^{-d}`.
    #[arg(long)]
    graph: bool,
    /// Codewords separated by `;`, symbols by `,`. Prints the minimum distance.
    #[arg(long)]
    code: Option<String>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct EmbeddingArgs {
    #[arg(long)]
    distance: String,
    /// Symbol blocks, e.g. `0,1;2,3`, classified separately.
    #[arg(long)]
    blocks: Option<String>,
    /// Include an explicit embedding when one exists.
    #[arg(long)]
    embed: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ThetaArgs {
    #[arg(long, conflicts_with = "graph")]
    distance: Option<String>,
    /// Graph given by its similarity matrix (same specs as `--distance`).
    #[arg(long)]
    graph: Option<String>,
    /// Positive real or `inf`.
    #[arg(long, default_value = "1")]
    rho: String,
    #[arg(long = "P")]
    p: Option<String>,
    /// Conditional composition rows separated by `;`.
    #[arg(long = "V", requires = "f")]
    v: Option<String>,
    #[arg(long = "F")]
    f: Option<String>,
    /// Classical Lovász theta of the zero pattern.
    #[arg(long)]
    lovasz: bool,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// elias-binary, umbrella, umbrella-p, general-elias, circ-sym, berlekamp, piret, blahut, plotkin or eps-capacity.
    #[arg(long)]
    method: String,
    #[arg(long)]
    distance: Option<String>,
    #[arg(long)]
    graph: Option<String>,
    /// Comma separated λ values for elias-binary.
    #[arg(long)]
    lambda: Option<String>,
    /// Comma separated ρ values (`inf` allowed).
    #[arg(long)]
    rho: Option<String>,
    /// Comma separated rates.
    #[arg(long)]
    rate: Option<String>,
    #[arg(long = "P")]
    p: Option<String>,
    #[arg(long = "Q")]
    q: Option<String>,
    #[arg(long = "V")]
    v: Option<String>,
    #[arg(long = "F")]
    f: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Largest ε-stable set of the n-fold Kronecker power.
    Stable {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
        budget: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Largest minimum distance of an M-word code of length n.
    MinDistance {
        #[arg(long)]
        distance: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
        budget: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
enum ChannelCommand {
    /// Chernoff distance between two inputs or two input sequences.
    Chernoff {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        out: Output,
    },
    /// Bhattacharyya distance matrix.
    Bhattacharyya {
        #[arg(long)]
        channel: String,
        #[command(flatten)]
        out: Output,
    },
    /// Whether every input pair is pairwise reversible.
    Reversible {
        #[arg(long)]
        channel: String,
        #[command(flatten)]
        out: Output,
    },
    /// Upper bound curve on the reliability function.
    Reliability {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        rates: String,
        #[command(flatten)]
        solver: Solver,
        #[command(flatten)]
        out: Output,
    },
    /// The ternary unilateral counterexample value at ε.
    Counterexample {
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long)]
    distance: String,
    /// Comma separated rates, or `start:stop:count`.
    #[arg(long)]
    rates: String,
    /// Restrict to these methods (comma separated).
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "P")]
    p: Option<String>,
    #[command(flatten)]
    solver: Solver,
    #[command(flatten)]
    out: Output,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Distance(a) => distance_cmd(a),
        Command::CheckEmbedding(a) => embedding_cmd(a),
        Command::Theta(a) => theta_cmd(a),
        Command::Bound(a) => bound_cmd(a),
        Command::Oracle(o) => oracle_cmd(o),
        Command::Channel(c) => channel_cmd(c),
        Command::Curve(a) => curve_cmd(a),
    }
}

fn write_out(out: &Output, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: &Output, mut v: Value) -> Result<()> {
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    text.push('\n');
    write_out(out, &text)
}

fn emit_curve(out: &Output, curve: &BoundCurve) -> Result<()> {
    match &out.output {
        Some(path) => curve.emit_csv(path),
        None => write_out(out, &curve.to_csv()),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_f64)
        .collect()
}

fn parse_rho(s: &str) -> Result<ExtReal> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(Infinity);
    }
    let v = parse_f64(t)?;
    if v > 0.0 && v.is_finite() {
        Ok(Finite(v))
    } else if v == f64::INFINITY {
        Ok(Infinity)
    } else {
        Err(Error::InvalidInput(format!("ρ must be positive, got {t}")))
    }
}

fn parse_rhos(s: &str) -> Result<Vec<ExtReal>> {
    s.split(',').map(parse_rho).collect()
}

fn parse_rates(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b) = (parse_f64(parts[0])?, parse_f64(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad count {:?}", parts[2])))?;
        if n < 2 {
            return Ok(vec![a]);
        }
        return Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect());
    }
    parse_list(s)
}

fn parse_composition(s: &str) -> Result<Composition> {
    Composition::new(parse_list(s)?)
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(parse_list).collect()
}

fn parse_symbols(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("not a symbol: {t:?}")))
        })
        .collect()
}

fn parse_code(s: &str) -> Result<Code> {
    Code::new(s.split(';').map(parse_symbols).collect::<Result<_>>()?)
}

fn spec_arg<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("--{name} is required for this method")))
}

fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    }
}

fn spec_param<T: std::str::FromStr>(name: &str, p: Option<&str>) -> Result<T> {
    p.and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("{name} needs a parameter, e.g. {name}:2")))
}

/// Resolves a built-in name or JSON file into a distance matrix.
pub fn resolve_distance(spec: &str) -> Result<DistanceMatrix> {
    let (name, param) = split_spec(spec);
    match name {
        "hamming" => build_hamming(spec_param(name, param)?),
        "lee" => build_lee(spec_param(name, param)?),
        "pentagon" => Ok(build_pentagon()),
        "square" => Ok(build_square()),
        "qpsk" => Ok(build_qpsk()),
        "example1" => build_hamming(2),
        "ternary-unilateral" => {
            additive_chernoff_matrix(&ternary_unilateral(spec_param(name, param)?)?)
        }
        "bsc" => build_bhattacharyya(&Channel::bsc(spec_param(name, param)?)?),
        _ => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::InvalidInput(format!("unknown distance {spec:?}: {e}")))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("{spec}: {e}")))?;
            if v.get("W").is_some() {
                build_bhattacharyya(&Channel::from_json(&text)?)
            } else {
                DistanceMatrix::from_json(&text)
            }
        }
    }
}

/// Resolves a graph: a distance spec mapped through `e^{-d}`, or a JSON file
/// `{"K": k, "g": [[...]]}` holding similarities directly.
pub fn resolve_graph(spec: &str) -> Result<WeightedGraph> {
    if let Ok(text) = std::fs::read_to_string(spec) {
        let v: Value =
            serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{spec}: {e}")))?;
        if let Some(g) = v.get("g") {
            let rows: Vec<Vec<f64>> = serde_json::from_value(g.clone())
                .map_err(|e| Error::InvalidInput(format!("{spec}: {e}")))?;
            return WeightedGraph::new(rows);
        }
    }
    Ok(to_similarity(&resolve_distance(spec)?))
}

/// Resolves a channel: `bsc:p`, `ternary-unilateral:ε` or a JSON file.
pub fn resolve_channel(spec: &str) -> Result<Channel> {
    let (name, param) = split_spec(spec);
    match name {
        "bsc" => Channel::bsc(spec_param(name, param)?),
        "ternary-unilateral" => ternary_unilateral(spec_param(name, param)?),
        _ => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::InvalidInput(format!("unknown channel {spec:?}: {e}")))?;
            Channel::from_json(&text)
        }
    }
}

fn distance_cmd(a: DistanceArgs) -> Result<()> {
    let d = resolve_distance(&a.distance)?;
    let mut v = d.to_json();
    let o = v.as_object_mut().expect("object");
    o.insert(
        "circularly_symmetric".into(),
        json!(d.is_circularly_symmetric()),
    );
    if a.graph {
        o.insert("g".into(), json!(to_similarity(&d).rows()));
    }
    if let Some(code) = &a.code {
        let code = parse_code(code)?;
        o.insert("min_distance".into(), json!(code_min_distance(&code, &d)?));
        o.insert("rate".into(), json!(code.rate()));
    }
    emit_json(&a.out, v)
}

fn parse_blocks(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split(';').map(parse_symbols).collect()
}

fn embedding_cmd(a: EmbeddingArgs) -> Result<()> {
    let d = resolve_distance(&a.distance)?;
    let mut v = classify(&d).to_json();
    if let Some(blocks) = &a.blocks {
        let reports = classify_blocks(&d, &parse_blocks(blocks)?)?;
        v["blocks"] = Value::Array(reports.iter().map(|r| r.to_json()).collect());
    }
    if a.embed {
        v["embedding"] = match euclidean_embed(&d, DEFAULT_EMBED_TOL) {
            Ok(vecs) => json!(vecs),
            Err(_) => Value::Null,
        };
    }
    emit_json(&a.out, v)
}

fn theta_cmd(a: ThetaArgs) -> Result<()> {
    let opts = a.solver.options();
    let rho = parse_rho(&a.rho)?;
    if let Some(g) = &a.graph {
        let g = resolve_graph(g)?;
        let r = if a.lovasz {
            lovasz_classical(&g, &opts)?
        } else {
            solve_theta_graph(&g, rho, &opts)?
        };
        return emit_json(&a.out, r.to_json());
    }
    let d = resolve_distance(spec_arg(&a.distance, "distance")?)?;
    if a.lovasz {
        return emit_json(
            &a.out,
            lovasz_classical(&to_similarity(&d), &opts)?.to_json(),
        );
    }
    let v = match (&a.v, &a.f, &a.p) {
        (Some(v), Some(f), _) => {
            let v = StochasticMatrix::new(parse_matrix(v)?)?;
            let f = parse_composition(f)?;
            serde_json::to_value(solve_theta_vf(&d, rho, &v, &f, &opts)?).expect("serializes")
        }
        (None, None, Some(p)) => solve_theta_p(&d, rho, &parse_composition(p)?, &opts)?.to_json(),
        (None, None, None) => solve_theta(&d, rho, &opts)?.to_json(),
        _ => return Err(Error::InvalidInput("--V and --F go together".into())),
    };
    emit_json(&a.out, v)
}

fn bound_cmd(a: BoundArgs) -> Result<()> {
    let opts = a.solver.options();
    let rhos = || parse_rhos(a.rho.as_deref().unwrap_or("1"));
    let rates = || parse_list(spec_arg(&a.rate, "rate")?);
    let distance = || resolve_distance(spec_arg(&a.distance, "distance")?);
    let method = a.method.replace('_', "-").to_ascii_lowercase();
    match method.as_str() {
        "plotkin" => {
            let g = match (&a.graph, &a.distance) {
                (Some(g), _) => resolve_graph(g)?,
                (None, Some(d)) => to_similarity(&resolve_distance(d)?),
                _ => {
                    return Err(Error::InvalidInput(
                        "--distance or --graph is required".into(),
                    ))
                }
            };
            let n =
                a.n.ok_or_else(|| Error::InvalidInput("--n is required".into()))?;
            let m =
                a.m.ok_or_else(|| Error::InvalidInput("--m is required".into()))?;
            let mut rows = Vec::new();
            for rho in rhos()? {
                let th = solve_theta_graph(&g, rho, &opts)?.value;
                let bound = plotkin_exponential(m, n, th.to_f64(), rho);
                let mut row = json!({"rho": rho, "theta": th, "min_distance_bound": bound});
                if rho.is_infinite() {
                    row["min_distance_finite"] = json!(min_distance_is_finite(m, n, th.to_f64()));
                }
                rows.push(row);
            }
            return emit_json(&a.out, json!({"n": n, "M": m, "bounds": rows}));
        }
        "eps-capacity" => {
            let g = resolve_graph(spec_arg(&a.graph, "graph")?)?;
            let eps = a
                .eps
                .ok_or_else(|| Error::InvalidInput("--eps is required".into()))?;
            let rows = rhos()?
                .into_iter()
                .map(|rho| {
                    let b = eps_capacity_bound(&g, eps, rho, &opts)?;
                    let mut v = serde_json::to_value(b).expect("serializes");
                    v["rho"] = json!(rho);
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            return emit_json(&a.out, json!({"eps": eps, "bounds": rows}));
        }
        "info" => {
            let p = parse_composition(spec_arg(&a.p, "P")?)?;
            let v =
                a.v.as_deref()
                    .map(parse_matrix)
                    .transpose()?
                    .map(StochasticMatrix::new)
                    .transpose()?;
            let m = info_measures(&p, v.as_ref())?;
            return emit_json(&a.out, serde_json::to_value(m).expect("serializes"));
        }
        _ => {}
    }
    let points: Vec<BoundPoint> = match Method::parse(&method)? {
        Method::EliasBinary => {
            return emit_curve(
                &a.out,
                &elias_binary_curve(&parse_list(spec_arg(&a.lambda, "lambda")?)?)?,
            );
        }
        Method::Umbrella => {
            let d = distance()?;
            rhos()?
                .into_iter()
                .map(|r| umbrella_point(&d, r, &opts))
                .collect::<Result<_>>()?
        }
        Method::UmbrellaP => {
            let d = distance()?;
            let p = parse_composition(spec_arg(&a.p, "P")?)?;
            rhos()?
                .into_iter()
                .map(|r| umbrella_p_point(&d, r, &p, &opts))
                .collect::<Result<_>>()?
        }
        Method::GeneralElias => {
            let d = distance()?;
            let f = parse_composition(spec_arg(&a.f, "F")?)?;
            let v = StochasticMatrix::new(parse_matrix(spec_arg(&a.v, "V")?)?)?;
            rhos()?
                .into_iter()
                .map(|r| general_elias_point(&d, r, &f, &v, &opts))
                .collect::<Result<_>>()?
        }
        Method::CircSym => {
            let d = distance()?;
            let q = parse_composition(spec_arg(&a.q, "Q")?)?;
            rhos()?
                .into_iter()
                .map(|r| circ_sym_point(&d, &q, r, &opts))
                .collect::<Result<_>>()?
        }
        Method::Berlekamp => {
            let d = distance()?;
            rates()?
                .into_iter()
                .map(|r| Ok(berlekamp_bound(&d, r)?.point))
                .collect::<Result<_>>()?
        }
        Method::Piret => {
            let d = distance()?;
            let q = parse_composition(spec_arg(&a.q, "Q")?)?;
            rates()?
                .into_iter()
                .map(|r| piret_bound(&d, &q, r))
                .collect::<Result<_>>()?
        }
        Method::Blahut => {
            let d = distance()?;
            let p = parse_composition(spec_arg(&a.p, "P")?)?;
            let bo = BlahutOptions {
                seed: a.solver.seed,
                ..Default::default()
            };
            rates()?
                .into_iter()
                .map(|r| blahut_search(&d, &p, r, &bo))
                .collect::<Result<_>>()?
        }
    };
    emit_curve(
        &a.out,
        &BoundCurve::new(points, a.distance.clone().unwrap_or_default()),
    )
}

fn oracle_cmd(o: OracleCommand) -> Result<()> {
    match o {
        OracleCommand::Stable {
            graph,
            n,
            eps,
            p,
            budget,
            out,
        } => {
            let g = resolve_graph(&graph)?;
            let p = p.as_deref().map(parse_composition).transpose()?;
            let kp = kronecker_power(&g, n, p.as_ref(), budget)?;
            let s = max_stable_set(&kp, eps)?;
            emit_json(&out, json!({"size": s.size, "witness": s.witness}))
        }
        OracleCommand::MinDistance {
            distance,
            n,
            m,
            p,
            budget,
            out,
        } => {
            let d = resolve_distance(&distance)?;
            let p = p.as_deref().map(parse_composition).transpose()?;
            let r = optimal_min_distance(n, m, &d, p.as_ref(), budget)?;
            emit_json(
                &out,
                json!({"distance": r.distance, "witness": r.witness.words()}),
            )
        }
    }
}

fn channel_cmd(c: ChannelCommand) -> Result<()> {
    match c {
        ChannelCommand::Chernoff { channel, x, y, out } => {
            let w = resolve_channel(&channel)?;
            let (x, y) = (parse_symbols(&x)?, parse_symbols(&y)?);
            let r = if x.len() == 1 && y.len() == 1 {
                if x[0] >= w.inputs() || y[0] >= w.inputs() {
                    return Err(Error::InvalidInput("input symbol out of range".into()));
                }
                chernoff_distance(w.row(x[0]), w.row(y[0]))?
            } else {
                sequence_chernoff(&w, &x, &y)?
            };
            emit_json(&out, serde_json::to_value(r).expect("serializes"))
        }
        ChannelCommand::Bhattacharyya { channel, out } => emit_json(
            &out,
            build_bhattacharyya(&resolve_channel(&channel)?)?.to_json(),
        ),
        ChannelCommand::Reversible { channel, out } => {
            let w = resolve_channel(&channel)?;
            emit_json(
                &out,
                json!({"pairwise_reversible": pairwise_reversible(&w)}),
            )
        }
        ChannelCommand::Reliability {
            channel,
            rates,
            solver,
            out,
        } => {
            let w = resolve_channel(&channel)?;
            let opts = CurveOptions {
                solver: solver.options(),
                ..Default::default()
            };
            let (_, curve) = reliability_upper(&w, &parse_rates(&rates)?, &opts)?;
            emit_curve(&out, &curve)
        }
        ChannelCommand::Counterexample { eps, out } => emit_json(
            &out,
            json!({"eps": eps, "value": blahut_counterexample(eps)?}),
        ),
    }
}

fn curve_cmd(a: CurveArgs) -> Result<()> {
    let d = resolve_distance(&a.distance)?;
    let mut opts = CurveOptions {
        solver: a.solver.options(),
        composition: a.p.as_deref().map(parse_composition).transpose()?,
        ..Default::default()
    };
    opts.blahut.seed = a.solver.seed;
    if let Some(m) = &a.method {
        opts.methods = m.split(',').map(Method::parse).collect::<Result<_>>()?;
    }
    let curve = best_curve(&d, &parse_rates(&a.rates)?, &opts)?;
    emit_curve(&a.out, &curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_parsing() {
        assert_eq!(parse_rho("inf").unwrap(), Infinity);
        assert_eq!(parse_rho(" 2.5").unwrap(), Finite(2.5));
        assert!(parse_rho("0").is_err());
        assert!(parse_rho("-1").is_err());
    }

    #[test]
    fn rate_ranges() {
        assert_eq!(parse_rates("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_rates("0.1,0.2").unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn builtins_match_constructors() {
        assert_eq!(
            resolve_distance("hamming:3").unwrap(),
            build_hamming(3).unwrap()
        );
        assert_eq!(resolve_distance("lee:5").unwrap(), build_lee(5).unwrap());
        assert_eq!(resolve_distance("pentagon").unwrap(), build_pentagon());
        assert_eq!(resolve_distance("square").unwrap(), build_square());
        assert_eq!(resolve_distance("qpsk").unwrap(), build_qpsk());
        assert_eq!(
            resolve_distance("ternary-unilateral:0.01").unwrap(),
            additive_chernoff_matrix(&ternary_unilateral(0.01).unwrap()).unwrap()
        );
        assert_eq!(
            resolve_channel("bsc:0.1").unwrap(),
            Channel::bsc(0.1).unwrap()
        );
        assert!(resolve_distance("hamming").is_err());
        assert!(resolve_distance("/no/such/file.json").is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["distbound", "--bogus"]), USAGE_EXIT);
        assert_eq!(run(["distbound"]), USAGE_EXIT);
        assert_eq!(run(["distbound", "theta", "--distance", "hamming:1"]), 1);
    }
}
