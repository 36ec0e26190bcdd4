//! Command line front end: configuration parsing, the solve/trace
//! orchestration, the JSON result document, and the SVG rendering.

use std::path::PathBuf;

use clap::Parser;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::descent::{
    self, DescentOpts, DescentReport, DescentStatus, DifferentialState, ProblemSpec,
};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::trajectories::{self, CriticalKind, Termination, TraceOpts, TrajectoryGraph};

#[derive(Parser, Debug)]
#[command(
    name = "boutroux",
    about = "Quadratic differentials with prescribed simple poles and purely imaginary periods: \
             gradient descent solver and critical trajectory tracer"
)]
struct Cli {
    /// Pole locations: pairs "re,im;re,im;...", brackets "[re,im],[re,im]",
    /// or bare reals "a,b,c"
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,

    /// Polar part coefficients t_1..t_R at infinity, same grammar as --points
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,

    /// Residue target at infinity (real)
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,

    /// Initial degree of the stagnation factor S
    #[arg(long = "L")]
    l_degree: Option<usize>,

    /// Seed for the random initialization
    #[arg(long)]
    seed: Option<u64>,

    /// Try this many consecutive seeds and keep the best run
    #[arg(long)]
    seeds: Option<usize>,

    /// Exit threshold on the descent functional
    #[arg(long)]
    tol: Option<f64>,

    /// Iteration budget
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,

    /// Initial flow step
    #[arg(long)]
    dt0: Option<f64>,

    /// Write the JSON result document here
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write an SVG of the trajectory graph here
    #[arg(long)]
    svg: Option<PathBuf>,

    /// "solve" (default) or "trace-only"
    #[arg(long)]
    mode: Option<String>,

    /// JSON result document to re-trace (trace-only mode)
    #[arg(long)]
    state: Option<PathBuf>,

    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Effective run configuration, echoed into the result document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub points: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub t0: f64,
    pub l_degree: usize,
    pub seed: u64,
    pub seeds: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub dt0: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            points: Vec::new(),
            phi: Vec::new(),
            t0: 1.0,
            l_degree: 0,
            seed: 1,
            seeds: 1,
            tol: 1e-10,
            max_iter: 20_000,
            dt0: 0.01,
        }
    }
}

/// Config file shape: any subset of the fields of [`RunConfig`].
#[derive(Debug, Clone, Default, Deserialize)]
struct PartialConfig {
    points: Option<Vec<[f64; 2]>>,
    phi: Option<Vec<[f64; 2]>>,
    t0: Option<f64>,
    l_degree: Option<usize>,
    seed: Option<u64>,
    seeds: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    dt0: Option<f64>,
}

fn c2a(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn a2c(a: &[f64; 2]) -> Complex64 {
    Complex64::new(a[0], a[1])
}

impl RunConfig {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        if self.points.is_empty() {
            return Err(Error::ConfigError("no pole locations given (--points)".into()));
        }
        let spec = ProblemSpec {
            e_points: self.points.iter().map(a2c).collect(),
            phi: self.phi.iter().map(a2c).collect(),
            t0: self.t0,
            l_degree: self.l_degree,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parse a complex list. Three grammars: brackets `[re,im],[re,im]`,
/// semicolon pairs `re,im;re,im`, or bare reals `a,b,c`. A pair token with a
/// single field is a real.
pub fn parse_complex_list(input: &str) -> Result<Vec<Complex64>> {
    let s = input.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parse_real = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::ConfigError(format!("cannot parse number {:?}", t.trim())))
    };
    let parse_pair = |t: &str| -> Result<Complex64> {
        let fields: Vec<&str> = t.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
        match fields.len() {
            1 => Ok(Complex64::new(parse_real(fields[0])?, 0.0)),
            2 => Ok(Complex64::new(parse_real(fields[0])?, parse_real(fields[1])?)),
            _ => Err(Error::ConfigError(format!(
                "expected \"re,im\" or a single real, got {:?}",
                t
            ))),
        }
    };
    if s.contains('[') {
        let mut out = Vec::new();
        let mut rest = s;
        while let Some(open) = rest.find('[') {
            let close = rest[open..]
                .find(']')
                .ok_or_else(|| Error::ConfigError(format!("unbalanced bracket in {:?}", input)))?
                + open;
            out.push(parse_pair(&rest[open + 1..close])?);
            rest = &rest[close + 1..];
        }
        Ok(out)
    } else if s.contains(';') {
        s.split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_pair)
            .collect()
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| Ok(Complex64::new(parse_real(t)?, 0.0)))
            .collect()
    }
}

fn merge_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        let part: PartialConfig = serde_json::from_str(&text)?;
        if let Some(v) = part.points {
            cfg.points = v;
        }
        if let Some(v) = part.phi {
            cfg.phi = v;
        }
        if let Some(v) = part.t0 {
            cfg.t0 = v;
        }
        if let Some(v) = part.l_degree {
            cfg.l_degree = v;
        }
        if let Some(v) = part.seed {
            cfg.seed = v;
        }
        if let Some(v) = part.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = part.tol {
            cfg.tol = v;
        }
        if let Some(v) = part.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = part.dt0 {
            cfg.dt0 = v;
        }
    }
    if let Some(s) = &cli.points {
        cfg.points = parse_complex_list(s)?.into_iter().map(c2a).collect();
    }
    if let Some(s) = &cli.phi {
        cfg.phi = parse_complex_list(s)?.into_iter().map(c2a).collect();
    }
    if let Some(v) = cli.t0 {
        cfg.t0 = v;
    }
    if let Some(v) = cli.l_degree {
        cfg.l_degree = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = cli.tol {
        cfg.tol = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = cli.dt0 {
        cfg.dt0 = v;
    }
    if cfg.seeds == 0 {
        cfg.seeds = 1;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormatBlock {
    pub schema: u32,
    pub tool: String,
    pub complex: String,
    pub coeff_order: String,
}

impl Default for FormatBlock {
    fn default() -> Self {
        FormatBlock {
            schema: 1,
            tool: "boutroux".into(),
            complex: "[re, im]".into(),
            coeff_order: "ascending".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeDoc {
    pub history_index: usize,
    pub midpoint: [f64; 2],
    pub pair_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub functional: f64,
    pub delta_roots: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub location: [f64; 2],
    pub kind: String,
    pub multiplicity: usize,
    pub directions: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: Option<usize>,
    pub termination: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    pub connected: bool,
    pub degree_law: bool,
    pub components: Vec<usize>,
    pub failures: Vec<(usize, usize, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub format: FormatBlock,
    pub config: RunConfig,
    pub status: String,
    pub failure_reason: Option<String>,
    pub seed_used: u64,
    pub iterations: usize,
    pub functional: f64,
    pub l_degree: usize,
    pub m_degree: usize,
    pub genus: usize,
    pub s_coeffs: Vec<[f64; 2]>,
    pub delta_coeffs: Vec<[f64; 2]>,
    pub s_roots: Vec<[f64; 2]>,
    pub delta_roots: Vec<[f64; 2]>,
    pub t_values: Vec<[f64; 2]>,
    pub targets: Vec<[f64; 2]>,
    pub p_values: Vec<[f64; 2]>,
    pub f_history: Vec<f64>,
    pub merges: Vec<MergeDoc>,
    pub chart_switches: Vec<usize>,
    pub max_split_residual_rel: f64,
    pub max_condition: f64,
    pub seed_reports: Vec<SeedReport>,
    pub delta_root_agreement: Option<f64>,
    pub graph: Option<GraphDoc>,
    pub graph_error: Option<String>,
}

fn status_string(status: &DescentStatus) -> String {
    match status {
        DescentStatus::Converged => "converged".into(),
        DescentStatus::Stalled => "stalled".into(),
        DescentStatus::MergedAndRestarted => "merged-and-restarted".into(),
        DescentStatus::Failed(_) => "failed".into(),
    }
}

fn termination_string(t: &Termination) -> String {
    match t {
        Termination::ReachedNode(_) => "reached-node".into(),
        Termination::ClosedLoop => "closed-loop".into(),
        Termination::Escaped => "escaped".into(),
        Termination::StepLimit => "step-limit".into(),
    }
}

fn kind_string(k: &CriticalKind) -> (String, usize) {
    match k {
        CriticalKind::Pole => ("pole".into(), 0),
        CriticalKind::SimpleZero => ("zero".into(), 1),
        CriticalKind::StagnationZero { multiplicity } => ("stagnation".into(), *multiplicity),
    }
}

fn decimate<T: Copy>(v: &[T], max: usize) -> Vec<T> {
    if v.len() <= max || v.len() < 3 {
        return v.to_vec();
    }
    let stride = v.len().div_ceil(max - 1);
    let mut out: Vec<T> = v.iter().step_by(stride).copied().collect();
    out.push(*v.last().unwrap());
    out
}

fn graph_doc(graph: &TrajectoryGraph) -> GraphDoc {
    let nodes = graph
        .nodes
        .iter()
        .map(|n| {
            let (kind, multiplicity) = kind_string(&n.kind);
            NodeDoc {
                location: c2a(n.location),
                kind,
                multiplicity,
                directions: n.directions.clone(),
            }
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgeDoc {
            from: e.from,
            to: e.to,
            termination: termination_string(&e.termination),
            points: decimate(&e.points, 400).into_iter().map(c2a).collect(),
        })
        .collect();
    GraphDoc {
        nodes,
        edges,
        connected: graph.is_connected(),
        degree_law: graph.degree_law_holds(),
        components: graph.connected_components(),
        failures: graph.failures.clone(),
    }
}

#[derive(Copy, Clone, PartialEq, PartialOrd)]
enum LogLevel {
    Quiet,
    Info,
    Debug,
}

impl LogLevel {
    fn from_env() -> Self {
        match std::env::var("BOUTROUX_LOG").as_deref() {
            Ok("quiet") => LogLevel::Quiet,
            Ok("debug") => LogLevel::Debug,
            _ => LogLevel::Info,
        }
    }

    fn info(self, msg: &str) {
        if self >= LogLevel::Info {
            eprintln!("{}", msg);
        }
    }

    fn debug(self, msg: &str) {
        if self >= LogLevel::Debug {
            eprintln!("{}", msg);
        }
    }
}

/// Lexicographically sorted roots, for stable cross-seed comparison.
fn sorted_roots(roots: &[Complex64]) -> Vec<[f64; 2]> {
    let mut v = roots.to_vec();
    v.sort_by(crate::geom::lex_cmp);
    v.into_iter().map(c2a).collect()
}

fn better(a: &DescentReport, b: &DescentReport) -> bool {
    let conv = |r: &DescentReport| r.status == DescentStatus::Converged;
    match (conv(a), conv(b)) {
        (true, false) => true,
        (false, true) => false,
        _ => a.final_f < b.final_f,
    }
}

/// Run the descent for `cfg.seeds` consecutive seeds, keep the best run,
/// and trace its trajectory graph.
pub fn solve(cfg: &RunConfig) -> Result<(ResultDoc, i32)> {
    let log = LogLevel::from_env();
    let spec = cfg.to_spec()?;
    let opts = DescentOpts {
        f_exit: cfg.tol,
        max_iter: cfg.max_iter,
        dt0: cfg.dt0,
        ..DescentOpts::default()
    };

    let mut best: Option<(u64, DescentReport)> = None;
    let mut seed_reports: Vec<SeedReport> = Vec::new();
    for k in 0..cfg.seeds {
        let seed = cfg.seed.wrapping_add(k as u64);
        let init = match descent::random_init(&spec, seed) {
            Ok(s) => s,
            Err(e) => {
                log.info(&format!("seed {}: initialization failed: {}", seed, e));
                seed_reports.push(SeedReport {
                    seed,
                    status: "init-failed".into(),
                    iterations: 0,
                    functional: f64::INFINITY,
                    delta_roots: Vec::new(),
                });
                continue;
            }
        };
        log.info(&format!("seed {}: descending (L={}, M={})", seed, spec.l_degree, init.m_degree()));
        let report = descent::run_with_observer(init, &opts, |it| {
            log.debug(&format!(
                "seed {} iter {:5} F={:.6e} dt={:.3e}{}",
                seed,
                it.iteration,
                it.f,
                it.dt,
                if it.merged { " merge" } else { "" }
            ));
        });
        log.info(&format!(
            "seed {}: {} after {} iterations, F={:.3e}",
            seed,
            status_string(&report.status),
            report.iterations,
            report.final_f
        ));
        seed_reports.push(SeedReport {
            seed,
            status: status_string(&report.status),
            iterations: report.iterations,
            functional: report.final_f,
            delta_roots: sorted_roots(&report.state.delta_roots),
        });
        let replace = match &best {
            None => true,
            Some((_, b)) => better(&report, b),
        };
        if replace {
            best = Some((seed, report));
        }
    }
    let (seed_used, report) =
        best.ok_or_else(|| Error::NonConvergence("every seed failed to initialize".into()))?;

    let agreement = delta_root_agreement(&seed_reports);
    let doc = build_doc(cfg, seed_used, &report, seed_reports, agreement, log);
    let code = match report.status {
        DescentStatus::Converged => 0,
        DescentStatus::Stalled | DescentStatus::MergedAndRestarted => 3,
        DescentStatus::Failed(_) => 4,
    };
    Ok((doc, code))
}

/// Max pairwise deviation of the sorted zero lists across converged seeds.
fn delta_root_agreement(reports: &[SeedReport]) -> Option<f64> {
    let converged: Vec<&SeedReport> = reports.iter().filter(|r| r.status == "converged").collect();
    if converged.len() < 2 {
        return None;
    }
    let n = converged[0].delta_roots.len();
    if converged.iter().any(|r| r.delta_roots.len() != n) {
        return None;
    }
    let mut worst = 0.0f64;
    for i in 0..converged.len() {
        for j in (i + 1)..converged.len() {
            for (a, b) in converged[i].delta_roots.iter().zip(converged[j].delta_roots.iter()) {
                worst = worst.max((a2c(a) - a2c(b)).norm());
            }
        }
    }
    Some(worst)
}

fn build_doc(
    cfg: &RunConfig,
    seed_used: u64,
    report: &DescentReport,
    seed_reports: Vec<SeedReport>,
    agreement: Option<f64>,
    log: LogLevel,
) -> ResultDoc {
    let state = &report.state;
    let failure_reason = match &report.status {
        DescentStatus::Failed(msg) => Some(msg.clone()),
        _ => None,
    };
    let (graph, graph_error) = if matches!(report.status, DescentStatus::Failed(_)) {
        (None, None)
    } else {
        log.info("tracing critical trajectories");
        match trajectories::build_graph(state, &TraceOpts::default()) {
            Ok(g) => {
                log.info(&format!(
                    "graph: {} nodes, {} edges, {}connected",
                    g.nodes.len(),
                    g.edges.len(),
                    if g.is_connected() { "" } else { "not " }
                ));
                (Some(graph_doc(&g)), None)
            }
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let s_roots = state.s.roots().unwrap_or_default();
    ResultDoc {
        format: FormatBlock::default(),
        config: cfg.clone(),
        status: status_string(&report.status),
        failure_reason,
        seed_used,
        iterations: report.iterations,
        functional: report.final_f,
        l_degree: state.l_degree(),
        m_degree: state.m_degree(),
        genus: state.genus,
        s_coeffs: state.s.coeffs().iter().map(|&z| c2a(z)).collect(),
        delta_coeffs: state.delta.coeffs().iter().map(|&z| c2a(z)).collect(),
        s_roots: sorted_roots(&s_roots),
        delta_roots: sorted_roots(&state.delta_roots),
        t_values: report.periods.t.iter().map(|&z| c2a(z)).collect(),
        targets: state.spec.targets().iter().map(|&z| c2a(z)).collect(),
        p_values: report.periods.p.iter().map(|&z| c2a(z)).collect(),
        f_history: decimate(&report.f_history, 4096),
        merges: report
            .merges
            .iter()
            .map(|m| MergeDoc {
                history_index: m.history_index,
                midpoint: c2a(m.midpoint),
                pair_distance: m.pair_distance,
            })
            .collect(),
        chart_switches: report.chart_switches.clone(),
        max_split_residual_rel: report.max_split_residual_rel,
        max_condition: report.max_condition,
        seed_reports,
        delta_root_agreement: agreement,
        graph,
        graph_error,
    }
}

/// Rebuild the state stored in a result document and re-trace its graph.
pub fn retrace(doc: &mut ResultDoc) -> Result<()> {
    let spec = doc.config.to_spec()?;
    let s = Poly::new(doc.s_coeffs.iter().map(a2c).collect());
    let delta = Poly::new(doc.delta_coeffs.iter().map(a2c).collect());
    let state = DifferentialState::assemble(&spec, s, delta)?;
    let graph = trajectories::build_graph(&state, &TraceOpts::default())?;
    doc.graph = Some(graph_doc(&graph));
    doc.graph_error = None;
    Ok(())
}

/// Deterministic standalone SVG of the trajectory graph: green arcs, red
/// pole dots, black zero dots, black crosses for stagnation points.
pub fn svg_from_doc(doc: &ResultDoc) -> Option<String> {
    let g = doc.graph.as_ref()?;
    if g.nodes.is_empty() {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for n in &g.nodes {
        x0 = x0.min(n.location[0]);
        x1 = x1.max(n.location[0]);
        y0 = y0.min(n.location[1]);
        y1 = y1.max(n.location[1]);
    }
    let node_span = ((x1 - x0).max(y1 - y0)).max(1e-6);
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    // unbounded arcs run far out; clip the frame to the node neighborhood
    for e in &g.edges {
        for p in &e.points {
            if (p[0] - cx).abs() <= 1.5 * node_span && (p[1] - cy).abs() <= 1.5 * node_span {
                x0 = x0.min(p[0]);
                x1 = x1.max(p[0]);
                y0 = y0.min(p[1]);
                y1 = y1.max(p[1]);
            }
        }
    }
    let margin = 0.1 * ((x1 - x0).max(y1 - y0)).max(1e-6);
    x0 -= margin;
    x1 += margin;
    y0 -= margin;
    y1 += margin;
    let span = (x1 - x0).max(y1 - y0);
    let w = 1000.0 * (x1 - x0) / span;
    let h = 1000.0 * (y1 - y0) / span;
    let tx = |x: f64| 1000.0 * (x - x0) / span;
    let ty = |y: f64| 1000.0 * (y1 - y) / span;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.2} {:.2}\" width=\"800\">\n",
        w, h
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#ffffff\"/>\n",
        w, h
    ));
    for e in &g.edges {
        let pts: Vec<String> = e
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", tx(p[0]), ty(p[1])))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1a7f1a\" stroke-width=\"3\"/>\n",
            pts.join(" ")
        ));
    }
    for n in &g.nodes {
        let x = tx(n.location[0]);
        let y = ty(n.location[1]);
        match n.kind.as_str() {
            "pole" => out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"9\" fill=\"#cc2222\"/>\n",
                x, y
            )),
            "zero" => out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"6\" fill=\"#000000\"/>\n",
                x, y
            )),
            _ => {
                out.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#000000\" stroke-width=\"3\"/>\n",
                    x - 9.0, y - 9.0, x + 9.0, y + 9.0
                ));
                out.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#000000\" stroke-width=\"3\"/>\n",
                    x - 9.0, y + 9.0, x + 9.0, y - 9.0
                ));
            }
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn write_outputs(out: &Option<PathBuf>, svg: &Option<PathBuf>, doc: &ResultDoc) -> Result<Vec<String>> {
    let mut written = Vec::new();
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(doc)?;
        std::fs::write(path, text + "\n")?;
        written.push(path.display().to_string());
    }
    if let Some(path) = svg {
        match svg_from_doc(doc) {
            Some(text) => {
                std::fs::write(path, text)?;
                written.push(path.display().to_string());
            }
            None => eprintln!("no trajectory graph available, skipping {}", path.display()),
        }
    }
    Ok(written)
}

fn print_summary(doc: &ResultDoc, written: &[String]) {
    println!("status: {}", doc.status);
    if let Some(reason) = &doc.failure_reason {
        println!("reason: {}", reason);
    }
    println!(
        "seed {} | iterations {} | F = {:.3e}",
        doc.seed_used, doc.iterations, doc.functional
    );
    println!(
        "degrees: L = {}, M = {}, genus = {}",
        doc.l_degree, doc.m_degree, doc.genus
    );
    if let Some(a) = doc.delta_root_agreement {
        println!("cross-seed zero agreement: {:.3e}", a);
    }
    match (&doc.graph, &doc.graph_error) {
        (Some(g), _) => println!(
            "graph: {} nodes, {} edges, {}connected, degree law {}",
            g.nodes.len(),
            g.edges.len(),
            if g.connected { "" } else { "not " },
            if g.degree_law { "holds" } else { "violated" }
        ),
        (None, Some(e)) => println!("graph: not traced ({})", e),
        (None, None) => {}
    }
    for path in written {
        println!("wrote {}", path);
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let mode = cli.mode.as_deref().unwrap_or("solve");
    match mode {
        "solve" => {
            let cfg = merge_config(&cli)?;
            let (doc, code) = solve(&cfg)?;
            let written = write_outputs(&cli.out, &cli.svg, &doc)?;
            print_summary(&doc, &written);
            Ok(code)
        }
        "trace-only" => {
            let path = cli
                .state
                .as_ref()
                .ok_or_else(|| Error::ConfigError("trace-only mode needs --state".into()))?;
            let text = std::fs::read_to_string(path)?;
            let mut doc: ResultDoc = serde_json::from_str(&text)?;
            retrace(&mut doc)?;
            let written = write_outputs(&cli.out, &cli.svg, &doc)?;
            print_summary(&doc, &written);
            Ok(0)
        }
        other => Err(Error::ConfigError(format!(
            "unknown mode {:?}; expected \"solve\" or \"trace-only\"",
            other
        ))),
    }
}

/// Binary entry point; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(Error::ConfigError(msg)) => {
            eprintln!("error: {}", msg);
            2
        }
        Err(e) => {
            eprintln!("error: {}", e);
            4
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_reals_parse_as_real_points() {
        let v = parse_complex_list("-1,1").unwrap();
        assert_eq!(v, vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let v = parse_complex_list("0.5").unwrap();
        assert_eq!(v, vec![Complex64::new(0.5, 0.0)]);
    }

    #[test]
    fn semicolon_tokens_parse_as_pairs() {
        let v = parse_complex_list("0,-1;0,1").unwrap();
        assert_eq!(v, vec![Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]);
        // single-field token inside pair mode is a real
        let v = parse_complex_list("1;2,3;").unwrap();
        assert_eq!(
            v,
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 3.0)]
        );
    }

    #[test]
    fn brackets_parse_as_pairs() {
        let v = parse_complex_list("[0,-1],[0,0],[1,0]").unwrap();
        assert_eq!(
            v,
            vec![
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0)
            ]
        );
    }

    #[test]
    fn malformed_lists_are_rejected() {
        assert!(parse_complex_list("1,2,x").is_err());
        assert!(parse_complex_list("[1,2").is_err());
        assert!(parse_complex_list("1,2,3;4").is_err());
    }

    #[test]
    fn decimate_keeps_ends() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let d = decimate(&v, 100);
        assert!(d.len() <= 101);
        assert_eq!(d[0], 0.0);
        assert_eq!(*d.last().unwrap(), 999.0);
    }

    #[test]
    fn svg_rendering_is_deterministic() {
        let doc = tiny_doc();
        let a = svg_from_doc(&doc).unwrap();
        let b = svg_from_doc(&doc).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("#cc2222"));
        assert!(a.contains("#1a7f1a"));
    }

    #[test]
    fn result_doc_round_trips_through_json() {
        let doc = tiny_doc();
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back: ResultDoc = serde_json::from_str(&text).unwrap();
        let text2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(text, text2);
    }

    fn tiny_doc() -> ResultDoc {
        ResultDoc {
            format: FormatBlock::default(),
            config: RunConfig {
                points: vec![[-1.0, 0.0], [1.0, 0.0]],
                ..RunConfig::default()
            },
            status: "converged".into(),
            failure_reason: None,
            seed_used: 1,
            iterations: 0,
            functional: 0.0,
            l_degree: 0,
            m_degree: 0,
            genus: 0,
            s_coeffs: vec![[1.0, 0.0]],
            delta_coeffs: vec![[1.0, 0.0]],
            s_roots: vec![],
            delta_roots: vec![],
            t_values: vec![[1.0, 0.0]],
            targets: vec![[1.0, 0.0]],
            p_values: vec![],
            f_history: vec![0.0],
            merges: vec![],
            chart_switches: vec![],
            max_split_residual_rel: 0.0,
            max_condition: 1.0,
            seed_reports: vec![],
            delta_root_agreement: None,
            graph: Some(GraphDoc {
                nodes: vec![
                    NodeDoc {
                        location: [-1.0, 0.0],
                        kind: "pole".into(),
                        multiplicity: 0,
                        directions: vec![0.0],
                    },
                    NodeDoc {
                        location: [1.0, 0.0],
                        kind: "pole".into(),
                        multiplicity: 0,
                        directions: vec![std::f64::consts::PI],
                    },
                ],
                edges: vec![EdgeDoc {
                    from: 0,
                    to: Some(1),
                    termination: "reached-node".into(),
                    points: vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
                }],
                connected: true,
                degree_law: true,
                components: vec![0, 0],
                failures: vec![],
            }),
            graph_error: None,
        }
    }
}
