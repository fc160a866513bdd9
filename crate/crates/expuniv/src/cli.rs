//! Command-line orchestration: argument parsing, config merging, and result
//! emission (CSV with 9 significant digits, JSON with full round-trip
//! precision).
//!
//! Exit codes: 0 pass, 1 check failure, 2 input error, 3 numeric failure.

use crate::borel::{borel_closed_form, singular_hull};
use crate::carleman::{carleman_lhs, carleman_rhs, locate_zeros, obstruction_check, Rect};
use crate::expfun::FunctionExpr;
use crate::expk::{
    criterion_series_check, density_fit, membership, norm_estimate, nested_alpha_grid,
    ExpKNorm, SamplingGrid,
};
use crate::fhc::{
    build_candidate, dyadic_schedule, enumerate_targets, growth_check, recurrence_density,
    scaled_targets, sparse_schedule, GrowthSpec, UniversalCandidate,
};
use crate::geometry::ConvexCompact;
use crate::{C, Error};
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_NUMERIC_FAILURE: i32 = 3;

/// Tunable defaults, loadable from a JSON config file; command-line flags
/// override config values.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub r_max: f64,
    pub horizon: usize,
    pub n: u32,
    pub k_max: usize,
    pub radius: f64,
    pub epsilon: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub resolution: f64,
    pub angles: usize,
    pub gap: usize,
    pub num_targets: usize,
    pub d: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r_max: 200.0,
            horizon: 4096,
            n: 1,
            k_max: 200,
            radius: 0.5,
            epsilon: 0.5,
            x_max: 2000.0,
            t_min: 1e-3,
            resolution: 1e-6,
            angles: 64,
            gap: 8,
            num_targets: 3,
            d: 1.0,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        if self.horizon < 64 {
            return Err(format!("horizon {} < 64", self.horizon));
        }
        for (name, v) in [
            ("r_max", self.r_max),
            ("radius", self.radius),
            ("epsilon", self.epsilon),
            ("x_max", self.x_max),
            ("t_min", self.t_min),
            ("resolution", self.resolution),
            ("d", self.d),
        ] {
            if v <= 0.0 || v.is_nan() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "expuniv", version, about = "Numerical laboratory for entire functions of exponential type: indicators, Exp(K) norms, universal-candidate construction, and zero-density checks")]
pub struct Cli {
    /// JSON config file with default parameters (flags take precedence)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Emit JSON instead of CSV
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Args)]
pub struct FunctionArg {
    /// Function: path to JSON, inline JSON, or shorthand
    /// (`sin`, `block:im`, `block:re,im`, `exp:cre,cim,fre,fim`, sums with `+`)
    #[arg(long)]
    pub function: String,
}

#[derive(Debug, Args)]
pub struct CompactArg {
    /// Convex compact: path to JSON, inline JSON, or shorthand
    /// (`segment:x1,y1,x2,y2`, `point:x,y`)
    #[arg(long)]
    pub k: String,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Estimated indicator h_f(Θ) against the support function of the
    /// frequency hull, over equally spaced angles
    Indicator {
        #[command(flatten)]
        function: FunctionArg,
        #[arg(long)]
        angles: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Weighted norm ‖f‖_{K,n} with a tail certificate
    Norm {
        #[command(flatten)]
        function: FunctionArg,
        #[command(flatten)]
        k: CompactArg,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Membership of f in Exp(K) via frequency-hull containment
    /// (exit code 1 when the hull escapes K)
    Membership {
        #[command(flatten)]
        function: FunctionArg,
        #[command(flatten)]
        k: CompactArg,
    },
    /// Translate-norm series Σ_k ‖f(·+k)‖_{K,n}: terms, partial sums and
    /// fitted tail decay (exit code 1 when the series does not converge)
    SeriesCheck {
        #[command(flatten)]
        function: FunctionArg,
        #[command(flatten)]
        k: CompactArg,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Least-squares fit of a target by building blocks on nested α-grids
    DensityFit {
        #[command(flatten)]
        function: FunctionArg,
        #[command(flatten)]
        k: CompactArg,
        #[arg(long)]
        n: Option<u32>,
        /// Half-extent d of the α-segment [−id/2, id/2]
        #[arg(long)]
        d: Option<f64>,
        /// Comma-separated grid sizes, e.g. 6,12,24
        #[arg(long, default_value = "6,12,24")]
        grids: String,
    },
    /// Closed-form Borel transform: poles, principal parts, singular hull
    Borel {
        #[command(flatten)]
        function: FunctionArg,
    },
    /// Build a universal candidate, then measure recurrence and growth
    /// (exit code 1 when a declared check fails, or when K is horizontal
    /// and the construction is aborted)
    Construct {
        #[command(flatten)]
        k: CompactArg,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        num_targets: Option<usize>,
        #[arg(long)]
        gap: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Use the sparse slow-growth schedule instead of the dyadic one
        #[arg(long)]
        sparse: bool,
        /// Scale target l by 4^{l−1} (growth trade-off experiments)
        #[arg(long)]
        scaled: bool,
        /// Write the candidate JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recurrence scan of a stored candidate against one of its targets
    Recurrence {
        /// Candidate JSON (written by `construct`)
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// sup |f(x)|/q(|x|) over the real interval [−x_max, x_max]
    Growth {
        #[arg(long)]
        candidate: PathBuf,
        /// Comparison function: `power:C` for 1+r^C, `log` for log(e+r)
        #[arg(long, default_value = "power:2")]
        q: String,
        #[arg(long)]
        x_max: Option<f64>,
    },
    /// Locate zeros in a rectangle by the argument principle
    Zeros {
        #[command(flatten)]
        function: FunctionArg,
        /// Rectangle `x_lo,x_hi,y_lo,y_hi`
        #[arg(long = "box")]
        rect: String,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Carleman identity residuals LHS−RHS over a list of radii
    Carleman {
        #[command(flatten)]
        function: FunctionArg,
        /// Comma-separated radii
        #[arg(long, default_value = "10,20,40,80,160")]
        radii: String,
        #[arg(long)]
        t_min: Option<f64>,
    },
    /// Zero-density obstruction check against the sector bound from the
    /// function's own frequency hull
    Obstruct {
        #[command(flatten)]
        function: FunctionArg,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

/// Top-level error wrapper separating input problems from numeric failures.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Check(String),
    Numeric(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyInput(_)
            | Error::OutOfRange(_)
            | Error::HorizonTooSmall { .. }
            | Error::ZeroFunction
            | Error::TargetNotInK(_) => CliError::Input(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT_ERROR,
            CliError::Check(_) => EXIT_CHECK_FAILURE,
            CliError::Numeric(_) => EXIT_NUMERIC_FAILURE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Input(msg.into()))
}

/// 9 significant digits, the CSV float format.
fn csv_num(v: f64) -> String {
    format!("{v:.8e}")
}

fn parse_floats(s: &str, expect: usize, what: &str) -> CliResult<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> =
        s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if expect == 0 || v.len() == expect => Ok(v),
        Ok(v) => input_err(format!("{what}: expected {expect} numbers, got {}", v.len())),
        Err(e) => input_err(format!("{what}: {e}")),
    }
}

/// Accepts a path, inline JSON, or the shorthands documented on the flag.
pub fn parse_function(spec: &str) -> CliResult<FunctionExpr> {
    let spec = spec.trim();
    if spec.starts_with('{') || spec.starts_with('[') {
        return serde_json::from_str(spec)
            .map_err(|e| CliError::Input(format!("function JSON: {e}")));
    }
    if spec.contains(':') || spec == "sin" {
        let mut total = FunctionExpr::zero();
        for part in spec.split('+') {
            total = total.add(&parse_function_atom(part.trim())?);
        }
        return Ok(total);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Input(format!("reading {spec}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("function JSON {spec}: {e}")))
}

fn parse_function_atom(spec: &str) -> CliResult<FunctionExpr> {
    if spec == "sin" {
        return Ok(FunctionExpr::sin_pi());
    }
    if let Some(rest) = spec.strip_prefix("block:") {
        let v = parse_floats(rest, 0, "block")?;
        return match v.as_slice() {
            [im] => Ok(FunctionExpr::building_block(C::new(0.0, *im))),
            [re, im] => Ok(FunctionExpr::building_block(C::new(*re, *im))),
            _ => input_err("block: expects `im` or `re,im`"),
        };
    }
    if let Some(rest) = spec.strip_prefix("exp:") {
        let v = parse_floats(rest, 4, "exp")?;
        return Ok(FunctionExpr::exponential(
            C::new(v[0], v[1]),
            C::new(v[2], v[3]),
        ));
    }
    input_err(format!("unrecognized function shorthand `{spec}`"))
}

/// Accepts a path, inline JSON, or `segment:`/`point:` shorthands.
pub fn parse_compact(spec: &str) -> CliResult<ConvexCompact> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return serde_json::from_str(spec)
            .map_err(|e| CliError::Input(format!("compact JSON: {e}")));
    }
    if let Some(rest) = spec.strip_prefix("segment:") {
        let v = parse_floats(rest, 4, "segment")?;
        return Ok(ConvexCompact::segment(
            C::new(v[0], v[1]),
            C::new(v[2], v[3]),
        ));
    }
    if let Some(rest) = spec.strip_prefix("point:") {
        let v = parse_floats(rest, 2, "point")?;
        return Ok(ConvexCompact::singleton(C::new(v[0], v[1])));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Input(format!("reading {spec}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("compact JSON {spec}: {e}")))
}

fn parse_growth(spec: &str) -> CliResult<GrowthSpec> {
    if spec == "log" {
        return Ok(GrowthSpec::Logarithmic);
    }
    if let Some(rest) = spec.strip_prefix("power:") {
        let c: f64 = rest
            .parse()
            .map_err(|e| CliError::Input(format!("power exponent: {e}")))?;
        return Ok(GrowthSpec::PowerLaw { exponent: c });
    }
    input_err(format!("unrecognized growth spec `{spec}` (use `power:C` or `log`)"))
}

fn load_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    let cfg = match path {
        None => RunConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("reading config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("config {}: {e}", p.display())))?
        }
    };
    cfg.validate().map_err(CliError::Input)?;
    Ok(cfg)
}

fn load_candidate(path: &PathBuf) -> CliResult<UniversalCandidate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("candidate JSON {}: {e}", path.display())))
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serialization cannot fail")
}

/// Runs one parsed invocation, returning the process exit code and writing
/// results to `out`.
pub fn run(cli: &Cli, out: &mut impl std::io::Write) -> i32 {
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut impl std::io::Write) -> CliResult<i32> {
    let cfg = load_config(&cli.config)?;
    let text = match &cli.cmd {
        Cmd::Indicator { function, angles, r_max } => cmd_indicator(
            &parse_function(&function.function)?,
            angles.unwrap_or(cfg.angles),
            r_max.unwrap_or(cfg.r_max),
            cli.json,
        )?,
        Cmd::Norm { function, k, n, r_max } => cmd_norm(
            &parse_function(&function.function)?,
            &parse_compact(&k.k)?,
            n.unwrap_or(cfg.n),
            r_max.unwrap_or(cfg.r_max.min(60.0)),
            cli.json,
        )?,
        Cmd::Membership { function, k } => {
            return cmd_membership(
                &parse_function(&function.function)?,
                &parse_compact(&k.k)?,
                cli.json,
                out,
            );
        }
        Cmd::SeriesCheck { function, k, n, k_max, r_max } => {
            return cmd_series_check(
                &parse_function(&function.function)?,
                &parse_compact(&k.k)?,
                n.unwrap_or(cfg.n),
                k_max.unwrap_or(cfg.k_max),
                r_max.unwrap_or(cfg.r_max.min(40.0)),
                cli.json,
                out,
            );
        }
        Cmd::DensityFit { function, k, n, d, grids } => cmd_density_fit(
            &parse_function(&function.function)?,
            &parse_compact(&k.k)?,
            n.unwrap_or(cfg.n),
            d.unwrap_or(cfg.d),
            &parse_floats(grids, 0, "grids")?,
            cli.json,
        )?,
        Cmd::Borel { function } => cmd_borel(&parse_function(&function.function)?, cli.json)?,
        Cmd::Construct { k, d, num_targets, gap, horizon, sparse, scaled, out: out_path } => {
            return cmd_construct(
                &parse_compact(&k.k)?,
                d.unwrap_or(cfg.d),
                num_targets.unwrap_or(cfg.num_targets),
                gap.unwrap_or(cfg.gap),
                horizon.unwrap_or(cfg.horizon),
                *sparse,
                *scaled,
                out_path,
                &cfg,
                cli.json,
                out,
            );
        }
        Cmd::Recurrence { candidate, target, radius, epsilon } => cmd_recurrence(
            &load_candidate(candidate)?,
            *target,
            radius.unwrap_or(cfg.radius),
            epsilon.unwrap_or(cfg.epsilon),
            cli.json,
        )?,
        Cmd::Growth { candidate, q, x_max } => cmd_growth(
            &load_candidate(candidate)?,
            &parse_growth(q)?,
            x_max.unwrap_or(cfg.x_max),
            cli.json,
        )?,
        Cmd::Zeros { function, rect, resolution } => {
            let v = parse_floats(rect, 4, "box")?;
            if v[0] >= v[1] || v[2] >= v[3] {
                return input_err("box: need x_lo < x_hi and y_lo < y_hi");
            }
            cmd_zeros(
                &parse_function(&function.function)?,
                &Rect::new(v[0], v[1], v[2], v[3]),
                resolution.unwrap_or(cfg.resolution),
                cli.json,
            )?
        }
        Cmd::Carleman { function, radii, t_min } => cmd_carleman(
            &parse_function(&function.function)?,
            &parse_floats(radii, 0, "radii")?,
            t_min.unwrap_or(cfg.t_min),
            cli.json,
        )?,
        Cmd::Obstruct { function, horizon } => cmd_obstruct(
            &parse_function(&function.function)?,
            horizon.unwrap_or(cfg.horizon.min(256)),
            cli.json,
        )?,
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))?;
    Ok(EXIT_PASS)
}

#[derive(serde::Serialize)]
struct IndicatorRow {
    theta: f64,
    estimate: f64,
    hull_support: f64,
    stable: bool,
}

fn cmd_indicator(f: &FunctionExpr, angles: usize, r_max: f64, json: bool) -> CliResult<String> {
    if angles == 0 {
        return input_err("angles must be ≥ 1");
    }
    let hull = f.frequency_hull().map_err(|_| {
        CliError::Input("the zero function has no indicator".into())
    })?;
    let mut rows = Vec::with_capacity(angles);
    for i in 0..angles {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / angles as f64;
        let (sample, stable) = f.indicator_estimate_checked(theta, 1.0, r_max, 24)?;
        rows.push(IndicatorRow {
            theta,
            estimate: sample.value,
            hull_support: hull.indicator(theta),
            stable,
        });
    }
    if json {
        return Ok(to_json(&rows));
    }
    let mut s = String::from("theta,estimate,hull_support,stable\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            csv_num(r.theta),
            csv_num(r.estimate),
            csv_num(r.hull_support),
            r.stable
        );
    }
    Ok(s)
}

fn cmd_norm(f: &FunctionExpr, k: &ConvexCompact, n: u32, r_max: f64, json: bool) -> CliResult<String> {
    if n == 0 {
        return input_err("n must be ≥ 1");
    }
    let report = norm_estimate(f, &ExpKNorm::new(k.clone(), n), r_max.max(10.0))?;
    if json {
        return Ok(to_json(&report));
    }
    Ok(format!(
        "value,certified,tail_bound\n{},{},{}\n",
        csv_num(report.value),
        report.certified,
        csv_num(report.tail_bound)
    ))
}

fn cmd_membership(
    f: &FunctionExpr,
    k: &ConvexCompact,
    json: bool,
    out: &mut impl std::io::Write,
) -> CliResult<i32> {
    let verdict = membership(f, k);
    let (member, witness) = match verdict {
        Ok(()) => (true, f64::NAN),
        Err(theta) => (false, theta),
    };
    let text = if json {
        format!(
            "{{\n  \"member\": {member},\n  \"violating_angle\": {}\n}}",
            if member { "null".to_string() } else { format!("{witness}") }
        )
    } else if member {
        "member,violating_angle\ntrue,\n".to_string()
    } else {
        format!("member,violating_angle\nfalse,{}\n", csv_num(witness))
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))?;
    Ok(if member { EXIT_PASS } else { EXIT_CHECK_FAILURE })
}

#[allow(clippy::too_many_arguments)]
fn cmd_series_check(
    f: &FunctionExpr,
    k: &ConvexCompact,
    n: u32,
    k_max: usize,
    r_max: f64,
    json: bool,
    out: &mut impl std::io::Write,
) -> CliResult<i32> {
    if n == 0 || k_max < 20 {
        return input_err("need n ≥ 1 and k_max ≥ 20");
    }
    let report = criterion_series_check(f, &ExpKNorm::new(k.clone(), n), k_max, r_max.max(10.0))?;
    let text = if json {
        to_json(&report)
    } else {
        let mut s = String::from("k,term,partial_sum\n");
        for e in &report.entries {
            let _ = writeln!(s, "{},{},{}", e.k, csv_num(e.term), csv_num(e.partial_sum));
        }
        let _ = writeln!(
            s,
            "# decay_exponent={} exp_rate={} max_tail_term={} converges={}",
            csv_num(report.decay_exponent),
            csv_num(report.exp_rate),
            csv_num(report.max_tail_term),
            report.converges
        );
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))?;
    Ok(if report.converges { EXIT_PASS } else { EXIT_CHECK_FAILURE })
}

#[derive(serde::Serialize)]
struct FitRow {
    grid: usize,
    residual_l2: f64,
    residual_max: f64,
    #[serde(with = "crate::cjson::vec")]
    coefficients: Vec<C>,
}

fn cmd_density_fit(
    target: &FunctionExpr,
    k: &ConvexCompact,
    n: u32,
    d: f64,
    grids: &[f64],
    json: bool,
) -> CliResult<String> {
    if grids.is_empty() {
        return input_err("grids must be nonempty");
    }
    let norm = ExpKNorm::new(k.clone(), n.max(1));
    let sampling = SamplingGrid::default();
    let mut rows = Vec::new();
    for &g in grids {
        let count = g as usize;
        if count == 0 {
            return input_err("grid sizes must be ≥ 1");
        }
        let alphas = nested_alpha_grid(d, count);
        let fit = density_fit(target, &alphas, &norm, &sampling)
            .map_err(|e| match e {
                Error::NotMember { theta } => {
                    CliError::Input(format!("target or basis escapes K at angle {theta}"))
                }
                other => CliError::from(other),
            })?;
        rows.push(FitRow {
            grid: count,
            residual_l2: fit.residual_l2,
            residual_max: fit.residual_max,
            coefficients: fit.coefficients,
        });
    }
    if json {
        return Ok(to_json(&rows));
    }
    let mut s = String::from("grid,residual_l2,residual_max\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.grid, csv_num(r.residual_l2), csv_num(r.residual_max));
    }
    Ok(s)
}

fn cmd_borel(f: &FunctionExpr, json: bool) -> CliResult<String> {
    if !f.blocks.is_empty() {
        return input_err(
            "borel expects an exponential-polynomial function (expand blocks first)",
        );
    }
    let b = borel_closed_form(&f.exppoly);
    if json {
        let hull = singular_hull(&b).ok();
        return Ok(format!(
            "{{\n  \"transform\": {},\n  \"singular_hull\": {}\n}}",
            to_json(&b),
            hull.map_or("null".to_string(), |h| to_json(&h)),
        ));
    }
    let mut s = String::from("pole_re,pole_im,order\n");
    for p in &b.poles {
        let _ = writeln!(s, "{},{},{}", csv_num(p.location.re), csv_num(p.location.im), p.order);
    }
    Ok(s)
}

#[derive(serde::Serialize)]
struct ConstructReport {
    scheduled_density: Vec<f64>,
    measured_density: Vec<f64>,
    recurrence_pass: bool,
    growth_ratio: f64,
    growth_pass: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_construct(
    k: &ConvexCompact,
    d: f64,
    num_targets: usize,
    gap: usize,
    horizon: usize,
    sparse: bool,
    scaled: bool,
    out_path: &Option<PathBuf>,
    cfg: &RunConfig,
    json: bool,
    out: &mut impl std::io::Write,
) -> CliResult<i32> {
    if num_targets == 0 || gap == 0 {
        return input_err("need num_targets ≥ 1 and gap ≥ 1");
    }
    // a horizontal diagram admits no frequently universal function at all:
    // the zero-density bound is 0 in every sector, so abort up front
    let bound = crate::carleman::density_bound(k, 0.0)?;
    if bound == 0.0 {
        return Err(CliError::Check(
            "K has zero vertical extent: the sector zero-density bound is 0, \
             so no construction can succeed"
                .into(),
        ));
    }
    let targets = if scaled {
        scaled_targets(d, num_targets)
    } else {
        enumerate_targets(d, num_targets)
    };
    let schedule = if sparse {
        sparse_schedule(&GrowthSpec::Logarithmic, 1.5, 0.1, num_targets, horizon)
    } else {
        dyadic_schedule(num_targets, horizon, gap)?
    };
    let cand = build_candidate(&targets, &schedule, k)?;
    if let Some(p) = out_path {
        std::fs::write(p, to_json(&cand))
            .map_err(|e| CliError::Input(format!("writing {}: {e}", p.display())))?;
    }
    let mut scheduled = Vec::new();
    let mut measured = Vec::new();
    let mut recurrence_pass = true;
    for t in 0..num_targets {
        let sched = cand
            .schedule
            .slots_of(t)
            .lower_density(cand.schedule.horizon() as f64);
        let (dens, _) = recurrence_density(&cand, t, cfg.radius, cfg.epsilon)?;
        if sched > 0.0 && dens < 0.5 * sched {
            recurrence_pass = false;
        }
        scheduled.push(sched);
        measured.push(dens);
    }
    let q = GrowthSpec::PowerLaw { exponent: 2.0 };
    let ratio = growth_check(&cand, cfg.x_max, &q)?;
    let growth_pass = ratio <= 10.0;
    let report = ConstructReport {
        scheduled_density: scheduled,
        measured_density: measured,
        recurrence_pass,
        growth_ratio: ratio,
        growth_pass,
    };
    let text = if json {
        to_json(&report)
    } else {
        let mut s = String::from("target,scheduled_density,measured_density\n");
        for t in 0..num_targets {
            let _ = writeln!(
                s,
                "{t},{},{}",
                csv_num(report.scheduled_density[t]),
                csv_num(report.measured_density[t])
            );
        }
        let _ = writeln!(
            s,
            "# growth_ratio={} recurrence_pass={} growth_pass={}",
            csv_num(ratio),
            recurrence_pass,
            growth_pass
        );
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))?;
    Ok(if recurrence_pass && growth_pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILURE
    })
}

#[derive(serde::Serialize)]
struct RecurrenceReport {
    density: f64,
    slots: Vec<crate::fhc::SlotRecord>,
}

fn cmd_recurrence(
    cand: &UniversalCandidate,
    target: usize,
    radius: f64,
    epsilon: f64,
    json: bool,
) -> CliResult<String> {
    if target >= cand.targets.len() {
        return input_err(format!(
            "target {target} out of range (candidate has {})",
            cand.targets.len()
        ));
    }
    let (density, slots) = recurrence_density(cand, target, radius, epsilon)?;
    if json {
        return Ok(to_json(&RecurrenceReport { density, slots }));
    }
    let mut s = String::from("slot,sup_error,pass\n");
    for r in &slots {
        let _ = writeln!(s, "{},{},{}", r.slot, csv_num(r.sup_error), r.pass);
    }
    let _ = writeln!(s, "# density={}", csv_num(density));
    Ok(s)
}

fn cmd_growth(
    cand: &UniversalCandidate,
    q: &GrowthSpec,
    x_max: f64,
    json: bool,
) -> CliResult<String> {
    let ratio = growth_check(cand, x_max, q)?;
    if json {
        return Ok(format!("{{\n  \"ratio\": {ratio}\n}}"));
    }
    Ok(format!("ratio\n{}\n", csv_num(ratio)))
}

fn cmd_zeros(f: &FunctionExpr, rect: &Rect, resolution: f64, json: bool) -> CliResult<String> {
    let zl = locate_zeros(f, rect, resolution)?;
    if json {
        return Ok(to_json(&zl));
    }
    let mut s = String::from("re,im,multiplicity\n");
    for z in &zl.zeros {
        let _ = writeln!(
            s,
            "{},{},{}",
            csv_num(z.location.re),
            csv_num(z.location.im),
            z.multiplicity
        );
    }
    Ok(s)
}

#[derive(serde::Serialize)]
struct CarlemanRow {
    r: f64,
    lhs: f64,
    rhs: f64,
    residual: f64,
}

#[derive(serde::Serialize)]
struct CarlemanReport {
    rows: Vec<CarlemanRow>,
    residual_range: f64,
    trend_slope: f64,
}

fn cmd_carleman(f: &FunctionExpr, radii: &[f64], t_min: f64, json: bool) -> CliResult<String> {
    if radii.is_empty() {
        return input_err("radii must be nonempty");
    }
    let mut rows = Vec::new();
    for &r in radii {
        if r <= t_min || r.is_nan() {
            return input_err(format!("radius {r} must exceed t_min {t_min}"));
        }
        let zl = locate_zeros(f, &Rect::new(t_min, r, -1.0, 1.0), 1e-5)?;
        let lhs = carleman_lhs(&zl, r)?;
        let rhs = carleman_rhs(f, r, t_min)?;
        rows.push(CarlemanRow { r, lhs, rhs, residual: lhs - rhs });
    }
    let (range, slope) = residual_stats(&rows);
    let report = CarlemanReport { rows, residual_range: range, trend_slope: slope };
    if json {
        return Ok(to_json(&report));
    }
    let mut s = String::from("r,lhs,rhs,residual\n");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            csv_num(row.r),
            csv_num(row.lhs),
            csv_num(row.rhs),
            csv_num(row.residual)
        );
    }
    let _ = writeln!(
        s,
        "# residual_range={} trend_slope={}",
        csv_num(range),
        csv_num(slope)
    );
    Ok(s)
}

/// Range of the residuals and the slope of residual against log R.
pub fn residual_stats_raw(pts: &[(f64, f64)]) -> (f64, f64) {
    let max = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let min = pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    if pts.len() < 2 {
        return (max - min, 0.0);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0.ln()).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0.ln() * p.0.ln()).sum();
    let sxy: f64 = pts.iter().map(|p| p.0.ln() * p.1).sum();
    (max - min, (n * sxy - sx * sy) / (n * sxx - sx * sx))
}

fn residual_stats(rows: &[CarlemanRow]) -> (f64, f64) {
    residual_stats_raw(&rows.iter().map(|r| (r.r, r.residual)).collect::<Vec<_>>())
}

fn cmd_obstruct(f: &FunctionExpr, horizon: usize, json: bool) -> CliResult<String> {
    let report = obstruction_check(f, horizon)?;
    if json {
        return Ok(to_json(&report));
    }
    Ok(format!(
        "measured_density,bound,gamma,verdict\n{},{},{},{:?}\n",
        csv_num(report.measured_density),
        csv_num(report.bound),
        csv_num(report.gamma),
        report.verdict
    ))
}
