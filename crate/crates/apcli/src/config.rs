//! Flat `key=value` configuration with command-line overrides.

use apfb::barriers::BarrierKind;
use apfb::minimize::{Init, SolverConfig};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const COMMANDS: [&str; 8] = ["params", "minimize", "ode", "weiss", "blowup", "barrier", "linearized", "gamma"];

/// Every accepted key with its default; `None` means "derived" or "unset".
const KEYS: &[(&str, Option<&str>)] = &[
    ("command", None),
    ("gamma", Some("1")),
    ("dims", Some("65,65")),
    ("h", Some("0.03125")),
    ("boundary", Some("half_plane")),
    ("radial_radius", Some("0.5")),
    ("sweep_tolerance", Some("1e-12")),
    ("max_sweeps", Some("20000")),
    ("node_tolerance", Some("1e-11")),
    ("init", Some("cascade")),
    ("restarts", Some("0")),
    ("output", Some("out")),
    ("seed", Some("0")),
    ("field", None),
    ("center", None),
    ("radii", Some("0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")),
    ("lambdas", Some("1,0.5,0.25,0.125")),
    ("mu", Some("0")),
    ("t_end", Some("1")),
    ("barrier", Some("u_strict")),
    ("barrier_radius", Some("1")),
    ("ndim", Some("2")),
    ("eps", Some("0.01")),
    ("w_a", None),
    ("s", None),
    ("half_width", Some("1")),
    ("height", Some("1")),
    ("data", Some("quadratic")),
    ("shape", Some("disk:0.25")),
    ("gammas", Some("1.5,1.7,1.9,1.95,1.98")),
    ("deltas", Some("0.05")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Params,
    Minimize,
    Ode,
    Weiss,
    Blowup,
    Barrier,
    Linearized,
    Gamma,
}

impl Command {
    pub fn name(self) -> &'static str {
        COMMANDS[self as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// `c0 (x_n)_+^alpha`.
    HalfPlane,
    /// `c0 (|x| - radial_radius)_+^alpha`.
    Radial,
    Constant(f64),
    /// Template values read from a field file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Empty,
    /// Disk of the given radius centred in the unit square.
    Disk(f64),
    /// Square of the given half-width centred in the unit square.
    Square(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearizedData {
    Quadratic,
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub gamma: f64,
    pub dims: Vec<usize>,
    pub h: f64,
    pub boundary: Boundary,
    pub radial_radius: f64,
    pub solver: SolverConfig,
    pub output: PathBuf,
    pub seed: u64,
    pub field: Option<PathBuf>,
    pub center: Option<Vec<f64>>,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub mu: f64,
    pub t_end: f64,
    pub barrier: BarrierKind,
    pub barrier_radius: f64,
    pub ndim: usize,
    pub eps: f64,
    pub w_a: Option<f64>,
    pub s: Option<f64>,
    pub half_width: f64,
    pub height: f64,
    pub data: LinearizedData,
    pub shape: Shape,
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Resolved `key=value` pairs in key order, defaults included.
    pub echo: Vec<(String, String)>,
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(Origin::Line(l)) => write!(f, "config line {l}: {}", self.msg),
            Some(Origin::Flag) => write!(f, "command line: {}", self.msg),
            _ => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(origin: Option<Origin>, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { origin, msg: msg.into() })
}

pub fn usage() -> String {
    format!("usage: apfb <command> [--config FILE] [--key value ...]\ncommands: {}", COMMANDS.join(", "))
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Raw entries of a config text; unknown keys and malformed lines are
/// rejected with their line number.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, (String, Origin)>, ConfigError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return err(Some(Origin::Line(line)), format!("expected key=value, got {body:?}"));
        };
        let key = key.trim();
        if !known(key) {
            return err(Some(Origin::Line(line)), format!("unknown key {key:?}"));
        }
        out.insert(key.to_string(), (value.trim().to_string(), Origin::Line(line)));
    }
    Ok(out)
}

/// Pairs `--key value` or `--key=value`.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            return err(Some(Origin::Flag), format!("expected --key value, got {a:?}"));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => match it.next() {
                Some(v) => (flag.to_string(), v.clone()),
                None => return err(Some(Origin::Flag), format!("--{flag} needs a value")),
            },
        };
        if !known(&key) {
            return err(Some(Origin::Flag), format!("unknown key {key:?}"));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Reads the optional file, applies the overrides, fills defaults and
/// validates.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError { origin: None, msg: format!("cannot read {}: {e}", p.display()) })?;
            parse_text(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        if !known(k) {
            return err(Some(Origin::Flag), format!("unknown key {k:?}"));
        }
        raw.insert(k.clone(), (v.clone(), Origin::Flag));
    }
    build(raw)
}

struct Fields {
    raw: BTreeMap<String, (String, Origin)>,
    echo: Vec<(String, String)>,
}

impl Fields {
    fn get(&mut self, key: &str) -> Option<(String, Origin)> {
        let v = self.raw.get(key).cloned().or_else(|| {
            KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| d.map(|d| (d.to_string(), Origin::Default)))
        });
        if let Some((s, _)) = &v {
            self.echo.push((key.to_string(), s.clone()));
        }
        v
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        let (s, o) = self.get(key).expect("key has a default");
        s.parse().or_else(|_| err(Some(o), format!("{key}: cannot parse {s:?}")))
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((s, o)) => s.parse().map(Some).or_else(|_| err(Some(o), format!("{key}: cannot parse {s:?}"))),
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>, ConfigError> {
        let (s, o) = self.get(key).expect("key has a default");
        parse_list(&s).ok_or_else(|| ConfigError { origin: Some(o), msg: format!("{key}: cannot parse list {s:?}") })
    }

    fn origin(&self, key: &str) -> Option<Origin> {
        Some(self.raw.get(key).map_or(Origin::Default, |v| v.1.clone()))
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn build(raw: BTreeMap<String, (String, Origin)>) -> Result<RunConfig, ConfigError> {
    let mut f = Fields { raw, echo: Vec::new() };
    let command = match f.get("command") {
        None => return err(None, format!("no command given\n{}", usage())),
        Some((s, o)) => match COMMANDS.iter().position(|c| *c == s) {
            Some(k) => [
                Command::Params,
                Command::Minimize,
                Command::Ode,
                Command::Weiss,
                Command::Blowup,
                Command::Barrier,
                Command::Linearized,
                Command::Gamma,
            ][k],
            None => return err(Some(o), format!("unknown command {s:?}\n{}", usage())),
        },
    };

    let gamma: f64 = f.parse("gamma")?;
    if !(gamma > 0.0 && gamma < 2.0) {
        return err(f.origin("gamma"), format!("gamma = {gamma} must lie in (0,2)"));
    }
    let dims: Vec<usize> = f.list("dims")?;
    if dims.is_empty() || dims.len() > 2 || dims.iter().any(|&n| n < 3) {
        return err(f.origin("dims"), "dims must list one or two axes of at least 3 nodes");
    }
    let h: f64 = f.parse("h")?;
    if !(h > 0.0 && h.is_finite()) {
        return err(f.origin("h"), "h must be positive");
    }
    let boundary = {
        let (s, o) = f.get("boundary").unwrap();
        match s.as_str() {
            "half_plane" => Boundary::HalfPlane,
            "radial" => Boundary::Radial,
            _ => {
                if let Some(v) = s.strip_prefix("constant:") {
                    match v.parse::<f64>() {
                        Ok(d) if d >= 0.0 && d.is_finite() => Boundary::Constant(d),
                        _ => return err(Some(o), format!("constant boundary value must be finite and >= 0, got {v:?}")),
                    }
                } else if let Some(p) = s.strip_prefix("file:") {
                    Boundary::File(PathBuf::from(p))
                } else {
                    return err(Some(o), format!("boundary must be half_plane, radial, constant:<value> or file:<path>, got {s:?}"));
                }
            }
        }
    };
    let radial_radius: f64 = f.parse("radial_radius")?;
    let init = {
        let (s, o) = f.get("init").unwrap();
        match s.as_str() {
            "zero" => Init::Zero,
            "comparator" => Init::Comparator,
            "cascade" => Init::Cascade,
            "given" => Init::Given,
            _ => return err(Some(o), format!("init must be zero, comparator, cascade or given, got {s:?}")),
        }
    };
    let sweep_tolerance = f.parse("sweep_tolerance")?;
    let max_sweeps = f.parse("max_sweeps")?;
    let node_tolerance = f.parse("node_tolerance")?;
    let restarts = f.parse("restarts")?;
    let output: PathBuf = f.parse::<String>("output")?.into();
    let seed: u64 = f.parse("seed")?;
    let solver = SolverConfig { sweep_tolerance, max_sweeps, node_tolerance, init, restarts, seed };

    let field: Option<PathBuf> = f.opt::<String>("field")?.map(PathBuf::from);
    let center = match f.get("center") {
        None => None,
        Some((s, o)) => Some(parse_list(&s).ok_or_else(|| ConfigError { origin: Some(o), msg: format!("center: cannot parse {s:?}") })?),
    };
    let radii = f.list("radii")?;
    let lambdas = f.list("lambdas")?;
    let mu = f.parse("mu")?;
    let t_end = f.parse("t_end")?;
    let barrier = {
        let (s, o) = f.get("barrier").unwrap();
        match s.as_str() {
            "u_plus" => BarrierKind::UPlus,
            "u_minus" => BarrierKind::UMinus,
            "u_strict" => BarrierKind::UStrict,
            "w_touch" => BarrierKind::WTouch,
            "w_sub" => BarrierKind::WSub,
            _ => return err(Some(o), format!("barrier must be u_plus, u_minus, u_strict, w_touch or w_sub, got {s:?}")),
        }
    };
    let barrier_radius = f.parse("barrier_radius")?;
    let ndim = f.parse("ndim")?;
    let eps = f.parse("eps")?;
    let w_a = f.opt("w_a")?;
    let s = f.opt("s")?;
    let half_width = f.parse("half_width")?;
    let height = f.parse("height")?;
    let data = {
        let (v, o) = f.get("data").unwrap();
        match v.as_str() {
            "quadratic" => LinearizedData::Quadratic,
            "affine" => LinearizedData::Affine,
            _ => return err(Some(o), format!("data must be quadratic or affine, got {v:?}")),
        }
    };
    let shape = {
        let (v, o) = f.get("shape").unwrap();
        let size = |t: &str| t.parse::<f64>().ok().filter(|x| *x > 0.0 && *x <= 0.5);
        match v.split_once(':') {
            None if v == "empty" => Shape::Empty,
            Some(("disk", r)) if size(r).is_some() => Shape::Disk(size(r).unwrap()),
            Some(("square", r)) if size(r).is_some() => Shape::Square(size(r).unwrap()),
            _ => return err(Some(o), format!("shape must be empty, disk:<r> or square:<half-width> with size in (0, 0.5], got {v:?}")),
        }
    };
    let gammas: Vec<f64> = f.list("gammas")?;
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < 2.0)) {
        return err(f.origin("gammas"), format!("gammas: {g} must lie in (0,2)"));
    }
    let deltas = f.list("deltas")?;

    for path in field.iter().chain(match &boundary {
        Boundary::File(p) => Some(p),
        _ => None,
    }) {
        if !path.is_file() {
            return err(None, format!("referenced file {} does not exist", path.display()));
        }
    }

    let mut echo = f.echo;
    echo.sort();
    Ok(RunConfig {
        command,
        gamma,
        dims,
        h,
        boundary,
        radial_radius,
        solver,
        output,
        seed,
        field,
        center,
        radii,
        lambdas,
        mu,
        t_end,
        barrier,
        barrier_radius,
        ndim,
        eps,
        w_a,
        s,
        half_width,
        height,
        data,
        shape,
        gammas,
        deltas,
        echo,
    })
}
