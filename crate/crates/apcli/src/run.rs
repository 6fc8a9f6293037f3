//! Dispatch of a validated configuration to the library.

use crate::config::{Boundary, Command, LinearizedData, RunConfig, Shape};
use crate::fieldio::{read_field, write_field, FieldData, FieldIoError};
use crate::output::{list, num, Table};
use apfb::apcore::energy;
use apfb::barriers::{
    certify_w_sub, linearized_decay, log_samples, residual_u, residual_w, solve_linearized, BarrierKind, LinearizedProblem, Orientation,
    RadialBarrier, ResidualTable,
};
use apfb::fbanalysis::{blowup_diag, extract_fb, growth_fit, weiss_curve, weiss_curve_with, BoundaryWeight};
use apfb::gammalimit::{gamma_sweep, SetGeometry, SWEEP_COLUMNS};
use apfb::minimize::{solve, Problem};
use apfb::ode1d::{fit_expansion, integrate_profile};
use apfb::{make_params, Grid, Params, ScalarField};
use std::fmt;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent parameters.
    Config(String),
    /// A numerical method failed.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NONCONVERGENCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<apfb::Error> for CliError {
    fn from(e: apfb::Error) -> Self {
        match e {
            apfb::Error::Domain(_) | apfb::Error::GammaOutOfRange(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FieldIoError> for CliError {
    fn from(e: FieldIoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub converged: bool,
    pub artifacts: Vec<String>,
    /// Headline numbers, echoed in the manifest.
    pub results: Vec<(String, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            EXIT_OK
        } else {
            EXIT_NONCONVERGENCE
        }
    }
}

struct Sink<'a> {
    dir: &'a Path,
    out: Outcome,
}

impl Sink<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        t.write(&self.dir.join(name))?;
        self.out.artifacts.push(name.to_string());
        Ok(())
    }

    fn field(&mut self, name: &str, d: &FieldData) -> Result<(), CliError> {
        write_field(&self.dir.join(name), d)?;
        self.out.artifacts.push(name.to_string());
        Ok(())
    }

    fn result(&mut self, key: &str, value: impl ToString) {
        self.out.results.push((key.to_string(), value.to_string()));
    }
}

/// Runs the experiment and writes its artifacts and `manifest.txt` into the
/// output directory. Numerical failures still leave a manifest with
/// `converged=false`.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(&cfg.output)?;
    let mut sink = Sink { dir: &cfg.output, out: Outcome { converged: true, artifacts: vec![], results: vec![] } };
    let mut res = dispatch(cfg, &mut sink);
    if let (Err(CliError::Config(m)), false) = (&res, sink.out.converged) {
        // diagnostics of an unconverged field say nothing about the config
        res = Err(CliError::Numerical(format!("solver did not converge; diagnostics then failed: {m}")));
    }
    if let Err(e) = &res {
        sink.out.converged = false;
        sink.result("error", e.to_string().replace('\n', " "));
    }
    if matches!(res, Err(CliError::Io(_))) {
        // the manifest is best effort once i/o has failed
        let _ = write_manifest(cfg, &sink.out);
    } else {
        write_manifest(cfg, &sink.out)?;
    }
    res.map(|_| sink.out)
}

fn write_manifest(cfg: &RunConfig, out: &Outcome) -> Result<(), CliError> {
    let p = make_params(cfg.gamma)?;
    let mut s = String::from("# apfb run manifest\n");
    s += &format!("apfb_version={}\napcli_version={}\n", apfb_version(), env!("CARGO_PKG_VERSION"));
    s += &format!("parallel={}\n", cfg!(feature = "parallel"));
    for (k, v) in &cfg.echo {
        s += &format!("{k}={v}\n");
    }
    for (k, v) in [("alpha", p.alpha), ("c0", p.c0), ("s", p.s), ("c_gamma", p.c_gamma)] {
        s += &format!("derived.{k}={}\n", num(v));
    }
    s += &format!("converged={}\n", out.converged);
    for (k, v) in &out.results {
        s += &format!("result.{k}={v}\n");
    }
    for a in &out.artifacts {
        s += &format!("artifact={a}\n");
    }
    std::fs::write(cfg.output.join("manifest.txt"), s)?;
    Ok(())
}

fn apfb_version() -> &'static str {
    "0.1.0"
}

fn dispatch(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let p = make_params(cfg.gamma)?;
    match cfg.command {
        Command::Params => params(&p, sink),
        Command::Minimize => minimize(cfg, &p, sink),
        Command::Ode => ode(cfg, &p, sink),
        Command::Weiss => {
            let u = input_field(cfg, &p, sink)?;
            let center = diagnostic_center(cfg, &p, &u);
            weiss(cfg, &p, &u, &center, sink)
        }
        Command::Blowup => blowup(cfg, &p, sink),
        Command::Barrier => barrier(cfg, &p, sink),
        Command::Linearized => linearized(cfg, &p, sink),
        Command::Gamma => gamma(cfg, sink),
    }
}

fn params(p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let mut t = Table::new(&["gamma", "alpha", "c0", "s", "c_gamma", "half_line_energy", "half_line_weiss", "c1", "sigma_next"]);
    t.row(&[p.gamma, p.alpha, p.c0, p.s, p.c_gamma, p.half_line_energy(), p.half_line_weiss(), p.c1(), p.sigma_next()]);
    sink.table("params.csv", &t)
}

fn centred_grid(dims: &[usize], h: f64) -> Result<Grid, CliError> {
    let origin = dims.iter().map(|&n| -0.5 * (n - 1) as f64 * h).collect();
    Ok(Grid::new(dims.to_vec(), h, origin)?)
}

fn problem(cfg: &RunConfig, p: &Params) -> Result<Problem, CliError> {
    let (c0, a, r0) = (p.c0, p.alpha, cfg.radial_radius);
    let prob = match &cfg.boundary {
        Boundary::HalfPlane => Problem::with_boundary_data(*p, centred_grid(&cfg.dims, cfg.h)?, |x| c0 * x[x.len() - 1].max(0.0).powf(a))?,
        Boundary::Radial => Problem::with_boundary_data(*p, centred_grid(&cfg.dims, cfg.h)?, |x| {
            c0 * (x.iter().map(|v| v * v).sum::<f64>().sqrt() - r0).max(0.0).powf(a)
        })?,
        Boundary::Constant(d) => Problem::with_boundary_data(*p, centred_grid(&cfg.dims, cfg.h)?, |_| *d)?,
        Boundary::File(path) => {
            let u = read_field(path)?.to_field(None)?;
            Problem::new(*p, u, apfb::Region::Whole)?
        }
    };
    Ok(prob)
}

/// Minimizer for the configured boundary data, with its artifacts.
fn solve_and_record(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<ScalarField, CliError> {
    let prob = problem(cfg, p)?;
    let (u, rep) = solve(&prob, &cfg.solver)?;
    sink.out.converged &= rep.converged;
    sink.result("solver.converged", rep.converged);
    sink.result("solver.sweeps_used", rep.sweeps_used);
    sink.result("solver.newton_steps", rep.newton_steps);
    sink.result("solver.discrete_energy", num(*rep.energy_history.last().unwrap_or(&f64::NAN)));
    sink.result("energy", num(energy(p, &u, None)?.total));
    sink.result("positive_nodes", u.positive_count());
    sink.field("u.apfb", &FieldData::from_field(&u, p.gamma))?;
    Ok(u)
}

fn input_field(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<ScalarField, CliError> {
    match &cfg.field {
        Some(path) => {
            let d = read_field(path)?;
            sink.result("field.gamma", num(d.gamma));
            Ok(d.to_field(None)?)
        }
        None => solve_and_record(cfg, p, sink),
    }
}

/// The configured center, else the interface point nearest the box center,
/// else the box center.
fn diagnostic_center(cfg: &RunConfig, p: &Params, u: &ScalarField) -> Vec<f64> {
    if let Some(c) = &cfg.center {
        return c.clone();
    }
    let mid: Vec<f64> = u.grid.lo().iter().zip(u.grid.hi()).map(|(a, b)| 0.5 * (a + b)).collect();
    extract_fb(p, u).nearest(&mid).map_or(mid, |x| x.to_vec())
}

fn minimize(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let u = solve_and_record(cfg, p, sink)?;
    let fb = extract_fb(p, &u);
    let nd = u.ndim();
    let axes = ["x", "y"];
    let mut head: Vec<String> = axes[..nd].iter().map(|s| s.to_string()).collect();
    head.extend(axes[..nd].iter().map(|s| format!("n{s}")));
    let mut t = Table::new(&head.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    t.meta("cells", fb.cells.len()).meta("cell_measure", num(fb.cell_measure()));
    for (x, n) in fb.points.iter().zip(&fb.normals) {
        t.row(&[x.as_slice(), n.as_slice()].concat());
    }
    sink.table("fb.csv", &t)?;

    let center = diagnostic_center(cfg, p, &u);
    let g = growth_fit(&u, &center, &cfg.radii)?;
    let mut t = Table::new(&["r", "max_u"]);
    t.meta("center", list(&center)).meta("slope", num(g.slope)).meta("intercept", num(g.intercept)).meta("alpha", num(p.alpha));
    t.meta("excluded", list(&g.excluded));
    for (r, m) in g.radii.iter().zip(&g.maxima) {
        t.row(&[*r, *m]);
    }
    sink.table("growth.csv", &t)?;
    sink.result("growth.slope", num(g.slope));
    weiss(cfg, p, &u, &center, sink)
}

fn weiss(cfg: &RunConfig, p: &Params, u: &ScalarField, center: &[f64], sink: &mut Sink) -> Result<(), CliError> {
    let a = weiss_curve(p, u, center, &cfg.radii)?;
    let b = weiss_curve_with(p, u, center, &cfg.radii, BoundaryWeight::HalfAlpha)?;
    let mut t = Table::new(&["r", "weiss_alpha", "weiss_half_alpha"]);
    t.meta("center", list(center)).meta("half_line_value", num(p.half_line_weiss()));
    t.meta("min_increment_alpha", num(a.min_increment())).meta("min_increment_half_alpha", num(b.min_increment()));
    for k in 0..a.radii.len() {
        t.row(&[a.radii[k], a.values[k], b.values[k]]);
    }
    sink.result("weiss.min_increment_alpha", num(a.min_increment()));
    sink.result("weiss.min_increment_half_alpha", num(b.min_increment()));
    sink.table("weiss.csv", &t)
}

fn ode(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let tr = integrate_profile(p, cfg.mu, cfg.t_end)?;
    let mut t = Table::new(&["t", "u", "du"]);
    t.meta("mu", num(cfg.mu));
    if let Some(v) = tr.vanishing_point {
        t.meta("vanishing_point", num(v));
    }
    for k in 0..tr.t.len() {
        t.row(&[tr.t[k], tr.u[k], tr.du[k]]);
    }
    sink.table("profile.csv", &t)?;
    let f = fit_expansion(&tr, p)?;
    let mut t = Table::new(&[
        "gamma",
        "mu",
        "c0_hat",
        "c0",
        "c1_hat",
        "c1_predicted",
        "sigma_hat",
        "sigma_next",
        "window_lo",
        "window_hi",
        "residual_rms",
    ]);
    t.row(&[p.gamma, cfg.mu, f.c0_hat, p.c0, f.c1_hat, cfg.mu * p.c1(), f.sigma_hat, p.sigma_next(), f.window.0, f.window.1, f.residual_rms]);
    sink.result("c0_hat", num(f.c0_hat));
    sink.table("expansion.csv", &t)
}

fn blowup(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let u = input_field(cfg, p, sink)?;
    let center = diagnostic_center(cfg, p, &u);
    let rep = blowup_diag(p, &u, &center, &cfg.lambdas)?;
    let mut t = Table::new(&["lambda", "successive", "cone_distance"]);
    t.meta("center", list(&center)).meta("window", num(rep.window)).meta("window_shrunk", rep.window_shrunk);
    for k in 0..rep.lambdas.len() {
        let succ = if k == 0 { f64::NAN } else { rep.successive[k - 1] };
        t.row(&[rep.lambdas[k], succ, rep.cone_distance[k]]);
    }
    sink.result("blowup.final_cone_distance", num(*rep.cone_distance.last().unwrap_or(&f64::NAN)));
    sink.table("blowup.csv", &t)
}

fn residual_table(tab: &ResidualTable, t: &mut Table) {
    t.meta("min", num(tab.min)).meta("argmin", num(tab.argmin));
    t.meta("d0", tab.d0.map_or("none".to_string(), num));
    for (d, r) in tab.d.iter().zip(&tab.residual) {
        t.row(&[*d, *r]);
    }
}

fn barrier(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let center = vec![0.0; cfg.ndim.max(1)];
    let mut t = Table::new(&["d", "residual"]);
    t.meta("kind", format!("{:?}", cfg.barrier)).meta("mu", num(cfg.mu)).meta("ndim", cfg.ndim);
    let tab = match cfg.barrier {
        BarrierKind::WSub => {
            let b = RadialBarrier::w_sub(p, cfg.ndim, cfg.mu, cfg.eps, cfg.w_a.unwrap_or(1.0));
            t.meta("eps", num(cfg.eps)).meta("beta", num(b.beta));
            match cfg.w_a {
                Some(a) => {
                    t.meta("a", num(a));
                    residual_w(&b, p)?
                }
                None => {
                    let c = certify_w_sub(&b, p)?;
                    let a = c.a.map_or("none".to_string(), num);
                    t.meta("certified_a", &a).meta("tried", list(&c.tried));
                    sink.result("certified_a", a);
                    c.table
                }
            }
        }
        kind => {
            let b = RadialBarrier::new(p, kind, &center, cfg.barrier_radius, Orientation::InsidePositive, cfg.mu);
            t.meta("radius", num(cfg.barrier_radius)).meta("sigma", num(b.sigma));
            if kind == BarrierKind::WTouch {
                residual_w(&b, p)?
            } else {
                residual_u(&b, p, cfg.ndim, &log_samples(1e-6, 0.5 * cfg.barrier_radius, 2000))?
            }
        }
    };
    residual_table(&tab, &mut t);
    sink.result("residual.min", num(tab.min));
    sink.result("residual.d0", tab.d0.map_or("none".to_string(), num));
    sink.table("residual.csv", &t)
}

fn linearized(cfg: &RunConfig, p: &Params, sink: &mut Sink) -> Result<(), CliError> {
    let s = cfg.s.unwrap_or(p.s);
    let data = cfg.data;
    let lp = LinearizedProblem::new(s, cfg.half_width, cfg.height, cfg.h, |x| match data {
        LinearizedData::Quadratic => x[0] * x[0],
        LinearizedData::Affine => 1.0 + x[0],
    })?;
    sink.result("s", num(s));
    let sol = solve_linearized(&lp)?;
    sink.result("origin", list(&sol.grid.origin));
    sink.field("linearized.apfb", &FieldData::from_field(&sol, p.gamma))?;
    let radii: Vec<f64> = cfg.radii.iter().copied().filter(|&r| r <= cfg.half_width.min(cfg.height)).collect();
    let fit = linearized_decay(&sol, &radii)?;
    let mut t = Table::new(&["r", "max_deviation"]);
    t.meta("s", num(s)).meta("slope", num(fit.slope)).meta("sigma_hat", num(fit.slope - 1.0));
    for (r, m) in fit.radii.iter().zip(&fit.maxima) {
        t.row(&[*r, *m]);
    }
    sink.result("sigma_hat", num(fit.slope - 1.0));
    sink.table("decay.csv", &t)
}

fn gamma(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let set = match cfg.shape {
        Shape::Empty => SetGeometry::Empty,
        Shape::Disk(r) => SetGeometry::disk([0.5, 0.5], r),
        Shape::Square(a) => SetGeometry::Box { lo: [0.5 - a; 2], hi: [0.5 + a; 2] },
    };
    let rows = gamma_sweep(&set, &cfg.gammas, &cfg.deltas, cfg.h)?;
    let mut t = Table::new(&SWEEP_COLUMNS);
    t.meta("has_corners", set.has_corners());
    for r in &rows {
        t.row(&r.fields());
    }
    sink.table("sweep.csv", &t)
}
