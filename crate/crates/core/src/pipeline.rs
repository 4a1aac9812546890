//! Configuration and orchestration of the end-to-end runs.
//!
//! A config is a JSON object. Only `chart` is required:
//!
//! ```json
//! {
//!   "chart": { "surface": { "name": "clifford_torus" }, "nu": 64, "nv": 64,
//!              "u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.0 },
//!   "datum": { "kind": "example_family", "c": 4.0, "d": 2.0 },
//!   "support": { "kind": "warped", "nu": { "kind": "constant", "value": 1.0 } },
//!   "ruling": { "t0": -0.1, "t1": 0.1, "nt": 5 },
//!   "tolerances": { "membership": null, "support": null, "triple": null,
//!                   "frame": null, "isometry": null },
//!   "output": "gdeform-out"
//! }
//! ```
//!
//! `datum.kind` is `example_family {c, d}`, `pair {u, v}` with two profiles,
//! or `zeta {zeta}` with one complex profile along `v = v0`. `support.kind`
//! is `warped {nu}`, `cauchy {a, b}` with `a` along `v = v0` and `b` along
//! `u = u0`, or `csv {path}` with header `u,v,value`. A `null` tolerance
//! means the grid-scaled default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{debug, info};
use num_complex::Complex64;
use serde::Deserialize;

use crate::chart::grid::{Grid2, Grid3, MaxAt, ScalarField};
use crate::defdata::{
    build_pair, build_zeta, ch_membership, example_family, support_check, support_solve, warped_support,
    DeformationDatum, Profile, SupportFunction,
};
use crate::error::{Error, Result};
use crate::gaussmap::{build_geometry, catalog, classify, ChartGeometry, ConjugacyKind, SurfaceSpec};
use crate::reconstruct::{
    check3, default_frame_tol, frame_integrate_g, gauss_param_f, isometry_check, second_form_g,
    shape_cross_check, write_obj_slice, write_sample_csv, FSample, GIntegration, MaxAt3, PathOrder,
};
use crate::report::{Check, CheckSet, Json};
use crate::triple::{
    composition_frame, default_triple_tol, genuineness, triple_from_pair, triple_from_zeta, verify_triple,
    TripleField,
};

/// Allowed node counts per axis.
pub const GRID_RANGE: (usize, usize) = (8, 512);
/// Tolerance on the pointwise conjugacy identities.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub chart: ChartConfig,
    #[serde(default)]
    pub datum: DatumConfig,
    #[serde(default)]
    pub support: SupportConfig,
    #[serde(default)]
    pub ruling: RulingConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("gdeform-out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub surface: SurfaceSpec,
    #[serde(default = "default_nodes")]
    pub nu: usize,
    #[serde(default = "default_nodes")]
    pub nv: usize,
    #[serde(default)]
    pub u0: f64,
    #[serde(default = "one")]
    pub u1: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default = "one")]
    pub v1: f64,
}

fn default_nodes() -> usize {
    64
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumConfig {
    ExampleFamily { c: f64, d: f64 },
    Pair { u: Profile, v: Profile },
    Zeta { zeta: Profile },
}

impl Default for DatumConfig {
    fn default() -> Self {
        DatumConfig::ExampleFamily { c: 4.0, d: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupportConfig {
    Warped { nu: Profile },
    Cauchy { a: Profile, b: Profile },
    Csv { path: PathBuf },
}

impl Default for SupportConfig {
    fn default() -> Self {
        SupportConfig::Warped { nu: Profile::constant(1.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulingConfig {
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl Default for RulingConfig {
    fn default() -> Self {
        RulingConfig { t0: -0.1, t1: 0.1, nt: 5 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub membership: Option<f64>,
    pub support: Option<f64>,
    pub triple: Option<f64>,
    pub frame: Option<f64>,
    pub isometry: Option<f64>,
}

impl Tolerances {
    /// Every tolerance set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            membership: Some(tol),
            support: Some(tol),
            triple: Some(tol),
            frame: Some(tol),
            isometry: Some(tol),
        }
    }

    fn entries(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("membership", self.membership),
            ("support", self.support),
            ("triple", self.triple),
            ("frame", self.frame),
            ("isometry", self.isometry),
        ]
    }
}

impl PipelineConfig {
    /// A config for a catalog chart with every other field defaulted.
    pub fn for_surface(surface: SurfaceSpec, n: usize) -> Self {
        PipelineConfig {
            chart: ChartConfig { surface, nu: n, nv: n, u0: 0.0, u1: 1.0, v0: 0.0, v1: 1.0 },
            datum: DatumConfig::default(),
            support: SupportConfig::default(),
            ruling: RulingConfig::default(),
            tolerances: Tolerances::default(),
            output: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file. Relative paths inside it resolve
    /// against the working directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg = serde_json::from_str::<Self>(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `<nu>x<nv>[x<nt>]`.
    pub fn set_grid(&mut self, spec: &str) -> Result<()> {
        let parts: Vec<usize> = spec
            .split('x')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("grid '{spec}' is not <nu>x<nv>[x<nt>]")))?;
        match parts[..] {
            [nu, nv] => (self.chart.nu, self.chart.nv) = (nu, nv),
            [nu, nv, nt] => (self.chart.nu, self.chart.nv, self.ruling.nt) = (nu, nv, nt),
            _ => return Err(Error::Config(format!("grid '{spec}' is not <nu>x<nv>[x<nt>]"))),
        }
        Ok(())
    }

    /// Grid sizes within range, positive tolerances, a ruling range with a
    /// node at `t = 0`, and existing input files.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let (lo, hi) = GRID_RANGE;
        for (axis, n) in [("nu", self.chart.nu), ("nv", self.chart.nv)] {
            if !(lo..=hi).contains(&n) {
                return bad(format!("chart.{axis} = {n} outside [{lo}, {hi}]"));
            }
        }
        if !(3..=hi).contains(&self.ruling.nt) {
            return bad(format!("ruling.nt = {} outside [3, {hi}]", self.ruling.nt));
        }
        for (name, tol) in self.tolerances.entries() {
            if let Some(t) = tol {
                if !(t > 0.0 && t.is_finite()) {
                    return bad(format!("tolerances.{name} = {t} must be positive"));
                }
            }
        }
        let r = self.ruling;
        let grid3 = Grid3::new(self.chart_grid()?, r.t0, r.t1, r.nt)?;
        if grid3.zero_slice().is_none() {
            return bad(format!("ruling range [{}, {}] with {} nodes has no node at t = 0", r.t0, r.t1, r.nt));
        }
        for path in self.input_files() {
            if !path.is_file() {
                return bad(format!("input file {} does not exist", path.display()));
            }
        }
        Ok(())
    }

    fn chart_grid(&self) -> Result<Grid2> {
        let c = &self.chart;
        Grid2::new(c.u0, c.u1, c.nu, c.v0, c.v1, c.nv).map_err(|e| Error::Config(e.to_string()))
    }

    fn input_files(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        if let SurfaceSpec::Sampled { path } = &self.chart.surface {
            out.push(path.as_path());
        }
        let mut profiles: Vec<&Profile> = Vec::new();
        match &self.datum {
            DatumConfig::ExampleFamily { .. } => {}
            DatumConfig::Pair { u, v } => profiles.extend([u, v]),
            DatumConfig::Zeta { zeta } => profiles.push(zeta),
        }
        match &self.support {
            SupportConfig::Warped { nu } => profiles.push(nu),
            SupportConfig::Cauchy { a, b } => profiles.extend([a, b]),
            SupportConfig::Csv { path } => out.push(path.as_path()),
        }
        out.extend(profiles.into_iter().filter_map(|p| match p {
            Profile::Tabulated { path } => Some(path.as_path()),
            _ => None,
        }));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Classify,
    Membership,
    Build,
    Reconstruct,
    All,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Classify => "classify",
            Subcommand::Membership => "membership",
            Subcommand::Build => "build",
            Subcommand::Reconstruct => "reconstruct",
            Subcommand::All => "all",
        }
    }
}

/// Reports by name, the overall verdict and a readable summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub reports: BTreeMap<String, Json>,
    pub summary: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, reports: BTreeMap::new(), summary: String::new() }
    }

    fn add(&mut self, name: &str, report: Json) {
        let pass = matches!(report.get("pass"), Some(Json::Bool(true)));
        self.pass &= pass;
        let _ = writeln!(self.summary, "{name}: {}", if pass { "pass" } else { "FAIL" });
        if let Some(Json::Map(checks)) = report.get("checks") {
            for (k, c) in checks {
                if matches!(c.get("pass"), Some(Json::Bool(false))) {
                    let _ = writeln!(self.summary, "  failed check {k}");
                }
            }
        }
        if let Some(Json::Str(e)) = report.get("error") {
            let _ = writeln!(self.summary, "  error: {e}");
        }
        self.reports.insert(name.to_string(), report);
    }

    /// Writes `<name>.json` per report and `summary.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, r) in &self.reports {
            r.write_file(&dir.join(format!("{name}.json")))?;
        }
        let path = dir.join("summary.txt");
        std::fs::write(&path, &self.summary).map_err(|e| Error::io(&path, e))
    }
}

fn maxat_json(m: MaxAt) -> Json {
    let mut j = Json::map();
    j.set("value", m.value).set("node", vec![m.node.0, m.node.1]);
    j
}

fn maxat3_json(m: MaxAt3) -> Json {
    let mut j = Json::map();
    j.set("value", m.value).set("node", vec![m.node.0, m.node.1, m.node.2]);
    j
}

fn counts<T, K: Ord + Into<String> + Copy>(data: &[T], key: impl Fn(&T) -> K) -> Json {
    let mut m: BTreeMap<String, Json> = BTreeMap::new();
    for x in data {
        let e = m.entry(key(x).into()).or_insert(Json::Int(0));
        if let Json::Int(c) = e {
            *c += 1;
        }
    }
    Json::Map(m)
}

fn error_report(e: &Error) -> Json {
    let mut j = Json::map();
    j.set("pass", false).set("error", e.to_string());
    match e {
        Error::Admissibility { condition, node, .. } => {
            j.set("condition", *condition).set("node", vec![node.0, node.1]);
        }
        Error::SingularP { node, .. } => {
            j.set("node", vec![node.0, node.1, node.2]);
        }
        Error::TripleDomain { node, .. } => {
            j.set("node", vec![node.0, node.1]);
        }
        _ => {}
    }
    j
}

/// Errors that end the run instead of becoming a failed report.
fn fatal(e: &Error) -> bool {
    matches!(e, Error::Io { .. } | Error::Config(_) | Error::Parse { .. })
}

struct Context<'a> {
    cfg: &'a PipelineConfig,
    geom: ChartGeometry,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a PipelineConfig) -> Result<Self> {
        let patch = match &cfg.chart.surface {
            SurfaceSpec::Sampled { path } => crate::gaussmap::SurfacePatch::from_csv(path)?,
            spec => catalog(spec, cfg.chart_grid()?)?,
        };
        let geom = build_geometry(&patch)?;
        info!("chart {} on {}x{} nodes", cfg.chart.surface.name(), geom.grid.nu, geom.grid.nv);
        Ok(Context { cfg, geom })
    }

    fn grid(&self) -> Grid2 {
        self.geom.grid
    }

    fn us(&self) -> Vec<f64> {
        (0..self.grid().nu).map(|i| self.grid().u(i)).collect()
    }

    fn vs(&self) -> Vec<f64> {
        (0..self.grid().nv).map(|j| self.grid().v(j)).collect()
    }

    fn datum(&self) -> Result<DeformationDatum> {
        Ok(match &self.cfg.datum {
            DatumConfig::ExampleFamily { c, d } => {
                let (u, v) = example_family(&self.geom, *c, *d)?;
                DeformationDatum::Hyperbolic(build_pair(&self.geom, &u, &v)?)
            }
            DatumConfig::Pair { u, v } => {
                DeformationDatum::Hyperbolic(build_pair(&self.geom, &u.sample(&self.us())?, &v.sample(&self.vs())?)?)
            }
            DatumConfig::Zeta { zeta } => {
                let z: Vec<Complex64> =
                    zeta.sample_complex(&self.us())?.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                DeformationDatum::Elliptic(build_zeta(&self.geom, &z)?)
            }
        })
    }

    fn support(&self) -> Result<SupportFunction> {
        match &self.cfg.support {
            SupportConfig::Warped { nu } => warped_support(&self.geom, &nu.sample(&self.vs())?),
            SupportConfig::Cauchy { a, b } => support_solve(&self.geom, &a.sample(&self.us())?, &b.sample(&self.vs())?),
            SupportConfig::Csv { path } => {
                let gamma = read_scalar_csv(path, self.grid())?;
                SupportFunction::from_field(&self.geom, gamma)
            }
        }
    }

    fn triple(&self, datum: &DeformationDatum) -> Result<TripleField> {
        match datum {
            DeformationDatum::Hyperbolic(d) => triple_from_pair(&self.geom, d),
            DeformationDatum::Elliptic(d) => triple_from_zeta(&self.geom, d),
        }
    }

    fn grid3(&self) -> Result<Grid3> {
        let r = self.cfg.ruling;
        Grid3::new(self.grid(), r.t0, r.t1, r.nt)
    }
}

/// Reads `u,v,value` rows in storage order onto `grid`.
pub fn read_scalar_csv(path: &Path, grid: Grid2) -> Result<ScalarField> {
    let perr = |msg: String| Error::Parse { path: path.to_path_buf(), msg };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => perr(format!("{other:?}")),
    })?;
    let header = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["u", "v", "value"] {
        return Err(perr("header must be u,v,value".into()));
    }
    let mut data = Vec::with_capacity(grid.len());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let num = |c: usize| rec[c].trim().parse::<f64>().map_err(|e| perr(format!("row {k}: {e}")));
        let (u, v, x) = (num(0)?, num(1)?, num(2)?);
        if k >= grid.len() {
            return Err(perr(format!("more than {} rows", grid.len())));
        }
        let (i, j) = grid.node_of(k);
        let tol = 1e-9 * (1.0 + u.abs().max(v.abs()));
        if (grid.u(i) - u).abs() > tol || (grid.v(j) - v).abs() > tol {
            return Err(perr(format!("row {k} is not node ({i}, {j}) of the chart grid")));
        }
        data.push(x);
    }
    ScalarField::from_vec(grid, data).map_err(|e| perr(e.to_string()))
}

fn classify_report(cx: &Context) -> Result<Json> {
    let c = classify(&cx.geom)?;
    let mut checks = CheckSet::default();
    checks.insert("conjugacy", Check::scalar(c.residual, CLASSIFY_TOL));
    checks.insert("square", Check::scalar(c.square_defect(), CLASSIFY_TOL));
    let typed = matches!(c.kind, ConjugacyKind::Hyperbolic | ConjugacyKind::Elliptic);
    let mut j = Json::map();
    j.set("chart", cx.cfg.chart.surface.name())
        .set("grid", vec![cx.grid().nu, cx.grid().nv])
        .set("kind", c.kind.name())
        .set("node_kinds", counts(&c.node_kinds.data, |k| k.name()))
        .set("normal_rank", counts(&c.normal_rank.data, |r| if *r == 2 { "2" } else if *r == 1 { "1" } else { "0" }))
        .set("pass", typed && checks.pass())
        .set("checks", checks.to_json());
    Ok(j)
}

fn membership_report(cx: &Context) -> Result<Json> {
    let datum = cx.datum()?;
    let m = ch_membership(&datum, cx.cfg.tolerances.membership);
    let s = cx.support()?;
    let stol = cx
        .cfg
        .tolerances
        .support
        .unwrap_or_else(|| crate::defdata::default_membership_tol(cx.grid(), s.gamma.max_abs(0).value.max(1.0)));
    let sc = support_check(&cx.geom, &s, stol);
    let mut checks = CheckSet::default();
    checks.insert("membership", Check::residual(MaxAt { value: m.max_residual, node: m.node }, m.tol));
    checks.insert("support", Check::residual(MaxAt { value: sc.max_residual, node: sc.node }, sc.tol));
    let branches = Json::Map(m.branches.iter().map(|(k, v)| (k.to_string(), Json::from(*v))).collect());
    let mut j = Json::map();
    j.set("datum", datum.kind())
        .set("branches", branches)
        .set("pass", checks.pass())
        .set("checks", checks.to_json());
    Ok(j)
}

struct Built {
    triple: TripleField,
    support: SupportFunction,
    report: Json,
}

fn build(cx: &Context) -> Result<Built> {
    let datum = cx.datum()?;
    let triple = cx.triple(&datum)?;
    let support = cx.support()?;
    let checks = verify_triple(&cx.geom, &triple, &support, cx.cfg.tolerances.triple)?;
    let tol = cx.cfg.tolerances.triple.unwrap_or_else(|| default_triple_tol(&triple));
    let gen = genuineness(&triple, tol);
    let mut g = Json::map();
    g.set("genuine", gen.genuine)
        .set("margin", maxat_json(gen.margin))
        .set("rank_margin", maxat_json(gen.rank_margin));
    let mut j = Json::map();
    j.set("kind", datum.kind()).set("genuineness", g);
    if let Some(cf) = composition_frame(&triple) {
        let mut c = Json::map();
        c.set("identity_residual", maxat_json(cf.identity_residual))
            .set("unit_residual", maxat_json(cf.unit_residual));
        j.set("composition_frame", c);
    }
    let mut all = checks.clone();
    for (k, c) in gen.checks.0 {
        all.insert(&k, c);
    }
    j.set("pass", all.pass()).set("checks", all.to_json());
    Ok(Built { triple, support, report: j })
}

/// Sampled `f` and integrated `g` of a reconstruct run.
pub struct Reconstructed {
    pub f: FSample,
    pub g: GIntegration,
    pub report: Json,
}

fn reconstruct(cx: &Context, b: &Built) -> Result<Reconstructed> {
    let f = gauss_param_f(&cx.geom, &b.support, cx.grid3()?)?;
    let g3 = f.grid();
    let ftol = cx.cfg.tolerances.frame.unwrap_or_else(|| default_frame_tol(&g3));
    let form = second_form_g(&b.triple, &f, ftol)?;
    let g = frame_integrate_g(&f, &form, PathOrder::UFirst, Some(ftol))?;
    let gv = frame_integrate_g(&f, &form, PathOrder::VFirst, Some(ftol))?;
    let swap = (0..g3.len())
        .map(|n| ((&g.sample.pos[n] - &gv.sample.pos[n]).norm(), n))
        .fold((0.0_f64, 0), |a, x| if x.0 > a.0 { x } else { a });
    let node = crate::reconstruct::sample::node3(&g3, swap.1);
    let shape = shape_cross_check(&f.sample, crate::chart::grid::DEFAULT_BAND);
    let itol = cx.cfg.tolerances.isometry.unwrap_or(100.0 * g3.base.h2());
    let mut checks = isometry_check(&f.sample, &g.sample, itol)?;
    checks.insert("holonomy", check3(g.holonomy, ftol, false));
    checks.insert("transposition", check3(MaxAt3 { value: swap.0, node }, ftol, false));
    checks.insert("shape_operator", check3(shape.residual, ftol, false));
    checks.insert("symmetry", check3(form.symmetry, ftol, false));
    checks.insert("gauss", check3(form.gauss, ftol, false));
    let planes = Json::List(g.holonomy_planes.iter().map(|m| maxat3_json(*m)).collect());
    let mut j = Json::map();
    j.set("grid", vec![g3.base.nu, g3.base.nv, g3.nt])
        .set("ruling", vec![g3.t0, g3.t1])
        .set("ruling_shrunk", f.shrunk)
        .set("holonomy_planes", planes)
        .set("connection_asymmetry", g.connection_asymmetry)
        .set("pass", checks.pass())
        .set("checks", checks.to_json());
    Ok(Reconstructed { f, g, report: j })
}

fn export(out: &Path, r: &Reconstructed) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let k0 = r.f.grid().zero_slice().unwrap_or(0);
    write_sample_csv(&r.f.sample, &out.join("f.csv"))?;
    write_sample_csv(&r.g.sample, &out.join("g.csv"))?;
    write_obj_slice(&r.f.sample, k0, &out.join("f_slice.obj"))?;
    write_obj_slice(&r.g.sample, k0, &out.join("g_slice.obj"))
}

/// Turns a computation error into a failed report; passes through the
/// errors that end the run.
fn settle(out: &mut Outcome, name: &str, r: Result<Json>) -> Result<bool> {
    match r {
        Ok(j) => {
            out.add(name, j);
            Ok(true)
        }
        Err(e) if fatal(&e) => Err(e),
        Err(e) => {
            debug!("{name} failed: {e}");
            out.add(name, error_report(&e));
            Ok(false)
        }
    }
}

/// Runs a subcommand without touching the file system except for inputs.
pub fn evaluate(sub: Subcommand, cfg: &PipelineConfig) -> Result<(Outcome, Option<Reconstructed>)> {
    cfg.validate()?;
    let mut out = Outcome::new();
    let cx = match Context::new(cfg) {
        Ok(cx) => cx,
        Err(e) if fatal(&e) => return Err(e),
        Err(e) => {
            out.add(sub.name(), error_report(&e));
            return Ok((out, None));
        }
    };
    let want = |s: Subcommand| sub == s || sub == Subcommand::All;
    if want(Subcommand::Classify) {
        settle(&mut out, "classify", classify_report(&cx))?;
    }
    if want(Subcommand::Membership) {
        settle(&mut out, "membership", membership_report(&cx))?;
    }
    let mut rec = None;
    if want(Subcommand::Build) || want(Subcommand::Reconstruct) {
        let built = build(&cx);
        let built = match built {
            Ok(b) => Some(b),
            Err(e) if fatal(&e) => return Err(e),
            Err(e) => {
                out.add("build", error_report(&e));
                None
            }
        };
        if let Some(b) = built {
            if want(Subcommand::Build) {
                out.add("build", b.report.clone());
            }
            if want(Subcommand::Reconstruct) {
                match reconstruct(&cx, &b) {
                    Ok(r) => {
                        out.add("reconstruct", r.report.clone());
                        rec = Some(r);
                    }
                    Err(e) if fatal(&e) => return Err(e),
                    Err(e) => out.add("reconstruct", error_report(&e)),
                }
            }
        } else if sub == Subcommand::Reconstruct {
            out.reports.entry("reconstruct".into()).or_insert_with(|| {
                let mut j = Json::map();
                j.set("pass", false).set("error", "triple construction failed");
                j
            });
        }
    }
    Ok((out, rec))
}

/// Runs a subcommand and writes reports, summary and exports to `out`.
pub fn run(sub: Subcommand, cfg: &PipelineConfig, out: &Path) -> Result<Outcome> {
    let (outcome, rec) = evaluate(sub, cfg)?;
    outcome.write(out)?;
    if let Some(r) = rec {
        export(out, &r)?;
    }
    Ok(outcome)
}

/// Process exit code for a finished run or an error.
pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(o) if o.pass => 0,
        Ok(_) => 1,
        Err(Error::Io { .. }) => 3,
        Err(Error::Config(_) | Error::Parse { .. } | Error::UnknownSurface(_) | Error::InvalidGrid(_)) => 2,
        Err(_) => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clifford(n: usize) -> PipelineConfig {
        PipelineConfig::for_surface(SurfaceSpec::CliffordTorus, n)
    }

    #[test]
    fn only_the_chart_is_required() {
        let cfg = PipelineConfig::from_json(r#"{"chart": {"surface": {"name": "clifford_torus"}}}"#).unwrap();
        assert_eq!(cfg, clifford(64));
        assert!(PipelineConfig::from_json("{}").is_err());
        assert!(PipelineConfig::from_json(r#"{"chart": {"surface": {"name": "clifford_torus"}}, "extra": 1}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = clifford(7);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c = clifford(16);
        c.tolerances.frame = Some(-1.0);
        assert!(c.validate().is_err());
        c = clifford(16);
        c.ruling = RulingConfig { t0: -0.1, t1: 0.1, nt: 4 };
        assert!(c.validate().is_err());
        c = clifford(16);
        c.chart.surface = SurfaceSpec::Sampled { path: "no/such/file.csv".into() };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn grid_flag_parses() {
        let mut c = clifford(16);
        c.set_grid("32x24x7").unwrap();
        assert_eq!((c.chart.nu, c.chart.nv, c.ruling.nt), (32, 24, 7));
        c.set_grid("20x21").unwrap();
        assert_eq!((c.chart.nu, c.chart.nv, c.ruling.nt), (20, 21, 7));
        assert!(c.set_grid("20").is_err() && c.set_grid("ax3").is_err());
    }

    #[test]
    fn clifford_all_passes() {
        let (o, rec) = evaluate(Subcommand::All, &clifford(24)).unwrap();
        assert!(o.pass, "{}", o.summary);
        assert_eq!(o.reports.keys().collect::<Vec<_>>(), ["build", "classify", "membership", "reconstruct"]);
        assert!(o.reports["reconstruct"].get("checks").unwrap().get("metric").is_some());
        assert!(rec.is_some());
    }

    #[test]
    fn inadmissible_pair_fails_membership_with_node() {
        let mut c = clifford(16);
        c.datum = DatumConfig::Pair { u: Profile::constant(-0.1), v: Profile::constant(0.5) };
        let (o, _) = evaluate(Subcommand::Membership, &c).unwrap();
        assert!(!o.pass);
        let r = &o.reports["membership"];
        assert_eq!(r.get("condition"), Some(&Json::from("(3)")));
        assert!(r.get("node").is_some());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::io("x", std::io::Error::other("y")))), 3);
        assert_eq!(exit_code(&Err(Error::Compatibility("x".into()))), 1);
    }
}
