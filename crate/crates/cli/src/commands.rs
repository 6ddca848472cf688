use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use slopekit::constants::Constants;
use slopekit::determination::{
    builtin_instance, refinement_study, run_determination, DeterminationConfig, DeterminationInstance,
};
use slopekit::ekeland::ekeland_point;
use slopekit::metric_space::{MetricSpace, ScalarField, Space, SpaceFile};
use slopekit::orbit::{build_determination_map, membership_violations, orbit_length_bound, run_orbit};
use slopekit::plr::{certify_plr, sharp_min_transform, verify_series_bound, Sampling};
use slopekit::slope::{discrete_slope, discrete_slopes, local_slope_finite};
use slopekit::subdifferential::Catalog;
use slopekit::{Error, ExtReal};

use crate::config::{Command, MapKind};

/// Why a command could not produce a verdict.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or files; exit code 2.
    Input(String),
    /// A hypothesis check failed inside the run; exit code 1.
    Verified(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Verified(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Verified(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis { .. } | Error::Numerical(_) => Failure::Verified(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// The JSON document every subcommand writes.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    /// `c′`, `δ′` and `δ̂` for commands that take both `c` and `δ`.
    pub constants: Option<Constants>,
    pub passed: bool,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("{name} must be positive and finite, got {v}")))
    }
}

fn load_space(path: &Path) -> Result<(SpaceFile, Space)> {
    let file = SpaceFile::parse(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: malformed space file: {e}", path.display())))?;
    let space = file.build()?;
    Ok((file, space))
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog> {
    match path {
        Some(p) => Ok(Catalog::parse(&read(p)?)?),
        None => Ok(Catalog::builtin()),
    }
}

fn load_instance(arg: &str) -> Result<DeterminationInstance> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(DeterminationInstance::parse(&read(path)?, &Catalog::builtin())?)
    } else {
        builtin_instance(arg).map_err(|_| Failure::Input(format!("{arg} is neither a file nor a shipped instance")))
    }
}

fn sampling(h: Option<f64>, seed: u64) -> Result<Sampling> {
    if let Some(h) = h {
        positive("h", h)?;
    }
    Ok(Sampling { h, ..Sampling::default() }.seeded(seed))
}

fn ext(v: ExtReal) -> Value {
    to_value(&v)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesFile {
    a: Vec<f64>,
    b: Vec<f64>,
}

pub fn execute(cmd: &Command, seed: u64) -> Result<Report> {
    let mut constants = None;
    let (passed, result) = match cmd {
        Command::Slope { space, field, point, eps } => {
            let (file, space) = load_space(space)?;
            let f = file.field(field, &space)?;
            let x = space.resolve_point(point)?;
            let est = match (eps, &space) {
                (Some(e), _) => discrete_slope(&space, &f, x, *e)?,
                (None, Space::Finite(_)) => local_slope_finite(&space, &f, x)?,
                (None, Space::Grid(g)) => discrete_slope(&space, &f, x, 4.0 * g.spacing())?,
            };
            let result = json!({
                "point": space.label(x),
                "value": ext(est.value),
                "witness": est.witness.map(|w| space.label(w)),
                "resolution": to_value(&est.resolution),
                "diverged": est.diverged,
            });
            (true, result)
        }
        Command::Ekeland { space, field, start, lambda } => {
            positive("lambda", *lambda)?;
            let (file, space) = load_space(space)?;
            let f = file.field(field, &space)?;
            let x0 = space.resolve_point(start)?;
            let r = ekeland_point(&space, &f, x0, *lambda)?;
            let passed = r.descent_margin >= 0.0 && r.strict_min_verified;
            let mut result = to_value(&r);
            result["start_label"] = json!(space.label(r.start));
            result["x_lambda_label"] = json!(space.label(r.x_lambda));
            (passed, result)
        }
        Command::Orbit { space, map, start, center, f, g, slope_f, slope_g, slope_eps, eps, c, max_iter } => {
            let MapKind::Determination = map;
            positive("eps", *eps)?;
            positive("c", *c)?;
            let (file, space) = load_space(space)?;
            let fv = file.field(f, &space)?;
            let gv = file.field(g, &space)?;
            let slopes = |name: &Option<String>, field: &ScalarField| -> Result<Vec<ExtReal>> {
                if let Some(name) = name {
                    return Ok(file.field(name, &space)?.values().to_vec());
                }
                let e = match (slope_eps, space.as_grid()) {
                    (Some(e), _) => *e,
                    (None, Some(grid)) => 4.0 * grid.spacing(),
                    (None, None) => {
                        return Err(Failure::Input("finite spaces need slope fields or --slope-eps".into()))
                    }
                };
                Ok(discrete_slopes(&space, field, e)?)
            };
            let sf = slopes(slope_f, &fv)?;
            let sg = slopes(slope_g, &gv)?;
            let xbar = space.resolve_point(center)?;
            let x0 = space.resolve_point(start)?;
            let dmap = build_determination_map(&space, &fv, &gv, &sf, &sg, *eps, *c, xbar)?;
            let orbit = run_orbit(&space, &dmap, x0, *max_iter)?;
            let length = orbit_length_bound(&space, &orbit, &fv, *eps)?;
            let violations = membership_violations(&dmap, &orbit);
            let steps: Vec<Value> = orbit
                .points
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let next = orbit.points.get(i + 1).copied();
                    json!({
                        "point": space.label(x),
                        "f": ext(fv.value(x)),
                        "g": ext(gv.value(x)),
                        "slope_f": ext(sf[x]),
                        "image": to_value(&dmap.diagnose(x)),
                        "next": next.map(|y| space.label(y)),
                        "step": orbit.steps.get(i),
                        "components": next.and_then(|y| dmap.components(x, y)),
                    })
                })
                .collect();
            let reached_center = orbit.end() == xbar;
            let passed = violations.is_empty() && length.telescoping_holds && reached_center;
            let result = json!({
                "map": "determination",
                "c": c,
                "eps": eps,
                "center": space.label(xbar),
                "termination": to_value(&orbit.termination),
                "reached_center": reached_center,
                "length": to_value(&length),
                "membership_violations": violations,
                "steps": steps,
            });
            (passed, result)
        }
        Command::PlrCheck { catalog, center, c, delta, h, catalog_file } => {
            positive("c", *c)?;
            positive("delta", *delta)?;
            let cat = load_catalog(catalog_file.as_deref())?;
            let entry = cat.get(catalog)?;
            let cert = certify_plr(&entry.params, center, *c, *delta, &sampling(*h, seed)?)?;
            constants = Some(Constants::new(*c, *delta));
            (cert.passed(), to_value(&cert))
        }
        Command::SeriesCheck { file, c } => {
            positive("c", *c)?;
            let text = read(file)?;
            let seq: SeriesFile = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("{}: malformed sequence file: {e}", file.display())))?;
            let r = verify_series_bound(&seq.a, &seq.b, *c)?;
            (r.passed(), to_value(&r))
        }
        Command::SharpMin { catalog, center, c, delta, p, h, catalog_file } => {
            positive("c", *c)?;
            positive("delta", *delta)?;
            let cat = load_catalog(catalog_file.as_deref())?;
            let entry = cat.get(catalog)?;
            if center.len() != entry.dim() {
                return Err(Failure::Input(format!("{catalog} has dimension {}", entry.dim())));
            }
            let p = match p {
                Some(p) => p.clone(),
                None => entry.params.subdifferential(center).min_norm_element()?,
            };
            let r = sharp_min_transform(&entry.params, center, *c, *delta, &p, &sampling(*h, seed)?)?;
            constants = Some(r.constants);
            (r.passed, to_value(&r))
        }
        Command::Determine { instance, report: _, csv, plot, h, refine } => {
            let inst = load_instance(instance)?;
            let base = match h {
                Some(h) => {
                    positive("h", *h)?;
                    DeterminationConfig::with_spacing(*h)
                }
                None => DeterminationConfig::default(),
            }
            .seeded(seed);
            constants = Some(Constants::new(inst.c, inst.delta));
            match refine {
                None => {
                    let r = run_determination(&inst, &base)?;
                    if let Some(path) = csv {
                        write(path, &r.csv())?;
                    }
                    if let Some(path) = plot {
                        let mut text = String::from("# radius max_deviation\n");
                        for (radius, dev) in r.radius_profile(&inst.center) {
                            writeln!(text, "{radius:.17e} {dev:.17e}").unwrap();
                        }
                        write(path, &text)?;
                    }
                    (r.as_expected(&inst), to_value(&r))
                }
                Some(halvings) => {
                    let r = refinement_study(&inst, base.one_sided.h, *halvings, &base)?;
                    if let Some(path) = plot {
                        let mut text = String::from("# h certified_deviation\n");
                        for row in &r.rows {
                            writeln!(text, "{:.17e} {:.17e}", row.h, row.certified_deviation).unwrap();
                        }
                        write(path, &text)?;
                    }
                    let passed = r.monotone && r.rows.iter().all(|row| row.passed);
                    (passed, to_value(&r))
                }
            }
        }
        Command::CatalogList { catalog_file } => {
            let cat = load_catalog(catalog_file.as_deref())?;
            let entries: Vec<Value> = cat
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "id": e.id,
                        "kind": to_value(&e.kind),
                        "dim": e.dim(),
                        "convex": e.is_convex(),
                        "lipschitz": e.lipschitz_flag,
                        "f_regular": e.f_regular_flag,
                    })
                })
                .collect();
            (true, Value::Array(entries))
        }
    };
    Ok(Report { command: cmd.name(), seed, constants, passed, result })
}
