use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sectorange::acceptance;
use sectorange::calculus::{
    approximant, calculus_convergence, certify_shifted, crouzeix_ratio, default_nu, dunford_riesz_with, resolvent,
    semigroup, sup_on_imaginary_axis, von_neumann_check, CalcError, CalcFunction, ContourOptions, Region,
    SectorialMatrix, CONTRACTION_SLACK, CROUZEIX_BOUND, RESOLVENT_SLACK,
};
use sectorange::fem::{assemble, reduced_operator, sector_inclusion_check, INCLUSION_SLACK};
use sectorange::field::{
    alpha_p_complex, alpha_p_real, alpha_p_uniform, delta_p_field, delta_p_lower_bound, eta_and_q,
    eta_and_q_uniform, field_alpha, hinf_angle_bound, p_range_angle, CoefficientField, CriticalExponent,
    FieldError, LpAngleReading, PExponent,
};
use sectorange::numkernel::{eig_general, spectral_norm, ComplexMatrix};
use sectorange::pform::{form_integral, CutoffSpec, SmoothSample};
use sectorange::range::{
    angle_estimate_lemma, angle_estimate_norm, coercivity_data, extremal_vector, halfmoon_region, optimal_angle,
    range_boundary, sector_distance, sharpness_check, AngleRole, SectorAngle, DEFAULT_DIRECTIONS,
};

use crate::error::CliError;
use crate::json::{complex, obj, radians, Json};
use crate::scenario::{self, Kind, Scenario};

pub const TOOL: &str = "sectorange";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug)]
struct Check {
    name: String,
    relation: Relation,
    value: f64,
    bound: f64,
    tolerance: f64,
    passed: bool,
    witness: Json,
}

impl Check {
    fn to_json(&self) -> Json {
        obj([
            ("name", self.name.as_str().into()),
            ("passed", self.passed.into()),
            ("relation", if self.relation == Relation::AtMost { "<=" } else { ">=" }.into()),
            ("value", self.value.into()),
            ("bound", self.bound.into()),
            ("tolerance", self.tolerance.into()),
            ("witness", self.witness.clone()),
        ])
    }
}

/// Results, asserted checks and optional CSV text of one run.
pub struct Report {
    tol_override: Option<f64>,
    results: Vec<(String, Json)>,
    checks: Vec<Check>,
    csv: Option<String>,
}

impl Report {
    fn new(tol_override: Option<f64>) -> Self {
        Self { tol_override, results: Vec::new(), checks: Vec::new(), csv: None }
    }

    fn put(&mut self, key: &str, value: impl Into<Json>) {
        self.results.push((key.to_string(), value.into()));
    }

    fn assert(
        &mut self,
        name: impl Into<String>,
        relation: Relation,
        value: f64,
        bound: f64,
        tolerance: f64,
        witness: impl FnOnce() -> Json,
    ) {
        let tolerance = self.tol_override.unwrap_or(tolerance);
        let passed = match relation {
            Relation::AtMost => value <= bound + tolerance,
            Relation::AtLeast => value >= bound - tolerance,
        };
        let witness = if passed { Json::Null } else { witness() };
        self.checks.push(Check { name: name.into(), relation, value, bound, tolerance, passed, witness });
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64, tol: f64, witness: impl FnOnce() -> Json) {
        self.assert(name, Relation::AtMost, value, bound, tol, witness);
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64, tol: f64, witness: impl FnOnce() -> Json) {
        self.assert(name, Relation::AtLeast, value, bound, tol, witness);
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn csv(&self) -> Option<&str> {
        self.csv.as_deref()
    }

    /// The full report: tool, resolved scenario, results, checks and verdict.
    pub fn to_json(&self, resolved: &Scenario) -> Json {
        let failed = self.failures();
        obj([
            ("tool", TOOL.into()),
            ("version", env!("CARGO_PKG_VERSION").into()),
            ("scenario", resolved.to_json()),
            ("results", Json::Obj(self.results.clone())),
            ("checks", Json::Arr(self.checks.iter().map(Check::to_json).collect())),
            ("summary", obj([("checks", self.checks.len().into()), ("failed", failed.into())])),
            ("passed", (failed == 0).into()),
        ])
    }
}

/// Validates the scenario, fills in defaults and executes it. The returned
/// scenario is the resolved one, with inputs inlined.
pub fn execute(scn: &Scenario) -> Result<(Scenario, Report), CliError> {
    let mut s = scn.clone();
    scenario::check_nonnegative(s.delta, "delta")?;
    scenario::check_positive(s.tol_override, "tol_override")?;
    if let Some(n) = s.n_dirs {
        if n < 8 {
            return Err(CliError::Validation(format!("n_dirs = {n}: at least 8 directions are required")));
        }
    }
    let mut report = Report::new(s.tol_override);
    match s.kind {
        Kind::Matrix => analyze_matrix(&mut s, &mut report)?,
        Kind::Field => analyze_field(&mut s, &mut report)?,
        Kind::Fem => fem_check(&mut s, &mut report)?,
        Kind::Calculus => calculus_check(&mut s, &mut report)?,
        Kind::Pform => pform_check(&mut s, &mut report)?,
    }
    Ok((s, report))
}

fn matrix_input(s: &mut Scenario) -> Result<ComplexMatrix, CliError> {
    if let Some(mf) = &s.matrix_data {
        return mf.to_matrix("matrix_data");
    }
    let path = scenario::require(&s.matrix, "matrix")?.clone();
    let (mf, m) = scenario::load_matrix(&path)?;
    s.matrix_data = Some(mf);
    Ok(m)
}

fn field_input(s: &mut Scenario) -> Result<CoefficientField, CliError> {
    if let Some(ff) = &s.field_data {
        return ff.to_field("field_data");
    }
    let path = scenario::require(&s.field, "field")?.clone();
    let (ff, field) = scenario::load_field(&path)?;
    s.field_data = Some(ff);
    Ok(field)
}

fn exponents(s: &mut Scenario, default: &[f64]) -> Result<Vec<PExponent>, CliError> {
    if s.p.is_empty() {
        s.p = default.to_vec();
    }
    scenario::check_exponents(&s.p)?;
    s.p.iter().map(|&p| PExponent::new(p).map_err(|e| CliError::Validation(format!("p: {e}")))).collect()
}

fn n_dirs(s: &mut Scenario) -> usize {
    *s.n_dirs.get_or_insert(DEFAULT_DIRECTIONS)
}

fn complex_list(zs: &[Complex64]) -> Json {
    Json::Arr(zs.iter().map(|&z| complex(z)).collect())
}

fn vector(v: &[Complex64]) -> Json {
    complex_list(v)
}

fn short(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn csv_header() -> String {
    "series,re,im\n".to_string()
}

fn csv_points(csv: &mut String, series: &str, zs: &[Complex64]) {
    for z in zs {
        let _ = writeln!(csv, "{series},{:.16e},{:.16e}", z.re, z.im);
    }
}

/// Two rays of Σ_θ from the origin out to `radius`.
fn csv_rays(csv: &mut String, theta: f64, radius: f64) {
    let zero = Complex64::new(0.0, 0.0);
    csv_points(csv, "ray_upper", &[zero, Complex64::from_polar(radius, theta)]);
    csv_points(csv, "ray_lower", &[zero, Complex64::from_polar(radius, -theta)]);
}

fn halfmoon_violation(hm: &sectorange::range::HalfMoon, z: Complex64) -> f64 {
    [hm.re_min - z.re, z.re - hm.re_max, z.im.abs() - hm.im_bound, z.norm() - hm.radius, 0.0]
        .into_iter()
        .fold(0.0, f64::max)
}

fn analyze_matrix(s: &mut Scenario, r: &mut Report) -> Result<(), CliError> {
    let b = matrix_input(s)?;
    let dirs = n_dirs(s);
    let cd = coercivity_data(&b)?;
    let eig = eig_general(&b)?;
    let (phi_at, phi) = eig
        .iter()
        .map(|z| (*z, z.arg().abs()))
        .fold((Complex64::new(0.0, 0.0), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let omega = optimal_angle(&b)?;
    let alpha = angle_estimate_lemma(&b)?;
    let alpha_bar = angle_estimate_norm(&b)?;
    let hm = halfmoon_region(&b)?;
    let sharp = sharpness_check(&b)?;
    let boundary = range_boundary(&b, dirs)?;
    let scale = cd.numerical_radius.max(1.0);

    r.put("n", b.dim());
    r.put("m", cd.m);
    r.put("numerical_radius", cd.numerical_radius);
    r.put("numerical_radius_im", cd.numerical_radius_im);
    r.put("eigenvalues", complex_list(&eig));
    r.put("spectral_angle", SectorAngle::new(phi, AngleRole::Spectral).map_or_else(|| radians(phi), Json::from));
    r.put("omega", omega);
    r.put("alpha", alpha);
    r.put("alpha_bar", alpha_bar);
    r.put(
        "halfmoon",
        obj([
            ("re_min", hm.re_min.into()),
            ("re_max", hm.re_max.into()),
            ("im_bound", hm.im_bound.into()),
            ("radius", hm.radius.into()),
        ]),
    );
    r.put(
        "sharpness",
        obj([("is_sharp_candidate", sharp.is_sharp_candidate.into()), ("witness", sharp.witness.into())]),
    );
    r.put("boundary_points", boundary.boundary_points.len());

    r.at_most("spectral_angle <= omega", phi, omega.radians(), 1e-9, || complex(phi_at));
    let witness_vec = || extremal_vector(&b).map(|v| vector(&v)).unwrap_or(Json::Null);
    r.at_most("omega <= alpha", omega.radians(), alpha.radians(), 1e-9, witness_vec);
    r.at_most("alpha <= alpha_bar", alpha.radians(), alpha_bar.radians(), 1e-9, witness_vec);
    let (worst_eig, worst) = eig
        .iter()
        .map(|&z| (z, halfmoon_violation(&hm, z)))
        .fold((Complex64::new(0.0, 0.0), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    r.at_most("eigenvalues in halfmoon", worst, 0.0, 1e-9 * scale, || complex(worst_eig));
    let (worst_pt, dist) = boundary
        .boundary_points
        .iter()
        .map(|&z| (z, sector_distance(z, omega.radians())))
        .fold((Complex64::new(0.0, 0.0), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    r.at_most("boundary in sector omega", dist, 0.0, 1e-9 * scale, || complex(worst_pt));

    if s.csv_out.is_some() {
        let mut csv = csv_header();
        csv_points(&mut csv, "boundary", &boundary.boundary_points);
        csv_rays(&mut csv, omega.radians(), 1.1 * cd.numerical_radius);
        r.csv = Some(csv);
    }
    Ok(())
}

fn critical(q: CriticalExponent) -> Json {
    if q.is_infinite() {
        "inf".into()
    } else {
        q.value().into()
    }
}

/// Optional per-exponent quantities: a value, or null with the reason.
fn optional<T>(notes: &mut Vec<(String, Json)>, key: &str, v: Result<T, FieldError>) -> Option<T> {
    match v {
        Ok(x) => Some(x),
        Err(e) => {
            notes.push((key.to_string(), e.to_string().into()));
            None
        }
    }
}

fn analyze_field(s: &mut Scenario, r: &mut Report) -> Result<(), CliError> {
    let field = field_input(s)?;
    let ps = exponents(s, &[2.0, 3.0, 4.0])?;
    let omega = field.omega_mu();
    let (eta, q) = eta_and_q(&field)?;
    let (eta_u, q_u) = eta_and_q_uniform(&field)?;
    let (nx, ny) = field.grid();
    r.put("d", field.dim());
    r.put("grid", vec![nx, ny]);
    r.put("m_bullet", field.m_bullet());
    r.put("omega_mu", omega);
    r.put("alpha", field_alpha(&field));
    r.put("is_real", field.is_real());
    r.put("eta", eta);
    r.put("q", critical(q));
    r.put("q_excess", q.excess());
    r.put("eta_uniform", eta_u);
    r.put("q_uniform", critical(q_u));

    let mut rows = Vec::new();
    for p in ps {
        let pv = p.p();
        let mut notes = Vec::new();
        let delta = delta_p_field(&field, p)?;
        let lower = optional(&mut notes, "delta_p_lower_bound", delta_p_lower_bound(&field, p));
        let complex_bound = optional(&mut notes, "alpha_p_complex", alpha_p_complex(&field, p));
        let uniform = optional(&mut notes, "alpha_p_uniform", alpha_p_uniform(&field, p));
        let real = if field.is_real() {
            optional(&mut notes, "alpha_p_real", alpha_p_real(omega, p, LpAngleReading::Tangent))
        } else {
            None
        };
        let psi = optional(&mut notes, "psi_p", hinf_angle_bound(omega, p));
        let mut worst: Option<(usize, SectorAngle)> = None;
        let mut elliptic = true;
        for (k, c) in field.cells().iter().enumerate() {
            match optional(&mut notes, "omega_p_max", p_range_angle(&c.mu, p)) {
                Some(a) if worst.is_none_or(|(_, w)| a.radians() > w.radians()) => worst = Some((k, a)),
                Some(_) => {}
                None => {
                    elliptic = false;
                    break;
                }
            }
        }
        let omega_p = worst.filter(|_| elliptic);
        rows.push(obj([
            ("p", pv.into()),
            ("p_conj", p.conj().into()),
            ("sigma_p", p.sigma().into()),
            ("delta_p", delta.into()),
            ("delta_p_lower_bound", lower.into()),
            ("omega_p_max", omega_p.map(|w| w.1).into()),
            ("omega_p_argmax_cell", omega_p.map(|w| w.0).into()),
            ("alpha_p_complex", complex_bound.into()),
            ("alpha_p_uniform", uniform.into()),
            ("alpha_p_real", real.into()),
            ("psi_p", psi.into()),
            ("notes", Json::Obj(notes)),
        ]));

        if let Some(lb) = lower {
            r.at_least(format!("delta_p >= lower bound (p = {pv})"), delta, lb, 1e-10, || Json::Null);
        }
        if let (Some((k, w)), Some(a)) = (omega_p, complex_bound) {
            r.at_most(format!("omega_p <= alpha_p (p = {pv})"), w.radians(), a.radians(), 1e-8, || {
                obj([("cell", k.into())])
            });
            if pv == 2.0 {
                let diff = (a.radians() - omega.radians()).abs();
                r.at_most("alpha_2 = omega_mu", diff, 0.0, 1e-10, || Json::Null);
            }
        }
    }
    r.put("exponents", Json::Arr(rows));

    if s.csv_out.is_some() {
        let dirs = n_dirs(s);
        let mut csv = csv_header();
        let mut radius = 0.0f64;
        for (k, c) in field.cells().iter().enumerate() {
            let boundary = range_boundary(&c.mu, dirs)?;
            radius = radius.max(boundary.boundary_points.iter().map(|z| z.norm()).fold(0.0, f64::max));
            csv_points(&mut csv, &format!("cell{k}"), &boundary.boundary_points);
        }
        csv_rays(&mut csv, omega.radians(), 1.1 * radius);
        r.csv = Some(csv);
    }
    Ok(())
}

fn fem_check(s: &mut Scenario, r: &mut Report) -> Result<(), CliError> {
    let field = field_input(s)?;
    let (mesh_spec, mesh) = scenario::resolve_mesh(s.mesh.as_ref())?;
    let (dirichlet, marking) = scenario::resolve_marking(s.dirichlet.as_ref(), &mesh)?;
    s.mesh = Some(mesh_spec);
    s.dirichlet = Some(dirichlet);
    let delta = *s.delta.get_or_insert(0.0);
    let omega = field.omega_mu();
    let theta = match s.theta {
        Some(t) => SectorAngle::new(t, AngleRole::Free)
            .ok_or_else(|| CliError::Validation(format!("theta = {t}: must lie in [0, π)")))?,
        None => omega,
    };
    let fm = assemble(&field, &mesh, &marking)?;
    if fm.dim() == 0 {
        return Err(CliError::Validation("dirichlet: no free nodes remain".into()));
    }
    let fm = if delta > 0.0 { fm.shifted(delta) } else { fm };
    let inc = sector_inclusion_check(&fm, theta)?;

    r.put("free_nodes", fm.dim());
    r.put("dirichlet_edges", marking.dirichlet_edges.len());
    r.put("omega_mu", omega);
    r.put("theta", theta);
    r.put("generalized_angle", inc.angle);
    r.put("gap", theta.radians() - inc.angle.radians());
    r.put("note", format!("ω(μ) = arctan {}", short(omega.tan())));

    let witness = || match (&inc.witness, inc.witness_quotient) {
        (Some(u), Some(q)) => obj([("vector", vector(u)), ("rayleigh_quotient", complex(q))]),
        _ => Json::Null,
    };
    r.at_most("generalized angle <= theta", inc.angle.radians(), theta.radians(), INCLUSION_SLACK, witness);

    if s.csv_out.is_some() {
        let dirs = n_dirs(s);
        let (op, _) = reduced_operator(&fm)?;
        let boundary = range_boundary(&op, dirs)?;
        let radius = boundary.boundary_points.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut csv = csv_header();
        csv_points(&mut csv, "boundary", &boundary.boundary_points);
        csv_rays(&mut csv, theta.radians(), 1.1 * radius);
        r.csv = Some(csv);
    }
    Ok(())
}

/// Errors that mean the function is outside the class for this matrix.
fn not_applicable(e: &CalcError) -> bool {
    matches!(e, CalcError::NotInClass(_) | CalcError::DegenerateRange | CalcError::ContourTooTight { .. })
}

fn default_lambdas(theta: f64) -> Vec<Complex64> {
    let mid = 0.5 * (theta + PI);
    let mut out = Vec::new();
    for r in [0.1, 1.0, 10.0] {
        out.push(Complex64::from_polar(r, mid));
        out.push(Complex64::from_polar(r, -mid));
        out.push(Complex64::new(-r, 0.0));
    }
    out
}

fn default_zs(theta: f64, norm_one: f64) -> Vec<Complex64> {
    let half = FRAC_PI_2 - theta;
    let scale = 1.0 / norm_one.max(1.0);
    let mut out = Vec::new();
    for t in [0.1, 1.0, 10.0] {
        for phi in [0.0, half, -half] {
            out.push(Complex64::from_polar(t * scale, phi));
        }
    }
    out
}

fn calculus_check(s: &mut Scenario, r: &mut Report) -> Result<(), CliError> {
    let b0 = matrix_input(s)?;
    let delta = *s.delta.get_or_insert(0.0);
    let sm: SectorialMatrix = certify_shifted(&b0, delta)?;
    let b = sm.matrix().clone();
    let theta = sm.theta().radians();
    if s.functions.is_empty() {
        s.functions = ["rat1", "cayley", "sqrtres", "exp"].map(String::from).to_vec();
    }
    let functions = scenario::parse_functions(&s.functions)?;
    if s.eps.is_empty() {
        s.eps = vec![1e-1, 1e-3, 1e-6];
    }
    if let Some(k) = s.eps.iter().position(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(CliError::Validation(format!("eps[{k}] = {}: must be positive", s.eps[k])));
    }
    if s.vartheta.is_empty() {
        s.vartheta = if theta + 0.1 < FRAC_PI_2 { vec![theta + 0.1, FRAC_PI_2] } else { vec![0.5 * (theta + PI)] };
    }
    if let Some(k) = s.vartheta.iter().position(|v| !(*v > theta && *v < PI)) {
        return Err(CliError::Validation(format!("vartheta[{k}] = {}: must lie in (θ, π) with θ = {theta}", s.vartheta[k])));
    }
    let lambdas = if s.lambdas.is_empty() {
        let l = default_lambdas(theta);
        s.lambdas = l.iter().map(|z| format!("{:e}{:+e}i", z.re, z.im)).collect();
        l
    } else {
        scenario::parse_points(&s.lambdas, "lambdas")?
    };
    if let Some(k) = lambdas.iter().position(|&l| sector_distance(l, theta) <= 0.0) {
        return Err(CliError::Validation(format!("lambdas[{k}]: lies in the sector Σ_θ, θ = {theta}")));
    }
    let zs = if s.z.is_empty() {
        let z = default_zs(theta, b.norm_one());
        s.z = z.iter().map(|z| format!("{:e}{:+e}i", z.re, z.im)).collect();
        z
    } else {
        scenario::parse_points(&s.z, "z")?
    };
    if let Some(k) = zs.iter().position(|z| z.re < 0.0) {
        return Err(CliError::Validation(format!("z[{k}]: needs Re z ≥ 0")));
    }

    r.put("n", b.dim());
    r.put("shift", sm.shift());
    r.put("theta", sm.theta());
    r.put("min_re", sm.min_re());

    let opts = ContourOptions::default();
    let mut rows = Vec::new();
    for f in &functions {
        let name = f.name();
        let mut row = vec![("function".to_string(), Json::from(name.as_str()))];
        match crouzeix_ratio(&b, f, Region::hull()) {
            Ok(c) => {
                row.push(("crouzeix".into(), obj([("norm", c.norm.into()), ("sup", c.sup.into()), ("ratio", c.ratio.into())])));
                r.at_most(format!("crouzeix ratio ({name})"), c.ratio, CROUZEIX_BOUND, 1e-6, || Json::Null);
            }
            Err(e) if not_applicable(&e) => row.push(("crouzeix".into(), e.to_string().into())),
            Err(e) => return Err(e.into()),
        }
        if f.max_angle() >= FRAC_PI_2 && sup_on_imaginary_axis(f).is_ok() {
            let v = von_neumann_check(&sm, f)?;
            row.push(("von_neumann".into(), obj([("norm", v.norm.into()), ("sup", v.sup.into()), ("ratio", v.ratio.into())])));
            r.at_most(format!("von Neumann ratio ({name})"), v.ratio, 1.0, 1e-9, || Json::Null);
        }
        match dunford_riesz_with(f, &sm, default_nu(f, &sm), &opts) {
            Ok((fc, rep)) => {
                let mut contour = vec![
                    ("nu".to_string(), Json::from(rep.nu)),
                    ("nu_prime".into(), rep.nu_prime.into()),
                    ("tail_bound".into(), rep.tail_bound.into()),
                    ("nodes".into(), rep.nodes.into()),
                    ("norm".into(), spectral_norm(&fc).into()),
                ];
                if let Some(direct) = f.direct(&b) {
                    let fd = direct?;
                    let scale = spectral_norm(&fd).max(1.0);
                    let diff = spectral_norm(&(&fc - &fd));
                    contour.push(("difference_to_closed_form".into(), diff.into()));
                    r.at_most(format!("contour vs closed form ({name})"), diff, 0.0, 1e-8 * scale, || Json::Null);
                }
                row.push(("contour".into(), Json::Obj(contour)));
            }
            Err(e) if not_applicable(&e) => row.push(("contour".into(), e.to_string().into())),
            Err(e) => return Err(e.into()),
        }
        rows.push(Json::Obj(row));
    }
    r.put("functions", Json::Arr(rows));

    let mut approx = Vec::new();
    for &eps in &s.eps {
        let (_, a) = approximant(&sm, eps)?;
        approx.push(obj([
            ("eps", eps.into()),
            ("theta_eps", a.theta_eps.into()),
            ("min_re_eps", a.min_re_eps.into()),
        ]));
        r.at_most(format!("approximant angle (eps = {eps:e})"), a.theta_eps, theta, 1e-8, || Json::Null);
        r.at_least(format!("approximant min Re (eps = {eps:e})"), a.min_re_eps, eps.min(1.0 / eps), 1e-10, || Json::Null);
    }
    r.put("approximants", Json::Arr(approx));

    let mut seq = s.eps.clone();
    seq.sort_by(|a, b| b.total_cmp(a));
    seq.dedup();
    let conv = calculus_convergence(&CalcFunction::Rat1, &sm, &seq, None)?;
    r.put(
        "convergence",
        obj([
            ("function", "rat1".into()),
            ("eps", conv.entries.iter().map(|e| e.0).collect::<Vec<_>>().into()),
            ("difference", conv.entries.iter().map(|e| e.1).collect::<Vec<_>>().into()),
            ("monotone", conv.monotone.into()),
        ]),
    );
    let worst_rise = conv.entries.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
    r.at_most("approximant convergence is monotone", worst_rise, 0.0, 1e-12, || {
        conv.entries.iter().map(|e| e.1).collect::<Vec<_>>().into()
    });

    let mut res_rows = Vec::new();
    for &l in &lambdas {
        let (_, rep) = resolvent(&sm, l, None)?;
        let mut row = vec![
            ("lambda".to_string(), complex(l)),
            ("norm".into(), rep.norm.into()),
            ("distance".into(), rep.distance.into()),
            ("distance_product".into(), rep.distance_product.into()),
        ];
        r.at_most(format!("resolvent distance bound (λ = {})", short_complex(l)), rep.distance_product, 1.0, RESOLVENT_SLACK, || complex(l));
        let mut uniform = Vec::new();
        for &vt in &s.vartheta {
            let (_, rep) = resolvent(&sm, l, Some(vt))?;
            if let Some((vt, lhs, rhs)) = rep.angle_bound {
                uniform.push(obj([("vartheta", vt.into()), ("value", lhs.into()), ("bound", rhs.into())]));
                r.at_most(
                    format!("resolvent angle bound (λ = {}, ϑ = {})", short_complex(l), short(vt)),
                    lhs,
                    rhs,
                    RESOLVENT_SLACK * rhs,
                    || complex(l),
                );
            }
        }
        row.push(("uniform".into(), Json::Arr(uniform)));
        res_rows.push(Json::Obj(row));
    }
    r.put("resolvent", Json::Arr(res_rows));

    let mut sg_rows = Vec::new();
    for &z in &zs {
        let (_, rep) = semigroup(&sm, z)?;
        sg_rows.push(obj([
            ("z", complex(z)),
            ("norm", rep.norm.into()),
            ("in_contraction_sector", rep.in_contraction_sector.into()),
        ]));
        if rep.in_contraction_sector {
            r.at_most(format!("semigroup contraction (z = {})", short_complex(z)), rep.norm, 1.0, CONTRACTION_SLACK, || complex(z));
        }
    }
    r.put("semigroup", Json::Arr(sg_rows));

    if s.csv_out.is_some() {
        let dirs = n_dirs(s);
        let boundary = range_boundary(&b, dirs)?;
        let radius = boundary.boundary_points.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut csv = csv_header();
        csv_points(&mut csv, "boundary", &boundary.boundary_points);
        csv_rays(&mut csv, theta, 1.1 * radius);
        r.csv = Some(csv);
    }
    Ok(())
}

fn short_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        short(z.re)
    } else {
        format!("{}{}{}i", short(z.re), if z.im < 0.0 { "-" } else { "+" }, short(z.im.abs()))
    }
}

fn pform_check(s: &mut Scenario, r: &mut Report) -> Result<(), CliError> {
    let field = field_input(s)?;
    if field.dim() != 2 {
        return Err(CliError::Validation(format!("field.d = {}: the p-form check needs d = 2", field.dim())));
    }
    let ps = exponents(s, &[2.0, 3.0, 4.0])?;
    let k = *s.cutoff.get_or_insert(2.0);
    if !(k.is_finite() && k > 1.0) {
        return Err(CliError::Validation(format!("cutoff = {k}: must exceed 1")));
    }
    let n = *s.grid.get_or_insert(129);
    if n < sectorange::pform::MIN_GRID {
        return Err(CliError::Validation(format!("grid = {n}: at least {} nodes per side", sectorange::pform::MIN_GRID)));
    }
    let samples = *s.samples.get_or_insert(5);
    let max_freq = *s.max_freq.get_or_insert(1);
    let seed = *s.seed.get_or_insert(0);

    let mut rows = Vec::new();
    let mut points: Vec<(f64, Complex64)> = Vec::new();
    let mut theta_max = 0.0f64;
    for j in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(j as u64));
        let u = SmoothSample::random(&mut rng, max_freq).grid(n)?;
        for &p in &ps {
            let spec = CutoffSpec::new(k, p)?;
            let rep = form_integral(&field, &u, &spec)?;
            theta_max = theta_max.max(rep.theta.radians());
            points.push((p.p(), rep.value));
            rows.push(obj([
                ("sample", j.into()),
                ("p", p.p().into()),
                ("value", complex(rep.value)),
                ("arg", rep.arg().into()),
                ("theta_p", rep.theta.into()),
                ("excess", rep.excess.into()),
                ("tol_quad", rep.tol_quad.into()),
                ("cross_check_error", rep.cross_check_error.into()),
            ]));
            r.at_most(
                format!("form integral in sector (sample {j}, p = {})", p.p()),
                rep.excess,
                0.0,
                rep.tol_quad,
                || obj([("sample", j.into()), ("value", complex(rep.value))]),
            );
        }
    }
    r.put("h", 1.0 / (n - 1) as f64);
    r.put("integrals", Json::Arr(rows));

    if s.csv_out.is_some() {
        let mut csv = csv_header();
        for (p, z) in &points {
            csv_points(&mut csv, &format!("p{}", short(*p)), &[*z]);
        }
        let radius = points.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
        csv_rays(&mut csv, theta_max, 1.1 * radius);
        r.csv = Some(csv);
    }
    Ok(())
}

/// Runs the acceptance criteria. Timings go to stderr only, so the JSON stays
/// reproducible.
pub fn selftest(seed: u64, only: &[u32]) -> Result<(Json, usize), CliError> {
    if let Some(id) = only.iter().find(|id| !(1..=acceptance::CRITERIA.len() as u32).contains(id)) {
        return Err(CliError::Validation(format!("only: unknown criterion {id}")));
    }
    let ids: Vec<u32> = if only.is_empty() { acceptance::CRITERIA.iter().map(|c| c.id).collect() } else { only.to_vec() };
    let mut rows = Vec::new();
    let mut failed = 0;
    for id in &ids {
        let out = acceptance::run_criterion(*id, seed).expect("criterion id validated");
        eprintln!("{}", out.line());
        if !out.passed {
            failed += 1;
        }
        rows.push(obj([
            ("id", out.id.into()),
            ("title", out.title.into()),
            ("passed", out.passed.into()),
            ("checks_passed", out.checks_passed.into()),
            ("budget_secs", out.budget_secs.into()),
            ("detail", out.detail.as_str().into()),
        ]));
    }
    let report = obj([
        ("tool", TOOL.into()),
        ("version", env!("CARGO_PKG_VERSION").into()),
        ("selftest", obj([("seed", Json::Int(seed as i64)), ("criteria", ids.into_iter().map(|i| i as usize).collect::<Vec<_>>().into())])),
        ("results", Json::Arr(rows)),
        ("summary", obj([("criteria", acceptance_count(only).into()), ("failed", failed.into())])),
        ("passed", (failed == 0).into()),
    ]);
    Ok((report, failed))
}

fn acceptance_count(only: &[u32]) -> usize {
    if only.is_empty() {
        acceptance::CRITERIA.len()
    } else {
        only.len()
    }
}
