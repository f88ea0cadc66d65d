use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use ncpsi::algebra::{algebra_identities, dense_random_element, shell_modes, FuncalcOptions, NCElement};
use ncpsi::elliptic::ParametrixJet;
use ncpsi::fit::{fit_log_log, SlopeFit};
use ncpsi::io::{parametrix_dump, read_element, write_series, write_spectrum};
use ncpsi::psido::{build_matrix, compress_matrix, exact_sharp_at, remainder_shell_norms, ExactSharp, OperatorMatrix, PsiDO, StarExpansion};
use ncpsi::spectral::{duality_gap, schatten_slope, spectrum_of_matrix, weyl_constant, weyl_ratio, SpectrumMode};
use ncpsi::symbols::{DerivativeOptions, OriginConvention};
use ncpsi::trace::{
    integral_trace, integral_trace_grid, normalize_symbol, trace_lattice, trace_matrix_diag, MeyerWindow, QuadratureRule,
    QuadratureSpec,
};

use crate::config::{ConfigError, Experiment, TaskKind};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, passed: value <= tol }
    }
}

pub struct TaskOutput {
    pub result: Value,
    pub checks: Vec<Check>,
    /// CSV files written next to the result document.
    pub artifacts: Vec<String>,
}

struct Sink<'a> {
    dir: &'a Path,
    stem: &'a str,
    artifacts: Vec<String>,
}

impl Sink<'_> {
    fn series(&mut self, suffix: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let name = format!("{}.{suffix}.csv", self.stem);
        write_series(&self.dir.join(&name), header, rows)?;
        self.artifacts.push(name);
        Ok(())
    }

    fn raw(&mut self, suffix: &str, body: &str) -> Result<()> {
        let name = format!("{}.{suffix}", self.stem);
        std::fs::write(self.dir.join(&name), body)?;
        self.artifacts.push(name);
        Ok(())
    }
}

fn deriv_options(exp: &Experiment) -> DerivativeOptions {
    DerivativeOptions { cap: exp.config.defaults.max_derivative_order, h0: exp.config.defaults.fd_step }
}

fn funcalc_options(exp: &Experiment) -> FuncalcOptions {
    let d = &exp.config.defaults;
    FuncalcOptions { gap: d.delta_gap, residual_tol: d.inverse_residual_tol, ..FuncalcOptions::default() }
}

fn shells(exp: &Experiment) -> Vec<u32> {
    exp.config.params.shells.clone().unwrap_or_else(|| exp.config.defaults.shell_radii.clone())
}

/// Exact box matrix when the symbol fits in the margin, Galerkin
/// compression otherwise.
fn operator_matrix(p: &PsiDO, exp: &Experiment) -> Result<(OperatorMatrix, &'static str)> {
    if p.symbol().support_radius() <= exp.trunc.margin {
        Ok((build_matrix(p, &exp.trunc)?, "exact"))
    } else {
        Ok((compress_matrix(p, &exp.trunc)?, "compressed"))
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn run(exp: &Experiment, dir: &Path, stem: &str) -> Result<TaskOutput> {
    let mut sink = Sink { dir, stem, artifacts: Vec::new() };
    let (result, checks) = match exp.config.task {
        TaskKind::AlgebraCheck => algebra_check(exp)?,
        TaskKind::Compose => compose(exp, &mut sink)?,
        TaskKind::Adjoint => adjoint(exp, &mut sink)?,
        TaskKind::Parametrix => parametrix(exp, &mut sink)?,
        TaskKind::Spectrum => spectrum_task(exp, &mut sink)?,
        TaskKind::Weyl => weyl(exp, &mut sink)?,
        TaskKind::Schatten => schatten(exp, &mut sink)?,
        TaskKind::Trace => trace(exp)?,
        TaskKind::Duality => duality(exp)?,
    };
    Ok(TaskOutput { result, checks, artifacts: sink.artifacts })
}

fn algebra_check(exp: &Experiment) -> Result<(Value, Vec<Check>)> {
    let p = &exp.config.params;
    let tol = exp.config.defaults.algebra_tol;
    let ids = algebra_identities(&exp.theta, p.radius.unwrap_or(5), p.count.unwrap_or(12), p.trials.unwrap_or(20), exp.seed, tol)?;
    let checks = ids.iter().map(|c| Check::at_most(c.name.clone(), c.error, c.tol)).collect();
    Ok((json!({ "identities": ids }), checks))
}

fn compose(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let a = exp.operator()?;
    let b = exp.second()?;
    let m1 = build_matrix(&PsiDO::new(a.symbol.clone()), &exp.trunc)?;
    let m2 = build_matrix(&PsiDO::new(b.symbol.clone()), &exp.trunc)?;
    let prod = m1.compose(&m2)?;
    let exact = build_matrix(&PsiDO::new(Arc::new(ExactSharp::new(a.symbol.clone(), b.symbol.clone())?)), &exp.trunc)?;
    let window = prod.trusted_radius();
    let distance = prod.distance_on(&exact, window)?;
    let mut checks = vec![Check::at_most("matrix product equals exact symbol", distance, exp.config.params.tol.unwrap_or(1e-11))];

    let radii = shells(exp);
    let order = a.symbol.order().m + b.symbol.order().m;
    let floor = 1e-12;
    let mut fits = Vec::new();
    let mut rows = Vec::new();
    for terms in 1..=exp.config.params.terms.unwrap_or(3) {
        let rep = remainder_shell_norms(a.symbol.as_ref(), b.symbol.as_ref(), terms, &radii, &deriv_options(exp))?;
        for &(r, e) in &rep.points {
            rows.push(vec![terms.to_string(), r.to_string(), num(e)]);
        }
        let bound = order - terms as f64 + 0.5;
        let max = rep.points.iter().map(|p| p.1).fold(0.0, f64::max);
        if max <= floor {
            checks.push(Check::at_most(format!("remainder vanishes, {terms} terms"), max, floor));
        } else if !rep.fit.degenerate {
            checks.push(Check::at_most(format!("remainder slope, {terms} terms"), rep.fit.exponent, bound));
        }
        fits.push(json!({ "terms": terms, "bound": bound, "points": rep.points, "fit": rep.fit }));
    }
    sink.series("remainder", &["terms", "radius", "error"], rows)?;
    Ok((json!({ "trusted_window": window, "matrix_distance": distance, "remainders": fits }), checks))
}

fn adjoint(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let a = exp.operator()?;
    let (m, kind) = operator_matrix(&PsiDO::new(a.symbol.clone()), exp)?;
    let adj = m.adjoint();
    let w = exp.trunc.inner_radius();
    let mut distances = Vec::new();
    for terms in 1..=exp.config.params.terms.unwrap_or(3) {
        let star = StarExpansion::new(a.symbol.clone(), terms, deriv_options(exp));
        let (m, _) = operator_matrix(&PsiDO::new(Arc::new(star)), exp)?;
        distances.push(m.distance_on(&adj, w)?);
    }
    let worst_step = distances.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max);
    let checks = if distances.len() > 1 { vec![Check::at_most("distances decrease", worst_step, 0.0)] } else { Vec::new() };
    sink.series(
        "adjoint",
        &["terms", "distance"],
        distances.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), num(*d)]).collect(),
    )?;
    Ok((json!({ "matrix": kind, "trusted_window": w, "distances": distances }), checks))
}

fn parametrix(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let rho = exp.operator()?.classical()?;
    let terms = exp.config.params.terms.unwrap_or(3) as usize;
    let jet = Arc::new(
        ParametrixJet::new(rho.clone(), terms, exp.trunc)?.with_options(funcalc_options(exp), deriv_options(exp)),
    );
    let radii = shells(exp);
    let n = exp.theta.dim();
    let mut nonzero = vec![false; terms];
    for &r in &radii {
        for k in shell_modes(n, r) {
            for (j, c) in jet.components_at(&k.to_f64())?.iter().enumerate() {
                nonzero[j] |= !c.is_empty();
            }
        }
    }
    let nonzero_components: Vec<usize> = (0..terms).filter(|&j| nonzero[j]).collect();
    sink.raw("components.csv", &parametrix_dump(&jet, &radii, terms)?)?;

    let one = NCElement::one(&exp.theta);
    let floor = exp.config.params.tol.unwrap_or(1e-12);
    let mut checks = Vec::new();
    let mut residuals = Vec::new();
    let mut rows = Vec::new();
    for count in 1..=terms {
        let sigma = jet.truncated(count, OriginConvention::Excise);
        let mut pts = Vec::new();
        for &r in &radii {
            let mut worst: f64 = 0.0;
            for k in shell_modes(n, r) {
                worst = worst.max(exact_sharp_at(&rho, &sigma, &k)?.try_sub(&one)?.norm());
            }
            rows.push(vec![count.to_string(), r.to_string(), num(worst)]);
            pts.push((r as f64, worst));
        }
        let max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        let fit = if max <= floor { SlopeFit::degenerate(pts.len()) } else { fit_log_log(&pts)? };
        let bound = -(count as f64) + 0.5;
        if max <= floor {
            checks.push(Check::at_most(format!("residual vanishes, {count} terms"), max, floor));
        } else {
            checks.push(Check::at_most(format!("residual slope, {count} terms"), fit.exponent, bound));
        }
        residuals.push(json!({ "terms": count, "bound": bound, "max": max, "fit": fit }));
    }
    sink.series("residual", &["terms", "radius", "residual"], rows)?;
    Ok((
        json!({
            "order": jet.order().m,
            "nonzero_components": nonzero_components,
            "shells": radii,
            "residuals": residuals,
        }),
        checks,
    ))
}

fn spectrum_task(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let a = exp.operator()?;
    let p = PsiDO::new(a.symbol.clone());
    let (op, kind) = operator_matrix(&p, exp)?;
    let mode = exp.config.params.mode.unwrap_or(SpectrumMode::General);
    let spec = spectrum_of_matrix(&op, p.order().m, mode, false)?;
    let meta = write_spectrum(sink.dir, &format!("{}.spectrum", sink.stem), &spec, Some(exp.seed))?;
    sink.artifacts.push(meta.data.clone());
    let bad = spec.eigenvalues.iter().filter(|z| !(z.re.is_finite() && z.im.is_finite())).count();
    let checks = vec![Check::at_most("non-finite eigenvalues", bad as f64, 0.0)];
    Ok((json!({ "matrix": kind, "spectrum": spec, "max_imag": spec.max_imag() }), checks))
}

fn weyl(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let Some(lambda_cut) = exp.config.params.lambda_cut else {
        bail!(ConfigError("weyl needs params.lambda_cut".into()));
    };
    let a = exp.operator()?;
    let p = PsiDO::new(a.symbol.clone());
    let (op, kind) = operator_matrix(&p, exp)?;
    let spec = spectrum_of_matrix(&op, p.order().m, SpectrumMode::Hermitian, false)?;
    let n = exp.theta.dim();
    let rep = weyl_ratio(&spec, n, lambda_cut)?;
    let c = weyl_constant(n);
    let mut rows = Vec::new();
    let mut count = 0usize;
    let vals = spec.real_parts();
    for (i, &v) in vals.iter().enumerate() {
        if v > lambda_cut {
            break;
        }
        count += 1;
        if vals.get(i + 1).is_none_or(|&w| w != v) {
            rows.push(vec![num(v), count.to_string(), num(c * v.max(0.0).powf(n as f64 / 2.0))]);
        }
    }
    sink.series("counting", &["lambda", "count", "weyl"], rows)?;
    let tol = exp.config.params.tol.unwrap_or(0.05);
    let checks = vec![Check::at_most("|ratio - 1|", (rep.ratio - 1.0).abs(), tol)];
    Ok((json!({ "matrix": kind, "weyl_constant": c, "validity_cut": spec.validity_cut, "report": rep }), checks))
}

fn schatten(exp: &Experiment, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let a = exp.operator()?;
    let p = PsiDO::new(a.symbol.clone());
    let range = exp.config.params.fit.unwrap_or(exp.config.defaults.schatten_fit);
    let rep = schatten_slope(&p, &exp.trunc, range)?;
    sink.series(
        "singular_values",
        &["index", "value"],
        rep.singular_values.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]).collect(),
    )?;
    let target = p.order().m / exp.theta.dim() as f64;
    let tol = exp.config.params.tol.unwrap_or(0.1);
    let checks = vec![Check::at_most("relative slope error", ((rep.fit.exponent - target) / target).abs(), tol)];
    Ok((json!({ "fit_range": range, "target": target, "fit": rep.fit, "count": rep.singular_values.len() }), checks))
}

fn trace(exp: &Experiment) -> Result<(Value, Vec<Check>)> {
    let a = exp.operator()?;
    let d = &exp.config.defaults;
    let methods = exp.config.params.methods.clone().unwrap_or_else(|| {
        ["lattice", "matrix-diagonal", "integral-normalized", "integral-raw"].map(String::from).to_vec()
    });
    let radius = exp.trunc.inner_radius();
    let lattice = trace_lattice(a.symbol.as_ref(), radius)?;
    let scale = lattice.value().norm().max(f64::MIN_POSITIVE);
    let quad = QuadratureSpec::new(d.quadrature_step, radius as f64 + d.quadrature_pad, QuadratureRule::Trapezoid)?;
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    let mut window_checks = None;
    for m in &methods {
        let rep = match m.as_str() {
            "lattice" => lattice.clone(),
            "matrix-diagonal" => {
                let rep = trace_matrix_diag(&PsiDO::new(a.symbol.clone()), &exp.trunc)?;
                let gap = (rep.value() - lattice.value()).norm();
                checks.push(Check::at_most("matrix diagonal equals lattice sum", gap, 1e-13 * scale.max(1.0)));
                rep
            }
            "integral-normalized" => {
                let window = Arc::new(MeyerWindow::new(exp.theta.dim(), d.meyer_plateau, d.meyer_nodes, d.meyer_check_radius)?);
                window_checks = Some(window.checks());
                let ns = normalize_symbol(a.symbol.as_ref(), window, radius)?;
                let rep = integral_trace(&ns, &quad)?;
                let rel = (rep.value() - lattice.value()).norm() / scale;
                checks.push(Check::at_most("normalized integral equals lattice sum", rel, 1e-4));
                rep
            }
            "integral-raw" => integral_trace_grid(a.symbol.as_ref(), &quad)?,
            other => bail!(ConfigError(format!("unknown trace method `{other}`"))),
        };
        reports.push(rep);
    }
    Ok((json!({ "reports": reports, "window_checks": window_checks }), checks))
}

fn duality(exp: &Experiment) -> Result<(Value, Vec<Check>)> {
    let p = &exp.config.params;
    let u = match &p.element {
        Some(f) => read_element(&exp.resolve(f), &exp.theta)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            dense_random_element(&exp.theta, p.radius.unwrap_or(4), &mut rng)
        }
    };
    if u.is_empty() {
        bail!(ConfigError("duality needs a nonzero element".into()));
    }
    let s = p.s.unwrap_or(1.0);
    let rep = duality_gap(&u, s, p.trials.unwrap_or(1000), exp.seed)?;
    let rel = (rep.maximizer_value - rep.exact_norm).abs() / rep.exact_norm;
    let checks = vec![
        Check::at_most("maximizer attains dual norm", rel, p.tol.unwrap_or(1e-10)),
        Check::at_most("Hölder ratio", rep.holder_ratio, 1.0),
    ];
    let tau = u.tau();
    Ok((json!({ "s": s, "tau": [tau.re, tau.im], "report": rep }), checks))
}
