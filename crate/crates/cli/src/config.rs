//! Experiment configuration documents and operator construction.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use ncpsi::algebra::{NCElement, Theta, ThetaMatrix, TruncationSpec};
use ncpsi::defaults::Defaults;
use ncpsi::elliptic::{laplace_beltrami, RiemannianMetric};
use ncpsi::io::{read_element, read_metric, read_polynomial};
use ncpsi::spectral::SpectrumMode;
use ncpsi::symbols::{ClassicalSymbol, PolynomialSymbol, ProfileSymbol, ScalarProfile, Symbol, SymbolOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    AlgebraCheck,
    Compose,
    Adjoint,
    Parametrix,
    Spectrum,
    Weyl,
    Schatten,
    Trace,
    Duality,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::AlgebraCheck => "algebra-check",
            TaskKind::Compose => "compose",
            TaskKind::Adjoint => "adjoint",
            TaskKind::Parametrix => "parametrix",
            TaskKind::Spectrum => "spectrum",
            TaskKind::Weyl => "weyl",
            TaskKind::Schatten => "schatten",
            TaskKind::Trace => "trace",
            TaskKind::Duality => "duality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub radius: u32,
    pub margin: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem of the result document; the task name when absent.
    pub stem: Option<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), stem: None }
    }
}

/// An operator named in a config. File paths are relative to the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// `|ξ|²`
    Laplacian,
    /// `|ξ|² + shift`
    ShiftedLaplacian { shift: f64 },
    /// `⟨ξ⟩^s`, optionally times an element.
    Japanese { s: f64, element: Option<PathBuf> },
    /// Polynomial symbol record with element files.
    Polynomial { file: PathBuf },
    /// Laplace-Beltrami operator of a metric file or of `I + c(U_j + U_j*)E_jj`.
    LaplaceBeltrami { metric: Option<PathBuf>, bump: Option<f64>, direction: Option<usize> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    /// Box radius of random elements.
    pub radius: Option<u32>,
    /// Modes per random element.
    pub count: Option<usize>,
    pub trials: Option<usize>,
    /// Expansion or parametrix length.
    pub terms: Option<u32>,
    pub shells: Option<Vec<u32>>,
    pub lambda_cut: Option<f64>,
    pub mode: Option<SpectrumMode>,
    /// Inclusive 1-based index range of a singular value fit.
    pub fit: Option<(usize, usize)>,
    /// Any of `lattice`, `matrix-diagonal`, `integral-normalized`, `integral-raw`.
    pub methods: Option<Vec<String>>,
    pub s: Option<f64>,
    pub element: Option<PathBuf>,
    /// Tolerance applied in `--check` mode where a task has one.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub n: usize,
    /// Row-major `n × n` antisymmetric matrix; zero when absent.
    pub theta: Option<Vec<Vec<f64>>>,
    pub truncation: TruncationConfig,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub defaults: Defaults,
    pub operator: Option<OperatorSpec>,
    /// Right factor of a composition.
    pub second: Option<OperatorSpec>,
    #[serde(default)]
    pub params: TaskParams,
}

/// Signals a config problem, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// A loaded config with resolved paths.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub base: PathBuf,
    pub theta: Theta,
    pub trunc: TruncationSpec,
    pub seed: u64,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_config(config, base)
    }

    pub fn from_config(config: ExperimentConfig, base: PathBuf) -> Result<Self> {
        let n = config.n;
        if n < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {n}")));
        }
        let theta = match &config.theta {
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!("theta must be {n} × {n}")));
                }
                ThetaMatrix::from_rows(rows).map_err(|e| invalid(e.to_string()))?
            }
            None => ThetaMatrix::zero(n),
        }
        .into_shared();
        let t = config.truncation;
        let trunc = TruncationSpec::new(t.radius, t.margin).map_err(|e| invalid(e.to_string()))?;
        let seed = config.seed.unwrap_or(config.defaults.seed);
        let exp = Self { config, base, theta, trunc, seed };
        exp.check_files()?;
        Ok(exp)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn check_files(&self) -> Result<()> {
        let mut files: Vec<&PathBuf> = Vec::new();
        for spec in [&self.config.operator, &self.config.second].into_iter().flatten() {
            match spec {
                OperatorSpec::Japanese { element: Some(f), .. } => files.push(f),
                OperatorSpec::Polynomial { file } => files.push(file),
                OperatorSpec::LaplaceBeltrami { metric: Some(f), .. } => files.push(f),
                _ => {}
            }
        }
        files.extend(self.config.params.element.iter());
        for f in files {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(invalid(format!("referenced file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.config.output.stem.clone().unwrap_or_else(|| self.config.task.name().to_string())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output.dir)
    }

    pub fn operator(&self) -> Result<BuiltOperator> {
        let spec = self.config.operator.as_ref().ok_or_else(|| invalid("task needs an [operator] table"))?;
        self.build(spec)
    }

    pub fn second(&self) -> Result<BuiltOperator> {
        let spec = self.config.second.as_ref().ok_or_else(|| invalid("task needs a [second] table"))?;
        self.build(spec)
    }

    pub fn build(&self, spec: &OperatorSpec) -> Result<BuiltOperator> {
        let th = &self.theta;
        Ok(match spec {
            OperatorSpec::Laplacian => BuiltOperator::polynomial(PolynomialSymbol::laplacian(th)),
            OperatorSpec::ShiftedLaplacian { shift } => {
                let c = NCElement::scalar(Complex64::new(*shift, 0.0), th);
                BuiltOperator::polynomial(PolynomialSymbol::laplacian(th).plus(&PolynomialSymbol::constant(c))?)
            }
            OperatorSpec::Japanese { s, element } => {
                let sym = match element {
                    Some(f) => {
                        let a = read_element(&self.resolve(f), th).context("reading element")?;
                        ProfileSymbol::scalar_times(ScalarProfile::japanese(*s), a, SymbolOrder::real(*s))
                    }
                    None => ProfileSymbol::japanese(th, *s),
                };
                BuiltOperator { symbol: Arc::new(sym), polynomial: None }
            }
            OperatorSpec::Polynomial { file } => {
                BuiltOperator::polynomial(read_polynomial(&self.resolve(file), th).context("reading polynomial")?)
            }
            OperatorSpec::LaplaceBeltrami { metric, bump, direction } => {
                let m = match (metric, bump) {
                    (Some(f), None) => read_metric(&self.resolve(f), th, self.trunc)?,
                    (None, Some(c)) => RiemannianMetric::cosine_bump(th, direction.unwrap_or(0), *c, self.trunc)?,
                    _ => bail!(invalid("laplace-beltrami needs exactly one of `metric` and `bump`")),
                };
                BuiltOperator::polynomial(laplace_beltrami(&m, self.config.defaults.prune_tol)?)
            }
        })
    }
}

pub struct BuiltOperator {
    pub symbol: Arc<dyn Symbol>,
    pub polynomial: Option<PolynomialSymbol>,
}

impl BuiltOperator {
    fn polynomial(p: PolynomialSymbol) -> Self {
        Self { symbol: Arc::new(p.clone()), polynomial: Some(p) }
    }

    pub fn classical(&self) -> Result<ClassicalSymbol> {
        match &self.polynomial {
            Some(p) => Ok(ClassicalSymbol::from_polynomial(p)),
            None => bail!(invalid("parametrix needs a polynomial operator")),
        }
    }
}
