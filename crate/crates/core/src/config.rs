//! System description documents (JSON, or TOML by `.toml` extension).
//!
//! ```toml
//! [[terms]]
//! matrix = { identity = 3 }
//! function = { kind = "power", k = 1 }
//!
//! [[terms]]
//! matrix = "A.mtx"
//! function = { kind = "constant", c = -1.0 }
//!
//! b = "B.mtx"
//! c = "C.mtx"
//!
//! [frequency]
//! omega_min = 0.1
//! omega_max = 1000.0
//! n = 200
//! spacing = "log"
//! ```
//!
//! Alternatively `benchmark = { kind = "fom" }` replaces `terms`, `b` and `c`.
//! Relative paths are resolved against the document's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::matrix::SysMatrix;
use crate::models::BenchmarkKind;
use crate::mtx;
use crate::system::{StructuredSystem, Term};
use crate::training::{Spacing, TrainingSet};

const MAX_FUNCTION_DEPTH: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Path(PathBuf),
    Identity { identity: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub matrix: MatrixRef,
    pub function: ScalarFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl FrequencyConfig {
    pub fn training(&self) -> Result<TrainingSet> {
        TrainingSet::imaginary_grid(self.omega_min, self.omega_max, self.n, self.spacing)
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyConfig>,
    /// Use `W = V`; defaults per benchmark, otherwise two-sided.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub galerkin: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("toml") => Format::Toml,
            _ => Format::Json,
        }
    }
}

/// A fully assembled model ready for reduction.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub name: String,
    pub system: StructuredSystem,
    pub frequency: FrequencyConfig,
    pub galerkin: bool,
}

impl LoadedModel {
    pub fn training(&self) -> Result<TrainingSet> {
        self.frequency.training()
    }
}

pub fn parse_config(text: &str, format: Format, path: &Path) -> Result<SystemConfig> {
    let cfg: SystemConfig = match format {
        Format::Json => serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?,
        Format::Toml => toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?,
    };
    cfg.validate(path)?;
    Ok(cfg)
}

impl SystemConfig {
    fn validate(&self, path: &Path) -> Result<()> {
        let err = |message: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: message.into(),
        };
        match (&self.benchmark, self.terms.is_empty()) {
            (Some(_), false) => return Err(err("give either 'benchmark' or 'terms', not both")),
            (None, true) => return Err(err("missing 'terms' (or 'benchmark')")),
            (None, false) if self.b.is_none() || self.c.is_none() => {
                return Err(err("'b' and 'c' are required with explicit terms"))
            }
            _ => {}
        }
        if self.benchmark.as_ref().is_some_and(|b| !b.has_finite_params()) {
            return Err(err("benchmark parameters must be finite"));
        }
        for t in &self.terms {
            if t.function.depth() > MAX_FUNCTION_DEPTH {
                return Err(err("function nesting too deep"));
            }
            if !t.function.has_finite_params() {
                return Err(err("function parameters must be finite"));
            }
        }
        if let Some(f) = &self.frequency {
            if !(f.omega_min > 0.0 && f.omega_max >= f.omega_min && f.omega_max.is_finite()) {
                return Err(err("frequency band needs 0 < omega_min <= omega_max < inf"));
            }
            if f.n == 0 {
                return Err(err("frequency grid needs at least one point"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the system, resolving relative paths against `base`.
    pub fn build(&self, base: &Path) -> Result<LoadedModel> {
        if let Some(kind) = &self.benchmark {
            let spec = kind.spec();
            let system = kind.build().map_err(|e| e.context(format!("benchmark {}", kind.name())))?;
            let frequency = self.frequency.clone().unwrap_or(FrequencyConfig {
                omega_min: spec.omega_min,
                omega_max: spec.omega_max,
                n: spec.grid,
                spacing: Spacing::Log,
            });
            return Ok(LoadedModel {
                name: kind.name().to_string(),
                system,
                frequency,
                galerkin: self.galerkin.unwrap_or(kind.galerkin_default()),
            });
        }
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let b = mtx::read_dense(&resolve(self.b.as_deref().expect("validated")))?;
        let c = mtx::read_dense(&resolve(self.c.as_deref().expect("validated")))?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let matrix = match &t.matrix {
                MatrixRef::Identity { identity } => SysMatrix::identity(*identity),
                MatrixRef::Path(p) => mtx::read_sparse(&resolve(p))?,
            };
            if matrix.nrows() != b.nrows() || matrix.ncols() != b.nrows() {
                return Err(Error::dims(
                    format!("term {}", i + 1),
                    format!("{0}x{0}", b.nrows()),
                    format!("{}x{}", matrix.nrows(), matrix.ncols()),
                ));
            }
            terms.push(Term::new(matrix, t.function.clone()));
        }
        let system = StructuredSystem::new(terms, b, c)?;
        let frequency = self.frequency.clone().ok_or_else(|| {
            Error::InvalidArgument("explicit models need a 'frequency' section".into())
        })?;
        Ok(LoadedModel {
            name: "external".into(),
            system,
            frequency,
            galerkin: self.galerkin.unwrap_or(false),
        })
    }
}

/// Parses a frequency band written as `wmin:wmax` (`0 < wmin < wmax`).
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = |message: String| Error::InvalidArgument(format!("range '{text}': {message}"));
    let (lo, hi) = text.split_once(':').ok_or_else(|| bad("expected 'wmin:wmax'".into()))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("'{s}' is not a number")));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad("need 0 < wmin < wmax".into()));
    }
    Ok((lo, hi))
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("cannot read file: {e}"),
    })?;
    parse_config(&text, Format::from_path(path), path)
}

/// Reads a config document and assembles the model it describes.
pub fn load_external(path: &Path) -> Result<LoadedModel> {
    let cfg = load_config(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.build(base)
}

/// Writes every matrix of `sys` as Matrix Market plus a `system.json`
/// referencing them; returns the config path.
pub fn write_system(dir: &Path, sys: &StructuredSystem, frequency: Option<&FrequencyConfig>, galerkin: Option<bool>) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut terms = Vec::with_capacity(sys.l());
    for (i, t) in sys.terms().iter().enumerate() {
        let name = format!("A{}.mtx", i + 1);
        mtx::write_matrix(&dir.join(&name), &t.matrix)?;
        terms.push(TermConfig {
            matrix: MatrixRef::Path(name.into()),
            function: t.function.clone(),
        });
    }
    mtx::write_dense(&dir.join("B.mtx"), sys.b())?;
    mtx::write_dense(&dir.join("C.mtx"), sys.c())?;
    let cfg = SystemConfig {
        benchmark: None,
        terms,
        b: Some("B.mtx".into()),
        c: Some("C.mtx".into()),
        frequency: frequency.cloned(),
        galerkin,
    };
    let path = dir.join("system.json");
    std::fs::write(&path, cfg.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gen_fom;
    use faer::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.1:1e3").unwrap(), (0.1, 1000.0));
        assert_eq!(parse_range(" 1 : 2 ").unwrap(), (1.0, 2.0));
        for bad in ["", "1", "1:", "a:2", "2:1", "0:1", "-1:1", "1:inf", "NaN:2"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn non_finite_parameters_are_rejected() {
        let p = Path::new("x.toml");
        let bad_band = "benchmark = { kind = \"fom\" }\n[frequency]\nomega_min = nan\nomega_max = 1.0\nn = 3\n";
        assert!(parse_config(bad_band, Format::Toml, p).is_err());
        let bad_tau = "benchmark = { kind = \"delay_rod\", n = 10, tau = inf }\n";
        assert!(parse_config(bad_tau, Format::Toml, p).is_err());
        let bad_fn = "b = \"B\"\nc = \"C\"\n[[terms]]\nmatrix = \"A\"\nfunction = { kind = \"constant\", c = nan }\n";
        assert!(parse_config(bad_fn, Format::Toml, p).is_err());
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
benchmark = { kind = "delay_rod", n = 30 }
[frequency]
omega_min = 0.001
omega_max = 1000.0
n = 40
"#;
        let a = parse_config(toml_text, Format::Toml, Path::new("x.toml")).unwrap();
        let json_text = r#"{"benchmark":{"kind":"delay_rod","n":30},"frequency":{"omega_min":0.001,"omega_max":1000.0,"n":40}}"#;
        let b = parse_config(json_text, Format::Json, Path::new("x.json")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frequency.unwrap().spacing, Spacing::Log);
    }

    #[test]
    fn structural_errors() {
        let p = Path::new("c.json");
        assert!(parse_config("{}", Format::Json, p).is_err());
        assert!(parse_config(r#"{"terms":[{"matrix":"a.mtx","function":{"kind":"constant","c":1}}]}"#, Format::Json, p).is_err());
        match parse_config("{\n  \"benchmark\": 3\n}", Format::Json, p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exported_system_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let sys = gen_fom(40, true).unwrap();
        let freq = FrequencyConfig { omega_min: 0.1, omega_max: 1e3, n: 20, spacing: Spacing::Log };
        let path = write_system(dir.path(), &sys, Some(&freq), None).unwrap();
        let loaded = load_external(&path).unwrap();
        assert_eq!(loaded.frequency, freq);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let s = c64::new(0.0, 10f64.powf(rng.random_range(-1.0..3.0)));
            let h0 = sys.eval_transfer(s).unwrap()[(0, 0)];
            let h1 = loaded.system.eval_transfer(s).unwrap()[(0, 0)];
            assert!((h0 - h1).norm() <= 1e-12 * h0.norm());
        }
    }

    #[test]
    fn missing_matrix_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(
            &path,
            r#"{"terms":[{"matrix":"nope.mtx","function":{"kind":"constant","c":1}}],"b":"B.mtx","c":"C.mtx"}"#,
        )
        .unwrap();
        assert!(matches!(load_external(&path), Err(Error::Parse { .. })));
        assert!(matches!(load_external(&dir.path().join("absent.json")), Err(Error::Parse { .. })));
    }

    #[test]
    fn term_dimension_mismatch_names_the_term() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        mtx::write_dense(&d.join("B.mtx"), faer::Mat::<f64>::identity(3, 1).as_ref()).unwrap();
        mtx::write_dense(&d.join("C.mtx"), faer::Mat::<f64>::identity(1, 3).as_ref()).unwrap();
        let path = d.join("m.toml");
        std::fs::write(
            &path,
            "b = \"B.mtx\"\nc = \"C.mtx\"\n[[terms]]\nmatrix = { identity = 3 }\nfunction = { kind = \"power\", k = 1 }\n[[terms]]\nmatrix = { identity = 4 }\nfunction = { kind = \"constant\", c = 1.0 }\n[frequency]\nomega_min = 1.0\nomega_max = 2.0\nn = 3\n",
        )
        .unwrap();
        match load_external(&path) {
            Err(Error::DimensionMismatch { context, .. }) => assert_eq!(context, "term 2"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
