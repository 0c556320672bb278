//! Run configuration: structured-text (TOML) definitions of the norm,
//! sequences, probe grid, limit schedule, and output options.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::flags::{Flag, FlagDirectedSequence, ScalarFn};
use crate::norm::{expression_family, validate_norm, NormFamily, SingularNorm};
use crate::optim::LimitSchedule;
use crate::space::{BoundingBox, Point, PointGrid, Vector};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub dimension: usize,
    /// One of `euclidean`, `p-norm`, `sqrt-quadratic-plus-abs`,
    /// `intersection-of-balls`, `expression`, `paper`.
    pub family: String,
    pub p: Option<f64>,
    pub quadratic_form: Option<Vec<Vec<f64>>>,
    pub abs_index: Option<usize>,
    pub centers: Option<Vec<Vec<f64>>>,
    pub radius: Option<f64>,
    pub formula: Option<String>,
    #[serde(default)]
    pub singular_directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub id: String,
    /// Per-coordinate descriptors from the grammar
    /// `c | c*k^a | c*k^a + d | c*exp(b*k) | c + d/k`.
    pub coords: Vec<String>,
    /// Flag level; growing coordinates must come first.
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width of the symmetric probe box.
    pub half_width: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub max_steps: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub norm: NormConfig,
    #[serde(default, rename = "sequence")]
    pub sequences: Vec<SequenceConfig>,
    pub grid: Option<GridConfig>,
    pub schedule: Option<ScheduleConfig>,
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds the norm and, for custom formulas, runs the validation
    /// battery fail-fast so an invalid gauge never leaks downstream.
    pub fn build_norm(&self, samples: usize, seed: u64) -> Result<SingularNorm> {
        let c = &self.norm;
        let n = c.dimension;
        let missing = |what: &str| Error::Config(format!("family '{}' needs '{what}'", c.family));
        let family = match c.family.as_str() {
            "euclidean" => NormFamily::Euclidean,
            "paper" => return Ok(SingularNorm::paper()),
            "p-norm" => NormFamily::PNorm {
                p: c.p.ok_or_else(|| missing("p"))?,
            },
            "sqrt-quadratic-plus-abs" => NormFamily::SqrtQuadraticPlusAbs {
                quadratic: c.quadratic_form.clone().ok_or_else(|| missing("quadratic_form"))?,
                abs_index: c.abs_index.ok_or_else(|| missing("abs_index"))?,
            },
            "intersection-of-balls" => NormFamily::IntersectionOfBalls {
                centers: c.centers.clone().ok_or_else(|| missing("centers"))?,
                radius: c.radius.ok_or_else(|| missing("radius"))?,
            },
            "expression" => {
                expression_family(c.formula.as_deref().ok_or_else(|| missing("formula"))?)?
            }
            other => return Err(Error::Config(format!("unknown norm family '{other}'"))),
        };
        let mut nm = SingularNorm::new(n, family)?;
        if !c.singular_directions.is_empty() {
            nm = nm.with_declared_singular(c.singular_directions.clone());
        }
        if c.family == "expression" {
            let report = validate_norm(&nm, samples, seed);
            if !report.passed {
                return Err(Error::Config(format!(
                    "custom formula fails the norm battery: {}",
                    report.findings.join("; ")
                )));
            }
        }
        Ok(nm)
    }

    pub fn schedule(&self) -> LimitSchedule {
        let mut s = LimitSchedule::default();
        if let Some(sc) = &self.schedule {
            if let Some(m) = sc.max_steps {
                s.max_steps = m;
            }
            if let Some(t) = sc.tolerance {
                s.tolerance = t;
            }
        }
        s
    }

    pub fn grid(&self) -> Result<PointGrid> {
        let (hw, step) = match &self.grid {
            Some(g) => (g.half_width.unwrap_or(5.0), g.step.unwrap_or(0.5)),
            None => (5.0, 0.5),
        };
        if step <= 0.0 || hw <= 0.0 {
            return Err(Error::Config("grid step and half_width must be positive".into()));
        }
        PointGrid::regular(&BoundingBox::cube(self.norm.dimension, hw), step)
    }

    /// Builds a flag-directed sequence from a config entry: coordinates
    /// with unbounded descriptors become flag directions (signed by the
    /// leading coefficient), the rest become offsets.
    pub fn build_sequence(&self, id: &str) -> Result<FlagDirectedSequence> {
        let sc = self
            .sequences
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config(format!("no sequence with id '{id}'")))?;
        let n = self.norm.dimension;
        if sc.coords.len() != n {
            return Err(Error::Config(format!(
                "sequence '{id}' has {} coordinates, norm dimension is {n}",
                sc.coords.len()
            )));
        }
        let fns: Vec<ScalarFn> = sc
            .coords
            .iter()
            .map(|s| ScalarFn::parse(s))
            .collect::<Result<_>>()?;
        let mut dirs = Vec::new();
        let mut growth = Vec::new();
        let mut offsets = Vec::new();
        for (i, f) in fns.iter().enumerate() {
            let mut e = vec![0.0; n];
            if f.grows_unbounded() || matches!(f, ScalarFn::Power { c, a, .. } if *c < 0.0 && *a > 0.0)
            {
                // direction carries the sign; growth becomes positive
                let sign = match f {
                    ScalarFn::Power { c, .. } => c.signum(),
                    ScalarFn::Exp { c, .. } => c.signum(),
                    _ => 1.0,
                };
                e[i] = sign;
                dirs.push(Vector::new(e)?);
                growth.push(match f {
                    ScalarFn::Power { c, a, d } => ScalarFn::Power {
                        c: c.abs(),
                        a: *a,
                        d: d * sign,
                    },
                    ScalarFn::Exp { c, b } => ScalarFn::Exp { c: c.abs(), b: *b },
                    other => other.clone(),
                });
            } else {
                offsets.push(f.clone());
            }
        }
        if dirs.is_empty() {
            return Err(Error::Validation(format!(
                "not flag-directed: bounded sequence '{id}'"
            )));
        }
        if let Some(level) = sc.level {
            if level != dirs.len() {
                return Err(Error::Config(format!(
                    "sequence '{id}' declares level {level} but has {} growing coordinates",
                    dirs.len()
                )));
            }
        }
        // order directions by decay of growth ratios: descending growth at
        // a large probe index
        let mut order: Vec<usize> = (0..dirs.len()).collect();
        order.sort_by(|&i, &j| {
            growth[j]
                .eval(1e6)
                .abs()
                .total_cmp(&growth[i].eval(1e6).abs())
        });
        let dirs: Vec<Vector> = order.iter().map(|&i| dirs[i].clone()).collect();
        let growth: Vec<ScalarFn> = order.iter().map(|&i| growth[i].clone()).collect();
        let flag = Flag::new(Point::origin(n), dirs)?;
        FlagDirectedSequence::new(id, flag, growth, offsets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_TOML: &str = r#"
[norm]
dimension = 2
family = "sqrt-quadratic-plus-abs"
quadratic_form = [[1.0, 0.0], [0.0, 2.0]]
abs_index = 1
singular_directions = [[1.0, 0.0], [-1.0, 0.0]]

[[sequence]]
id = "axis"
coords = ["1*k^1", "0"]
level = 1

[[sequence]]
id = "s-plus"
coords = ["1*k^2", "-1*k^1"]

[[sequence]]
id = "bounded"
coords = ["1 + 1/k", "2"]

[grid]
half_width = 5.0
step = 0.5

[schedule]
max_steps = 40
tolerance = 1e-8
"#;

    #[test]
    fn parses_and_builds_paper_norm() {
        let cfg = RunConfig::parse(PAPER_TOML).unwrap();
        let nm = cfg.build_norm(1000, 1).unwrap();
        let v = Vector::new(vec![0.0, 1.0]).unwrap();
        assert!((nm.norm(&v).unwrap() - (2.0f64.sqrt() + 1.0)).abs() < 1e-12);
        assert_eq!(cfg.grid().unwrap().points.len(), 21 * 21);
        assert_eq!(cfg.schedule().max_steps, 40);
    }

    #[test]
    fn builds_sequences_with_signs_and_levels() {
        let cfg = RunConfig::parse(PAPER_TOML).unwrap();
        let s = cfg.build_sequence("s-plus").unwrap();
        assert_eq!(s.flag.level(), 2);
        let p = s.point_at(10.0);
        assert!((p.coords()[0] - 100.0).abs() < 1e-12);
        assert!((p.coords()[1] + 10.0).abs() < 1e-12);

        let axis = cfg.build_sequence("axis").unwrap();
        assert_eq!(axis.flag.level(), 1);

        assert!(matches!(
            cfg.build_sequence("bounded"),
            Err(Error::Validation(_))
        ));
        assert!(cfg.build_sequence("missing").is_err());
    }

    #[test]
    fn expression_family_is_validated_at_load() {
        let bad = r#"
[norm]
dimension = 2
family = "expression"
formula = "(sqrt(abs(y1)) + sqrt(abs(y2)))^2"
"#;
        let cfg = RunConfig::parse(bad).unwrap();
        assert!(matches!(
            cfg.build_norm(2000, 1),
            Err(Error::Config(_))
        ));

        let good = r#"
[norm]
dimension = 2
family = "expression"
formula = "sqrt(y1^2 + 2*y2^2) + abs(y2)"
"#;
        let cfg = RunConfig::parse(good).unwrap();
        let nm = cfg.build_norm(2000, 1).unwrap();
        let v = Vector::new(vec![1.0, 0.0]).unwrap();
        assert!((nm.norm(&v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_error_reported() {
        assert!(matches!(
            RunConfig::parse("norm = \"nope"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("[norm]\ndimension = 2\nfamily = \"warp\""),
            Ok(_)
        ));
        let cfg = RunConfig::parse("[norm]\ndimension = 2\nfamily = \"warp\"").unwrap();
        assert!(matches!(cfg.build_norm(10, 1), Err(Error::Config(_))));
    }
}
