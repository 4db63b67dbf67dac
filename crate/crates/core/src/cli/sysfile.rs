//! The `.sys` system file: `key = value` lines grouped under `[section]`
//! headers. Keys before the first header belong to `[system]`. `#` starts a
//! comment. The grammar is documented in `book/src/sysfile.md`.

use thiserror::Error;

use std::sync::Arc;

use crate::expr::{parse_expr, Chart, Expr};
use crate::flatout::{ParametrizationSpec, TrajectoryConfig};
use crate::geometry::VectorField;
use crate::prolong::ProlongationOrder;
use crate::system::ControlSystem;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct SysFileError {
    /// 1-based; 0 when the error concerns the file as a whole.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> SysFileError {
    SysFileError {
        line,
        message: message.into(),
    }
}

/// A `key = value` entry with its source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A parsed file, still as text. [`SystemFile::build`] turns it into a
/// system and its optional candidates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemFile {
    pub name: String,
    pub states: Vec<String>,
    /// One comma-separated component list per input field, in file order.
    pub fields: Vec<Entry>,
    pub outputs: Vec<Entry>,
    /// Prolongation order given with the outputs.
    pub order: Option<ProlongationOrder>,
    /// `jets` key of `[parametrization]`: highest output derivative used.
    pub param_jets: Option<usize>,
    pub parametrization: Vec<Entry>,
    pub trajectory: Vec<Entry>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
}

/// The built contents of a [`SystemFile`].
#[derive(Debug, Clone)]
pub struct Loaded {
    pub system: ControlSystem,
    pub outputs: Vec<Expr>,
    pub order: Option<ProlongationOrder>,
    pub parametrization: Option<ParametrizationSpec>,
    pub trajectory: Option<TrajectoryConfig>,
}

const SECTIONS: [&str; 6] = [
    "system",
    "fields",
    "outputs",
    "parametrization",
    "trajectory",
    "options",
];

fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).collect()
}

fn parse_num<T: std::str::FromStr>(e: &Entry) -> Result<T, SysFileError> {
    e.value
        .parse()
        .map_err(|_| err(e.line, format!("`{}` expects a number, got `{}`", e.key, e.value)))
}

fn parse_order(e: &Entry) -> Result<ProlongationOrder, SysFileError> {
    split_list(&e.value)
        .iter()
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| err(e.line, format!("bad order entry `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ProlongationOrder)
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, SysFileError> {
        let mut f = SystemFile::default();
        let mut section = "system".to_string();
        let mut seen_keys: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(line, format!("unknown section `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key = value`"))?;
            let e = Entry {
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                line,
            };
            if e.key.is_empty() {
                return Err(err(line, "empty key"));
            }
            if seen_keys.iter().any(|(s, k)| *s == section && *k == e.key) {
                return Err(err(line, format!("duplicate key `{}` in [{section}]", e.key)));
            }
            seen_keys.push((section.clone(), e.key.clone()));
            match section.as_str() {
                "system" => match e.key.as_str() {
                    "name" => f.name = e.value,
                    "states" => f.states = split_list(&e.value),
                    k => return Err(err(line, format!("unknown key `{k}` in [system]"))),
                },
                "fields" => f.fields.push(e),
                "outputs" if e.key == "order" => f.order = Some(parse_order(&e)?),
                "outputs" => f.outputs.push(e),
                "parametrization" if e.key == "jets" => f.param_jets = Some(parse_num(&e)?),
                "parametrization" => f.parametrization.push(e),
                "trajectory" => f.trajectory.push(e),
                "options" => match e.key.as_str() {
                    "seed" => f.seed = Some(parse_num(&e)?),
                    "samples" => f.samples = Some(parse_num(&e)?),
                    "tol" => f.tol = Some(parse_num(&e)?),
                    k => return Err(err(line, format!("unknown key `{k}` in [options]"))),
                },
                _ => unreachable!("section names are checked"),
            }
        }
        if f.states.is_empty() {
            return Err(err(0, "missing `states`"));
        }
        if f.fields.is_empty() {
            return Err(err(0, "missing [fields] section"));
        }
        Ok(f)
    }

    pub fn m(&self) -> usize {
        self.fields.len()
    }

    /// Parses every expression against the declared charts.
    pub fn build(&self) -> Result<Loaded, SysFileError> {
        let chart = Arc::new(
            Chart::states(&self.states.iter().map(String::as_str).collect::<Vec<_>>())
                .map_err(|e| err(0, e.to_string()))?,
        );
        let mut fields = Vec::with_capacity(self.fields.len());
        for e in &self.fields {
            let comps = split_list(&e.value);
            if comps.len() != chart.dim() {
                return Err(err(
                    e.line,
                    format!(
                        "field `{}` has {} entries, expected {}",
                        e.key,
                        comps.len(),
                        chart.dim()
                    ),
                ));
            }
            let exprs = comps
                .iter()
                .map(|c| parse_expr(c, &chart).map_err(|x| err(e.line, x.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            fields.push(VectorField::new(&chart, exprs).map_err(|x| err(e.line, x.to_string()))?);
        }
        let name = if self.name.is_empty() { "system" } else { &self.name };
        let system = ControlSystem::new(name, chart, fields, None).map_err(|e| err(0, e.to_string()))?;

        let outputs = self
            .outputs
            .iter()
            .map(|e| parse_expr(&e.value, system.chart()).map_err(|x| err(e.line, x.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(j) = &self.order {
            if j.0.len() != system.m() {
                return Err(err(
                    0,
                    format!("order has {} entries for {} inputs", j.0.len(), system.m()),
                ));
            }
        }

        let parametrization = if self.parametrization.is_empty() {
            None
        } else {
            if outputs.is_empty() {
                return Err(err(0, "[parametrization] needs [outputs]"));
            }
            let jets = self
                .param_jets
                .ok_or_else(|| err(0, "[parametrization] needs `jets`"))?;
            let pairs: Vec<(&str, &str)> = self
                .parametrization
                .iter()
                .map(|e| (e.key.as_str(), e.value.as_str()))
                .collect();
            Some(ParametrizationSpec::parse(outputs.len(), jets, &pairs).map_err(|e| err(0, e.to_string()))?)
        };

        let trajectory = if self.trajectory.is_empty() {
            None
        } else {
            Some(self.build_trajectory(system.n(), system.m())?)
        };

        Ok(Loaded {
            system,
            outputs,
            order: self.order.clone(),
            parametrization,
            trajectory,
        })
    }

    fn build_trajectory(&self, n: usize, m: usize) -> Result<TrajectoryConfig, SysFileError> {
        let mut inputs = vec![None; m];
        let mut x0 = None;
        let (mut t_end, mut step, mut tol) = (None, None, None);
        for e in &self.trajectory {
            match e.key.as_str() {
                "x0" => {
                    let v = split_list(&e.value)
                        .iter()
                        .map(|s| s.parse::<f64>().map_err(|_| err(e.line, format!("bad x0 entry `{s}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if v.len() != n {
                        return Err(err(e.line, format!("x0 has {} entries, expected {n}", v.len())));
                    }
                    x0 = Some(v);
                }
                "t_end" => t_end = Some(parse_num(e)?),
                "step" => step = Some(parse_num(e)?),
                "tol" => tol = Some(parse_num(e)?),
                k => {
                    let i = k
                        .strip_prefix('u')
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|&i| (1..=m).contains(&i))
                        .ok_or_else(|| err(e.line, format!("unknown key `{k}` in [trajectory]")))?;
                    inputs[i - 1] = Some(e.value.as_str());
                }
            }
        }
        let inputs: Vec<&str> = inputs
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| err(0, format!("[trajectory] is missing u{}", i + 1))))
            .collect::<Result<_, _>>()?;
        let x0 = x0.ok_or_else(|| err(0, "[trajectory] is missing x0"))?;
        let mut cfg = TrajectoryConfig::parse(&inputs, x0).map_err(|e| err(0, e.to_string()))?;
        cfg.t_end = t_end.unwrap_or(cfg.t_end);
        cfg.step = step.unwrap_or(cfg.step);
        cfg.tol = tol.unwrap_or(cfg.tol);
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAR: &str = "name = car\nstates = x1, x2, x3\n[fields]\ng1 = cos(x3), sin(x3), 0\ng2 = 0, 0, 1 # steering\n";

    #[test]
    fn minimal() {
        let f = SystemFile::parse(CAR).unwrap();
        assert_eq!(f.states, ["x1", "x2", "x3"]);
        assert_eq!(f.m(), 2);
        let l = f.build().unwrap();
        assert_eq!((l.system.n(), l.system.m()), (3, 2));
        assert!(l.outputs.is_empty() && l.parametrization.is_none());
    }

    #[test]
    fn errors_carry_lines() {
        let e = SystemFile::parse("states = x1\n[fields]\ng1 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = SystemFile::parse("states = x1\n[bogus]\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = SystemFile::parse("states = x1, x2\n[fields]\ng1 = 1\n")
            .unwrap()
            .build()
            .unwrap_err();
        assert!(e.message.contains("expected 2"));
        assert_eq!(e.line, 3);
        let e = SystemFile::parse("states = x1\n\n[fields]\ng1 = 1 +\n")
            .unwrap()
            .build()
            .unwrap_err();
        assert_eq!(e.line, 4);
        let e = SystemFile::parse("states = x1\n[fields]\ng1 = 1\n[outputs]\ny1 = z\n")
            .unwrap()
            .build()
            .unwrap_err();
        assert_eq!(e.line, 5);
    }

    #[test]
    fn candidates() {
        let text = format!(
            "{CAR}[outputs]\norder = 1, 0\ny1 = x1\ny2 = x2\n[parametrization]\njets = 2\nx1 = y1_0\n\
             [trajectory]\nu1 = 1\nu2 = t\nx0 = 0, 0, 0\nstep = 0.01\n[options]\nseed = 9\n"
        );
        let f = SystemFile::parse(&text).unwrap();
        assert_eq!(f.seed, Some(9));
        let l = f.build().unwrap();
        assert_eq!(l.order, Some(ProlongationOrder(vec![1, 0])));
        assert_eq!(l.outputs.len(), 2);
        assert_eq!(l.parametrization.unwrap().order, 2);
        assert_eq!(l.trajectory.unwrap().step, 0.01);
    }
}
