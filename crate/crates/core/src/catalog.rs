//! Domain files and the built-in catalog.
//!
//! A domain file is UTF-8 `key = value` lines; `#` starts a comment.
//!
//! ```text
//! name = saddle2
//! n = 2
//! rho = re(z2) - abs2(z1)
//! box = -0.5:0.5
//! expected = nonpseudoconvex
//! seed = 7
//! samples = 200
//! ```
//!
//! `box` is either one `lo:hi` interval applied to every real coordinate or
//! `2n` comma-separated intervals in the order `re z1, im z1, re z2, ...`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr;
use crate::levi::Domain;
use crate::linalg::C64;
use crate::sampling::SamplingBox;

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Pseudoconvex,
    Nonpseudoconvex,
}

impl FromStr for Expected {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudoconvex" => Ok(Expected::Pseudoconvex),
            "nonpseudoconvex" => Ok(Expected::Nonpseudoconvex),
            other => Err(Error::InvalidDomain(format!(
                "expected must be pseudoconvex or nonpseudoconvex, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Pseudoconvex => "pseudoconvex",
            Expected::Nonpseudoconvex => "nonpseudoconvex",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainFile {
    pub name: String,
    pub n: usize,
    pub rho: String,
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
    pub expected: Option<Expected>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidDomain(msg.into())
}

fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| bad(format!("interval `{text}` must be lo:hi")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad bound `{lo}`")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad bound `{hi}`")))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad(format!(
            "interval `{text}` must be finite with lo < hi"
        )));
    }
    Ok((lo, hi))
}

/// Parses `re:im,re:im,...` into complex numbers.
pub fn parse_complex_vector(text: &str) -> Result<Vec<C64>> {
    text.split(',')
        .map(|pair| {
            let pair = pair.trim();
            let (re, im) = pair.split_once(':').unwrap_or((pair, "0"));
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad complex component `{re}`")))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad complex component `{im}`")))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad(format!("non-finite complex entry `{pair}`")));
            }
            Ok(C64::new(re, im))
        })
        .collect()
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut n = None;
        let mut rho = None;
        let mut bounds_text = None;
        let mut expected = None;
        let mut seed = None;
        let mut samples = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            let value = value.trim().to_string();
            let int_err = |k: &str| {
                bad(format!(
                    "line {}: {k} must be a non-negative integer",
                    lineno + 1
                ))
            };
            match key.trim() {
                "name" => name = Some(value),
                "n" => n = Some(value.parse::<usize>().map_err(|_| int_err("n"))?),
                "rho" => rho = Some(value),
                "box" => bounds_text = Some(value),
                "expected" => expected = Some(value.parse::<Expected>()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| int_err("seed"))?),
                "samples" => {
                    samples = Some(value.parse::<usize>().map_err(|_| int_err("samples"))?)
                }
                other => return Err(bad(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        let rho = rho.ok_or_else(|| bad("missing `rho`"))?;
        let ast = expr::parse(&rho)?;
        let n = n.unwrap_or(ast.dim());
        if !(2..=crate::linalg::MAX_DIM).contains(&n) {
            return Err(bad(format!(
                "n = {n} outside 2..={}",
                crate::linalg::MAX_DIM
            )));
        }
        ast.with_dim(n)?;
        let intervals: Vec<(f64, f64)> = bounds_text
            .ok_or_else(|| bad("missing `box`"))?
            .split(',')
            .map(parse_interval)
            .collect::<Result<_>>()?;
        let bounds = match intervals.len() {
            1 => vec![intervals[0]; 2 * n],
            len if len == 2 * n => intervals,
            len => return Err(bad(format!("box has {len} intervals, need 1 or {}", 2 * n))),
        };
        Ok(DomainFile {
            name: name.unwrap_or_else(|| "unnamed".into()),
            n,
            rho,
            bounds,
            expected,
            seed,
            samples,
        })
    }

    pub fn to_domain(&self) -> Result<Domain> {
        let ast = expr::parse(&self.rho)?.with_dim(self.n)?;
        let bounds =
            SamplingBox::new(self.bounds.clone()).ok_or_else(|| bad("box has zero volume"))?;
        Domain::new(ast, bounds)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn samples_or_default(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name = {}\nn = {}\nrho = {}\n", self.name, self.n, self.rho);
        let first = self.bounds[0];
        let box_text = if self.bounds.iter().all(|b| *b == first) {
            format!("{}:{}", first.0, first.1)
        } else {
            self.bounds
                .iter()
                .map(|(lo, hi)| format!("{lo}:{hi}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&format!("box = {box_text}\n"));
        if let Some(e) = self.expected {
            out.push_str(&format!("expected = {e}\n"));
        }
        out.push_str(&format!(
            "seed = {}\nsamples = {}\n",
            self.seed_or_default(),
            self.samples_or_default()
        ));
        out
    }
}

struct Builtin {
    name: &'static str,
    rho: &'static str,
    half_width: f64,
    expected: Expected,
}

const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "ball",
        rho: "abs2(z1)+abs2(z2)-1",
        half_width: 1.5,
        expected: Expected::Pseudoconvex,
    },
    Builtin {
        name: "ball3",
        rho: "abs2(z1)+abs2(z2)+abs2(z3)-1",
        half_width: 1.5,
        expected: Expected::Pseudoconvex,
    },
    Builtin {
        name: "polyball",
        rho: "abs2(z1)^2+abs2(z2)-1",
        half_width: 1.5,
        expected: Expected::Pseudoconvex,
    },
    Builtin {
        name: "saddle2",
        rho: "re(z2)-abs2(z1)",
        half_width: 0.5,
        expected: Expected::Nonpseudoconvex,
    },
    Builtin {
        name: "saddle3",
        rho: "re(z3)-abs2(z1)-abs2(z2)",
        half_width: 0.5,
        expected: Expected::Nonpseudoconvex,
    },
    Builtin {
        name: "shell",
        rho: "1-abs2(z1)-abs2(z2)",
        half_width: 1.5,
        expected: Expected::Nonpseudoconvex,
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin(name: &str) -> Option<DomainFile> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| {
        let n = expr::parse(b.rho).expect("built-in parses").dim();
        DomainFile {
            name: b.name.to_string(),
            n,
            rho: b.rho.to_string(),
            bounds: vec![(-b.half_width, b.half_width); 2 * n],
            expected: Some(b.expected),
            seed: Some(DEFAULT_SEED),
            samples: Some(DEFAULT_SAMPLES),
        }
    })
}

pub fn builtins() -> Vec<DomainFile> {
    builtin_names().into_iter().filter_map(builtin).collect()
}
