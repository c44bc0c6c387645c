//! Method selectors: `ex-euler:8`, `ex-midpoint:10`, `dc:4:1/2:equi`, a
//! bundled pair name, or a tableau file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rkpairs_core::builders::{
    build_dc_euler, build_ex_euler, build_ex_midpoint, load_reference_pair, load_tableau_file,
    BuildError, DcConfig, EmbeddedMethod, NodeFamily,
};
use rkpairs_core::exact::rational::{format_rational, parse_literal, Literal};
use rkpairs_core::{integer, Rational};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum MethodSpec {
    ExEuler(u32),
    ExMidpoint(u32),
    Dc {
        p: u32,
        theta: Rational,
        nodes: NodeFamily,
    },
    /// Bundled pair, tableau file, or a file in the tableau directory.
    Named(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    ExEuler,
    ExMidpoint,
    Dc,
}

fn kind(name: &str) -> Option<Kind> {
    match name.to_ascii_lowercase().as_str() {
        "ex-euler" | "euler" => Some(Kind::ExEuler),
        "ex-midpoint" | "midpoint" => Some(Kind::ExMidpoint),
        "dc" | "dc-euler" => Some(Kind::Dc),
        _ => None,
    }
}

pub fn parse_theta(text: &str) -> Result<Rational, CliError> {
    match parse_literal(text) {
        Ok(Literal::Exact(r)) | Ok(Literal::Decimal(r)) => Ok(r),
        Err(e) => Err(CliError::Usage(format!("theta: {e}"))),
    }
}

pub fn parse_nodes(text: &str) -> Result<NodeFamily, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "cheb" | "chebyshev" | "chebyshev-lobatto" => Ok(NodeFamily::ChebyshevLobatto),
        "equi" | "equispaced" => Ok(NodeFamily::Equispaced),
        _ => Err(CliError::Usage(format!(
            "unknown node family `{text}`; expected chebyshev or equispaced"
        ))),
    }
}

fn parse_order(text: &str) -> Result<u32, CliError> {
    text.parse()
        .map_err(|_| CliError::Usage(format!("order must be a positive integer, got `{text}`")))
}

impl MethodSpec {
    fn from_parts(
        kind: Kind,
        p: u32,
        theta: Option<Rational>,
        nodes: Option<NodeFamily>,
    ) -> Result<Self, CliError> {
        match kind {
            Kind::ExEuler | Kind::ExMidpoint if theta.is_some() || nodes.is_some() => Err(
                CliError::Usage("theta and nodes apply only to dc methods".into()),
            ),
            Kind::ExEuler => Ok(MethodSpec::ExEuler(p)),
            Kind::ExMidpoint => Ok(MethodSpec::ExMidpoint(p)),
            Kind::Dc => Ok(MethodSpec::Dc {
                p,
                theta: theta.unwrap_or_else(|| integer(0)),
                nodes: nodes.unwrap_or(NodeFamily::ChebyshevLobatto),
            }),
        }
    }

    /// Reads `family order` pairs, `family:order[...]` tokens and names.
    /// `theta` and `nodes` fill in dc selectors that leave them out.
    pub fn parse_tokens(
        tokens: &[String],
        theta: Option<&str>,
        nodes: Option<&str>,
    ) -> Result<Vec<MethodSpec>, CliError> {
        let theta = theta.map(parse_theta).transpose()?;
        let nodes = nodes.map(parse_nodes).transpose()?;
        let mut out = Vec::new();
        let mut it = tokens.iter();
        while let Some(tok) = it.next() {
            if let Some(k) = kind(tok) {
                let Some(p) = it.next() else {
                    return Err(CliError::Usage(format!("`{tok}` needs an order")));
                };
                let p = parse_order(p)?;
                out.push(match k {
                    Kind::Dc => Self::from_parts(k, p, theta.clone(), nodes)?,
                    _ => Self::from_parts(k, p, None, None)?,
                });
                continue;
            }
            let mut spec: MethodSpec = tok.parse()?;
            if let MethodSpec::Dc { theta: t, nodes: n, .. } = &mut spec {
                let given = tok.split(':').count();
                if given < 3 {
                    if let Some(th) = &theta {
                        *t = th.clone();
                    }
                }
                if given < 4 {
                    if let Some(nf) = nodes {
                        *n = nf;
                    }
                }
            }
            out.push(spec);
        }
        if out.is_empty() {
            return Err(CliError::Usage("no method given".into()));
        }
        let any_dc = out.iter().any(|m| matches!(m, MethodSpec::Dc { .. }));
        if (theta.is_some() || nodes.is_some()) && !any_dc {
            return Err(CliError::Usage("theta and nodes apply only to dc methods".into()));
        }
        Ok(out)
    }

    pub fn build(&self, tableau_dir: Option<&Path>) -> Result<EmbeddedMethod, CliError> {
        let built = match self {
            MethodSpec::ExEuler(p) => build_ex_euler(*p),
            MethodSpec::ExMidpoint(p) => build_ex_midpoint(*p),
            MethodSpec::Dc { p, theta, nodes } => {
                build_dc_euler(&DcConfig::new(*p, theta.clone(), *nodes))
            }
            MethodSpec::Named(name) => load_named(name, tableau_dir),
        };
        built.map_err(build_error)
    }
}

fn load_named(name: &str, dir: Option<&Path>) -> Result<EmbeddedMethod, BuildError> {
    let first = load_reference_pair(name);
    let Err(BuildError::UnknownReference(_)) = first else {
        return first;
    };
    if let Some(dir) = dir {
        let candidates: [PathBuf; 2] = [dir.join(name), dir.join(format!("{name}.rkt"))];
        if let Some(path) = candidates.iter().find(|p| p.is_file()) {
            return load_tableau_file(path);
        }
    }
    first
}

pub fn build_error(e: BuildError) -> CliError {
    match e {
        BuildError::Verification { .. } => CliError::Numerical(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let Some(k) = kind(parts[0]) else {
            if s.is_empty() {
                return Err(CliError::Usage("empty method selector".into()));
            }
            return Ok(MethodSpec::Named(s.to_string()));
        };
        let usage = || {
            CliError::Usage(format!(
                "bad method `{s}`; expected family:order, dc:order[:theta[:nodes]] or a pair name"
            ))
        };
        match (k, parts.len()) {
            (_, 2) => Self::from_parts(k, parse_order(parts[1])?, None, None),
            (Kind::Dc, 3) => Self::from_parts(k, parse_order(parts[1])?, Some(parse_theta(parts[2])?), None),
            (Kind::Dc, 4) => Self::from_parts(
                k,
                parse_order(parts[1])?,
                Some(parse_theta(parts[2])?),
                Some(parse_nodes(parts[3])?),
            ),
            _ => Err(usage()),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::ExEuler(p) => write!(f, "ex-euler:{p}"),
            MethodSpec::ExMidpoint(p) => write!(f, "ex-midpoint:{p}"),
            MethodSpec::Dc { p, theta, nodes } => {
                let n = match nodes {
                    NodeFamily::Equispaced => "equi",
                    NodeFamily::ChebyshevLobatto => "cheb",
                };
                write!(f, "dc:{p}:{}:{n}", format_rational(theta))
            }
            MethodSpec::Named(n) => f.write_str(n),
        }
    }
}
