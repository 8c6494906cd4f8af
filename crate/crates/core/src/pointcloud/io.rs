//! Node-cloud text format.
//!
//! One record per line, whitespace-delimited, `#` starts a comment:
//!
//! ```text
//! id x [y] volume kind [pxi [pyi]]
//! ```
//!
//! `kind` is one of `bulk`, `essential`, `natural`, `freesurface`. The
//! dimension is inferred from the position of the kind token and must be
//! the same on every line. Parametric coordinates, when present, have one
//! entry per dimension.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{Node, NodeKind, PointCloud};
use crate::error::{Error, Result};
use crate::Vec2;

pub fn import_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_cloud(&text, path)
}

/// Parses node-cloud text; `origin` only labels error messages.
pub fn parse_cloud(text: &str, origin: impl AsRef<Path>) -> Result<PointCloud> {
    let origin = origin.as_ref();
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut nodes = Vec::new();
    let mut seen = HashSet::new();
    let mut dim = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let kind_at = tokens
            .iter()
            .position(|t| NodeKind::parse(t).is_some())
            .ok_or_else(|| err(lineno, "missing node kind".into()))?;
        let d = match kind_at {
            3 => 1,
            4 => 2,
            _ => return Err(err(lineno, format!("malformed record `{content}`"))),
        };
        if *dim.get_or_insert(d) != d {
            return Err(err(lineno, "dimension differs from earlier records".into()));
        }
        let extra = tokens.len() - kind_at - 1;
        if extra != 0 && extra != d {
            return Err(err(
                lineno,
                format!("expected 0 or {d} parametric coordinates, found {extra}"),
            ));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(lineno, format!("bad number `{t}`")))
        };
        let id: usize = tokens[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad id `{}`", tokens[0])))?;
        if !seen.insert(id) {
            return Err(err(lineno, format!("duplicate id {id}")));
        }
        let x = if d == 1 {
            Vec2::new(num(tokens[1])?, 0.0)
        } else {
            Vec2::new(num(tokens[1])?, num(tokens[2])?)
        };
        let volume = num(tokens[kind_at - 1])?;
        if volume <= 0.0 {
            return Err(err(lineno, format!("non-positive volume {volume}")));
        }
        let kind = NodeKind::parse(tokens[kind_at]).expect("kind token located above");
        let param = match extra {
            0 => None,
            _ if d == 1 => Some(Vec2::new(num(tokens[kind_at + 1])?, 0.0)),
            _ => Some(Vec2::new(
                num(tokens[kind_at + 1])?,
                num(tokens[kind_at + 2])?,
            )),
        };
        nodes.push(Node {
            id,
            x,
            volume,
            kind,
            param,
        });
    }
    let dim = dim.ok_or_else(|| err(0, "no records".into()))?;
    PointCloud::new(nodes, dim)
}

/// Writes `cloud` in the node-cloud format with 17 significant digits.
pub fn write_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("# id x");
    out.push_str(if cloud.dim() == 2 { " y" } else { "" });
    out.push_str(" volume kind [param]\n");
    for n in cloud.nodes() {
        write!(out, "{} {:.16e}", n.id, n.x.x).unwrap();
        if cloud.dim() == 2 {
            write!(out, " {:.16e}", n.x.y).unwrap();
        }
        write!(out, " {:.16e} {}", n.volume, n.kind.as_str()).unwrap();
        if let Some(p) = n.param {
            write!(out, " {}", p.x).unwrap();
            if cloud.dim() == 2 {
                write!(out, " {}", p.y).unwrap();
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
