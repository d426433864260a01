//! Line-oriented space files.
//!
//! ```text
//! # comment
//! space v1 n=3
//! w 0 0.5
//! w 1 0.25
//! w 2 0.25
//! metric l2
//! coords 0 0.1
//! coords 1 0.4
//! coords 2 0.9
//! ```
//!
//! Instead of `metric` + `coords`, distances may be listed as `d <i> <j> <v>`.
//! A pair given in one direction only is mirrored; a pair given in neither
//! direction is an error. With `d` lines, `coords` lines (no `metric`) are
//! kept as labels.

use std::fmt::Write as _;
use std::path::Path;

use super::{Distances, Labels, Metric, PointId, SpaceDescriptor, SpaceError};

fn perr(line: usize, msg: impl Into<String>) -> SpaceError {
    SpaceError::Parse { line, msg: msg.into() }
}

fn parse_id(tok: Option<&str>, n: usize, line: usize) -> Result<PointId, SpaceError> {
    let tok = tok.ok_or_else(|| perr(line, "missing point id"))?;
    let id: usize = tok.parse().map_err(|_| perr(line, format!("bad point id `{tok}`")))?;
    if id >= n {
        return Err(perr(line, format!("point id {id} out of range (n={n})")));
    }
    Ok(id)
}

fn parse_real(tok: Option<&str>, line: usize) -> Result<f64, SpaceError> {
    let tok = tok.ok_or_else(|| perr(line, "missing number"))?;
    let v: f64 = tok.parse().map_err(|_| perr(line, format!("bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(perr(line, format!("non-finite number `{tok}`")));
    }
    Ok(v)
}

pub fn parse_space(text: &str) -> Result<SpaceDescriptor, SpaceError> {
    let mut n: Option<usize> = None;
    let mut weights: Vec<Option<f64>> = Vec::new();
    let mut coords: Vec<Option<Vec<f64>>> = Vec::new();
    let mut metric: Option<Metric> = None;
    let mut table: Vec<Option<f64>> = Vec::new();
    let mut saw_d = false;
    let mut dim: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut toks = body.split_whitespace();
        let head = toks.next().unwrap_or_default();
        let Some(n) = n else {
            if head != "space" || toks.next() != Some("v1") {
                return Err(perr(line, "expected header `space v1 n=<int>`"));
            }
            let count = toks
                .next()
                .and_then(|t| t.strip_prefix("n="))
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&c| c >= 1)
                .ok_or_else(|| perr(line, "header needs n=<positive int>"))?;
            n = Some(count);
            weights = vec![None; count];
            coords = vec![None; count];
            continue;
        };
        match head {
            "w" => {
                let id = parse_id(toks.next(), n, line)?;
                let w = parse_real(toks.next(), line)?;
                if w <= 0.0 {
                    return Err(perr(line, format!("weight {w} must be positive")));
                }
                if weights[id].replace(w).is_some() {
                    return Err(perr(line, format!("duplicate weight for point {id}")));
                }
            }
            "metric" => {
                let tag = toks.next().unwrap_or_default();
                let m = Metric::from_tag(tag)
                    .ok_or_else(|| perr(line, format!("unknown metric `{tag}`")))?;
                if metric.replace(m).is_some() {
                    return Err(perr(line, "metric declared twice"));
                }
            }
            "coords" => {
                let id = parse_id(toks.next(), n, line)?;
                let vals = toks.by_ref().map(|t| parse_real(Some(t), line)).collect::<Result<Vec<_>, _>>()?;
                if vals.is_empty() || vals.len() > 3 {
                    return Err(perr(line, "coords takes 1 to 3 values"));
                }
                match dim {
                    None => dim = Some(vals.len()),
                    Some(d) if d != vals.len() => {
                        return Err(perr(line, format!("expected {d} coordinates")))
                    }
                    _ => {}
                }
                if coords[id].replace(vals).is_some() {
                    return Err(perr(line, format!("duplicate coords for point {id}")));
                }
                continue;
            }
            "d" => {
                if table.is_empty() {
                    table = vec![None; n * n];
                }
                saw_d = true;
                let i = parse_id(toks.next(), n, line)?;
                let j = parse_id(toks.next(), n, line)?;
                let tok = toks.next();
                let v: f64 = tok
                    .ok_or_else(|| perr(line, "missing distance"))?
                    .parse()
                    .map_err(|_| perr(line, "bad distance"))?;
                if table[i * n + j].replace(v).is_some() {
                    return Err(perr(line, format!("duplicate distance d({i},{j})")));
                }
            }
            other => return Err(perr(line, format!("unknown record `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(perr(line, "trailing tokens"));
        }
    }

    let last = text.lines().count().max(1);
    let n = n.ok_or_else(|| perr(last, "missing header"))?;
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| perr(last, format!("missing weight for point {i}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = if coords.iter().any(Option::is_some) {
        let d = dim.unwrap_or(1);
        let mut flat = Vec::with_capacity(n * d);
        for (i, c) in coords.into_iter().enumerate() {
            flat.extend(c.ok_or_else(|| perr(last, format!("missing coords for point {i}")))?);
        }
        Some(Labels::new(d, flat))
    } else {
        None
    };

    if saw_d {
        if metric.is_some() {
            return Err(perr(last, "`metric` cannot be combined with `d` lines"));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                flat[i * n + j] = match (table[i * n + j], table[j * n + i]) {
                    (Some(v), _) => v,
                    (None, Some(v)) => v,
                    (None, None) if i == j => 0.0,
                    (None, None) => return Err(perr(last, format!("missing distance d({i},{j})"))),
                };
            }
        }
        SpaceDescriptor::from_flat_table(flat, weights, labels)
    } else {
        let labels = labels.ok_or_else(|| perr(last, "need `d` lines or `metric` with `coords`"))?;
        let metric = metric.ok_or_else(|| perr(last, "coords given without a `metric` line"))?;
        let dim = labels.dim();
        SpaceDescriptor::from_coordinates(dim, labels.coords, metric, weights)
    }
}

pub fn write_space(space: &SpaceDescriptor) -> String {
    let n = space.n();
    let mut out = String::new();
    let _ = writeln!(out, "space v1 n={n}");
    for (i, w) in space.weights().iter().enumerate() {
        let _ = writeln!(out, "w {i} {w}");
    }
    let write_coords = |out: &mut String, labels: &Labels| {
        for i in 0..n {
            let vals: Vec<String> = labels.point(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "coords {i} {}", vals.join(" "));
        }
    };
    match (space.distances(), space.labels()) {
        (Distances::Coordinates(m), Some(labels)) => {
            let _ = writeln!(out, "metric {}", m.tag());
            write_coords(&mut out, labels);
        }
        _ => {
            if let Some(labels) = space.labels() {
                write_coords(&mut out, labels);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (space.dist(i, j), space.dist(j, i));
                    let _ = writeln!(out, "d {i} {j} {a}");
                    if a != b {
                        let _ = writeln!(out, "d {j} {i} {b}");
                    }
                }
            }
        }
    }
    out
}

pub fn load_space(path: impl AsRef<Path>) -> Result<SpaceDescriptor, SpaceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpaceError::Io(format!("{}: {e}", path.display())))?;
    parse_space(&text)
}

pub fn save_space(space: &SpaceDescriptor, path: impl AsRef<Path>) -> Result<(), SpaceError> {
    let path = path.as_ref();
    std::fs::write(path, write_space(space))
        .map_err(|e| SpaceError::Io(format!("{}: {e}", path.display())))
}
