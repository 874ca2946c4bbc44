//! Text formats for maps and demonstrations.
//!
//! Map file: `key=value` header lines (`slip=1/32`, `start=x,y`,
//! `horizon=15`) followed by one row per grid line, one character per tile
//! (`r`, `b`, `y`, `n` for brown, `.` for blank). `#` starts a comment line.
//!
//! Demo file: one path per line, `x0,y0 a0 x1,y1 a1 …` with actions
//! `U/D/L/R` and an optional trailing `$` marking a complete demonstration.

use super::{Color, GridSpec, GridWorld, MdpError, Move, Path};

fn parse_err(line: usize, msg: impl Into<String>) -> MdpError {
    MdpError::Parse { line, msg: msg.into() }
}

fn parse_prob(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (f64, f64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
            (d != 0.0).then(|| n / d)
        }
        None => s.trim().parse().ok(),
    }
}

fn parse_cell(s: &str) -> Option<(usize, usize)> {
    let (x, y) = s.split_once(',')?;
    Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
}

pub fn parse_map(text: &str) -> Result<GridSpec, MdpError> {
    let mut slip = None;
    let mut start = None;
    let mut horizon = None;
    let mut tiles: Vec<Vec<Color>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            let v = v.trim();
            match k.trim() {
                "slip" => slip = Some(parse_prob(v).ok_or_else(|| parse_err(lineno, "bad slip probability"))?),
                "start" => start = Some(parse_cell(v).ok_or_else(|| parse_err(lineno, "bad start cell"))?),
                "horizon" => horizon = Some(v.parse().map_err(|_| parse_err(lineno, "bad horizon"))?),
                other => return Err(parse_err(lineno, format!("unknown header `{other}`"))),
            }
            continue;
        }
        let row = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Color::from_map_char(c).ok_or_else(|| parse_err(lineno, format!("unknown tile `{c}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        tiles.push(row);
    }
    let spec = GridSpec {
        width: tiles.first().map_or(0, Vec::len),
        height: tiles.len(),
        tiles,
        slip_prob: slip.ok_or_else(|| parse_err(0, "missing `slip=`"))?,
        start_cell: start.ok_or_else(|| parse_err(0, "missing `start=`"))?,
        horizon: horizon.ok_or_else(|| parse_err(0, "missing `horizon=`"))?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Parses every non-comment line of `text` as a path in `grid`. Paths are
/// only parsed here; run [`crate::Mdp::validate_path`] to check them.
pub fn parse_demos(text: &str, grid: &GridWorld) -> Result<Vec<Path>, MdpError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens: Vec<&str> = line.split_whitespace().collect();
        let complete = tokens.last() == Some(&"$");
        if complete {
            tokens.pop();
        }
        let mut cells = Vec::new();
        let mut moves = Vec::new();
        for (k, tok) in tokens.iter().enumerate() {
            if k % 2 == 0 {
                cells.push(parse_cell(tok).ok_or_else(|| parse_err(lineno, format!("expected a cell, got `{tok}`")))?);
            } else {
                moves.push(
                    Move::from_letter(tok)
                        .ok_or_else(|| parse_err(lineno, format!("expected U/D/L/R, got `{tok}`")))?,
                );
            }
        }
        if cells.is_empty() {
            return Err(parse_err(lineno, "empty path"));
        }
        if moves.len() != cells.len() - 1 + usize::from(complete) {
            return Err(parse_err(lineno, "cells and moves must alternate, `$` must follow a move"));
        }
        out.push(grid.path(&cells, &moves, complete).map_err(|e| parse_err(lineno, e.to_string()))?);
    }
    Ok(out)
}

/// Inverse of [`parse_demos`] for a single path.
pub fn write_demo(grid: &GridWorld, p: &Path) -> String {
    let mut toks = Vec::new();
    for (i, &s) in p.states().iter().enumerate() {
        match grid.coords(s) {
            Some((x, y, _)) => toks.push(format!("{x},{y}")),
            None => toks.push("$".to_string()),
        }
        if let Some(&a) = p.actions().get(i) {
            toks.push(Move::from_id(a).map_or('?', Move::letter).to_string());
        }
    }
    toks.join(" ")
}
