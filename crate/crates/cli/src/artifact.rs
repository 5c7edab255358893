//! Text artifacts: every file the pipeline writes round-trips bit-exactly
//! through the readers here (or the core parsers for core-owned formats).

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use inclab_core::hyperplanes::Hyperplane;
use inclab_core::rational::{format_rat, parse_rat, Rat};
use inclab_core::sparsifier::SampleCertificate;
use inclab_core::transforms::{GraphHypersurface, Hypersphere, ShearFunction};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn rat_row(vals: &[Rat]) -> String {
    let toks: Vec<String> = vals.iter().map(format_rat).collect();
    toks.join(" ")
}

fn parse_rat_row(line: &str, lineno: usize) -> Result<Vec<Rat>> {
    line.split_whitespace()
        .map(|tok| parse_rat(tok).map_err(|e| anyhow!("line {lineno}: {e}")))
        .collect()
}

fn parse_count_header(line: &str, want_fields: usize, what: &str) -> Result<Vec<String>> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
    if toks.len() != want_fields {
        bail!("line 1: {what} header needs {want_fields} fields, found {}", toks.len());
    }
    Ok(toks)
}

/// Rational point list: header "d count", one point per line.
pub fn rat_points_to_text(d: usize, points: &[Vec<Rat>]) -> String {
    let mut out = format!("{d} {}\n", points.len());
    for p in points {
        out.push_str(&rat_row(p));
        out.push('\n');
    }
    out
}

pub fn rat_points_from_text(text: &str) -> Result<(usize, Vec<Vec<Rat>>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty point list"))?;
    let toks = parse_count_header(header, 2, "point list")?;
    let d: usize = toks[0].parse().map_err(|e| anyhow!("line 1: bad dimension: {e}"))?;
    let count: usize = toks[1].parse().map_err(|e| anyhow!("line 1: bad count: {e}"))?;
    let mut points = Vec::with_capacity(count);
    for (idx, line) in lines {
        let row = parse_rat_row(line, idx + 1)?;
        if row.len() != d {
            bail!("line {}: expected {d} coordinates, found {}", idx + 1, row.len());
        }
        points.push(row);
    }
    if points.len() != count {
        bail!("line {}: header promised {count} points, found {}", points.len() + 1, points.len());
    }
    Ok((d, points))
}

/// Rational hyperplane list: header "d count", rows "n_1 ... n_d offset".
pub fn rat_planes_to_text(d: usize, planes: &[Hyperplane]) -> String {
    let mut out = format!("{d} {}\n", planes.len());
    for h in planes {
        let mut vals = h.normal.clone();
        vals.push(h.offset.clone());
        out.push_str(&rat_row(&vals));
        out.push('\n');
    }
    out
}

pub fn rat_planes_from_text(text: &str) -> Result<(usize, Vec<Hyperplane>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty plane list"))?;
    let toks = parse_count_header(header, 2, "plane list")?;
    let d: usize = toks[0].parse().map_err(|e| anyhow!("line 1: bad dimension: {e}"))?;
    let count: usize = toks[1].parse().map_err(|e| anyhow!("line 1: bad count: {e}"))?;
    let mut planes = Vec::with_capacity(count);
    for (idx, line) in lines {
        let mut row = parse_rat_row(line, idx + 1)?;
        if row.len() != d + 1 {
            bail!("line {}: expected {} values, found {}", idx + 1, d + 1, row.len());
        }
        let offset = row.pop().unwrap();
        planes.push(Hyperplane::new(row, offset).map_err(|e| anyhow!("line {}: {e}", idx + 1))?);
    }
    if planes.len() != count {
        bail!("header promised {count} planes, found {}", planes.len());
    }
    Ok((d, planes))
}

/// Sphere list: header "d count", rows "center_1 ... center_d r_squared".
pub fn spheres_to_text(d: usize, spheres: &[Hypersphere]) -> String {
    let mut out = format!("{d} {}\n", spheres.len());
    for s in spheres {
        out.push_str(&s.to_text());
    }
    out
}

pub fn spheres_from_text(text: &str) -> Result<(usize, Vec<Hypersphere>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty sphere list"))?;
    let toks = parse_count_header(header, 2, "sphere list")?;
    let d: usize = toks[0].parse().map_err(|e| anyhow!("line 1: bad dimension: {e}"))?;
    let count: usize = toks[1].parse().map_err(|e| anyhow!("line 1: bad count: {e}"))?;
    let mut spheres = Vec::with_capacity(count);
    for (idx, line) in lines {
        let s = Hypersphere::from_text(line).map_err(|e| anyhow!("line {}: {e}", idx + 1))?;
        if s.dimension() != d {
            bail!("line {}: expected dimension {d}, found {}", idx + 1, s.dimension());
        }
        spheres.push(s);
    }
    if spheres.len() != count {
        bail!("header promised {count} spheres, found {}", spheres.len());
    }
    Ok((d, spheres))
}

fn shear_from_tag(tag: &str) -> Result<ShearFunction> {
    match tag {
        "zero" => Ok(ShearFunction::Zero),
        "squared-norm" => Ok(ShearFunction::SquaredNorm),
        other => bail!("unknown shear tag {other:?}"),
    }
}

/// Graph hypersurface list: header "d count shear-tag", rows of the graph
/// coefficients "c_1 ... c_(d-1) c_0". All surfaces share the config shear.
pub fn surfaces_to_text(d: usize, surfaces: &[GraphHypersurface], shear: &ShearFunction) -> String {
    let mut out = format!("{d} {} {}\n", surfaces.len(), shear.family_tag());
    for s in surfaces {
        let mut vals = s.linear.clone();
        vals.push(s.constant.clone());
        out.push_str(&rat_row(&vals));
        out.push('\n');
    }
    out
}

pub fn surfaces_from_text(text: &str) -> Result<(usize, Vec<GraphHypersurface>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty surface list"))?;
    let toks = parse_count_header(header, 3, "surface list")?;
    let d: usize = toks[0].parse().map_err(|e| anyhow!("line 1: bad dimension: {e}"))?;
    let count: usize = toks[1].parse().map_err(|e| anyhow!("line 1: bad count: {e}"))?;
    let shear = shear_from_tag(&toks[2])?;
    let mut surfaces = Vec::with_capacity(count);
    for (idx, line) in lines {
        let mut row = parse_rat_row(line, idx + 1)?;
        if row.len() != d {
            bail!("line {}: expected {d} values, found {}", idx + 1, row.len());
        }
        let constant = row.pop().unwrap();
        surfaces.push(GraphHypersurface {
            linear: row,
            constant,
            shear: shear.clone(),
        });
    }
    if surfaces.len() != count {
        bail!("header promised {count} surfaces, found {}", surfaces.len());
    }
    Ok((d, surfaces))
}

/// k2t report: "t_max=..", then either "witness=none" or the two indices
/// into the selected family's member order.
pub fn k2t_to_text(t_max: u64, witness: Option<(usize, usize)>) -> String {
    let mut out = format!("t_max={t_max}\n");
    match witness {
        Some((i, j)) => {
            out.push_str(&format!("witness_i={i}\n"));
            out.push_str(&format!("witness_j={j}\n"));
        }
        None => out.push_str("witness=none\n"),
    }
    out
}

pub fn k2t_from_text(text: &str) -> Result<(u64, Option<(usize, usize)>)> {
    let kv = parse_kv(text)?;
    let t_max: u64 = lookup(&kv, "t_max")?.parse().map_err(|e| anyhow!("bad t_max: {e}"))?;
    let witness = if kv.iter().any(|(k, _)| k == "witness") {
        None
    } else {
        let i: usize = lookup(&kv, "witness_i")?.parse().map_err(|e| anyhow!("bad witness_i: {e}"))?;
        let j: usize = lookup(&kv, "witness_j")?.parse().map_err(|e| anyhow!("bad witness_j: {e}"))?;
        Some((i, j))
    };
    Ok((t_max, witness))
}

/// Fit samples: header "b,points,energy", one row per truncation bound.
pub fn fit_csv_to_text(samples: &[(i64, u64, u128)]) -> String {
    let mut out = String::from("b,points,energy\n");
    for &(b, points, energy) in samples {
        out.push_str(&format!("{b},{points},{energy}\n"));
    }
    out
}

pub fn fit_csv_from_text(text: &str) -> Result<Vec<(i64, u64, u128)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty fit csv"))?;
    if header != "b,points,energy" {
        bail!("line 1: expected header \"b,points,energy\"");
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 3 {
            bail!("line {}: expected 3 fields, found {}", idx + 1, toks.len());
        }
        let b = toks[0].parse().map_err(|e| anyhow!("line {}: bad b: {e}", idx + 1))?;
        let points = toks[1].parse().map_err(|e| anyhow!("line {}: bad points: {e}", idx + 1))?;
        let energy = toks[2].parse().map_err(|e| anyhow!("line {}: bad energy: {e}", idx + 1))?;
        rows.push((b, points, energy));
    }
    Ok(rows)
}

fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value", idx + 1))?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> Result<&'a str> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| anyhow!("missing key {key}"))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => bail!("expected true or false, got {other:?}"),
    }
}

/// Parse a certificate back out of its core text form.
pub fn certificate_from_text(text: &str) -> Result<SampleCertificate> {
    let kv = parse_kv(text)?;
    let int = |key: &str| -> Result<u64> {
        lookup(&kv, key)?.parse().map_err(|e| anyhow!("bad {key}: {e}"))
    };
    let flag = |key: &str| -> Result<bool> { parse_bool(lookup(&kv, key)?) };
    let pair_threshold = match lookup(&kv, "pair_threshold")? {
        "none" => None,
        v => Some(v.parse().map_err(|e| anyhow!("bad pair_threshold: {e}"))?),
    };
    Ok(SampleCertificate {
        seed: int("seed")?,
        retry_index: int("retry_index")? as u32,
        p: parse_rat(lookup(&kv, "p")?).map_err(|e| anyhow!("bad p: {e}"))?,
        family_size: int("family_size")?,
        retained_size: int("retained_size")?,
        incidences_before: int("incidences_before")?,
        incidences_after: int("incidences_after")?,
        max_pair_cover: int("max_pair_cover")?,
        pair_threshold,
        size_window_ok: flag("size_window_ok")?,
        pair_cover_ok: flag("pair_cover_ok")?,
        incidence_floor_ok: flag("incidence_floor_ok")?,
        accepted: flag("accepted")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use inclab_core::rational::rat;

    #[test]
    fn rat_points_round_trip() {
        let pts = vec![vec![rat(1, 2), rat(-3, 1)], vec![rat(0, 1), rat(7, 5)]];
        let text = rat_points_to_text(2, &pts);
        let (d, back) = rat_points_from_text(&text).unwrap();
        assert_eq!(d, 2);
        assert_eq!(back, pts);
        assert_eq!(rat_points_to_text(2, &back), text);
    }

    #[test]
    fn rat_planes_round_trip() {
        let h = Hyperplane::new(vec![rat(2, 3), rat(-1, 1)], rat(5, 7)).unwrap();
        let text = rat_planes_to_text(2, &[h.clone()]);
        let (_, back) = rat_planes_from_text(&text).unwrap();
        assert_eq!(back, vec![h]);
        assert_eq!(rat_planes_to_text(2, &back), text);
    }

    #[test]
    fn truncated_point_list_reports_line() {
        let err = rat_points_from_text("2 3\n1 2\n").unwrap_err();
        assert!(err.to_string().contains("promised 3"), "{err}");
    }

    #[test]
    fn k2t_round_trip() {
        let text = k2t_to_text(8, Some((3, 19)));
        assert_eq!(k2t_from_text(&text).unwrap(), (8, Some((3, 19))));
        let text = k2t_to_text(0, None);
        assert_eq!(k2t_from_text(&text).unwrap(), (0, None));
    }

    #[test]
    fn fit_csv_round_trip() {
        let rows = vec![(1i64, 27u64, 837u128), (2, 125, 128901)];
        let text = fit_csv_to_text(&rows);
        assert_eq!(fit_csv_from_text(&text).unwrap(), rows);
        assert_eq!(fit_csv_to_text(&fit_csv_from_text(&text).unwrap()), text);
    }
}
