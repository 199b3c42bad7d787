//! Plain-text and JSON artifacts. Floats are written with 17 significant
//! digits so every `f64` survives a round trip. Lines starting with `#`
//! are comments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sparse2d_bccb::array::{ArrayGeometry, Snapshot, Target};
use sparse2d_bccb::experiment::{CellSummary, TrialRecord};
use sparse2d_bccb::solvers::SupportEntry;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields<const N: usize>(line: &str, lineno: usize) -> Result<[&str; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| anyhow!("line {lineno}: expected {N} fields, found {}", p.len()))
}

fn parse<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| anyhow!("line {lineno}: bad value `{s}`: {e}"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
struct GeometryJson {
    m1_count: usize,
    m2_count: usize,
    occupied: Vec<[usize; 2]>,
}

pub fn geometry_json(geometry: &ArrayGeometry) -> Result<String> {
    let g = GeometryJson {
        m1_count: geometry.m1_count(),
        m2_count: geometry.m2_count(),
        occupied: geometry.elements().map(|(a, b)| [a, b]).collect(),
    };
    Ok(serde_json::to_string_pretty(&g)? + "\n")
}

/// Header `M1 M2 M noise_variance`, then `m1 m2 re im` per occupied element.
pub fn snapshot_text(snapshot: &Snapshot) -> String {
    let g = &snapshot.geometry;
    let mut out = String::from("# M1 M2 M noise_variance\n");
    let _ = writeln!(
        out,
        "{} {} {} {}",
        g.m1_count(),
        g.m2_count(),
        g.element_count(),
        num(snapshot.noise_variance)
    );
    out.push_str("# m1 m2 re im\n");
    for ((m1, m2), v) in g.elements().zip(&snapshot.values) {
        let _ = writeln!(out, "{m1} {m2} {} {}", num(v.re), num(v.im));
    }
    out
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = read_text(path)?;
    parse_snapshot(&text).with_context(|| format!("parsing snapshot {}", path.display()))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = data_lines(text);
    let (n, header) = lines.next().ok_or_else(|| anyhow!("empty snapshot file"))?;
    let [m1n, m2n, m, nv] = fields::<4>(header, n)?;
    let (m1n, m2n, m): (usize, usize, usize) = (parse(m1n, n)?, parse(m2n, n)?, parse(m, n)?);
    let noise_variance: f64 = parse(nv, n)?;
    let mut elements = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for (n, line) in lines {
        let [a, b, re, im] = fields::<4>(line, n)?;
        elements.push((parse(a, n)?, parse(b, n)?));
        values.push(Complex64::new(parse(re, n)?, parse(im, n)?));
    }
    if elements.len() != m {
        bail!("header announces {m} elements but {} rows follow", elements.len());
    }
    let geometry = ArrayGeometry::from_elements(m1n, m2n, &elements)?;
    // rows must follow scan order so values line up with dictionary rows
    if !geometry.elements().eq(elements.iter().copied()) {
        bail!("snapshot rows are not in scan order (m2 outer, m1 inner)");
    }
    Ok(Snapshot {
        values,
        geometry,
        noise_variance,
    })
}

/// `f1 f2 re im` per source.
pub fn targets_text(targets: &[Target]) -> String {
    let mut out = String::from("# f1 f2 re im\n");
    for t in targets {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            num(t.f1),
            num(t.f2),
            num(t.amplitude.re),
            num(t.amplitude.im)
        );
    }
    out
}

#[cfg(test)]
pub fn parse_targets(text: &str) -> Result<Vec<Target>> {
    data_lines(text)
        .map(|(n, line)| {
            let [f1, f2, re, im] = fields::<4>(line, n)?;
            Ok(Target::new(
                parse(f1, n)?,
                parse(f2, n)?,
                Complex64::new(parse(re, n)?, parse(im, n)?),
            )?)
        })
        .collect()
}

/// Header `L1 L2`, then `l1 l2 re im` for every coefficient in storage order.
pub fn estimate_text(l1n: usize, l2n: usize, c: &[Complex64]) -> String {
    let mut out = String::from("# L1 L2\n");
    let _ = writeln!(out, "{l1n} {l2n}");
    out.push_str("# l1 l2 re im\n");
    for (l, v) in c.iter().enumerate() {
        let _ = writeln!(out, "{} {} {} {}", l % l1n, l / l1n, num(v.re), num(v.im));
    }
    out
}

#[cfg(test)]
pub fn parse_estimate(text: &str) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut lines = data_lines(text);
    let (n, header) = lines.next().ok_or_else(|| anyhow!("empty estimate file"))?;
    let [a, b] = fields::<2>(header, n)?;
    let (l1n, l2n): (usize, usize) = (parse(a, n)?, parse(b, n)?);
    let mut c = Vec::with_capacity(l1n * l2n);
    for (n, line) in lines {
        let [_, _, re, im] = fields::<4>(line, n)?;
        c.push(Complex64::new(parse(re, n)?, parse(im, n)?));
    }
    if c.len() != l1n * l2n {
        bail!("estimate has {} coefficients, expected {}", c.len(), l1n * l2n);
    }
    Ok((l1n, l2n, c))
}

/// `l1 l2 f1 f2 re im magnitude` per support entry.
pub fn support_text(l1n: usize, support: &[SupportEntry]) -> String {
    let mut out = String::from("# l1 l2 f1 f2 re im magnitude\n");
    for s in support {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            s.index % l1n,
            s.index / l1n,
            num(s.f1),
            num(s.f2),
            num(s.amplitude.re),
            num(s.amplitude.im),
            num(s.amplitude.norm())
        );
    }
    out
}

/// Support grid indices `(l1, l2)` read back from a support file.
#[cfg(test)]
pub fn parse_support_indices(text: &str) -> Result<Vec<(usize, usize)>> {
    data_lines(text)
        .map(|(n, line)| {
            let [a, b, ..] = fields::<7>(line, n)?;
            Ok((parse(a, n)?, parse(b, n)?))
        })
        .collect()
}

/// Header `L1 L2`, then one line per `k1` holding `L2` `re im` pairs.
pub fn eigenvalue_text(l1n: usize, l2n: usize, omega: &[Complex64]) -> String {
    let mut out = String::from("# L1 L2\n");
    let _ = writeln!(out, "{l1n} {l2n}");
    out.push_str("# row k1: re im pairs for k2 = 0..L2\n");
    for k1 in 0..l1n {
        let row: Vec<String> = (0..l2n)
            .map(|k2| {
                let v = omega[k1 + k2 * l1n];
                format!("{} {}", num(v.re), num(v.im))
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Inverse of [`eigenvalue_text`], returned in storage order `k1 + k2·L1`.
#[cfg(test)]
pub fn parse_eigenvalues(text: &str) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut lines = data_lines(text);
    let (n, header) = lines.next().ok_or_else(|| anyhow!("empty eigenvalue file"))?;
    let [a, b] = fields::<2>(header, n)?;
    let (l1n, l2n): (usize, usize) = (parse(a, n)?, parse(b, n)?);
    let mut omega = vec![Complex64::new(0.0, 0.0); l1n * l2n];
    let mut rows = 0;
    for (n, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 * l2n || rows >= l1n {
            bail!("line {n}: malformed eigenvalue row");
        }
        for k2 in 0..l2n {
            omega[rows + k2 * l1n] =
                Complex64::new(parse(parts[2 * k2], n)?, parse(parts[2 * k2 + 1], n)?);
        }
        rows += 1;
    }
    if rows != l1n {
        bail!("expected {l1n} eigenvalue rows, found {rows}");
    }
    Ok((l1n, l2n, omega))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const RECORD_HEADER: [&str; 13] = [
    "solver",
    "l1",
    "l2",
    "n_iter",
    "trial_index",
    "seed",
    "sources",
    "nonzeros",
    "t_reg_ms",
    "t_fast_ms",
    "epsilon_r",
    "precompute_reg_ms",
    "precompute_fast_ms",
];

/// One CSV row per trial; absent regular-backend fields are empty.
pub fn records_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.solver.name().to_string(),
            r.l1.to_string(),
            r.l2.to_string(),
            r.n_iter.to_string(),
            r.trial_index.to_string(),
            r.seed.to_string(),
            r.sources.to_string(),
            r.nonzeros.to_string(),
            opt(r.t_reg_ms),
            r.t_fast_ms.to_string(),
            opt(r.epsilon_r),
            opt(r.precompute_reg_ms),
            r.precompute_fast_ms.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn summary_csv(cells: &[CellSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "solver",
        "l1",
        "l2",
        "n_iter",
        "trials",
        "mean_t_reg_ms",
        "mean_t_fast_ms",
        "mean_epsilon_r",
    ])?;
    for c in cells {
        w.write_record([
            c.solver.name().to_string(),
            c.l1.to_string(),
            c.l2.to_string(),
            c.n_iter.to_string(),
            c.trials.to_string(),
            opt(c.mean_t_reg_ms),
            c.mean_t_fast_ms.to_string(),
            opt(c.mean_epsilon_r),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Whitespace-separated columns for log-scale runtime plots; `nan` marks
/// a skipped regular backend.
pub fn plot_data(cells: &[CellSummary]) -> String {
    let mut out = String::from("# solver l1 n_iter t_reg_ms t_fast_ms epsilon_r\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            c.solver,
            c.l1,
            c.n_iter,
            c.mean_t_reg_ms.unwrap_or(f64::NAN),
            c.mean_t_fast_ms,
            c.mean_epsilon_r.unwrap_or(f64::NAN)
        );
    }
    out
}
