//! On-disk formats: JSON connection and bundle specs, and the line-based
//! text format for forms.

use serde::Deserialize;

use crate::bundle::ProductBundle;
use crate::chart::Chart;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::form::{ScalarForm, VectorForm};
use crate::poly::Poly;

/// Connection spec file: `dim`, `coords`, and an n×n `phi` matrix of
/// polynomial strings; `phi[i][j]` is the ∂_i component of φ(∂_j).
#[derive(Debug, Deserialize)]
pub struct ConnectionSpec {
    pub dim: usize,
    pub coords: Vec<String>,
    pub phi: Vec<Vec<String>>,
}

pub fn parse_connection_spec(text: &str) -> Result<Connection> {
    let spec: ConnectionSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("connection spec: {e}")))?;
    if spec.coords.len() != spec.dim {
        return Err(Error::Parse(format!(
            "dim is {} but {} coordinates are listed",
            spec.dim,
            spec.coords.len()
        )));
    }
    let chart = Chart::new(spec.coords)?;
    let n = chart.dim();
    if spec.phi.len() != n || spec.phi.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("phi must be a {n}x{n} matrix")));
    }
    let mut rows = Vec::with_capacity(n);
    for row in &spec.phi {
        let mut out = Vec::with_capacity(n);
        for entry in row {
            out.push(Poly::parse(&chart, entry)?);
        }
        rows.push(out);
    }
    Connection::new(&chart, &rows)
}

/// Bundle spec file: `base_coords`, `fiber_coords` and an s×m `gamma` table
/// of polynomial strings over the joint chart.
#[derive(Debug, Deserialize)]
pub struct BundleSpec {
    pub base_coords: Vec<String>,
    pub fiber_coords: Vec<String>,
    pub gamma: Vec<Vec<String>>,
}

pub fn parse_bundle_spec(text: &str) -> Result<ProductBundle> {
    let spec: BundleSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bundle spec: {e}")))?;
    let base = Chart::new(spec.base_coords)?;
    let fiber = Chart::new(spec.fiber_coords)?;
    let total = Chart::new(base.names().iter().chain(fiber.names()).cloned())?;
    let (m, s) = (base.dim(), fiber.dim());
    if spec.gamma.len() != s || spec.gamma.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("gamma must be a {s}x{m} matrix")));
    }
    let mut gamma = Vec::with_capacity(s);
    for row in &spec.gamma {
        let mut out = Vec::with_capacity(m);
        for entry in row {
            out.push(Poly::parse(&total, entry)?);
        }
        gamma.push(out);
    }
    ProductBundle::new(&base, &fiber, gamma)
}

// ---------------------------------------------------------------------------
// Form entry files
//
//   chart: x y z
//   degree: 2
//   kind: scalar | vector
//   indices: x^y, value: 2 x + 1[, output: z]
//
// One entry line per stored coefficient, in canonical order; a degree-0
// entry writes `indices: -`.
// ---------------------------------------------------------------------------

fn tuple_text(chart: &Chart, tuple: &[u8]) -> String {
    if tuple.is_empty() {
        return "-".into();
    }
    tuple
        .iter()
        .map(|&i| chart.name(i as usize).to_string())
        .collect::<Vec<_>>()
        .join("^")
}

pub fn render_scalar_entries(f: &ScalarForm) -> String {
    let mut out = format!(
        "chart: {}\ndegree: {}\nkind: scalar\n",
        f.chart(),
        f.degree()
    );
    for (tuple, p) in f.terms() {
        out.push_str(&format!(
            "indices: {}, value: {}\n",
            tuple_text(f.chart(), tuple),
            p
        ));
    }
    out
}

pub fn render_vector_entries(f: &VectorForm) -> String {
    let mut out = format!(
        "chart: {}\ndegree: {}\nkind: vector\n",
        f.chart(),
        f.degree()
    );
    for ((tuple, leg), p) in f.terms() {
        out.push_str(&format!(
            "indices: {}, value: {}, output: {}\n",
            tuple_text(f.chart(), tuple),
            p,
            f.chart().name(*leg as usize)
        ));
    }
    out
}

struct FormHeader {
    chart: Chart,
    degree: i64,
    kind: String,
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<FormHeader> {
    let chart_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing chart line".into()))?;
    let names = chart_line
        .strip_prefix("chart: ")
        .ok_or_else(|| Error::Parse("expected `chart:`".into()))?;
    let chart = Chart::new(names.split_whitespace().map(String::from))?;
    let degree_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing degree line".into()))?;
    let degree: i64 = degree_line
        .strip_prefix("degree: ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse("expected `degree:`".into()))?;
    let kind_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing kind line".into()))?;
    let kind = kind_line
        .strip_prefix("kind: ")
        .ok_or_else(|| Error::Parse("expected `kind:`".into()))?
        .to_string();
    Ok(FormHeader {
        chart,
        degree,
        kind,
    })
}

fn parse_tuple(chart: &Chart, text: &str) -> Result<Vec<u8>> {
    if text == "-" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for name in text.split('^') {
        let idx = chart
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown coordinate `{name}`")))?;
        out.push(idx as u8);
    }
    Ok(out)
}

pub fn parse_scalar_entries(text: &str) -> Result<ScalarForm> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = parse_header(&mut lines)?;
    if header.kind != "scalar" {
        return Err(Error::Parse(format!(
            "expected kind scalar, got {}",
            header.kind
        )));
    }
    let mut f = ScalarForm::zero(&header.chart, header.degree);
    for line in lines {
        let rest = line
            .strip_prefix("indices: ")
            .ok_or_else(|| Error::Parse(format!("bad entry line `{line}`")))?;
        let (tuple_text, value_text) = rest
            .split_once(", value: ")
            .ok_or_else(|| Error::Parse(format!("bad entry line `{line}`")))?;
        let tuple = parse_tuple(&header.chart, tuple_text)?;
        if tuple.len() as i64 != header.degree {
            return Err(Error::Parse(format!(
                "entry arity differs from degree in `{line}`"
            )));
        }
        f.add_term(&tuple, Poly::parse(&header.chart, value_text)?);
    }
    Ok(f)
}

pub fn parse_vector_entries(text: &str) -> Result<VectorForm> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = parse_header(&mut lines)?;
    if header.kind != "vector" {
        return Err(Error::Parse(format!(
            "expected kind vector, got {}",
            header.kind
        )));
    }
    let mut f = VectorForm::zero(&header.chart, header.degree);
    for line in lines {
        let rest = line
            .strip_prefix("indices: ")
            .ok_or_else(|| Error::Parse(format!("bad entry line `{line}`")))?;
        let (tuple_text, rest) = rest
            .split_once(", value: ")
            .ok_or_else(|| Error::Parse(format!("bad entry line `{line}`")))?;
        let (value_text, output_name) = rest
            .split_once(", output: ")
            .ok_or_else(|| Error::Parse(format!("missing output in `{line}`")))?;
        let tuple = parse_tuple(&header.chart, tuple_text)?;
        if tuple.len() as i64 != header.degree {
            return Err(Error::Parse(format!(
                "entry arity differs from degree in `{line}`"
            )));
        }
        let leg = header
            .chart
            .index_of(output_name)
            .ok_or_else(|| Error::Parse(format!("unknown coordinate `{output_name}`")))?;
        f.add_term(&tuple, leg as u8, Poly::parse(&header.chart, value_text)?);
    }
    Ok(f)
}
