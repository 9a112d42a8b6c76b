//! Plain-text triangle meshes.
//!
//! ```text
//! nv nc nb
//! x y            (nv lines)
//! i j k          (nc lines, 0-based, counterclockwise)
//! i j marker     (nb lines, boundary edges)
//! ```
//!
//! Lines starting with `#` and blank lines are skipped. Clockwise cells are
//! reoriented on read.

use std::fmt::Write as _;
use std::path::Path;

use mafem_core::mesh::Mesh;

use crate::error::{io_err, parse_err, Error, Result};

fn fields<'a>(line: &'a str, n: usize, lineno: usize, what: &str) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != n {
        return Err(parse_err(lineno, format!("expected {n} fields for {what}, found {}", f.len())));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(s: &str, lineno: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(lineno, format!("invalid {what} '{s}'")))
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty mesh file"))?;
    let h = fields(header, 3, hl, "the header 'nv nc nb'")?;
    let nv: usize = num(h[0], hl, "vertex count")?;
    let nc: usize = num(h[1], hl, "cell count")?;
    let nb: usize = num(h[2], hl, "boundary edge count")?;
    let last_line = text.lines().count();
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(last_line, format!("unexpected end of file, expected {what}")));

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = next("a vertex")?;
        let f = fields(s, 2, l, "a vertex")?;
        let p: [f64; 2] = [num(f[0], l, "coordinate")?, num(f[1], l, "coordinate")?];
        if !p.iter().all(|c| c.is_finite()) {
            return Err(parse_err(l, "non-finite coordinate"));
        }
        vertices.push(p);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (l, s) = next("a cell")?;
        let f = fields(s, 3, l, "a cell")?;
        let mut c = [0usize; 3];
        for (ci, fi) in c.iter_mut().zip(&f) {
            *ci = num(fi, l, "vertex index")?;
            if *ci >= nv {
                return Err(parse_err(l, format!("vertex index {ci} out of range (nv = {nv})")));
            }
        }
        let [a, b, d] = c.map(|i| vertices[i]);
        let area2 = (b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]);
        if area2 == 0.0 {
            return Err(parse_err(l, "degenerate cell with zero area"));
        }
        cells.push(c);
    }
    let mut markers = Vec::with_capacity(nb);
    let mut first_boundary_line = last_line;
    for i in 0..nb {
        let (l, s) = next("a boundary edge")?;
        if i == 0 {
            first_boundary_line = l;
        }
        let f = fields(s, 3, l, "a boundary edge")?;
        let (a, b): (usize, usize) = (num(f[0], l, "vertex index")?, num(f[1], l, "vertex index")?);
        if a >= nv || b >= nv {
            return Err(parse_err(l, format!("boundary edge ({a}, {b}) references a vertex out of range (nv = {nv})")));
        }
        markers.push(([a, b], num::<i32>(f[2], l, "marker")?));
    }
    if let Some((l, _)) = lines.next() {
        return Err(parse_err(l, "trailing data after the declared sections"));
    }
    Mesh::with_markers(vertices, cells, &markers).map_err(|e| match e {
        mafem_core::Error::InvalidMesh(m) => parse_err(first_boundary_line, m),
        other => Error::Solver(other),
    })
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let nb = mesh.boundary_edges().len();
    writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.num_cells(), nb).unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:?} {:?}", p[0], p[1]).unwrap();
    }
    for c in mesh.cells() {
        writeln!(out, "{} {} {}", c[0], c[1], c[2]).unwrap();
    }
    for b in mesh.boundary_edges() {
        let [i, j] = mesh.edges()[b.edge];
        writeln!(out, "{i} {j} {}", b.marker).unwrap();
    }
    out
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    read_mesh(&text)
}

pub fn save_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    std::fs::write(path, write_mesh(mesh)).map_err(io_err(path))
}
