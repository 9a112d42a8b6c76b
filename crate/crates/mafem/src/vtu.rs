//! ASCII VTK unstructured-grid (`.vtu`) output of a solved level: the mesh
//! as linear triangles, `u_h` at the vertices and the per-cell indicators.

use std::fmt::Write as _;

use mafem_core::lagrange::DofMap;

/// Cell type code of a linear triangle.
pub const VTK_TRIANGLE: u8 = 5;

fn data_array(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    writeln!(out, "        <DataArray type=\"Float64\" Name=\"{name}\" format=\"ascii\">").unwrap();
    out.push_str("          ");
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:?}").unwrap();
    }
    out.push_str("\n        </DataArray>\n");
}

/// `u` holds `V_h` coefficients; vertex values are the first DOFs.
/// `theta_sq` and `zeta_sq` are the squared local quantities; their square
/// roots are written as `theta_K` and `zeta_K`.
pub fn write_vtu(dofmap: &DofMap, u: &[f64], theta_sq: &[f64], zeta_sq: &[f64]) -> String {
    let mesh = dofmap.mesh();
    let (nv, nc) = (mesh.num_vertices(), mesh.num_cells());
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    out.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    out.push_str("  <UnstructuredGrid>\n");
    writeln!(out, "    <Piece NumberOfPoints=\"{nv}\" NumberOfCells=\"{nc}\">").unwrap();

    out.push_str("      <PointData Scalars=\"u\">\n");
    data_array(&mut out, "u", u[..nv].iter().copied());
    out.push_str("      </PointData>\n");

    out.push_str("      <CellData Scalars=\"theta_K\">\n");
    data_array(&mut out, "theta_K", theta_sq.iter().map(|v| v.sqrt()));
    data_array(&mut out, "zeta_K", zeta_sq.iter().map(|v| v.sqrt()));
    out.push_str("      </CellData>\n");

    out.push_str("      <Points>\n");
    out.push_str("        <DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n");
    for p in mesh.vertices() {
        writeln!(out, "          {:?} {:?} 0", p[0], p[1]).unwrap();
    }
    out.push_str("        </DataArray>\n      </Points>\n");

    out.push_str("      <Cells>\n");
    out.push_str("        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    for c in mesh.cells() {
        writeln!(out, "          {} {} {}", c[0], c[1], c[2]).unwrap();
    }
    out.push_str("        </DataArray>\n");
    out.push_str("        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n          ");
    let offsets: Vec<String> = (1..=nc).map(|i| (3 * i).to_string()).collect();
    out.push_str(&offsets.join(" "));
    out.push_str("\n        </DataArray>\n");
    out.push_str("        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n          ");
    let types: Vec<String> = (0..nc).map(|_| VTK_TRIANGLE.to_string()).collect();
    out.push_str(&types.join(" "));
    out.push_str("\n        </DataArray>\n      </Cells>\n");
    out.push_str("    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");
    out
}
