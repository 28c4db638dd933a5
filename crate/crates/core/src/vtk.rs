//! Legacy ASCII VTK output.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Unstructured grid with nodal displacement vectors and, when given,
/// nodal stress tensors `(xx, yy, xy)`.
pub fn to_vtk(mesh: &Mesh, displacement: &[[f64; 2]], stress: Option<&[[f64; 3]]>) -> Result<String> {
    let n = mesh.n_nodes();
    if displacement.len() != n || stress.is_some_and(|s| s.len() != n) {
        return Err(Error::InvalidArgument(format!("point data must have {n} entries")));
    }
    let m = mesh.n_elements();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ndfemlab\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("VECTORS displacement double\n");
    for u in displacement {
        let _ = writeln!(s, "{} {} 0", u[0], u[1]);
    }
    if let Some(stress) = stress {
        s.push_str("TENSORS stress double\n");
        for t in stress {
            let _ = writeln!(s, "{} {} 0\n{} {} 0\n0 0 0", t[0], t[2], t[2], t[1]);
        }
    }
    Ok(s)
}
