//! Legacy VTK (ASCII, version 2.0) unstructured-grid export of nodal fields.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::field::FeField;
use crate::mesh::StructuredMesh;

const VTK_QUAD: u8 = 9;

/// Fields attached to the points of one grid.
#[derive(Debug, Default)]
pub struct VtkDocument<'a> {
    pub title: String,
    fields: Vec<(String, &'a FeField)>,
}

impl<'a> VtkDocument<'a> {
    pub fn new(title: impl Into<String>) -> Self {
        VtkDocument { title: title.into(), fields: Vec::new() }
    }

    /// Adds a scalar (one component) or vector (two component) field.
    pub fn field(mut self, name: impl Into<String>, field: &'a FeField) -> Self {
        self.fields.push((name.into(), field));
        self
    }

    pub fn render(&self, mesh: &StructuredMesh) -> Result<String> {
        for (name, f) in &self.fields {
            if f.mesh().as_ref() != mesh || !(1..=2).contains(&f.components()) {
                return Err(Error::validation("vtk", format!("field `{name}` does not fit the grid")));
            }
        }
        let mut s = String::new();
        let title = self.title.replace('\n', " ");
        let (np, ne) = (mesh.node_count(), mesh.element_count());
        // Writing into a String cannot fail.
        let _ = writeln!(s, "# vtk DataFile Version 2.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {np} double");
        for x in mesh.nodes() {
            let _ = writeln!(s, "{} {} 0", x[0], x[1]);
        }
        let _ = writeln!(s, "CELLS {ne} {}", 5 * ne);
        for c in mesh.elements() {
            let _ = writeln!(s, "4 {} {} {} {}", c[0], c[1], c[2], c[3]);
        }
        let _ = writeln!(s, "CELL_TYPES {ne}");
        for _ in 0..ne {
            let _ = writeln!(s, "{VTK_QUAD}");
        }
        let _ = writeln!(s, "CELL_DATA {ne}\nSCALARS phase int 1\nLOOKUP_TABLE default");
        for p in mesh.phases() {
            let _ = writeln!(s, "{}", p.index());
        }
        if !self.fields.is_empty() {
            let _ = writeln!(s, "POINT_DATA {np}");
        }
        for (name, f) in &self.fields {
            let name = name.replace(char::is_whitespace, "_");
            if f.components() == 1 {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in f.values() {
                    let _ = writeln!(s, "{v}");
                }
            } else {
                let _ = writeln!(s, "VECTORS {name} double");
                for v in f.values().chunks_exact(2) {
                    let _ = writeln!(s, "{} {} 0", v[0], v[1]);
                }
            }
        }
        Ok(s)
    }

    pub fn write(&self, mesh: &StructuredMesh, path: &Path) -> Result<()> {
        std::fs::write(path, self.render(mesh)?)?;
        Ok(())
    }
}
