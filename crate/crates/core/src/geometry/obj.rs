use std::io::Write;

use super::{ParamGrid, SurfaceChart};
use crate::Result;

/// Writes the triangulated sample grid as a Wavefront OBJ mesh.
pub fn write_obj<W: Write>(surface: &SurfaceChart, grid: &ParamGrid, mut out: W) -> Result<()> {
    writeln!(out, "# {}", surface.name)?;
    for (u, v) in grid.nodes() {
        let p = surface.point(u, v);
        writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            let [a, b, c, d] = grid.cell_corners(i, j).map(|k| k + 1);
            writeln!(out, "f {a} {b} {c}")?;
            writeln!(out, "f {a} {c} {d}")?;
        }
    }
    Ok(())
}
