use std::io::Write;

use super::LevelSet;
use crate::Result;

/// Writes polylines as CSV rows `t,component,u,v,x,y,z,theta`.
pub fn write_levelset_csv<W: Write>(levelsets: &[LevelSet], mut out: W) -> Result<()> {
    writeln!(out, "t,component,u,v,x,y,z,theta")?;
    for ls in levelsets {
        for (id, p) in ls.components.iter().enumerate() {
            for k in 0..p.len() {
                let (u, v) = p.params[k];
                let [x, y, z] = p.points[k];
                writeln!(out, "{},{},{},{},{},{},{},{}", ls.level, id, u, v, x, y, z, p.theta[k])?;
            }
        }
    }
    Ok(())
}
