//! The MGF/1 text format.
//!
//! ```text
//! MGF 1 dim=1 rootlevel=0 rootcoords=0 depth=2 flags=nonneg
//! 1.0000000000000000e0
//! ...
//! ```
//! One value per line follows the header, row-major, `2^(dim·depth)` lines.

use std::io::{BufRead, Write};

use super::cube::DyadicCube;
use super::function::{Grid, GridFunction, SignTag};
use crate::error::{Error, Result};

pub fn write_mgf<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let g = f.grid();
    let coords: Vec<String> = g.root().coords().iter().map(|c| c.to_string()).collect();
    writeln!(
        out,
        "MGF 1 dim={} rootlevel={} rootcoords={} depth={} flags={}",
        g.dim(),
        g.root().level(),
        coords.join(","),
        g.depth(),
        f.tag().as_str()
    )?;
    for v in f.values() {
        writeln!(out, "{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_mgf<R: BufRead>(input: R) -> Result<GridFunction> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })??;
    let perr = |msg: String| Error::Parse { line: 1, msg };
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("MGF") || tokens.next() != Some("1") {
        return Err(perr("expected header `MGF 1 ...`".into()));
    }
    let (mut dim, mut level, mut coords, mut depth, mut flags) = (None, None, None, None, None);
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| perr(format!("malformed field {tok:?}")))?;
        let bad = || perr(format!("bad value for {k}: {v:?}"));
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad())?),
            "rootlevel" => level = Some(v.parse::<i32>().map_err(|_| bad())?),
            "rootcoords" => {
                coords = Some(
                    v.split(',')
                        .map(|c| c.parse::<i64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad())?,
                )
            }
            "depth" => depth = Some(v.parse::<u32>().map_err(|_| bad())?),
            "flags" => flags = Some(SignTag::parse(v).map_err(|_| bad())?),
            _ => return Err(perr(format!("unknown field {k:?}"))),
        }
    }
    let missing = |name: &str| perr(format!("missing field {name}"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let coords = coords.ok_or_else(|| missing("rootcoords"))?;
    if coords.len() != dim {
        return Err(perr(format!("rootcoords has {} entries for dim={dim}", coords.len())));
    }
    let root = DyadicCube::new(level.ok_or_else(|| missing("rootlevel"))?, &coords)?;
    let grid = Grid::new(root, depth.ok_or_else(|| missing("depth"))?)?;
    let tag = flags.ok_or_else(|| missing("flags"))?;

    let mut values = Vec::with_capacity(grid.cell_count());
    for (i, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse { line: i + 2, msg: format!("not a number: {t:?}") })?;
        values.push(v);
    }
    GridFunction::new(grid, values, tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = Grid::new(DyadicCube::new(-1, &[3, -2]).unwrap(), 3).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] * 7.3).sin() + x[1] / 3.0).unwrap();
        let mut buf = Vec::new();
        write_mgf(&f, &mut buf).unwrap();
        let back = read_mgf(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for bad in [
            "",
            "MGF 2 dim=1 rootlevel=0 rootcoords=0 depth=1 flags=none\n1\n2\n",
            "MGF 1 dim=1 rootlevel=0 rootcoords=0 depth=1 flags=none\n1\n",
            "MGF 1 dim=1 rootlevel=0 rootcoords=0 depth=1 flags=pos\n1\n0\n",
            "MGF 1 dim=2 rootlevel=0 rootcoords=0 depth=1 flags=none\n1\n2\n3\n4\n",
            "MGF 1 dim=1 rootlevel=0 rootcoords=0 depth=1 flags=none\n1\nx\n",
        ] {
            assert!(read_mgf(bad.as_bytes()).is_err(), "{bad:?}");
        }
    }
}
