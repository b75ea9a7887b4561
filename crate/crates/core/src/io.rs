//! Plain-text formats for grid functions and contours.
//!
//! Floats are written in Rust's shortest round-trip form, so writing is
//! deterministic and reading recovers the values bit for bit.

use std::fmt::Write as _;

use crate::contour::Polyline;
use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridFn1, GridFn2};

/// `# nx,ny,h,x0,y0` with the values, then one row of `nx` values per `j`.
pub fn grid_to_csv(u: &GridFn2) -> String {
    let g = u.grid();
    let mut s = format!("# {},{},{},{},{}\n", g.nx, g.ny, g.h, g.x0, g.y0);
    for row in u.values().chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn grid_from_csv(text: &str) -> Result<GridFn2> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let fields: Vec<&str> =
        header.strip_prefix('#').ok_or_else(|| Error::Parse("missing `#` header".into()))?.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!("header needs nx,ny,h,x0,y0: `{header}`")));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{s}`")));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
    let g = Grid2D::new(int(fields[0])?, int(fields[1])?, num(fields[2])?, num(fields[3])?, num(fields[4])?)?;
    let mut values = Vec::with_capacity(g.nx * g.ny);
    for (j, line) in lines.enumerate() {
        let row: Vec<f64> = line.split(',').map(num).collect::<Result<_>>()?;
        if row.len() != g.nx {
            return Err(Error::Parse(format!("row {j} has {} values, expected {}", row.len(), g.nx)));
        }
        values.extend(row);
    }
    if values.len() != g.nx * g.ny {
        return Err(Error::Parse(format!("{} rows, expected {}", values.len() / g.nx.max(1), g.ny)));
    }
    GridFn2::from_values(g, values)
}

/// `x,y,u` triples, one point per line.
pub fn grid_to_triples(u: &GridFn2) -> String {
    let g = u.grid();
    let mut s = String::from("x,y,u\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let _ = writeln!(s, "{},{},{}", g.x(i), g.y(j), u.at(i, j));
        }
    }
    s
}

/// `x,u` pairs.
pub fn grid1d_to_csv(u: &GridFn1) -> String {
    let g = u.grid();
    let mut s = String::from("x,u\n");
    for i in 0..g.nx {
        let _ = writeln!(s, "{},{}", g.x(i), u.at(i));
    }
    s
}

/// `polyline,closed,x,y`, one vertex per line.
pub fn polylines_to_csv(lines: &[Polyline]) -> String {
    let mut s = String::from("polyline,closed,x,y\n");
    for (k, l) in lines.iter().enumerate() {
        for &(x, y) in &l.points {
            let _ = writeln!(s, "{k},{},{x},{y}", l.closed as u8);
        }
    }
    s
}

pub fn polylines_from_csv(text: &str) -> Result<Vec<Polyline>> {
    let mut out: Vec<Polyline> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 fields", n + 1)));
        }
        let bad = |s: &str| Error::Parse(format!("line {}: bad field `{s}`", n + 1));
        let k: usize = f[0].parse().map_err(|_| bad(f[0]))?;
        let closed = f[1] == "1";
        let x: f64 = f[2].parse().map_err(|_| bad(f[2]))?;
        let y: f64 = f[3].parse().map_err(|_| bad(f[3]))?;
        if k == out.len() {
            out.push(Polyline { points: Vec::new(), closed });
        } else if k + 1 != out.len() {
            return Err(Error::Parse(format!("line {}: polyline index {k} out of order", n + 1)));
        }
        out[k].points.push((x, y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn grid_round_trip_is_bitwise() {
        let g = Grid2D::new(5, 3, 0.1, -0.2, 1.0 / 3.0).unwrap();
        let u = GridFn2::sample(g, |x, y| (x * 7.0).sin() + y.exp() / 3.0);
        let text = grid_to_csv(&u);
        assert!(text.starts_with("# 5,3,0.1,-0.2,0.3333333333333333\n"));
        assert_eq!(text.lines().count(), 4);
        let back = grid_from_csv(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(grid_to_csv(&back), text);
    }

    #[test]
    fn malformed_grids() {
        assert!(grid_from_csv("").is_err());
        assert!(grid_from_csv("# 3,3,1,0\n").is_err());
        assert!(grid_from_csv("# 3,3,1,0,0\n1,2,3\n1,2,3\n").is_err());
        assert!(grid_from_csv("# 3,3,1,0,0\n1,2,3\n1,2\n1,2,3\n").is_err());
        assert!(grid_from_csv("# 3,3,1,0,0\n1,2,3\n1,x,3\n1,2,3\n").is_err());
    }

    #[test]
    fn triples_and_1d() {
        let g = Grid2D::new(3, 3, 0.5, 0.0, 0.0).unwrap();
        let t = grid_to_triples(&GridFn2::sample(g, |x, y| x + 10.0 * y));
        assert_eq!(t.lines().nth(1), Some("0,0,0"));
        assert_eq!(t.lines().last(), Some("1,1,11"));
        let u = GridFn1::sample(Grid1D::spanning(0.0, 1.0, 3).unwrap(), |x, _| 2.0 * x);
        assert_eq!(grid1d_to_csv(&u), "x,u\n0,0\n0.5,1\n1,2\n");
    }

    #[test]
    fn polyline_round_trip() {
        let lines = vec![
            Polyline { points: vec![(0.0, 0.0), (1.0, 0.5), (0.0, 0.0)], closed: true },
            Polyline { points: vec![(0.25, -1.0), (0.1, 0.2)], closed: false },
        ];
        let text = polylines_to_csv(&lines);
        assert_eq!(polylines_from_csv(&text).unwrap(), lines);
        assert!(polylines_from_csv("h\n1,0,0,0\n").is_err());
    }
}
