//! Plain-text artifacts: CSV with full-precision floats, JSON manifests and
//! gnuplot-style data blocks.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::constraints::CharacteristicData;
use crate::error::{Error, Result};
use crate::goursat::GoursatGrid;
use crate::hodograph::{PhysicalField, Raster};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn characteristic_csv(sides: &[&CharacteristicData]) -> String {
    let mut s = String::from("side,param,alpha,beta,t,r,mu,nu,gamma,delta\n");
    for cd in sides {
        for k in 0..cd.len() {
            let vals = [
                cd.param[k],
                cd.alpha[k],
                cd.beta[k],
                cd.t[k],
                cd.r[k],
                cd.mu[k],
                cd.nu[k],
                cd.gamma[k],
                cd.delta[k],
            ];
            s.push_str(cd.side.label());
            for v in vals {
                s.push(',');
                s.push_str(&num(v));
            }
            s.push('\n');
        }
    }
    s
}

pub fn field_csv(g: &GoursatGrid, a: &Array2<f64>) -> String {
    let mut s = String::from("i,j,u,v,value\n");
    for ((i, j), &x) in a.indexed_iter() {
        let _ = writeln!(s, "{i},{j},{},{},{}", num(g.u[i]), num(g.v[j]), num(x));
    }
    s
}

pub fn physical_csv(f: &PhysicalField) -> String {
    let mut s = String::from("t,r,rho,w,p,valid\n");
    for p in &f.samples {
        let _ = writeln!(s, "{},{},{},{},{},{}", num(p.t), num(p.r), num(p.rho), num(p.w), num(p.p), p.valid as u8);
    }
    s
}

pub fn raster_csv(r: &Raster) -> String {
    let mut s = String::from("t,r,rho,w,p,valid\n");
    for ((a, b), &ok) in r.valid.indexed_iter() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.t[a]),
            num(r.r[b]),
            num(r.rho[[a, b]]),
            num(r.w[[a, b]]),
            num(r.p[[a, b]]),
            ok as u8
        );
    }
    s
}

/// One data block per field (separated by two blank lines so that each is a
/// gnuplot `index`), rows of a block separated by single blank lines.
pub fn plot_blocks(g: &GoursatGrid, f: &PhysicalField) -> String {
    let mut s = String::new();
    for (name, a) in g.fields() {
        let _ = writeln!(s, "# {name}: u v value");
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let _ = writeln!(s, "{} {} {}", num(g.u[i]), num(g.v[j]), num(a[[i, j]]));
            }
            s.push('\n');
        }
        s.push('\n');
    }
    let (n0, n1) = f.shape;
    for (name, pick) in [("rho", 0), ("w", 1), ("p", 2)] {
        let _ = writeln!(s, "# {name}: t r value (valid nodes)");
        for i in 0..n0 {
            for j in 0..n1 {
                let p = &f.samples[i * n1 + j];
                if p.valid {
                    let v = [p.rho, p.w, p.p][pick];
                    let _ = writeln!(s, "{} {} {}", num(p.t), num(p.r), num(v));
                }
            }
            s.push('\n');
        }
        s.push('\n');
    }
    if let Some(r) = &f.raster {
        for (name, a) in [("raster rho", &r.rho), ("raster w", &r.w), ("raster p", &r.p)] {
            let _ = writeln!(s, "# {name}: t r value");
            for (ka, &t) in r.t.iter().enumerate() {
                for (kb, &rr) in r.r.iter().enumerate() {
                    let _ = writeln!(s, "{} {} {}", num(t), num(rr), num(a[[ka, kb]]));
                }
                s.push('\n');
            }
            s.push('\n');
        }
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_characteristic(dir: &Path, sides: &[&CharacteristicData]) -> Result<()> {
    write(&dir.join("characteristic.csv"), characteristic_csv(sides))
}

/// grid_<field>.csv for every field, physical.csv, raster.csv and plot.dat.
pub fn write_solution(dir: &Path, g: &GoursatGrid, f: &PhysicalField, plot: bool) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for (name, a) in g.fields() {
        let file = format!("grid_{name}.csv");
        write(&dir.join(&file), field_csv(g, a))?;
        files.push(file);
    }
    write(&dir.join("physical.csv"), physical_csv(f))?;
    files.push("physical.csv".into());
    if let Some(r) = &f.raster {
        write(&dir.join("raster.csv"), raster_csv(r))?;
        files.push("raster.csv".into());
    }
    if plot {
        write(&dir.join("plot.dat"), plot_blocks(g, f))?;
        files.push("plot.dat".into());
    }
    Ok(files)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, json(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Side;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), -1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn characteristic_columns() {
        let cd = CharacteristicData {
            side: Side::Cplus,
            spacing: 0.5,
            param: vec![0.0, 0.5],
            alpha: vec![2.0; 2],
            beta: vec![2.0; 2],
            t: vec![0.0, 0.5],
            r: vec![1.0, 1.5],
            mu: vec![1.0; 2],
            nu: vec![1.0; 2],
            gamma: vec![0.0; 2],
            delta: vec![0.0; 2],
            guard: None,
        };
        let s = characteristic_csv(&[&cd]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 10);
        assert!(lines[2].starts_with("C+,5.0000000000000000e-1,"));
    }
}
