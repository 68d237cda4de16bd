//! CSV dumps of trajectories, wave fields, and fluid states. Numbers are
//! written with 17 significant digits so files round-trip bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::fluid::FluidState;
use crate::quantum::WaveField;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns: t, x_{I,i}..., p_{I,i}..., one row per sample.
pub fn write_trajectory_csv(tr: &Trajectory, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (n, d) = (tr.system.n, tr.system.d);
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for c in 0..d {
            header.push(format!("x_{i}_{c}"));
        }
    }
    for i in 0..n {
        for c in 0..d {
            header.push(format!("p_{i}_{c}"));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    for st in &tr.states {
        let mut row = vec![fmt(st.t)];
        row.extend(st.x.iter().map(|v| fmt(*v)));
        row.extend(st.p.iter().map(|v| fmt(*v)));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Columns: x, Re psi, Im psi, preceded by comment lines with the mass,
/// time, and grid metadata.
pub fn write_wavefield_csv(f: &WaveField, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# m={} t={} x_min={} x_max={} n={}",
        fmt(f.m),
        fmt(f.t),
        fmt(f.grid.x_min),
        fmt(f.grid.x_max),
        f.grid.n
    )?;
    writeln!(w, "x,re_psi,im_psi")?;
    for (i, z) in f.psi.iter().enumerate() {
        writeln!(w, "{},{},{}", fmt(f.grid.x(i)), fmt(z.re), fmt(z.im))?;
    }
    w.flush()
}

/// Columns: x, rho, u, eps, p, preceded by a comment line with the time and
/// polytropic exponent.
pub fn write_fluid_csv(s: &FluidState, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# t={} gamma0={}", fmt(s.t), fmt(s.gamma0))?;
    writeln!(w, "x,rho,u,eps,p")?;
    for i in 0..s.cells() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(s.x(i)),
            fmt(s.rho[i]),
            fmt(s.u[i]),
            fmt(s.eps[i]),
            fmt(s.pressure(i))
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{free_trajectory, time_grid};
    use crate::fluid::gaussian_pulse_state;
    use crate::quantum::{gaussian_packet, Grid1D};

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let dir = std::env::temp_dir();
        let path = dir.join("invariance_core_traj_test.csv");
        let times = time_grid(0.0, 1.0, 3);
        let tr = free_trajectory(&[0.0, 1.0], &[1.0, -1.0], 1.0, 2, &times);
        write_trajectory_csv(&tr, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,x_0_0,x_0_1,p_0_0,p_0_1");
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn wavefield_csv_row_count() {
        let dir = std::env::temp_dir();
        let path = dir.join("invariance_core_wave_test.csv");
        let f = gaussian_packet(Grid1D::symmetric(4.0, 8).unwrap(), 1.0, 0.5, 0.0, 0.0, &[]);
        write_wavefield_csv(&f, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 8);
        assert!(lines[0].starts_with("# m="));
        assert_eq!(lines[1], "x,re_psi,im_psi");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn fluid_csv_row_count_and_roundtrip() {
        let dir = std::env::temp_dir();
        let path = dir.join("invariance_core_fluid_test.csv");
        let s = gaussian_pulse_state(400, 3.0);
        write_fluid_csv(&s, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 400);
        // 17 significant digits round-trip exactly
        let first_data: Vec<&str> = lines[2].split(',').collect();
        let rho: f64 = first_data[1].parse().unwrap();
        assert_eq!(rho, s.rho[0]);
        std::fs::remove_file(&path).ok();
    }
}
