//! Resultant blade velocity of a rotor in forward flight, `U = ω·y + V·sin ψ`.
//!
//! Inputs use the imperial units of the original MATLAB script: span in
//! feet, forward speed in mph, result in ft/s.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::num::Real;

pub const FIELD_CSV_HEADER: &str = "x_ft,y_ft,u_ftps";

const MPH_PER_KNOT: f64 = 1.15077;
const KNOTS_PER_FTPS: f64 = 0.5925;

/// Value of π used when converting rpm to rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiMode {
    #[default]
    Exact,
    /// `3.14`, as written in the original script.
    Truncated,
}

impl PiMode {
    #[allow(clippy::approx_constant)]
    fn pi<T: Real>(self) -> T {
        match self {
            PiMode::Exact => T::PI(),
            PiMode::Truncated => T::lit(3.14),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BladeFieldSpec<T> {
    pub rpm: T,
    /// Forward flight speed, mph.
    pub forward_speed: T,
    /// Rotor radius, ft.
    pub radius: T,
    /// Samples per dimension (span and azimuth).
    pub grid_n: usize,
    pub pi_mode: PiMode,
}

/// One field sample in Cartesian rotor-disc coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BladeSample<T> {
    pub x: T,
    pub y: T,
    /// Resultant blade velocity, ft/s.
    pub u: T,
    /// Radial station, ft.
    pub span: T,
    /// Accumulated azimuth, rad (not reduced modulo 2π).
    pub azimuth: T,
}

fn omega<T: Real>(rpm: T, pi_mode: PiMode) -> T {
    rpm * T::lit(2.0) * pi_mode.pi::<T>() / T::lit(60.0)
}

fn forward_ftps<T: Real>(mph: T) -> T {
    mph / T::lit(MPH_PER_KNOT) / T::lit(KNOTS_PER_FTPS)
}

/// Blade velocity at radial station `y` (ft) and `azimuth` (rad).
pub fn blade_velocity<T: Real>(y: T, azimuth: T, rpm: T, forward_mph: T, pi_mode: PiMode) -> T {
    omega(rpm, pi_mode) * y + forward_ftps(forward_mph) * azimuth.sin()
}

/// Samples the field on the script's polar grid: `grid_n` radial stations in
/// `(0, radius]`, each swept through `grid_n` azimuth steps of `2π/grid_n`.
///
/// Span and azimuth are accumulated by repeated addition exactly like the
/// script, and the azimuth is not reset between radial stations. Output is
/// row-major: radial station outer, azimuth inner.
pub fn blade_velocity_field<T: Real>(spec: &BladeFieldSpec<T>) -> Vec<BladeSample<T>> {
    let n = spec.grid_n.max(2);
    let count = T::lit(n as f64);
    let w = omega(spec.rpm, spec.pi_mode);
    let v = forward_ftps(spec.forward_speed);
    let dy = spec.radius / count;
    let dpsi = T::lit(2.0) * T::PI() / count;

    let mut out = Vec::with_capacity(n * n);
    let mut y = T::zero();
    let mut psi = T::zero();
    for _ in 0..n {
        y = y + dy;
        for _ in 0..n {
            psi = psi + dpsi;
            let (s, c) = (psi.sin(), psi.cos());
            out.push(BladeSample {
                x: y * c,
                y: y * s,
                u: w * y + v * s,
                span: y,
                azimuth: psi,
            });
        }
    }
    out
}

/// Writes `x_ft,y_ft,u_ftps` rows with 17 significant digits. Returns bytes written.
pub fn write_field_csv<T: Real, W: Write>(samples: &[BladeSample<T>], mut w: W) -> io::Result<usize> {
    let mut written = 0;
    let header = format!("{FIELD_CSV_HEADER}\n");
    w.write_all(header.as_bytes())?;
    written += header.len();
    for s in samples {
        let line = format!(
            "{:.16e},{:.16e},{:.16e}\n",
            s.x.to_f64().unwrap_or(f64::NAN),
            s.y.to_f64().unwrap_or(f64::NAN),
            s.u.to_f64().unwrap_or(f64::NAN)
        );
        w.write_all(line.as_bytes())?;
        written += line.len();
    }
    w.flush()?;
    Ok(written)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn script_spec() -> BladeFieldSpec<f64> {
        BladeFieldSpec {
            rpm: 1000.0,
            forward_speed: 28.0,
            radius: 4.0 / 12.0,
            grid_n: 100,
            pi_mode: PiMode::Truncated,
        }
    }

    #[test]
    fn hand_evaluated_point() {
        // ω = 1000·2·3.14/60 = 104.666..., V = 28/1.15077/0.5925 = 41.0657...
        let omega = 1000.0 * 2.0 * 3.14 / 60.0;
        let v = 28.0 / 1.15077 / 0.5925;
        let u = blade_velocity(1.0 / 3.0, FRAC_PI_2, 1000.0, 28.0, PiMode::Truncated);
        assert_abs_diff_eq!(u, omega / 3.0 + v, epsilon = 1e-12);
        assert_abs_diff_eq!(u, 75.95, epsilon = 0.01);
        assert_eq!(blade_velocity(0.2, 0.0, 1000.0, 28.0, PiMode::Exact), omega_exact() * 0.2);
    }

    fn omega_exact() -> f64 {
        1000.0 * 2.0 * PI / 60.0
    }

    #[test]
    fn reverse_flow_boundary() {
        let v = 28.0 / 1.15077 / 0.5925;
        let y = v / omega_exact();
        let u = blade_velocity(y, 1.5 * PI, 1000.0, 28.0, PiMode::Exact);
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn field_layout_and_argmax() {
        let spec = script_spec();
        let field = blade_velocity_field(&spec);
        assert_eq!(field.len(), 100 * 100);
        let (imax, best) = field
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.u.partial_cmp(&b.1.u).unwrap())
            .unwrap();
        assert_eq!(imax / 100, 99, "max on the outermost station");
        assert_abs_diff_eq!(best.span, spec.radius, epsilon = 1e-12);
        assert_abs_diff_eq!(best.azimuth.rem_euclid(2.0 * PI), FRAC_PI_2, epsilon = 1e-9);
        for s in &field {
            let u = blade_velocity(s.span, s.azimuth, spec.rpm, spec.forward_speed, spec.pi_mode);
            assert_eq!(s.u, u);
            assert!(s.span > 0.0 && s.span <= spec.radius + 1e-12);
        }
        assert!(field.iter().any(|s| s.u < 0.0));
    }

    #[test]
    fn csv_format() {
        let field = blade_velocity_field(&BladeFieldSpec { grid_n: 2, ..script_spec() });
        let mut buf = Vec::new();
        let n = write_field_csv(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(n, text.len());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], FIELD_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        for line in &lines[1..] {
            let parsed: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(parsed.len(), 3);
        }
        let first: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(first[2], field[0].u);
    }

    proptest! {
        #[test]
        fn periodic_in_azimuth(y in 0.0f64..2.0, psi in -10.0f64..10.0, rpm in 0.0f64..5000.0) {
            let a = blade_velocity(y, psi, rpm, 28.0, PiMode::Exact);
            let b = blade_velocity(y, psi + 2.0 * PI, rpm, 28.0, PiMode::Exact);
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
