//! Wave-operator approximants for the Dirac system and their distance from
//! the limit `D^{-1} F0 X`.
//!
//! The approximant at time `t` is
//! `e^{itx} / (2 sqrt pi) int f(|s - t|) e^{-ixs} P~*_{2s}(x) ds` (first
//! channel), read off a table of `P~*` on a uniform `s` grid. The packet is
//! flat at both ends of its support, so the trapezoid rule on that grid is
//! spectrally accurate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::krein::frame_matrix;
use crate::mat::{j_real, rotation, RMat, C64, I};
use crate::model::Hamiltonian;
use crate::quad;
use crate::szego::{riccati_profile, szego_boundary, RiccatiProfile};
use crate::transfer::{evolve_canonical, DEFAULT_TOL};
use crate::weyl::HerglotzData;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// `X = (f, 0)^T`.
    First,
    /// `X = (0, f)^T`.
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `exp(1 - 1/(1 - u^2))`, `u = 2t/a - 1`; flat at both ends.
    Bump,
    /// `sin(pi t / a)`; only continuous at the ends.
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub shape: Shape,
    pub channel: Channel,
    pub a: f64,
}

impl WavePacket {
    pub fn new(shape: Shape, channel: Channel, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("packet support radius must be positive, got {a}")));
        }
        Ok(WavePacket { shape, channel, a })
    }

    pub fn f(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.a {
            return 0.0;
        }
        match self.shape {
            Shape::Bump => {
                let u = 2.0 * t / self.a - 1.0;
                (1.0 - 1.0 / (1.0 - u * u)).exp()
            }
            Shape::Sine => (PI * t / self.a).sin(),
        }
    }

    /// `int_0^a f^2`, the squared norm of `X`.
    pub fn norm_sq(&self) -> f64 {
        quad::integrate(|t| self.f(t).powi(2), 0.0, self.a, 1e-15, 1e-13)
    }

    /// Largest `|f''|` estimated by second differences on `n` cells.
    pub fn second_difference_bound(&self, n: usize) -> f64 {
        let h = self.a / n as f64;
        (1..n).map(|k| (self.f((k - 1) as f64 * h) - 2.0 * self.f(k as f64 * h) + self.f((k + 1) as f64 * h)).abs() / (h * h)).fold(0.0, f64::max)
    }

    /// Weight in `e^{-itD0} X = (w(s - t) f(|s - t|)) (1, i)^T`.
    fn window(&self, tau: f64) -> C64 {
        let v = self.f(tau.abs());
        match self.channel {
            Channel::First => C64::new(0.5 * v, 0.0),
            Channel::Second => -0.5 * I * tau.signum() * v,
        }
    }
}

/// `F0 X(x)`: `(1/sqrt pi) int f cos(xt) dt` for the first channel and
/// `-(1/sqrt pi) int f sin(xt) dt` for the second.
///
/// Composite Kronrod panels, each spanning at most two radians of phase.
pub fn free_transform(packet: &WavePacket, x_grid: &[f64]) -> Vec<C64> {
    let c = 1.0 / PI.sqrt();
    x_grid
        .par_iter()
        .map(|&x| {
            let panels = 32 + (x.abs() * packet.a / 2.0).ceil() as usize;
            let nodes = quad::composite_nodes(0.0, packet.a, panels);
            let v: f64 = match packet.channel {
                Channel::First => nodes.iter().map(|(t, w)| w * packet.f(*t) * (x * t).cos()).sum(),
                Channel::Second => -nodes.iter().map(|(t, w)| w * packet.f(*t) * (x * t).sin()).sum::<f64>(),
            };
            C64::new(c * v, 0.0)
        })
        .collect()
}

/// `e^{-itD0} X` at the points of `s_grid`, valid for `t > a`.
pub fn free_evolution(packet: &WavePacket, t: f64, s_grid: &[f64]) -> Result<Vec<[C64; 2]>> {
    if !(t > packet.a) {
        return Err(Error::InvalidInput(format!("free evolution closed form needs t > a = {}, got {t}", packet.a)));
    }
    Ok(s_grid
        .iter()
        .map(|&s| {
            let w = packet.window(s - t);
            [w, I * w]
        })
        .collect())
}

/// `P~*_{2s}(x)` for `s = 0, ds, ..., s_max` at every `x`.
#[derive(Clone, Debug)]
pub struct KreinTable {
    pub x: Vec<f64>,
    pub ds: f64,
    pub s_max: f64,
    /// Indexed `[x][s]`.
    pub p_star: Vec<Vec<C64>>,
    pub profile: RiccatiProfile,
}

pub fn krein_table(h: &Hamiltonian, x: &[f64], s_max: f64, ds: f64, max_depth: f64) -> Result<KreinTable> {
    if !(ds > 0.0 && s_max > ds) {
        return Err(Error::InvalidInput("table needs 0 < ds < s_max".into()));
    }
    let n = (s_max / ds).round() as usize;
    let s: Vec<f64> = (0..=n).map(|j| j as f64 * ds).collect();
    let profile = riccati_profile(h, &s, max_depth)?;
    let frames: Vec<RMat> = (0..=n).map(|j| frame_matrix(profile.i[j], profile.re[j])).collect::<Result<_>>()?;
    let p_star = x
        .par_iter()
        .map(|&x| {
            let st = evolve_canonical(h, C64::new(x, 0.0), &s, DEFAULT_TOL)?;
            Ok(st
                .iter()
                .zip(&frames)
                .zip(s.iter().zip(&profile.gamma))
                .map(|((st, g), (&s, &gamma))| {
                    let m = st.m;
                    let tp = m[(0, 0)] * g[(0, 0)] + m[(1, 0)] * g[(0, 1)];
                    let tm = m[(1, 0)] * g[(1, 1)];
                    C64::from_polar(1.0, s * x + gamma) * (tp + I * tm)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(KreinTable { x: x.to_vec(), ds, s_max: n as f64 * ds, p_star, profile })
}

impl KreinTable {
    fn index(&self, s: f64) -> Result<usize> {
        let j = s / self.ds;
        if (j - j.round()).abs() > 1e-9 * (1.0 + j.abs()) {
            return Err(Error::InvalidInput(format!("s = {s} is not on the table grid (ds = {})", self.ds)));
        }
        Ok(j.round() as usize)
    }
}

/// Approximant at time `t` on the table's `x` nodes.
pub fn wave_approximant(table: &KreinTable, packet: &WavePacket, t: f64) -> Result<Vec<C64>> {
    if !(t > packet.a) {
        return Err(Error::InvalidInput(format!("approximant needs t > a = {}, got {t}", packet.a)));
    }
    let (lo, hi) = (t - packet.a, t + packet.a);
    if hi > table.s_max * (1.0 + 1e-12) {
        return Err(Error::Range { lo, hi, table_lo: 0.0, table_hi: table.s_max });
    }
    let (j0, j1) = (table.index(lo)?, table.index(hi)?);
    let weights: Vec<(usize, f64, C64)> = (j0..=j1).map(|j| (j, j as f64 * table.ds - t, packet.window(j as f64 * table.ds - t))).collect();
    let scale = table.ds / PI.sqrt();
    Ok(table
        .x
        .iter()
        .zip(&table.p_star)
        .map(|(&x, col)| weights.iter().map(|&(j, tau, w)| w * C64::from_polar(1.0, -x * tau) * col[j]).sum::<C64>() * scale)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ScatterReport {
    pub t: Vec<f64>,
    pub error: Vec<f64>,
    pub target: String,
    pub packet: WavePacket,
    pub grid: String,
    /// `(error(end) - error(mid)) / (t(end) - t(mid))` over the final half.
    pub final_slope: f64,
    /// Nodes left out of the norm: zero or flagged density, or a target
    /// that is not finite.
    pub excluded_nodes: usize,
}

/// `||approximant_t - D^{-1} F0 X||` in `L^2(w dx)` on the uniform tangent
/// grid of `data`, for each `t`.
pub fn scatter_error(h: &Hamiltonian, packet: &WavePacket, t_grid: &[f64], data: &HerglotzData, ds: f64, max_depth: f64) -> Result<ScatterReport> {
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_grid.is_empty() || !t_max.is_finite() {
        return Err(Error::InvalidInput("t grid must be nonempty and finite".into()));
    }
    let d = szego_boundary(data)?;
    let x = &data.grid.x;
    let free = free_transform(packet, x);
    let target: Vec<C64> = free.iter().zip(&d).map(|(f, d)| f / d).collect();
    let usable: Vec<bool> = (0..x.len())
        .map(|k| !data.flagged[k] && data.w[k] > 0.0 && target[k].re.is_finite() && target[k].im.is_finite())
        .collect();
    let table = krein_table(h, x, t_max + packet.a, ds, max_depth)?;
    let mut error = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let approx = wave_approximant(&table, packet, t)?;
        let e2: f64 = (0..x.len()).filter(|&k| usable[k]).map(|k| (approx[k] - target[k]).norm_sqr() * data.w[k] * data.grid.dx(k)).sum();
        error.push(e2.sqrt());
    }
    let n = t_grid.len();
    let mid = n / 2;
    let final_slope = if n >= 2 && t_grid[n - 1] > t_grid[mid.min(n - 2)] {
        let m = mid.min(n - 2);
        (error[n - 1] - error[m]) / (t_grid[n - 1] - t_grid[m])
    } else {
        0.0
    };
    Ok(ScatterReport {
        t: t_grid.to_vec(),
        error,
        target: "D^-1 F0 X".into(),
        packet: *packet,
        grid: data.grid.label.clone(),
        final_slope,
        excluded_nodes: usable.iter().filter(|u| !**u).count(),
    })
}

/// `N = J N0 J^T G^T Sigma_gamma`.
pub fn phase_matrix(n0: &RMat, i: f64, re: f64, gamma: f64) -> Result<RMat> {
    let j = j_real();
    Ok(j * n0 * j.transpose() * frame_matrix(i, re)?.transpose() * rotation(gamma))
}

/// Angle of the rotation that makes `Sigma_phi N` symmetric positive definite.
pub fn polar_angle(n: &RMat) -> f64 {
    (n[(1, 0)] - n[(0, 1)]).atan2(n[(0, 0)] + n[(1, 1)])
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseProfile {
    pub r: Vec<f64>,
    pub i: Vec<f64>,
    pub re: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Unwrapped along `r`.
    pub phi: Vec<f64>,
    /// `trace(N^T N) - 2`.
    pub surrogate: Vec<f64>,
    /// Trapezoid integral of the surrogate from `0`.
    pub surrogate_integral: Vec<f64>,
}

pub fn modified_phase(h: &Hamiltonian, r_grid: &[f64], max_depth: f64) -> Result<PhaseProfile> {
    let gauge = h.gauge().ok_or_else(|| Error::InvalidInput("the phase needs a Hamiltonian built from a potential".into()))?;
    let p = riccati_profile(h, r_grid, max_depth)?;
    let mut phi: Vec<f64> = Vec::with_capacity(r_grid.len());
    let mut surrogate = Vec::with_capacity(r_grid.len());
    for (k, &r) in r_grid.iter().enumerate() {
        let (i, re, gamma) = p.at(k);
        let n = phase_matrix(&gauge.n0(r), i, re, gamma)?;
        let raw = polar_angle(&n);
        let v = match phi.last() {
            Some(&prev) => raw + TAU * ((prev - raw) / TAU).round(),
            None => raw,
        };
        phi.push(v);
        surrogate.push((n.transpose() * n).trace() - 2.0);
    }
    let mut surrogate_integral = vec![0.0; r_grid.len()];
    for k in 1..r_grid.len() {
        surrogate_integral[k] = surrogate_integral[k - 1] + 0.5 * (r_grid[k] - r_grid[k - 1]) * (surrogate[k] + surrogate[k - 1]);
    }
    Ok(PhaseProfile { r: p.r, i: p.i, re: p.re, gamma: p.gamma, phi, surrogate, surrogate_integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::weyl::{boundary_density, EpsSchedule, SpectralGrid};

    fn bump_packet(channel: Channel) -> WavePacket {
        WavePacket::new(Shape::Bump, channel, 1.0).unwrap()
    }

    #[test]
    fn transform_at_zero_and_sine_oracle() {
        let p = bump_packet(Channel::First);
        let mass = quad::integrate(|t| p.f(t), 0.0, 1.0, 1e-15, 1e-14);
        assert!((free_transform(&p, &[0.0])[0].re - mass / PI.sqrt()).abs() < 1e-14);
        assert_eq!(free_transform(&bump_packet(Channel::Second), &[0.0])[0].re, 0.0);
        let s = WavePacket::new(Shape::Sine, Channel::First, 1.0).unwrap();
        let xs = [0.3, 2.0, 17.0, 60.0];
        let got = free_transform(&s, &xs);
        for (x, g) in xs.iter().zip(got) {
            let dense: f64 = quad::composite_nodes(0.0, 1.0, 400).iter().map(|(t, w)| w * s.f(*t) * (x * t).cos()).sum();
            assert!((g.re - dense / PI.sqrt()).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn free_evolution_closed_form() -> Result<()> {
        let p = bump_packet(Channel::First);
        let v = free_evolution(&p, 2.0, &[2.0, 2.5])?;
        assert_eq!(v[0], [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((v[1][0] - 0.5 * p.f(0.5)).norm() < 1e-15 && (v[1][1] - 0.5 * I * p.f(0.5)).norm() < 1e-15);
        let q = bump_packet(Channel::Second);
        let w = free_evolution(&q, 2.0, &[1.5])?;
        assert!((w[0][0] - 0.5 * I * q.f(0.5)).norm() < 1e-15);
        assert!((w[0][1] + 0.5 * q.f(0.5)).norm() < 1e-15);
        assert!(free_evolution(&p, 0.5, &[1.0]).is_err());
        Ok(())
    }

    #[test]
    fn plancherel() {
        for ch in [Channel::First, Channel::Second] {
            let p = bump_packet(ch);
            let grid = SpectralGrid::hybrid(200.0, 0.25, 64, 1e4).unwrap();
            let f = free_transform(&p, &grid.x);
            let norm: f64 = f.iter().enumerate().map(|(k, v)| v.norm_sqr() * grid.dx(k)).sum();
            assert!((norm - p.norm_sq()).abs() < 1e-6 * p.norm_sq(), "{norm} vs {}", p.norm_sq());
        }
    }

    #[test]
    fn free_error_vanishes() {
        let h = Hamiltonian::free();
        let data = boundary_density(&h, 0.0, &SpectralGrid::tan(64), &EpsSchedule::Boundary, 20.0).unwrap();
        for ch in [Channel::First, Channel::Second] {
            let rep = scatter_error(&h, &bump_packet(ch), &[1.5, 3.0], &data, 1.0 / 256.0, 20.0).unwrap();
            assert!(rep.error.iter().all(|e| *e < 1e-8), "{:?}", rep.error);
        }
    }

    #[test]
    fn range_errors() {
        let h = Hamiltonian::free();
        let table = krein_table(&h, &[0.5], 3.0, 0.125, 20.0).unwrap();
        let p = bump_packet(Channel::First);
        assert!(matches!(wave_approximant(&table, &p, 2.5), Err(Error::Range { .. })));
        assert!(wave_approximant(&table, &p, 1.0).is_err());
        assert!(wave_approximant(&table, &p, 2.0).is_ok());
    }

    #[test]
    fn diagonal_phase_is_zero() {
        let grid: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25).collect();
        let ph = modified_phase(&families::hamiltonian(&families::bump()), &grid, 40.0).unwrap();
        assert!(ph.phi.iter().all(|p| p.abs() < 1e-12));
        assert!(ph.surrogate.iter().all(|g| *g >= -1e-12));
        let free = modified_phase(&families::hamiltonian(&families::free()), &grid, 40.0).unwrap();
        assert!(free.phi.iter().chain(&free.surrogate).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn general_phase_settles() {
        let grid: Vec<f64> = (0..=24).map(|k| k as f64 * 0.25).collect();
        let h = families::hamiltonian(&families::gbump());
        let ph = modified_phase(&h, &grid, 40.0).unwrap();
        let spread = ph.phi[..8].iter().fold(0.0_f64, |m, p| m.max((p - ph.phi[0]).abs()));
        assert!(spread > 1e-3);
        let tail = &ph.phi[9..];
        assert!(tail.iter().all(|p| (p - tail[0]).abs() < 1e-9), "{tail:?}");
        let gauge = h.gauge().unwrap();
        for (k, &r) in grid.iter().enumerate() {
            let n = phase_matrix(&gauge.n0(r), ph.i[k], ph.re[k], ph.gamma[k]).unwrap();
            let m = rotation(ph.phi[k]) * n;
            assert!((m[(0, 1)] - m[(1, 0)]).abs() < 1e-10);
            assert!(m.trace() > 0.0 && (m.determinant() - 1.0).abs() < 1e-10);
        }
    }
}
