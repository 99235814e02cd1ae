//! The tilde transform, the Hermite-Biehler functions `E~_r`, the
//! regularized Krein pair and Schur functions, with the identities that tie
//! them to the spectral density.
//!
//! Conventions: `M(r, z) = ((Theta^+, Phi^+), (Theta^-, Phi^-))`,
//! `G(r) = ((1/sqrt I, R/sqrt I), (0, sqrt I))` and the tilde functions are
//! the entries of `G M`.

use rayon::prelude::*;
use serde::Serialize;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mat::{CMat, RMat, C64, I};
use crate::model::Hamiltonian;
use crate::szego::{entropy_rates, riccati_profile, RiccatiProfile};
use crate::transfer::{evolve_canonical, transfer_between, DEFAULT_TOL};
use crate::weyl::{boundary_weyl, herglotz_at_i, EpsSchedule, HerglotzData, DENSITY_FLOOR};

pub fn frame_matrix(i: f64, re: f64) -> Result<RMat> {
    if !(i > 0.0) || !re.is_finite() {
        return Err(Error::Positivity { r: f64::NAN, value: i });
    }
    let s = i.sqrt();
    Ok(RMat::new(1.0 / s, re / s, 0.0, s))
}

#[derive(Clone, Debug)]
pub struct TildeFrame {
    pub r: f64,
    pub i: f64,
    pub re: f64,
    pub g: RMat,
    pub z: Vec<C64>,
    /// Transfer matrices `M(r, z_k)`.
    pub m: Vec<CMat>,
    pub theta_plus: Vec<C64>,
    pub theta_minus: Vec<C64>,
    pub phi_plus: Vec<C64>,
    pub phi_minus: Vec<C64>,
}

impl TildeFrame {
    /// `Theta~^+ Phi~^- - Theta~^- Phi~^+`, identically one.
    pub fn wronskian(&self, k: usize) -> C64 {
        self.theta_plus[k] * self.phi_minus[k] - self.theta_minus[k] * self.phi_plus[k]
    }
}

pub fn tilde_frame(r: f64, m: Vec<CMat>, z: Vec<C64>, i: f64, re: f64) -> Result<TildeFrame> {
    if m.len() != z.len() {
        return Err(Error::InvalidInput(format!("{} transfer matrices for {} points", m.len(), z.len())));
    }
    let g = frame_matrix(i, re).map_err(|_| Error::Positivity { r, value: i })?;
    let (g00, g01, g11) = (C64::new(g[(0, 0)], 0.0), C64::new(g[(0, 1)], 0.0), C64::new(g[(1, 1)], 0.0));
    let theta_plus = m.iter().map(|m| g00 * m[(0, 0)] + g01 * m[(1, 0)]).collect();
    let theta_minus = m.iter().map(|m| g11 * m[(1, 0)]).collect();
    let phi_plus = m.iter().map(|m| g00 * m[(0, 1)] + g01 * m[(1, 1)]).collect();
    let phi_minus = m.iter().map(|m| g11 * m[(1, 1)]).collect();
    Ok(TildeFrame { r, i, re, g, z, m, theta_plus, theta_minus, phi_plus, phi_minus })
}

/// Frame at `r` with the transfer matrices computed here.
pub fn frame_at(h: &Hamiltonian, r: f64, z: &[C64], i: f64, re: f64) -> Result<TildeFrame> {
    let m = z.par_iter().map(|&z| transfer_between(h, z, 0.0, r, DEFAULT_TOL)).collect::<Result<Vec<_>>>()?;
    tilde_frame(r, m, z.to_vec(), i, re)
}

#[derive(Clone, Debug, Serialize)]
pub struct KreinState {
    pub r: f64,
    pub gamma: f64,
    pub z: Vec<C64>,
    pub e: Vec<C64>,
    pub e_sharp: Vec<C64>,
    pub f: Vec<C64>,
    pub f_sharp: Vec<C64>,
    /// `P~_{2r} = e^{irz - i gamma} E~_r^#`.
    pub p: Vec<C64>,
    /// `P~*_{2r} = e^{irz + i gamma} E~_r`.
    pub p_star: Vec<C64>,
    /// `E_r = Theta^+ + i Theta^-` without the frame, for diagnostics.
    pub e_plain: Vec<C64>,
    pub e_plain_sharp: Vec<C64>,
}

impl KreinState {
    /// `theta_r = E~^# / E~`, inner in the upper half-plane.
    pub fn theta(&self, k: usize) -> C64 {
        self.e_sharp[k] / self.e[k]
    }

    /// `|E~(z)|^2 - |E~^#(z)|^2`, positive for `Im z > 0`.
    pub fn hermite_biehler_gap(&self, k: usize) -> f64 {
        self.e[k].norm_sqr() - self.e_sharp[k].norm_sqr()
    }

    fn position(&self, z: C64) -> Option<usize> {
        self.z.iter().position(|&w| w == z)
    }

    pub fn p_star_at(&self, z: C64) -> Option<C64> {
        self.position(z).map(|k| self.p_star[k])
    }
}

pub fn krein_pair(frame: &TildeFrame, gamma: f64) -> KreinState {
    let n = frame.z.len();
    let mut st = KreinState {
        r: frame.r,
        gamma,
        z: frame.z.clone(),
        e: Vec::with_capacity(n),
        e_sharp: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        f_sharp: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        p_star: Vec::with_capacity(n),
        e_plain: Vec::with_capacity(n),
        e_plain_sharp: Vec::with_capacity(n),
    };
    for k in 0..n {
        let z = frame.z[k];
        let (tp, tm) = (frame.theta_plus[k], frame.theta_minus[k]);
        let (fp, fm) = (frame.phi_plus[k], frame.phi_minus[k]);
        let e = tp + I * tm;
        let es = tp - I * tm;
        let rot = (I * z * frame.r).exp();
        let phase = C64::from_polar(1.0, gamma);
        st.e.push(e);
        st.e_sharp.push(es);
        st.f.push(fp + I * fm);
        st.f_sharp.push(fp - I * fm);
        st.p_star.push(rot * phase * e);
        st.p.push(rot * phase.conj() * es);
        let m = &frame.m[k];
        st.e_plain.push(m[(0, 0)] + I * m[(1, 0)]);
        st.e_plain_sharp.push(m[(0, 0)] - I * m[(1, 0)]);
    }
    st
}

/// Krein states at every node of a Riccati profile, one transfer sweep per
/// point of `z`.
pub fn krein_sweep(h: &Hamiltonian, profile: &RiccatiProfile, z: &[C64]) -> Result<Vec<KreinState>> {
    let per_z: Vec<Vec<CMat>> = z
        .par_iter()
        .map(|&z| evolve_canonical(h, z, &profile.r, DEFAULT_TOL).map(|v| v.into_iter().map(|s| s.m).collect()))
        .collect::<Result<_>>()?;
    (0..profile.r.len())
        .map(|k| {
            let (i, re, gamma) = profile.at(k);
            let m = per_z.iter().map(|col| col[k]).collect();
            Ok(krein_pair(&tilde_frame(profile.r[k], m, z.to_vec(), i, re)?, gamma))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionCheck {
    pub z: C64,
    pub dr: f64,
    pub r: Vec<f64>,
    /// Central difference of `P~*` in `r`.
    pub lhs: Vec<C64>,
    pub rhs: Vec<C64>,
    /// `|lhs - rhs| / max(1, |P~*|)`.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Richardson estimate of the truncation error of the difference.
    pub truncation: f64,
    /// The residual is mostly difference truncation; refine `dr` to learn more.
    pub truncation_dominated: bool,
    /// At `z = i`: `|d/dr log P~*(i) + K'/2|` per node.
    pub log_residual: Option<Vec<f64>>,
}

/// Finite-difference check of the evolution equation of `P~*`, with `I'`,
/// `R'` and `K'` from the closed-form rates.
pub fn krein_evolution_check(h: &Hamiltonian, z: C64, r_grid: &[f64], dr: f64, max_depth: f64) -> Result<EvolutionCheck> {
    if !(dr > 0.0) || r_grid.iter().any(|&r| !(r - 2.0 * dr > 0.0)) {
        return Err(Error::InvalidInput("check points need r > 2 dr > 0".into()));
    }
    let mut nodes = vec![0.0];
    for &r in r_grid {
        nodes.extend([-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|o| r + o * dr));
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let profile = riccati_profile(h, &nodes, max_depth)?;
    let states = krein_sweep(h, &profile, &[z])?;
    let at = |r: f64| nodes.binary_search_by(|v| v.total_cmp(&r)).expect("node was inserted");
    let mut out = EvolutionCheck {
        z,
        dr,
        r: r_grid.to_vec(),
        lhs: vec![],
        rhs: vec![],
        residual: vec![],
        max_residual: 0.0,
        truncation: 0.0,
        truncation_dominated: false,
        log_residual: (z == I).then(Vec::new),
    };
    for &r in r_grid {
        let k = at(r);
        let ps = |o: f64| states[at(r + o * dr)].p_star[0];
        let d1 = (ps(1.0) - ps(-1.0)) / (2.0 * dr);
        let d2 = (ps(2.0) - ps(-2.0)) / (4.0 * dr);
        let (i, re, gamma) = profile.at(k);
        let [di, dre, dk, _] = entropy_rates(h.sample(r), i, re);
        let st = &states[k];
        let rhs = -0.5 * (z - I) * C64::from_polar(1.0, 2.0 * gamma) * C64::new(dre / i, di / i) * st.p[0] + 0.5 * I * z * dk * st.p_star[0];
        let scale = st.p_star[0].norm().max(1.0);
        let res = (d1 - rhs).norm() / scale;
        out.truncation = out.truncation.max((d2 - d1).norm() / 3.0 / scale);
        out.max_residual = out.max_residual.max(res);
        if let Some(lr) = out.log_residual.as_mut() {
            let lp = |o: f64| ps(o).re.ln();
            lr.push(((lp(1.0) - lp(-1.0)) / (2.0 * dr) + 0.5 * dk).abs());
        }
        out.lhs.push(d1);
        out.rhs.push(rhs);
        out.residual.push(res);
    }
    out.truncation_dominated = out.truncation >= 0.5 * out.max_residual && out.max_residual > 0.0;
    Ok(out)
}

/// `B_i(z) = (z - i) / (z + i)`.
pub fn blaschke_i(z: C64) -> C64 {
    (z - I) / (z + I)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurValue {
    pub r: f64,
    pub z: C64,
    /// `None` at `z = i`, where `B_i` vanishes.
    pub f: Option<C64>,
    pub f_tilde: C64,
}

/// Inverts `m_r = i I (1 + B_i f) / (1 - B_i f) + R`.
pub fn schur_value(r: f64, m: C64, i: f64, re: f64, z: C64) -> SchurValue {
    let w = m - re;
    let f_tilde = (w - I * i) / (w + I * i);
    let b = blaschke_i(z);
    SchurValue { r, z, f: (b.norm() > 0.0).then(|| f_tilde / b), f_tilde }
}

#[derive(Clone, Debug, Serialize)]
pub struct KhrushchevReport {
    pub r: f64,
    pub x: Vec<f64>,
    /// `|E~_r|^2 w`.
    pub lhs: Vec<f64>,
    /// `(1 - |f~|^2) / |1 - theta f~|^2`.
    pub rhs: Vec<f64>,
    /// `|lhs - rhs| / max(1, rhs)`, `NaN` at flagged nodes.
    pub residual: Vec<f64>,
    pub flagged: Vec<bool>,
    pub max_residual: f64,
    /// Largest `||theta| - 1|` seen before renormalization.
    pub theta_drift: f64,
    pub renormalized: usize,
}

/// Nodal check of `|E~_r|^2 w = (1 - |f~_r|^2) / |1 - theta_r f~_r|^2` on
/// the grid of `data`, with `m_r` on the real line from `eps`.
pub fn khrushchev_residual(h: &Hamiltonian, r: f64, data: &HerglotzData, eps: &EpsSchedule, max_depth: f64) -> Result<KhrushchevReport> {
    let (i, re) = herglotz_at_i(h, r, max_depth)?;
    let g = frame_matrix(i, re)?;
    let rows: Vec<Result<Option<(f64, f64, f64)>>> = data
        .grid
        .x
        .par_iter()
        .zip(&data.flagged)
        .zip(&data.w)
        .map(|((&x, &flag), &w)| {
            if flag {
                return Ok(None);
            }
            let Some(m_r) = boundary_weyl(h, r, x, eps, max_depth) else { return Ok(None) };
            let m = transfer_between(h, C64::new(x, 0.0), 0.0, r, DEFAULT_TOL)?;
            let tp = m[(0, 0)] * g[(0, 0)] + m[(1, 0)] * g[(0, 1)];
            let tm = m[(1, 0)] * g[(1, 1)];
            let (e, es) = (tp + I * tm, tp - I * tm);
            let mut theta = es / e;
            let drift = (theta.norm() - 1.0).abs();
            if drift > 1e-8 {
                theta /= theta.norm();
            }
            let ft = schur_value(r, m_r, i, re, C64::new(x, 0.0)).f_tilde;
            let rhs = (1.0 - ft.norm_sqr()) / (1.0 - theta * ft).norm_sqr();
            let lhs = e.norm_sqr() * w;
            Ok((rhs.is_finite() && lhs.is_finite()).then_some((lhs, rhs, drift)))
        })
        .collect();
    let n = data.grid.len();
    let mut rep = KhrushchevReport {
        r,
        x: data.grid.x.clone(),
        lhs: vec![f64::NAN; n],
        rhs: vec![f64::NAN; n],
        residual: vec![f64::NAN; n],
        flagged: vec![true; n],
        max_residual: 0.0,
        theta_drift: 0.0,
        renormalized: 0,
    };
    for (k, row) in rows.into_iter().enumerate() {
        if let Some((lhs, rhs, drift)) = row? {
            let res = (lhs - rhs).abs() / rhs.max(1.0);
            rep.lhs[k] = lhs;
            rep.rhs[k] = rhs;
            rep.residual[k] = res;
            rep.flagged[k] = false;
            rep.max_residual = rep.max_residual.max(res);
            rep.theta_drift = rep.theta_drift.max(drift);
            rep.renormalized += usize::from(drift > 1e-8);
        }
    }
    Ok(rep)
}

/// `int |log |E~_r|^{-2} - log w| dP` over the unflagged nodes of `data`
/// for every `r` of the grid.
pub fn convergence_metric(h: &Hamiltonian, data: &HerglotzData, r_grid: &[f64], max_depth: f64) -> Result<Vec<f64>> {
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid.first().is_some_and(|&r| r < 0.0) {
        return Err(Error::InvalidInput("r grid must be increasing and nonnegative".into()));
    }
    let frames: Vec<RMat> = r_grid
        .iter()
        .map(|&r| herglotz_at_i(h, r, max_depth).and_then(|(i, re)| frame_matrix(i, re)))
        .collect::<Result<_>>()?;
    let per_node: Vec<Option<Vec<f64>>> = data
        .grid
        .x
        .par_iter()
        .zip(&data.flagged)
        .zip(&data.w)
        .map(|((&x, &flag), &w)| {
            if flag {
                return Ok(None);
            }
            let lw = w.max(DENSITY_FLOOR).ln();
            let st = evolve_canonical(h, C64::new(x, 0.0), r_grid, DEFAULT_TOL)?;
            Ok(Some(
                st.iter()
                    .zip(&frames)
                    .map(|(s, g)| {
                        let e = (s.m[(0, 0)] * g[(0, 0)] + s.m[(1, 0)] * g[(0, 1)]) + I * (s.m[(1, 0)] * g[(1, 1)]);
                        (-e.norm_sqr().max(DENSITY_FLOOR).ln() - lw).abs()
                    })
                    .collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; r_grid.len()];
    for (vals, p) in per_node.iter().zip(&data.grid.weights) {
        if let Some(v) = vals {
            for (o, d) in out.iter_mut().zip(v) {
                *o += p * d;
            }
        }
    }
    Ok(out)
}

/// `k(z) = -(P*(z) conj P*(l) - P(z) conj P(l)) / (2 pi i (z - conj l))` with
/// `l = z_l` and `z = z_k` taken from the state.
pub fn reproducing_kernel(state: &KreinState, l: usize, k: usize) -> C64 {
    let (z, lam) = (state.z[k], state.z[l]);
    let num = state.p_star[k] * state.p_star[l].conj() - state.p[k] * state.p[l].conj();
    -num / (2.0 * PI * I * (z - lam.conj()))
}

/// Distance between the kernel numerators built from `E~_r` and from `E_r`.
pub fn kernel_identity_gap(state: &KreinState, l: usize, k: usize) -> f64 {
    let tilde = state.e[k] * state.e[l].conj() - state.e_sharp[k] * state.e_sharp[l].conj();
    let plain = state.e_plain[k] * state.e_plain[l].conj() - state.e_plain_sharp[k] * state.e_plain_sharp[l].conj();
    (tilde - plain).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelBound {
    pub r: f64,
    pub lambda: C64,
    /// `|P~*(l)|^2 - |P~(l)|^2`.
    pub norm: f64,
    /// `|D(l)|^{-2}`.
    pub bound: f64,
    pub holds: bool,
}

pub const KERNEL_SLACK: f64 = 1e-8;

pub fn kernel_bound_check(state: &KreinState, l: usize, d_mu: C64) -> Result<KernelBound> {
    let lambda = state.z[l];
    if !(lambda.im > 0.0) {
        return Err(Error::InvalidInput("kernel bound needs Im lambda > 0".into()));
    }
    let norm = state.p_star[l].norm_sqr() - state.p[l].norm_sqr();
    let bound = 1.0 / d_mu.norm_sqr();
    Ok(KernelBound { r: state.r, lambda, norm, bound, holds: norm <= bound + KERNEL_SLACK })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::weyl::{bs_truncate, weyl_value, SpectralGrid};

    fn zs() -> Vec<C64> {
        vec![I, C64::new(1.0, 1.0), C64::new(-0.7, 0.5), C64::new(2.0, 2.0), C64::new(0.3, 0.0)]
    }

    #[test]
    fn free_pair() {
        let h = Hamiltonian::free();
        let r = 1.7;
        let st = krein_pair(&frame_at(&h, r, &zs(), 1.0, 0.0).unwrap(), 0.0);
        for (k, &z) in st.z.iter().enumerate() {
            assert!((st.e[k] - (-I * r * z).exp()).norm() < 1e-12);
            assert!((st.p_star[k] - 1.0).norm() < 1e-12);
            assert!((st.p[k] - (2.0 * I * r * z).exp()).norm() < 1e-12);
        }
        let k = reproducing_kernel(&st, 0, 0);
        assert!((k - (1.0 - (-4.0 * r).exp()) / (4.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn pair_at_origin() {
        let h = families::hamiltonian(&families::bump());
        let (i, re) = herglotz_at_i(&h, 0.0, 40.0).unwrap();
        let st = krein_pair(&frame_at(&h, 0.0, &zs(), i, re).unwrap(), 0.0);
        for k in 0..st.z.len() {
            assert!((st.p_star[k] - 1.0 / i.sqrt()).norm() < 1e-14);
            assert!((st.p[k] - 1.0 / i.sqrt()).norm() < 1e-14);
        }
    }

    #[test]
    fn wronskian_and_positivity_on_bump() {
        let h = families::hamiltonian(&families::bump());
        let (i, re) = herglotz_at_i(&h, 2.0, 40.0).unwrap();
        let mut z: Vec<C64> = SpectralGrid::tan(64).x.iter().map(|&x| C64::new(x.clamp(-50.0, 50.0), 0.0)).collect();
        for y in [0.5, 1.0, 2.0] {
            z.extend((-8..=8).map(|k| C64::new(0.5 * k as f64, y)));
        }
        let fr = frame_at(&h, 2.0, &z, i, re).unwrap();
        let st = krein_pair(&fr, 0.0);
        for k in 0..z.len() {
            assert!((fr.wronskian(k) - 1.0).norm() < 1e-8, "z = {}", z[k]);
            if z[k].im == 0.0 {
                assert!(fr.theta_plus[k].im.abs() < 1e-12 * (1.0 + fr.theta_plus[k].norm()));
                assert!((st.e[k].norm() - st.e_sharp[k].norm()).abs() < 1e-10 * st.e[k].norm());
            } else {
                assert!(st.hermite_biehler_gap(k) > 0.0);
            }
            for l in 0..z.len() {
                let scale = (st.e[k].norm() * st.e[l].norm()).max(1.0);
                assert!(kernel_identity_gap(&st, l, k) < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn schur_basics() {
        assert_eq!(schur_value(1.0, I, 1.0, 0.0, C64::new(0.4, 0.3)).f_tilde, C64::new(0.0, 0.0));
        let sv = schur_value(0.0, C64::new(0.3, 2.0), 2.0, 0.3, I);
        assert!(sv.f_tilde.norm() < 1e-15 && sv.f.is_none());
        let h = families::hamiltonian(&families::bump());
        let (i, re) = herglotz_at_i(&h, 1.0, 40.0).unwrap();
        for z in [C64::new(0.5, 0.2), C64::new(-3.0, 1.0), C64::new(1.5, 0.0)] {
            let m = crate::weyl::weyl_closed(&h, 1.0, z).unwrap().unwrap();
            assert!(schur_value(1.0, m, i, re, z).f_tilde.norm() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn khrushchev_on_truncated_model() {
        let h = families::hamiltonian(&families::gbump());
        let bs = bs_truncate(&h, 1.0, 40.0).unwrap();
        let hb = bs.hamiltonian(&h).unwrap();
        let grid = SpectralGrid::tan(48);
        let data = crate::weyl::boundary_density(&hb, 0.0, &grid, &EpsSchedule::Boundary, 40.0).unwrap();
        let rep = khrushchev_residual(&hb, 1.0, &data, &EpsSchedule::Boundary, 40.0).unwrap();
        assert!(rep.flagged.iter().all(|f| !f));
        assert!(rep.max_residual < 1e-5, "{}", rep.max_residual);
        let free = boundary_density_free();
        let rep = khrushchev_residual(&Hamiltonian::free(), 2.0, &free, &EpsSchedule::Boundary, 40.0).unwrap();
        assert!(rep.lhs.iter().chain(&rep.rhs).all(|v| (v - 1.0).abs() < 1e-10));
    }

    fn boundary_density_free() -> HerglotzData {
        crate::weyl::boundary_density(&Hamiltonian::free(), 0.0, &SpectralGrid::tan(16), &EpsSchedule::Boundary, 20.0).unwrap()
    }

    #[test]
    fn free_metric_and_evolution() {
        let h = Hamiltonian::free();
        let m = convergence_metric(&h, &boundary_density_free(), &[0.0, 1.0, 3.0], 20.0).unwrap();
        assert!(m.iter().all(|v| v.abs() < 1e-12));
        let ev = krein_evolution_check(&h, C64::new(1.0, 1.0), &[0.5, 1.0], 1e-3, 20.0).unwrap();
        assert!(ev.max_residual < 1e-12);
    }

    #[test]
    fn sweep_matches_direct_frames() {
        let h = families::hamiltonian(&families::gbump());
        let p = riccati_profile(&h, &[0.0, 0.5, 1.3, 2.5], 40.0).unwrap();
        let z = [I, C64::new(1.0, 0.5)];
        let sweep = krein_sweep(&h, &p, &z).unwrap();
        for (k, st) in sweep.iter().enumerate() {
            let (i, re, _) = p.at(k);
            let direct = krein_pair(&frame_at(&h, p.r[k], &z, i, re).unwrap(), p.gamma[k]);
            for j in 0..z.len() {
                assert!((st.p_star[j] - direct.p_star[j]).norm() < 1e-10);
            }
            let m = weyl_value(&h, p.r[k], I, 40.0).unwrap();
            assert!((m - C64::new(re, i)).norm() < 1e-10);
        }
        assert!(sweep.iter().all(|s| s.p_star[0].im.abs() < 1e-12 && s.p_star[0].re > 0.0));
    }
}
