//! Weyl functions of shifted Hamiltonians, boundary densities and the
//! Bernstein-Szego truncation.
//!
//! Two evaluation routes exist. The generic one truncates the system at a
//! finite depth with the boundary parameters `omega = 0` and `omega = inf`
//! and reports their spread as the radius. When the coefficients are known
//! to be constant past some point, the Weyl solution there is the decaying
//! eigenvector of the constant system and the value is exact, including on
//! the real line.

use rayon::prelude::*;

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::mat::{expm_traceless_real, j_real, CMat, RMat, C64, I};
use crate::model::{Hamiltonian, Tail};
use crate::quad;
use crate::transfer::{transfer_between, DEFAULT_TOL};

pub const DENSITY_FLOOR: f64 = 1e-300;
pub const DEFAULT_EPS: [f64; 2] = [1e-2, 5e-3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    OmegaSpread,
    ExactTail,
}

#[derive(Clone, Copy, Debug)]
pub struct WeylEstimate {
    pub z: C64,
    pub r: f64,
    pub depth: f64,
    pub value: C64,
    pub radius: f64,
    pub closure: Closure,
}

/// Ratio `(Phi^- u^+ - Phi^+ u^-) / (Theta^- u^+ - Theta^+ u^-)`: the Weyl
/// value when the solution `Phi - m Theta` is parallel to `u` at the end.
pub fn weyl_from_transfer(m: &CMat, u: [C64; 2]) -> C64 {
    let num = m[(1, 1)] * u[0] - m[(0, 1)] * u[1];
    let den = m[(1, 0)] * u[0] - m[(0, 0)] * u[1];
    num / den
}

/// `m_r = (Phi^+ + m_s Phi^-) / (Theta^+ + m_s Theta^-)` for the transfer
/// matrix of `[r, s]`.
pub fn mobius(m: &CMat, ms: C64) -> C64 {
    (m[(0, 1)] + ms * m[(1, 1)]) / (m[(0, 0)] + ms * m[(1, 0)])
}

fn dirac_kappa(q2sum: f64, z: C64) -> C64 {
    if z.im > 0.0 {
        return (C64::new(q2sum, 0.0) - z * z).sqrt();
    }
    let x = z.re;
    let d = q2sum - x * x;
    if d >= 0.0 {
        C64::new(d.sqrt(), 0.0)
    } else {
        C64::new(0.0, -x.signum() * (-d).sqrt())
    }
}

/// Canonical-coordinate direction of the decaying solution at time `at`.
pub fn tail_vector(tail: &Tail, at: f64, z: C64) -> [C64; 2] {
    match tail {
        Tail::Canonical { h: [c1, c, c2], .. } => {
            let d = (c1 * c2 - c * c).max(0.0).sqrt();
            [-(C64::new(*c, d)), C64::new(*c1, 0.0)]
        }
        Tail::Dirac { start, q1, q2, n0 } => {
            let kappa = dirac_kappa(q1 * q1 + q2 * q2, z);
            let row1 = [q1 + z, C64::new(*q2, 0.0) - kappa];
            let row2 = [C64::new(*q2, 0.0) + kappa, z - q1];
            let v = if row1[0].norm() + row1[1].norm() >= row2[0].norm() + row2[1].norm() { row1 } else { row2 };
            let gen: RMat = j_real() * RMat::new(*q1, *q2, *q2, -q1);
            let n_at = expm_traceless_real(&(gen * (at - start).max(0.0))) * n0;
            let inv = n_at.try_inverse().expect("gauge matrices have unit determinant");
            [inv[(0, 0)] * v[0] + inv[(0, 1)] * v[1], inv[(1, 0)] * v[0] + inv[(1, 1)] * v[1]]
        }
    }
}

/// Generic route: `omega in {0, inf}` at `t = depth` for `H(. + r)`.
pub fn weyl_function(h: &Hamiltonian, r: f64, z: C64, depth: f64) -> Result<WeylEstimate> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput("weyl_function needs Im z > 0".into()));
    }
    if !(depth > r) {
        return Err(Error::InvalidInput(format!("depth {depth} must exceed r = {r}")));
    }
    let mut d = depth;
    for _ in 0..4 {
        let m = transfer_between(h, z, r, d, DEFAULT_TOL)?;
        let (tm, tp) = (m[(1, 0)], m[(0, 0)]);
        if tm.norm() > 1e-14 * m[(1, 1)].norm() && tp.norm() > 1e-14 * m[(0, 1)].norm() {
            let at_zero = m[(1, 1)] / tm;
            let at_inf = m[(0, 1)] / tp;
            return Ok(WeylEstimate {
                z,
                r,
                depth: d,
                value: 0.5 * (at_zero + at_inf),
                radius: (at_zero - at_inf).norm(),
                closure: Closure::OmegaSpread,
            });
        }
        d += 1e-3 * (1.0 + d - r);
    }
    Err(Error::Denominator { depth })
}

/// Exact value from the constant tail. Valid for `Im z >= 0`.
pub fn weyl_closed(h: &Hamiltonian, r: f64, z: C64) -> Option<Result<C64>> {
    let tail = h.tail()?;
    let end = tail.start().max(r);
    Some(transfer_between(h, z, r, end, DEFAULT_TOL).map(|m| weyl_from_transfer(&m, tail_vector(&tail, end, z))))
}

/// Best available `m_r(z)`: exact tail closure, else the generic route with
/// the depth doubled until the radius is below `1e-12 |m|` or `max_depth`
/// is reached.
pub fn weyl_estimate(h: &Hamiltonian, r: f64, z: C64, max_depth: f64) -> Result<WeylEstimate> {
    if let Some(v) = weyl_closed(h, r, z) {
        return Ok(WeylEstimate { z, r, depth: h.tail().map_or(r, |t| t.start().max(r)), value: v?, radius: 0.0, closure: Closure::ExactTail });
    }
    let mut depth = r + 10.0_f64.min(max_depth - r);
    loop {
        let est = weyl_function(h, r, z, depth)?;
        if est.radius <= 1e-12 * est.value.norm() {
            return Ok(est);
        }
        if depth >= max_depth {
            return Err(Error::Uncertain { radius: est.radius, im: est.value.im, required_depth: r + 2.0 * (depth - r) });
        }
        depth = (r + 2.0 * (depth - r)).min(max_depth);
    }
}

pub fn weyl_value(h: &Hamiltonian, r: f64, z: C64, max_depth: f64) -> Result<C64> {
    Ok(weyl_estimate(h, r, z, max_depth)?.value)
}

/// `(Im m_r(i), Re m_r(i))`.
pub fn herglotz_at_i(h: &Hamiltonian, r: f64, depth: f64) -> Result<(f64, f64)> {
    let est = weyl_estimate(h, r, I, depth)?;
    if est.value.im <= 0.0 {
        return Err(Error::Positivity { r, value: est.value.im });
    }
    Ok((est.value.im, est.value.re))
}

/// `m_r(z)` on an increasing `r` grid by a backward sweep of Mobius maps.
pub fn weyl_profile(h: &Hamiltonian, z: C64, r_grid: &[f64], max_depth: f64) -> Result<Vec<C64>> {
    let n = r_grid.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    out[n - 1] = weyl_value(h, r_grid[n - 1], z, max_depth)?;
    for k in (0..n - 1).rev() {
        let m = transfer_between(h, z, r_grid[k], r_grid[k + 1], DEFAULT_TOL)?;
        out[k] = mobius(&m, out[k + 1]);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum EpsSchedule {
    /// Evaluate on the real axis through the exact tail closure.
    Boundary,
    /// Values at `x + i eps` extrapolated to `eps = 0`.
    Richardson(Vec<f64>),
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule::Richardson(DEFAULT_EPS.to_vec())
    }
}

impl EpsSchedule {
    /// `Boundary` when the Hamiltonian has a known constant tail.
    pub fn preferred(h: &Hamiltonian) -> Self {
        if h.tail().is_some() {
            EpsSchedule::Boundary
        } else {
            EpsSchedule::default()
        }
    }
}

/// Nodes on the real line with weights `p_k` for the probability measure
/// `dx / (pi (1 + x^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGrid {
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    /// Short description, e.g. `tan:256`.
    pub label: String,
}

impl SpectralGrid {
    /// `x = tan(theta_k)` at the midpoints of `n` equal cells in `theta`.
    pub fn tan(n: usize) -> Self {
        let x = (0..n).map(|k| (-FRAC_PI_2 + (k as f64 + 0.5) * PI / n as f64).tan()).collect();
        SpectralGrid { x, weights: vec![1.0 / n as f64; n], label: format!("tan:{n}") }
    }

    /// Kronrod panels no wider than `width` on `[-inner, inner]`, then `outer`
    /// equal `theta` cells per side up to `|x| = reach`, and one last cell
    /// per side out to infinity.
    ///
    /// Log-densities of compactly supported models oscillate with a period
    /// set by the support, so the inner part has to resolve them in `x`;
    /// the plain tangent grid does not.
    pub fn hybrid(inner: f64, width: f64, outer: usize, reach: f64) -> Result<Self> {
        if !(inner > 0.0 && width > 0.0 && reach > inner && outer > 0) || !reach.is_finite() {
            return Err(Error::InvalidInput("hybrid grid needs 0 < inner < reach, width > 0, outer > 0".into()));
        }
        let panels = (2.0 * inner / width).ceil() as usize;
        let mut nodes: Vec<(f64, f64)> = quad::composite_nodes(-inner, inner, panels)
            .into_iter()
            .map(|(x, w)| (x, w / (PI * (1.0 + x * x))))
            .collect();
        let (lo, hi) = (inner.atan(), reach.atan());
        let dt = (hi - lo) / outer as f64;
        let mut push = |theta: f64, p: f64| {
            nodes.push((theta.tan(), p));
            nodes.push((-theta.tan(), p));
        };
        for k in 0..outer {
            push(lo + (k as f64 + 0.5) * dt, dt / PI);
        }
        push(0.5 * (hi + FRAC_PI_2), (FRAC_PI_2 - hi) / PI);
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, weights) = nodes.into_iter().unzip();
        Ok(SpectralGrid { x, weights, label: format!("hybrid:{inner}:{width}:{outer}:{reach}") })
    }

    /// The grid used for logarithmic integrals unless configured otherwise.
    pub fn log_default() -> Self {
        Self::hybrid(30.0, 0.5, 128, 1000.0).expect("valid constants")
    }

    /// Uniform tangent grid, the only layout the FFT boundary values accept.
    pub fn is_uniform_tan(&self) -> bool {
        self.label.starts_with("tan:")
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `pi (1 + x^2) p_k`, the Lebesgue weight of node `k`.
    pub fn dx(&self, k: usize) -> f64 {
        PI * (1.0 + self.x[k] * self.x[k]) * self.weights[k]
    }
}

#[derive(Clone, Debug)]
pub struct HerglotzData {
    pub grid: SpectralGrid,
    pub w: Vec<f64>,
    pub flagged: Vec<bool>,
    pub a: f64,
    pub b: f64,
}

impl HerglotzData {
    pub fn from_samples(grid: SpectralGrid, w: Vec<f64>) -> Self {
        let flagged = w.iter().map(|v| !v.is_finite()).collect();
        HerglotzData { grid, w, flagged, a: 0.0, b: 0.0 }
    }
}

fn neville_at_zero(eps: &[f64], vals: &[f64]) -> f64 {
    let mut p = vals.to_vec();
    let n = p.len();
    for k in 1..n {
        for j in 0..n - k {
            p[j] = (eps[j + k] * p[j] - eps[j] * p[j + 1]) / (eps[j + k] - eps[j]);
        }
    }
    p[0]
}

fn density_at(h: &Hamiltonian, r: f64, x: f64, eps: &EpsSchedule, max_depth: f64) -> (f64, bool) {
    match eps {
        EpsSchedule::Boundary => match weyl_closed(h, r, C64::new(x, 0.0)) {
            Some(Ok(m)) if m.im.is_finite() => (m.im.max(0.0), false),
            _ => (f64::NAN, true),
        },
        EpsSchedule::Richardson(list) => {
            let mut vals = Vec::with_capacity(list.len());
            for &e in list {
                match weyl_value(h, r, C64::new(x, e), max_depth) {
                    Ok(m) if m.im.is_finite() => vals.push(m.im),
                    _ => return (f64::NAN, true),
                }
            }
            let w = neville_at_zero(list, &vals);
            let last = *vals.last().unwrap();
            let flag = !w.is_finite() || (w - last).abs() > 0.1 * w.abs() + 1e-12;
            (w.max(0.0), flag)
        }
    }
}

fn neville_complex(eps: &[f64], vals: &[C64]) -> C64 {
    let mut p = vals.to_vec();
    let n = p.len();
    for k in 1..n {
        for j in 0..n - k {
            p[j] = (p[j] * eps[j + k] - p[j + 1] * eps[j]) / (eps[j + k] - eps[j]);
        }
    }
    p[0]
}

/// `m_r(x + i0)`, or `None` when the evaluation fails or is not finite.
pub fn boundary_weyl(h: &Hamiltonian, r: f64, x: f64, eps: &EpsSchedule, max_depth: f64) -> Option<C64> {
    let m = match eps {
        EpsSchedule::Boundary => weyl_closed(h, r, C64::new(x, 0.0))?.ok()?,
        EpsSchedule::Richardson(list) => {
            let vals: Option<Vec<C64>> = list.iter().map(|&e| weyl_value(h, r, C64::new(x, e), max_depth).ok()).collect();
            neville_complex(list, &vals?)
        }
    };
    (m.re.is_finite() && m.im.is_finite()).then_some(m)
}

/// `w_r(x) = Im m_r(x + i0)` on the grid.
pub fn boundary_density(h: &Hamiltonian, r: f64, grid: &SpectralGrid, eps: &EpsSchedule, max_depth: f64) -> Result<HerglotzData> {
    if let EpsSchedule::Richardson(list) = eps {
        if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("eps schedule must be positive and decreasing".into()));
        }
    }
    if matches!(eps, EpsSchedule::Boundary) && h.tail().is_none() {
        return Err(Error::InvalidInput("boundary evaluation needs a Hamiltonian with a known constant tail".into()));
    }
    let samples: Vec<(f64, bool)> = grid.x.par_iter().map(|&x| density_at(h, r, x, eps, max_depth)).collect();
    let (w, flagged): (Vec<f64>, Vec<bool>) = samples.into_iter().unzip();
    let (im, re) = herglotz_at_i(h, r, max_depth)?;
    let mass: f64 = w.iter().zip(&flagged).zip(&grid.weights).filter(|((_, f), _)| !**f).map(|((v, _), p)| v * p).sum();
    Ok(HerglotzData { grid: grid.clone(), w, flagged, a: re, b: (im - mass).max(0.0) })
}

/// Bernstein-Szego data at `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BSTruncation {
    pub r: f64,
    pub i: f64,
    pub re: f64,
    pub tail: [f64; 3],
}

impl BSTruncation {
    pub fn new(r: f64, i: f64, re: f64) -> Self {
        BSTruncation { r, i, re, tail: [1.0 / i, re / i, (i * i + re * re) / i] }
    }

    pub fn hamiltonian(&self, h: &Hamiltonian) -> Result<Hamiltonian> {
        h.truncated(self.r, self.tail)
    }
}

pub fn bs_truncate(h: &Hamiltonian, r: f64, depth: f64) -> Result<BSTruncation> {
    let est = weyl_estimate(h, r, I, depth)?;
    if est.value.im <= est.radius {
        return Err(Error::Uncertain { radius: est.radius, im: est.value.im, required_depth: r + 2.0 * (est.depth - r) });
    }
    Ok(BSTruncation::new(r, est.value.im, est.value.re))
}

/// `E~_r(z) = (Theta^+ + (R + iI) Theta^-) / sqrt(I)` from the transfer
/// matrix of `[0, r]` at `z`.
pub fn tilde_e(m: &CMat, i: f64, re: f64) -> C64 {
    (m[(0, 0)] + C64::new(re, i) * m[(1, 0)]) / i.sqrt()
}

/// `1 / |E~_r(x)|^2` from a transfer matrix at real `x`.
pub fn bs_density_from(m: &CMat, bs: &BSTruncation) -> f64 {
    1.0 / tilde_e(m, bs.i, bs.re).norm_sqr()
}

pub fn bs_density(h: &Hamiltonian, bs: &BSTruncation, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter()
        .map(|&x| transfer_between(h, C64::new(x, 0.0), 0.0, bs.r, DEFAULT_TOL).map(|m| bs_density_from(&m, bs)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PotentialSpec, Profile};

    fn direct_constant(c1: f64, c: f64, c2: f64) -> Hamiltonian {
        Hamiltonian::direct(move |_| [c1, c, c2], c == 0.0, false, vec![])
    }

    #[test]
    fn free_weyl_both_routes() {
        let e = weyl_function(&direct_constant(1.0, 0.0, 1.0), 0.0, I, 12.0).unwrap();
        assert!((e.value - I).norm() < 1e-9);
        assert!(e.radius < 1e-9);
        let v = weyl_value(&Hamiltonian::free(), 3.0, I, 20.0).unwrap();
        assert!((v - I).norm() < 1e-14);
    }

    #[test]
    fn appendix_constant_values() {
        let v = weyl_value(&Hamiltonian::constant(0.5, 0.0, 2.0).unwrap(), 0.0, I, 20.0).unwrap();
        assert!((v - 2.0 * I).norm() < 1e-14);
        let e = weyl_function(&direct_constant(1.0, 0.5, 1.0), 0.0, I, 20.0).unwrap();
        let want = C64::new(0.5, 3f64.sqrt() / 2.0);
        assert!((e.value - want).norm() <= e.radius + 1e-8);
    }

    #[test]
    fn radius_shrinks_and_disks_nest() {
        let spec = PotentialSpec::OffDiagonal { params: Profile::Bump { amplitude: 0.8, start: 0.0, end: 2.0 } };
        let h = Hamiltonian::from_potential(&spec).unwrap();
        let hd = Hamiltonian::direct(move |t| h.sample(t), true, true, vec![]);
        let z = C64::new(0.7, 0.5);
        let mut prev: Option<WeylEstimate> = None;
        for depth in [2.0, 4.0, 8.0, 16.0] {
            let e = weyl_function(&hd, 0.0, z, depth).unwrap();
            assert!(e.value.im > 0.0);
            if let Some(p) = prev {
                assert!(e.radius <= p.radius);
                assert!((e.value - p.value).norm() <= p.radius);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn dirac_tail_matches_generic_route() {
        let spec = PotentialSpec::OffDiagonal { params: Profile::Constant { value: 0.5 } };
        let h = Hamiltonian::from_potential(&spec).unwrap();
        let hd = Hamiltonian::direct({ let h = h.clone(); move |t| h.sample(t) }, true, true, vec![]);
        for z in [I, C64::new(1.0, 1.0), C64::new(-0.3, 0.8)] {
            for r in [0.0, 1.5] {
                let exact = weyl_value(&h, r, z, 40.0).unwrap();
                let e = weyl_function(&hd, r, z, r + 30.0).unwrap();
                assert!((exact - e.value).norm() <= e.radius + 1e-9, "z={z} r={r}");
            }
        }
    }

    #[test]
    fn scaling_of_constant_potential() {
        let spec = PotentialSpec::OffDiagonal { params: Profile::Constant { value: 0.5 } };
        let h = Hamiltonian::from_potential(&spec).unwrap();
        let m0 = weyl_value(&h, 0.0, I, 20.0).unwrap();
        let m2 = weyl_value(&h, 2.0, I, 20.0).unwrap();
        assert!((m2 - m0 * 2f64.exp()).norm() < 1e-12 * m2.norm());
    }

    #[test]
    fn densities() {
        let grid = SpectralGrid::tan(32);
        let free = boundary_density(&Hamiltonian::free(), 0.0, &grid, &EpsSchedule::default(), 20.0).unwrap();
        assert!(free.w.iter().all(|w| (w - 1.0).abs() < 1e-6));
        let c = Hamiltonian::constant(0.5, 0.0, 2.0).unwrap();
        let d = boundary_density(&c, 0.0, &grid, &EpsSchedule::Boundary, 20.0).unwrap();
        assert!(d.w.iter().all(|w| (w - 2.0).abs() < 1e-13));
        assert!(d.b.abs() < 1e-12);
    }

    #[test]
    fn bs_density_free_and_origin() {
        let xs = SpectralGrid::tan(16).x;
        let bs = BSTruncation::new(2.5, 1.0, 0.0);
        let w = bs_density(&Hamiltonian::free(), &bs, &xs).unwrap();
        assert!(w.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let spec = PotentialSpec::OffDiagonal { params: Profile::Bump { amplitude: 0.8, start: 0.0, end: 2.0 } };
        let h = Hamiltonian::from_potential(&spec).unwrap();
        let b0 = bs_truncate(&h, 0.0, 20.0).unwrap();
        let w = bs_density(&h, &b0, &xs).unwrap();
        assert!(w.iter().all(|v| (v - b0.i).abs() < 1e-15));
    }
}
