//! Szego-class criteria, logarithmic integrals, the Szego function and the
//! entropy profile `K(r) = log I(r) - J(r)`.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{C64, I};
use crate::model::{eta_grid, GaugePath, Hamiltonian, PotentialSpec};
use crate::quad;
use crate::transfer::{transfer_between, DEFAULT_TOL};
use crate::weyl::{
    boundary_density, bs_density, herglotz_at_i, mobius, tilde_e, weyl_estimate, BSTruncation, EpsSchedule, HerglotzData,
    SpectralGrid, DENSITY_FLOOR,
};

/// Growth rate of the partial sums, per block, above which a report is
/// labelled divergent.
pub const DEFAULT_SLOPE: f64 = 1e-3;

/// Exponents beyond this are reported as overflow.
const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergentAtHorizon,
    DivergentTrend,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzegoReport {
    /// Left end of each block: `n`, or `eta_n` for a Hamiltonian.
    pub blocks: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Terms whose block integrals overflowed.
    pub flagged: Vec<bool>,
    /// Mean increase of the partial sums per block over the last half.
    pub slope: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl SzegoReport {
    pub fn from_terms(blocks: Vec<f64>, terms: Vec<f64>, flagged: Vec<bool>, slope_threshold: f64) -> Self {
        let mut partial_sums = Vec::with_capacity(terms.len());
        let mut acc = 0.0;
        for t in &terms {
            acc += t;
            partial_sums.push(acc);
        }
        let n = terms.len();
        let slope = if n >= 2 {
            let mid = n / 2;
            let start = if mid == 0 { 0.0 } else { partial_sums[mid - 1] };
            (partial_sums[n - 1] - start) / (n - mid) as f64
        } else {
            terms.first().copied().unwrap_or(0.0)
        };
        let verdict = if flagged.iter().any(|f| *f) || !(slope <= slope_threshold) {
            Verdict::DivergentTrend
        } else {
            Verdict::ConvergentAtHorizon
        };
        SzegoReport { blocks, terms, partial_sums, flagged, slope, verdict, note: None }
    }

    pub fn inapplicable(reason: String) -> Self {
        SzegoReport {
            blocks: vec![],
            terms: vec![],
            partial_sums: vec![],
            flagged: vec![],
            slope: 0.0,
            verdict: Verdict::Inapplicable,
            note: Some(reason),
        }
    }
}

fn off_diagonal_primitive(q: &PotentialSpec) -> Result<GaugePath> {
    q.validate()?;
    if !q.q1_vanishes() {
        return Err(Error::InvalidInput("criterion needs an off-diagonal potential (q1 = 0)".into()));
    }
    Ok(GaugePath::new(q))
}

fn primitive(gauge: &GaugePath, t: f64) -> f64 {
    gauge.g(t).expect("off-diagonal potentials have a scalar primitive")
}

/// `int_n^{n+2} g_n * int_n^{n+2} 1/g_n - 4` with `g_n = exp(2 int_n^t q)`.
pub fn criterion_potential(q: &PotentialSpec, n_blocks: usize, slope_threshold: f64) -> Result<SzegoReport> {
    let gauge = off_diagonal_primitive(q)?;
    let breaks = q.breakpoints();
    let mut terms = Vec::with_capacity(n_blocks);
    let mut flagged = Vec::with_capacity(n_blocks);
    for n in 0..n_blocks {
        let (a, b) = (n as f64, n as f64 + 2.0);
        let base = primitive(&gauge, a);
        let mut overflow = false;
        let mut exp_of = |sign: f64| {
            let f = |t: f64| {
                let e = sign * 2.0 * (primitive(&gauge, t) - base);
                if e > EXP_LIMIT {
                    overflow = true;
                }
                e.min(EXP_LIMIT).exp()
            };
            quad::integrate_pieces(f, a, b, &breaks, 1e-15, 1e-14)
        };
        let up = exp_of(1.0);
        let down = exp_of(-1.0);
        if overflow {
            terms.push(f64::INFINITY);
        } else {
            terms.push(up * down - 4.0);
        }
        flagged.push(overflow);
    }
    Ok(SzegoReport::from_terms((0..n_blocks).map(|n| n as f64).collect(), terms, flagged, slope_threshold))
}

/// `int h1 * int h2 - 4` over the blocks `[eta_n, eta_{n+2}]` of the clock.
/// Inapplicable when `sqrt(det H)` is integrable up to `horizon`.
pub fn criterion_hamiltonian(h: &Hamiltonian, n_blocks: usize, horizon: f64, slope_threshold: f64) -> Result<SzegoReport> {
    let eta = match eta_grid(h, n_blocks + 1, horizon) {
        Ok(e) => e,
        Err(Error::Inapplicable(why)) => return Ok(SzegoReport::inapplicable(why)),
        Err(e) => return Err(e),
    };
    let breaks = h.breakpoints();
    let mut terms = Vec::with_capacity(n_blocks);
    for n in 0..n_blocks {
        let (a, b) = (eta[n], eta[n + 2]);
        let h1 = quad::integrate_pieces(|t| h.sample(t)[0], a, b, &breaks, 1e-15, 1e-14);
        let h2 = quad::integrate_pieces(|t| h.sample(t)[2], a, b, &breaks, 1e-15, 1e-14);
        terms.push(h1 * h2 - 4.0);
    }
    let flagged = terms.iter().map(|t: &f64| !t.is_finite()).collect();
    Ok(SzegoReport::from_terms(eta[..n_blocks].to_vec(), terms, flagged, slope_threshold))
}

/// Samples per unit block in `criterion_maximal` before local refinement.
const MAX_SAMPLES: usize = 1024;

/// Terms `max_{n <= t <= n+1} (int_n^t q)^2`.
pub fn criterion_maximal(q: &PotentialSpec, n_max: usize, slope_threshold: f64) -> Result<SzegoReport> {
    let gauge = off_diagonal_primitive(q)?;
    let mut terms = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let a = n as f64;
        let base = primitive(&gauge, a);
        let f = |t: f64| (primitive(&gauge, t) - base).powi(2);
        let dt = 1.0 / MAX_SAMPLES as f64;
        let (mut best_t, mut best) = (a, 0.0);
        for k in 0..=MAX_SAMPLES {
            let t = a + k as f64 * dt;
            let v = f(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        // golden-section polish around the best sample
        let (mut lo, mut hi) = ((best_t - dt).max(a), (best_t + dt).min(a + 1.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = hi - g * (hi - lo);
            let d = lo + g * (hi - lo);
            if f(c) > f(d) {
                hi = d;
            } else {
                lo = c;
            }
        }
        terms.push(best.max(f(0.5 * (lo + hi))));
    }
    let flagged = vec![false; n_max];
    Ok(SzegoReport::from_terms((0..n_max).map(|n| n as f64).collect(), terms, flagged, slope_threshold))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogIntegral {
    /// `int log w dP` over the unflagged nodes.
    pub value: f64,
    /// Probability mass of nodes where `w` was below the floor.
    pub clipped_mass: f64,
    /// Probability mass of flagged nodes left out.
    pub excluded_mass: f64,
}

/// `J = (1/pi) int log w(x) / (1 + x^2) dx` by the grid weights.
pub fn log_integral(data: &HerglotzData) -> LogIntegral {
    let mut out = LogIntegral { value: 0.0, clipped_mass: 0.0, excluded_mass: 0.0 };
    for ((w, f), p) in data.w.iter().zip(&data.flagged).zip(&data.grid.weights) {
        if *f {
            out.excluded_mass += p;
            continue;
        }
        if *w < DENSITY_FLOOR {
            out.clipped_mass += p;
        }
        out.value += p * w.max(DENSITY_FLOOR).ln();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SzegoFunctionEval {
    pub z: C64,
    pub value: C64,
    pub grid: String,
}

/// `D(z) = exp(-i int log sqrt(w(x)) (1 + x z) / (x - z) dP(x))` for `Im z > 0`.
pub fn szego_function(data: &HerglotzData, z: C64) -> Result<SzegoFunctionEval> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput("the Szego function is evaluated in the upper half-plane".into()));
    }
    let mut s = C64::new(0.0, 0.0);
    for ((&x, w), (f, p)) in data.grid.x.iter().zip(&data.w).zip(data.flagged.iter().zip(&data.grid.weights)) {
        if *f {
            continue;
        }
        let u = 0.5 * w.max(DENSITY_FLOOR).ln();
        s += *p * u * (1.0 + x * z) / (x - z);
    }
    Ok(SzegoFunctionEval { z, value: (-I * s).exp(), grid: data.grid.label.clone() })
}

/// Boundary values `D(x_k)` on a uniform tangent grid: modulus `sqrt(w)`,
/// phase the conjugate function of `log sqrt(w)` on the circle, by FFT.
pub fn szego_boundary(data: &HerglotzData) -> Result<Vec<C64>> {
    if !data.grid.is_uniform_tan() {
        return Err(Error::InvalidInput("boundary Szego values need a uniform tangent grid".into()));
    }
    let n = data.w.len();
    let mut u: Vec<f64> = data.w.iter().map(|w| 0.5 * w.max(DENSITY_FLOOR).ln()).collect();
    fill_flagged(&mut u, &data.flagged);
    let mut buf: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        // frequency of bin k, Nyquist removed
        if k == 0 || 2 * k == n {
            *c = C64::new(0.0, 0.0);
        } else if 2 * k < n {
            *c *= -I;
        } else {
            *c *= I;
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(u.iter().zip(&buf).map(|(&a, b)| C64::new(a, b.re / n as f64).exp()).collect())
}

/// Periodic linear fill of flagged samples from their unflagged neighbours.
fn fill_flagged(u: &mut [f64], flagged: &[bool]) {
    let n = u.len();
    let good: Vec<usize> = (0..n).filter(|&k| !flagged[k]).collect();
    if good.is_empty() || good.len() == n {
        return;
    }
    for k in 0..n {
        if !flagged[k] {
            continue;
        }
        let next = *good.iter().find(|&&g| g > k).unwrap_or(&(good[0] + n));
        let prev = good.iter().rev().find(|&&g| g < k).map_or(good[good.len() - 1] as isize - n as isize, |&g| g as isize);
        let (a, b) = (u[prev.rem_euclid(n as isize) as usize], u[next % n]);
        let s = (k as isize - prev) as f64 / (next as isize - prev) as f64;
        u[k] = a + s * (b - a);
    }
}

/// Values at `r = 0` shared by both entropy routes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyBootstrap {
    pub i0: f64,
    pub r0: f64,
    /// `J(0)` from the boundary density of the full model.
    pub j0: LogIntegral,
    pub k0: f64,
    pub grid: String,
    pub flagged_nodes: usize,
}

/// `K(0) = log I(0) - J(0)` from the full-model boundary density.
pub fn entropy_bootstrap(h: &Hamiltonian, grid: &SpectralGrid, eps: &EpsSchedule, max_depth: f64) -> Result<EntropyBootstrap> {
    let data = boundary_density(h, 0.0, grid, eps, max_depth)?;
    let (i0, r0) = herglotz_at_i(h, 0.0, max_depth)?;
    let j0 = log_integral(&data);
    Ok(EntropyBootstrap {
        i0,
        r0,
        j0,
        k0: i0.ln() - j0.value,
        grid: grid.label.clone(),
        flagged_nodes: data.flagged.iter().filter(|f| **f).count(),
    })
}

/// Right-hand sides `(I', R', K', gamma')` at `r`.
pub fn entropy_rates(hs: [f64; 3], i: f64, re: f64) -> [f64; 4] {
    let [h1, h, h2] = hs;
    let det = (h1 * h2 - h * h).max(0.0);
    let di = i * i * h1 - h2 + 2.0 * re * h - re * re * h1;
    let dr = i * (2.0 * re * h1 - 2.0 * h);
    let dk = 2.0 * det.sqrt() - i * h1 - h2 / i + 2.0 * re * h / i - re * re * h1 / i;
    [di, dr, dk, re * h1 - h]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyProfile {
    pub r: Vec<f64>,
    pub i: Vec<f64>,
    pub re: Vec<f64>,
    pub j: Vec<f64>,
    pub k: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Distance between the integrated `R(0) + i I(0)` and the value from
    /// the Weyl module.
    pub initial_mismatch: f64,
    pub bootstrap: EntropyBootstrap,
}

/// Local error target for the entropy ODE, per unit of `r`.
pub const ENTROPY_TOL: f64 = 1e-13;

type State = [f64; 4];

/// Rate of `[I, R, L_K, L_gamma]` with respect to `s = top - r`.
fn backward_rate(h: &Hamiltonian, r: f64, y: &State) -> State {
    let [di, dr, dk, dg] = entropy_rates(h.sample(r), y[0], y[1]);
    [-di, -dr, dk, dg]
}

fn rk4_step(h: &Hamiltonian, r: f64, dr: f64, y: &State, clamp: &dyn Fn(f64) -> f64) -> State {
    let add = |y: &State, k: &State, c: f64| -> State { std::array::from_fn(|j| y[j] + c * k[j]) };
    let k1 = backward_rate(h, clamp(r), y);
    let k2 = backward_rate(h, clamp(r - 0.5 * dr), &add(y, &k1, 0.5 * dr));
    let k3 = backward_rate(h, clamp(r - 0.5 * dr), &add(y, &k2, 0.5 * dr));
    let k4 = backward_rate(h, clamp(r - dr), &add(y, &k3, dr));
    std::array::from_fn(|j| y[j] + dr / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
}

/// Runs `y` from `r = hi` down to `r = lo` where `H` is smooth.
///
/// Classical RK4 with step doubling and Richardson extrapolation. The
/// sampling point is kept strictly inside the cell so jumps at `lo` and
/// `hi` are seen from the correct side.
fn backward_smooth(h: &Hamiltonian, lo: f64, hi: f64, mut y: State) -> Result<State> {
    let pad = 1e-12 * (hi - lo);
    let clamp = move |r: f64| r.clamp(lo + pad, hi - pad);
    let mut r = hi;
    let mut dr = (hi - lo).min(0.05);
    let mut steps = 0usize;
    while r > lo {
        dr = dr.min(r - lo);
        let full = rk4_step(h, r, dr, &y, &clamp);
        let mid = rk4_step(h, r, 0.5 * dr, &y, &clamp);
        let half = rk4_step(h, r - 0.5 * dr, 0.5 * dr, &mid, &clamp);
        let scale = half.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let err = half.iter().zip(&full).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())) / 15.0;
        let allowed = (ENTROPY_TOL * dr).max(64.0 * f64::EPSILON) * scale;
        if err <= allowed || dr < 1e-10 {
            y = std::array::from_fn(|j| half[j] + (half[j] - full[j]) / 15.0);
            r -= dr;
            if r - lo < 1e-14 * hi.abs().max(1.0) {
                r = lo;
            }
        }
        let grow = if err > 0.0 { 0.9 * (allowed / err).powf(0.2) } else { 4.0 };
        dr *= grow.clamp(0.2, 4.0);
        steps += 1;
        if steps > 10_000_000 || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Integration { last_t: r, reason: "entropy ODE did not advance".into() });
        }
    }
    Ok(y)
}

/// `I`, `R` and `gamma` on an increasing grid from `0`, with the entropy
/// drop `K(0) - K(r)` accumulated along the same pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiccatiProfile {
    pub r: Vec<f64>,
    pub i: Vec<f64>,
    pub re: Vec<f64>,
    pub gamma: Vec<f64>,
    pub k_drop: Vec<f64>,
}

impl RiccatiProfile {
    /// `(I, R, gamma)` at grid node `k`.
    pub fn at(&self, k: usize) -> (f64, f64, f64) {
        (self.i[k], self.re[k], self.gamma[k])
    }
}

/// The Riccati equation for `m_r(i)` amplifies errors like `e^{2r}` when
/// run forward, so `(I, R)` are integrated from `m_{r_max}(i)` down to `0`,
/// the stable direction.
pub fn riccati_profile(h: &Hamiltonian, r_grid: &[f64], max_depth: f64) -> Result<RiccatiProfile> {
    if r_grid.first() != Some(&0.0) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("r grid must start at 0 and increase".into()));
    }
    let top = *r_grid.last().unwrap();
    let n = r_grid.len();
    let mut i = vec![0.0; n];
    let mut re = vec![0.0; n];
    let mut lk = vec![0.0; n];
    let mut lg = vec![0.0; n];
    let m_top = weyl_estimate(h, top, I, max_depth)?.value;
    if m_top.im <= 0.0 {
        return Err(Error::Positivity { r: top, value: m_top.im });
    }
    let mut y: State = [m_top.im, m_top.re, 0.0, 0.0];
    i[n - 1] = y[0];
    re[n - 1] = y[1];
    let breaks = h.breakpoints();
    for k in (0..n - 1).rev() {
        let (a, b) = (r_grid[k], r_grid[k + 1]);
        let mut cuts = vec![b];
        cuts.extend(breaks.iter().rev().copied().filter(|&p| p > a && p < b));
        cuts.push(a);
        for w in cuts.windows(2) {
            let (hi, lo) = (w[0], w[1]);
            y = backward_smooth(h, lo, hi, y)?;
            if !(y[0] > 0.0) {
                return Err(Error::Positivity { r: lo, value: y[0] });
            }
        }
        i[k] = y[0];
        re[k] = y[1];
        lk[k] = y[2];
        lg[k] = y[3];
    }
    let (lk0, lg0) = (lk[0], lg[0]);
    Ok(RiccatiProfile {
        r: r_grid.to_vec(),
        i,
        re,
        gamma: lg.iter().map(|l| lg0 - l).collect(),
        k_drop: lk.iter().map(|l| l - lk0).collect(),
    })
}

/// `(I, R, K, gamma)` on an increasing `r_grid` starting at `0`, anchored at
/// `K(0)` from the bootstrap and `gamma(0) = 0`.
pub fn entropy_ode(h: &Hamiltonian, boot: &EntropyBootstrap, r_grid: &[f64], max_depth: f64) -> Result<EntropyProfile> {
    let p = riccati_profile(h, r_grid, max_depth)?;
    let k: Vec<f64> = p.k_drop.iter().map(|d| boot.k0 - d).collect();
    let j = p.i.iter().zip(&k).map(|(a, b)| a.ln() - b).collect();
    let initial_mismatch = (C64::new(p.i[0], p.re[0]) - C64::new(boot.i0, boot.r0)).norm();
    Ok(EntropyProfile { r: p.r, i: p.i, re: p.re, j, k, gamma: p.gamma, initial_mismatch, bootstrap: boot.clone() })
}

/// How `J` of the Bernstein-Szego model is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectRoute {
    /// `int log |E~_r|^{-2} dP = 2r - 2 log |E~_r(i)|`: `E~_r` has no zeros in
    /// the upper half-plane and `e^{irz} E~_r(z)` is outer there.
    MeanValue,
    /// Grid quadrature of the explicit density.
    Quadrature(SpectralGrid),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectEntropy {
    pub r: f64,
    pub k: f64,
    /// `log I_hat(0) - J_hat(0)` for the model frozen past `r`.
    pub k_truncated: f64,
    pub i_truncated: f64,
    pub j_truncated: f64,
}

/// `K(r) = K(0) - K_{H_r}(0)` with `H_r` the Bernstein-Szego truncation.
pub fn entropy_direct(h: &Hamiltonian, boot: &EntropyBootstrap, r: f64, route: &DirectRoute, max_depth: f64) -> Result<DirectEntropy> {
    let (ir, rr) = herglotz_at_i(h, r, max_depth)?;
    let m = transfer_between(h, I, 0.0, r, DEFAULT_TOL)?;
    let i_truncated = mobius(&m, C64::new(rr, ir)).im;
    let j_truncated = match route {
        DirectRoute::MeanValue => 2.0 * r - 2.0 * tilde_e(&m, ir, rr).norm().ln(),
        DirectRoute::Quadrature(grid) => {
            let bs = BSTruncation::new(r, ir, rr);
            let w = bs_density(h, &bs, &grid.x)?;
            log_integral(&HerglotzData::from_samples(grid.clone(), w)).value
        }
    };
    let k_truncated = i_truncated.ln() - j_truncated;
    Ok(DirectEntropy { r, k: boot.k0 - k_truncated, k_truncated, i_truncated, j_truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::model::Profile;

    fn data_of(grid: SpectralGrid, f: impl Fn(f64) -> f64) -> HerglotzData {
        let w = grid.x.iter().map(|&x| f(x)).collect();
        HerglotzData::from_samples(grid, w)
    }

    #[test]
    fn constant_potential_terms() {
        let q = PotentialSpec::OffDiagonal { params: Profile::Constant { value: 0.5 } };
        let rep = criterion_potential(&q, 6, DEFAULT_SLOPE).unwrap();
        let want = (2f64.exp() - 1.0) * (1.0 - (-2f64).exp()) - 4.0;
        assert!(rep.terms.iter().all(|t| (t - want).abs() < 1e-11));
        assert_eq!(rep.verdict, Verdict::DivergentTrend);
        let max = criterion_maximal(&q, 5, DEFAULT_SLOPE).unwrap();
        assert!(max.terms.iter().all(|t| (t - 0.25).abs() < 1e-12));
    }

    #[test]
    fn free_terms_vanish() {
        let rep = criterion_potential(&families::free(), 10, DEFAULT_SLOPE).unwrap();
        assert!(rep.terms.iter().all(|t| t.abs() < 1e-13));
        assert_eq!(rep.verdict, Verdict::ConvergentAtHorizon);
        let rep = criterion_hamiltonian(&Hamiltonian::free(), 10, 20.0, DEFAULT_SLOPE).unwrap();
        assert!(rep.terms.iter().all(|t| t.abs() < 1e-13));
    }

    #[test]
    fn integrable_clock_is_inapplicable() {
        let h = Hamiltonian::direct(|t| [(-t).exp(), 0.0, (-t).exp()], true, false, vec![]);
        let rep = criterion_hamiltonian(&h, 5, 30.0, DEFAULT_SLOPE).unwrap();
        assert_eq!(rep.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn diagonal_potential_rejected() {
        let q = PotentialSpec::Diagonal { params: Profile::Constant { value: 0.5 } };
        assert!(criterion_potential(&q, 3, DEFAULT_SLOPE).is_err());
    }

    #[test]
    fn log_integral_constants() {
        let g = SpectralGrid::tan(64);
        assert!(log_integral(&data_of(g.clone(), |_| 1.0)).value.abs() < 1e-15);
        assert!((log_integral(&data_of(g.clone(), |_| 2.0)).value - 2f64.ln()).abs() < 1e-14);
        let h = SpectralGrid::log_default();
        assert!((log_integral(&data_of(h, |_| 2.0)).value - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn clipped_mass_is_reported() {
        let g = SpectralGrid::tan(8);
        let li = log_integral(&data_of(g, |x| if x > 0.0 { 0.0 } else { 1.0 }));
        assert!((li.clipped_mass - 0.5).abs() < 1e-15);
    }

    #[test]
    fn szego_of_rational_weight() {
        // D(z) = (z + 2i) / (z + i) is outer with |D(x)|^2 = (x^2 + 4) / (x^2 + 1)
        let outer = |z: C64| (z + 2.0 * I) / (z + I);
        let d = data_of(SpectralGrid::tan(256), |x| (x * x + 4.0) / (x * x + 1.0));
        let j = log_integral(&d).value;
        assert!((j - 2.0 * 1.5f64.ln()).abs() < 1e-13);
        for z in [I, C64::new(1.0, 2.0), C64::new(-0.5, 0.7)] {
            let v = szego_function(&d, z).unwrap().value;
            assert!((v - outer(z)).norm() < 1e-12, "{z}: {v}");
        }
        let b = szego_boundary(&d).unwrap();
        for (x, v) in d.grid.x.iter().zip(&b) {
            let want = outer(C64::new(*x, 0.0));
            assert!((v - want).norm() < 1e-12, "{x}: {v} vs {want}");
        }
    }

    #[test]
    fn szego_at_i_matches_log_integral() {
        let f = |x: f64| 1.0 + 0.5 * (x / (1.0 + x * x)).sin() + 0.2 / (1.0 + x * x);
        let d = data_of(SpectralGrid::tan(256), f);
        let v = szego_function(&d, I).unwrap().value;
        assert!(v.im.abs() < 1e-14);
        assert!((v.re.powi(2).ln() - log_integral(&d).value).abs() < 1e-13);
    }

    #[test]
    fn free_entropy_profile() {
        let h = Hamiltonian::free();
        let boot = entropy_bootstrap(&h, &SpectralGrid::tan(32), &EpsSchedule::Boundary, 20.0).unwrap();
        assert!(boot.k0.abs() < 1e-12);
        let p = entropy_ode(&h, &boot, &[0.0, 1.0, 2.5, 4.0], 20.0).unwrap();
        for k in 0..4 {
            assert!((p.i[k] - 1.0).abs() < 1e-12);
            assert!(p.re[k].abs() < 1e-12 && p.k[k].abs() < 1e-12 && p.gamma[k].abs() < 1e-12);
        }
        let d = entropy_direct(&h, &boot, 3.0, &DirectRoute::MeanValue, 20.0).unwrap();
        assert!(d.k.abs() < 1e-12);
    }

    #[test]
    fn diagonal_hamiltonian_keeps_r_zero() {
        let h = families::hamiltonian(&families::bump());
        let boot = EntropyBootstrap { i0: 1.0, r0: 0.0, j0: LogIntegral { value: 0.0, clipped_mass: 0.0, excluded_mass: 0.0 }, k0: 0.0, grid: String::new(), flagged_nodes: 0 };
        let p = entropy_ode(&h, &boot, &[0.0, 0.5, 1.0, 1.5, 2.0, 3.0], 20.0).unwrap();
        assert!(p.re.iter().all(|v| v.abs() < 1e-13));
        assert!(p.gamma.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn direct_route_routes_agree_at_zero() {
        let h = families::hamiltonian(&families::gbump());
        let boot = EntropyBootstrap { i0: 1.0, r0: 0.0, j0: LogIntegral { value: 0.0, clipped_mass: 0.0, excluded_mass: 0.0 }, k0: 0.3, grid: String::new(), flagged_nodes: 0 };
        let d = entropy_direct(&h, &boot, 0.0, &DirectRoute::MeanValue, 20.0).unwrap();
        assert!((d.k - 0.3).abs() < 1e-12);
        let q = entropy_direct(&h, &boot, 0.0, &DirectRoute::Quadrature(SpectralGrid::tan(16)), 20.0).unwrap();
        assert!((q.k - 0.3).abs() < 1e-12);
    }

}
