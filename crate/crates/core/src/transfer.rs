//! Transfer matrices of the canonical system `J M' = z H M` and of the
//! Dirac system `J N' + Q N = z N`, both with identity initial data.
//!
//! The integrator is a fourth-order Magnus scheme on two Gauss points with
//! step-doubling error control. Each step is the exact exponential of a
//! traceless matrix, so determinants stay at one up to rounding and the
//! step sequence for `z` and `conj(z)` is identical.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat::{expm_traceless, max_abs, CMat, C64};
use crate::model::{Hamiltonian, PotentialSpec};

pub const DEFAULT_TOL: f64 = 1e-12;
const H_DEFAULT: f64 = 0.25;

/// Traceless generator `A(t)` of `Y' = A(t) Y`.
pub trait Generator: Sync {
    fn at(&self, t: f64) -> CMat;
    fn z(&self) -> C64;
    /// Times the integrator must land on.
    fn breakpoints(&self) -> Vec<f64>;
    /// `A` is constant on `[s, inf)`.
    fn constant_from(&self) -> Option<f64>;
}

pub struct Canonical<'a> {
    pub h: &'a Hamiltonian,
    pub z: C64,
    breaks: Vec<f64>,
    constant: Option<f64>,
}

impl<'a> Canonical<'a> {
    pub fn new(h: &'a Hamiltonian, z: C64) -> Self {
        Canonical { h, z, breaks: h.breakpoints(), constant: h.constant_from() }
    }
}

impl Generator for Canonical<'_> {
    fn at(&self, t: f64) -> CMat {
        let [h1, hh, h2] = self.h.sample(t);
        let z = self.z;
        CMat::new(z * hh, z * h2, -z * h1, -z * hh)
    }
    fn z(&self) -> C64 {
        self.z
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
    fn constant_from(&self) -> Option<f64> {
        self.constant
    }
}

pub struct Dirac<'a> {
    pub spec: &'a PotentialSpec,
    pub z: C64,
}

impl Generator for Dirac<'_> {
    fn at(&self, t: f64) -> CMat {
        let (q1, q2) = self.spec.sample(t);
        let z = self.z;
        CMat::new(C64::new(-q2, 0.0), q1 + z, q1 - z, C64::new(q2, 0.0))
    }
    fn z(&self) -> C64 {
        self.z
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.spec.breakpoints()
    }
    fn constant_from(&self) -> Option<f64> {
        self.spec.constant_tail().map(|v| v.0)
    }
}

fn magnus_step<G: Generator + ?Sized>(g: &G, t: f64, h: f64) -> CMat {
    let c = 3f64.sqrt() / 6.0;
    let a1 = g.at(t + (0.5 - c) * h);
    let a2 = g.at(t + (0.5 + c) * h);
    let comm = a2 * a1 - a1 * a2;
    let omega = (a1 + a2) * C64::new(0.5 * h, 0.0) + comm * C64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
    expm_traceless(&omega)
}

/// Adaptive Magnus integrator; `tol` bounds the local error per unit time,
/// relative to the size of the step propagator.
#[derive(Clone, Copy, Debug)]
pub struct Magnus {
    pub tol: f64,
}

impl Default for Magnus {
    fn default() -> Self {
        Magnus { tol: DEFAULT_TOL }
    }
}

impl Magnus {
    pub fn new(tol: f64) -> Self {
        Magnus { tol }
    }

    fn ceiling<G: Generator + ?Sized>(g: &G) -> f64 {
        let zn = g.z().norm();
        if zn > 0.0 {
            H_DEFAULT.min(0.5 / zn)
        } else {
            H_DEFAULT
        }
    }

    /// Propagator from `a` to `b` applied to `y`.
    pub fn advance<G: Generator + ?Sized>(&self, g: &G, a: f64, b: f64, y: CMat) -> Result<CMat> {
        if b < a {
            return Err(Error::InvalidInput(format!("cannot integrate backwards from {a} to {b}")));
        }
        if b == a {
            return Ok(y);
        }
        let mut cuts = vec![a];
        cuts.extend(g.breakpoints().into_iter().filter(|&p| p > a && p < b));
        cuts.push(b);
        let konst = g.constant_from();
        let mut m = y;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if konst.is_some_and(|s| lo >= s) {
                let a0 = g.at(lo);
                m = expm_traceless(&(a0 * C64::new(hi - lo, 0.0))) * m;
            } else {
                m = self.advance_smooth(g, lo, hi, m)?;
            }
        }
        Ok(m)
    }

    fn advance_smooth<G: Generator + ?Sized>(&self, g: &G, a: f64, b: f64, y: CMat) -> Result<CMat> {
        let cap = Self::ceiling(g);
        let mut h = cap.min(b - a);
        let mut t = a;
        let mut m = y;
        while t < b {
            let last = t + h >= b;
            let step = if last { b - t } else { h };
            let full = magnus_step(g, t, step);
            let half = magnus_step(g, t + 0.5 * step, 0.5 * step) * magnus_step(g, t, 0.5 * step);
            let err = max_abs(&(half - full)) / 15.0;
            if !err.is_finite() {
                return Err(Error::Integration { last_t: t, reason: "non-finite step".into() });
            }
            // never ask for less than the rounding floor
            let scale = max_abs(&half).max(1.0);
            let allowed = (self.tol * step).max(64.0 * f64::EPSILON) * scale;
            if err <= allowed {
                m = half * m;
                if last {
                    break;
                }
                t += step;
            }
            let factor = if err == 0.0 { 2.0 } else { (0.9 * (allowed / err).powf(0.25)).clamp(0.2, 2.0) };
            h = (step * factor).min(cap);
            if h < 1e-12 * (1.0 + t.abs()) && h < b - t {
                return Err(Error::Integration { last_t: t, reason: "step size underflow".into() });
            }
        }
        Ok(m)
    }

    /// Values at each grid time, starting from the identity at the first one.
    pub fn grid<G: Generator + ?Sized>(&self, g: &G, times: &[f64]) -> Result<Vec<CMat>> {
        let mut out = Vec::with_capacity(times.len());
        let mut m = CMat::identity();
        let mut prev = match times.first() {
            Some(&t) => t,
            None => return Ok(out),
        };
        for &t in times {
            m = self.advance(g, prev, t, m)?;
            out.push(m);
            prev = t;
        }
        Ok(out)
    }
}

/// `M(t, z) = (Theta, Phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferState {
    pub t: f64,
    pub z: C64,
    pub m: CMat,
}

impl TransferState {
    pub fn theta_plus(&self) -> C64 {
        self.m[(0, 0)]
    }
    pub fn theta_minus(&self) -> C64 {
        self.m[(1, 0)]
    }
    pub fn phi_plus(&self) -> C64 {
        self.m[(0, 1)]
    }
    pub fn phi_minus(&self) -> C64 {
        self.m[(1, 1)]
    }
    pub fn det(&self) -> C64 {
        self.m.determinant()
    }
}

fn check_grid(t_grid: &[f64], tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be nondecreasing and start at t >= 0".into()));
    }
    Ok(())
}

/// Canonical transfer matrix at each grid time (measured from 0).
pub fn evolve_canonical(h: &Hamiltonian, z: C64, t_grid: &[f64], tol: f64) -> Result<Vec<TransferState>> {
    check_grid(t_grid, tol)?;
    let g = Canonical::new(h, z);
    let mag = Magnus::new(tol);
    let mut times = Vec::with_capacity(t_grid.len() + 1);
    times.push(0.0);
    times.extend_from_slice(t_grid);
    let ms = mag.grid(&g, &times)?;
    Ok(t_grid.iter().zip(&ms[1..]).map(|(&t, &m)| TransferState { t, z, m }).collect())
}

/// Transfer matrix of the shifted Hamiltonian `H(. + a)` over `[0, b - a]`.
pub fn transfer_between(h: &Hamiltonian, z: C64, a: f64, b: f64, tol: f64) -> Result<CMat> {
    Magnus::new(tol).advance(&Canonical::new(h, z), a, b, CMat::identity())
}

/// Dirac fundamental matrix `N(t, z)` at each grid time.
pub fn dirac_matrix(spec: &PotentialSpec, z: C64, t_grid: &[f64], tol: f64) -> Result<Vec<CMat>> {
    check_grid(t_grid, tol)?;
    spec.validate()?;
    let g = Dirac { spec, z };
    let mut times = vec![0.0];
    times.extend_from_slice(t_grid);
    Ok(Magnus::new(tol).grid(&g, &times)?[1..].to_vec())
}

/// `Psi(t, z) = N(t, z) (1, 0)^T`.
pub fn evolve_dirac(spec: &PotentialSpec, z: C64, t_grid: &[f64], tol: f64) -> Result<Vec<[C64; 2]>> {
    Ok(dirac_matrix(spec, z, t_grid, tol)?.iter().map(|n| [n[(0, 0)], n[(1, 0)]]).collect())
}

/// `evolve_canonical` for every `z`, in parallel; failures stay per point.
pub fn batch_evolve(h: &Hamiltonian, z_grid: &[C64], t_grid: &[f64], tol: f64) -> Vec<Result<Vec<TransferState>>> {
    z_grid.par_iter().map(|&z| evolve_canonical(h, z, t_grid, tol)).collect()
}
