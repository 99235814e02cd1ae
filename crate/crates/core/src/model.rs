//! Potentials, Hamiltonians and the reduction of a Dirac system to a
//! canonical system with `H = N0^T N0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{expm_traceless_real, j_real, RMat};
use crate::quad;

/// Knot spacing for cached primitives and gauge matrices.
const KNOT_DT: f64 = 1.0 / 256.0;
/// Knots are cached up to this time when a profile never becomes constant.
const KNOT_HORIZON: f64 = 256.0;
/// Magnus sub-steps per unit time when integrating the gauge path.
const GAUGE_STEPS_PER_UNIT: f64 = 1024.0;

/// Scalar law `t -> q(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// Smooth bump `amplitude * exp(1 - 1/(1 - u^2))` with `u` mapping
    /// `(start, end)` onto `(-1, 1)`.
    Bump { amplitude: f64, start: f64, end: f64 },
    /// `amplitude * sin(t^2)`.
    SinSquare { amplitude: f64 },
    /// `amplitude * exp(-rate t)`.
    Exponential { amplitude: f64, rate: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => value,
            Profile::Bump { amplitude, start, end } => {
                if t <= start || t >= end {
                    return 0.0;
                }
                let u = (2.0 * t - start - end) / (end - start);
                let d = 1.0 - u * u;
                if d <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / d).exp()
                }
            }
            Profile::SinSquare { amplitude } => {
                // t^2 rounds with absolute error ~ t^2 eps; carry the residual
                let sq = t * t;
                let lost = t.mul_add(t, -sq);
                let (s, c) = sq.sin_cos();
                amplitude * (s + lost * c)
            }
            Profile::Exponential { amplitude, rate } => amplitude * (-rate * t).exp(),
        }
    }

    /// `(t0, value)` such that the law equals `value` on `[t0, inf)`.
    pub fn constant_beyond(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Zero => Some((0.0, 0.0)),
            Profile::Constant { value } => Some((0.0, value)),
            Profile::Bump { end, .. } => Some((end, 0.0)),
            Profile::Exponential { amplitude, .. } if amplitude == 0.0 => Some((0.0, 0.0)),
            _ => None,
        }
    }

    fn closed_primitive(&self, t: f64) -> Option<f64> {
        match *self {
            Profile::Zero => Some(0.0),
            Profile::Constant { value } => Some(value * t),
            Profile::Exponential { amplitude, rate } => {
                if rate == 0.0 {
                    Some(amplitude * t)
                } else {
                    Some(amplitude * (-(-rate * t).exp_m1()) / rate)
                }
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Zero => true,
            Profile::Constant { value } => value.is_finite(),
            Profile::Bump { amplitude, start, end } => {
                amplitude.is_finite() && start.is_finite() && end.is_finite() && start >= 0.0 && end > start
            }
            Profile::SinSquare { amplitude } => amplitude.is_finite(),
            Profile::Exponential { amplitude, rate } => amplitude.is_finite() && rate.is_finite() && rate >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad profile parameters: {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralParams {
    pub q1: Profile,
    pub q2: Profile,
}

/// Potential `Q = ((q1, q2), (q2, -q1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero {},
    /// `q1 = 0`, `q2 = q`.
    OffDiagonal { params: Profile },
    /// `q1 = q`, `q2 = 0`.
    Diagonal { params: Profile },
    General { params: GeneralParams },
    /// Piecewise constant: `(q1[k], q2[k])` on `[t[k], t[k+1])`; the last row
    /// holds from `t[n-1]` on.
    Tabulated { t: Vec<f64>, q1: Vec<f64>, q2: Vec<f64> },
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::Zero {}
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero {} => Ok(()),
            PotentialSpec::OffDiagonal { params } | PotentialSpec::Diagonal { params } => params.validate(),
            PotentialSpec::General { params } => {
                params.q1.validate()?;
                params.q2.validate()
            }
            PotentialSpec::Tabulated { t, q1, q2 } => {
                if t.is_empty() || t.len() != q1.len() || t.len() != q2.len() {
                    return Err(Error::InvalidInput("tabulated columns must be non-empty and of equal length".into()));
                }
                if t[0] != 0.0 {
                    return Err(Error::InvalidInput("tabulated times must start at 0".into()));
                }
                if t.iter().chain(q1).chain(q2).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("tabulated data contains NaN or infinite samples".into()));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput("tabulated times must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// `(q1(t), q2(t))`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        match self {
            PotentialSpec::Zero {} => (0.0, 0.0),
            PotentialSpec::OffDiagonal { params } => (0.0, params.value(t)),
            PotentialSpec::Diagonal { params } => (params.value(t), 0.0),
            PotentialSpec::General { params } => (params.q1.value(t), params.q2.value(t)),
            PotentialSpec::Tabulated { t: ts, q1, q2 } => {
                let k = cell_index(ts, t);
                (q1[k], q2[k])
            }
        }
    }

    /// `(t0, q1, q2)` with `Q` constant on `[t0, inf)`.
    pub fn constant_tail(&self) -> Option<(f64, f64, f64)> {
        match self {
            PotentialSpec::Zero {} => Some((0.0, 0.0, 0.0)),
            PotentialSpec::OffDiagonal { params } => params.constant_beyond().map(|(t0, v)| (t0, 0.0, v)),
            PotentialSpec::Diagonal { params } => params.constant_beyond().map(|(t0, v)| (t0, v, 0.0)),
            PotentialSpec::General { params } => {
                let (a, v1) = params.q1.constant_beyond()?;
                let (b, v2) = params.q2.constant_beyond()?;
                Some((a.max(b), v1, v2))
            }
            PotentialSpec::Tabulated { t, q1, q2 } => {
                let n = t.len() - 1;
                Some((t[n], q1[n], q2[n]))
            }
        }
    }

    /// Times where the potential may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::Tabulated { t, .. } => t[1..].to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn q1_vanishes(&self) -> bool {
        match self {
            PotentialSpec::Zero {} | PotentialSpec::OffDiagonal { .. } => true,
            PotentialSpec::Diagonal { params } => *params == Profile::Zero,
            PotentialSpec::General { params } => params.q1 == Profile::Zero,
            PotentialSpec::Tabulated { q1, .. } => q1.iter().all(|v| *v == 0.0),
        }
    }

    pub fn q2_vanishes(&self) -> bool {
        match self {
            PotentialSpec::Zero {} | PotentialSpec::Diagonal { .. } => true,
            PotentialSpec::OffDiagonal { params } => *params == Profile::Zero,
            PotentialSpec::General { params } => params.q2 == Profile::Zero,
            PotentialSpec::Tabulated { q2, .. } => q2.iter().all(|v| *v == 0.0),
        }
    }
}

fn cell_index(ts: &[f64], t: f64) -> usize {
    match ts.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(k) => k,
        Err(0) => 0,
        Err(k) => k - 1,
    }
}

/// `g(t) = int_0^t q`.
#[derive(Clone, Debug)]
enum Primitive {
    Closed(Profile),
    /// `tail` is `(t0, value, g(t0))`.
    Cached { profile: Profile, knots: Vec<f64>, tail: Option<(f64, f64, f64)> },
    Table { t: Vec<f64>, q: Vec<f64>, cum: Vec<f64> },
}

impl Primitive {
    fn new(profile: &Profile) -> Self {
        if profile.closed_primitive(0.0).is_some() {
            return Primitive::Closed(profile.clone());
        }
        let tail = profile.constant_beyond();
        let end = tail.map_or(KNOT_HORIZON, |(t0, _)| t0);
        let n = (end / KNOT_DT).ceil() as usize;
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let a = k as f64 * KNOT_DT;
            acc += quad::integrate(|s| profile.value(s), a, a + KNOT_DT, 1e-16, 1e-14);
            knots.push(acc);
        }
        let tail = tail.map(|(t0, v)| {
            let last = (knots.len() - 1) as f64 * KNOT_DT;
            let head = if t0 >= last {
                acc + quad::integrate(|s| profile.value(s), last, t0, 1e-16, 1e-14)
            } else {
                let k = (t0 / KNOT_DT).floor() as usize;
                knots[k] + quad::integrate(|s| profile.value(s), k as f64 * KNOT_DT, t0, 1e-16, 1e-14)
            };
            (t0, v, head)
        });
        Primitive::Cached { profile: profile.clone(), knots, tail }
    }

    fn table(t: &[f64], q: &[f64]) -> Self {
        let mut cum = vec![0.0];
        for k in 1..t.len() {
            cum.push(cum[k - 1] + q[k - 1] * (t[k] - t[k - 1]));
        }
        Primitive::Table { t: t.to_vec(), q: q.to_vec(), cum }
    }

    fn eval(&self, t: f64) -> f64 {
        match self {
            Primitive::Closed(p) => p.closed_primitive(t).unwrap_or(0.0),
            Primitive::Table { t: ts, q, cum } => {
                let k = cell_index(ts, t);
                cum[k] + q[k] * (t - ts[k])
            }
            Primitive::Cached { profile, knots, tail } => {
                if let Some((t0, v, head)) = *tail {
                    if t >= t0 {
                        return head + v * (t - t0);
                    }
                }
                let k = ((t / KNOT_DT).floor() as usize).min(knots.len() - 1);
                let a = k as f64 * KNOT_DT;
                if t - a > KNOT_DT {
                    // past the cached range
                    return knots[k] + quad::integrate(|s| profile.value(s), a, t, 1e-15, 1e-14);
                }
                // cells are short and the laws smooth: one panel is enough
                knots[k] + quad::gk15(&mut |s| profile.value(s), a, t).0
            }
        }
    }
}

/// `N0(t)` for a general potential, with knots every `KNOT_DT`.
#[derive(Clone, Debug)]
struct GeneralGauge {
    spec: PotentialSpec,
    knots: Vec<RMat>,
    tail: Option<(f64, RMat)>,
}

fn gauge_generator(spec: &PotentialSpec, t: f64) -> RMat {
    let (q1, q2) = spec.sample(t);
    j_real() * RMat::new(q1, q2, q2, -q1)
}

fn gauge_step(spec: &PotentialSpec, a: f64, b: f64) -> RMat {
    let h = b - a;
    let c = 3f64.sqrt() / 6.0;
    let a1 = gauge_generator(spec, a + (0.5 - c) * h);
    let a2 = gauge_generator(spec, a + (0.5 + c) * h);
    let comm = a2 * a1 - a1 * a2;
    let omega = (a1 + a2) * (0.5 * h) + comm * (3f64.sqrt() / 12.0 * h * h);
    expm_traceless_real(&omega)
}

fn gauge_advance(spec: &PotentialSpec, start: RMat, a: f64, b: f64) -> RMat {
    if b <= a {
        return start;
    }
    let mut cuts = vec![a];
    cuts.extend(spec.breakpoints().into_iter().filter(|&p| p > a && p < b));
    cuts.push(b);
    let mut m = start;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let n = ((hi - lo) * GAUGE_STEPS_PER_UNIT).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        for k in 0..n {
            let s = lo + k as f64 * h;
            let e = if k + 1 == n { hi } else { s + h };
            m = gauge_step(spec, s, e) * m;
        }
    }
    m
}

impl GeneralGauge {
    fn new(spec: &PotentialSpec) -> Self {
        let tail_start = spec.constant_tail().map(|v| v.0);
        let end = tail_start.unwrap_or(KNOT_HORIZON);
        let dt = 1.0 / GAUGE_STEPS_PER_UNIT;
        let n = (end * GAUGE_STEPS_PER_UNIT).ceil() as usize;
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(RMat::identity());
        for k in 0..n {
            let a = k as f64 * dt;
            let next = gauge_advance(spec, knots[k], a, a + dt);
            knots.push(next);
        }
        let tail = tail_start.map(|t0| {
            let k = ((t0 * GAUGE_STEPS_PER_UNIT).floor() as usize).min(knots.len() - 1);
            (t0, gauge_advance(spec, knots[k], k as f64 * dt, t0))
        });
        GeneralGauge { spec: spec.clone(), knots, tail }
    }

    fn eval(&self, t: f64) -> RMat {
        if let Some((t0, n0)) = self.tail {
            if t >= t0 {
                return tail_gauge(&self.spec, t0, n0, t);
            }
        }
        let k = ((t * GAUGE_STEPS_PER_UNIT).floor() as usize).min(self.knots.len() - 1);
        gauge_advance(&self.spec, self.knots[k], k as f64 / GAUGE_STEPS_PER_UNIT, t)
    }
}

fn tail_gauge(spec: &PotentialSpec, t0: f64, n0: RMat, t: f64) -> RMat {
    let a = gauge_generator(spec, t0.max(t));
    expm_traceless_real(&(a * (t - t0))) * n0
}

#[derive(Clone, Debug)]
enum GaugeLaw {
    Identity,
    OffDiagonal(Primitive),
    Diagonal(Primitive),
    General(GeneralGauge),
}

/// `t -> N0(t)`, the solution of `J N0' + Q N0 = 0`, `N0(0) = I`.
#[derive(Clone, Debug)]
pub struct GaugePath {
    law: GaugeLaw,
}

impl GaugePath {
    pub fn new(spec: &PotentialSpec) -> Self {
        let law = if spec.q1_vanishes() && spec.q2_vanishes() {
            GaugeLaw::Identity
        } else if spec.q1_vanishes() {
            GaugeLaw::OffDiagonal(match spec {
                PotentialSpec::OffDiagonal { params } => Primitive::new(params),
                PotentialSpec::General { params } => Primitive::new(&params.q2),
                PotentialSpec::Tabulated { t, q2, .. } => Primitive::table(t, q2),
                _ => unreachable!(),
            })
        } else if spec.q2_vanishes() {
            GaugeLaw::Diagonal(match spec {
                PotentialSpec::Diagonal { params } => Primitive::new(params),
                PotentialSpec::General { params } => Primitive::new(&params.q1),
                PotentialSpec::Tabulated { t, q1, .. } => Primitive::table(t, q1),
                _ => unreachable!(),
            })
        } else {
            GaugeLaw::General(GeneralGauge::new(spec))
        };
        GaugePath { law }
    }

    /// `g(t)` when the closed forms apply.
    pub fn g(&self, t: f64) -> Option<f64> {
        match &self.law {
            GaugeLaw::Identity => Some(0.0),
            GaugeLaw::OffDiagonal(p) | GaugeLaw::Diagonal(p) => Some(p.eval(t)),
            GaugeLaw::General(_) => None,
        }
    }

    pub fn n0(&self, t: f64) -> RMat {
        match &self.law {
            GaugeLaw::Identity => RMat::identity(),
            GaugeLaw::OffDiagonal(p) => {
                let g = p.eval(t);
                RMat::new((-g).exp(), 0.0, 0.0, g.exp())
            }
            GaugeLaw::Diagonal(p) => {
                let g = p.eval(t);
                RMat::new(g.cosh(), g.sinh(), g.sinh(), g.cosh())
            }
            GaugeLaw::General(gg) => gg.eval(t),
        }
    }

    /// `N0^T N0`, with the closed forms where they exist.
    pub fn hamiltonian_at(&self, t: f64) -> [f64; 3] {
        match &self.law {
            GaugeLaw::Identity => [1.0, 0.0, 1.0],
            GaugeLaw::OffDiagonal(p) => {
                let g = p.eval(t);
                [(-2.0 * g).exp(), 0.0, (2.0 * g).exp()]
            }
            GaugeLaw::Diagonal(p) => {
                let g2 = 2.0 * p.eval(t);
                [g2.cosh(), g2.sinh(), g2.cosh()]
            }
            GaugeLaw::General(gg) => {
                let n = gg.eval(t);
                let h = n.transpose() * n;
                [h[(0, 0)], 0.5 * (h[(0, 1)] + h[(1, 0)]), h[(1, 1)]]
            }
        }
    }
}

/// What happens beyond the last point where the coefficients vary.
#[derive(Clone, Debug)]
pub enum Tail {
    /// `H` equals the constant `(c1, c, c2)` on `[start, inf)`.
    Canonical { start: f64, h: [f64; 3] },
    /// `Q` equals `((q1, q2), (q2, -q1))` on `[start, inf)`; `n0` is `N0(start)`.
    Dirac { start: f64, q1: f64, q2: f64, n0: RMat },
}

impl Tail {
    pub fn start(&self) -> f64 {
        match self {
            Tail::Canonical { start, .. } | Tail::Dirac { start, .. } => *start,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    FromPotential(PotentialSpec),
    Direct,
}

type Sampler = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
enum Source {
    Gauge { spec: PotentialSpec, gauge: GaugePath },
    Constant([f64; 3]),
    Truncated { base: Box<Hamiltonian>, cut: f64, tail: [f64; 3] },
    Direct { f: Sampler, breaks: Vec<f64> },
}

/// `t -> (h1, h, h2)`.
#[derive(Clone)]
pub struct Hamiltonian {
    source: Source,
    pub diagonal: bool,
    pub det_one: bool,
    pub provenance: Provenance,
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("diagonal", &self.diagonal)
            .field("det_one", &self.det_one)
            .field("provenance", &self.provenance)
            .finish()
    }
}

pub fn build_hamiltonian(spec: &PotentialSpec) -> Result<(Hamiltonian, GaugePath)> {
    spec.validate()?;
    let gauge = GaugePath::new(spec);
    let h = Hamiltonian {
        source: Source::Gauge { spec: spec.clone(), gauge: gauge.clone() },
        diagonal: spec.q1_vanishes(),
        det_one: true,
        provenance: Provenance::FromPotential(spec.clone()),
    };
    Ok((h, gauge))
}

impl Hamiltonian {
    pub fn from_potential(spec: &PotentialSpec) -> Result<Self> {
        Ok(build_hamiltonian(spec)?.0)
    }

    pub fn free() -> Self {
        Self::constant(1.0, 0.0, 1.0).expect("identity is a valid Hamiltonian")
    }

    pub fn constant(c1: f64, c: f64, c2: f64) -> Result<Self> {
        check_triple([c1, c, c2])?;
        Ok(Hamiltonian {
            source: Source::Constant([c1, c, c2]),
            diagonal: c == 0.0,
            det_one: (c1 * c2 - c * c - 1.0).abs() < 1e-14,
            provenance: Provenance::Direct,
        })
    }

    /// A sampled Hamiltonian with no known tail; `breaks` lists jump times.
    pub fn direct<F>(f: F, diagonal: bool, det_one: bool, breaks: Vec<f64>) -> Self
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Hamiltonian {
            source: Source::Direct { f: Arc::new(f), breaks },
            diagonal,
            det_one,
            provenance: Provenance::Direct,
        }
    }

    /// `H` on `[0, cut)` followed by the constant `tail`.
    pub fn truncated(&self, cut: f64, tail: [f64; 3]) -> Result<Self> {
        check_triple(tail)?;
        Ok(Hamiltonian {
            source: Source::Truncated { base: Box::new(self.clone()), cut, tail },
            diagonal: self.diagonal && tail[1] == 0.0,
            det_one: self.det_one && (tail[0] * tail[2] - tail[1] * tail[1] - 1.0).abs() < 1e-12,
            provenance: Provenance::Direct,
        })
    }

    pub fn sample(&self, t: f64) -> [f64; 3] {
        match &self.source {
            Source::Gauge { gauge, .. } => gauge.hamiltonian_at(t),
            Source::Constant(c) => *c,
            Source::Truncated { base, cut, tail } => {
                if t < *cut {
                    base.sample(t)
                } else {
                    *tail
                }
            }
            Source::Direct { f, .. } => f(t),
        }
    }

    pub fn potential(&self) -> Option<&PotentialSpec> {
        match &self.source {
            Source::Gauge { spec, .. } => Some(spec),
            _ => None,
        }
    }

    pub fn gauge(&self) -> Option<&GaugePath> {
        match &self.source {
            Source::Gauge { gauge, .. } => Some(gauge),
            _ => None,
        }
    }

    /// Times where `H` may jump or stop varying.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.source {
            Source::Gauge { spec, .. } => {
                let mut b = spec.breakpoints();
                if let Some((t0, _, _)) = spec.constant_tail() {
                    b.push(t0);
                }
                b
            }
            Source::Constant(_) => Vec::new(),
            Source::Truncated { base, cut, .. } => {
                let mut b: Vec<f64> = base.breakpoints().into_iter().filter(|v| v < cut).collect();
                b.push(*cut);
                b
            }
            Source::Direct { breaks, .. } => breaks.clone(),
        };
        out.retain(|v| *v > 0.0);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    pub fn tail(&self) -> Option<Tail> {
        match &self.source {
            Source::Gauge { spec, gauge } => spec.constant_tail().map(|(start, q1, q2)| Tail::Dirac {
                start,
                q1,
                q2,
                n0: gauge.n0(start),
            }),
            Source::Constant(h) => Some(Tail::Canonical { start: 0.0, h: *h }),
            Source::Truncated { cut, tail, .. } => Some(Tail::Canonical { start: *cut, h: *tail }),
            Source::Direct { .. } => None,
        }
    }

    /// Start of an interval `[s, inf)` on which `H` is constant, if known.
    pub fn constant_from(&self) -> Option<f64> {
        match self.tail()? {
            Tail::Canonical { start, .. } => Some(start),
            Tail::Dirac { start, q1, q2, .. } => (q1 == 0.0 && q2 == 0.0).then_some(start),
        }
    }
}

fn check_triple(h: [f64; 3]) -> Result<()> {
    let [a, b, c] = h;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || a + c <= 0.0 || a * c - b * b < -1e-14 {
        return Err(Error::InvalidInput(format!("not a Hamiltonian value: {h:?}")));
    }
    Ok(())
}

/// `xi(t) = int_0^t sqrt(det H)`.
pub fn clock(h: &Hamiltonian, t: f64) -> f64 {
    if h.det_one {
        return t;
    }
    clock_between(h, 0.0, t)
}

fn clock_between(h: &Hamiltonian, a: f64, b: f64) -> f64 {
    let f = |s: f64| {
        let [h1, hh, h2] = h.sample(s);
        (h1 * h2 - hh * hh).max(0.0).sqrt()
    };
    quad::integrate_pieces(f, a, b, &h.breakpoints(), 1e-15, 1e-14)
}

/// `eta_n = min{t : xi(t) = n}` for `n = 0..=n_max`, searched on `[0, horizon]`.
pub fn eta_grid(h: &Hamiltonian, n_max: usize, horizon: f64) -> Result<Vec<f64>> {
    if h.det_one {
        if (n_max as f64) > horizon {
            return Err(Error::Inapplicable(format!("block grid needs t up to {n_max}, horizon is {horizon}")));
        }
        return Ok((0..=n_max).map(|n| n as f64).collect());
    }
    let step = 0.125;
    let mut out = vec![0.0];
    let mut t = 0.0;
    let mut xi = 0.0;
    let mut n = 1;
    while n <= n_max {
        if t >= horizon {
            return Err(Error::Inapplicable(format!(
                "sqrt(det H) integrable up to horizon: clock reaches {xi:.6} < {n_max} at t = {horizon}"
            )));
        }
        let next = (t + step).min(horizon);
        let dxi = clock_between(h, t, next);
        while n <= n_max && xi + dxi >= n as f64 {
            let target = n as f64 - xi;
            let (mut lo, mut hi) = (t, next);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if clock_between(h, t, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * (1.0 + hi) {
                    break;
                }
            }
            out.push(hi);
            n += 1;
        }
        xi += dxi;
        t = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn off(q: f64) -> PotentialSpec {
        PotentialSpec::OffDiagonal { params: Profile::Constant { value: q } }
    }

    #[test]
    fn zero_potential_gives_identity() {
        let (h, g) = build_hamiltonian(&PotentialSpec::zero()).unwrap();
        for t in [0.0, 1.0, 7.5] {
            assert_eq!(h.sample(t), [1.0, 0.0, 1.0]);
            assert_eq!(g.n0(t), RMat::identity());
        }
    }

    #[test]
    fn off_diagonal_constant_closed_form() {
        let h = Hamiltonian::from_potential(&off(0.5)).unwrap();
        let [h1, hh, h2] = h.sample(1.0);
        assert!((h1 - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(hh, 0.0);
        assert!((h2 - 1f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn diagonal_constant_closed_form() {
        let c = 0.3;
        let h = Hamiltonian::from_potential(&PotentialSpec::Diagonal { params: Profile::Constant { value: c } }).unwrap();
        let t = 2.0;
        let [h1, hh, h2] = h.sample(t);
        assert!((h1 - (2.0 * c * t).cosh()).abs() < 1e-14);
        assert!((hh - (2.0 * c * t).sinh()).abs() < 1e-14);
        assert!((h2 - (2.0 * c * t).cosh()).abs() < 1e-14);
    }

    #[test]
    fn general_gauge_matches_closed_forms() {
        let bump = Profile::Bump { amplitude: 0.8, start: 0.0, end: 2.0 };
        let gen = PotentialSpec::General { params: GeneralParams { q1: Profile::Zero, q2: bump.clone() } };
        let forced = GeneralGauge::new(&gen);
        let closed = GaugePath::new(&PotentialSpec::OffDiagonal { params: bump });
        for t in [0.3, 1.0, 1.7, 2.5] {
            let a = forced.eval(t);
            let b = closed.n0(t);
            assert!(crate::mat::max_abs_real(&(a - b)) < 1e-12, "t = {t}");
            assert!((a.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_rejects_nan() {
        let spec = PotentialSpec::Tabulated { t: vec![0.0, 1.0], q1: vec![0.0, f64::NAN], q2: vec![0.0, 0.0] };
        assert!(matches!(build_hamiltonian(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tabulated_piecewise_constant() {
        let spec = PotentialSpec::Tabulated { t: vec![0.0, 1.0, 2.0], q1: vec![0.0; 3], q2: vec![0.5, -0.25, 0.0] };
        let g = GaugePath::new(&spec);
        assert!((g.g(1.5).unwrap() - (0.5 - 0.125)).abs() < 1e-15);
        assert!((g.g(5.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn clock_and_eta() {
        let h = Hamiltonian::constant(4.0, 0.0, 4.0).unwrap();
        assert!((clock(&h, 1.0) - 4.0).abs() < 1e-13);
        let eta = eta_grid(&h, 2, 10.0).unwrap();
        assert!((eta[1] - 0.25).abs() < 1e-12 && (eta[2] - 0.5).abs() < 1e-12);
        let h = Hamiltonian::from_potential(&off(0.5)).unwrap();
        assert_eq!(clock(&h, 5.0), 5.0);
        let degenerate = Hamiltonian::direct(|t| [(-2.0 * t).exp(), 0.0, 0.0], true, false, vec![]);
        assert!(matches!(eta_grid(&degenerate, 3, 20.0), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn potential_json_schema() {
        let s = r#"{"kind":"off_diagonal","params":{"law":"constant","value":0.5}}"#;
        let spec: PotentialSpec = serde_json::from_str(s).unwrap();
        assert_eq!(spec, off(0.5));
        let s = r#"{"kind":"tabulated","t":[0,1],"q1":[0,0],"q2":[1,0]}"#;
        let spec: PotentialSpec = serde_json::from_str(s).unwrap();
        spec.validate().unwrap();
        let s = r#"{"kind":"zero"}"#;
        assert_eq!(serde_json::from_str::<PotentialSpec>(s).unwrap(), PotentialSpec::zero());
    }
}
