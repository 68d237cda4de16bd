//! Elements of the full invariance group of free nonrelativistic motion —
//! a Moebius (fractional linear) time map paired with a static Galilei
//! transformation — together with their composition law, actions on events
//! and trajectories, the Schwarzian derivative, and action-cocycle checks.
//!
//! A `GroupElement` (sigma, g) acts as the composite map
//!
//! ```text
//!   xi  = (R x + a + v t) / (gamma t + delta)
//!   tau = (alpha t + beta) / (gamma t + delta)
//! ```
//!
//! i.e. the Galilei part is applied inside the Moebius scaling. Composition
//! re-canonicalizes through the conjugation rule, under which the static
//! Galilei transformations form an invariant subgroup.

use rand::Rng;
use thiserror::Error;

use crate::dynamics::{PhaseSpaceState, Trajectory};
use crate::numeric;
use crate::EPS_SING;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("Moebius determinant {0} is not positive; orientation-reversing time maps are excluded")]
    NonPositiveDeterminant(f64),
    #[error("matrix is not a proper rotation: {0}")]
    NotARotation(String),
    #[error("event at t = {t} sits on the Moebius pole (|gamma t + delta| = {s_abs:.3e})")]
    SingularLocus { t: f64, s_abs: f64 },
    #[error("trajectory window crosses the Moebius pole at t* = {0}")]
    WindowCrossesPole(f64),
    #[error("time map is stationary at t = {0}")]
    StationaryMap(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Downstream(String),
}

/// A real fractional linear time map tau = (alpha t + beta)/(gamma t + delta),
/// stored with determinant exactly normalized to one.
///
/// The induced spatial scale of the paired action is 1/(gamma t + delta).
/// The elements M and -M are kept distinct: -I flips the sign of the
/// spatial scale and realizes parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl MoebiusMap {
    /// Normalize (alpha, beta, gamma, delta) so alpha*delta - beta*gamma = 1.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, GroupError> {
        let det = alpha * delta - beta * gamma;
        if !(det > 0.0) || !det.is_finite() {
            return Err(GroupError::NonPositiveDeterminant(det));
        }
        let k = det.sqrt();
        Ok(Self { alpha: alpha / k, beta: beta / k, gamma: gamma / k, delta: delta / k })
    }

    pub fn identity() -> Self {
        Self { alpha: 1.0, beta: 0.0, gamma: 0.0, delta: 1.0 }
    }

    /// The inversion element (0, -1, 1, 0).
    pub fn inversion() -> Self {
        Self { alpha: 0.0, beta: -1.0, gamma: 1.0, delta: 0.0 }
    }

    /// Parity: the element -I, which flips the sign of the spatial scale.
    pub fn parity() -> Self {
        Self { alpha: -1.0, beta: 0.0, gamma: 0.0, delta: -1.0 }
    }

    pub fn time_translation(b: f64) -> Self {
        Self { alpha: 1.0, beta: b, gamma: 0.0, delta: 1.0 }
    }

    /// Dilation with scale lambda: tau = lambda^2 t, xi = lambda x.
    pub fn dilation(lambda: f64) -> Self {
        assert!(lambda != 0.0);
        Self { alpha: lambda, beta: 0.0, gamma: 0.0, delta: 1.0 / lambda }
    }

    /// The one-parameter family of time-dependent scalings.
    pub fn expansion(gamma: f64) -> Self {
        Self { alpha: 1.0, beta: 0.0, gamma, delta: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// Scale factor s(t) = gamma t + delta.
    pub fn scale(&self, t: f64) -> f64 {
        self.gamma * t + self.delta
    }

    /// The time map h(t).
    pub fn h(&self, t: f64) -> f64 {
        (self.alpha * t + self.beta) / self.scale(t)
    }

    /// Inverse time map: the t with h(t) = tau.
    pub fn h_inverse(&self, tau: f64) -> f64 {
        (self.delta * tau - self.beta) / (-self.gamma * tau + self.alpha)
    }

    /// Location of the pole t* = -delta/gamma, infinite for gamma = 0.
    pub fn pole(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            -self.delta / self.gamma
        }
    }

    /// Matrix product of 2x2 representatives, renormalized.
    pub fn matmul(&self, rhs: &MoebiusMap) -> MoebiusMap {
        let alpha = self.alpha * rhs.alpha + self.beta * rhs.gamma;
        let beta = self.alpha * rhs.beta + self.beta * rhs.delta;
        let gamma = self.gamma * rhs.alpha + self.delta * rhs.gamma;
        let delta = self.gamma * rhs.beta + self.delta * rhs.delta;
        // determinant of the product is 1 up to rounding and positive, so
        // renormalizing preserves the sign of the representative
        let k = (alpha * delta - beta * gamma).sqrt();
        MoebiusMap { alpha: alpha / k, beta: beta / k, gamma: gamma / k, delta: delta / k }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { alpha: self.delta, beta: -self.beta, gamma: -self.gamma, delta: self.alpha }
    }

    pub fn max_param_dev(&self, rhs: &MoebiusMap) -> f64 {
        (self.alpha - rhs.alpha)
            .abs()
            .max((self.beta - rhs.beta).abs())
            .max((self.gamma - rhs.gamma).abs())
            .max((self.delta - rhs.delta).abs())
    }
}

/// A scalar time map with its first three derivatives in closed form.
pub trait TimeMap {
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    fn d3(&self, t: f64) -> f64;
}

impl TimeMap for MoebiusMap {
    fn value(&self, t: f64) -> f64 {
        self.h(t)
    }
    fn d1(&self, t: f64) -> f64 {
        let s = self.scale(t);
        1.0 / (s * s)
    }
    fn d2(&self, t: f64) -> f64 {
        let s = self.scale(t);
        -2.0 * self.gamma / (s * s * s)
    }
    fn d3(&self, t: f64) -> f64 {
        let s = self.scale(t);
        6.0 * self.gamma * self.gamma / (s * s * s * s)
    }
}

/// Monomial time map t^p, handy as a non-Moebius control.
#[derive(Debug, Clone, Copy)]
pub struct PowerTimeMap {
    pub power: i32,
}

impl TimeMap for PowerTimeMap {
    fn value(&self, t: f64) -> f64 {
        t.powi(self.power)
    }
    fn d1(&self, t: f64) -> f64 {
        self.power as f64 * t.powi(self.power - 1)
    }
    fn d2(&self, t: f64) -> f64 {
        (self.power * (self.power - 1)) as f64 * t.powi(self.power - 2)
    }
    fn d3(&self, t: f64) -> f64 {
        (self.power * (self.power - 1) * (self.power - 2)) as f64 * t.powi(self.power - 3)
    }
}

/// Schwarzian derivative h'''/h' - (3/2)(h''/h')^2 from closed-form
/// derivatives.
pub fn schwarzian(map: &dyn TimeMap, t: f64) -> Result<f64, GroupError> {
    let d1 = map.d1(t);
    if d1 == 0.0 {
        return Err(GroupError::StationaryMap(t));
    }
    let r2 = map.d2(t) / d1;
    Ok(map.d3(t) / d1 - 1.5 * r2 * r2)
}

/// A connected static Galilei transformation: rigid rotation R, spatial
/// translation a, boost v, in d in {1, 2, 3} dimensions. Acts as
/// xi = R x + a + v t, tau = t.
#[derive(Debug, Clone, PartialEq)]
pub struct GalileiElement {
    pub d: usize,
    /// Row-major d x d rotation matrix.
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    pub v: Vec<f64>,
}

impl GalileiElement {
    pub fn new(d: usize, r: Vec<f64>, a: Vec<f64>, v: Vec<f64>) -> Result<Self, GroupError> {
        if !(1..=3).contains(&d) {
            return Err(GroupError::DimensionMismatch { expected: 3, got: d });
        }
        if r.len() != d * d || a.len() != d || v.len() != d {
            return Err(GroupError::DimensionMismatch { expected: d, got: r.len() });
        }
        // orthogonality: R^T R = 1 within 1e-9
        for i in 0..d {
            for j in 0..d {
                let mut dot = 0.0;
                for k in 0..d {
                    dot += r[k * d + i] * r[k * d + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-9 {
                    return Err(GroupError::NotARotation(format!(
                        "R^T R deviates by {:.3e} at ({i},{j})",
                        (dot - target).abs()
                    )));
                }
            }
        }
        let det = match d {
            1 => r[0],
            2 => r[0] * r[3] - r[1] * r[2],
            _ => {
                r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6])
                    + r[2] * (r[3] * r[7] - r[4] * r[6])
            }
        };
        if (det - 1.0).abs() > 1e-9 {
            return Err(GroupError::NotARotation(format!("det R = {det}, want +1")));
        }
        Ok(Self { d, r, a, v })
    }

    pub fn identity(d: usize) -> Self {
        let mut r = vec![0.0; d * d];
        for i in 0..d {
            r[i * d + i] = 1.0;
        }
        Self { d, r, a: vec![0.0; d], v: vec![0.0; d] }
    }

    pub fn boost(v: Vec<f64>) -> Self {
        let d = v.len();
        let mut g = Self::identity(d);
        g.v = v;
        g
    }

    pub fn translation(a: Vec<f64>) -> Self {
        let d = a.len();
        let mut g = Self::identity(d);
        g.a = a;
        g
    }

    pub fn rotation_2d(theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        Self { d: 2, r: vec![c, -s, s, c], a: vec![0.0; 2], v: vec![0.0; 2] }
    }

    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        (0..d)
            .map(|i| (0..d).map(|j| self.r[i * d + j] * x[j]).sum())
            .collect()
    }

    /// Group product: (self . rhs)(x) = self(rhs(x)).
    pub fn product(&self, rhs: &GalileiElement) -> GalileiElement {
        assert_eq!(self.d, rhs.d);
        let d = self.d;
        let mut r = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r[i * d + j] += self.r[i * d + k] * rhs.r[k * d + j];
                }
            }
        }
        let ra = self.rotate(&rhs.a);
        let rv = self.rotate(&rhs.v);
        let a = ra.iter().zip(&self.a).map(|(x, y)| x + y).collect();
        let v = rv.iter().zip(&self.v).map(|(x, y)| x + y).collect();
        GalileiElement { d, r, a, v }
    }

    pub fn inverse(&self) -> GalileiElement {
        let d = self.d;
        let mut rt = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                rt[i * d + j] = self.r[j * d + i];
            }
        }
        let g = GalileiElement { d, r: rt, a: vec![0.0; d], v: vec![0.0; d] };
        let a = g.rotate(&self.a).iter().map(|x| -x).collect();
        let v = g.rotate(&self.v).iter().map(|x| -x).collect();
        GalileiElement { a, v, ..g }
    }

    pub fn max_param_dev(&self, rhs: &GalileiElement) -> f64 {
        let mr = self
            .r
            .iter()
            .zip(&rhs.r)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let ma = self
            .a
            .iter()
            .zip(&rhs.a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let mv = self
            .v
            .iter()
            .zip(&rhs.v)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        mr.max(ma).max(mv)
    }
}

/// Conjugation of a static Galilei element by a Moebius map:
/// sigma^{-1} g sigma leaves the rotation alone and mixes boost and
/// translation through the 2x2 matrix (alpha, gamma; beta, delta).
pub fn conjugate(sigma: &MoebiusMap, g: &GalileiElement) -> GalileiElement {
    let d = g.d;
    let mut a = vec![0.0; d];
    let mut v = vec![0.0; d];
    for c in 0..d {
        v[c] = sigma.alpha * g.v[c] + sigma.gamma * g.a[c];
        a[c] = sigma.beta * g.v[c] + sigma.delta * g.a[c];
    }
    GalileiElement { d, r: g.r.clone(), a, v }
}

/// An event (x, t).
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeEvent {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpacetimeEvent {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        assert!(x.iter().all(|v| v.is_finite()) && t.is_finite());
        Self { x, t }
    }
}

/// Element of the full invariance group, stored canonically as a Moebius
/// map applied after a static Galilei part.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub sigma: MoebiusMap,
    pub g: GalileiElement,
}

/// Construct and canonicalize an element from raw parameters.
pub fn make_element(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    r: Vec<f64>,
    a: Vec<f64>,
    v: Vec<f64>,
) -> Result<GroupElement, GroupError> {
    let d = a.len();
    Ok(GroupElement {
        sigma: MoebiusMap::new(alpha, beta, gamma, delta)?,
        g: GalileiElement::new(d, r, a, v)?,
    })
}

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        Self { sigma: MoebiusMap::identity(), g: GalileiElement::identity(d) }
    }

    pub fn from_moebius(sigma: MoebiusMap, d: usize) -> Self {
        Self { sigma, g: GalileiElement::identity(d) }
    }

    pub fn from_galilei(g: GalileiElement) -> Self {
        Self { sigma: MoebiusMap::identity(), g }
    }

    pub fn dim(&self) -> usize {
        self.g.d
    }

    pub fn max_param_dev(&self, rhs: &GroupElement) -> f64 {
        self.sigma.max_param_dev(&rhs.sigma).max(self.g.max_param_dev(&rhs.g))
    }
}

/// Semi-direct composition: act(compose(e1, e2), ev) = act(e1, act(e2, ev)).
/// Moebius parts multiply as 2x2 matrices; the Galilei part of e1 is pulled
/// through e2's Moebius part by conjugation.
pub fn compose(e1: &GroupElement, e2: &GroupElement) -> GroupElement {
    assert_eq!(e1.dim(), e2.dim());
    let sigma = e1.sigma.matmul(&e2.sigma);
    let g = conjugate(&e2.sigma, &e1.g).product(&e2.g);
    GroupElement { sigma, g }
}

/// Group inverse: compose(e, inverse(e)) is the identity.
pub fn inverse(e: &GroupElement) -> GroupElement {
    let sigma_inv = e.sigma.inverse();
    let g = conjugate(&sigma_inv, &e.g.inverse());
    GroupElement { sigma: sigma_inv, g }
}

/// Apply an element to an event with an explicit singular-locus guard.
pub fn act_with_guard(
    e: &GroupElement,
    ev: &SpacetimeEvent,
    eps_sing: f64,
) -> Result<SpacetimeEvent, GroupError> {
    if ev.x.len() != e.dim() {
        return Err(GroupError::DimensionMismatch { expected: e.dim(), got: ev.x.len() });
    }
    let s = e.sigma.scale(ev.t);
    if s.abs() <= eps_sing {
        return Err(GroupError::SingularLocus { t: ev.t, s_abs: s.abs() });
    }
    let y = e.g.rotate(&ev.x);
    let xi: Vec<f64> = (0..e.dim())
        .map(|c| (y[c] + e.g.a[c] + e.g.v[c] * ev.t) / s)
        .collect();
    Ok(SpacetimeEvent { x: xi, t: e.sigma.h(ev.t) })
}

/// Apply an element to an event with the default guard.
pub fn act(e: &GroupElement, ev: &SpacetimeEvent) -> Result<SpacetimeEvent, GroupError> {
    act_with_guard(e, ev, EPS_SING)
}

/// Transform a sampled trajectory: maps every sample to new coordinates and
/// recomputes velocities by the chain rule
/// d xi / d tau = s (R xdot + v) - gamma (R x + a + v t).
pub fn act_trajectory(e: &GroupElement, tr: &Trajectory) -> Result<Trajectory, GroupError> {
    let d = e.dim();
    if tr.system.d != d {
        return Err(GroupError::DimensionMismatch { expected: d, got: tr.system.d });
    }
    let s_first = e.sigma.scale(tr.times[0]);
    let s_last = e.sigma.scale(*tr.times.last().unwrap());
    if s_first * s_last <= 0.0 || tr.times.iter().any(|&t| e.sigma.scale(t).abs() <= EPS_SING) {
        return Err(GroupError::WindowCrossesPole(e.sigma.pole()));
    }
    let m = tr.system.m;
    let mut samples: Vec<(f64, PhaseSpaceState)> = Vec::with_capacity(tr.len());
    for st in &tr.states {
        let t = st.t;
        let s = e.sigma.scale(t);
        let tau = e.sigma.h(t);
        let mut x = vec![0.0; st.x.len()];
        let mut p = vec![0.0; st.p.len()];
        for i in 0..st.n {
            let rx = e.g.rotate(st.xi(i));
            let rv = e.g.rotate(&st.pi(i).iter().map(|pi| pi / m).collect::<Vec<_>>());
            for c in 0..d {
                let u = rx[c] + e.g.a[c] + e.g.v[c] * t;
                x[i * d + c] = u / s;
                p[i * d + c] = m * (s * (rv[c] + e.g.v[c]) - e.sigma.gamma * u);
            }
        }
        samples.push((tau, PhaseSpaceState::new(tau, x, p, st.n, st.d, st.m)));
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let times = samples.iter().map(|(tau, _)| *tau).collect();
    let states = samples.into_iter().map(|(_, st)| st).collect();
    Ok(Trajectory { times, states, system: tr.system })
}

/// Square of the coset element (inversion . g). Returns the Galilei
/// parameters of the square together with a flag telling whether the
/// Moebius part came out as parity (-I).
pub fn coset_square(g: &GalileiElement) -> (GalileiElement, bool) {
    let coset = GroupElement { sigma: MoebiusMap::inversion(), g: g.clone() };
    let sq = compose(&coset, &coset);
    let is_parity = sq.sigma.max_param_dev(&MoebiusMap::parity()) < 1e-12;
    (sq.g, is_parity)
}

/// Boundary term F(x, t) of the action cocycle for a group element acting
/// on a particle of mass m, in closed form:
///
/// ```text
///   F = (m/2) [ -(gamma/s) |u|^2 + 2 v . u - |v|^2 t ],   u = R x + a + v t
/// ```
///
/// The action of the transformed path differs from the original action by
/// F(end) - F(start) on every path, which is what `action_cocycle_check`
/// certifies.
#[derive(Debug, Clone)]
pub struct CocycleTerm {
    pub element: GroupElement,
    pub mass: f64,
}

impl CocycleTerm {
    pub fn new(element: GroupElement, mass: f64) -> Self {
        Self { element, mass }
    }

    /// Evaluate F at an event (single particle).
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let e = &self.element;
        let s = e.sigma.scale(t);
        let y = e.g.rotate(x);
        let mut u2 = 0.0;
        let mut vu = 0.0;
        let mut v2 = 0.0;
        for c in 0..e.dim() {
            let u = y[c] + e.g.a[c] + e.g.v[c] * t;
            u2 += u * u;
            vu += e.g.v[c] * u;
            v2 += e.g.v[c] * e.g.v[c];
        }
        0.5 * self.mass * (-(e.sigma.gamma / s) * u2 + 2.0 * vu - v2 * t)
    }
}

/// Outcome of an action form-invariance check on two paths sharing
/// endpoints.
#[derive(Debug, Clone)]
pub struct CocycleReport {
    /// S' - S for the given path.
    pub defect_given: f64,
    /// S' - S for the comparison path with the same endpoints.
    pub defect_second: f64,
    /// Difference of the two defects; vanishes when the boundary term
    /// depends on endpoints only.
    pub difference: f64,
    /// F(end) - F(start) predicted by the closed-form cocycle.
    pub predicted: f64,
}

fn path_action(tr: &Trajectory) -> f64 {
    let m = tr.system.m;
    let ys: Vec<f64> = tr
        .states
        .iter()
        .map(|s| 0.5 / m * s.p.iter().map(|p| p * p).sum::<f64>())
        .collect();
    numeric::trapezoid(&tr.times, &ys)
}

fn path_defect(e: &GroupElement, tr: &Trajectory) -> Result<f64, GroupError> {
    let transformed = act_trajectory(e, tr)?;
    Ok(path_action(&transformed) - path_action(tr))
}

/// Compare the free-action defect S' - S of the given path against a
/// second path sharing its endpoints; both must equal the endpoint
/// difference of the cocycle term.
pub fn action_cocycle_check(
    e: &GroupElement,
    tr: &Trajectory,
    m: f64,
) -> Result<CocycleReport, GroupError> {
    let defect_given = path_defect(e, tr)?;
    // comparison path: straight chord between the endpoints plus a smooth
    // interior bump, sampled on the same time grid
    let t0 = tr.times[0];
    let t1 = *tr.times.last().unwrap();
    let x0 = tr.states[0].x.clone();
    let x1 = tr.states.last().unwrap().x.clone();
    let nd = x0.len();
    let bump = 0.3;
    let sys = tr.system;
    let pos = |t: f64| -> Vec<f64> {
        let w = (t - t0) / (t1 - t0);
        (0..nd)
            .map(|c| {
                x0[c] + (x1[c] - x0[c]) * w
                    + bump * (std::f64::consts::PI * w).sin() * ((c + 1) as f64)
            })
            .collect()
    };
    let vel = |t: f64| -> Vec<f64> {
        let w = (t - t0) / (t1 - t0);
        (0..nd)
            .map(|c| {
                (x1[c] - x0[c]) / (t1 - t0)
                    + bump * std::f64::consts::PI / (t1 - t0)
                        * (std::f64::consts::PI * w).cos()
                        * ((c + 1) as f64)
            })
            .collect()
    };
    let second = Trajectory::sample_analytic(sys, &tr.times, pos, vel);
    let defect_second = path_defect(e, &second)?;

    let cocycle = CocycleTerm::new(e.clone(), m);
    let mut predicted = 0.0;
    // endpoint difference summed over particles
    let (first_state, last_state) = (&tr.states[0], tr.states.last().unwrap());
    for i in 0..first_state.n {
        predicted += cocycle.eval(last_state.xi(i), t1) - cocycle.eval(first_state.xi(i), t0);
    }
    Ok(CocycleReport {
        defect_given,
        defect_second,
        difference: defect_given - defect_second,
        predicted,
    })
}

/// Draw a random rotation, uniform over the connected component.
pub fn random_rotation<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    match d {
        1 => vec![1.0],
        2 => {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![th.cos(), -th.sin(), th.sin(), th.cos()]
        }
        3 => {
            // uniform unit quaternion
            let u1: f64 = rng.gen_range(0.0..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let u3: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
            let (qw, qx, qy, qz) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
            vec![
                1.0 - 2.0 * (qy * qy + qz * qz),
                2.0 * (qx * qy - qz * qw),
                2.0 * (qx * qz + qy * qw),
                2.0 * (qx * qy + qz * qw),
                1.0 - 2.0 * (qx * qx + qz * qz),
                2.0 * (qy * qz - qx * qw),
                2.0 * (qx * qz - qy * qw),
                2.0 * (qy * qz + qx * qw),
                1.0 - 2.0 * (qx * qx + qy * qy),
            ]
        }
        _ => panic!("dimension must be 1, 2, or 3"),
    }
}

/// Draw a random group element with parameters in [-2, 2], rejection
/// sampled so |gamma t + delta| stays above 0.1 across the window (and the
/// scale keeps one sign there).
pub fn sample_element<R: Rng>(rng: &mut R, d: usize, window: (f64, f64)) -> GroupElement {
    loop {
        let alpha = rng.gen_range(-2.0..2.0);
        let beta = rng.gen_range(-2.0..2.0);
        let gamma = rng.gen_range(-2.0..2.0);
        let delta = rng.gen_range(-2.0..2.0);
        let det: f64 = alpha * delta - beta * gamma;
        if det < 0.05 {
            continue;
        }
        let sigma = MoebiusMap::new(alpha, beta, gamma, delta).unwrap();
        let s0 = sigma.scale(window.0);
        let s1 = sigma.scale(window.1);
        if s0 * s1 <= 0.0 || s0.abs() < 0.1 || s1.abs() < 0.1 {
            continue;
        }
        let r = random_rotation(rng, d);
        let a = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = GalileiElement::new(d, r, a, v).expect("sampled rotation is orthogonal");
        return GroupElement { sigma, g };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{free_trajectory, time_grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eye(d: usize) -> Vec<f64> {
        GalileiElement::identity(d).r
    }

    #[test]
    fn make_element_identity_and_normalization() {
        let e = make_element(1.0, 0.0, 0.0, 1.0, eye(1), vec![0.0], vec![0.0]).unwrap();
        assert_eq!(e.max_param_dev(&GroupElement::identity(1)), 0.0);

        // overall scale of the fraction drops out
        let e2 = make_element(2.0, 0.0, 0.0, 2.0, eye(1), vec![0.0], vec![0.0]).unwrap();
        assert!(e2.sigma.max_param_dev(&MoebiusMap::identity()) < 1e-15);

        let sig = make_element(0.0, -1.0, 1.0, 0.0, eye(1), vec![0.0], vec![0.0]).unwrap();
        assert_eq!(sig.sigma, MoebiusMap::inversion());
    }

    #[test]
    fn make_element_rejects_bad_input() {
        assert!(matches!(
            make_element(1.0, 0.0, 0.0, -1.0, eye(1), vec![0.0], vec![0.0]),
            Err(GroupError::NonPositiveDeterminant(_))
        ));
        assert!(matches!(
            make_element(1.0, 0.0, 0.0, 1.0, vec![2.0], vec![0.0], vec![0.0]),
            Err(GroupError::NotARotation(_))
        ));
        // reflection in d = 2 has det -1
        assert!(matches!(
            GalileiElement::new(2, vec![1.0, 0.0, 0.0, -1.0], vec![0.0; 2], vec![0.0; 2]),
            Err(GroupError::NotARotation(_))
        ));
    }

    #[test]
    fn compose_examples() {
        let d = 1;
        let e = sample_element(&mut ChaCha8Rng::seed_from_u64(7), d, (-0.5, 0.5));
        let id = GroupElement::identity(d);
        assert!(compose(&id, &e).max_param_dev(&e) < 1e-15);

        let expansion = GroupElement::from_moebius(MoebiusMap::expansion(1.0), d);
        let shift = GroupElement::from_moebius(MoebiusMap::time_translation(1.0), d);
        let prod = compose(&expansion, &shift);
        let want = MoebiusMap::new(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(prod.sigma.max_param_dev(&want) < 1e-15);
        assert!(prod.g.max_param_dev(&GalileiElement::identity(d)) < 1e-15);

        let sig = GroupElement::from_moebius(MoebiusMap::inversion(), d);
        let sq = compose(&sig, &sig);
        assert!(sq.sigma.max_param_dev(&MoebiusMap::parity()) < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let id = GroupElement::identity(2);
        assert!(inverse(&id).max_param_dev(&id) < 1e-15);

        let sig = MoebiusMap::inversion().inverse();
        assert_eq!((sig.alpha, sig.beta, sig.gamma, sig.delta), (0.0, 1.0, -1.0, 0.0));

        let boost = GroupElement::from_galilei(GalileiElement::boost(vec![0.4, -1.0]));
        let inv = inverse(&boost);
        assert!(inv
            .g
            .max_param_dev(&GalileiElement::boost(vec![-0.4, 1.0]))
            .max(inv.sigma.max_param_dev(&MoebiusMap::identity()))
            < 1e-15);
    }

    #[test]
    fn act_examples() {
        // dilation with alpha = 2, delta = 1/2 on (x, t) = (1, 1)
        let dil = GroupElement::from_moebius(MoebiusMap::new(2.0, 0.0, 0.0, 0.5).unwrap(), 1);
        let out = act(&dil, &SpacetimeEvent::new(vec![1.0], 1.0)).unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-15);
        assert!((out.t - 4.0).abs() < 1e-15);

        let sig = GroupElement::from_moebius(MoebiusMap::inversion(), 1);
        let out = act(&sig, &SpacetimeEvent::new(vec![2.0], 1.0)).unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-15);
        assert!((out.t + 1.0).abs() < 1e-15);

        let id = GroupElement::identity(3);
        let ev = SpacetimeEvent::new(vec![0.1, -0.2, 0.3], 0.7);
        assert_eq!(act(&id, &ev).unwrap(), ev);
    }

    #[test]
    fn act_flags_singular_locus() {
        let sig = GroupElement::from_moebius(MoebiusMap::inversion(), 1);
        assert!(matches!(
            act(&sig, &SpacetimeEvent::new(vec![1.0], 0.0)),
            Err(GroupError::SingularLocus { .. })
        ));
    }

    #[test]
    fn inversion_swaps_position_and_velocity_roles() {
        let (x0, v0) = (0.7, -1.3);
        let times = time_grid(0.5, 2.0, 40);
        let tr = free_trajectory(&[x0], &[v0], 1.0, 1, &times);
        let sig = GroupElement::from_moebius(MoebiusMap::inversion(), 1);
        let out = act_trajectory(&sig, &tr).unwrap();
        // transformed line: xi(tau) = v0 - x0 tau
        let slope = (out.states[5].x[0] - out.states[0].x[0]) / (out.times[5] - out.times[0]);
        let intercept = out.states[0].x[0] - slope * out.times[0];
        assert!((slope + x0).abs() < 1e-12);
        assert!((intercept - v0).abs() < 1e-12);
        // chain-rule momentum agrees with the line's slope
        assert!((out.states[3].p[0] - slope).abs() < 1e-12);
    }

    #[test]
    fn act_trajectory_identity_and_boost() {
        let times = time_grid(0.0, 1.0, 11);
        let tr = free_trajectory(&[0.3], &[0.9], 2.0, 1, &times);
        let id = GroupElement::identity(1);
        let same = act_trajectory(&id, &tr).unwrap();
        for (a, b) in same.states.iter().zip(&tr.states) {
            assert!((a.x[0] - b.x[0]).abs() < 1e-15);
            assert!((a.p[0] - b.p[0]).abs() < 1e-15);
        }

        let boost = GroupElement::from_galilei(GalileiElement::boost(vec![1.5]));
        let rest = free_trajectory(&[0.0], &[0.0], 1.0, 1, &times);
        let moved = act_trajectory(&boost, &rest).unwrap();
        for (k, st) in moved.states.iter().enumerate() {
            assert!((st.x[0] - 1.5 * moved.times[k]).abs() < 1e-15);
            assert!((st.p[0] - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn act_trajectory_rejects_pole_window() {
        let times = time_grid(-0.5, 0.5, 11);
        let tr = free_trajectory(&[0.0], &[1.0], 1.0, 1, &times);
        let sig = GroupElement::from_moebius(MoebiusMap::inversion(), 1);
        assert!(matches!(
            act_trajectory(&sig, &tr),
            Err(GroupError::WindowCrossesPole(_))
        ));
    }

    #[test]
    fn conjugation_examples() {
        let g = GalileiElement { d: 1, r: vec![1.0], a: vec![0.0], v: vec![1.0] };
        let id = MoebiusMap::identity();
        assert!(conjugate(&id, &g).max_param_dev(&g) < 1e-15);

        let dil = MoebiusMap::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let out = conjugate(&dil, &g);
        assert!((out.v[0] - 2.0).abs() < 1e-15);
        assert!(out.a[0].abs() < 1e-15);

        let g2 = GalileiElement { d: 1, r: vec![1.0], a: vec![0.3], v: vec![-0.8] };
        let out = conjugate(&MoebiusMap::inversion(), &g2);
        assert!((out.v[0] - g2.a[0]).abs() < 1e-15);
        assert!((out.a[0] + g2.v[0]).abs() < 1e-15);
    }

    #[test]
    fn coset_square_examples() {
        // identity Galilei part: the square is bare parity
        let (g_sq, parity) = coset_square(&GalileiElement::identity(1));
        assert!(parity);
        assert!(g_sq.max_param_dev(&GalileiElement::identity(1)) < 1e-15);

        // translation by 1 in d = 1
        let g = GalileiElement::translation(vec![1.0]);
        let (g_sq, parity) = coset_square(&g);
        assert!(parity);
        assert!((g_sq.a[0] - 1.0).abs() < 1e-15);
        assert!((g_sq.v[0] - 1.0).abs() < 1e-15);

        // fourth power lands back in the connected static group
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = 3;
            let g = GalileiElement::new(
                d,
                random_rotation(&mut rng, d),
                (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let coset = GroupElement { sigma: MoebiusMap::inversion(), g };
            let fourth = compose(&compose(&coset, &coset), &compose(&coset, &coset));
            assert!(fourth.sigma.max_param_dev(&MoebiusMap::identity()) < 1e-12);
        }
    }

    #[test]
    fn coset_square_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = 2;
            let g = GalileiElement::new(
                d,
                random_rotation(&mut rng, d),
                (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let (sq, parity) = coset_square(&g);
            assert!(parity);
            let r2 = g.product(&GalileiElement { a: vec![0.0; d], v: vec![0.0; d], ..g.clone() });
            let want_a: Vec<f64> = g.rotate(&g.a).iter().zip(&g.v).map(|(ra, v)| ra - v).collect();
            let want_v: Vec<f64> = g.rotate(&g.v).iter().zip(&g.a).map(|(rv, a)| rv + a).collect();
            assert!(sq.r.iter().zip(&r2.r).all(|(x, y)| (x - y).abs() < 1e-12));
            assert!(sq.a.iter().zip(&want_a).all(|(x, y)| (x - y).abs() < 1e-12));
            assert!(sq.v.iter().zip(&want_v).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn schwarzian_examples() {
        let id = MoebiusMap::identity();
        assert_eq!(schwarzian(&id, 0.33).unwrap(), 0.0);

        let map = MoebiusMap::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(schwarzian(&map, 0.0).unwrap().abs() < 1e-12);

        let sq = PowerTimeMap { power: 2 };
        assert_eq!(schwarzian(&sq, 1.0).unwrap(), -1.5);
        assert!(matches!(schwarzian(&sq, 0.0), Err(GroupError::StationaryMap(_))));
    }

    #[test]
    fn cocycle_identity_and_boost() {
        let times = time_grid(0.0, 1.0, 2001);
        let tr = free_trajectory(&[0.0], &[1.0], 1.0, 1, &times);
        let id = GroupElement::identity(1);
        let report = action_cocycle_check(&id, &tr, 1.0).unwrap();
        assert!(report.defect_given.abs() < 1e-12);

        // boost v = 1 on x(t) = t gives defect 3/2, matching m(vx + v^2 t/2)
        let boost = GroupElement::from_galilei(GalileiElement::boost(vec![1.0]));
        let report = action_cocycle_check(&boost, &tr, 1.0).unwrap();
        assert!((report.defect_given - 1.5).abs() < 1e-10, "defect {}", report.defect_given);
        assert!((report.predicted - 1.5).abs() < 1e-12);
        assert!(report.difference.abs() < 1e-6);
    }

    #[test]
    fn cocycle_endpoint_dependence_under_expansion() {
        let times = time_grid(0.0, 1.0, 4001);
        let tr = free_trajectory(&[0.4], &[-0.6], 1.3, 1, &times);
        let exp = GroupElement::from_moebius(MoebiusMap::expansion(0.3), 1);
        let report = action_cocycle_check(&exp, &tr, 1.3).unwrap();
        assert!(report.difference.abs() < 1e-6, "difference {}", report.difference);
        assert!(
            (report.defect_given - report.predicted).abs() < 1e-6,
            "defect {} vs predicted {}",
            report.defect_given,
            report.predicted
        );
    }

    #[test]
    fn sampled_elements_satisfy_group_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let window = (-1.0, 1.0);
        for _ in 0..200 {
            let d = 1 + (rng.gen_range(0..3) as usize % 3);
            let e1 = sample_element(&mut rng, d, window);
            let e2 = sample_element(&mut rng, d, window);
            let e3 = sample_element(&mut rng, d, window);
            let left = compose(&compose(&e1, &e2), &e3);
            let right = compose(&e1, &compose(&e2, &e3));
            assert!(left.max_param_dev(&right) < 1e-10);
            let e_inv = inverse(&e1);
            assert!(compose(&e1, &e_inv).max_param_dev(&GroupElement::identity(d)) < 1e-12);
            assert!(compose(&e_inv, &e1).max_param_dev(&GroupElement::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn action_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let window = (-1.0, 1.0);
        let mut tested = 0;
        while tested < 200 {
            let d = 2;
            let e1 = sample_element(&mut rng, d, window);
            let e2 = sample_element(&mut rng, d, window);
            let ev = SpacetimeEvent::new(
                (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                rng.gen_range(-1.0..1.0),
            );
            let Ok(step) = act(&e2, &ev) else { continue };
            let Ok(two_step) = act(&e1, &step) else { continue };
            let Ok(direct) = act(&compose(&e1, &e2), &ev) else { continue };
            let scale: f64 = 1.0 + two_step.x.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let dev = direct
                .x
                .iter()
                .zip(&two_step.x)
                .map(|(a, b)| (a - b).abs())
                .fold((direct.t - two_step.t).abs(), f64::max);
            assert!(dev / scale < 1e-10, "deviation {dev}");
            tested += 1;
        }
    }
}
