//! Conserved charges of the invariance group on phase-space states: the
//! SL(2,R) triple (H, D, A), the Galilei charges (P, K, J), infinitesimal
//! variations and their boundary term, and the transformation behavior of
//! the charges (adjoint triple, (K, P) doublet).

use thiserror::Error;

use crate::dynamics::{MechSystem, PhaseSpaceState, Trajectory};
use crate::group::{act, GroupElement, MoebiusMap, SpacetimeEvent};
use crate::numeric;

#[derive(Debug, Error)]
pub enum NoetherError {
    #[error("reference charges are linearly dependent; pick independent reference trajectories")]
    DegenerateFit,
    #[error("no regular sample times away from the Moebius pole")]
    NoRegularTimes,
}

/// Infinitesimal SL(2,R) parameters: time translation beta, dilation
/// epsilon, expansion gamma, used to first order.
#[derive(Debug, Clone, Copy, Default)]
pub struct InfinitesimalSl2r {
    pub beta: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl InfinitesimalSl2r {
    /// delta t = beta + 2 epsilon t - gamma t^2.
    pub fn delta_t(&self, t: f64) -> f64 {
        self.beta + 2.0 * self.epsilon * t - self.gamma * t * t
    }
}

/// First-order variation (delta t, delta x) at a point of a path.
pub fn infinitesimal_variation(
    par: &InfinitesimalSl2r,
    t: f64,
    x: &[f64],
    xdot: &[f64],
) -> (f64, Vec<f64>) {
    let dt = par.delta_t(t);
    let fx = par.epsilon - par.gamma * t;
    let dx = x.iter().zip(xdot).map(|(xi, vi)| fx * xi - dt * vi).collect();
    (dt, dx)
}

/// Boundary term of the varied free Lagrangian for one particle:
/// -(beta + 2 epsilon t - gamma t^2) m xdot^2/2 - gamma m x^2/2.
pub fn boundary_term(par: &InfinitesimalSl2r, t: f64, x: &[f64], xdot: &[f64], m: f64) -> f64 {
    let v2: f64 = xdot.iter().map(|v| v * v).sum();
    let x2: f64 = x.iter().map(|xi| xi * xi).sum();
    -par.delta_t(t) * 0.5 * m * v2 - par.gamma * 0.5 * m * x2
}

/// SL(2,R) charges of a state. When a system is supplied its full
/// Hamiltonian (with potential or minimal coupling) enters H, D, and A;
/// otherwise the free kinetic energy is used.
pub fn sl2r_charges(s: &PhaseSpaceState, sys: Option<&MechSystem>) -> (f64, f64, f64) {
    let h = match sys {
        Some(sys) => sys.hamiltonian(s),
        None => s.p.iter().map(|p| p * p).sum::<f64>() / (2.0 * s.m),
    };
    let px: f64 = s.p.iter().zip(&s.x).map(|(p, x)| p * x).sum();
    let x2: f64 = s.x.iter().map(|x| x * x).sum();
    let d = px - 2.0 * s.t * h;
    let a = 0.5 * s.m * x2 - s.t * px + s.t * s.t * h;
    (h, d, a)
}

/// Galilei charges of a state: total momentum P, boost charge
/// K = t P - m sum(x), and the rotation charge J (absent in d = 1, scalar
/// in d = 2, a 3-vector in d = 3).
pub fn galilei_charges(s: &PhaseSpaceState) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let d = s.d;
    let mut p = vec![0.0; d];
    let mut xsum = vec![0.0; d];
    for i in 0..s.n {
        for c in 0..d {
            p[c] += s.p[i * d + c];
            xsum[c] += s.x[i * d + c];
        }
    }
    let k: Vec<f64> = (0..d).map(|c| s.t * p[c] - s.m * xsum[c]).collect();
    let j = match d {
        1 => None,
        2 => {
            let mut jz = 0.0;
            for i in 0..s.n {
                jz += s.x[2 * i] * s.p[2 * i + 1] - s.x[2 * i + 1] * s.p[2 * i];
            }
            Some(vec![jz])
        }
        _ => {
            let mut j = vec![0.0; 3];
            for i in 0..s.n {
                let x = s.xi(i);
                let pp = s.pi(i);
                j[0] += x[1] * pp[2] - x[2] * pp[1];
                j[1] += x[2] * pp[0] - x[0] * pp[2];
                j[2] += x[0] * pp[1] - x[1] * pp[0];
            }
            Some(j)
        }
    };
    (p, k, j)
}

/// All charges of a state at one instant.
#[derive(Debug, Clone)]
pub struct ChargeSet {
    pub h: f64,
    pub d: f64,
    pub a: f64,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
    pub j: Option<Vec<f64>>,
}

impl ChargeSet {
    pub fn evaluate(s: &PhaseSpaceState, sys: Option<&MechSystem>) -> Self {
        let (h, d, a) = sl2r_charges(s, sys);
        let (p, k, j) = galilei_charges(s);
        Self { h, d, a, p, k, j }
    }
}

/// Relative drifts of every charge family along a trajectory, measured
/// against the first sample with |Q(t) - Q(0)| / (1 + |Q(0)|).
#[derive(Debug, Clone)]
pub struct ChargeDrift {
    pub h: f64,
    pub d: f64,
    pub a: f64,
    pub p: f64,
    pub k: f64,
    pub j: Option<f64>,
}

impl ChargeDrift {
    pub fn max_defined(&self) -> f64 {
        self.h
            .max(self.d)
            .max(self.a)
            .max(self.p)
            .max(self.k)
            .max(self.j.unwrap_or(0.0))
    }
}

pub fn charge_drift(tr: &Trajectory) -> ChargeDrift {
    let sys = tr.system;
    let first = ChargeSet::evaluate(&tr.states[0], Some(&sys));
    let mut drift = ChargeDrift { h: 0.0, d: 0.0, a: 0.0, p: 0.0, k: 0.0, j: first.j.as_ref().map(|_| 0.0) };
    for st in &tr.states[1..] {
        let c = ChargeSet::evaluate(st, Some(&sys));
        drift.h = drift.h.max(numeric::rel_dev(c.h, first.h));
        drift.d = drift.d.max(numeric::rel_dev(c.d, first.d));
        drift.a = drift.a.max(numeric::rel_dev(c.a, first.a));
        drift.p = drift.p.max(numeric::rel_dev_slice(&c.p, &first.p));
        drift.k = drift.k.max(numeric::rel_dev_slice(&c.k, &first.k));
        if let (Some(j), Some(j0), Some(dj)) = (c.j.as_ref(), first.j.as_ref(), drift.j.as_mut()) {
            *dj = dj.max(numeric::rel_dev_slice(j, j0));
        }
    }
    drift
}

/// Finite-difference residual of the Noether identity
/// d/dt (sum_I p_I . delta x_I - F) = 0 along a sampled solution. The
/// boundary term is the free one plus delta_t * V for systems with a
/// potential.
pub fn noether_identity_residual(par: &InfinitesimalSl2r, tr: &Trajectory) -> f64 {
    let sys = tr.system;
    let xs: Vec<f64> = tr
        .states
        .iter()
        .map(|s| {
            let mut acc = 0.0;
            for i in 0..s.n {
                let xi = s.xi(i);
                let pi = s.pi(i);
                let vi: Vec<f64> = pi.iter().map(|p| p / s.m).collect();
                let (_, dx) = infinitesimal_variation(par, s.t, xi, &vi);
                acc += pi.iter().zip(&dx).map(|(p, d)| p * d).sum::<f64>();
                acc -= boundary_term(par, s.t, xi, &vi, s.m);
            }
            acc - par.delta_t(s.t) * sys.potential(&s.x)
        })
        .collect();
    let scale = 1.0 + xs[0].abs();
    let mut worst = 0.0f64;
    for k in 1..xs.len() - 1 {
        let dt = tr.times[k + 1] - tr.times[k - 1];
        worst = worst.max(((xs[k + 1] - xs[k - 1]) / dt).abs());
    }
    worst / scale
}

/// Charges of the Moebius-transformed image of the free line through
/// (x0, v0) with mass m (d = 1), computed through the event action alone:
/// two regular events on the line are mapped and the image line's slope
/// and intercept are read off.
pub fn transformed_line_charges(
    sigma: &MoebiusMap,
    x0: f64,
    v0: f64,
    m: f64,
) -> Result<ChargeSet, NoetherError> {
    let e = GroupElement::from_moebius(*sigma, 1);
    // pick two times with |gamma t + delta| bounded well away from zero:
    // on the far side of the pole when the map has one, around the origin
    // otherwise (where |delta| >= (1 - |beta gamma|)/|alpha| is itself
    // bounded below for a unimodular map with small gamma)
    let (t1, t2) = if sigma.gamma.abs() >= 0.05 {
        let step = 0.5 / sigma.gamma.abs();
        (sigma.pole() + step, sigma.pole() + 2.0 * step)
    } else {
        let s_plus = sigma.scale(1.0).abs();
        let s_minus = sigma.scale(-1.0).abs();
        (0.0, if s_plus >= s_minus { 1.0 } else { -1.0 })
    };
    if sigma.scale(t1).abs() < 1e-6 || sigma.scale(t2).abs() < 1e-6 {
        return Err(NoetherError::NoRegularTimes);
    }
    let ev = |t: f64| SpacetimeEvent::new(vec![x0 + v0 * t], t);
    let out1 = act(&e, &ev(t1)).expect("regular time");
    let out2 = act(&e, &ev(t2)).expect("regular time");
    let w = (out2.x[0] - out1.x[0]) / (out2.t - out1.t);
    let (xi, tau) = (out1.x[0], out1.t);
    let h = 0.5 * m * w * w;
    let p = m * w;
    let k = tau * p - m * xi;
    let d = p * xi - 2.0 * tau * h;
    let a = 0.5 * m * xi * xi - tau * p * xi + tau * tau * h;
    Ok(ChargeSet { h, d, a, p: vec![p], k: vec![k], j: None })
}

/// Charges of the untransformed free line at t = 0.
pub fn free_line_charges(x0: f64, v0: f64, m: f64) -> ChargeSet {
    let s = PhaseSpaceState::new(0.0, vec![x0], vec![m * v0], 1, 1, m);
    ChargeSet::evaluate(&s, None)
}

/// The matrix M(sigma) mapping (H, D, A) of a free solution to the charges
/// of its sigma-transformed image, fitted from three reference lines.
pub fn adjoint_matrix(sigma: &MoebiusMap) -> Result<[[f64; 3]; 3], NoetherError> {
    adjoint_matrix_with_refs(sigma, &[(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)])
}

/// Same fit with caller-supplied reference lines (x0, v0); fails with
/// `DegenerateFit` when their charge triples are linearly dependent.
pub fn adjoint_matrix_with_refs(
    sigma: &MoebiusMap,
    refs: &[(f64, f64); 3],
) -> Result<[[f64; 3]; 3], NoetherError> {
    let m = 1.0;
    let mut c = [[0.0; 3]; 3]; // columns: charge triples of references
    let mut cp = [[0.0; 3]; 3];
    for (i, &(x0, v0)) in refs.iter().enumerate() {
        let orig = free_line_charges(x0, v0, m);
        let tran = transformed_line_charges(sigma, x0, v0, m)?;
        c[0][i] = orig.h;
        c[1][i] = orig.d;
        c[2][i] = orig.a;
        cp[0][i] = tran.h;
        cp[1][i] = tran.d;
        cp[2][i] = tran.a;
    }
    // each row r of M solves (C^T) m_r = row r of C'
    let a_rows: Vec<Vec<f64>> = (0..3).map(|i| vec![c[0][i], c[1][i], c[2][i]]).collect();
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        let b = [cp[r][0], cp[r][1], cp[r][2]];
        let x = numeric::solve_dense(&a_rows, &b, 1e-10).ok_or(NoetherError::DegenerateFit)?;
        out[r] = [x[0], x[1], x[2]];
    }
    Ok(out)
}

/// Worst relative deviation of M(sigma) on held-out random free lines.
pub fn certify_adjoint(
    sigma: &MoebiusMap,
    matrix: &[[f64; 3]; 3],
    lines: &[(f64, f64)],
) -> Result<f64, NoetherError> {
    let m = 1.0;
    let mut worst = 0.0f64;
    for &(x0, v0) in lines {
        let orig = free_line_charges(x0, v0, m);
        let tran = transformed_line_charges(sigma, x0, v0, m)?;
        let c = [orig.h, orig.d, orig.a];
        let want = [tran.h, tran.d, tran.a];
        for r in 0..3 {
            let got: f64 = (0..3).map(|k| matrix[r][k] * c[k]).sum();
            worst = worst.max((got - want[r]).abs() / (1.0 + want[r].abs()));
        }
    }
    Ok(worst)
}

/// The (K, P) doublet transformation: (K', P') = (alpha K + beta P,
/// gamma K + delta P), componentwise over the spatial index.
pub fn doublet_transform(sigma: &MoebiusMap, k: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let kp: Vec<f64> = k
        .iter()
        .zip(p)
        .map(|(ki, pi)| sigma.alpha * ki + sigma.beta * pi)
        .collect();
    let pp = k
        .iter()
        .zip(p)
        .map(|(ki, pi)| sigma.gamma * ki + sigma.delta * pi)
        .collect();
    (kp, pp)
}
