//! Fixed-step RK4 integration of the Hamiltonian, Euler-Lagrange and forced
//! dynamics, with monitors recorded at every stored step.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::algebroid::{AlgebroidModel, PhasePoint, Side};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{norm, Matrix};
use crate::prolongation::{el_residual_prolong, el_velocity_prolong, energy};
use crate::tulczyjew::{
    admissibility_residual, differential, el_residual_tt, epsilon_map, field_jet,
    forced_hamiltonian_field, Force, TangentVec,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub side: Side,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub monitors: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    fn new(side: Side, names: &[&str]) -> Self {
        Trajectory {
            side,
            times: Vec::new(),
            states: Vec::new(),
            monitors: names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
        }
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn last(&self) -> Option<&PhasePoint> {
        self.states.last()
    }

    /// `max_k |m_k − m_0|` for a monitor.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let m = self.monitor(name)?;
        let first = *m.first()?;
        Some(m.iter().fold(0.0, |acc, v| acc.max(libm::fabs(v - first))))
    }

    /// `max_k |m_k|` for a monitor.
    pub fn max_abs(&self, name: &str) -> Option<f64> {
        Some(self.monitor(name)?.iter().fold(0.0, |acc, v| acc.max(libm::fabs(*v))))
    }
}

/// An integration stopped early. `trajectory` holds every state computed
/// before the failure; `step` is the index of the step that failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Aborted {
    pub trajectory: Trajectory,
    pub step: usize,
    pub time: f64,
    pub error: Error,
}

impl core::fmt::Display for Aborted {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "integration aborted at step {} (t = {}): {}", self.step, self.time, self.error)
    }
}

fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument("dt must be positive"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Argument("T must be positive"));
    }
    Ok(libm::ceil(t_end / dt - 1e-9) as usize)
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical RK4 step for `ż = f(t, z)`.
pub fn rk4_step<F>(f: &F, t: f64, z: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, z)?;
    let k2 = f(t + 0.5 * h, &axpy(z, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(z, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(z, h, &k3))?;
    Ok((0..z.len())
        .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Drives RK4 from `z0` to `t_end`, recording `monitor(state)` at every
/// stored state.
fn drive<F, G>(
    side: Side,
    n: usize,
    z0: &PhasePoint,
    dt: f64,
    t_end: f64,
    names: &[&str],
    rhs: F,
    monitor: G,
) -> core::result::Result<Trajectory, Aborted>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    G: Fn(f64, &PhasePoint) -> Result<Vec<f64>>,
{
    let mut traj = Trajectory::new(side, names);
    let abort = |traj: Trajectory, step: usize, time: f64, error: Error| Aborted {
        trajectory: traj,
        step,
        time,
        error,
    };
    let steps = match step_count(dt, t_end) {
        Ok(s) => s,
        Err(e) => return Err(abort(traj, 0, 0.0, e)),
    };
    let record = |traj: &mut Trajectory, t: f64, p: PhasePoint| -> Result<()> {
        let values = monitor(t, &p)?;
        for ((_, series), v) in traj.monitors.iter_mut().zip(values) {
            series.push(v);
        }
        traj.times.push(t);
        traj.states.push(p);
        Ok(())
    };
    if let Err(e) = record(&mut traj, 0.0, z0.clone()) {
        return Err(abort(traj, 0, 0.0, e));
    }
    let mut z = z0.coords();
    let mut t = 0.0;
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        match rk4_step(&rhs, t, &z, h) {
            Ok(next) => z = next,
            Err(e) => return Err(abort(traj, k, t, e)),
        }
        t = if k + 1 == steps { t_end } else { t + dt };
        if let Err(e) = record(&mut traj, t, PhasePoint::from_coords(side, n, &z)) {
            return Err(abort(traj, k + 1, t, e));
        }
    }
    Ok(traj)
}

/// `ξ̇ = Λ̃(dH(ξ))` on `E*`. Monitor: `H`.
pub fn integrate_hamiltonian(
    model: &AlgebroidModel,
    h: &Expr,
    xi0: &PhasePoint,
    dt: f64,
    t_end: f64,
) -> core::result::Result<Trajectory, Aborted> {
    integrate_forced(model, h, &Force::zero(model.m), xi0, dt, t_end)
}

/// `ξ̇ = X_H(ξ) − V(force(ξ))`. Monitor: `H`.
pub fn integrate_forced(
    model: &AlgebroidModel,
    h: &Expr,
    force: &Force,
    xi0: &PhasePoint,
    dt: f64,
    t_end: f64,
) -> core::result::Result<Trajectory, Aborted> {
    let n = model.n;
    let start = xi0
        .expect_side(Side::Estar, "Hamiltonian dynamics")
        .and_then(|_| model.check_point(xi0));
    if let Err(e) = start {
        return Err(Aborted {
            trajectory: Trajectory::new(Side::Estar, &["H"]),
            step: 0,
            time: 0.0,
            error: e,
        });
    }
    drive(
        Side::Estar,
        n,
        xi0,
        dt,
        t_end,
        &["H"],
        |_, z| {
            let p = PhasePoint::from_coords(Side::Estar, n, z);
            Ok(forced_hamiltonian_field(model, h, force, &p)?.components())
        },
        |_, p| Ok(alloc::vec![h.eval::<f64>(&p.coords())?]),
    )
}

/// The Euler-Lagrange jet at `a` for a regular `L`: `ẋ = ρ(x)y` and
/// `W ẏ = ε_E(dL)_fiber − (∂²L/∂y∂x)·ρ(x)y` with `W = ∂²L/∂y∂y`.
pub fn el_velocity(model: &AlgebroidModel, l: &Expr, a: &PhasePoint, time: f64) -> Result<TangentVec> {
    let (n, m) = (model.n, model.m);
    let dx = model.anchor_apply(a)?;
    let j = field_jet(l, a)?;
    let eps = epsilon_map(model, &differential(l, a)?)?;
    let w = Matrix::from_fn(m, m, |b, c| j.h(n + b, n + c));
    let rhs: Vec<f64> = (0..m)
        .map(|b| eps.dfiber[b] - (0..n).map(|i| j.h(n + b, i) * dx[i]).sum::<f64>())
        .collect();
    let dy = w.solve(&rhs).ok_or(Error::SingularHessian { time })?;
    Ok(TangentVec {
        base: a.clone(),
        dx,
        dfiber: dy,
    })
}

/// Monitor names of [`integrate_el`], in order.
pub const EL_MONITORS: [&str; 4] = ["E_L", "admissibility", "el_residual_tt", "el_residual_prolong"];

/// Euler-Lagrange dynamics on `E` for a regular Lagrangian, with the
/// velocity from [`el_velocity`].
pub fn integrate_el(
    model: &AlgebroidModel,
    l: &Expr,
    a0: &PhasePoint,
    dt: f64,
    t_end: f64,
) -> core::result::Result<Trajectory, Aborted> {
    drive_el(model, l, a0, dt, t_end, el_velocity)
}

/// As [`integrate_el`], but the velocity solves `ι ω_L = d E_L` on the
/// prolongation instead.
pub fn integrate_el_prolong(
    model: &AlgebroidModel,
    l: &Expr,
    a0: &PhasePoint,
    dt: f64,
    t_end: f64,
) -> core::result::Result<Trajectory, Aborted> {
    drive_el(model, l, a0, dt, t_end, el_velocity_prolong)
}

fn drive_el<V>(
    model: &AlgebroidModel,
    l: &Expr,
    a0: &PhasePoint,
    dt: f64,
    t_end: f64,
    velocity: V,
) -> core::result::Result<Trajectory, Aborted>
where
    V: Fn(&AlgebroidModel, &Expr, &PhasePoint, f64) -> Result<TangentVec>,
{
    let n = model.n;
    let start = a0
        .expect_side(Side::E, "Euler-Lagrange dynamics")
        .and_then(|_| model.check_point(a0));
    if let Err(e) = start {
        return Err(Aborted {
            trajectory: Trajectory::new(Side::E, &EL_MONITORS),
            step: 0,
            time: 0.0,
            error: e,
        });
    }
    drive(
        Side::E,
        n,
        a0,
        dt,
        t_end,
        &EL_MONITORS,
        |t, z| {
            let a = PhasePoint::from_coords(Side::E, n, z);
            Ok(velocity(model, l, &a, t)?.components())
        },
        |t, a| {
            let v = velocity(model, l, a, t)?;
            Ok(alloc::vec![
                energy(l, a)?,
                norm(&admissibility_residual(model, a, &v)?),
                norm(&el_residual_tt(model, l, a, &v)?),
                norm(&el_residual_prolong(model, l, a, &v)?),
            ])
        },
    )
}
