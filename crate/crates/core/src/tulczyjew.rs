//! The Tulczyjew triple of an almost-Lie algebroid.
//!
//! Covectors and tangent vectors on `E` / `E*` are stored in chart
//! coordinates: a covector at `(x, f)` is `(p, π)` pairing with
//! `(dx, df)` as `p·dx + π·df`.
//!
//! Sign conventions are not transcribed: the matrix of `Λ` is assembled by
//! evaluating its defining identities (`Λ(dι_e, dι_e') = ι_[e,e']` and
//! `Λ(dι_e, d(x^i)) = ρ(e)x^i`) through the algebroid bracket and anchor,
//! and `R_E` is read off from the pairing identity
//! `⟨θ, X⟩ + ⟨R_E θ, Y⟩ = d⟨·,·⟩(X, Y)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::algebroid::{AlgebroidModel, PhasePoint, SectionE, Side};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{jet_eval, Jet2};
use crate::linalg::{dot, Matrix};

/// An element of `T*E` or `T*E*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    pub base: PhasePoint,
    /// Base momenta (pairing with `dx`).
    pub p: Vec<f64>,
    /// Fiber momenta (pairing with the fiber velocity).
    pub pi: Vec<f64>,
}

/// An element of `TE` or `TE*`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVec {
    pub base: PhasePoint,
    pub dx: Vec<f64>,
    pub dfiber: Vec<f64>,
}

impl Covector {
    pub fn zero(base: PhasePoint) -> Self {
        let (n, m) = (base.x.len(), base.fiber.len());
        Covector {
            base,
            p: vec![0.0; n],
            pi: vec![0.0; m],
        }
    }

    pub fn pair(&self, v: &TangentVec) -> f64 {
        dot(&self.p, &v.dx) + dot(&self.pi, &v.dfiber)
    }

    pub fn components(&self) -> Vec<f64> {
        let mut c = self.p.clone();
        c.extend_from_slice(&self.pi);
        c
    }

    /// Projection to the base point (the cotangent leg).
    pub fn cotangent_leg(&self) -> &PhasePoint {
        &self.base
    }

    /// The vertical leg `T*E → E*` (resp. `T*E* → E`): the fiber momenta
    /// viewed as a point of the dual bundle over the same base point.
    pub fn vertical_leg(&self) -> PhasePoint {
        let side = match self.base.side {
            Side::E => Side::Estar,
            Side::Estar => Side::E,
        };
        PhasePoint {
            side,
            x: self.base.x.clone(),
            fiber: self.pi.clone(),
        }
    }
}

impl TangentVec {
    pub fn zero(base: PhasePoint) -> Self {
        let (n, m) = (base.x.len(), base.fiber.len());
        TangentVec {
            base,
            dx: vec![0.0; n],
            dfiber: vec![0.0; m],
        }
    }

    pub fn components(&self) -> Vec<f64> {
        let mut c = self.dx.clone();
        c.extend_from_slice(&self.dfiber);
        c
    }

    pub fn from_components(base: PhasePoint, c: &[f64]) -> Self {
        let n = base.x.len();
        TangentVec {
            base,
            dx: c[..n].to_vec(),
            dfiber: c[n..].to_vec(),
        }
    }
}

/// Value, gradient and Hessian of a field on `E` or `E*` at `p`.
pub fn field_jet(f: &Expr, p: &PhasePoint) -> Result<Jet2> {
    jet_eval(f, &p.coords())
}

/// The differential `df(p)` as a covector.
pub fn differential(f: &Expr, p: &PhasePoint) -> Result<Covector> {
    let j = field_jet(f, p)?;
    let n = p.x.len();
    Ok(Covector {
        base: p.clone(),
        p: j.grad[..n].to_vec(),
        pi: j.grad[n..].to_vec(),
    })
}

/// Fiber-wise derivative `d^v f`: the gradient in the fiber coordinates.
pub fn vertical_derivative(f: &Expr, p: &PhasePoint) -> Result<Vec<f64>> {
    Ok(differential(f, p)?.pi)
}

/// The Legendre map `λ_L = d^v L: E → E*`.
pub fn legendre(l: &Expr, a: &PhasePoint) -> Result<PhasePoint> {
    a.expect_side(Side::E, "Legendre map")?;
    Ok(PhasePoint::on_estar(&a.x, &vertical_derivative(l, a)?))
}

/// Matrix of the linear bi-vector `Λ` at `p ∈ E*` in coordinates `(x, ξ)`:
/// entry `(I, J)` is `Λ(dz^I, dz^J)`.
pub fn lambda_matrix(model: &AlgebroidModel, p: &PhasePoint) -> Result<Matrix> {
    p.expect_side(Side::Estar, "lambda matrix")?;
    model.check_point(p)?;
    let (n, m) = (model.n, model.m);
    let x = &p.x;
    let xi = &p.fiber;
    let coordinate = |i: usize| Expr::var(i, alloc::format!("x{}", i + 1));
    let loc = model.local(x)?;
    let mut lam = Matrix::zeros(n + m, n + m);
    for a in 0..m {
        let ea = SectionE::frame(a, m);
        for b in 0..m {
            // Λ(dι_{e_a}, dι_{e_b}) = ι_{[e_a, e_b]}
            let br = model.bracket_in(&loc, &ea, &SectionE::frame(b, m), x)?;
            lam[(n + a, n + b)] = dot(xi, &br);
        }
        let mut unit = vec![0.0; m];
        unit[a] = 1.0;
        for i in 0..n {
            // Λ(dι_{e_a}, d x^i) = ρ(e_a) x^i
            let v = model.d_e_function_in(&loc, &coordinate(i), &unit, x)?;
            lam[(n + a, i)] = v;
            lam[(i, n + a)] = -v;
        }
    }
    Ok(lam)
}

/// `Λ̃(θ) = θ ⌟ Λ`, the vector with `⟨θ', Λ̃(θ)⟩ = Λ(θ, θ')`.
pub fn lambda_tilde(model: &AlgebroidModel, theta: &Covector) -> Result<TangentVec> {
    let lam = lambda_matrix(model, &theta.base)?;
    let v = lam.tmul_vec(&theta.components());
    Ok(TangentVec::from_components(theta.base.clone(), &v))
}

/// The Hamiltonian vector field `X_H = Λ̃(dH)` at `p ∈ E*`.
pub fn hamiltonian_field(model: &AlgebroidModel, h: &Expr, p: &PhasePoint) -> Result<TangentVec> {
    p.expect_side(Side::Estar, "Hamiltonian field")?;
    lambda_tilde(model, &differential(h, p)?)
}

/// A fiber-preserving map `E* → E*` over the identity of the base, given by
/// `m` expressions in `(x, ξ)`.
#[derive(Clone, Debug)]
pub struct Force {
    pub fiber: Vec<Expr>,
}

impl Force {
    pub fn zero(m: usize) -> Self {
        Force {
            fiber: vec![Expr::num(0.0); m],
        }
    }

    pub fn eval(&self, p: &PhasePoint) -> Result<PhasePoint> {
        let c = p.coords();
        let fiber = self
            .fiber
            .iter()
            .map(|e| e.eval::<f64>(&c))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhasePoint {
            side: Side::Estar,
            x: p.x.clone(),
            fiber,
        })
    }
}

/// Subtracts the vertical lift of `force` (a point of `E*` over the same
/// base point) from `v`.
pub fn subtract_vertical(v: &TangentVec, force: &PhasePoint) -> Result<TangentVec> {
    if force.x != v.base.x || force.side != Side::Estar {
        return Err(Error::BasePoint("vertical lift"));
    }
    let mut out = v.clone();
    for (d, f) in out.dfiber.iter_mut().zip(&force.fiber) {
        *d -= f;
    }
    Ok(out)
}

/// `X_H − V(force(p))`.
pub fn forced_hamiltonian_field(
    model: &AlgebroidModel,
    h: &Expr,
    force: &Force,
    p: &PhasePoint,
) -> Result<TangentVec> {
    let xh = hamiltonian_field(model, h, p)?;
    subtract_vertical(&xh, &force.eval(p)?)
}

/// `d⟨·,·⟩(X, Y)` for `X ∈ T_{(x,y)}E`, `Y ∈ T_{(x,ξ)}E*` with a common
/// base projection.
pub fn pairing_differential(y: &[f64], xi: &[f64], dy: &[f64], dxi: &[f64]) -> f64 {
    dot(xi, dy) + dot(y, dxi)
}

/// The canonical isomorphism `R_E: T*E → T*E*`.
///
/// The image is read off from the pairing identity on coordinate test
/// vectors: base-direction pairs `(X, Y) = ((e_i, 0), (e_i, 0))` give the
/// base momenta, `Y = (0, e_a)` the fiber momenta, and `X = (0, e_a)` the
/// base point `ξ` of the image.
pub fn r_map(theta: &Covector) -> Result<Covector> {
    theta.base.expect_side(Side::E, "R_E")?;
    let (n, m) = (theta.p.len(), theta.pi.len());
    let y = &theta.base.fiber;
    let zero_m = vec![0.0; m];
    let unit = |a: usize| {
        let mut u = vec![0.0; m];
        u[a] = 1.0;
        u
    };
    // ⟨θ,(0,e_a)⟩ = d⟨·,·⟩((0,e_a),0) = ξ_a fixes the base point; the
    // right side is linear in ξ with coefficient 1, so ξ_a = π_a.
    let xi: Vec<f64> = (0..m)
        .map(|a| {
            let unit_xi = unit(a);
            theta.pi[a] / pairing_differential(y, &unit_xi, &unit(a), &zero_m)
        })
        .collect();
    let p: Vec<f64> = (0..n)
        .map(|i| pairing_differential(y, &xi, &zero_m, &zero_m) - theta.p[i])
        .collect();
    let pi: Vec<f64> = (0..m)
        .map(|a| pairing_differential(y, &xi, &zero_m, &unit(a)))
        .collect();
    Ok(Covector {
        base: PhasePoint::on_estar(&theta.base.x, &xi),
        p,
        pi,
    })
}

/// Inverse of [`r_map`].
pub fn r_inv(theta: &Covector) -> Result<Covector> {
    theta.base.expect_side(Side::Estar, "R_E inverse")?;
    Ok(Covector {
        base: PhasePoint::on_e(&theta.base.x, &theta.pi),
        p: theta.p.iter().map(|v| -v).collect(),
        pi: theta.base.fiber.clone(),
    })
}

/// `ε_E(θ) = Λ̃(R_E(θ))`.
pub fn epsilon_map(model: &AlgebroidModel, theta: &Covector) -> Result<TangentVec> {
    lambda_tilde(model, &r_map(theta)?)
}

/// `Tλ_L(X)` for `X ∈ T_a E`, computed by contracting the Hessian of `L`.
pub fn tangent_legendre(l: &Expr, a: &PhasePoint, v: &TangentVec) -> Result<TangentVec> {
    a.expect_side(Side::E, "tangent Legendre map")?;
    if v.base != *a {
        return Err(Error::BasePoint("tangent Legendre map"));
    }
    let j = field_jet(l, a)?;
    let n = a.x.len();
    let d = j.dim();
    let comps = v.components();
    let dxi = (n..d)
        .map(|b| (0..d).map(|k| j.h(b, k) * comps[k]).sum())
        .collect();
    Ok(TangentVec {
        base: PhasePoint::on_estar(&a.x, &j.grad[n..]),
        dx: v.dx.clone(),
        dfiber: dxi,
    })
}

/// Residual of `d/dt d^v L(γ) = ε_E(dL(γ))` at the jet `(a, X)`:
/// `Tλ_L(X) − ε_E(dL(a))`, base part then fiber part.
pub fn el_residual_tt(
    model: &AlgebroidModel,
    l: &Expr,
    a: &PhasePoint,
    v: &TangentVec,
) -> Result<Vec<f64>> {
    model.check_point(a)?;
    let lhs = tangent_legendre(l, a, v)?;
    let rhs = epsilon_map(model, &differential(l, a)?)?;
    Ok(lhs
        .components()
        .iter()
        .zip(rhs.components())
        .map(|(u, w)| u - w)
        .collect())
}

/// `ρ(y) − dx` at the jet `(a, X)`.
pub fn admissibility_residual(
    model: &AlgebroidModel,
    a: &PhasePoint,
    v: &TangentVec,
) -> Result<Vec<f64>> {
    let r = model.anchor_apply(a)?;
    Ok(r.iter().zip(&v.dx).map(|(u, w)| u - w).collect())
}

/// Canonical symplectic form of a cotangent bundle in coordinates
/// `(q, p)`: `ω(U, V) = ⟨δp_U, δq_V⟩ − ⟨δp_V, δq_U⟩`. `U`, `V` are
/// `(δq, δp)` stacked with `δq` first and `dim_q` entries.
pub fn canonical_symplectic(dim_q: usize, u: &[f64], v: &[f64]) -> f64 {
    let (uq, up) = u.split_at(dim_q);
    let (vq, vp) = v.split_at(dim_q);
    dot(up, vq) - dot(vp, uq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::builtin;
    use crate::expr::{parse, variable_names};
    use crate::linalg::max_abs_diff;

    fn field(src: &str, n: usize, m: usize, side: Side) -> Expr {
        parse(src, &variable_names(n, m, side.fiber_prefix())).unwrap()
    }

    #[test]
    fn vertical_derivative_examples() {
        let l = field("0.5*(y1^2+y2^2)", 0, 2, Side::E);
        assert_eq!(vertical_derivative(&l, &PhasePoint::on_e(&[], &[3.0, 4.0])).unwrap(), vec![3.0, 4.0]);
        let h = field("x1*xi1", 1, 1, Side::Estar);
        assert_eq!(vertical_derivative(&h, &PhasePoint::on_estar(&[2.0], &[5.0])).unwrap(), vec![2.0]);
        let c = field("7", 1, 1, Side::Estar);
        assert_eq!(vertical_derivative(&c, &PhasePoint::on_estar(&[2.0], &[5.0])).unwrap(), vec![0.0]);
    }

    #[test]
    fn lambda_matrix_so3_and_tm2() {
        let so3 = builtin("so3").unwrap();
        let lam = lambda_matrix(&so3, &PhasePoint::on_estar(&[], &[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(lam[(0, 1)], 1.0);
        assert_eq!(lam[(1, 0)], -1.0);
        assert_eq!(lam.skew_defect(), 0.0);

        let tm2 = builtin("tm2").unwrap();
        let lam = lambda_matrix(&tm2, &PhasePoint::on_estar(&[0.3, 0.1], &[1.0, -2.0])).unwrap();
        // Λ(dξ_a, dx^i) = δ, xx and ξξ blocks vanish
        let expect = Matrix::from_fn(4, 4, |i, j| match (i, j) {
            (2, 0) | (3, 1) => 1.0,
            (0, 2) | (1, 3) => -1.0,
            _ => 0.0,
        });
        assert_eq!(lam, expect);

        let heis = builtin("heis3").unwrap();
        let lam = lambda_matrix(&heis, &PhasePoint::on_estar(&[], &[0.0; 3])).unwrap();
        assert_eq!(lam.max_abs(), 0.0);
    }

    #[test]
    fn rigid_body_field() {
        let so3 = builtin("so3").unwrap();
        let h = field("0.5*(xi1^2/1+xi2^2/2+xi3^2/3)", 0, 3, Side::Estar);
        let xi = [1.0, 1.0, 1.0];
        let x = hamiltonian_field(&so3, &h, &PhasePoint::on_estar(&[], &xi)).unwrap();
        // ξ × ∇H with ∇H = (1, 1/2, 1/3)
        let w = [1.0, 0.5, 1.0 / 3.0];
        let cross = [xi[1] * w[2] - xi[2] * w[1], xi[2] * w[0] - xi[0] * w[2], xi[0] * w[1] - xi[1] * w[0]];
        assert!(max_abs_diff(&x.dfiber, &cross) < 1e-15);
    }

    #[test]
    fn free_particle_and_constant_fields() {
        let tm1 = builtin("tm1").unwrap();
        let h = field("0.5*xi1^2", 1, 1, Side::Estar);
        let x = hamiltonian_field(&tm1, &h, &PhasePoint::on_estar(&[0.4], &[1.5])).unwrap();
        assert_eq!((x.dx.clone(), x.dfiber.clone()), (vec![1.5], vec![0.0]));
        let c = field("3", 1, 1, Side::Estar);
        let z = hamiltonian_field(&tm1, &c, &PhasePoint::on_estar(&[0.4], &[1.5])).unwrap();
        assert_eq!(z.components(), vec![0.0, 0.0]);
    }

    #[test]
    fn forced_field_examples() {
        let tm1 = builtin("tm1").unwrap();
        let h = field("0.5*xi1^2", 1, 1, Side::Estar);
        let p = PhasePoint::on_estar(&[0.0], &[2.0]);
        let zero = forced_hamiltonian_field(&tm1, &h, &Force::zero(1), &p).unwrap();
        assert_eq!(zero, hamiltonian_field(&tm1, &h, &p).unwrap());
        let drag = Force {
            fiber: vec![field("0.3*xi1", 1, 1, Side::Estar)],
        };
        let v = forced_hamiltonian_field(&tm1, &h, &drag, &p).unwrap();
        assert!((v.dfiber[0] + 0.6).abs() < 1e-15);
        let c = field("1", 1, 1, Side::Estar);
        let phi = Force {
            fiber: vec![field("0.25", 1, 1, Side::Estar)],
        };
        assert_eq!(forced_hamiltonian_field(&tm1, &c, &phi, &p).unwrap().components(), vec![0.0, -0.25]);
        let elsewhere = PhasePoint::on_estar(&[1.0], &[0.0]);
        assert!(matches!(
            subtract_vertical(&TangentVec::zero(p.clone()), &elsewhere),
            Err(Error::BasePoint(_))
        ));
    }

    #[test]
    fn r_map_examples() {
        let theta = Covector {
            base: PhasePoint::on_e(&[0.0], &[1.0]),
            p: vec![0.0],
            pi: vec![1.0],
        };
        let r = r_map(&theta).unwrap();
        assert_eq!(r.base, PhasePoint::on_estar(&[0.0], &[1.0]));
        assert_eq!((r.p.clone(), r.pi.clone()), (vec![0.0], vec![1.0]));

        let zero = Covector::zero(PhasePoint::on_e(&[0.5, 0.2], &[3.0, -1.0]));
        let r = r_map(&zero).unwrap();
        assert_eq!(r.base.fiber, vec![0.0, 0.0]);
        assert_eq!(r.p, vec![0.0, 0.0]);
        assert_eq!(r.pi, vec![3.0, -1.0]);

        let theta = Covector {
            base: PhasePoint::on_e(&[0.5], &[3.0]),
            p: vec![-2.0],
            pi: vec![0.7],
        };
        assert_eq!(r_inv(&r_map(&theta).unwrap()).unwrap(), theta);
        assert!(matches!(r_map(&r_map(&theta).unwrap()), Err(Error::Side(_))));
    }

    #[test]
    fn pairing_identity_on_coordinate_vectors() {
        let theta = Covector {
            base: PhasePoint::on_e(&[0.5, -0.1], &[3.0, 1.0]),
            p: vec![-2.0, 0.4],
            pi: vec![0.7, 1.1],
        };
        let r = r_map(&theta).unwrap();
        for k in 0..6 {
            let mut basis = [0.0; 6];
            basis[k] = 1.0;
            // X = (dx, dy), Y = (dx, dξ) share dx.
            let (dx, dy, dxi) = (&basis[0..2], &basis[2..4], &basis[4..6]);
            let lhs = dot(&theta.p, dx) + dot(&theta.pi, dy) + dot(&r.p, dx) + dot(&r.pi, dxi);
            let rhs = pairing_differential(&theta.base.fiber, &r.base.fiber, dy, dxi);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn epsilon_examples() {
        let tm1 = builtin("tm1").unwrap();
        let l = field("0.5*y1^2", 1, 1, Side::E);
        let a = PhasePoint::on_e(&[0.3], &[2.0]);
        let eps = epsilon_map(&tm1, &differential(&l, &a).unwrap()).unwrap();
        assert_eq!(eps.base, PhasePoint::on_estar(&[0.3], &[2.0]));
        assert_eq!(eps.components(), vec![2.0, 0.0]);

        let so3 = builtin("so3").unwrap();
        let l = field("0.5*(y1^2+2*y2^2+3*y3^2)", 0, 3, Side::E);
        let y = [0.4, -1.0, 0.7];
        let eps = epsilon_map(&so3, &differential(&l, &PhasePoint::on_e(&[], &y)).unwrap()).unwrap();
        let iy = [0.4, -2.0, 2.1];
        let cross = [iy[1] * y[2] - iy[2] * y[1], iy[2] * y[0] - iy[0] * y[2], iy[0] * y[1] - iy[1] * y[0]];
        assert!(max_abs_diff(&eps.dfiber, &cross) < 1e-15);

        let zero = Covector::zero(PhasePoint::on_e(&[], &[0.0; 3]));
        assert_eq!(epsilon_map(&so3, &zero).unwrap().components(), vec![0.0; 3]);
    }

    #[test]
    fn el_residual_examples() {
        let tm1 = builtin("tm1").unwrap();
        let l = field("0.5*y1^2", 1, 1, Side::E);
        let a = PhasePoint::on_e(&[0.3], &[2.0]);
        let sol = TangentVec { base: a.clone(), dx: vec![2.0], dfiber: vec![0.0] };
        assert_eq!(el_residual_tt(&tm1, &l, &a, &sol).unwrap(), vec![0.0, 0.0]);
        let bad = TangentVec { base: a.clone(), dx: vec![2.0], dfiber: vec![1.0] };
        assert_eq!(el_residual_tt(&tm1, &l, &a, &bad).unwrap(), vec![0.0, 1.0]);

        let so3 = builtin("so3").unwrap();
        let l = field("0.5*(y1^2+2*y2^2+3*y3^2)", 0, 3, Side::E);
        let y = [0.4, -1.0, 0.7];
        let iy = [0.4, -2.0, 2.1];
        let cross = [iy[1] * y[2] - iy[2] * y[1], iy[2] * y[0] - iy[0] * y[2], iy[0] * y[1] - iy[1] * y[0]];
        let dy = [cross[0], cross[1] / 2.0, cross[2] / 3.0];
        let a = PhasePoint::on_e(&[], &y);
        let v = TangentVec { base: a.clone(), dx: vec![], dfiber: dy.to_vec() };
        let r = el_residual_tt(&so3, &l, &a, &v).unwrap();
        assert!(r.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn admissibility_examples() {
        let tm2 = builtin("tm2").unwrap();
        let a = PhasePoint::on_e(&[0.0, 1.0], &[0.5, 0.25]);
        let v = TangentVec { base: a.clone(), dx: vec![0.5, 0.25], dfiber: vec![9.0, 9.0] };
        assert_eq!(admissibility_residual(&tm2, &a, &v).unwrap(), vec![0.0, 0.0]);
        let so3 = builtin("so3").unwrap();
        let a = PhasePoint::on_e(&[], &[1.0, 2.0, 3.0]);
        assert!(admissibility_residual(&so3, &a, &TangentVec::zero(a.clone())).unwrap().is_empty());
        let act = builtin("action1").unwrap();
        let a = PhasePoint::on_e(&[2.0], &[3.0]);
        let v = TangentVec { base: a.clone(), dx: vec![5.0], dfiber: vec![0.0] };
        assert_eq!(admissibility_residual(&act, &a, &v).unwrap(), vec![1.0]);
    }
}
