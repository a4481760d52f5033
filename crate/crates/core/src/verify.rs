//! Seeded numerical certificates that the Tulczyjew-triple and
//! prolongation formulations agree.
//!
//! Every check draws its samples from a ChaCha8 stream seeded by the user
//! seed mixed with the check and model names, so reports are reproducible
//! and independent of the order in which checks run. In each comparison one
//! side is computed by [`crate::tulczyjew`] and the other by
//! [`crate::prolongation`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebroid::{AlgebroidModel, PhasePoint, Side};
use crate::dynamics::el_velocity;
use crate::error::Result;
use crate::expr::Expr;
use crate::linalg::{dot, max_abs_diff, norm, Matrix};
use crate::prolongation::{
    d_prolong_oneform, decomposition_independence_residual, dual_project, el_residual_prolong,
    el_velocity_prolong,
    energy_differential, eps_tilde, hamiltonian_section, include, mu_form, omega_inv_map,
    omega_matrix, ProlongVector,
};
use crate::tulczyjew::{
    canonical_symplectic, differential, el_residual_tt, epsilon_map, forced_hamiltonian_field,
    hamiltonian_field, lambda_tilde, r_map, tangent_legendre, Covector, Force, TangentVec,
};

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub model: String,
    pub samples: usize,
    /// Samples the check could not use (e.g. singular fiber Hessian).
    pub skipped: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
    /// Failing is the predicted outcome (the model violates a hypothesis).
    pub expected_fail: bool,
    pub seed: u64,
}

impl VerificationReport {
    fn new(check: &str, model: &str, samples: usize, max_residual: f64, tol: f64, seed: u64) -> Self {
        VerificationReport {
            check: check.to_string(),
            model: model.to_string(),
            samples,
            skipped: 0,
            max_residual,
            tol,
            passed: max_residual <= tol,
            expected_fail: false,
            seed,
        }
    }

    fn expecting_failure(mut self) -> Self {
        self.expected_fail = true;
        self
    }

    /// The outcome matches the prediction.
    pub fn ok(&self) -> bool {
        self.passed != self.expected_fail
    }

    /// `PASS`, `FAIL`, `EXPECTED-FAIL` or `UNEXPECTED-PASS`.
    pub fn status(&self) -> &'static str {
        match (self.passed, self.expected_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "EXPECTED-FAIL",
            (true, true) => "UNEXPECTED-PASS",
        }
    }
}

/// Reports the failure of an evaluation as an infinite residual.
fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(core::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Random samples for one check.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, check: &str, model: &str) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&[check, model])),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn vector(&mut self, k: usize) -> Vec<f64> {
        (0..k).map(|_| self.uniform(-1.0, 1.0)).collect()
    }

    pub fn unit_vector(&mut self, k: usize) -> Vec<f64> {
        loop {
            let v = self.vector(k);
            let r = norm(&v);
            if r > 0.1 {
                return v.iter().map(|c| c / r).collect();
            }
        }
    }

    pub fn point(&mut self, model: &AlgebroidModel, side: Side) -> PhasePoint {
        let x = self.vector(model.n);
        let f = self.vector(model.m);
        PhasePoint { side, x, fiber: f }
    }

    pub fn covector(&mut self, at: &PhasePoint) -> Covector {
        Covector {
            base: at.clone(),
            p: self.vector(at.x.len()),
            pi: self.vector(at.fiber.len()),
        }
    }

    pub fn tangent(&mut self, at: &PhasePoint) -> TangentVec {
        TangentVec {
            base: at.clone(),
            dx: self.vector(at.x.len()),
            dfiber: self.vector(at.fiber.len()),
        }
    }

    pub fn prolong_vector(&mut self, at: &PhasePoint) -> ProlongVector {
        let m = at.fiber.len();
        ProlongVector {
            at: at.clone(),
            e: self.vector(m),
            w: self.vector(m),
        }
    }
}

fn fiber_var(model: &AlgebroidModel, side: Side, b: usize) -> Expr {
    Expr::var(model.n + b, alloc::format!("{}{}", side.fiber_prefix(), b + 1))
}

fn base_var(i: usize) -> Expr {
    Expr::var(i, alloc::format!("x{}", i + 1))
}

/// Multisets of fiber indices of size `k`.
fn monomials(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for mono in monomials(m, k - 1) {
        let start = mono.last().copied().unwrap_or(0);
        for b in start..m {
            let mut next = mono.clone();
            next.push(b);
            out.push(next);
        }
    }
    out
}

fn product(model: &AlgebroidModel, side: Side, mono: &[usize]) -> Expr {
    mono.iter()
        .fold(Expr::num(1.0), |acc, &b| acc * fiber_var(model, side, b))
}

/// Families of fields on `E` or `E*` to sample from.
#[derive(Clone, Debug)]
pub enum Family {
    /// Polynomials of degree ≤ 3 in the fiber with coefficients in `[−2, 2]`,
    /// each monomial modulated by `1 + d·x_i`, plus a base potential.
    Polynomial,
    /// Linear in the fiber: degenerate as a Lagrangian.
    Linear,
    /// Positive-definite quadratic kinetic term with base-dependent metric
    /// and gyroscopic terms plus a small cubic: regular on `[−1, 1]` boxes.
    Regular,
    /// A single fixed field.
    Fixed(Expr),
}

impl Family {
    pub fn draw(&self, s: &mut Sampler, model: &AlgebroidModel, side: Side) -> Expr {
        let (n, m) = (model.n, model.m);
        let modulate = |s: &mut Sampler, e: Expr, scale: f64| -> Expr {
            if n == 0 {
                return e;
            }
            let i = s.index(n);
            let d = scale * s.uniform(-1.0, 1.0);
            e * (Expr::num(1.0) + Expr::num(d) * base_var(i))
        };
        let potential = |s: &mut Sampler| -> Expr {
            (0..n).fold(Expr::num(0.0), |acc, i| {
                let c = s.uniform(-2.0, 2.0);
                acc + Expr::num(c) * base_var(i) * base_var(i)
            })
        };
        match self {
            Family::Fixed(e) => e.clone(),
            Family::Polynomial => {
                let mut f = potential(s);
                for k in 1..=3 {
                    for mono in monomials(m, k) {
                        let c = s.uniform(-2.0, 2.0);
                        let t = modulate(s, Expr::num(c) * product(model, side, &mono), 1.0);
                        f = f + t;
                    }
                }
                f
            }
            Family::Linear => {
                let mut f = potential(s);
                for b in 0..m {
                    let c = s.uniform(-2.0, 2.0);
                    f = f + modulate(s, Expr::num(c) * fiber_var(model, side, b), 1.0);
                }
                f
            }
            Family::Regular => {
                let mut f = potential(s);
                for b in 0..m {
                    let k = s.uniform(1.0, 3.0);
                    let y = fiber_var(model, side, b);
                    f = f + modulate(s, Expr::num(0.5 * k) * y.clone() * y.clone(), 0.3);
                    if n > 0 {
                        let c = s.uniform(-1.0, 1.0);
                        f = f + Expr::num(c) * base_var(s.index(n)) * y;
                    }
                }
                for mono in monomials(m, 3) {
                    let c = 0.02 * s.uniform(-1.0, 1.0);
                    f = f + Expr::num(c) * product(model, side, &mono);
                }
                f
            }
        }
    }
}

/// The standard regular Lagrangian of a model: `½⟨Iy, y⟩` with
/// `I = diag(1, 2, 3)` on `so3` and `I = id` elsewhere.
pub fn physical_lagrangian(model: &AlgebroidModel) -> Expr {
    let inertia = |b: usize| if model.name == "so3" { (b + 1) as f64 } else { 1.0 };
    (0..model.m).fold(Expr::num(0.0), |acc, b| {
        let y = fiber_var(model, Side::E, b);
        acc + Expr::num(0.5 * inertia(b)) * y.clone() * y
    })
}

/// The Legendre dual of [`physical_lagrangian`].
pub fn physical_hamiltonian(model: &AlgebroidModel) -> Expr {
    let inertia = |b: usize| if model.name == "so3" { (b + 1) as f64 } else { 1.0 };
    (0..model.m).fold(Expr::num(0.0), |acc, b| {
        let xi = fiber_var(model, Side::Estar, b);
        acc + Expr::num(0.5 / inertia(b)) * xi.clone() * xi
    })
}

/// Report for checks that need the almost-Lie property on a model without it.
fn precondition(model: &AlgebroidModel, check: &str, samples: usize, seed: u64, tol: f64) -> Option<VerificationReport> {
    if model.is_almost_lie() {
        return None;
    }
    let r = or_inf(model.max_almost_lie_residual(samples.max(1), seed));
    Some(VerificationReport::new(check, &model.name, samples, r, tol, seed).expecting_failure())
}

/// Anchor/bracket compatibility over sampled base points.
pub fn verify_almost_lie_gate(model: &AlgebroidModel, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let r = or_inf(model.max_almost_lie_residual(samples, seed));
    let rep = VerificationReport::new("almost_lie_gate", &model.name, samples, r, tol, seed);
    if model.is_almost_lie() {
        rep
    } else {
        rep.expecting_failure()
    }
}

/// Independence of the exterior derivative on `T^{E*}E` from the chosen
/// decomposition of a one-form, for random base one-forms `α`.
pub fn verify_decomposition_independence(
    model: &AlgebroidModel,
    samples: usize,
    seed: u64,
    tol: f64,
) -> VerificationReport {
    let check = "decomposition_independence";
    let mut s = Sampler::new(seed, check, &model.name);
    let n = model.n;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let alpha: Vec<Expr> = (0..n)
            .map(|_| {
                let mut a = Expr::num(s.uniform(-2.0, 2.0));
                for j in 0..n {
                    a = a + Expr::num(s.uniform(-2.0, 2.0)) * base_var(j);
                    a = a + Expr::num(s.uniform(-2.0, 2.0)) * base_var(j) * base_var(s.index(n));
                }
                a
            })
            .collect();
        let at = s.point(model, Side::Estar);
        let v = s.prolong_vector(&at);
        let v2 = s.prolong_vector(&at);
        let r = or_inf(decomposition_independence_residual(model, &alpha, &v, &v2));
        worst = worst.max(libm::fabs(r));
    }
    let rep = VerificationReport::new(check, &model.name, samples, worst, tol, seed);
    if model.is_almost_lie() {
        rep
    } else {
        rep.expecting_failure()
    }
}

/// On a model violating anchor/bracket compatibility, the decomposition
/// residual must be detectably nonzero: the largest `|residual|` over
/// `α = dx^i`, frame pairs `(Z_a, Z_b)` and the points `(1, …, 1)` plus
/// `samples` random ones must reach `threshold`. The reported quantity is
/// `threshold / max|residual|` against tolerance 1.
pub fn verify_almost_lie_necessity(
    model: &AlgebroidModel,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> VerificationReport {
    let check = "almost_lie_necessity";
    let mut s = Sampler::new(seed, check, &model.name);
    let (n, m) = (model.n, model.m);
    let mut points = vec![PhasePoint::on_e(&vec![1.0; n], &vec![0.0; m])];
    points.extend((0..samples).map(|_| s.point(model, Side::E)));
    let mut best: f64 = 0.0;
    for at in &points {
        for i in 0..n {
            let alpha: Vec<Expr> = (0..n).map(|j| Expr::num(if i == j { 1.0 } else { 0.0 })).collect();
            for a in 0..m {
                for b in 0..m {
                    let r = decomposition_independence_residual(
                        model,
                        &alpha,
                        &ProlongVector::frame(at, a),
                        &ProlongVector::frame(at, b),
                    );
                    if let Ok(r) = r {
                        best = best.max(libm::fabs(r));
                    }
                }
            }
        }
    }
    let ratio = if best > 0.0 { threshold / best } else { f64::INFINITY };
    let rep = VerificationReport::new(check, &model.name, points.len(), ratio, 1.0, seed);
    if model.is_almost_lie() {
        rep.expecting_failure()
    } else {
        rep
    }
}

/// `Ω_E` from its evaluation formula against `−d μ_E`.
pub fn verify_omega_minus_dmu(model: &AlgebroidModel, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "omega_minus_dmu";
    if let Some(r) = precondition(model, check, samples, seed, tol) {
        return r;
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mu = mu_form(model);
    let k = 2 * model.m;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let at = s.point(model, Side::Estar);
        let om = match omega_matrix(model, &at) {
            Ok(om) => om,
            Err(_) => return VerificationReport::new(check, &model.name, samples, f64::INFINITY, tol, seed),
        };
        for i in 0..k {
            for j in 0..k {
                let d = or_inf(d_prolong_oneform(
                    model,
                    &mu,
                    &ProlongVector::frame(&at, i),
                    &ProlongVector::frame(&at, j),
                ));
                worst = worst.max(libm::fabs(om[(i, j)] + d));
            }
        }
    }
    VerificationReport::new(check, &model.name, samples, worst, tol, seed)
}

/// Largest 1-norm condition number of `Ω_E` over sampled points.
pub fn verify_omega_condition(model: &AlgebroidModel, samples: usize, seed: u64, bound: f64) -> VerificationReport {
    let check = "omega_condition";
    if let Some(r) = precondition(model, check, samples, seed, bound) {
        return r;
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let at = s.point(model, Side::Estar);
        let c = omega_matrix(model, &at).map(|om| om.cond1()).unwrap_or(f64::INFINITY);
        worst = worst.max(c);
    }
    VerificationReport::new(check, &model.name, samples, worst, bound, seed)
}

/// Hamiltonian section (linear solve against `Ω_E`) against
/// `(d^v H, X_H)` from the bi-vector.
pub fn verify_theorem_hamilton(model: &AlgebroidModel, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "theorem_hamilton";
    if let Some(r) = precondition(model, check, samples, seed, tol) {
        return r;
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = Family::Polynomial.draw(&mut s, model, Side::Estar);
        let at = s.point(model, Side::Estar);
        worst = worst.max(or_inf(hamilton_deviation(model, &h, &at)));
    }
    VerificationReport::new(check, &model.name, samples, worst, tol, seed)
}

fn hamilton_deviation(model: &AlgebroidModel, h: &Expr, at: &PhasePoint) -> Result<f64> {
    let section = hamiltonian_section(model, h, at)?;
    let (e, x) = include(model, &section)?;
    let dv = differential(h, at)?.pi;
    let xh = hamiltonian_field(model, h, at)?;
    Ok(max_abs_diff(&e, &dv).max(max_abs_diff(&x.components(), &xh.components())))
}

/// `I ∘ Ω̃⁻¹ ∘ I*` against `(v_{E*}(θ), Λ̃(θ) − Vξ)`.
pub fn verify_omega_stripped(model: &AlgebroidModel, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "omega_stripped";
    if let Some(r) = precondition(model, check, samples, seed, tol) {
        return r;
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let at = s.point(model, Side::Estar);
        let xi = s.vector(model.m);
        let theta = s.covector(&at);
        let dev = (|| -> Result<f64> {
            let (e, x) = omega_inv_map(model, &xi, &theta, &at)?;
            let mut lt = lambda_tilde(model, &theta)?;
            for (d, v) in lt.dfiber.iter_mut().zip(&xi) {
                *d -= v;
            }
            Ok(max_abs_diff(&e, &theta.pi).max(max_abs_diff(&x.components(), &lt.components())))
        })();
        worst = worst.max(or_inf(dev));
    }
    VerificationReport::new(check, &model.name, samples, worst, tol, seed)
}

/// `⟨dE_L(a), X⟩ = ⟨R_E(dL(a)), Tλ_L(X)⟩` for random `(a, X)`.
pub fn verify_lemma_l_to_el(
    model: &AlgebroidModel,
    family: &Family,
    samples: usize,
    seed: u64,
    tol: f64,
) -> VerificationReport {
    let check = "lemma_l_to_el";
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let l = family.draw(&mut s, model, Side::E);
        let a = s.point(model, Side::E);
        let x = s.tangent(&a);
        let dev = (|| -> Result<f64> {
            let de = energy_differential(&l, &a)?;
            let lhs = dot(&de.p, &x.dx) + dot(&de.pi, &x.dfiber);
            let r = r_map(&differential(&l, &a)?)?;
            let tx = tangent_legendre(&l, &a, &x)?;
            if tx.base != r.base {
                return Ok(f64::INFINITY);
            }
            Ok(libm::fabs(lhs - r.pair(&tx)))
        })();
        worst = worst.max(or_inf(dev));
    }
    VerificationReport::new(check, &model.name, samples, worst, tol, seed)
}

fn regular_at(l: &Expr, a: &PhasePoint) -> bool {
    let Ok(j) = crate::tulczyjew::field_jet(l, a) else {
        return false;
    };
    let (n, m) = (a.x.len(), a.fiber.len());
    Matrix::from_fn(m, m, |b, c| j.h(n + b, n + c)).lu().is_some() || m == 0
}

/// Kernel dimension of `{θ' ∈ T*_{λ_L(a)}E* : v_{E*}(θ') = 0, θ' ⟂ Im Tλ_L}`.
pub fn theta_kernel_dimension(l: &Expr, a: &PhasePoint) -> Result<usize> {
    let (n, m) = (a.x.len(), a.fiber.len());
    let d = n + m;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for b in 0..m {
        let mut r = vec![0.0; d];
        r[n + b] = 1.0;
        rows.push(r);
    }
    for k in 0..d {
        let mut c = vec![0.0; d];
        c[k] = 1.0;
        let x = TangentVec::from_components(a.clone(), &c);
        rows.push(tangent_legendre(l, a, &x)?.components());
    }
    let mat = Matrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    Ok(d - mat.rank(1e-10))
}

/// Uniqueness of `θ_t`: the reported residual is the largest kernel
/// dimension (tolerance 0). Points with a singular fiber Hessian are
/// skipped and counted.
pub fn verify_theta_uniqueness(model: &AlgebroidModel, family: &Family, samples: usize, seed: u64) -> VerificationReport {
    let check = "theta_uniqueness";
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst = 0usize;
    let mut skipped = 0;
    for _ in 0..samples {
        let l = family.draw(&mut s, model, Side::E);
        let a = s.point(model, Side::E);
        if !regular_at(&l, &a) {
            skipped += 1;
            continue;
        }
        worst = worst.max(theta_kernel_dimension(&l, &a).unwrap_or(usize::MAX));
    }
    let mut rep = VerificationReport::new(check, &model.name, samples, worst as f64, 0.0, seed);
    rep.skipped = skipped;
    if skipped == samples && samples > 0 {
        rep.passed = false;
    }
    rep
}

/// Both directions of the equivalence of the two Euler-Lagrange equations.
///
/// The first report takes jets solving one equation (the explicit solve of
/// the Tulczyjew form, and a least-squares solve of the prolongation form)
/// and records the largest residual of the other. The second perturbs the
/// fiber velocity of solution jets by `perturbation` in a random direction
/// and reports `threshold / min(‖r_tt‖, ‖r_prolong‖)` against tolerance 1.
pub fn verify_theorem_lagrangian(
    model: &AlgebroidModel,
    family: &Family,
    samples: usize,
    seed: u64,
    tol: f64,
    perturbation: f64,
    threshold: f64,
) -> [VerificationReport; 2] {
    let check = "theorem_lagrangian";
    let sep = "theorem_lagrangian_separation";
    if let Some(r) = precondition(model, check, samples, seed, tol) {
        let r2 = precondition(model, sep, samples, seed, tol).unwrap();
        return [r, r2];
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    let mut skipped = 0;
    for _ in 0..samples {
        let l = family.draw(&mut s, model, Side::E);
        let a = s.point(model, Side::E);
        let dir = s.unit_vector(model.m);
        if !regular_at(&l, &a) {
            skipped += 1;
            continue;
        }
        let outcome = (|| -> Result<(f64, f64)> {
            let tt_sol = el_velocity(model, &l, &a, 0.0)?;
            let pr_sol = el_velocity_prolong(model, &l, &a, 0.0)?;
            let dev = norm(&el_residual_prolong(model, &l, &a, &tt_sol)?)
                .max(norm(&el_residual_tt(model, &l, &a, &pr_sol)?))
                .max(norm(&el_residual_tt(model, &l, &a, &tt_sol)?));
            let mut bad = tt_sol.clone();
            for (d, u) in bad.dfiber.iter_mut().zip(&dir) {
                *d += perturbation * u;
            }
            let gap = norm(&el_residual_tt(model, &l, &a, &bad)?)
                .min(norm(&el_residual_prolong(model, &l, &a, &bad)?));
            Ok((dev, gap))
        })();
        match outcome {
            Ok((dev, gap)) => {
                worst = worst.max(dev);
                smallest = smallest.min(gap);
            }
            Err(_) => {
                worst = f64::INFINITY;
                smallest = 0.0;
            }
        }
    }
    let used = samples - skipped;
    let mut r1 = VerificationReport::new(check, &model.name, samples, worst, tol, seed);
    r1.skipped = skipped;
    let ratio = if used == 0 {
        f64::INFINITY
    } else if smallest > 0.0 {
        threshold / smallest
    } else {
        f64::INFINITY
    };
    let mut r2 = VerificationReport::new(sep, &model.name, samples, ratio, 1.0, seed);
    r2.skipped = skipped;
    if used == 0 {
        r1.passed = false;
    }
    [r1, r2]
}

/// `ε̃_E = Ω̃⁻¹ ∘ R̃_E` against `(π_E(θ), ε_E(θ) + Vξ)`, plus the
/// generators: `(dL, 0)` reproduces `Tλ_L(γ̇)` along the Euler-Lagrange
/// jet, `(dH, 0)` reproduces `X_H`.
pub fn verify_prolong_triple(model: &AlgebroidModel, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "prolong_triple";
    if let Some(r) = precondition(model, check, samples, seed, tol) {
        return r;
    }
    let mut s = Sampler::new(seed, check, &model.name);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = s.point(model, Side::E);
        let xi = s.vector(model.m);
        let theta = s.covector(&a);
        let l = Family::Regular.draw(&mut s, model, Side::E);
        let h = Family::Polynomial.draw(&mut s, model, Side::Estar);
        let at = s.point(model, Side::Estar);
        let dev = (|| -> Result<f64> {
            let composed = eps_tilde(model, &dual_project(model, &xi, &theta, &a)?)?;
            let (e, x) = include(model, &composed)?;
            let mut direct = epsilon_map(model, &theta)?;
            for (d, v) in direct.dfiber.iter_mut().zip(&xi) {
                *d += v;
            }
            if x.base != direct.base {
                return Ok(f64::INFINITY);
            }
            let mut dev = max_abs_diff(&e, &a.fiber).max(max_abs_diff(&x.components(), &direct.components()));

            let dl = differential(&l, &a)?;
            let gen = eps_tilde(model, &dual_project(model, &vec![0.0; model.m], &dl, &a)?)?;
            let (_, xl) = include(model, &gen)?;
            if regular_at(&l, &a) {
                let motion = tangent_legendre(&l, &a, &el_velocity(model, &l, &a, 0.0)?)?;
                dev = dev.max(max_abs_diff(&xl.components(), &motion.components()));
            }

            let (_, xh) = include(model, &hamiltonian_section(model, &h, &at)?)?;
            let field = forced_hamiltonian_field(model, &h, &Force::zero(model.m), &at)?;
            Ok(dev.max(max_abs_diff(&xh.components(), &field.components())))
        })();
        worst = worst.max(or_inf(dev));
    }
    VerificationReport::new(check, &model.name, samples, worst, tol, seed)
}

/// `R_E` as a map of coordinates `(x, y, p, π) ↦ (x, ξ, p', π')`.
fn r_coords(n: usize, m: usize, z: &[f64]) -> Vec<f64> {
    let theta = Covector {
        base: PhasePoint::on_e(&z[..n], &z[n..n + m]),
        p: z[n + m..2 * n + m].to_vec(),
        pi: z[2 * n + m..].to_vec(),
    };
    let r = r_map(&theta).expect("covector on E");
    let mut out = r.base.coords();
    out.extend_from_slice(&r.p);
    out.extend_from_slice(&r.pi);
    out
}

/// `ω_{T*E*}(dR·u, dR·v) + ω_{T*E}(u, v)` with `dR` from central
/// differences of step `h`.
pub fn antisymplectic_defect(n: usize, m: usize, z: &[f64], u: &[f64], v: &[f64], h: f64) -> f64 {
    let push = |d: &[f64]| -> Vec<f64> {
        let plus: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = z.iter().zip(d).map(|(a, b)| a - h * b).collect();
        let rp = r_coords(n, m, &plus);
        let rm = r_coords(n, m, &minus);
        rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let q = n + m;
    canonical_symplectic(q, &push(u), &push(v)) + canonical_symplectic(q, u, v)
}

const R_SHAPES: [(usize, usize); 4] = [(0, 3), (1, 1), (2, 2), (3, 2)];

/// Finite-difference pullback of the canonical symplectic form under `R_E`.
pub fn verify_r_antisymplectic(samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "r_antisymplectic";
    let mut s = Sampler::new(seed, check, "");
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let (n, m) = R_SHAPES[k % R_SHAPES.len()];
        let d = 2 * (n + m);
        let z = s.vector(d);
        let u = s.vector(d);
        let v = s.vector(d);
        worst = worst.max(libm::fabs(antisymplectic_defect(n, m, &z, &u, &v, 1e-4)));
    }
    VerificationReport::new(check, "(canonical)", samples, worst, tol, seed)
}

/// The leg identities `v_{E*} ∘ R_E = π_E` and `π_{E*} ∘ R_E = v_E`.
pub fn verify_r_legs(samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let check = "r_legs";
    let mut s = Sampler::new(seed, check, "");
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let (n, m) = R_SHAPES[k % R_SHAPES.len()];
        let a = PhasePoint::on_e(&s.vector(n), &s.vector(m));
        let theta = s.covector(&a);
        let dev = match r_map(&theta) {
            Ok(r) => {
                let v = r.vertical_leg();
                let c = r.cotangent_leg();
                let vt = theta.vertical_leg();
                let legs_match = v.side == Side::E && c.side == Side::Estar && vt.side == Side::Estar;
                if !legs_match || v.x != a.x || c.x != a.x {
                    f64::INFINITY
                } else {
                    max_abs_diff(&v.fiber, &a.fiber).max(max_abs_diff(&c.fiber, &vt.fiber))
                }
            }
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(dev);
    }
    VerificationReport::new(check, "(canonical)", samples, worst, tol, seed)
}

/// Algebraic identities through jets.
pub const ALGEBRAIC_TOL: f64 = 1e-8;
/// Identities checked with finite differences.
pub const FINITE_DIFF_TOL: f64 = 1e-5;

/// Runs every applicable check on every model. Models without the
/// almost-Lie property only get the gate (an expected failure) and the
/// necessity check; the canonical `R_E` checks run once when the list is
/// non-empty.
pub fn verify_all(models: &[AlgebroidModel], seed: u64) -> Vec<VerificationReport> {
    verify_suite(models, seed, ALGEBRAIC_TOL, None)
}

/// [`verify_all`] with the tolerance of the jet-exact identities replaced
/// by `tol` and, if given, every sample count replaced by `samples`.
pub fn verify_suite(
    models: &[AlgebroidModel],
    seed: u64,
    tol: f64,
    samples: Option<usize>,
) -> Vec<VerificationReport> {
    let k = |default: usize| samples.unwrap_or(default);
    let mut out = Vec::new();
    for model in models {
        out.push(verify_almost_lie_gate(model, k(50), seed, 1e-9));
        if !model.is_almost_lie() {
            out.push(verify_almost_lie_necessity(model, k(20), seed, 1e-3));
            continue;
        }
        out.push(verify_decomposition_independence(model, k(50), seed, 1e-9));
        out.push(verify_omega_minus_dmu(model, k(50), seed, 1e-9));
        out.push(verify_omega_condition(model, k(50), seed, 1e6));
        out.push(verify_theorem_hamilton(model, k(100), seed, tol));
        out.push(verify_omega_stripped(model, k(100), seed, tol));
        out.push(verify_lemma_l_to_el(model, &Family::Polynomial, k(100), seed, tol));
        let mut linear = verify_lemma_l_to_el(model, &Family::Linear, k(100), seed, tol);
        linear.check.push_str("_linear");
        out.push(linear);
        out.push(verify_theta_uniqueness(model, &Family::Regular, k(50), seed));
        let l = Family::Fixed(physical_lagrangian(model));
        out.extend(verify_theorem_lagrangian(model, &l, k(50), seed, 1e-7, 0.1, 1e-3));
        out.push(verify_prolong_triple(model, k(100), seed, tol));
    }
    if !models.is_empty() {
        out.push(verify_r_antisymplectic(k(100), seed, FINITE_DIFF_TOL));
        out.push(verify_r_legs(k(100), seed, 1e-12));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{builtin, BUILTIN_NAMES};

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(3, 3).len(), 10);
        assert_eq!(monomials(1, 3), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn hamilton_examples() {
        for name in ["so3", "tm2"] {
            let m = builtin(name).unwrap();
            assert!(verify_theorem_hamilton(&m, 100, 42, 1e-8).passed, "{name}");
        }
        let broken = builtin("broken2").unwrap();
        let r = verify_theorem_hamilton(&broken, 10, 42, 1e-8);
        assert!(!r.passed && r.expected_fail);
    }

    #[test]
    fn lemma_l_to_el_examples() {
        let tm1 = builtin("tm1").unwrap();
        let l = Family::Fixed(physical_lagrangian(&tm1));
        assert!(verify_lemma_l_to_el(&tm1, &l, 20, 1, 1e-8).passed);
        let so3 = builtin("so3").unwrap();
        assert!(verify_lemma_l_to_el(&so3, &Family::Fixed(physical_lagrangian(&so3)), 20, 1, 1e-8).passed);
        assert!(verify_lemma_l_to_el(&so3, &Family::Linear, 20, 1, 1e-8).passed);
    }

    #[test]
    fn theta_uniqueness_examples() {
        let tm1 = builtin("tm1").unwrap();
        let r = verify_theta_uniqueness(&tm1, &Family::Fixed(physical_lagrangian(&tm1)), 10, 3);
        assert!(r.passed && r.max_residual == 0.0);
        let so3 = builtin("so3").unwrap();
        assert!(verify_theta_uniqueness(&so3, &Family::Fixed(physical_lagrangian(&so3)), 10, 3).passed);
        let r = verify_theta_uniqueness(&so3, &Family::Linear, 10, 3);
        assert_eq!(r.skipped, 10);
        assert!(!r.passed);
        // the homogeneous system stays injective even for degenerate L: the
        // base part of Im Tλ_L is all of T_xM
        let a = PhasePoint::on_e(&[0.4], &[0.2]);
        let tm = builtin("action1").unwrap();
        let lin = Family::Linear.draw(&mut Sampler::new(0, "", ""), &tm, Side::E);
        assert_eq!(theta_kernel_dimension(&lin, &a).unwrap(), 0);
    }

    #[test]
    fn lagrangian_examples() {
        for name in ["tm1", "so3"] {
            let m = builtin(name).unwrap();
            let [sol, sep] = verify_theorem_lagrangian(&m, &Family::Fixed(physical_lagrangian(&m)), 20, 9, 1e-7, 0.1, 1e-3);
            assert!(sol.passed, "{name} {}", sol.max_residual);
            assert!(sep.passed, "{name} {}", sep.max_residual);
        }
        let tm2 = builtin("tm2").unwrap();
        let [sol, sep] = verify_theorem_lagrangian(&tm2, &Family::Regular, 20, 9, 1e-7, 0.1, 1e-3);
        assert!(sol.passed && sep.passed);
    }

    #[test]
    fn prolong_triple_examples() {
        for name in ["so3", "tm2", "action1"] {
            let m = builtin(name).unwrap();
            let r = verify_prolong_triple(&m, 30, 5, 1e-8);
            assert!(r.passed, "{name} {}", r.max_residual);
        }
        // zero generator: zero Hamiltonian section
        let so3 = builtin("so3").unwrap();
        let at = PhasePoint::on_estar(&[], &[0.3, 0.2, 0.1]);
        let s = hamiltonian_section(&so3, &Expr::num(0.0), &at).unwrap();
        assert_eq!(s.components(), vec![0.0; 6]);
    }

    #[test]
    fn r_antisymplectic_examples() {
        assert!(verify_r_antisymplectic(50, 2, 1e-5).passed);
        assert!(verify_r_legs(50, 2, 1e-12).passed);
        // coordinate basis vectors: the forms differ exactly by sign
        let (n, m) = (1, 2);
        let d = 2 * (n + m);
        let z = [0.3, -0.2, 0.5, 0.7, 1.1, -0.4];
        let unit = |k: usize| {
            let mut u = vec![0.0; d];
            u[k] = 1.0;
            u
        };
        for i in 0..d {
            for j in 0..d {
                assert_eq!(antisymplectic_defect(n, m, &z, &unit(i), &unit(j), 0.5), 0.0);
            }
        }
        let u = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        assert_eq!(antisymplectic_defect(n, m, &z, &u, &u, 1e-4), 0.0);
    }

    #[test]
    fn necessity_detects_broken2() {
        let broken = builtin("broken2").unwrap();
        let r = verify_almost_lie_necessity(&broken, 5, 42, 1e-3);
        assert!(r.passed, "{}", r.max_residual);
        assert!(!verify_almost_lie_gate(&broken, 10, 42, 1e-9).passed);
        let tm2 = builtin("tm2").unwrap();
        assert!(verify_decomposition_independence(&tm2, 20, 42, 1e-9).passed);
    }

    #[test]
    fn verify_all_composition_and_determinism() {
        assert!(verify_all(&[], 42).is_empty());
        let models: Vec<_> = BUILTIN_NAMES.iter().map(|n| builtin(n).unwrap()).collect();
        let a = verify_all(&models, 42);
        for r in &a {
            if r.model == "broken2" && r.check == "almost_lie_gate" {
                assert_eq!(r.status(), "EXPECTED-FAIL");
            } else {
                assert_eq!(r.status(), "PASS", "{r:?}");
            }
        }
        assert_eq!(a, verify_all(&models, 42));
    }
}
