//! Almost-Lie algebroids on a single trivializing chart.
//!
//! `E = R^n × R^m` over `M = R^n`. The structure is the anchor matrix
//! `ρ^i_a(x)` and the structure functions `C^c_{ab}(x)` of the frame
//! brackets `[e_a, e_b] = C^c_{ab} e_c`; everything else (brackets of
//! arbitrary sections, the algebroid differential, the almost-Lie and
//! Jacobi defects) is derived from them.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::jet::Jet2;
use crate::linalg::{dot, Matrix};

/// Which bundle a point or field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    E,
    Estar,
}

impl Side {
    /// Prefix of the fiber coordinate names in the expression language.
    pub fn fiber_prefix(self) -> &'static str {
        match self {
            Side::E => "y",
            Side::Estar => "xi",
        }
    }
}

/// A point of `E` (coordinates `(x, y)`) or of `E*` (coordinates `(x, ξ)`).
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub side: Side,
    pub x: Vec<f64>,
    pub fiber: Vec<f64>,
}

impl PhasePoint {
    pub fn on_e(x: &[f64], y: &[f64]) -> Self {
        PhasePoint {
            side: Side::E,
            x: x.to_vec(),
            fiber: y.to_vec(),
        }
    }

    pub fn on_estar(x: &[f64], xi: &[f64]) -> Self {
        PhasePoint {
            side: Side::Estar,
            x: x.to_vec(),
            fiber: xi.to_vec(),
        }
    }

    /// Concatenated chart coordinates `(x, fiber)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.extend_from_slice(&self.fiber);
        c
    }

    pub fn from_coords(side: Side, n: usize, coords: &[f64]) -> Self {
        PhasePoint {
            side,
            x: coords[..n].to_vec(),
            fiber: coords[n..].to_vec(),
        }
    }

    pub fn expect_side(&self, side: Side, what: &'static str) -> Result<()> {
        if self.side != side {
            return Err(Error::Side(what));
        }
        Ok(())
    }
}

/// A section `e = f^a(x) e_a` of `E`; coefficients are expressions in `x1..xn`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionE {
    pub coeffs: Vec<Expr>,
}

/// A section `ξ = g_a(x) ε^a` of `E*` in the dual frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionEstar {
    pub coeffs: Vec<Expr>,
}

impl SectionE {
    /// The section with constant frame coefficients `v`.
    pub fn constant(v: &[f64]) -> Self {
        SectionE {
            coeffs: v.iter().map(|&c| Expr::num(c)).collect(),
        }
    }

    /// The frame section `e_a` of a rank-`m` bundle.
    pub fn frame(a: usize, m: usize) -> Self {
        let mut v = vec![0.0; m];
        v[a] = 1.0;
        SectionE::constant(&v)
    }
}

impl SectionEstar {
    pub fn constant(v: &[f64]) -> Self {
        SectionEstar {
            coeffs: v.iter().map(|&c| Expr::num(c)).collect(),
        }
    }

    pub fn frame(a: usize, m: usize) -> Self {
        let mut v = vec![0.0; m];
        v[a] = 1.0;
        SectionEstar::constant(&v)
    }
}

/// Structure data of an almost-Lie algebroid on one chart.
#[derive(Clone, Debug)]
pub struct AlgebroidModel {
    pub name: String,
    pub n: usize,
    pub m: usize,
    /// `rho[i][a]` = ρ^i_a, an `n × m` table.
    pub rho: Vec<Vec<Expr>>,
    /// `c[c][a][b]` = C^c_{ab}.
    pub c: Vec<Vec<Vec<Expr>>>,
    almost_lie: bool,
}

/// Anchor and structure functions (with their first and second derivatives)
/// evaluated at one base point.
#[derive(Clone, Debug)]
pub struct LocalStructure {
    pub rho: Vec<Vec<Jet2>>,
    pub c: Vec<Vec<Vec<Jet2>>>,
}

impl LocalStructure {
    /// ρ as an `n × m` matrix of values.
    pub fn rho_matrix(&self) -> Matrix {
        let n = self.rho.len();
        let m = if n == 0 { self.c.len() } else { self.rho[0].len() };
        Matrix::from_fn(n, m, |i, a| self.rho[i][a].value)
    }

    pub fn c_val(&self, c: usize, a: usize, b: usize) -> f64 {
        self.c[c][a][b].value
    }

    /// `ρ(e)` for a fiber vector `e`.
    pub fn anchor(&self, e: &[f64]) -> Vec<f64> {
        self.rho
            .iter()
            .map(|row| row.iter().zip(e).map(|(r, v)| r.value * v).sum())
            .collect()
    }
}

const SAMPLE_POINTS: usize = 16;
const SKEW_TOL: f64 = 1e-12;
const ALMOST_LIE_TOL: f64 = 1e-9;

impl AlgebroidModel {
    /// Builds a model from expression sources over `x1..xn`.
    ///
    /// `rho` is `n` rows of `m` entries; `c` is indexed `[c][a][b]`. Rejects
    /// structure functions that are not skew in `(a, b)` at sampled points.
    pub fn from_sources<S: AsRef<str>>(
        name: &str,
        n: usize,
        m: usize,
        rho: &[Vec<S>],
        c: &[Vec<Vec<S>>],
    ) -> Result<Self> {
        let vars = expr::variable_names(n, 0, "y");
        if rho.len() != n {
            return Err(Error::Dimension {
                what: "anchor rows",
                expected: n,
                got: rho.len(),
            });
        }
        let rho = rho
            .iter()
            .map(|row| {
                if row.len() != m {
                    return Err(Error::Dimension {
                        what: "anchor columns",
                        expected: m,
                        got: row.len(),
                    });
                }
                row.iter().map(|s| expr::parse(s.as_ref(), &vars)).collect()
            })
            .collect::<Result<Vec<Vec<Expr>>>>()?;
        if c.len() != m {
            return Err(Error::Dimension {
                what: "structure function blocks",
                expected: m,
                got: c.len(),
            });
        }
        let c = c
            .iter()
            .map(|block| {
                if block.len() != m {
                    return Err(Error::Dimension {
                        what: "structure function rows",
                        expected: m,
                        got: block.len(),
                    });
                }
                block
                    .iter()
                    .map(|row| {
                        if row.len() != m {
                            return Err(Error::Dimension {
                                what: "structure function columns",
                                expected: m,
                                got: row.len(),
                            });
                        }
                        row.iter().map(|s| expr::parse(s.as_ref(), &vars)).collect()
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<Vec<Expr>>>>>()?;
        AlgebroidModel::from_exprs(name, n, m, rho, c)
    }

    pub fn from_exprs(
        name: &str,
        n: usize,
        m: usize,
        rho: Vec<Vec<Expr>>,
        c: Vec<Vec<Vec<Expr>>>,
    ) -> Result<Self> {
        let mut model = AlgebroidModel {
            name: name.to_string(),
            n,
            m,
            rho,
            c,
            almost_lie: false,
        };
        for x in model.sample_points(SAMPLE_POINTS, 0x5eed) {
            let skew = model.skew_defect(&x)?;
            if skew > SKEW_TOL {
                return Err(Error::InvalidModel(alloc::format!(
                    "structure functions are not skew-symmetric (defect {:e})",
                    skew
                )));
            }
        }
        model.almost_lie = model.max_almost_lie_residual(SAMPLE_POINTS, 0xa1)? <= ALMOST_LIE_TOL;
        Ok(model)
    }

    /// Whether the anchor/bracket compatibility held at every sampled point
    /// when the model was loaded.
    pub fn is_almost_lie(&self) -> bool {
        self.almost_lie
    }

    /// Deterministic base points in `[-1, 1]^n` used by load-time checks.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..self.n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    fn skew_defect(&self, x: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for c in 0..self.m {
            for a in 0..self.m {
                for b in 0..self.m {
                    let s = self.c[c][a][b].eval::<f64>(x)? + self.c[c][b][a].eval::<f64>(x)?;
                    worst = worst.max(libm::fabs(s));
                }
            }
        }
        Ok(worst)
    }

    pub fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                what: "base point",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_point(&self, p: &PhasePoint) -> Result<()> {
        self.check_x(&p.x)?;
        if p.fiber.len() != self.m {
            return Err(Error::Dimension {
                what: "fiber coordinates",
                expected: self.m,
                got: p.fiber.len(),
            });
        }
        Ok(())
    }

    /// Evaluates ρ and C with derivatives in `x`.
    pub fn local(&self, x: &[f64]) -> Result<LocalStructure> {
        self.check_x(x)?;
        let seeds = Jet2::seed(x);
        let jet = |e: &Expr| -> Result<Jet2> {
            let j = e.eval(&seeds)?;
            Ok(if j.dim() == self.n {
                j
            } else {
                Jet2::constant(j.value, self.n)
            })
        };
        let rho = self
            .rho
            .iter()
            .map(|row| row.iter().map(jet).collect())
            .collect::<Result<_>>()?;
        let c = self
            .c
            .iter()
            .map(|blk| blk.iter().map(|row| row.iter().map(jet).collect()).collect())
            .collect::<Result<_>>()?;
        Ok(LocalStructure { rho, c })
    }

    /// The anchor `ρ(e) = ρ^i_a(x) y^a` at a point of `E`.
    pub fn anchor_apply(&self, p: &PhasePoint) -> Result<Vec<f64>> {
        p.expect_side(Side::E, "anchor")?;
        self.check_point(p)?;
        Ok(self.local(&p.x)?.anchor(&p.fiber))
    }

    fn section_jets(&self, coeffs: &[Expr], x: &[f64]) -> Result<Vec<Jet2>> {
        if coeffs.len() != self.m {
            return Err(Error::Dimension {
                what: "section coefficients",
                expected: self.m,
                got: coeffs.len(),
            });
        }
        let seeds = Jet2::seed(x);
        coeffs
            .iter()
            .map(|e| {
                let j = e.eval(&seeds)?;
                Ok(if j.dim() == self.n {
                    j
                } else {
                    Jet2::constant(j.value, self.n)
                })
            })
            .collect()
    }

    /// Value of a section at `x`.
    pub fn section_value(&self, s: &SectionE, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.section_jets(&s.coeffs, x)?.iter().map(|j| j.value).collect())
    }

    /// Bracket of two sections at `x`:
    /// `f^a g^b C^c_{ab} + ρ(e)(g^c) − ρ(e')(f^c)`.
    pub fn bracket(&self, e: &SectionE, e2: &SectionE, x: &[f64]) -> Result<Vec<f64>> {
        self.bracket_in(&self.local(x)?, e, e2, x)
    }

    /// [`Self::bracket`] with the local structure at `x` already evaluated.
    pub fn bracket_in(
        &self,
        loc: &LocalStructure,
        e: &SectionE,
        e2: &SectionE,
        x: &[f64],
    ) -> Result<Vec<f64>> {
        let f = self.section_jets(&e.coeffs, x)?;
        let g = self.section_jets(&e2.coeffs, x)?;
        let fv: Vec<f64> = f.iter().map(|j| j.value).collect();
        let gv: Vec<f64> = g.iter().map(|j| j.value).collect();
        let rho_e = loc.anchor(&fv);
        let rho_e2 = loc.anchor(&gv);
        Ok((0..self.m)
            .map(|c| {
                let mut s = 0.0;
                for a in 0..self.m {
                    for b in 0..self.m {
                        s += fv[a] * gv[b] * loc.c_val(c, a, b);
                    }
                }
                s + dot(&rho_e, &g[c].grad) - dot(&rho_e2, &f[c].grad)
            })
            .collect())
    }

    /// `d_E f(e) = ρ(e) f` for a base function `f` and `e ∈ E_x`.
    pub fn d_e_function(&self, f: &Expr, e: &[f64], x: &[f64]) -> Result<f64> {
        self.d_e_function_in(&self.local(x)?, f, e, x)
    }

    /// [`Self::d_e_function`] with the local structure at `x` already evaluated.
    pub fn d_e_function_in(&self, loc: &LocalStructure, f: &Expr, e: &[f64], x: &[f64]) -> Result<f64> {
        let fj = f.eval(&Jet2::seed(x))?;
        if fj.dim() != self.n {
            return Ok(0.0);
        }
        Ok(dot(&loc.anchor(e), &fj.grad))
    }

    /// `d_E ξ(e, e') = ρ(e)⟨ξ,e'⟩ − ρ(e')⟨ξ,e⟩ − ⟨ξ,[e,e']⟩`.
    pub fn d_e_oneform(
        &self,
        xi: &SectionEstar,
        e: &SectionE,
        e2: &SectionE,
        x: &[f64],
    ) -> Result<f64> {
        let loc = self.local(x)?;
        let xs = self.section_jets(&xi.coeffs, x)?;
        let fs = self.section_jets(&e.coeffs, x)?;
        let gs = self.section_jets(&e2.coeffs, x)?;
        let pair = |u: &[Jet2], v: &[Jet2]| -> Jet2 {
            u.iter()
                .zip(v)
                .fold(Jet2::constant(0.0, self.n), |acc, (a, b)| &acc + &(a * b))
        };
        let val = |v: &[Jet2]| -> Vec<f64> { v.iter().map(|j| j.value).collect() };
        let xi_e2 = pair(&xs, &gs);
        let xi_e = pair(&xs, &fs);
        let br = self.bracket(e, e2, x)?;
        Ok(dot(&loc.anchor(&val(&fs)), &xi_e2.grad) - dot(&loc.anchor(&val(&gs)), &xi_e.grad)
            - dot(&val(&xs), &br))
    }

    /// `R^i_{ab} = ρ^i_c C^c_{ab} − (ρ^j_a ∂_j ρ^i_b − ρ^j_b ∂_j ρ^i_a)`,
    /// indexed `[i][a][b]`.
    pub fn almost_lie_residual(&self, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        let loc = self.local(x)?;
        let (n, m) = (self.n, self.m);
        let mut r = vec![vec![vec![0.0; m]; m]; n];
        for i in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut v = 0.0;
                    for c in 0..m {
                        v += loc.rho[i][c].value * loc.c_val(c, a, b);
                    }
                    for j in 0..n {
                        v -= loc.rho[j][a].value * loc.rho[i][b].grad[j]
                            - loc.rho[j][b].value * loc.rho[i][a].grad[j];
                    }
                    r[i][a][b] = v;
                }
            }
        }
        Ok(r)
    }

    /// Largest |R^i_{ab}| over `count` seeded base points.
    pub fn max_almost_lie_residual(&self, count: usize, seed: u64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in self.sample_points(count, seed) {
            for plane in self.almost_lie_residual(&x)? {
                for row in plane {
                    for v in row {
                        worst = worst.max(libm::fabs(v));
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Cyclic sum `[[e_a,e_b],e_c] + [[e_b,e_c],e_a] + [[e_c,e_a],e_b]`,
    /// indexed `[a][b][c][d]` (last index is the output fiber component).
    pub fn jacobi_residual(&self, x: &[f64]) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
        let m = self.m;
        let inner = |a: usize, b: usize| SectionE {
            coeffs: (0..m).map(|c| self.c[c][a][b].clone()).collect(),
        };
        let mut out = vec![vec![vec![vec![0.0; m]; m]; m]; m];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let t1 = self.bracket(&inner(a, b), &SectionE::frame(c, m), x)?;
                    let t2 = self.bracket(&inner(b, c), &SectionE::frame(a, m), x)?;
                    let t3 = self.bracket(&inner(c, a), &SectionE::frame(b, m), x)?;
                    for d in 0..m {
                        out[a][b][c][d] = t1[d] + t2[d] + t3[d];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Names of the builtin models.
pub const BUILTIN_NAMES: [&str; 6] = ["tm1", "tm2", "so3", "heis3", "action1", "broken2"];

/// Looks up a builtin model by name.
///
/// * `tm1`, `tm2`: tangent bundles of R and R² (ρ = id, C = 0)
/// * `so3`: the Lie algebra so(3), C^c_{ab} = ε_{abc}
/// * `heis3`: the Heisenberg algebra, C^3_{12} = 1
/// * `action1`: ρ = x1 on a line bundle over R
/// * `broken2`: ρ(e₁) = ∂x1, ρ(e₂) = x1·∂x2, C = 0; violates anchor/bracket compatibility
pub fn builtin(name: &str) -> Result<AlgebroidModel> {
    let zero3 = || vec![vec![vec!["0"; 3]; 3]; 3];
    match name {
        "tm1" => AlgebroidModel::from_sources("tm1", 1, 1, &[vec!["1"]], &[vec![vec!["0"]]]),
        "tm2" => AlgebroidModel::from_sources(
            "tm2",
            2,
            2,
            &[vec!["1", "0"], vec!["0", "1"]],
            &vec![vec![vec!["0"; 2]; 2]; 2],
        ),
        "so3" => {
            let mut c = zero3();
            for (a, b, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                c[k][a][b] = "1";
                c[k][b][a] = "-1";
            }
            AlgebroidModel::from_sources::<&str>("so3", 0, 3, &[], &c)
        }
        "heis3" => {
            let mut c = zero3();
            c[2][0][1] = "1";
            c[2][1][0] = "-1";
            AlgebroidModel::from_sources::<&str>("heis3", 0, 3, &[], &c)
        }
        "action1" => {
            AlgebroidModel::from_sources("action1", 1, 1, &[vec!["x1"]], &[vec![vec!["0"]]])
        }
        "broken2" => AlgebroidModel::from_sources(
            "broken2",
            2,
            2,
            &[vec!["1", "0"], vec!["0", "x1"]],
            &vec![vec![vec!["0"; 2]; 2]; 2],
        ),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max3(t: &[Vec<Vec<f64>>]) -> f64 {
        t.iter()
            .flatten()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    #[test]
    fn builtin_dimensions() {
        let tm2 = builtin("tm2").unwrap();
        assert_eq!((tm2.n, tm2.m), (2, 2));
        let loc = tm2.local(&[0.3, 0.4]).unwrap();
        assert_eq!(loc.rho_matrix(), Matrix::identity(2));
        assert!(tm2.is_almost_lie());
        assert!(builtin("so3").unwrap().is_almost_lie());
        assert!(!builtin("broken2").unwrap().is_almost_lie());
        assert!(matches!(builtin("nosuch"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn rejects_non_skew_structure() {
        let c = vec![vec![vec!["1"]]];
        let r = AlgebroidModel::from_sources::<&str>("bad", 0, 1, &[], &c);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn anchor_examples() {
        let tm2 = builtin("tm2").unwrap();
        assert_eq!(tm2.anchor_apply(&PhasePoint::on_e(&[0.0, 0.0], &[1.0, 2.0])).unwrap(), vec![1.0, 2.0]);
        let so3 = builtin("so3").unwrap();
        assert!(so3.anchor_apply(&PhasePoint::on_e(&[], &[1.0, 2.0, 3.0])).unwrap().is_empty());
        let act = builtin("action1").unwrap();
        assert_eq!(act.anchor_apply(&PhasePoint::on_e(&[2.0], &[3.0])).unwrap(), vec![6.0]);
        assert!(matches!(
            act.anchor_apply(&PhasePoint::on_estar(&[2.0], &[3.0])),
            Err(Error::Side(_))
        ));
        assert!(matches!(
            act.anchor_apply(&PhasePoint::on_e(&[2.0, 1.0], &[3.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn bracket_examples() {
        let so3 = builtin("so3").unwrap();
        let b = so3.bracket(&SectionE::frame(0, 3), &SectionE::frame(1, 3), &[]).unwrap();
        assert_eq!(b, vec![0.0, 0.0, 1.0]);
        let tm1 = builtin("tm1").unwrap();
        let xe = SectionE {
            coeffs: vec![expr::parse("x1", &["x1"]).unwrap()],
        };
        for x in [-1.5, 0.0, 2.0] {
            assert_eq!(tm1.bracket(&SectionE::frame(0, 1), &xe, &[x]).unwrap(), vec![1.0]);
        }
        let s = SectionE {
            coeffs: vec![
                expr::parse("sin(x1)", &["x1", "x2"]).unwrap(),
                expr::parse("x1*x2", &["x1", "x2"]).unwrap(),
            ],
        };
        let act = builtin("tm2").unwrap();
        assert_eq!(act.bracket(&s, &s, &[0.4, -0.3]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn d_e_examples() {
        let tm2 = builtin("tm2").unwrap();
        let f = expr::parse("x1^2", &["x1", "x2"]).unwrap();
        assert_eq!(tm2.d_e_function(&f, &[1.0, 0.0], &[3.0, 0.0]).unwrap(), 6.0);
        let so3 = builtin("so3").unwrap();
        assert_eq!(so3.d_e_function(&Expr::num(4.0), &[1.0, 2.0, 3.0], &[]).unwrap(), 0.0);
        let act = builtin("action1").unwrap();
        let f = expr::parse("x1", &["x1"]).unwrap();
        assert_eq!(act.d_e_function(&f, &[1.0], &[2.0]).unwrap(), 2.0);

        let v = so3
            .d_e_oneform(
                &SectionEstar::frame(2, 3),
                &SectionE::frame(0, 3),
                &SectionE::frame(1, 3),
                &[],
            )
            .unwrap();
        assert_eq!(v, -1.0);
        let e = SectionE::constant(&[0.3, -0.2, 0.9]);
        let xi = SectionEstar::constant(&[1.0, 2.0, -1.0]);
        assert_eq!(so3.d_e_oneform(&xi, &e, &e, &[]).unwrap(), 0.0);
    }

    #[test]
    fn d_e_oneform_tm1_by_hand() {
        // ξ = x1 ε¹, e = e₁, e' = x1 e₁ on tm1:
        // ρ(e)⟨ξ,e'⟩ = ∂x(x²) = 2x, ρ(e')⟨ξ,e⟩ = x·∂x(x) = x, [e,e'] = e₁ so ⟨ξ,[e,e']⟩ = x.
        let tm1 = builtin("tm1").unwrap();
        let xv = expr::parse("x1", &["x1"]).unwrap();
        let xi = SectionEstar { coeffs: vec![xv.clone()] };
        let e2 = SectionE { coeffs: vec![xv] };
        for x in [-0.7, 0.0, 1.3] {
            let v = tm1.d_e_oneform(&xi, &SectionE::frame(0, 1), &e2, &[x]).unwrap();
            assert!((v - (2.0 * x - x - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn almost_lie_residual_examples() {
        assert_eq!(max3(&builtin("tm2").unwrap().almost_lie_residual(&[0.2, 0.9]).unwrap()), 0.0);
        assert!(builtin("so3").unwrap().almost_lie_residual(&[]).unwrap().is_empty());
        let r = builtin("broken2").unwrap().almost_lie_residual(&[1.0, 1.0]).unwrap();
        assert_eq!(r[1][0][1], -1.0);
        assert_eq!(r[1][1][0], 1.0);
        assert_eq!(r[0][0][1], 0.0);
        assert_eq!(r[1][0][0], 0.0);
    }

    #[test]
    fn jacobi_examples() {
        for name in ["so3", "heis3"] {
            let j = builtin(name).unwrap().jacobi_residual(&[]).unwrap();
            let worst = j.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            assert_eq!(worst, 0.0, "{}", name);
        }
    }
}
