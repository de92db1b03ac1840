//! `GL_2(F_q)` side of the story: conjugacy classes, cuspidal characters and
//! the matrix Gauss sum `g(ρ, ψ) = tr(Σ_g ρ(g) ψ(tr g)) / dim ρ`.
//!
//! Everything is computed inside the tower `F_q ⊂ F_{q^2}`: base-field
//! elements are the `q - 1` powers `g^{(q+1)t}` of the big generator.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chars::{galois_orbit, is_primitive, mult_char_value, AddChar, CharIndex};
use crate::dft::pairwise_sum_by;
use crate::error::{Error, Result};
use crate::expsum::SumContext;
use crate::ffield::{Elem, Tower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassKind {
    /// `a·I`
    Central { a: Elem },
    /// `a·I + E_{12}`
    Nonsemisimple { a: Elem },
    /// `diag(a, b)` with `a ≠ b`, unordered.
    Split { a: Elem, b: Elem },
    /// Eigenvalues `x, x^q` with `x ∈ F_{q^2} \ F_q`.
    Elliptic { x: Elem },
}

impl ClassKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassKind::Central { .. } => "central",
            ClassKind::Nonsemisimple { .. } => "nonsemisimple",
            ClassKind::Split { .. } => "split",
            ClassKind::Elliptic { .. } => "elliptic",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConjClassGL2 {
    pub kind: ClassKind,
    pub size: u64,
    /// Matrix trace, an element of `F_q`.
    pub trace: Elem,
}

/// Class values of the cuspidal character attached to a primitive `χ`,
/// aligned with [`Gl2::classes`].
#[derive(Clone, Debug, Serialize)]
pub struct CuspidalGL2Char {
    pub j: u64,
    pub dim: u64,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KondoRow {
    pub j: u64,
    pub matrix_gauss: Complex64,
    pub gauss: Complex64,
    /// `|g(ρ) - q·g(χ)|`
    pub residual: f64,
    /// `|g(ρ) + q·g(χ)|`
    pub signed_residual: f64,
    /// `||g(ρ)| - q²|`
    pub abs_residual: f64,
    /// `Σ size·|θ|² / |G| - 1`
    pub norm_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KondoReport {
    pub q: u64,
    pub tol: f64,
    pub rows: Vec<KondoRow>,
    pub orbits: usize,
    pub max_residual: f64,
    pub max_signed_residual: f64,
    pub max_abs_residual: f64,
    pub max_norm_defect: f64,
    /// Largest `|⟨θ_j, θ_j'⟩| / |G|` over distinct orbits.
    pub max_cross_inner: f64,
}

impl KondoReport {
    /// `g(ρ) = q·g(χ)` for every row.
    pub fn identity_holds(&self) -> bool {
        self.max_residual < self.tol * (self.q * self.q) as f64
    }

    /// `g(ρ) = -q·g(χ)` for every row.
    pub fn signed_identity_holds(&self) -> bool {
        self.max_signed_residual < self.tol * (self.q * self.q) as f64
    }

    /// `|g(ρ)| = q²` for every row.
    pub fn absolute_value_holds(&self) -> bool {
        self.max_abs_residual < self.tol * (self.q * self.q) as f64
    }

    /// Norm one and cross-orbit orthogonality.
    pub fn characters_ok(&self) -> bool {
        self.max_norm_defect < 1e-6 && self.max_cross_inner < 1e-6
    }
}

pub struct Gl2 {
    ctx: SumContext,
    psi_q: AddChar,
    classes: Vec<ConjClassGL2>,
}

impl Gl2 {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        Self::from_tower(Tower::new(p, m, 2)?, 1)
    }

    pub fn from_tower(tower: Tower, twist: u64) -> Result<Self> {
        if tower.d() != 2 {
            return Err(Error::WrongDegree { expected: 2, got: tower.d() });
        }
        let psi_q = AddChar::on_base(&tower, twist)?;
        let ctx = SumContext::with_twist(tower, twist)?;
        let classes = conj_classes(ctx.tower());
        Ok(Gl2 { ctx, psi_q, classes })
    }

    pub fn context(&self) -> &SumContext {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    /// `|GL_2(F_q)| = (q² - 1)(q² - q)`.
    pub fn order(&self) -> u128 {
        group_order(self.q())
    }

    pub fn classes(&self) -> &[ConjClassGL2] {
        &self.classes
    }

    pub fn cuspidal_char(&self, j: CharIndex) -> Result<CuspidalGL2Char> {
        let tower = self.ctx.tower();
        let field = &tower.field;
        let j = CharIndex(j.0 % tower.group_order());
        if !is_primitive(&tower.view, j) {
            return Err(Error::NotPrimitive { j: j.0 });
        }
        let q = self.q();
        let chi = |x: Elem| mult_char_value(field, j, x);
        let values = self
            .classes
            .iter()
            .map(|c| {
                Ok(match c.kind {
                    ClassKind::Central { a } => chi(a)? * (q - 1) as f64,
                    ClassKind::Nonsemisimple { a } => -chi(a)?,
                    ClassKind::Split { .. } => Complex64::new(0.0, 0.0),
                    ClassKind::Elliptic { x } => -(chi(x)? + chi(tower.frobenius(x, 1))?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CuspidalGL2Char { j: j.0, dim: q - 1, values })
    }

    /// `Σ_C size(C)·θ(C)·ψ_q(tr C) / dim`.
    pub fn matrix_gauss_sum(&self, theta: &CuspidalGL2Char) -> Complex64 {
        let s = pairwise_sum_by(self.classes.len(), |i| {
            let c = &self.classes[i];
            theta.values[i] * self.psi_q.value(c.trace) * c.size as f64
        });
        s / theta.dim as f64
    }

    /// `Σ_C size(C)·θ(C)·conj(θ'(C))`.
    pub fn inner_product(&self, a: &CuspidalGL2Char, b: &CuspidalGL2Char) -> Complex64 {
        pairwise_sum_by(self.classes.len(), |i| a.values[i] * b.values[i].conj() * self.classes[i].size as f64)
    }

    /// Primitive characters of `F_{q^2}^*`, ascending.
    pub fn primitive_indices(&self) -> Vec<CharIndex> {
        let view = &self.ctx.tower().view;
        (0..view.group_order()).map(CharIndex).filter(|&j| is_primitive(view, j)).collect()
    }

    /// Compare `g(ρ_χ, ψ)` with `q·g(χ, ψ∘Tr)` for every primitive `χ`,
    /// alongside the character-norm and orthogonality checks.
    pub fn verify_kondo(&self, tol: f64) -> Result<KondoReport> {
        let q = self.q();
        let qf = q as f64;
        let order = self.order() as f64;
        let prims = self.primitive_indices();
        let chars: Vec<CuspidalGL2Char> = prims.par_iter().map(|&j| self.cuspidal_char(j)).collect::<Result<_>>()?;
        let rows: Vec<KondoRow> = chars
            .par_iter()
            .map(|theta| {
                let j = CharIndex(theta.j);
                let matrix_gauss = self.matrix_gauss_sum(theta);
                let gauss = self.ctx.gauss_sum_direct(j);
                KondoRow {
                    j: theta.j,
                    matrix_gauss,
                    gauss,
                    residual: (matrix_gauss - gauss * qf).norm(),
                    signed_residual: (matrix_gauss + gauss * qf).norm(),
                    abs_residual: (matrix_gauss.norm() - qf * qf).abs(),
                    norm_defect: (self.inner_product(theta, theta).re / order - 1.0).abs(),
                }
            })
            .collect();
        // one representative per orbit, then all cross pairs
        let view = &self.ctx.tower().view;
        let reps: Vec<usize> = prims
            .iter()
            .enumerate()
            .filter(|(_, &j)| galois_orbit(view, j).iter().all(|k| k.0 >= j.0))
            .map(|(i, _)| i)
            .collect();
        let mut max_cross_inner: f64 = 0.0;
        for (x, &a) in reps.iter().enumerate() {
            for &b in &reps[x + 1..] {
                max_cross_inner = max_cross_inner.max(self.inner_product(&chars[a], &chars[b]).norm() / order);
            }
        }
        let max = |f: fn(&KondoRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        Ok(KondoReport {
            q,
            tol,
            orbits: reps.len(),
            max_residual: max(|r| r.residual),
            max_signed_residual: max(|r| r.signed_residual),
            max_abs_residual: max(|r| r.abs_residual),
            max_norm_defect: max(|r| r.norm_defect),
            max_cross_inner,
            rows,
        })
    }
}

pub fn group_order(q: u64) -> u128 {
    let q = q as u128;
    (q * q - 1) * (q * q - q)
}

/// All conjugacy classes of `GL_2(F_q)` for the base field of a `d = 2`
/// tower, ordered central, non-semisimple, split, elliptic and by log index
/// within each kind.
pub fn conj_classes(tower: &Tower) -> Vec<ConjClassGL2> {
    let field = &tower.field;
    let view = &tower.view;
    let q = view.q();
    let base: Vec<Elem> = view.base_nonzero(field).collect();
    let mut out = Vec::new();
    for &a in &base {
        out.push(ConjClassGL2 { kind: ClassKind::Central { a }, size: 1, trace: field.add(a, a) });
    }
    for &a in &base {
        out.push(ConjClassGL2 { kind: ClassKind::Nonsemisimple { a }, size: q * q - 1, trace: field.add(a, a) });
    }
    for (i, &a) in base.iter().enumerate() {
        for &b in &base[i + 1..] {
            out.push(ConjClassGL2 { kind: ClassKind::Split { a, b }, size: q * q + q, trace: field.add(a, b) });
        }
    }
    let m = view.group_order();
    let stride = view.stride();
    for k in 0..m {
        let conj = k * q % m;
        if k % stride != 0 && k < conj {
            let x = field.from_log(k);
            out.push(ConjClassGL2 { kind: ClassKind::Elliptic { x }, size: q * q - q, trace: tower.trace_rel(x) });
        }
    }
    out
}
