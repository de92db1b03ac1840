//! Additive and multiplicative characters and the families of multiplicative
//! characters of `F_{q^d}^*` that the equidistribution statements are about.
//!
//! Character values are kept as exact rational angles and only turned into
//! floating point when summed, so every classification predicate below is
//! integer arithmetic.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dft::unit_root;
use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldTable, SubfieldView, Tower};

/// The unit complex number `e^{2πi num/den}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Angle {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Angle {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        Angle { num: num % den, den }
    }

    pub fn zero() -> Self {
        Angle { num: 0, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// The value is exactly 1.
    pub fn is_trivial(&self) -> bool {
        self.num == 0
    }

    pub fn to_complex(self) -> Complex64 {
        unit_root(self.num, self.den)
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;

    fn add(self, other: Angle) -> Angle {
        let l = self.den / gcd(self.den, other.den) * other.den;
        let a = self.num as u128 * (l / self.den) as u128;
        let b = other.num as u128 * (l / other.den) as u128;
        Angle::new(((a + b) % l as u128) as u64, l)
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle::new(self.den - self.num, self.den)
    }
}

/// `ψ(x) = e^{2πi t·Tr(x)/p}` for a fixed nonzero twist `t ∈ F_p`.
///
/// Values are tabulated by discrete log. For the base field of a tower the
/// table is indexed by the base log `t` (`x = g^{s t}`).
#[derive(Clone, Debug)]
pub struct AddChar {
    p: u64,
    twist: u64,
    stride: u64,
    residues: Vec<u32>,
}

impl AddChar {
    /// `ψ_p ∘ Tr_{F_{p^m}/F_p}` on the whole field.
    pub fn new(field: &FieldTable, twist: u64) -> Result<Self> {
        let p = field.p();
        if twist.is_multiple_of(p) {
            return Err(Error::ZeroTwist(twist));
        }
        let t = twist % p;
        let residues = field.trace_values().iter().map(|&tr| ((tr as u64 * t) % p) as u32).collect();
        Ok(AddChar { p, twist: t, stride: 1, residues })
    }

    /// `ψ_p ∘ Tr_{F_q/F_p}` on the base field `F_q` of a tower.
    pub fn on_base(tower: &Tower, twist: u64) -> Result<Self> {
        let p = tower.p();
        if twist.is_multiple_of(p) {
            return Err(Error::ZeroTwist(twist));
        }
        let t = twist % p;
        let view = &tower.view;
        let residues =
            view.base_nonzero(&tower.field).map(|y| ((view.base_trace_abs(&tower.field, y) * t) % p) as u32).collect();
        Ok(AddChar { p, twist: t, stride: view.stride(), residues })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn twist(&self) -> u64 {
        self.twist
    }

    /// `t·Tr(x) mod p`, indexed by (base) log.
    pub fn residues(&self) -> &[u32] {
        &self.residues
    }

    pub fn residue(&self, x: Elem) -> u64 {
        match x.log() {
            None => 0,
            Some(k) => {
                debug_assert_eq!(k % self.stride, 0, "element outside the character's domain");
                self.residues[(k / self.stride) as usize] as u64
            }
        }
    }

    pub fn angle(&self, x: Elem) -> Angle {
        Angle::new(self.residue(x), self.p)
    }

    pub fn value(&self, x: Elem) -> Complex64 {
        self.angle(x).to_complex()
    }

    /// `ψ(g^k)` for every log index (base log for base characters).
    pub fn values(&self) -> Vec<Complex64> {
        let roots = crate::dft::root_table(self.p);
        self.residues.iter().map(|&r| roots[r as usize]).collect()
    }
}

/// Index `j` of the multiplicative character `χ_j(g^k) = e^{2πi jk/M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharIndex(pub u64);

impl CharIndex {
    pub fn j(self) -> u64 {
        self.0
    }

    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }

    /// Index of the complex conjugate character.
    pub fn conj(self, group_order: u64) -> CharIndex {
        CharIndex((group_order - self.0 % group_order) % group_order)
    }

    /// Index of `χ^σ = χ ∘ Frob_q`.
    pub fn galois(self, view: &SubfieldView) -> CharIndex {
        let m = view.group_order() as u128;
        CharIndex((self.0 as u128 * view.q() as u128 % m) as u64)
    }
}

impl fmt::Display for CharIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn mult_char(field: &FieldTable, j: CharIndex, x: Elem) -> Result<Angle> {
    let k = x.log().ok_or(Error::CharAtZero)?;
    let m = field.group_order();
    Ok(Angle::new((j.0 as u128 * k as u128 % m as u128) as u64, m))
}

pub fn mult_char_value(field: &FieldTable, j: CharIndex, x: Elem) -> Result<Complex64> {
    mult_char(field, j, x).map(Angle::to_complex)
}

/// `χ_j` is not fixed by `Frob_q^e` for any proper divisor `e` of `d`.
pub fn is_primitive(view: &SubfieldView, j: CharIndex) -> bool {
    let m = view.group_order() as u128;
    let d = view.d();
    (1..d)
        .filter(|e| d.is_multiple_of(*e))
        .all(|e| (j.0 as u128 * view.frobenius_multiplier(e) as u128) % m != j.0 as u128 % m)
}

/// `χ_j` restricts trivially to `F_q^*`.
pub fn has_trivial_central(view: &SubfieldView, j: CharIndex) -> bool {
    j.0.is_multiple_of(view.q() - 1)
}

/// For `d = 2` and `χ_j ∈ C0`: whether `χ_j = η²` for some `η ∈ C0`.
pub fn is_square_in_c0(tower: &Tower, j: CharIndex) -> Result<bool> {
    if tower.d() != 2 {
        return Err(Error::WrongDegree { expected: 2, got: tower.d() });
    }
    if !has_trivial_central(&tower.view, j) {
        return Err(Error::NotInC0 { j: j.0 });
    }
    if tower.p() == 2 {
        // C0 has odd order q + 1
        return Ok(true);
    }
    Ok((j.0 / (tower.q() - 1)).is_multiple_of(2))
}

/// The Galois orbit `{j, qj, ..., q^{d-1} j} mod M`, sorted.
pub fn galois_orbit(view: &SubfieldView, j: CharIndex) -> Vec<CharIndex> {
    let mut orbit: Vec<CharIndex> = (0..view.d())
        .map(|e| {
            let m = view.group_order() as u128;
            CharIndex((j.0 as u128 * view.frobenius_multiplier(e) as u128 % m) as u64)
        })
        .collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

/// Nonzero `√δ ∈ F_{q²}` with `Tr_{F_{q²}/F_q}(√δ) = 0`, smallest log first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceZeroWitness {
    pub elem: Elem,
}

impl TraceZeroWitness {
    pub fn find(tower: &Tower) -> Result<Self> {
        if tower.d() != 2 {
            return Err(Error::WrongDegree { expected: 2, got: tower.d() });
        }
        if tower.p() == 2 {
            return Err(Error::EvenCharacteristic);
        }
        tower
            .field
            .nonzero()
            .find(|&x| tower.trace_rel(x).is_zero())
            .map(|elem| TraceZeroWitness { elem })
            .ok_or_else(|| Error::Invalid("no trace-zero element".into()))
    }
}

/// `χ_j(√δ) = 1`, decided exactly on angles.
pub fn square_criterion_epsilon(tower: &Tower, witness: &TraceZeroWitness, j: CharIndex) -> Result<bool> {
    if tower.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if !has_trivial_central(&tower.view, j) {
        return Err(Error::NotInC0 { j: j.0 });
    }
    Ok(mult_char(&tower.field, j, witness.elem)?.is_trivial())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Every nontrivial character.
    AllNontrivial,
    Primitive,
    /// Characters trivial on `F_q^*`.
    C0,
    C0Primitive,
    /// Squares in `C0` (`d = 2`); all of `C0` when `p = 2`.
    C0S,
    /// Non-squares in `C0` (`d = 2`, `p` odd).
    C0NS,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::AllNontrivial, Family::Primitive, Family::C0, Family::C0Primitive, Family::C0S, Family::C0NS];

    pub fn name(self) -> &'static str {
        match self {
            Family::AllNontrivial => "all",
            Family::Primitive => "primitive",
            Family::C0 => "c0",
            Family::C0Primitive => "c0-primitive",
            Family::C0S => "c0s",
            Family::C0NS => "c0ns",
        }
    }

    pub fn is_defined(self, d: u32, p: u64) -> bool {
        match self {
            Family::C0S => d == 2,
            Family::C0NS => d == 2 && p != 2,
            _ => true,
        }
    }

    pub fn contains(self, tower: &Tower, j: CharIndex) -> bool {
        let view = &tower.view;
        let j = CharIndex(j.0 % view.group_order());
        match self {
            Family::AllNontrivial => j.0 != 0,
            Family::Primitive => is_primitive(view, j),
            Family::C0 => has_trivial_central(view, j),
            Family::C0Primitive => has_trivial_central(view, j) && is_primitive(view, j),
            Family::C0S => has_trivial_central(view, j) && is_square_in_c0(tower, j).unwrap_or(false),
            Family::C0NS => has_trivial_central(view, j) && !is_square_in_c0(tower, j).unwrap_or(true),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .or(match norm.as_str() {
                "all-nontrivial" => Some(Family::AllNontrivial),
                "c0pr" | "c0-pr" => Some(Family::C0Primitive),
                _ => None,
            })
            .ok_or_else(|| Error::Invalid(format!("unknown family '{s}'")))
    }
}

/// Members of `family`, ascending by `j`.
pub fn enumerate_family(tower: &Tower, family: Family) -> Result<Vec<CharIndex>> {
    if !family.is_defined(tower.d(), tower.p()) {
        return Err(Error::FamilyUndefined { family: family.to_string(), d: tower.d(), p: tower.p() });
    }
    let view = &tower.view;
    let members: Vec<CharIndex> = match family {
        Family::C0 | Family::C0Primitive | Family::C0S | Family::C0NS => {
            (0..view.stride()).map(|t| CharIndex(t * (view.q() - 1))).filter(|&j| family.contains(tower, j)).collect()
        }
        _ => (0..view.group_order()).map(CharIndex).filter(|&j| family.contains(tower, j)).collect(),
    };
    Ok(members)
}
