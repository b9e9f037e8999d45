//! Generalized quaternion groups `H_m` with precomputed Cayley tables.
//!
//! `H_m = <x, y | x^{2^m} = y^4 = 1, y^2 = x^{2^{m-1}}, xyx = y>` has order
//! `2^{m+1}`; `H_2` is the quaternion group `Q_8` (x = i, y = j). Every element
//! has a unique normal form `x^a y^b` with `0 <= a < 2^m`, `b in {0, 1}`.

use std::fmt;

use crate::error::Error;

/// Element of a generalized quaternion group in normal form `x^a y^b`.
///
/// Elements are plain value types; all arithmetic goes through the owning
/// [`QuaternionGroup`], which knows the order `2^m` of `x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Element {
    /// Exponent of `x`, in `[0, 2^m)`.
    pub x_exp: u32,
    /// Exponent of `y`, in `{0, 1}`.
    pub y_exp: u32,
}

impl Element {
    pub const IDENTITY: Element = Element { x_exp: 0, y_exp: 0 };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x_exp, self.y_exp) {
            (0, 0) => write!(f, "e"),
            (0, 1) => write!(f, "y"),
            (1, 0) => write!(f, "x"),
            (1, 1) => write!(f, "x*y"),
            (a, 0) => write!(f, "x^{a}"),
            (a, 1) => write!(f, "x^{a}*y"),
            _ => unreachable!(),
        }
    }
}

/// A generalized quaternion group of order `2^{m+1}` with full Cayley and
/// inverse tables, verified at construction.
#[derive(Clone, Debug)]
pub struct QuaternionGroup {
    m: u32,
    order: usize,
    x_order: u32,
    cayley: Vec<u8>,
    inverse: Vec<u8>,
}

impl QuaternionGroup {
    /// Builds `H_m` for `m >= 2`. The Cayley table is checked exhaustively for
    /// associativity, identity, inverses and the defining relations; any
    /// failure is a bug and aborts construction.
    pub fn new(m: u32) -> Result<Self, Error> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "generalized quaternion group needs m >= 2, got {m}"
            )));
        }
        if m > 6 {
            return Err(Error::InvalidParameter(format!(
                "m = {m} exceeds the supported table size (m <= 6)"
            )));
        }
        let x_order = 1u32 << m;
        let order = (2 * x_order) as usize;

        let mut cayley = vec![0u8; order * order];
        for i in 0..order {
            let g = Self::element_of_index_raw(i, x_order);
            for j in 0..order {
                let h = Self::element_of_index_raw(j, x_order);
                let p = Self::mul_normal(g, h, x_order);
                cayley[i * order + j] = Self::index_of_element_raw(p, x_order) as u8;
            }
        }

        let mut inverse = vec![0u8; order];
        for i in 0..order {
            let mut found = None;
            for j in 0..order {
                if cayley[i * order + j] == 0 {
                    found = Some(j as u8);
                    break;
                }
            }
            inverse[i] = found.ok_or_else(|| {
                Error::Internal(format!("element index {i} has no inverse"))
            })?;
        }

        let group = QuaternionGroup { m, order, x_order, cayley, inverse };
        group.verify_axioms()?;
        Ok(group)
    }

    fn verify_axioms(&self) -> Result<(), Error> {
        let n = self.order;
        let e = Element::IDENTITY;
        for i in 0..n {
            let g = self.element_of_index(i);
            if self.mul(e, g) != g || self.mul(g, e) != g {
                return Err(Error::Internal(format!("identity law fails at {g}")));
            }
            let ginv = self.inv(g);
            if self.mul(g, ginv) != e || self.mul(ginv, g) != e {
                return Err(Error::Internal(format!("inverse law fails at {g}")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (g, h, l) = (
                        self.element_of_index(i),
                        self.element_of_index(j),
                        self.element_of_index(k),
                    );
                    if self.mul(self.mul(g, h), l) != self.mul(g, self.mul(h, l)) {
                        return Err(Error::Internal(format!(
                            "associativity fails at ({g}, {h}, {l})"
                        )));
                    }
                }
            }
        }
        // Defining relations.
        let x = Element { x_exp: 1, y_exp: 0 };
        let y = Element { x_exp: 0, y_exp: 1 };
        let pow = |g: Element, k: u32| {
            let mut acc = Element::IDENTITY;
            for _ in 0..k {
                acc = self.mul(acc, g);
            }
            acc
        };
        if pow(x, self.x_order) != e {
            return Err(Error::Internal("relation x^{2^m} = e fails".into()));
        }
        if self.mul(y, y) != pow(x, self.x_order / 2) {
            return Err(Error::Internal("relation y^2 = x^{2^{m-1}} fails".into()));
        }
        if self.mul(self.mul(x, y), x) != y {
            return Err(Error::Internal("relation xyx = y fails".into()));
        }
        Ok(())
    }

    // Normal-form product without tables: y x^c = x^{-c} y.
    fn mul_normal(g: Element, h: Element, x_order: u32) -> Element {
        let half = x_order / 2;
        match (g.y_exp, h.y_exp) {
            (0, b) => Element { x_exp: (g.x_exp + h.x_exp) % x_order, y_exp: b },
            (1, 0) => Element {
                x_exp: (g.x_exp + x_order - h.x_exp % x_order) % x_order,
                y_exp: 1,
            },
            (1, 1) => Element {
                x_exp: (g.x_exp + x_order - h.x_exp % x_order + half) % x_order,
                y_exp: 0,
            },
            _ => unreachable!(),
        }
    }

    fn element_of_index_raw(i: usize, x_order: u32) -> Element {
        let i = i as u32;
        Element { x_exp: i % x_order, y_exp: i / x_order }
    }

    fn index_of_element_raw(g: Element, x_order: u32) -> usize {
        (g.y_exp * x_order + g.x_exp) as usize
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Group order `2^{m+1}`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Canonical enumeration: `e, x, x^2, ..., y, xy, x^2 y, ...`
    /// (index `b * 2^m + a` for `x^a y^b`).
    pub fn element_of_index(&self, i: usize) -> Element {
        debug_assert!(i < self.order);
        Self::element_of_index_raw(i, self.x_order)
    }

    pub fn index_of_element(&self, g: Element) -> usize {
        Self::index_of_element_raw(g, self.x_order)
    }

    pub fn x(&self) -> Element {
        Element { x_exp: 1, y_exp: 0 }
    }

    pub fn y(&self) -> Element {
        Element { x_exp: 0, y_exp: 1 }
    }

    /// Table-lookup product of normal forms.
    pub fn mul(&self, g: Element, h: Element) -> Element {
        let p = self.cayley[self.index_of_element(g) * self.order + self.index_of_element(h)];
        self.element_of_index(p as usize)
    }

    pub fn inv(&self, g: Element) -> Element {
        self.element_of_index(self.inverse[self.index_of_element(g)] as usize)
    }

    /// Conjugation `by^{-1} * g * by`.
    pub fn conj(&self, g: Element, by: Element) -> Element {
        self.mul(self.mul(self.inv(by), g), by)
    }

    /// Parses the serialized form produced by `Element::to_string`
    /// ("e", "x", "y", "x^2*y", ...). Also accepts explicit exponents
    /// like "x^0*y^1".
    pub fn parse_element(&self, s: &str) -> Result<Element, Error> {
        let s = s.trim();
        if s == "e" {
            return Ok(Element::IDENTITY);
        }
        let mut x_exp = 0u32;
        let mut y_exp = 0u32;
        for part in s.split('*') {
            let part = part.trim();
            if let Some(rest) = part.strip_prefix("x^") {
                x_exp = rest
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad x exponent in {s:?}")))?;
            } else if let Some(rest) = part.strip_prefix("y^") {
                y_exp = rest
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad y exponent in {s:?}")))?;
            } else if part == "x" {
                x_exp = 1;
            } else if part == "y" {
                y_exp = 1;
            } else {
                return Err(Error::Parse(format!("unrecognized factor {part:?} in {s:?}")));
            }
        }
        if x_exp >= self.x_order || y_exp > 1 {
            return Err(Error::Parse(format!("{s:?} is not in normal form for m = {}", self.m)));
        }
        Ok(Element { x_exp, y_exp })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q8() -> QuaternionGroup {
        QuaternionGroup::new(2).unwrap()
    }

    #[test]
    fn q8_has_order_8_and_y_squared_is_x_squared() {
        let g = q8();
        assert_eq!(g.order(), 8);
        let y = g.y();
        assert_eq!(g.mul(y, y), Element { x_exp: 2, y_exp: 0 });
    }

    #[test]
    fn identity_law_over_all_elements() {
        let g = q8();
        for i in 0..8 {
            let a = g.element_of_index(i);
            assert_eq!(g.mul(Element::IDENTITY, a), a);
            assert_eq!(g.mul(a, Element::IDENTITY), a);
        }
    }

    #[test]
    fn m_below_two_is_rejected() {
        assert!(QuaternionGroup::new(1).is_err());
        assert!(QuaternionGroup::new(0).is_err());
    }

    #[test]
    fn x_times_x_is_x_squared_and_xy_times_y_is_x_cubed() {
        let g = q8();
        let (x, y) = (g.x(), g.y());
        assert_eq!(g.mul(x, x), Element { x_exp: 2, y_exp: 0 });
        // xy * y = x * y^2 = x^3, i.e. i*j*j = -i.
        let xy = g.mul(x, y);
        assert_eq!(g.mul(xy, y), Element { x_exp: 3, y_exp: 0 });
    }

    #[test]
    fn conjugation_of_y_by_x_is_x2y() {
        // x^{-1} y x = x^2 y; cross-check against quaternion units: (-i) j i = -j.
        let g = q8();
        assert_eq!(g.conj(g.y(), g.x()), Element { x_exp: 2, y_exp: 1 });
    }

    #[test]
    fn central_x2_is_fixed_by_conjugation() {
        let g = q8();
        let x2 = Element { x_exp: 2, y_exp: 0 };
        for i in 0..8 {
            assert_eq!(g.conj(x2, g.element_of_index(i)), x2);
        }
    }

    #[test]
    fn conjugation_by_identity_is_identity_map() {
        let g = q8();
        for i in 0..8 {
            let a = g.element_of_index(i);
            assert_eq!(g.conj(a, Element::IDENTITY), a);
        }
    }

    #[test]
    fn conjugation_composes_and_preserves_non_identity() {
        let g = q8();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let (a, u, v) = (
                        g.element_of_index(i),
                        g.element_of_index(j),
                        g.element_of_index(k),
                    );
                    assert_eq!(g.conj(g.conj(a, u), v), g.conj(a, g.mul(u, v)));
                }
                let (a, u) = (g.element_of_index(i), g.element_of_index(j));
                assert_eq!(g.conj(a, u).is_identity(), a.is_identity());
            }
        }
    }

    #[test]
    fn group_laws_hold_exhaustively_up_to_m4() {
        for m in 2..=4 {
            // QuaternionGroup::new re-verifies associativity/inverses in full.
            let g = QuaternionGroup::new(m).unwrap();
            assert_eq!(g.order(), 1 << (m + 1));
        }
    }

    #[test]
    fn element_strings_round_trip() {
        let g = q8();
        for i in 0..8 {
            let a = g.element_of_index(i);
            assert_eq!(g.parse_element(&a.to_string()).unwrap(), a);
        }
        assert_eq!(g.parse_element("x^2*y^1").unwrap(), Element { x_exp: 2, y_exp: 1 });
        assert_eq!(Element { x_exp: 3, y_exp: 1 }.to_string(), "x^3*y");
        assert!(g.parse_element("x^9").is_err());
        assert!(g.parse_element("z").is_err());
    }
}
