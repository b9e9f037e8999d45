//! The mod-2 cohomology ring of `X = S^3/Q_8` and its tensor square.
//!
//! `H^*(X; F_2) = F_2[x, y]/(x^3, y^3, x^2 + y^2 + xy)` with basis
//! 1; x, y; x^2, xy; x^2 y. Monomials normalize by rewriting `y^2 -> x^2 + xy`
//! and truncating `x^3 = 0`. The tensor square carries the sign-free
//! char-2 product `(a (x) b)(c (x) d) = ac (x) bd`.

use crate::error::Error;

/// Finite graded commutative F_2 algebra with explicit basis and structure
/// constants; unit, associativity and commutativity are checked exhaustively
/// on basis elements at construction.
#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    labels: Vec<Vec<String>>,
    /// table[d1][d2][i1 * dims[d2] + i2] = coordinate mask in degree d1+d2.
    table: Vec<Vec<Vec<u16>>>,
}

/// Element of a [`GradedAlgebra`]: one coordinate mask per degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraElement {
    coords: Vec<u16>,
}

impl GradedAlgebra {
    fn assemble(labels: Vec<Vec<String>>, table: Vec<Vec<Vec<u16>>>) -> Result<Self, Error> {
        for dims in labels.iter().map(|l| l.len()) {
            if dims > 16 {
                return Err(Error::InvalidParameter("degree dimension exceeds 16".into()));
            }
        }
        let alg = GradedAlgebra { labels, table };
        alg.verify_axioms()?;
        Ok(alg)
    }

    fn verify_axioms(&self) -> Result<(), Error> {
        let top = self.top_degree();
        let one = self.unit();
        // Unit and commutativity on basis pairs, associativity on triples.
        for d1 in 0..=top {
            for i1 in 0..self.dim(d1) {
                let a = self.basis_element(d1, i1);
                if self.mul(&one, &a) != a || self.mul(&a, &one) != a {
                    return Err(Error::Internal(format!("unit law fails at {}", self.render(&a))));
                }
                for d2 in 0..=top {
                    for i2 in 0..self.dim(d2) {
                        let b = self.basis_element(d2, i2);
                        if self.mul(&a, &b) != self.mul(&b, &a) {
                            return Err(Error::Internal(format!(
                                "commutativity fails at {} * {}",
                                self.render(&a),
                                self.render(&b)
                            )));
                        }
                        for d3 in 0..=top {
                            for i3 in 0..self.dim(d3) {
                                let c = self.basis_element(d3, i3);
                                if self.mul(&self.mul(&a, &b), &c) != self.mul(&a, &self.mul(&b, &c)) {
                                    return Err(Error::Internal(format!(
                                        "associativity fails at {} * {} * {}",
                                        self.render(&a),
                                        self.render(&b),
                                        self.render(&c)
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn top_degree(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn dim(&self, degree: usize) -> usize {
        if degree <= self.top_degree() {
            self.labels[degree].len()
        } else {
            0
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn label(&self, degree: usize, i: usize) -> &str {
        &self.labels[degree][i]
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { coords: vec![0; self.labels.len()] }
    }

    pub fn unit(&self) -> AlgebraElement {
        let mut e = self.zero();
        e.coords[0] = 1;
        e
    }

    pub fn basis_element(&self, degree: usize, i: usize) -> AlgebraElement {
        assert!(i < self.dim(degree));
        let mut e = self.zero();
        e.coords[degree] = 1 << i;
        e
    }

    /// Element from labeled basis monomials (all in one or several degrees).
    pub fn element_from_labels(&self, monomials: &[&str]) -> Result<AlgebraElement, Error> {
        let mut e = self.zero();
        'outer: for name in monomials {
            for d in 0..=self.top_degree() {
                if let Some(i) = self.labels[d].iter().position(|l| l == name) {
                    e.coords[d] ^= 1 << i;
                    continue 'outer;
                }
            }
            return Err(Error::InvalidParameter(format!("unknown basis monomial {name:?}")));
        }
        Ok(e)
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x ^ y).collect();
        AlgebraElement { coords }
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let top = self.top_degree();
        let mut out = self.zero();
        for d1 in 0..=top {
            if a.coords[d1] == 0 {
                continue;
            }
            for d2 in 0..=top {
                if b.coords[d2] == 0 || d1 + d2 > top {
                    continue;
                }
                let block = &self.table[d1][d2];
                let n2 = self.dim(d2);
                let mut m1 = a.coords[d1];
                while m1 != 0 {
                    let i1 = m1.trailing_zeros() as usize;
                    m1 &= m1 - 1;
                    let mut m2 = b.coords[d2];
                    while m2 != 0 {
                        let i2 = m2.trailing_zeros() as usize;
                        m2 &= m2 - 1;
                        out.coords[d1 + d2] ^= block[i1 * n2 + i2];
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &AlgebraElement, k: usize) -> AlgebraElement {
        let mut acc = self.unit();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_zero(&self, a: &AlgebraElement) -> bool {
        a.coords.iter().all(|&m| m == 0)
    }

    /// Homogeneous degree when the element has exactly one nonzero component.
    pub fn degree_of(&self, a: &AlgebraElement) -> Option<usize> {
        let mut deg = None;
        for (d, &m) in a.coords.iter().enumerate() {
            if m != 0 {
                if deg.is_some() {
                    return None;
                }
                deg = Some(d);
            }
        }
        deg
    }

    /// Sorted monomial-sum rendering, e.g. `x^2*y(x)x^2 + x^2(x)x^2*y`.
    pub fn render(&self, a: &AlgebraElement) -> String {
        let mut monomials = Vec::new();
        for (d, &mask) in a.coords.iter().enumerate() {
            let mut m = mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                monomials.push(self.labels[d][i].clone());
            }
        }
        if monomials.is_empty() {
            return "0".to_string();
        }
        monomials.sort();
        monomials.join(" + ")
    }
}

// Monomial arithmetic for H^*(X): x^i y^j mod (x^3, y^3, x^2 + y^2 + xy).

type Monomial = (u8, u8);

/// One rewriting step per monomial occurrence; linear over F_2 (sets of
/// monomials with XOR).
fn rewrite_once(m: Monomial) -> Vec<Monomial> {
    let (i, j) = m;
    if i >= 3 || (i as usize + j as usize) > 3 {
        return Vec::new();
    }
    if j >= 2 {
        // y^2 = x^2 + xy.
        return vec![(i + 2, j - 2), (i + 1, j - 1)];
    }
    vec![m]
}

fn toggle(set: &mut Vec<Monomial>, m: Monomial) {
    if let Some(pos) = set.iter().position(|&e| e == m) {
        set.remove(pos);
    } else {
        set.push(m);
    }
}

/// Normal form of a sum of monomials: repeatedly rewrite until every
/// monomial has j <= 1, i <= 2, total degree <= 3. `prefer_low_first`
/// switches the scheduling order; both orders must agree (confluence).
pub fn reduce_monomials(set: &[Monomial], prefer_low_first: bool) -> Vec<Monomial> {
    let mut work: Vec<Monomial> = Vec::new();
    for &m in set {
        toggle(&mut work, m);
    }
    loop {
        let mut candidates: Vec<usize> = (0..work.len())
            .filter(|&k| {
                let (i, j) = work[k];
                i >= 3 || j >= 2 || (i as usize + j as usize) > 3
            })
            .collect();
        if candidates.is_empty() {
            break;
        }
        if prefer_low_first {
            candidates.sort_by_key(|&k| work[k]);
        } else {
            candidates.sort_by_key(|&k| std::cmp::Reverse(work[k]));
        }
        let m = work.remove(candidates[0]);
        for r in rewrite_once(m) {
            toggle(&mut work, r);
        }
    }
    work.sort_unstable();
    work
}

fn monomial_label(m: Monomial) -> String {
    match m {
        (0, 0) => "1".to_string(),
        (i, j) => {
            let mut parts = Vec::new();
            match i {
                0 => {}
                1 => parts.push("x".to_string()),
                _ => parts.push(format!("x^{i}")),
            }
            if j == 1 {
                parts.push("y".to_string());
            }
            parts.join("*")
        }
    }
}

/// Basis monomials per degree: 1; x, y; x^2, x*y; x^2*y.
const BASIS: [&[Monomial]; 4] = [
    &[(0, 0)],
    &[(1, 0), (0, 1)],
    &[(2, 0), (1, 1)],
    &[(2, 1)],
];

/// Builds `H^*(X; F_2)` with dims (1, 2, 2, 1).
pub fn cohomology_ring_of_x() -> Result<GradedAlgebra, Error> {
    let labels: Vec<Vec<String>> =
        BASIS.iter().map(|b| b.iter().map(|&m| monomial_label(m)).collect()).collect();
    let mut table = Vec::with_capacity(4);
    for d1 in 0..4usize {
        let mut row = Vec::with_capacity(4);
        for d2 in 0..4usize {
            let mut block = Vec::new();
            if d1 + d2 <= 3 {
                for &m1 in BASIS[d1] {
                    for &m2 in BASIS[d2] {
                        let product = (m1.0 + m2.0, m1.1 + m2.1);
                        let reduced = reduce_monomials(&[product], true);
                        let mut mask = 0u16;
                        for r in reduced {
                            let pos = BASIS[d1 + d2]
                                .iter()
                                .position(|&b| b == r)
                                .expect("normal form lands in the basis");
                            mask ^= 1 << pos;
                        }
                        block.push(mask);
                    }
                }
            } else {
                block = vec![0; BASIS[d1].len() * BASIS[d2].len()];
            }
            row.push(block);
        }
        table.push(row);
    }
    GradedAlgebra::assemble(labels, table)
}

/// Kunneth tensor square `A (x) A` with the componentwise product.
pub fn tensor_square(a: &GradedAlgebra) -> Result<GradedAlgebra, Error> {
    let top = a.top_degree();
    let ttop = 2 * top;
    // Basis of degree d: pairs (p, i, q, j) with p + q = d, ordered by p then
    // basis indices.
    let mut basis: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); ttop + 1];
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); ttop + 1];
    for p in 0..=top {
        for q in 0..=top {
            for i in 0..a.dim(p) {
                for j in 0..a.dim(q) {
                    basis[p + q].push((p, i, q, j));
                    labels[p + q].push(format!("{}\u{2297}{}", a.label(p, i), a.label(q, j)));
                }
            }
        }
    }
    let index_of = |d: usize, key: (usize, usize, usize, usize)| -> usize {
        basis[d].iter().position(|&k| k == key).expect("tensor basis key")
    };
    let mut table = Vec::with_capacity(ttop + 1);
    for d1 in 0..=ttop {
        let mut row = Vec::with_capacity(ttop + 1);
        for d2 in 0..=ttop {
            let n2 = basis[d2].len();
            let mut block = vec![0u16; basis[d1].len() * n2];
            if d1 + d2 <= ttop {
                for (i1, &(p1, a1, q1, b1)) in basis[d1].iter().enumerate() {
                    for (i2, &(p2, a2, q2, b2)) in basis[d2].iter().enumerate() {
                        if p1 + p2 > top || q1 + q2 > top {
                            continue;
                        }
                        let left = a.mul(&a.basis_element(p1, a1), &a.basis_element(p2, a2));
                        let right = a.mul(&a.basis_element(q1, b1), &a.basis_element(q2, b2));
                        let mut mask = 0u16;
                        let mut ml = left.coords[p1 + p2];
                        while ml != 0 {
                            let li = ml.trailing_zeros() as usize;
                            ml &= ml - 1;
                            let mut mr = right.coords[q1 + q2];
                            while mr != 0 {
                                let ri = mr.trailing_zeros() as usize;
                                mr &= mr - 1;
                                mask ^= 1
                                    << index_of(d1 + d2, (p1 + p2, li, q1 + q2, ri));
                            }
                        }
                        block[i1 * n2 + i2] = mask;
                    }
                }
            }
            row.push(block);
        }
        table.push(row);
    }
    GradedAlgebra::assemble(labels, table)
}

/// The pair (factor algebra, tensor square) with the structure maps used by
/// the lower-bound certificates.
pub struct RingPair {
    pub factor: GradedAlgebra,
    pub square: GradedAlgebra,
}

impl RingPair {
    pub fn build() -> Result<Self, Error> {
        let factor = cohomology_ring_of_x()?;
        let square = tensor_square(&factor)?;
        Ok(RingPair { factor, square })
    }

    /// `1 (x) g + g (x) 1` for homogeneous `g` of positive degree.
    pub fn zero_divisor(&self, g: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let Some(d) = self.factor.degree_of(g) else {
            return Err(Error::InvalidParameter("zero divisor needs a homogeneous input".into()));
        };
        let top = self.factor.top_degree();
        let mut out = self.square.zero();
        // Tensor basis in degree d is ordered with p ascending; 1 (x) g sits
        // in the (0, d) block, g (x) 1 in the (d, 0) block.
        let mut m = g.coords[d];
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            let one_g = self.tensor_basis_index(0, 0, d, i);
            let g_one = self.tensor_basis_index(d, i, 0, 0);
            out.coords[d] ^= 1 << one_g;
            out.coords[d] ^= 1 << g_one;
        }
        let _ = top;
        Ok(out)
    }

    fn tensor_basis_index(&self, p: usize, i: usize, q: usize, j: usize) -> usize {
        let label = format!("{}\u{2297}{}", self.factor.label(p, i), self.factor.label(q, j));
        self.square.labels[p + q]
            .iter()
            .position(|l| *l == label)
            .expect("tensor basis label resolves")
    }

    /// Restriction along the multiplication-to-diagonal `a (x) b -> ab`.
    pub fn diagonal_restriction(&self, e: &AlgebraElement) -> AlgebraElement {
        let top = self.factor.top_degree();
        let mut out = self.factor.zero();
        for d in 0..=(2 * top) {
            let mut m = e.coords[d];
            let mut pos = 0usize;
            // Reconstruct the (p, i, q, j) enumeration used in tensor_square.
            for p in 0..=top {
                for q in 0..=top {
                    if p + q != d {
                        continue;
                    }
                    for i in 0..self.factor.dim(p) {
                        for j in 0..self.factor.dim(q) {
                            if m & (1 << pos) != 0 {
                                m &= !(1u16 << pos);
                                let prod = self.factor.mul(
                                    &self.factor.basis_element(p, i),
                                    &self.factor.basis_element(q, j),
                                );
                                out = self.factor.add(&out, &prod);
                            }
                            pos += 1;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Computed premises for `cat(X) >= 3` and `TC(X) >= 5`: the nonvanishing
/// products and the vanishing diagonal restrictions, with rendered witnesses.
#[derive(Clone, Debug)]
pub struct LowerBoundCertificates {
    pub cup_length_witness: String,
    pub cup_cube_nonzero: bool,
    pub zero_divisor_witness: String,
    pub zero_divisor_product_nonzero: bool,
    pub diagonal_restrictions_vanish: bool,
    pub cat_lower_bound: usize,
    pub tc_lower_bound: usize,
}

/// Verifies `x*x*y != 0` in `H^*(X)` and `xbar^3 ybar^2 != 0` in the tensor
/// square with both factors restricting to zero on the diagonal.
pub fn certify_lower_bounds(pair: &RingPair) -> Result<LowerBoundCertificates, Error> {
    let f = &pair.factor;
    let x = f.element_from_labels(&["x"])?;
    let y = f.element_from_labels(&["y"])?;
    let xxy = f.mul(&f.mul(&x, &x), &y);
    let cup_cube_nonzero = !f.is_zero(&xxy);
    if !cup_cube_nonzero {
        return Err(Error::CertificateFailure("x*x*y vanished in H^*(X)".into()));
    }

    let xbar = pair.zero_divisor(&x)?;
    let ybar = pair.zero_divisor(&y)?;
    let s = &pair.square;
    let prod = s.mul(&s.pow(&xbar, 3), &s.pow(&ybar, 2));
    let zero_divisor_product_nonzero = !s.is_zero(&prod);
    if !zero_divisor_product_nonzero {
        return Err(Error::CertificateFailure("xbar^3 ybar^2 vanished in the tensor square".into()));
    }
    let diag_x = pair.diagonal_restriction(&xbar);
    let diag_y = pair.diagonal_restriction(&ybar);
    let diagonal_restrictions_vanish = f.is_zero(&diag_x) && f.is_zero(&diag_y);
    if !diagonal_restrictions_vanish {
        return Err(Error::CertificateFailure(
            "a zero divisor failed to restrict to zero on the diagonal".into(),
        ));
    }

    Ok(LowerBoundCertificates {
        cup_length_witness: f.render(&xxy),
        cup_cube_nonzero,
        zero_divisor_witness: s.render(&prod),
        zero_divisor_product_nonzero,
        diagonal_restrictions_vanish,
        cat_lower_bound: 3,
        tc_lower_bound: 5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_dims_are_1_2_2_1() {
        let a = cohomology_ring_of_x().unwrap();
        assert_eq!(a.dims(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn y_squared_rewrites_to_x2_plus_xy() {
        let a = cohomology_ring_of_x().unwrap();
        let y = a.element_from_labels(&["y"]).unwrap();
        let y2 = a.mul(&y, &y);
        assert_eq!(a.render(&y2), "x*y + x^2");
    }

    #[test]
    fn x_times_xy_is_top_class_and_x2_squared_vanishes() {
        let a = cohomology_ring_of_x().unwrap();
        let x = a.element_from_labels(&["x"]).unwrap();
        let xy = a.element_from_labels(&["x*y"]).unwrap();
        assert_eq!(a.render(&a.mul(&x, &xy)), "x^2*y");
        let x2 = a.element_from_labels(&["x^2"]).unwrap();
        assert!(a.is_zero(&a.mul(&x2, &x2)));
    }

    #[test]
    fn y_cubed_vanishes_and_xy2_equals_x2y() {
        let a = cohomology_ring_of_x().unwrap();
        let y = a.element_from_labels(&["y"]).unwrap();
        assert!(a.is_zero(&a.pow(&y, 3)));
        let x = a.element_from_labels(&["x"]).unwrap();
        let xy2 = a.mul(&x, &a.mul(&y, &y));
        assert_eq!(a.render(&xy2), "x^2*y");
    }

    #[test]
    fn rewriting_is_confluent_on_degree_at_most_6_monomials() {
        for i in 0u8..=6 {
            for j in 0u8..=6 {
                if i + j > 6 {
                    continue;
                }
                let lo = reduce_monomials(&[(i, j)], true);
                let hi = reduce_monomials(&[(i, j)], false);
                assert_eq!(lo, hi, "monomial x^{i} y^{j}");
            }
        }
    }

    #[test]
    fn tensor_square_dims_follow_kunneth() {
        let pair = RingPair::build().unwrap();
        assert_eq!(pair.square.dims(), vec![1, 4, 8, 10, 8, 4, 1]);
    }

    #[test]
    fn unit_factors_multiply_transparently() {
        let pair = RingPair::build().unwrap();
        let s = &pair.square;
        let x_1 = s.element_from_labels(&["x\u{2297}1"]).unwrap();
        let one_y = s.element_from_labels(&["1\u{2297}y"]).unwrap();
        assert_eq!(s.render(&s.mul(&x_1, &one_y)), "x\u{2297}y");
    }

    #[test]
    fn top_tensor_degree_is_spanned_by_the_product_of_top_classes() {
        let pair = RingPair::build().unwrap();
        let s = &pair.square;
        assert_eq!(s.dim(6), 1);
        let t = s.element_from_labels(&["x^2*y\u{2297}x^2*y"]).unwrap();
        assert!(!s.is_zero(&t));
    }

    #[test]
    fn zero_divisor_powers() {
        let pair = RingPair::build().unwrap();
        let f = &pair.factor;
        let s = &pair.square;
        let x = f.element_from_labels(&["x"]).unwrap();
        let xbar = pair.zero_divisor(&x).unwrap();
        assert!(f.is_zero(&pair.diagonal_restriction(&xbar)));
        let xbar2 = s.pow(&xbar, 2);
        assert_eq!(s.render(&xbar2), "1\u{2297}x^2 + x^2\u{2297}1");
        let xbar3 = s.pow(&xbar, 3);
        assert_eq!(s.render(&xbar3), "x^2\u{2297}x + x\u{2297}x^2");
        assert!(s.is_zero(&s.pow(&xbar, 4)));
    }

    #[test]
    fn lower_bound_certificates_hold() {
        let pair = RingPair::build().unwrap();
        let lb = certify_lower_bounds(&pair).unwrap();
        assert_eq!(lb.cup_length_witness, "x^2*y");
        assert_eq!(lb.zero_divisor_witness, "x^2*y\u{2297}x^2 + x^2\u{2297}x^2*y");
        assert_eq!(lb.cat_lower_bound, 3);
        assert_eq!(lb.tc_lower_bound, 5);
    }

    #[test]
    fn products_beyond_top_degree_vanish() {
        let pair = RingPair::build().unwrap();
        let f = &pair.factor;
        for d1 in 0..=3 {
            for i1 in 0..f.dim(d1) {
                for d2 in 0..=3 {
                    for i2 in 0..f.dim(d2) {
                        if d1 + d2 > 3 {
                            let p = f.mul(&f.basis_element(d1, i1), &f.basis_element(d2, i2));
                            assert!(f.is_zero(&p));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn poincare_pairing_is_perfect_on_basis() {
        let a = cohomology_ring_of_x().unwrap();
        for k in 0..=3usize {
            let dual = 3 - k;
            // Every nonzero element of degree k pairs nontrivially with some
            // basis element of the complementary degree.
            for mask in 1u16..(1 << a.dim(k)) {
                let mut e = a.zero();
                e.coords[k] = mask;
                let mut paired = false;
                for j in 0..a.dim(dual) {
                    if !a.is_zero(&a.mul(&e, &a.basis_element(dual, j))) {
                        paired = true;
                        break;
                    }
                }
                assert!(paired, "degree {k} mask {mask:#b} pairs to zero");
            }
        }
    }

    #[test]
    fn ring_dims_match_the_space_form_f2_betti_numbers() {
        let a = cohomology_ring_of_x().unwrap();
        let table = crate::space_form::homology_table(0, 2).unwrap();
        assert_eq!(a.dims(), table.f2_cohomology_dims);
    }
}
