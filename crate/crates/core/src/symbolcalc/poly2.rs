use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Polynomial in `(x, xi)`: `sum c_{ij} x^i xi^j`, stored sparsely.
///
/// Arithmetic is over `f64`; it is exact whenever all intermediate
/// coefficients are integers below 2^53, which covers every symbol used here.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(u32, u32, f64)>", into = "Vec<(u32, u32, f64)>")]
pub struct Poly2 {
    coeffs: BTreeMap<(u32, u32), f64>,
}

impl From<Vec<(u32, u32, f64)>> for Poly2 {
    fn from(terms: Vec<(u32, u32, f64)>) -> Self {
        Poly2::from_terms(terms)
    }
}

impl From<Poly2> for Vec<(u32, u32, f64)> {
    fn from(p: Poly2) -> Self {
        p.terms().collect()
    }
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly2::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Poly2::monomial(1.0, 1, 0)
    }

    pub fn xi() -> Self {
        Poly2::monomial(1.0, 0, 1)
    }

    /// `c x^i xi^j`.
    pub fn monomial(c: f64, i: u32, j: u32) -> Self {
        Poly2::from_terms([(i, j, c)])
    }

    /// Sums `(i, j, c)` terms; repeated exponents accumulate.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, f64)>>(terms: I) -> Self {
        let mut p = Poly2::zero();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Embeds a polynomial in `x` alone.
    pub fn from_poly1_x(p: &crate::func::Poly1) -> Self {
        Poly2::from_terms(p.coeffs().iter().enumerate().map(|(i, &c)| (i as u32, 0, c)))
    }

    fn add_term(&mut self, i: u32, j: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.coeffs.entry((i, j)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// True when every coefficient is an integer (the exactness contract).
    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.values().all(|c| c.fract() == 0.0 && c.abs() < 9.0e15)
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c * x.powi(i as i32) * xi.powi(j as i32))
            .sum()
    }

    /// Value at the origin.
    pub fn at_origin(&self) -> f64 {
        self.coeff(0, 0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Poly2::from_terms(self.terms().map(|(i, j, c)| (i, j, c * s)))
    }

    pub fn d_x(&self) -> Self {
        Poly2::from_terms(
            self.terms()
                .filter(|&(i, _, _)| i > 0)
                .map(|(i, j, c)| (i - 1, j, c * i as f64)),
        )
    }

    pub fn d_xi(&self) -> Self {
        Poly2::from_terms(
            self.terms()
                .filter(|&(_, j, _)| j > 0)
                .map(|(i, j, c)| (i, j - 1, c * j as f64)),
        )
    }

    /// `(d_x p, d_xi p)` at the origin.
    pub fn gradient_at_origin(&self) -> [f64; 2] {
        [self.coeff(1, 0), self.coeff(0, 1)]
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly2::constant(1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `p(X(x, xi), Xi(x, xi))`.
    pub fn substitute(&self, big_x: &Poly2, big_xi: &Poly2) -> Self {
        let max_i = self.coeffs.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.coeffs.keys().map(|k| k.1).max().unwrap_or(0);
        let mut xp = vec![Poly2::constant(1.0)];
        for k in 0..max_i as usize {
            let next = &xp[k] * big_x;
            xp.push(next);
        }
        let mut xip = vec![Poly2::constant(1.0)];
        for k in 0..max_j as usize {
            let next = &xip[k] * big_xi;
            xip.push(next);
        }
        let mut out = Poly2::zero();
        for (i, j, c) in self.terms() {
            let term = (&xp[i as usize] * &xip[j as usize]).scale(c);
            out = &out + &term;
        }
        out
    }

    /// `p(x + x0, xi + xi0)`: moves the point `(x0, xi0)` to the origin.
    pub fn shift(&self, x0: f64, xi0: f64) -> Self {
        let bx = Poly2::from_terms([(1, 0, 1.0), (0, 0, x0)]);
        let bxi = Poly2::from_terms([(0, 1, 1.0), (0, 0, xi0)]);
        self.substitute(&bx, &bxi)
    }

    /// `p(a x + b xi, c x + d xi)` for the matrix `[[a, b], [c, d]]`.
    pub fn compose_linear(&self, m: [[f64; 2]; 2]) -> Self {
        let bx = Poly2::from_terms([(1, 0, m[0][0]), (0, 1, m[0][1])]);
        let bxi = Poly2::from_terms([(1, 0, m[1][0]), (0, 1, m[1][1])]);
        self.substitute(&bx, &bxi)
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, c);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in rhs.terms() {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $f(self, rhs: Poly2) -> Poly2 {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (i, j, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            match i {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*xi")?,
                _ => write!(f, "*xi^{j}")?,
            }
        }
        Ok(())
    }
}
