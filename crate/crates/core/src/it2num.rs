//! Trapezoidal interval type-2 fuzzy numbers.
//!
//! A number is a pair of trapezoids (upper and lower membership functions),
//! each carrying four abscissae and two height marks. Arithmetic is
//! componentwise on the abscissae with heights combined by `min`, and
//! defuzzification uses the expected value: the mean of the eight abscissae
//! times the mean of the four heights.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance used when comparing expected values.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("height {value} is outside (0, 1]")]
    InvalidHeight { value: f64 },
    #[error("non-finite value {value} in fuzzy number")]
    InvalidNumber { value: f64 },
    #[error("division by zero while scaling by 1/k")]
    DivisionByZero,
    #[error("{0} trapezoid abscissae are not ordered a1 <= a2 <= a3 <= a4")]
    Unordered(Side),
}

/// Which of the two trapezoids of an IT2 number a message refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Upper => f.write_str("upper"),
            Side::Lower => f.write_str("lower"),
        }
    }
}

/// A trapezoidal membership function `(a1, a2, a3, a4; h1, h2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trapezoid {
    pub a: [f64; 4],
    pub h: [f64; 2],
}

impl Trapezoid {
    pub fn new(a: [f64; 4], h: [f64; 2]) -> Result<Self, FuzzyError> {
        let t = Trapezoid { a, h };
        t.check()?;
        Ok(t)
    }

    /// Crisp point `(v, v, v, v; 1, 1)`.
    pub fn point(v: f64) -> Self {
        Trapezoid { a: [v; 4], h: [1.0; 2] }
    }

    fn check(&self) -> Result<(), FuzzyError> {
        for &v in self.a.iter().chain(self.h.iter()) {
            if !v.is_finite() {
                return Err(FuzzyError::InvalidNumber { value: v });
            }
        }
        for &h in &self.h {
            if h <= 0.0 || h > 1.0 {
                return Err(FuzzyError::InvalidHeight { value: h });
            }
        }
        Ok(())
    }

    pub fn is_ordered(&self) -> bool {
        self.a.windows(2).all(|w| w[0] <= w[1])
    }

    fn zip_with(&self, other: &Trapezoid, op: impl Fn(f64, f64) -> f64) -> Trapezoid {
        Trapezoid {
            a: std::array::from_fn(|i| op(self.a[i], other.a[i])),
            h: [self.h[0].min(other.h[0]), self.h[1].min(other.h[1])],
        }
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Trapezoid {
        Trapezoid {
            a: self.a.map(op),
            h: self.h,
        }
    }

    fn to_record(self) -> [f64; 6] {
        [self.a[0], self.a[1], self.a[2], self.a[3], self.h[0], self.h[1]]
    }
}

/// Trapezoidal interval type-2 fuzzy number.
///
/// Footprint containment (lower inside upper) is deliberately not checked:
/// published data sets place the lower trapezoid outside the upper one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct It2Number {
    upper: Trapezoid,
    lower: Trapezoid,
}

impl It2Number {
    /// Builds a number, rejecting bad heights or non-finite fields.
    /// Abscissa ordering is not enforced; see [`It2Number::ordering_issues`].
    pub fn new(upper: Trapezoid, lower: Trapezoid) -> Result<Self, FuzzyError> {
        upper.check()?;
        lower.check()?;
        Ok(It2Number { upper, lower })
    }

    /// Like [`It2Number::new`] but also rejects unordered abscissae.
    pub fn new_strict(upper: Trapezoid, lower: Trapezoid) -> Result<Self, FuzzyError> {
        let n = Self::new(upper, lower)?;
        match n.ordering_issues().first() {
            Some(&side) => Err(FuzzyError::Unordered(side)),
            None => Ok(n),
        }
    }

    /// Shorthand taking `(a1, a2, a3, a4, h1, h2)` records.
    pub fn from_records(upper: [f64; 6], lower: [f64; 6]) -> Result<Self, FuzzyError> {
        let t = |r: [f64; 6]| Trapezoid {
            a: [r[0], r[1], r[2], r[3]],
            h: [r[4], r[5]],
        };
        Self::new(t(upper), t(lower))
    }

    pub fn crisp(v: f64) -> Self {
        It2Number {
            upper: Trapezoid::point(v),
            lower: Trapezoid::point(v),
        }
    }

    pub fn zero() -> Self {
        Self::crisp(0.0)
    }

    pub fn upper(&self) -> &Trapezoid {
        &self.upper
    }

    pub fn lower(&self) -> &Trapezoid {
        &self.lower
    }

    /// Trapezoids whose abscissae are out of order.
    pub fn ordering_issues(&self) -> Vec<Side> {
        let mut out = Vec::new();
        if !self.upper.is_ordered() {
            out.push(Side::Upper);
        }
        if !self.lower.is_ordered() {
            out.push(Side::Lower);
        }
        out
    }

    /// Multiplies every abscissa by `k`; heights are kept.
    pub fn scale(&self, k: f64) -> Result<Self, FuzzyError> {
        if !k.is_finite() {
            return Err(FuzzyError::InvalidNumber { value: k });
        }
        Ok(It2Number {
            upper: self.upper.map(|v| k * v),
            lower: self.lower.map(|v| k * v),
        })
    }

    /// Divides every abscissa by `k`.
    pub fn scale_recip(&self, k: f64) -> Result<Self, FuzzyError> {
        if k == 0.0 {
            return Err(FuzzyError::DivisionByZero);
        }
        if !k.is_finite() {
            return Err(FuzzyError::InvalidNumber { value: k });
        }
        Ok(It2Number {
            upper: self.upper.map(|v| v / k),
            lower: self.lower.map(|v| v / k),
        })
    }

    /// Expected value: mean of the eight abscissae times mean of the four heights.
    pub fn expected_value(&self) -> f64 {
        let abscissae: f64 = self.lower.a.iter().zip(&self.upper.a).map(|(l, u)| l + u).sum();
        let heights = self.lower.h[0] + self.lower.h[1] + self.upper.h[0] + self.upper.h[1];
        abscissae / 8.0 * (heights / 4.0)
    }

    /// Orders two numbers by expected value; differences within
    /// [`RANK_TOLERANCE`] compare equal.
    pub fn rank(&self, other: &It2Number) -> Ordering {
        let d = self.expected_value() - other.expected_value();
        if d > RANK_TOLERANCE {
            Ordering::Greater
        } else if d < -RANK_TOLERANCE {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// The ordinary trapezoid this number collapses to, if upper and lower
    /// coincide and all four heights are equal.
    pub fn reduce_to_type1(&self) -> Option<Trapezoid> {
        let h = self.upper.h[0];
        let same_heights = self.upper.h[1] == h && self.lower.h.iter().all(|&x| x == h);
        (self.upper.a == self.lower.a && same_heights).then_some(self.upper)
    }
}

impl Add for It2Number {
    type Output = It2Number;

    fn add(self, rhs: It2Number) -> It2Number {
        It2Number {
            upper: self.upper.zip_with(&rhs.upper, |x, y| x + y),
            lower: self.lower.zip_with(&rhs.lower, |x, y| x + y),
        }
    }
}

// Index-wise: the i-th abscissa of the result is a_i - b_i.
impl Sub for It2Number {
    type Output = It2Number;

    fn sub(self, rhs: It2Number) -> It2Number {
        It2Number {
            upper: self.upper.zip_with(&rhs.upper, |x, y| x - y),
            lower: self.lower.zip_with(&rhs.lower, |x, y| x - y),
        }
    }
}

impl Mul for It2Number {
    type Output = It2Number;

    fn mul(self, rhs: It2Number) -> It2Number {
        It2Number {
            upper: self.upper.zip_with(&rhs.upper, |x, y| x * y),
            lower: self.lower.zip_with(&rhs.lower, |x, y| x * y),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    upper: [f64; 6],
    lower: [f64; 6],
}

impl Serialize for It2Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Record {
            upper: self.upper.to_record(),
            lower: self.lower.to_record(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for It2Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Record::deserialize(d)?;
        It2Number::from_records(r.upper, r.lower).map_err(D::Error::custom)
    }
}

impl fmt::Display for It2Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |t: &Trapezoid| {
            format!(
                "({}, {}, {}, {}; {}, {})",
                t.a[0], t.a[1], t.a[2], t.a[3], t.h[0], t.h[1]
            )
        };
        write!(f, "({}, {})", t(&self.upper), t(&self.lower))
    }
}
