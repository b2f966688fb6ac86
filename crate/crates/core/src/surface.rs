//! Marked-point configurations on the Riemann sphere, half-integer weights
//! and degree index sets.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KnError, Result};
use crate::exact::Point;
use crate::scalar::Scalar;

/// An element of `½ℤ`, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// The integer value, if there is one.
    pub const fn as_int(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    pub fn to_scalar<T: Scalar>(self) -> T {
        T::from_half(self.twice)
    }

    /// Largest integer not exceeding the value.
    pub const fn floor(self) -> i64 {
        self.twice.div_euclid(2)
    }

    /// Same residue class mod ℤ (both integral or both half-odd).
    pub const fn same_class(self, other: HalfInt) -> bool {
        (self.twice - other.twice) % 2 == 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = KnError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || KnError::Parse(format!("`{s}` is not an integer or half-integer"));
        let t = s.trim();
        match t.split_once('/') {
            None => t.parse::<i64>().map(HalfInt::from_int).map_err(|_| bad()),
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 || (2 * n) % d != 0 {
                    return Err(bad());
                }
                Ok(HalfInt::from_twice(2 * n / d))
            }
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The degree index set `J_λ`: `ℤ` for integral `λ`, `ℤ + ½` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeSet {
    integral: bool,
}

impl DegreeSet {
    pub fn contains(&self, n: HalfInt) -> bool {
        n.is_integer() == self.integral
    }

    /// Members of the set in the closed range `[lo, hi]`, ascending.
    pub fn range(&self, lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> + '_ {
        let mut start = lo.twice();
        if !self.contains(HalfInt::from_twice(start)) {
            start += 1;
        }
        (start..=hi.twice()).step_by(2).map(HalfInt::from_twice)
    }
}

pub fn degree_set(lambda: HalfInt) -> DegreeSet {
    DegreeSet { integral: lambda.is_integer() }
}

/// A closed degree window `[lo, hi]`. A window with `lo > hi` is empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: HalfInt,
    pub hi: HalfInt,
}

impl Window {
    pub fn new(lo: HalfInt, hi: HalfInt) -> Self {
        Window { lo, hi }
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Window { lo: HalfInt::from_int(lo), hi: HalfInt::from_int(hi) }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, n: HalfInt) -> bool {
        self.lo <= n && n <= self.hi
    }

    /// `J_λ ∩ [lo, hi]`.
    pub fn degrees(&self, lambda: HalfInt) -> Vec<HalfInt> {
        degree_set(lambda).range(self.lo, self.hi).collect()
    }

    /// All basis indices of weight `λ` in the window for `k` points, sorted by `(n, p)`.
    pub fn indices(&self, lambda: HalfInt, k: usize) -> Vec<BasisIndex> {
        self.degrees(lambda).into_iter().flat_map(|n| (1..=k).map(move |p| BasisIndex::new(n, p))).collect()
    }

    /// The window grown by `by` on both sides.
    pub fn widen(&self, by: i64) -> Window {
        let d = HalfInt::from_int(by);
        Window { lo: self.lo - d, hi: self.hi + d }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for Window {
    type Err = KnError;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) =
            s.split_once(':').ok_or_else(|| KnError::Parse(format!("window `{s}` is not of the form LO:HI")))?;
        Ok(Window { lo: lo.parse()?, hi: hi.parse()? })
    }
}

/// A basis label `(n, p)`: degree `n` and in-point number `p` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub degree: HalfInt,
    pub point: usize,
}

impl BasisIndex {
    pub fn new(degree: HalfInt, point: usize) -> Self {
        BasisIndex { degree, point }
    }
}

impl Ord for BasisIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree, self.point).cmp(&(other.degree, other.point))
    }
}

impl PartialOrd for BasisIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.degree, self.point)
    }
}

/// Genus-0 configuration: in-points `P_1..P_K` and a single out-point `Q`.
///
/// When `Q` is finite, all computations run in the coordinate
/// `w = 1/(z - Q)` which sends `Q` to infinity; `working_points` holds the
/// images of the in-points. Every function the library emits is expressed
/// in this working coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceConfig<T> {
    genus: u32,
    in_points: Vec<T>,
    out_point: Point<T>,
    working: Vec<Point<T>>,
}

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    in_points: Vec<String>,
    out_point: String,
}

impl<T: Scalar> SurfaceConfig<T> {
    pub fn new(in_points: Vec<T>, out_point: Point<T>) -> Result<Self> {
        Self::with_genus(0, in_points, out_point)
    }

    pub fn with_genus(genus: u32, in_points: Vec<T>, out_point: Point<T>) -> Result<Self> {
        if genus != 0 {
            return Err(KnError::Config(format!("genus {genus} is not supported, only genus 0")));
        }
        if in_points.is_empty() {
            return Err(KnError::Config("at least one in-point is required".into()));
        }
        for (i, a) in in_points.iter().enumerate() {
            if in_points[..i].contains(a) {
                return Err(KnError::Config(format!("in-point {a} is repeated")));
            }
            if out_point == Point::Finite(a.clone()) {
                return Err(KnError::Config(format!("out-point {a} coincides with an in-point")));
            }
        }
        let working = in_points
            .iter()
            .map(|p| match &out_point {
                Point::Infinity => Point::Finite(p.clone()),
                Point::Finite(q) => Point::Finite(T::one().div_ref(&p.sub_ref(q))),
            })
            .collect();
        Ok(SurfaceConfig { genus, in_points, out_point, working })
    }

    /// The two-point configuration `I = {0}`, `O = {∞}`.
    pub fn classical() -> Self {
        Self::new(vec![T::zero()], Point::Infinity).expect("valid configuration")
    }

    /// In-points `0, 1, ..., k-1` with out-point at infinity.
    pub fn consecutive(k: usize) -> Self {
        let pts = (0..k as i64).map(T::from_int).collect();
        Self::new(pts, Point::Infinity).expect("valid configuration")
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// `K = #I`.
    pub fn k(&self) -> usize {
        self.in_points.len()
    }

    pub fn in_points(&self) -> &[T] {
        &self.in_points
    }

    pub fn out_point(&self) -> &Point<T> {
        &self.out_point
    }

    /// The in-points in the working coordinate (out-point at infinity).
    pub fn working_points(&self) -> &[Point<T>] {
        &self.working
    }

    /// Working coordinate of `P_p` (1-based).
    pub fn working_point(&self, p: usize) -> Result<&T> {
        match p.checked_sub(1).and_then(|i| self.working.get(i)) {
            Some(Point::Finite(x)) => Ok(x),
            _ => Err(KnError::PointIndex(p)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| KnError::Config(e.to_string()))?;
        let in_points = doc
            .in_points
            .iter()
            .map(|s| T::parse_rational(s).ok_or_else(|| KnError::Config(format!("bad in-point `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        let out_point = Point::parse(&doc.out_point)
            .ok_or_else(|| KnError::Config(format!("bad out-point `{}`", doc.out_point)))?;
        Self::new(in_points, out_point)
    }

    pub fn to_json(&self) -> String {
        let doc = ConfigDoc {
            in_points: self.in_points.iter().map(|p| p.to_string()).collect(),
            out_point: self.out_point.to_string(),
        };
        serde_json::to_string(&doc).expect("plain strings serialize")
    }
}

/// Orders of `f^λ_{n,p}` at `P_1..P_K` and at `Q`.
pub fn prescribed_orders<T: Scalar>(
    cfg: &SurfaceConfig<T>,
    lambda: HalfInt,
    idx: BasisIndex,
) -> Result<(Vec<i64>, i64)> {
    let k = cfg.k();
    if !degree_set(lambda).contains(idx.degree) {
        return Err(KnError::DegreeMismatch { weight: lambda.to_string(), degree: idx.degree.to_string() });
    }
    if idx.point == 0 || idx.point > k {
        return Err(KnError::PointIndex(idx.point));
    }
    let base = (idx.degree + HalfInt::ONE - lambda).as_int().expect("degree and weight lie in the same class");
    let orders = (1..=k).map(|i| base - i64::from(i == idx.point)).collect();
    let g = i64::from(cfg.genus());
    let two_lambda = lambda.twice();
    let out = -(k as i64) * base + (two_lambda - 1) * (g - 1);
    Ok((orders, out))
}
