//! Piecewise-linear convex functions with integral breakpoints.
//!
//! A [`Plc`] is finite on an integer interval `[lo, hi]` and `+inf` outside
//! it. It is stored as the value at `lo` plus one slope per unit segment, so
//! convexity is just sortedness of the slope list and infimal convolution is
//! a merge of sorted slope lists.
//!
//! Operations that can produce the identically `+inf` function return
//! `Option<Plc>`; `None` plays the role of the infeasible function.

use alloc::vec::Vec;
use core::fmt;

/// Slack allowed when checking that slopes are non-decreasing. Violations up
/// to this size are clamped away, larger ones are errors. Absolute for
/// [`Plc::new`]; relative to the slope magnitudes in [`Plc::subtract_within`].
pub const CONVEXITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum PlcError {
    /// Finite samples do not form one contiguous run.
    NonContiguous { index: usize },
    /// Slopes decrease somewhere by more than [`CONVEXITY_TOL`].
    NotConvex { segment: usize, left: f64, right: f64 },
    /// A value or slope is NaN or infinite where a finite number is required.
    NonFinite,
    /// No finite sample at all.
    Empty,
}

impl fmt::Display for PlcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlcError::NonContiguous { index } => {
                write!(f, "finite samples are not contiguous (gap before index {index})")
            }
            PlcError::NotConvex { segment, left, right } => write!(
                f,
                "slopes decrease at segment {segment}: {left} followed by {right}"
            ),
            PlcError::NonFinite => f.write_str("non-finite value or slope"),
            PlcError::Empty => f.write_str("function has no finite sample"),
        }
    }
}

impl core::error::Error for PlcError {}

/// A convex piecewise-linear function with integral breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Plc {
    lo: i64,
    value_at_lo: f64,
    slopes: Vec<f64>,
}

impl Plc {
    /// Builds a function from its left end, value there and unit-segment
    /// slopes. Slopes are checked for convexity and tiny violations clamped.
    pub fn new(lo: i64, value_at_lo: f64, mut slopes: Vec<f64>) -> Result<Self, PlcError> {
        if !value_at_lo.is_finite() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(PlcError::NonFinite);
        }
        enforce_convexity(&mut slopes, CONVEXITY_TOL)?;
        Ok(Plc {
            lo,
            value_at_lo,
            slopes,
        })
    }

    /// Internal constructor for slope lists that are sorted by construction.
    pub(crate) fn from_sorted(lo: i64, value_at_lo: f64, slopes: Vec<f64>) -> Self {
        debug_assert!(slopes.windows(2).all(|w| w[0] <= w[1]));
        Plc {
            lo,
            value_at_lo,
            slopes,
        }
    }

    /// The function that is `value` at `at` and `+inf` elsewhere.
    pub fn point(at: i64, value: f64) -> Self {
        Plc {
            lo: at,
            value_at_lo: value,
            slopes: Vec::new(),
        }
    }

    /// `value_at_lo + slope * (z - lo)` on `[lo, hi]`.
    pub fn linear(lo: i64, hi: i64, value_at_lo: f64, slope: f64) -> Self {
        assert!(hi >= lo, "empty domain [{lo}, {hi}]");
        Plc {
            lo,
            value_at_lo,
            slopes: alloc::vec![slope; (hi - lo) as usize],
        }
    }

    pub fn zero(lo: i64, hi: i64) -> Self {
        Self::linear(lo, hi, 0.0, 0.0)
    }

    /// Interpolates values given at the integers `0..values.len()`.
    /// Infinite entries are outside the domain; the finite ones must be
    /// contiguous and have non-decreasing chord slopes.
    pub fn from_integer_samples(values: &[f64]) -> Result<Self, PlcError> {
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(PlcError::NonFinite);
        }
        let first = values.iter().position(|v| v.is_finite()).ok_or(PlcError::Empty)?;
        let last = values.iter().rposition(|v| v.is_finite()).unwrap();
        if let Some(gap) = values[first..=last].iter().position(|v| !v.is_finite()) {
            return Err(PlcError::NonContiguous { index: first + gap });
        }
        let slopes = values[first..=last].windows(2).map(|w| w[1] - w[0]).collect();
        Plc::new(first as i64, values[first], slopes)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.slopes.len() as i64
    }

    pub fn value_at_lo(&self) -> f64 {
        self.value_at_lo
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn contains(&self, z: i64) -> bool {
        self.lo <= z && z <= self.hi()
    }

    /// Value at an integer point; `+inf` outside the domain.
    pub fn value_at(&self, z: i64) -> f64 {
        if !self.contains(z) {
            return f64::INFINITY;
        }
        let k = (z - self.lo) as usize;
        self.value_at_lo + self.slopes[..k].iter().sum::<f64>()
    }

    /// Value at a real point, interpolating linearly between breakpoints.
    pub fn evaluate(&self, z: f64) -> f64 {
        if z.is_nan() || z < self.lo as f64 || z > self.hi() as f64 {
            return f64::INFINITY;
        }
        let offset = z - self.lo as f64;
        let whole = libm::floor(offset) as usize;
        let base = self.value_at_lo + self.slopes[..whole].iter().sum::<f64>();
        if whole == self.slopes.len() {
            base
        } else {
            base + self.slopes[whole] * (offset - whole as f64)
        }
    }

    /// Values at every integer of the domain, `lo..=hi`.
    pub fn samples(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slopes.len() + 1);
        let mut v = self.value_at_lo;
        out.push(v);
        for s in &self.slopes {
            v += s;
            out.push(v);
        }
        out
    }

    /// Slope of the segment to the right of the integer point `z`.
    pub fn right_slope(&self, z: i64) -> Option<f64> {
        if z < self.lo || z >= self.hi() {
            return None;
        }
        Some(self.slopes[(z - self.lo) as usize])
    }

    /// Slope of the segment to the left of the integer point `z`.
    pub fn left_slope(&self, z: i64) -> Option<f64> {
        if z <= self.lo || z > self.hi() {
            return None;
        }
        Some(self.slopes[(z - self.lo - 1) as usize])
    }

    /// Pointwise sum on the intersected domain.
    pub fn add(&self, other: &Plc) -> Option<Plc> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        if lo > hi {
            return None;
        }
        let a = (lo - self.lo) as usize;
        let b = (lo - other.lo) as usize;
        let len = (hi - lo) as usize;
        let slopes = self.slopes[a..a + len]
            .iter()
            .zip(&other.slopes[b..b + len])
            .map(|(x, y)| x + y)
            .collect();
        // Rounding is monotone, so sums of sorted lists stay sorted.
        Some(Plc::from_sorted(
            lo,
            self.value_at(lo) + other.value_at(lo),
            slopes,
        ))
    }

    /// `self - other` on `self`'s domain, which must lie inside `other`'s.
    /// The difference of two convex functions need not be convex, so the
    /// result is validated. Cancellation leaves errors proportional to the
    /// operands' slopes, so the tolerance scales with them.
    pub fn subtract_within(&self, other: &Plc) -> Result<Plc, PlcError> {
        assert!(
            other.lo <= self.lo && self.hi() <= other.hi(),
            "subtrahend domain must cover the minuend domain"
        );
        let off = (self.lo - other.lo) as usize;
        let mut scale: f64 = 1.0;
        let mut slopes: Vec<f64> = self
            .slopes
            .iter()
            .zip(&other.slopes[off..])
            .map(|(x, y)| {
                scale = scale.max(x.abs()).max(y.abs());
                x - y
            })
            .collect();
        let value_at_lo = self.value_at_lo - other.value_at(self.lo);
        if !value_at_lo.is_finite() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(PlcError::NonFinite);
        }
        enforce_convexity(&mut slopes, CONVEXITY_TOL * scale)?;
        Ok(Plc {
            lo: self.lo,
            value_at_lo,
            slopes,
        })
    }

    /// `z -> self(-z)`.
    pub fn negate_argument(&self) -> Plc {
        let value_at_hi = self.value_at_lo + self.slopes.iter().sum::<f64>();
        Plc {
            lo: -self.hi(),
            value_at_lo: value_at_hi,
            slopes: self.slopes.iter().rev().map(|s| -s).collect(),
        }
    }

    /// `z -> self(z - d)`.
    pub fn shift_argument(&self, d: i64) -> Plc {
        Plc {
            lo: self.lo + d,
            value_at_lo: self.value_at_lo,
            slopes: self.slopes.clone(),
        }
    }

    /// `z -> c * self(z)` for `c >= 0`.
    pub fn scale(&self, c: f64) -> Plc {
        assert!(c >= 0.0 && c.is_finite(), "scale factor must be finite and non-negative");
        Plc {
            lo: self.lo,
            value_at_lo: c * self.value_at_lo,
            slopes: self.slopes.iter().map(|s| c * s).collect(),
        }
    }

    /// Restriction to `[a, b]`, `+inf` outside.
    pub fn restrict(&self, a: i64, b: i64) -> Option<Plc> {
        assert!(a <= b, "restrict window [{a}, {b}] is empty");
        let lo = self.lo.max(a);
        let hi = self.hi().min(b);
        if lo > hi {
            return None;
        }
        let start = (lo - self.lo) as usize;
        let end = (hi - self.lo) as usize;
        Some(Plc {
            lo,
            value_at_lo: self.value_at(lo),
            slopes: self.slopes[start..end].to_vec(),
        })
    }

    /// Smallest integer minimizer and the minimum value.
    pub fn argmin(&self) -> (i64, f64) {
        let mut value = self.value_at_lo;
        for (k, s) in self.slopes.iter().enumerate() {
            if *s >= 0.0 {
                return (self.lo + k as i64, value);
            }
            value += s;
        }
        (self.hi(), value)
    }

    /// Whether the slopes are non-decreasing.
    pub fn is_convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }
}

fn enforce_convexity(slopes: &mut [f64], tol: f64) -> Result<(), PlcError> {
    for k in 1..slopes.len() {
        let (left, right) = (slopes[k - 1], slopes[k]);
        if right < left {
            if left - right > tol {
                return Err(PlcError::NotConvex {
                    segment: k,
                    left,
                    right,
                });
            }
            slopes[k] = left;
        }
    }
    Ok(())
}

/// Merges sorted slope lists into `(slope, list_index)` pairs in ascending
/// slope order, ties kept in list order.
pub(crate) fn merge_slopes(lists: &[&[f64]]) -> Vec<(f64, usize)> {
    let mut items = Vec::with_capacity(lists.iter().map(|l| l.len()).sum());
    let mut bounds = Vec::with_capacity(lists.len() + 1);
    bounds.push(0);
    for (i, l) in lists.iter().enumerate() {
        items.extend(l.iter().map(|&s| (s, i)));
        bounds.push(items.len());
    }
    merge_runs(items, bounds, |x| x.0)
}

/// Bottom-up pairwise merge of the sorted runs `items[bounds[j]..bounds[j + 1]]`.
fn merge_runs<T: Copy, K: Fn(&T) -> f64>(mut items: Vec<T>, mut bounds: Vec<usize>, key: K) -> Vec<T> {
    let mut buf = items.clone();
    while bounds.len() > 2 {
        let mut next = Vec::with_capacity(bounds.len() / 2 + 2);
        next.push(0);
        for w in bounds[1..].chunks(2) {
            let start = *next.last().unwrap();
            match *w {
                [mid, end] => {
                    let (mut i, mut j, mut k) = (start, mid, start);
                    while i < mid && j < end {
                        if key(&items[j]) < key(&items[i]) {
                            buf[k] = items[j];
                            j += 1;
                        } else {
                            buf[k] = items[i];
                            i += 1;
                        }
                        k += 1;
                    }
                    buf[k..k + mid - i].copy_from_slice(&items[i..mid]);
                    k += mid - i;
                    buf[k..end].copy_from_slice(&items[j..end]);
                    next.push(end);
                }
                [end] => {
                    buf[start..end].copy_from_slice(&items[start..end]);
                    next.push(end);
                }
                _ => unreachable!(),
            }
        }
        core::mem::swap(&mut items, &mut buf);
        bounds = next;
    }
    items
}

/// Infimal convolution `min { sum f_j(z_j) : sum z_j = z }`.
///
/// The result starts at `sum lo_j` with value `sum f_j(lo_j)`, and its
/// slopes are the sorted union of all input slopes. An empty input gives the
/// indicator of `{0}`, the neutral element.
pub fn inf_convolve<'a, I>(fs: I) -> Plc
where
    I: IntoIterator<Item = &'a Plc>,
{
    let fs: Vec<&Plc> = fs.into_iter().collect();
    match fs.len() {
        0 => return Plc::point(0, 0.0),
        1 => return fs[0].clone(),
        _ => {}
    }
    let lo = fs.iter().map(|f| f.lo).sum();
    let value_at_lo = fs.iter().map(|f| f.value_at_lo).sum();
    let mut bounds = Vec::with_capacity(fs.len() + 1);
    bounds.push(0);
    let mut slopes = Vec::with_capacity(fs.iter().map(|f| f.slopes.len()).sum());
    for f in &fs {
        slopes.extend_from_slice(&f.slopes);
        bounds.push(slopes.len());
    }
    let slopes = merge_runs(slopes, bounds, |s| *s);
    Plc::from_sorted(lo, value_at_lo, slopes)
}

/// Exhaustive min-plus convolution over integer splits.
///
/// Returns the left end of the result domain and the values at every
/// integer of it. Quadratic per pairwise step; a reference for
/// [`inf_convolve`], not meant for production paths.
pub fn min_plus_grid(fs: &[Plc]) -> (i64, Vec<f64>) {
    let mut lo = 0i64;
    let mut acc = alloc::vec![0.0f64];
    for f in fs {
        let g = f.samples();
        let mut next = alloc::vec![f64::INFINITY; acc.len() + g.len() - 1];
        for (a, va) in acc.iter().enumerate() {
            for (b, vb) in g.iter().enumerate() {
                let v = va + vb;
                if v < next[a + b] {
                    next[a + b] = v;
                }
            }
        }
        lo += f.lo;
        acc = next;
    }
    (lo, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn samples_of_square_give_odd_slopes() {
        let f = Plc::from_integer_samples(&[0.0, 1.0, 4.0, 9.0]).unwrap();
        assert_eq!((f.lo(), f.hi()), (0, 3));
        assert_eq!(f.slopes(), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn samples_of_identity_are_linear() {
        let f = Plc::from_integer_samples(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.slopes(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn samples_of_power_one_and_a_half() {
        let values: Vec<f64> = (0..4).map(|y| libm::pow(y as f64, 1.5)).collect();
        let f = Plc::from_integer_samples(&values).unwrap();
        // chord differences of y^1.5: 1, 2^1.5 - 1, 3^1.5 - 2^1.5
        let expected = [1.0, 1.828_427_124_746_19, 2.367_725_297_960_442];
        for (s, e) in f.slopes().iter().zip(expected) {
            assert!((s - e).abs() < 1e-12, "{s} vs {e}");
        }
        for (k, v) in values.iter().enumerate() {
            assert!(close(f.value_at(k as i64), *v));
        }
    }

    #[test]
    fn sample_errors() {
        let inf = f64::INFINITY;
        assert_eq!(
            Plc::from_integer_samples(&[0.0, inf, 1.0]),
            Err(PlcError::NonContiguous { index: 1 })
        );
        assert!(matches!(
            Plc::from_integer_samples(&[0.0, 2.0, 3.0]),
            Err(PlcError::NotConvex { segment: 1, .. })
        ));
        assert_eq!(Plc::from_integer_samples(&[inf, inf]), Err(PlcError::Empty));
        let f = Plc::from_integer_samples(&[inf, 3.0, 3.5, 4.0, inf]).unwrap();
        assert_eq!((f.lo(), f.hi()), (1, 3));
    }

    #[test]
    fn tiny_concavity_is_clamped() {
        let f = Plc::new(0, 0.0, vec![1.0, 1.0 - 1e-14]).unwrap();
        assert_eq!(f.slopes(), &[1.0, 1.0]);
    }

    #[test]
    fn evaluate_interpolates() {
        let f = Plc::new(0, 0.0, vec![1.0, 3.0, 5.0]).unwrap();
        assert_eq!(f.evaluate(2.0), 4.0);
        assert_eq!(f.evaluate(1.5), 2.5);
        assert_eq!(f.evaluate(3.0), 9.0);
        assert_eq!(f.evaluate(4.0), f64::INFINITY);
        assert_eq!(f.evaluate(-0.5), f64::INFINITY);
    }

    #[test]
    fn add_intersects_domains() {
        let f = Plc::linear(0, 2, 0.0, 2.0);
        let g = Plc::linear(0, 1, 0.0, 3.0);
        assert_eq!(f.add(&g).unwrap(), Plc::linear(0, 1, 0.0, 5.0));
        assert_eq!(f.add(&Plc::zero(0, 2)).unwrap(), f);
        assert!(Plc::zero(0, 1).add(&Plc::zero(3, 4)).is_none());
    }

    #[test]
    fn negate_reflects() {
        let f = Plc::new(0, 0.0, vec![1.0, 3.0]).unwrap();
        let g = f.negate_argument();
        assert_eq!((g.lo(), g.hi()), (-2, 0));
        assert_eq!(g.slopes(), &[-3.0, -1.0]);
        assert_eq!(g.value_at_lo(), 4.0);
        assert_eq!(g.negate_argument(), f);
        let lin = Plc::linear(0, 1, 0.0, 1.0).negate_argument();
        assert_eq!(lin, Plc::new(-1, 1.0, vec![-1.0]).unwrap());
    }

    #[test]
    fn shift_moves_domain() {
        let f = Plc::new(0, 2.0, vec![1.0, 3.0, 5.0]).unwrap();
        let g = f.shift_argument(1);
        assert_eq!((g.lo(), g.hi()), (1, 4));
        assert_eq!(g.value_at(1), f.value_at(0));
        assert_eq!(f.shift_argument(0), f);
    }

    #[test]
    fn convolve_consumes_cheaper_slope_first() {
        let f = Plc::linear(0, 1, 0.0, 2.0);
        let g = Plc::linear(0, 1, 0.0, 3.0);
        let h = inf_convolve([&f, &g]);
        assert_eq!(h, Plc::new(0, 0.0, vec![2.0, 3.0]).unwrap());
        assert_eq!(inf_convolve([&f]), f);
        assert_eq!(inf_convolve(core::iter::empty()), Plc::point(0, 0.0));
    }

    #[test]
    fn convolve_merges_slopes_and_matches_grid() {
        let f = Plc::new(0, 0.0, vec![1.0, 4.0]).unwrap();
        let g = Plc::new(0, 0.0, vec![2.0, 3.0]).unwrap();
        let h = inf_convolve([&f, &g]);
        assert_eq!(h.slopes(), &[1.0, 2.0, 3.0, 4.0]);
        // Exhaustive splits: z=1 -> 1, z=2 -> 1+2, z=3 -> 1+2+3, z=4 -> 5+5.
        let (lo, grid) = min_plus_grid(&[f, g]);
        assert_eq!(lo, 0);
        assert_eq!(grid, vec![0.0, 1.0, 3.0, 6.0, 10.0]);
        assert_eq!(h.samples(), grid);
    }

    #[test]
    fn grid_of_single_and_shifted_inputs() {
        let f = Plc::new(0, 1.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(min_plus_grid(core::slice::from_ref(&f)), (0, f.samples()));
        let a = Plc::point(3, 1.0);
        let b = Plc::new(5, 0.0, vec![2.0]).unwrap();
        let (lo, grid) = min_plus_grid(&[a, b]);
        assert_eq!(lo, 8);
        assert_eq!(grid, vec![1.0, 3.0]);
    }

    #[test]
    fn argmin_cases() {
        let f = Plc::new(0, 2.0, vec![-2.0, 1.0]).unwrap();
        assert_eq!(f.argmin(), (1, 0.0));
        let g = Plc::new(4, 7.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(g.argmin(), (4, 7.0));
        let flat = Plc::new(0, 1.0, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(flat.argmin(), (1, 0.0));
        let falling = Plc::new(0, 0.0, vec![-1.0, -1.0]).unwrap();
        assert_eq!(falling.argmin(), (2, -2.0));
    }

    #[test]
    fn restrict_windows() {
        let f = Plc::new(0, 0.0, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let r = f.restrict(0, 3).unwrap();
        assert_eq!(r.slopes(), &[1.0, 2.0, 3.0]);
        assert_eq!(f.restrict(-10, 10).unwrap(), f);
        let mid = f.restrict(2, 4).unwrap();
        assert_eq!(mid.value_at_lo(), 3.0);
        assert!(Plc::zero(0, 1).restrict(2, 3).is_none());
    }

    #[test]
    fn one_sided_slopes() {
        let f = Plc::new(0, 0.0, vec![1.0, 3.0]).unwrap();
        assert_eq!(f.right_slope(0), Some(1.0));
        assert_eq!(f.left_slope(0), None);
        assert_eq!(f.left_slope(2), Some(3.0));
        assert_eq!(f.right_slope(2), None);
    }

    #[test]
    fn subtract_within_undoes_add() {
        let g = Plc::linear(0, 3, 0.0, 1.5);
        let f = Plc::new(0, 1.0, vec![-1.0, 0.5, 2.0]).unwrap();
        let sum = f.add(&g).unwrap();
        let back = sum.subtract_within(&g).unwrap();
        for z in 0..=3 {
            assert!(close(back.value_at(z), f.value_at(z)));
        }
    }
}
