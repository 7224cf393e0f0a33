//! Floating-point comparison used wherever an inequality between reals is
//! decided.

/// Absolute tolerance, scaled by `max(1, |a|, |b|)` in [`le`].
pub const EPS: f64 = 1e-12;

/// `a <= b` up to [`EPS`].
#[inline]
pub fn le(a: f64, b: f64) -> bool {
    a <= b + EPS * scale(a, b)
}

/// `a > b` beyond the tolerance; the negation of [`le`].
#[inline]
pub fn gt(a: f64, b: f64) -> bool {
    !le(a, b)
}

#[inline]
fn scale(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}

/// Running sum with Neumaier compensation. Prefix sums over tens of
/// thousands of small orbit distances stay within a few ulps of exact.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
