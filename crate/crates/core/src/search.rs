//! One-dimensional minimization of convex functions.

/// `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizer found by golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for a convex `f` on `[lo, hi]`. Stops when the
/// bracket is narrower than `tol(x)` at its midpoint or after `max_iter`
/// shrink steps. Only interior points are evaluated.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: impl Fn(f64) -> f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    for _ in 0..max_iter {
        if b - a <= tol(0.5 * (a + b)) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc <= fd {
        Minimum { x: c, value: fc, evaluations }
    } else {
        Minimum { x: d, value: fd, evaluations }
    }
}

/// Minimizes a convex `f` on the open half-line `(lo, inf)`.
///
/// Probes `lo + scale * 2^k` until the value stops decreasing, then runs a
/// golden-section search on the resulting bracket. If `f` is still
/// decreasing after `max_doublings` probes, the last probe is returned.
pub fn minimize_half_line(mut f: impl FnMut(f64) -> f64, lo: f64, scale: f64, rel_tol: f64, max_doublings: usize) -> Minimum {
    let mut step = scale;
    let mut prev = f(lo + step);
    let mut evaluations = 1;
    let mut doublings = 0;
    loop {
        let next = f(lo + 2.0 * step);
        evaluations += 1;
        if next >= prev {
            break;
        }
        prev = next;
        step *= 2.0;
        doublings += 1;
        if doublings >= max_doublings {
            return Minimum { x: lo + step, value: prev, evaluations };
        }
    }
    let hi = lo + 2.0 * step;
    let mut m = golden_section(&mut f, lo, hi, |x| rel_tol * (1.0 + x.abs()), 400);
    // The probe may beat the golden-section estimate on flat stretches.
    if prev < m.value {
        m = Minimum { x: lo + step, value: prev, evaluations: m.evaluations };
    }
    m.evaluations += evaluations;
    m
}
