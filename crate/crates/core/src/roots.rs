//! Bracketing root finders for smooth scalar functions.

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub root: f64,
    /// Width of the final bisection bracket.
    pub bracket_width: f64,
}

/// Bisect `f` on `[lo, hi]` until the bracket is narrower than `tol`, then
/// apply up to `secant_steps` secant iterations that are accepted only while
/// they stay inside the last bracket.
///
/// Returns `None` when `f(lo)` and `f(hi)` do not differ in sign or either
/// endpoint evaluates to a non-finite value.
pub fn bisect_then_secant<F>(f: F, lo: f64, hi: f64, tol: f64, secant_steps: usize) -> Option<BracketedRoot>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    if fa == 0.0 {
        return Some(BracketedRoot { root: a, bracket_width: 0.0 });
    }
    if fb == 0.0 {
        return Some(BracketedRoot { root: b, bracket_width: 0.0 });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if !fm.is_finite() {
            return None;
        }
        if fm == 0.0 {
            return Some(BracketedRoot { root: m, bracket_width: b - a });
        }
        // ties go to the lower half
        if fa.signum() != fm.signum() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let width = b - a;
    let (mut x0, mut x1) = (a, b);
    let (mut f0, mut f1) = (f(a), f(b));
    let mut best = if f0.abs() <= f1.abs() { x0 } else { x1 };
    let mut best_val = f0.abs().min(f1.abs());
    for _ in 0..secant_steps {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= a && x2 <= b) {
            break;
        }
        let f2 = f(x2);
        if !f2.is_finite() {
            break;
        }
        if f2.abs() < best_val {
            best = x2;
            best_val = f2.abs();
        }
        if f2 == 0.0 {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Some(BracketedRoot { root: best, bracket_width: width })
}
