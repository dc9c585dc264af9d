use crate::scalar::Real;

/// ∫ y dx on a (possibly non-uniform) grid.
pub fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    x.windows(2)
        .zip(y.windows(2))
        .fold(T::zero(), |a, (xs, ys)| a + (xs[1] - xs[0]) * (ys[0] + ys[1]) * T::of(0.5))
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = T::zero();
    if !x.is_empty() {
        out.push(acc);
    }
    for i in 1..x.len() {
        acc += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) * T::of(0.5);
        out.push(acc);
    }
    out
}

/// Trapezoid integral from x[0] to `upto`, interpolating y linearly inside the last cell.
pub(crate) fn trapezoid_upto<T: Real>(x: &[T], y: &[T], upto: T) -> T {
    let mut acc = T::zero();
    for i in 1..x.len() {
        if x[i] <= upto {
            acc += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) * T::of(0.5);
        } else {
            if upto > x[i - 1] {
                let h = upto - x[i - 1];
                let slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
                let ye = y[i - 1] + slope * h;
                acc += h * (y[i - 1] + ye) * T::of(0.5);
            }
            break;
        }
    }
    acc
}
