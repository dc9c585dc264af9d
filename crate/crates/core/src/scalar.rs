use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the simulator is generic over (`f32`, `f64`).
///
/// Transcendental functions come from nalgebra's `RealField`; constants and
/// primitive conversions from num-traits.
pub trait Real:
    RealField + Copy + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("integer representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn cis<T: Real>(phase: T) -> C<T> {
    C::new(phase.cos(), phase.sin())
}

#[inline]
pub fn cnorm<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn vnorm<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn vdot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter()
        .zip(b)
        .fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn scale_in_place<T: Real>(v: &mut [C<T>], s: T) {
    for z in v.iter_mut() {
        *z = z.scale(s);
    }
}
