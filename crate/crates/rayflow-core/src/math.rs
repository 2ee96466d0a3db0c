//! Float math for `no_std` builds, backed by `libm`.
//!
//! The method names are deliberately distinct from the inherent `f64`
//! methods: when `std` ends up in the crate graph (e.g. through
//! dev-dependency feature unification), its inherent methods would
//! otherwise shadow a same-named trait and silently switch the library
//! to a different math implementation, making results depend on the
//! build flavor. Prefixed names guarantee every build goes through
//! `libm` and produces bit-identical results.

pub(crate) trait FloatExt {
    fn fsqrt(self) -> f64;
    fn fexp(self) -> f64;
    fn fln(self) -> f64;
    fn fpowi(self, n: i32) -> f64;
    fn fsin(self) -> f64;
    fn fcos(self) -> f64;
    fn ftanh(self) -> f64;
}

impl FloatExt for f64 {
    #[inline]
    fn fsqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn fexp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn fln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn fpowi(self, n: i32) -> f64 {
        libm::pow(self, n as f64)
    }
    #[inline]
    fn fsin(self) -> f64 {
        libm::sin(self)
    }
    #[inline]
    fn fcos(self) -> f64 {
        libm::cos(self)
    }
    #[inline]
    fn ftanh(self) -> f64 {
        libm::tanh(self)
    }
}
