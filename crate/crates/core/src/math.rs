//! Transcendental shims: std intrinsics when available, libm otherwise.

#![allow(dead_code)]

macro_rules! shim {
    ($name:ident, $libm:path) => {
        #[cfg(feature = "std")]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            f64::$name(x)
        }
        #[cfg(not(feature = "std"))]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            $libm(x)
        }
    };
}

shim!(exp, libm::exp);
shim!(ln, libm::log);
shim!(ln_1p, libm::log1p);
shim!(exp_m1, libm::expm1);
shim!(sqrt, libm::sqrt);
shim!(abs, libm::fabs);
shim!(sin, libm::sin);
shim!(cos, libm::cos);
