//! Small 2x2 helpers shared by the integrators.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Matrix2<C64>;
pub type RMat = Matrix2<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// The symplectic unit ((0, -1), (1, 0)).
pub fn j_real() -> RMat {
    RMat::new(0.0, -1.0, 1.0, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}

pub fn rotation(phi: f64) -> RMat {
    let (s, c) = phi.sin_cos();
    RMat::new(c, s, -s, c)
}

/// `cosh(sqrt(sigma))` and `sinh(sqrt(sigma)) / sqrt(sigma)`, even in the root.
fn cosh_sinhc(sigma: C64) -> (C64, C64) {
    if sigma.norm() < 0.5 {
        let mut ch = C64::new(0.0, 0.0);
        let mut sh = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 0..18 {
            ch += term;
            let n = (2 * k + 1) as f64;
            sh += term / n;
            term *= sigma / (n * (n + 1.0));
        }
        (ch, sh)
    } else {
        let s = sigma.sqrt();
        (s.cosh(), s.sinh() / s)
    }
}

/// Exponential of a traceless complex 2x2 matrix via `A^2 = -det(A) I`.
pub fn expm_traceless(a: &CMat) -> CMat {
    let sigma = -a.determinant();
    let (ch, sh) = cosh_sinhc(sigma);
    CMat::new(
        ch + sh * a[(0, 0)],
        sh * a[(0, 1)],
        sh * a[(1, 0)],
        ch + sh * a[(1, 1)],
    )
}

/// Same as [`expm_traceless`] for real matrices.
pub fn expm_traceless_real(a: &RMat) -> RMat {
    expm_traceless(&to_complex(a)).map(|v| v.re)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.7;
        let a = CMat::new(
            C64::new(0.0, 0.0),
            C64::new(t, 0.0),
            C64::new(-t, 0.0),
            C64::new(0.0, 0.0),
        );
        let e = expm_traceless(&a);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-15);
        assert!((e[(0, 1)].re - t.sin()).abs() < 1e-15);
        assert!((e.determinant().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_small_and_large_branches_agree() {
        let a = CMat::new(
            C64::new(0.3, 0.1),
            C64::new(0.2, -0.4),
            C64::new(-0.5, 0.2),
            C64::new(-0.3, -0.1),
        );
        let mut series = CMat::identity();
        let mut term = CMat::identity();
        for k in 1..40 {
            term = term * a / C64::new(k as f64, 0.0);
            series += term;
        }
        assert!(max_abs(&(expm_traceless(&a) - series)) < 1e-14);
        let b = a * C64::new(3.0, 0.0);
        let mut series = CMat::identity();
        let mut term = CMat::identity();
        for k in 1..80 {
            term = term * b / C64::new(k as f64, 0.0);
            series += term;
        }
        assert!(max_abs(&(expm_traceless(&b) - series)) < 1e-12);
    }
}
