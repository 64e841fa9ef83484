use num_complex::Complex64;

use super::{ComplexEnergy, Sheet};
use crate::{Error, Result};

/// `||f| - 1|` below which a root is treated as lying on the cut.
pub(crate) const CUT_TOL: f64 = 1e-9;

/// Physical-sheet `√(z² - 4)`, cut along `[-2, 2]`.
///
/// A real argument inside the band is read as `E + i0⁺`.
pub fn physical_root(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 { Complex64::new(z.re, 0.0) } else { z };
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Root of `f² + z f + 1 = 0` on the requested sheet: `|f| ≤ 1` on the
/// physical sheet, its reciprocal on the second.
pub fn f_pm(energy: ComplexEnergy) -> Result<Complex64> {
    let z = energy.z;
    if z.im == 0.0 && (z.re.abs() - 2.0).abs() == 0.0 {
        return Err(Error::BranchPoint { z: z.re });
    }
    let f = physical_f(z);
    Ok(match energy.sheet {
        Sheet::Physical => f,
        Sheet::Second => f.inv(),
    })
}

/// Physical root, taken as the reciprocal of the large root when that avoids
/// cancellation in `-z + √(z² - 4)`.
fn physical_f(z: Complex64) -> Complex64 {
    let s = physical_root(z);
    let big = (-z - s) * 0.5;
    if big.norm() > 1.0 {
        big.inv()
    } else {
        (-z + s) * 0.5
    }
}

/// `z = -(f + 1/f)`.
pub(crate) fn energy_of(f: Complex64) -> Complex64 {
    -(f + f.inv())
}

/// Root of `f² + z f + 1 = 0` closest to `reference`; follows a root
/// continuously across the cut.
pub(crate) fn root_near(z: Complex64, reference: Complex64) -> Complex64 {
    let f = physical_f(z);
    let g = f.inv();
    if (f - reference).norm() <= (g - reference).norm() {
        f
    } else {
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gap_value() {
        let f = f_pm(ComplexEnergy::above(3.0)).unwrap();
        assert!((f.re - (-3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(f.im.abs() < 1e-15);
        assert!((f * f + 3.0 * f + 1.0).norm() < 1e-12);
        assert!((f.re + 0.381_966).abs() < 1e-6);
    }

    #[test]
    fn band_centre_is_pure_phase() {
        let f = f_pm(ComplexEnergy::above(0.0)).unwrap();
        assert!((f - Complex64::i()).norm() < 1e-15);
        assert!((f.norm() - 1.0).abs() < 1e-15);
        // -0.0 imaginary part is still read from above
        let f = f_pm(ComplexEnergy::physical(c(0.5, -0.0))).unwrap();
        assert!(f.im > 0.0);
    }

    #[test]
    fn product_of_sheets_is_one() {
        let z = c(1.3, -0.2);
        let a = f_pm(ComplexEnergy::physical(z)).unwrap();
        let b = f_pm(ComplexEnergy::second(z)).unwrap();
        assert!((a * b - 1.0).norm() < 1e-14);
    }

    #[test]
    fn branch_points_rejected() {
        assert!(matches!(
            f_pm(ComplexEnergy::above(2.0)),
            Err(Error::BranchPoint { .. })
        ));
        assert!(f_pm(ComplexEnergy::above(-2.0)).is_err());
    }

    /// The sign rule "± for Re z ≷ 0" with the principal square root of
    /// z² - 4 gives the same physical-sheet root away from the cut.
    #[test]
    fn matches_sign_rule_off_the_imaginary_axis() {
        for &(re, im) in &[
            (3.0, 0.1),
            (-3.0, 0.1),
            (0.5, 0.3),
            (-0.5, 0.3),
            (1.0, -0.7),
            (-1.2, -0.2),
            (0.01, 2.0),
        ] {
            let z = c(re, im);
            let p = (z * z - 4.0).sqrt();
            let rule = if re > 0.0 { (-z + p) / 2.0 } else { (-z - p) / 2.0 };
            let ours = f_pm(ComplexEnergy::physical(z)).unwrap();
            assert!((rule - ours).norm() < 1e-13, "z={z}: {rule} vs {ours}");
        }
    }

    /// The physical root is continuous across Re z = 0, in the band and in
    /// the gap, so the Re z = 0 limit taken from either side agrees.
    #[test]
    fn continuous_across_imaginary_axis() {
        for &im in &[1e-9, 0.3, 5.0, -0.3, -5.0] {
            let l = f_pm(ComplexEnergy::physical(c(-1e-12, im))).unwrap();
            let r = f_pm(ComplexEnergy::physical(c(1e-12, im))).unwrap();
            assert!((l - r).norm() < 1e-10, "im={im}: {l} vs {r}");
        }
    }

    #[test]
    fn far_from_the_band_without_cancellation() {
        let f = f_pm(ComplexEnergy::physical(c(-2.0, -1e12))).unwrap();
        assert!(f.norm() > 0.0);
        assert!((f * c(-2.0, -1e12) + 1.0).norm() < 1e-9);
    }

    proptest! {
        #[test]
        fn quadratic_identity(re in -6.0f64..6.0, im in -6.0f64..6.0, second in any::<bool>()) {
            prop_assume!((c(re, im) - 2.0).norm() > 1e-3 && (c(re, im) + 2.0).norm() > 1e-3);
            let z = c(re, im);
            let e = if second { ComplexEnergy::second(z) } else { ComplexEnergy::physical(z) };
            let f = f_pm(e).unwrap();
            prop_assert!((f * f + z * f + 1.0).norm() <= 1e-12 * (1.0 + f.norm_sqr()));
            if !second {
                prop_assert!(f.norm() <= 1.0 + 1e-12);
            }
        }
    }
}
