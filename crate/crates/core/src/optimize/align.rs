//! FSO beam pointing.

use crate::error::{Error, Result};
use crate::model::Position3D;

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("pointing vector has zero or non-finite length"));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// Unit vector pointing from `tx` to `rx`.
pub fn align_fso(tx: &Position3D, rx: &Position3D) -> Result<[f64; 3]> {
    unit([rx.x - tx.x, rx.y - tx.y, rx.z - tx.z])
}

/// Angle between the current pointing direction and the ideal `tx -> rx`
/// direction, in `[0, pi]`.
pub fn misalignment(current: [f64; 3], tx: &Position3D, rx: &Position3D) -> Result<f64> {
    let a = unit(current)?;
    let b = align_fso(tx, rx)?;
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    // atan2 stays accurate near 0 and pi where acos does not
    Ok(sin.atan2(dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn examples() {
        let o = Position3D::ground(0.0, 0.0);
        let x = Position3D::ground(1.0, 0.0);
        let y = Position3D::ground(0.0, 1.0);
        assert_eq!(misalignment([1.0, 0.0, 0.0], &o, &x).unwrap(), 0.0);
        assert!((misalignment([1.0, 0.0, 0.0], &o, &y).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((misalignment([-1.0, 0.0, 0.0], &o, &x).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!(align_fso(&o, &o).is_err());
        assert!(misalignment([0.0, 0.0, 0.0], &o, &x).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(ax in -200.0f64..200.0, ay in -200.0f64..200.0, az in 0.0f64..40.0,
                      bx in -200.0f64..200.0, by in -200.0f64..200.0, bz in 0.0f64..40.0) {
            let a = Position3D::new(ax, ay, az);
            let b = Position3D::new(bx, by, bz);
            prop_assume!(a.distance(&b) > 1e-6);
            let v = align_fso(&a, &b).unwrap();
            prop_assert!(misalignment(v, &a, &b).unwrap() < 1e-7);
        }
    }
}
