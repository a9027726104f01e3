use crate::error::{Error, Result};

/// Open Detection Score: `(3·AP + (1 − mATE) + (1 − mASE) + (1 − mAOE)) / 6`.
pub fn ods(ap_dist: f64, mate: f64, mase: f64, maoe: f64) -> Result<f64> {
    for (name, v) in [("AP_dist", ap_dist), ("mATE", mate), ("mASE", mase), ("mAOE", maoe)] {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::OutOfRange(name, v));
        }
    }
    Ok((3.0 * ap_dist + (1.0 - mate) + (1.0 - mase) + (1.0 - maoe)) / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn published_rows() {
        // Argoverse 2 columns of the open-set results table.
        assert!((ods(0.086, 0.903, 0.867, 0.953).unwrap() * 100.0 - 8.9).abs() <= 0.05);
        assert!((ods(0.147, 0.755, 0.680, 0.580).unwrap() * 100.0 - 23.8).abs() <= 0.05);
    }

    #[test]
    fn perfect_and_worst() {
        assert_eq!(ods(1.0, 0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(ods(0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(ods(1.2, 0.0, 0.0, 0.0), Err(Error::OutOfRange("AP_dist", _))));
        assert!(ods(0.5, -0.1, 0.0, 0.0).is_err());
        assert!(ods(0.5, 0.0, f64::NAN, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(ap in 0.0f64..=1.0, t in 0.0f64..=1.0, s in 0.0f64..=1.0, o in 0.0f64..=1.0, dx in 0.0f64..0.5) {
            let v = ods(ap, t, s, o).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(ods((ap + dx).min(1.0), t, s, o).unwrap() >= v);
            prop_assert!(ods(ap, (t + dx).min(1.0), s, o).unwrap() <= v);
            prop_assert!(ods(ap, t, (s + dx).min(1.0), o).unwrap() <= v);
            prop_assert!(ods(ap, t, s, (o + dx).min(1.0)).unwrap() <= v);
        }
    }
}
