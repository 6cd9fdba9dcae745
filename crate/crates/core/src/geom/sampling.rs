use crate::error::{Error, Result};

/// Default constant in front of the relative-approximation sample size.
pub const DEFAULT_C_RA: f64 = 0.5;

/// Sample size for a relative `(eps, p)`-approximation with failure
/// probability `delta` in a range space of VC dimension `vc_dim`, using the
/// default constant.
pub fn relative_sample_size(eps: f64, p: f64, delta: f64, vc_dim: usize) -> Result<usize> {
    relative_sample_size_with(eps, p, delta, vc_dim, DEFAULT_C_RA)
}

/// `ceil(c_ra / (eps^2 p) * (vc_dim ln(1/p) + ln(1/delta)))`.
pub fn relative_sample_size_with(eps: f64, p: f64, delta: f64, vc_dim: usize, c_ra: f64) -> Result<usize> {
    let unit = |v: f64| v > 0.0 && v < 1.0;
    if !(unit(eps) && unit(p) && unit(delta)) || vc_dim == 0 || !(c_ra > 0.0 && c_ra.is_finite()) {
        return Err(Error::Contract(format!(
            "relative_sample_size needs 0 < eps, p, delta < 1, vc_dim >= 1 and c_ra > 0 (got {eps}, {p}, {delta}, {vc_dim}, {c_ra})"
        )));
    }
    let v = c_ra / (eps * eps * p) * (vc_dim as f64 * (1.0 / p).ln() + (1.0 / delta).ln());
    Ok(v.ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_value() {
        // 128 * (3 ln 8 + ln 20) = 1181.96...
        let expect = (128.0 * (3.0 * 8f64.ln() + 20f64.ln())).ceil() as usize;
        assert_eq!(expect, 1182);
        assert_eq!(relative_sample_size_with(0.25, 0.125, 0.05, 3, 1.0).unwrap(), expect);
    }

    #[test]
    fn decreasing_in_eps() {
        let mut last = usize::MAX;
        for i in 1..20 {
            let eps = i as f64 / 20.0;
            let s = relative_sample_size(eps, 0.1, 0.05, 3).unwrap();
            assert!(s <= last);
            last = s;
        }
    }

    #[test]
    fn doubling_vc_dim() {
        // With a small log(1/delta) term the size nearly doubles; with a
        // dominant one it grows by much less.
        let a = relative_sample_size_with(0.25, 0.01, 0.5, 2, 1.0).unwrap() as f64;
        let b = relative_sample_size_with(0.25, 0.01, 0.5, 4, 1.0).unwrap() as f64;
        assert!(b / a > 1.8 && b / a < 2.0);
        let a = relative_sample_size_with(0.25, 0.5, 1e-12, 2, 1.0).unwrap() as f64;
        let b = relative_sample_size_with(0.25, 0.5, 1e-12, 4, 1.0).unwrap() as f64;
        assert!(b / a < 1.1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(relative_sample_size(0.0, 0.5, 0.5, 3).is_err());
        assert!(relative_sample_size(0.5, 1.0, 0.5, 3).is_err());
        assert!(relative_sample_size(0.5, 0.5, 0.5, 0).is_err());
    }
}
