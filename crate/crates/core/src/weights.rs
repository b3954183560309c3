//! Smooth compactly supported weights used as inert stand-ins.

/// Smooth transition: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// exp(a − a/(1 − τ²)) on (lo, hi), τ the affine image in (−1, 1); peak value 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, a: 1.0 }
    }

    pub fn with_sharpness(lo: f64, hi: f64, a: f64) -> Self {
        Self { lo, hi, a }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let tau = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let s = 1.0 - tau * tau;
        (self.a - self.a / s).exp()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// 1 on [p_lo, p_hi], smooth ramps down to 0 at lo and hi. With `log_scale`
/// the ramps are smooth steps in log x (requires lo > 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub lo: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub hi: f64,
    pub log_scale: bool,
}

impl Plateau {
    pub fn new(lo: f64, p_lo: f64, p_hi: f64, hi: f64) -> Self {
        assert!(lo < p_lo && p_lo <= p_hi && p_hi < hi);
        Self { lo, p_lo, p_hi, hi, log_scale: false }
    }

    pub fn log(lo: f64, p_lo: f64, p_hi: f64, hi: f64) -> Self {
        assert!(lo > 0.0);
        Self { log_scale: true, ..Self::new(lo, p_lo, p_hi, hi) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let f = |v: f64| if self.log_scale { v.ln() } else { v };
        smooth_step((f(x) - f(self.lo)) / (f(self.p_lo) - f(self.lo)))
            * smooth_step((f(self.hi) - f(x)) / (f(self.hi) - f(self.p_hi)))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// V: bump on [1, 2]; W: plateau equal to 1 on [1, 2] and supported in [1/2, 4].
/// W ramps in log x: its Mellin transform then decays fast enough for the
/// G window to be visible at small T.
pub fn afe_v() -> Bump {
    Bump::new(1.0, 2.0)
}

pub fn afe_w() -> Plateau {
    Plateau::log(0.5, 1.0, 2.0, 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let b = Bump::new(1.0, 2.0);
        assert_eq!(b.eval(1.5), 1.0);
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.eval(1.3) - b.eval(1.7)).abs() < 1e-15);
        let p = afe_w();
        assert_eq!(p.eval(1.2), 1.0);
        assert_eq!(p.eval(4.0), 0.0);
        assert!(p.eval(3.0) > 0.0);
        assert!(p.eval(0.75) > 0.0 && p.eval(0.75) < 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }
}
