//! High-precision reference evaluations for unit tests.

pub(crate) mod hp {
    use astro_float::{BigFloat, Consts, RoundingMode};

    const PREC: usize = 512;
    const RM: RoundingMode = RoundingMode::ToEven;

    fn with<F: FnOnce(&BigFloat, &mut Consts) -> BigFloat>(x: f64, f: F) -> f64 {
        let mut cc = Consts::new().expect("constant cache");
        let v = f(&BigFloat::from_f64(x, PREC), &mut cc);
        to_f64(&v)
    }

    pub(crate) fn to_f64(v: &BigFloat) -> f64 {
        v.to_string()
            .parse()
            .expect("decimal rendering of a big float")
    }

    pub(crate) fn ln(x: f64) -> f64 {
        with(x, |v, cc| v.ln(PREC, RM, cc))
    }

    pub(crate) fn exp(x: f64) -> f64 {
        with(x, |v, cc| v.exp(PREC, RM, cc))
    }

    pub(crate) fn atan(x: f64) -> f64 {
        with(x, |v, cc| v.atan(PREC, RM, cc))
    }

    pub(crate) fn ln_1p(x: f64) -> f64 {
        with(x, |v, cc| {
            v.add(&BigFloat::from_f64(1.0, PREC), PREC, RM)
                .ln(PREC, RM, cc)
        })
    }
}
