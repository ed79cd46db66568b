use majorn_core::boyd::{boyd_upper, check_cv, default_probes, DEFAULT_PROBE_LEN};
use majorn_core::generate::random_decreasing_seq;
use majorn_core::oracle::parse_oracle;
use majorn_core::rat::{self, Rat};
use majorn_core::{FinSeq, Result};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::exps;
use crate::lemma::{from_data, to_data, Bound, Lemma, Outcome, Variant};

#[derive(Serialize, Deserialize)]
struct CvData {
    u: FinSeq,
    length: usize,
}

pub struct CvComparison;

impl Lemma for CvComparison {
    fn tag(&self) -> &'static str {
        "cv-comparison"
    }

    fn summary(&self) -> &'static str {
        "Cesaro means of a decreasing sequence are at most 3 times V"
    }

    fn default_size(&self) -> usize {
        1 << 10
    }

    fn bounds(&self, _variant: &Variant) -> Vec<Bound> {
        vec![Bound::new("max ratio", "3", 3.0)]
    }

    fn generate(&self, rng: &mut ChaCha8Rng, _variant: &Variant, size: usize) -> Result<Value> {
        to_data(&CvData { u: random_decreasing_seq(rng, size), length: size })
    }

    fn check(&self, _variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: CvData = from_data(data)?;
        let rep = check_cv(&d.u, d.length)?;
        let out = Outcome::new(true).observe("max ratio", rat::to_f64(&rep.max_ratio));
        Ok(if rep.holds && rep.max_ratio <= rat::int(3) {
            out
        } else {
            out.fail(format!("C u exceeds 3 V u at index {:?}", rep.first_violation))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BoydData {
    k_max: u64,
}

/// Allowed deviation of the regression slope from `1/p`.
pub const SLOPE_TOLERANCE: f64 = 0.05;

/// Dilation-norm regression on `ℓ_p` recovers `1/p`; `size` is `log2 k_max`.
pub struct BoydRecovery;

impl Lemma for BoydRecovery {
    fn tag(&self) -> &'static str {
        "boyd-recovery"
    }

    fn summary(&self) -> &'static str {
        "upper dilation index of l_p estimated within 0.05 of 1/p"
    }

    fn default_exponents(&self) -> Vec<Rat> {
        exps(&[(1, 1), (2, 1), (4, 1)])
    }

    fn default_size(&self) -> usize {
        12
    }

    fn bounds(&self, variant: &Variant) -> Vec<Bound> {
        let target = rat::to_f64(&variant.r.recip());
        vec![
            Bound::new("slope error", format!("{SLOPE_TOLERANCE}"), SLOPE_TOLERANCE),
            Bound::new("slope", "1/p", target),
        ]
    }

    fn generate(&self, _rng: &mut ChaCha8Rng, _variant: &Variant, size: usize) -> Result<Value> {
        to_data(&BoydData { k_max: 1 << size.min(20) })
    }

    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome> {
        let d: BoydData = from_data(data)?;
        let oracle = parse_oracle(&format!("lp:{}", rat::format(&variant.r)))?;
        let est = boyd_upper(oracle.as_ref(), d.k_max, &default_probes(DEFAULT_PROBE_LEN))?;
        let err = (est.slope - rat::to_f64(&variant.r.recip())).abs();
        let out = Outcome::new(true)
            .observe("slope", est.slope)
            .observe("slope error", err)
            .observe("max residual", est.max_residual);
        Ok(if err <= SLOPE_TOLERANCE && !est.flagged {
            out
        } else {
            out.fail(format!("slope {} misses 1/p by {err}", est.slope))
        })
    }
}
