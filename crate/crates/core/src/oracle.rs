//! Norm oracles for sequence (and, where defined, function) spaces, built
//! from spec strings such as `lp:2`, `linf` or `lorentz:1:n^-1/2`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Enclosure, Extended};
use crate::finseq::FinSeq;
use crate::rat::{self, Rat};
use crate::stepfn::{NormIndex, StepFunction};

/// A quasi-norm evaluator.
pub trait NormOracle: Send + Sync {
    fn name(&self) -> String;

    fn seq_norm(&self, u: &FinSeq) -> Result<Enclosure>;

    fn step_norm(&self, _f: &StepFunction) -> Result<Extended> {
        Err(Error::Unsupported(format!("oracle {} has no function-space version", self.name())))
    }

    fn supports_step(&self) -> bool {
        false
    }

    /// Declared invariance under permutations and sign changes.
    fn symmetric(&self) -> bool {
        true
    }

    /// Declared concavity modulus `C` in `‖x + y‖ <= C(‖x‖ + ‖y‖)`; informational.
    fn concavity_modulus(&self) -> Option<f64> {
        None
    }
}

/// Runs of equal consecutive absolute values as `(value, count)`.
fn runs(u: &FinSeq) -> Vec<(Rat, u64)> {
    let mut out: Vec<(Rat, u64)> = Vec::new();
    for v in u.entries() {
        let a = v.abs();
        match out.last_mut() {
            Some((w, c)) if *w == a => *c += 1,
            _ => out.push((a, 1)),
        }
    }
    out
}

/// `ℓ_p` / `L_p` for finite `p > 0`.
pub struct Lp {
    p: Rat,
}

impl Lp {
    pub fn new(p: Rat) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::Invalid("lp oracle needs p > 0".into()));
        }
        Ok(Lp { p })
    }
}

impl NormOracle for Lp {
    fn name(&self) -> String {
        format!("lp:{}", rat::format(&self.p))
    }

    fn seq_norm(&self, u: &FinSeq) -> Result<Enclosure> {
        let mut acc = Enclosure::zero();
        for (v, c) in runs(u) {
            if !v.is_zero() {
                acc = acc.add(&exact::pow_enclosure(&v, &self.p)?.scale(&Rat::from_integer(c.into())));
            }
        }
        acc.pow(&self.p.recip())
    }

    fn step_norm(&self, f: &StepFunction) -> Result<Extended> {
        f.norm(&NormIndex::Finite(self.p.clone()))
    }

    fn supports_step(&self) -> bool {
        true
    }

    fn concavity_modulus(&self) -> Option<f64> {
        let p = rat::to_f64(&self.p);
        Some(if p >= 1.0 { 1.0 } else { 2f64.powf(1.0 / p - 1.0) })
    }
}

pub struct Linf;

impl NormOracle for Linf {
    fn name(&self) -> String {
        "linf".into()
    }

    fn seq_norm(&self, u: &FinSeq) -> Result<Enclosure> {
        u.norm(&NormIndex::Infinity)
    }

    fn step_norm(&self, f: &StepFunction) -> Result<Extended> {
        f.norm(&NormIndex::Infinity)
    }

    fn supports_step(&self) -> bool {
        true
    }

    fn concavity_modulus(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Dyadic resolution of the cached Lorentz weights.
const WEIGHT_BITS: u64 = 80;

/// Weighted Lorentz space: `‖u‖ = (Σ_n μ(u)_n^p w_n)^{1/p}` with `w_n = (n+1)^a`.
pub struct Lorentz {
    p: Rat,
    a: Rat,
    weights: RwLock<Vec<Enclosure>>,
}

impl Lorentz {
    pub fn new(p: Rat, a: Rat) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::Invalid("lorentz oracle needs p > 0".into()));
        }
        if a.is_positive() {
            return Err(Error::Invalid("lorentz weight must be non-increasing (exponent <= 0)".into()));
        }
        Ok(Lorentz { p, a, weights: RwLock::new(Vec::new()) })
    }

    /// `Σ_{n=start}^{start+count-1} w_n`, growing the weight cache as needed.
    fn weight_sum(&self, start: usize, count: usize) -> Result<Enclosure> {
        let end = start + count;
        if self.weights.read().expect("weight cache").len() < end {
            let mut w = self.weights.write().expect("weight cache");
            while w.len() < end {
                let n = w.len() as i64 + 1;
                w.push(exact::pow_enclosure(&rat::int(n), &self.a)?.outward(WEIGHT_BITS));
            }
        }
        let w = self.weights.read().expect("weight cache");
        Ok(w[start..end].iter().fold(Enclosure::zero(), |acc, x| acc.add(x)))
    }
}

impl NormOracle for Lorentz {
    fn name(&self) -> String {
        format!("lorentz:{}:n^{}", rat::format(&self.p), rat::format(&self.a))
    }

    fn seq_norm(&self, u: &FinSeq) -> Result<Enclosure> {
        // decreasing rearrangement as runs
        let mut merged: BTreeMap<Rat, u64> = BTreeMap::new();
        for (v, c) in runs(u) {
            if !v.is_zero() {
                *merged.entry(v).or_default() += c;
            }
        }
        let mut acc = Enclosure::zero();
        let mut pos = 0usize;
        for (v, c) in merged.into_iter().rev() {
            let c = c as usize;
            acc = acc.add(&exact::pow_enclosure(&v, &self.p)?.mul(&self.weight_sum(pos, c)?));
            pos += c;
        }
        acc.pow(&self.p.recip())
    }
}

type Builder = Arc<dyn Fn(&[&str]) -> Result<Box<dyn NormOracle>> + Send + Sync>;

/// Oracle constructors keyed by the first `:`-separated field of a spec string.
#[derive(Clone)]
pub struct OracleRegistry {
    builders: BTreeMap<String, Builder>,
}

impl fmt::Debug for OracleRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}

/// Parses `n^<a>` (also accepts a bare exponent).
fn parse_weight(s: &str) -> Result<Rat> {
    let e = s.strip_prefix("n^").unwrap_or(s);
    rat::parse(e)
}

fn arity(name: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::Parse(format!("oracle {name} takes {n} argument(s), got {}", args.len())));
    }
    Ok(())
}

impl OracleRegistry {
    pub fn empty() -> Self {
        OracleRegistry { builders: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = OracleRegistry::empty();
        r.register("lp", |args| {
            arity("lp", args, 1)?;
            Ok(Box::new(Lp::new(rat::parse(args[0])?)?))
        });
        r.register("linf", |args| {
            arity("linf", args, 0)?;
            Ok(Box::new(Linf))
        });
        r.register("lorentz", |args| {
            arity("lorentz", args, 2)?;
            Ok(Box::new(Lorentz::new(rat::parse(args[0])?, parse_weight(args[1])?)?))
        });
        r
    }

    pub fn register(
        &mut self,
        name: &str,
        build: impl Fn(&[&str]) -> Result<Box<dyn NormOracle>> + Send + Sync + 'static,
    ) {
        self.builders.insert(name.to_string(), Arc::new(build));
    }

    pub fn names(&self) -> Vec<String> {
        self.builders.keys().cloned().collect()
    }

    pub fn build(&self, spec: &str) -> Result<Box<dyn NormOracle>> {
        let mut parts = spec.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let build = self
            .builders
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown oracle '{name}' (known: {})", self.names().join(", "))))?;
        build(&args)
    }
}

/// Builds one of the built-in oracles from its spec string.
pub fn parse_oracle(spec: &str) -> Result<Box<dyn NormOracle>> {
    OracleRegistry::builtin().build(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn specs() {
        assert_eq!(parse_oracle("lp:2").unwrap().name(), "lp:2");
        assert_eq!(parse_oracle("linf").unwrap().name(), "linf");
        assert_eq!(parse_oracle("lorentz:1:n^-1/2").unwrap().name(), "lorentz:1:n^-1/2");
        assert_eq!(parse_oracle("lorentz:1:n^-0.5").unwrap().name(), "lorentz:1:n^-1/2");
        assert!(parse_oracle("lp").is_err());
        assert!(parse_oracle("nope:1").is_err());
    }

    #[test]
    fn lp_values() {
        let o = Lp::new(int(2)).unwrap();
        let u = FinSeq::from_ints(&[3, -4]);
        assert_eq!(o.seq_norm(&u).unwrap(), Enclosure::exact(int(5)));
        let o = Lp::new(int(1)).unwrap();
        assert_eq!(o.seq_norm(&FinSeq::from_ints(&[2, 2, 2, -1])).unwrap(), Enclosure::exact(int(7)));
    }

    #[test]
    fn lorentz_rearranges() {
        let o = Lorentz::new(int(1), frac(-1, 1)).unwrap();
        // μ = (3, 1): 3·1 + 1·(1/2)
        let v = o.seq_norm(&FinSeq::from_ints(&[1, 0, -3])).unwrap();
        assert_eq!(v, Enclosure::exact(frac(7, 2)));
    }

    #[test]
    fn user_registration() {
        let mut r = OracleRegistry::builtin();
        r.register("l1", |_| Ok(Box::new(Lp::new(int(1))?)));
        assert_eq!(r.build("l1").unwrap().name(), "lp:1");
    }
}
