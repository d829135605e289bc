//! JSON form of [`DistExpr`].
//!
//! ```json
//! { "ell": 0, "ellp": 0, "n": 2, "base_n": 0,
//!   "terms": [ { "region": {"delta_deriv": 0},
//!                "coeff": {"num": 1, "den": 2, "pi_pow": 1},
//!                "gamma": null, "pow_r": -1, "pow_rp": -1, "hyper": null } ] }
//! ```
//! `region` is `"H(r'>r)"`, `"H(r>r')"` or `{"delta_deriv": m}`. Integers
//! that do not fit in 64 bits are written as decimal strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::{DistExpr, ExactCoeff, GammaKind, GammaTag, HyperDescriptor, Orientation, RegionFactor, Term};
use crate::specfun::Order;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BigJson {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for BigJson {
    fn from(b: &BigInt) -> Self {
        match b.to_i64() {
            Some(v) => BigJson::Small(v),
            None => BigJson::Big(b.to_string()),
        }
    }
}

impl BigJson {
    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            BigJson::Small(v) => Ok(BigInt::from(*v)),
            BigJson::Big(s) => s.parse().map_err(|e| format!("bad integer {s:?}: {e}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    num: BigJson,
    den: BigJson,
    pi_pow: i32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RegionJson {
    Heaviside(String),
    Delta { delta_deriv: u32 },
}

#[derive(Serialize, Deserialize)]
struct GammaJson {
    tag: String,
    base_n: i32,
}

#[derive(Serialize, Deserialize)]
struct HyperJson {
    orientation: String,
    x: i32,
    y: i32,
    z: i32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    region: RegionJson,
    coeff: CoeffJson,
    gamma: Option<GammaJson>,
    pow_r: i32,
    pow_rp: i32,
    hyper: Option<HyperJson>,
}

#[derive(Serialize, Deserialize)]
struct ExprJson {
    ell: u32,
    ellp: u32,
    n: i32,
    base_n: i32,
    terms: Vec<TermJson>,
}

const PRIME_GREATER: &str = "H(r'>r)";
const GREATER: &str = "H(r>r')";
const TAG_PRIME: &str = "c_gamma_r'>";
const TAG_PLAIN: &str = "c_gamma_r>";

impl From<&ExactCoeff> for CoeffJson {
    fn from(c: &ExactCoeff) -> Self {
        CoeffJson {
            num: c.q.numer().into(),
            den: c.q.denom().into(),
            pi_pow: c.pi_power,
        }
    }
}

impl From<&Term> for TermJson {
    fn from(t: &Term) -> Self {
        TermJson {
            region: match t.region {
                RegionFactor::HeavisidePrimeGreater => RegionJson::Heaviside(PRIME_GREATER.into()),
                RegionFactor::HeavisideGreater => RegionJson::Heaviside(GREATER.into()),
                RegionFactor::DeltaDerivative(m) => RegionJson::Delta { delta_deriv: m },
            },
            coeff: (&t.coeff).into(),
            gamma: t.gamma.map(|g| GammaJson {
                tag: match g.kind {
                    GammaKind::CGammaPrimeGreater => TAG_PRIME.into(),
                    GammaKind::CGammaGreater => TAG_PLAIN.into(),
                },
                base_n: g.base_n,
            }),
            pow_r: t.pow_r,
            pow_rp: t.pow_rp,
            hyper: t.hyper.map(|h| HyperJson {
                orientation: match h.orientation {
                    Orientation::Primed => "primed".into(),
                    Orientation::Unprimed => "unprimed".into(),
                },
                x: h.x,
                y: h.y,
                z: h.z,
            }),
        }
    }
}

impl TryFrom<TermJson> for Term {
    type Error = String;

    fn try_from(t: TermJson) -> Result<Self, String> {
        let region = match t.region {
            RegionJson::Heaviside(s) if s == PRIME_GREATER => RegionFactor::HeavisidePrimeGreater,
            RegionJson::Heaviside(s) if s == GREATER => RegionFactor::HeavisideGreater,
            RegionJson::Heaviside(s) => return Err(format!("unknown region {s:?}")),
            RegionJson::Delta { delta_deriv } => RegionFactor::DeltaDerivative(delta_deriv),
        };
        let den = t.coeff.den.to_big()?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        let coeff = ExactCoeff::new(BigRational::new(t.coeff.num.to_big()?, den), t.coeff.pi_pow);
        let gamma = t
            .gamma
            .map(|g| {
                let kind = match g.tag.as_str() {
                    TAG_PRIME => GammaKind::CGammaPrimeGreater,
                    TAG_PLAIN => GammaKind::CGammaGreater,
                    other => return Err(format!("unknown gamma tag {other:?}")),
                };
                Ok(GammaTag { kind, base_n: g.base_n })
            })
            .transpose()?;
        let hyper = t
            .hyper
            .map(|h| {
                let orientation = match h.orientation.as_str() {
                    "primed" => Orientation::Primed,
                    "unprimed" => Orientation::Unprimed,
                    other => return Err(format!("unknown orientation {other:?}")),
                };
                Ok(HyperDescriptor {
                    orientation,
                    x: h.x,
                    y: h.y,
                    z: h.z,
                })
            })
            .transpose()?;
        Ok(Term {
            region,
            coeff,
            gamma,
            pow_r: t.pow_r,
            pow_rp: t.pow_rp,
            hyper,
        })
    }
}

impl Serialize for DistExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExprJson {
            ell: self.ell.0,
            ellp: self.ellp.0,
            n: self.current_n,
            base_n: self.base_n,
            terms: self.terms.iter().map(TermJson::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DistExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let e = ExprJson::deserialize(d)?;
        if (e.n - e.base_n) % 2 != 0 || e.n < e.base_n {
            return Err(de::Error::custom("n - base_n must be even and non-negative"));
        }
        let terms = e
            .terms
            .into_iter()
            .map(Term::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(de::Error::custom)?;
        Ok(DistExpr {
            ell: Order(e.ell),
            ellp: Order(e.ellp),
            base_n: e.base_n,
            current_n: e.n,
            terms,
        })
    }
}
