//! Small numeric helpers: compensated summation and Hurwitz zeta values.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in items {
        acc.add(x);
    }
    acc.value()
}

/// Running compensated partial sums.
pub fn cumulative(values: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    values
        .iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect()
}

/// Serde adapters writing non-finite floats as `"inf"`, `"-inf"` or `"nan"`,
/// which plain JSON numbers cannot carry.
pub mod json_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Tag("nan".into())
        } else if x > 0.0 {
            Repr::Tag("inf".into())
        } else {
            Repr::Tag("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            x.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }

    pub mod pairs {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[(usize, f64)], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(|&(i, v)| (i, to_repr(v))).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, f64)>, D::Error> {
            Vec::<(usize, Repr)>::deserialize(d)?
                .into_iter()
                .map(|(i, r)| Ok((i, from_repr(r)?)))
                .collect()
        }
    }
}

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Value of the Hurwitz zeta function sum_{k>=0} (k + a)^(-s) together with
/// an absolute error bound. Requires `s > 1` and `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> (f64, f64) {
    debug_assert!(s > 1.0 && a > 0.0);
    const SHIFT_TO: f64 = 30.0;
    let mut head = CompensatedSum::new();
    let mut x = a;
    while x < SHIFT_TO {
        head.add(x.powf(-s));
        x += 1.0;
    }
    // Euler-Maclaurin from x onwards.
    let mut tail = CompensatedSum::new();
    tail.add(x.powf(1.0 - s) / (s - 1.0));
    tail.add(0.5 * x.powf(-s));
    // rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    let mut last = 0.0;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coef * rising * xpow;
        if j + 1 == BERNOULLI_OVER_FACTORIAL.len() {
            last = term.abs();
            break;
        }
        tail.add(term);
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + m - 1.0) * (s + m);
        xpow /= x * x;
    }
    let value = head.value() + tail.value();
    (value, last + 4.0 * f64::EPSILON * value.abs())
}
