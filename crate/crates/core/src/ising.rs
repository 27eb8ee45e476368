//! Hardware-level Ising models: `o + Σ θ_i z_i + Σ θ_ij z_i z_j` over qubit ids.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::topology::{BIAS_RANGE, COUPLING_RANGE};

/// Spin value, `+1` for ⊤ and `-1` for ⊥.
pub type Spin = i8;

pub fn spin_of(b: bool) -> Spin {
    if b {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub offset: f64,
    #[serde(with = "keyed")]
    pub biases: BTreeMap<u32, f64>,
    #[serde(with = "keyed_pair")]
    pub couplings: BTreeMap<(u32, u32), f64>,
    /// Qubits substituted by a constant; they are not sampled.
    #[serde(with = "keyed")]
    pub clamped: BTreeMap<u32, Spin>,
    /// Target spins for qubits pinned through a dynamics-only field.
    #[serde(with = "keyed")]
    pub flux_biases: BTreeMap<u32, Spin>,
    pub gap_reference: f64,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl IsingModel {
    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    pub fn add_bias(&mut self, q: u32, v: f64) {
        *self.biases.entry(q).or_insert(0.0) += v;
    }

    /// Registers a qubit without changing the energy.
    pub fn touch(&mut self, q: u32) {
        self.biases.entry(q).or_insert(0.0);
    }

    pub fn add_coupling(&mut self, a: u32, b: u32, v: f64) {
        assert_ne!(a, b, "self coupling on qubit {a}");
        self.touch(a);
        self.touch(b);
        *self.couplings.entry(ordered(a, b)).or_insert(0.0) += v;
    }

    pub fn coupling(&self, a: u32, b: u32) -> f64 {
        self.couplings.get(&ordered(a, b)).copied().unwrap_or(0.0)
    }

    /// Every qubit the model mentions.
    pub fn qubits(&self) -> BTreeSet<u32> {
        let mut s: BTreeSet<u32> = self.biases.keys().copied().collect();
        for &(a, b) in self.couplings.keys() {
            s.insert(a);
            s.insert(b);
        }
        s.extend(self.clamped.keys());
        s.extend(self.flux_biases.keys());
        s
    }

    /// Qubits the sampler assigns, in ascending order.
    pub fn free_qubits(&self) -> Vec<u32> {
        self.qubits()
            .into_iter()
            .filter(|q| !self.clamped.contains_key(q))
            .collect()
    }

    /// Energy for a total assignment; clamped qubits use their stored values.
    /// Returns the first qubit lacking a value on failure.
    pub fn energy_with(&self, spin: impl Fn(u32) -> Option<Spin>) -> Result<f64, u32> {
        let get = |q: u32| -> Result<f64, u32> {
            if let Some(&s) = self.clamped.get(&q) {
                return Ok(s as f64);
            }
            spin(q).map(|s| s as f64).ok_or(q)
        };
        let mut e = self.offset;
        for (&q, &h) in &self.biases {
            e += h * get(q)?;
        }
        for (&(a, b), &j) in &self.couplings {
            e += j * get(a)? * get(b)?;
        }
        Ok(e)
    }

    pub fn max_abs_bias(&self) -> f64 {
        self.biases.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn weights_in_range(&self) -> bool {
        self.biases
            .values()
            .all(|&h| (BIAS_RANGE.0..=BIAS_RANGE.1).contains(&h))
            && self
                .couplings
                .values()
                .all(|&j| (COUPLING_RANGE.0..=COUPLING_RANGE.1).contains(&j))
    }

    /// Divides offset, weights and gap reference by `s`.
    pub fn rescale(&mut self, s: f64) {
        self.offset /= s;
        self.gap_reference /= s;
        self.biases.values_mut().for_each(|v| *v /= s);
        self.couplings.values_mut().for_each(|v| *v /= s);
    }

    /// SHA-256 over the canonical JSON of the energy function and annotations.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("model serializes");
        hex_digest(&bytes)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON object keys must be strings; integer-keyed maps use decimal keys.
pub(crate) mod keyed {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S, K, V>(map: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        K: std::fmt::Display,
        V: Serialize,
    {
        s.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D, K, V>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        D: Deserializer<'de>,
        K: std::str::FromStr + Ord,
        V: Deserialize<'de>,
    {
        let raw: BTreeMap<String, V> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<K>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("bad key `{k}`")))
            })
            .collect()
    }
}

/// Pair-keyed maps serialize as `"a,b"` keys.
pub(crate) mod keyed_pair {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S, V, K>(map: &BTreeMap<(K, K), V>, s: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        V: Serialize,
        K: std::fmt::Display,
    {
        s.collect_map(map.iter().map(|((a, b), v)| (format!("{a},{b}"), v)))
    }

    pub fn deserialize<'de, D, V, K>(d: D) -> Result<BTreeMap<(K, K), V>, D::Error>
    where
        D: Deserializer<'de>,
        V: Deserialize<'de>,
        K: std::str::FromStr + Ord,
    {
        let raw: Vec<(String, V)> = {
            let m: serde_json::Map<String, serde_json::Value> = serde_json::Map::deserialize(d)?;
            m.into_iter()
                .map(|(k, v)| V::deserialize(v).map(|v| (k, v)).map_err(D::Error::custom))
                .collect::<Result<_, _>>()?
        };
        raw.into_iter()
            .map(|(k, v)| {
                let (a, b) = k
                    .split_once(',')
                    .ok_or_else(|| D::Error::custom(format!("bad pair key `{k}`")))?;
                let a = a
                    .trim()
                    .parse::<K>()
                    .map_err(|_| D::Error::custom("bad key"))?;
                let b = b
                    .trim()
                    .parse::<K>()
                    .map_err(|_| D::Error::custom("bad key"))?;
                Ok(((a, b), v))
            })
            .collect()
    }
}
