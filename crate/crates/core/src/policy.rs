//! Threshold policies and profiles.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Activate iff `y <= tau`.
    Low,
    /// Activate iff `y > tau`.
    High,
}

/// Signal cutoff of a threshold policy.
///
/// `Never` is the cutoff below every signal (`tau = -1`): a low policy with it
/// never activates, a high policy with it always does. `Unbounded` is
/// `tau = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Threshold {
    Never,
    At(u32),
    Unbounded,
}

impl Threshold {
    /// Integer cutoff with `-1` for `Never`; `None` when unbounded.
    pub fn as_i64(self) -> Option<i64> {
        match self {
            Threshold::Never => Some(-1),
            Threshold::At(t) => Some(t as i64),
            Threshold::Unbounded => None,
        }
    }

    /// `y <= tau`.
    pub fn admits(self, y: u64) -> bool {
        match self {
            Threshold::Never => false,
            Threshold::At(t) => y <= t as u64,
            Threshold::Unbounded => true,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Never => f.write_str("never"),
            Threshold::At(t) => write!(f, "{t}"),
            Threshold::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.as_i64() {
            Some(t) => s.serialize_i64(t),
            None => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(-1) => Ok(Threshold::Never),
            Repr::Int(t) if (0..=u32::MAX as i64).contains(&t) => Ok(Threshold::At(t as u32)),
            Repr::Word(w) if w == "inf" => Ok(Threshold::Unbounded),
            Repr::Word(w) if w == "never" || w == "always" => Ok(Threshold::Never),
            _ => Err(serde::de::Error::custom("invalid threshold")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThresholdPolicy {
    pub kind: PolicyKind,
    pub tau: Threshold,
}

impl ThresholdPolicy {
    pub fn low(tau: Threshold) -> Self {
        ThresholdPolicy { kind: PolicyKind::Low, tau }
    }

    pub fn high(tau: Threshold) -> Self {
        ThresholdPolicy { kind: PolicyKind::High, tau }
    }

    pub fn activates(&self, y: u64) -> bool {
        match self.kind {
            PolicyKind::Low => self.tau.admits(y),
            PolicyKind::High => !self.tau.admits(y),
        }
    }
}

/// Per-agent thresholds sharing one policy kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThresholdProfile {
    kind: PolicyKind,
    taus: Vec<Threshold>,
}

impl ThresholdProfile {
    pub fn new(kind: PolicyKind, taus: Vec<Threshold>) -> Self {
        ThresholdProfile { kind, taus }
    }

    pub fn homogeneous(kind: PolicyKind, tau: Threshold, n: usize) -> Self {
        ThresholdProfile { kind, taus: vec![tau; n] }
    }

    /// Builds a profile from individual policies; mixed kinds are rejected.
    pub fn from_policies(policies: &[ThresholdPolicy]) -> Result<Self> {
        let kind = policies.first().map(|p| p.kind).unwrap_or(PolicyKind::Low);
        if policies.iter().any(|p| p.kind != kind) {
            return Err(Error::MixedKinds);
        }
        Ok(ThresholdProfile { kind, taus: policies.iter().map(|p| p.tau).collect() })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn taus(&self) -> &[Threshold] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn policy(&self, i: usize) -> ThresholdPolicy {
        ThresholdPolicy { kind: self.kind, tau: self.taus[i] }
    }

    /// All thresholds except agent `i`'s.
    pub fn others(&self, i: usize) -> ThresholdProfile {
        let taus = self.taus.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &t)| t).collect();
        ThresholdProfile { kind: self.kind, taus }
    }

    /// Copy with agent `i` switched to `tau`.
    pub fn with(&self, i: usize, tau: Threshold) -> ThresholdProfile {
        let mut next = self.clone();
        next.taus[i] = tau;
        next
    }

    pub fn set(&mut self, i: usize, tau: Threshold) {
        self.taus[i] = tau;
    }

    /// Common threshold when every entry is equal.
    pub fn common(&self) -> Option<Threshold> {
        let first = *self.taus.first()?;
        self.taus.iter().all(|&t| t == first).then_some(first)
    }

    /// Distinct thresholds with their multiplicities, in ascending order.
    pub fn counts(&self) -> Vec<(Threshold, usize)> {
        let mut sorted = self.taus.clone();
        sorted.sort_unstable();
        let mut out: Vec<(Threshold, usize)> = Vec::new();
        for t in sorted {
            match out.last_mut() {
                Some((last, c)) if *last == t => *c += 1,
                _ => out.push((t, 1)),
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TauRepr {
    Int(i64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    kind: PolicyKind,
    taus: Vec<TauRepr>,
}

fn encode_tau(kind: PolicyKind, tau: Threshold) -> TauRepr {
    match (kind, tau) {
        (_, Threshold::At(t)) => TauRepr::Int(t as i64),
        (_, Threshold::Unbounded) => TauRepr::Word("inf".into()),
        (PolicyKind::Low, Threshold::Never) => TauRepr::Word("never".into()),
        (PolicyKind::High, Threshold::Never) => TauRepr::Word("always".into()),
    }
}

fn decode_tau(kind: PolicyKind, repr: &TauRepr) -> std::result::Result<Threshold, String> {
    match repr {
        TauRepr::Int(-1) => Ok(Threshold::Never),
        TauRepr::Int(t) if *t >= 0 && *t <= u32::MAX as i64 => Ok(Threshold::At(*t as u32)),
        TauRepr::Int(t) => Err(format!("threshold {t} out of range")),
        TauRepr::Word(w) => match (w.as_str(), kind) {
            ("inf", _) => Ok(Threshold::Unbounded),
            ("never", PolicyKind::Low) | ("always", PolicyKind::High) => Ok(Threshold::Never),
            (other, _) => Err(format!("unknown threshold {other:?} for {kind:?} policy")),
        },
    }
}

impl Serialize for ThresholdProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileRepr { kind: self.kind, taus: self.taus.iter().map(|&t| encode_tau(self.kind, t)).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThresholdProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ProfileRepr::deserialize(d)?;
        let taus = repr
            .taus
            .iter()
            .map(|t| decode_tau(repr.kind, t))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(ThresholdProfile { kind: repr.kind, taus })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_and_high_activation_sets() {
        let low = ThresholdPolicy::low(Threshold::At(3));
        assert!(low.activates(3) && !low.activates(4));
        let high = ThresholdPolicy::high(Threshold::At(3));
        assert!(!high.activates(3) && high.activates(4));
        assert!(!ThresholdPolicy::low(Threshold::Never).activates(0));
        assert!(ThresholdPolicy::high(Threshold::Never).activates(0));
        assert!(!ThresholdPolicy::high(Threshold::Unbounded).activates(u64::MAX));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let ps = [ThresholdPolicy::low(Threshold::At(1)), ThresholdPolicy::high(Threshold::At(1))];
        assert_eq!(ThresholdProfile::from_policies(&ps), Err(Error::MixedKinds));
    }

    #[test]
    fn json_sentinels() {
        let p = ThresholdProfile::new(
            PolicyKind::Low,
            vec![Threshold::At(0), Threshold::Unbounded, Threshold::Never, Threshold::At(7)],
        );
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"kind":"low","taus":[0,"inf","never",7]}"#);
        assert_eq!(serde_json::from_str::<ThresholdProfile>(&text).unwrap(), p);

        let h: ThresholdProfile = serde_json::from_str(r#"{"kind":"high","taus":["always",-1,2]}"#).unwrap();
        assert_eq!(h.taus(), &[Threshold::Never, Threshold::Never, Threshold::At(2)]);
        assert!(serde_json::from_str::<ThresholdProfile>(r#"{"kind":"high","taus":["never"]}"#).is_err());
        assert!(serde_json::from_str::<ThresholdProfile>(r#"{"kind":"low","taus":[-4]}"#).is_err());
    }

    #[test]
    fn counts_group_equal_thresholds() {
        let p = ThresholdProfile::new(
            PolicyKind::Low,
            vec![Threshold::At(2), Threshold::Never, Threshold::At(2), Threshold::Unbounded],
        );
        assert_eq!(
            p.counts(),
            vec![(Threshold::Never, 1), (Threshold::At(2), 2), (Threshold::Unbounded, 1)]
        );
        assert_eq!(p.others(1).taus(), &[Threshold::At(2), Threshold::At(2), Threshold::Unbounded]);
        assert_eq!(p.common(), None);
    }

    #[test]
    fn threshold_json_sentinels() {
        let ts = vec![Threshold::Never, Threshold::At(4), Threshold::Unbounded];
        let text = serde_json::to_string(&ts).unwrap();
        assert_eq!(text, r#"[-1,4,"inf"]"#);
        assert_eq!(serde_json::from_str::<Vec<Threshold>>(&text).unwrap(), ts);
    }
}
