use crate::error::{Error, Result};

/// A `k`-bit PUF response, `e` at the server or `ẽ` at the prover.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResponseBits(Vec<bool>);

impl ResponseBits {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Invalid("response length must be positive".into()));
        }
        Ok(Self(bits))
    }

    /// Parses a string of `0`/`1` characters, first character is bit 1.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Invalid(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    /// Positions where `self` and `other` differ.
    pub fn mismatches(&self, other: &ResponseBits) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter_map(|(i, (a, b))| (a != b).then_some(i))
            .collect()
    }

    /// Bits packed most-significant-bit first, low bits of the last byte zero.
    pub fn pack_msb_first(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.0.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

/// Signed reliability confidences paired with a response; the sign carries the bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceVector(Vec<f64>);

impl ConfidenceVector {
    pub fn new(conf: Vec<f64>) -> Result<Self> {
        if conf.is_empty() {
            return Err(Error::Invalid("confidence vector must be non-empty".into()));
        }
        if conf.iter().any(|c| c.is_nan()) {
            return Err(Error::Invalid("confidence is NaN".into()));
        }
        Ok(Self(conf))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bits implied by the signs: 1 iff confidence < 0.
    pub fn to_bits(&self) -> ResponseBits {
        ResponseBits(self.0.iter().map(|c| bit_of(*c)).collect())
    }
}

/// Response bit for a confidence at threshold 0; a tie yields 0.
#[inline]
pub fn bit_of(conf: f64) -> bool {
    conf < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing() {
        let r = ResponseBits::from_bit_str("1010000011").unwrap();
        assert_eq!(r.pack_msb_first(), vec![0b1010_0000, 0b1100_0000]);
        assert!(ResponseBits::new(vec![]).is_err());
        assert!(ResponseBits::from_bit_str("10x").is_err());
    }

    #[test]
    fn polarity_and_ties() {
        let c = ConfidenceVector::new(vec![-1.0, 0.0, 2.5, -0.0]).unwrap();
        assert_eq!(c.to_bits().to_bit_string(), "1000");
    }
}
