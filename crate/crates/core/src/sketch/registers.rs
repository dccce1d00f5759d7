/// Fixed-width unsigned values packed LSB-first into a contiguous bit array.
///
/// Value `i` occupies bits `[i * width, (i + 1) * width)`. Words are stored
/// little-endian, so the byte image of the word array is exactly the packed
/// bit stream used by the serialization format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PackedRegisters {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

impl PackedRegisters {
    pub(crate) fn new(len: usize, width: u32) -> Self {
        debug_assert!((1..=64).contains(&width));
        let bits = len * width as usize;
        Self {
            words: vec![0; bits.div_ceil(64)],
            width,
            len,
        }
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn mask(&self) -> u64 {
        u64::MAX >> (64 - self.width)
    }

    #[inline]
    pub(crate) fn get(&self, index: usize) -> u64 {
        debug_assert!(index < self.len);
        let bit = index * self.width as usize;
        let word = bit / 64;
        let shift = (bit % 64) as u32;
        let mut value = self.words[word] >> shift;
        if shift + self.width > 64 {
            value |= self.words[word + 1] << (64 - shift);
        }
        value & self.mask()
    }

    #[inline]
    pub(crate) fn set(&mut self, index: usize, value: u64) {
        debug_assert!(index < self.len);
        let mask = self.mask();
        debug_assert!(value & !mask == 0);
        let bit = index * self.width as usize;
        let word = bit / 64;
        let shift = (bit % 64) as u32;
        self.words[word] = (self.words[word] & !(mask << shift)) | (value << shift);
        if shift + self.width > 64 {
            let spill = 64 - shift;
            let hi_mask = mask >> spill;
            self.words[word + 1] = (self.words[word + 1] & !hi_mask) | (value >> spill);
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Appends the packed bit stream, `ceil(len * width / 8)` bytes.
    pub(crate) fn write_bytes(&self, out: &mut Vec<u8>) {
        let n = (self.len * self.width as usize).div_ceil(8);
        out.extend(self.words.iter().flat_map(|w| w.to_le_bytes()).take(n));
    }

    /// Inverse of [`write_bytes`](Self::write_bytes). `bytes` must have the
    /// exact length and no bits set past the last value.
    pub(crate) fn from_bytes(len: usize, width: u32, bytes: &[u8]) -> Option<Self> {
        let mut regs = Self::new(len, width);
        let bits = len * width as usize;
        if bytes.len() != bits.div_ceil(8) {
            return None;
        }
        for (word, chunk) in regs.words.iter_mut().zip(bytes.chunks(8)) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *word = u64::from_le_bytes(buf);
        }
        if bits % 64 != 0 {
            let last = regs.words.len() - 1;
            if regs.words[last] >> (bits % 64) != 0 {
                return None;
            }
        }
        Some(regs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn straddling_word_boundary() {
        let mut regs = PackedRegisters::new(10, 28);
        regs.set(2, 0x0FFF_FFFF); // bits 56..84
        assert_eq!(regs.get(2), 0x0FFF_FFFF);
        assert_eq!(regs.get(1), 0);
        assert_eq!(regs.get(3), 0);
        regs.set(2, 0x0123_4567);
        assert_eq!(regs.get(2), 0x0123_4567);
    }

    #[test]
    fn byte_layout_is_lsb_first() {
        let mut regs = PackedRegisters::new(2, 12);
        regs.set(0, 0xABC);
        regs.set(1, 0x123);
        let mut out = Vec::new();
        regs.write_bytes(&mut out);
        // stream: 0xABC then 0x123 -> 0x123ABC little-endian
        assert_eq!(out, vec![0xBC, 0x3A, 0x12]);
    }

    #[test]
    fn full_width_values() {
        let mut regs = PackedRegisters::new(3, 64);
        regs.set(1, u64::MAX);
        assert_eq!(regs.get(1), u64::MAX);
        assert_eq!(regs.get(0), 0);
        assert_eq!(regs.get(2), 0);
    }

    #[test]
    fn from_bytes_rejects_padding_bits() {
        assert!(PackedRegisters::from_bytes(1, 4, &[0x0F]).is_some());
        assert!(PackedRegisters::from_bytes(1, 4, &[0x1F]).is_none());
        assert!(PackedRegisters::from_bytes(1, 4, &[0, 0]).is_none());
    }

    proptest! {
        #[test]
        fn behaves_like_a_vec(
            width in 1u32..=64,
            writes in prop::collection::vec((0usize..40, any::<u64>()), 0..200),
        ) {
            let mut regs = PackedRegisters::new(40, width);
            let mut model = vec![0u64; 40];
            let mask = u64::MAX >> (64 - width);
            for (i, v) in writes {
                regs.set(i, v & mask);
                model[i] = v & mask;
            }
            prop_assert_eq!(regs.iter().collect::<Vec<_>>(), model.clone());
            let mut bytes = Vec::new();
            regs.write_bytes(&mut bytes);
            let back = PackedRegisters::from_bytes(40, width, &bytes).unwrap();
            prop_assert_eq!(back, regs);
        }
    }
}
