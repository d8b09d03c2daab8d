//! Fixed-width bit packing, least significant bit first.

pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    bit: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self {
            bytes: Vec::new(),
            bit: 0,
        }
    }

    /// Appends the low `width` bits of `value`.
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(
            width == 64 || value >> width == 0,
            "{value} does not fit in {width} bits"
        );
        for b in 0..width {
            if self.bit.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if value >> b & 1 == 1 {
                *self.bytes.last_mut().unwrap() |= 1 << (self.bit % 8);
            }
            self.bit += 1;
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    pub fn read(&mut self, width: u32) -> Option<u64> {
        if self.bit + width as usize > self.bytes.len() * 8 {
            return None;
        }
        let mut value = 0u64;
        for b in 0..width {
            let p = self.bit + b as usize;
            if self.bytes[p / 8] >> (p % 8) & 1 == 1 {
                value |= 1 << b;
            }
        }
        self.bit += width as usize;
        Some(value)
    }

    /// True iff every unread bit is zero and less than a byte remains.
    pub fn at_padding(&self) -> bool {
        let total = self.bytes.len() * 8;
        total - self.bit < 8 && (self.bit..total).all(|p| self.bytes[p / 8] >> (p % 8) & 1 == 0)
    }
}

/// Bits needed to represent every value in `0..=max`; at least one.
pub(crate) fn width_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}
