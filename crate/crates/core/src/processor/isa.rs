//! Instruction words.
//!
//! Layout, LSB-first within little-endian bytes: opcode (2 bits),
//! `src`, `aux`, `dst` (64 bits each), extract index (`log2 N` bits), zero
//! padding to a byte boundary. MULADD appends a 64-bit immediate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opcode {
    Pbs = 0b00,
    Ks = 0b01,
    MulAdd = 0b10,
}

impl Opcode {
    pub fn from_bits(bits: u64) -> Result<Self> {
        match bits {
            0b00 => Ok(Opcode::Pbs),
            0b01 => Ok(Opcode::Ks),
            0b10 => Ok(Opcode::MulAdd),
            _ => Err(Error::ReservedOpcode),
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Pbs => "PBS",
            Opcode::Ks => "KS",
            Opcode::MulAdd => "MULADD",
        }
    }
}

/// `aux` is the LUT address for PBS, the key-switching key for KS and the
/// second operand for MULADD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub src: u64,
    pub aux: u64,
    pub dst: u64,
    pub extract_idx: u64,
    pub imm: u64,
}

impl Instruction {
    pub fn pbs(dst: u64, src: u64, lut: u64, extract_idx: u64) -> Self {
        Self {
            opcode: Opcode::Pbs,
            src,
            aux: lut,
            dst,
            extract_idx,
            imm: 0,
        }
    }

    pub fn ks(dst: u64, src: u64, ksk: u64) -> Self {
        Self {
            opcode: Opcode::Ks,
            src,
            aux: ksk,
            dst,
            extract_idx: 0,
            imm: 0,
        }
    }

    /// `dst = imm·src + aux`.
    pub fn mul_add(dst: u64, src: u64, aux: u64, imm: u64) -> Self {
        Self {
            opcode: Opcode::MulAdd,
            src,
            aux,
            dst,
            extract_idx: 0,
            imm,
        }
    }
}

pub const OPCODE_BITS: usize = 2;
pub const ADDRESS_BITS: usize = 64;

pub fn index_bits(poly_size: usize) -> usize {
    poly_size.next_power_of_two().trailing_zeros() as usize
}

/// Bits in the base word: `2 + 3·64 + log2 N`.
pub fn base_bits(poly_size: usize) -> usize {
    OPCODE_BITS + 3 * ADDRESS_BITS + index_bits(poly_size)
}

pub fn base_bytes(poly_size: usize) -> usize {
    base_bits(poly_size).div_ceil(8)
}

pub fn encoded_len(opcode: Opcode, poly_size: usize) -> usize {
    base_bytes(poly_size) + if opcode == Opcode::MulAdd { 8 } else { 0 }
}

#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, value: u64, width: usize) {
        for i in 0..width {
            if self.bit % 8 == 0 {
                self.bytes.push(0);
            }
            if (value >> i) & 1 == 1 {
                *self.bytes.last_mut().expect("pushed") |= 1 << (self.bit % 8);
            }
            self.bit += 1;
        }
    }

    pub fn bits_written(&self) -> usize {
        self.bit
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    pub fn read(&mut self, width: usize) -> u64 {
        let mut v = 0;
        for i in 0..width {
            let b = (self.bytes[self.bit / 8] >> (self.bit % 8)) & 1;
            v |= (b as u64) << i;
            self.bit += 1;
        }
        v
    }
}

pub fn encode_instruction(ins: &Instruction, poly_size: usize) -> Result<Vec<u8>> {
    if ins.extract_idx >= poly_size as u64 {
        return Err(Error::IndexOutOfRange {
            index: ins.extract_idx as usize,
            limit: poly_size,
        });
    }
    let mut w = BitWriter::new();
    w.write(ins.opcode as u64, OPCODE_BITS);
    w.write(ins.src, ADDRESS_BITS);
    w.write(ins.aux, ADDRESS_BITS);
    w.write(ins.dst, ADDRESS_BITS);
    w.write(ins.extract_idx, index_bits(poly_size));
    let mut out = w.finish();
    if ins.opcode == Opcode::MulAdd {
        out.extend_from_slice(&ins.imm.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_instruction(bytes: &[u8], poly_size: usize) -> Result<Instruction> {
    if bytes.is_empty() {
        return Err(Error::BadInstructionLength {
            expected: base_bytes(poly_size),
            actual: 0,
        });
    }
    let opcode = Opcode::from_bits((bytes[0] & 0b11) as u64)?;
    let expected = encoded_len(opcode, poly_size);
    if bytes.len() != expected {
        return Err(Error::BadInstructionLength {
            expected,
            actual: bytes.len(),
        });
    }
    let mut r = BitReader::new(bytes);
    r.read(OPCODE_BITS);
    let src = r.read(ADDRESS_BITS);
    let aux = r.read(ADDRESS_BITS);
    let dst = r.read(ADDRESS_BITS);
    let extract_idx = r.read(index_bits(poly_size));
    let base = base_bytes(poly_size);
    let imm = if opcode == Opcode::MulAdd {
        u64::from_le_bytes(bytes[base..base + 8].try_into().expect("8 bytes"))
    } else {
        0
    };
    Ok(Instruction {
        opcode,
        src,
        aux,
        dst,
        extract_idx,
        imm,
    })
}

pub fn encode_program(program: &[Instruction], poly_size: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for ins in program {
        out.extend(encode_instruction(ins, poly_size)?);
    }
    Ok(out)
}

/// Splits a concatenated stream using each word's opcode to find its length.
pub fn decode_program(mut bytes: &[u8], poly_size: usize) -> Result<Vec<Instruction>> {
    let mut out = Vec::new();
    while !bytes.is_empty() {
        let opcode = Opcode::from_bits((bytes[0] & 0b11) as u64)?;
        let len = encoded_len(opcode, poly_size);
        if bytes.len() < len {
            return Err(Error::BadInstructionLength {
                expected: len,
                actual: bytes.len(),
            });
        }
        out.push(decode_instruction(&bytes[..len], poly_size)?);
        bytes = &bytes[len..];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn word_sizes() {
        assert_eq!(base_bits(1024), 204);
        assert_eq!(base_bytes(1024), 26);
        assert_eq!(base_bits(16384), 208);
        assert_eq!(base_bytes(16384), 26);
        assert_eq!(encoded_len(Opcode::MulAdd, 1024), 34);
    }

    #[test]
    fn zero_pbs_word() {
        let b = encode_instruction(&Instruction::pbs(0, 0, 0, 0), 1024).unwrap();
        assert_eq!(b, vec![0u8; 26]);
    }

    #[test]
    fn bit_positions() {
        let b = encode_instruction(&Instruction::ks(0, 1, 0), 1024).unwrap();
        // opcode 01, then src bit 0 at stream bit 2
        assert_eq!(b[0], 0b0000_0101);
        let b = encode_instruction(&Instruction::pbs(0, 0, 0, 1023), 1024).unwrap();
        // index occupies stream bits 194..204
        assert_eq!(b[24], 0b1111_1100);
        assert_eq!(b[25], 0b0000_1111);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            encode_instruction(&Instruction::pbs(0, 0, 0, 1024), 1024),
            Err(Error::IndexOutOfRange { .. })
        ));
        let mut b = encode_instruction(&Instruction::pbs(1, 2, 3, 4), 1024).unwrap();
        assert!(matches!(
            decode_instruction(&b[..25], 1024),
            Err(Error::BadInstructionLength { .. })
        ));
        b[0] |= 0b11;
        assert_eq!(decode_instruction(&b, 1024), Err(Error::ReservedOpcode));
        assert!(decode_instruction(&[], 1024).is_err());
        assert!(decode_program(&[0u8; 30], 1024).is_err());
    }

    #[test]
    fn program_round_trip() {
        let prog = vec![
            Instruction::pbs(10, 1, 2, 5),
            Instruction::ks(11, 10, 3),
            Instruction::mul_add(12, 11, 1, u64::MAX - 5),
        ];
        let bytes = encode_program(&prog, 1024).unwrap();
        assert_eq!(bytes.len(), 26 + 26 + 34);
        assert_eq!(decode_program(&bytes, 1024).unwrap(), prog);
        assert!(decode_program(&[], 1024).unwrap().is_empty());
    }

    fn arb_instruction(poly_size: usize) -> impl Strategy<Value = Instruction> {
        (
            0u8..3,
            any::<u64>(),
            any::<u64>(),
            any::<u64>(),
            0..poly_size as u64,
            any::<u64>(),
        )
            .prop_map(|(op, src, aux, dst, h, imm)| match op {
                0 => Instruction::pbs(dst, src, aux, h),
                1 => Instruction::ks(dst, src, aux),
                _ => Instruction::mul_add(dst, src, aux, imm),
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn round_trip_standard(ins in arb_instruction(1024)) {
            let b = encode_instruction(&ins, 1024).unwrap();
            prop_assert_eq!(decode_instruction(&b, 1024).unwrap(), ins);
        }

        #[test]
        fn round_trip_large(ins in arb_instruction(16384)) {
            let b = encode_instruction(&ins, 16384).unwrap();
            prop_assert_eq!(decode_instruction(&b, 16384).unwrap(), ins);
        }
    }
}
