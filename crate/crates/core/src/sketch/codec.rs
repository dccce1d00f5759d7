use super::registers::PackedRegisters;
use super::Sketch;
use crate::error::{Error, Result};
use crate::params::Params;

/// First byte of a serialized sketch (`'X'`).
pub const MAGIC: u8 = 0x58;

const HEADER_LEN: usize = 4;

pub(super) fn encode(sketch: &Sketch) -> Vec<u8> {
    let params = sketch.params();
    let mut out = Vec::with_capacity(HEADER_LEN + params.register_bytes());
    out.extend_from_slice(&[MAGIC, params.t(), params.d(), params.p()]);
    sketch.packed().write_bytes(&mut out);
    out
}

pub(super) fn decode(bytes: &[u8]) -> Result<Sketch> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if bytes[0] != MAGIC {
        return Err(Error::BadMagic {
            expected: MAGIC,
            found: bytes[0],
        });
    }
    let params = Params::new_unrestricted(bytes[1], bytes[2], bytes[3])?;
    let payload = &bytes[HEADER_LEN..];
    let expected = params.register_bytes();
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected: HEADER_LEN + expected,
            found: bytes.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    let registers =
        PackedRegisters::from_bytes(params.num_registers(), params.register_bits(), payload)
            .ok_or_else(|| Error::Domain("nonzero padding bits after last register".into()))?;
    if let Some((index, value)) = registers
        .iter()
        .enumerate()
        .find(|&(_, r)| !params.is_valid_register(r))
    {
        return Err(Error::InvalidRegister { index, value });
    }
    Ok(Sketch::from_parts(params, registers))
}
