//! On-disk trace formats.
//!
//! CSV: header `step,memory_state_id,bin_a,bin_b,chosen`, one row per ball.
//!
//! Binary: the 8-byte magic `BLSTRACE`, a little-endian `u32` version (1),
//! a `u32` of zero padding, a `u64` record count, then fixed 28-byte
//! records: `step: u64, memory_state_id: u64, bin_a: u32, bin_b: u32,
//! chosen: u32`, all little-endian.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sim::StepRecord;

const MAGIC: &[u8; 8] = b"BLSTRACE";
const VERSION: u32 = 1;
const RECORD_BYTES: usize = 28;

pub fn write_csv<W: Write>(records: &[StepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["step", "memory_state_id", "bin_a", "bin_b", "chosen"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_binary<W: Write>(records: &[StepRecord], mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    out.write_all(&(records.len() as u64).to_le_bytes())?;
    let mut buf = [0u8; RECORD_BYTES];
    for r in records {
        buf[0..8].copy_from_slice(&r.step.to_le_bytes());
        buf[8..16].copy_from_slice(&r.memory_state_id.to_le_bytes());
        buf[16..20].copy_from_slice(&r.bin_a.to_le_bytes());
        buf[20..24].copy_from_slice(&r.bin_b.to_le_bytes());
        buf[24..28].copy_from_slice(&r.chosen.to_le_bytes());
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<StepRecord>> {
    let mut header = [0u8; 24];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::MalformedTrace("truncated header".into()))?;
    if &header[0..8] != MAGIC {
        return Err(Error::MalformedTrace("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::MalformedTrace(format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(header[16..24].try_into().unwrap());
    let mut records = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut buf = [0u8; RECORD_BYTES];
    for i in 0..count {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::MalformedTrace(format!("truncated at record {i}")))?;
        records.push(StepRecord {
            step: u64::from_le_bytes(buf[0..8].try_into().unwrap()),
            memory_state_id: u64::from_le_bytes(buf[8..16].try_into().unwrap()),
            bin_a: u32::from_le_bytes(buf[16..20].try_into().unwrap()),
            bin_b: u32::from_le_bytes(buf[20..24].try_into().unwrap()),
            chosen: u32::from_le_bytes(buf[24..28].try_into().unwrap()),
        });
    }
    Ok(records)
}

/// Read either format, sniffing the binary magic.
pub fn read_any(bytes: &[u8]) -> Result<Vec<StepRecord>> {
    if bytes.starts_with(MAGIC) {
        read_binary(bytes)
    } else {
        read_csv(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> impl Strategy<Value = StepRecord> {
        (any::<u64>(), any::<u64>(), any::<u32>(), any::<u32>(), any::<u32>()).prop_map(
            |(step, memory_state_id, bin_a, bin_b, chosen)| StepRecord {
                step,
                memory_state_id,
                bin_a,
                bin_b,
                chosen,
            },
        )
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(records in proptest::collection::vec(record(), 0..40)) {
            let mut bin = Vec::new();
            write_binary(&records, &mut bin).unwrap();
            prop_assert_eq!(bin.len(), 24 + 28 * records.len());
            prop_assert_eq!(&read_any(&bin).unwrap(), &records);

            let mut text = Vec::new();
            write_csv(&records, &mut text).unwrap();
            prop_assert_eq!(&read_any(&text).unwrap(), &records);
        }
    }

    #[test]
    fn csv_header() {
        let mut text = Vec::new();
        write_csv(&[], &mut text).unwrap();
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "step,memory_state_id,bin_a,bin_b,chosen\n"
        );
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let rec = StepRecord {
            step: 0,
            memory_state_id: 0,
            bin_a: 1,
            bin_b: 2,
            chosen: 1,
        };
        let mut bin = Vec::new();
        write_binary(&[rec, rec], &mut bin).unwrap();
        bin.truncate(bin.len() - 3);
        assert!(matches!(read_binary(&bin[..]), Err(Error::MalformedTrace(_))));
    }
}
