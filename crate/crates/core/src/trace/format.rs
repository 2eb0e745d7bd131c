//! Binary trace file format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic "EHCT" | version 0x01 | record count (u64) | instruction count (u64)
//! then per record: seq (u64) | pc (u64) | addr (u64) | core (u8) | kind (u8)
//! ```

use super::{AccessKind, AccessRecord, Trace, TraceError};

pub const MAGIC: [u8; 4] = *b"EHCT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 8 + 8;
pub const RECORD_LEN: usize = 8 + 8 + 8 + 1 + 1;

pub fn write_trace(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * trace.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(trace.len() as u64).to_le_bytes());
    out.extend_from_slice(&trace.instruction_count.to_le_bytes());
    for r in &trace.records {
        out.extend_from_slice(&r.seq.to_le_bytes());
        out.extend_from_slice(&r.pc.to_le_bytes());
        out.extend_from_slice(&r.addr.to_le_bytes());
        out.push(r.core);
        out.push(r.kind.to_byte());
    }
    out
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&bytes[at..at + 8]);
    u64::from_le_bytes(buf)
}

pub fn read_trace(bytes: &[u8]) -> Result<Trace, TraceError> {
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(TraceError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        // A bare magic with a cut-off header cannot declare anything.
        return Err(TraceError::Truncated {
            declared: 0,
            available: 0,
        });
    }
    if bytes[4] != VERSION {
        return Err(TraceError::UnsupportedVersion(bytes[4]));
    }
    let declared = u64_at(bytes, 5);
    let instruction_count = u64_at(bytes, 13);

    let body = &bytes[HEADER_LEN..];
    let available = (body.len() / RECORD_LEN) as u64;
    if declared > available {
        return Err(TraceError::Truncated { declared, available });
    }
    let used = declared as usize * RECORD_LEN;
    if body.len() > used {
        return Err(TraceError::TrailingBytes(body.len() - used));
    }

    let records = body
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, rec)| {
            let kind = AccessKind::from_byte(rec[25]).ok_or(TraceError::BadKind {
                index: i as u64,
                byte: rec[25],
            })?;
            Ok(AccessRecord {
                seq: u64_at(rec, 0),
                pc: u64_at(rec, 8),
                addr: u64_at(rec, 16),
                core: rec[24],
                kind,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Trace {
        records,
        instruction_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: u64) -> Trace {
        Trace::from_records(
            (0..n)
                .map(|i| AccessRecord {
                    seq: i,
                    core: (i % 3) as u8,
                    pc: 0x4000 + i,
                    addr: 0x1000 * i,
                    kind: if i % 2 == 0 {
                        AccessKind::Read
                    } else {
                        AccessKind::Write
                    },
                })
                .collect(),
        )
    }

    #[test]
    fn empty_trace_is_header_only() {
        let bytes = write_trace(&Trace::default());
        assert_eq!(bytes.len(), 21);
        assert_eq!(&bytes[..5], &[0x45, 0x48, 0x43, 0x54, 0x01]);
        let back = read_trace(&bytes).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn one_record_layout() {
        let t = Trace::from_records(vec![AccessRecord {
            seq: 0x0102,
            core: 9,
            pc: 0xAABB,
            addr: 0xCCDD,
            kind: AccessKind::Write,
        }]);
        let bytes = write_trace(&t);
        assert_eq!(bytes.len(), 21 + 26);
        assert_eq!(&bytes[5..13], &1u64.to_le_bytes());
        assert_eq!(&bytes[13..21], &0x0102u64.to_le_bytes());
        assert_eq!(&bytes[21..29], &0x0102u64.to_le_bytes());
        assert_eq!(&bytes[29..37], &0xAABBu64.to_le_bytes());
        assert_eq!(&bytes[37..45], &0xCCDDu64.to_le_bytes());
        assert_eq!(bytes[45], 9);
        assert_eq!(bytes[46], 1);
    }

    #[test]
    fn three_record_round_trip() {
        let t = sample(3);
        assert_eq!(read_trace(&write_trace(&t)).unwrap(), t);
    }

    #[test]
    fn truncated_body() {
        let mut bytes = write_trace(&sample(10));
        bytes.truncate(bytes.len() - RECORD_LEN);
        assert_eq!(
            read_trace(&bytes),
            Err(TraceError::Truncated {
                declared: 10,
                available: 9
            })
        );
    }

    #[test]
    fn header_errors() {
        assert_eq!(read_trace(b"NOPE\x01"), Err(TraceError::BadMagic));
        assert_eq!(read_trace(b""), Err(TraceError::BadMagic));
        let mut bytes = write_trace(&sample(1));
        bytes[4] = 2;
        assert_eq!(read_trace(&bytes), Err(TraceError::UnsupportedVersion(2)));
        let mut bytes = write_trace(&sample(1));
        bytes[46] = 5;
        assert_eq!(read_trace(&bytes), Err(TraceError::BadKind { index: 0, byte: 5 }));
        let mut bytes = write_trace(&sample(1));
        bytes.push(0);
        assert_eq!(read_trace(&bytes), Err(TraceError::TrailingBytes(1)));
    }

    proptest! {
        #[test]
        fn round_trip(recs in prop::collection::vec(
            (any::<u64>(), any::<u8>(), any::<u64>(), any::<u64>(), any::<bool>()), 0..64),
            icount in any::<u64>())
        {
            let records = recs
                .into_iter()
                .map(|(seq, core, pc, addr, w)| AccessRecord {
                    seq, core, pc, addr,
                    kind: if w { AccessKind::Write } else { AccessKind::Read },
                })
                .collect();
            let t = Trace { records, instruction_count: icount };
            prop_assert_eq!(read_trace(&write_trace(&t)).unwrap(), t);
        }
    }
}
