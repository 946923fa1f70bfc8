//! Binary container for precomputed indices.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "BIPPRIDX" | version u32 | n u64 | m u64 | graph checksum u64 | sections u32
//! per section:
//!   name (u32 length + UTF-8) | kind u8 | alpha f64 | r_max f64
//!   targets (u64 count + u32 ids)
//!   per target: push_count u64 | touched_mass u64 | r_max_achieved f64 | nnz u64
//!   groups (u64 count), each: coordinate u64 | u32 length | u32 target slots | f64 values
//!   sampler sections only: y^T value f64 per group
//! sha256 of everything above (32 bytes)
//! ```
//!
//! Alias tables are not stored; they are rebuilt when a sampler section is
//! loaded.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphFingerprint, NodeId};
use crate::grouped::{CoordinateGroups, GroupedIndex, TargetStats};
use crate::sampler::SamplerIndex;

const MAGIC: &[u8; 8] = b"BIPPRIDX";
pub const FORMAT_VERSION: u32 = 1;
const KIND_GROUPED: u8 = 1;
const KIND_SAMPLER: u8 = 2;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum StoredIndex {
    Grouped(GroupedIndex),
    Sampler(SamplerIndex),
}

impl StoredIndex {
    pub fn grouped(&self) -> &GroupedIndex {
        match self {
            StoredIndex::Grouped(g) => g,
            StoredIndex::Sampler(s) => s.grouped(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            StoredIndex::Grouped(_) => "grouped",
            StoredIndex::Sampler(_) => "sampling",
        }
    }
}

/// Named indices built against one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexContainer {
    pub fingerprint: GraphFingerprint,
    pub sections: Vec<(String, StoredIndex)>,
}

impl IndexContainer {
    pub fn new(g: &Graph) -> Self {
        Self {
            fingerprint: g.fingerprint(),
            sections: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, index: StoredIndex) {
        self.sections.push((name.into(), index));
    }

    pub fn get(&self, name: &str) -> Option<&StoredIndex> {
        self.sections.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u32::<LE>(FORMAT_VERSION).unwrap();
        out.write_u64::<LE>(self.fingerprint.n).unwrap();
        out.write_u64::<LE>(self.fingerprint.m).unwrap();
        out.write_u64::<LE>(self.fingerprint.checksum).unwrap();
        out.write_u32::<LE>(self.sections.len() as u32).unwrap();
        for (name, index) in &self.sections {
            write_section(&mut out, name, index);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Decodes a container and checks that it was built for `g`.
    pub fn from_bytes(bytes: &[u8], g: &Graph) -> Result<Self> {
        let container = Self::decode(bytes)?;
        if container.fingerprint != g.fingerprint() {
            return Err(Error::FingerprintMismatch);
        }
        Ok(container)
    }

    pub fn read_from(mut r: impl Read, g: &Graph) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, g)
    }

    pub fn load(path: impl AsRef<Path>, g: &Graph) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?, g)
    }

    /// Decodes without a graph; the fingerprint is returned unchecked.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + DIGEST_LEN || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("not an index container".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Checksum);
        }
        let mut r = Reader(Cursor::new(&body[MAGIC.len()..]));
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let fingerprint = GraphFingerprint {
            n: r.u64()?,
            m: r.u64()?,
            checksum: r.u64()?,
        };
        let n = usize::try_from(fingerprint.n).map_err(|_| Error::Format("node count too large".into()))?;
        let count = r.u32()?;
        let mut sections = Vec::new();
        for _ in 0..count {
            sections.push(read_section(&mut r, n)?);
        }
        if r.remaining() != 0 {
            return Err(Error::Format("trailing bytes after last section".into()));
        }
        Ok(Self { fingerprint, sections })
    }
}

fn write_section(out: &mut Vec<u8>, name: &str, index: &StoredIndex) {
    let g = index.grouped();
    out.write_u32::<LE>(name.len() as u32).unwrap();
    out.extend_from_slice(name.as_bytes());
    out.write_u8(match index {
        StoredIndex::Grouped(_) => KIND_GROUPED,
        StoredIndex::Sampler(_) => KIND_SAMPLER,
    })
    .unwrap();
    out.write_f64::<LE>(g.alpha).unwrap();
    out.write_f64::<LE>(g.r_max).unwrap();
    out.write_u64::<LE>(g.targets.len() as u64).unwrap();
    for &t in &g.targets {
        out.write_u32::<LE>(t).unwrap();
    }
    for s in &g.stats {
        out.write_u64::<LE>(s.push_count).unwrap();
        out.write_u64::<LE>(s.touched_mass).unwrap();
        out.write_f64::<LE>(s.r_max_achieved).unwrap();
        out.write_u64::<LE>(s.nnz).unwrap();
    }
    let groups = &g.groups;
    out.write_u64::<LE>(groups.len() as u64).unwrap();
    for i in 0..groups.len() {
        let (slots, values) = groups.group(i);
        out.write_u64::<LE>(groups.coords[i]).unwrap();
        out.write_u32::<LE>(slots.len() as u32).unwrap();
        for &s in slots {
            out.write_u32::<LE>(s).unwrap();
        }
        for &x in values {
            out.write_f64::<LE>(x).unwrap();
        }
    }
    if let StoredIndex::Sampler(s) = index {
        for &x in &s.aggregate {
            out.write_f64::<LE>(x).unwrap();
        }
    }
}

fn read_section(r: &mut Reader, n: usize) -> Result<(String, StoredIndex)> {
    let name_len = r.len32(1)?;
    let name = String::from_utf8(r.bytes(name_len)?).map_err(|_| Error::Format("section name is not UTF-8".into()))?;
    let kind = r.u8()?;
    let alpha = r.f64()?;
    let r_max = r.f64()?;
    let t_count = r.len64(4 + 32)?;
    let mut targets: Vec<NodeId> = Vec::with_capacity(t_count);
    for _ in 0..t_count {
        let t = r.u32()?;
        if t as usize >= n {
            return Err(Error::Format(format!("target {t} out of range")));
        }
        targets.push(t);
    }
    if targets.is_empty() || targets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Format("target list must be nonempty and sorted".into()));
    }
    let mut stats = Vec::with_capacity(t_count);
    for &target in &targets {
        stats.push(TargetStats {
            target,
            push_count: r.u64()?,
            touched_mass: r.u64()?,
            r_max_achieved: r.f64()?,
            nnz: r.u64()?,
        });
    }
    let g_count = r.len64(12)?;
    let mut groups = CoordinateGroups {
        coords: Vec::with_capacity(g_count),
        offsets: Vec::with_capacity(g_count + 1),
        slots: Vec::new(),
        values: Vec::new(),
    };
    groups.offsets.push(0);
    for _ in 0..g_count {
        groups.coords.push(r.u64()?);
        let len = r.len32(12)?;
        for _ in 0..len {
            groups.slots.push(r.u32()?);
        }
        for _ in 0..len {
            groups.values.push(r.f64()?);
        }
        groups.offsets.push(groups.slots.len());
    }
    groups.validate(n, targets.len())?;
    let grouped = GroupedIndex {
        n,
        alpha,
        r_max,
        targets,
        stats,
        groups,
    };
    let index = match kind {
        KIND_GROUPED => StoredIndex::Grouped(grouped),
        KIND_SAMPLER => {
            let mut stored = Vec::with_capacity(g_count);
            for _ in 0..g_count {
                stored.push(r.f64()?);
            }
            let sampler = SamplerIndex::from_grouped(grouped)?;
            if stored.iter().map(|x| x.to_bits()).ne(sampler.aggregate.iter().map(|x| x.to_bits())) {
                return Err(Error::Format("aggregate vector disagrees with groups".into()));
            }
            StoredIndex::Sampler(sampler)
        }
        other => return Err(Error::Format(format!("unknown index kind {other}"))),
    };
    Ok((name, index))
}

struct Reader<'a>(Cursor<&'a [u8]>);

impl Reader<'_> {
    fn remaining(&self) -> usize {
        self.0.get_ref().len() - self.0.position() as usize
    }

    fn truncated(_: std::io::Error) -> Error {
        Error::Format("container is truncated".into())
    }

    fn u8(&mut self) -> Result<u8> {
        self.0.read_u8().map_err(Self::truncated)
    }

    fn u32(&mut self) -> Result<u32> {
        self.0.read_u32::<LE>().map_err(Self::truncated)
    }

    fn u64(&mut self) -> Result<u64> {
        self.0.read_u64::<LE>().map_err(Self::truncated)
    }

    fn f64(&mut self) -> Result<f64> {
        self.0.read_f64::<LE>().map_err(Self::truncated)
    }

    /// Reads a `u32` count and checks that `count * min_item` bytes remain,
    /// so a corrupt length cannot trigger a huge allocation.
    fn len32(&mut self, min_item: usize) -> Result<usize> {
        let count = self.u32()? as u64;
        self.check_len(count, min_item)
    }

    fn len64(&mut self, min_item: usize) -> Result<usize> {
        let count = self.u64()?;
        self.check_len(count, min_item)
    }

    fn check_len(&self, count: u64, min_item: usize) -> Result<usize> {
        match count.checked_mul(min_item as u64) {
            Some(bytes) if bytes <= self.remaining() as u64 => Ok(count as usize),
            _ => Err(Error::Format("container is truncated".into())),
        }
    }

    fn bytes(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0; len];
        self.0.read_exact(&mut buf).map_err(Self::truncated)?;
        Ok(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticModel};
    use crate::grouped::build_grouped;
    use crate::sampler::build_sampler_index;

    fn fixture() -> (Graph, IndexContainer) {
        let g = generate_synthetic(60, SyntheticModel::ErdosRenyi { p: 0.08 }, 7).unwrap();
        let mut c = IndexContainer::new(&g);
        c.push("alpha", StoredIndex::Grouped(build_grouped(&g, 0.2, &[3, 9, 40], 0.01).unwrap()));
        c.push("beta", StoredIndex::Sampler(build_sampler_index(&g, 0.2, &[5], 0.02).unwrap()));
        (g, c)
    }

    #[test]
    fn round_trip() {
        let (g, c) = fixture();
        let bytes = c.to_bytes();
        let back = IndexContainer::from_bytes(&bytes, &g).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes(), bytes);
        assert!(back.get("beta").is_some() && back.get("gamma").is_none());
    }

    #[test]
    fn rebuild_is_byte_identical() {
        assert_eq!(fixture().1.to_bytes(), fixture().1.to_bytes());
    }

    #[test]
    fn corruption_is_detected() {
        let (g, c) = fixture();
        let mut bytes = c.to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x10;
        assert!(matches!(IndexContainer::from_bytes(&bytes, &g), Err(Error::Checksum)));
        assert!(matches!(IndexContainer::from_bytes(&bytes[..20], &g), Err(Error::Format(_))));
        assert!(matches!(IndexContainer::from_bytes(b"garbage", &g), Err(Error::Format(_))));
    }

    #[test]
    fn other_graph_is_rejected() {
        let (_, c) = fixture();
        let other = generate_synthetic(60, SyntheticModel::ErdosRenyi { p: 0.08 }, 8).unwrap();
        assert!(matches!(
            IndexContainer::from_bytes(&c.to_bytes(), &other),
            Err(Error::FingerprintMismatch)
        ));
    }

    #[test]
    fn bad_body_with_valid_digest_is_format_error() {
        let (g, c) = fixture();
        let mut bytes = c.to_bytes();
        bytes.truncate(bytes.len() - DIGEST_LEN);
        // Claim one more section than is present.
        let pos = MAGIC.len() + 4 + 24;
        bytes[pos] += 1;
        let digest = Sha256::digest(&bytes);
        bytes.extend_from_slice(&digest);
        assert!(matches!(IndexContainer::from_bytes(&bytes, &g), Err(Error::Format(_))));
    }
}
