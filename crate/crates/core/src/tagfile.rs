//! Time-tag files. Both formats carry a provenance header (seed, scenario
//! hash, duration and the full scenario) followed by `(channel, timestamp_ps)`
//! records ordered by timestamp, then channel.
//!
//! Text: `#`-prefixed `key: value` header lines, then `channel\ttimestamp_ps`.
//! Binary: magic `QDTAGS01`, u32 LE header length, header JSON, then 9-byte
//! records (u8 channel, i64 LE timestamp).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sim::TimeTagStream;

const MAGIC: &[u8; 8] = b"QDTAGS01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagFileHeader {
    pub seed: u64,
    pub scenario_hash: String,
    /// s.
    pub duration: f64,
    /// Canonical scenario JSON, enough to regenerate the file.
    pub scenario: String,
}

impl TagFileHeader {
    pub fn for_scenario(scenario: &Scenario, duration: f64) -> Self {
        Self {
            seed: scenario.seed,
            scenario_hash: scenario.hash(),
            duration,
            scenario: scenario.canonical_json(),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::from_json(&self.scenario)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagFormat {
    Text,
    Binary,
}

impl TagFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("qdt") => TagFormat::Binary,
            _ => TagFormat::Text,
        }
    }
}

/// Merged record order: timestamp, then channel.
fn records(streams: &[&TimeTagStream]) -> Vec<(i64, u8)> {
    let mut recs: Vec<(i64, u8)> = streams
        .iter()
        .flat_map(|s| s.tags.iter().map(move |&t| (t, s.channel)))
        .collect();
    recs.sort_unstable();
    recs
}

pub fn write_text<W: Write>(header: &TagFileHeader, streams: &[&TimeTagStream], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# qdemux time tags")?;
    writeln!(w, "# seed: {}", header.seed)?;
    writeln!(w, "# scenario_hash: {}", header.scenario_hash)?;
    writeln!(w, "# duration_s: {:e}", header.duration)?;
    writeln!(w, "# scenario: {}", header.scenario)?;
    writeln!(w, "channel\ttimestamp_ps")?;
    for (t, c) in records(streams) {
        writeln!(w, "{c}\t{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(header: &TagFileHeader, streams: &[&TimeTagStream], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    let json = serde_json::to_vec(header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    for (t, c) in records(streams) {
        w.write_all(&[c])?;
        w.write_all(&t.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, header: &TagFileHeader, streams: &[&TimeTagStream]) -> Result<()> {
    let f = File::create(path)?;
    match TagFormat::from_path(path) {
        TagFormat::Text => write_text(header, streams, f),
        TagFormat::Binary => write_binary(header, streams, f),
    }
}

/// Tag file contents: header plus one stream per channel present.
#[derive(Debug, Clone, PartialEq)]
pub struct TagFile {
    pub header: TagFileHeader,
    pub streams: BTreeMap<u8, TimeTagStream>,
}

impl TagFile {
    /// Stream of `channel`, empty if the channel has no tags.
    pub fn channel(&self, channel: u8) -> TimeTagStream {
        self.streams.get(&channel).cloned().unwrap_or(TimeTagStream {
            channel,
            tags: Vec::new(),
            duration: self.header.duration,
        })
    }
}

fn assemble(header: TagFileHeader, recs: Vec<(u8, i64)>) -> Result<TagFile> {
    let mut per: BTreeMap<u8, Vec<i64>> = BTreeMap::new();
    for (c, t) in recs {
        per.entry(c).or_default().push(t);
    }
    let mut streams = BTreeMap::new();
    for (c, tags) in per {
        streams.insert(c, TimeTagStream::new(c, tags, header.duration)?);
    }
    Ok(TagFile { header, streams })
}

pub fn read_text<R: Read>(r: R) -> Result<TagFile> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut recs = Vec::new();
    for (n, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ") {
                fields.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.is_empty() || line.starts_with("channel") {
            continue;
        }
        let bad = || Error::Data(format!("line {}: expected `channel<TAB>timestamp_ps`", n + 1));
        let (c, t) = line.split_once('\t').ok_or_else(bad)?;
        recs.push((c.trim().parse::<u8>().map_err(|_| bad())?, t.trim().parse::<i64>().map_err(|_| bad())?));
    }
    let get = |k: &str| {
        fields
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Data(format!("tag file header lacks `{k}`")))
    };
    let header = TagFileHeader {
        seed: get("seed")?.parse().map_err(|_| Error::Data("bad seed".into()))?,
        scenario_hash: get("scenario_hash")?,
        duration: get("duration_s")?.parse().map_err(|_| Error::Data("bad duration".into()))?,
        scenario: get("scenario")?,
    };
    assemble(header, recs)
}

pub fn read_binary<R: Read>(r: R) -> Result<TagFile> {
    let mut r = BufReader::new(r);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("not a binary tag file".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: TagFileHeader = serde_json::from_slice(&json)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 9 != 0 {
        return Err(Error::Data("truncated tag record".into()));
    }
    let recs = body
        .chunks_exact(9)
        .map(|b| (b[0], i64::from_le_bytes(b[1..9].try_into().unwrap())))
        .collect();
    assemble(header, recs)
}

pub fn read_file(path: &Path) -> Result<TagFile> {
    let f = File::open(path)?;
    match TagFormat::from_path(path) {
        TagFormat::Text => read_text(f),
        TagFormat::Binary => read_binary(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (TagFileHeader, TimeTagStream, TimeTagStream) {
        let header = TagFileHeader::for_scenario(&Scenario::default(), 1.25e-3);
        let a = TimeTagStream::new(0, vec![-3, 10, 10, 400], 1.25e-3).unwrap();
        let b = TimeTagStream::new(1, vec![5, 10, 9_000_000_000_000], 1.25e-3).unwrap();
        (header, a, b)
    }

    #[test]
    fn text_round_trip() {
        let (h, a, b) = sample();
        let mut buf = Vec::new();
        write_text(&h, &[&a, &b], &mut buf).unwrap();
        let f = read_text(buf.as_slice()).unwrap();
        assert_eq!(f.header, h);
        assert_eq!(f.channel(0), a);
        assert_eq!(f.channel(1), b);
        assert!(f.channel(2).is_empty());
        assert_eq!(f.header.scenario().unwrap(), Scenario::default());
    }

    #[test]
    fn binary_round_trip() {
        let (h, a, b) = sample();
        let mut buf = Vec::new();
        write_binary(&h, &[&a, &b], &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + serde_json::to_vec(&h).unwrap().len() + 7 * 9);
        let f = read_binary(buf.as_slice()).unwrap();
        assert_eq!(f.header, h);
        assert_eq!(f.channel(0), a);
        assert_eq!(f.channel(1), b);
    }

    #[test]
    fn records_are_time_ordered() {
        let (h, a, b) = sample();
        let mut buf = Vec::new();
        write_text(&h, &[&a, &b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows[..4], ["0\t-3", "1\t5", "0\t10", "0\t10"]);
    }

    #[test]
    fn malformed_input() {
        assert!(read_text("# seed: 1\n0\tx\n".as_bytes()).is_err());
        assert!(read_text("0\t1\n".as_bytes()).is_err());
        assert!(read_binary(&b"NOTATAGF"[..]).is_err());
    }
}
