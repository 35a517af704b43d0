use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::PcmBuffer;

fn spec(sample_rate: u32) -> WavSpec {
    WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    }
}

fn to_i16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16
}

/// 16-bit mono little-endian RIFF/WAVE bytes.
pub fn wav_bytes(buffer: &PcmBuffer) -> Vec<u8> {
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cursor, spec(buffer.sample_rate)).expect("in-memory writer");
        for &x in &buffer.samples {
            w.write_sample(to_i16(x)).expect("in-memory write");
        }
        w.finalize().expect("in-memory finalize");
    }
    cursor.into_inner()
}

pub fn write_wav(buffer: &PcmBuffer, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, wav_bytes(buffer))
}

pub fn read_wav(path: &Path) -> Result<PcmBuffer, hound::Error> {
    let mut r = WavReader::open(path)?;
    let spec = r.spec();
    let samples = r
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / i16::MAX as f64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PcmBuffer::new(samples, spec.sample_rate))
}
