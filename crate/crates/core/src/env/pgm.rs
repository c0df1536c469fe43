//! Plain-text PGM (P2) dump of rendered images, for eyeballing a sensor's
//! view without pulling in an image stack.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub fn write_pgm<W: Write>(mut out: W, cols: usize, rows: usize, values: &[u8]) -> Result<()> {
    assert_eq!(values.len(), cols * rows, "pixel buffer shape");
    writeln!(out, "P2")?;
    writeln!(out, "{cols} {rows}")?;
    writeln!(out, "255")?;
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn save_pgm(path: &Path, cols: usize, rows: usize, values: &[u8]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_pgm(std::io::BufWriter::new(file), cols, rows, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_two_by_two() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 2, 2, &[0, 128, 255, 7]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "P2\n2 2\n255\n0 128\n255 7\n");
    }

    #[test]
    fn file_roundtrip_parses_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("view.pgm");
        let values = [10u8, 20, 30, 40, 50, 60];
        save_pgm(&path, 3, 2, &values).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut tokens = text.split_whitespace();
        assert_eq!(tokens.next(), Some("P2"));
        let cols: usize = tokens.next().unwrap().parse().unwrap();
        let rows: usize = tokens.next().unwrap().parse().unwrap();
        let max: usize = tokens.next().unwrap().parse().unwrap();
        assert_eq!((cols, rows, max), (3, 2, 255));
        let parsed: Vec<u8> = tokens.map(|t| t.parse().unwrap()).collect();
        assert_eq!(parsed, values);
    }
}
