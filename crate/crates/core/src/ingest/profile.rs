use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SNIFF_BYTES: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectedFormat {
    Csv,
    Json,
    Xml,
    Text,
    Binary,
}

impl DetectedFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectedFormat::Csv => "csv",
            DetectedFormat::Json => "json",
            DetectedFormat::Xml => "xml",
            DetectedFormat::Text => "text",
            DetectedFormat::Binary => "binary",
        }
    }

    pub fn class(self) -> FormatClass {
        match self {
            DetectedFormat::Csv => FormatClass::Structured,
            DetectedFormat::Json | DetectedFormat::Xml => FormatClass::SemiStructured,
            DetectedFormat::Text | DetectedFormat::Binary => FormatClass::Unstructured,
        }
    }

    fn from_extension(ext: &str) -> Option<Self> {
        let f = match ext.to_ascii_lowercase().as_str() {
            "csv" => DetectedFormat::Csv,
            "json" | "jsonl" | "ndjson" | "geojson" => DetectedFormat::Json,
            "xml" | "xsd" | "rss" | "atom" => DetectedFormat::Xml,
            "txt" | "text" | "md" | "log" | "rst" => DetectedFormat::Text,
            "mp4" | "mov" | "avi" | "mkv" | "webm" | "mp3" | "wav" | "flac" | "ogg" | "png"
            | "jpg" | "jpeg" | "gif" | "bmp" | "tif" | "tiff" | "pdf" | "zip" | "gz" | "tar"
            | "bz2" | "xz" | "7z" | "parquet" | "avro" | "orc" | "bin" | "exe" => {
                DetectedFormat::Binary
            }
            _ => return None,
        };
        Some(f)
    }
}

impl fmt::Display for DetectedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectedFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(DetectedFormat::Csv),
            "json" => Ok(DetectedFormat::Json),
            "xml" => Ok(DetectedFormat::Xml),
            "text" => Ok(DetectedFormat::Text),
            "binary" => Ok(DetectedFormat::Binary),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatClass {
    Structured,
    SemiStructured,
    Unstructured,
}

impl FormatClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FormatClass::Structured => "structured",
            FormatClass::SemiStructured => "semi-structured",
            FormatClass::Unstructured => "unstructured",
        }
    }
}

impl fmt::Display for FormatClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Filesystem-level properties of a lake file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileProfile {
    pub path: PathBuf,
    pub title: String,
    pub size_bytes: u64,
    pub modified_at: DateTime<Utc>,
    pub detected_format: DetectedFormat,
    pub format_class: FormatClass,
}

fn unreadable(path: &Path, source: std::io::Error) -> Error {
    Error::Unreadable {
        path: path.to_path_buf(),
        source,
    }
}

/// Profiles a file: extension first, then content sniffing.
pub fn profile_file(path: &Path) -> Result<FileProfile> {
    let meta = fs::metadata(path).map_err(|e| unreadable(path, e))?;
    if !meta.is_file() {
        return Err(unreadable(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a regular file"),
        ));
    }
    let abs = fs::canonicalize(path).map_err(|e| unreadable(path, e))?;
    let detected = match path
        .extension()
        .and_then(|e| e.to_str())
        .and_then(DetectedFormat::from_extension)
    {
        Some(f) => f,
        None => {
            let mut head = Vec::new();
            fs::File::open(path)
                .and_then(|f| f.take(SNIFF_BYTES).read_to_end(&mut head))
                .map_err(|e| unreadable(path, e))?;
            sniff(&head, meta.len() > SNIFF_BYTES)
        }
    };
    let modified_at = meta
        .modified()
        .map(DateTime::<Utc>::from)
        .unwrap_or_else(|_| Utc::now());
    Ok(FileProfile {
        title: abs
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        path: abs,
        size_bytes: meta.len(),
        modified_at,
        detected_format: detected,
        format_class: detected.class(),
    })
}

/// Content-based format detection. `truncated` means `head` is a prefix of a
/// longer file, so an incomplete UTF-8 sequence at the end is tolerated.
pub fn sniff(head: &[u8], truncated: bool) -> DetectedFormat {
    let text = match std::str::from_utf8(head) {
        Ok(t) => t,
        Err(e) if truncated && e.error_len().is_none() => {
            // valid up to a split character at the cut
            std::str::from_utf8(&head[..e.valid_up_to()]).unwrap_or_default()
        }
        Err(_) => return DetectedFormat::Binary,
    };
    if text.contains('\0') {
        return DetectedFormat::Binary;
    }
    let body = text.trim_start_matches('\u{feff}').trim_start();
    match body.chars().next() {
        Some('{') | Some('[') => DetectedFormat::Json,
        Some('<') => DetectedFormat::Xml,
        _ if looks_like_csv(body) => DetectedFormat::Csv,
        _ => DetectedFormat::Text,
    }
}

/// At least two non-empty lines, all with the same positive number of
/// unquoted commas. Only the first 50 lines are inspected.
fn looks_like_csv(text: &str) -> bool {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).take(50);
    let Some(first) = lines.next() else {
        return false;
    };
    let expected = unquoted_commas(first);
    if expected == 0 {
        return false;
    }
    let mut others = 0;
    for line in lines {
        if unquoted_commas(line) != expected {
            return false;
        }
        others += 1;
    }
    others >= 1
}

fn unquoted_commas(line: &str) -> usize {
    let mut quoted = false;
    line.chars()
        .filter(|c| {
            if *c == '"' {
                quoted = !quoted;
            }
            *c == ',' && !quoted
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn format_class_is_a_function_of_format() {
        use DetectedFormat::*;
        assert_eq!(Csv.class(), FormatClass::Structured);
        assert_eq!(Json.class(), FormatClass::SemiStructured);
        assert_eq!(Xml.class(), FormatClass::SemiStructured);
        assert_eq!(Text.class(), FormatClass::Unstructured);
        assert_eq!(Binary.class(), FormatClass::Unstructured);
    }

    #[test]
    fn sniffing() {
        assert_eq!(sniff(b"  {\"a\": 1}", false), DetectedFormat::Json);
        assert_eq!(sniff(b"[1,2]", false), DetectedFormat::Json);
        assert_eq!(sniff(b"<?xml version='1.0'?><a/>", false), DetectedFormat::Xml);
        assert_eq!(sniff(b"a,b\n1,2\n3,4\n", false), DetectedFormat::Csv);
        assert_eq!(sniff(b"a,b\n1,2,3\n", false), DetectedFormat::Text);
        assert_eq!(sniff(b"\"x,y\",b\n1,2\n", false), DetectedFormat::Csv);
        assert_eq!(sniff(b"just words, here", false), DetectedFormat::Text);
        assert_eq!(sniff(b"", false), DetectedFormat::Text);
        assert_eq!(sniff(&[0xff, 0xfe, 0x00, 0x81], false), DetectedFormat::Binary);
        // cut in the middle of a two-byte character
        assert_eq!(sniff("hello é".as_bytes()[..7].as_ref(), true), DetectedFormat::Text);
    }

    #[test]
    fn random_bytes_are_binary() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let bytes: Vec<u8> = (0..256).map(|_| rng.gen()).collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("blob");
            fs::File::create(&path).unwrap().write_all(&bytes).unwrap();
            let p = profile_file(&path).unwrap();
            assert_eq!(p.detected_format, DetectedFormat::Binary);
            assert_eq!(p.format_class, FormatClass::Unstructured);
        }
    }

    #[test]
    fn profiles_by_extension_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let xml = dir.path().join("products.xml");
        fs::write(&xml, "<products/>").unwrap();
        let p = profile_file(&xml).unwrap();
        assert_eq!(p.detected_format, DetectedFormat::Xml);
        assert_eq!(p.format_class, FormatClass::SemiStructured);
        assert_eq!(p.title, "products.xml");
        assert_eq!(p.size_bytes, 11);
        assert!(p.path.is_absolute());
        assert_eq!(profile_file(&xml).unwrap(), p);

        let empty = dir.path().join("empty");
        fs::write(&empty, "").unwrap();
        let p = profile_file(&empty).unwrap();
        assert_eq!((p.detected_format, p.size_bytes), (DetectedFormat::Text, 0));

        assert!(matches!(
            profile_file(&dir.path().join("missing")),
            Err(Error::Unreadable { .. })
        ));
    }
}
