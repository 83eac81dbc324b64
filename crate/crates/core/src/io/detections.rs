use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::risk::Detection;

/// Parse newline-delimited detection records; blank lines are skipped.
pub fn parse_detections(text: &str, name: &str) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let d: Detection = serde_json::from_str(line).map_err(|e| Error::parse(name, n + 1, e.to_string()))?;
        d.validate().map_err(|m| Error::parse(name, n + 1, m))?;
        out.push(d);
    }
    Ok(out)
}

pub fn format_detections(dets: &[Detection]) -> String {
    let mut out = String::new();
    for d in dets {
        out.push_str(&serde_json::to_string(d).expect("detections serialize"));
        out.push('\n');
    }
    out
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, &path.display().to_string())
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    fs::write(path, format_detections(dets)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_errors() {
        let text = "{\"frame\":0,\"class\":\"car\",\"score\":0.9,\"bbox\":[1.0,2.0,30.5,40.0]}\n\
                    {\"frame\":5,\"class\":\"person\",\"score\":0.25,\"bbox\":[0.0,0.0,1.0,1.0]}\n";
        let d = parse_detections(text, "m").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(format_detections(&d), text);
        let bad = "{\"frame\":0,\"class\":\"car\",\"score\":1.5,\"bbox\":[1,2,3,4]}\n";
        match parse_detections(&format!("\n{bad}"), "m") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_detections("{\"frame\":0}", "m").is_err());
    }
}
