use std::fs;
use std::path::Path;

use crate::behavior::{Mode, Segment, SensorSample, SensorStream};
use crate::error::{Error, Result};

pub const SENSOR_HEADER: [&str; 11] = ["t", "ax", "ay", "az", "gx", "gy", "gz", "speed", "lat", "lon", "acc"];
pub const LABEL_HEADER: [&str; 3] = ["start", "end", "mode"];

fn check_header(rdr: &mut csv::Reader<&[u8]>, expect: &[&str], name: &str) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::parse(name, 1, e.to_string()))?;
    if header.iter().ne(expect.iter().copied()) {
        return Err(Error::parse(
            name,
            1,
            format!("expected header {:?}, found {:?}", expect.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn record_line(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

/// Parse a sensor log. Timestamps must strictly increase and every field
/// must be a finite number.
pub fn parse_sensor_csv(text: &str, name: &str) -> Result<SensorStream> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    check_header(&mut rdr, &SENSOR_HEADER, name)?;
    let mut samples: Vec<SensorSample> = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(n + 2, |p| p.line() as usize);
            Error::parse(name, line, e.to_string())
        })?;
        let line = record_line(&rec, n + 2);
        let mut v = [0.0; 11];
        for (k, field) in rec.iter().enumerate() {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::parse(name, line, format!("column {}: not a number: {field:?}", SENSOR_HEADER[k])))?;
            if !x.is_finite() {
                return Err(Error::parse(name, line, format!("column {}: non-finite value", SENSOR_HEADER[k])));
            }
            v[k] = x;
        }
        let s = SensorSample {
            t: v[0],
            ax: v[1],
            ay: v[2],
            az: v[3],
            gx: v[4],
            gy: v[5],
            gz: v[6],
            speed: v[7],
            lat: v[8],
            lon: v[9],
            acc: v[10],
        };
        if let Some(prev) = samples.last() {
            if !(s.t > prev.t) {
                return Err(Error::parse(
                    name,
                    line,
                    format!("timestamp {} does not increase (previous {})", s.t, prev.t),
                ));
            }
        }
        samples.push(s);
    }
    SensorStream::new(samples)
}

pub fn format_sensor_csv(stream: &SensorStream) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SENSOR_HEADER).expect("in-memory write");
    for s in &stream.samples {
        let row = [s.t, s.ax, s.ay, s.az, s.gx, s.gy, s.gz, s.speed, s.lat, s.lon, s.acc];
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn read_sensor_csv(path: &Path) -> Result<SensorStream> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sensor_csv(&text, &path.display().to_string())
}

pub fn write_sensor_csv(path: &Path, stream: &SensorStream) -> Result<()> {
    fs::write(path, format_sensor_csv(stream)).map_err(|e| Error::io(path, e))
}

/// Ground-truth segments `start,end,mode`.
pub fn parse_labels_csv(text: &str, name: &str) -> Result<Vec<Segment>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    check_header(&mut rdr, &LABEL_HEADER, name)?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(name, n + 2, e.to_string()))?;
        let line = record_line(&rec, n + 2);
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(name, line, format!("bad {}: {:?}", LABEL_HEADER[k], &rec[k])))
        };
        let (start, end) = (num(0)?, num(1)?);
        if !(end > start) {
            return Err(Error::parse(name, line, "segment end must follow start"));
        }
        let mode: Mode = rec[2].trim().parse().map_err(|e: Error| Error::parse(name, line, e.to_string()))?;
        out.push(Segment { start, end, mode });
    }
    Ok(out)
}

pub fn format_labels_csv(segments: &[Segment]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LABEL_HEADER).expect("in-memory write");
    for s in segments {
        w.write_record([s.start.to_string(), s.end.to_string(), s.mode.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<Segment>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels_csv(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "t,ax,ay,az,gx,gy,gz,speed,lat,lon,acc\n\
                        0,0.1,0.2,0.3,0,0,0,1.5,41.1,-8.6,5\n\
                        0.1,0.1,0.2,0.3,0,0,0,1.5,41.1,-8.6,5\n";

    #[test]
    fn roundtrip() {
        let s = parse_sensor_csv(GOOD, "m").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(format_sensor_csv(&s), GOOD);
    }

    #[test]
    fn decreasing_time_names_line() {
        let bad = format!("{GOOD}0.05,0,0,0,0,0,0,0,0,0,0\n");
        match parse_sensor_csv(&bad, "ride.csv") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(path, "ride.csv");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nan_and_header_rejected() {
        let nan = format!("{GOOD}0.2,NaN,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(parse_sensor_csv(&nan, "m"), Err(Error::Parse { line: 4, .. })));
        assert!(parse_sensor_csv("t,ax\n0,1\n", "m").is_err());
    }

    #[test]
    fn labels_roundtrip() {
        let text = "start,end,mode\n0,60,walk\n60,120.5,bike\n";
        let s = parse_labels_csv(text, "m").unwrap();
        assert_eq!(s[1].mode, Mode::Bike);
        assert_eq!(format_labels_csv(&s), text);
        assert!(parse_labels_csv("start,end,mode\n0,1,train\n", "m").is_err());
    }
}
