//! File codecs. Every format is described in `docs/formats.md`.

mod detections;
mod geojson;
mod pgm;
mod records;
mod ride;
mod sensor;

pub use detections::{format_detections, parse_detections, read_detections, write_detections};
pub use geojson::{format_report, parse_report, read_report, report_value, write_report, ReportSegment};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, read_raw_stream, write_pgm, write_raw_stream};
pub use records::{
    format_descriptors, format_model, format_records, format_trainset, parse_descriptors, parse_model,
    parse_records, parse_trainset, read_descriptors, read_model, read_trainset, write_descriptors, write_model,
    write_trainset, DescriptorHeader, DescriptorRecord, ModelHeader, TrainsetHeader, DESCRIPTOR_MAGIC,
    FORMAT_VERSION, MODEL_MAGIC, NUMBERING, TRAINSET_MAGIC,
};
pub(crate) use ride::toml_line;
pub use ride::{write_manifest, FrameSource, Profile, RideManifest, RideRecording, MANIFEST};
pub use sensor::{
    format_labels_csv, format_sensor_csv, parse_labels_csv, parse_sensor_csv, read_labels_csv, read_sensor_csv,
    write_sensor_csv, LABEL_HEADER, SENSOR_HEADER,
};
