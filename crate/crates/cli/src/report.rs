//! Artifact writing: JSON summaries with fixed float formatting, CSV tables.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::Failure;

/// Pretty JSON with every float printed as `{:.16e}` (17 significant digits),
/// so identical runs give byte-identical files.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `<name>_<subcommand>_<suffix>` files into one output directory.
pub struct Artifacts {
    dir: PathBuf,
    stem: String,
    pub written: Vec<PathBuf>,
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

impl Artifacts {
    pub fn new(dir: &Path, name: &str, subcommand: &str) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), stem: format!("{name}_{subcommand}"), written: Vec::new() })
    }

    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}.{ext}", self.stem))
    }

    pub fn json<S: Serialize>(&mut self, suffix: &str, value: &S) -> Result<(), Failure> {
        let p = self.path(suffix, "json");
        fs::write(&p, to_json(value)).map_err(|e| io_fail(&p, e))?;
        self.written.push(p);
        Ok(())
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let p = self.path(suffix, "csv");
        let mut w = csv::Writer::from_path(&p).map_err(|e| io_fail(&p, e))?;
        w.write_record(header).map_err(|e| io_fail(&p, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io_fail(&p, e))?;
        }
        w.flush().map_err(|e| io_fail(&p, e))?;
        self.written.push(p);
        Ok(())
    }
}
