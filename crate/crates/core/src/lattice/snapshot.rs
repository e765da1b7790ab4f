//! Binary field snapshots: `"YMK1"`, then little-endian `u32` grid size,
//! group tag, degree code and value count, followed by `f64` values in
//! `(site, component, generator)` order. Complex fields store `(re, im)`
//! pairs as the innermost axis and use degree code `0x10 | p << 2 | q`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::algebra::GroupKind;
use crate::error::{Error, Result};

use super::form::{CForm, Form};
use super::Torus4;

const MAGIC: &[u8; 4] = b"YMK1";
const COMPLEX: u32 = 0x10;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Real(Form),
    Complex { p: usize, q: usize, form: CForm },
}

fn header<W: Write>(w: &mut W, grid: Torus4, group: GroupKind, code: u32, count: usize) -> Result<()> {
    w.write_all(MAGIC)?;
    let count = u32::try_from(count).map_err(|_| Error::Snapshot("field too large".into()))?;
    for v in [grid.n() as u32, group.tag(), code, count] {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_form<W: Write>(w: &mut W, form: &Form) -> Result<()> {
    header(w, form.grid(), form.group(), form.degree() as u32, form.data().len())?;
    for v in form.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_cform<W: Write>(w: &mut W, form: &CForm, p: usize, q: usize) -> Result<()> {
    if p + q != form.degree() || p > 2 || q > 2 {
        return Err(Error::Snapshot(format!("bidegree ({p},{q}) does not match degree {}", form.degree())));
    }
    let code = COMPLEX | ((p as u32) << 2) | q as u32;
    header(w, form.grid(), form.group(), code, 2 * form.re.data().len())?;
    for (a, b) in form.re.data().iter().zip(form.im.data()) {
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let n = read_u32(r)? as usize;
    let tag = read_u32(r)?;
    let code = read_u32(r)?;
    let count = read_u32(r)? as usize;
    let grid = Torus4::new(n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let group = GroupKind::from_tag(tag).ok_or_else(|| Error::Snapshot(format!("unknown group tag {tag}")))?;
    let mut values = Vec::with_capacity(count);
    let mut b = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut b)?;
        values.push(f64::from_le_bytes(b));
    }
    let bad = |e: Error| Error::Snapshot(e.to_string());
    if code & COMPLEX == 0 {
        if code > 4 {
            return Err(Error::Snapshot(format!("bad degree code {code}")));
        }
        return Ok(Snapshot::Real(Form::from_data(grid, group, code as usize, values).map_err(bad)?));
    }
    let (p, q) = (((code >> 2) & 3) as usize, (code & 3) as usize);
    if code & !0x1f != 0 || p + q > 4 {
        return Err(Error::Snapshot(format!("bad degree code {code:#x}")));
    }
    let re = values.iter().step_by(2).copied().collect();
    let im = values.iter().skip(1).step_by(2).copied().collect();
    let form = CForm {
        re: Form::from_data(grid, group, p + q, re).map_err(bad)?,
        im: Form::from_data(grid, group, p + q, im).map_err(bad)?,
    };
    Ok(Snapshot::Complex { p, q, form })
}

pub fn save_form(path: &Path, form: &Form) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_form(&mut w, form)?;
    w.flush()?;
    Ok(())
}

pub fn save_cform(path: &Path, form: &CForm, p: usize, q: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cform(&mut w, form, p, q)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot> {
    read_snapshot(&mut BufReader::new(File::open(path)?))
}
