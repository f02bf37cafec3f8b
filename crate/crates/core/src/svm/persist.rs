//! Line-oriented model files.
//!
//! ```text
//! GKMODEL v1
//! [kernel]      kind / gamma / coef0 / degree / cost
//! [classes]     one class name per line
//! [scaler]      mean <d values> / std <d values>
//! [registry]    one feature name per line
//! [pair <a> <b>] bias / alpha_y <n values> / n lines of `sv <d values>`
//! ```
//! Reals are written with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::scalar::Real;

use super::kernel::{KernelConfig, KernelKind, SvmParams};
use super::ovo::{OvoSvmModel, PairModel};

pub const MODEL_MAGIC: &str = "GKMODEL";
const VERSION: &str = "v1";

fn num<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn nums<T: Real>(vs: &[T]) -> String {
    vs.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ")
}

pub fn write_model<T: Real, W: Write>(model: &OvoSvmModel<T>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let k = &model.params.kernel;
    writeln!(w, "{MODEL_MAGIC} {VERSION}")?;
    writeln!(w, "[kernel]")?;
    writeln!(w, "kind {}", k.kind)?;
    writeln!(w, "gamma {}", num(k.gamma))?;
    writeln!(w, "coef0 {}", num(k.coef0))?;
    writeln!(w, "degree {}", k.degree)?;
    writeln!(w, "cost {}", num(model.params.cost))?;
    writeln!(w, "[classes]")?;
    for c in &model.classes {
        writeln!(w, "{c}")?;
    }
    writeln!(w, "[scaler]")?;
    writeln!(w, "mean {}", nums(&model.scaler.mean))?;
    writeln!(w, "std {}", nums(&model.scaler.std))?;
    writeln!(w, "[registry]")?;
    for n in &model.feature_names {
        writeln!(w, "{n}")?;
    }
    for p in &model.pairs {
        writeln!(w, "[pair {} {}]", model.classes[p.a], model.classes[p.b])?;
        writeln!(w, "bias {}", num(p.bias))?;
        writeln!(w, "alpha_y {}", nums(&p.coef))?;
        for &s in &p.sv {
            writeln!(w, "sv {}", nums(&model.pool[s]))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_model<T: Real>(model: &OvoSvmModel<T>, path: impl AsRef<Path>) -> Result<()> {
    write_model(model, File::create(path)?)
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<OvoSvmModel<T>> {
    read_model(File::open(path)?)
}

struct Section {
    name: String,
    lines: Vec<String>,
}

fn parse_reals<T: Real>(section: &str, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map(T::of)
                .map_err(|_| Error::Format(format!("section [{section}]: bad number '{t}'")))
        })
        .collect()
}

fn keyed<'a>(sec: &'a Section, key: &str) -> Result<&'a str> {
    sec.lines
        .iter()
        .find_map(|l| {
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' ').or((r.is_empty()).then_some("")))
        })
        .ok_or_else(|| Error::Format(format!("section [{}] truncated: missing '{key}'", sec.name)))
}

pub fn read_model<T: Real, R: Read>(source: R) -> Result<OvoSvmModel<T>> {
    let mut lines = BufReader::new(source).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MODEL_MAGIC) {
        return Err(Error::Format(
            "not a model file: missing GKMODEL header".into(),
        ));
    }
    match parts.next() {
        Some(VERSION) => {}
        Some(v) => {
            return Err(Error::Format(format!(
                "unsupported model version '{v}' (expected {VERSION})"
            )))
        }
        None => return Err(Error::Format("model header lacks a version".into())),
    }

    let mut sections: Vec<Section> = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push(Section {
                name: name.to_string(),
                lines: Vec::new(),
            });
        } else {
            sections
                .last_mut()
                .ok_or_else(|| Error::Format(format!("content before first section: '{line}'")))?
                .lines
                .push(line.to_string());
        }
    }
    let find = |name: &str| {
        sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Format(format!("missing section [{name}]")))
    };

    let ks = find("kernel")?;
    let kind: KernelKind = keyed(ks, "kind")?.parse()?;
    let real = |key: &str| -> Result<T> {
        let v = parse_reals::<T>("kernel", keyed(ks, key)?)?;
        v.first()
            .copied()
            .ok_or_else(|| Error::Format(format!("section [kernel]: empty '{key}'")))
    };
    let degree: u32 = keyed(ks, "degree")?
        .trim()
        .parse()
        .map_err(|_| Error::Format("section [kernel]: bad degree".into()))?;
    let params = SvmParams {
        kernel: KernelConfig::new(kind, real("gamma")?, real("coef0")?, degree)?,
        cost: real("cost")?,
    };

    let classes: Vec<String> = find("classes")?
        .lines
        .iter()
        .map(|l| l.trim().to_string())
        .collect();
    let feature_names: Vec<String> = find("registry")?
        .lines
        .iter()
        .map(|l| l.trim().to_string())
        .collect();
    let d = feature_names.len();
    let sc = find("scaler")?;
    let scaler = Scaler {
        mean: parse_reals("scaler", keyed(sc, "mean")?)?,
        std: parse_reals("scaler", keyed(sc, "std")?)?,
    };
    if scaler.mean.len() != d || scaler.std.len() != d {
        return Err(Error::Format(format!(
            "section [scaler] truncated: expected {d} values"
        )));
    }

    let k = classes.len();
    let mut pool: Vec<Vec<T>> = Vec::new();
    let mut pairs = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            let name = format!("pair {} {}", classes[a], classes[b]);
            let sec = find(&name)?;
            let bias = parse_reals::<T>(&name, keyed(sec, "bias")?)?
                .first()
                .copied()
                .ok_or_else(|| Error::Format(format!("section [{name}] truncated: empty bias")))?;
            let coef = parse_reals::<T>(&name, keyed(sec, "alpha_y")?)?;
            let rows: Vec<&String> = sec.lines.iter().filter(|l| l.starts_with("sv")).collect();
            if rows.len() != coef.len() {
                return Err(Error::Format(format!(
                    "section [{name}] truncated: expected {} sv rows, found {}",
                    coef.len(),
                    rows.len()
                )));
            }
            let mut sv = Vec::with_capacity(rows.len());
            for r in rows {
                let v = parse_reals::<T>(&name, r.trim_start_matches("sv"))?;
                if v.len() != d {
                    return Err(Error::Format(format!(
                        "section [{name}] truncated: sv row has {} values, expected {d}",
                        v.len()
                    )));
                }
                let slot = match pool.iter().position(|p| *p == v) {
                    Some(s) => s,
                    None => {
                        pool.push(v);
                        pool.len() - 1
                    }
                };
                sv.push(slot);
            }
            pairs.push(PairModel {
                a,
                b,
                sv,
                coef,
                bias,
            });
        }
    }
    Ok(OvoSvmModel {
        classes,
        params,
        scaler,
        feature_names,
        pool,
        pairs,
    })
}
