use std::collections::HashMap;
use std::io::{Read, Write};

use super::{OperatingCondition, RoDataset};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "condition",
    "voltage_v",
    "temperature_c",
    "ro_index",
    "repeat_index",
    "freq_mhz",
];

struct Row {
    line: u64,
    condition: usize,
    ro: usize,
    repeat: usize,
    freq: f64,
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column `{}`", CSV_HEADER[i]),
    })?;
    raw.trim().parse().map_err(|e| Error::Parse {
        line,
        msg: format!("column `{}`: {e} ({raw:?})", CSV_HEADER[i]),
    })
}

/// Reads a dataset from CSV. Rows may come in any order; conditions keep
/// the order of their first appearance.
pub fn ingest_ro_dataset<R: Read>(source: R) -> Result<RoDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty input".into(),
            })
        }
    };
    if header.iter().map(str::trim).ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header must be `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut conditions: Vec<OperatingCondition> = Vec::new();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let label = rec[0].trim();
        let voltage: f64 = field(&rec, 1, line)?;
        let temperature: f64 = field(&rec, 2, line)?;
        let condition = match conditions.iter().position(|c| c.label == label) {
            Some(i) => {
                let c = &conditions[i];
                if c.voltage != voltage || c.temperature != temperature {
                    return Err(Error::Parse {
                        line,
                        msg: format!("condition `{label}` changes its voltage/temperature"),
                    });
                }
                i
            }
            None => {
                let c = OperatingCondition::new(label, voltage, temperature)
                    .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
                conditions.push(c);
                conditions.len() - 1
            }
        };
        rows.push(Row {
            line,
            condition,
            ro: field(&rec, 3, line)?,
            repeat: field(&rec, 4, line)?,
            freq: field(&rec, 5, line)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            msg: "no data rows".into(),
        });
    }

    let n_ros = rows.iter().map(|r| r.ro).max().unwrap_or(0) + 1;
    let repeats = rows.iter().map(|r| r.repeat).max().unwrap_or(0) + 1;
    let cells = conditions
        .len()
        .checked_mul(n_ros)
        .and_then(|x| x.checked_mul(repeats))
        .ok_or_else(|| Error::Overflow("dataset dimensions".into()))?;
    let mut freq = vec![f64::NAN; cells];
    let mut seen: HashMap<usize, u64> = HashMap::with_capacity(rows.len());
    for r in &rows {
        let idx = (r.condition * n_ros + r.ro) * repeats + r.repeat;
        if seen.insert(idx, r.line).is_some() {
            return Err(Error::Duplicate {
                condition: conditions[r.condition].label.clone(),
                ro: r.ro,
                repeat: r.repeat,
            });
        }
        if !(r.freq > 0.0) || !r.freq.is_finite() {
            return Err(Error::NonPositiveFrequency { freq: r.freq });
        }
        freq[idx] = r.freq;
    }
    if let Some(idx) = freq.iter().position(|f| f.is_nan()) {
        return Err(Error::Incomplete {
            condition: conditions[idx / (n_ros * repeats)].label.clone(),
            ro: (idx / repeats) % n_ros,
            repeat: idx % repeats,
        });
    }
    RoDataset::new(n_ros, repeats, conditions, freq)
}

/// Writes `ds` as CSV with shortest round-trip decimal representations.
pub fn emit_ro_dataset<W: Write>(ds: &RoDataset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for (c, cond) in ds.conditions().iter().enumerate() {
        let (v, t) = (cond.voltage.to_string(), cond.temperature.to_string());
        for ro in 0..ds.n_ros() {
            for rep in 0..ds.repeats() {
                w.write_record([
                    cond.label.as_str(),
                    &v,
                    &t,
                    &ro.to_string(),
                    &rep.to_string(),
                    &ds.freq(c, ro, rep).to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_written() -> String {
        let mut s = CSV_HEADER.join(",") + "\n";
        for (label, v) in [("nom", "1.2"), ("low", "0.96")] {
            for ro in 0..4 {
                for rep in (0..3).rev() {
                    s += &format!("{label},{v},25,{ro},{rep},{}\n", 200.0 + ro as f64 + rep as f64 / 10.0);
                }
            }
        }
        s
    }

    #[test]
    fn ingests_hand_written_file() {
        let ds = ingest_ro_dataset(hand_written().as_bytes()).unwrap();
        assert_eq!((ds.n_ros(), ds.repeats(), ds.conditions().len()), (4, 3, 2));
        assert_eq!(ds.freq(1, 2, 1), 202.1);
        assert_eq!(ds.conditions()[1].voltage, 0.96);
    }

    #[test]
    fn duplicate_key_is_named() {
        let s = hand_written() + "low,0.96,25,3,2,1.0\n";
        match ingest_ro_dataset(s.as_bytes()) {
            Err(Error::Duplicate { condition, ro, repeat }) => {
                assert_eq!((condition.as_str(), ro, repeat), ("low", 3, 2))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_cell_and_bad_values() {
        let s: String = hand_written()
            .lines()
            .filter(|l| !l.starts_with("nom,1.2,25,1,0,"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            ingest_ro_dataset(s.as_bytes()),
            Err(Error::Incomplete { ro: 1, repeat: 0, .. })
        ));
        let s = hand_written().replace("nom,1.2,25,0,0,200", "nom,1.2,25,0,0,-200");
        assert!(matches!(
            ingest_ro_dataset(s.as_bytes()),
            Err(Error::NonPositiveFrequency { .. })
        ));
        let s = hand_written().replace("nom,1.2,25,2,1,202.1", "nom,1.2,25,2,x,202.1");
        match ingest_ro_dataset(s.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        assert!(ingest_ro_dataset("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn emit_then_ingest() {
        let ds = ingest_ro_dataset(hand_written().as_bytes()).unwrap();
        let mut buf = Vec::new();
        emit_ro_dataset(&ds, &mut buf).unwrap();
        assert_eq!(ingest_ro_dataset(buf.as_slice()).unwrap(), ds);
    }
}
