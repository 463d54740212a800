//! CSV renderings of confidence sets and their summary tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{ConfidenceSet, KeptModel, SubstitutionTable, TermFrequency};
use crate::model::{ModelSpec, Term};

/// One row per model: size, p-value and the model's terms as labels joined
/// by spaces.
pub fn write_confidence_set_csv<W: Write>(cs: &ConfidenceSet, names: &[String], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "p_value", "terms", "tested"])?;
    for k in cs.by_size.values().flatten() {
        w.write_record([
            k.model.size().to_string(),
            k.p_value.to_string(),
            k.model.labels(names).join(" "),
            k.tested.labels(names).join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read back the models written by [`write_confidence_set_csv`], grouped by
/// size.
pub fn confidence_set_from_csv<R: Read>(input: R, names: &[String]) -> Result<BTreeMap<usize, Vec<KeptModel>>, String> {
    let mut r = csv::Reader::from_reader(input);
    let mut out: BTreeMap<usize, Vec<KeptModel>> = BTreeMap::new();
    let parse = |field: &str| -> Result<ModelSpec, String> {
        let mut m = ModelSpec::default();
        for label in field.split_whitespace() {
            m.insert(Term::parse_label(label, names).ok_or_else(|| format!("unknown term `{label}`"))?);
        }
        Ok(m)
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| rec.get(i).ok_or_else(|| format!("row {:?} is short", rec.position()));
        let p_value: f64 = field(1)?.parse().map_err(|e| format!("bad p-value: {e}"))?;
        let model = parse(field(2)?)?;
        let tested = parse(field(3)?)?;
        out.entry(model.size()).or_default().push(KeptModel { model, tested, p_value });
    }
    Ok(out)
}

pub fn write_frequencies_csv<W: Write>(freqs: &[TermFrequency], names: &[String], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["term", "count", "proportion"])?;
    for f in freqs {
        w.write_record([f.term.label(names), f.count.to_string(), f.proportion.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Square table with term labels along the top and down the side; undefined
/// entries are left blank.
pub fn write_substitution_csv<W: Write>(table: &SubstitutionTable, names: &[String], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let labels: Vec<String> = table.terms.iter().map(|t| t.label(names)).collect();
    w.write_record(std::iter::once(String::new()).chain(labels.iter().cloned()))?;
    for (label, row) in labels.iter().zip(&table.entries) {
        let cells = row.iter().map(|e| e.map(|v| format!("{v:.4}")).unwrap_or_default());
        w.write_record(std::iter::once(label.clone()).chain(cells))?;
    }
    w.flush()?;
    Ok(())
}
