//! Column-typed tabular data and its CSV/JSON interchange.
//!
//! CSV dialect: comma separated, double-quote escaping, mandatory header,
//! UTF-8, `.` decimal point. Categorical dictionaries are built in
//! first-appearance order unless the schema already lists the categories.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Category labels; index = category id. Empty for continuous columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Continuous, categories: Vec::new() }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Categorical, categories: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::InvalidConfig("schema needs at least one column".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate column name {:?}", c.name)));
            }
            if c.kind == ColumnKind::Continuous && !c.categories.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "continuous column {:?} cannot carry categories",
                    c.name
                )));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Same column names and kinds in the same order; dictionaries may differ.
    pub fn same_structure(&self, other: &Schema) -> bool {
        self.columns.len() == other.columns.len()
            && self.columns.iter().zip(&other.columns).all(|(a, b)| a.name == b.name && a.kind == b.kind)
    }

    pub fn continuous_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Continuous)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn categorical_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.name.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData<T> {
    Continuous(Vec<T>),
    Categorical(Vec<u32>),
}

impl<T> ColumnData<T> {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rows stored column-major; categorical cells are ids into the schema's
/// per-column dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    schema: Schema,
    columns: Vec<ColumnData<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(schema: Schema, columns: Vec<ColumnData<T>>) -> Result<Self> {
        schema.validate()?;
        if schema.columns.len() != columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "schema has {} columns, data has {}",
                schema.columns.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, ColumnData::len);
        for (spec, col) in schema.columns.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidConfig(format!("column {:?} has {} rows, expected {n}", spec.name, col.len())));
            }
            match (spec.kind, col) {
                (ColumnKind::Continuous, ColumnData::Continuous(v)) => {
                    if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::Parse {
                            row: row + 1,
                            column: spec.name.clone(),
                            message: "non-finite value".into(),
                        });
                    }
                }
                (ColumnKind::Categorical, ColumnData::Categorical(ids)) => {
                    if let Some(row) = ids.iter().position(|&id| id as usize >= spec.categories.len()) {
                        return Err(Error::Parse {
                            row: row + 1,
                            column: spec.name.clone(),
                            message: format!("category id {} outside dictionary", ids[row]),
                        });
                    }
                }
                _ => {
                    return Err(Error::SchemaMismatch(format!("column {:?} has the wrong kind", spec.name)));
                }
            }
        }
        Ok(Dataset { schema, columns })
    }

    /// Builds a dataset from named continuous columns and labelled
    /// categorical columns, in the given order.
    pub fn from_columns(cols: Vec<(&str, ColumnInput<T>)>) -> Result<Self> {
        let mut specs = Vec::with_capacity(cols.len());
        let mut data = Vec::with_capacity(cols.len());
        for (name, input) in cols {
            match input {
                ColumnInput::Continuous(v) => {
                    specs.push(ColumnSpec::continuous(name));
                    data.push(ColumnData::Continuous(v));
                }
                ColumnInput::Labels(labels) => {
                    let mut spec = ColumnSpec::categorical(name);
                    let mut index: HashMap<String, u32> = HashMap::new();
                    let ids = labels
                        .into_iter()
                        .map(|l| intern(&mut spec.categories, &mut index, l))
                        .collect();
                    specs.push(spec);
                    data.push(ColumnData::Categorical(ids));
                }
            }
        }
        Dataset::new(Schema::new(specs)?, data)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnData<T>] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, ColumnData::len)
    }

    pub fn continuous(&self, name: &str) -> Option<&[T]> {
        match self.columns.get(self.schema.index_of(name)?)? {
            ColumnData::Continuous(v) => Some(v),
            ColumnData::Categorical(_) => None,
        }
    }

    /// Ids and dictionary of a categorical column.
    pub fn categorical(&self, name: &str) -> Option<(&[u32], &[String])> {
        let idx = self.schema.index_of(name)?;
        match &self.columns[idx] {
            ColumnData::Categorical(ids) => Some((ids, &self.schema.columns[idx].categories)),
            ColumnData::Continuous(_) => None,
        }
    }

    /// Rows of `self` followed by rows of `other`; dictionaries are merged.
    pub fn concat(&self, other: &Dataset<T>) -> Result<Self> {
        if !self.schema.same_structure(&other.schema) {
            return Err(Error::SchemaMismatch("cannot concatenate datasets with different columns".into()));
        }
        let mut schema = self.schema.clone();
        let mut columns = self.columns.clone();
        for (idx, (col, theirs)) in columns.iter_mut().zip(&other.columns).enumerate() {
            match (col, theirs) {
                (ColumnData::Continuous(a), ColumnData::Continuous(b)) => a.extend_from_slice(b),
                (ColumnData::Categorical(a), ColumnData::Categorical(b)) => {
                    let dict = &mut schema.columns[idx].categories;
                    let mut index: HashMap<String, u32> =
                        dict.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect();
                    let their_dict = &other.schema.columns[idx].categories;
                    for &id in b {
                        a.push(intern(dict, &mut index, their_dict[id as usize].clone()));
                    }
                }
                _ => unreachable!("structure checked above"),
            }
        }
        Dataset::new(schema, columns)
    }

    /// Reads CSV whose header lists exactly the schema's columns, in order.
    pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Self> {
        schema.validate()?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let names: Vec<&str> = schema.names().collect();
        if header.len() != names.len() || header.iter().zip(&names).any(|(h, n)| h != *n) {
            return Err(Error::SchemaMismatch(format!(
                "CSV header [{}] does not match schema columns [{}]",
                header.iter().collect::<Vec<_>>().join(", "),
                names.join(", ")
            )));
        }
        let mut schema = schema.clone();
        let mut indexes: Vec<HashMap<String, u32>> = schema
            .columns
            .iter()
            .map(|c| c.categories.iter().enumerate().map(|(i, l)| (l.clone(), i as u32)).collect())
            .collect();
        let mut columns: Vec<ColumnData<T>> = schema
            .columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Continuous => ColumnData::Continuous(Vec::new()),
                ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
            })
            .collect();
        for (k, record) in rdr.records().enumerate() {
            // Line 1 is the header.
            let row = k + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                column: String::from("-"),
                message: e.to_string(),
            })?;
            for (idx, col) in columns.iter_mut().enumerate() {
                let spec = &mut schema.columns[idx];
                let cell = record.get(idx).unwrap_or("");
                let parse_err = |message: String| Error::Parse { row, column: spec.name.clone(), message };
                if cell.trim().is_empty() {
                    return Err(parse_err("missing value".into()));
                }
                match col {
                    ColumnData::Continuous(v) => {
                        let x: T = cell
                            .trim()
                            .parse()
                            .map_err(|e| parse_err(format!("cannot parse {cell:?} as a real: {e}")))?;
                        if !x.is_finite() {
                            return Err(parse_err(format!("non-finite value {cell:?}")));
                        }
                        v.push(x);
                    }
                    ColumnData::Categorical(ids) => {
                        ids.push(intern(&mut spec.categories, &mut indexes[idx], cell.to_string()));
                    }
                }
            }
        }
        Dataset::new(schema, columns)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(writer);
        wtr.write_record(self.schema.names())?;
        let mut record: Vec<String> = Vec::with_capacity(self.columns.len());
        for row in 0..self.n_rows() {
            record.clear();
            for (idx, col) in self.columns.iter().enumerate() {
                record.push(match col {
                    ColumnData::Continuous(v) => v[row].to_string(),
                    ColumnData::Categorical(ids) => self.schema.columns[idx].categories[ids[row] as usize].clone(),
                });
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv writer emits UTF-8"))
    }
}

/// Input for [`Dataset::from_columns`].
pub enum ColumnInput<T> {
    Continuous(Vec<T>),
    Labels(Vec<String>),
}

fn intern(dict: &mut Vec<String>, index: &mut HashMap<String, u32>, label: String) -> u32 {
    if let Some(&id) = index.get(&label) {
        return id;
    }
    let id = dict.len() as u32;
    dict.push(label.clone());
    index.insert(label, id);
    id
}
