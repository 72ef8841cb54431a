use spinlab::numfmt::sig17;

use crate::error::CliError;

pub enum Cell {
    F(f64),
    I(i64),
    U(u128),
    S(String),
    B(bool),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(x) => sig17(*x),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u128)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::U(x as u128)
    }
}
impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell::U(x)
    }
}
impl From<i8> for Cell {
    fn from(x: i8) -> Self {
        Cell::I(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Space-separated list inside one CSV field.
pub fn joined<T: Copy + Into<Cell>>(xs: &[T]) -> Cell {
    Cell::S(xs.iter().map(|&x| x.into().text()).collect::<Vec<_>>().join(" "))
}

pub struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    /// `index, eigenvalue` rows.
    pub fn levels(values: &[f64]) -> Self {
        let mut t = Table::new(&["index", "eigenvalue"]);
        for (i, &e) in values.iter().enumerate() {
            t.row(vec![i.into(), e.into()]);
        }
        t
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io { context: "writing CSV".into(), source: e.into() };
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text)).map_err(io)?;
        }
        let bytes =
            w.into_inner().map_err(|e| CliError::Io { context: "writing CSV".into(), source: e.into_error() })?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }
}
