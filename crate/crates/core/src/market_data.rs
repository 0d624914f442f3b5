//! Price, dividend and derivative-quote series loaded from CSV.
//!
//! Files carry ISO-8601 dates; once loaded, every series is sorted by date and
//! addressed by trading-day ordinal (0-based position after the sort). Missing
//! calendar days (weekends, holidays) are simply absent rows.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const PRICE_HEADER: [&str; 2] = ["date", "price"];
pub const DIVIDEND_HEADER: [&str; 2] = ["date", "dps"];
pub const QUOTE_HEADER: [&str; 4] = ["date", "last", "ttd_years", "spot"];

/// Default time unit: one trading day as a year fraction.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Dated, strictly positive price history of one underlying.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<S> {
    symbol: String,
    dates: Vec<NaiveDate>,
    prices: Vec<S>,
}

impl<S: Scalar> PriceSeries<S> {
    /// Builds a series from unordered observations, sorting by date.
    pub fn new(symbol: impl Into<String>, mut observations: Vec<(NaiveDate, S)>) -> Result<Self> {
        observations.sort_by_key(|(d, _)| *d);
        check_unique_dates(observations.iter().map(|(d, _)| *d))?;
        if observations.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                len: observations.len(),
            });
        }
        for (i, (_, p)) in observations.iter().enumerate() {
            if !(p.is_finite() && *p > S::zero()) {
                return Err(Error::InvalidObservation {
                    index: i,
                    message: format!("price must be positive, got {p}"),
                });
            }
        }
        let (dates, prices) = observations.into_iter().unzip();
        Ok(Self {
            symbol: symbol.into(),
            dates,
            prices,
        })
    }

    /// Series over consecutive weekdays starting 2000-01-03, for synthetic data.
    pub fn from_values(symbol: impl Into<String>, prices: Vec<S>) -> Result<Self> {
        let dates = weekdays_from(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(), prices.len());
        Self::new(symbol, dates.into_iter().zip(prices).collect())
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[S] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Most recent price `s_n`.
    pub fn last(&self) -> S {
        *self.prices.last().expect("series has at least two observations")
    }

    /// Ordinal of `date`, if it is a trading day of this series.
    pub fn ordinal_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// The first `len` observations.
    pub fn head(&self, len: usize) -> Result<Self> {
        if len < 2 || len > self.len() {
            return Err(Error::SeriesTooShort {
                needed: len.max(2),
                len: self.len(),
            });
        }
        Ok(Self {
            symbol: self.symbol.clone(),
            dates: self.dates[..len].to_vec(),
            prices: self.prices[..len].to_vec(),
        })
    }
}

/// Trailing annual dividend per share, indexed by trading-day ordinal.
#[derive(Debug, Clone, PartialEq)]
pub struct DividendSeries<S> {
    symbol: String,
    dates: Vec<NaiveDate>,
    ordinals: Vec<usize>,
    dps: Vec<S>,
}

impl<S: Scalar> DividendSeries<S> {
    /// Builds a series from unordered dated observations; ordinals are positions after sorting.
    pub fn new(symbol: impl Into<String>, mut observations: Vec<(NaiveDate, S)>) -> Result<Self> {
        observations.sort_by_key(|(d, _)| *d);
        check_unique_dates(observations.iter().map(|(d, _)| *d))?;
        if observations.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, (_, v)) in observations.iter().enumerate() {
            check_non_negative(i, *v, "dps")?;
        }
        let (dates, dps): (Vec<_>, Vec<_>) = observations.into_iter().unzip();
        Ok(Self {
            symbol: symbol.into(),
            ordinals: (0..dates.len()).collect(),
            dates,
            dps,
        })
    }

    /// Series from explicit `(ordinal, dps)` pairs, without calendar dates.
    pub fn from_ordinals(symbol: impl Into<String>, points: Vec<(usize, S)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidObservation {
                    index: i + 1,
                    message: "ordinals must be strictly increasing".into(),
                });
            }
        }
        for (i, (_, v)) in points.iter().enumerate() {
            check_non_negative(i, *v, "dps")?;
        }
        let (ordinals, dps): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        let dates = weekdays_from(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(), ordinals.len());
        Ok(Self {
            symbol: symbol.into(),
            dates,
            ordinals,
            dps,
        })
    }

    /// Re-indexes observations by their trading-day ordinal in `prices`.
    /// Every dividend date must be a trading day of the price series.
    pub fn aligned_to(&self, prices: &PriceSeries<S>) -> Result<Self> {
        let ordinals = self
            .dates
            .iter()
            .enumerate()
            .map(|(i, d)| {
                prices.ordinal_of(*d).ok_or_else(|| Error::InvalidObservation {
                    index: i,
                    message: format!("dividend date {d} is not a trading day of {}", prices.symbol()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ordinals,
            ..self.clone()
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn ordinals(&self) -> &[usize] {
        &self.ordinals
    }

    pub fn values(&self) -> &[S] {
        &self.dps
    }

    pub fn len(&self) -> usize {
        self.dps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dps.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, S)> + '_ {
        self.ordinals.iter().copied().zip(self.dps.iter().copied())
    }
}

/// One observation of a forward or futures contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote<S> {
    pub date: NaiveDate,
    pub last: S,
    /// Remaining time to delivery, as a year fraction.
    pub ttd_years: S,
    pub spot: S,
}

/// Date-ordered quote history of one forward or futures contract.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSeries<S> {
    contract_id: String,
    quotes: Vec<Quote<S>>,
}

impl<S: Scalar> QuoteSeries<S> {
    pub fn new(contract_id: impl Into<String>, mut quotes: Vec<Quote<S>>) -> Result<Self> {
        quotes.sort_by_key(|q| q.date);
        check_unique_dates(quotes.iter().map(|q| q.date))?;
        if quotes.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, q) in quotes.iter().enumerate() {
            check_positive(i, q.last, "last price")?;
            check_positive(i, q.spot, "spot price")?;
            check_non_negative(i, q.ttd_years, "time to delivery")?;
        }
        Ok(Self {
            contract_id: contract_id.into(),
            quotes,
        })
    }

    pub fn contract_id(&self) -> &str {
        &self.contract_id
    }

    pub fn quotes(&self) -> &[Quote<S>] {
        &self.quotes
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }

    /// The first `len` rows, in date order.
    pub fn head(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InsufficientHistory {
                needed: len.max(1),
                available: self.len(),
            });
        }
        Ok(Self {
            contract_id: self.contract_id.clone(),
            quotes: self.quotes[..len].to_vec(),
        })
    }
}

/// Flat-rate market environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<S> {
    /// Continuously compounded annual risk-free rate.
    pub rate: S,
    /// Time unit as a year fraction.
    pub dt: S,
}

impl<S: Scalar> MarketParams<S> {
    pub fn new(rate: S, dt: S) -> Result<Self> {
        if !(dt.is_finite() && dt > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt.as_f64(),
            });
        }
        if !rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: rate.as_f64(),
            });
        }
        Ok(Self { rate, dt })
    }

    /// Daily time unit (1/252) with the given rate.
    pub fn daily(rate: S) -> Self {
        Self {
            rate,
            dt: S::one() / S::lit(TRADING_DAYS_PER_YEAR),
        }
    }
}

pub fn load_price_series<S: Scalar>(path: impl AsRef<Path>, symbol: &str) -> Result<PriceSeries<S>> {
    let path = path.as_ref();
    let rows = read_rows(path, &PRICE_HEADER)?;
    let mut obs = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let date = parse_date(path, *line, &rec[0])?;
        let price: S = parse_number(path, *line, &rec[1], "price")?;
        if price <= S::zero() {
            return Err(row_error(path, *line, format!("price must be positive, got {}", &rec[1])));
        }
        obs.push((date, price));
    }
    PriceSeries::new(symbol, obs).map_err(|e| annotate(path, e))
}

pub fn load_dividends<S: Scalar>(path: impl AsRef<Path>, symbol: &str) -> Result<DividendSeries<S>> {
    let path = path.as_ref();
    let rows = read_rows(path, &DIVIDEND_HEADER)?;
    let mut obs = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let date = parse_date(path, *line, &rec[0])?;
        let dps: S = parse_number(path, *line, &rec[1], "dps")?;
        if dps < S::zero() {
            return Err(row_error(path, *line, format!("dps must be non-negative, got {}", &rec[1])));
        }
        obs.push((date, dps));
    }
    DividendSeries::new(symbol, obs).map_err(|e| annotate(path, e))
}

pub fn load_quotes<S: Scalar>(path: impl AsRef<Path>, contract_id: &str) -> Result<QuoteSeries<S>> {
    let path = path.as_ref();
    let rows = read_rows(path, &QUOTE_HEADER)?;
    let mut quotes = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let date = parse_date(path, *line, &rec[0])?;
        let last: S = parse_number(path, *line, &rec[1], "last")?;
        let ttd_years: S = parse_number(path, *line, &rec[2], "ttd_years")?;
        let spot: S = parse_number(path, *line, &rec[3], "spot")?;
        if last <= S::zero() {
            return Err(row_error(path, *line, format!("last price must be positive, got {}", &rec[1])));
        }
        if ttd_years < S::zero() {
            return Err(row_error(path, *line, format!("time to delivery must be non-negative, got {}", &rec[2])));
        }
        if spot <= S::zero() {
            return Err(row_error(path, *line, format!("spot must be positive, got {}", &rec[3])));
        }
        quotes.push(Quote {
            date,
            last,
            ttd_years,
            spot,
        });
    }
    QuoteSeries::new(contract_id, quotes).map_err(|e| annotate(path, e))
}

pub fn write_price_series<S: Scalar>(path: impl AsRef<Path>, series: &PriceSeries<S>) -> Result<()> {
    write_csv(path.as_ref(), &PRICE_HEADER, series.dates.iter().zip(&series.prices).map(|(d, p)| {
        vec![d.to_string(), p.as_f64().to_string()]
    }))
}

pub fn write_dividends<S: Scalar>(path: impl AsRef<Path>, series: &DividendSeries<S>) -> Result<()> {
    write_csv(path.as_ref(), &DIVIDEND_HEADER, series.dates.iter().zip(&series.dps).map(|(d, v)| {
        vec![d.to_string(), v.as_f64().to_string()]
    }))
}

pub fn write_quotes<S: Scalar>(path: impl AsRef<Path>, series: &QuoteSeries<S>) -> Result<()> {
    write_csv(path.as_ref(), &QUOTE_HEADER, series.quotes.iter().map(|q| {
        vec![
            q.date.to_string(),
            q.last.as_f64().to_string(),
            q.ttd_years.as_f64().to_string(),
            q.spot.as_f64().to_string(),
        ]
    }))
}

/// Data rows of a CSV file with the exact `header`, paired with their 1-based line numbers.
pub(crate) fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let mut records = reader.records();
    let first = match records.next() {
        None => {
            return Err(Error::NoObservations {
                path: path.to_path_buf(),
            })
        }
        Some(r) => r.map_err(|e| row_error(path, 1, e.to_string()))?,
    };
    if first.iter().ne(header.iter().copied()) {
        return Err(row_error(
            path,
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| row_error(path, line, e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(row_error(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::NoObservations {
            path: path.to_path_buf(),
        });
    }
    Ok(rows)
}

pub(crate) fn parse_date(path: &Path, line: usize, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map_err(|e| row_error(path, line, format!("invalid date `{field}`: {e}")))
}

pub(crate) fn parse_number<S: Scalar>(path: &Path, line: usize, field: &str, name: &str) -> Result<S> {
    let v: f64 = field
        .parse()
        .map_err(|_| row_error(path, line, format!("invalid {name} `{field}`")))?;
    if !v.is_finite() {
        return Err(row_error(path, line, format!("non-finite {name} `{field}`")));
    }
    Ok(S::lit(v))
}

pub(crate) fn row_error(path: &Path, row: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        message,
    }
}

pub(crate) fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn annotate(path: &Path, err: Error) -> Error {
    match err {
        Error::DuplicateDate { date } => Error::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: format!("duplicate date {date}"),
        },
        Error::EmptyInput => Error::NoObservations {
            path: path.to_path_buf(),
        },
        other => other,
    }
}

fn check_unique_dates(sorted: impl Iterator<Item = NaiveDate>) -> Result<()> {
    let mut prev: Option<NaiveDate> = None;
    for d in sorted {
        if prev == Some(d) {
            return Err(Error::DuplicateDate { date: d.to_string() });
        }
        prev = Some(d);
    }
    Ok(())
}

fn check_positive<S: Scalar>(index: usize, v: S, name: &str) -> Result<()> {
    if v.is_finite() && v > S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidObservation {
            index,
            message: format!("{name} must be positive, got {v}"),
        })
    }
}

fn check_non_negative<S: Scalar>(index: usize, v: S, name: &str) -> Result<()> {
    if v.is_finite() && v >= S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidObservation {
            index,
            message: format!("{name} must be non-negative, got {v}"),
        })
    }
}

/// `count` consecutive weekdays starting at `start` (or the next weekday after it).
pub fn weekdays_from(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_valid_prices_in_date_order() {
        let f = file_with("date,price\n2022-01-03,10.5\n2022-01-04,11\n2022-01-05,10.75\n");
        let s: PriceSeries<f64> = load_price_series(f.path(), "TSLA").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.prices(), &[10.5, 11.0, 10.75]);
        assert_eq!(s.symbol(), "TSLA");
    }

    #[test]
    fn zero_price_names_the_row() {
        let f = file_with("date,price\n2022-01-03,10.5\n2022-01-04,0.0\n");
        let err = load_price_series::<f64>(f.path(), "X").unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn shuffled_dates_match_sorted_input() {
        let sorted = file_with("date,price\n2022-01-03,1\n2022-01-04,2\n2022-01-05,3\n2022-01-06,4\n");
        let shuffled = file_with("date,price\n2022-01-05,3\n2022-01-03,1\n2022-01-06,4\n2022-01-04,2\n");
        let a: PriceSeries<f64> = load_price_series(sorted.path(), "X").unwrap();
        let b: PriceSeries<f64> = load_price_series(shuffled.path(), "X").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_date_is_rejected() {
        let f = file_with("date,price\n2022-01-03,1\n2022-01-03,2\n");
        assert!(load_price_series::<f64>(f.path(), "X").is_err());
    }

    #[test]
    fn malformed_row_reports_line() {
        let f = file_with("date,price\n2022-01-03,1\n2022-01-04,abc\n");
        match load_price_series::<f64>(f.path(), "X").unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn single_row_is_too_short() {
        let f = file_with("date,price\n2022-01-03,1\n");
        assert!(matches!(
            load_price_series::<f64>(f.path(), "X"),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn empty_dividend_file_has_no_observations() {
        let f = file_with("");
        let err = load_dividends::<f64>(f.path(), "X").unwrap_err();
        assert!(err.to_string().contains("no observations"), "{err}");
        let f = file_with("date,dps\n");
        assert!(matches!(
            load_dividends::<f64>(f.path(), "X"),
            Err(Error::NoObservations { .. })
        ));
    }

    #[test]
    fn constant_dividends() {
        let f = file_with(
            "date,dps\n2022-01-03,1.0\n2022-01-04,1.0\n2022-01-05,1.0\n2022-01-06,1.0\n2022-01-07,1.0\n",
        );
        let d: DividendSeries<f64> = load_dividends(f.path(), "X").unwrap();
        assert_eq!(d.values(), &[1.0; 5]);
        assert_eq!(d.ordinals(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn negative_dividend_is_rejected() {
        let f = file_with("date,dps\n2022-01-03,1.0\n2022-01-04,-0.5\n");
        assert!(matches!(
            load_dividends::<f64>(f.path(), "X"),
            Err(Error::Parse { row: 3, .. })
        ));
    }

    #[test]
    fn dividends_align_to_price_ordinals() {
        let prices = PriceSeries::<f64>::from_values("X", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let dates = prices.dates().to_vec();
        let divs = DividendSeries::new("X", vec![(dates[3], 2.0), (dates[1], 1.0)]).unwrap();
        let aligned = divs.aligned_to(&prices).unwrap();
        assert_eq!(aligned.ordinals(), &[1, 3]);
        let stray = DividendSeries::new("X", vec![(NaiveDate::from_ymd_opt(1999, 1, 1).unwrap(), 1.0)]).unwrap();
        assert!(stray.aligned_to(&prices).is_err());
    }

    #[test]
    fn quotes_load_and_validate() {
        let f = file_with(
            "date,last,ttd_years,spot\n2022-01-03,101,0.25,100\n2022-01-04,102,0.25,101\n2022-01-05,103,0.25,102\n",
        );
        let q: QuoteSeries<f64> = load_quotes(f.path(), "CU3M").unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.quotes()[2].last, 103.0);

        let neg = file_with("date,last,ttd_years,spot\n2022-01-03,101,-0.25,100\n");
        assert!(load_quotes::<f64>(neg.path(), "X").is_err());
        let zero = file_with("date,last,ttd_years,spot\n2022-01-03,0,0.25,100\n");
        assert!(load_quotes::<f64>(zero.path(), "X").is_err());
    }

    #[test]
    fn wrong_header_is_rejected() {
        let f = file_with("day,close\n2022-01-03,1\n2022-01-04,2\n");
        assert!(matches!(
            load_price_series::<f64>(f.path(), "X"),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_price_series::<f64>("/nonexistent/prices.csv", "X"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn market_params_reject_non_positive_dt() {
        assert!(MarketParams::new(0.05, 0.0).is_err());
        let m = MarketParams::<f64>::daily(0.01);
        assert!((m.dt - 1.0 / 252.0).abs() < 1e-15);
    }
}
