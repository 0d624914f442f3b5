//! Contract tables used by the evaluation pipeline.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::Result;
use crate::market_data::{parse_date, parse_number, read_rows, row_error, write_csv};
use crate::pricing::options::{ExerciseStyle, OptionContract, OptionSide};
use crate::scalar::Scalar;

pub const OPTION_HEADER: [&str; 7] = ["date", "side", "style", "strike", "expiry_years", "spot", "price"];

/// One observed option price.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionQuote<S> {
    pub date: NaiveDate,
    pub contract: OptionContract<S>,
    pub spot: S,
    pub price: S,
}

pub fn load_option_quotes<S: Scalar>(path: impl AsRef<Path>, underlying: &str) -> Result<Vec<OptionQuote<S>>> {
    let path = path.as_ref();
    let rows = read_rows(path, &OPTION_HEADER)?;
    rows.iter()
        .map(|(line, rec)| {
            let line = *line;
            let date = parse_date(path, line, &rec[0])?;
            let side: OptionSide = rec[1].parse().map_err(|e| row_error(path, line, format!("{e}")))?;
            let style: ExerciseStyle = rec[2].parse().map_err(|e| row_error(path, line, format!("{e}")))?;
            let strike: S = parse_number(path, line, &rec[3], "strike")?;
            let expiry: S = parse_number(path, line, &rec[4], "expiry_years")?;
            let spot: S = parse_number(path, line, &rec[5], "spot")?;
            let price: S = parse_number(path, line, &rec[6], "price")?;
            if !(spot > S::zero()) {
                return Err(row_error(path, line, format!("spot must be positive, got {}", &rec[5])));
            }
            let contract = OptionContract::new(side, style, strike, expiry, underlying)
                .map_err(|e| row_error(path, line, e.to_string()))?;
            Ok(OptionQuote {
                date,
                contract,
                spot,
                price,
            })
        })
        .collect()
}

pub fn write_option_quotes<S: Scalar>(path: impl AsRef<Path>, quotes: &[OptionQuote<S>]) -> Result<()> {
    write_csv(
        path.as_ref(),
        &OPTION_HEADER,
        quotes.iter().map(|q| {
            vec![
                q.date.to_string(),
                q.contract.side.to_string(),
                q.contract.style.to_string(),
                q.contract.strike.as_f64().to_string(),
                q.contract.expiry.as_f64().to_string(),
                q.spot.as_f64().to_string(),
                q.price.as_f64().to_string(),
            ]
        }),
    )
}
