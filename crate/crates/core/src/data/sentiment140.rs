use std::io::Read;

use crate::error::{Error, Result};

/// One usable row of a Sentiment140 file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 0 = negative (target 0), 1 = positive (target 4).
    pub label: u8,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub records: Vec<RawRecord>,
    pub skipped: usize,
}

fn decode(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_owned(),
        // Latin-1 maps each byte to the code point of the same value.
        Err(_) => bytes.iter().map(|&b| char::from(b)).collect(),
    }
}

/// Reads the six-column Sentiment140 CSV (`target,id,date,flag,user,text`,
/// no header). Rows with the wrong arity or a target other than 0 or 4 are
/// skipped and counted; if more than half the rows are skipped the input is
/// rejected.
pub fn parse_sentiment140<R: Read>(input: R) -> Result<ParsedCorpus> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut row = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                skipped += 1;
                continue;
            }
        }
        if row.len() != 6 {
            skipped += 1;
            continue;
        }
        let label = match row[0].trim_ascii() {
            b"0" => 0,
            b"4" => 1,
            _ => {
                skipped += 1;
                continue;
            }
        };
        records.push(RawRecord {
            label,
            text: decode(&row[5]),
        });
    }
    let total = records.len() + skipped;
    if skipped * 2 > total {
        return Err(Error::NotSentiment140 { skipped, total });
    }
    Ok(ParsedCorpus { records, skipped })
}
