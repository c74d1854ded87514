//! CSV ingestion and export of fund histories.
//!
//! | file          | columns                                                    |
//! |---------------|------------------------------------------------------------|
//! | funds.csv     | `time,fund_id,units,unit_value[,post_units,post_value,net_flow,withdrawn_units,invested_units]` |
//! | prices.csv    | `time,asset_id,price`                                      |
//! | holdings.csv  | `time,fund_id,asset_id,asset_units`                        |
//! | mergers.csv   | `time,absorbed,survivor,post_units`                        |
//!
//! Optional columns may be missing or left empty. A fund absorbed in a merger
//! has no rows after the merger time; the survivor's post-merger state is
//! derived from `mergers.csv` and is not written to `funds.csv`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ledger::{FundId, FundLedger, GroupHistory, MarketPath, MergerEvent, Observation, Time};

/// Line of `funds.csv` holding each `(fund, t)` row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceMap {
    pub file: String,
    rows: HashMap<(FundId, Time), u64>,
}

impl SourceMap {
    pub fn line(&self, fund: &FundId, t: Time) -> Option<u64> {
        self.rows.get(&(fund.clone(), t)).copied()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvPaths<'a> {
    pub funds: Option<&'a Path>,
    pub prices: Option<&'a Path>,
    pub holdings: Option<&'a Path>,
    pub mergers: Option<&'a Path>,
}

#[derive(Debug, Clone)]
pub struct LoadedHistory {
    pub history: GroupHistory,
    pub mergers: Vec<MergerEvent>,
    pub source: SourceMap,
}

fn parse_err(file: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// A header-indexed view over one CSV file.
struct Table {
    file: String,
    columns: HashMap<String, usize>,
    records: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(reader: R, file: &str, required: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        for c in required {
            if !columns.contains_key(*c) {
                return Err(parse_err(file, 1, format!("missing column `{c}`")));
            }
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(file, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            records.push((line, rec));
        }
        Ok(Self {
            file: file.to_string(),
            columns,
            records,
        })
    }

    fn cell<'r>(&self, rec: &'r csv::StringRecord, col: &str) -> Option<&'r str> {
        self.columns
            .get(col)
            .and_then(|&i| rec.get(i))
            .filter(|s| !s.is_empty())
    }

    fn text<'r>(&self, line: u64, rec: &'r csv::StringRecord, col: &str) -> Result<&'r str> {
        self.cell(rec, col)
            .ok_or_else(|| parse_err(&self.file, line, format!("empty `{col}`")))
    }

    fn time(&self, line: u64, rec: &csv::StringRecord) -> Result<Time> {
        let s = self.text(line, rec, "time")?;
        s.parse()
            .map_err(|_| parse_err(&self.file, line, format!("time `{s}` is not a non-negative integer")))
    }

    fn real(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<Option<f64>> {
        match self.cell(rec, col) {
            None => Ok(None),
            Some(s) => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| parse_err(&self.file, line, format!("`{col}` value `{s}` is not a number")))?;
                if x.is_finite() {
                    Ok(Some(x))
                } else {
                    Err(parse_err(&self.file, line, format!("`{col}` must be finite")))
                }
            }
        }
    }

    fn required_real(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<f64> {
        self.real(line, rec, col)?
            .ok_or_else(|| parse_err(&self.file, line, format!("empty `{col}`")))
    }

    fn positive(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<Option<f64>> {
        match self.real(line, rec, col)? {
            Some(x) if x <= 0.0 => Err(parse_err(
                &self.file,
                line,
                format!("`{col}` must be positive, got {x}"),
            )),
            other => Ok(other),
        }
    }

    fn required_positive(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<f64> {
        self.positive(line, rec, col)?
            .ok_or_else(|| parse_err(&self.file, line, format!("empty `{col}`")))
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

/// Per-fund observations keyed by time, in order of first appearance.
#[derive(Debug)]
pub struct FundRows {
    file: String,
    order: Vec<FundId>,
    rows: HashMap<FundId, BTreeMap<Time, (u64, Observation)>>,
}

pub fn read_funds<R: Read>(reader: R, file: &str) -> Result<FundRows> {
    let table = Table::read(reader, file, &["time", "fund_id", "units", "unit_value"])?;
    let mut order = Vec::new();
    let mut rows: HashMap<FundId, BTreeMap<Time, (u64, Observation)>> = HashMap::new();
    for (line, rec) in &table.records {
        let line = *line;
        let t = table.time(line, rec)?;
        let id = FundId::from(table.text(line, rec, "fund_id")?);
        let units = table.required_positive(line, rec, "units")?;
        let value = table.required_positive(line, rec, "unit_value")?;
        let mut o = Observation::new(units, value);
        match (
            table.positive(line, rec, "post_units")?,
            table.positive(line, rec, "post_value")?,
        ) {
            (None, None) => {}
            (Some(k), Some(w)) => o = o.with_post(k, w),
            (Some(k), None) => o = o.with_post(k, units * value / k),
            (None, Some(w)) => o = o.with_post(units * value / w, w),
        }
        o.net_flow = table.real(line, rec, "net_flow")?;
        let withdrawn = table.real(line, rec, "withdrawn_units")?;
        let invested = table.real(line, rec, "invested_units")?;
        for (col, x) in [("withdrawn_units", withdrawn), ("invested_units", invested)] {
            if x.is_some_and(|x| x < 0.0) {
                return Err(parse_err(file, line, format!("`{col}` must be non-negative")));
            }
        }
        o.withdrawn = withdrawn;
        o.invested = invested;
        let entry = rows.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            BTreeMap::new()
        });
        if let Some((first, _)) = entry.get(&t) {
            return Err(parse_err(
                file,
                line,
                format!("fund {id} at time {t} already given on line {first}"),
            ));
        }
        entry.insert(t, (line, o));
    }
    if order.is_empty() {
        return Err(parse_err(file, 1, "no fund rows"));
    }
    for id in &order {
        for (expected, (&t, (line, _))) in rows[id].iter().enumerate() {
            if t != expected {
                return Err(parse_err(
                    file,
                    *line,
                    format!("fund {id} has no row for time {expected}"),
                ));
            }
        }
    }
    Ok(FundRows {
        file: file.to_string(),
        order,
        rows,
    })
}

pub fn read_prices<R: Read>(reader: R, file: &str) -> Result<MarketPath> {
    let table = Table::read(reader, file, &["time", "asset_id", "price"])?;
    let mut ids: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(Time, usize), (u64, f64)> = BTreeMap::new();
    let mut horizon = 0;
    for (line, rec) in &table.records {
        let line = *line;
        let t = table.time(line, rec)?;
        let asset = table.text(line, rec, "asset_id")?;
        let price = table.required_real(line, rec, "price")?;
        if price < 0.0 {
            return Err(parse_err(file, line, format!("price {price} is negative")));
        }
        let j = match ids.iter().position(|a| a == asset) {
            Some(j) => j,
            None => {
                ids.push(asset.to_string());
                ids.len() - 1
            }
        };
        if let Some((first, _)) = cells.insert((t, j), (line, price)) {
            return Err(parse_err(
                file,
                line,
                format!("asset {asset} at time {t} already given on line {first}"),
            ));
        }
        horizon = horizon.max(t);
    }
    if ids.is_empty() {
        return Err(parse_err(file, 1, "no price rows"));
    }
    let mut prices = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let mut row = Vec::with_capacity(ids.len());
        for (j, a) in ids.iter().enumerate() {
            match cells.get(&(t, j)) {
                Some((_, p)) => row.push(*p),
                None => {
                    return Err(Error::MissingData(format!(
                        "{file}: no price for asset {a} at time {t}"
                    )))
                }
            }
        }
        prices.push(row);
    }
    MarketPath::new(ids, prices)
}

/// Attaches holdings to the fund rows. Every `(fund, t)` that appears must
/// list every asset of the market.
pub fn read_holdings<R: Read>(reader: R, file: &str, funds: &mut FundRows, market: &MarketPath) -> Result<()> {
    let table = Table::read(reader, file, &["time", "fund_id", "asset_id", "asset_units"])?;
    let n = market.n_assets();
    let mut collected: BTreeMap<(FundId, Time), (u64, Vec<Option<f64>>)> = BTreeMap::new();
    for (line, rec) in &table.records {
        let line = *line;
        let t = table.time(line, rec)?;
        let id = FundId::from(table.text(line, rec, "fund_id")?);
        let asset = table.text(line, rec, "asset_id")?;
        let x = table.required_real(line, rec, "asset_units")?;
        let j = market
            .asset_ids()
            .iter()
            .position(|a| a == asset)
            .ok_or_else(|| parse_err(file, line, format!("unknown asset {asset}")))?;
        if !funds.rows.get(&id).is_some_and(|r| r.contains_key(&t)) {
            return Err(parse_err(file, line, format!("no fund row for {id} at time {t}")));
        }
        let entry = collected
            .entry((id.clone(), t))
            .or_insert_with(|| (line, vec![None; n]));
        if entry.1[j].replace(x).is_some() {
            return Err(parse_err(
                file,
                line,
                format!("fund {id} asset {asset} at time {t} given twice"),
            ));
        }
    }
    for ((id, t), (line, cells)) in collected {
        let mut u = Vec::with_capacity(n);
        for (j, c) in cells.into_iter().enumerate() {
            match c {
                Some(x) => u.push(x),
                None => {
                    return Err(Error::MissingData(format!(
                        "{file}: fund {id} at time {t} (first row on line {line}) has no holding of asset {}",
                        market.asset_ids()[j]
                    )))
                }
            }
        }
        let (_, o) = funds.rows.get_mut(&id).expect("checked").get_mut(&t).expect("checked");
        o.holdings = Some(u);
    }
    Ok(())
}

pub fn read_mergers<R: Read>(reader: R, file: &str) -> Result<Vec<MergerEvent>> {
    let table = Table::read(reader, file, &["time", "absorbed", "survivor", "post_units"])?;
    let mut events = Vec::new();
    for (line, rec) in &table.records {
        let line = *line;
        let t = table.time(line, rec)?;
        let absorbed = table.text(line, rec, "absorbed")?;
        let survivor = table.text(line, rec, "survivor")?;
        let k = table.required_positive(line, rec, "post_units")?;
        events.push(MergerEvent::new(absorbed, survivor, t, k));
    }
    Ok(events)
}

/// Builds the history from parsed rows. Consistency errors cite the first
/// row of the fund concerned.
pub fn assemble(rows: FundRows, market: Option<MarketPath>, mergers: &[MergerEvent]) -> Result<LoadedHistory> {
    let mut source = SourceMap {
        file: rows.file.clone(),
        rows: HashMap::new(),
    };
    let mut funds = Vec::with_capacity(rows.order.len());
    let mut rows = rows;
    for id in &rows.order {
        let series = rows.rows.remove(id).expect("every ordered id has rows");
        let mut obs = Vec::with_capacity(series.len());
        for (t, (line, o)) in series {
            source.rows.insert((id.clone(), t), line);
            obs.push(o);
        }
        funds.push(FundLedger::new(id.clone(), obs)?);
    }
    let first_line = |id: &FundId| source.line(id, 0).unwrap_or(0);
    let history = GroupHistory::with_mergers(funds, market, mergers).map_err(|e| match &e {
        Error::InvalidHistory(m) | Error::InvalidEvent(m) => {
            let line = mergers
                .iter()
                .find(|ev| m.contains(ev.absorbed.as_str()) || m.contains(ev.survivor.as_str()))
                .map_or(0, |ev| first_line(&ev.survivor));
            parse_err(&source.file, line, m.clone())
        }
        _ => e,
    })?;
    Ok(LoadedHistory {
        history,
        mergers: mergers.to_vec(),
        source,
    })
}

pub fn load_history(paths: CsvPaths<'_>) -> Result<LoadedHistory> {
    let funds_path = paths
        .funds
        .ok_or_else(|| Error::MissingData("a funds.csv file is required".into()))?;
    let mut rows = read_funds(open(funds_path)?, &name(funds_path))?;
    let market = match paths.prices {
        Some(p) => Some(read_prices(open(p)?, &name(p))?),
        None => None,
    };
    if let Some(p) = paths.holdings {
        let m = market
            .as_ref()
            .ok_or_else(|| Error::MissingData("holdings need a prices file".into()))?;
        read_holdings(open(p)?, &name(p), &mut rows, m)?;
    }
    let mergers = match paths.mergers {
        Some(p) => read_mergers(open(p)?, &name(p))?,
        None => Vec::new(),
    };
    assemble(rows, market, &mergers)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_funds<W: Write>(h: &GroupHistory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time",
        "fund_id",
        "units",
        "unit_value",
        "post_units",
        "post_value",
        "net_flow",
        "withdrawn_units",
        "invested_units",
    ])
    .map_err(csv_err)?;
    for t in 0..=h.horizon() {
        for f in h.funds().iter().filter(|f| f.present_at(t)) {
            let o = &f.observations()[t];
            let merged = h
                .mergers()
                .iter()
                .any(|m| m.event.time == t && &m.event.survivor == f.id());
            let post = o.post.filter(|_| !merged);
            w.write_record([
                t.to_string(),
                f.id().to_string(),
                o.units.to_string(),
                o.value.to_string(),
                opt(post.map(|p| p.units)),
                opt(post.map(|p| p.value)),
                opt(o.net_flow),
                opt(o.withdrawn),
                opt(o.invested),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_prices<W: Write>(m: &MarketPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "asset_id", "price"]).map_err(csv_err)?;
    for t in 0..=m.horizon() {
        for (j, a) in m.asset_ids().iter().enumerate() {
            w.write_record([t.to_string(), a.clone(), m.price(j, t).to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every recorded holding; nothing is written for observations
/// without holdings.
pub fn write_holdings<W: Write>(h: &GroupHistory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "fund_id", "asset_id", "asset_units"])
        .map_err(csv_err)?;
    let ids: Vec<String> = h.market().map(|m| m.asset_ids().to_vec()).unwrap_or_default();
    for t in 0..=h.horizon() {
        for f in h.funds().iter().filter(|f| f.present_at(t)) {
            if let Some(u) = &f.observations()[t].holdings {
                for (a, x) in ids.iter().zip(u) {
                    w.write_record([t.to_string(), f.id().to_string(), a.clone(), x.to_string()])
                        .map_err(csv_err)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_mergers<W: Write>(h: &GroupHistory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "absorbed", "survivor", "post_units"])
        .map_err(csv_err)?;
    for m in h.mergers() {
        let e = &m.event;
        w.write_record([
            e.time.to_string(),
            e.absorbed.to_string(),
            e.survivor.to_string(),
            e.post_units.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `funds.csv`, plus `prices.csv` and `holdings.csv` when the history
/// has a market and `mergers.csv` when it has mergers, into `dir`.
pub fn export_history(h: &GroupHistory, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let funds = dir.join("funds.csv");
    write_funds(h, create(&funds)?)?;
    written.push(funds);
    if let Some(m) = h.market() {
        let prices = dir.join("prices.csv");
        write_prices(m, create(&prices)?)?;
        written.push(prices);
        let holdings = dir.join("holdings.csv");
        write_holdings(h, create(&holdings)?)?;
        written.push(holdings);
    }
    if !h.mergers().is_empty() {
        let mergers = dir.join("mergers.csv");
        write_mergers(h, create(&mergers)?)?;
        written.push(mergers);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::merger_example_history;

    const FUNDS: &str = "time,fund_id,units,unit_value\n0,A,100,1.0\n0,B,50,2.0\n1,A,110,1.1\n1,B,50,2.2\n";

    #[test]
    fn reads_minimal_funds_file() {
        let rows = read_funds(FUNDS.as_bytes(), "funds.csv").unwrap();
        let loaded = assemble(rows, None, &[]).unwrap();
        let h = loaded.history;
        assert_eq!(h.horizon(), 1);
        assert_eq!(h.funds()[1].value(1).unwrap(), 2.2);
        assert_eq!(loaded.source.line(&"B".into(), 1), Some(5));
    }

    #[test]
    fn bad_cells_cite_their_line() {
        let text = "time,fund_id,units,unit_value\n0,A,100,1.0\n1,A,-3,1.0\n";
        match read_funds(text.as_bytes(), "f.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "time,fund_id,units,unit_value\n0,A,100,abc\n";
        assert!(matches!(
            read_funds(text.as_bytes(), "f.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "time,fund_id,units\n0,A,100\n";
        assert!(matches!(
            read_funds(text.as_bytes(), "f.csv"),
            Err(Error::Parse { line: 1, .. })
        ));
        let gap = "time,fund_id,units,unit_value\n0,A,1,1\n2,A,1,1\n";
        assert!(matches!(
            read_funds(gap.as_bytes(), "f.csv"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn incomplete_holdings_are_missing_data() {
        let prices = "time,asset_id,price\n0,X,1\n0,Y,2\n1,X,1\n1,Y,2\n";
        let market = read_prices(prices.as_bytes(), "p.csv").unwrap();
        let mut rows = read_funds(FUNDS.as_bytes(), "f.csv").unwrap();
        let holdings = "time,fund_id,asset_id,asset_units\n0,A,X,100\n";
        assert!(matches!(
            read_holdings(holdings.as_bytes(), "h.csv", &mut rows, &market),
            Err(Error::MissingData(_))
        ));
    }

    #[test]
    fn merger_example_round_trip() {
        let h = merger_example_history().unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_history(&h, dir.path()).unwrap();
        let funds = dir.path().join("funds.csv");
        let mergers = dir.path().join("mergers.csv");
        let loaded = load_history(CsvPaths {
            funds: Some(&funds),
            mergers: Some(&mergers),
            ..CsvPaths::default()
        })
        .unwrap();
        assert_eq!(loaded.history, h);
    }
}
