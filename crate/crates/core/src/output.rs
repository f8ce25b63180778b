//! CSV/JSON artifacts for runs, baselines and statistics.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baseline::BaselineOutput;
use crate::engine::{PriceSeries, RunOutput};
use crate::lattice::SpinLattice;
use crate::orderbook::{OrderEvent, Trade};
use crate::stats::{self, IntervalReport, Reference};
use crate::Error;

pub const PRICES_CSV: &str = "prices.csv";
pub const TRADES_CSV: &str = "trades.csv";
pub const EVENTS_CSV: &str = "events.csv";
pub const MAGNETIZATION_CSV: &str = "magnetization.csv";
pub const LATTICE_TXT: &str = "lattice.txt";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CONFIG_TOML: &str = "config.toml";
pub const RETURNS_CSV: &str = "returns.csv";

/// Creates `dir` (and parents) and checks that it is writable.
pub fn prepare_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::OutputDir(dir.to_path_buf(), e))?;
    let probe = dir.join(".write-probe");
    File::create(&probe)
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| Error::OutputDir(dir.to_path_buf(), e))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, Error> {
    let file = File::create(path).map_err(|e| Error::Write(path.to_path_buf(), e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn write_prices(path: &Path, series: &PriceSeries) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["time", "price_ticks", "trades", "M"])?;
    for t in 0..series.len() {
        w.write_record([
            t.to_string(),
            series.prices[t].to_string(),
            series.trades[t].to_string(),
            series.magnetization[t].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trades(path: &Path, trades: &[Trade]) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["time", "price_ticks", "volume", "buy_trader", "sell_trader"])?;
    for t in trades {
        w.write_record([
            t.time.to_string(),
            t.price.ticks().to_string(),
            t.volume.to_string(),
            t.buy_trader.to_string(),
            t.sell_trader.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_order_events(path: &Path, events: &[OrderEvent]) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["time", "event", "order_id", "side", "kind", "price_ticks", "volume"])?;
    for e in events {
        w.write_record([
            e.time.to_string(),
            e.event.as_str().to_string(),
            e.order_id.to_string(),
            e.side.as_str().to_string(),
            if e.market { "market" } else { "limit" }.to_string(),
            e.price.map(|p| p.ticks().to_string()).unwrap_or_default(),
            e.volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_magnetization(path: &Path, series: &PriceSeries) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["time", "M"])?;
    for (t, m) in series.magnetization.iter().enumerate() {
        w.write_record([t.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_lattice(path: &Path, lattice: &SpinLattice) -> Result<(), Error> {
    fs::write(path, lattice.snapshot()).map_err(|e| Error::Write(path.to_path_buf(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Write(path.to_path_buf(), e))
}

/// Writes every artifact of one run into `dir`.
pub fn write_run(dir: &Path, out: &RunOutput) -> Result<(), Error> {
    prepare_dir(dir)?;
    fs::write(dir.join(CONFIG_TOML), out.config.to_text())
        .map_err(|e| Error::Write(dir.join(CONFIG_TOML), e))?;
    write_prices(&dir.join(PRICES_CSV), &out.series)?;
    write_trades(&dir.join(TRADES_CSV), &out.trades)?;
    write_magnetization(&dir.join(MAGNETIZATION_CSV), &out.series)?;
    write_lattice(&dir.join(LATTICE_TXT), &out.final_lattice)?;
    if out.config.order_events {
        write_order_events(&dir.join(EVENTS_CSV), &out.order_events)?;
    }
    write_json(&dir.join(SUMMARY_JSON), &out.summary)
}

pub fn write_baseline(path: &Path, out: &BaselineOutput) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["time", "r_l", "M"])?;
    for (t, r) in out.log_returns.iter().enumerate() {
        w.write_record([t.to_string(), r.to_string(), out.magnetization[t + 1].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, Error> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Read(path.to_path_buf(), e.to_string()))?;
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Read(path.to_path_buf(), format!("missing column `{column}`")))?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = &record[idx];
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Read(path.to_path_buf(), format!("bad number `{field}`")))?;
        values.push(v);
    }
    Ok(values)
}

pub fn read_prices(path: &Path) -> Result<Vec<f64>, Error> {
    read_column(path, "price_ticks")
}

/// Price path implied by a baseline log-return series, starting at 1.
pub fn read_baseline_prices(path: &Path) -> Result<Vec<f64>, Error> {
    let log_returns = read_column(path, "r_l")?;
    let mut prices = Vec::with_capacity(log_returns.len() + 1);
    let mut log_p = 0.0;
    prices.push(1.0);
    for r in log_returns {
        log_p += r;
        prices.push(log_p.exp());
    }
    Ok(prices)
}

/// Locates the price input inside a run or baseline directory.
pub fn load_price_input(dir: &Path) -> Result<Vec<f64>, Error> {
    let prices = dir.join(PRICES_CSV);
    if prices.exists() {
        return read_prices(&prices);
    }
    let returns = dir.join(RETURNS_CSV);
    if returns.exists() {
        return read_baseline_prices(&returns);
    }
    Err(Error::MissingInput(dir.to_path_buf()))
}

#[derive(Debug, Clone, Copy)]
pub struct HistogramSpec {
    pub bins: usize,
    pub g_range: (f64, f64),
    pub vol_bins: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec { bins: 101, g_range: (-10.0, 10.0), vol_bins: 60 }
    }
}

/// Writes the per-interval distribution and ACF files plus `summary.csv`.
pub fn write_stats(dir: &Path, reports: &[IntervalReport], spec: HistogramSpec) -> Result<Vec<PathBuf>, Error> {
    prepare_dir(dir)?;
    let mut written = Vec::new();
    for rep in reports {
        let dt = rep.dt;

        let g_hist = stats::histogram(&rep.normalized, spec.bins, Some(spec.g_range), Reference::Normal)?;
        let path = dir.join(format!("gdist_dt{dt}.csv"));
        write_histogram(&path, &g_hist)?;
        written.push(path);

        let path = dir.join(format!("gdist_log_dt{dt}.csv"));
        let mut w = writer(&path)?;
        w.write_record(["abs_g_center", "density"])?;
        for (c, d) in stats::log_abs_histogram(&rep.normalized, 40, 1e-3, 1e2)? {
            w.write_record([c.to_string(), d.to_string()])?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join(format!("voldist_dt{dt}.csv"));
        match stats::histogram(&rep.volatility, spec.vol_bins, None, Reference::LogNormal) {
            Ok(h) => write_histogram(&path, &h)?,
            Err(stats::StatsError::Empty) => {
                log::warn!("dt={dt}: every volatility window is zero, writing empty distribution");
                let mut w = writer(&path)?;
                w.write_record(["bin_center", "density", "reference"])?;
                w.flush()?;
            }
            Err(e) => return Err(e.into()),
        }
        written.push(path);

        let path = dir.join(format!("acf_dt{dt}.csv"));
        let mut w = writer(&path)?;
        w.write_record(["tau", "acf", "acf_normalized"])?;
        let acf0 = rep.acf.first().copied().unwrap_or(f64::NAN);
        for (tau, v) in rep.acf_taus.iter().zip(&rep.acf) {
            w.write_record([tau.to_string(), v.to_string(), (v / acf0).to_string()])?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("summary.csv");
    let mut w = writer(&path)?;
    w.write_record(["dt", "sigma", "excess_kurtosis", "n_samples", "zero_return_fraction", "zero_vol_windows"])?;
    for rep in reports {
        let zero_windows = rep.volatility.iter().filter(|&&v| v == 0.0).count();
        w.write_record([
            rep.dt.to_string(),
            rep.returns.std.to_string(),
            rep.excess_kurtosis.to_string(),
            rep.returns.len().to_string(),
            rep.returns.zero_fraction().to_string(),
            zero_windows.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}

fn write_histogram(path: &Path, h: &stats::Histogram) -> Result<(), Error> {
    let mut w = writer(path)?;
    w.write_record(["bin_center", "density", "reference"])?;
    for ((c, d), r) in h.centers().iter().zip(&h.density).zip(&h.reference) {
        w.write_record([c.to_string(), d.to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
