//! Scenario ingestion, validation, seasonal splitting, and a seeded synthetic
//! scenario generator.
//!
//! A scenario is one day of 24 hourly records. The CSV schema has one row per
//! hour with these columns (header names are fixed):
//!
//! | column                   | unit      |
//! |--------------------------|-----------|
//! | `datetime`               | `YYYY-MM-DD HH:MM[:SS]` or with `T` |
//! | `temperature_c`          | °C        |
//! | `wind_mps`               | m/s       |
//! | `solar_wm2`              | W/m²      |
//! | `streamflow_cms`         | m³/s      |
//! | `price_prior_rt_usd_mwh` | $/MWh     |
//! | `price_rt_usd_mwh`       | $/MWh     |
//! | `gas_usd_dth`            | $/dth     |
//! | `load_kw`                | kW        |
//! | `heat_load_klbh`         | klb/h     |
//! | `solar_kw`               | kW        |
//! | `hydro_kw`               | kW        |
//!
//! Electricity prices are converted to $/kWh on load. Optional columns
//! `init_chp1_kw`, `init_chp2_kw`, ... read from the first hour of each day
//! give the CHP output of the hour before the day starts (0 means off).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::environment::{HiddenState, ObservableState};
use crate::error::{Error, Result};
use crate::grid::{Action, Season};

pub const HOURS_PER_DAY: usize = 24;

pub const COLUMNS: [&str; 12] = [
    "datetime",
    "temperature_c",
    "wind_mps",
    "solar_wm2",
    "streamflow_cms",
    "price_prior_rt_usd_mwh",
    "price_rt_usd_mwh",
    "gas_usd_dth",
    "load_kw",
    "heat_load_klbh",
    "solar_kw",
    "hydro_kw",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub observable: ObservableState,
    pub hidden: HiddenState,
    /// $/dth
    pub gas_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Calendar date, `YYYY-MM-DD`.
    pub date: String,
    pub hours: Vec<HourRecord>,
    /// Dispatch of the hour preceding the first record, if known.
    #[serde(default)]
    pub initial_action: Option<Action>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::domain(format!("scenario {}: {msg}", self.date));
        if self.hours.len() != HOURS_PER_DAY {
            return Err(bad(format!("has {} hourly records, expected 24", self.hours.len())));
        }
        for (t, r) in self.hours.iter().enumerate() {
            let o = &r.observable;
            let h = &r.hidden;
            let values = [
                o.temperature, o.wind_speed, o.solar_radiation, o.streamflow,
                o.prior_day_rt_price, h.electric_load, h.heat_load, h.solar_output,
                h.hydro_output, h.rt_price, r.gas_price,
            ];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("hour {t} has a non-finite value")));
            }
            if o.hour_of_day as usize != t {
                return Err(bad(format!("record {t} is labelled hour {}", o.hour_of_day)));
            }
            if h.electric_load <= 0.0 {
                return Err(bad(format!("hour {t}: electric load must be positive")));
            }
            if h.heat_load < 0.0 || h.solar_output < 0.0 || h.hydro_output < 0.0 {
                return Err(bad(format!("hour {t}: loads and renewable output must be nonnegative")));
            }
        }
        Ok(())
    }

    pub fn parsed_date(&self) -> Result<NaiveDate> {
        NaiveDate::parse_from_str(&self.date, "%Y-%m-%d")
            .map_err(|e| Error::domain(format!("unparseable date {:?}: {e}", self.date)))
    }
}

/// Season of a calendar month: October through April is winter.
pub fn season_of(date: NaiveDate) -> Season {
    match date.month() {
        5..=9 => Season::Summer,
        _ => Season::Winter,
    }
}

/// Splits scenarios into `(winter, summer)` preserving order.
pub fn split_by_season(scenarios: &[Scenario]) -> Result<(Vec<Scenario>, Vec<Scenario>)> {
    let mut winter = Vec::new();
    let mut summer = Vec::new();
    for s in scenarios {
        match season_of(s.parsed_date()?) {
            Season::Winter => winter.push(s.clone()),
            Season::Summer => summer.push(s.clone()),
        }
    }
    Ok((winter, summer))
}

fn parse_datetime(text: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text.trim(), f).ok())
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    if !path.exists() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_scenarios(file, &path.display().to_string())
}

/// Parses scenarios from CSV text. `source` names the input in error messages.
pub fn read_scenarios<R: Read>(reader: R, source: &str) -> Result<Vec<Scenario>> {
    let err = |row: usize, message: String| Error::Load {
        path: source.to_string(),
        row,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut col = HashMap::new();
    for name in COLUMNS {
        match index.get(name) {
            Some(&i) => {
                col.insert(name, i);
            }
            None => return Err(err(1, format!("missing column `{name}`"))),
        }
    }
    let init_cols: Vec<usize> = (1..)
        .map_while(|i| index.get(format!("init_chp{i}_kw").as_str()).copied())
        .collect();

    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut current: Option<(NaiveDate, usize, Scenario)> = None;
    let mut seen = std::collections::HashSet::new();

    let finish = |cur: Option<(NaiveDate, usize, Scenario)>, out: &mut Vec<Scenario>| -> Result<()> {
        if let Some((_, first_row, s)) = cur {
            if s.hours.len() != HOURS_PER_DAY {
                return Err(err(
                    first_row,
                    format!("partial day {}: {} rows, expected 24", s.date, s.hours.len()),
                ));
            }
            out.push(s);
        }
        Ok(())
    };

    for (i, rec) in rdr.records().enumerate() {
        // Header is line 1.
        let row = i + 2;
        let rec = rec.map_err(|e| err(row, e.to_string()))?;
        let field = |name: &str| rec.get(col[name]).unwrap_or("");
        let num = |name: &str| -> Result<f64> {
            let text = field(name);
            let v: f64 = text
                .parse()
                .map_err(|_| err(row, format!("column `{name}`: cannot parse {text:?}")))?;
            if !v.is_finite() {
                return Err(err(row, format!("column `{name}`: non-finite value {text}")));
            }
            Ok(v)
        };
        let dt = parse_datetime(field("datetime"))
            .ok_or_else(|| err(row, format!("unparseable datetime {:?}", field("datetime"))))?;
        let date = dt.date();
        let hour = dt.hour();

        let same_day = matches!(&current, Some((d, _, _)) if *d == date);
        if !same_day {
            finish(current.take(), &mut scenarios)?;
            if !seen.insert(date) {
                return Err(err(row, format!("day {date} is not contiguous in the file")));
            }
            let mut initial_action = None;
            if !init_cols.is_empty() {
                let mut a = Action::idle(init_cols.len());
                for (k, &c) in init_cols.iter().enumerate() {
                    let text = rec.get(c).unwrap_or("");
                    let p: f64 = text.parse().map_err(|_| {
                        err(row, format!("column `init_chp{}_kw`: cannot parse {text:?}", k + 1))
                    })?;
                    if !p.is_finite() || p < 0.0 {
                        return Err(err(row, format!("invalid initial CHP power {text}")));
                    }
                    a.chp_power[k] = p;
                    a.chp_on[k] = p > 0.0;
                }
                a.boiler_on = true;
                initial_action = Some(a);
            }
            current = Some((
                date,
                row,
                Scenario {
                    date: date.format("%Y-%m-%d").to_string(),
                    hours: Vec::with_capacity(HOURS_PER_DAY),
                    initial_action,
                },
            ));
        }
        let (_, _, scenario) = current.as_mut().expect("current day is set");
        if scenario.hours.len() >= HOURS_PER_DAY {
            return Err(err(row, format!("partial day {date}: more than 24 rows")));
        }
        if hour as usize != scenario.hours.len() {
            return Err(err(
                row,
                format!("expected hour {} of {date}, found hour {hour}", scenario.hours.len()),
            ));
        }
        let record = HourRecord {
            observable: ObservableState {
                temperature: num("temperature_c")?,
                wind_speed: num("wind_mps")?,
                solar_radiation: num("solar_wm2")?,
                streamflow: num("streamflow_cms")?,
                prior_day_rt_price: num("price_prior_rt_usd_mwh")? / 1000.0,
                hour_of_day: hour as u8,
            },
            hidden: HiddenState {
                electric_load: num("load_kw")?,
                heat_load: num("heat_load_klbh")?,
                solar_output: num("solar_kw")?,
                hydro_output: num("hydro_kw")?,
                rt_price: num("price_rt_usd_mwh")? / 1000.0,
            },
            gas_price: num("gas_usd_dth")?,
        };
        let h = &record.hidden;
        if h.electric_load <= 0.0 {
            return Err(err(row, "electric load must be positive".into()));
        }
        if h.heat_load < 0.0 || h.solar_output < 0.0 || h.hydro_output < 0.0 {
            return Err(err(row, "loads and renewable outputs must be nonnegative".into()));
        }
        scenario.hours.push(record);
    }
    finish(current, &mut scenarios)?;
    Ok(scenarios)
}

/// Shortest decimal text for `per_kwh × 1000` that divides back to exactly
/// `per_kwh`, when one exists near the product.
fn mwh_text(per_kwh: f64) -> String {
    let guess = per_kwh * 1000.0;
    let mut lo = guess;
    let mut hi = guess;
    for _ in 0..8 {
        for x in [lo, hi] {
            if x / 1000.0 == per_kwh {
                return format!("{x}");
            }
        }
        lo = lo.next_down();
        hi = hi.next_up();
    }
    format!("{guess}")
}

pub fn write_scenarios<W: Write>(writer: W, scenarios: &[Scenario]) -> Result<()> {
    let n_init = scenarios
        .iter()
        .filter_map(|s| s.initial_action.as_ref().map(|a| a.chp_power.len()))
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=n_init).map(|i| format!("init_chp{i}_kw")));
    w.write_record(&header)?;
    for s in scenarios {
        let date = s.parsed_date()?;
        for r in &s.hours {
            let o = &r.observable;
            let h = &r.hidden;
            let mut row = vec![
                format!("{date} {:02}:00", o.hour_of_day),
                format!("{}", o.temperature),
                format!("{}", o.wind_speed),
                format!("{}", o.solar_radiation),
                format!("{}", o.streamflow),
                mwh_text(o.prior_day_rt_price),
                mwh_text(h.rt_price),
                format!("{}", r.gas_price),
                format!("{}", h.electric_load),
                format!("{}", h.heat_load),
                format!("{}", h.solar_output),
                format!("{}", h.hydro_output),
            ];
            for k in 0..n_init {
                let p = s
                    .initial_action
                    .as_ref()
                    .and_then(|a| a.chp_power.get(k).copied())
                    .unwrap_or(0.0);
                row.push(format!("{p}"));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_scenarios(path: &Path, scenarios: &[Scenario]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_scenarios(std::io::BufWriter::new(file), scenarios)
}

/// `mean + amplitude·sin(2π(t − phase)/24) + D + N(0, noise²)`, floored at
/// `floor` when one is set. `D ~ N(0, day_noise²)` is drawn once per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub mean: f64,
    pub amplitude: f64,
    /// Hours. The sinusoid peaks at `phase + 6`.
    pub phase: f64,
    pub noise: f64,
    #[serde(default)]
    pub day_noise: f64,
    #[serde(default)]
    pub floor: Option<f64>,
}

impl SignalSpec {
    fn new(mean: f64, amplitude: f64, phase: f64, noise: f64, floor: Option<f64>) -> Self {
        SignalSpec {
            mean,
            amplitude,
            phase,
            noise,
            day_noise: 0.0,
            floor,
        }
    }

    fn with_day_noise(mut self, day_noise: f64) -> Self {
        self.day_noise = day_noise;
        self
    }

    fn deterministic(&self, t: usize) -> f64 {
        let angle = 2.0 * std::f64::consts::PI * (t as f64 - self.phase) / 24.0;
        self.mean + self.amplitude * angle.sin()
    }
}

/// Load driven by a diurnal sinusoid plus an affine temperature term:
/// `base + amplitude·sin(2π(t − phase)/24) + temp_coef·(T − temp_ref) + N(0, noise²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadRule {
    pub base: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub temp_coef: f64,
    pub temp_ref: f64,
    pub noise: f64,
}

/// Recipe for a deterministic synthetic scenario set.
///
/// Renewable output follows the weather: `solar_kw = solar_capacity_kw ·
/// solar_wm2 / 1000` and `hydro_kw = min(hydro_capacity_kw, hydro_kw_per_cms ·
/// streamflow)`. The real-time price follows `rt_price`; the prior-day price at
/// hour `t` is the previous day's real-time price at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub days: usize,
    pub season: Season,
    /// First date, `YYYY-MM-DD`.
    pub start_date: String,
    pub temperature: SignalSpec,
    pub wind_speed: SignalSpec,
    pub solar_radiation: SignalSpec,
    pub streamflow: SignalSpec,
    /// $/MWh
    pub rt_price: SignalSpec,
    /// $/dth, constant.
    pub gas_price: f64,
    pub electric_load: LoadRule,
    pub heat_load: LoadRule,
    pub solar_capacity_kw: f64,
    pub hydro_kw_per_cms: f64,
    pub hydro_capacity_kw: f64,
}

impl SyntheticSpec {
    pub fn winter(seed: u64, days: usize) -> Self {
        SyntheticSpec {
            seed,
            days,
            season: Season::Winter,
            start_date: "2019-01-07".into(),
            temperature: SignalSpec::new(-3.0, 4.0, 9.0, 1.0, None).with_day_noise(5.0),
            wind_speed: SignalSpec::new(4.5, 1.0, 9.0, 1.5, Some(0.0)),
            solar_radiation: SignalSpec::new(120.0, 220.0, 6.0, 40.0, Some(0.0)),
            streamflow: SignalSpec::new(6.0, 0.0, 0.0, 1.5, Some(0.1)),
            rt_price: SignalSpec::new(30.0, 10.0, 10.0, 6.0, None),
            gas_price: 3.0,
            electric_load: LoadRule {
                base: 30000.0,
                amplitude: 3000.0,
                phase: 8.0,
                temp_coef: -100.0,
                temp_ref: 0.0,
                noise: 800.0,
            },
            heat_load: LoadRule {
                base: 170.0,
                amplitude: 30.0,
                phase: 0.0,
                temp_coef: -7.0,
                temp_ref: 0.0,
                noise: 8.0,
            },
            solar_capacity_kw: 200.0,
            hydro_kw_per_cms: 150.0,
            hydro_capacity_kw: 1500.0,
        }
    }

    pub fn summer(seed: u64, days: usize) -> Self {
        SyntheticSpec {
            season: Season::Summer,
            start_date: "2019-07-01".into(),
            temperature: SignalSpec::new(21.0, 5.0, 9.0, 1.0, None).with_day_noise(3.0),
            solar_radiation: SignalSpec::new(250.0, 350.0, 6.0, 60.0, Some(0.0)),
            streamflow: SignalSpec::new(3.0, 0.0, 0.0, 1.0, Some(0.1)),
            rt_price: SignalSpec::new(35.0, 15.0, 10.0, 8.0, None),
            electric_load: LoadRule {
                base: 26000.0,
                amplitude: 3000.0,
                phase: 8.0,
                temp_coef: 250.0,
                temp_ref: 20.0,
                noise: 800.0,
            },
            heat_load: LoadRule {
                base: 90.0,
                amplitude: 10.0,
                phase: 0.0,
                temp_coef: -3.0,
                temp_ref: 20.0,
                noise: 8.0,
            },
            ..Self::winter(seed, days)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let noises = [
            self.temperature.noise,
            self.wind_speed.noise,
            self.solar_radiation.noise,
            self.streamflow.noise,
            self.rt_price.noise,
            self.electric_load.noise,
            self.heat_load.noise,
        ];
        let day_noises = [
            self.temperature.day_noise,
            self.wind_speed.day_noise,
            self.solar_radiation.day_noise,
            self.streamflow.day_noise,
            self.rt_price.day_noise,
        ];
        if noises.iter().chain(&day_noises).any(|n| !(*n >= 0.0) || !n.is_finite()) {
            return Err(Error::Config("noise scales must be finite and nonnegative".into()));
        }
        NaiveDate::parse_from_str(&self.start_date, "%Y-%m-%d")
            .map_err(|e| Error::Config(format!("start_date: {e}")))?;
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let spec: SyntheticSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn day_offset(spec: &SignalSpec, rng: &mut ChaCha8Rng) -> f64 {
    if spec.day_noise > 0.0 {
        Normal::new(0.0, spec.day_noise).expect("valid noise").sample(rng)
    } else {
        0.0
    }
}

fn sample(spec: &SignalSpec, t: usize, offset: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut v = spec.deterministic(t) + offset;
    if spec.noise > 0.0 {
        v += Normal::new(0.0, spec.noise).expect("valid noise").sample(rng);
    }
    match spec.floor {
        Some(f) => v.max(f),
        None => v,
    }
}

fn load_value(rule: &LoadRule, t: usize, temperature: f64, rng: &mut ChaCha8Rng) -> f64 {
    let angle = 2.0 * std::f64::consts::PI * (t as f64 - rule.phase) / 24.0;
    let mut v = rule.base + rule.amplitude * angle.sin() + rule.temp_coef * (temperature - rule.temp_ref);
    if rule.noise > 0.0 {
        v += Normal::new(0.0, rule.noise).expect("valid noise").sample(rng);
    }
    v
}

/// Generates `spec.days` scenarios. Identical specs give identical output.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<Scenario>> {
    spec.validate()?;
    let start = NaiveDate::parse_from_str(&spec.start_date, "%Y-%m-%d")
        .map_err(|e| Error::Config(format!("start_date: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Day before the first scenario seeds the prior-day price.
    let prior_offset = day_offset(&spec.rt_price, &mut rng);
    let mut prior: Vec<f64> = (0..HOURS_PER_DAY)
        .map(|t| sample(&spec.rt_price, t, prior_offset, &mut rng))
        .collect();
    let mut out = Vec::with_capacity(spec.days);
    for d in 0..spec.days {
        let date = start
            .checked_add_days(Days::new(d as u64))
            .ok_or_else(|| Error::Config("date overflow".into()))?;
        let mut hours = Vec::with_capacity(HOURS_PER_DAY);
        let mut today = Vec::with_capacity(HOURS_PER_DAY);
        let signals = [
            &spec.temperature,
            &spec.wind_speed,
            &spec.solar_radiation,
            &spec.streamflow,
            &spec.rt_price,
        ];
        let offsets = signals.map(|s| day_offset(s, &mut rng));
        for t in 0..HOURS_PER_DAY {
            let [temperature, wind_speed, solar_radiation, streamflow, rt_mwh] =
                std::array::from_fn(|i| sample(signals[i], t, offsets[i], &mut rng));
            let electric_load = load_value(&spec.electric_load, t, temperature, &mut rng).max(1.0);
            let heat_load = load_value(&spec.heat_load, t, temperature, &mut rng).max(0.0);
            today.push(rt_mwh);
            hours.push(HourRecord {
                observable: ObservableState {
                    temperature,
                    wind_speed,
                    solar_radiation,
                    streamflow,
                    prior_day_rt_price: prior[t] / 1000.0,
                    hour_of_day: t as u8,
                },
                hidden: HiddenState {
                    electric_load,
                    heat_load,
                    solar_output: (spec.solar_capacity_kw * solar_radiation / 1000.0).max(0.0),
                    hydro_output: (spec.hydro_kw_per_cms * streamflow)
                        .clamp(0.0, spec.hydro_capacity_kw),
                    rt_price: rt_mwh / 1000.0,
                },
                gas_price: spec.gas_price,
            });
        }
        prior = today;
        out.push(Scenario {
            date: date.format("%Y-%m-%d").to_string(),
            hours,
            initial_action: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_csv(days: usize, rows_last_day: usize) -> String {
        let mut s = COLUMNS.join(",");
        s.push('\n');
        for d in 0..days {
            let rows = if d + 1 == days { rows_last_day } else { 24 };
            for t in 0..rows {
                s.push_str(&format!(
                    "2019-01-{:02} {:02}:00,-2.5,3,100,6,25.5,31.25,3,28000,240,20,900\n",
                    15 + d,
                    t.min(23)
                ));
            }
        }
        s
    }

    #[test]
    fn loads_two_day_fixture() {
        let sc = read_scenarios(fixture_csv(2, 24).as_bytes(), "fixture").unwrap();
        assert_eq!(sc.len(), 2);
        assert_eq!(sc[1].date, "2019-01-16");
        let r = &sc[0].hours[5];
        assert_eq!(r.observable.hour_of_day, 5);
        assert_eq!(r.hidden.rt_price, 31.25 / 1000.0);
        assert_eq!(r.observable.prior_day_rt_price, 25.5 / 1000.0);
        for s in &sc {
            s.validate().unwrap();
        }
    }

    #[test]
    fn missing_column_is_named() {
        let text = fixture_csv(1, 24).replace("heat_load_klbh", "steam");
        let e = read_scenarios(text.as_bytes(), "fixture").unwrap_err();
        assert!(e.to_string().contains("heat_load_klbh"), "{e}");
    }

    #[test]
    fn twenty_five_rows_is_a_partial_day() {
        let e = read_scenarios(fixture_csv(1, 25).as_bytes(), "fixture").unwrap_err();
        assert!(e.to_string().contains("partial day"), "{e}");
        let e = read_scenarios(fixture_csv(1, 23).as_bytes(), "fixture").unwrap_err();
        assert!(e.to_string().contains("partial day"), "{e}");
    }

    #[test]
    fn non_finite_value_reports_row() {
        let text = fixture_csv(1, 24).replacen("28000", "NaN", 3);
        let e = read_scenarios(text.as_bytes(), "fixture").unwrap_err();
        match e {
            Error::Load { row, .. } => assert_eq!(row, 2),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn initial_action_columns() {
        let mut text = fixture_csv(1, 24);
        text = text.replacen("hydro_kw\n", "hydro_kw,init_chp1_kw,init_chp2_kw\n", 1);
        text = text
            .lines()
            .enumerate()
            .map(|(i, l)| if i == 0 { l.to_string() } else { format!("{l},15000,0") })
            .collect::<Vec<_>>()
            .join("\n");
        let sc = read_scenarios(text.as_bytes(), "fixture").unwrap();
        let a = sc[0].initial_action.as_ref().unwrap();
        assert_eq!(a.chp_power, vec![15000.0, 0.0]);
        assert_eq!(a.chp_on, vec![true, false]);
    }

    #[test]
    fn season_boundaries() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(season_of(d("2019-01-15")), Season::Winter);
        assert_eq!(season_of(d("2019-07-01")), Season::Summer);
        assert_eq!(season_of(d("2019-04-30")), Season::Winter);
        assert_eq!(season_of(d("2019-05-01")), Season::Summer);
        assert_eq!(season_of(d("2019-09-30")), Season::Summer);
        assert_eq!(season_of(d("2019-10-01")), Season::Winter);
    }

    #[test]
    fn split_rejects_bad_date() {
        let mut s = generate_synthetic(&SyntheticSpec::winter(1, 1)).unwrap();
        s[0].date = "15/01/2019".into();
        assert!(split_by_season(&s).is_err());
    }

    #[test]
    fn split_by_season_partitions() {
        let mut all = generate_synthetic(&SyntheticSpec::winter(1, 2)).unwrap();
        all.extend(generate_synthetic(&SyntheticSpec::summer(1, 3)).unwrap());
        let (w, s) = split_by_season(&all).unwrap();
        assert_eq!((w.len(), s.len()), (2, 3));
    }

    #[test]
    fn synthetic_is_deterministic_and_valid() {
        let spec = SyntheticSpec::winter(42, 5);
        let a = generate_synthetic(&spec).unwrap();
        assert_eq!(a, generate_synthetic(&spec).unwrap());
        assert_ne!(a, generate_synthetic(&SyntheticSpec::winter(43, 5)).unwrap());
        for s in &a {
            s.validate().unwrap();
        }
        // Prior-day price is yesterday's real-time price.
        for t in 0..24 {
            assert_eq!(a[1].hours[t].observable.prior_day_rt_price, a[0].hours[t].hidden.rt_price);
        }
    }

    fn noiseless(mut spec: SyntheticSpec) -> SyntheticSpec {
        for s in [
            &mut spec.temperature,
            &mut spec.wind_speed,
            &mut spec.solar_radiation,
            &mut spec.streamflow,
            &mut spec.rt_price,
        ] {
            s.noise = 0.0;
            s.day_noise = 0.0;
        }
        spec.electric_load.noise = 0.0;
        spec.heat_load.noise = 0.0;
        spec
    }

    #[test]
    fn zero_noise_gives_pure_sinusoids() {
        let spec = noiseless(SyntheticSpec::winter(7, 2));
        let sc = generate_synthetic(&spec).unwrap();
        for day in &sc {
            for (t, r) in day.hours.iter().enumerate() {
                let angle = 2.0 * std::f64::consts::PI * (t as f64 - 9.0) / 24.0;
                assert_eq!(r.observable.temperature, -3.0 + 4.0 * angle.sin());
                let solar = spec.solar_radiation.deterministic(t).max(0.0);
                assert_eq!(r.observable.solar_radiation, solar);
            }
        }
    }

    #[test]
    fn zero_amplitude_zero_noise_gives_means() {
        let mut spec = noiseless(SyntheticSpec::summer(7, 2));
        for s in [
            &mut spec.temperature,
            &mut spec.wind_speed,
            &mut spec.solar_radiation,
            &mut spec.streamflow,
            &mut spec.rt_price,
        ] {
            s.amplitude = 0.0;
        }
        let sc = generate_synthetic(&spec).unwrap();
        for r in sc.iter().flat_map(|s| &s.hours) {
            assert_eq!(r.observable.temperature, 21.0);
            assert_eq!(r.observable.wind_speed, spec.wind_speed.mean);
            assert_eq!(r.observable.solar_radiation, 250.0);
            assert_eq!(r.observable.streamflow, 3.0);
            assert_eq!(r.hidden.rt_price, 35.0 / 1000.0);
        }
    }

    #[test]
    fn negative_noise_rejected() {
        let mut spec = SyntheticSpec::winter(1, 1);
        spec.wind_speed.noise = -1.0;
        assert!(generate_synthetic(&spec).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn write_then_load_round_trips(seed in any::<u64>(), days in 1usize..4, summer in any::<bool>()) {
                let spec = if summer { SyntheticSpec::summer(seed, days) } else { SyntheticSpec::winter(seed, days) };
                let mut sc = generate_synthetic(&spec).unwrap();
                if seed % 2 == 0 {
                    let mut a = Action::idle(2);
                    a.chp_power = vec![13000.5, 0.0];
                    a.chp_on = vec![true, false];
                    a.boiler_on = true;
                    sc[0].initial_action = Some(a.clone());
                    for s in sc.iter_mut().skip(1) {
                        let mut b = a.clone();
                        b.chp_power = vec![0.0, 0.0];
                        b.chp_on = vec![false, false];
                        s.initial_action = Some(b);
                    }
                }
                let mut buf = Vec::new();
                write_scenarios(&mut buf, &sc).unwrap();
                let back = read_scenarios(buf.as_slice(), "mem").unwrap();
                prop_assert_eq!(back, sc);
            }

            #[test]
            fn loaded_prices_round_trip(mwh in proptest::collection::vec(-500.0f64..2000.0, 24)) {
                let mut sc = generate_synthetic(&SyntheticSpec::winter(1, 1)).unwrap();
                for (r, p) in sc[0].hours.iter_mut().zip(&mwh) {
                    r.hidden.rt_price = p / 1000.0;
                    r.observable.prior_day_rt_price = -p / 1000.0;
                }
                let mut buf = Vec::new();
                write_scenarios(&mut buf, &sc).unwrap();
                prop_assert_eq!(read_scenarios(buf.as_slice(), "mem").unwrap(), sc);
            }
        }
    }
}
