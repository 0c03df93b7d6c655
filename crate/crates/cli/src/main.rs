use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use walras::analysis::{
    check_we, exists_overdemanded, exists_underdemanded, minimally_overdemanded, minimally_underdemanded, Verdict,
};
use walras::lattice::{
    bottom, default_max_steps, enumerate_fixed_points, enumerate_we, equilibrium_report, iterate_from, points_json, top,
};
use walras::market::{demand, parse_rational};
use walras::random::{generate, SuiteSpec};
use walras::selfcheck::{self, SelfcheckConfig};
use walras::tipping::{ConstraintReading, MissingInfU, TippingConfig};
use walras::{Error, Market, PriceMap, PriceVector};

#[derive(Parser)]
#[command(name = "walras", version, about = "Walrasian equilibria of unit-demand markets on a price grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct MarketArgs {
    /// Market document (JSON).
    #[arg(long)]
    market: PathBuf,

    /// Override the price tick, e.g. 1 or 1/4.
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Args)]
struct TippingArgs {
    /// Which price the neutral-price constraint reads sup_O at.
    #[arg(long, value_enum, default_value_t = Reading::Candidate)]
    reading: Reading,

    /// How a missing inf_U enters the neutral-price constraint.
    #[arg(long, value_enum, default_value_t = Missing::Exclude)]
    missing_inf_u: Missing,

    /// Probe budget for the neutral-price box search.
    #[arg(long, default_value_t = TippingConfig::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reading {
    Candidate,
    Base,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Missing {
    Exclude,
    Vacuous,
}

impl TippingArgs {
    fn config(&self) -> TippingConfig {
        TippingConfig {
            constraint: match self.reading {
                Reading::Candidate => ConstraintReading::Candidate,
                Reading::Base => ConstraintReading::Base,
            },
            missing_inf_u: match self.missing_inf_u {
                Missing::Exclude => MissingInfU::Exclude,
                Missing::Vacuous => MissingInfU::Vacuous,
            },
            budget: self.budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Demand sets of every buyer.
    Demand {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        price: String,
    },
    /// Over/underdemand certificates, minimal witnesses and the equilibrium check.
    Analyze {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        price: String,
        /// Restrict the minimality report to one good.
        #[arg(long)]
        good: Option<String>,
    },
    /// Tipping and neutral prices of one good.
    Tipping {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        good: String,
        /// Prices of the other goods, or a full vector.
        #[arg(long, default_value = "")]
        price: String,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// One application of the price-adjusting map.
    Map {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        price: String,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Region of each good (or one good) at a price vector.
    Region {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long)]
        price: String,
        #[arg(long)]
        good: Option<String>,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Iterate the map until it stops moving.
    Iterate {
        #[command(flatten)]
        market: MarketArgs,
        /// bottom, top, or a price vector.
        #[arg(long, default_value = "bottom")]
        from: String,
        #[arg(long)]
        max_steps: Option<usize>,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Every grid point fixed by the map.
    Fixpoints {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Every grid point that supports an equilibrium allocation.
    Equilibria {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Fixed points against equilibria, meet/join closure and extremes.
    LatticeCheck {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        tipping: TippingArgs,
    },
    /// Write a random market document.
    Gen {
        #[arg(long, default_value_t = 3)]
        buyers: usize,
        #[arg(long, default_value_t = 3)]
        goods: usize,
        #[arg(long, default_value_t = 6)]
        max_value: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every property suite on seeded random markets.
    Selfcheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest number of buyers per market.
        #[arg(long, default_value_t = 3)]
        buyers: usize,
        /// Largest number of goods per market.
        #[arg(long, default_value_t = 3)]
        goods: usize,
        #[arg(long, default_value_t = 6)]
        max_value: u64,
        /// Random grid points per market.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Ordered price pairs across the whole suite.
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
        /// Markets that get the lattice check.
        #[arg(long, default_value_t = 50)]
        lattice_markets: usize,
    },
}

/// What a command produced.
struct Report {
    command: &'static str,
    digest: Option<String>,
    result: Value,
    /// Rows for `--format table`.
    table: Option<Vec<Value>>,
    /// Printed to stderr in JSON mode and as the last stdout line in table mode.
    summary: Option<String>,
    exit: u8,
    /// Emit `result` alone, without the envelope.
    bare: bool,
}

impl Report {
    fn new(command: &'static str, market: &Market, result: Value) -> Self {
        Report { command, digest: Some(market.digest()), result, table: None, summary: None, exit: 0, bare: false }
    }

    fn table(mut self, rows: Vec<Value>) -> Self {
        self.table = Some(rows);
        self
    }
}

fn load(args: &MarketArgs) -> Result<Market, Error> {
    let market = Market::load(&args.market)?;
    match &args.delta {
        None => Ok(market),
        Some(text) => {
            let tick = parse_rational(text).ok_or_else(|| Error::InvalidTick(text.clone()))?;
            market.with_tick(tick)
        }
    }
}

fn prices(market: &Market, csv: &str) -> Result<PriceVector, Error> {
    market.parse_price_vector(csv)
}

fn set_json(market: &Market, set: Option<walras::GoodSet>) -> Value {
    set.map_or(Value::Null, |s| json!(market.good_ids(s)))
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::Demand { market, price } => {
            let market = load(market)?;
            let p = prices(&market, price)?;
            let profile = demand(&market, &p)?.to_json(&market);
            let rows = profile.as_array().cloned().unwrap_or_default();
            Ok(Report::new("demand", &market, json!({"prices": market.prices_json(p.ticks()), "demand": profile}))
                .table(rows))
        }
        Command::Analyze { market, price, good } => {
            let market = load(market)?;
            let p = prices(&market, price)?;
            let over = exists_overdemanded(&market, &p)?;
            let under = exists_underdemanded(&market, &p)?;
            let (verdict, witness) = if over.verdict != Verdict::None {
                (over.verdict, over.witness_goods)
            } else {
                (under.verdict, under.witness_goods)
            };
            let goods: Vec<usize> = match good {
                Some(id) => vec![market.good_index(id)?],
                None => (0..market.num_goods()).collect(),
            };
            let mut minimal = Vec::new();
            for x in goods {
                minimal.push(json!({
                    "good": market.goods()[x].to_string(),
                    "minimally_overdemanded": set_json(&market, minimally_overdemanded(&market, &p, x)?),
                    "minimally_underdemanded": set_json(&market, minimally_underdemanded(&market, &p, x)?),
                }));
            }
            let we = check_we(&market, &p)?;
            Ok(Report::new(
                "analyze",
                &market,
                json!({
                    "prices": market.prices_json(p.ticks()),
                    "verdict": verdict,
                    "witness": market.good_ids(witness),
                    "overdemand": over.to_json(&market),
                    "underdemand": under.to_json(&market),
                    "walrasian": we.is_we,
                    "allocation": we.allocation.map(|a| a.ids(&market)),
                    "minimality": minimal.clone(),
                }),
            )
            .table(minimal))
        }
        Command::Tipping { market, good, price, tipping } => {
            let market = load(market)?;
            let a = market.good_index(good)?;
            let mut base = market.parse_prices(price)?;
            if base.len() == market.num_goods() {
                base.remove(a);
            }
            let map = PriceMap::with_config(&market, tipping.config());
            let profile = map.tipping().profile(a, &base)?.to_json(&market);
            Ok(Report::new("tipping", &market, profile.clone()).table(vec![profile]))
        }
        Command::Map { market, price, tipping } => {
            let market = load(market)?;
            let p = prices(&market, price)?;
            let map = PriceMap::with_config(&market, tipping.config());
            let result = map.explain_json(&p)?;
            let rows = result["goods"].as_array().cloned().unwrap_or_default();
            Ok(Report::new("map", &market, result).table(rows))
        }
        Command::Region { market, price, good, tipping } => {
            let market = load(market)?;
            let p = prices(&market, price)?;
            let map = PriceMap::with_config(&market, tipping.config());
            let mut explained = map.explain_json(&p)?["goods"].as_array().cloned().unwrap_or_default();
            if let Some(id) = good {
                let a = market.good_index(id)?;
                explained = vec![explained.swap_remove(a)];
            }
            Ok(Report::new("region", &market, json!({"prices": market.prices_json(p.ticks()), "regions": explained}))
                .table(explained))
        }
        Command::Iterate { market, from, max_steps, tipping } => {
            let market = load(market)?;
            let start = match from.as_str() {
                "bottom" => bottom(&market),
                "top" => top(&market),
                csv => prices(&market, csv)?,
            };
            let max_steps = max_steps.unwrap_or_else(|| default_max_steps(&market));
            let map = PriceMap::with_config(&market, tipping.config());
            let trace = iterate_from(&map, &start, max_steps)?;
            let rows = trace.table(&market).iter().map(|r| serde_json::to_value(r).expect("row")).collect();
            let mut report = Report::new("iterate", &market, trace.to_json(&market)).table(rows);
            report.summary = Some(trace.summary());
            if !trace.converged {
                report.exit = 1;
            }
            Ok(report)
        }
        Command::Fixpoints { market, tipping } => {
            let market = load(market)?;
            let map = PriceMap::with_config(&market, tipping.config());
            let points = enumerate_fixed_points(&map)?;
            let listed = points_json(&market, &points);
            Ok(Report::new(
                "fixpoints",
                &market,
                json!({"tick": walras::market::rational_json(market.tick()), "count": points.len(), "fixed_points": listed.clone()}),
            )
            .table(point_rows(&listed)))
        }
        Command::Equilibria { market, tipping } => {
            let market = load(market)?;
            let points = enumerate_we(&market)?;
            let map = PriceMap::with_config(&market, tipping.config());
            let cert = walras::lattice::lattice_check(&map, &points)?;
            let listed = points_json(&market, &points);
            let opt = |p: &Option<PriceVector>| p.as_ref().map(|p| market.prices_json(p.ticks()));
            Ok(Report::new(
                "equilibria",
                &market,
                json!({
                    "tick": walras::market::rational_json(market.tick()),
                    "count": points.len(),
                    "we_points": listed.clone(),
                    "min_we": opt(&cert.min),
                    "max_we": opt(&cert.max),
                    "lattice_certified": cert.certified(),
                    "lattice": cert.to_json(&market),
                }),
            )
            .table(point_rows(&listed)))
        }
        Command::LatticeCheck { market, tipping } => {
            let market = load(market)?;
            let map = PriceMap::with_config(&market, tipping.config());
            let report = equilibrium_report(&map)?;
            let certified = report.lattice_certified() && report.equivalence.holds();
            let listed = points_json(&market, &report.counterexamples());
            let mut out = Report::new("lattice-check", &market, report.to_json(&market)).table(point_rows(&listed));
            out.summary = Some(if certified {
                "lattice certified; fixed points equal equilibria".to_string()
            } else {
                format!("{} counterexample points", report.counterexamples().len())
            });
            Ok(out)
        }
        Command::Gen { buyers, goods, max_value, seed } => {
            let market = generate(*seed, *buyers, *goods, *max_value)?;
            let document = serde_json::to_value(market.to_document()).expect("document serializes");
            let mut report = Report::new("gen", &market, document);
            report.bare = true;
            Ok(report)
        }
        Command::Selfcheck { trials, seed, buyers, goods, max_value, points, pairs, lattice_markets } => {
            let config = SelfcheckConfig {
                suite: SuiteSpec {
                    seed: *seed,
                    trials: *trials,
                    max_buyers: *buyers,
                    max_goods: *goods,
                    max_value: *max_value,
                },
                points_per_market: *points,
                pairs: *pairs,
                lattice_markets: *lattice_markets,
            };
            let report = selfcheck::run(&config)?;
            let result = report.to_json();
            let rows = result["properties"]
                .as_array()
                .map(|ps| {
                    ps.iter()
                        .map(|p| {
                            json!({
                                "property": p["property"],
                                "checks": p["checks"],
                                "failures": p["failures"],
                                "passed": p["passed"],
                            })
                        })
                        .collect()
                })
                .unwrap_or_default();
            let failed: Vec<&str> = report.outcomes.iter().filter(|o| !o.passed()).map(|o| o.property.name()).collect();
            Ok(Report {
                command: "selfcheck",
                digest: None,
                result,
                table: Some(rows),
                summary: Some(if failed.is_empty() {
                    "all properties pass".to_string()
                } else {
                    format!("failing properties: {}", failed.join(", "))
                }),
                exit: if report.passed() { 0 } else { 3 },
                bare: false,
            })
        }
    }
}

fn point_rows(listed: &Value) -> Vec<Value> {
    listed.as_array().map(|ps| ps.iter().map(|p| json!({"prices": p})).collect()).unwrap_or_default()
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn render_table(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let columns: Vec<&String> = first.keys().collect();
    let mut out = columns.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("\t");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = columns.iter().map(|c| cell(&row[c.as_str()])).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

fn render(cli: &Cli, report: &Report) -> String {
    if cli.format == Format::Table {
        if let Some(rows) = &report.table {
            let mut out = render_table(rows);
            if let Some(summary) = &report.summary {
                out.push_str(summary);
                out.push('\n');
            }
            return out;
        }
    }
    let value = if report.bare {
        report.result.clone()
    } else {
        json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "market_digest": report.digest,
            "command": report.command,
            "result": report.result,
        })
    };
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let text = render(&cli, &report);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if cli.format == Format::Json || cli.out.is_some() {
                if let Some(summary) = &report.summary {
                    eprintln!("{summary}");
                }
            }
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { 1 } else { 2 })
        }
    }
}
