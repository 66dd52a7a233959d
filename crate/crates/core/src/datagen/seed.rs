//! Synthetic stand-in for the domestic flights dataset used as the default
//! seed. Column names and rough shapes follow the public on-time performance
//! data; values are generated, not real.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};

use super::normalize::{DimensionSpec, StarSchemaSpec};
use crate::table::{Column, Table};

const CARRIERS: [(&str, &str, f64); 10] = [
    ("WN", "Southwest Airlines", 22.0),
    ("AA", "American Airlines", 15.0),
    ("DL", "Delta Air Lines", 15.0),
    ("OO", "SkyWest Airlines", 11.0),
    ("UA", "United Airlines", 10.0),
    ("B6", "JetBlue Airways", 5.0),
    ("AS", "Alaska Airlines", 4.0),
    ("NK", "Spirit Airlines", 3.0),
    ("F9", "Frontier Airlines", 2.0),
    ("HA", "Hawaiian Airlines", 1.0),
];

const AIRPORTS: [(&str, &str, f64); 20] = [
    ("ATL", "GA", 9.0),
    ("ORD", "IL", 8.0),
    ("DFW", "TX", 8.0),
    ("DEN", "CO", 7.0),
    ("LAX", "CA", 7.0),
    ("SFO", "CA", 5.0),
    ("PHX", "AZ", 5.0),
    ("LAS", "NV", 5.0),
    ("SEA", "WA", 4.5),
    ("MCO", "FL", 4.5),
    ("CLT", "NC", 4.5),
    ("IAH", "TX", 4.0),
    ("MSP", "MN", 4.0),
    ("DTW", "MI", 4.0),
    ("BOS", "MA", 4.0),
    ("JFK", "NY", 4.0),
    ("EWR", "NJ", 3.5),
    ("SLC", "UT", 3.0),
    ("BWI", "MD", 3.0),
    ("HNL", "HI", 1.0),
];

const DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

pub const DEFAULT_SEED_ROWS: usize = 50_000;

/// Generates `rows` flight records. Delays depend on departure hour and on
/// each other; air time follows distance.
pub fn flights(rows: usize, rng_seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let carrier_dist = WeightedIndex::new(CARRIERS.iter().map(|c| c.2)).expect("weights");
    let airport_dist = WeightedIndex::new(AIRPORTS.iter().map(|a| a.2)).expect("weights");
    let distance_dist = LogNormal::<f64>::new(6.6, 0.55).expect("params");
    let on_time = Normal::<f64>::new(-3.0, 6.0).expect("params");
    let late = Exp::<f64>::new(1.0 / 35.0).expect("params");
    let noise = Normal::<f64>::new(0.0, 9.0).expect("params");

    let mut carrier = Vec::with_capacity(rows);
    let mut carrier_name = Vec::with_capacity(rows);
    let mut origin = Vec::with_capacity(rows);
    let mut origin_state = Vec::with_capacity(rows);
    let mut dest = Vec::with_capacity(rows);
    let mut dest_state = Vec::with_capacity(rows);
    let mut day = Vec::with_capacity(rows);
    let mut dep_time = Vec::with_capacity(rows);
    let mut dep_delay = Vec::with_capacity(rows);
    let mut arr_delay = Vec::with_capacity(rows);
    let mut distance = Vec::with_capacity(rows);
    let mut air_time = Vec::with_capacity(rows);

    for _ in 0..rows {
        let c = CARRIERS[carrier_dist.sample(&mut rng)];
        let o = AIRPORTS[airport_dist.sample(&mut rng)];
        let mut d = AIRPORTS[airport_dist.sample(&mut rng)];
        while d.0 == o.0 {
            d = AIRPORTS[airport_dist.sample(&mut rng)];
        }
        let hour: f64 = rng.random_range(5.0..23.9);
        let minutes = (hour.floor() * 100.0 + (hour.fract() * 60.0).floor()).round();
        let late_prob = 0.1 + 0.02 * (hour - 5.0);
        let delay = if rng.random_bool(late_prob.min(0.6)) {
            late.sample(&mut rng) + 5.0
        } else {
            on_time.sample(&mut rng)
        };
        let dist = distance_dist.sample(&mut rng).clamp(70.0, 4_980.0).round();
        let air = (dist / 7.8 + 18.0 + noise.sample(&mut rng) * 0.6).max(15.0).round();
        let arr = (0.92 * delay + noise.sample(&mut rng)).round();

        carrier.push(c.0);
        carrier_name.push(c.1);
        origin.push(o.0);
        origin_state.push(o.1);
        dest.push(d.0);
        dest_state.push(d.1);
        day.push(DAYS[rng.random_range(0..7)]);
        dep_time.push(minutes);
        dep_delay.push(delay.round());
        arr_delay.push(arr);
        distance.push(dist);
        air_time.push(air);
    }

    Table::new(vec![
        Column::nominal("carrier", carrier),
        Column::nominal("carrier_name", carrier_name),
        Column::nominal("origin", origin),
        Column::nominal("origin_state", origin_state),
        Column::nominal("dest", dest),
        Column::nominal("dest_state", dest_state),
        Column::nominal("day_of_week", day),
        Column::quantitative("dep_time", dep_time),
        Column::quantitative("dep_delay", dep_delay),
        Column::quantitative("arr_delay", arr_delay),
        Column::quantitative("distance", distance),
        Column::quantitative("air_time", air_time),
    ])
    .expect("columns have equal length")
}

/// Star layout of the flights data: carriers and the two airport roles.
pub fn flights_star_spec() -> StarSchemaSpec {
    StarSchemaSpec {
        fact: "flights".into(),
        dimensions: vec![
            DimensionSpec {
                name: "carriers".into(),
                key: "carrier_id".into(),
                columns: vec!["carrier".into(), "carrier_name".into()],
            },
            DimensionSpec {
                name: "origins".into(),
                key: "origin_id".into(),
                columns: vec!["origin".into(), "origin_state".into()],
            },
            DimensionSpec {
                name: "destinations".into(),
                key: "dest_id".into(),
                columns: vec!["dest".into(), "dest_state".into()],
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::normalize::{denormalize, normalize};

    #[test]
    fn deterministic_and_shaped() {
        let a = flights(2000, 1);
        assert_eq!(a, flights(2000, 1));
        assert_eq!(a.rows(), 2000);
        assert_eq!(a.columns().len(), 12);
        assert_ne!(a, flights(2000, 2));
    }

    #[test]
    fn star_round_trip() {
        let t = flights(3000, 5);
        let star = normalize(&t, &flights_star_spec()).unwrap();
        assert_eq!(star.dimensions[0].rows(), CARRIERS.len());
        assert!(star.dimensions[1].rows() <= AIRPORTS.len());
        assert_eq!(denormalize(&star).unwrap(), t);
    }
}
