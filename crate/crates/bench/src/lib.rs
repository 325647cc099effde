//! Shared fixtures for the operator benchmarks.

use std::collections::BTreeMap;

use einflow::scenarios::load_scenario;
use einflow::{KillingField, Point, Scenario};

/// A built-in scenario, one of its fields and a fixed point set.
pub struct Fixture {
    pub scenario: Scenario,
    pub field: KillingField,
    pub points: Vec<Point>,
}

pub fn fixture(scenario: &str, field: &str, count: usize) -> Fixture {
    let scenario = load_scenario(scenario, &BTreeMap::new()).expect("built-in scenario");
    let field = scenario.killing_field(field).expect("built-in field");
    let points = scenario.sample(count, 1);
    Fixture { scenario, field, points }
}
