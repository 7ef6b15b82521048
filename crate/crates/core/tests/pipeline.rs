use aclp::eventlog::{parse_log, LogFormat};
use aclp::evalharness::{generate_flight_log, FlightSpec};
use aclp::fuzzymine::{mine, topological_order, MiningConfig};
use aclp::indicators::{compute_indicators, discretize, IndicatorOptions};
use aclp::smmb::{smmb, SmmbConfig};
use aclp::structlearn::ScoringContext;

fn csv_round_trip(log: &aclp::eventlog::EventLog) -> aclp::eventlog::EventLog {
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    parse_log(buf.as_slice(), &LogFormat::default()).unwrap()
}

#[test]
fn generated_log_survives_csv() {
    let g = generate_flight_log(&FlightSpec::turnaround(), 200, 3).unwrap();
    let back = csv_round_trip(&g.log);
    assert_eq!(back.traces.len(), 200);
    assert_eq!(back.event_count(), g.log.event_count());
    let t = back.trace("F00000").unwrap();
    assert_eq!(t.events.first().unwrap().activity, "ARRIVE");
    assert_eq!(t.events.last().unwrap().activity, "TAKEOFF");
    assert!(t.events.last().unwrap().extras.contains_key("SCHEDULED"));
}

#[test]
fn frequent_self_loop_and_rare_swap_are_resolved() {
    let mut spec = FlightSpec::turnaround();
    spec.self_loops.insert("BOARDING".into(), 0.3);
    let g = generate_flight_log(&spec, 800, 4).unwrap();
    let log = csv_round_trip(&g.log);
    let (model, report) = mine(&log, &MiningConfig::default()).unwrap();
    assert!(report.unary_resolved.contains(&"BOARDING".to_string()));
    let removed = report.removed_edges();
    assert!(removed.contains(&("BOARDING".into(), "CABINCLEAN".into())), "{removed:?}");
    assert!(!model.has_edge("BOARDING", "CABINCLEAN"));
    assert!(model.has_edge("CABINCLEAN", "BOARDING"));
    let order = topological_order(&model).unwrap();
    let pos = |a: &str| order.iter().position(|x| x == a).unwrap();
    for w in spec.chain.windows(2) {
        assert!(pos(&w[0]) < pos(&w[1]), "{} after {}", w[0], w[1]);
    }
}

#[test]
fn indicators_name_links_and_the_service_block() {
    let spec = FlightSpec::turnaround();
    let g = generate_flight_log(&spec, 600, 8).unwrap();
    let (model, report) = mine(&g.log, &MiningConfig::default()).unwrap();
    let table = compute_indicators(&g.log, &model, &report, &spec.target_spec(), &IndicatorOptions::default()).unwrap();
    let expect = [
        "ARRIVE_CHOCKON",
        "BOARDING_CLOSEDOOR",
        "CABINCLEAN_BOARDING",
        "CHOCKON_DEBOARD",
        "CLOSEDOOR_PUSHBACK",
        "DEBOARD_CABINCLEAN",
        "FLIGHTDELAY",
    ];
    assert_eq!(table.variables, expect);
    assert_eq!(table.blocks.len(), 1);
    assert_eq!(table.blocks[0].variable(), "CHOCKON_DEBOARD");

    // a swapped case never has CABINCLEAN before BOARDING, so it loses that
    // link and is the only kind of row dropped
    let swapped = g
        .log
        .traces
        .iter()
        .filter(|t| {
            let acts: Vec<&str> = t.activities().collect();
            let c = acts.iter().position(|&a| a == "CABINCLEAN").unwrap();
            let b = acts.iter().position(|&a| a == "BOARDING").unwrap();
            b < c
        })
        .count();
    assert!(swapped > 0);
    let d = discretize(&table, 3).unwrap();
    assert_eq!(d.dropped_rows, swapped);
    assert_eq!(d.data.m(), 600 - swapped);
}

#[test]
fn blanket_of_the_delay_contains_its_direct_causes() {
    let spec = FlightSpec::turnaround();
    let g = generate_flight_log(&spec, 3000, 0).unwrap();
    let (model, report) = mine(&g.log, &MiningConfig::default()).unwrap();
    let table = compute_indicators(&g.log, &model, &report, &spec.target_spec(), &IndicatorOptions::default()).unwrap();
    let d = discretize(&table, 3).unwrap();
    let mb = smmb(&ScoringContext::new(d.data), "FLIGHTDELAY", &SmmbConfig::default()).unwrap();
    let members = mb.members();
    for c in &g.direct_causes {
        assert!(members.contains(c), "{c} missing from {members:?}");
    }
}
