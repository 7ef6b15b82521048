//! Event records, case traces and directly-follows statistics.
//!
//! Input is a CSV file with a header row. The columns `Case`, `Activity` and
//! `Timestamp` are required; `Resource` and `lifecycle:transition` are
//! optional and every other column is carried into [`Event::extras`].
//!
//! A `start` row followed by a `complete` row of the same activity in the same
//! case is folded into a single event spanning both timestamps. Any other row
//! becomes an instantaneous event (`t_start == t_end`).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, interpreted as naive local time.
pub type Timestamp = i64;

const TIME_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
];

/// Parse an ISO-8601 timestamp. Fractional seconds are accepted and dropped.
pub fn parse_timestamp(raw: &str) -> Option<Timestamp> {
    let raw = raw.trim();
    for fmt in TIME_FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(t.and_utc().timestamp());
        }
    }
    DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|t| t.naive_local().and_utc().timestamp())
}

pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::from_timestamp(t, 0) {
        Some(dt) => dt.naive_utc().format("%Y-%m-%dT%H:%M:%S%.3f").to_string(),
        None => t.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub activity: String,
    pub case_id: String,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub resource: Option<String>,
    pub lifecycle: Option<String>,
    pub extras: BTreeMap<String, String>,
}

impl Event {
    pub fn new(case_id: &str, activity: &str, t_start: Timestamp, t_end: Timestamp) -> Self {
        Event {
            activity: activity.to_string(),
            case_id: case_id.to_string(),
            t_start,
            t_end,
            resource: None,
            lifecycle: None,
            extras: BTreeMap::new(),
        }
    }

    fn order_key(&self) -> impl Ord + '_ {
        (
            self.t_start,
            self.t_end,
            &self.activity,
            &self.resource,
            &self.lifecycle,
            &self.extras,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    /// Build a trace, sorting events by start time, then end time, then
    /// activity name.
    pub fn new(case_id: impl Into<String>, mut events: Vec<Event>) -> Self {
        events.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        Trace {
            case_id: case_id.into(),
            events,
        }
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventLog {
    pub traces: Vec<Trace>,
    pub activity_universe: BTreeSet<String>,
}

impl EventLog {
    /// Group events into traces by case id. Traces are ordered by case id.
    pub fn from_events(events: impl IntoIterator<Item = Event>) -> Self {
        let mut by_case: BTreeMap<String, Vec<Event>> = BTreeMap::new();
        for e in events {
            by_case.entry(e.case_id.clone()).or_default().push(e);
        }
        let traces: Vec<Trace> = by_case
            .into_iter()
            .map(|(case, evs)| Trace::new(case, evs))
            .collect();
        let activity_universe = traces
            .iter()
            .flat_map(|t| t.events.iter().map(|e| e.activity.clone()))
            .collect();
        EventLog {
            traces,
            activity_universe,
        }
    }

    /// Convenience constructor used heavily in tests: each trace is a list of
    /// activity names, spaced one minute apart.
    pub fn from_sequences<S: AsRef<str>>(seqs: &[Vec<S>]) -> Self {
        let mut events = Vec::new();
        for (i, seq) in seqs.iter().enumerate() {
            let case = format!("c{i:05}");
            for (j, a) in seq.iter().enumerate() {
                let t = 60 * j as i64;
                events.push(Event::new(&case, a.as_ref(), t, t));
            }
        }
        EventLog::from_events(events)
    }

    pub fn is_empty(&self) -> bool {
        self.traces.iter().all(|t| t.is_empty())
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces
            .binary_search_by(|t| t.case_id.as_str().cmp(case_id))
            .ok()
            .map(|i| &self.traces[i])
    }

    /// Write the log back out in the same CSV layout `parse_log` accepts.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let extra_cols: BTreeSet<&String> = self
            .traces
            .iter()
            .flat_map(|t| t.events.iter().flat_map(|e| e.extras.keys()))
            .collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["Case", "Activity", "Resource", "Timestamp", "lifecycle:transition"];
        header.extend(extra_cols.iter().map(|s| s.as_str()));
        w.write_record(&header)?;
        for trace in &self.traces {
            let mut rows: Vec<(Timestamp, &Event, &str)> = Vec::new();
            for e in &trace.events {
                if e.t_start != e.t_end {
                    rows.push((e.t_start, e, "start"));
                    rows.push((e.t_end, e, "complete"));
                } else {
                    rows.push((e.t_start, e, e.lifecycle.as_deref().unwrap_or("")));
                }
            }
            rows.sort_by_key(|(t, _, _)| *t);
            for (t, e, lc) in rows {
                let mut rec = vec![
                    e.case_id.clone(),
                    e.activity.clone(),
                    e.resource.clone().unwrap_or_default(),
                    format_timestamp(t),
                    lc.to_string(),
                ];
                for col in &extra_cols {
                    rec.push(e.extras.get(*col).cloned().unwrap_or_default());
                }
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Description of the columns of an input CSV. Header names are matched
/// case-insensitively.
#[derive(Debug, Clone)]
pub struct LogFormat {
    pub case_col: String,
    pub activity_col: String,
    pub timestamp_col: String,
    pub resource_col: String,
    pub lifecycle_col: String,
    pub delimiter: u8,
}

impl Default for LogFormat {
    fn default() -> Self {
        LogFormat {
            case_col: "Case".into(),
            activity_col: "Activity".into(),
            timestamp_col: "Timestamp".into(),
            resource_col: "Resource".into(),
            lifecycle_col: "lifecycle:transition".into(),
            delimiter: b',',
        }
    }
}

struct RawRow {
    row: usize,
    case: String,
    activity: String,
    t: Timestamp,
    resource: Option<String>,
    lifecycle: Option<String>,
    extras: BTreeMap<String, String>,
}

/// Parse a CSV event log.
pub fn parse_log<R: Read>(source: R, format: &LogFormat) -> Result<EventLog> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(Error::EmptyLog),
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(e.into()),
        Err(_) => return Err(Error::EmptyLog),
    };
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let required = |name: &str| {
        find(name).ok_or_else(|| Error::Row {
            row: 1,
            msg: format!("missing required column `{name}`"),
        })
    };
    let case_i = required(&format.case_col)?;
    let act_i = required(&format.activity_col)?;
    let ts_i = required(&format.timestamp_col)?;
    let res_i = find(&format.resource_col);
    let lc_i = find(&format.lifecycle_col);
    let known = [Some(case_i), Some(act_i), Some(ts_i), res_i, lc_i];

    let mut raw = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        // header is row 1
        let row = k + 2;
        let rec = rec?;
        let field = |i: usize, name: &str| -> Result<String> {
            match rec.get(i) {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(Error::Row {
                    row,
                    msg: format!("missing value for `{name}`"),
                }),
            }
        };
        let case = field(case_i, &format.case_col)?;
        let activity = field(act_i, &format.activity_col)?;
        let ts_raw = field(ts_i, &format.timestamp_col)?;
        let t = parse_timestamp(&ts_raw).ok_or_else(|| Error::Row {
            row,
            msg: format!("malformed timestamp `{ts_raw}`"),
        })?;
        let opt = |i: Option<usize>| {
            i.and_then(|i| rec.get(i))
                .filter(|v| !v.is_empty())
                .map(str::to_string)
        };
        let mut extras = BTreeMap::new();
        for (i, h) in headers.iter().enumerate() {
            if known.contains(&Some(i)) {
                continue;
            }
            if let Some(v) = rec.get(i).filter(|v| !v.is_empty()) {
                extras.insert(h.to_string(), v.to_string());
            }
        }
        raw.push(RawRow {
            row,
            case,
            activity,
            t,
            resource: opt(res_i),
            lifecycle: opt(lc_i),
            extras,
        });
    }
    if raw.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(EventLog::from_events(pair_lifecycles(raw)))
}

/// Fold `start`/`complete` row pairs into single events.
fn pair_lifecycles(mut rows: Vec<RawRow>) -> Vec<Event> {
    rows.sort_by(|a, b| (&a.case, a.t, a.row).cmp(&(&b.case, b.t, b.row)));
    let mut events = Vec::with_capacity(rows.len());
    let mut open: BTreeMap<(String, String), VecDeque<RawRow>> = BTreeMap::new();
    let instant = |r: RawRow| Event {
        activity: r.activity,
        case_id: r.case,
        t_start: r.t,
        t_end: r.t,
        resource: r.resource,
        lifecycle: r.lifecycle,
        extras: r.extras,
    };
    for r in rows {
        let lc = r.lifecycle.as_deref().map(str::to_ascii_lowercase);
        match lc.as_deref() {
            Some("start") => open
                .entry((r.case.clone(), r.activity.clone()))
                .or_default()
                .push_back(r),
            Some("complete") => {
                let started = open
                    .get_mut(&(r.case.clone(), r.activity.clone()))
                    .and_then(VecDeque::pop_front);
                match started {
                    Some(s) => {
                        let mut extras = s.extras;
                        extras.extend(r.extras);
                        events.push(Event {
                            activity: r.activity,
                            case_id: r.case,
                            t_start: s.t,
                            t_end: r.t,
                            resource: r.resource.or(s.resource),
                            lifecycle: r.lifecycle,
                            extras,
                        });
                    }
                    None => events.push(instant(r)),
                }
            }
            _ => events.push(instant(r)),
        }
    }
    // unmatched starts
    for (_, q) in open {
        events.extend(q.into_iter().map(instant));
    }
    events
}

/// Number of times activity `b` immediately follows activity `a`, over all
/// traces. Self-pairs are included.
pub fn directly_follows_counts(log: &EventLog) -> BTreeMap<(String, String), u64> {
    let mut counts = BTreeMap::new();
    for trace in &log.traces {
        for w in trace.events.windows(2) {
            *counts
                .entry((w[0].activity.clone(), w[1].activity.clone()))
                .or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "Case,type,Activity,Resource,Timestamp,lifecycle:transition\n\
        A,task,DROPOFFEND,a,2018-07-01T11:54:27.000,complete\n\
        A,task,DROPOFFCHECK,a,2018-07-01T11:55:19.000,complete\n";

    fn parse(s: &str) -> Result<EventLog> {
        parse_log(s.as_bytes(), &LogFormat::default())
    }

    #[test]
    fn parses_example_rows() {
        let log = parse(TABLE).unwrap();
        assert_eq!(log.traces.len(), 1);
        let e = &log.traces[0].events[0];
        assert_eq!(e.case_id, "A");
        assert_eq!(e.activity, "DROPOFFEND");
        assert_eq!(e.t_start, parse_timestamp("2018-07-01T11:54:27").unwrap());
        assert_eq!(e.t_start, e.t_end);
        assert_eq!(e.resource.as_deref(), Some("a"));
        assert_eq!(e.extras.get("type").map(String::as_str), Some("task"));
        assert_eq!(format_timestamp(e.t_start), "2018-07-01T11:54:27.000");
    }

    #[test]
    fn empty_stream_is_rejected() {
        assert!(matches!(parse(""), Err(Error::EmptyLog)));
        assert!(matches!(
            parse("Case,Activity,Timestamp\n"),
            Err(Error::EmptyLog)
        ));
    }

    #[test]
    fn malformed_timestamp_names_row() {
        let err = parse("Case,Activity,Timestamp\nA,X,2018-07-01T10:00:00\nA,Y,yesterday\n")
            .unwrap_err();
        match err {
            Error::Row { row, msg } => {
                assert_eq!(row, 3);
                assert!(msg.contains("yesterday"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_required_column() {
        let err = parse("Case,Activity\nA,X\n").unwrap_err();
        assert!(err.to_string().contains("Timestamp"));
    }

    #[test]
    fn sorts_by_start_time() {
        let log = parse(
            "Case,Activity,Timestamp\nA,LATE,2018-07-01T10:00:00.000\nA,EARLY,2018-07-01T09:00:00.000\n",
        )
        .unwrap();
        let acts: Vec<_> = log.traces[0].activities().collect();
        assert_eq!(acts, ["EARLY", "LATE"]);
    }

    #[test]
    fn duplicates_are_kept() {
        let log = parse(
            "Case,Activity,Timestamp\nA,X,2018-07-01T10:00:00\nA,X,2018-07-01T10:00:00\n",
        )
        .unwrap();
        assert_eq!(log.event_count(), 2);
    }

    #[test]
    fn start_complete_pairs_fold() {
        let log = parse(
            "Case,Activity,Timestamp,lifecycle:transition\n\
             A,X,2018-07-01T10:00:00,start\n\
             A,Y,2018-07-01T10:01:00,complete\n\
             A,X,2018-07-01T10:05:00,complete\n",
        )
        .unwrap();
        let t = &log.traces[0];
        assert_eq!(t.len(), 2);
        assert_eq!(t.events[0].activity, "X");
        assert_eq!(t.events[0].t_end - t.events[0].t_start, 300);
    }

    #[test]
    fn directly_follows() {
        let log = EventLog::from_sequences(&[vec!["A", "B", "A", "B"]]);
        let c = directly_follows_counts(&log);
        assert_eq!(c[&("A".into(), "B".into())], 2);
        assert_eq!(c[&("B".into(), "A".into())], 1);

        let single = EventLog::from_sequences(&[vec!["A"]]);
        assert!(directly_follows_counts(&single).is_empty());

        let selfloop = EventLog::from_sequences(&[vec!["A", "A"]]);
        assert_eq!(directly_follows_counts(&selfloop)[&("A".into(), "A".into())], 1);
    }
}
