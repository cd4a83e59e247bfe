//! Line-delimited `key=value` event records.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub t_ms: u64,
    pub actor: String,
    pub event: String,
    pub outcome: String,
    /// Wall-clock duration, omitted in virtual-time runs.
    pub micros: Option<u64>,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} actor={} event={} outcome={}", self.t_ms, self.actor, self.event, self.outcome)?;
        if let Some(us) = self.micros {
            write!(f, " us={us}")?;
        }
        Ok(())
    }
}

impl Event {
    pub fn parse(line: &str) -> Option<Self> {
        let mut t_ms = None;
        let mut actor = None;
        let mut event = None;
        let mut outcome = None;
        let mut micros = None;
        for part in line.split_whitespace() {
            let (k, v) = part.split_once('=')?;
            match k {
                "t" => t_ms = v.parse().ok(),
                "actor" => actor = Some(v.to_string()),
                "event" => event = Some(v.to_string()),
                "outcome" => outcome = Some(v.to_string()),
                "us" => micros = Some(v.parse().ok()?),
                _ => return None,
            }
        }
        Some(Self { t_ms: t_ms?, actor: actor?, event: event?, outcome: outcome?, micros })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn record(&mut self, t_ms: u64, actor: &str, event: &str, outcome: impl fmt::Display) {
        self.events.push(Event {
            t_ms,
            actor: actor.to_string(),
            event: event.to_string(),
            outcome: outcome.to_string().replace(' ', "_"),
            micros: None,
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn count(&self, event: &str, outcome: &str) -> usize {
        self.events.iter().filter(|e| e.event == event && e.outcome == outcome).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}
