//! Generic communication actions, encapsulation patterns and channel classes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned identifier used for channels, data, symbols and definitions.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelClass {
    Controllable,
    Uncontrollable,
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelClass::Controllable => f.write_str("controllable"),
            ChannelClass::Uncontrollable => f.write_str("uncontrollable"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChannelDecl {
    pub name: Name,
    pub class: ChannelClass,
}

/// The shape `c!m?n` of an action, i.e. an action without its datum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub channel: Name,
    pub sends: u32,
    pub receives: u32,
}

impl Shape {
    pub fn new(channel: &str, sends: u32, receives: u32) -> Self {
        Shape {
            channel: name(channel),
            sends,
            receives,
        }
    }

    pub fn with_datum(&self, datum: Option<Name>) -> Action {
        Action {
            channel: self.channel.clone(),
            sends: self.sends,
            receives: self.receives,
            datum,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.channel)?;
        write_counts(f, self.sends, self.receives)
    }
}

fn write_counts(f: &mut fmt::Formatter<'_>, sends: u32, receives: u32) -> fmt::Result {
    match (sends, receives) {
        (0, 0) => Ok(()),
        (1, 0) => f.write_str("!"),
        (0, 1) => f.write_str("?"),
        (1, 1) => f.write_str("!?"),
        (m, n) => write!(f, "!{m}?{n}"),
    }
}

/// A generic communication action `c!m?n(d)`.
///
/// `sends == receives == 0` is a basic event `c(d)`; otherwise the action
/// records how many send and receive parties took part in a synchronization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub channel: Name,
    pub sends: u32,
    pub receives: u32,
    pub datum: Option<Name>,
}

impl Action {
    pub fn new(channel: &str, sends: u32, receives: u32, datum: Option<&str>) -> Self {
        Action {
            channel: name(channel),
            sends,
            receives,
            datum: datum.map(name),
        }
    }

    pub fn event(channel: &str, datum: Option<&str>) -> Self {
        Self::new(channel, 0, 0, datum)
    }

    pub fn send(channel: &str, datum: Option<&str>) -> Self {
        Self::new(channel, 1, 0, datum)
    }

    pub fn receive(channel: &str, datum: Option<&str>) -> Self {
        Self::new(channel, 0, 1, datum)
    }

    pub fn comm(channel: &str, datum: Option<&str>) -> Self {
        Self::new(channel, 1, 1, datum)
    }

    pub fn shape(&self) -> Shape {
        Shape {
            channel: self.channel.clone(),
            sends: self.sends,
            receives: self.receives,
        }
    }

    /// Whether this action takes part in communication at all (`m + n > 0`).
    pub fn is_communication(&self) -> bool {
        self.sends + self.receives > 0
    }

    /// The merge of two synchronizing actions, when the synchronization rule
    /// allows it: same channel and datum, and both sides communicating.
    pub fn merge(&self, other: &Action) -> Option<Action> {
        if self.channel == other.channel
            && self.datum == other.datum
            && self.is_communication()
            && other.is_communication()
        {
            Some(Action {
                channel: self.channel.clone(),
                sends: self.sends + other.sends,
                receives: self.receives + other.receives,
                datum: self.datum.clone(),
            })
        } else {
            None
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.channel)?;
        write_counts(f, self.sends, self.receives)?;
        if let Some(d) = &self.datum {
            write!(f, "({d})")?;
        }
        Ok(())
    }
}

/// Blocks every action `(c, m, n, d)` for all data `d`.
pub type EncapPattern = Shape;

pub type EncapSet = BTreeSet<EncapPattern>;

pub fn blocks(set: &EncapSet, action: &Action) -> bool {
    set.iter().any(|p| {
        p.channel == action.channel && p.sends == action.sends && p.receives == action.receives
    })
}

pub fn fmt_encap_set(set: &EncapSet) -> String {
    let items: Vec<String> = set.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}
