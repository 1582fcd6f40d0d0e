use core::fmt;
use core::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Man,
    Woman,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Man => Side::Woman,
            Side::Woman => Side::Man,
        }
    }

    pub fn prefix(self) -> char {
        match self {
            Side::Man => 'm',
            Side::Woman => 'w',
        }
    }
}

/// One agent of the market. Indices are zero-based; the text form (`m1`, `w3`) is one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub const fn man(index: usize) -> Self {
        AgentId { side: Side::Man, index }
    }

    pub const fn woman(index: usize) -> Self {
        AgentId {
            side: Side::Woman,
            index,
        }
    }

    pub fn is_man(self) -> bool {
        self.side == Side::Man
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side.prefix(), self.index + 1)
    }
}

impl FromStr for AgentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let side = match s.chars().next() {
            Some('m') | Some('M') => Side::Man,
            Some('w') | Some('W') => Side::Woman,
            _ => return Err(Error::validation(alloc::format!("bad agent name `{s}`"))),
        };
        let number: usize = s[1..]
            .parse()
            .map_err(|_| Error::validation(alloc::format!("bad agent name `{s}`")))?;
        if number == 0 {
            return Err(Error::validation(alloc::format!(
                "agent names are one-based, got `{s}`"
            )));
        }
        Ok(AgentId {
            side,
            index: number - 1,
        })
    }
}
