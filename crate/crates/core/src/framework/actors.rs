use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::Slots;
use crate::{Error, Result};

/// Identities are packed into 16-bit fields.
pub const IDENTITY_BITS: u32 = 16;
const MAX_PASSWORD_BYTES: usize = 64;

/// The seven schemes, with their stable identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "wei2012")]
    Wei,
    #[serde(rename = "zhu2012")]
    Zhu,
    #[serde(rename = "leeliu2013")]
    LeeLiu,
    #[serde(rename = "lin2013")]
    Lin,
    #[serde(rename = "caozhai2013")]
    CaoZhai,
    #[serde(rename = "xie2013")]
    Xie,
    #[serde(rename = "xu2014")]
    Xu,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] =
        [SchemeId::Wei, SchemeId::Zhu, SchemeId::LeeLiu, SchemeId::Lin, SchemeId::CaoZhai, SchemeId::Xie, SchemeId::Xu];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Wei => "wei2012",
            SchemeId::Zhu => "zhu2012",
            SchemeId::LeeLiu => "leeliu2013",
            SchemeId::Lin => "lin2013",
            SchemeId::CaoZhai => "caozhai2013",
            SchemeId::Xie => "xie2013",
            SchemeId::Xu => "xu2014",
        }
    }

    /// Human-readable name of the scheme's authors.
    pub fn authors(self) -> &'static str {
        match self {
            SchemeId::Wei => "Wei et al.",
            SchemeId::Zhu => "Zhu",
            SchemeId::LeeLiu => "Lee-Liu",
            SchemeId::Lin => "Lin",
            SchemeId::CaoZhai => "Cao-Zhai",
            SchemeId::Xie => "Xie et al.",
            SchemeId::Xu => "Xu et al.",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| Error::UnknownScheme(s.to_owned()))
    }
}

/// User identity: a non-empty octet string of at most [`IDENTITY_BITS`] bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(Error::InvalidInput("empty identity".into()));
        }
        if bytes.len() * 8 > IDENTITY_BITS as usize {
            return Err(Error::InvalidInput(format!("identity wider than {IDENTITY_BITS} bits")));
        }
        Ok(Identity(bytes))
    }

    pub fn from_u16(v: u16) -> Self {
        Identity(v.to_be_bytes().to_vec())
    }

    /// Inverse of [`Identity::to_int`] for values that fit the slot.
    pub fn from_int(v: &BigUint) -> Option<Self> {
        u16::try_from(v).ok().map(Identity::from_u16)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_int(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_int())
    }
}

/// Password: a non-empty octet string of at most 64 bytes.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Password(Vec<u8>);

impl Password {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() || bytes.len() > MAX_PASSWORD_BYTES {
            return Err(Error::InvalidInput("password must be 1..=64 bytes".into()));
        }
        Ok(Password(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_int(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }
}

impl fmt::Debug for Password {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Password(..)")
    }
}

/// Card-resident parameters issued at registration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmartCard {
    scheme: SchemeId,
    slots: Slots,
}

impl SmartCard {
    pub(crate) fn issue(scheme: SchemeId, slots: Slots) -> Self {
        SmartCard { scheme, slots }
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn slots(&self) -> &Slots {
        &self.slots
    }

    pub fn slot_names(&self) -> Vec<&str> {
        self.slots.names().collect()
    }

    pub(crate) fn slots_mut(&mut self) -> &mut Slots {
        &mut self.slots
    }
}

/// One row of the server's account table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: Identity,
    /// Registration counter; bumped only by card revocation.
    pub counter: u64,
    pub card_number: Option<u64>,
    pub rid: Option<Vec<u8>>,
    sn_watermark: u64,
}

impl Account {
    pub fn new(id: Identity) -> Self {
        Account { id, counter: 0, card_number: None, rid: None, sn_watermark: 0 }
    }

    pub fn sn_watermark(&self) -> u64 {
        self.sn_watermark
    }

    /// Moves the watermark up; lower values are ignored.
    pub fn raise_watermark(&mut self, sn: u64) {
        self.sn_watermark = self.sn_watermark.max(sn);
    }
}

/// Server secrets and account table for one deployed scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerState {
    scheme: SchemeId,
    secrets: Slots,
    accounts: BTreeMap<Identity, Account>,
}

impl ServerState {
    pub(crate) fn new(scheme: SchemeId, secrets: Slots) -> Self {
        ServerState { scheme, secrets, accounts: BTreeMap::new() }
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    /// Long-term secrets. Read-only; adversaries are never handed a server.
    pub fn secrets(&self) -> &Slots {
        &self.secrets
    }

    pub fn account(&self, id: &Identity) -> Option<&Account> {
        self.accounts.get(id)
    }

    pub(crate) fn account_mut(&mut self, id: &Identity) -> Option<&mut Account> {
        self.accounts.get_mut(id)
    }

    pub fn is_registered(&self, id: &Identity) -> bool {
        self.accounts.contains_key(id)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub(crate) fn insert_account(&mut self, account: Account) -> Result<&mut Account> {
        use std::collections::btree_map::Entry;
        match self.accounts.entry(account.id.clone()) {
            Entry::Occupied(_) => Err(Error::DuplicateIdentity(account.id.to_string())),
            Entry::Vacant(v) => Ok(v.insert(account)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_ids_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!("chen2012".parse::<SchemeId>().is_err());
    }

    #[test]
    fn identity_width() {
        assert!(Identity::new(vec![]).is_err());
        assert!(Identity::new(vec![1, 2, 3]).is_err());
        assert_eq!(Identity::new(vec![1, 2]).unwrap(), Identity::from_u16(0x0102));
        assert_eq!(Identity::from_int(&Identity::from_u16(77).to_int()), Some(Identity::from_u16(77)));
    }

    #[test]
    fn duplicate_accounts_are_refused() {
        let mut s = ServerState::new(SchemeId::Wei, Slots::new());
        s.insert_account(Account::new(Identity::from_u16(1))).unwrap();
        assert!(matches!(s.insert_account(Account::new(Identity::from_u16(1))), Err(Error::DuplicateIdentity(_))));
    }

    #[test]
    fn watermark_never_decreases() {
        let mut a = Account::new(Identity::from_u16(1));
        a.raise_watermark(4);
        a.raise_watermark(2);
        assert_eq!(a.sn_watermark(), 4);
    }
}
