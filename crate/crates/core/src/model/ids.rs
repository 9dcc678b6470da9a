use std::fmt;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

const CROCKFORD: &[u8; 32] = b"0123456789abcdefghjkmnpqrstvwxyz";
const TOKEN_LEN: usize = 26;

macro_rules! define_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub const PREFIX: &'static str = $prefix;

            /// Wraps an existing identifier string without checking its shape.
            pub fn new(raw: impl Into<String>) -> Self {
                Self(raw.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            /// First `n` characters, used for compact display.
            pub fn short(&self, n: usize) -> &str {
                match self.0.char_indices().nth(n) {
                    Some((idx, _)) => &self.0[..idx],
                    None => &self.0,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                Self(raw.to_owned())
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

define_id!(
    /// Identifier of a data lake object (one hypernode). Generated ids sort
    /// by creation time.
    ObjectId,
    "o_"
);
define_id!(
    /// Identifier of a version or representation node inside a hypernode.
    NodeId,
    "n_"
);
define_id!(
    /// Identifier of an update or transformation edge.
    EdgeId,
    "e_"
);
define_id!(
    /// Identifier of a similarity or parenthood link.
    LinkId,
    "l_"
);

static OBJECT_IDS: Mutex<Option<ulid::Generator>> = Mutex::new(None);

impl ObjectId {
    pub fn generate() -> Self {
        let mut guard = OBJECT_IDS.lock().unwrap_or_else(|e| e.into_inner());
        let generator = guard.get_or_insert_with(ulid::Generator::new);
        // Overflow only happens after 2^80 ids in one millisecond.
        let ulid = generator
            .generate()
            .unwrap_or_else(|_| ulid::Ulid::new());
        Self(format!("{}{}", Self::PREFIX, ulid.to_string().to_ascii_lowercase()))
    }
}

fn random_token() -> String {
    let mut rng = rand::thread_rng();
    (0..TOKEN_LEN)
        .map(|_| CROCKFORD[rng.gen_range(0..32)] as char)
        .collect()
}

impl NodeId {
    pub fn generate() -> Self {
        Self(format!("{}{}", Self::PREFIX, random_token()))
    }
}

impl EdgeId {
    pub fn generate() -> Self {
        Self(format!("{}{}", Self::PREFIX, random_token()))
    }
}

impl LinkId {
    pub fn generate() -> Self {
        Self(format!("{}{}", Self::PREFIX, random_token()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn object_ids_are_unique_and_time_ordered() {
        let ids: Vec<ObjectId> = (0..1000).map(|_| ObjectId::generate()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(ids.iter().collect::<BTreeSet<_>>().len(), 1000);
        assert!(ids[0].as_str().starts_with("o_"));
    }

    #[test]
    fn node_ids_have_random_prefixes() {
        let ids: BTreeSet<String> = (0..200)
            .map(|_| NodeId::generate().short(8).to_owned())
            .collect();
        // 30 random bits per 8-char prefix; collisions among 200 are improbable.
        assert!(ids.len() > 195);
    }
}
