use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(String::from(s))
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl core::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Identifier of a development site.
    SiteId
);
id_type!(
    /// Identifier of a team member (a fluid store).
    PersonId
);
id_type!(
    /// Identifier of a pair-programming store.
    PairId
);
id_type!(
    /// Identifier of a document or data store (a solid store).
    DocumentId
);
id_type!(
    /// Identifier of a catalog medium.
    MediumId
);
id_type!(
    /// Identifier of a communication activity.
    ActivityId
);
id_type!(
    /// Identifier of a developer workstation that broadcasts status messages.
    WorkstationId
);
