use serde::{Deserialize, Serialize};

/// Defines a label enum. Variants are listed in ascending monotonicity
/// ordinal; `axis` gives each label's position on the normalized [0,1] axis
/// counted from 0.
macro_rules! labels {
    ($(#[$meta:meta])* $name:ident { $($variant:ident = $text:literal, axis $axis:literal;)+ }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(
                #[serde(rename = $text)]
                $variant,
            )+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn ordinal(self) -> usize {
                self as usize
            }

            pub fn from_ordinal(ordinal: usize) -> Option<Self> {
                Self::ALL.get(ordinal).copied()
            }

            pub fn axis_position(self) -> usize {
                match self {
                    $($name::$variant => $axis,)+
                }
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)+
                }
            }

            pub fn parse(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }

            /// Label names ordered by axis position.
            pub fn axis_labels() -> Vec<&'static str> {
                let mut labels: Vec<_> = Self::ALL.iter().map(|l| (l.axis_position(), l.as_str())).collect();
                labels.sort();
                labels.into_iter().map(|(_, s)| s).collect()
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

labels! {
    /// Hop count. Ordinal grows with path length.
    Hc {
        S = "S", axis 0;
        M = "M", axis 1;
        L = "L", axis 2;
        VL = "VL", axis 3;
    }
}

labels! {
    /// Residual energy. Ordinal grows with depletion, so VL (full) is 0.
    Re {
        VL = "VL", axis 4;
        L = "L", axis 3;
        M = "M", axis 2;
        S = "S", axis 1;
        VS = "VS", axis 0;
    }
}

labels! {
    /// Number of participating paths.
    Npp {
        L = "L", axis 0;
        M = "M", axis 1;
        H = "H", axis 2;
    }
}

labels! {
    /// Number of multiple pathways.
    Nmp {
        VS = "VS", axis 0;
        S = "S", axis 1;
        M = "M", axis 2;
        L = "L", axis 3;
        VL = "VL", axis 4;
    }
}
