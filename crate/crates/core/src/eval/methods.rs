//! The six embedding methods behind one dispatch point.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph, ProximityMatrix};
use crate::labels::LabeledView;
use crate::rect::{self, format_loss_trace, RectConfig, RectInputs, RectVariant};
use crate::rsdne::{self, format_trace, RsdneConfig, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Mfdw,
    Rsdne,
    RsdneStar,
    Rect,
    RectL,
    RectN,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Mfdw,
        Method::Rsdne,
        Method::RsdneStar,
        Method::Rect,
        Method::RectL,
        Method::RectN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mfdw => "mfdw",
            Method::Rsdne => "rsdne",
            Method::RsdneStar => "rsdne-star",
            Method::Rect => "rect",
            Method::RectL => "rect-l",
            Method::RectN => "rect-n",
        }
    }

    /// Whether the method reads labels at all.
    pub fn uses_labels(self) -> bool {
        !matches!(self, Method::Mfdw | Method::RectN)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Everything a method may read besides the label view.
#[derive(Clone, Copy)]
pub struct EmbedContext<'a> {
    pub graph: &'a Graph,
    pub features: Option<&'a CsrMatrix>,
    pub proximity: &'a ProximityMatrix,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MethodSettings {
    pub rsdne: RsdneConfig,
    pub rect: RectConfig,
}

impl MethodSettings {
    pub fn with_seed(&self, seed: u64) -> MethodSettings {
        let mut s = self.clone();
        s.rsdne.seed = seed;
        s.rect.seed = seed;
        s
    }
}

#[derive(Clone, Debug)]
pub struct MethodOutput {
    pub embedding: Embedding,
    /// Plot-ready objective or loss trace.
    pub trace: String,
}

pub fn embed_method(
    method: Method,
    ctx: &EmbedContext<'_>,
    view: &LabeledView,
    settings: &MethodSettings,
    deadline: Option<Instant>,
) -> Result<MethodOutput> {
    let rsdne_variant = match method {
        Method::Mfdw => Some(Variant::MfdwBaseline),
        Method::Rsdne => Some(Variant::Rsdne),
        Method::RsdneStar => Some(Variant::RsdneStar),
        _ => None,
    };
    if let Some(variant) = rsdne_variant {
        let out = rsdne::solve_until(ctx.proximity, view, &settings.rsdne, variant, deadline)?;
        return Ok(MethodOutput {
            embedding: out.embedding,
            trace: format_trace(&out.trace),
        });
    }
    let variant = match method {
        Method::RectL => RectVariant::SemanticOnly,
        Method::RectN => RectVariant::StructureOnly,
        _ => RectVariant::Full,
    };
    let inputs = RectInputs {
        graph: ctx.graph,
        features: ctx.features,
        proximity: ctx.proximity,
    };
    let out = rect::train_until(&inputs, view, &settings.rect, variant, deadline)?;
    let mut trace = String::new();
    if !out.semantic_trace.is_empty() {
        trace.push_str("# semantic\n");
        trace.push_str(&format_loss_trace(&out.semantic_trace));
    }
    if !out.structural_trace.is_empty() {
        trace.push_str("# structural\n");
        trace.push_str(&format_loss_trace(&out.structural_trace));
    }
    Ok(MethodOutput {
        embedding: out.embedding,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("deepwalk".parse::<Method>().is_err());
    }
}
