//! Enumeration of deterministic protocols for a scenario and the extreme
//! points they generate in either picture.
//!
//! Local protocols are output-function pairs; one-bit protocols commit to
//! a message direction, a bit function on the sender's setting, and a
//! receiver output table; unrestricted protocols are arbitrary output
//! pairs on both settings. Distinct protocols can induce the same table,
//! so vertex sets are deduplicated; every surviving point is 0/1 (or
//! +-1) valued and hence extreme.

use std::collections::BTreeSet;

use num::bigint::BigUint;

use crate::model::{
    protocol_table, table_to_vector, to_correlation, CommModel, DetProtocol, ModelError, Picture,
    PointList, ProtocolPattern, Scenario,
};
use crate::rational::Rat;

/// Default guard on the number of protocols expanded by one call.
pub const DEFAULT_PROTOCOL_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("{count} protocols exceed the enumeration cap of {cap}")]
    CapExceeded { count: BigUint, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// All functions `[0, len) -> [0, base)` as digit vectors, lexicographic.
fn functions(len: usize, base: usize) -> impl Iterator<Item = Vec<u8>> {
    debug_assert!(base >= 1 && base <= u8::MAX as usize + 1);
    let mut current = Some(vec![0u8; len]);
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let digits = current.as_mut().unwrap();
        let mut pos = len;
        loop {
            if pos == 0 {
                current = None;
                break;
            }
            pos -= 1;
            if (digits[pos] as usize) + 1 < base {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
        }
        Some(out)
    })
}

fn pow(base: usize, exp: usize) -> BigUint {
    BigUint::from(base).pow(exp as u32)
}

/// Exact number of deterministic protocols for the scenario's model.
pub fn protocol_count(s: &Scenario) -> Result<BigUint, ModelError> {
    let (m, k) = (s.m(), s.k());
    Ok(match s.comm_model()? {
        CommModel::Local => pow(k, 2 * m),
        CommModel::OneBit => BigUint::from(2u32) * pow(k, m) * pow(2, m) * pow(k, 2 * m),
        CommModel::Unrestricted => pow(k, 2 * m * m),
    })
}

fn check_cap(s: &Scenario, cap: u64) -> Result<(), EnumError> {
    let count = protocol_count(s)?;
    if count > BigUint::from(cap) {
        return Err(EnumError::CapExceeded { count, cap });
    }
    Ok(())
}

/// Lazily yields every deterministic protocol of the scenario's model,
/// in a fixed lexicographic order.
pub fn protocols_iter(s: Scenario) -> Result<impl Iterator<Item = DetProtocol>, ModelError> {
    let (m, k) = (s.m(), s.k());
    let model = s.comm_model()?;
    let build = move |pattern| {
        DetProtocol::new(s, pattern).expect("enumerated pattern is well-formed")
    };
    let iter: Box<dyn Iterator<Item = DetProtocol>> = match model {
        CommModel::Local => Box::new(functions(m, k).flat_map(move |alpha| {
            functions(m, k).map(move |beta| {
                build(ProtocolPattern::NoComm {
                    alpha: alpha.clone(),
                    beta,
                })
            })
        })),
        CommModel::OneBit => {
            let a_to_b = functions(m, k).flat_map(move |alpha| {
                functions(m, 2).flat_map({
                    let alpha = alpha.clone();
                    move |msg| {
                        let alpha = alpha.clone();
                        let msg = msg.clone();
                        functions(2 * m, k).map(move |beta_recv| {
                            build(ProtocolPattern::AtoB {
                                alpha: alpha.clone(),
                                msg: msg.clone(),
                                beta_recv,
                            })
                        })
                    }
                })
            });
            let b_to_a = functions(m, k).flat_map(move |beta| {
                functions(m, 2).flat_map({
                    let beta = beta.clone();
                    move |msg| {
                        let beta = beta.clone();
                        let msg = msg.clone();
                        functions(2 * m, k).map(move |alpha_recv| {
                            build(ProtocolPattern::BtoA {
                                beta: beta.clone(),
                                msg: msg.clone(),
                                alpha_recv,
                            })
                        })
                    }
                })
            });
            Box::new(a_to_b.chain(b_to_a))
        }
        CommModel::Unrestricted => Box::new(functions(m * m, k).flat_map(move |alpha| {
            functions(m * m, k).map(move |beta| {
                build(ProtocolPattern::Full {
                    alpha: alpha.clone(),
                    beta,
                })
            })
        })),
    };
    Ok(iter)
}

/// Collects every deterministic protocol, guarded by `cap`.
pub fn enumerate_protocols(s: &Scenario, cap: u64) -> Result<Vec<DetProtocol>, EnumError> {
    check_cap(s, cap)?;
    Ok(protocols_iter(*s)?.collect())
}

/// Deduplicated, canonically sorted extreme points of the scenario's
/// protocol polytope in the requested picture.
pub fn vertex_set(s: &Scenario, picture: Picture, cap: u64) -> Result<PointList, EnumError> {
    check_cap(s, cap)?;
    if picture == Picture::Correlation && s.k() != 2 {
        return Err(ModelError::OutcomesNotBinary(s.k() as u32).into());
    }
    let mut seen: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for protocol in protocols_iter(*s)? {
        let table = protocol_table(&protocol);
        let coords = match picture {
            Picture::Probability => table_to_vector(&table).into_coords(),
            Picture::Correlation => to_correlation(&table)
                .expect("protocol tables are valid")
                .coords()
                .to_vec(),
        };
        seen.insert(coords);
    }
    Ok(PointList {
        picture,
        scenario: Some(*s),
        points: seen.into_iter().collect(),
    })
}
