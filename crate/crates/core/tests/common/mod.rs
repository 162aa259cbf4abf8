#![allow(dead_code)]

use proptest::prelude::*;
use stlcbf_core::TargetSet;

/// Discs and boxes inside `[0, 20]²`.
pub fn planar_set() -> impl Strategy<Value = TargetSet> {
    prop_oneof![
        (1.0..19.0f64, 1.0..19.0f64, 0.2..2.0f64).prop_map(|(x, y, r)| TargetSet::disc(vec![x, y], r).unwrap()),
        (0.0..18.0f64, 0.0..18.0f64, 0.2..2.0f64, 0.2..2.0f64)
            .prop_map(|(x, y, w, h)| TargetSet::boxed(vec![x, y], vec![x + w, y + h]).unwrap()),
    ]
}

pub fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..22.0f64, 2)
}
