use crate::model::{Instance, ValuationMatrix};
use crate::scenario::builtin;

fn pair(rows: &[[i64; 5]; 5]) -> (Instance, ValuationMatrix) {
    (
        Instance::lettered(5, 36.into()).unwrap(),
        ValuationMatrix::from_integers(rows),
    )
}

pub fn baseline() -> (Instance, ValuationMatrix) {
    pair(&builtin::BASELINE)
}

pub fn scenario1_reports() -> (Instance, ValuationMatrix) {
    pair(&builtin::SCENARIO1)
}

pub fn scenario2_reports() -> (Instance, ValuationMatrix) {
    pair(&builtin::SCENARIO2)
}

pub fn scenario3_reports() -> (Instance, ValuationMatrix) {
    pair(&builtin::SCENARIO3)
}

pub fn scenario4_reports() -> (Instance, ValuationMatrix) {
    pair(&builtin::SCENARIO4)
}
