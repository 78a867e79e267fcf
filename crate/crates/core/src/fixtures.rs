//! Research production data for 13 Indian Institutes of Management, 2020-21.
//!
//! Inputs: financial resources (`x1`), PhD students (`x2`), faculty (`x3`).
//! Intermediate product: publications (`z1`). Output: research grants (`y1`).

use crate::dea::Dataset;

pub const IIMS_2020_21_CSV: &str = include_str!("../data/iims_2020_21.csv");

pub fn iims_2020_21() -> Dataset {
    crate::io::parse_dataset(IIMS_2020_21_CSV).expect("bundled dataset is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn dimensions_and_spot_values() {
        let d = super::iims_2020_21();
        assert_eq!(d.num_dmus(), 13);
        assert_eq!((d.num_inputs(), d.num_intermediates(), d.num_outputs()), (3, 1, 1));
        assert_eq!(d.inputs[0][0], 2783060307.0);
        assert_eq!(d.inputs[4][0], 1323781000.0);
        assert_eq!(d.outputs[12][0], 696200.0);
        assert_eq!(d.dmu_names[6], "IIM Udaipur");
    }
}
