//! Sobol direction numbers for dimensions 2..=50.
//!
//! Entries are taken verbatim from the Joe & Kuo table `new-joe-kuo-6.21201`
//! (<https://web.maths.unsw.edu.au/~fkuo/sobol/>). Dimension 1 is the van der
//! Corput sequence and has no entry. `coeffs` packs the interior polynomial
//! coefficients a_1..a_(s-1) with a_1 as the most significant bit.

pub(crate) struct Primitive {
    pub degree: u32,
    pub coeffs: u32,
    pub initial: &'static [u32],
}

pub(crate) const SOURCE: &str = "joe-kuo new-joe-kuo-6.21201";

pub(crate) const TABLE: [Primitive; 49] = [
    Primitive { degree: 1, coeffs: 0, initial: &[1] },
    Primitive { degree: 2, coeffs: 1, initial: &[1, 3] },
    Primitive { degree: 3, coeffs: 1, initial: &[1, 3, 1] },
    Primitive { degree: 3, coeffs: 2, initial: &[1, 1, 1] },
    Primitive { degree: 4, coeffs: 1, initial: &[1, 1, 3, 3] },
    Primitive { degree: 4, coeffs: 4, initial: &[1, 3, 5, 13] },
    Primitive { degree: 5, coeffs: 2, initial: &[1, 1, 5, 5, 17] },
    Primitive { degree: 5, coeffs: 4, initial: &[1, 1, 5, 5, 5] },
    Primitive { degree: 5, coeffs: 7, initial: &[1, 1, 7, 11, 19] },
    Primitive { degree: 5, coeffs: 11, initial: &[1, 1, 5, 1, 1] },
    Primitive { degree: 5, coeffs: 13, initial: &[1, 1, 1, 3, 11] },
    Primitive { degree: 5, coeffs: 14, initial: &[1, 3, 5, 5, 31] },
    Primitive { degree: 6, coeffs: 1, initial: &[1, 3, 3, 9, 7, 49] },
    Primitive { degree: 6, coeffs: 13, initial: &[1, 1, 1, 15, 21, 21] },
    Primitive { degree: 6, coeffs: 16, initial: &[1, 3, 1, 13, 27, 49] },
    Primitive { degree: 6, coeffs: 19, initial: &[1, 1, 1, 15, 7, 5] },
    Primitive { degree: 6, coeffs: 22, initial: &[1, 3, 1, 15, 13, 25] },
    Primitive { degree: 6, coeffs: 25, initial: &[1, 1, 5, 5, 19, 61] },
    Primitive { degree: 7, coeffs: 1, initial: &[1, 3, 7, 11, 23, 15, 103] },
    Primitive { degree: 7, coeffs: 4, initial: &[1, 3, 7, 13, 13, 15, 69] },
    Primitive { degree: 7, coeffs: 7, initial: &[1, 1, 3, 13, 7, 35, 63] },
    Primitive { degree: 7, coeffs: 8, initial: &[1, 3, 5, 9, 1, 25, 53] },
    Primitive { degree: 7, coeffs: 14, initial: &[1, 3, 1, 13, 9, 35, 107] },
    Primitive { degree: 7, coeffs: 19, initial: &[1, 3, 1, 5, 27, 61, 31] },
    Primitive { degree: 7, coeffs: 21, initial: &[1, 1, 5, 11, 19, 41, 61] },
    Primitive { degree: 7, coeffs: 28, initial: &[1, 3, 5, 3, 3, 13, 69] },
    Primitive { degree: 7, coeffs: 31, initial: &[1, 1, 7, 13, 1, 19, 1] },
    Primitive { degree: 7, coeffs: 32, initial: &[1, 3, 7, 5, 13, 19, 59] },
    Primitive { degree: 7, coeffs: 37, initial: &[1, 1, 3, 9, 25, 29, 41] },
    Primitive { degree: 7, coeffs: 41, initial: &[1, 3, 5, 13, 23, 1, 55] },
    Primitive { degree: 7, coeffs: 42, initial: &[1, 3, 7, 3, 13, 59, 17] },
    Primitive { degree: 7, coeffs: 50, initial: &[1, 3, 1, 3, 5, 53, 69] },
    Primitive { degree: 7, coeffs: 55, initial: &[1, 1, 5, 5, 23, 33, 13] },
    Primitive { degree: 7, coeffs: 56, initial: &[1, 1, 7, 7, 1, 61, 123] },
    Primitive { degree: 7, coeffs: 59, initial: &[1, 1, 7, 9, 13, 61, 49] },
    Primitive { degree: 7, coeffs: 62, initial: &[1, 3, 3, 5, 3, 55, 33] },
    Primitive { degree: 8, coeffs: 14, initial: &[1, 3, 1, 15, 31, 13, 49, 245] },
    Primitive { degree: 8, coeffs: 21, initial: &[1, 3, 5, 15, 31, 59, 63, 97] },
    Primitive { degree: 8, coeffs: 22, initial: &[1, 3, 1, 11, 11, 11, 77, 249] },
    Primitive { degree: 8, coeffs: 38, initial: &[1, 3, 1, 11, 27, 43, 71, 9] },
    Primitive { degree: 8, coeffs: 47, initial: &[1, 1, 7, 15, 21, 11, 81, 45] },
    Primitive { degree: 8, coeffs: 49, initial: &[1, 3, 7, 3, 25, 31, 65, 79] },
    Primitive { degree: 8, coeffs: 50, initial: &[1, 3, 1, 1, 19, 11, 3, 205] },
    Primitive { degree: 8, coeffs: 52, initial: &[1, 1, 5, 9, 19, 21, 29, 157] },
    Primitive { degree: 8, coeffs: 56, initial: &[1, 3, 7, 11, 1, 33, 89, 185] },
    Primitive { degree: 8, coeffs: 67, initial: &[1, 3, 3, 3, 15, 9, 79, 71] },
    Primitive { degree: 8, coeffs: 70, initial: &[1, 3, 7, 11, 15, 39, 119, 27] },
    Primitive { degree: 8, coeffs: 84, initial: &[1, 1, 3, 1, 11, 31, 97, 225] },
    Primitive { degree: 8, coeffs: 97, initial: &[1, 1, 1, 3, 23, 43, 57, 177] },
];
