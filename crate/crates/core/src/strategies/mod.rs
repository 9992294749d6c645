//! Obfuscation transformations: masks, numeric noise and surrogates.

mod mask;
mod noise;
mod stream;
mod surrogate;

pub use mask::{
    apply_mask, mask_credit_card, mask_email, mask_house_number, mask_id, mask_phone, mask_window,
};
pub use noise::{dp_laplace, format_like, laplace_noise, parse_number, perturb_gaussian};
pub use stream::{fnv1a, DeterministicStream};
pub use surrogate::{mirror_case, surrogate_person_name, surrogate_weekday, WEEKDAYS};
