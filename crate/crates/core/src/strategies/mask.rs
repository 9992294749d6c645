//! Format-preserving masks. Every mask works on ASCII input and keeps the
//! byte length and every separator byte in place.

use crate::error::{Error, Result};
use crate::model::EntityKind;
use crate::policy::MaskParams;

const PHONE_SHAPES: [&str; 3] = ["ddd.ddd.dddd", "(ddd) ddd-dddd", "ddd-ddd-dddd"];

fn require_ascii(strategy: &'static str, surface: &str) -> Result<()> {
    if surface.is_ascii() {
        Ok(())
    } else {
        Err(Error::format(strategy, "non-ASCII input"))
    }
}

// Digits and already-masked positions both count as digit slots, which makes
// the numeric masks idempotent.
fn is_digit_slot(b: u8) -> bool {
    b.is_ascii_digit() || b == b'X' || b == b'x'
}

fn mask_digit_slots(surface: &str, keep: impl Fn(usize) -> bool, mask_char: u8) -> String {
    let mut slot = 0;
    let bytes: Vec<u8> = surface
        .bytes()
        .map(|b| {
            if !is_digit_slot(b) {
                return b;
            }
            let out = if keep(slot) { b } else { mask_char };
            slot += 1;
            out
        })
        .collect();
    String::from_utf8(bytes).expect("ASCII in, ASCII out")
}

/// Keeps the area code and masks the remaining seven digits.
pub fn mask_phone(surface: &str) -> Result<String> {
    require_ascii("mask_phone", surface)?;
    let shape: String = surface
        .bytes()
        .map(|b| if is_digit_slot(b) { 'd' } else { b as char })
        .collect();
    if !PHONE_SHAPES.contains(&shape.as_str()) {
        return Err(Error::format("mask_phone", format!("'{shape}' is not a phone layout")));
    }
    Ok(mask_digit_slots(surface, |i| i < 3, b'X'))
}

/// Keeps digits 1, 4 and 13-16 of a 16-digit card number.
pub fn mask_credit_card(surface: &str) -> Result<String> {
    require_ascii("mask_credit_card", surface)?;
    let slots = surface.bytes().filter(|&b| is_digit_slot(b)).count();
    if slots != 16 {
        return Err(Error::format("mask_credit_card", format!("{slots} digits, expected 16")));
    }
    if let Some(b) = surface.bytes().find(|&b| !is_digit_slot(b) && b != b' ' && b != b'-') {
        return Err(Error::format(
            "mask_credit_card",
            format!("unexpected separator {:?}", b as char),
        ));
    }
    Ok(mask_digit_slots(surface, |i| i == 0 || i == 3 || i >= 12, b'X'))
}

/// Replaces the local part and every domain label except the TLD with `x`.
pub fn mask_email(surface: &str) -> Result<String> {
    require_ascii("mask_email", surface)?;
    let (local, domain) = surface
        .split_once('@')
        .ok_or_else(|| Error::format("mask_email", "missing '@'"))?;
    let labels: Vec<&str> = domain.split('.').collect();
    if local.is_empty()
        || domain.contains('@')
        || labels.len() < 2
        || labels.iter().any(|l| l.is_empty())
        || !labels[labels.len() - 1].bytes().all(|b| b.is_ascii_alphabetic())
    {
        return Err(Error::format("mask_email", "not an address of the form local@domain.tld"));
    }
    let mut out = "x".repeat(local.len());
    out.push('@');
    for label in &labels[..labels.len() - 1] {
        out.push_str(&"x".repeat(label.len()));
        out.push('.');
    }
    out.push_str(labels[labels.len() - 1]);
    Ok(out)
}

/// Keeps the first `keep_prefix` and last `keep_suffix` bytes of an
/// alphanumeric identifier.
pub fn mask_id(surface: &str, keep_prefix: usize, keep_suffix: usize, mask_char: char) -> Result<String> {
    require_ascii("mask_id", surface)?;
    if !surface.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(Error::format("mask_id", "identifier must be alphanumeric"));
    }
    let len = surface.len();
    if keep_prefix + keep_suffix >= len {
        return Err(Error::InvalidParams(format!(
            "keep_prefix {keep_prefix} + keep_suffix {keep_suffix} must be below length {len}"
        )));
    }
    let mut out = String::with_capacity(len);
    out.push_str(&surface[..keep_prefix]);
    out.extend(std::iter::repeat_n(mask_char, len - keep_prefix - keep_suffix));
    out.push_str(&surface[len - keep_suffix..]);
    Ok(out)
}

/// Masks the leading house number of a street address.
pub fn mask_house_number(surface: &str) -> Result<String> {
    require_ascii("mask_house_number", surface)?;
    let digits = surface.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return Err(Error::format("mask_house_number", "address has no leading house number"));
    }
    Ok(format!("{}{}", "X".repeat(digits), &surface[digits..]))
}

/// Generic window mask. With `preserve_separators` only alphanumeric bytes
/// are masked and the windows count alphanumerics; otherwise every byte in
/// the middle window is masked.
pub fn mask_window(surface: &str, keep_prefix: usize, keep_suffix: usize, mask_char: char, preserve_separators: bool) -> Result<String> {
    require_ascii("mask", surface)?;
    let maskable = |b: u8| !preserve_separators || b.is_ascii_alphanumeric();
    let total = surface.bytes().filter(|&b| maskable(b)).count();
    if total == 0 {
        return Err(Error::format("mask", "nothing to mask"));
    }
    if keep_prefix + keep_suffix > total {
        return Err(Error::InvalidParams(format!(
            "keep_prefix {keep_prefix} + keep_suffix {keep_suffix} exceed {total} maskable characters"
        )));
    }
    let mut slot = 0;
    Ok(surface
        .bytes()
        .map(|b| {
            if !maskable(b) {
                return b as char;
            }
            let keep = slot < keep_prefix || slot >= total - keep_suffix;
            slot += 1;
            if keep {
                b as char
            } else {
                mask_char
            }
        })
        .collect())
}

/// Applies the mask for `kind`: the canonical mask when no window is
/// configured, otherwise a window mask.
pub fn apply_mask(kind: &EntityKind, surface: &str, params: &MaskParams) -> Result<String> {
    let mask_char = params.mask_char.unwrap_or('X');
    if !params.is_canonical() {
        let (p, s) = (params.keep_prefix.unwrap_or(0), params.keep_suffix.unwrap_or(0));
        return match kind {
            EntityKind::AlphanumericId(_) => mask_id(surface, p, s, mask_char),
            _ => mask_window(surface, p, s, mask_char, params.preserve_separators),
        };
    }
    let out = match kind {
        EntityKind::PhoneNumber => mask_phone(surface)?,
        EntityKind::CreditCardNumber => mask_credit_card(surface)?,
        EntityKind::EmailAddress => mask_email(surface)?,
        EntityKind::StreetAddress => mask_house_number(surface)?,
        _ => return mask_window(surface, 0, 0, mask_char, params.preserve_separators),
    };
    match params.mask_char {
        Some(c) if c != 'X' && c != 'x' => Ok(out.replace(['X', 'x'], &c.to_string())),
        _ => Ok(out),
    }
}
