//! Igusa local zeta functions over `F_q((pi))`.
//!
//! The stationary phase recursion in [`spf`] produces exact rational functions
//! in `u = q^-1` and `t = q^-s` ([`symb::RatFun`]); [`count`] is an independent
//! brute-force oracle over the truncated rings `F_q[pi]/(pi^i)`.

pub mod gf;
pub mod mvpoly;
pub mod symb;
pub mod count;
pub mod par;
pub mod newton;
pub mod spf;
pub mod hybrid;
pub mod example;
