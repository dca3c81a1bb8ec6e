#![allow(dead_code)]
pub mod quad;
