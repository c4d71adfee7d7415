pub mod error;
pub mod fields;
pub mod quadrature;
pub mod windows;
pub mod forward;
pub mod interp;
pub mod invert_bp;
pub mod io;
pub mod invert_fourier;
pub mod invert_slice;
pub mod invert_mellin;
pub mod calibrate;
pub mod selftest;
pub mod cli;
