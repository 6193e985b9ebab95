//! Holds the `acceptance` test target. Run it with
//! `cargo test -p pucvsim-validation --test acceptance`.
