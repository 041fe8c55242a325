//! Hosts the `acceptance` test target. Run it with
//! `cargo test -p mrcg-validation --test acceptance`.
