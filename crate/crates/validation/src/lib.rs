//! Test-only crate holding the acceptance suite in tests/acceptance.rs.
