//! Holds the acceptance suite in `tests/acceptance.rs`. Kept as its own
//! package so that it runs after every other test binary in the workspace.
