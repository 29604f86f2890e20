//! End-to-end acceptance checks for gkl-core and the gkl binary; see tests/acceptance.rs.
