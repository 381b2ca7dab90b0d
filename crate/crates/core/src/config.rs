//! Run configuration (stub).
