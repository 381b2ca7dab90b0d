//! Batch driver (stub).
