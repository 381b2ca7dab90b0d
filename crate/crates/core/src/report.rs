//! Report serialization (stub).
