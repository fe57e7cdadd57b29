//! Monte Carlo harness (in progress).
