//! Game-theoretic analysis of quantum key distribution under active attacks.
//!
//! [`qsim`] is a small state-vector simulator, [`protocols`] runs the
//! Ping-Pong and LM05 protocols against two-leg attack circuits, [`attacks`]
//! holds Eve's strategies, and [`game`] turns protocol statistics into
//! weighted bimatrix games and solves them symbolically.

pub mod attacks;
pub mod game;
pub mod protocols;
pub mod qsim;
