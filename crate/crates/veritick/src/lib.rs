//! Clock-precise constant-time verification for synchronous hardware.
//!
//! `veritick` takes a design in a synthesizable Verilog subset, annotated
//! with sources (inputs), sinks (outputs), and usage assumptions, and either
//! proves that the number of cycles a value needs to flow from sources to
//! sinks is independent of operand values, or produces a counterexample pair
//! of executions.
//!
//! The pipeline, from front to back:
//!
//! 1. [`frontend`] parses Verilog, inlines module instances, and translates
//!    to the process-based intermediate representation in [`ir`].
//! 2. [`races`] checks that the design is race-free, which justifies the
//!    lock-step product construction.
//! 3. [`xform`] injects the liveness shadow monitor and builds the
//!    per-process product of two renamed copies.
//! 4. [`vc`] compiles one clock cycle of the product into a transition
//!    formula, derives Horn clauses over an unknown relational invariant,
//!    and solves them with conjunctive (Houdini-style) inference.
//! 5. [`sim`] and [`oracle`] provide the ground truth: a cycle-accurate
//!    interpreter with influence tracking and brute-force equivalence
//!    checking on small instances.
//!
//! See the book under `book/` for a guided tour; its chapters are compiled
//! as doc-tests through [`guide`].

pub mod bench;
pub mod frontend;
pub mod guide;
pub mod ir;
pub mod oracle;
pub mod pipeline;
pub mod races;
pub mod sim;
pub mod vc;
pub mod xform;
