//! Model-to-code toolchain for skill-based production system groups.
//!
//! A [`model::SystemGroupModel`] describes goals, blackbox functions, roles and
//! activities of a system group. From it the crate generates annotated skill
//! templates ([`codegen`]) and executable BPMN processes ([`bpmn`]), which the
//! [`engine`] runs against a registry of skills ([`runtime`]).

pub mod bpmn;
pub mod codegen;
pub mod engine;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod naming;
pub mod runtime;
