pub mod config;
pub mod harness;
pub mod lean;
pub mod llm;
pub mod orchestrator;
pub mod retrieval;
pub mod sketch;
pub mod verifier;
