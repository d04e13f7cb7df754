pub use cascade;
