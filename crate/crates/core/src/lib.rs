pub mod asymptotics;
pub mod bounds;
pub mod charindex;
pub mod integrator;
pub mod lattice;
pub mod poly;
pub mod pseudonorm;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod resolution;
pub mod scenario;
pub mod weight;
