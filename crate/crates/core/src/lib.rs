pub mod asymptotics;
pub mod classes;
pub mod cli;
pub mod oeis;
pub mod oracle;
pub mod poly;
pub mod powerseries;
pub mod real;
