// Benchmarks only; see benches/.
