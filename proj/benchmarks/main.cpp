#include <benchmark/benchmark.h>

// The distro's static benchmark_main carries LTO bytecode from another
// compiler release, so the entry point lives here.
BENCHMARK_MAIN();
