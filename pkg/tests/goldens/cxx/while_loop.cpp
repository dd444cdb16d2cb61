// Generated Verilator-style harness for ReadyLoop; do not edit.
#include <cstdint>
#include <cstdio>

#include "VReadyLoop.h"
#include "verilated.h"

static int __fl_failures = 0;

static void __fl_check(const char* signal, uint64_t observed, uint64_t expected) {
  if (observed != expected) {
    std::fprintf(stderr, "expect failed: %s is %llu, expected %llu\n", signal,
                 (unsigned long long)observed, (unsigned long long)expected);
    ++__fl_failures;
  }
}

int main(int argc, char** argv) {
  Verilated::commandArgs(argc, argv);
  VReadyLoop* __fl_top = new VReadyLoop;
  __fl_top->eval();
  while ((uint64_t)__fl_top->ready) {
    __fl_check("ready", (uint64_t)__fl_top->ready, 0x1ull);
    __fl_top->clk = !__fl_top->clk; __fl_top->eval();
    __fl_top->clk = !__fl_top->clk; __fl_top->eval();
  }
  __fl_check("count", (uint64_t)__fl_top->count, 0x5ull);
  __fl_top->final();
  delete __fl_top;
  if (__fl_failures != 0) std::fprintf(stderr, "%d expect(s) failed\n", __fl_failures);
  return __fl_failures;
}
