// Generated Verilator-style harness for Add16; do not edit.
#include <cstdint>
#include <cstdio>

#include "VAdd16.h"
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
  VAdd16* __fl_top = new VAdd16;
  __fl_top->in0 = 0x3ull;
  __fl_top->in1 = 0x2ull;
  __fl_top->eval();
  __fl_check("out", (uint64_t)__fl_top->out, 0x5ull);
  __fl_top->final();
  delete __fl_top;
  if (__fl_failures != 0) std::fprintf(stderr, "%d expect(s) failed\n", __fl_failures);
  return __fl_failures;
}
