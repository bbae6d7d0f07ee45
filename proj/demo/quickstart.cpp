// Colors a random 64 x 64 set system, then checks the result.
#include <iostream>

#include "discmwu/generators.hpp"
#include "discmwu/set_coloring.hpp"
#include "discmwu/verify.hpp"

int main() {
  discmwu::GeneratorSpec spec;
  spec.family = discmwu::Family::RandomSetSystem;
  spec.n = 64;
  spec.m = 64;
  spec.seed = 7;
  const auto sys = std::get<discmwu::SetSystem>(discmwu::generate(spec));

  const discmwu::SetColoringResult res = discmwu::color(sys);
  std::cout << "phases: " << res.phases.size() << "\n"
            << "discrepancy: " << discmwu::discrepancy(sys, res.chi) << "\n";

  const auto report = discmwu::verify::verify_set_coloring(sys, res.chi, &res.phases);
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "  ok   " : "  FAIL ") << c.name << "\n";
  }
  std::cout << report.summary << "\n";
  return report.passed() ? 0 : 1;
}
