// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "optflow/suites.hpp"

namespace {

struct Criterion {
  int number;
  const char* suite;
  double budget_s;  // <= 0: no runtime limit
};

constexpr Criterion kCriteria[] = {
    {1, "projector-axioms", 10.0},   {2, "oracle-equivalence", 5.0}, {3, "lemma41", 120.0},
    {4, "theorem31", 10.0},          {5, "theorem32", 30.0},         {6, "counterexample", 5.0},
    {7, "eq39", 30.0},               {8, "delta-containment", 30.0}, {9, "analytic", 1.0},
    {10, "determinism", 0.0},
};

}  // namespace

int main() {
  int failed = 0;
  for (const auto& c : kCriteria) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      const optflow::SuiteResult r = optflow::run_suite(c.suite, optflow::SuiteOptions{});
      pass = r.pass();
      for (const auto& check : r.checks) {
        if (!check.pass) detail += " failed:" + check.name + "(" + std::to_string(check.value) + ")";
      }
    } catch (const std::exception& e) {
      detail = std::string(" exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && elapsed > c.budget_s) {
      pass = false;
      detail += " over runtime budget";
    }
    std::printf("[%s] criterion %d: %s (%.2f s", pass ? "PASS" : "FAIL", c.number, c.suite, elapsed);
    if (c.budget_s > 0.0) std::printf(", budget %.0f s", c.budget_s);
    std::printf(")%s\n", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(kCriteria)) - failed, std::size(kCriteria));
  return failed == 0 ? 0 : 1;
}
