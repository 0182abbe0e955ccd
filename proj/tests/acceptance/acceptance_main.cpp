// One line per criterion. Exit status 0 when every failure is a known-unattainable one.
#include <CLI11.hpp>
#include <cstdio>

#include "nlspde/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  nlspde::AcceptanceOptions opt;
  app.add_option("--only", opt.only, "criterion ids to run")->check(CLI::Range(1, 9));
  app.add_option("--seed", opt.seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  auto results = nlspde::run_acceptance(opt, [](const nlspde::CriterionResult& r) {
    std::printf("%s\n", nlspde::format_result(r).c_str());
    std::fflush(stdout);
  });
  int passed = 0, known = 0;
  for (const auto& r : results) {
    passed += r.pass;
    known += !r.pass && r.known_unattainable;
  }
  const bool ok = nlspde::acceptance_ok(results);
  std::printf("%d/%zu criteria pass", passed, results.size());
  if (known) std::printf(", %d known unattainable", known);
  std::printf(": %s\n", ok ? "OK" : "FAILED");
  return ok ? 0 : 1;
}
