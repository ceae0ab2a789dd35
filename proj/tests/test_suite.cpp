#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gmrescert/suite.hpp"

using namespace gmrescert;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("default battery covers the four families and the dim range") {
  const auto problems = default_problems();
  REQUIRE(problems.size() >= 40);
  Eigen::Index min_dim = 1 << 20, max_dim = 0;
  std::set<std::string> families;
  std::set<double> ps;
  for (const auto& pr : problems) {
    families.insert(family_name(pr.spec.family));
    ps.insert(pr.p);
    Eigen::Index dim = pr.spec.dim;
    if (pr.spec.family == Family::UnitaryArctangent)
      dim = 2 * static_cast<Eigen::Index>(pr.spec.param("n", 1)) + 1;
    min_dim = std::min(min_dim, dim);
    max_dim = std::max(max_dim, dim);
  }
  REQUIRE(families.size() == 4);
  REQUIRE(ps == std::set<double>{1.0, 1.5, 2.0});
  REQUIRE(min_dim == 10);
  REQUIRE(max_dim == 200);
}

TEST_CASE("a small slice of the battery runs clean and deterministically") {
  const fs::path dir1 = fs::temp_directory_path() / "gmrescert_suite_a";
  const fs::path dir2 = fs::temp_directory_path() / "gmrescert_suite_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  SuiteOptions opts;
  opts.limit = 3;
  opts.jobs = 2;
  opts.out_dir = dir1.string();
  const SuiteSummary first = run_suite(opts);
  REQUIRE(first.outcomes.size() == 3);
  REQUIRE(first.pass);
  for (const auto& out : first.outcomes) {
    REQUIRE(out.ran);
    REQUIRE(out.failures.empty());
    REQUIRE(out.thm_margin <= kMasterRel);
    REQUIRE(out.moret_gap_max <= kMasterRel);
  }

  opts.out_dir = dir2.string();
  opts.jobs = 1;  // worker count must not affect results
  const SuiteSummary second = run_suite(opts);
  for (std::size_t i = 0; i < first.outcomes.size(); ++i) {
    const std::string& id = first.outcomes[i].id;
    REQUIRE(second.outcomes[i].id == id);
    const fs::path rel = fs::path("problems") / id / "certificate.csv";
    REQUIRE(slurp(dir1 / rel) == slurp(dir2 / rel));
    REQUIRE(slurp(dir1 / "problems" / id / "trace.csv") ==
            slurp(dir2 / "problems" / id / "trace.csv"));
    REQUIRE(slurp(dir1 / "problems" / id / "manifest.json") ==
            slurp(dir2 / "problems" / id / "manifest.json"));
  }

  write_suite_outputs(first, dir1.string());
  REQUIRE(fs::exists(dir1 / "summary.json"));
  REQUIRE(fs::exists(dir1 / "summary.txt"));
  const std::string table = summary_table(first);
  REQUIRE(table.find("all passed") != std::string::npos);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("family filter") {
  SuiteOptions opts;
  opts.families = {"unitary_arctangent"};
  opts.limit = 1;
  const SuiteSummary summary = run_suite(opts);
  REQUIRE(summary.outcomes.size() == 1);
  REQUIRE(summary.outcomes[0].family == "unitary_arctangent");
  REQUIRE(summary.outcomes[0].monotone_ok);
  const std::string table = summary_table(summary);
  REQUIRE(table.find("reduction factors") != std::string::npos);
}

TEST_CASE("an injected sign error is caught") {
  SuiteOptions opts;
  opts.limit = 1;
  opts.fault = FaultInjection::ThmBoundSign;
  const SuiteSummary summary = run_suite(opts);
  REQUIRE_FALSE(summary.pass);
  REQUIRE_FALSE(summary.outcomes[0].cert_pass);
}
