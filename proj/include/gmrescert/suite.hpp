#pragma once

// The default verification battery: a grid of problems over all four
// operator families (dims 10..200, p in {1, 1.5, 2}), each pushed through
// the full pipeline -- generation, GMRES, reduction factor, numerical
// range, certification, Moret identities, bound chain, minimizer
// localization and the Hansmann estimate. Outcomes aggregate into a
// summary with the worst margin seen per bound.
//
// Everything is seeded and single-result deterministic: rerunning a
// problem from the same manifest yields byte-identical CSV output,
// independent of the worker count.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gmrescert/certify.hpp"
#include "gmrescert/probgen.hpp"
#include "gmrescert/serialize.hpp"
#include "gmrescert/version.hpp"

namespace gmrescert {

struct SuiteProblem {
  ProblemSpec spec;
  double p = 2.0;
  int k_max = 40;
  int fov_angles = 256;
};

struct ProblemOutcome {
  std::string id;
  std::string family;
  Eigen::Index dim = 0;
  double p = 2.0;

  bool ran = false;     // pipeline completed without exceptions
  bool pass = false;    // every check satisfied
  std::vector<std::string> failures;

  // Certification margins (relative; negative means satisfied).
  double thm_margin = 0.0;
  double rate_margin = 0.0;
  double approx_margin = 0.0;
  bool cert_pass = false;
  bool moret_bound_present = false;
  bool moret_bound_pass = true;
  bool moret_vs_thm_pass = true;

  double moret_gap_max = 0.0;
  double shifted_gap_max = 0.0;

  double m_b = 0.0, m_b_dual = 0.0;
  double starke = 1.0, elman = 1.0, empirical = 0.0;
  double nu_b = 0.0, nu_binv = 0.0;
  bool chain_ok = false;
  bool dual_agree = false;
  bool minimizer_ok = false;

  double hansmann_lhs_15 = 0.0, hansmann_rhs_15 = 0.0;
  double hansmann_lhs_2 = 0.0, hansmann_rhs_2 = 0.0;
  bool hansmann_ok = false;

  bool monotone_ok = true;  // unitary family only

  std::vector<double> comparable_ratios;  // ||r_k||/||r_{k-1}|| above cutoff
  // Ratios whose endpoints both sit well above the attainable-accuracy
  // floor (1e-11 * ||r_0||); trend statements are judged on these.
  std::vector<double> solid_ratios;
  double seconds = 0.0;
};

struct SuiteSummary {
  std::vector<ProblemOutcome> outcomes;
  bool pass = false;
  bool had_errors = false;  // a pipeline failed to run
  double worst_thm_margin = -1.0;
  double worst_rate_margin = -1.0;
  double worst_approx_margin = -1.0;
  double worst_moret_gap = 0.0;
  double seconds = 0.0;
};

enum class FaultInjection { None, ThmBoundSign };

struct SuiteOptions {
  std::vector<std::string> families;  // empty = all
  int jobs = 0;                       // 0 = hardware_concurrency
  std::string out_dir;                // empty = no files
  FaultInjection fault = FaultInjection::None;
  int limit = 0;                      // 0 = no limit
};

namespace detail {

inline SuiteProblem make_problem(Family family, Eigen::Index dim,
                                 std::map<std::string, double> params,
                                 std::uint64_t seed, double p, int k_max,
                                 int angles) {
  SuiteProblem pr;
  pr.spec.family = family;
  pr.spec.dim = dim;
  pr.spec.params = std::move(params);
  pr.spec.seed = seed;
  pr.p = p;
  pr.k_max = k_max;
  pr.fov_angles = angles;
  return pr;
}

}  // namespace detail

/// The default battery: 42 problems over the four families.
inline std::vector<SuiteProblem> default_problems() {
  using detail::make_problem;
  const Family uat = Family::UnitaryArctangent;
  const Family shifted = Family::ShiftedIdentityPlusCompact;
  const Family accr = Family::AccretivePlusCompact;
  const Family conv = Family::ConvectionDiffusionLike;

  std::vector<SuiteProblem> out;
  auto uat_params = [](double n, double gamma, double alpha) {
    return std::map<std::string, double>{
        {"n", n}, {"gamma", gamma}, {"alpha", alpha}};
  };
  auto shifted_params = [](double re, double im, double gamma, double alpha) {
    return std::map<std::string, double>{{"shift_re", re},
                                         {"shift_im", im},
                                         {"gamma", gamma},
                                         {"alpha", alpha}};
  };
  auto accr_params = [](double spread, double gamma, double alpha) {
    return std::map<std::string, double>{
        {"spread", spread}, {"gamma", gamma}, {"alpha", alpha}};
  };
  auto conv_params = [](double peclet, double gamma, double alpha) {
    return std::map<std::string, double>{
        {"peclet", peclet}, {"gamma", gamma}, {"alpha", alpha}};
  };

  out.push_back(make_problem(uat, 13, uat_params(6, 0.10, 2.0), 101, 1.0, 13, 256));
  out.push_back(make_problem(uat, 21, uat_params(10, 0.20, 2.0), 102, 1.5, 21, 256));
  out.push_back(make_problem(uat, 33, uat_params(16, 0.15, 1.5), 103, 1.0, 30, 256));
  out.push_back(make_problem(uat, 41, uat_params(20, 0.10, 3.0), 104, 2.0, 30, 256));
  out.push_back(make_problem(uat, 71, uat_params(35, 0.05, 2.5), 105, 1.5, 30, 256));
  out.push_back(make_problem(uat, 101, uat_params(50, 0.08, 2.5), 106, 1.0, 30, 128));

  out.push_back(make_problem(shifted, 10, shifted_params(2, 0, 0.5, 1.5), 201, 1.0, 10, 256));
  out.push_back(make_problem(shifted, 16, shifted_params(2, 0, 0.5, 2.0), 202, 1.5, 16, 256));
  out.push_back(make_problem(shifted, 24, shifted_params(1, 1, 0.8, 2.0), 203, 2.0, 24, 256));
  out.push_back(make_problem(shifted, 32, shifted_params(2.5, 0, 0.6, 2.0), 204, 1.5, 30, 256));
  out.push_back(make_problem(shifted, 40, shifted_params(2, 0, 0.5, 3.0), 205, 1.0, 30, 256));
  out.push_back(make_problem(shifted, 48, shifted_params(2, 0, 0.3, 1.5), 206, 2.0, 30, 256));
  out.push_back(make_problem(shifted, 60, shifted_params(2, 0, 0.5, 3.0), 207, 1.0, 40, 256));
  out.push_back(make_problem(shifted, 60, shifted_params(1, -1, 0.4, 2.5), 208, 1.5, 40, 256));
  out.push_back(make_problem(shifted, 80, shifted_params(3, 0, 1.0, 2.0), 209, 2.0, 40, 256));
  out.push_back(make_problem(shifted, 100, shifted_params(2, 0, 0.7, 2.0), 210, 1.0, 40, 128));
  out.push_back(make_problem(shifted, 120, shifted_params(2, 0, 0.5, 2.5), 211, 1.5, 40, 128));
  out.push_back(make_problem(shifted, 200, shifted_params(2, 0, 0.5, 3.0), 212, 2.0, 40, 128));

  out.push_back(make_problem(accr, 10, accr_params(0.10, 0.10, 2.0), 301, 1.0, 10, 256));
  out.push_back(make_problem(accr, 12, accr_params(0.30, 0.20, 2.0), 302, 1.5, 12, 256));
  out.push_back(make_problem(accr, 20, accr_params(0.20, 0.30, 1.5), 303, 2.0, 20, 256));
  out.push_back(make_problem(accr, 24, accr_params(0.15, 0.25, 2.0), 304, 1.0, 24, 256));
  out.push_back(make_problem(accr, 30, accr_params(0.40, 0.20, 2.0), 305, 1.0, 30, 256));
  out.push_back(make_problem(accr, 40, accr_params(0.30, 0.30, 2.5), 306, 1.5, 30, 256));
  out.push_back(make_problem(accr, 48, accr_params(0.50, 0.20, 2.0), 307, 2.0, 30, 256));
  out.push_back(make_problem(accr, 64, accr_params(0.20, 0.10, 3.0), 308, 1.0, 30, 256));
  out.push_back(make_problem(accr, 80, accr_params(0.35, 0.20, 2.5), 309, 1.5, 30, 128));
  out.push_back(make_problem(accr, 100, accr_params(0.30, 0.20, 2.0), 310, 1.5, 30, 128));
  out.push_back(make_problem(accr, 144, accr_params(0.30, 0.15, 2.0), 311, 2.0, 30, 128));
  out.push_back(make_problem(accr, 160, accr_params(0.25, 0.15, 2.5), 312, 2.0, 30, 128));

  out.push_back(make_problem(conv, 10, conv_params(0, 0.05, 2.0), 401, 1.0, 10, 256));
  out.push_back(make_problem(conv, 14, conv_params(1, 0.05, 2.0), 402, 1.5, 14, 256));
  out.push_back(make_problem(conv, 20, conv_params(5, 0.02, 2.5), 403, 2.0, 20, 256));
  out.push_back(make_problem(conv, 24, conv_params(50, 0.01, 3.0), 404, 2.0, 24, 256));
  out.push_back(make_problem(conv, 32, conv_params(10, 0.02, 3.0), 405, 1.0, 30, 256));
  out.push_back(make_problem(conv, 40, conv_params(2, 0.05, 2.0), 406, 1.5, 30, 256));
  out.push_back(make_problem(conv, 48, conv_params(20, 0.01, 2.0), 407, 2.0, 30, 256));
  out.push_back(make_problem(conv, 64, conv_params(5, 0.02, 2.5), 408, 1.5, 30, 256));
  out.push_back(make_problem(conv, 100, conv_params(10, 0.01, 3.0), 409, 2.0, 30, 128));
  out.push_back(make_problem(conv, 120, conv_params(5, 0.02, 2.5), 410, 1.0, 30, 128));
  out.push_back(make_problem(conv, 160, conv_params(8, 0.015, 3.0), 411, 1.5, 30, 128));

  out.push_back(make_problem(uat, 49, uat_params(24, 0.12, 2.0), 107, 2.0, 30, 256));
  return out;
}

namespace detail {

inline void record_failure(ProblemOutcome& out, const std::string& what) {
  out.failures.push_back(what);
}

inline Json problem_manifest(const SuiteProblem& pr) {
  Json j;
  j["tool"] = "gmrescert";
  j["version"] = kVersion;
  j["command"] = "suite-problem";
  j["family"] = family_name(pr.spec.family);
  j["dim"] = pr.spec.dim;
  j["seed"] = pr.spec.seed;
  j["params"] = pr.spec.params;
  j["p"] = pr.p;
  j["k_max"] = pr.k_max;
  j["fov_angles"] = pr.fov_angles;
  j["rtol"] = 1e-12;
  j["id"] = pr.spec.id();
  return j;
}

}  // namespace detail

/// Full pipeline for one suite problem. Writes certificate.csv/json,
/// trace.csv and manifest.json under <out_dir>/problems/<id>/ when an
/// output directory is configured.
inline ProblemOutcome run_suite_problem(const SuiteProblem& pr,
                                        const std::string& out_dir = "",
                                        FaultInjection fault =
                                            FaultInjection::None) {
  ProblemOutcome out;
  out.id = pr.spec.id();
  out.family = family_name(pr.spec.family);
  out.dim = pr.spec.dim;
  out.p = pr.p;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const OperatorPair pair = generate(pr.spec);
    const Operator& B = pair.B;
    const Operator& C = pair.C;
    const Eigen::Index n = B.dim();
    out.dim = n;

    const Operator Binv = inverse(B);
    const FovModel fov_b = build_fov(B, pr.fov_angles);
    const FovModel fov_binv = build_fov(Binv, pr.fov_angles);
    const ReductionReport mb = compute_mb(B, 1e-9, &fov_b, &fov_binv);
    out.m_b = mb.m_b;
    out.m_b_dual = mb.m_b_dual;
    out.starke = mb.starke_bound;
    out.elman = mb.elman_bound;
    out.nu_b = mb.nu_b;
    out.nu_binv = mb.nu_binv;

    Rng r0_rng(pr.spec.seed * 7919 + 17);
    const Vector r0 = r0_rng.unit_vector(n);
    Certificate cert =
        certify(B, C, r0, pr.p, pr.k_max, out.id, 1e-12, &mb);
    if (fault == FaultInjection::ThmBoundSign)
      inject_thm_bound_sign_error(cert);

    out.thm_margin = cert.thm_verdict.worst_margin;
    out.rate_margin = cert.rate_verdict.worst_margin;
    out.approx_margin = cert.approx_verdict.worst_margin;
    out.cert_pass = cert.all_pass();
    out.moret_bound_present = !cert.moret_bound.empty();
    out.moret_bound_pass = cert.moret_verdict.pass;
    out.moret_vs_thm_pass = cert.moret_vs_thm.pass;
    if (!out.cert_pass) detail::record_failure(out, "certificate bound");

    for (int k = 1; k <= cert.steps(); ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      if (cert.compared[i] && cert.trace.ratios[i].has_value())
        out.comparable_ratios.push_back(*cert.trace.ratios[i]);
    }

    // Moret identities, plain and shifted by lambda in {0, 1, i}.
    const Operator A =
        Operator::with_detected_tags(B.entries() + C.entries());
    const Operator Ainv = inverse(A);
    const int zcols = static_cast<int>(cert.trace.z_basis.cols());
    const int tcols = static_cast<int>(cert.trace.t_basis.cols());
    for (int k = 1; k <= zcols && k + 1 <= tcols; ++k) {
      if (cert.trace.residual_norms[static_cast<std::size_t>(k - 1)] <= 0)
        break;
      out.moret_gap_max =
          std::max(out.moret_gap_max, moret_step_check(cert.trace, k).rel_gap);
      for (Complex lambda : {Complex(0, 0), Complex(1, 0), Complex(0, 1)})
        out.shifted_gap_max = std::max(
            out.shifted_gap_max,
            shifted_moret_check(cert.trace, k, lambda, Ainv).rel_gap);
    }
    if (out.moret_gap_max > kMasterRel)
      detail::record_failure(out, "moret identity gap");
    if (out.shifted_gap_max > kMasterRel)
      detail::record_failure(out, "shifted moret identity gap");

    // Bound chain: empirical <= m_b <= starke <= elman, with 1e-6 slack
    // between neighbours.
    out.empirical = std::max(
        mb.empirical_lower,
        empirical_mb(B, 16, std::min<int>(4, static_cast<int>(n)),
                     pr.spec.seed * 31 + 5));
    out.chain_ok = out.empirical <= out.m_b + 1e-6 &&
                   out.m_b <= out.starke + 1e-6 &&
                   out.starke <= out.elman + 1e-6;
    if (!out.chain_ok) detail::record_failure(out, "bound chain ordering");
    out.dual_agree = std::abs(out.m_b - out.m_b_dual) <= 1e-6;
    if (!out.dual_agree) detail::record_failure(out, "primal-dual equality");

    const MinimizerVerdict mv = minimizer_check(B, mb, fov_b, fov_binv);
    out.minimizer_ok = mv.pass();
    if (!out.minimizer_ok)
      detail::record_failure(out, "minimizer localization");

    const std::vector<double> dists = hansmann_distances(B, C, fov_b);
    const HansmannResult h15 =
        hansmann_from_distances(dists, cert.sigma_c, 1.5);
    const HansmannResult h2 = hansmann_from_distances(dists, cert.sigma_c, 2.0);
    out.hansmann_lhs_15 = h15.lhs;
    out.hansmann_rhs_15 = h15.rhs;
    out.hansmann_lhs_2 = h2.lhs;
    out.hansmann_rhs_2 = h2.rhs;
    out.hansmann_ok = h15.lhs <= h15.rhs * (1.0 + kIntermediateRel) &&
                      h2.lhs <= h2.rhs * (1.0 + kIntermediateRel);
    if (!out.hansmann_ok) detail::record_failure(out, "hansmann estimate");

    if (pr.spec.family == Family::UnitaryArctangent) {
      Rng mono_rng(pr.spec.seed * 13 + 3);
      const GmresTrace run = run_gmres(B, mono_rng.unit_vector(n),
                                       Vector::Zero(n), static_cast<int>(n),
                                       /*rtol=*/0.0);
      for (std::size_t k = 1; k < run.residual_norms.size(); ++k) {
        if (run.residual_norms[k - 1] <=
            kStepCutoff * run.residual_norms.front())
          break;
        if (!(run.residual_norms[k] < run.residual_norms[k - 1])) {
          out.monotone_ok = false;
          detail::record_failure(out, "strict monotonicity");
          break;
        }
      }
    }

    if (!out_dir.empty()) {
      namespace fs = std::filesystem;
      const fs::path dir = fs::path(out_dir) / "problems" / out.id;
      fs::create_directories(dir);
      std::ofstream(dir / "manifest.json")
          << detail::problem_manifest(pr).dump(2) << "\n";
      std::ofstream(dir / "certificate.json")
          << certificate_json(cert).dump(2) << "\n";
      std::ofstream(dir / "certificate.csv") << certificate_csv(cert);
      std::ofstream(dir / "trace.csv") << trace_csv(cert.trace);
    }

    out.ran = true;
    out.pass = out.failures.empty();
  } catch (const std::exception& e) {
    out.ran = false;
    out.pass = false;
    detail::record_failure(out, std::string("exception: ") + e.what());
  }
  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

inline SuiteSummary run_suite(const SuiteOptions& opts) {
  std::vector<SuiteProblem> problems = default_problems();
  if (!opts.families.empty()) {
    std::vector<SuiteProblem> filtered;
    for (const auto& pr : problems)
      for (const auto& f : opts.families)
        if (family_name(pr.spec.family) == f) {
          filtered.push_back(pr);
          break;
        }
    problems = std::move(filtered);
  }
  if (opts.limit > 0 && static_cast<int>(problems.size()) > opts.limit)
    problems.resize(static_cast<std::size_t>(opts.limit));

  SuiteSummary summary;
  summary.outcomes.resize(problems.size());
  const auto t0 = std::chrono::steady_clock::now();

  int jobs = opts.jobs > 0
                 ? opts.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(problems.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= problems.size()) break;
      summary.outcomes[i] =
          run_suite_problem(problems[i], opts.out_dir, opts.fault);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  summary.pass = true;
  for (const auto& out : summary.outcomes) {
    summary.pass = summary.pass && out.pass;
    summary.had_errors = summary.had_errors || !out.ran;
    if (out.ran) {
      summary.worst_thm_margin =
          std::max(summary.worst_thm_margin, out.thm_margin);
      summary.worst_rate_margin =
          std::max(summary.worst_rate_margin, out.rate_margin);
      summary.worst_approx_margin =
          std::max(summary.worst_approx_margin, out.approx_margin);
      summary.worst_moret_gap =
          std::max(summary.worst_moret_gap, out.moret_gap_max);
    }
  }
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return summary;
}

inline Json summary_json(const SuiteSummary& summary) {
  Json j;
  j["pass"] = summary.pass;
  j["had_errors"] = summary.had_errors;
  j["problems"] = summary.outcomes.size();
  j["seconds"] = summary.seconds;
  j["worst_margins"] = Json{{"thm", summary.worst_thm_margin},
                            {"rate", summary.worst_rate_margin},
                            {"approx", summary.worst_approx_margin},
                            {"moret_gap", summary.worst_moret_gap}};
  Json rows = Json::array();
  for (const auto& out : summary.outcomes) {
    Json row;
    row["id"] = out.id;
    row["family"] = out.family;
    row["dim"] = out.dim;
    row["p"] = out.p;
    row["pass"] = out.pass;
    row["m_b"] = out.m_b;
    row["starke"] = out.starke;
    row["elman"] = out.elman;
    row["empirical"] = out.empirical;
    row["thm_margin"] = out.thm_margin;
    row["rate_margin"] = out.rate_margin;
    row["moret_gap"] = out.moret_gap_max;
    row["hansmann"] = Json{{"lhs_p15", out.hansmann_lhs_15},
                           {"rhs_p15", out.hansmann_rhs_15},
                           {"lhs_p2", out.hansmann_lhs_2},
                           {"rhs_p2", out.hansmann_rhs_2}};
    row["seconds"] = out.seconds;
    if (!out.failures.empty()) row["failures"] = out.failures;
    rows.push_back(std::move(row));
  }
  j["outcomes"] = std::move(rows);
  return j;
}

inline std::string summary_table(const SuiteSummary& summary) {
  std::ostringstream out;
  char line[256];
  out << "id               family                        dim    p     m_b"
         "      starke   elman    thm_margin   moret_gap  ok\n";
  for (const auto& o : summary.outcomes) {
    std::snprintf(line, sizeof(line),
                  "%-16s %-28s %5ld %4.1f  %8.5f %8.5f %8.5f  %11.3e %11.3e"
                  "  %s\n",
                  o.id.c_str(), o.family.c_str(), static_cast<long>(o.dim),
                  o.p, o.m_b, o.starke, o.elman, o.thm_margin,
                  o.moret_gap_max, o.pass ? "pass" : "FAIL");
    out << line;
  }
  bool any_uat = false;
  for (const auto& o : summary.outcomes)
    any_uat = any_uat || o.family == "unitary_arctangent";
  if (any_uat) {
    out << "\nunitary_arctangent reduction factors (dim = 2n+1):\n";
    out << "  dim    m_b\n";
    for (const auto& o : summary.outcomes)
      if (o.family == "unitary_arctangent") {
        std::snprintf(line, sizeof(line), "  %4ld  %10.7f\n",
                      static_cast<long>(o.dim), o.m_b);
        out << line;
      }
  }
  std::snprintf(line, sizeof(line),
                "\n%zu problems, %s; worst thm margin %.3e, worst moret gap "
                "%.3e, %.1f s\n",
                summary.outcomes.size(),
                summary.pass ? "all passed" : "FAILURES PRESENT",
                summary.worst_thm_margin, summary.worst_moret_gap,
                summary.seconds);
  out << line;
  return out.str();
}

inline void write_suite_outputs(const SuiteSummary& summary,
                                const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "summary.json")
      << summary_json(summary).dump(2) << "\n";
  std::ofstream(fs::path(out_dir) / "summary.txt") << summary_table(summary);
}

}  // namespace gmrescert
