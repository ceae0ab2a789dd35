// gmrescert: generate test operators, run instrumented GMRES, compute
// reduction factors and numerical ranges, and certify convergence bounds.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure
// (near-singular input, optimizer out of budget), 3 violated bound.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gmrescert/serialize.hpp"
#include "gmrescert/suite.hpp"

namespace fs = std::filesystem;
using namespace gmrescert;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw std::invalid_argument("cannot open '" + path.string() +
                                "' for write");
  out << content;
}

void write_manifest(const fs::path& dir, Json manifest) {
  manifest["tool"] = "gmrescert";
  manifest["version"] = kVersion;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Complex parse_shift(const std::string& text) {
  const auto comma = text.find(',');
  char* end = nullptr;
  const double re = std::strtod(text.c_str(), &end);
  double im = 0.0;
  if (comma != std::string::npos) {
    const std::string imag = text.substr(comma + 1);
    im = std::strtod(imag.c_str(), &end);
  }
  return {re, im};
}

struct CommonOut {
  std::string out_dir = "out";
  std::string format = "both";
};

bool want_csv(const CommonOut& o) { return o.format != "json"; }
bool want_json(const CommonOut& o) { return o.format != "csv"; }

int run_gen(const std::string& family, Eigen::Index dim, std::uint64_t seed,
            const CommonOut& io, double alpha, double gamma,
            const std::string& shift, double spread, double peclet,
            double uat_n) {
  ProblemSpec spec;
  spec.family = family_from_name(family);
  spec.dim = dim;
  spec.seed = seed;
  switch (spec.family) {
    case Family::ShiftedIdentityPlusCompact: {
      const Complex lambda = parse_shift(shift);
      spec.params = {{"shift_re", lambda.real()},
                     {"shift_im", lambda.imag()},
                     {"alpha", alpha},
                     {"gamma", gamma}};
      break;
    }
    case Family::AccretivePlusCompact:
      spec.params = {{"spread", spread}, {"alpha", alpha}, {"gamma", gamma}};
      break;
    case Family::UnitaryArctangent: {
      const double n = uat_n > 0 ? uat_n : static_cast<double>((dim - 1) / 2);
      spec.params = {{"n", n}, {"alpha", alpha}, {"gamma", gamma}};
      break;
    }
    case Family::ConvectionDiffusionLike:
      spec.params = {{"peclet", peclet}, {"alpha", alpha}, {"gamma", gamma}};
      break;
    case Family::CustomFile:
      throw std::invalid_argument("gen: custom_file cannot be generated");
  }

  const OperatorPair pair = generate(spec);
  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  write_matrix_market(pair.B, (dir / "B.mtx").string());
  write_matrix_market(pair.C, (dir / "C.mtx").string());

  Json spec_json;
  spec_json["family"] = family_name(spec.family);
  spec_json["dim"] = pair.B.dim();
  spec_json["seed"] = spec.seed;
  spec_json["params"] = spec.params;
  spec_json["id"] = spec.id();
  write_text(dir / "spec.json", spec_json.dump(2) + "\n");
  write_manifest(dir, Json{{"command", "gen"}, {"spec", spec_json}});
  std::cout << "wrote " << (dir / "B.mtx").string() << ", C.mtx, spec.json ("
            << family << ", dim " << pair.B.dim() << ")\n";
  return 0;
}

int run_solve(const std::string& a_path, const std::string& b_path,
              std::uint64_t seed, int kmax, double rtol, bool bases,
              const CommonOut& io) {
  const Operator A = read_matrix_market(a_path);
  Vector b;
  if (!b_path.empty()) {
    b = read_vector_market(b_path);
    if (b.size() != A.dim())
      throw DimensionMismatch("solve: right-hand side length " +
                              std::to_string(b.size()) +
                              " does not match dim " +
                              std::to_string(A.dim()));
  } else {
    Rng rng(seed);
    b = rng.unit_vector(A.dim());
  }
  const int steps = kmax > 0 ? std::min<int>(kmax, static_cast<int>(A.dim()))
                             : static_cast<int>(A.dim());
  const GmresTrace trace =
      run_gmres(A, b, Vector::Zero(A.dim()), steps, rtol);

  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  if (want_csv(io)) write_text(dir / "trace.csv", trace_csv(trace));
  if (want_json(io))
    write_text(dir / "trace.json", trace_json(trace, bases).dump(2) + "\n");
  write_manifest(dir, Json{{"command", "solve"},
                           {"A", a_path},
                           {"b", b_path},
                           {"seed", seed},
                           {"kmax", steps},
                           {"rtol", rtol},
                           {"bases", bases},
                           {"format", io.format}});
  std::cout << "gmres: " << trace.steps() << " steps, final relative residual "
            << (trace.residual_norms.back() /
                std::max(trace.residual_norms.front(), 1e-300))
            << "\n";
  return 0;
}

int run_mb(const std::string& matrix, double tol, int trials,
           std::uint64_t seed, const CommonOut& io) {
  const Operator B = read_matrix_market(matrix);
  ReductionReport report = compute_mb(B, tol);
  if (trials > 0)
    report.empirical_lower =
        std::max(report.empirical_lower,
                 empirical_mb(B, trials,
                              std::min<int>(4, static_cast<int>(B.dim())),
                              seed));
  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  if (want_json(io))
    write_text(dir / "report.json", report_json(report).dump(2) + "\n");
  write_manifest(dir, Json{{"command", "mb"},
                           {"matrix", matrix},
                           {"tol", tol},
                           {"trials", trials},
                           {"seed", seed},
                           {"format", io.format}});
  std::printf("m_b          %.9f\n", report.m_b);
  std::printf("lambda_b     %.9f %+.9fi\n", report.lambda_b.real(),
              report.lambda_b.imag());
  std::printf("m_b (dual)   %.9f\n", report.m_b_dual);
  std::printf("starke       %.9f\n", report.starke_bound);
  std::printf("elman        %.9f\n", report.elman_bound);
  std::printf("empirical    %.9f\n", report.empirical_lower);
  std::printf("evals        %d\n", report.eval_count);
  return 0;
}

int run_fov(const std::string& matrix, int angles, const CommonOut& io) {
  const Operator B = read_matrix_market(matrix);
  const FovModel model = build_fov(B, angles);
  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  if (want_csv(io)) write_text(dir / "boundary.csv", fov_csv(model));
  if (want_json(io))
    write_text(dir / "fov.json", fov_json(model).dump(2) + "\n");
  write_manifest(dir, Json{{"command", "fov"},
                           {"matrix", matrix},
                           {"angles", angles},
                           {"format", io.format}});
  std::printf("nu              %.12f\n", model.nu);
  std::printf("zero_in_closure %s\n", model.zero_in_closure ? "yes" : "no");
  return 0;
}

int run_certify(const std::string& b_path, const std::string& c_path,
                const std::string& r0_path, std::uint64_t seed, double p,
                int kmax, const CommonOut& io) {
  const Operator B = read_matrix_market(b_path);
  const Operator C = read_matrix_market(c_path);
  Vector r0;
  if (!r0_path.empty()) {
    r0 = read_vector_market(r0_path);
  } else {
    Rng rng(seed);
    r0 = rng.unit_vector(B.dim());
  }
  const Certificate cert = certify(B, C, r0, p, kmax);
  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  if (want_csv(io)) write_text(dir / "certificate.csv", certificate_csv(cert));
  if (want_json(io))
    write_text(dir / "certificate.json",
               certificate_json(cert).dump(2) + "\n");
  write_manifest(dir, Json{{"command", "certify"},
                           {"B", b_path},
                           {"C", c_path},
                           {"r0", r0_path},
                           {"seed", seed},
                           {"p", p},
                           {"kmax", kmax},
                           {"format", io.format}});
  std::printf("steps %d, m_b %.6f, ||A^-1|| %.6g, ||C||_Sp %.6g\n",
              cert.steps(), cert.m_b, cert.norm_ainv, cert.schatten_p);
  std::printf("verdicts: thm %s, rate %s, approx %s\n",
              cert.thm_verdict.pass ? "pass" : "FAIL",
              cert.rate_verdict.pass ? "pass" : "FAIL",
              cert.approx_verdict.pass ? "pass" : "FAIL");
  if (!cert.all_pass()) {
    std::cerr << "ERROR 3: certificate bound violated (worst thm margin "
              << cert.thm_verdict.worst_margin << ")\n";
    return 3;
  }
  return 0;
}

int run_hansmann(const std::string& b_path, const std::string& c_path,
                 double p, const CommonOut& io) {
  const Operator B = read_matrix_market(b_path);
  const Operator C = read_matrix_market(c_path);
  const FovModel fov_b = build_fov(B, 720);
  const HansmannResult res = hansmann_check(B, C, p, fov_b);
  const fs::path dir = io.out_dir;
  fs::create_directories(dir);
  if (want_json(io))
    write_text(dir / "hansmann.json",
               Json{{"p", p}, {"lhs", res.lhs}, {"rhs", res.rhs}}.dump(2) +
                   "\n");
  write_manifest(dir, Json{{"command", "hansmann"},
                           {"B", b_path},
                           {"C", c_path},
                           {"p", p},
                           {"format", io.format}});
  std::printf("hansmann p=%.3g: lhs %.9g <= rhs %.9g\n", p, res.lhs, res.rhs);
  return 0;
}

int run_suite_cmd(const std::vector<std::string>& families, int jobs,
                  const std::string& out_dir, int limit,
                  const std::string& fault) {
  SuiteOptions opts;
  opts.families = families;
  opts.jobs = jobs;
  opts.out_dir = out_dir;
  opts.limit = limit;
  if (fault == "thm-bound-sign")
    opts.fault = FaultInjection::ThmBoundSign;
  else if (!fault.empty())
    throw std::invalid_argument("unknown fault '" + fault + "'");

  const SuiteSummary summary = run_suite(opts);
  if (!out_dir.empty()) {
    write_suite_outputs(summary, out_dir);
    write_manifest(out_dir, Json{{"command", "suite"},
                                 {"families", families},
                                 {"jobs", jobs},
                                 {"limit", limit},
                                 {"fault", fault}});
  }
  std::cout << summary_table(summary);
  if (!summary.pass) {
    std::cerr << "ERROR 3: suite reported violated bounds or failed checks\n";
    return 3;
  }
  if (summary.had_errors) {
    std::cerr << "ERROR 2: suite had numerical failures\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GMRES convergence-bound certification toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a problem (B.mtx, C.mtx)");
  std::string gen_family;
  Eigen::Index gen_dim = 20;
  std::uint64_t gen_seed = 1;
  CommonOut gen_io;
  double gen_alpha = 2.0, gen_gamma = 0.2, gen_spread = 0.3, gen_peclet = 0.0;
  double gen_n = 0.0;
  std::string gen_shift = "2,0";
  gen->add_option("--family", gen_family, "operator family")->required();
  gen->add_option("--dim", gen_dim, "dimension");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_io.out_dir, "output directory")->required();
  gen->add_option("--alpha", gen_alpha, "singular value decay exponent");
  gen->add_option("--gamma", gen_gamma, "perturbation scale");
  gen->add_option("--shift", gen_shift, "shift RE,IM for the shifted family");
  gen->add_option("--spread", gen_spread, "non-normality spread");
  gen->add_option("--peclet", gen_peclet, "convection strength");
  gen->add_option("--n", gen_n, "half-width n for unitary_arctangent");

  // solve
  auto* solve = app.add_subcommand("solve", "run instrumented GMRES");
  std::string solve_a, solve_b;
  std::uint64_t solve_seed = 1;
  int solve_kmax = 0;
  double solve_rtol = 1e-12;
  bool solve_bases = false;
  CommonOut solve_io;
  solve->add_option("--A", solve_a, "system matrix (.mtx)")->required();
  solve->add_option("--b", solve_b, "right-hand side (.mtx vector)");
  solve->add_option("--seed", solve_seed, "seed for a random unit rhs");
  solve->add_option("--kmax", solve_kmax, "max iterations (0 = dim)");
  solve->add_option("--rtol", solve_rtol, "relative residual tolerance");
  solve->add_flag("--bases", solve_bases, "include t/z bases in trace.json");
  solve->add_option("--out", solve_io.out_dir, "output directory")->required();
  solve->add_option("--format", solve_io.format, "csv|json|both");

  // mb
  auto* mb = app.add_subcommand("mb", "linear reduction factor M_B");
  std::string mb_matrix;
  double mb_tol = 1e-9;
  int mb_trials = 0;
  std::uint64_t mb_seed = 1;
  CommonOut mb_io;
  mb->add_option("--matrix", mb_matrix, "operator B (.mtx)")->required();
  mb->add_option("--tol", mb_tol, "optimizer tolerance");
  mb->add_option("--trials", mb_trials, "extra empirical GMRES trials");
  mb->add_option("--seed", mb_seed, "seed for empirical trials");
  mb->add_option("--out", mb_io.out_dir, "output directory")->required();
  mb->add_option("--format", mb_io.format, "csv|json|both");

  // fov
  auto* fov = app.add_subcommand("fov", "numerical range model");
  std::string fov_matrix;
  int fov_angles = 720;
  CommonOut fov_io;
  fov->add_option("--matrix", fov_matrix, "operator B (.mtx)")->required();
  fov->add_option("--angles", fov_angles, "sweep angle count");
  fov->add_option("--out", fov_io.out_dir, "output directory")->required();
  fov->add_option("--format", fov_io.format, "csv|json|both");

  // certify
  auto* cert = app.add_subcommand("certify", "certify bounds for A = B + C");
  std::string cert_b, cert_c, cert_r0;
  std::uint64_t cert_seed = 1;
  double cert_p = 2.0;
  int cert_kmax = 40;
  CommonOut cert_io;
  cert->add_option("--B", cert_b, "unperturbed operator (.mtx)")->required();
  cert->add_option("--C", cert_c, "compact perturbation (.mtx)")->required();
  cert->add_option("--r0", cert_r0, "initial residual (.mtx vector)");
  cert->add_option("--seed", cert_seed, "seed for a random unit r0");
  cert->add_option("--p", cert_p, "Schatten exponent")->required();
  cert->add_option("--kmax", cert_kmax, "max GMRES steps");
  cert->add_option("--out", cert_io.out_dir, "output directory")->required();
  cert->add_option("--format", cert_io.format, "csv|json|both");

  // hansmann
  auto* hans = app.add_subcommand("hansmann",
                                  "eigenvalue accumulation estimate");
  std::string hans_b, hans_c;
  double hans_p = 2.0;
  CommonOut hans_io;
  hans->add_option("--B", hans_b, "unperturbed operator (.mtx)")->required();
  hans->add_option("--C", hans_c, "compact perturbation (.mtx)")->required();
  hans->add_option("--p", hans_p, "Schatten exponent (> 1)")->required();
  hans->add_option("--out", hans_io.out_dir, "output directory")->required();
  hans->add_option("--format", hans_io.format, "csv|json|both");

  // suite
  auto* suite = app.add_subcommand("suite", "run the default battery");
  std::vector<std::string> suite_families;
  int suite_jobs = 0;
  std::string suite_out = "out/suite";
  int suite_limit = 0;
  std::string suite_fault;
  suite->add_option("--families", suite_families,
                    "restrict to these families")
      ->delimiter(',');
  suite->add_option("--jobs", suite_jobs, "worker threads (0 = cores)");
  suite->add_option("--out", suite_out, "output directory");
  suite->add_option("--limit", suite_limit, "run only the first N problems");
  suite->add_option("--inject-fault", suite_fault,
                    "self-test fault (thm-bound-sign)");

  try {
    app.parse(argc, argv);
    if (gen->parsed())
      return run_gen(gen_family, gen_dim, gen_seed, gen_io, gen_alpha,
                     gen_gamma, gen_shift, gen_spread, gen_peclet, gen_n);
    if (solve->parsed())
      return run_solve(solve_a, solve_b, solve_seed, solve_kmax, solve_rtol,
                       solve_bases, solve_io);
    if (mb->parsed()) return run_mb(mb_matrix, mb_tol, mb_trials, mb_seed, mb_io);
    if (fov->parsed()) return run_fov(fov_matrix, fov_angles, fov_io);
    if (cert->parsed())
      return run_certify(cert_b, cert_c, cert_r0, cert_seed, cert_p,
                         cert_kmax, cert_io);
    if (hans->parsed()) return run_hansmann(hans_b, hans_c, hans_p, hans_io);
    if (suite->parsed())
      return run_suite_cmd(suite_families, suite_jobs, suite_out, suite_limit,
                           suite_fault);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "ERROR 1: " << e.what() << "\n";
    return 1;
  } catch (const BoundViolation& e) {
    std::cerr << "ERROR 3: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "ERROR 2: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR 1: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
