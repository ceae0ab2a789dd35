#pragma once

// CSV and JSON renderings of traces, reports and certificates. CSV floats
// are printed with %.17g, '.' decimal point, no locale, so equal inputs
// produce byte-identical files.

#include <sstream>
#include <string>

#include "json.hpp"

#include "gmrescert/certify.hpp"
#include "gmrescert/fov.hpp"
#include "gmrescert/gmres.hpp"
#include "gmrescert/matrix_market.hpp"
#include "gmrescert/reduction.hpp"

namespace gmrescert {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string csv_num(double v) { return format_g17(v); }

inline Json complex_json(Complex z) {
  return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Json verdict_json(const BoundVerdict& v) {
  Json j;
  j["checked"] = v.checked;
  j["pass"] = v.pass;
  if (v.checked) {
    j["worst_margin"] = v.worst_margin;
    j["worst_k"] = v.worst_k;
  }
  return j;
}

}  // namespace detail

/// Trace CSV: k, res_norm, ratio, moret_gap. The Moret column is empty at
/// steps the identity cannot be formed for (k = 0 and past breakdown).
inline std::string trace_csv(const GmresTrace& trace) {
  std::ostringstream out;
  out << "k,res_norm,ratio,moret_gap\n";
  const int zcols = static_cast<int>(trace.z_basis.cols());
  const int tcols = static_cast<int>(trace.t_basis.cols());
  for (std::size_t k = 0; k < trace.residual_norms.size(); ++k) {
    out << k << "," << detail::csv_num(trace.residual_norms[k]) << ",";
    if (k >= 1 && trace.ratios[k - 1].has_value())
      out << detail::csv_num(*trace.ratios[k - 1]);
    out << ",";
    const int ki = static_cast<int>(k);
    if (ki >= 1 && ki <= zcols && ki + 1 <= tcols &&
        trace.residual_norms[k - 1] > 0)
      out << detail::csv_num(
          moret_step_check(trace, ki).rel_gap);
    out << "\n";
  }
  return out.str();
}

inline Json trace_json(const GmresTrace& trace, bool include_bases = false) {
  Json j;
  j["residual_norms"] = trace.residual_norms;
  Json ratios = Json::array();
  for (const auto& r : trace.ratios) {
    if (r.has_value())
      ratios.push_back(*r);
    else
      ratios.push_back(nullptr);
  }
  j["ratios"] = std::move(ratios);
  if (trace.breakdown_step.has_value())
    j["breakdown_step"] = *trace.breakdown_step;
  else
    j["breakdown_step"] = nullptr;
  j["steps"] = trace.steps();
  if (include_bases) {
    auto basis_json = [](const Matrix& m) {
      Json cols = Json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Json col = Json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          col.push_back(detail::complex_json(m(r, c)));
        cols.push_back(std::move(col));
      }
      return cols;
    };
    j["t_basis"] = basis_json(trace.t_basis);
    j["z_basis"] = basis_json(trace.z_basis);
  }
  return j;
}

inline std::string fov_csv(const FovModel& model) {
  std::ostringstream out;
  out << "theta,h,re_p,im_p\n";
  for (std::size_t i = 0; i < model.angles.size(); ++i)
    out << detail::csv_num(model.angles[i]) << ","
        << detail::csv_num(model.support[i]) << ","
        << detail::csv_num(model.boundary[i].real()) << ","
        << detail::csv_num(model.boundary[i].imag()) << "\n";
  return out.str();
}

inline Json fov_json(const FovModel& model) {
  Json j;
  j["angles"] = model.angles.size();
  j["nu"] = model.nu;
  j["zero_in_closure"] = model.zero_in_closure;
  j["margin"] = model.margin;
  j["norm"] = model.norm_b;
  return j;
}

inline Json report_json(const ReductionReport& r) {
  Json j;
  j["m_b"] = r.m_b;
  j["lambda_b"] = detail::complex_json(r.lambda_b);
  j["m_b_dual"] = r.m_b_dual;
  j["lambda_binv"] = detail::complex_json(r.lambda_binv);
  j["starke_bound"] = r.starke_bound;
  j["elman_bound"] = r.elman_bound;
  j["empirical_lower"] = r.empirical_lower;
  j["eval_count"] = r.eval_count;
  j["nu_b"] = r.nu_b;
  j["nu_binv"] = r.nu_binv;
  j["norm_b"] = r.norm_b;
  j["norm_binv"] = r.norm_binv;
  return j;
}

/// Certificate CSV: one row per step with every bound and its margin.
inline std::string certificate_csv(const Certificate& cert) {
  std::ostringstream out;
  out << "k,observed,thm_bound,rate_bound,approx_bound,moret_bound,"
         "compared,thm_margin,rate_margin,approx_margin\n";
  for (int k = 1; k <= cert.steps(); ++k) {
    const std::size_t i = static_cast<std::size_t>(k - 1);
    auto margin = [&](double obs, double bound) {
      return bound > 0 ? obs / bound - 1.0 : obs - kZeroBoundAbs;
    };
    out << k << "," << detail::csv_num(cert.observed[i]) << ","
        << detail::csv_num(cert.thm_bound[i]) << ","
        << detail::csv_num(cert.rate_bound[i]) << ","
        << detail::csv_num(cert.approx_bound[i]) << ",";
    if (!cert.moret_bound.empty())
      out << detail::csv_num(cert.moret_bound[i]);
    out << "," << (cert.compared[i] ? 1 : 0) << ","
        << detail::csv_num(margin(cert.observed[i], cert.thm_bound[i])) << ","
        << detail::csv_num(margin(std::pow(cert.observed[i], 1.0 / k),
                                  cert.rate_bound[i]))
        << ","
        << detail::csv_num(margin(cert.observed[i], cert.approx_bound[i]))
        << "\n";
  }
  return out.str();
}

inline Json certificate_json(const Certificate& cert) {
  Json j;
  j["problem_id"] = cert.problem_id;
  j["k_max"] = cert.k_max;
  j["steps"] = cert.steps();
  j["observed"] = cert.observed;
  j["thm_bound"] = cert.thm_bound;
  j["rate_bound"] = cert.rate_bound;
  j["approx_bound"] = cert.approx_bound;
  if (!cert.moret_bound.empty()) j["moret_bound"] = cert.moret_bound;
  j["compared"] = cert.compared;
  j["underflow"] = cert.underflow;
  j["inputs"] = Json{{"m_b", cert.m_b},
                     {"m_b_dual", cert.m_b_dual},
                     {"lambda_binv", detail::complex_json(cert.lambda_binv)},
                     {"norm_ainv", cert.norm_ainv},
                     {"sigma_c", cert.sigma_c.values},
                     {"p", cert.p},
                     {"schatten_p", cert.schatten_p}};
  j["verdicts"] = Json{{"thm", detail::verdict_json(cert.thm_verdict)},
                       {"rate", detail::verdict_json(cert.rate_verdict)},
                       {"approx", detail::verdict_json(cert.approx_verdict)},
                       {"approx_vs_thm",
                        detail::verdict_json(cert.approx_vs_thm)},
                       {"moret", detail::verdict_json(cert.moret_verdict)},
                       {"moret_vs_thm",
                        detail::verdict_json(cert.moret_vs_thm)}};
  j["all_pass"] = cert.all_pass();
  return j;
}

}  // namespace gmrescert
