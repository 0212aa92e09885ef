#include "fdr/report.hpp"

#include <charconv>

namespace fdr {

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

Json to_json(const DimReport& report) {
  Json j;
  j["estimator"] = to_string(report.estimator);
  j["set"] = report.set;
  j["structure"] = report.structure;
  j["depth"] = report.depth;
  j["verdict"] = report.verdict();
  j["value"] = report.value ? Json(*report.value) : Json(nullptr);
  j["window"] = Json::array({report.window.lo, report.window.hi});
  Json levels = Json::array();
  for (const auto& row : report.levels) {
    Json r{{"n", row.n}, {"N", row.count}, {"diam", row.diam}};
    if (row.h) r["H"] = *row.h;
    levels.push_back(std::move(r));
  }
  j["levels"] = std::move(levels);
  const auto& d = report.diagnostics;
  Json diag{{"residual", d.residual},
            {"slope_stderr", d.slope_stderr},
            {"ties", d.ties},
            {"flat_segments", d.flat_segments}};
  if (d.s_lo) {
    diag["s_bracket"] = Json::array({*d.s_lo, *d.s_hi});
    diag["tol"] = *d.tol;
    diag["iterations"] = d.iterations;
  }
  j["diagnostics"] = std::move(diag);
  if (report.reduced) {
    const auto& r = *report.reduced;
    j["reduced"] = Json{{"curve", r.curve},
                        {"direct_value", r.direct_value},
                        {"domain_value", r.domain_value},
                        {"exponent_d", r.exponent_d},
                        {"product", r.product},
                        {"gap", r.gap}};
  }
  return j;
}

Json to_json(const VerificationReport& report, const FractalStructure& domain, const FractalStructure& range) {
  Json j;
  j["depth"] = report.depth;
  j["passed"] = report.passed();
  Json conditions = Json::array();
  for (const auto& c : report.conditions) {
    Json w = Json::array();
    for (std::size_t i = 0; i < c.witness.size(); ++i) {
      // Domain cells come first: two for (i) and (ii), none for (iii), one for (iv).
      const std::size_t domain_cells = c.condition == "iii" ? 0 : (c.condition == "iv" ? 1 : 2);
      const bool on_domain = i < domain_cells;
      const auto& fs = on_domain ? domain : range;
      w.push_back(Json{{"side", on_domain ? "domain" : "range"},
                       {"level", c.witness[i].level},
                       {"index", c.witness[i].index},
                       {"coords", fs.coords(c.witness[i])}});
    }
    conditions.push_back(Json{{"condition", c.condition},
                              {"passed", c.passed},
                              {"level", c.level},
                              {"detail", c.detail},
                              {"witness", std::move(w)}});
  }
  j["conditions"] = std::move(conditions);
  return j;
}

Json to_json(const MainHypothesesFit& fit) {
  return Json{{"c", fit.c}, {"exponent", fit.exponent}, {"max_residual", fit.max_residual}};
}

std::string series_csv(const DimReport& report) {
  const bool with_h = !report.levels.empty() && report.levels.front().h.has_value();
  std::string out = with_h ? "n,N,diam,H\n" : "n,N,diam\n";
  for (const auto& row : report.levels) {
    out += std::to_string(row.n) + "," + std::to_string(row.count) + "," + format_double(row.diam);
    if (with_h) out += "," + format_double(row.h.value_or(0.0));
    out += "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "s,n,H\n";
  for (Eigen::Index i = 0; i < sweep.h.rows(); ++i) {
    for (Eigen::Index n = 0; n < sweep.h.cols(); ++n) {
      out += format_double(sweep.s[i]) + "," + std::to_string(n) + "," + format_double(sweep.h(i, n)) + "\n";
    }
  }
  return out;
}

std::string polyline_csv(const std::vector<Point>& points) {
  std::string out;
  for (const Point& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (i > 0) out += ",";
      out += format_double(p[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace fdr
