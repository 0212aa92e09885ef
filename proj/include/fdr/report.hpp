#pragma once

// JSON and CSV views of estimator and verification results. JSON is the
// primary output; the CSVs are plotting views derived from the same data.

#include "json.hpp"

#include <string>

#include "fdr/curve.hpp"
#include "fdr/dims.hpp"

namespace fdr {

using Json = nlohmann::ordered_json;

Json to_json(const DimReport& report);
Json to_json(const VerificationReport& report, const FractalStructure& domain, const FractalStructure& range);
Json to_json(const MainHypothesesFit& fit);

/// n,N,diam[,H] rows of a report.
std::string series_csv(const DimReport& report);
/// s,n,H rows of a sweep.
std::string sweep_csv(const SweepResult& sweep);
/// x,y[,z] rows without a header.
std::string polyline_csv(const std::vector<Point>& points);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

}  // namespace fdr
