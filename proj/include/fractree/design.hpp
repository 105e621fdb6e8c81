#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fractree/checks.hpp"
#include "fractree/layers.hpp"
#include "fractree/search.hpp"
#include "fractree/tree.hpp"

namespace fractree {

inline constexpr const char* kToolName = "fractree";
inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to go from parameters to a validated, measured stack.
// Shared by the CLI and the HTTP service.
struct DesignRequest {
  ParamSet params;
  std::optional<double> r;  // empty: largest radius that clears the margin
  Scheme scheme = Scheme::Contract;
  std::optional<double> lambda;
  double top_fill = 0.9;
  double plate_radius = 3.0;         // model units
  double plate_diameter_mm = 300.0;  // fixes the model-to-mm scale
  MaterialSpec material;             // scale_mm_per_unit is derived
  std::optional<double> margin;      // empty: 2% of the root edge length
  std::uint64_t seed = 1;
  long long budget = kDefaultMetricBudget;
  double chord_tolerance_mm = 0.1;
  bool critical_p_hint = false;

  double resolved_margin() const;
  double scale() const { return plate_diameter_mm / (2.0 * plate_radius); }
};

// Limits applied to requests arriving over HTTP.
struct RequestCaps {
  int max_depth = 12;
  long long max_budget = 10'000'000;
};

// Largest root radius whose disks clear `margin` at the request depth (at
// least depth 1 so that sibling pairs constrain it). Falls back to the stock
// radius when no positive radius clears, leaving validation to report it.
double default_radius(const ParamSet& params, double margin);

struct Design {
  DesignRequest request;
  ParamSet params;  // with r resolved
  MaterialSpec material;
  double margin = 0.0;
  Embedding embedding;
  DiskSet disks;
  LayerStack stack;
  std::vector<LayerMetrics> metrics;
  ConstraintReport report;
  std::optional<CriticalPResult> critical_p;
};

// Resolves defaults and validates everything a request carries.
Design prepare_design(const DesignRequest& request);

// prepare_design plus metrics, validation and the optional critical-p hint.
Design run_design(const DesignRequest& request);

// JSON <-> request. Type errors throw Error("invalid_type", ..., field);
// range errors throw DomainError / ResourceLimitError.
DesignRequest request_from_json(const nlohmann::json& j, const RequestCaps* caps = nullptr);
nlohmann::json request_to_json(const DesignRequest& request);

// Flat string map (URL query) to request; keys as in the JSON but without nesting.
DesignRequest request_from_query(const std::multimap<std::string, std::string>& query,
                                 const RequestCaps* caps = nullptr);

// Rounds every number in the document to 9 significant digits.
nlohmann::json canonical_numbers(const nlohmann::json& j);

nlohmann::json layer_records(const Design& design);
nlohmann::json report_json(const Design& design);
nlohmann::json evaluate_json(const Design& design);
nlohmann::json geometry_json(const Design& design);

}  // namespace fractree
