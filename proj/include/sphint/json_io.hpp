#pragma once

#include <json.hpp>

#include "measure.hpp"
#include "montecarlo.hpp"
#include "randmat.hpp"
#include "rate.hpp"
#include "variational.hpp"

namespace sphint {

inline void to_json(nlohmann::json& j, const DiscreteMeasure& mu) {
  j = nlohmann::json{{"atoms", mu.atoms()}, {"weights", mu.weights()}};
}

inline void to_json(nlohmann::json& j, const ThetaVector& t) { j = t.values(); }

inline void to_json(nlohmann::json& j, const OutlierSet& o) {
  j = nlohmann::json{{"lower", o.lower}, {"upper", o.upper}};
}

inline void to_json(nlohmann::json& j, const Regime& r) { j = regime_name(r); }

inline void to_json(nlohmann::json& j, const RateComponent& c) {
  j = nlohmann::json{{"theta", c.theta}, {"lambda", c.lambda}, {"c", c.c},
                     {"d", c.d},         {"regime", c.regime}, {"j_value", c.j_value}};
}

inline void to_json(nlohmann::json& j, const RateResult& r) {
  j = nlohmann::json{{"total", r.total}, {"components", r.components}};
}

inline void to_json(nlohmann::json& j, const SimplexPoint& p) { j = p.gamma; }

inline void to_json(nlohmann::json& j, const VariationalSolution& v) {
  j = nlohmann::json{{"gamma", v.gamma_star},
                     {"c", v.c},
                     {"f_value", v.f_value},
                     {"regime", v.regime}};
}

inline void to_json(nlohmann::json& j, const Beta& b) { j = beta_value(b); }

inline void to_json(nlohmann::json& j, const SpectrumSpec& s) {
  j = nlohmann::json{{"bulk", s.bulk},
                     {"lower_outliers", s.lower_outliers},
                     {"upper_outliers", s.upper_outliers},
                     {"N", s.N},
                     {"beta", s.beta}};
}

inline void to_json(nlohmann::json& j, const McEstimate& e) {
  j = nlohmann::json{{"estimate", e.log_mean_per_n}, {"stderr", e.std_error},
                     {"n_samples", e.n_samples},     {"n_batches", e.n_batches},
                     {"ess", e.ess},                 {"low_ess", e.low_ess}};
}

inline void to_json(nlohmann::json& j, const ConvergenceRow& r) {
  j = nlohmann::json{{"N", r.N},
                     {"estimate", r.estimate},
                     {"target", r.j_target},
                     {"gap", r.gap}};
}

}  // namespace sphint
