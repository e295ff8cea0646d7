#include "scoreforge/difficulty.hpp"

#include "scoreforge/errors.hpp"

namespace scoreforge {

nlohmann::json DifficultyFeatures::to_json(const std::string& domain) const {
  nlohmann::json j;
  if (domain == "space") {
    j["nm"] = nm;
    j["pr"] = pr;
    j["al"] = al;
  } else if (domain == "time") {
    j["lc"] = lc;
    j["cg"] = cg;
    j["na"] = na;
    j["dk"] = dk;
    j["dq"] = dq;
    j["dc"] = dc;
  } else if (domain == "social") {
    j["cl"] = cl;
    j["nm"] = nm;
    j["ne"] = ne;
  } else if (domain == "nature") {
    j["kl"] = kl;
    j["cl"] = cl;
    j["nm"] = nm;
  } else if (domain == "mix") {
    j["level_nature"] = level_nature;
    j["level_space"] = level_space;
    j["nm_q"] = nm_q;
    j["nm_a"] = nm_a;
  }
  return j;
}

double difficulty_score(const std::string& domain, const DifficultyFeatures& f) {
  if (domain == "space") return 0.3 * f.nm + 0.5 * f.pr + 0.2 * f.al;
  if (domain == "time")
    return 0.02 * f.lc + 0.2 * f.cg + 0.25 * f.na + 0.05 * f.dk + 0.5 * f.dq + f.dc;
  if (domain == "social") return 0.4 * f.cl + 0.3 * f.nm + 0.3 * f.ne;
  if (domain == "nature") return 0.4 * f.kl + 0.3 * f.cl + 0.5 * f.nm;
  if (domain == "mix")
    return 0.4 * f.level_nature + f.level_space + (f.nm_q + f.nm_a) / 2.0;
  throw MissingFeature("no difficulty formula for domain '" + domain + "'");
}

std::string difficulty_bucket(const ThresholdTable& thresholds,
                              const std::string& domain, double score) {
  auto it = thresholds.find(domain);
  if (it == thresholds.end())
    throw MissingFeature("no difficulty thresholds for domain '" + domain + "'");
  if (score <= it->second.easy_max) return "easy";
  if (score <= it->second.medium_max) return "medium";
  return "hard";
}

}  // namespace scoreforge
