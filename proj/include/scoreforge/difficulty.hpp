#pragma once

#include <map>
#include <string>

#include "json.hpp"

namespace scoreforge {

// Feature vector feeding the per-domain difficulty formulas. Only the fields
// of the question's domain are populated; the rest stay zero.
struct DifficultyFeatures {
  // space
  double nm = 0;  // number of entities
  double pr = 0;  // 1 when the question involves more than 2 entities
  double al = 0;  // 1 when entity coverage of the text is incomplete
  // time
  double lc = 0;  // length of the reasoning trace
  double cg = 0;  // difficulty of the most challenging statement
  double na = 0;  // number of options
  double dk = 0;  // difficulty of knowledge
  double dq = 0;  // difficulty of the core question
  double dc = 0;  // 0.5 for cyclic scenarios, 0 otherwise
  // social
  double cl = 0;  // reasoning chain length
  double ne = 0;  // relationship edges in the network
  // nature
  double kl = 0;  // sum of property difficulty
  // mix
  double nm_q = 0;         // 1 when a question entity is implicit
  double nm_a = 0;         // 1 when an answer entity is implicit
  double level_space = 0;  // 1 for vague spatial templates
  double level_nature = 0; // equal to kl

  nlohmann::json to_json(const std::string& domain) const;
};

// Exact per-domain formulas:
//   space:  0.3*nm + 0.5*pr + 0.2*al
//   time:   0.02*lc + 0.2*cg + 0.25*na + 0.05*dk + 0.5*dq + dc
//   social: 0.4*cl + 0.3*nm + 0.3*ne
//   nature: 0.4*kl + 0.3*cl + 0.5*nm
//   mix:    0.4*level_nature + level_space + (nm_q + nm_a) / 2
double difficulty_score(const std::string& domain, const DifficultyFeatures& f);

struct BucketThresholds {
  double easy_max = 0;
  double medium_max = 0;
};

// domain -> thresholds; score <= easy_max is easy, <= medium_max is medium,
// anything above is hard.
using ThresholdTable = std::map<std::string, BucketThresholds>;

std::string difficulty_bucket(const ThresholdTable& thresholds,
                              const std::string& domain, double score);

}  // namespace scoreforge
