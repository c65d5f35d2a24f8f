#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/graph.hpp"
#include "gsr/rbm.hpp"

namespace gsr::verify {

enum class Status { pass, fail, skip };
std::string to_string(Status s);

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::fail;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  // Where a WikiCS checkout (wikics/data.json) may live; empty means skip.
  std::filesystem::path data_dir;
};

inline constexpr int kNumCriteria = 10;

CriterionResult run_criterion(int id, const Options& opts);
std::vector<CriterionResult> run_all(const Options& opts);

// "[PASS]  7  psi0 beats phi under blanking (...)  12.3s"
std::string format_line(const CriterionResult& r);
nlohmann::json to_json(const std::vector<CriterionResult>& results);

// Setup used for the blanking comparison; the CLI exposes it as a preset.
SbmParams blanking_sbm(std::uint64_t seed);
RbmTrainConfig blanking_rbm(std::uint64_t seed);
inline constexpr std::size_t kBlankingGibbsRounds = 5;

}  // namespace gsr::verify
