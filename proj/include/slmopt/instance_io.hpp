#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "slmopt/domain.hpp"

namespace slmopt {

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kPlanSchemaVersion = 1;

// Parse errors throw std::runtime_error with the offending field in the
// message.
Instance parse_instance(const nlohmann::json& doc);
Instance load_instance_file(const std::filesystem::path& path);

struct PlanProvenance {
  std::optional<std::string> solver;
  std::optional<long> seed;
  std::optional<double> gap;
};

struct PlanFile {
  std::string instance_checksum;  // hex fingerprint of the instance
  Plan plan;
  PlanProvenance provenance;
};

PlanFile parse_plan(const nlohmann::json& doc);
PlanFile load_plan_file(const std::filesystem::path& path);
nlohmann::json plan_to_json(const PlanFile& plan_file);
void save_plan_file(const std::filesystem::path& path, const PlanFile& plan_file);

std::string checksum_hex(std::uint64_t fingerprint);

// Convenience: plan file for a freshly solved plan, checksummed against the
// instance it was built for.
PlanFile make_plan_file(const Plan& plan, const Instance& instance,
                        PlanProvenance provenance = {});

}  // namespace slmopt
