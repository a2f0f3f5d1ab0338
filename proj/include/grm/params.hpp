#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grm/core.hpp"
#include "grm/groups.hpp"
#include "grm/mobility.hpp"
#include "grm/stats.hpp"

namespace grm {

/// Every violated constraint of a configuration, one message per field.
class ConfigError : public ParameterError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class ContactMode { Meeting, Proximity };

std::optional<ContactMode> parse_contact_mode(std::string_view name);
std::string_view to_string(ContactMode mode);

struct SocialSpec {
  /// gaussian_random_partition, barabasi_albert, caveman, random_partition or file.
  std::string model = "gaussian_random_partition";
  double mean_cluster_size = 20.0;
  double shape = 10.0;
  double p_in = 0.5;
  double p_out = 0.005;
  std::size_t attachment = 2;  // barabasi_albert m
  std::size_t caves = 0;
  std::size_t cave_size = 0;
  double rewire = 0.0;
  std::vector<std::size_t> cluster_sizes;  // random_partition
  std::filesystem::path file;
  std::optional<std::filesystem::path> communities_file;
};

struct ParameterSet {
  std::optional<std::size_t> node_count;
  std::optional<std::size_t> num_groups;
  std::uint64_t seed = 1;
  Seconds sim_duration = 60 * kDay;
  Seconds group_duration = 30 * kDay;
  Grid grid;
  double gmt_alpha = 2.0;
  Seconds gmt_beta = 30 * kDay;
  TruncatedPowerLaw duration{2.0, 30 * kDay, 60.0};
  TruncatedPowerLaw size{2.24, 30.0, 2.0};
  KDistribution k_distribution = KDistribution::standard();
  double sigma2 = kHour * kHour;
  double gamma = 2.0;
  double speed = 1.4;
  ContactMode contact_mode = ContactMode::Meeting;
  double radio_range = 10.0;
  Seconds time_step = 60.0;
  SocialSpec social;

  /// Throws ConfigError listing every violation.
  void validate() const;
  GroupParams group_params() const;
  MovementParams movement_params() const;
};

/// Duration with unit suffix s, m, h, d or w; a bare number is seconds.
Seconds parse_duration(std::string_view text);

/// JSON with comments. Missing or null fields keep their defaults; unknown
/// keys are errors except those starting with '_'.
ParameterSet parse_parameters(std::string_view json_text, std::string_view source = "config");
ParameterSet load_parameters(const std::filesystem::path& path);

/// Resolved configuration as JSON, times in seconds. `notes` adds a "_notes"
/// array; `unavailable` names top-level keys to write as null.
std::string dump_parameters(const ParameterSet& params, const std::vector<std::string>& notes = {},
                            const std::vector<std::string>& unavailable = {});

}  // namespace grm
