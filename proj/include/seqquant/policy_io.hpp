#pragma once

// Text formats for designed policies.
//
// Policy file:
//   # seqquant policy v1
//   key = value            (header, one per line; see write_policy)
//   [eta_table]
//   log_z theta_1 ... theta_{K-1}
//
// levels.csv:  log_lr,level_1,...,level_{K-1}   one row per continuation node
// overlay CSV: level_1,...,level_{K-1}          a single fixed quantizer

#include <filesystem>
#include <iosfwd>

#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"

namespace seqquant {

/// Malformed or inconsistent policy file.
class PolicyFormatError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr const char* kPolicyMagic = "# seqquant policy v1";

/// Doubles are written in shortest round-trip form, so reading back is exact.
void write_policy(std::ostream& out, const Policy& policy);
Policy read_policy(std::istream& in);
void save_policy(const std::filesystem::path& path, const Policy& policy);
Policy load_policy(const std::filesystem::path& path);

void write_levels_csv(std::ostream& out, const Policy& policy);
void save_levels_csv(const std::filesystem::path& path, const Policy& policy);

void write_overlay_csv(std::ostream& out, const QuantizerParams& params);
void save_overlay_csv(const std::filesystem::path& path, const QuantizerParams& params);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

}  // namespace seqquant
