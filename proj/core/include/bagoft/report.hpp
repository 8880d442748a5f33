#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "bagoft/gof.hpp"
#include "bagoft/partition.hpp"

namespace bagoft {

/// Library version string (e.g. "1.0.0").
std::string version();

/// Extra key/value pairs echoed into a report's "input" object.
using ReportMeta = std::map<std::string, std::string>;

/// Human-readable JSON tree: one rule list per group.
std::string to_json(const partition::Partition& partition, int indent = 2);

/// Configuration echo as JSON (stable key order).
std::string config_json(const gof::TestConfig& config, const gof::ResolvedConfig& resolved,
                        const std::string& formula);

/// 16-hex-digit FNV-1a hash of config_json().
std::string config_hash(const gof::TestConfig& config, const gof::ResolvedConfig& resolved,
                        const std::string& formula);

/// Full report: summary, median p-value, threshold, decision, covariate
/// ranking, per-split records, configuration, seed, version and config hash.
/// Contains nothing time- or host-dependent, so equal inputs give equal bytes.
std::string to_json(const gof::TestReport& report, const ReportMeta& meta = {}, int indent = 2);

std::string to_json(const gof::HlResult& result, const ReportMeta& meta = {}, int indent = 2);

/// Plain-text summary: decision, median p-value and the top covariates.
std::string summarize(const gof::TestReport& report, std::size_t top = 5);

}  // namespace bagoft
