#pragma once

#include <string>
#include <vector>

#include "evogen/coalescent.hpp"
#include "evogen/geo.hpp"
#include "evogen/measrep.hpp"
#include "evogen/moran.hpp"
#include "evogen/umm.hpp"

namespace evogen {

// Compact JSON objects; all formats round-trip exactly (doubles at 17
// significant digits, ticks and counts as integers).
std::string kernel_to_json(const MigrationKernel& kernel);
MigrationKernel kernel_from_json(const std::string& text);

std::string umm_to_json(const AtomicUmm& u);
AtomicUmm umm_from_json(const std::string& text);

// JSONL: one meta record, then one record per event / snapshot.
std::string event_log_to_jsonl(const EventLog& log);
EventLog event_log_from_jsonl(const std::string& text);

std::string coalescent_to_jsonl(const CoalescentPath& path);
CoalescentPath coalescent_from_jsonl(const std::string& text);

std::string measure_path_to_jsonl(const AtomicMeasurePath& path);
AtomicMeasurePath measure_path_from_jsonl(const std::string& text);

// CSV with a `# seed=...` provenance comment and a header row; cells print
// as %.17g so identical runs produce identical bytes.
std::string csv_table(std::uint64_t seed, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace evogen
