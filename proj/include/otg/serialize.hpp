#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "otg/core.hpp"

namespace otg {

using json = nlohmann::ordered_json;

// ---- small file/hash utilities ------------------------------------------

// Writes via a sibling temp file plus rename, so readers never observe a
// half-written file.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

// ---- datasets (JSON lines) ----------------------------------------------
//
// One point per line:
//   {"id": "p0", "features": [0.1, 0.2], "angle": 45.0,
//    "color": [255, 0, 0], "weight": 0.25}
// angle and color are optional.  weight is either present on every line or on
// none (then weights are uniform).  An optional first line without a
// "features" key is treated as a free-form header object.

void write_dataset_jsonl(const std::filesystem::path& path,
                         const DiscreteMeasure<double>& measure,
                         const std::optional<json>& header = std::nullopt);

DiscreteMeasure<double> load_dataset_jsonl(const std::filesystem::path& path);

// Header line of a dataset file, if it has one.
std::optional<json> read_dataset_header(const std::filesystem::path& path);

// ---- transport plans (single JSON object) -------------------------------
//
//   {"rows": 2, "cols": 3, "entries": [[...], [...]], ...}
// Marginals and solver metadata ride along as additional keys; `extra` is
// merged into the top-level object.

void write_plan_json(const std::filesystem::path& path,
                     const TransportPlan<double>& plan,
                     const json& extra = json::object());

TransportPlan<double> load_plan_json(const std::filesystem::path& path);

// Hash of the coupling's bytes; identifies a plan in provenance records.
std::uint64_t plan_hash(const TransportPlan<double>& plan);

// Hash of a measure's numeric content and attributes.
std::uint64_t measure_hash(const DiscreteMeasure<double>& measure);

}  // namespace otg
