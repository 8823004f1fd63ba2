#pragma once

#include <string>

#include "rsub/dataset.hpp"

namespace rsub {

// Shortest decimal string that round-trips the double exactly (std::to_chars).
std::string format_double(double v);

// Writes contents to path via a temp file + rename, so readers never observe
// a partially written file.
void write_file_atomic(const std::string& path, const std::string& contents);

// Dataset CSV: header x1,...,xp[,y], one row per observation, round-trip
// formatted values. Metadata/truth travel in a JSON sidecar, not here.
std::string dataset_to_csv(const Dataset& d);
void write_dataset_csv(const Dataset& d, const std::string& path);

// Parses a dataset CSV back. The header decides whether y is present.
Dataset parse_dataset_csv(const std::string& text);
Dataset read_dataset_csv(const std::string& path);

}  // namespace rsub
