#pragma once

#include <string>

#include "circot/histogram.hpp"

namespace circot {

// Interchange formats: a JSON array of numbers, or CSV with one value per
// line. Readers sniff the payload (leading '[' means JSON), so either format
// works regardless of extension.
Histogram histogram_from_text(const std::string& text, bool normalize);
Histogram read_histogram(const std::string& path, bool normalize);

std::string histogram_to_json(const Histogram& h);
std::string histogram_to_csv(const Histogram& h);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace circot
