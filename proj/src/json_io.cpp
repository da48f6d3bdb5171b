#include "circot/json_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "circot/error.hpp"

namespace circot {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<double> values_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_array()) fail(errc::parse_error, "expected a JSON array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) fail(errc::parse_error, "histogram entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<double> values_from_csv(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string cell = trimmed(line);
    if (cell.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
      fail(errc::parse_error, "bad CSV value '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Histogram histogram_from_text(const std::string& text, bool normalize) {
  const std::string body = trimmed(text);
  if (body.empty()) fail(errc::parse_error, "empty histogram payload");
  const std::vector<double> values =
      body.front() == '[' ? values_from_json(body) : values_from_csv(body);
  return Histogram::make(values, normalize);
}

Histogram read_histogram(const std::string& path, bool normalize) {
  return histogram_from_text(read_text_file(path), normalize);
}

std::string histogram_to_json(const Histogram& h) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < h.size(); ++i) j.push_back(h[i]);
  return j.dump();
}

std::string histogram_to_csv(const Histogram& h) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", h[i]);
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::parse_error, "cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) fail(errc::parse_error, "failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace circot
