#include "openloop/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "openloop/metrics.hpp"

namespace openloop {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_field(const std::string& text, const std::string& where) {
  T value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw std::invalid_argument(where + ": cannot parse '" + text + "'");
  }
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::vector<ScoreRow> read_score_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  strip_cr(line);
  if (line != kScoreHeader) throw std::invalid_argument(path + ": expected header '" + kScoreHeader + "'");

  std::vector<ScoreRow> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path + ":" + std::to_string(line_number);
    if (fields.size() != 6) throw std::invalid_argument(where + ": expected 6 fields");
    ScoreRow row;
    row.env = fields[0];
    row.method = fields[1];
    row.variant = fields[2];
    row.seed = parse_field<std::uint64_t>(fields[3], where);
    row.generation = parse_field<std::int64_t>(fields[4], where);
    row.episodic_return = parse_field<double>(fields[5], where);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string score_csv(const std::vector<ScoreRow>& rows) {
  std::ostringstream out;
  out << kScoreHeader << '\n';
  for (const ScoreRow& r : rows) {
    out << r.env << ',' << r.method << ',' << r.variant << ',' << r.seed << ',' << r.generation << ','
        << format_double(r.episodic_return) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::map<std::string, Anchors> read_anchor_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  strip_cr(line);
  if (line != "env,r_min,r_max") throw std::invalid_argument(path + ": expected header 'env,r_min,r_max'");
  std::map<std::string, Anchors> anchors;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path + ":" + std::to_string(line_number);
    if (fields.size() != 3) throw std::invalid_argument(where + ": expected 3 fields");
    anchors[fields[0]] = Anchors{parse_field<double>(fields[1], where), parse_field<double>(fields[2], where)};
  }
  return anchors;
}

}  // namespace openloop
