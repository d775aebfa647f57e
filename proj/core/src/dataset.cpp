#include "parsimix/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace parsimix {

const Column* Dataset::find(const std::string& name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& Dataset::at(const std::string& name) const {
  const Column* c = find(name);
  if (c == nullptr) throw DataError("unknown column '" + name + "'");
  return *c;
}

void Dataset::check_length(std::size_t n, const std::string& name) {
  if (find(name) != nullptr) throw DataError("duplicate column '" + name + "'");
  if (has_columns_ && n != n_rows_) {
    throw DataError("column '" + name + "' has " + std::to_string(n) + " rows, expected " +
                    std::to_string(n_rows_));
  }
  n_rows_ = n;
  has_columns_ = true;
}

void Dataset::add_numeric(std::string name, std::vector<double> values) {
  check_length(values.size(), name);
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Numeric;
  c.numeric = std::move(values);
  columns_.push_back(std::move(c));
}

void Dataset::add_factor(std::string name, std::vector<int> codes, std::vector<std::string> levels) {
  check_length(codes.size(), name);
  for (int code : codes) {
    if (code < 0 || static_cast<std::size_t>(code) >= levels.size()) {
      throw DataError("factor '" + name + "' has an out-of-range level code");
    }
  }
  for (const auto& l : levels) {
    if (l.empty()) throw DataError("factor '" + name + "' has an empty level");
  }
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Factor;
  c.codes = std::move(codes);
  c.levels = std::move(levels);
  columns_.push_back(std::move(c));
}

void Dataset::add_factor_labels(std::string name, const std::vector<std::string>& labels) {
  std::vector<std::string> levels;
  std::unordered_map<std::string, int> index;
  std::vector<int> codes;
  codes.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = index.try_emplace(l, static_cast<int>(levels.size()));
    if (inserted) levels.push_back(l);
    codes.push_back(it->second);
  }
  add_factor(std::move(name), std::move(codes), std::move(levels));
}

Dataset Dataset::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != n_rows_) throw DataError("permutation length does not match row count");
  Dataset out;
  for (const auto& c : columns_) {
    if (c.is_factor()) {
      std::vector<int> codes(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) codes[i] = c.codes.at(order[i]);
      out.add_factor(c.name, std::move(codes), c.levels);
    } else {
      std::vector<double> v(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) v[i] = c.numeric.at(order[i]);
      out.add_numeric(c.name, std::move(v));
    }
  }
  out.dropped_rows_ = dropped_rows_;
  return out;
}

namespace {

// Splits one logical CSV record; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field near line " + std::to_string(line_no));
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA";
}

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

Dataset parse_csv(std::istream& in, const SchemaOverrides& overrides) {
  std::vector<std::string> header;
  std::size_t line_no = 1;
  if (!read_record(in, header, line_no)) throw DataError("empty CSV input");
  if (header.size() == 1 && header[0].empty()) throw DataError("empty CSV header");
  // Strip a UTF-8 byte order mark.
  if (header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) header[0].erase(0, 3);

  for (const auto& name : overrides.factors) {
    if (!contains(header, name)) throw DataError("override names unknown column '" + name + "'");
  }
  for (const auto& name : overrides.numerics) {
    if (!contains(header, name)) throw DataError("override names unknown column '" + name + "'");
    if (contains(overrides.factors, name)) {
      throw DataError("column '" + name + "' overridden as both factor and numeric");
    }
  }
  for (const auto& [name, _] : overrides.level_order) {
    if (!contains(header, name)) throw DataError("level order names unknown column '" + name + "'");
  }

  std::vector<std::vector<std::string>> cells(header.size());
  std::vector<std::string> fields;
  std::size_t dropped = 0;
  while (true) {
    const std::size_t record_line = line_no;
    if (!read_record(in, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw DataError("ragged row at line " + std::to_string(record_line + 1) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    if (std::any_of(fields.begin(), fields.end(), is_missing)) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < fields.size(); ++j) cells[j].push_back(std::move(fields[j]));
  }
  if (cells.empty() || cells[0].empty()) {
    if (dropped == 0) throw DataError("CSV has a header but no data rows");
    throw DataError("every row has a missing value");
  }

  Dataset data;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& name = header[j];
    const bool force_factor = contains(overrides.factors, name) || overrides.level_order.count(name);
    const bool force_numeric = contains(overrides.numerics, name);
    std::vector<double> values;
    bool numeric = !force_factor;
    if (numeric) {
      values.resize(cells[j].size());
      for (std::size_t i = 0; i < cells[j].size(); ++i) {
        if (!parse_number(cells[j][i], values[i])) {
          if (force_numeric) {
            throw DataError("column '" + name + "' is declared numeric but row " +
                            std::to_string(i + 1) + " holds '" + cells[j][i] + "'");
          }
          numeric = false;
          break;
        }
      }
    }
    if (numeric) {
      data.add_numeric(name, std::move(values));
      continue;
    }
    auto order = overrides.level_order.find(name);
    if (order == overrides.level_order.end()) {
      data.add_factor_labels(name, cells[j]);
      continue;
    }
    const auto& levels = order->second;
    std::vector<int> codes;
    codes.reserve(cells[j].size());
    for (const auto& cell : cells[j]) {
      auto it = std::find(levels.begin(), levels.end(), cell);
      if (it == levels.end()) {
        throw DataError("column '" + name + "' has level '" + cell + "' missing from the level order");
      }
      codes.push_back(static_cast<int>(it - levels.begin()));
    }
    data.add_factor(name, std::move(codes), levels);
  }
  data.set_dropped_rows(dropped);
  return data;
}

Dataset ingest_csv(const std::filesystem::path& path, const SchemaOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, overrides);
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_csv(const Dataset& data, std::ostream& out) {
  const auto& cols = data.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j > 0) out << ',';
    out << quote_if_needed(cols[j].name);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j > 0) out << ',';
      const auto& c = cols[j];
      if (c.is_factor()) {
        out << quote_if_needed(c.levels[c.codes[i]]);
      } else {
        out << format_double(c.numeric[i]);
      }
    }
    out << '\n';
  }
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

DataFingerprint fingerprint(const Dataset& data) {
  DataFingerprint fp;
  fp.rows = data.n_rows();
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const auto& c : data.columns()) {
    fp.schema.emplace_back(c.name, c.is_factor() ? "factor" : "numeric");
    h = fnv1a(c.name.data(), c.name.size(), h);
    if (c.is_factor()) {
      for (int code : c.codes) {
        const auto& level = c.levels[code];
        h = fnv1a(level.data(), level.size() + 1, h);  // include terminator
      }
    } else {
      for (double v : c.numeric) {
        double canonical = v == 0.0 ? 0.0 : v;
        h = fnv1a(&canonical, sizeof canonical, h);
      }
    }
  }
  fp.content_hash = h;
  return fp;
}

}  // namespace parsimix
