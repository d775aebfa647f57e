#ifndef PARSIMIX_DATASET_HPP_
#define PARSIMIX_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsimix {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnKind { Numeric, Factor };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numeric;      // Numeric columns
  std::vector<int> codes;           // Factor columns: index into levels
  std::vector<std::string> levels;  // Factor columns: stable level order

  std::size_t size() const { return kind == ColumnKind::Numeric ? numeric.size() : codes.size(); }
  bool is_factor() const { return kind == ColumnKind::Factor; }
};

class Dataset {
 public:
  Dataset() = default;

  std::size_t n_rows() const { return n_rows_; }
  const std::vector<Column>& columns() const { return columns_; }

  const Column* find(const std::string& name) const;
  const Column& at(const std::string& name) const;

  void add_numeric(std::string name, std::vector<double> values);
  void add_factor(std::string name, std::vector<int> codes, std::vector<std::string> levels);
  // Builds a factor from raw labels, levels ordered by first appearance.
  void add_factor_labels(std::string name, const std::vector<std::string>& labels);

  // Rows removed by listwise deletion at ingestion.
  std::size_t dropped_rows() const { return dropped_rows_; }
  void set_dropped_rows(std::size_t n) { dropped_rows_ = n; }

  // New dataset with rows reordered (row i of the result is row order[i]).
  Dataset permuted(const std::vector<std::size_t>& order) const;

 private:
  void check_length(std::size_t n, const std::string& name);

  std::size_t n_rows_ = 0;
  bool has_columns_ = false;
  std::vector<Column> columns_;
  std::size_t dropped_rows_ = 0;
};

struct SchemaOverrides {
  std::vector<std::string> factors;
  std::vector<std::string> numerics;
  // Explicit level order for factor columns.
  std::map<std::string, std::vector<std::string>> level_order;
};

// RFC-4180 style CSV with a header row. Empty cells and "NA" are missing;
// rows with any missing cell are dropped and counted. Columns whose cells
// all parse as numbers are numeric unless overridden.
Dataset ingest_csv(const std::filesystem::path& path, const SchemaOverrides& overrides = {});
Dataset parse_csv(std::istream& in, const SchemaOverrides& overrides = {});

// Writes a dataset in the format parse_csv() reads; numbers use shortest
// round-trip representation.
void write_csv(const Dataset& data, std::ostream& out);

struct DataFingerprint {
  std::size_t rows = 0;
  std::vector<std::pair<std::string, std::string>> schema;  // (name, kind)
  std::uint64_t content_hash = 0;
};

DataFingerprint fingerprint(const Dataset& data);

// FNV-1a over raw bytes; stable across runs and platforms.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ULL);

std::string hex64(std::uint64_t v);

}  // namespace parsimix

#endif  // PARSIMIX_DATASET_HPP_
